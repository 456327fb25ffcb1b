use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

/// Polynomial in (x, y, z), stored as exponent triple -> coefficient.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly3 {
    terms: BTreeMap<[u32; 3], f64>,
}

impl Poly3 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(coef: f64, exps: [u32; 3]) -> Self {
        let mut p = Self::zero();
        p.terms.insert(exps, coef);
        p
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(c, [0, 0, 0])
    }

    pub fn x() -> Self {
        Self::monomial(1.0, [1, 0, 0])
    }

    pub fn y() -> Self {
        Self::monomial(1.0, [0, 1, 0])
    }

    pub fn z() -> Self {
        Self::monomial(1.0, [0, 0, 1])
    }

    pub fn add(&self, other: &Poly3) -> Poly3 {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            *out.terms.entry(*e).or_insert(0.0) += c;
        }
        out.terms.retain(|_, c| *c != 0.0);
        out
    }

    pub fn scale(&self, s: f64) -> Poly3 {
        Poly3 { terms: self.terms.iter().map(|(e, c)| (*e, c * s)).filter(|(_, c)| *c != 0.0).collect() }
    }

    pub fn mul(&self, other: &Poly3) -> Poly3 {
        let mut out = Poly3::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                *out.terms.entry([a[0] + b[0], a[1] + b[1], a[2] + b[2]]).or_insert(0.0) += ca * cb;
            }
        }
        out.terms.retain(|_, c| *c != 0.0);
        out
    }

    /// Value and gradient at `p`.
    pub fn eval(&self, p: &[f64]) -> (f64, [f64; 3]) {
        let max_exp = self.terms.keys().flat_map(|e| e.iter().copied()).max().unwrap_or(0) as usize;
        let mut pows = [vec![1.0; max_exp + 1], vec![1.0; max_exp + 1], vec![1.0; max_exp + 1]];
        for (i, pw) in pows.iter_mut().enumerate() {
            for k in 1..=max_exp {
                pw[k] = pw[k - 1] * p[i];
            }
        }
        let mut v = 0.0;
        let mut g = [0.0; 3];
        for (e, c) in &self.terms {
            let [a, b, d] = [e[0] as usize, e[1] as usize, e[2] as usize];
            v += c * pows[0][a] * pows[1][b] * pows[2][d];
            if a > 0 {
                g[0] += c * a as f64 * pows[0][a - 1] * pows[1][b] * pows[2][d];
            }
            if b > 0 {
                g[1] += c * b as f64 * pows[0][a] * pows[1][b - 1] * pows[2][d];
            }
            if d > 0 {
                g[2] += c * d as f64 * pows[0][a] * pows[1][b] * pows[2][d - 1];
            }
        }
        (v, g)
    }
}

/// Real spherical harmonics of degree `l` (orthonormal in L2(S^2)) as
/// homogeneous harmonic polynomials, ordered m = -l..=l.
pub fn spherical_harmonic_polys(l: usize) -> Vec<Poly3> {
    let r2 = Poly3::x().mul(&Poly3::x()).add(&Poly3::y().mul(&Poly3::y())).add(&Poly3::z().mul(&Poly3::z()));
    let mut out = vec![Poly3::zero(); 2 * l + 1];
    // (x + i y)^m as (re, im)
    let mut re = Poly3::constant(1.0);
    let mut im = Poly3::zero();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=l {
        if m > 0 {
            pmm *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
            let nr = re.mul(&Poly3::x()).add(&im.mul(&Poly3::y()).scale(-1.0));
            let ni = re.mul(&Poly3::y()).add(&im.mul(&Poly3::x()));
            re = nr;
            im = ni;
        }
        // associated Legendre factor as a polynomial in z and r^2
        let mut prev2 = Poly3::zero();
        let mut prev = Poly3::constant(pmm);
        for ll in m + 1..=l {
            let p = if ll == m + 1 {
                Poly3::z().mul(&prev).scale(((2 * m + 3) as f64).sqrt())
            } else {
                let lf = ll as f64;
                let mf = m as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
                Poly3::z().mul(&prev).add(&r2.mul(&prev2).scale(-b)).scale(a)
            };
            prev2 = prev;
            prev = p;
        }
        if m == 0 {
            out[l] = prev;
        } else {
            out[l + m] = prev.mul(&re).scale(SQRT_2);
            out[l - m] = prev.mul(&im).scale(SQRT_2);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::real_sph_harm;
    use nalgebra::Vector3;

    #[test]
    fn matches_numeric_harmonics() {
        let u = Vector3::new(0.3, -0.5, 0.8).normalize();
        let lmax = 6;
        let y = real_sph_harm(lmax, &u);
        for l in 0..=lmax {
            for (i, p) in spherical_harmonic_polys(l).iter().enumerate() {
                let (v, _) = p.eval(u.as_slice());
                assert!((v - y[l * l + i]).abs() < 1e-13, "l={l} i={i}");
            }
        }
    }

    #[test]
    fn polys_are_harmonic_and_homogeneous() {
        for p in spherical_harmonic_polys(4) {
            let p1 = [0.2, 0.7, -0.4];
            let p2 = [0.4, 1.4, -0.8];
            assert!((p.eval(&p2).0 - 16.0 * p.eval(&p1).0).abs() < 1e-12);
            // Euler: x . grad = l f
            let (v, g) = p.eval(&p1);
            let d: f64 = (0..3).map(|i| p1[i] * g[i]).sum();
            assert!((d - 4.0 * v).abs() < 1e-12);
        }
    }
}
