use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::manifold::{Factor, Manifold, Point};
use super::poly::{spherical_harmonic_polys, Poly3};
use crate::error::{Error, Result};

/// Function of one factor's ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum FactorAtom {
    One,
    /// Re or Im of (x + i y)^freq, i.e. cos or sin of freq * angle on the circle.
    Trig { freq: u32, sine: bool },
    /// Polynomial on a sphere factor's R^3.
    Poly(Poly3),
}

impl FactorAtom {
    fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        match self {
            FactorAtom::One => 1.0,
            FactorAtom::Trig { freq, sine } => {
                if *freq == 0 {
                    return if *sine { 0.0 } else { 1.0 };
                }
                // w = (x + i y)^(freq - 1)
                let (mut wr, mut wi) = (1.0, 0.0);
                for _ in 1..*freq {
                    let nr = wr * x[0] - wi * x[1];
                    wi = wr * x[1] + wi * x[0];
                    wr = nr;
                }
                let (zr, zi) = (wr * x[0] - wi * x[1], wr * x[1] + wi * x[0]);
                let k = *freq as f64;
                // d/dx z^k = k w, d/dy z^k = i k w
                if *sine {
                    grad[0] = k * wi;
                    grad[1] = k * wr;
                    zi
                } else {
                    grad[0] = k * wr;
                    grad[1] = -k * wi;
                    zr
                }
            }
            FactorAtom::Poly(p) => {
                let (v, g) = p.eval(x);
                grad.copy_from_slice(&g);
                v
            }
        }
    }
}

/// Sum of products of factor atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisFunction {
    pub terms: Vec<(f64, Vec<FactorAtom>)>,
}

impl BasisFunction {
    pub fn product(atoms: Vec<FactorAtom>) -> Self {
        Self { terms: vec![(1.0, atoms)] }
    }

    /// Factors whose atoms are not all constant.
    fn support(&self) -> Vec<usize> {
        let n = self.terms.first().map_or(0, |t| t.1.len());
        (0..n).filter(|&j| self.terms.iter().any(|(_, a)| a[j] != FactorAtom::One)).collect()
    }

    /// Value and ambient gradient (written into `grad`).
    fn eval(&self, manifold: &Manifold, x: &[f64], grad: &mut [f64]) -> f64 {
        let offsets = manifold.ambient_offsets();
        let factors = manifold.factors();
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut value = 0.0;
        let mut vals = [0.0f64; 8];
        let mut grads = [[0.0f64; 3]; 8];
        for (coef, atoms) in &self.terms {
            for (j, atom) in atoms.iter().enumerate() {
                let k = factors[j].ambient();
                vals[j] = atom.eval(&x[offsets[j]..offsets[j] + k], &mut grads[j][..k]);
            }
            let nf = atoms.len();
            value += coef * vals[..nf].iter().product::<f64>();
            for j in 0..nf {
                let others: f64 = (0..nf).filter(|&i| i != j).map(|i| vals[i]).product();
                let k = factors[j].ambient();
                for a in 0..k {
                    grad[offsets[j] + a] += coef * others * grads[j][a];
                }
            }
        }
        value
    }
}

/// Scalar product used by [`FunctionSpace::orthonormalize`].
#[derive(Debug, Clone, PartialEq)]
pub enum InnerProduct {
    /// L2 with respect to the Riemannian volume (by quadrature).
    L2,
    /// Gram matrix of the current basis.
    Given(DMatrix<f64>),
}

/// Finite-dimensional space of functions on a manifold, held as the
/// combination `combo * raw` of elementary functions.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpace {
    manifold: Manifold,
    raw: Vec<BasisFunction>,
    combo: DMatrix<f64>,
    label: String,
}

impl FunctionSpace {
    pub fn new(manifold: Manifold, raw: Vec<BasisFunction>, label: &str) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidInput("function space needs at least one basis function".into()));
        }
        let nf = manifold.factors().len();
        if nf > 8 {
            return Err(Error::Unsupported(format!("{nf} factors")));
        }
        for f in &raw {
            for (_, atoms) in &f.terms {
                if atoms.len() != nf {
                    return Err(Error::DimensionMismatch { expected: nf, got: atoms.len() });
                }
                for (atom, factor) in atoms.iter().zip(manifold.factors()) {
                    let ok = match atom {
                        FactorAtom::One => true,
                        FactorAtom::Trig { .. } => *factor == Factor::Circle,
                        FactorAtom::Poly(_) => *factor == Factor::Sphere2,
                    };
                    if !ok {
                        return Err(Error::InvalidInput(format!("atom {atom:?} does not live on {factor:?}")));
                    }
                }
            }
        }
        let m = raw.len();
        Ok(Self { manifold, raw, combo: DMatrix::identity(m, m), label: label.to_string() })
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Number of basis functions.
    pub fn dim(&self) -> usize {
        self.combo.nrows()
    }

    /// Same functions on a manifold with different quadrature sizes.
    pub fn on(&self, manifold: Manifold) -> Result<Self> {
        if manifold.factors() != self.manifold.factors() {
            return Err(Error::InvalidInput("spaces can only move between quadratures of one manifold".into()));
        }
        Ok(Self { manifold, ..self.clone() })
    }

    /// Factors the space depends on.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.raw.iter().flat_map(|f| f.support()).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Values of the raw functions at an ambient point, with ambient gradients as rows.
    fn raw_eval(&self, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.manifold.ambient_dim();
        let mut vals = DVector::zeros(self.raw.len());
        let mut jac = DMatrix::zeros(self.raw.len(), n);
        let mut g = vec![0.0; n];
        for (i, f) in self.raw.iter().enumerate() {
            vals[i] = f.eval(&self.manifold, x, &mut g);
            for (a, gv) in g.iter().enumerate() {
                jac[(i, a)] = *gv;
            }
        }
        (vals, jac)
    }

    /// Basis values (length m) and ambient gradients (m x ambient).
    pub fn evaluate(&self, p: &Point) -> (DVector<f64>, DMatrix<f64>) {
        self.evaluate_ambient(p.ambient.as_slice())
    }

    pub fn evaluate_ambient(&self, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let (v, j) = self.raw_eval(x);
        (&self.combo * v, &self.combo * j)
    }

    /// Basis values only.
    pub fn values(&self, p: &Point) -> DVector<f64> {
        self.evaluate(p).0
    }

    /// L2 Gram matrix of the current basis by the manifold's quadrature.
    pub fn gram_l2(&self) -> DMatrix<f64> {
        let m = self.dim();
        let mut g = DMatrix::zeros(m, m);
        for (p, w) in self.manifold.nodes() {
            let v = self.values(&p);
            g += (&v * v.transpose()) * w;
        }
        (&g + g.transpose()) * 0.5
    }

    /// Replaces the basis by `G^{-1/2}` times it, so the Gram matrix becomes the identity.
    pub fn orthonormalize(&self, inner: &InnerProduct) -> Result<Self> {
        let gram = match inner {
            InnerProduct::L2 => self.gram_l2(),
            InnerProduct::Given(g) => {
                if g.nrows() != self.dim() || g.ncols() != self.dim() {
                    return Err(Error::DimensionMismatch { expected: self.dim(), got: g.nrows() });
                }
                (g + g.transpose()) * 0.5
            }
        };
        let eig = SymmetricEigen::new(gram);
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        if !(max > 0.0) || min < 1e-12 * max {
            return Err(Error::DegenerateSpace(if max > 0.0 { min / max } else { 0.0 }));
        }
        let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
        let w = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
        Ok(Self { combo: w * &self.combo, ..self.clone() })
    }

    /// Parses a descriptor (`linear`, `linear factor=<j>`, `eig lambda=<l>`,
    /// `eig <l>`, `const`, `custom cos[..] sin[..] const`) and orthonormalizes
    /// in L2. `slot` picks the factor for `linear` on products.
    pub fn parse(manifold: &Manifold, descriptor: &str, slot: usize) -> Result<Self> {
        let raw = parse_raw(manifold, descriptor, slot)?;
        Self::new(manifold.clone(), raw, descriptor.trim())?.orthonormalize(&InnerProduct::L2)
    }
}

/// Parses a comma-separated list of space descriptors.
pub fn parse_spaces(manifold: &Manifold, list: &str) -> Result<Vec<FunctionSpace>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(slot, d)| FunctionSpace::parse(manifold, d, slot))
        .collect()
}

const SPACE_HELP: &str = "supported spaces: linear, linear factor=<j>, eig lambda=<value>, eig <value>, const, custom cos[k..] sin[k..] const";

fn factor_basis_linear(f: Factor) -> Vec<FactorAtom> {
    match f {
        Factor::Circle => vec![FactorAtom::Trig { freq: 1, sine: false }, FactorAtom::Trig { freq: 1, sine: true }],
        Factor::Sphere2 => vec![Poly3::x(), Poly3::y(), Poly3::z()].into_iter().map(FactorAtom::Poly).collect(),
    }
}

/// Laplacian eigenfunctions of one factor with eigenvalue `lambda`, if any.
fn factor_eigenbasis(f: Factor, lambda: u64) -> Option<Vec<FactorAtom>> {
    match f {
        Factor::Circle => {
            let k = (lambda as f64).sqrt().round() as u64;
            if k * k != lambda {
                return None;
            }
            if k == 0 {
                return Some(vec![FactorAtom::One]);
            }
            let freq = k as u32;
            Some(vec![FactorAtom::Trig { freq, sine: false }, FactorAtom::Trig { freq, sine: true }])
        }
        Factor::Sphere2 => {
            let l = ((-1.0 + (1.0 + 4.0 * lambda as f64).sqrt()) / 2.0).round() as u64;
            if l * (l + 1) != lambda {
                return None;
            }
            if l == 0 {
                return Some(vec![FactorAtom::One]);
            }
            Some(spherical_harmonic_polys(l as usize).into_iter().map(FactorAtom::Poly).collect())
        }
    }
}

fn eigen_raw(manifold: &Manifold, lambda: u64) -> Vec<BasisFunction> {
    let factors = manifold.factors();
    let mut out = Vec::new();
    let mut stack: Vec<(usize, u64, Vec<Vec<FactorAtom>>)> = vec![(0, lambda, Vec::new())];
    while let Some((j, rest, chosen)) = stack.pop() {
        if j == factors.len() {
            if rest == 0 {
                let mut combos: Vec<Vec<FactorAtom>> = vec![Vec::new()];
                for options in &chosen {
                    combos = combos
                        .into_iter()
                        .flat_map(|c| {
                            options.iter().map(move |a| {
                                let mut c2 = c.clone();
                                c2.push(a.clone());
                                c2
                            })
                        })
                        .collect();
                }
                out.extend(combos.into_iter().map(BasisFunction::product));
            }
            continue;
        }
        for part in (0..=rest).rev() {
            if let Some(b) = factor_eigenbasis(factors[j], part) {
                let mut c = chosen.clone();
                c.push(b);
                stack.push((j + 1, rest - part, c));
            }
        }
    }
    out
}

fn parse_freqs(s: &str, n: usize) -> Result<Vec<i64>> {
    let inner = s
        .strip_suffix(']')
        .ok_or_else(|| Error::InvalidInput(format!("malformed frequency vector '{s}'")))?;
    let v = inner
        .split(|c: char| c.is_whitespace() || c == ';')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<i64>().map_err(|_| Error::InvalidInput(format!("bad frequency '{t}'"))))
        .collect::<Result<Vec<_>>>()?;
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    Ok(v)
}

/// cos or sin of <k, t> on a torus, expanded into products of single-angle atoms.
fn trig_monomial(freqs: &[i64], sine: bool) -> BasisFunction {
    // terms of prod_j (cos k_j t_j + i sin k_j t_j) as (re, im, atoms)
    let mut terms: Vec<(f64, f64, Vec<FactorAtom>)> = vec![(1.0, 0.0, Vec::new())];
    for &k in freqs {
        let freq = k.unsigned_abs() as u32;
        let s = if k < 0 { -1.0 } else { 1.0 };
        if freq == 0 {
            terms.iter_mut().for_each(|t| t.2.push(FactorAtom::One));
            continue;
        }
        let mut next = Vec::with_capacity(2 * terms.len());
        for (re, im, atoms) in terms {
            let mut a = atoms.clone();
            a.push(FactorAtom::Trig { freq, sine: false });
            next.push((re, im, a));
            let mut b = atoms;
            b.push(FactorAtom::Trig { freq, sine: true });
            // times i s
            next.push((-im * s, re * s, b));
        }
        terms = next;
    }
    let pick = |(re, im, atoms): (f64, f64, Vec<FactorAtom>)| {
        let c = if sine { im } else { re };
        (c != 0.0).then_some((c, atoms))
    };
    BasisFunction { terms: terms.into_iter().filter_map(pick).collect() }
}

fn parse_raw(manifold: &Manifold, descriptor: &str, slot: usize) -> Result<Vec<BasisFunction>> {
    let d = descriptor.trim().to_ascii_lowercase();
    let factors = manifold.factors();
    let nf = factors.len();
    let mut words = d.split_whitespace();
    let head = words.next().unwrap_or("");
    let one_hot = |j: usize, atom: FactorAtom| {
        let mut atoms = vec![FactorAtom::One; nf];
        atoms[j] = atom;
        BasisFunction::product(atoms)
    };
    match head {
        "linear" => {
            let rest: Vec<&str> = words.collect();
            let j = match rest.as_slice() {
                [] if nf == 1 => 0,
                [] if slot < nf => slot,
                [] => {
                    return Err(Error::InvalidInput(format!(
                        "'linear' in slot {slot} is ambiguous on {}; use 'linear factor=<j>'",
                        manifold.descriptor()
                    )))
                }
                [arg] => arg
                    .strip_prefix("factor=")
                    .and_then(|v| v.parse::<usize>().ok())
                    .filter(|&j| j < nf)
                    .ok_or_else(|| Error::InvalidInput(format!("bad factor selector '{arg}'")))?,
                _ => return Err(Error::InvalidInput(format!("malformed space '{descriptor}'; {SPACE_HELP}"))),
            };
            Ok(factor_basis_linear(factors[j]).into_iter().map(|a| one_hot(j, a)).collect())
        }
        "eig" => {
            let rest: Vec<&str> = words.collect();
            let value = match rest.as_slice() {
                [v] => v.strip_prefix("lambda=").unwrap_or(v).to_string(),
                [k, v] if *k == "lambda" || *k == "lambda=" => v.trim_start_matches('=').to_string(),
                _ => return Err(Error::InvalidInput(format!("malformed space '{descriptor}'; {SPACE_HELP}"))),
            };
            let lambda: f64 = value
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad eigenvalue '{value}'")))?;
            if !(lambda >= 0.0) || lambda.fract() != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "{lambda} is not a Laplacian eigenvalue of {}",
                    manifold.descriptor()
                )));
            }
            let raw = eigen_raw(manifold, lambda as u64);
            if raw.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "{lambda} is not a Laplacian eigenvalue of {}",
                    manifold.descriptor()
                )));
            }
            Ok(raw)
        }
        "const" | "constant" => Ok(vec![BasisFunction::product(vec![FactorAtom::One; nf])]),
        "custom" => {
            if factors.iter().any(|f| *f != Factor::Circle) {
                return Err(Error::Unsupported("custom bases are only defined on circles and tori".into()));
            }
            let rest = d.trim_start_matches("custom").trim();
            let mut out = Vec::new();
            let mut s = rest;
            while !s.is_empty() {
                if let Some(r) = s.strip_prefix("const") {
                    out.push(BasisFunction::product(vec![FactorAtom::One; nf]));
                    s = r.trim_start();
                    continue;
                }
                let sine = if s.starts_with("cos[") {
                    false
                } else if s.starts_with("sin[") {
                    true
                } else {
                    return Err(Error::InvalidInput(format!("malformed custom basis near '{s}'; {SPACE_HELP}")));
                };
                let end = s.find(']').ok_or_else(|| Error::InvalidInput("unclosed '['".into()))?;
                let freqs = parse_freqs(&s[4..=end], nf)?;
                let f = trig_monomial(&freqs, sine);
                if f.terms.is_empty() {
                    return Err(Error::InvalidInput(format!("'{}' is identically zero", &s[..=end])));
                }
                out.push(f);
                s = s[end + 1..].trim_start();
            }
            if out.is_empty() {
                return Err(Error::InvalidInput("empty custom basis".into()));
            }
            Ok(out)
        }
        _ => Err(Error::InvalidInput(format!("unknown space '{descriptor}'; {SPACE_HELP}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn circle_linear_is_scaled() {
        let m = Manifold::circle();
        let raw = parse_raw(&m, "linear", 0).unwrap();
        let s = FunctionSpace::new(m.clone(), raw, "linear").unwrap();
        let o = s.orthonormalize(&InnerProduct::L2).unwrap();
        let p = m.point(&[0.7]).unwrap();
        let v = o.values(&p);
        assert!((v[0] - 0.7f64.cos() / PI.sqrt()).abs() < 1e-14);
        assert!((v[1] - 0.7f64.sin() / PI.sqrt()).abs() < 1e-14);
        assert!((o.gram_l2() - DMatrix::identity(2, 2)).amax() < 1e-10);
        let again = o.orthonormalize(&InnerProduct::L2).unwrap();
        assert!((again.values(&p) - v).amax() < 1e-12);
    }

    #[test]
    fn dependent_basis_is_degenerate() {
        let m = Manifold::circle();
        let c = FactorAtom::Trig { freq: 1, sine: false };
        let raw = vec![
            BasisFunction::product(vec![c.clone()]),
            BasisFunction { terms: vec![(2.0, vec![c])] },
        ];
        let s = FunctionSpace::new(m, raw, "dep").unwrap();
        assert!(matches!(s.orthonormalize(&InnerProduct::L2), Err(Error::DegenerateSpace(_))));
    }

    #[test]
    fn eigenspaces_have_expected_dimension() {
        let s2 = Manifold::sphere2();
        assert_eq!(FunctionSpace::parse(&s2, "eig lambda=6", 0).unwrap().dim(), 5);
        assert_eq!(FunctionSpace::parse(&s2, "eig 12", 0).unwrap().dim(), 7);
        assert!(FunctionSpace::parse(&s2, "eig 5", 0).is_err());
        let t2 = Manifold::torus(2);
        // 1 = 1 + 0 = 0 + 1
        assert_eq!(FunctionSpace::parse(&t2, "eig 1", 0).unwrap().dim(), 4);
        // 2 = 1 + 1
        assert_eq!(FunctionSpace::parse(&t2, "eig 2", 0).unwrap().dim(), 4);
        let c = Manifold::circle();
        assert_eq!(FunctionSpace::parse(&c, "eig 9", 0).unwrap().dim(), 2);
    }

    #[test]
    fn custom_trig_monomials() {
        let t2 = Manifold::torus(2);
        let s = FunctionSpace::new(t2.clone(), parse_raw(&t2, "custom cos[1 -2] sin[1 -2] const", 0).unwrap(), "c").unwrap();
        let p = t2.point(&[0.3, 1.1]).unwrap();
        let v = s.values(&p);
        assert!((v[0] - (0.3f64 - 2.2).cos()).abs() < 1e-14);
        assert!((v[1] - (0.3f64 - 2.2).sin()).abs() < 1e-14);
        assert_eq!(v[2], 1.0);
        assert!(FunctionSpace::parse(&Manifold::sphere2(), "custom cos[1]", 0).is_err());
    }

    #[test]
    fn linear_slots_on_products() {
        let t3 = Manifold::torus(3);
        let s = FunctionSpace::parse(&t3, "linear", 2).unwrap();
        assert_eq!(s.support(), vec![2]);
        let s = FunctionSpace::parse(&t3, "linear factor=0", 2).unwrap();
        assert_eq!(s.support(), vec![0]);
        let mixed = Manifold::parse("s1xs2").unwrap();
        assert!(FunctionSpace::parse(&mixed, "linear", 2).is_err());
        assert!(FunctionSpace::parse(&t3, "quadratic", 0).is_err());
    }
}
