//! Mixed volumes V(A_1, ..., A_n) of centrally symmetric bodies.
//!
//! The primary route expands every body into atoms (points, segments,
//! ellipsoids) by multilinearity and evaluates each atom tuple exactly:
//!
//! * any point atom gives 0;
//! * a segment `[-v, v]` is peeled off with
//!   `V([-v,v], K_2..K_n) = (2|v| / n) V(pi K_2, ..., pi K_n)`, where `pi`
//!   projects onto `v^perp`;
//! * tuples of ellipsoids use the surface formula
//!   `V(K_1..K_n) = (1/n) int_{S^{n-1}} h_1 D(d^2 h_2, ..., d^2 h_n) du`
//!   with the mixed discriminant of the tangential Hessians, integrated by
//!   a spectrally convergent rule after a common whitening map.
//!
//! [`mixed_volume_polarized`] is the inclusion–exclusion formula over
//! volumes of partial sums; it is kept as an independent cross-check.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::body::{Atom, ConvexBody};
use super::volume::{volume_with, VolumeMethod, VolumeOptions};
use crate::constants::factorial;
use crate::error::{Error, Result};
use crate::linalg::orthogonal_complement;
use crate::quadrature::SphereRule;

/// Mixed volume of `n` bodies in R^n.
pub fn mixed_volume(bodies: &[ConvexBody]) -> Result<f64> {
    let n = bodies.len();
    if n == 0 {
        return Ok(1.0);
    }
    for b in bodies {
        if b.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.dim() });
        }
    }
    if n > 4 {
        return Err(Error::Unsupported(format!("mixed volume in dimension {n}")));
    }
    let expansions: Vec<Vec<(f64, Atom)>> = bodies.iter().map(|b| b.atoms()).collect();
    if expansions.iter().any(|e| e.is_empty()) {
        return Ok(0.0);
    }
    let mut total = 0.0;
    let mut idx = vec![0usize; n];
    loop {
        let coef: f64 = idx.iter().enumerate().map(|(i, &j)| expansions[i][j].0).product();
        if coef != 0.0 {
            let tuple: Vec<Atom> = idx.iter().enumerate().map(|(i, &j)| expansions[i][j].1.clone()).collect();
            total += coef * atom_mixed_volume(tuple, n);
        }
        // odometer
        let mut d = 0;
        loop {
            if d == n {
                return Ok(total.max(0.0));
            }
            idx[d] += 1;
            if idx[d] < expansions[d].len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

fn atom_mixed_volume(mut atoms: Vec<Atom>, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if atoms.iter().any(|a| matches!(a, Atom::Point)) {
        return 0.0;
    }
    if let Some(pos) = atoms.iter().position(|a| matches!(a, Atom::Segment(_))) {
        let Atom::Segment(v) = atoms.remove(pos) else { unreachable!() };
        let len = v.norm();
        if len == 0.0 {
            return 0.0;
        }
        let frame = orthogonal_complement(&[v], n);
        let rest: Vec<Atom> = atoms.iter().map(|a| a.project(&frame)).collect();
        return 2.0 * len / n as f64 * atom_mixed_volume(rest, n - 1);
    }
    // Only ellipsoids of rank >= 2 remain, so n >= 2.
    let flat: Vec<usize> = atoms
        .iter()
        .enumerate()
        .filter(|(_, a)| matches!(a, Atom::Ellipsoid { full_rank: false, .. }))
        .map(|(i, _)| i)
        .collect();
    if flat.len() >= 2 {
        let bodies: Vec<ConvexBody> = atoms.iter().map(|a| a.to_body(n)).collect();
        return mixed_volume_polarized(&bodies, VolumeMethod::MembershipGrid, &VolumeOptions::default())
            .unwrap_or(0.0);
    }
    if let Some(&i) = flat.first() {
        atoms.swap(0, i);
    }
    let qs: Vec<DMatrix<f64>> = atoms
        .into_iter()
        .map(|a| match a {
            Atom::Ellipsoid { q, .. } => q,
            _ => unreachable!(),
        })
        .collect();
    smooth_mixed_volume(&qs)
}

/// Mixed volume of ellipsoids with shapes `qs`; all but the first must be
/// positive definite.
pub(crate) fn smooth_mixed_volume(qs: &[DMatrix<f64>]) -> f64 {
    let n = qs[0].nrows();
    // Common whitening: V(L K_1..L K_n) = |det L| V(K_1..K_n).
    let mut avg = DMatrix::zeros(n, n);
    for q in qs {
        avg += q / q.trace();
    }
    let eig = SymmetricEigen::new(avg);
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let l = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
    let scale: f64 = eig.eigenvalues.iter().map(|l| l.sqrt()).product();
    let white: Vec<DMatrix<f64>> = qs
        .iter()
        .map(|q| {
            let w = &l * q * &l;
            (&w + w.transpose()) * 0.5
        })
        .collect();
    let kappa = white
        .iter()
        .skip(1)
        .map(|q| {
            let e = SymmetricEigen::new(q.clone()).eigenvalues;
            e.max() / e.min()
        })
        .fold(1.0f64, f64::max);
    let rule = cached_rule(n, level_for(n, kappa));
    let integral = match n {
        2 => {
            let det2 = white[1].determinant();
            rule.integrate(|u| {
                let h1 = quad_form(&white[0], u).max(0.0).sqrt();
                let h2 = quad_form(&white[1], u).sqrt();
                h1 * det2 / (h2 * h2 * h2)
            })
        }
        _ => rule.integrate(|u| {
            let h1 = quad_form(&white[0], u).max(0.0).sqrt();
            let hessians: Vec<DMatrix<f64>> = white[1..].iter().map(|q| support_hessian(q, u)).collect();
            h1 * restricted_mixed_discriminant(&hessians, u)
        }),
    };
    scale * integral / n as f64
}

fn quad_form(q: &DMatrix<f64>, u: &DVector<f64>) -> f64 {
    (u.transpose() * q * u)[(0, 0)]
}

/// Hessian of h(u) = sqrt(u^T Q u).
fn support_hessian(q: &DMatrix<f64>, u: &DVector<f64>) -> DMatrix<f64> {
    let qu = q * u;
    let h = u.dot(&qu).sqrt();
    q / h - (&qu * qu.transpose()) / (h * h * h)
}

/// Mixed discriminant of the restrictions to u^perp. Each Hessian has u in
/// its kernel, so det on u^perp equals det(A + u u^T).
fn restricted_mixed_discriminant(mats: &[DMatrix<f64>], u: &DVector<f64>) -> f64 {
    let m = mats.len();
    let uu = u * u.transpose();
    let mut total = 0.0;
    for mask in 1u32..(1 << m) {
        let mut acc = uu.clone();
        for (i, a) in mats.iter().enumerate() {
            if mask & (1 << i) != 0 {
                acc += a;
            }
        }
        let sign = if (m - mask.count_ones() as usize) % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * acc.determinant();
    }
    total / factorial(m)
}

fn level_for(n: usize, kappa: f64) -> usize {
    let root = kappa.sqrt();
    match n {
        2 => ((40.0 * root / 256.0).ceil() as usize).clamp(1, 64),
        3 => ((root / 2.0).ceil() as usize).clamp(1, 8),
        _ => ((root / 4.0).ceil() as usize).clamp(1, 2),
    }
}

fn cached_rule(n: usize, level: usize) -> Arc<SphereRule> {
    static RULES: OnceLock<Mutex<HashMap<(usize, usize), Arc<SphereRule>>>> = OnceLock::new();
    let map = RULES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().expect("rule cache poisoned");
    guard.entry((n, level)).or_insert_with(|| Arc::new(SphereRule::standard(n, level))).clone()
}

/// `(1/n!) sum_{S subset [n]} (-1)^{n-|S|} vol(sum_{i in S} A_i)`.
pub fn mixed_volume_polarized(bodies: &[ConvexBody], method: VolumeMethod, opts: &VolumeOptions) -> Result<f64> {
    let n = bodies.len();
    for b in bodies {
        if b.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.dim() });
        }
    }
    let mut total = 0.0;
    for mask in 1u32..(1 << n) {
        let parts: Vec<(f64, ConvexBody)> = bodies
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, b)| (1.0, b.clone()))
            .collect();
        let body = if parts.len() == 1 { parts[0].1.clone() } else { ConvexBody::sum(parts) };
        let sign = if (n - mask.count_ones() as usize) % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * volume_with(&body, method, opts)?;
    }
    Ok(total / factorial(n))
}
