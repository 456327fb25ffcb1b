//! Average number of common zeros from mixed volumes of F-ellipsoids, the
//! closed form for Laplacian eigenspaces and the Hodge-type inequalities.

use std::f64::consts::PI;

use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{factorial, sphere_volume};
use crate::convex::mixed_volume;
use crate::error::{Error, Result};
use crate::geometry::{point_geometry, Factor, FunctionSpace, Manifold};

/// Summary of the pointwise mixed volumes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub value: f64,
    /// `quadrature` or `closed-form`.
    pub method: String,
    pub nodes: usize,
    pub per_node_stats: NodeStats,
    pub inputs_digest: String,
}

fn check_spaces(spaces: &[FunctionSpace]) -> Result<&Manifold> {
    let Some(first) = spaces.first() else {
        return Err(Error::InvalidInput("no function spaces".into()));
    };
    let manifold = first.manifold();
    if let Some(s) = spaces.iter().find(|s| s.manifold().factors() != manifold.factors()) {
        return Err(Error::InvalidInput(format!(
            "space '{}' lives on {}, expected {}",
            s.label(),
            s.manifold().descriptor(),
            manifold.descriptor()
        )));
    }
    if spaces.len() != manifold.dim() {
        return Err(Error::DimensionMismatch { expected: manifold.dim(), got: spaces.len() });
    }
    Ok(manifold)
}

/// FNV-1a over the descriptors, so reports can be matched to their inputs.
fn digest(manifold: &Manifold, spaces: &[FunctionSpace]) -> String {
    let q = manifold.quadrature_sizes();
    let text = format!(
        "{}|{}|{}x{}x{}",
        manifold.descriptor(),
        spaces.iter().map(|s| s.label()).collect::<Vec<_>>().join(";"),
        q.circle,
        q.sphere_z,
        q.sphere_phi
    );
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// Pointwise mixed volumes `V_n(E_1(x), ..., E_n(x))` at the quadrature nodes.
pub fn node_densities(spaces: &[FunctionSpace]) -> Result<Vec<(f64, f64)>> {
    let manifold = check_spaces(spaces)?;
    let nodes = manifold.nodes();
    let results: Vec<Result<(f64, f64)>> = nodes
        .par_iter()
        .enumerate()
        .map(|(i, (p, w))| {
            let geo = point_geometry(spaces, p).map_err(|e| match e {
                Error::ValueConditionViolated { norm, .. } => Error::ValueConditionViolated { node: i, norm },
                other => other,
            })?;
            let bodies: Vec<_> = geo.spaces.into_iter().map(|s| s.ellipsoid).collect();
            Ok((*w, mixed_volume(&bodies)?))
        })
        .collect();
    results.into_iter().collect()
}

/// `n! / (2 pi)^n * sum_nodes w V_n(E_1(x), ..., E_n(x))`.
pub fn predict(spaces: &[FunctionSpace]) -> Result<Prediction> {
    let manifold = check_spaces(spaces)?;
    let n = manifold.dim();
    let dens = node_densities(spaces)?;
    let integral: f64 = dens.iter().map(|(w, v)| w * v).sum();
    let value = factorial(n) / (2.0 * PI).powi(n as i32) * integral;
    let (mut min, mut max, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for (_, v) in &dens {
        min = min.min(*v);
        max = max.max(*v);
        sum += v;
    }
    Ok(Prediction {
        value,
        method: "quadrature".into(),
        nodes: dens.len(),
        per_node_stats: NodeStats { min, max, mean: sum / dens.len() as f64 },
        inputs_digest: digest(manifold, spaces),
    })
}

fn closed_form_constant(n: usize) -> f64 {
    2.0 / (sphere_volume(n) * (n as f64).powf(n as f64 / 2.0))
}

/// `2 / (sigma_n n^{n/2}) sqrt(lambda_1 ... lambda_n) vol(X)`.
pub fn gichev_closed_form(lambdas: &[f64], n: usize, vol: f64) -> Result<f64> {
    if lambdas.len() != n || n == 0 {
        return Err(Error::DimensionMismatch { expected: n, got: lambdas.len() });
    }
    if let Some(&l) = lambdas.iter().find(|l| !(**l > 0.0)) {
        return Err(Error::BadEigenvalue(l));
    }
    Ok(closed_form_constant(n) * lambdas.iter().product::<f64>().sqrt() * vol)
}

/// `2 / (sigma_n n^{n/2}) lambda^{n/2} vol(X)`.
pub fn upper_bound(lambda: f64, n: usize, vol: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::BadEigenvalue(lambda));
    }
    if n == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    Ok(closed_form_constant(n) * lambda.powf(n as f64 / 2.0) * vol)
}

/// Eigenvalues of each space's pullback metric vary by at most this much
/// (relative) over the nodes for the space to count as invariant.
const INVARIANCE_TOL: f64 = 1e-8;

/// Largest relative spread of sorted metric eigenvalues across quadrature nodes.
pub fn metric_eigenvalue_spread(space: &FunctionSpace) -> Result<f64> {
    let manifold = space.manifold();
    let mut reference: Option<Vec<f64>> = None;
    let mut spread: f64 = 0.0;
    for (i, (p, _)) in manifold.nodes().iter().enumerate() {
        let g = crate::geometry::pullback_metric(space, p).map_err(|e| match e {
            Error::ValueConditionViolated { norm, .. } => Error::ValueConditionViolated { node: i, norm },
            other => other,
        })?;
        let mut ev: Vec<f64> = SymmetricEigen::new(g).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        match &reference {
            None => reference = Some(ev),
            Some(r) => {
                let scale = r.iter().fold(1e-300f64, |a, b| a.max(b.abs()));
                for (a, b) in r.iter().zip(&ev) {
                    spread = spread.max((a - b).abs() / scale);
                }
            }
        }
    }
    Ok(spread)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HodgeReport {
    pub invariant: bool,
    /// Set when the inputs are not invariant; the inequalities are then only advisory.
    pub advisory: Option<String>,
    /// `M(V_1, ..., V_{n-1}, V_n)^2`
    pub lhs: f64,
    /// `M(V_1, ..., V_{n-1}, V_{n-1}) M(V_1, ..., V_n, V_n)`
    pub rhs: f64,
    pub holds: bool,
    /// `M(V_1, ..., V_n)^n`
    pub corollary_lhs: f64,
    /// `prod_i M(V_i, ..., V_i)`
    pub corollary_rhs: f64,
    pub corollary_holds: bool,
    pub equality_expected: bool,
    pub equality_holds: bool,
    pub pass: bool,
}

/// Hodge-type inequalities between predictions with repeated slots.
pub fn hodge_report(spaces: &[FunctionSpace]) -> Result<HodgeReport> {
    let manifold = check_spaces(spaces)?;
    let n = spaces.len();
    if n < 2 {
        return Err(Error::InvalidInput("Hodge inequalities need at least two spaces".into()));
    }
    let mut advisory = None;
    let mut invariant = true;
    for s in spaces {
        let spread = metric_eigenvalue_spread(s)?;
        if spread > INVARIANCE_TOL {
            invariant = false;
            advisory = Some(
                Error::NotInvariant(format!("metric eigenvalues of '{}' vary by {spread:.2e} across nodes", s.label()))
                    .to_string(),
            );
        }
    }
    let with = |slots: Vec<&FunctionSpace>| -> Result<f64> {
        let owned: Vec<FunctionSpace> = slots.into_iter().cloned().collect();
        Ok(predict(&owned)?.value)
    };
    let base: Vec<&FunctionSpace> = spaces.iter().collect();
    let full = with(base.clone())?;
    let mut a = base.clone();
    a[n - 1] = &spaces[n - 2];
    let mut b = base.clone();
    b[n - 2] = &spaces[n - 1];
    let rhs = with(a)? * with(b)?;
    let lhs = full * full;
    let slack = |r: f64| 1e-9 * (1.0 + r.abs());
    let holds = lhs >= rhs - slack(rhs);
    let corollary_lhs = full.powi(n as i32);
    let mut corollary_rhs = 1.0;
    for s in spaces {
        corollary_rhs *= with(vec![s; n])?;
    }
    let corollary_holds = corollary_lhs >= corollary_rhs - slack(corollary_rhs);
    let equality_expected = invariant && manifold.factors() == [Factor::Sphere2];
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1e-300);
    let equality_holds = rel(lhs, rhs) <= 1e-6 && rel(corollary_lhs, corollary_rhs) <= 1e-6;
    let pass = holds && corollary_holds && (!equality_expected || equality_holds);
    Ok(HodgeReport {
        invariant,
        advisory,
        lhs,
        rhs,
        holds,
        corollary_lhs,
        corollary_rhs,
        corollary_holds,
        equality_expected,
        equality_holds,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::parse_spaces;

    fn predict_str(m: &Manifold, spaces: &str) -> f64 {
        predict(&parse_spaces(m, spaces).unwrap()).unwrap().value
    }

    #[test]
    fn circle_values() {
        let c = Manifold::circle();
        assert!((predict_str(&c, "linear") - 2.0).abs() < 1e-12);
        assert!((predict_str(&c, "eig 9") - 6.0).abs() < 1e-10);
    }

    #[test]
    fn tori_give_powers_of_two() {
        assert!((predict_str(&Manifold::torus(2), "linear, linear") - 4.0).abs() < 1e-10);
        let t3 = Manifold::torus(3).with_quadrature(crate::geometry::QuadratureSizes { circle: 16, ..Default::default() });
        assert!((predict_str(&t3, "linear, linear, linear") - 8.0).abs() < 1e-10);
    }

    #[test]
    fn sphere_eigenspaces_match_closed_form() {
        let s2 = Manifold::sphere2();
        let v = predict_str(&s2, "eig 2, eig 6");
        let g = gichev_closed_form(&[2.0, 6.0], 2, 4.0 * PI).unwrap();
        assert!((v - g).abs() < 1e-6 * g, "{v} {g}");
        assert!((g - 12f64.sqrt()).abs() < 1e-12);
        assert!((predict_str(&s2, "linear, linear") - 2.0).abs() < 1e-8);
    }

    #[test]
    fn closed_form_values() {
        assert!((gichev_closed_form(&[9.0], 1, 2.0 * PI).unwrap() - 6.0).abs() < 1e-12);
        assert!((upper_bound(6.0, 2, 4.0 * PI).unwrap() - 6.0).abs() < 1e-12);
        assert_eq!(gichev_closed_form(&[0.0, 1.0], 2, 1.0), Err(Error::BadEigenvalue(0.0)));
        assert!(matches!(upper_bound(-1.0, 2, 1.0), Err(Error::BadEigenvalue(_))));
    }

    #[test]
    fn value_condition_is_reported_with_node() {
        let c = Manifold::circle().with_quadrature(crate::geometry::QuadratureSizes { circle: 8, ..Default::default() });
        let s = parse_spaces(&c, "custom sin[1]").unwrap();
        assert!(matches!(predict(&s), Err(Error::ValueConditionViolated { node: 0, .. })));
    }

    #[test]
    fn hodge_cases() {
        let s2 = Manifold::sphere2();
        let r = hodge_report(&parse_spaces(&s2, "eig 2, eig 6").unwrap()).unwrap();
        assert!(r.invariant && r.equality_expected && r.equality_holds && r.pass, "{r:?}");
        let t2 = Manifold::torus(2);
        let r = hodge_report(&parse_spaces(&t2, "linear, linear").unwrap()).unwrap();
        assert!(r.holds && r.corollary_holds && r.pass, "{r:?}");
        assert_eq!(r.rhs, 0.0);
        let r = hodge_report(&parse_spaces(&t2, "eig 1, eig 1").unwrap()).unwrap();
        assert!((r.lhs - r.rhs).abs() < 1e-9 * r.rhs.max(1.0), "{r:?}");
        assert!(hodge_report(&parse_spaces(&Manifold::circle(), "linear").unwrap()).is_err());
    }
}
