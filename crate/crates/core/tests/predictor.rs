use crofton_core::geometry::{parse_spaces, FunctionSpace, InnerProduct, Manifold};
use crofton_core::montecarlo::{count_zeros_1d, estimate, EstimateOptions};
use crofton_core::predictor::{gichev_closed_form, hodge_report, predict, upper_bound};
use proptest::prelude::*;

fn value(m: &Manifold, spaces: &str) -> f64 {
    predict(&parse_spaces(m, spaces).unwrap()).unwrap().value
}

#[test]
fn torus_coordinate_spaces() {
    for n in 1..=3 {
        let m = Manifold::torus(n);
        let spaces: Vec<String> = (0..n).map(|j| format!("linear factor={j}")).collect();
        let v = value(&m, &spaces.join(", "));
        assert!((v - 2f64.powi(n as i32)).abs() < 1e-9, "n={n}: {v}");
    }
}

#[test]
fn sphere_linear_functionals() {
    assert!((value(&Manifold::circle(), "linear") - 2.0).abs() < 1e-12);
    assert!((value(&Manifold::sphere2(), "linear, linear") - 2.0).abs() < 1e-10);
}

#[test]
fn sphere_eigenspaces_match_closed_form() {
    let s2 = Manifold::sphere2();
    for (l1, l2) in [(1u64, 1u64), (1, 2), (2, 3), (3, 3)] {
        let (a, b) = ((l1 * (l1 + 1)) as f64, (l2 * (l2 + 1)) as f64);
        let v = value(&s2, &format!("eig {a}, eig {b}"));
        let g = gichev_closed_form(&[a, b], 2, s2.volume()).unwrap();
        assert!((v - g).abs() <= 1e-9 * g, "({l1},{l2}): {v} vs {g}");
    }
}

#[test]
fn equal_eigenvalues_attain_upper_bound() {
    let s2 = Manifold::sphere2();
    let v = value(&s2, "eig 12, eig 12");
    assert!((v - upper_bound(12.0, 2, s2.volume()).unwrap()).abs() < 1e-6);
    let t2 = Manifold::torus(2);
    let v = value(&t2, "eig 1, eig 1");
    assert!(v <= upper_bound(1.0, 2, t2.volume()).unwrap() + 1e-9);
}

#[test]
fn inner_product_scaling_does_not_change_prediction() {
    let s2 = Manifold::sphere2();
    let base = parse_spaces(&s2, "eig 2, eig 6").unwrap();
    let rescaled: Vec<FunctionSpace> = base
        .iter()
        .zip([3.0, 0.25])
        .map(|(s, c)| {
            let g = s.gram_l2() * c;
            s.orthonormalize(&InnerProduct::Given(g)).unwrap()
        })
        .collect();
    let a = predict(&base).unwrap().value;
    let b = predict(&rescaled).unwrap().value;
    assert!((a - b).abs() <= 1e-10 * a, "{a} vs {b}");
}

#[test]
fn quadrature_refinement_is_stable() {
    for (m, spaces) in [(Manifold::sphere2(), "eig 2, eig 12"), (Manifold::torus(2), "eig 2, eig 5")] {
        let coarse = value(&m, spaces);
        let fine = value(&m.refined(), spaces);
        assert!((coarse - fine).abs() <= 1e-6 * coarse, "{spaces}: {coarse} vs {fine}");
    }
}

#[test]
fn sphere_hodge_equalities() {
    let r = hodge_report(&parse_spaces(&Manifold::sphere2(), "eig 2, eig 6").unwrap()).unwrap();
    assert!(r.invariant && r.equality_expected && r.equality_holds && r.pass);
}

#[test]
fn torus_simulation_is_exact() {
    let m = Manifold::torus(2);
    let spaces = parse_spaces(&m, "linear, linear").unwrap();
    let est = estimate(&spaces, 100, 3, &EstimateOptions::default()).unwrap();
    assert_eq!(est.mean, 4.0);
    assert_eq!(est.stderr, 0.0);
}

#[test]
fn wrong_space_count_is_rejected() {
    let m = Manifold::sphere2();
    let spaces = parse_spaces(&m, "linear").unwrap();
    assert_eq!(predict(&spaces).unwrap_err().tag(), "dimension-mismatch");
    assert!(estimate(&spaces, 10, 0, &EstimateOptions::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zero_count_ignores_sign(coefs in prop::collection::vec(-1.0f64..1.0, 7)) {
        let f = |t: f64| coefs.iter().enumerate().map(|(k, c)| c * ((k as f64) * t + 0.3 * k as f64).cos()).sum::<f64>();
        let a = count_zeros_1d(f, 4096);
        let b = count_zeros_1d(|t| -f(t), 4096);
        prop_assert_eq!(a.count, b.count);
    }
}
