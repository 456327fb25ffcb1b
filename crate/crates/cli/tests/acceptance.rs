//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use crofton_cli::config::{Identity, Mode, RunConfig};
use crofton_cli::report::DEFAULT_ABS_TOL;
use crofton_cli::run;
use crofton_core::constants::{ball_volume, factorial, DimensionalConstants};
use crofton_core::convex::{check_alexandrov_fenchel, mixed_volume, ConvexBody};
use crofton_core::geometry::{parse_spaces, Manifold};
use crofton_core::grassmann::{
    alesker_identity_residual, cosine_transform, haar2_check, inverse_cosine_transform, verify_crofton_product,
    verify_product_identity, FourierSeries, Harmonic, Region, ShExpansion,
};
use crofton_core::linalg::matrix_from_rows;
use crofton_core::montecarlo::{estimate, EstimateOptions};
use crofton_core::predictor::{gichev_closed_form, predict, upper_bound};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn model(mode: Mode, manifold: &str, spaces: &[&str], samples: u64, seed: u64) -> RunConfig {
    let mut c = RunConfig { mode, manifold: Some(manifold.into()), ..Default::default() };
    c.spaces = spaces.iter().map(|s| s.to_string()).collect();
    c.params.samples = Some(samples);
    c.params.seed = Some(seed);
    c
}

fn torus_exactness() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for n in 1..=3usize {
        let spaces: Vec<String> = (0..n).map(|j| format!("linear factor={j}")).collect();
        let refs: Vec<&str> = spaces.iter().map(String::as_str).collect();
        let want = 2f64.powi(n as i32);
        let p = run(&model(Mode::Predict, &format!("torus{n}"), &refs, 0, 0)).map_err(|e| e.to_string())?;
        let value = p.result["value"].as_f64().unwrap();
        let s = run(&model(Mode::Simulate, &format!("torus{n}"), &refs, 100, 17)).map_err(|e| e.to_string())?;
        let (mean, stderr) = (s.result["mean"].as_f64().unwrap(), s.result["stderr"].as_f64().unwrap());
        ok &= (value - want).abs() <= 1e-6 && mean == want && stderr == 0.0;
        notes.push(format!("T{n}: predict {value:.9}, simulate {mean} ± {stderr}"));
    }
    check(ok, notes.join("; "))
}

fn sphere_crofton_constant() -> Outcome {
    let s1 = run(&model(Mode::Predict, "s1", &["linear"], 0, 0)).map_err(|e| e.to_string())?;
    let s2 = run(&model(Mode::Predict, "s2", &["linear", "linear"], 0, 0)).map_err(|e| e.to_string())?;
    let (a, b) = (s1.result["value"].as_f64().unwrap(), s2.result["value"].as_f64().unwrap());
    check((a - 2.0).abs() <= 1e-9 && (b - 2.0).abs() <= 1e-4, format!("S1 {a:.12}, S2 {b:.12}"))
}

fn gichev_cross_check() -> Outcome {
    let s2 = Manifold::sphere2();
    let mut ok = true;
    let mut notes = Vec::new();
    for (l1, l2) in [(1u32, 1u32), (1, 2), (2, 2), (3, 3)] {
        let (a, b) = ((l1 * (l1 + 1)) as f64, (l2 * (l2 + 1)) as f64);
        let spaces = parse_spaces(&s2, &format!("eig {a}, eig {b}")).map_err(|e| e.to_string())?;
        let v = predict(&spaces).map_err(|e| e.to_string())?.value;
        let g = gichev_closed_form(&[a, b], 2, s2.volume()).map_err(|e| e.to_string())?;
        let est = estimate(&spaces, 300, 11, &EstimateOptions::default()).map_err(|e| e.to_string())?;
        let z = if est.stderr > 0.0 { (est.mean - v).abs() / est.stderr } else { 0.0 };
        let good = (v - g).abs() <= 1e-5 * g && (est.mean - v).abs() <= 3.0 * est.stderr + DEFAULT_ABS_TOL;
        ok &= good;
        notes.push(format!("({l1},{l2}) {v:.6}/{g:.6} mc {:.3}±{:.3} z={z:.2}", est.mean, est.stderr));
    }
    check(ok, notes.join("; "))
}

fn random_ellipsoid(rng: &mut ChaCha8Rng, n: usize) -> ConvexBody {
    let a: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * a[j][k]).sum::<f64>() + if i == j { 0.05 } else { 0.0 }).collect())
        .collect();
    ConvexBody::Ellipsoid { q }
}

fn mixed_volume_goldens() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for n in 1..=4 {
        let segs: Vec<ConvexBody> = (0..n)
            .map(|i| {
                let mut v = vec![0.0; n];
                v[i] = 0.5;
                ConvexBody::segment(&v)
            })
            .collect();
        ok &= mixed_volume(&segs).map_err(|e| e.to_string())? == 1.0 / factorial(n);
    }
    notes.push("segments exact".to_string());
    let mut worst = 0.0f64;
    for n in 2..=4 {
        let radii = [0.5, 1.5, 2.0, 0.7];
        let balls: Vec<ConvexBody> = radii[..n].iter().map(|r| ConvexBody::ball(n, *r)).collect();
        let want = ball_volume(n) * radii[..n].iter().product::<f64>();
        worst = worst.max((mixed_volume(&balls).map_err(|e| e.to_string())? - want).abs());
    }
    ok &= worst <= 1e-9;
    notes.push(format!("balls max err {worst:.1e}"));
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut held = 0;
    for n in [2, 3] {
        for _ in 0..100 {
            let bodies: Vec<ConvexBody> = (0..n).map(|_| random_ellipsoid(&mut rng, n)).collect();
            held += check_alexandrov_fenchel(&bodies, 1e-9).map_err(|e| e.to_string())?.holds as usize;
        }
    }
    ok &= held == 200;
    notes.push(format!("AF {held}/200"));
    check(ok, notes.join("; "))
}

fn density_product() -> Outcome {
    let disk = ConvexBody::ball(2, 1.0);
    let cases = [
        ("disk x disk", vec![disk.clone(), disk.clone()]),
        ("ellipse x disk", vec![ConvexBody::diagonal_ellipsoid(&[4.0, 1.0]).unwrap(), disk.clone()]),
        ("segment x segment", vec![ConvexBody::segment(&[1.0, 0.0]), ConvexBody::segment(&[0.6, 0.8])]),
        ("(disk+segment) x disk", vec![ConvexBody::sum(vec![(1.0, disk.clone()), (1.0, ConvexBody::segment(&[1.0, 0.0]))]), disk]),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (i, (name, bodies)) in cases.iter().enumerate() {
        let r = verify_product_identity(bodies, &Region::unit_square(), 1_000_000, 100 + i as u64, 0.02, 32)
            .map_err(|e| e.to_string())?;
        ok &= r.pass;
        notes.push(format!("{name} rel {:.1e}", r.relative_deviation));
    }
    // the same check through the command layer
    let mut c = RunConfig { mode: Mode::Verify, ..Default::default() };
    c.verify.identity = Some(Identity::Product);
    c.verify.bodies = Some("disk, disk".into());
    c.verify.region = Some("unit-square".into());
    c.params.samples = Some(1_000_000);
    c.params.tol = Some(0.02);
    ok &= run(&c).map_err(|e| e.to_string())?.pass();
    check(ok, notes.join("; "))
}

fn alesker_haar2() -> Outcome {
    let mut worst2 = 0.0f64;
    for (a, b) in [(2.0, 1.0), (1.0, 0.3), (3.0, 2.5)] {
        worst2 = worst2.max(alesker_identity_residual(&ConvexBody::diagonal_ellipsoid(&[a * a, b * b]).unwrap(), 32).map_err(|e| e.to_string())?);
        let d = matrix_from_rows(&[vec![1.0], vec![0.0]]);
        let body = ConvexBody::Ellipsoid { q: vec![vec![a * a, 0.3], vec![0.3, b * b + 0.2]] };
        worst2 = worst2.max(haar2_check(&body, &d, 32).map_err(|e| e.to_string())?.residual);
    }
    let mut worst3 = 0.0f64;
    let plane = matrix_from_rows(&[vec![1.0, 0.0], vec![0.0, 0.6], vec![0.0, 0.8]]);
    for diag in [[4.0, 1.0, 1.0], [4.0, 2.0, 0.5], [1.0, 1.0, 1.0]] {
        let e = ConvexBody::diagonal_ellipsoid(&diag).unwrap();
        worst3 = worst3.max(alesker_identity_residual(&e, 16).map_err(|e| e.to_string())?);
        worst3 = worst3.max(haar2_check(&e, &plane, 16).map_err(|e| e.to_string())?.residual);
    }
    check(worst2 <= 1e-6 && worst3 <= 1e-3, format!("R2 max residual {worst2:.1e}, R3 max residual {worst3:.1e}"))
}

fn crofton_product() -> Outcome {
    let cases: [(&[usize], Vec<Vec<f64>>); 4] = [
        (&[2], vec![vec![0.0, 1.5]]),
        (&[3], vec![vec![0.0, 1.0, 0.0]]),
        (&[2, 2], vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]]),
        (&[2, 3], vec![vec![1.0, 0.5, 0.2, 0.0, 0.0], vec![0.0, 0.3, 0.0, 1.0, -0.4]]),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (i, (dims, edges)) in cases.iter().enumerate() {
        let r = verify_crofton_product(dims, edges, 1_000_000, 300 + i as u64, 0.02).map_err(|e| e.to_string())?;
        ok &= r.pass;
        notes.push(format!("{dims:?} rel {:.1e}", r.relative_deviation));
    }
    check(ok, notes.join("; "))
}

fn constants_identity() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=6 {
        let c = DimensionalConstants::new(n);
        let rhs = 2.0 * (2.0 * PI).powi(n as i32) / factorial(n);
        worst = worst.max(c.identity_residual().abs() / rhs);
    }
    check(worst <= 1e-12, format!("max relative residual {worst:.1e}"))
}

fn transform_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for dim in [2, 3] {
        for _ in 0..50 {
            let bw = 2 * rng.random_range(0..=8usize);
            let f = if dim == 2 {
                let mut s = FourierSeries::zeros(bw);
                for k in (0..=bw).step_by(2) {
                    s.cos[k] = rng.random_range(-1.0..1.0);
                    s.sin[k] = if k > 0 { rng.random_range(-1.0..1.0) } else { 0.0 };
                }
                Harmonic::Circle(s)
            } else {
                let mut s = ShExpansion::zeros(bw);
                for l in (0..=bw).step_by(2) {
                    for i in l * l..(l + 1) * (l + 1) {
                        s.coeffs[i] = rng.random_range(-1.0..1.0);
                    }
                }
                Harmonic::Sphere(s)
            };
            let back = cosine_transform(&inverse_cosine_transform(&f).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            for _ in 0..20 {
                let u: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                worst = worst.max((f.eval(&u) - back.eval(&u)).abs());
            }
        }
    }
    check(worst <= 1e-10, format!("100 gauges, max deviation {worst:.1e}"))
}

fn upper_bound_check() -> Outcome {
    let configs: [(&str, &[f64], bool); 3] =
        [("s1", &[1.0, 4.0, 9.0, 25.0], true), ("s2", &[2.0, 6.0, 12.0, 20.0], true), ("torus2", &[1.0, 2.0, 4.0, 5.0], false)];
    let mut ok = true;
    let mut notes = Vec::new();
    for (desc, lambdas, equality) in configs {
        let m = Manifold::parse(desc).map_err(|e| e.to_string())?;
        let mut worst_ratio = 0.0f64;
        for &l in lambdas {
            let list = vec![format!("eig {l}"); m.dim()].join(", ");
            let v = predict(&parse_spaces(&m, &list).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?.value;
            let ub = upper_bound(l, m.dim(), m.volume()).map_err(|e| e.to_string())?;
            ok &= v <= ub * (1.0 + 1e-9);
            if equality {
                ok &= (v - ub).abs() <= 1e-6 * ub;
            }
            worst_ratio = worst_ratio.max(v / ub);
        }
        notes.push(format!("{desc} max predict/bound {worst_ratio:.9}"));
    }
    check(ok, notes.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("torus exactness", torus_exactness),
        ("sphere Crofton constant", sphere_crofton_constant),
        ("closed-form eigenspace cross-check", gichev_cross_check),
        ("mixed-volume goldens", mixed_volume_goldens),
        ("density-product identity", density_product),
        ("Alesker and Haar-2 residuals", alesker_haar2),
        ("Crofton product check", crofton_product),
        ("constants identity", constants_identity),
        ("transform round-trip", transform_round_trip),
        ("upper bound", upper_bound_check),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failed += outcome.is_err() as usize;
        println!("criterion {:>2} {tag} {name} [{secs:.1}s]: {detail}", i + 1);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
