use std::f64::consts::PI;

use crofton_core::constants::{ball_volume, sphere_volume};
use crofton_core::convex::ConvexBody;
use crofton_core::grassmann::{
    cosine_transform, inverse_cosine_transform, inverse_cosine_transform_of, multiplier, FourierSeries, Harmonic,
    NormalMeasure1, ShExpansion,
};
use crofton_core::quadrature::gauss_legendre_on;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_even(rng: &mut ChaCha8Rng, dim: usize, bw: usize) -> Harmonic {
    match dim {
        2 => {
            let mut f = FourierSeries::zeros(bw);
            for k in (0..=bw).step_by(2) {
                f.cos[k] = rng.random_range(-1.0..1.0);
                if k > 0 {
                    f.sin[k] = rng.random_range(-1.0..1.0);
                }
            }
            Harmonic::Circle(f)
        }
        _ => {
            let mut s = ShExpansion::zeros(bw);
            for l in (0..=bw).step_by(2) {
                for i in l * l..(l + 1) * (l + 1) {
                    s.coeffs[i] = rng.random_range(-1.0..1.0);
                }
            }
            Harmonic::Sphere(s)
        }
    }
}

#[test]
fn round_trip_on_random_gauges() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for dim in [2, 3] {
        for _ in 0..50 {
            let bw = 2 * rng.random_range(0..=8);
            let f = random_even(&mut rng, dim, bw);
            let back = cosine_transform(&inverse_cosine_transform(&f).unwrap()).unwrap();
            for _ in 0..20 {
                let u: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                let (a, b) = (f.eval(&u), back.eval(&u));
                assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "dim {dim} bw {bw}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn odd_input_is_rejected() {
    let mut f = FourierSeries::zeros(3);
    f.cos[1] = 1.0;
    assert_eq!(cosine_transform(&Harmonic::Circle(f)).unwrap_err().tag(), "not-even");
}

#[test]
fn planar_multipliers_match_quadrature() {
    // T_1 cos(2j t) at t = 0 is (1/2 pi) int cos(2j s) |cos s| ds
    let (s, w) = gauss_legendre_on(400, -PI / 2.0, PI / 2.0);
    for j in 0..6 {
        let k = 2 * j;
        let half: f64 = s.iter().zip(&w).map(|(s, w)| w * (k as f64 * s).cos() * s.cos()).sum();
        // |cos| has period pi
        let direct = 2.0 * half / (2.0 * PI);
        assert!((multiplier(2, k) - direct).abs() < 1e-13, "degree {k}");
    }
}

#[test]
fn spatial_multipliers_match_legendre_quadrature() {
    // int_0^1 t P_2(t) dt = 1/8, int_0^1 t P_4(t) dt = -1/48
    assert!((multiplier(3, 0) - 0.5).abs() < 1e-15);
    assert!((multiplier(3, 2) - 0.125).abs() < 1e-15);
    assert!((multiplier(3, 4) + 1.0 / 48.0).abs() < 1e-15);
}

#[test]
fn constant_normalization_bridge() {
    for n in [2, 3] {
        let one = Harmonic::constant(n, 1.0).unwrap();
        let t = cosine_transform(&one).unwrap();
        let expect = 2.0 * ball_volume(n - 1) / sphere_volume(n - 1);
        assert!((t.mean() - expect).abs() < 1e-14, "n={n}");
    }
}

#[test]
fn width_preimage_reproduces_width() {
    let body = ConvexBody::diagonal_ellipsoid(&[4.0, 1.0]).unwrap();
    let phi = inverse_cosine_transform_of(2, 48, |u| body.width(u)).unwrap();
    let measure = NormalMeasure1::of_body(&body, 48).unwrap();
    for k in 0..12 {
        let t = k as f64 * 0.37;
        let xi = [t.cos(), t.sin()];
        let back = cosine_transform(&phi).unwrap().eval(&xi);
        assert!((back - body.width(&xi)).abs() < 1e-6, "{back}");
        assert!((measure.t1_at(&xi).unwrap() - body.width(&xi)).abs() < 1e-6);
    }
}
