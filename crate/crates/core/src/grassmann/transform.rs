//! Cosine transform on Gr(1, V), dim V in {2, 3}.
//!
//! Convention: Gr(1, V) carries the Haar probability measure, so
//! `T_1 f(G) = E_H[ f(H) cos(H, G) ]` and `T_1 1 = 2 v_{n-1} / sigma_{n-1}`.
//! The sphere form `T f(x) = int_{S^{n-1}} f(s) |<x, s>| ds` used with the
//! unnormalized surface measure is `T = sigma_{n-1} T_1`; combined with
//! `s_A = 2 h_A` this gives `T^{-1} h_A = T_1^{-1} s_A / (2 sigma_{n-1})`.
//!
//! Both transforms are diagonal in harmonic degree (Funk–Hecke), with zero
//! multipliers at odd degrees, so only even expansions are accepted.

use std::f64::consts::PI;

use super::harmonics::Harmonic;
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre_on, legendre_with_derivative};

/// Multiplier of `T_1` on degree `degree` harmonics in R^`dim`.
pub fn multiplier(dim: usize, degree: usize) -> f64 {
    if degree % 2 == 1 {
        return 0.0;
    }
    match dim {
        2 => {
            let j = (degree / 2) as f64;
            let sign = if (degree / 2) % 2 == 1 { 1.0 } else { -1.0 };
            2.0 / PI * sign / (4.0 * j * j - 1.0)
        }
        3 => {
            // (1/4 pi) * 2 pi * int_{-1}^{1} |t| P_l(t) dt = int_0^1 t P_l(t) dt
            let (t, w) = gauss_legendre_on(degree + 2, 0.0, 1.0);
            t.iter().zip(&w).map(|(t, w)| w * t * legendre_with_derivative(degree, *t).0).sum()
        }
        _ => panic!("cosine transform multipliers only for dim 2 and 3"),
    }
}

fn check_even(f: &Harmonic) -> Result<()> {
    let scale = f.coefficient_scale().max(1e-300);
    if f.odd_part() > 1e-13 * scale {
        return Err(Error::NotEven);
    }
    Ok(())
}

/// `T_1 f`, same bandwidth as `f`.
pub fn cosine_transform(f: &Harmonic) -> Result<Harmonic> {
    check_even(f)?;
    let dim = f.dim();
    Ok(f.map_degrees(|d| if d % 2 == 0 { multiplier(dim, d) } else { 0.0 }))
}

/// `T_1^{-1} f` by coefficient-wise division.
pub fn inverse_cosine_transform(f: &Harmonic) -> Result<Harmonic> {
    check_even(f)?;
    let dim = f.dim();
    for d in (0..=f.bandwidth()).step_by(2) {
        if multiplier(dim, d).abs() < 1e-300 {
            return Err(Error::NotInRange(d));
        }
    }
    Ok(f.map_degrees(|d| if d % 2 == 0 { 1.0 / multiplier(dim, d) } else { 0.0 }))
}

/// Projects `f` to degree <= `bandwidth`, drops the (vanishing) odd part and inverts.
pub fn inverse_cosine_transform_of(dim: usize, bandwidth: usize, f: impl Fn(&[f64]) -> f64) -> Result<Harmonic> {
    let even = Harmonic::project(dim, bandwidth, |u| {
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        0.5 * (f(u) + f(&neg))
    })?;
    let cleaned = even.map_degrees(|d| if d % 2 == 0 { 1.0 } else { 0.0 });
    inverse_cosine_transform(&cleaned)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::harmonics::FourierSeries;

    #[test]
    fn constants_map_to_one() {
        let t = cosine_transform(&Harmonic::constant(2, PI / 2.0).unwrap()).unwrap();
        assert!((t.mean() - 1.0).abs() < 1e-15);
        let t = cosine_transform(&Harmonic::constant(3, 2.0).unwrap()).unwrap();
        assert!((t.mean() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn odd_coefficients_are_rejected() {
        let mut f = FourierSeries::zeros(3);
        f.cos[1] = 1.0;
        assert_eq!(cosine_transform(&Harmonic::Circle(f.clone())).unwrap_err(), Error::NotEven);
        assert_eq!(inverse_cosine_transform(&Harmonic::Circle(f)).unwrap_err(), Error::NotEven);
    }

    #[test]
    fn disk_width_preimage() {
        let f = inverse_cosine_transform_of(2, 16, |_| 2.0).unwrap();
        assert!((f.mean() - PI).abs() < 1e-13);
        assert!(f.coefficient_scale() - PI < 1e-12);
    }
}
