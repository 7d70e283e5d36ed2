//! Printed closed-form expressions, evaluated exactly as printed.
//!
//! Nothing here is corrected: where a printed expression is inconsistent with
//! the numeric SHS solution, the inconsistency is what the validator reports.
//! Polynomials are stored as ascending coefficient lists and evaluated in
//! Horner form, so the coefficients can be checked against the print line by
//! line.

use crate::error::{AoiError, Result};
use crate::shs_model::{Policy, SystemParams};
use crate::shs_solver::StationaryDist;

/// Denominator factors closer to zero than this are rejected as poles.
pub const POLE_TOLERANCE: f64 = 1e-9;

/// `c[0] + c[1] x + c[2] x^2 + ...`
fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// A parameter point plus the normalized MGF argument `s / mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPoint {
    pub params: SystemParams,
    pub s_bar: f64,
}

impl EvalPoint {
    pub fn new(params: SystemParams, s_bar: f64) -> Self {
        EvalPoint { params, s_bar }
    }

    pub fn from_s(params: SystemParams, s: f64) -> Self {
        EvalPoint { params, s_bar: s / params.mu() }
    }
}

fn factor(name: &str, value: f64) -> Result<f64> {
    if value.abs() < POLE_TOLERANCE {
        Err(AoiError::Pole(format!("denominator factor {name} = {value:e}")))
    } else {
        Ok(value)
    }
}

/// Common normalizer `2 rho1 rho2 + rho + 1`.
fn normalizer(p: &SystemParams) -> f64 {
    2.0 * p.rho1() * p.rho2() + p.rho() + 1.0
}

/// Denominator factors shared by the printed expressions.
struct Poles {
    r1_s: f64,
    one_s: f64,
    one_r1_s: f64,
    one_r2_s: f64,
    one_r_s: f64,
}

impl Poles {
    fn at(pt: &EvalPoint) -> Self {
        let (r1, r2, r, s) = (pt.params.rho1(), pt.params.rho2(), pt.params.rho(), pt.s_bar);
        Poles {
            r1_s: r1 - s,
            one_s: 1.0 - s,
            one_r1_s: 1.0 + r1 - s,
            one_r2_s: 1.0 + r2 - s,
            one_r_s: 1.0 + r - s,
        }
    }

    fn checked(pt: &EvalPoint, with_rho2: bool) -> Result<Self> {
        let p = Self::at(pt);
        factor("(rho1 - s)", p.r1_s)?;
        factor("(1 - s)", p.one_s)?;
        factor("(1 + rho1 - s)", p.one_r1_s)?;
        factor("(1 + rho - s)", p.one_r_s)?;
        if with_rho2 {
            factor("(1 + rho2 - s)", p.one_r2_s)?;
        }
        Ok(p)
    }
}

pub fn stationary_closed_form(params: &SystemParams) -> StationaryDist {
    let (r1, r2) = (params.rho1(), params.rho2());
    let d = normalizer(params);
    StationaryDist::new(vec![1.0 / d, r1 / d, r2 / d, r1 * r2 / d, r1 * r2 / d])
}

/// Coefficients `gamma_1..gamma_4` of the self-preemptive MGF.
pub fn theorem1_gammas(s: f64, r2: f64) -> [f64; 4] {
    let one_s = 1.0 - s;
    [
        r2 * r2 * horner(&[4.0, -6.0, 4.0, -1.0], s)
            + r2 * horner(&[8.0, -20.0, 16.0, -6.0, 1.0], s)
            + one_s.powi(3) * (4.0 - s),
        r2 * r2 * horner(&[5.0, -6.0, 2.0], s)
            + r2 * horner(&[12.0, -22.0, 14.0, -3.0], s)
            + 3.0 * one_s.powi(2) * (2.0 - s),
        r2 * r2 * (2.0 - s) + r2 * horner(&[8.0, -10.0, 3.0], s) + 3.0 * s * s - 7.0 * s + 4.0,
        r2 * (2.0 - s) + 1.0 - s,
    ]
}

/// Coefficients `gammā_1..gammā_3` of the non-preemptive MGF.
pub fn theorem2_gammas(s: f64, r2: f64) -> [f64; 3] {
    let one_s = 1.0 - s;
    [
        r2.powi(3) * horner(&[3.0, -3.0, 1.0], s)
            + r2 * r2 * horner(&[9.0, -19.0, 11.0, -2.0], s)
            + r2 * horner(&[9.0, -28.0, 29.0, -11.0, 1.0], s)
            + 3.0 * one_s.powi(4),
        r2.powi(3) * (2.0 - s)
            + r2 * r2 * horner(&[8.0, -10.0, 3.0], s)
            + r2 * horner(&[9.0, -19.0, 11.0, -2.0], s)
            + one_s.powi(3),
        r2 * r2 * (2.0 - s) + r2 * horner(&[3.0, -3.0, 1.0], s) + one_s.powi(2),
    ]
}

/// Printed source-1 MGF under the self-preemptive policy.
pub fn mgf_theorem1(pt: &EvalPoint) -> Result<f64> {
    let p = Poles::checked(pt, false)?;
    let (r1, r2, s) = (pt.params.rho1(), pt.params.rho2(), pt.s_bar);
    let one_s = 1.0 - s;
    let gammas = theorem1_gammas(s, r2);
    let sum: f64 = gammas.iter().enumerate().map(|(k, g)| r1.powi(k as i32 + 1) * g).sum();
    let numerator = r2 * r2 * one_s.powi(2) + 2.0 * r2 * one_s.powi(3) + one_s.powi(4) + sum;
    let denominator = p.r1_s * p.one_s.powi(2) * p.one_r1_s.powi(2) * p.one_r_s.powi(2);
    Ok(r1 / normalizer(&pt.params) * (numerator / denominator))
}

/// Printed source-1 MGF under the non-preemptive policy.
pub fn mgf_theorem2(pt: &EvalPoint) -> Result<f64> {
    let p = Poles::checked(pt, false)?;
    let (r1, r2, s) = (pt.params.rho1(), pt.params.rho2(), pt.s_bar);
    let one_s = 1.0 - s;
    let gammas = theorem2_gammas(s, r2);
    let sum: f64 = gammas.iter().enumerate().map(|(k, g)| r1.powi(k as i32 + 1) * g).sum();
    let numerator = r2.powi(3) * one_s.powi(2)
        + 3.0 * r2 * r2 * one_s.powi(3)
        + 3.0 * r2 * one_s.powi(4)
        + one_s.powi(5)
        + sum;
    let denominator = p.r1_s * p.one_s.powi(3) * p.one_r1_s * p.one_r_s;
    Ok(r1 / normalizer(&pt.params) * (numerator / denominator))
}

pub fn mgf_theorem(policy: Policy, pt: &EvalPoint) -> Result<f64> {
    match policy {
        Policy::SelfPreemptive => mgf_theorem1(pt),
        Policy::NonPreemptive => mgf_theorem2(pt),
    }
}

/// `xi_1..xi_8` of the self-preemptive second moment.
pub fn xi(r2: f64) -> [f64; 8] {
    [
        horner(&[7.0, 21.0, 21.0, 7.0], r2),
        horner(&[22.0, 68.0, 68.0, 22.0], r2),
        horner(&[41.0, 134.0, 113.0, 40.0], r2),
        horner(&[50.0, 180.0, 161.0, 36.0], r2),
        horner(&[41.0, 160.0, 113.0, 18.0], r2),
        horner(&[22.0, 88.0, 45.0, 4.0], r2),
        horner(&[7.0, 28.0, 8.0], r2),
        horner(&[1.0, 4.0], r2),
    ]
}

/// `xî_1..xî_7` of the non-preemptive second moment.
pub fn xi_hat(r2: f64) -> [f64; 7] {
    [
        horner(&[6.0, 30.0, 60.0, 60.0, 30.0, 6.0], r2),
        horner(&[17.0, 88.0, 180.0, 182.0, 91.0, 18.0], r2),
        horner(&[31.0, 169.0, 355.0, 361.0, 178.0, 34.0], r2),
        horner(&[39.0, 224.0, 463.0, 439.0, 190.0, 29.0], r2),
        horner(&[32.0, 192.0, 365.0, 293.0, 97.0, 9.0], r2),
        horner(&[15.0, 93.0, 151.0, 92.0, 18.0], r2),
        horner(&[3.0, 19.0, 24.0, 9.0], r2),
    ]
}

/// Printed second moment of the source-1 age (note the single power of `mu`
/// in the printed denominator, kept as is).
pub fn second_moment_theorem(policy: Policy, params: &SystemParams) -> f64 {
    let (r1, r2, r, mu) = (params.rho1(), params.rho2(), params.rho(), params.mu());
    let weighted = |coeffs: &[f64]| -> f64 {
        coeffs.iter().enumerate().map(|(k, c)| r1.powi(k as i32 + 1) * c).sum()
    };
    match policy {
        Policy::SelfPreemptive => {
            let numerator = 2.0 * (r2 + 1.0).powi(3) + 2.0 * weighted(&xi(r2));
            let denominator =
                mu * r1 * r1 * (1.0 + r1).powi(3) * (1.0 + r).powi(2) * normalizer(params);
            numerator / denominator
        }
        Policy::NonPreemptive => {
            let numerator = 2.0 * (r2 + 1.0).powi(5) + 2.0 * weighted(&xi_hat(r2));
            let denominator = mu
                * r1
                * r1
                * (1.0 + r1).powi(2)
                * (1.0 + r2).powi(2)
                * (1.0 + r).powi(2)
                * normalizer(params);
            numerator / denominator
        }
    }
}

/// Printed per-state value `v̄^s_{q0}`, `q` in the stationary-vector order.
pub fn appendix_vq0(policy: Policy, q: usize, pt: &EvalPoint) -> Result<f64> {
    let p = Poles::checked(pt, true)?;
    let (r1, r2, s) = (pt.params.rho1(), pt.params.rho2(), pt.s_bar);
    let d = normalizer(&pt.params);
    match policy {
        Policy::SelfPreemptive => self_preemptive_vq0(q, r1, r2, s, d, &p),
        Policy::NonPreemptive => non_preemptive_vq0(q, r1, r2, s, d, &p),
    }
}

fn self_preemptive_vq0(q: usize, r1: f64, r2: f64, s: f64, d: f64, p: &Poles) -> Result<f64> {
    let one_s = 1.0 - s;
    // shared by alpha_{1,2} and alpha_{3,2}
    let alpha_x2 = r2 * r2 * (2.0 - s) + r2 * horner(&[5.0, -6.0, 2.0], s) + horner(&[3.0, -7.0, 5.0, -1.0], s);
    let value = match q {
        0 => {
            let den = p.r1_s * p.one_r1_s.powi(2) * p.one_r_s.powi(2);
            let first = one_s.powi(2) + r2;
            let second = r1.powi(3)
                + r1 * r1 * (3.0 - 2.0 * s + r2)
                + r1 * ((2.0 - s).powi(2) + r2 * (2.0 - s) - 1.0);
            r1 / d * (first / den + second / den)
        }
        1 => {
            let alpha11 = (r2 + 2.0).powi(2) + 2.0 * (s - 2.0).powi(2) + 3.0 * (1.0 - r2) - 9.0;
            let alpha12 = alpha_x2;
            let den = p.one_s * p.r1_s * p.one_r1_s.powi(2) * p.one_r2_s * p.one_r_s;
            let first = r1.powi(3) * (r2 + 1.0 - s) + r1 * r1 * alpha11 + r1 * alpha12 + one_s.powi(3);
            let second = (r2 + 1.0).powi(2) - 3.0 * r2 * s - 1.0;
            r1 * r1 / d * (first / den + second / den)
        }
        2 => {
            let den = p.r1_s * p.one_r1_s.powi(2) * p.one_r_s;
            let first = 1.0 - 2.0 * s + r2;
            let second = r1.powi(3)
                + r1 * r1 * (3.0 - 2.0 * s + r2)
                + r1 * (3.0 * one_s + s * s + (2.0 - s));
            r1 * r2 / d * (first / den + second / den)
        }
        3 => {
            let alpha31 = (r2 + 2.0).powi(2) + 2.0 * (s - 1.0).powi(2) - s * (3.0 * r2 + 1.0) - 3.0;
            let alpha32 = alpha_x2;
            let den = p.r1_s * p.one_s.powi(2) * p.one_r1_s.powi(2) * p.one_r2_s * p.one_r_s;
            let first = r1.powi(3) * (r2 + 1.0 - s) + r1 * r1 * alpha31 + r1 * alpha32 + (r2 + 1.0).powi(2);
            let second = one_s.powi(3) - 3.0 * r2 * s - 1.0;
            r1 * r1 * r2 / d * (first / den + second / den)
        }
        4 => {
            // the print splits one numerator across two fractions with a shared
            // denominator; the parenthesis opened in the first closes in the second
            let den = p.r1_s * p.one_s * p.one_r1_s.powi(2) * p.one_r_s;
            let numerator = r1.powi(3)
                + r1 * r1 * (3.0 - 2.0 * s + r2)
                + r1 * (3.0 * one_s + r2 * (2.0 - s) + s * s + 1.0)
                + 1.0
                - 2.0 * s
                + r2;
            r1 * r1 * r2 / d * (numerator / den)
        }
        _ => return Err(AoiError::Validation(format!("state index {q} out of range 0..5"))),
    };
    Ok(value)
}

fn non_preemptive_vq0(q: usize, r1: f64, r2: f64, s: f64, d: f64, p: &Poles) -> Result<f64> {
    let one_s = 1.0 - s;
    let alpha_x1 = (r2 + 1.0).powi(2) + r2 * s * (s - 2.0) + one_s.powi(2) - 1.0;
    let alpha_x2 =
        r2.powi(3) + r2 * r2 * (4.0 - 3.0 * s) + r2 * horner(&[5.0, -9.0, 4.0, -1.0], s) + 2.0 * one_s.powi(3);
    let value = match q {
        0 => {
            let alpha01 = r2 * (r2 + 3.0) + r2 * s * (s - 3.0) + 2.0 * one_s;
            let den = p.r1_s * p.one_s * p.one_r1_s * p.one_r2_s * p.one_r_s;
            let first = r1 * r1 * one_s * (1.0 + r2) + r1 * alpha01 + (1.0 + r2).powi(2);
            let second = r2 * s * (s - 3.0) + one_s.powi(3) - 1.0;
            r1 / d * (first / den + second / den)
        }
        1 => {
            let den = p.r1_s * p.one_s.powi(2) * p.one_r1_s * p.one_r2_s.powi(2) * p.one_r_s;
            let first = r1 * r1 * alpha_x1 + r1 * alpha_x2 + r2.powi(3) + r2 * r2 * (3.0 - 4.0 * s);
            let second = r2 * horner(&[3.0, -8.0, 6.0, -1.0], s) + one_s.powi(4);
            r1 * r1 / d * (first / den + second / den)
        }
        2 => {
            let den = p.r1_s * p.one_s * p.one_r1_s * p.one_r2_s * p.one_r_s;
            let first = r1 * r1 * (r2 + 1.0)
                + r1 * (r2 * r2 + 3.0 * r2 + 2.0 - s * (2.0 * r2 + 3.0))
                + r2 * r2;
            let second = r2 * (2.0 - 3.0 * s) + 1.0 - 3.0 * s + 2.0 * s * s;
            r1 * r2 / d * (first / den + second / den)
        }
        3 => {
            let den = p.r1_s * p.one_s.powi(3) * p.one_r1_s * p.one_r2_s.powi(2) * p.one_r_s;
            let first = r1 * r1 * alpha_x1 + r1 * alpha_x2 + r2.powi(3) + r2 * r2 * (3.0 - 4.0 * s);
            let second = r2 * horner(&[3.0, -8.0, 6.0, -1.0], s) + one_s.powi(2);
            r1 * r1 * r2 / d * (first / den + second / den)
        }
        4 => {
            let den = p.r1_s * p.one_s.powi(2) * p.one_r1_s * p.one_r2_s * p.one_r_s;
            let first = r1 * r1 * (r2 + 1.0) + r1 * (r2 * r2 + 3.0 * r2 + 2.0 - s * (2.0 * r2 + 3.0));
            let second = (r2 + 1.0).powi(2) + 3.0 * r2 - 3.0 * s + 2.0 * s * s;
            r1 * r1 * r2 / d * (first / den + second / den)
        }
        _ => return Err(AoiError::Validation(format!("state index {q} out of range 0..5"))),
    };
    Ok(value)
}

/// Sum of the five printed per-state values.
pub fn appendix_sum(policy: Policy, pt: &EvalPoint) -> Result<f64> {
    (0..5).map(|q| appendix_vq0(policy, q, pt)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(r1: f64, r2: f64, s: f64) -> EvalPoint {
        EvalPoint::new(SystemParams::from_loads(r1, r2, 1.0).unwrap(), s)
    }

    #[test]
    fn horner_matches_direct_sum() {
        let c = [3.0, -7.0, 5.0, -1.0];
        let x: f64 = 0.37;
        let direct = 3.0 - 7.0 * x + 5.0 * x * x - x.powi(3);
        assert!((horner(&c, x) - direct).abs() < 1e-15);
    }

    #[test]
    fn stationary_examples() {
        let pi = stationary_closed_form(&SystemParams::new(1.0, 1.0, 1.0).unwrap());
        assert!(pi.probs().iter().all(|p| (p - 0.2).abs() < 1e-16));
        let pi = stationary_closed_form(&SystemParams::new(1.0, 0.0, 1.0).unwrap());
        assert_eq!(pi.probs(), &[0.5, 0.5, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn gamma_sums_at_zero() {
        assert_eq!(theorem1_gammas(0.0, 1.0), [16.0, 23.0, 14.0, 3.0]);
        assert_eq!(theorem2_gammas(0.0, 1.0), [24.0, 20.0, 6.0]);
    }

    #[test]
    fn theorem1_printed_values_at_zero() {
        assert!((mgf_theorem1(&at(1.0, 1.0, 0.0)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((mgf_theorem1(&at(0.5, 0.5, 0.0)).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn theorem2_printed_values_at_zero() {
        assert!((mgf_theorem2(&at(1.0, 1.0, 0.0)).unwrap() - 29.0 / 15.0).abs() < 1e-15);
        assert!((mgf_theorem2(&at(1.0, 0.0, 0.0)).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn second_moment_printed_values() {
        let p = SystemParams::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(xi(1.0).iter().sum::<f64>(), 1530.0);
        assert_eq!(xi_hat(1.0).iter().sum::<f64>(), 4692.0);
        assert!((second_moment_theorem(Policy::SelfPreemptive, &p) - 3076.0 / 360.0).abs() < 1e-13);
        assert!((second_moment_theorem(Policy::NonPreemptive, &p) - 9448.0 / 720.0).abs() < 1e-13);
    }

    #[test]
    fn poles_are_rejected() {
        assert!(matches!(mgf_theorem1(&at(0.5, 1.0, 0.5)), Err(AoiError::Pole(_))));
        assert!(matches!(mgf_theorem2(&at(2.0, 1.0, 1.0)), Err(AoiError::Pole(_))));
        assert!(matches!(
            appendix_vq0(Policy::SelfPreemptive, 1, &at(3.0, 1.0, 2.0)),
            Err(AoiError::Pole(_))
        ));
        assert!(appendix_vq0(Policy::NonPreemptive, 5, &at(1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn evaluators_finite_away_from_poles() {
        for &(r1, r2) in &[(0.2, 0.2), (1.0, 5.0), (5.0, 0.5), (2.0, 0.0)] {
            for &s in &[-3.0, -1.0, -0.25, 0.0, 0.1] {
                let pt = at(r1, r2, s);
                for policy in Policy::ALL {
                    assert!(mgf_theorem(policy, &pt).unwrap().is_finite());
                    assert!(appendix_sum(policy, &pt).unwrap().is_finite());
                }
            }
        }
    }
}
