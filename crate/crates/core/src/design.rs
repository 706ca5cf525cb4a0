//! First-order pulse design: shapes whose duration functionals
//! `η₁^(τp,1)` and `η₂^(τp,1)` vanish.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

use crate::functionals::eta_tau;
use crate::pulse::{asymmetric_family, make_symmetric, DesignedPulse, PulseError};

/// Tolerance used when re-verifying the asymmetric family.
pub const FAMILY_VERIFY_TOLERANCE: f64 = 1e-9;

/// Grid points used to bracket the symmetric design root.
const SCAN_POINTS: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error("no sign change of eta_tau_1 in (0, tau_p/4); scanned range [{min:e}, {max:e}] over {points} points")]
    NoBracket { min: f64, max: f64, points: usize },
    #[error("design conditions not met: {0}")]
    ConditionsNotMet(FirstOrderReport),
    #[error("only pi pulses are designed, got target angle {0}")]
    UnsupportedAngle(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Symmetric,
    Asymmetric,
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "symmetric" => Ok(Family::Symmetric),
            "asymmetric" => Ok(Family::Asymmetric),
            other => Err(format!(
                "unknown family {other:?} (expected symmetric|asymmetric)"
            )),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Symmetric => "symmetric",
            Family::Asymmetric => "asymmetric",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignSpec {
    pub tau_p: f64,
    pub target_angle: f64,
    pub family: Family,
    /// Asymmetric family index; ignored for symmetric designs.
    pub n: u32,
}

impl DesignSpec {
    pub fn pi_pulse(family: Family, tau_p: f64, n: u32) -> Self {
        Self {
            tau_p,
            target_angle: PI,
            family,
            n,
        }
    }
}

/// Outcome of checking `|η₁^(τp,1)|, |η₂^(τp,1)| ≤ tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderReport {
    pub passed: bool,
    pub eta_tau_1: f64,
    pub eta_tau_2: f64,
    pub tolerance: f64,
    pub rotation_angle: f64,
}

impl fmt::Display for FirstOrderReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "eta_tau_1 = {:e}, eta_tau_2 = {:e}, tol = {:e}, angle = {}{}",
            self.eta_tau_1,
            self.eta_tau_2,
            self.tolerance,
            self.rotation_angle,
            if self.rotation_angle == 0.0 {
                " (degenerate zero rotation)"
            } else {
                ""
            },
        )
    }
}

pub fn verify_first_order(pulse: &DesignedPulse, tol: f64) -> FirstOrderReport {
    let (t1, t2) = eta_tau(pulse);
    FirstOrderReport {
        passed: t1.abs() <= tol && t2.abs() <= tol,
        eta_tau_1: t1,
        eta_tau_2: t2,
        tolerance: tol,
        rotation_angle: pulse.shape().rotation_angle(),
    }
}

/// Symmetric π pulse on the unit interval with switch at `x`, placed at 1/2.
/// The amplitude follows from the angle constraint `a(1 − 4x) = π/2`.
fn unit_symmetric(x: f64) -> Result<DesignedPulse, PulseError> {
    let a_max = PI / (2.0 * (1.0 - 4.0 * x));
    let shape = make_symmetric(1.0, x, a_max)?;
    DesignedPulse::placed(shape, 0.5)
}

fn unit_residual(x: f64) -> Result<f64, PulseError> {
    Ok(eta_tau(&unit_symmetric(x)?).0)
}

/// Bisects `f` on a bracket until the floats run out.
fn bisect<F>(f: F, mut lo: f64, mut hi: f64, mut f_lo: f64) -> Result<f64, PulseError>
where
    F: Fn(f64) -> Result<f64, PulseError>,
{
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-16 {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(if f(lo)?.abs() <= f(hi)?.abs() { lo } else { hi })
}

/// Normalized switch time `τ1/τp` of the symmetric first-order π pulse:
/// the smallest root of `η₁^(τp,1)` in `(0, 1/4)`.
pub fn symmetric_switch_fraction() -> Result<f64, DesignError> {
    let step = 0.25 / SCAN_POINTS as f64;
    let mut prev_x = step;
    let mut prev = unit_residual(prev_x)?;
    let (mut min, mut max) = (prev, prev);
    for i in 2..SCAN_POINTS {
        let x = step * i as f64;
        let value = unit_residual(x)?;
        if prev == 0.0 {
            return Ok(prev_x);
        }
        if (value < 0.0) != (prev < 0.0) || value == 0.0 {
            return Ok(bisect(unit_residual, prev_x, x, prev)?);
        }
        min = min.min(value);
        max = max.max(value);
        prev_x = x;
        prev = value;
    }
    Err(DesignError::NoBracket {
        min,
        max,
        points: SCAN_POINTS - 1,
    })
}

/// Symmetric three-level π pulse with `η₁^(τp,1) = η₂^(τp,1) = 0`, placed
/// at `τp/2`. The design is solved once in units of `τp` and rescaled.
pub fn design_symmetric_pi(tau_p: f64) -> Result<DesignedPulse, DesignError> {
    if !(tau_p > 0.0 && tau_p.is_finite()) {
        return Err(PulseError::InvalidGeometry(format!("tau_p = {tau_p}")).into());
    }
    let x = symmetric_switch_fraction()?;
    let a_max = PI / (2.0 * tau_p * (1.0 - 4.0 * x));
    let shape = make_symmetric(tau_p, x * tau_p, a_max)?;
    Ok(DesignedPulse::new(shape, 0.5 * tau_p, PI)?)
}

/// Member `n` of the asymmetric two-level family, re-verified against the
/// first-order conditions.
pub fn design_asymmetric_pi(tau_p: f64, n: u32) -> Result<DesignedPulse, DesignError> {
    let pulse = asymmetric_family(n, tau_p)?;
    let report = verify_first_order(&pulse, FAMILY_VERIFY_TOLERANCE * tau_p.max(1.0));
    if report.passed {
        Ok(pulse)
    } else {
        Err(DesignError::ConditionsNotMet(report))
    }
}

pub fn design(spec: &DesignSpec) -> Result<DesignedPulse, DesignError> {
    if (spec.target_angle - PI).abs() > 1e-12 {
        return Err(DesignError::UnsupportedAngle(spec.target_angle));
    }
    match spec.family {
        Family::Symmetric => design_symmetric_pi(spec.tau_p),
        Family::Asymmetric => design_asymmetric_pi(spec.tau_p, spec.n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::PulseShape;

    #[test]
    fn symmetric_design_zeroes_duration_terms() {
        let p = design_symmetric_pi(1.0).unwrap();
        let (t1, t2) = eta_tau(&p);
        assert!(t1.abs() < 1e-10 && t2.abs() < 1e-10, "{t1} {t2}");
        assert!(p.shape().is_symmetric(0.0));
        assert!((p.shape().rotation_angle() - PI).abs() < 1e-12);
    }

    #[test]
    fn symmetric_switch_regression() {
        // Independently solved at 30 digits: the root is exactly 1/7,
        // giving a_max·τp = 7π/6.
        let x = symmetric_switch_fraction().unwrap();
        assert!((x - 1.0 / 7.0).abs() < 1e-12, "{x}");
        let p = design_symmetric_pi(1.0).unwrap();
        let a = p.shape().segments()[1].amplitude;
        assert!((a - 7.0 * PI / 6.0).abs() < 1e-10);
    }

    #[test]
    fn symmetric_design_scales_with_duration() {
        let one = design_symmetric_pi(1.0).unwrap();
        let two = design_symmetric_pi(2.0).unwrap();
        let s1 = one.shape().segments();
        let s2 = two.shape().segments();
        assert_eq!(s2[0].duration, 2.0 * s1[0].duration);
        assert!((s2[1].amplitude - 0.5 * s1[1].amplitude).abs() < 1e-14);
    }

    #[test]
    fn design_is_deterministic() {
        assert_eq!(
            design_symmetric_pi(0.37).unwrap(),
            design_symmetric_pi(0.37).unwrap()
        );
    }

    #[test]
    fn asymmetric_design() {
        let p = design_asymmetric_pi(1.0, 1).unwrap();
        assert!((p.shape().rotation_angle() - PI).abs() < 1e-12);
        assert!(matches!(
            design_asymmetric_pi(1.0, 0),
            Err(DesignError::Pulse(PulseError::Domain(_)))
        ));
    }

    #[test]
    fn verify_reports() {
        let good = verify_first_order(&design_symmetric_pi(1.0).unwrap(), 1e-9);
        assert!(good.passed);

        let constant =
            DesignedPulse::placed(PulseShape::constant(1.0, PI / 2.0).unwrap(), 0.5).unwrap();
        let bad = verify_first_order(&constant, 1e-9);
        assert!(!bad.passed);
        assert!((bad.eta_tau_1 + 1.0 / PI).abs() < 1e-12);

        let zero = DesignedPulse::placed(PulseShape::constant(1.0, 0.0).unwrap(), 0.5).unwrap();
        let z = verify_first_order(&zero, 1e-9);
        assert!(z.passed);
        assert!(z.to_string().contains("degenerate"));
    }

    #[test]
    fn spec_dispatch() {
        let s = design(&DesignSpec::pi_pulse(Family::Symmetric, 1.0, 1)).unwrap();
        assert_eq!(s, design_symmetric_pi(1.0).unwrap());
        let bad = DesignSpec {
            target_angle: PI / 2.0,
            ..DesignSpec::pi_pulse(Family::Asymmetric, 1.0, 1)
        };
        assert!(matches!(
            design(&bad),
            Err(DesignError::UnsupportedAngle(_))
        ));
        assert_eq!("asymmetric".parse::<Family>(), Ok(Family::Asymmetric));
        assert!("other".parse::<Family>().is_err());
    }
}
