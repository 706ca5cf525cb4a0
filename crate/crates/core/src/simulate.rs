//! Brute-force verification by exact propagation.
//!
//! A pulse acts through `H + V(t)(Ω + εΩ′)`. Because `V` is piecewise
//! constant the time-ordered evolution is an exact product of segment
//! exponentials. Comparing it with the instantaneous target
//! `e^{−iH(τp−τs)} P_Ω e^{−iHτs}` and with the assembled leading-order
//! error `η` checks the scalar functionals against the full dynamics.

use std::fmt;

use thiserror::Error;

use crate::functionals::{eta_eps0, eta_eps1, eta_tau, FunctionalError};
use crate::operator::{
    hermitian_propagator, operator_norm, pauli, split_by_involution, Involution, Operator,
    OperatorError, C64,
};
use crate::pulse::{DesignedPulse, PulseError};
use crate::quadrature::{integrate_piecewise, QuadratureError};

/// Hermiticity tolerance on `Ω′`.
pub const OMEGA_PRIME_TOLERANCE: f64 = 1e-12;

/// Largest log-log deviation from the fitted line accepted by
/// [`ScalingSeries::check_residual`].
pub const DEFAULT_MAX_FIT_RESIDUAL: f64 = 0.25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("scaling diagnostic failed: fit residual {residual:.3} exceeds {limit:.3} (slope {slope:.3})")]
    ScalingDiagnostic {
        slope: f64,
        residual: f64,
        limit: f64,
    },
}

/// `H`, `Ω`, `Ω′` and the direction error factor `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    hamiltonian: Operator,
    omega: Involution,
    omega_prime: Operator,
    epsilon: f64,
}

impl SystemModel {
    pub fn new(
        hamiltonian: Operator,
        omega: Involution,
        omega_prime: Operator,
        epsilon: f64,
    ) -> Result<Self, SimError> {
        for op in [&hamiltonian, &omega_prime] {
            if op.dim() != omega.dim() {
                return Err(OperatorError::DimensionMismatch {
                    left: op.dim(),
                    right: omega.dim(),
                }
                .into());
            }
        }
        let residual = hamiltonian.hermitian_residual();
        if residual > crate::operator::HERMITIAN_TOLERANCE {
            return Err(OperatorError::NotHermitian { residual }.into());
        }
        let residual = omega_prime.hermitian_residual();
        if residual > OMEGA_PRIME_TOLERANCE {
            return Err(OperatorError::NotHermitian { residual }.into());
        }
        if !epsilon.is_finite() {
            return Err(SimError::InvalidSweep(format!("epsilon = {epsilon}")));
        }
        Ok(Self {
            hamiltonian,
            omega,
            omega_prime,
            epsilon,
        })
    }

    /// Qubit coupled to two bath spins (d = 8):
    /// `H = 0.5 Z⊗1⊗1 + 0.3 Z⊗Z⊗1 + 0.2 Z⊗1⊗Z + 0.15 (1⊗X⊗1 + 1⊗1⊗X)`,
    /// `Ω = X⊗1⊗1`, `Ω′ = (Y + Z)⊗1⊗1`.
    pub fn default_model(epsilon: f64) -> Self {
        let id = Operator::identity(2);
        let (x, y, z) = (pauli::x(), pauli::y(), pauli::z());
        let three = |a: &Operator, b: &Operator, c: &Operator| a.kron(b).kron(c);
        let h = three(&z, &id, &id) * 0.5
            + three(&z, &z, &id) * 0.3
            + three(&z, &id, &z) * 0.2
            + (three(&id, &x, &id) + three(&id, &id, &x)) * 0.15;
        let omega = Involution::new(three(&x, &id, &id)).expect("X⊗1⊗1 is an involution");
        let omega_prime = three(&(y + z), &id, &id);
        Self::new(h, omega, omega_prime, epsilon).expect("default model is consistent")
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn omega(&self) -> &Involution {
        &self.omega
    }

    pub fn omega_prime(&self) -> &Operator {
        &self.omega_prime
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.omega.dim()
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self {
            epsilon,
            ..self.clone()
        }
    }

    pub fn with_hamiltonian(&self, hamiltonian: Operator) -> Result<Self, SimError> {
        Self::new(
            hamiltonian,
            self.omega.clone(),
            self.omega_prime.clone(),
            self.epsilon,
        )
    }

    /// Spectral norm of `H`.
    pub fn hamiltonian_norm(&self) -> f64 {
        operator_norm(&self.hamiltonian)
    }

    /// Default sweep starting duration `10⁻²/‖H‖` (or `10⁻²` when `H = 0`).
    pub fn default_tau_p(&self) -> f64 {
        let norm = self.hamiltonian_norm();
        if norm > 0.0 {
            1e-2 / norm
        } else {
            1e-2
        }
    }
}

/// `U(τp, 0)`: product of segment propagators, later segments on the left.
pub fn propagate(model: &SystemModel, pulse: &DesignedPulse) -> Result<Operator, SimError> {
    let control = model.omega.operator() + &(model.omega_prime.clone() * model.epsilon);
    let mut u = Operator::identity(model.dim());
    for seg in pulse.shape().segments() {
        let generator = model.hamiltonian.clone() + control.clone() * seg.amplitude;
        let step = hermitian_propagator(&generator, seg.duration)?;
        u = &step * &u;
    }
    Ok(u)
}

/// `P_Ω = cos φ₊ − i sin φ₊ Ω` for the pulse's total phase.
pub fn ideal_control(model: &SystemModel, pulse: &DesignedPulse) -> Operator {
    model.omega.rotation(pulse.phase_pair().phi_plus)
}

/// `e^{−iH(τp−τs)} P_Ω e^{−iHτs}`.
pub fn ideal_target(model: &SystemModel, pulse: &DesignedPulse) -> Result<Operator, SimError> {
    let after = hermitian_propagator(&model.hamiltonian, pulse.tau_p() - pulse.tau_s())?;
    let before = hermitian_propagator(&model.hamiltonian, pulse.tau_s())?;
    Ok(&(&after * &ideal_control(model, pulse)) * &before)
}

/// `δP_Ω = U_C − P_Ω` with `U_C = e^{iH(τp−τs)} U e^{iHτs}`.
pub fn control_frame_error(
    model: &SystemModel,
    pulse: &DesignedPulse,
) -> Result<Operator, SimError> {
    let u = propagate(model, pulse)?;
    let undo_after = hermitian_propagator(&model.hamiltonian, -(pulse.tau_p() - pulse.tau_s()))?;
    let undo_before = hermitian_propagator(&model.hamiltonian, -pulse.tau_s())?;
    let u_control = &(&undo_after * &u) * &undo_before;
    Ok(u_control - ideal_control(model, pulse))
}

/// How the cross terms of the first-order direction error are weighted.
///
/// `Literal` uses `2(H_aΩ′_c + H_cΩ′_a)` for the operator multiplying the
/// θ-oscillating functionals. `Commutator` uses
/// `[H_a, Ω′_c] + [H_c, Ω′_a]`, which is what a direct first-order
/// expansion of `[H, Ω′]` between the control rotations produces. The two
/// coincide when `Ω′_c` anticommutes with `H_a` and `Ω′_a` with `H_c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrossTermForm {
    #[default]
    Literal,
    Commutator,
}

/// The three parts of the leading-order error.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaParts {
    /// `η^(τp,1)`
    pub duration: Operator,
    /// `η^(ε,1)(τp,0)`
    pub direction_zeroth: Operator,
    /// `η^(ε,1)(τp,1)`
    pub direction_first: Operator,
}

impl EtaParts {
    pub fn total(&self) -> Operator {
        &(&self.duration + &self.direction_zeroth) + &self.direction_first
    }
}

const I: C64 = C64::new(0.0, 1.0);

/// Assembles `η` from the scalar functionals and the `Ω`-split of `H`, `Ω′`.
pub fn assemble_eta_parts(
    model: &SystemModel,
    pulse: &DesignedPulse,
    form: CrossTermForm,
) -> Result<EtaParts, SimError> {
    let omega = model.omega.operator();
    let (h_a, h_c) = split_by_involution(&model.hamiltonian, &model.omega)?;
    let (w_a, w_c) = split_by_involution(&model.omega_prime, &model.omega)?;
    let eps = model.epsilon;

    // i2H_a η₁ + 2H_aΩ η₂
    let (t1, t2) = eta_tau(pulse);
    let duration = (&h_a * (I * (2.0 * t1))) + (&(&h_a * omega) * C64::new(2.0 * t2, 0.0));

    // −ΩΩ′_a e₁ − iΩ′_a e₂ − ΩΩ′_c e₃ − iΩ′_c e₄
    let e0 = eta_eps0(pulse, eps);
    let direction_zeroth = (&(omega * &w_a) * C64::new(-e0[0], 0.0))
        + (&w_a * (-I * e0[1]))
        + (&(omega * &w_c) * C64::new(-e0[2], 0.0))
        + (&w_c * (-I * e0[3]));

    // −iΩC f₁ + C f₂ − iΩD f₃ + D f₄
    let e1 = eta_eps1(pulse, eps);
    let same = h_a.commutator(&w_a) + h_c.commutator(&w_c);
    let cross = match form {
        CrossTermForm::Literal => (&(&h_a * &w_c) + &(&h_c * &w_a)) * 2.0,
        CrossTermForm::Commutator => h_a.commutator(&w_c) + h_c.commutator(&w_a),
    };
    let direction_first = (&(omega * &same) * (-I * e1[0]))
        + (&same * C64::new(e1[1], 0.0))
        + (&(omega * &cross) * (-I * e1[2]))
        + (&cross * C64::new(e1[3], 0.0));

    Ok(EtaParts {
        duration,
        direction_zeroth,
        direction_first,
    })
}

/// `η` with the cross terms weighted as in [`CrossTermForm::Literal`].
pub fn assemble_eta(model: &SystemModel, pulse: &DesignedPulse) -> Result<Operator, SimError> {
    Ok(assemble_eta_parts(model, pulse, CrossTermForm::Literal)?.total())
}

/// The three parts of `η` from their defining operator integrals
/// `∫ V(t) P(τp,t) X(t) P(t,0) dt`, by adaptive quadrature.
pub fn eta_parts_by_quadrature(
    model: &SystemModel,
    pulse: &DesignedPulse,
    abs_tol: f64,
) -> Result<EtaParts, SimError> {
    let shape = pulse.shape();
    let tau_s = pulse.tau_s();
    let total = shape.area();
    let h = &model.hamiltonian;
    let omega = model.omega.operator();
    let eps = model.epsilon;
    let h_omega = h.commutator(omega);
    let h_omega_prime = h.commutator(&model.omega_prime) * eps;
    let omega_prime = model.omega_prime.scale(C64::new(0.0, -eps));
    let sandwich = |t: f64, x: &Operator| -> Operator {
        let before = shape.cumulative_phase(t).unwrap_or(f64::NAN);
        let late = model.omega.rotation(total - before);
        let early = model.omega.rotation(before);
        &(&late * x) * &early * shape.amplitude_at(t)
    };
    let bounds = shape.boundaries();
    let max_intervals = 4000;
    let duration = integrate_piecewise(
        |t| sandwich(t, &h_omega) * (t - tau_s),
        &bounds,
        abs_tol,
        max_intervals,
    )?;
    let direction_zeroth = integrate_piecewise(
        |t| sandwich(t, &omega_prime),
        &bounds,
        abs_tol,
        max_intervals,
    )?;
    let direction_first = integrate_piecewise(
        |t| sandwich(t, &h_omega_prime) * (t - tau_s),
        &bounds,
        abs_tol,
        max_intervals,
    )?;
    Ok(EtaParts {
        duration,
        direction_zeroth,
        direction_first,
    })
}

/// Deviation norms of one simulated pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationReport {
    /// `‖U − target‖`
    pub target_deviation: f64,
    /// `‖δP_Ω‖`
    pub control_error: f64,
    /// `‖δP_Ω − η‖`
    pub remainder: f64,
    /// `‖η‖`
    pub eta_norm: f64,
    /// max entry of `UU† − 1`
    pub unitarity_residual: f64,
}

pub fn deviation_report(
    model: &SystemModel,
    pulse: &DesignedPulse,
) -> Result<DeviationReport, SimError> {
    let u = propagate(model, pulse)?;
    let target = ideal_target(model, pulse)?;
    let delta = control_frame_error(model, pulse)?;
    let eta = assemble_eta(model, pulse)?;
    Ok(DeviationReport {
        target_deviation: operator_norm(&(&u - &target)),
        control_error: operator_norm(&delta),
        remainder: operator_norm(&(&delta - &eta)),
        eta_norm: operator_norm(&eta),
        unitarity_residual: u.unitarity_residual(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingSample {
    pub k: usize,
    pub param: f64,
    pub deviation: f64,
}

/// Deviation norms along a geometric sweep with a fitted log-log slope.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSeries {
    pub samples: Vec<ScalingSample>,
    pub fitted_slope: f64,
    pub fit_residual: f64,
}

impl ScalingSeries {
    pub fn from_samples(samples: Vec<ScalingSample>) -> Result<Self, SimError> {
        let points: Vec<(f64, f64)> = samples.iter().map(|s| (s.param, s.deviation)).collect();
        let (fitted_slope, fit_residual) = fit_scaling(&points)?;
        Ok(Self {
            samples,
            fitted_slope,
            fit_residual,
        })
    }

    /// Fails with a diagnostic if the samples do not lie on a power law.
    pub fn check_residual(&self, limit: f64) -> Result<(), SimError> {
        if self.fit_residual <= limit {
            Ok(())
        } else {
            Err(SimError::ScalingDiagnostic {
                slope: self.fitted_slope,
                residual: self.fit_residual,
                limit,
            })
        }
    }
}

impl fmt::Display for ScalingSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.samples {
            writeln!(f, "{:>3} {:.6e} {:.6e}", s.k, s.param, s.deviation)?;
        }
        write!(
            f,
            "slope {:.4} residual {:.2e}",
            self.fitted_slope, self.fit_residual
        )
    }
}

/// Least-squares slope of `ln y` against `ln x`; the residual is the
/// largest absolute deviation from the fitted line in log space.
pub fn fit_scaling(samples: &[(f64, f64)]) -> Result<(f64, f64), SimError> {
    if samples.len() < 4 {
        return Err(SimError::DegenerateFit(format!(
            "need at least 4 samples, got {}",
            samples.len()
        )));
    }
    if let Some(&(x, y)) = samples
        .iter()
        .find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(SimError::DegenerateFit(format!(
            "non-positive sample ({x:e}, {y:e})"
        )));
    }
    let logs: Vec<(f64, f64)> = samples.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(SimError::DegenerateFit("all parameters equal".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual = logs
        .iter()
        .map(|(x, y)| (y - (intercept + slope * x)).abs())
        .fold(0.0, f64::max);
    Ok((slope, residual))
}

fn sweep<F>(
    pulse: &DesignedPulse,
    shrink: f64,
    steps: usize,
    mut measure: F,
) -> Result<ScalingSeries, SimError>
where
    F: FnMut(usize, f64, &DesignedPulse) -> Result<f64, SimError>,
{
    if !(shrink > 0.0 && shrink < 1.0) {
        return Err(SimError::InvalidSweep(format!(
            "shrink factor {shrink} not in (0, 1)"
        )));
    }
    if steps < 4 {
        return Err(SimError::InvalidSweep(format!(
            "need at least 4 steps, got {steps}"
        )));
    }
    let mut samples = Vec::with_capacity(steps);
    for k in 0..steps {
        let factor = shrink.powi(k as i32);
        let scaled = pulse.time_scaled(factor)?;
        let deviation = measure(k, factor, &scaled)?;
        samples.push(ScalingSample {
            k,
            param: scaled.tau_p(),
            deviation,
        });
    }
    ScalingSeries::from_samples(samples)
}

/// Shrinks `τp` and `ε` jointly by `shrink` per step and records
/// `‖δP_Ω − η‖`; a correct leading-order `η` leaves a second-order remainder.
pub fn leading_order_agreement(
    model: &SystemModel,
    pulse: &DesignedPulse,
    shrink: f64,
    steps: usize,
) -> Result<ScalingSeries, SimError> {
    sweep(pulse, shrink, steps, |_, factor, scaled| {
        let m = model.with_epsilon(model.epsilon * factor);
        let delta = control_frame_error(&m, scaled)?;
        let eta = assemble_eta(&m, scaled)?;
        Ok(operator_norm(&(&delta - &eta)))
    })
}

/// Joint shrink as above, recording `‖δP_Ω − η‖ / ‖δP_Ω‖`.
pub fn relative_agreement(
    model: &SystemModel,
    pulse: &DesignedPulse,
    shrink: f64,
    steps: usize,
) -> Result<ScalingSeries, SimError> {
    sweep(pulse, shrink, steps, |_, factor, scaled| {
        let m = model.with_epsilon(model.epsilon * factor);
        let delta = control_frame_error(&m, scaled)?;
        let eta = assemble_eta(&m, scaled)?;
        Ok(operator_norm(&(&delta - &eta)) / operator_norm(&delta))
    })
}

/// Shrinks `τp` only (ε fixed) and records `‖U − target‖`.
pub fn delta_pulse_scaling(
    model: &SystemModel,
    pulse: &DesignedPulse,
    shrink: f64,
    steps: usize,
) -> Result<ScalingSeries, SimError> {
    sweep(pulse, shrink, steps, |_, _, scaled| {
        let u = propagate(model, scaled)?;
        let target = ideal_target(model, scaled)?;
        Ok(operator_norm(&(&u - &target)))
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::design::design_symmetric_pi;
    use crate::pulse::{asymmetric_family, PulseShape};

    fn qubit_model(h: Operator, omega_prime: Operator, eps: f64) -> SystemModel {
        SystemModel::new(h, Involution::new(pauli::x()).unwrap(), omega_prime, eps).unwrap()
    }

    fn constant_pi(tau_p: f64) -> DesignedPulse {
        DesignedPulse::placed(
            PulseShape::constant(tau_p, PI / (2.0 * tau_p)).unwrap(),
            tau_p / 2.0,
        )
        .unwrap()
    }

    #[test]
    fn free_control_reaches_parity_kick() {
        let m = qubit_model(Operator::zeros(2), pauli::y(), 0.0);
        for p in [
            constant_pi(0.3),
            asymmetric_family(2, 1.0).unwrap(),
            design_symmetric_pi(0.5).unwrap(),
        ] {
            let u = propagate(&m, &p).unwrap();
            assert!(u.max_abs_diff(&pauli::x().scale(C64::new(0.0, -1.0))) < 1e-12);
            assert!(u.max_abs_diff(&ideal_target(&m, &p).unwrap()) < 1e-12);
            assert!(
                control_frame_error(&m, &p)
                    .unwrap()
                    .max_abs_diff(&Operator::zeros(2))
                    < 1e-12
            );
        }
    }

    #[test]
    fn zero_shape_is_free_evolution() {
        let model = SystemModel::default_model(1e-3);
        let p = DesignedPulse::placed(PulseShape::constant(0.7, 0.0).unwrap(), 0.2).unwrap();
        let u = propagate(&model, &p).unwrap();
        let free = hermitian_propagator(model.hamiltonian(), 0.7).unwrap();
        assert!(u.max_abs_diff(&free) < 1e-12);
    }

    #[test]
    fn target_boundary_placement() {
        let model = SystemModel::default_model(0.0);
        let shape = PulseShape::constant(0.4, PI / 0.8).unwrap();
        let p = DesignedPulse::placed(shape, 0.0).unwrap();
        let target = ideal_target(&model, &p).unwrap();
        let want =
            &hermitian_propagator(model.hamiltonian(), 0.4).unwrap() * &ideal_control(&model, &p);
        assert!(target.max_abs_diff(&want) < 1e-13);
        let kick = ideal_control(&model, &p);
        assert!(kick.max_abs_diff(&model.omega().operator().scale(C64::new(0.0, -1.0))) < 1e-15);
    }

    #[test]
    fn propagation_is_unitary_and_subdivision_invariant() {
        let model = SystemModel::default_model(0.05);
        let p = asymmetric_family(3, 0.8).unwrap();
        let u = propagate(&model, &p).unwrap();
        assert!(u.unitarity_residual() < 1e-10);
        let refined = DesignedPulse::placed(p.shape().subdivided(2).unwrap(), p.tau_s()).unwrap();
        let u2 = propagate(&model, &refined).unwrap();
        assert!(u.max_abs_diff(&u2) < 1e-12);
    }

    #[test]
    fn anticommuting_hamiltonian_only_duration_term() {
        let h = pauli::z() * 0.4;
        let m = qubit_model(h.clone(), pauli::y(), 0.0);
        let p = constant_pi(0.1);
        let parts = assemble_eta_parts(&m, &p, CrossTermForm::Literal).unwrap();
        assert!(parts.direction_zeroth.max_abs_diff(&Operator::zeros(2)) == 0.0);
        assert!(parts.direction_first.max_abs_diff(&Operator::zeros(2)) == 0.0);
        let (t1, t2) = eta_tau(&p);
        let want = (&h * (I * (2.0 * t1))) + (&(&h * &pauli::x()) * C64::new(2.0 * t2, 0.0));
        assert!(parts.duration.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn designed_pulse_has_no_duration_eta() {
        let model = SystemModel::default_model(0.0);
        let p = design_symmetric_pi(0.01).unwrap();
        let eta = assemble_eta(&model, &p).unwrap();
        assert!(operator_norm(&eta) < 1e-10);
    }

    #[test]
    fn hand_assembled_direction_error() {
        // H = 0, Ω = X, Ω′ = Y: η = −iΩ′_a·ε = −iεY.
        let eps = 1e-6;
        let m = qubit_model(Operator::zeros(2), pauli::y(), eps);
        let p = constant_pi(1.0);
        let eta = assemble_eta(&m, &p).unwrap();
        let want = pauli::y().scale(C64::new(0.0, -eps));
        assert!(eta.max_abs_diff(&want) < 1e-18);
        let delta = control_frame_error(&m, &p).unwrap();
        assert!(operator_norm(&(&delta - &want)) / operator_norm(&want) < 1e-3);
    }

    #[test]
    fn quadrature_matches_assembled_parts() {
        let model = SystemModel::default_model(0.02);
        let p = asymmetric_family(1, 0.3).unwrap();
        let quad = eta_parts_by_quadrature(&model, &p, 1e-12).unwrap();
        let lit = assemble_eta_parts(&model, &p, CrossTermForm::Literal).unwrap();
        let com = assemble_eta_parts(&model, &p, CrossTermForm::Commutator).unwrap();
        assert!(quad.duration.max_abs_diff(&lit.duration) < 1e-10);
        assert!(quad.direction_zeroth.max_abs_diff(&lit.direction_zeroth) < 1e-10);
        assert!(quad.direction_first.max_abs_diff(&com.direction_first) < 1e-10);
    }

    #[test]
    fn fit_examples() {
        let f: f64 = 0.5;
        let quad: Vec<_> = (0..6).map(|k| (f.powi(k), 3.0 * f.powi(2 * k))).collect();
        let (s, r) = fit_scaling(&quad).unwrap();
        assert!((s - 2.0).abs() < 1e-9 && r < 1e-9);
        let lin: Vec<_> = (0..6).map(|k| (f.powi(k), 0.7 * f.powi(k))).collect();
        assert!((fit_scaling(&lin).unwrap().0 - 1.0).abs() < 1e-9);
        let flat: Vec<_> = (0..6).map(|k| (f.powi(k), 2.0)).collect();
        assert!(fit_scaling(&flat).unwrap().0.abs() < 1e-12);
        let zero: Vec<_> = (0..6).map(|k| (f.powi(k), 0.0)).collect();
        assert!(matches!(
            fit_scaling(&zero),
            Err(SimError::DegenerateFit(_))
        ));
        assert!(matches!(
            fit_scaling(&quad[..3]),
            Err(SimError::DegenerateFit(_))
        ));
    }

    #[test]
    fn sweep_argument_checks() {
        let model = SystemModel::default_model(1e-3);
        let p = constant_pi(0.01);
        assert!(matches!(
            leading_order_agreement(&model, &p, 1.5, 6),
            Err(SimError::InvalidSweep(_))
        ));
        assert!(matches!(
            leading_order_agreement(&model, &p, 0.5, 3),
            Err(SimError::InvalidSweep(_))
        ));
    }

    #[test]
    fn model_validation() {
        let bad = SystemModel::new(
            Operator::identity(4),
            Involution::new(pauli::x()).unwrap(),
            pauli::y(),
            0.0,
        );
        assert!(matches!(
            bad,
            Err(SimError::Operator(OperatorError::DimensionMismatch { .. }))
        ));
        let non_hermitian = SystemModel::new(
            Operator::zeros(2),
            Involution::new(pauli::x()).unwrap(),
            pauli::y().scale(C64::new(0.0, 1.0)),
            0.0,
        );
        assert!(non_hermitian.is_err());
    }
}
