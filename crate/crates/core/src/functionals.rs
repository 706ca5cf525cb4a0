//! The ten scalar leading-order error functionals of a placed pulse.
//!
//! With `θ(t) = φ₋ − ψ(t)` (which equals `φ₊ − 2∫₀ᵗV`) the functionals are
//!
//! | name          | integrand                         |
//! |---------------|-----------------------------------|
//! | `eta_tau_1`   | `(t−τs) V sin θ`                  |
//! | `eta_tau_2`   | `(t−τs) V cos θ`                  |
//! | `eta_eps0_1`  | `ε V sin θ`                       |
//! | `eta_eps0_2`  | `ε V cos θ`                       |
//! | `eta_eps0_3`  | `ε V sin φ₊`                      |
//! | `eta_eps0_4`  | `ε V cos φ₊`                      |
//! | `eta_eps1_1`  | `ε (t−τs) V sin φ₊`               |
//! | `eta_eps1_2`  | `ε (t−τs) V cos φ₊`               |
//! | `eta_eps1_3`  | `ε (t−τs) V sin θ`                |
//! | `eta_eps1_4`  | `ε (t−τs) V cos θ`                |
//!
//! all integrated over `[0, τp]`. On each segment `V` is constant and `θ` is
//! affine in `t`, so every integral has an exact per-segment antiderivative.
//! [`quadrature_oracle`] evaluates the same integrals by adaptive quadrature
//! straight from the phase definitions, as an independent check.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::pulse::{DesignedPulse, PulseError};
use crate::quadrature::{integrate_piecewise, QuadratureError};

/// Default zero-classification tolerance (scaled by `max(1, τp)`).
pub const DEFAULT_ZERO_TOLERANCE: f64 = 1e-9;

/// Absolute tolerance of the quadrature oracle.
pub const ORACLE_TOLERANCE: f64 = 1e-11;

const ORACLE_MAX_INTERVALS: usize = 20_000;

/// `|z|` below which the segment kernels switch to their Taylor series.
const SERIES_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionalError {
    #[error("quadrature oracle failed: {0}")]
    Oracle(#[from] QuadratureError),
    #[error(transparent)]
    Pulse(#[from] PulseError),
}

/// Identifies one of the ten functionals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Functional {
    Tau1,
    Tau2,
    Eps0First,
    Eps0Second,
    Eps0Third,
    Eps0Fourth,
    Eps1First,
    Eps1Second,
    Eps1Third,
    Eps1Fourth,
}

impl Functional {
    pub const ALL: [Functional; 10] = [
        Functional::Tau1,
        Functional::Tau2,
        Functional::Eps0First,
        Functional::Eps0Second,
        Functional::Eps0Third,
        Functional::Eps0Fourth,
        Functional::Eps1First,
        Functional::Eps1Second,
        Functional::Eps1Third,
        Functional::Eps1Fourth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Functional::Tau1 => "eta_tau_1",
            Functional::Tau2 => "eta_tau_2",
            Functional::Eps0First => "eta_eps0_1",
            Functional::Eps0Second => "eta_eps0_2",
            Functional::Eps0Third => "eta_eps0_3",
            Functional::Eps0Fourth => "eta_eps0_4",
            Functional::Eps1First => "eta_eps1_1",
            Functional::Eps1Second => "eta_eps1_2",
            Functional::Eps1Third => "eta_eps1_3",
            Functional::Eps1Fourth => "eta_eps1_4",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Whether the functional carries a factor `ε`.
    pub fn scales_with_epsilon(self) -> bool {
        !matches!(self, Functional::Tau1 | Functional::Tau2)
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The ten functionals of one placed pulse.
///
/// The ε-dependent entries are stored as ε-coefficients (their value at
/// `ε = 1`), so the universal π-pulse constants can be checked directly;
/// `epsilon` is kept for assembling the physical values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBudget {
    pub eta_tau_1: f64,
    pub eta_tau_2: f64,
    pub eta_eps0_1: f64,
    pub eta_eps0_2: f64,
    pub eta_eps0_3: f64,
    pub eta_eps0_4: f64,
    pub eta_eps1_1: f64,
    pub eta_eps1_2: f64,
    pub eta_eps1_3: f64,
    pub eta_eps1_4: f64,
    pub epsilon: f64,
    pub tau_p: f64,
}

impl ErrorBudget {
    /// ε-coefficients in [`Functional::ALL`] order.
    pub fn coefficients(&self) -> [f64; 10] {
        [
            self.eta_tau_1,
            self.eta_tau_2,
            self.eta_eps0_1,
            self.eta_eps0_2,
            self.eta_eps0_3,
            self.eta_eps0_4,
            self.eta_eps1_1,
            self.eta_eps1_2,
            self.eta_eps1_3,
            self.eta_eps1_4,
        ]
    }

    /// Physical values (ε-dependent entries multiplied by `epsilon`).
    pub fn values(&self) -> [f64; 10] {
        let mut out = self.coefficients();
        for f in Functional::ALL {
            if f.scales_with_epsilon() {
                out[f.index()] *= self.epsilon;
            }
        }
        out
    }

    pub fn coefficient(&self, f: Functional) -> f64 {
        self.coefficients()[f.index()]
    }

    pub fn value(&self, f: Functional) -> f64 {
        self.values()[f.index()]
    }
}

/// Exact segment integrals of `θ`-oscillating and polynomial kernels.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    /// `∫ V e^{iθ} dt`
    osc0: Complex64,
    /// `∫ (t−τs) V e^{iθ} dt`
    osc1: Complex64,
    /// `∫ V dt`
    area: f64,
    /// `∫ (t−τs) V dt`
    lever: f64,
}

/// `(e^z − 1)/z`.
fn kernel0(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_THRESHOLD {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..30 {
            term *= z / (k as f64 + 1.0);
            sum += term;
            if term.norm() < 1e-18 {
                break;
            }
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `∫₀¹ s e^{zs} ds = ((z−1)e^z + 1)/z²`.
fn kernel1(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_THRESHOLD {
        // Σ z^k / (k! (k+2))
        let mut power = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.5, 0.0);
        for k in 1..30 {
            power *= z / k as f64;
            let term = power / (k as f64 + 2.0);
            sum += term;
            if term.norm() < 1e-18 {
                break;
            }
        }
        sum
    } else {
        ((z - 1.0) * z.exp() + 1.0) / (z * z)
    }
}

fn moments(pulse: &DesignedPulse) -> Moments {
    let shape = pulse.shape();
    let tau_s = pulse.tau_s();
    let phi_plus = shape.area();
    let mut out = Moments::default();
    let mut start = 0.0;
    let mut accumulated = 0.0;
    for seg in shape.segments() {
        let h = seg.duration;
        let v = seg.amplitude;
        // θ(start + u) = θ0 + βu on this segment.
        let theta0 = phi_plus - 2.0 * accumulated;
        let beta = -2.0 * v;
        let z = Complex64::new(0.0, beta * h);
        let phase = Complex64::from_polar(1.0, theta0);
        let j0 = phase * kernel0(z) * h;
        let j1 = phase * kernel1(z) * (h * h);
        let offset = start - tau_s;
        out.osc0 += j0 * v;
        out.osc1 += (j0 * offset + j1) * v;
        out.area += v * h;
        out.lever += v * (offset * h + 0.5 * h * h);
        accumulated += seg.area();
        start += h;
    }
    out
}

/// `(η₁^(τp,1), η₂^(τp,1))`.
pub fn eta_tau(pulse: &DesignedPulse) -> (f64, f64) {
    let m = moments(pulse);
    (m.osc1.im, m.osc1.re)
}

fn eps0_coefficients(pulse: &DesignedPulse) -> [f64; 4] {
    let m = moments(pulse);
    let phi_plus = pulse.phase_pair().phi_plus;
    [
        m.osc0.im,
        m.osc0.re,
        phi_plus.sin() * m.area,
        phi_plus.cos() * m.area,
    ]
}

fn eps1_coefficients(pulse: &DesignedPulse) -> [f64; 4] {
    let m = moments(pulse);
    let phi_plus = pulse.phase_pair().phi_plus;
    let (t1, t2) = eta_tau(pulse);
    [phi_plus.sin() * m.lever, phi_plus.cos() * m.lever, t1, t2]
}

/// `η_k^(ε,1)(τp,0)` for `k = 1..4`, including the factor `ε`.
pub fn eta_eps0(pulse: &DesignedPulse, epsilon: f64) -> [f64; 4] {
    eps0_coefficients(pulse).map(|c| epsilon * c)
}

/// `η_k^(ε,1)(τp,1)` for `k = 1..4`, including the factor `ε`.
/// Terms 3 and 4 are `ε` times [`eta_tau`].
pub fn eta_eps1(pulse: &DesignedPulse, epsilon: f64) -> [f64; 4] {
    eps1_coefficients(pulse).map(|c| epsilon * c)
}

/// `a_max(τ1² − τp²/2 − 2τ1τs + τpτs)`: the first-order direction
/// functional of a two-level `+a/−a` π pulse, per unit `ε`.
pub fn eta1_asym_closed_form(tau_p: f64, tau_1: f64, tau_s: f64, a_max: f64) -> f64 {
    a_max * (tau_1 * tau_1 - 0.5 * tau_p * tau_p - 2.0 * tau_1 * tau_s + tau_p * tau_s)
}

pub fn error_budget(pulse: &DesignedPulse, epsilon: f64) -> ErrorBudget {
    let (t1, t2) = eta_tau(pulse);
    let e0 = eps0_coefficients(pulse);
    let e1 = eps1_coefficients(pulse);
    ErrorBudget {
        eta_tau_1: t1,
        eta_tau_2: t2,
        eta_eps0_1: e0[0],
        eta_eps0_2: e0[1],
        eta_eps0_3: e0[2],
        eta_eps0_4: e0[3],
        eta_eps1_1: e1[0],
        eta_eps1_2: e1[1],
        eta_eps1_3: e1[2],
        eta_eps1_4: e1[3],
        epsilon,
        tau_p: pulse.tau_p(),
    }
}

/// Evaluates one functional (including its factor `ε`) by adaptive
/// quadrature with breakpoints at every switch, directly from `V(t)`,
/// `φ±` and `ψ(t)`.
pub fn quadrature_oracle(
    pulse: &DesignedPulse,
    which: Functional,
    epsilon: f64,
) -> Result<f64, FunctionalError> {
    let shape = pulse.shape();
    let tau_s = pulse.tau_s();
    let phases = pulse.phase_functions();
    let (phi_plus, phi_minus) = (phases.pair.phi_plus, phases.pair.phi_minus);
    let weight = if which.scales_with_epsilon() {
        epsilon
    } else {
        1.0
    };
    let integrand = |t: f64| -> f64 {
        let v = shape.amplitude_at(t);
        let psi = phases.psi(t).unwrap_or(f64::NAN);
        let theta = phi_minus - psi;
        let lever = t - tau_s;
        let kernel = match which {
            Functional::Tau1 | Functional::Eps1Third => lever * theta.sin(),
            Functional::Tau2 | Functional::Eps1Fourth => lever * theta.cos(),
            Functional::Eps0First => theta.sin(),
            Functional::Eps0Second => theta.cos(),
            Functional::Eps0Third => phi_plus.sin(),
            Functional::Eps0Fourth => phi_plus.cos(),
            Functional::Eps1First => lever * phi_plus.sin(),
            Functional::Eps1Second => lever * phi_plus.cos(),
        };
        weight * v * kernel
    };
    Ok(integrate_piecewise(
        integrand,
        &shape.boundaries(),
        ORACLE_TOLERANCE,
        ORACLE_MAX_INTERVALS,
    )?)
}

/// All ten functionals by quadrature, as physical values.
pub fn oracle_values(pulse: &DesignedPulse, epsilon: f64) -> Result<[f64; 10], FunctionalError> {
    let mut out = [0.0; 10];
    for f in Functional::ALL {
        out[f.index()] = quadrature_oracle(pulse, f, epsilon)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flag {
    Zero,
    Nonzero,
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flag::Zero => "=0",
            Flag::Nonzero => "!=0",
        })
    }
}

/// Zero/nonzero flag of every functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetClassification {
    pub flags: [Flag; 10],
    pub tolerance: f64,
    /// The threshold actually applied, `tolerance · max(1, τp)`.
    pub threshold: f64,
}

impl BudgetClassification {
    pub fn flag(&self, f: Functional) -> Flag {
        self.flags[f.index()]
    }
}

/// Flags each ε-coefficient as zero iff `|value| ≤ tol · max(1, τp)`.
pub fn classify_budget(budget: &ErrorBudget, tol: f64) -> BudgetClassification {
    let threshold = tol * budget.tau_p.max(1.0);
    let flags = budget.coefficients().map(|c| {
        if c.abs() <= threshold {
            Flag::Zero
        } else {
            Flag::Nonzero
        }
    });
    BudgetClassification {
        flags,
        tolerance: tol,
        threshold,
    }
}
