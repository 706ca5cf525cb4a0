//! Finite-duration control pulses with small errors in their rotation axis.
//!
//! The crate evaluates the ten leading-order error functionals of a
//! piecewise-constant pulse in closed form, designs first-order pulse
//! shapes, and checks the analysis against exact unitary propagation.
//!
//! Rotation-angle convention: a pulse `V(t)` rotates by `2∫V dt`, so a
//! π pulse has area `π/2`.

pub mod cli;
pub mod design;
pub mod functionals;
pub mod operator;
pub mod pulse;
pub mod quadrature;
pub mod report;
pub mod simulate;

pub use design::{
    design_asymmetric_pi, design_symmetric_pi, verify_first_order, DesignError, Family,
};
pub use functionals::{
    classify_budget, error_budget, eta_eps0, eta_eps1, eta_tau, ErrorBudget, Flag, Functional,
};
pub use operator::{Involution, Operator};
pub use pulse::{
    asymmetric_family, make_asymmetric, make_symmetric, DesignedPulse, PulseShape, Segment,
};
pub use simulate::{ScalingSeries, SystemModel};
