//! Numerical toolkit for strongly spin-squeezed collective states.
//!
//! The crate covers the full workflow for squeezing-enhanced Ramsey
//! interferometry on an ensemble of N two-level atoms:
//!
//! * [`dicke`] — collective spin algebra on the symmetric subspace;
//! * [`extreme`] — variational optimal (extreme) squeezed states as ground
//!   states of S_z^2 - (Omega/chi) S_x at a prescribed contrast;
//! * [`pulse`] — alternating one-axis-twisting / x-rotation propagators,
//!   fidelities and adjoint gradients, and the spin-echo construction of an
//!   effective twisting Hamiltonian from a cavity light shift;
//! * [`optimize`] — multi-start bounded quasi-Newton pulse-parameter search,
//!   free or at fixed total shearing strength;
//! * [`metrology`] — Wineland squeezing parameter, Ramsey phase sensitivity,
//!   and the photon-scattering contrast-loss model;
//! * [`scaling`] — sweep harness and power-law fits for scaling studies;
//! * [`husimi`] — Husimi-Q evaluation over the generalized Bloch sphere.

pub mod dicke;
pub mod error;
pub mod extreme;
pub mod husimi;
pub mod linalg;
pub mod metrology;
pub mod optimize;
pub mod pulse;
pub mod scaling;

pub use dicke::{Axis, CollectiveOp, Direction, SpinState, SpinSystem};
pub use error::{Error, Result};
pub use extreme::{ground_state, solve_extreme, ExtremeSolution};
pub use husimi::{husimi_grid, HusimiGrid};
pub use metrology::{
    corrected_xi2, gain_db, ramsey_sensitivity, wineland_xi2, LossModel, MetrologyReport,
    ReadoutAxis,
};
pub use optimize::{
    best_two_pulse_xi2, optimize_fixed_shear, optimize_free, OptimizationConfig, OptimizedSequence,
};
pub use pulse::{
    echo_oat, infidelity, infidelity_and_gradient, infidelity_gradient, propagate, CavityEchoSpec,
    EchoReport, Pulse, PulseSequence,
};
pub use scaling::{
    best_oat_xi2, power_law_fit, sweep_extreme_scaling, sweep_gain_vs_shear, sweep_oat_scaling,
    GainSweep, GainSweepConfig, OatOptimum, PowerLawFit, SweepMeta, SweepRow, SweepTable,
};
