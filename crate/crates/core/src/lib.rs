//! Duality quantities for a cavity-QED Ramsey interferometer.
//!
//! A two-level atom crosses a high-finesse cavity (Jaynes-Cummings beam
//! splitter and which-way detector), a Stark phase shifter and a classical
//! π/2 beam merger. For any initial cavity-field state this crate computes the
//! branch weights, the predictability `P`, the detector quality `Q`, the
//! distinguishability `D` and the fringe visibility `V`, checks the duality
//! identities, and calibrates the Rabi phase for symmetric or maximally
//! asymmetric beam splitting.
//!
//! ```
//! use ramsey_duality::{coherent_state, duality_report, JcParams, DEFAULT_EPS_TRUNC};
//!
//! let vacuum = coherent_state(0.0, DEFAULT_EPS_TRUNC).unwrap();
//! let report = duality_report(&vacuum, JcParams::resonant(std::f64::consts::FRAC_PI_4)).unwrap();
//! assert!(report.p.abs() < 1e-12);
//! assert!((report.q - 1.0).abs() < 1e-12);
//! ```

pub mod branch;
pub mod calibrate;
pub mod cli;
pub mod duality;
pub mod error;
pub mod fock;
pub mod format;
pub mod oracle;
pub mod ramsey;
pub mod selfcheck;

pub use branch::{
    branch_coefficients, branch_overlap, branch_weights, coherence_term, conditional_states,
    BranchCoefficients, BranchData, Conditional, ConditionalStates, JcParams, EPS_WEIGHT,
};
pub use calibrate::{
    calibrate_asymmetric, calibrate_symmetric, sweep_regime, CalibrationResult, Regime, SweepRow,
    THETA_MAX,
};
pub use duality::{
    distinguishability, duality_report, predictability, quality, visibility, DualityReport,
};
pub use error::{Error, Result};
pub use fock::{
    auto_dim, coherent_state, coherent_state_with_dim, fock_state, thermal_state, CavityState,
    StateKind, DEFAULT_EPS_TRUNC,
};
pub use ramsey::{fringe_probability, fringe_scan, FringeScan};
