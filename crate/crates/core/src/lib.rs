//! Time-optimal bang-bang control of qubits under a bounded single-axis drive,
//! its finite-bandwidth Fourier approximation, and exact simulation of the
//! resulting gates.
//!
//! The pipeline is:
//!
//! 1. [`bangbang`] synthesises the ideal bang-bang switching function for a
//!    target gate (analytic weak/strong-driving π rotations, or a multi-start
//!    search for arbitrary SU(2) targets).
//! 2. [`fourier`] expands that switching function in a Fourier series over the
//!    gate time and truncates it to the available bandwidth.
//! 3. [`dynamics`] propagates the truncated drive and reports gate fidelity,
//!    plus first-order Magnus and closed-form fidelity estimates.
//! 4. [`twoqubit`] and [`sweeps`] build the two-qubit studies and parameter
//!    scans on top of the above.
//!
//! ```
//! use std::f64::consts::PI;
//! use fato::{pi_sequence, propagate_waveform, series_for_bandwidth, DriveParams, Gate};
//!
//! let params = DriveParams::from_theta(1.0, PI / 10.0)?;
//! let seq = pi_sequence(Gate::X, params)?;
//! assert_eq!(seq.len(), 5);
//!
//! let wf = series_for_bandwidth(&seq, 10.0)?;
//! let run = propagate_waveform(&wf, &params, &Gate::X.target(), 0.0)?;
//! assert!(run.infidelity() < 1e-6);
//! # Ok::<(), fato::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bangbang;
pub mod dynamics;
pub mod error;
pub mod fourier;
pub mod optimize;
pub mod qmat;
pub mod quadrature;
pub mod sweeps;
pub mod twoqubit;

pub use bangbang::{
    derive_params, pi_sequence, rwa_reference, search_to_sequence, strong_pi_sequence,
    weak_pi_sequence, Bang, BangSequence, Construction, DriveParams, Gate, Level, T2xParsing,
};
pub use dynamics::{
    analytic_fidelity, magnus_effective, propagate_bb, propagate_waveform, CoeffVariant,
    EffectiveHamiltonian, Integrator, PropagationResult, Regime,
};
pub use error::{Error, Result};
pub use fourier::{
    odd_extension, order_for_bandwidth, series_for_bandwidth, series_odd_extension, series_of, tail_error,
    FourierWaveform,
};
pub use qmat::{exp_su2, kron, pauli, trace_fidelity, Axis, CMat};
pub use sweeps::{
    robustness_point, run_sweep, rwa_infidelity, SweepGate, SweepKind, SweepRecord, SweepSpec,
};
pub use twoqubit::{build_swap_schedule, fato_swap_fidelity, opposite_drift_fidelity, SwapSegment, TwoQubitDrive};
