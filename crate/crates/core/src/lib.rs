//! Statevector simulation of Berry-phase measurements on twisted Heisenberg
//! models: the dimerized chain and the tetramerized square lattice.
//!
//! A ground state is carried adiabatically around a closed loop of bond
//! twists with a second-order Trotter circuit, and an ancilla reads out the
//! quantized phase through a Hadamard test. The [`oracle`] module computes
//! the same phase exactly from a discretized Wilson loop.
//!
//! ```
//! use berryloop::{build_dimerized_chain, wilson_loop_phase, Schedule};
//!
//! let model = build_dimerized_chain(4, 1.0, 0.5, 0).unwrap();
//! let schedule = Schedule::single(20.0).unwrap();
//! let w = wilson_loop_phase(&model, &schedule, 64).unwrap();
//! assert!((w.phase.abs() - std::f64::consts::PI).abs() < 1e-6);
//! ```
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.

pub mod adiabatic;
pub mod error;
pub mod estimator;
pub mod models;
pub mod oracle;
pub mod scalar;
pub mod schedule;
pub mod statevector;

pub use adiabatic::{
    depth_report, evolve_double_loop, evolve_half_time, trotter_step, DepthReport, NoMonitor,
    StepMonitor, TimeDirection,
};
pub use error::{Error, Result};
pub use estimator::{
    direct_amplitude_phase, hadamard_test_estimate, phase_from_counts, BerryEstimate,
    CountEstimate, LoopCircuit,
};
pub use models::{
    build_dimerized_chain, build_tetramerized_lattice, partition, Geometry, Plaquette,
    PlaquetteType,
};
pub use oracle::{
    classify_phase, gap_scan, ground_state, oracle_report, plaquette_levels_closed_form,
    plaquette_spectrum, wilson_loop_phase, Classification, GapScan, OracleGapMonitor, OracleReport,
    SpectrumSolver, WilsonLoop,
};
pub use scalar::Real;
pub use schedule::{parse_path, DrivenSlot, RampProfile};
pub use statevector::{sample_counts, TwoQubitUnitary};

pub type Complex64 = num_complex::Complex<f64>;
pub type State = statevector::QuantumState<f64>;
pub type Model = models::ModelSpec<f64>;
pub type Partition = models::HamiltonianPartition<f64>;
pub type Schedule = schedule::TwistSchedule<f64>;
pub type Plan = adiabatic::TrotterPlan<f64>;
pub type Report = adiabatic::EvolutionReport<f64>;
pub type Slice = oracle::SpectrumSlice<f64>;
pub type Twists = models::TwistVector<f64>;
