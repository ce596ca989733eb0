//! Run configuration and experiment orchestration: single solves, direct
//! reference solves, parameter sweeps and spectral diagnostics.

mod config;
mod output;
mod runs;

pub use config::{RunConfig, SolverKind};
pub use output::{
    decode_reference, encode_reference, read_reference, write_diagnostics_csv, write_history_csv, write_reference,
    write_summary_csv,
};
pub use runs::{
    build_material, build_mesh, build_partition, build_problem, build_source, run_diagnostics, run_direct, run_solve,
    run_sweep, DirectReport, SolveReport, SweepAxis,
};

/// One line of a sweep summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: String,
    pub value: f64,
    /// Impedance name, or `none` for the undecomposed baseline.
    pub impedance: String,
    pub solver: String,
    pub iterations: usize,
    pub converged: bool,
    pub final_error: f64,
}

/// Spectral quantities of one impedance choice.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRow {
    pub impedance: String,
    pub gamma: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    /// `(1 − r(1−r)γ²)^{1/2}`.
    pub rate_bound: f64,
}
