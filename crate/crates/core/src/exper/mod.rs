//! Experiment harness: configuration, Monte-Carlo sweeps, exponential
//! extrapolation, the verification suite and CSV/JSON output.

pub mod config;
pub mod fit;
pub mod output;
pub mod runs;
pub mod verify;

pub use config::{parse_depths, parse_theta_spec, ExperimentConfig, ExperimentKind, ThetaSpec, DEFAULT_DEPTHS};
pub use fit::{fit_exponential, fit_line, FitResult, FitStatus, LineFit, FIT_FORM};
pub use output::{sidecar_path, write_csv, write_csv_file, write_sidecar, CSV_HEADER};
pub use runs::{
    fit_curves, run_decay, run_linear, run_theory, run_variance, CurveFit, ExperimentRecord, LinearOutput,
    LinearPoint, TheoryReport, VarianceOutput, VariancePoint,
};
pub use verify::{run_verify, CheckOutcome, CheckResult, VerifyReport};
