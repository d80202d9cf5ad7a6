//! Run configuration, logging, evaluation and metrics behind the CLI.

mod commands;
mod config;
mod eval;
mod metrics;
mod steplog;

pub use commands::{cmd_eval, cmd_replay, cmd_train, write_metrics_from_runs, EvalRunOutput, TrainRunOutput};
pub use config::{RunConfig, StageChoice};
pub use eval::{
    default_goals, evaluate, load_goals, run_policy, EvalConfig, EvalReport, MetricsSummary, RunOutcome, RunRecord,
};
pub use metrics::{polyline_length, write_metrics, METRICS_HEADER};
pub use steplog::{
    read_step_log, replay, ReplayReport, StepLogHeader, StepLogWriter, StepRecord, STEP_LOG_FORMAT, STEP_LOG_VERSION,
};
