//! Synthetic fixtures, a brute-force fit oracle and the repeat and
//! contrast experiments.

pub mod contrast;
pub mod images;
pub mod oracle;
pub mod repeat;
pub mod synth;

pub use contrast::{
    alternate_pipeline, primary_pipeline, run_contrast, ContrastError, ContrastReport,
    PipelineOutcome,
};
pub use oracle::{max_relative_difference, oracle_fit, OracleFit};
pub use repeat::{
    run_repeat, run_repeat_requests, RepeatError, RepeatOptions, RepeatReport, RunRecord,
    ServerCommand,
};
pub use synth::{generate_campaign, SyntheticCampaign, SyntheticSpec};
