//! Schema-gated, deterministic laboratory analysis tools.
//!
//! The crate is organised around the path a tool call takes:
//!
//! * [`schema`] validates a raw call against a typed schema before anything runs.
//! * [`spectral`] holds the spectral primitives (axis conversion, despiking,
//!   baseline removal, line profiles, the damped least-squares fitter).
//! * [`pl`] is the photoluminescence power-series campaign built on top of them.
//! * [`sem`] measures surface periodicity and particle sizes in SEM images.
//! * [`server`] exposes both workflows as typed tools over line-delimited JSON.
//! * [`repro`] generates synthetic campaigns and audits repeat-run identity.
//!
//! Every numeric path is sequential and free of randomness; the only random
//! numbers in the crate come from the seeded generator in [`repro::synth`].

pub mod canonical;
pub mod pl;
pub mod repro;
pub mod schema;
pub mod sem;
pub mod server;
pub mod spectral;

pub use pl::{
    AllometricFit, CampaignConfig, CampaignReport, LevelResult, PowerSeries, SplitPowerFit,
};
pub use schema::{ParamKind, ParamSpec, ToolCall, TypedSchema, ValidationReport, ViolationCode};
pub use sem::{CalibrationTable, GrayImage, ParticleReport, PeriodicityReport};
pub use spectral::{
    EnergyWindow, FitConfig, ProfileFitResult, ProfileKind, ProfileParams, Spectrum,
};
