//! Photoluminescence power-series campaign: CSV ingestion, adaptive fit
//! windows, per-level peak extraction, split power-law fitting and the
//! canonical report.

mod allometric;
mod campaign;
mod csv_load;
mod level;
mod report;
mod windows;

use thiserror::Error;

use crate::spectral::{SpectralError, Spectrum};

pub use allometric::{allometric_fit, split_allometric_fit, AllometricFit, SplitPowerFit};
pub use campaign::{
    run_campaign, run_campaign_with_init, CampaignConfig, CampaignReport, InitMode, Rejected,
    WindowPolicy,
};
pub use csv_load::load_campaign_csv;
pub use level::{analyze_level, analyze_level_seeded, LevelResult};
pub use report::{report_fields, serialize_report, REPORT_EXTENSION};
pub use windows::{adaptive_windows, plan_windows, window_scale, WindowPlan};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlError {
    #[error("BAD_HEADER: {0}")]
    BadHeader(String),
    #[error("RAGGED_ROWS: line {line} has {got} cells, expected {expected}")]
    RaggedRows {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("NONNUMERIC_CELL: line {line}, column {column}: {cell:?}")]
    NonnumericCell {
        line: usize,
        column: usize,
        cell: String,
    },
    #[error("DUPLICATE_POWER: {0} uW appears more than once")]
    DuplicatePower(f64),
    #[error("NO_PEAK: spectrum at {0} uW is flat")]
    NoPeak(f64),
    #[error("NONPOSITIVE_VALUE: power-law input ({0}, {1}) must be positive")]
    NonpositiveValue(f64, f64),
    #[error("TOO_FEW_POINTS: {0}")]
    TooFewPoints(String),
    #[error("EMPTY_CAMPAIGN: no power levels")]
    EmptyCampaign,
    #[error("AXIS_MISMATCH: level {0} does not share the campaign energy axis")]
    AxisMismatch(usize),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

impl PlError {
    pub fn code(&self) -> &'static str {
        match self {
            PlError::BadHeader(_) => "BAD_HEADER",
            PlError::RaggedRows { .. } => "RAGGED_ROWS",
            PlError::NonnumericCell { .. } => "NONNUMERIC_CELL",
            PlError::DuplicatePower(_) => "DUPLICATE_POWER",
            PlError::NoPeak(_) => "NO_PEAK",
            PlError::NonpositiveValue(..) => "NONPOSITIVE_VALUE",
            PlError::TooFewPoints(_) => "TOO_FEW_POINTS",
            PlError::EmptyCampaign => "EMPTY_CAMPAIGN",
            PlError::AxisMismatch(_) => "AXIS_MISMATCH",
            PlError::Spectral(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLevel {
    pub power_uw: f64,
    pub spectrum: Spectrum,
}

/// One spectrum per excitation power, ascending in power, on a shared axis.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    campaign_id: String,
    levels: Vec<PowerLevel>,
}

impl PowerSeries {
    pub fn new(
        campaign_id: impl Into<String>,
        mut levels: Vec<PowerLevel>,
    ) -> Result<Self, PlError> {
        if levels.is_empty() {
            return Err(PlError::EmptyCampaign);
        }
        if let Some(l) = levels
            .iter()
            .find(|l| !(l.power_uw > 0.0 && l.power_uw.is_finite()))
        {
            return Err(PlError::NonpositiveValue(l.power_uw, 1.0));
        }
        levels.sort_by(|a, b| a.power_uw.total_cmp(&b.power_uw));
        if let Some(w) = levels.windows(2).find(|w| w[0].power_uw == w[1].power_uw) {
            return Err(PlError::DuplicatePower(w[0].power_uw));
        }
        let axis = levels[0].spectrum.energy();
        if let Some(i) = levels.iter().position(|l| l.spectrum.energy() != axis) {
            return Err(PlError::AxisMismatch(i));
        }
        Ok(Self {
            campaign_id: campaign_id.into(),
            levels,
        })
    }

    pub fn campaign_id(&self) -> &str {
        &self.campaign_id
    }

    pub fn levels(&self) -> &[PowerLevel] {
        &self.levels
    }

    pub fn powers(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.power_uw).collect()
    }

    pub fn energy(&self) -> &[f64] {
        self.levels[0].spectrum.energy()
    }
}
