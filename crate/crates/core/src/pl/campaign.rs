use rayon::prelude::*;
use serde::Serialize;

use crate::spectral::{FitConfig, ProfileParams};

use super::level::analyze_level_seeded;
use super::report::serialize_report;
use super::windows::{plan_windows, WindowPlan};
use super::{split_allometric_fit, LevelResult, PlError, PowerSeries, SplitPowerFit};

/// How the fit window is sized around each level's coarse peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowPolicy {
    /// Half-width `c·FWHM` with `c` rising from 2 to 4 with power rank.
    Adaptive,
    /// Half-width `fwhm_multiple·FWHM` at every level.
    Fixed { fwhm_multiple: f64 },
}

impl WindowPolicy {
    pub fn describe(&self) -> String {
        match self {
            WindowPolicy::Adaptive => "adaptive".into(),
            WindowPolicy::Fixed { fwhm_multiple } => format!("fixed:{fwhm_multiple:?}"),
        }
    }
}

/// Fit starting point for each level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Every level starts from its own data-derived guess.
    Independent,
    /// Each level starts from the previous accepted level's parameters.
    /// Sequential; used to check that seeding does not move the result.
    Cascade,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignConfig {
    pub fit: FitConfig,
    pub boundary_uw: f64,
    pub window_policy: WindowPolicy,
    pub despike: bool,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            fit: FitConfig::default(),
            boundary_uw: 10.0,
            window_policy: WindowPolicy::Adaptive,
            despike: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejected {
    pub power_uw: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    pub campaign_id: String,
    pub levels: Vec<LevelResult>,
    pub rejected: Vec<Rejected>,
    /// Absent when fewer than two levels survive.
    pub intensity_fit: Option<SplitPowerFit>,
    pub position_vs_power: Vec<(f64, f64)>,
    pub config_echo: CampaignConfig,
    pub canonical_hash: String,
}

enum Outcome {
    Accepted(LevelResult),
    Rejected(Rejected),
}

fn classify(power_uw: f64, result: Result<LevelResult, PlError>) -> Outcome {
    let reject = |reason: &str| {
        Outcome::Rejected(Rejected {
            power_uw,
            reason: reason.to_string(),
        })
    };
    match result {
        Err(e) => reject(e.code()),
        Ok(r) if !r.fit.converged => reject("FIT_NOT_CONVERGED"),
        Ok(r) if !r.fit.accepted => reject("R2_BELOW_THRESHOLD"),
        Ok(r) if !(r.peak_intensity_counts > 0.0) => reject("NONPOSITIVE_INTENSITY"),
        Ok(r) => Outcome::Accepted(r),
    }
}

fn run_one(
    plan: &Result<WindowPlan, PlError>,
    series: &PowerSeries,
    idx: usize,
    config: &CampaignConfig,
    seed: Option<&ProfileParams>,
) -> Result<LevelResult, PlError> {
    let plan = plan.as_ref().map_err(Clone::clone)?;
    let level = &series.levels()[idx];
    analyze_level_seeded(level.power_uw, &level.spectrum, &plan.window, config, seed)
}

/// Full campaign with independent per-level initialisation.
pub fn run_campaign(
    series: &PowerSeries,
    config: &CampaignConfig,
) -> Result<CampaignReport, PlError> {
    run_campaign_with_init(series, config, InitMode::Independent)
}

/// Windows, per-level fits, rejection filtering, split power law and the
/// sealed report. Levels may be fitted in parallel; results are merged in
/// ascending power order before any reduction.
pub fn run_campaign_with_init(
    series: &PowerSeries,
    config: &CampaignConfig,
    init: InitMode,
) -> Result<CampaignReport, PlError> {
    config.fit.validate()?;
    if series.levels().is_empty() {
        return Err(PlError::EmptyCampaign);
    }
    let plans = plan_windows(series, &config.fit, config.window_policy, config.despike);
    let outcomes: Vec<Outcome> = match init {
        InitMode::Independent => plans
            .par_iter()
            .enumerate()
            .map(|(i, plan)| {
                classify(
                    series.levels()[i].power_uw,
                    run_one(plan, series, i, config, None),
                )
            })
            .collect(),
        InitMode::Cascade => {
            let mut seed: Option<ProfileParams> = None;
            let mut out = Vec::with_capacity(plans.len());
            for (i, plan) in plans.iter().enumerate() {
                let o = classify(
                    series.levels()[i].power_uw,
                    run_one(plan, series, i, config, seed.as_ref()),
                );
                if let Outcome::Accepted(r) = &o {
                    seed = Some(r.fit.params);
                }
                out.push(o);
            }
            out
        }
    };

    let mut levels = Vec::new();
    let mut rejected = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Accepted(r) => levels.push(r),
            Outcome::Rejected(r) => rejected.push(r),
        }
    }
    let points: Vec<(f64, f64)> = levels
        .iter()
        .map(|l| (l.power_uw, l.peak_intensity_counts))
        .collect();
    let intensity_fit = if points.len() >= 2 {
        Some(split_allometric_fit(&points, config.boundary_uw)?)
    } else {
        None
    };
    let position_vs_power = levels
        .iter()
        .map(|l| (l.power_uw, l.peak_position_ev))
        .collect();
    let mut report = CampaignReport {
        campaign_id: series.campaign_id().to_string(),
        levels,
        rejected,
        intensity_fit,
        position_vs_power,
        config_echo: config.clone(),
        canonical_hash: String::new(),
    };
    let (_, hash) = serialize_report(&report);
    report.canonical_hash = hash;
    Ok(report)
}
