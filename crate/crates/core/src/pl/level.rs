use serde::Serialize;

use crate::spectral::{
    argmax, despike, fit_profile, initial_guess, subtract_baseline, EnergyWindow, ProfileFitResult,
    ProfileParams, Spectrum,
};

use super::{CampaignConfig, PlError};

/// Outcome of one power level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelResult {
    pub power_uw: f64,
    pub fit: ProfileFitResult,
    /// Maximum of the despiked, baseline-subtracted counts inside the window.
    pub peak_intensity_counts: f64,
    pub peak_position_ev: f64,
}

/// Despike, remove the edge baseline, fit from a data-derived start and read
/// the peak height directly from the processed counts.
pub fn analyze_level(
    power_uw: f64,
    spectrum: &Spectrum,
    window: &EnergyWindow,
    config: &CampaignConfig,
) -> Result<LevelResult, PlError> {
    analyze_level_seeded(power_uw, spectrum, window, config, None)
}

/// As [`analyze_level`], optionally starting the fit from `seed` instead of
/// the data-derived guess.
pub fn analyze_level_seeded(
    power_uw: f64,
    spectrum: &Spectrum,
    window: &EnergyWindow,
    config: &CampaignConfig,
    seed: Option<&ProfileParams>,
) -> Result<LevelResult, PlError> {
    let fit_cfg = &config.fit;
    let cleaned = if config.despike {
        let counts = despike(spectrum.counts(), fit_cfg.despike_window, fit_cfg.despike_k);
        Spectrum::new(spectrum.energy().to_vec(), counts)?
    } else {
        spectrum.clone()
    };
    let processed = subtract_baseline(&cleaned, window, fit_cfg.baseline_edge_points)?;
    let init = match seed {
        Some(p) => *p,
        None => initial_guess(&processed, window)?.params,
    };
    let fit = fit_profile(&processed, window, fit_cfg, &init)?;

    let range = processed.window_range(window);
    let local = &processed.counts()[range.clone()];
    let peak = range.start + argmax(local).expect("window holds samples");
    let peak_intensity_counts = processed.counts()[peak];
    let raw_position = processed.energy()[peak];
    let peak_position_ev = if fit.accepted && window.contains(fit.params.center) {
        fit.params.center
    } else {
        raw_position
    };
    Ok(LevelResult {
        power_uw,
        fit,
        peak_intensity_counts,
        peak_position_ev,
    })
}
