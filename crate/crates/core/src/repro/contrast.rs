//! Runs the same campaign through two deliberately different pipelines.

use crate::pl::{
    load_campaign_csv, run_campaign, serialize_report, CampaignConfig, PlError, WindowPolicy,
};
use crate::spectral::ProfileKind;

pub const CONTRAST_REPEATS: usize = 4;

/// Voigt profile, adaptive windows, despiking on.
pub fn primary_pipeline() -> CampaignConfig {
    CampaignConfig::default()
}

/// Lorentzian profile, fixed ±3·FWHM window, no despiking.
pub fn alternate_pipeline() -> CampaignConfig {
    let mut c = CampaignConfig::default();
    c.fit.profile_kind = ProfileKind::Lorentzian;
    c.window_policy = WindowPolicy::Fixed { fwhm_multiple: 3.0 };
    c.despike = false;
    c
}

/// One pipeline's exponents and how they behaved across repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub b_below: f64,
    pub b_above: f64,
    pub sigma_b_fit_below: f64,
    pub sigma_b_fit_above: f64,
    pub hashes: Vec<String>,
    /// All repeats produced the same report bytes.
    pub deterministic: bool,
    /// Largest spread of either exponent across repeats.
    pub b_spread_across_repeats: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContrastReport {
    pub campaign_id: String,
    pub primary: PipelineOutcome,
    pub alternate: PipelineOutcome,
    /// `primary − alternate`, per side.
    pub delta_b_below: f64,
    pub delta_b_above: f64,
}

impl ContrastReport {
    pub fn deterministic(&self) -> bool {
        self.primary.deterministic && self.alternate.deterministic
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ContrastError {
    #[error(transparent)]
    Pl(#[from] PlError),
    #[error("NO_INTENSITY_FIT: {0} pipeline left fewer than two accepted levels")]
    NoFit(&'static str),
}

impl ContrastError {
    pub fn code(&self) -> &'static str {
        match self {
            ContrastError::Pl(e) => e.code(),
            ContrastError::NoFit(_) => "NO_INTENSITY_FIT",
        }
    }
}

fn spread(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = values.fold(f64::INFINITY, f64::min);
    max - min
}

fn run_pipeline(
    series: &crate::pl::PowerSeries,
    config: &CampaignConfig,
    name: &'static str,
    repeats: usize,
) -> Result<PipelineOutcome, ContrastError> {
    let mut fits = Vec::with_capacity(repeats);
    let mut hashes = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let report = run_campaign(series, config)?;
        hashes.push(serialize_report(&report).1);
        fits.push(report.intensity_fit.ok_or(ContrastError::NoFit(name))?);
    }
    let first = &fits[0];
    Ok(PipelineOutcome {
        b_below: first.below.b,
        b_above: first.above.b,
        sigma_b_fit_below: first.below.sigma_b,
        sigma_b_fit_above: first.above.sigma_b,
        deterministic: hashes.windows(2).all(|w| w[0] == w[1]),
        b_spread_across_repeats: spread(fits.iter().map(|f| f.below.b))
            .max(spread(fits.iter().map(|f| f.above.b))),
        hashes,
    })
}

/// Both pipelines on `csv`, each run `repeats` times.
pub fn run_contrast(csv: &[u8], repeats: usize) -> Result<ContrastReport, ContrastError> {
    let series = load_campaign_csv(csv)?;
    let repeats = repeats.max(2);
    let primary = run_pipeline(&series, &primary_pipeline(), "primary", repeats)?;
    let alternate = run_pipeline(&series, &alternate_pipeline(), "alternate", repeats)?;
    Ok(ContrastReport {
        campaign_id: series.campaign_id().to_string(),
        delta_b_below: primary.b_below - alternate.b_below,
        delta_b_above: primary.b_above - alternate.b_above,
        primary,
        alternate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repro::{generate_campaign, SyntheticSpec};

    #[test]
    fn pipelines_differ_where_stated() {
        let (p, a) = (primary_pipeline(), alternate_pipeline());
        assert_eq!(p.fit.profile_kind, ProfileKind::Voigt);
        assert_eq!(a.fit.profile_kind, ProfileKind::Lorentzian);
        assert_eq!(p.window_policy, WindowPolicy::Adaptive);
        assert!(p.despike && !a.despike);
        assert_eq!(p.fit.r2_threshold, a.fit.r2_threshold);
    }

    #[test]
    fn noisy_campaign_is_deterministic_per_pipeline() {
        let spec = SyntheticSpec {
            noise_rel: 0.01,
            rng_seed: 7,
            n_levels: 9,
            ..Default::default()
        };
        let csv = generate_campaign(&spec).unwrap().csv;
        let r = run_contrast(&csv, 3).unwrap();
        assert!(r.deterministic());
        assert_eq!(r.primary.b_spread_across_repeats, 0.0);
        assert_eq!(r.alternate.b_spread_across_repeats, 0.0);
        assert_ne!(r.primary.hashes[0], r.alternate.hashes[0]);
        assert!(r.delta_b_below != 0.0 || r.delta_b_above != 0.0);
    }

    #[test]
    fn bad_csv_propagates() {
        let e = run_contrast(b"nope\n", 2).unwrap_err();
        assert_eq!(e.code(), "BAD_HEADER");
    }
}
