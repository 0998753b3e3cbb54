//! Deterministic spectral primitives.
//!
//! Everything here is a pure function of its inputs. Reductions run in
//! ascending sample order so repeated calls produce identical bits.

mod axis;
mod baseline;
mod despike;
pub mod faddeeva;
mod fit;
mod guess;
mod profile;
mod stats;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use axis::{convert_axis, HC_EV_NM};
pub use baseline::{edge_baseline, subtract_baseline, Line};
pub use despike::{despike, MAD_SCALE};
pub use fit::{fit_profile, fit_profile_traced, FitTrace};
pub use guess::{half_max_crossings, initial_guess, InitialGuess};
pub use profile::{eval_profile, profile_values};
pub use stats::{r_squared, GoodnessOfFit};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("NONPOSITIVE_WAVELENGTH: wavelength {0} nm is not positive")]
    NonpositiveWavelength(f64),
    #[error("UNSORTED_AXIS: axis is not strictly ascending at index {0}")]
    UnsortedAxis(usize),
    #[error("INVALID_SPECTRUM: {0}")]
    InvalidSpectrum(String),
    #[error("WINDOW_TOO_NARROW: window holds {have} samples, needs {need}")]
    WindowTooNarrow { have: usize, need: usize },
    #[error("EMPTY_WINDOW: no samples in [{0}, {1}] eV")]
    EmptyWindow(f64, f64),
    #[error("LENGTH_MISMATCH: {0} observed vs {1} modeled")]
    LengthMismatch(usize, usize),
    #[error("INVALID_CONFIG: {0}")]
    InvalidConfig(String),
}

impl SpectralError {
    pub fn code(&self) -> &'static str {
        match self {
            SpectralError::NonpositiveWavelength(_) => "NONPOSITIVE_WAVELENGTH",
            SpectralError::UnsortedAxis(_) => "UNSORTED_AXIS",
            SpectralError::InvalidSpectrum(_) => "INVALID_SPECTRUM",
            SpectralError::WindowTooNarrow { .. } => "WINDOW_TOO_NARROW",
            SpectralError::EmptyWindow(..) => "EMPTY_WINDOW",
            SpectralError::LengthMismatch(..) => "LENGTH_MISMATCH",
            SpectralError::InvalidConfig(_) => "INVALID_CONFIG",
        }
    }
}

pub const MIN_SPECTRUM_LEN: usize = 8;

/// One emission spectrum on an ascending energy axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    energy_ev: Vec<f64>,
    counts: Vec<f64>,
    pub provenance: Option<String>,
}

impl Spectrum {
    pub fn new(energy_ev: Vec<f64>, counts: Vec<f64>) -> Result<Self, SpectralError> {
        if energy_ev.len() != counts.len() {
            return Err(SpectralError::LengthMismatch(energy_ev.len(), counts.len()));
        }
        if energy_ev.len() < MIN_SPECTRUM_LEN {
            return Err(SpectralError::InvalidSpectrum(format!(
                "{} samples, need at least {MIN_SPECTRUM_LEN}",
                energy_ev.len()
            )));
        }
        if let Some(i) = energy_ev.iter().position(|e| !e.is_finite()) {
            return Err(SpectralError::InvalidSpectrum(format!(
                "energy {i} is not finite"
            )));
        }
        if let Some(i) = counts.iter().position(|c| !c.is_finite()) {
            return Err(SpectralError::InvalidSpectrum(format!(
                "count {i} is not finite"
            )));
        }
        if let Some(i) = energy_ev.windows(2).position(|w| w[0] >= w[1]) {
            return Err(SpectralError::UnsortedAxis(i + 1));
        }
        Ok(Self {
            energy_ev,
            counts,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, label: impl Into<String>) -> Self {
        self.provenance = Some(label.into());
        self
    }

    pub fn energy(&self) -> &[f64] {
        &self.energy_ev
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Same axis, new counts. Lengths must agree.
    pub(crate) fn with_counts(&self, counts: Vec<f64>) -> Self {
        debug_assert_eq!(counts.len(), self.counts.len());
        Self {
            energy_ev: self.energy_ev.clone(),
            counts,
            provenance: self.provenance.clone(),
        }
    }

    pub fn extent(&self) -> EnergyWindow {
        EnergyWindow {
            lo: self.energy_ev[0],
            hi: self.energy_ev[self.energy_ev.len() - 1],
        }
    }

    /// Index range of samples with `lo <= e <= hi`.
    pub fn window_range(&self, window: &EnergyWindow) -> std::ops::Range<usize> {
        let start = self.energy_ev.partition_point(|&e| e < window.lo);
        let end = self.energy_ev.partition_point(|&e| e <= window.hi);
        start..end.max(start)
    }
}

/// Closed energy interval in eV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyWindow {
    pub lo: f64,
    pub hi: f64,
}

impl EnergyWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self, SpectralError> {
        if lo.is_finite() && hi.is_finite() && lo < hi {
            Ok(Self { lo, hi })
        } else {
            Err(SpectralError::InvalidConfig(format!(
                "window [{lo}, {hi}] is empty"
            )))
        }
    }

    pub fn centered(center: f64, half_width: f64) -> Result<Self, SpectralError> {
        Self::new(center - half_width, center + half_width)
    }

    pub fn clamp_to(&self, extent: &EnergyWindow) -> Self {
        Self {
            lo: self.lo.max(extent.lo),
            hi: self.hi.min(extent.hi),
        }
    }

    pub fn contains(&self, e: f64) -> bool {
        self.lo <= e && e <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Gaussian,
    Lorentzian,
    Voigt,
}

impl ProfileKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileKind::Gaussian => "gaussian",
            ProfileKind::Lorentzian => "lorentzian",
            ProfileKind::Voigt => "voigt",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gaussian" => Some(ProfileKind::Gaussian),
            "lorentzian" => Some(ProfileKind::Lorentzian),
            "voigt" => Some(ProfileKind::Voigt),
            _ => None,
        }
    }
}

/// Line-shape parameters. `amplitude` is the peak height above `offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileParams {
    pub amplitude: f64,
    pub center: f64,
    /// Gaussian standard deviation, eV.
    pub sigma_g: f64,
    /// Lorentzian half-width at half-maximum, eV.
    pub gamma_l: f64,
    pub offset: f64,
}

impl ProfileParams {
    pub fn is_valid(&self) -> bool {
        [
            self.amplitude,
            self.center,
            self.sigma_g,
            self.gamma_l,
            self.offset,
        ]
        .iter()
        .all(|v| v.is_finite())
            && self.sigma_g >= 0.0
            && self.gamma_l >= 0.0
            && self.sigma_g + self.gamma_l > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileFitResult {
    pub params: ProfileParams,
    pub r_squared: f64,
    pub window: EnergyWindow,
    pub iterations: usize,
    pub converged: bool,
    pub accepted: bool,
    pub profile_kind: ProfileKind,
}

/// Numeric knobs of a single-peak fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitConfig {
    pub profile_kind: ProfileKind,
    pub r2_threshold: f64,
    pub max_iterations: usize,
    pub cost_rel_tol: f64,
    pub step_tol: f64,
    pub despike_window: usize,
    pub despike_k: f64,
    pub baseline_edge_points: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            profile_kind: ProfileKind::Voigt,
            r2_threshold: 0.85,
            max_iterations: 200,
            cost_rel_tol: 1e-12,
            step_tol: 1e-12,
            despike_window: 5,
            despike_k: 5.0,
            baseline_edge_points: 10,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<(), SpectralError> {
        let bad = |msg: &str| Err(SpectralError::InvalidConfig(msg.to_string()));
        if !(self.r2_threshold > 0.0 && self.r2_threshold <= 1.0) {
            return bad("r2_threshold must be in (0, 1]");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if !(self.cost_rel_tol > 0.0 && self.step_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.despike_window < 3 || self.despike_window % 2 == 0 {
            return bad("despike_window must be odd and at least 3");
        }
        if !(self.despike_k > 0.0) {
            return bad("despike_k must be positive");
        }
        if self.baseline_edge_points == 0 {
            return bad("baseline_edge_points must be positive");
        }
        Ok(())
    }
}

/// Index of the largest value; the first one wins on ties.
pub(crate) fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if values[b] >= v => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Median of a scratch buffer (sorted in place).
pub(crate) fn median_in_place(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
