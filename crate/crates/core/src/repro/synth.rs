//! Synthetic photoluminescence campaigns with known ground truth.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::canonical::{fmt_f64, KvWriter};
use crate::spectral::{profile_values, ProfileKind, ProfileParams, HC_EV_NM};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_levels: usize,
    pub p_min_uw: f64,
    pub p_max_uw: f64,
    pub b_below: f64,
    pub b_above: f64,
    pub boundary_uw: f64,
    /// Prefactor of the low-power law; the high-power prefactor keeps the
    /// law continuous at the boundary.
    pub a: f64,
    pub peak_center_ev: f64,
    pub fwhm_ev: f64,
    pub profile_kind: ProfileKind,
    pub noise_rel: f64,
    pub rng_seed: u64,
    pub n_points: usize,
    /// Half-width of the energy axis around the peak, in FWHM.
    pub span_fwhm: f64,
    pub baseline_intercept: f64,
    /// Counts per eV, relative to the peak centre.
    pub baseline_slope: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_levels: 21,
            p_min_uw: 0.1,
            p_max_uw: 1000.0,
            b_below: 1.5,
            b_above: 0.5,
            boundary_uw: 10.0,
            a: 1000.0,
            peak_center_ev: 2.0,
            fwhm_ev: 0.05,
            profile_kind: ProfileKind::Gaussian,
            noise_rel: 0.0,
            rng_seed: 42,
            n_points: 1201,
            span_fwhm: 6.0,
            baseline_intercept: 20.0,
            baseline_slope: 5.0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.n_levels < 1 {
            return Err("n_levels must be at least 1".into());
        }
        if !(self.p_min_uw > 0.0 && self.p_max_uw >= self.p_min_uw) {
            return Err("powers must be positive and ascending".into());
        }
        if self.n_levels > 1 && self.p_max_uw == self.p_min_uw {
            return Err("p_max must exceed p_min for several levels".into());
        }
        if !(self.noise_rel >= 0.0 && self.noise_rel.is_finite()) {
            return Err("noise_rel must be >= 0".into());
        }
        if !(self.a > 0.0 && self.fwhm_ev > 0.0 && self.boundary_uw > 0.0) {
            return Err("a, fwhm and boundary must be positive".into());
        }
        if self.n_points < 16 || !(self.span_fwhm > 0.0) {
            return Err("axis needs at least 16 points and a positive span".into());
        }
        let lo = self.peak_center_ev - self.span_fwhm * self.fwhm_ev;
        if !(lo > 0.0) {
            return Err("energy axis would reach zero".into());
        }
        Ok(())
    }

    /// Log-spaced powers from `p_min_uw` to `p_max_uw`.
    pub fn powers(&self) -> Vec<f64> {
        if self.n_levels == 1 {
            return vec![self.p_min_uw];
        }
        let (l0, l1) = (self.p_min_uw.log10(), self.p_max_uw.log10());
        (0..self.n_levels)
            .map(|k| {
                if k == 0 {
                    self.p_min_uw
                } else if k + 1 == self.n_levels {
                    self.p_max_uw
                } else {
                    10f64.powf(l0 + (l1 - l0) * k as f64 / (self.n_levels - 1) as f64)
                }
            })
            .collect()
    }

    pub fn a_above(&self) -> f64 {
        self.a * self.boundary_uw.powf(self.b_below - self.b_above)
    }

    /// True peak height above the baseline at power `p`.
    pub fn intensity(&self, p: f64) -> f64 {
        if p <= self.boundary_uw {
            self.a * p.powf(self.b_below)
        } else {
            self.a_above() * p.powf(self.b_above)
        }
    }

    /// Widths giving the requested FWHM. A Voigt splits it evenly between
    /// its Gaussian and Lorentzian parts (Olivero–Longbothum relation).
    pub fn widths(&self) -> (f64, f64) {
        let fwhm_to_sigma = 1.0 / (2.0 * (2.0 * 2f64.ln()).sqrt());
        match self.profile_kind {
            ProfileKind::Gaussian => (self.fwhm_ev * fwhm_to_sigma, 0.0),
            ProfileKind::Lorentzian => (0.0, 0.5 * self.fwhm_ev),
            ProfileKind::Voigt => {
                let part = self.fwhm_ev / (0.5346 + (0.2166f64 + 1.0).sqrt());
                (part * fwhm_to_sigma, 0.5 * part)
            }
        }
    }

    /// Energies ascending, evenly spaced.
    pub fn energy_axis(&self) -> Vec<f64> {
        let half = self.span_fwhm * self.fwhm_ev;
        let lo = self.peak_center_ev - half;
        let step = 2.0 * half / (self.n_points - 1) as f64;
        (0..self.n_points).map(|i| lo + step * i as f64).collect()
    }
}

/// Uniform in (0, 1] from the top 53 bits.
fn unit(rng: &mut SplitMix64) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal by Box–Muller, consuming exactly two draws.
fn normal(rng: &mut SplitMix64) -> f64 {
    let u1 = unit(rng);
    let u2 = unit(rng);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCampaign {
    pub csv: Vec<u8>,
    pub truth: String,
}

/// Builds the campaign CSV (rows in ascending wavelength) and its truth
/// sidecar. The seeded generator is the only randomness in the crate.
pub fn generate_campaign(spec: &SyntheticSpec) -> Result<SyntheticCampaign, String> {
    spec.validate()?;
    let energy = spec.energy_axis();
    let powers = spec.powers();
    let (sigma_g, gamma_l) = spec.widths();
    let mut rng = SplitMix64::seed_from_u64(spec.rng_seed);

    let columns: Vec<Vec<f64>> = powers
        .iter()
        .map(|&p| {
            let params = ProfileParams {
                amplitude: spec.intensity(p),
                center: spec.peak_center_ev,
                sigma_g,
                gamma_l,
                offset: 0.0,
            };
            let peak = profile_values(spec.profile_kind, &params, &energy);
            peak.iter()
                .zip(&energy)
                .map(|(y, e)| {
                    let clean = y
                        + spec.baseline_intercept
                        + spec.baseline_slope * (e - spec.peak_center_ev);
                    if spec.noise_rel > 0.0 {
                        clean * (1.0 + spec.noise_rel * normal(&mut rng))
                    } else {
                        clean
                    }
                })
                .collect()
        })
        .collect();

    let mut csv = String::from("wavelength_nm");
    for p in &powers {
        // Display never uses exponent notation, which the header parser rejects
        csv.push_str(&format!(",P={p}uW"));
    }
    csv.push('\n');
    // highest energy first = ascending wavelength
    for i in (0..energy.len()).rev() {
        csv.push_str(&fmt_f64(HC_EV_NM / energy[i]));
        for col in &columns {
            csv.push(',');
            csv.push_str(&fmt_f64(col[i]));
        }
        csv.push('\n');
    }

    let mut t = KvWriter::new();
    t.str("format", "synthtruth/1");
    t.int("n_levels", spec.n_levels as u64);
    t.f64("b_below", spec.b_below);
    t.f64("b_above", spec.b_above);
    t.f64("boundary_uw", spec.boundary_uw);
    t.f64("a_below", spec.a);
    t.f64("a_above", spec.a_above());
    t.str("profile", spec.profile_kind.as_str());
    t.f64("peak_center_ev", spec.peak_center_ev);
    t.f64("fwhm_ev", spec.fwhm_ev);
    t.f64("sigma_g_ev", sigma_g);
    t.f64("gamma_l_ev", gamma_l);
    t.f64("noise_rel", spec.noise_rel);
    t.int("rng_seed", spec.rng_seed);
    t.f64("baseline_intercept", spec.baseline_intercept);
    t.f64("baseline_slope_per_ev", spec.baseline_slope);
    t.int("n_points", spec.n_points as u64);
    for (k, p) in powers.iter().enumerate() {
        t.f64(&format!("level.{k}.power_uw"), *p);
        t.f64(&format!("level.{k}.peak_height"), spec.intensity(*p));
    }
    Ok(SyntheticCampaign {
        csv: csv.into_bytes(),
        truth: t.into_string(),
    })
}
