use crate::spectral::{argmax, despike, half_max_crossings, EnergyWindow, FitConfig, Spectrum};

use super::{PlError, PowerSeries, WindowPolicy};

/// Fit window chosen for one power level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowPlan {
    pub power_uw: f64,
    pub center_ev: f64,
    pub fwhm_est_ev: f64,
    pub half_width_ev: f64,
    pub window: EnergyWindow,
}

/// Half-width multiplier for the level at ascending-power `rank` out of `n`:
/// 2 at the lowest power, 4 at the highest, 3 for a single level.
pub fn window_scale(rank: usize, n: usize) -> f64 {
    if n <= 1 {
        3.0
    } else {
        2.0 + 2.0 * rank as f64 / (n - 1) as f64
    }
}

/// Coarse peak centre and half-maximum width of a whole spectrum.
fn coarse_peak(counts: &[f64], energy: &[f64]) -> Option<(f64, f64)> {
    let peak = argmax(counts)?;
    let max = counts[peak];
    let min = counts.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max > min) {
        return None;
    }
    let (lo, hi) = half_max_crossings(
        energy,
        counts,
        0..counts.len(),
        peak,
        min + 0.5 * (max - min),
    );
    Some((energy[peak], hi - lo))
}

fn plan_one(
    spectrum: &Spectrum,
    power_uw: f64,
    scale: f64,
    config: &FitConfig,
    despike_enabled: bool,
) -> Result<WindowPlan, PlError> {
    let counts = if despike_enabled {
        despike(spectrum.counts(), config.despike_window, config.despike_k)
    } else {
        spectrum.counts().to_vec()
    };
    let (center_ev, fwhm_est_ev) =
        coarse_peak(&counts, spectrum.energy()).ok_or(PlError::NoPeak(power_uw))?;
    let half_width_ev = scale * fwhm_est_ev;
    let window = EnergyWindow {
        lo: center_ev - half_width_ev,
        hi: center_ev + half_width_ev,
    }
    .clamp_to(&spectrum.extent());
    Ok(WindowPlan {
        power_uw,
        center_ev,
        fwhm_est_ev,
        half_width_ev,
        window,
    })
}

/// Per-level windows under `policy`. A flat level yields `NO_PEAK` and is
/// rejected by the campaign rather than aborting it.
pub fn plan_windows(
    series: &PowerSeries,
    config: &FitConfig,
    policy: WindowPolicy,
    despike_enabled: bool,
) -> Vec<Result<WindowPlan, PlError>> {
    let n = series.levels().len();
    series
        .levels()
        .iter()
        .enumerate()
        .map(|(rank, level)| {
            let scale = match policy {
                WindowPolicy::Adaptive => window_scale(rank, n),
                WindowPolicy::Fixed { fwhm_multiple } => fwhm_multiple,
            };
            plan_one(
                &level.spectrum,
                level.power_uw,
                scale,
                config,
                despike_enabled,
            )
        })
        .collect()
}

/// Adaptive windows: wider at high power, narrower at low power.
pub fn adaptive_windows(
    series: &PowerSeries,
    config: &FitConfig,
) -> Vec<Result<WindowPlan, PlError>> {
    plan_windows(series, config, WindowPolicy::Adaptive, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pl::PowerLevel;

    #[test]
    fn scale_rule() {
        assert_eq!(window_scale(0, 1), 3.0);
        assert_eq!(window_scale(0, 5), 2.0);
        assert_eq!(window_scale(4, 5), 4.0);
        let scales: Vec<f64> = (0..5).map(|r| window_scale(r, 5)).collect();
        assert_eq!(scales, vec![2.0, 2.5, 3.0, 3.5, 4.0]);
    }

    fn gaussian_level(power: f64, fwhm: f64) -> PowerLevel {
        let sigma = fwhm / (2.0 * (2.0f64.ln() * 2.0).sqrt());
        let e: Vec<f64> = (0..1201).map(|i| 1.7 + 0.0005 * i as f64).collect();
        let y = e
            .iter()
            .map(|x| power * 100.0 * (-(x - 2.0).powi(2) / (2.0 * sigma * sigma)).exp())
            .collect();
        PowerLevel {
            power_uw: power,
            spectrum: Spectrum::new(e, y).unwrap(),
        }
    }

    #[test]
    fn five_levels_fixed_fwhm() {
        let levels = [0.1, 1.0, 10.0, 100.0, 1000.0]
            .iter()
            .map(|&p| gaussian_level(p, 0.05))
            .collect();
        let series = PowerSeries::new("t", levels).unwrap();
        let plans = adaptive_windows(&series, &FitConfig::default());
        let expected = [0.10, 0.125, 0.15, 0.175, 0.20];
        for (rank, (plan, want)) in plans.iter().zip(expected).enumerate() {
            let plan = plan.as_ref().unwrap();
            // FWHM estimate carries linear-interpolation error on a 0.5 meV grid
            assert!(
                (plan.fwhm_est_ev - 0.05).abs() < 2e-4,
                "{}",
                plan.fwhm_est_ev
            );
            assert!((plan.half_width_ev - want).abs() < 1e-3, "{plan:?}");
            assert_eq!(plan.half_width_ev, window_scale(rank, 5) * plan.fwhm_est_ev);
        }
    }

    #[test]
    fn flat_level_has_no_peak() {
        let mut levels = vec![gaussian_level(1.0, 0.05)];
        let e = levels[0].spectrum.energy().to_vec();
        levels.push(PowerLevel {
            power_uw: 2.0,
            spectrum: Spectrum::new(e.clone(), vec![3.0; e.len()]).unwrap(),
        });
        let series = PowerSeries::new("t", levels).unwrap();
        let plans = adaptive_windows(&series, &FitConfig::default());
        assert!(plans[0].is_ok());
        assert_eq!(plans[1].clone().unwrap_err(), PlError::NoPeak(2.0));
    }

    #[test]
    fn window_is_clamped_to_axis() {
        let level = gaussian_level(1.0, 0.3);
        let series = PowerSeries::new("t", vec![level]).unwrap();
        let plan = adaptive_windows(&series, &FitConfig::default())[0]
            .clone()
            .unwrap();
        assert_eq!(plan.window.lo, series.energy()[0]);
        assert_eq!(plan.window.hi, *series.energy().last().unwrap());
    }
}
