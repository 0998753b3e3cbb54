use std::ops::Range;

use super::{argmax, EnergyWindow, ProfileParams, SpectralError, Spectrum};

/// Starting point for a fit, derived only from the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialGuess {
    pub params: ProfileParams,
    /// Set when the window holds no peak (max equals min); `DEGENERATE_GUESS`.
    pub degenerate: bool,
}

/// Energies where `counts` crosses `level` on either side of `peak`,
/// linearly interpolated. Falls back to the range edge when the data never
/// drops below `level` on that side.
pub fn half_max_crossings(
    energy: &[f64],
    counts: &[f64],
    range: Range<usize>,
    peak: usize,
    level: f64,
) -> (f64, f64) {
    debug_assert!(range.contains(&peak));
    let interp = |i: usize, j: usize| {
        let (e0, e1, y0, y1) = (energy[i], energy[j], counts[i], counts[j]);
        e0 + (level - y0) * (e1 - e0) / (y1 - y0)
    };
    let mut lo = energy[range.start];
    let mut i = peak;
    while i > range.start {
        if counts[i - 1] < level {
            lo = interp(i - 1, i);
            break;
        }
        i -= 1;
    }
    let mut hi = energy[range.end - 1];
    let mut j = peak;
    while j + 1 < range.end {
        if counts[j + 1] < level {
            hi = interp(j, j + 1);
            break;
        }
        j += 1;
    }
    (lo, hi)
}

/// Width used for both the Gaussian and Lorentzian starting widths is the
/// half-maximum crossing width divided by this.
const WIDTH_DIVISOR: f64 = 3.6;

/// Deterministic starting parameters from the samples inside `window`.
pub fn initial_guess(
    spectrum: &Spectrum,
    window: &EnergyWindow,
) -> Result<InitialGuess, SpectralError> {
    let clamped = window.clamp_to(&spectrum.extent());
    let range = spectrum.window_range(&clamped);
    if range.is_empty() {
        return Err(SpectralError::EmptyWindow(window.lo, window.hi));
    }
    let e = spectrum.energy();
    let y = spectrum.counts();
    let local = &y[range.clone()];
    let peak = range.start + argmax(local).expect("non-empty");
    let max = y[peak];
    let min = local.iter().copied().fold(f64::INFINITY, f64::min);
    let amplitude = max - min;
    if amplitude <= 0.0 {
        let span = (e[range.end - 1] - e[range.start]).max(f64::EPSILON);
        let w = span / (2.0 * WIDTH_DIVISOR);
        return Ok(InitialGuess {
            params: ProfileParams {
                amplitude: 0.0,
                center: e[peak],
                sigma_g: w,
                gamma_l: w,
                offset: min,
            },
            degenerate: true,
        });
    }
    let (lo, hi) = half_max_crossings(e, y, range.clone(), peak, min + 0.5 * amplitude);
    let mut width = (hi - lo) / WIDTH_DIVISOR;
    if !(width > 0.0) {
        // single-sample peak: fall back to one sample spacing
        let spacing = if range.len() > 1 {
            (e[range.end - 1] - e[range.start]) / (range.len() - 1) as f64
        } else {
            f64::EPSILON
        };
        width = spacing / WIDTH_DIVISOR;
    }
    Ok(InitialGuess {
        params: ProfileParams {
            amplitude,
            center: e[peak],
            sigma_g: width,
            gamma_l: width,
            offset: min,
        },
        degenerate: false,
    })
}
