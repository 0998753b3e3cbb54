use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use super::{GrayImage, SemError};

/// Peak-to-median power ratio below which no periodicity is reported.
pub const MIN_PEAK_SNR: f64 = 3.0;
/// Bins closer than this (in bin units) to DC are ignored.
const MIN_RADIUS_BINS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodicityReport {
    pub period_nm: f64,
    pub period_px: f64,
    /// Direction of the wave vector, in [0, 180).
    pub orientation_deg: f64,
    pub peak_snr: f64,
    /// Integer bin of the dominant peak (signed frequency indices).
    pub peak_bin: (i64, i64),
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect()
}

fn signed(k: usize, n: usize) -> i64 {
    if k > n / 2 {
        k as i64 - n as i64
    } else {
        k as i64
    }
}

/// Power spectrum of the mean-removed, Hann-windowed image, row-major.
fn power_spectrum(image: &GrayImage) -> Vec<f64> {
    let (w, h) = (image.width(), image.height());
    let n = (w * h) as f64;
    let mut sum = 0u64;
    for &p in image.pixels() {
        sum += p as u64;
    }
    let mean = sum as f64 / n;
    let (wx, wy) = (hann(w), hann(h));
    let mut data: Vec<Complex64> = image
        .pixels()
        .iter()
        .enumerate()
        .map(|(i, &p)| Complex64::new((p as f64 - mean) * wx[i % w] * wy[i / w], 0.0))
        .collect();

    let mut planner = FftPlanner::<f64>::new();
    let row_fft = planner.plan_fft_forward(w);
    for row in data.chunks_exact_mut(w) {
        row_fft.process(row);
    }
    let col_fft = planner.plan_fft_forward(h);
    let mut column = vec![Complex64::new(0.0, 0.0); h];
    for x in 0..w {
        for y in 0..h {
            column[y] = data[y * w + x];
        }
        col_fft.process(&mut column);
        for y in 0..h {
            data[y * w + x] = column[y];
        }
    }
    data.iter().map(|c| c.norm_sqr()).collect()
}

/// Vertex offset of a parabola through three log-powers, in (-0.5, 0.5).
fn parabolic_offset(left: f64, centre: f64, right: f64) -> f64 {
    let (l, c, r) = (left.ln(), centre.ln(), right.ln());
    let denom = l - 2.0 * c + r;
    if !(denom < 0.0) || !denom.is_finite() {
        return 0.0;
    }
    (0.5 * (l - r) / denom).clamp(-0.5, 0.5)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Dominant spatial period of a (cropped) image.
///
/// A real image has a point-symmetric spectrum, so the search covers the
/// half plane `fy < 0` plus the negative `fx` half-axis; within it the
/// tie-break is smallest `fy`, then smallest `fx`.
pub fn periodicity_fft(image: &GrayImage, nm_per_px: f64) -> Result<PeriodicityReport, SemError> {
    let (w, h) = (image.width(), image.height());
    if w < super::MIN_SIDE || h < super::MIN_SIDE {
        return Err(SemError::ImageTooSmall {
            width: w,
            height: h,
            min: super::MIN_SIDE,
        });
    }
    let power = power_spectrum(image);

    let mut best: Option<(f64, i64, i64, usize, usize)> = None;
    let mut others = Vec::with_capacity(w * h);
    // scan in ascending signed fy, then fx, so strict `>` keeps the tie-break
    let order = |n: usize| -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by_key(|&k| signed(k, n));
        idx
    };
    let (ys, xs) = (order(h), order(w));
    for &ky in &ys {
        let fy = signed(ky, h);
        for &kx in &xs {
            let fx = signed(kx, w);
            if fx == 0 && fy == 0 {
                continue;
            }
            let p = power[ky * w + kx];
            others.push(p);
            if ((fx * fx + fy * fy) as f64).sqrt() < MIN_RADIUS_BINS {
                continue;
            }
            if !(fy < 0 || (fy == 0 && fx < 0)) {
                continue;
            }
            if best.map_or(true, |b| p > b.0) {
                best = Some((p, fy, fx, ky, kx));
            }
        }
    }
    let med = median(others);
    let Some((peak, fy, fx, ky, kx)) = best else {
        return Err(SemError::NoDominantPeak { snr: 0.0 });
    };
    let peak_snr = if peak > 0.0 && med > 0.0 {
        peak / med
    } else if peak > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    if !(peak_snr >= MIN_PEAK_SNR) {
        return Err(SemError::NoDominantPeak { snr: peak_snr });
    }

    let at = |y: usize, x: usize| power[y * w + x];
    let dx = parabolic_offset(at(ky, (kx + w - 1) % w), peak, at(ky, (kx + 1) % w));
    let dy = parabolic_offset(at((ky + h - 1) % h, kx), peak, at((ky + 1) % h, kx));
    let fxc = (fx as f64 + dx) / w as f64;
    let fyc = (fy as f64 + dy) / h as f64;
    let f_mag = fxc.hypot(fyc);
    let period_px = 1.0 / f_mag;
    let mut orientation_deg = fyc.atan2(fxc).to_degrees();
    while orientation_deg < 0.0 {
        orientation_deg += 180.0;
    }
    while orientation_deg >= 180.0 {
        orientation_deg -= 180.0;
    }
    Ok(PeriodicityReport {
        period_nm: period_px * nm_per_px,
        period_px,
        orientation_deg,
        peak_snr,
        peak_bin: (fx, fy),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repro::images::{grating, uniform_noise};

    #[test]
    fn vertical_grating_period_16() {
        let img = grating(256, 256, 16.0, 0.0);
        let r = periodicity_fft(&img, 2.0).unwrap();
        assert!((r.period_px - 16.0).abs() < 0.1, "{r:?}");
        assert!(r.orientation_deg.abs() < 1e-9 || (r.orientation_deg - 180.0).abs() < 1e-9);
        assert_eq!(r.period_nm / r.period_px, 2.0);
    }

    #[test]
    fn rotated_grating() {
        let img = grating(256, 256, 16.0, 45.0);
        let r = periodicity_fft(&img, 1.0).unwrap();
        assert!((r.orientation_deg - 45.0).abs() < 1.0, "{r:?}");
        assert!(
            (r.period_px - 16.0).abs() < 0.1 + 0.5 * 16.0 * 16.0 / 256.0,
            "{r:?}"
        );
    }

    #[test]
    fn grating_family() {
        for p in [8.0, 12.0, 16.0, 24.0, 32.0] {
            let r = periodicity_fft(&grating(256, 256, p, 0.0), 1.0).unwrap();
            let half_bin = 0.5 * p * p / 256.0;
            assert!((r.period_px - p).abs() <= 0.1 + half_bin, "{p}: {r:?}");
        }
    }

    #[test]
    fn horizontal_grating_is_90_degrees() {
        let r = periodicity_fft(&grating(128, 128, 16.0, 90.0), 1.0).unwrap();
        assert!((r.orientation_deg - 90.0).abs() < 0.01, "{r:?}");
    }

    #[test]
    fn constant_image_has_no_peak() {
        let img = GrayImage::from_fn(64, 64, |_, _| 128).unwrap();
        let e = periodicity_fft(&img, 1.0).unwrap_err();
        assert_eq!(e.code(), "NO_DOMINANT_PEAK");
    }

    #[test]
    fn noise_is_far_below_a_grating() {
        let noise = uniform_noise(256, 256, 7);
        let g = periodicity_fft(&grating(256, 256, 16.0, 0.0), 1.0).unwrap();
        let snr = match periodicity_fft(&noise, 1.0) {
            Ok(r) => r.peak_snr,
            Err(SemError::NoDominantPeak { snr }) => snr,
            Err(e) => panic!("{e}"),
        };
        assert!(
            snr < 1e-3 * g.peak_snr,
            "noise {snr} vs grating {}",
            g.peak_snr
        );
    }

    #[test]
    fn deterministic() {
        let img = grating(200, 180, 12.0, 30.0);
        let a = periodicity_fft(&img, 1.5).unwrap();
        let b = periodicity_fft(&img, 1.5).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}
