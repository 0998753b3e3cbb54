use serde::Serialize;

use super::GrayImage;

pub const HISTOGRAM_BINS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleOptions {
    pub min_area_px: usize,
    /// Foreground is above the threshold when true, at or below it otherwise.
    pub bright_particles: bool,
}

impl Default for ParticleOptions {
    fn default() -> Self {
        Self {
            min_area_px: 5,
            bright_particles: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParticleReport {
    pub count: usize,
    pub threshold: u8,
    /// Equivalent-circle diameters in label order.
    pub diameters_nm: Vec<f64>,
    pub mean_d_nm: Option<f64>,
    pub median_d_nm: Option<f64>,
    /// Population standard deviation.
    pub std_d_nm: Option<f64>,
    /// Counts over `[0, 2·max_d]` in equal bins; all zero when `count == 0`.
    pub histogram: [usize; HISTOGRAM_BINS],
    pub histogram_max_nm: f64,
}

/// Otsu's threshold on the 256-bin histogram; the lowest maximiser wins.
/// Pixels `<= t` form the lower class.
pub fn otsu_threshold(image: &GrayImage) -> u8 {
    let mut hist = [0u64; 256];
    for &p in image.pixels() {
        hist[p as usize] += 1;
    }
    let total: u64 = hist.iter().sum();
    let sum_all: u64 = hist.iter().enumerate().map(|(v, &c)| v as u64 * c).sum();
    let mut n0 = 0u64;
    let mut s0 = 0u64;
    let mut best = (0u8, -1.0f64);
    for t in 0..255usize {
        n0 += hist[t];
        s0 += t as u64 * hist[t];
        let n1 = total - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        // between-class variance up to a constant factor, exact in i128
        let d = total as i128 * s0 as i128 - n0 as i128 * sum_all as i128;
        let score = (d as f64) * (d as f64) / (n0 as f64 * n1 as f64);
        if score > best.1 {
            best = (t as u8, score);
        }
    }
    best.0
}

/// Connected foreground regions, 4-connectivity, labelled in row-major
/// discovery order. Returns each component's pixel count.
fn component_areas(mask: &[bool], w: usize, h: usize) -> Vec<usize> {
    let mut seen = vec![false; mask.len()];
    let mut areas = Vec::new();
    let mut stack = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut area = 0;
        while let Some(i) = stack.pop() {
            area += 1;
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if mask[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        areas.push(area);
    }
    areas
}

/// Otsu threshold, 4-connected labelling, size filter and equivalent-circle
/// diameters. No particles is a valid report with `count == 0`.
pub fn particle_sizing(
    image: &GrayImage,
    nm_per_px: f64,
    options: ParticleOptions,
) -> ParticleReport {
    let threshold = otsu_threshold(image);
    let mask: Vec<bool> = image
        .pixels()
        .iter()
        .map(|&p| (p > threshold) == options.bright_particles)
        .collect();
    let diameters_nm: Vec<f64> = component_areas(&mask, image.width(), image.height())
        .into_iter()
        .filter(|&a| a >= options.min_area_px)
        .map(|a| 2.0 * (a as f64 / std::f64::consts::PI).sqrt() * nm_per_px)
        .collect();
    let count = diameters_nm.len();
    let mut histogram = [0usize; HISTOGRAM_BINS];
    if count == 0 {
        return ParticleReport {
            count,
            threshold,
            diameters_nm,
            mean_d_nm: None,
            median_d_nm: None,
            std_d_nm: None,
            histogram,
            histogram_max_nm: 0.0,
        };
    }
    let n = count as f64;
    let mean = diameters_nm.iter().sum::<f64>() / n;
    let var = diameters_nm
        .iter()
        .map(|d| (d - mean) * (d - mean))
        .sum::<f64>()
        / n;
    let mut sorted = diameters_nm.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if count % 2 == 1 {
        sorted[count / 2]
    } else {
        0.5 * (sorted[count / 2 - 1] + sorted[count / 2])
    };
    let max_d = sorted[count - 1];
    let hist_max = 2.0 * max_d;
    for d in &diameters_nm {
        let bin = ((d / hist_max) * HISTOGRAM_BINS as f64) as usize;
        histogram[bin.min(HISTOGRAM_BINS - 1)] += 1;
    }
    ParticleReport {
        count,
        threshold,
        diameters_nm,
        mean_d_nm: Some(mean),
        median_d_nm: Some(median),
        std_d_nm: Some(var.sqrt()),
        histogram,
        histogram_max_nm: hist_max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repro::images::squares;
    use proptest::prelude::*;

    fn closed_form(area: f64) -> f64 {
        2.0 * (area / std::f64::consts::PI).sqrt()
    }

    #[test]
    fn one_square() {
        let img = squares(64, 64, &[(10, 10, 10)], 0, 255);
        let r = particle_sizing(&img, 1.0, ParticleOptions::default());
        assert_eq!(r.count, 1);
        assert!((r.mean_d_nm.unwrap() - 11.283791670955125).abs() < 1e-9);
        assert!((r.mean_d_nm.unwrap() - closed_form(100.0)).abs() < 1e-12);
        assert_eq!(r.std_d_nm, Some(0.0));
        assert_eq!(r.histogram.iter().sum::<usize>(), 1);
        assert_eq!(r.histogram[8], 1);
    }

    #[test]
    fn two_squares() {
        let img = squares(64, 64, &[(5, 5, 10), (30, 30, 6)], 0, 255);
        let r = particle_sizing(&img, 2.0, ParticleOptions::default());
        assert_eq!(r.count, 2);
        assert!((r.diameters_nm[0] - 2.0 * closed_form(100.0)).abs() < 1e-9);
        assert!((r.diameters_nm[1] - 2.0 * closed_form(36.0)).abs() < 1e-9);
        assert_eq!(r.histogram.iter().sum::<usize>(), 2);
    }

    #[test]
    fn diagonal_touch_is_two_components() {
        // squares meeting only at a corner stay separate under 4-connectivity
        let img = squares(32, 32, &[(2, 2, 4), (6, 6, 4)], 0, 255);
        let r = particle_sizing(&img, 1.0, ParticleOptions::default());
        assert_eq!(r.count, 2);
    }

    #[test]
    fn min_area_filter_and_empty() {
        let img = squares(32, 32, &[(2, 2, 2), (10, 10, 5)], 0, 255);
        let r = particle_sizing(&img, 1.0, ParticleOptions::default());
        assert_eq!(r.count, 1);
        let black = GrayImage::from_fn(32, 32, |_, _| 0).unwrap();
        let r = particle_sizing(&black, 1.0, ParticleOptions::default());
        assert_eq!(r.count, 0);
        assert_eq!(r.mean_d_nm, None);
        assert_eq!(r.histogram, [0; HISTOGRAM_BINS]);
    }

    #[test]
    fn dark_particles() {
        let img = squares(32, 32, &[(4, 4, 6)], 255, 0);
        let opts = ParticleOptions {
            bright_particles: false,
            ..Default::default()
        };
        assert_eq!(particle_sizing(&img, 1.0, opts).count, 1);
    }

    #[test]
    fn otsu_ties_pick_lowest() {
        let img = squares(32, 32, &[(4, 4, 6)], 10, 200);
        assert_eq!(otsu_threshold(&img), 10);
    }

    proptest! {
        #[test]
        fn brightness_offset_keeps_count(offset in 0u8..50) {
            let img = squares(48, 48, &[(3, 3, 5), (20, 8, 7), (10, 30, 9)], 40, 180);
            let shifted = GrayImage::from_fn(48, 48, |x, y| img.get(x, y) + offset).unwrap();
            let a = particle_sizing(&img, 1.0, ParticleOptions::default());
            let b = particle_sizing(&shifted, 1.0, ParticleOptions::default());
            prop_assert_eq!(a.count, b.count);
            prop_assert_eq!(a.diameters_nm, b.diameters_nm);
        }
    }
}
