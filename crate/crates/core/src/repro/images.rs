//! Synthetic SEM images.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::sem::GrayImage;

/// Sinusoidal grating of period `period_px` whose wave vector points at
/// `angle_deg` from the x axis (0° gives vertical stripes).
pub fn grating(width: usize, height: usize, period_px: f64, angle_deg: f64) -> GrayImage {
    let (s, c) = angle_deg.to_radians().sin_cos();
    let k = 2.0 * std::f64::consts::PI / period_px;
    GrayImage::from_fn(width, height, |x, y| {
        let phase = k * (x as f64 * c + y as f64 * s);
        (127.5 + 100.0 * phase.cos()).round() as u8
    })
    .expect("grating dimensions")
}

/// Axis-aligned filled squares `(x, y, side)` of `fg` on `bg`.
pub fn squares(
    width: usize,
    height: usize,
    boxes: &[(usize, usize, usize)],
    bg: u8,
    fg: u8,
) -> GrayImage {
    GrayImage::from_fn(width, height, |x, y| {
        let inside = boxes
            .iter()
            .any(|&(bx, by, side)| x >= bx && x < bx + side && y >= by && y < by + side);
        if inside {
            fg
        } else {
            bg
        }
    })
    .expect("square fixture dimensions")
}

/// Independent uniform 8-bit pixels from a seeded SplitMix64 stream.
pub fn uniform_noise(width: usize, height: usize, seed: u64) -> GrayImage {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let pixels = (0..width * height)
        .map(|_| (rng.next_u64() >> 56) as u8)
        .collect();
    GrayImage::new(width, height, pixels).expect("noise dimensions")
}
