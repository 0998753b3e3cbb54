use std::f64::consts::SQRT_2;

use super::faddeeva::faddeeva_re;
use super::{ProfileKind, ProfileParams};

/// A profile with its normalization precomputed, so a sweep over many
/// energies evaluates the Faddeeva function once per sample.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Shape {
    kind: ProfileKind,
    amplitude: f64,
    center: f64,
    sigma: f64,
    gamma: f64,
    offset: f64,
    /// `1 / Re w(z0)` for the Voigt case.
    voigt_norm: f64,
}

impl Shape {
    pub(crate) fn new(kind: ProfileKind, p: &ProfileParams) -> Self {
        let sigma = p.sigma_g.abs();
        let gamma = p.gamma_l.abs();
        let voigt_norm = if kind == ProfileKind::Voigt && sigma > 0.0 && gamma > 0.0 {
            1.0 / faddeeva_re(0.0, gamma / (sigma * SQRT_2))
        } else {
            1.0
        };
        Self {
            kind,
            amplitude: p.amplitude,
            center: p.center,
            sigma,
            gamma,
            offset: p.offset,
            voigt_norm,
        }
    }

    fn gaussian(&self, d: f64) -> f64 {
        if self.sigma == 0.0 {
            return if d == 0.0 { 1.0 } else { 0.0 };
        }
        (-d * d / (2.0 * self.sigma * self.sigma)).exp()
    }

    fn lorentzian(&self, d: f64) -> f64 {
        if self.gamma == 0.0 {
            return if d == 0.0 { 1.0 } else { 0.0 };
        }
        let g2 = self.gamma * self.gamma;
        g2 / (d * d + g2)
    }

    pub(crate) fn eval(&self, e: f64) -> f64 {
        let d = e - self.center;
        let unit = match self.kind {
            ProfileKind::Gaussian => self.gaussian(d),
            ProfileKind::Lorentzian => self.lorentzian(d),
            ProfileKind::Voigt => {
                if self.sigma == 0.0 {
                    self.lorentzian(d)
                } else if self.gamma == 0.0 {
                    self.gaussian(d)
                } else {
                    let scale = 1.0 / (self.sigma * SQRT_2);
                    faddeeva_re(d.abs() * scale, self.gamma * scale) * self.voigt_norm
                }
            }
        };
        self.offset + self.amplitude * unit
    }
}

/// Peak-normalized line profile: the value at `e = center` is
/// `offset + amplitude` for every kind.
///
/// The Voigt profile is `Re w(z) / Re w(z0)` with
/// `z = ((e - c) + iγ) / (σ√2)` and `z0 = iγ / (σ√2)`.
pub fn eval_profile(kind: ProfileKind, params: &ProfileParams, e: f64) -> f64 {
    Shape::new(kind, params).eval(e)
}

pub fn profile_values(kind: ProfileKind, params: &ProfileParams, energies: &[f64]) -> Vec<f64> {
    let shape = Shape::new(kind, params);
    energies.iter().map(|&e| shape.eval(e)).collect()
}
