//! Brute-force reference fitter used to check the damped least-squares path.
//!
//! A dense grid over centre × width × amplitude picks the starting cell, then
//! each nonlinear parameter is refined in turn by bracketed bisection with
//! amplitude and offset solved exactly at every trial point. Only the line
//! shape itself is shared with the production fitter.

use crate::spectral::{eval_profile, EnergyWindow, ProfileKind, ProfileParams, Spectrum};

pub const GRID_CENTERS: usize = 50;
pub const GRID_WIDTHS: usize = 30;
pub const GRID_AMPLITUDES: usize = 20;

const MAX_SWEEPS: usize = 400;
const GOLDEN_STEPS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleFit {
    pub params: ProfileParams,
    /// Sum of squared residuals at `params`.
    pub cost: f64,
    /// No peak to fit: too few samples or a flat window.
    pub degenerate: bool,
}

struct Problem<'a> {
    kind: ProfileKind,
    x: &'a [f64],
    y: &'a [f64],
}

/// Nonlinear coordinates per kind: centre, then widths.
fn unpack(kind: ProfileKind, q: &[f64]) -> (f64, f64, f64) {
    match kind {
        ProfileKind::Gaussian => (q[0], q[1], 0.0),
        ProfileKind::Lorentzian => (q[0], 0.0, q[1]),
        ProfileKind::Voigt => (q[0], q[1], q[2]),
    }
}

/// Grid width `w` (a full width) to the kind's own width parameters.
fn widths_from_fwhm(kind: ProfileKind, w: f64) -> Vec<f64> {
    match kind {
        ProfileKind::Gaussian => vec![w / (8.0 * 2f64.ln()).sqrt()],
        ProfileKind::Lorentzian => vec![0.5 * w],
        ProfileKind::Voigt => vec![w / 3.6, w / 3.6],
    }
}

impl Problem<'_> {
    fn shape(&self, q: &[f64], out: &mut Vec<f64>) -> bool {
        let (center, sigma_g, gamma_l) = unpack(self.kind, q);
        if !(sigma_g >= 0.0 && gamma_l >= 0.0 && sigma_g + gamma_l > 0.0) {
            return false;
        }
        let unit = ProfileParams {
            amplitude: 1.0,
            center,
            sigma_g,
            gamma_l,
            offset: 0.0,
        };
        out.clear();
        out.extend(self.x.iter().map(|&e| eval_profile(self.kind, &unit, e)));
        out.iter().all(|v| v.is_finite())
    }

    /// Least-squares amplitude and offset for a fixed shape.
    fn linear(&self, s: &[f64]) -> Option<(f64, f64, f64)> {
        let n = s.len() as f64;
        let (mut ss, mut s1, mut sy, mut y1) = (0.0, 0.0, 0.0, 0.0);
        for (&si, &yi) in s.iter().zip(self.y) {
            ss += si * si;
            s1 += si;
            sy += si * yi;
            y1 += yi;
        }
        let det = n * ss - s1 * s1;
        if !(det.abs() > 1e-300) {
            return None;
        }
        let amplitude = (n * sy - s1 * y1) / det;
        let offset = (ss * y1 - s1 * sy) / det;
        let cost = s
            .iter()
            .zip(self.y)
            .map(|(&si, &yi)| {
                let r = yi - offset - amplitude * si;
                r * r
            })
            .sum();
        Some((amplitude, offset, cost))
    }

    fn profiled_cost(&self, q: &[f64], buf: &mut Vec<f64>) -> f64 {
        if !self.shape(q, buf) {
            return f64::INFINITY;
        }
        self.linear(buf).map_or(f64::INFINITY, |(_, _, c)| c)
    }
}

/// Golden-section minimum of `f` on `[lo, hi]`.
fn golden(mut lo: f64, mut hi: f64, f: &mut dyn FnMut(f64) -> f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..GOLDEN_STEPS {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        }
        if hi - lo <= 1e-15 * (lo.abs() + hi.abs()) {
            break;
        }
    }
    if fa <= fb {
        (a, fa)
    } else {
        (b, fb)
    }
}

fn degenerate_fit(y: &[f64]) -> OracleFit {
    let offset = if y.is_empty() {
        0.0
    } else {
        y.iter().sum::<f64>() / y.len() as f64
    };
    OracleFit {
        params: ProfileParams {
            amplitude: 0.0,
            center: f64::NAN,
            sigma_g: 0.0,
            gamma_l: 0.0,
            offset,
        },
        cost: y.iter().map(|v| (v - offset) * (v - offset)).sum(),
        degenerate: true,
    }
}

/// Exhaustive grid plus bisection polish over the samples inside `window`.
pub fn oracle_fit(spectrum: &Spectrum, window: &EnergyWindow, kind: ProfileKind) -> OracleFit {
    let range = spectrum.window_range(&window.clamp_to(&spectrum.extent()));
    let x = &spectrum.energy()[range.clone()];
    let y = &spectrum.counts()[range];
    let n_params = if kind == ProfileKind::Voigt { 5 } else { 4 };
    if x.len() <= n_params {
        return degenerate_fit(y);
    }
    let y_min = y.iter().copied().fold(f64::INFINITY, f64::min);
    let y_max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(y_max > y_min) {
        return degenerate_fit(y);
    }
    let p = Problem { kind, x, y };
    let span = x[x.len() - 1] - x[0];
    let dx = span / (x.len() - 1) as f64;

    // coarse grid with offset pinned at the window minimum
    let mut buf = Vec::with_capacity(x.len());
    let (w_lo, w_hi) = (2.0 * dx, span);
    let mut best = (f64::INFINITY, vec![]);
    for ic in 0..GRID_CENTERS {
        let center = x[0] + span * ic as f64 / (GRID_CENTERS - 1) as f64;
        for iw in 0..GRID_WIDTHS {
            let w = w_lo * (w_hi / w_lo).powf(iw as f64 / (GRID_WIDTHS - 1) as f64);
            let mut q = vec![center];
            q.extend(widths_from_fwhm(kind, w));
            if !p.shape(&q, &mut buf) {
                continue;
            }
            for ia in 0..GRID_AMPLITUDES {
                let frac = 0.05 + 1.45 * ia as f64 / (GRID_AMPLITUDES - 1) as f64;
                let amplitude = frac * (y_max - y_min);
                let cost: f64 = buf
                    .iter()
                    .zip(y)
                    .map(|(&s, &yi)| {
                        let r = yi - y_min - amplitude * s;
                        r * r
                    })
                    .sum();
                if cost < best.0 {
                    best = (cost, q.clone());
                }
            }
        }
    }
    let mut q = best.1;
    if q.is_empty() {
        return degenerate_fit(y);
    }

    // coordinate bisection, brackets sized from the grid spacing
    let ratio = (w_hi / w_lo).powf(1.0 / (GRID_WIDTHS - 1) as f64);
    let mut step: Vec<f64> = q
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            if k == 0 {
                span / (GRID_CENTERS - 1) as f64
            } else {
                v * (ratio - 1.0)
            }
        })
        .collect();
    let mut cost = p.profiled_cost(&q, &mut buf);
    for _ in 0..MAX_SWEEPS {
        let start = q.clone();
        let start_cost = cost;
        for k in 0..q.len() {
            let h = step[k];
            let lo = if k == 0 {
                q[k] - h
            } else {
                (q[k] - h).max(0.0)
            };
            let hi = q[k] + h;
            let mut trial = q.clone();
            let (v, c) = golden(lo, hi, &mut |t| {
                trial[k] = t;
                p.profiled_cost(&trial, &mut buf)
            });
            if c < cost {
                let moved = (v - q[k]).abs();
                q[k] = v;
                cost = c;
                step[k] = if moved > 0.9 * h {
                    2.0 * h
                } else {
                    (4.0 * moved).max(1e-9 * h)
                };
            } else {
                step[k] *= 0.5;
            }
        }
        // line search along the sweep's net move for correlated widths
        let d: Vec<f64> = q.iter().zip(&start).map(|(a, b)| a - b).collect();
        if d.iter().any(|v| *v != 0.0) {
            let base = q.clone();
            let mut trial = q.clone();
            let (t, c) = golden(-1.0, 3.0, &mut |t| {
                for k in 0..trial.len() {
                    trial[k] = base[k] + t * d[k];
                }
                p.profiled_cost(&trial, &mut buf)
            });
            if c < cost {
                for k in 0..q.len() {
                    q[k] = base[k] + t * d[k];
                }
                cost = c;
            }
        }
        let scale: f64 = q.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let still = q
            .iter()
            .zip(&start)
            .all(|(a, b)| (a - b).abs() <= 1e-14 * scale.max(1.0));
        if still || cost == 0.0 || cost >= start_cost {
            break;
        }
    }

    let ok = p.shape(&q, &mut buf);
    let (amplitude, offset, cost) = match ok.then(|| p.linear(&buf)).flatten() {
        Some(v) => v,
        None => return degenerate_fit(y),
    };
    let (center, sigma_g, gamma_l) = unpack(kind, &q);
    OracleFit {
        params: ProfileParams {
            amplitude,
            center,
            sigma_g,
            gamma_l,
            offset,
        },
        cost,
        degenerate: false,
    }
}

/// Largest relative disagreement between two parameter sets. Offsets and
/// widths use the amplitude and total width as their scales so that
/// near-zero values do not blow up the ratio.
pub fn max_relative_difference(a: &ProfileParams, b: &ProfileParams) -> f64 {
    let rel = |x: f64, y: f64, scale: f64| (x - y).abs() / scale.max(x.abs()).max(y.abs());
    let width = a.sigma_g + a.gamma_l;
    [
        rel(a.amplitude, b.amplitude, 0.0),
        rel(a.center, b.center, 0.0),
        rel(a.sigma_g, b.sigma_g, width),
        rel(a.gamma_l, b.gamma_l, width),
        rel(a.offset, b.offset, a.amplitude.abs()),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}
