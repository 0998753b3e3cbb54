//! Damped least-squares (Levenberg–Marquardt) single-peak fitter.
//!
//! The damping schedule, finite-difference steps and every reduction order
//! are fixed, so a fit is a pure function of its inputs.

use super::profile::Shape;
use super::{
    r_squared, EnergyWindow, FitConfig, ProfileFitResult, ProfileKind, ProfileParams,
    SpectralError, Spectrum,
};

const LAMBDA_INIT: f64 = 1e-3;
const LAMBDA_UP: f64 = 10.0;
const LAMBDA_DOWN: f64 = 10.0;
const LAMBDA_MAX: f64 = 1e16;
const FD_REL_STEP: f64 = 1e-6;
/// A run that exhausts its iterations with cost below this fraction of `Σy²`
/// has stalled at the precision of the profile evaluation itself (about 1e-6
/// relative RMS residual), typically on a width pinned at zero, and counts as
/// converged.
const COST_FLOOR_REL: f64 = 1e-12;

/// Cost history of a fit: the starting cost followed by the cost after
/// every accepted step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitTrace {
    pub costs: Vec<f64>,
    pub rejected_steps: usize,
    pub singular: bool,
}

fn pack(kind: ProfileKind, p: &ProfileParams) -> Vec<f64> {
    match kind {
        ProfileKind::Voigt => vec![p.amplitude, p.center, p.sigma_g, p.gamma_l, p.offset],
        ProfileKind::Gaussian => vec![p.amplitude, p.center, p.sigma_g, p.offset],
        ProfileKind::Lorentzian => vec![p.amplitude, p.center, p.gamma_l, p.offset],
    }
}

fn unpack(kind: ProfileKind, v: &[f64]) -> ProfileParams {
    match kind {
        ProfileKind::Voigt => ProfileParams {
            amplitude: v[0],
            center: v[1],
            sigma_g: v[2].abs(),
            gamma_l: v[3].abs(),
            offset: v[4],
        },
        ProfileKind::Gaussian => ProfileParams {
            amplitude: v[0],
            center: v[1],
            sigma_g: v[2].abs(),
            gamma_l: 0.0,
            offset: v[3],
        },
        ProfileKind::Lorentzian => ProfileParams {
            amplitude: v[0],
            center: v[1],
            sigma_g: 0.0,
            gamma_l: v[2].abs(),
            offset: v[3],
        },
    }
}

struct Problem<'a> {
    kind: ProfileKind,
    x: &'a [f64],
    y: &'a [f64],
}

impl Problem<'_> {
    fn model_into(&self, p: &[f64], out: &mut [f64]) {
        let shape = Shape::new(self.kind, &unpack(self.kind, p));
        for (o, &x) in out.iter_mut().zip(self.x) {
            *o = shape.eval(x);
        }
    }

    fn cost(&self, p: &[f64], scratch: &mut [f64]) -> f64 {
        self.model_into(p, scratch);
        let mut sum = 0.0;
        for (m, y) in scratch.iter().zip(self.y) {
            let r = y - m;
            sum += r * r;
        }
        sum
    }

    /// Column-major model Jacobian by central differences.
    fn jacobian(&self, p: &[f64], jac: &mut [Vec<f64>], plus: &mut [f64], minus: &mut [f64]) {
        let mut q = p.to_vec();
        for j in 0..p.len() {
            let h = FD_REL_STEP * p[j].abs().max(1.0);
            q[j] = p[j] + h;
            self.model_into(&q, plus);
            q[j] = p[j] - h;
            self.model_into(&q, minus);
            q[j] = p[j];
            let inv = 1.0 / (2.0 * h);
            for i in 0..self.x.len() {
                jac[j][i] = (plus[i] - minus[i]) * inv;
            }
        }
    }
}

/// Solves `a x = b` for symmetric positive definite `a` (row-major, n×n).
fn cholesky_solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(sum > 0.0) || !sum.is_finite() {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * z[k];
        }
        z[i] = sum / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = z[i];
        for k in i + 1..n {
            sum -= l[k * n + i] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Fits one peak inside `window`, starting from `init`.
///
/// Singular normal equations end the run with `converged = false`; they are
/// not reported as an error.
pub fn fit_profile(
    spectrum: &Spectrum,
    window: &EnergyWindow,
    config: &FitConfig,
    init: &ProfileParams,
) -> Result<ProfileFitResult, SpectralError> {
    fit_profile_traced(spectrum, window, config, init).map(|(r, _)| r)
}

pub fn fit_profile_traced(
    spectrum: &Spectrum,
    window: &EnergyWindow,
    config: &FitConfig,
    init: &ProfileParams,
) -> Result<(ProfileFitResult, FitTrace), SpectralError> {
    config.validate()?;
    let range = spectrum.window_range(window);
    if range.is_empty() {
        return Err(SpectralError::EmptyWindow(window.lo, window.hi));
    }
    let kind = config.profile_kind;
    let problem = Problem {
        kind,
        x: &spectrum.energy()[range.clone()],
        y: &spectrum.counts()[range],
    };
    let n = problem.x.len();
    let mut p = pack(kind, init);
    let m = p.len();

    let mut scratch = vec![0.0; n];
    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    let mut jac = vec![vec![0.0; n]; m];
    let mut trace = FitTrace::default();

    let mut cost = problem.cost(&p, &mut scratch);
    trace.costs.push(cost);
    let mut lambda = LAMBDA_INIT;
    let mut iterations = 0;
    let mut converged = false;
    let usable = p.iter().all(|v| v.is_finite()) && cost.is_finite() && n >= m;

    let floor_cost = COST_FLOOR_REL * problem.y.iter().map(|v| v * v).sum::<f64>();
    if usable && cost == 0.0 {
        converged = true;
    }
    let mut need_jacobian = true;
    let mut normal = vec![0.0; m * m];
    let mut grad = vec![0.0; m];
    while usable && !converged && iterations < config.max_iterations {
        if need_jacobian {
            problem.jacobian(&p, &mut jac, &mut plus, &mut minus);
            problem.model_into(&p, &mut scratch);
            for a in 0..m {
                let mut g = 0.0;
                for i in 0..n {
                    g += jac[a][i] * (problem.y[i] - scratch[i]);
                }
                grad[a] = g;
                for b in 0..=a {
                    let mut s = 0.0;
                    for i in 0..n {
                        s += jac[a][i] * jac[b][i];
                    }
                    normal[a * m + b] = s;
                    normal[b * m + a] = s;
                }
            }
            need_jacobian = false;
        }
        iterations += 1;

        let max_diag = (0..m).map(|j| normal[j * m + j]).fold(0.0, f64::max);
        let floor = max_diag * 1e-12;
        let mut damped = normal.clone();
        for j in 0..m {
            damped[j * m + j] += lambda * normal[j * m + j].max(floor);
        }
        let Some(step) = cholesky_solve(&damped, &grad, m) else {
            trace.singular = true;
            break;
        };
        let small_step = norm(&step) <= config.step_tol * (norm(&p) + config.step_tol);
        let candidate: Vec<f64> = p.iter().zip(&step).map(|(a, d)| a + d).collect();
        let new_cost = problem.cost(&candidate, &mut scratch);

        if new_cost.is_finite() && new_cost < cost {
            let rel_drop = (cost - new_cost) / cost;
            p = candidate;
            cost = new_cost;
            trace.costs.push(cost);
            lambda /= LAMBDA_DOWN;
            need_jacobian = true;
            if rel_drop <= config.cost_rel_tol || small_step || cost == 0.0 {
                converged = true;
            }
        } else {
            trace.rejected_steps += 1;
            lambda *= LAMBDA_UP;
            // no descent direction left at working precision
            if small_step || lambda > LAMBDA_MAX {
                converged = true;
            }
        }
    }

    if usable && !converged && !trace.singular && iterations >= config.max_iterations {
        converged = cost <= floor_cost;
    }
    let params = unpack(kind, &p);
    let modeled = super::profile_values(kind, &params, problem.x);
    let (r2, degenerate) = match r_squared(problem.y, &modeled) {
        Ok(g) => (g.value, g.degenerate),
        Err(_) => (0.0, true),
    };
    let converged = converged && params_finite(&params);
    let accepted = converged && !degenerate && r2 >= config.r2_threshold;
    Ok((
        ProfileFitResult {
            params,
            r_squared: r2,
            window: *window,
            iterations,
            converged,
            accepted,
            profile_kind: kind,
        },
        trace,
    ))
}

fn params_finite(p: &ProfileParams) -> bool {
    [p.amplitude, p.center, p.sigma_g, p.gamma_l, p.offset]
        .iter()
        .all(|v| v.is_finite())
        && p.sigma_g + p.gamma_l > 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{initial_guess, profile_values};

    fn synthetic(kind: ProfileKind, truth: &ProfileParams) -> Spectrum {
        let e: Vec<f64> = (0..401).map(|i| 1.8 + 0.001 * i as f64).collect();
        let y = profile_values(kind, truth, &e);
        Spectrum::new(e, y).unwrap()
    }

    fn rel(a: f64, b: f64, scale: f64) -> f64 {
        (a - b).abs() / scale
    }

    #[test]
    fn recovers_noise_free_voigt() {
        let truth = ProfileParams {
            amplitude: 1000.0,
            center: 2.0137,
            sigma_g: 0.018,
            gamma_l: 0.011,
            offset: 3.0,
        };
        let s = synthetic(ProfileKind::Voigt, &truth);
        let w = s.extent();
        let init = initial_guess(&s, &w).unwrap().params;
        let cfg = FitConfig::default();
        let (r, trace) = fit_profile_traced(&s, &w, &cfg, &init).unwrap();
        assert!(r.converged && r.accepted, "{r:?} {trace:?}");
        assert!(r.r_squared >= 1.0 - 1e-9);
        let p = r.params;
        assert!(
            rel(p.amplitude, truth.amplitude, truth.amplitude) < 1e-6,
            "{p:?}"
        );
        assert!(rel(p.center, truth.center, truth.center) < 1e-6);
        assert!(rel(p.sigma_g, truth.sigma_g, truth.sigma_g) < 1e-6, "{p:?}");
        assert!(rel(p.gamma_l, truth.gamma_l, truth.gamma_l) < 1e-6, "{p:?}");
        assert!(rel(p.offset, truth.offset, truth.amplitude) < 1e-6);
    }

    #[test]
    fn cost_never_increases() {
        let truth = ProfileParams {
            amplitude: 300.0,
            center: 1.95,
            sigma_g: 0.03,
            gamma_l: 0.005,
            offset: 0.0,
        };
        let s = synthetic(ProfileKind::Voigt, &truth);
        let init = initial_guess(&s, &s.extent()).unwrap().params;
        let (_, trace) = fit_profile_traced(&s, &s.extent(), &FitConfig::default(), &init).unwrap();
        assert!(trace.costs.len() > 2);
        assert!(trace.costs.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn repeated_fits_are_bitwise_identical() {
        let truth = ProfileParams {
            amplitude: 80.0,
            center: 2.05,
            sigma_g: 0.02,
            gamma_l: 0.02,
            offset: 1.0,
        };
        let s = synthetic(ProfileKind::Voigt, &truth);
        let init = initial_guess(&s, &s.extent()).unwrap().params;
        let cfg = FitConfig::default();
        let runs: Vec<_> = (0..4)
            .map(|_| fit_profile(&s, &s.extent(), &cfg, &init).unwrap())
            .collect();
        for r in &runs[1..] {
            assert_eq!(format!("{r:?}"), format!("{:?}", runs[0]));
            assert_eq!(r.params.center.to_bits(), runs[0].params.center.to_bits());
        }
    }

    #[test]
    fn flat_spectrum_is_not_accepted() {
        let e: Vec<f64> = (0..50).map(|i| 1.9 + 0.004 * i as f64).collect();
        let s = Spectrum::new(e, vec![42.0; 50]).unwrap();
        let g = initial_guess(&s, &s.extent()).unwrap();
        assert!(g.degenerate);
        let r = fit_profile(&s, &s.extent(), &FitConfig::default(), &g.params).unwrap();
        assert!(!r.converged || !r.accepted);
        assert!(!r.accepted);
    }

    #[test]
    fn gaussian_and_lorentzian_kinds() {
        for kind in [ProfileKind::Gaussian, ProfileKind::Lorentzian] {
            let truth = ProfileParams {
                amplitude: 500.0,
                center: 2.0,
                sigma_g: if kind == ProfileKind::Gaussian {
                    0.02
                } else {
                    0.0
                },
                gamma_l: if kind == ProfileKind::Lorentzian {
                    0.015
                } else {
                    0.0
                },
                offset: 0.0,
            };
            let s = synthetic(kind, &truth);
            let init = initial_guess(&s, &s.extent()).unwrap().params;
            let cfg = FitConfig {
                profile_kind: kind,
                ..FitConfig::default()
            };
            let r = fit_profile(&s, &s.extent(), &cfg, &init).unwrap();
            assert!(r.accepted, "{kind:?}: {r:?}");
            assert!(rel(r.params.amplitude, 500.0, 500.0) < 1e-6);
        }
    }

    #[test]
    fn cholesky_small_system() {
        let a = [4.0, 2.0, 2.0, 3.0];
        let x = cholesky_solve(&a, &[2.0, 1.0], 2).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15 && x[1].abs() < 1e-15);
        assert!(cholesky_solve(&[0.0, 0.0, 0.0, 0.0], &[1.0, 1.0], 2).is_none());
    }
}
