use serde::Serialize;

use super::PlError;

/// Power law `I = a·P^b` fitted by least squares in log-log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AllometricFit {
    pub a: f64,
    pub b: f64,
    /// Standard error of `b`; 0 when only two points are available.
    pub sigma_b: f64,
    pub r_squared: f64,
    pub n_points: usize,
    /// Set when `sigma_b` or `r_squared` is undefined (two points, or a
    /// perfectly flat response).
    pub degenerate: bool,
}

/// Ordinary least squares on `(ln P, ln I)`.
pub fn allometric_fit(points: &[(f64, f64)]) -> Result<AllometricFit, PlError> {
    if let Some(&(p, i)) = points
        .iter()
        .find(|(p, i)| !(*p > 0.0 && *i > 0.0 && p.is_finite() && i.is_finite()))
    {
        return Err(PlError::NonpositiveValue(p, i));
    }
    let n = points.len();
    if n < 2 {
        return Err(PlError::TooFewPoints(format!(
            "{n} point(s), need at least 2"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|(p, _)| p.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, i)| i.ln()).collect();
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if !(sxx > 0.0) {
        return Err(PlError::TooFewPoints("all powers are equal".into()));
    }
    let b = sxy / sxx;
    let intercept = my - b * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + b * x);
            r * r
        })
        .sum();
    let mut degenerate = n == 2;
    let sigma_b = if n > 2 {
        (ss_res / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let r_squared = if syy > 0.0 {
        1.0 - ss_res / syy
    } else {
        degenerate = true;
        0.0
    };
    Ok(AllometricFit {
        a: intercept.exp(),
        b,
        sigma_b,
        r_squared,
        n_points: n,
        degenerate,
    })
}

/// Separate power laws below and above `boundary_uw`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitPowerFit {
    pub boundary_uw: f64,
    pub below: AllometricFit,
    pub above: AllometricFit,
    pub split_applied: bool,
}

/// Points with `P <= boundary_uw` go below. When either side has fewer than
/// three points a single law is fitted and stored in both slots.
pub fn split_allometric_fit(
    points: &[(f64, f64)],
    boundary_uw: f64,
) -> Result<SplitPowerFit, PlError> {
    if points.is_empty() {
        return Err(PlError::TooFewPoints("no points".into()));
    }
    let (below, above): (Vec<(f64, f64)>, Vec<(f64, f64)>) =
        points.iter().partition(|(p, _)| *p <= boundary_uw);
    if below.len() >= 3 && above.len() >= 3 {
        Ok(SplitPowerFit {
            boundary_uw,
            below: allometric_fit(&below)?,
            above: allometric_fit(&above)?,
            split_applied: true,
        })
    } else {
        let all = allometric_fit(points)?;
        Ok(SplitPowerFit {
            boundary_uw,
            below: all,
            above: all,
            split_applied: false,
        })
    }
}
