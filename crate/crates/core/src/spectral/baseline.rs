use super::{EnergyWindow, SpectralError, Spectrum};

/// `y = intercept + slope * e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
}

impl Line {
    pub fn at(&self, e: f64) -> f64 {
        self.intercept + self.slope * e
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Straight line through the centroids of the first and last `edge_points`
/// samples inside `window`.
pub fn edge_baseline(
    spectrum: &Spectrum,
    window: &EnergyWindow,
    edge_points: usize,
) -> Result<Line, SpectralError> {
    let range = spectrum.window_range(window);
    let need = 2 * edge_points.max(1);
    if range.len() < need {
        return Err(SpectralError::WindowTooNarrow {
            have: range.len(),
            need,
        });
    }
    let e = &spectrum.energy()[range.clone()];
    let y = &spectrum.counts()[range];
    let n = e.len();
    let (x1, y1) = (mean(&e[..edge_points]), mean(&y[..edge_points]));
    let (x2, y2) = (mean(&e[n - edge_points..]), mean(&y[n - edge_points..]));
    let slope = (y2 - y1) / (x2 - x1);
    Ok(Line {
        slope,
        intercept: y1 - slope * x1,
    })
}

/// Removes the edge baseline from the samples inside `window`; samples
/// outside the window are returned unchanged.
pub fn subtract_baseline(
    spectrum: &Spectrum,
    window: &EnergyWindow,
    edge_points: usize,
) -> Result<Spectrum, SpectralError> {
    let line = edge_baseline(spectrum, window, edge_points)?;
    let range = spectrum.window_range(window);
    let mut counts = spectrum.counts().to_vec();
    for i in range {
        counts[i] -= line.at(spectrum.energy()[i]);
    }
    Ok(spectrum.with_counts(counts))
}
