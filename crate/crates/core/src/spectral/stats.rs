use super::SpectralError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodnessOfFit {
    pub value: f64,
    /// Observed data has zero variance; `value` is reported as 0.
    pub degenerate: bool,
}

/// Coefficient of determination `1 - SS_res / SS_tot`.
pub fn r_squared(observed: &[f64], modeled: &[f64]) -> Result<GoodnessOfFit, SpectralError> {
    if observed.len() != modeled.len() || observed.len() < 2 {
        return Err(SpectralError::LengthMismatch(observed.len(), modeled.len()));
    }
    let n = observed.len() as f64;
    let mean = observed.iter().sum::<f64>() / n;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (&o, &m) in observed.iter().zip(modeled) {
        ss_res += (o - m) * (o - m);
        ss_tot += (o - mean) * (o - mean);
    }
    if ss_tot == 0.0 {
        return Ok(GoodnessOfFit {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(GoodnessOfFit {
        value: 1.0 - ss_res / ss_tot,
        degenerate: false,
    })
}
