use super::SpectralError;

/// Photon energy-wavelength product, eV·nm.
pub const HC_EV_NM: f64 = 1239.841984;

/// Converts an ascending wavelength axis (nm) into an ascending energy axis
/// (eV). The output is the reverse of the input order: sample `i` of the
/// result corresponds to wavelength `n - 1 - i`, so callers reverse their
/// counts in lockstep.
pub fn convert_axis(wavelength_nm: &[f64]) -> Result<Vec<f64>, SpectralError> {
    if let Some(&bad) = wavelength_nm.iter().find(|&&w| !(w > 0.0)) {
        return Err(SpectralError::NonpositiveWavelength(bad));
    }
    if let Some(i) = wavelength_nm.windows(2).position(|w| w[0] >= w[1]) {
        return Err(SpectralError::UnsortedAxis(i + 1));
    }
    Ok(wavelength_nm.iter().rev().map(|&w| HC_EV_NM / w).collect())
}
