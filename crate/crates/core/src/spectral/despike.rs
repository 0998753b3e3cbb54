use super::median_in_place;

/// Consistency factor that turns a median absolute deviation into a
/// Gaussian standard deviation.
pub const MAD_SCALE: f64 = 1.4826;

/// Replaces isolated spikes with the local median.
///
/// Each interior point is compared with the median of the `window` samples
/// centred on it (taken from the input, never from already-replaced values);
/// it is replaced when `|y - median| > k_mad * 1.4826 * MAD`. The first and
/// last `window / 2` points are left untouched.
pub fn despike(counts: &[f64], window: usize, k_mad: f64) -> Vec<f64> {
    debug_assert!(window >= 3 && window % 2 == 1);
    debug_assert!(k_mad > 0.0);
    let half = window / 2;
    let mut out = counts.to_vec();
    if counts.len() < window {
        return out;
    }
    let mut local = vec![0.0; window];
    let mut dev = vec![0.0; window];
    for i in half..counts.len() - half {
        local.copy_from_slice(&counts[i - half..=i + half]);
        let med = median_in_place(&mut local);
        for (d, &v) in dev.iter_mut().zip(&counts[i - half..=i + half]) {
            *d = (v - med).abs();
        }
        let mad = median_in_place(&mut dev);
        if (counts[i] - med).abs() > k_mad * MAD_SCALE * mad {
            out[i] = med;
        }
    }
    out
}
