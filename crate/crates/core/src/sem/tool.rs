use std::path::Path;

use serde::Serialize;

use crate::canonical::{fmt_f64, seal, KvWriter};

use super::{
    crop_info_bar, parse_mag_label, particle_sizing, periodicity_fft, pixel_scale,
    CalibrationTable, GrayImage, ParticleOptions, ParticleReport, PeriodicityReport, SemError,
};

pub const SEM_REPORT_EXTENSION: &str = ".semreport.txt";

/// Combined result of one SEM tool call.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemToolReport {
    pub file_id: String,
    pub mag_label: String,
    pub magnification: u64,
    pub nm_per_px: f64,
    pub info_bar_px: usize,
    pub width: usize,
    pub height: usize,
    /// `Err` carries the measured SNR when no dominant peak was found.
    pub periodicity: Result<PeriodicityReport, f64>,
    pub particles: Option<ParticleReport>,
    pub canonical_hash: String,
}

/// Resolves `<data_dir>/<file_id>.pgm`, calibrates, crops the info bar and
/// runs periodicity always and particle sizing when asked.
///
/// A missing periodicity is reported inside the result rather than failing
/// the call, so particle sizing still runs on aperiodic images.
pub fn run_sem_tool(
    file_id: &str,
    mag_label: &str,
    particle_analysis: bool,
    data_dir: &Path,
    table: &CalibrationTable,
) -> Result<SemToolReport, SemError> {
    let magnification = parse_mag_label(mag_label)?;
    let cal = pixel_scale(table, mag_label)?;
    let path = data_dir.join(format!("{file_id}.pgm"));
    let bytes = std::fs::read(&path)
        .map_err(|e| SemError::FileNotFound(format!("{}: {e}", path.display())))?;
    let image = GrayImage::from_pgm(&bytes)?;
    let cropped = crop_info_bar(&image, cal.info_bar_px)?;
    let periodicity = match periodicity_fft(&cropped, cal.nm_per_px) {
        Ok(r) => Ok(r),
        Err(SemError::NoDominantPeak { snr }) => Err(snr),
        Err(e) => return Err(e),
    };
    let particles = particle_analysis
        .then(|| particle_sizing(&cropped, cal.nm_per_px, ParticleOptions::default()));
    let mut report = SemToolReport {
        file_id: file_id.to_string(),
        mag_label: mag_label.to_string(),
        magnification,
        nm_per_px: cal.nm_per_px,
        info_bar_px: cal.info_bar_px,
        width: cropped.width(),
        height: cropped.height(),
        periodicity,
        particles,
        canonical_hash: String::new(),
    };
    report.canonical_hash = serialize_sem_report(&report).1;
    Ok(report)
}

/// Canonical text form and its SHA-256 (covering everything before the hash
/// line).
pub fn serialize_sem_report(r: &SemToolReport) -> (String, String) {
    let mut w = KvWriter::new();
    w.str("format", "semreport/1");
    w.str("file_id", &r.file_id);
    w.str("mag_label", &r.mag_label);
    w.int("magnification", r.magnification);
    w.f64("nm_per_px", r.nm_per_px);
    w.int("info_bar_px", r.info_bar_px as u64);
    w.int("image.width", r.width as u64);
    w.int("image.height", r.height as u64);
    match &r.periodicity {
        Ok(p) => {
            w.str("periodicity.status", "ok");
            w.f64("periodicity.period_nm", p.period_nm);
            w.f64("periodicity.period_px", p.period_px);
            w.f64("periodicity.orientation_deg", p.orientation_deg);
            w.f64("periodicity.peak_snr", p.peak_snr);
            w.str(
                "periodicity.peak_bin",
                &format!("{} {}", p.peak_bin.0, p.peak_bin.1),
            );
        }
        Err(snr) => {
            w.str("periodicity.status", "NO_DOMINANT_PEAK");
            w.f64("periodicity.peak_snr", *snr);
        }
    }
    match &r.particles {
        None => w.bool("particles.present", false),
        Some(p) => {
            w.bool("particles.present", true);
            w.int("particles.count", p.count as u64);
            w.int("particles.threshold", p.threshold);
            w.opt_f64("particles.mean_d_nm", p.mean_d_nm);
            w.opt_f64("particles.median_d_nm", p.median_d_nm);
            w.opt_f64("particles.std_d_nm", p.std_d_nm);
            w.f64("particles.histogram_max_nm", p.histogram_max_nm);
            let hist: Vec<String> = p.histogram.iter().map(|c| c.to_string()).collect();
            w.str("particles.histogram", &hist.join(" "));
            let ds: Vec<String> = p.diameters_nm.iter().map(|d| fmt_f64(*d)).collect();
            w.str("particles.diameters_nm", &ds.join(" "));
        }
    }
    seal(w.into_string())
}
