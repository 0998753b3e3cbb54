//! SEM image analysis: calibration lookup, info-bar cropping, FFT
//! periodicity and threshold-based particle sizing.

mod calibration;
mod image;
mod particles;
mod periodicity;
mod tool;

use thiserror::Error;

pub use calibration::{parse_mag_label, pixel_scale, CalibrationEntry, CalibrationTable};
pub use image::{crop_info_bar, GrayImage, MIN_SIDE};
pub use particles::{
    otsu_threshold, particle_sizing, ParticleOptions, ParticleReport, HISTOGRAM_BINS,
};
pub use periodicity::{periodicity_fft, PeriodicityReport, MIN_PEAK_SNR};
pub use tool::{run_sem_tool, serialize_sem_report, SemToolReport, SEM_REPORT_EXTENSION};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemError {
    #[error("BAD_MAG_LABEL: {0:?} is not `x` followed by digits")]
    BadMagLabel(String),
    #[error("UNKNOWN_MAGNIFICATION: no calibration entry for {0}")]
    UnknownMagnification(String),
    #[error("CALIBRATION_PARSE_ERROR: line {line}: {message}")]
    CalibrationParse { line: usize, message: String },
    #[error("BAD_IMAGE: {0}")]
    BadImage(String),
    #[error("IMAGE_TOO_SMALL: {width}x{height}, need at least {min}x{min}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },
    #[error("CROP_TOO_LARGE: cannot remove {crop} rows from a {height}-row image")]
    CropTooLarge { crop: usize, height: usize },
    #[error("NO_DOMINANT_PEAK: peak SNR {snr:?} below {min:?}", min = MIN_PEAK_SNR)]
    NoDominantPeak { snr: f64 },
    #[error("FILE_NOT_FOUND: {0}")]
    FileNotFound(String),
}

impl SemError {
    pub fn code(&self) -> &'static str {
        match self {
            SemError::BadMagLabel(_) => "BAD_MAG_LABEL",
            SemError::UnknownMagnification(_) => "UNKNOWN_MAGNIFICATION",
            SemError::CalibrationParse { .. } => "CALIBRATION_PARSE_ERROR",
            SemError::BadImage(_) => "BAD_IMAGE",
            SemError::ImageTooSmall { .. } => "IMAGE_TOO_SMALL",
            SemError::CropTooLarge { .. } => "CROP_TOO_LARGE",
            SemError::NoDominantPeak { .. } => "NO_DOMINANT_PEAK",
            SemError::FileNotFound(_) => "FILE_NOT_FOUND",
        }
    }
}
