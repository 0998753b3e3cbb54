use std::path::PathBuf;

use serde_json::{json, Value};

use crate::pl::{load_campaign_csv, run_campaign, serialize_report, CampaignConfig};
use crate::schema::{Args, TypedSchema};
use crate::sem::{run_sem_tool, serialize_sem_report, CalibrationTable};
use crate::spectral::ProfileKind;

use super::{ToolError, ToolRegistry};

pub const PL_SCHEMA_TOML: &str = include_str!("../../schemas/pl.run_campaign.toml");
pub const SEM_SCHEMA_TOML: &str = include_str!("../../schemas/sem_fft.toml");

/// Where the built-in tools find their inputs.
#[derive(Debug, Clone)]
pub struct ServerContext {
    pub data_dir: PathBuf,
    pub calibration: CalibrationTable,
}

fn pl_config(args: &Args) -> Result<CampaignConfig, ToolError> {
    let mut cfg = CampaignConfig::default();
    if let Some(p) = args.get_str("profile") {
        cfg.fit.profile_kind = ProfileKind::parse(p)
            .ok_or_else(|| ToolError::new("INVALID_CONFIG", format!("unknown profile {p}")))?;
    }
    if let Some(r2) = args.get_f64("r2_threshold") {
        cfg.fit.r2_threshold = r2;
    }
    if let Some(b) = args.get_f64("boundary_uW") {
        if !(b > 0.0 && b.is_finite()) {
            return Err(ToolError::new(
                "INVALID_CONFIG",
                "boundary_uW must be positive",
            ));
        }
        cfg.boundary_uw = b;
    }
    cfg.fit
        .validate()
        .map_err(|e| ToolError::new(e.code(), e.to_string()))?;
    Ok(cfg)
}

fn run_pl(ctx: &ServerContext, args: &Args) -> Result<Value, ToolError> {
    let file_id = args.get_str("file_id").expect("gate guarantees file_id");
    let cfg = pl_config(args)?;
    let path = ctx.data_dir.join(format!("{file_id}.csv"));
    let bytes = std::fs::read(&path)
        .map_err(|e| ToolError::new("FILE_NOT_FOUND", format!("{}: {e}", path.display())))?;
    let series = load_campaign_csv(&bytes).map_err(|e| ToolError::new(e.code(), e.to_string()))?;
    let report =
        run_campaign(&series, &cfg).map_err(|e| ToolError::new(e.code(), e.to_string()))?;
    let (text, hash) = serialize_report(&report);
    let fit = report.intensity_fit.map(|f| {
        json!({
            "split_applied": f.split_applied,
            "b_below": f.below.b,
            "sigma_b_below": f.below.sigma_b,
            "b_above": f.above.b,
            "sigma_b_above": f.above.sigma_b,
        })
    });
    Ok(json!({
        "campaign_id": report.campaign_id,
        "levels_accepted": report.levels.len(),
        "levels_rejected": report.rejected.len(),
        "intensity_fit": fit,
        "canonical_hash": hash,
        "report_text": text,
    }))
}

fn run_sem(ctx: &ServerContext, args: &Args) -> Result<Value, ToolError> {
    let file_id = args.get_str("file_id").expect("gate guarantees file_id");
    let mag_label = args
        .get_str("mag_label")
        .expect("gate guarantees mag_label");
    let particles = args.get_bool("particle_analysis").unwrap_or(false);
    let report = run_sem_tool(
        file_id,
        mag_label,
        particles,
        &ctx.data_dir,
        &ctx.calibration,
    )
    .map_err(|e| ToolError::new(e.code(), e.to_string()))?;
    let (text, hash) = serialize_sem_report(&report);
    Ok(json!({
        "file_id": report.file_id,
        "periodicity_found": report.periodicity.is_ok(),
        "particles_run": report.particles.is_some(),
        "canonical_hash": hash,
        "report_text": text,
    }))
}

pub fn pl_schema() -> TypedSchema {
    TypedSchema::from_toml(PL_SCHEMA_TOML).expect("bundled PL schema is valid")
}

pub fn sem_schema() -> TypedSchema {
    TypedSchema::from_toml(SEM_SCHEMA_TOML).expect("bundled SEM schema is valid")
}

impl ToolRegistry {
    /// `pl.run_campaign` and `sem_fft` bound to `ctx`.
    pub fn builtin(ctx: ServerContext) -> Self {
        let mut r = Self::new();
        let pl_ctx = ctx.clone();
        r.register(pl_schema(), Box::new(move |a| run_pl(&pl_ctx, a)))
            .expect("unique tool name");
        r.register(sem_schema(), Box::new(move |a| run_sem(&ctx, a)))
            .expect("unique tool name");
        r
    }
}
