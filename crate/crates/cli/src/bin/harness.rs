//! Synthetic campaigns, repeat-run determinism checks and the methodology
//! contrast. Exits 0 only when every assertion of the chosen command holds.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use labgate::canonical::KvWriter;
use labgate::repro::{
    generate_campaign, run_contrast, run_repeat_requests, ContrastReport, RepeatOptions,
    RepeatReport, ServerCommand, SyntheticSpec,
};
use labgate::spectral::ProfileKind;
use serde_json::{json, Value};

/// Largest intensity spread, in percent, accepted across identical runs.
const MAX_SPREAD_PCT: f64 = 0.01;

#[derive(Parser, Debug)]
#[command(
    name = "harness",
    about = "Reproducibility harness for the labgate tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic campaign CSV and its `<name>.truth.txt` sidecar.
    Synth(SynthArgs),
    /// Replay one call against fresh server processes and compare reports.
    Repeat(RepeatArgs),
    /// Run the primary and alternate pipelines on one campaign.
    Contrast(ContrastArgs),
}

#[derive(clap::Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 21)]
    levels: usize,
    #[arg(long, default_value_t = 1.5)]
    b_below: f64,
    #[arg(long, default_value_t = 0.5)]
    b_above: f64,
    /// Saturation boundary in uW.
    #[arg(long, default_value_t = 10.0)]
    boundary: f64,
    /// Relative amplitude of multiplicative Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    p_min: f64,
    #[arg(long, default_value_t = 1000.0)]
    p_max: f64,
    /// Prefactor of the low-power law.
    #[arg(long, default_value_t = 1000.0)]
    a: f64,
    #[arg(long, default_value_t = 2.0)]
    center: f64,
    #[arg(long, default_value_t = 0.05)]
    fwhm: f64,
    /// gaussian, lorentzian or voigt.
    #[arg(long, default_value = "gaussian")]
    profile: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args, Debug)]
struct RepeatArgs {
    /// Server command line, split on whitespace.
    #[arg(long)]
    server: String,
    /// Request envelope, or a bare `{"tool", "args"}` object.
    #[arg(long)]
    call: PathBuf,
    /// Request sent on the last run instead of `--call`; a sensitivity
    /// control that should make the runs differ.
    #[arg(long)]
    perturbed_call: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Start all runs at once.
    #[arg(long)]
    parallel: bool,
    /// Per-run reports and `summary.txt` go here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
struct ContrastArgs {
    #[arg(long)]
    campaign: PathBuf,
    #[arg(long, default_value_t = 4)]
    repeats: usize,
    /// Write the summary here as well as to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn truth_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "campaign".into());
    out.with_file_name(format!("{stem}.truth.txt"))
}

fn synth(a: SynthArgs) -> Result<bool> {
    let profile_kind = ProfileKind::parse(&a.profile)
        .with_context(|| format!("unknown profile {:?}", a.profile))?;
    let spec = SyntheticSpec {
        n_levels: a.levels,
        p_min_uw: a.p_min,
        p_max_uw: a.p_max,
        b_below: a.b_below,
        b_above: a.b_above,
        boundary_uw: a.boundary,
        a: a.a,
        peak_center_ev: a.center,
        fwhm_ev: a.fwhm,
        profile_kind,
        noise_rel: a.noise,
        rng_seed: a.seed,
        ..SyntheticSpec::default()
    };
    let campaign = match generate_campaign(&spec) {
        Ok(c) => c,
        Err(e) => bail!("INVALID_SPEC: {e}"),
    };
    std::fs::write(&a.out, &campaign.csv)
        .with_context(|| format!("writing {}", a.out.display()))?;
    let truth = truth_path(&a.out);
    std::fs::write(&truth, &campaign.truth)
        .with_context(|| format!("writing {}", truth.display()))?;
    println!(
        "wrote {} ({} levels) and {}",
        a.out.display(),
        spec.n_levels,
        truth.display()
    );
    Ok(true)
}

/// One-line request envelope from either accepted call file shape.
fn request_line(path: &Path) -> Result<String> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let envelope = if v.get("method").is_some() {
        v
    } else if v.get("tool").is_some() {
        json!({"id": "1", "method": "call_tool", "params": v})
    } else {
        bail!(
            "{}: expected a request envelope or a {{\"tool\", \"args\"}} object",
            path.display()
        );
    };
    Ok(serde_json::to_string(&envelope)?)
}

fn repeat_summary(r: &RepeatReport) -> String {
    let mut w = KvWriter::new();
    w.int("n_runs", r.n_runs as u64);
    w.bool("identical", r.identical);
    for (i, h) in r.hashes.iter().enumerate() {
        w.str(&format!("hash.{}", i + 1), h);
    }
    for (i, b) in r.b_below.iter().enumerate() {
        w.f64(&format!("b_below.{}", i + 1), *b);
    }
    for (i, b) in r.b_above.iter().enumerate() {
        w.f64(&format!("b_above.{}", i + 1), *b);
    }
    w.f64("sigma_b_below", r.sigma_b_below);
    w.f64("sigma_b_above", r.sigma_b_above);
    w.f64("sigma_b_across_runs", r.sigma_b_across_runs);
    w.f64("b_drift", r.b_drift);
    w.opt_f64("intensity_power_uw", r.intensity_power_uw);
    w.opt_f64("intensity_spread_pct", r.intensity_spread_pct);
    for (i, t) in r.timings.iter().enumerate() {
        w.f64(&format!("seconds.{}", i + 1), t.as_secs_f64());
    }
    w.into_string()
}

fn repeat(a: RepeatArgs) -> Result<bool> {
    let cmd = ServerCommand::parse(&a.server).context("--server is empty")?;
    let base = request_line(&a.call)?;
    let mut requests = vec![base; a.n];
    if let Some(p) = &a.perturbed_call {
        if let Some(last) = requests.last_mut() {
            *last = request_line(p)?;
        }
    }
    let options = RepeatOptions {
        out_dir: a.out.clone(),
        parallel: a.parallel,
    };
    let report =
        run_repeat_requests(&cmd, &requests, &options).map_err(|e| anyhow::anyhow!("{e}"))?;
    let summary = repeat_summary(&report);
    print!("{summary}");
    if let Some(dir) = &a.out {
        std::fs::write(dir.join("summary.txt"), &summary)?;
    }
    let spread_ok = report
        .intensity_spread_pct
        .map_or(true, |s| s < MAX_SPREAD_PCT);
    let ok = report.identical && report.sigma_b_across_runs == 0.0 && spread_ok;
    println!("assertions = {}", if ok { "pass" } else { "fail" });
    Ok(ok)
}

fn contrast_summary(r: &ContrastReport) -> String {
    let mut w = KvWriter::new();
    w.str("campaign_id", &r.campaign_id);
    for (name, p) in [("primary", &r.primary), ("alternate", &r.alternate)] {
        w.f64(&format!("{name}.b_below"), p.b_below);
        w.f64(&format!("{name}.b_above"), p.b_above);
        w.f64(&format!("{name}.sigma_b_fit_below"), p.sigma_b_fit_below);
        w.f64(&format!("{name}.sigma_b_fit_above"), p.sigma_b_fit_above);
        w.bool(&format!("{name}.deterministic"), p.deterministic);
        w.f64(
            &format!("{name}.b_spread_across_repeats"),
            p.b_spread_across_repeats,
        );
        w.str(&format!("{name}.hash"), &p.hashes[0]);
    }
    w.f64("delta_b_below", r.delta_b_below);
    w.f64("delta_b_above", r.delta_b_above);
    w.into_string()
}

fn contrast(a: ContrastArgs) -> Result<bool> {
    let csv =
        std::fs::read(&a.campaign).with_context(|| format!("reading {}", a.campaign.display()))?;
    let report = run_contrast(&csv, a.repeats).map_err(|e| anyhow::anyhow!("{e}"))?;
    let summary = contrast_summary(&report);
    print!("{summary}");
    if let Some(out) = &a.out {
        std::fs::write(out, &summary)?;
    }
    let ok = report.deterministic()
        && report.primary.b_spread_across_repeats == 0.0
        && report.alternate.b_spread_across_repeats == 0.0;
    println!("assertions = {}", if ok { "pass" } else { "fail" });
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Repeat(a) => repeat(a),
        Command::Contrast(a) => contrast(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
