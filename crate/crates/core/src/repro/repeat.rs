//! Replays one tool call against fresh server processes and compares the
//! canonical reports they return.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde_json::Value;
use thiserror::Error;

use crate::canonical::{sha256_hex, unseal};
use crate::pl::report_fields;

#[derive(Debug, Error)]
pub enum RepeatError {
    #[error("SERVER_FAILURE: run {run}: {message}")]
    ServerFailure { run: usize, message: String },
    #[error("INVALID_ARGUMENT: {0}")]
    InvalidArgument(String),
    #[error("IO_ERROR: {0}")]
    Io(#[from] std::io::Error),
}

impl RepeatError {
    pub fn code(&self) -> &'static str {
        match self {
            RepeatError::ServerFailure { .. } => "SERVER_FAILURE",
            RepeatError::InvalidArgument(_) => "INVALID_ARGUMENT",
            RepeatError::Io(_) => "IO_ERROR",
        }
    }
}

/// Program and arguments that start a server speaking line-delimited
/// envelopes on stdin/stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct ServerCommand {
    pub program: PathBuf,
    pub args: Vec<String>,
}

impl ServerCommand {
    pub fn new(
        program: impl Into<PathBuf>,
        args: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        Self {
            program: program.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    /// Splits on whitespace; the first word is the program.
    pub fn parse(line: &str) -> Option<Self> {
        let mut words = line.split_whitespace();
        let program = words.next()?;
        Some(Self::new(program, words))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RepeatOptions {
    /// Each run's report goes to `<out_dir>/run-<i>/report.plreport.txt`.
    pub out_dir: Option<PathBuf>,
    /// Start all runs at once; results are still compared afterwards.
    pub parallel: bool,
}

/// What one server run returned.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub hash: String,
    pub report_text: String,
    pub b_below: Option<f64>,
    pub b_above: Option<f64>,
    /// `(power_uw, peak_intensity_counts)` for every accepted level.
    pub intensities: Vec<(f64, f64)>,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepeatReport {
    pub n_runs: usize,
    pub hashes: Vec<String>,
    pub identical: bool,
    pub b_below: Vec<f64>,
    pub b_above: Vec<f64>,
    /// Population standard deviation across runs, per side.
    pub sigma_b_below: f64,
    pub sigma_b_above: f64,
    /// The larger of the two per-side values.
    pub sigma_b_across_runs: f64,
    /// Largest max − min of b on either side; nonzero only when runs differ.
    pub b_drift: f64,
    /// Lowest power present in every run, if any.
    pub intensity_power_uw: Option<f64>,
    /// (max − min) / mean × 100 of the intensity at that power.
    pub intensity_spread_pct: Option<f64>,
    pub timings: Vec<Duration>,
}

fn failure(run: usize, message: impl Into<String>) -> RepeatError {
    RepeatError::ServerFailure {
        run,
        message: message.into(),
    }
}

/// Reads the first response envelope of a run. Any error envelope, a
/// missing report or a report whose embedded hash does not match its body
/// is a server failure.
pub fn parse_response(
    run: usize,
    stdout: &str,
    elapsed: Duration,
) -> Result<RunRecord, RepeatError> {
    let line = stdout
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| failure(run, "no response line"))?;
    let envelope: Value =
        serde_json::from_str(line).map_err(|e| failure(run, format!("malformed envelope: {e}")))?;
    if let Some(err) = envelope.get("error") {
        return Err(failure(run, format!("error envelope: {err}")));
    }
    let result = envelope
        .get("result")
        .ok_or_else(|| failure(run, "envelope has neither result nor error"))?;
    let text = result
        .get("report_text")
        .and_then(Value::as_str)
        .ok_or_else(|| failure(run, "result has no report_text"))?;
    let (body, embedded) = unseal(text).ok_or_else(|| failure(run, "report is not sealed"))?;
    let hash = sha256_hex(body.as_bytes());
    if hash != embedded {
        return Err(failure(run, "embedded hash does not match report body"));
    }
    if let Some(claimed) = result.get("canonical_hash").and_then(Value::as_str) {
        if claimed != hash {
            return Err(failure(run, "canonical_hash does not match report"));
        }
    }

    let fields = report_fields(text);
    let get = |k: &str| fields.iter().find(|(key, _)| *key == k).map(|(_, v)| *v);
    let num = |k: &str| get(k).and_then(|v| v.parse::<f64>().ok());
    let count = get("levels.count")
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0);
    let mut intensities = Vec::with_capacity(count);
    for i in 0..count {
        let p = num(&format!("level.{i}.power_uw"));
        let y = num(&format!("level.{i}.peak_intensity_counts"));
        match (p, y) {
            (Some(p), Some(y)) => intensities.push((p, y)),
            _ => return Err(failure(run, format!("level {i} is incomplete"))),
        }
    }
    Ok(RunRecord {
        hash,
        report_text: text.to_string(),
        b_below: num("intensity_fit.below.b"),
        b_above: num("intensity_fit.above.b"),
        intensities,
        elapsed,
    })
}

fn execute(run: usize, cmd: &ServerCommand, request: &str) -> Result<RunRecord, RepeatError> {
    let start = Instant::now();
    let mut child = Command::new(&cmd.program)
        .args(&cmd.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| failure(run, format!("cannot start {}: {e}", cmd.program.display())))?;
    {
        let mut stdin = child.stdin.take().expect("stdin is piped");
        let line = format!("{}\n", request.trim_end());
        // a server that exits early is judged by its exit status below
        match stdin.write_all(line.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
            _ => {}
        }
    }
    let out = child.wait_with_output()?;
    let elapsed = start.elapsed();
    if !out.status.success() {
        return Err(failure(
            run,
            format!(
                "exit status {}: {}",
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            ),
        ));
    }
    let stdout = String::from_utf8(out.stdout).map_err(|_| failure(run, "stdout is not UTF-8"))?;
    parse_response(run, &stdout, elapsed)
}

fn population_std(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    // shifted by the first value so identical inputs give exactly zero
    let n = values.len() as f64;
    let d: Vec<f64> = values.iter().map(|v| v - values[0]).collect();
    let mean = d.iter().sum::<f64>() / n;
    (d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

fn range(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.is_empty() {
        0.0
    } else {
        max - min
    }
}

/// Cross-run statistics over already collected runs.
pub fn summarize(records: &[RunRecord]) -> RepeatReport {
    let hashes: Vec<String> = records.iter().map(|r| r.hash.clone()).collect();
    let identical = hashes.windows(2).all(|w| w[0] == w[1]);
    let b_below: Vec<f64> = records.iter().filter_map(|r| r.b_below).collect();
    let b_above: Vec<f64> = records.iter().filter_map(|r| r.b_above).collect();
    let sigma_b_below = population_std(&b_below);
    let sigma_b_above = population_std(&b_above);

    let intensity_power_uw = records.first().and_then(|first| {
        first
            .intensities
            .iter()
            .map(|&(p, _)| p)
            .filter(|p| {
                records
                    .iter()
                    .all(|r| r.intensities.iter().any(|&(q, _)| q == *p))
            })
            .fold(None, |acc: Option<f64>, p| {
                Some(acc.map_or(p, |a| a.min(p)))
            })
    });
    let intensity_spread_pct = intensity_power_uw.map(|p| {
        let ys: Vec<f64> = records
            .iter()
            .map(|r| {
                r.intensities
                    .iter()
                    .find(|&&(q, _)| q == p)
                    .expect("shared power")
                    .1
            })
            .collect();
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        range(&ys) / mean * 100.0
    });

    RepeatReport {
        n_runs: records.len(),
        hashes,
        identical,
        sigma_b_below,
        sigma_b_above,
        sigma_b_across_runs: sigma_b_below.max(sigma_b_above),
        b_drift: range(&b_below).max(range(&b_above)),
        b_below,
        b_above,
        intensity_power_uw,
        intensity_spread_pct,
        timings: records.iter().map(|r| r.elapsed).collect(),
    }
}

fn write_runs(dir: &Path, records: &[RunRecord]) -> Result<(), RepeatError> {
    for (i, r) in records.iter().enumerate() {
        let run_dir = dir.join(format!("run-{}", i + 1));
        std::fs::create_dir_all(&run_dir)?;
        std::fs::write(run_dir.join("report.plreport.txt"), &r.report_text)?;
    }
    Ok(())
}

/// Sends `requests[i]` to a fresh server for run `i`.
pub fn run_repeat_requests(
    cmd: &ServerCommand,
    requests: &[String],
    options: &RepeatOptions,
) -> Result<RepeatReport, RepeatError> {
    if requests.len() < 2 {
        return Err(RepeatError::InvalidArgument(format!(
            "need at least 2 runs, got {}",
            requests.len()
        )));
    }
    let results: Vec<Result<RunRecord, RepeatError>> = if options.parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = requests
                .iter()
                .enumerate()
                .map(|(i, req)| s.spawn(move || execute(i + 1, cmd, req)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("run thread panicked"))
                .collect()
        })
    } else {
        requests
            .iter()
            .enumerate()
            .map(|(i, req)| execute(i + 1, cmd, req))
            .collect()
    };
    let records = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    if let Some(dir) = &options.out_dir {
        write_runs(dir, &records)?;
    }
    Ok(summarize(&records))
}

/// Sends the same request to `n` fresh servers.
pub fn run_repeat(
    cmd: &ServerCommand,
    request: &str,
    n: usize,
    options: &RepeatOptions,
) -> Result<RepeatReport, RepeatError> {
    let requests = vec![request.to_string(); n];
    run_repeat_requests(cmd, &requests, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::seal;
    use serde_json::json;

    fn envelope(body: &str) -> String {
        let (text, hash) = seal(body.to_string());
        json!({"id": "1", "result": {"canonical_hash": hash, "report_text": text}}).to_string()
    }

    const BODY: &str = "format = plreport/1\nlevels.count = 2\nlevel.0.power_uw = 0.1\n\
level.0.peak_intensity_counts = 31.6\nlevel.1.power_uw = 1.0\nlevel.1.peak_intensity_counts = 1000.0\n\
intensity_fit.below.b = 1.5\nintensity_fit.above.b = 0.5\n";

    #[test]
    fn parses_envelope() {
        let r = parse_response(1, &envelope(BODY), Duration::ZERO).unwrap();
        assert_eq!(r.b_below, Some(1.5));
        assert_eq!(r.b_above, Some(0.5));
        assert_eq!(r.intensities, vec![(0.1, 31.6), (1.0, 1000.0)]);
        assert_eq!(r.hash, sha256_hex(BODY.as_bytes()));
    }

    #[test]
    fn bad_envelopes_are_server_failures() {
        let tampered = envelope(BODY).replace("31.6", "31.7");
        for out in [
            "".to_string(),
            "not json".to_string(),
            r#"{"id":"1","error":{"code":-32001}}"#.to_string(),
            r#"{"id":"1","result":{}}"#.to_string(),
            tampered,
        ] {
            let e = parse_response(1, &out, Duration::ZERO).unwrap_err();
            assert_eq!(e.code(), "SERVER_FAILURE", "{out}");
        }
    }

    fn record(body: &str) -> RunRecord {
        parse_response(1, &envelope(body), Duration::ZERO).unwrap()
    }

    #[test]
    fn std_of_identical_values_is_exactly_zero() {
        for v in [0.1, 1.0 / 3.0, 1.4999999999999998, 1e300] {
            for n in 1..8 {
                assert_eq!(population_std(&vec![v; n]), 0.0);
            }
        }
    }

    #[test]
    fn identical_runs_have_zero_spread() {
        let s = summarize(&[record(BODY), record(BODY), record(BODY), record(BODY)]);
        assert!(s.identical);
        assert_eq!(s.sigma_b_across_runs, 0.0);
        assert_eq!(s.b_drift, 0.0);
        assert_eq!(s.intensity_power_uw, Some(0.1));
        assert_eq!(s.intensity_spread_pct, Some(0.0));
    }

    #[test]
    fn differing_runs_are_measured() {
        let other = BODY
            .replace("31.6", "32.6")
            .replace("below.b = 1.5", "below.b = 1.7");
        let s = summarize(&[record(BODY), record(&other)]);
        assert!(!s.identical);
        assert!((s.sigma_b_below - 0.1).abs() < 1e-12);
        assert!((s.b_drift - 0.2).abs() < 1e-12);
        let want = 1.0 / 32.1 * 100.0;
        assert!((s.intensity_spread_pct.unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn spread_uses_lowest_shared_power() {
        let missing_low =
            "levels.count = 1\nlevel.0.power_uw = 1.0\nlevel.0.peak_intensity_counts = 1000.0\n";
        let s = summarize(&[record(BODY), record(missing_low)]);
        assert_eq!(s.intensity_power_uw, Some(1.0));
    }

    #[cfg(unix)]
    #[test]
    fn spawns_fresh_processes() {
        let dir = tempfile::tempdir().unwrap();
        let reply = dir.path().join("reply.json");
        std::fs::write(&reply, envelope(BODY)).unwrap();
        let cmd = ServerCommand::new(
            "sh",
            [
                "-c".to_string(),
                format!("cat >/dev/null; cat {}", reply.display()),
            ],
        );
        let out = dir.path().join("out");
        let opts = RepeatOptions {
            out_dir: Some(out.clone()),
            parallel: true,
        };
        let r = run_repeat(&cmd, "{}", 3, &opts).unwrap();
        assert!(r.identical);
        assert_eq!(r.n_runs, 3);
        assert!(out.join("run-3/report.plreport.txt").exists());

        let failing = ServerCommand::new("sh", ["-c", "exit 3"]);
        let e = run_repeat(&failing, "{}", 2, &RepeatOptions::default()).unwrap_err();
        assert_eq!(e.code(), "SERVER_FAILURE");
        assert_eq!(
            run_repeat(&cmd, "{}", 1, &opts).unwrap_err().code(),
            "INVALID_ARGUMENT"
        );
    }
}
