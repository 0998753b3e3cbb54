//! Built-in tools behind the in-process server, on files in a temp dir.

use labgate::repro::images::{grating, squares};
use labgate::repro::{generate_campaign, SyntheticSpec};
use labgate::sem::{CalibrationTable, GrayImage};
use labgate::server::{Server, ServerContext, SkillDocument, ToolRegistry};
use serde_json::{json, Value};

const IMG: &str = "7d3c2b1a-0f9e-4d8c-b7a6-5e4d3c2b1a09";
const CSV: &str = "1a2b3c4d-5e6f-4a7b-8c9d-0e1f2a3b4c5d";

/// Stacks `bar` rows of black under `image`, like an instrument info bar.
fn with_info_bar(image: &GrayImage, bar: usize) -> GrayImage {
    let mut px = image.pixels().to_vec();
    px.extend(std::iter::repeat(0).take(bar * image.width()));
    GrayImage::new(image.width(), image.height() + bar, px).unwrap()
}

fn server(dir: &std::path::Path) -> Server {
    let calibration = CalibrationTable::parse("x40000 2.48046875 64\n").unwrap();
    let registry = ToolRegistry::builtin(ServerContext {
        data_dir: dir.to_path_buf(),
        calibration,
    });
    Server::new(registry, SkillDocument::default())
}

fn call(s: &Server, tool: &str, args: Value) -> Value {
    let line = json!({"id": "1", "method": "call_tool", "params": {"tool": tool, "args": args}});
    serde_json::from_str(&s.handle_line(&line.to_string())).unwrap()
}

#[test]
fn sem_grating_period_in_nanometres() {
    let dir = tempfile::tempdir().unwrap();
    let img = with_info_bar(&grating(256, 256, 16.0, 0.0), 64);
    std::fs::write(dir.path().join(format!("{IMG}.pgm")), img.to_pgm()).unwrap();
    let s = server(dir.path());
    let r = call(
        &s,
        "sem_fft",
        json!({"file_id": IMG, "mag_label": "x40000"}),
    );
    let text = r["result"]["report_text"].as_str().unwrap();
    let period: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("periodicity.period_nm = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(
        (period - 16.0 * 2.48046875).abs() <= (0.1 + 0.5) * 2.48046875,
        "{period}"
    );
    assert!(text.contains("image.height = 256\n"));
}

#[test]
fn sem_particles_only_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let img = with_info_bar(&squares(64, 64, &[(5, 5, 10), (30, 30, 14)], 20, 220), 64);
    std::fs::write(dir.path().join(format!("{IMG}.pgm")), img.to_pgm()).unwrap();
    let s = server(dir.path());
    let off = call(
        &s,
        "sem_fft",
        json!({"file_id": IMG, "mag_label": "x40000"}),
    );
    assert_eq!(off["result"]["particles_run"], false);
    let on = call(
        &s,
        "sem_fft",
        json!({"file_id": IMG, "mag_label": "x40000", "particle_analysis": true}),
    );
    assert_eq!(on["result"]["particles_run"], true);
    assert!(on["result"]["report_text"]
        .as_str()
        .unwrap()
        .contains("particles.count = 2\n"));
}

#[test]
fn pl_tool_honours_arguments() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec {
        n_levels: 9,
        ..Default::default()
    };
    std::fs::write(
        dir.path().join(format!("{CSV}.csv")),
        generate_campaign(&spec).unwrap().csv,
    )
    .unwrap();
    let s = server(dir.path());
    let voigt = call(&s, "pl.run_campaign", json!({"file_id": CSV}));
    let lor = call(
        &s,
        "pl.run_campaign",
        json!({"file_id": CSV, "profile": "lorentzian"}),
    );
    let moved = call(
        &s,
        "pl.run_campaign",
        json!({"file_id": CSV, "boundary_uW": 1.0}),
    );
    let text = |v: &Value| v["result"]["report_text"].as_str().unwrap().to_string();
    assert!(text(&voigt).contains("config.profile = voigt\n"));
    assert!(text(&lor).contains("config.profile = lorentzian\n"));
    assert!(text(&moved).contains("intensity_fit.boundary_uw = 1.0\n"));
    let again = call(&s, "pl.run_campaign", json!({"file_id": CSV}));
    assert_eq!(voigt, again);
    assert_eq!(s.registry().invocations("pl.run_campaign"), 4);
}
