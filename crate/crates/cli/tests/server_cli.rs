//! The server binary driven over real pipes.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use labgate::server::{SkillDocument, ToolRegistry};
use serde_json::{json, Value};

const PL_ID: &str = "5b0f2c3e-8a41-4d6e-9f27-1c3a5e7b9d20";
const SEM_ID: &str = "0c9a7e52-3b1d-4f08-a6e4-92d5b7c31f6a";

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn serve(extra: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_labgate-server"))
        .arg("--data-dir")
        .arg(fixtures().join("data"))
        .arg("--calibration")
        .arg(fixtures().join("calibration.txt"))
        .args(extra)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn responses(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn call(id: &str, tool: &str, args: Value) -> String {
    json!({"id": id, "method": "call_tool", "params": {"tool": tool, "args": args}}).to_string()
}

#[test]
fn one_response_per_line_in_order() {
    let input = [
        r#"{"id":"a","method":"list_tools"}"#.to_string(),
        String::new(),
        "{broken".to_string(),
        call(
            "b",
            "sem_fft",
            json!({"file_id": SEM_ID, "mag_label": "x40000"}),
        ),
    ]
    .join("\n");
    let out = serve(&[], &input);
    assert!(out.status.success());
    let r = responses(&out);
    assert_eq!(r.len(), 3);
    let names: Vec<&str> = r[0]["result"]["tools"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["pl.run_campaign", "sem_fft"]);
    assert_eq!(r[1]["error"]["code"], -32700);
    assert_eq!(r[2]["id"], "b");
    assert_eq!(r[2]["result"]["periodicity_found"], true);
}

#[test]
fn pl_call_matches_in_process_report() {
    let out = serve(
        &[],
        &call("1", "pl.run_campaign", json!({"file_id": PL_ID})),
    );
    let r = &responses(&out)[0]["result"];
    let csv = std::fs::read(fixtures().join(format!("data/{PL_ID}.csv"))).unwrap();
    let series = labgate::pl::load_campaign_csv(&csv).unwrap();
    let report =
        labgate::pl::run_campaign(&series, &labgate::pl::CampaignConfig::default()).unwrap();
    let (text, hash) = labgate::pl::serialize_report(&report);
    assert_eq!(r["canonical_hash"], hash.as_str());
    assert_eq!(r["report_text"], text.as_str());
    assert_eq!(r["levels_accepted"], 21);
    assert_eq!(r["intensity_fit"]["split_applied"], true);
}

#[test]
fn missing_file_carries_skill_directive() {
    let skill = fixtures().join("skill.ini");
    let missing = "00000000-0000-4000-8000-000000000000";
    let out = serve(
        &["--skill", skill.to_str().unwrap()],
        &call(
            "1",
            "sem_fft",
            json!({"file_id": missing, "mag_label": "x40000"}),
        ),
    );
    let e = &responses(&out)[0]["error"];
    assert_eq!(e["code"], -32002);
    assert_eq!(e["data"][0]["code"], "FILE_NOT_FOUND");
    assert_eq!(e["data"][0]["action"], "abort");
}

#[test]
fn unknown_magnification_is_an_execution_error() {
    let out = serve(
        &[],
        &call(
            "1",
            "sem_fft",
            json!({"file_id": SEM_ID, "mag_label": "x12345"}),
        ),
    );
    let e = &responses(&out)[0]["error"];
    assert_eq!(e["code"], -32002);
    assert_eq!(e["data"][0]["code"], "UNKNOWN_MAGNIFICATION");
}

#[test]
fn bad_startup_files_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let bad_skill = dir.path().join("bad.ini");
    std::fs::write(&bad_skill, "[tool.nope]\n").unwrap();
    let out = serve(&["--skill", bad_skill.to_str().unwrap()], "");
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("SKILL_UNKNOWN_TOOL"));

    let out = Command::new(env!("CARGO_BIN_EXE_labgate-server"))
        .args([
            "--data-dir",
            ".",
            "--calibration",
            "/nonexistent/calibration.txt",
        ])
        .stdin(Stdio::null())
        .output()
        .unwrap();
    assert!(!out.status.success());
}

/// The test plays the mediator: the bundled skill's routes decide
/// `particle_analysis` from the request wording, and the server runs the call.
#[test]
fn skill_routes_drive_particle_analysis() {
    let text = std::fs::read_to_string(fixtures().join("skill.ini")).unwrap();
    let calibration = labgate::sem::CalibrationTable::parse(
        &std::fs::read_to_string(fixtures().join("calibration.txt")).unwrap(),
    )
    .unwrap();
    let registry = ToolRegistry::builtin(labgate::server::ServerContext {
        data_dir: fixtures().join("data"),
        calibration,
    });
    let skill = SkillDocument::parse(&text, &registry).unwrap();
    for (request, particles) in [
        ("Please analyze this SEM image", true),
        ("What is the LIPSS period from the FFT?", false),
        ("Give me a general overview", true),
    ] {
        let mut args = json!({"file_id": SEM_ID, "mag_label": "x40000"});
        for (k, v) in skill.route(request) {
            args[k] = v.clone();
        }
        let out = serve(&[], &call("1", "sem_fft", args));
        assert_eq!(
            responses(&out)[0]["result"]["particles_run"],
            particles,
            "{request}"
        );
    }
}
