use std::io::Write;
use std::process::{Command, Output};

use nszcap::builtin;
use nszcap_cli::document::ChannelDocument;
use nszcap_cli::source::load_document;
use serde_json::Value;

fn nszcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nszcap")).args(args).output().expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_temp(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn compute_upsilon_hat_two_state() {
    let out = nszcap(&["compute", "--builtin", "example4:0.75", "--quantity", "upsilon-hat"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_stdout(&out);
    assert!((doc["value"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-6);
    assert!((doc["log2_value"].as_f64().unwrap() - (4.0f64 / 3.0).log2()).abs() < 1e-6);
    assert!(doc.get("witness").is_none());
}

#[test]
fn compute_superdense_bound_amplitude_damping() {
    let out = nszcap(&["compute", "--builtin", "amplitude-damping:0.75", "--quantity", "superdense-bound"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((json_stdout(&out)["value"].as_f64().unwrap() - 10.0 / 9.0).abs() < 1e-9);
}

#[test]
fn compute_aram_qutrit() {
    let out = nszcap(&["compute", "--builtin", "prop11", "--quantity", "aram"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json_stdout(&out)["value"].as_f64().unwrap() <= 1.17511);
}

#[test]
fn witness_flag_emits_matrices() {
    let out = nszcap(&["compute", "--builtin", "amplitude-damping:0.75", "--quantity", "upsilon-hat", "--witness"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_stdout(&out);
    let s = &doc["witness"]["primal"]["S_A"];
    assert_eq!(s.as_array().unwrap().len(), 2);
    assert_eq!(s[0][0].as_array().unwrap().len(), 2);
    assert!(doc["witness"]["dual"]["T_B"].is_array());
}

#[test]
fn compute_from_kraus_file() {
    let doc = ChannelDocument::from_channel(&builtin::amplitude_damping(0.75).unwrap());
    let f = write_temp(&doc.to_json());
    let out = nszcap(&["compute", "--channel", f.path().to_str().unwrap(), "--quantity", "upsilon"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((json_stdout(&out)["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn compute_cq_quantity_from_cq_file() {
    let f = write_temp(
        r#"{"type": "cq", "outputs": [
            [[[1, 0], [0, 0]], [[0, 0], [0, 0]]],
            [[[0, 0], [0, 0]], [[0, 0], [1, 0]]]
        ]}"#,
    );
    let out = nszcap(&["compute", "--channel", f.path().to_str().unwrap(), "--quantity", "upsilon-cq"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((json_stdout(&out)["value"].as_f64().unwrap() - 2.0).abs() < 1e-6);
}

#[test]
fn malformed_document_is_input_error() {
    let f = write_temp(r#"{"type": "kraus", "d_in": 2, "kraus": []}"#);
    let out = nszcap(&["compute", "--channel", f.path().to_str().unwrap(), "--quantity", "upsilon"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("d_out"));

    let f = write_temp(r#"{"type": "kraus", "d_in": 2, "d_out": 2, "kraus": [[[[1, 0], [0, 0]], [[0, 0]]]]}"#);
    let out = nszcap(&["compute", "--channel", f.path().to_str().unwrap(), "--quantity", "upsilon"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kraus[0][1]"));

    let f = write_temp(r#"{"type": "kraus", "d_in": 2, "d_out": 2, "kraus": [[[[1, 0], [0, 0]], [[0, 0], [0.5, 0]]]]}"#);
    let out = nszcap(&["compute", "--channel", f.path().to_str().unwrap(), "--quantity", "upsilon"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trace preserving"));
}

#[test]
fn bad_arguments_are_input_errors() {
    assert_eq!(nszcap(&["compute", "--quantity", "aram"]).status.code(), Some(1));
    assert_eq!(nszcap(&["compute", "--builtin", "prop11", "--quantity", "theta"]).status.code(), Some(1));
    assert_eq!(nszcap(&["compute", "--builtin", "delta:0", "--quantity", "aram"]).status.code(), Some(1));
    assert_eq!(nszcap(&["compute", "--builtin", "prop11", "--quantity", "aram-cq"]).status.code(), Some(1));
    assert_eq!(nszcap(&["compute", "--channel", "/nonexistent.json", "--quantity", "aram"]).status.code(), Some(1));
    assert_eq!(nszcap(&["verify", "--only", "lemma3"]).status.code(), Some(1));
}

#[test]
fn dimension_overflow_is_input_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_nszcap"))
        .args(["compute", "--builtin", "delta:3", "--quantity", "upsilon"])
        .env("NSZCAP_MAX_DIM", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_single_family() {
    let out = nszcap(&["verify", "--only", "lemma2", "--seed", "42", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_stdout(&out);
    let checks = doc["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["name"] == "lemma2"));
    assert!(checks.iter().any(|c| c["instance"].as_str().unwrap().contains("seed=42")));
    for c in checks {
        assert!(c["lhs"].is_number() && c["rhs"].is_number() && c["margin"].is_number());
    }
}

#[test]
fn verify_tight_tolerance_fails() {
    let out = nszcap(&["verify", "--only", "delta", "--tolerance", "1e-12", "--max-dim", "9"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn examples_listing() {
    let out = nszcap(&["examples"]);
    assert_eq!(out.status.code(), Some(0));
    let s = String::from_utf8_lossy(&out.stdout);
    for name in ["identity", "depolarizing", "example4", "amplitude-damping", "prop11", "delta"] {
        assert!(s.contains(name), "{name} missing");
    }
    assert!(s.contains("alpha_sq ∈ (0, 1]"));
    assert!(s.contains("ell (≥ 1)"));
}

#[test]
fn exported_documents_round_trip() {
    for spec in ["prop11", "example4:0.75", "amplitude-damping:0.3", "delta:3", "depolarizing:3"] {
        let out = nszcap(&["export", "--builtin", spec]);
        assert_eq!(out.status.code(), Some(0));
        let text = String::from_utf8(out.stdout).unwrap();
        let doc = ChannelDocument::parse(&text).unwrap();
        let reparsed = load_document(&doc).unwrap();
        let written = ChannelDocument::from_channel(reparsed.channel.as_ref().unwrap());
        assert_eq!(doc, written, "{spec}");

        let (name, params) = nszcap_cli::source::parse_builtin_spec(spec).unwrap();
        let original = nszcap_cli::source::resolve_builtin(&name, &params).unwrap();
        for (a, b) in original.channel.unwrap().kraus().iter().zip(reparsed.channel.unwrap().kraus()) {
            assert!(nszcap::matrix::max_abs_diff(a, b) <= 1e-15, "{spec}");
        }
    }
}

#[test]
fn verify_default_run_passes() {
    let out = nszcap(&["verify"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains(" 0 failed"));
}
