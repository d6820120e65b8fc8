use std::path::Path;
use std::process::{Command, Output};

fn mvqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvqc")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = mvqc(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn synth(dir: &Path, subjects: &str) {
    ok(&["synth", "--seed", "7", "--subjects", subjects, "--genuine", "5", "--training-count", "3", "--out", dir.to_str().unwrap()]);
}

#[test]
fn synth_evaluate_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    synth(&data, "4");
    let manifest = data.join("manifest.json");
    let report = dir.path().join("report.json");
    ok(&[
        "evaluate",
        "--manifest",
        manifest.to_str().unwrap(),
        "--b",
        "4,6",
        "--classifier",
        "avgmax,knn",
        "--out",
        report.to_str().unwrap(),
    ]);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["runs"].as_array().unwrap().len(), 4);
    assert!(json.get("elapsed_ms").is_none());

    let csv = ok(&["report", "--input", report.to_str().unwrap(), "--format", "csv"]);
    let csv = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("classifier,b,d1,kind,"));

    let text = ok(&["report", "--input", report.to_str().unwrap()]);
    assert!(String::from_utf8(text.stdout).unwrap().starts_with("Moment_C FRR in % (d1 = 128)"));
}

#[test]
fn evaluate_timing_is_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "2");
    let manifest = dir.path().join("manifest.json");
    let m = manifest.to_str().unwrap();
    let plain = ok(&["evaluate", "--manifest", m, "--classifier", "avg"]);
    let timed = ok(&["evaluate", "--manifest", m, "--classifier", "avg", "--timing"]);
    assert!(!String::from_utf8_lossy(&plain.stdout).contains("elapsed_ms"));
    assert!(String::from_utf8_lossy(&timed.stdout).contains("elapsed_ms"));
}

#[test]
fn enroll_verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    synth(&data, "3");
    let templates = dir.path().join("templates");
    ok(&["enroll", "--manifest", data.join("manifest.json").to_str().unwrap(), "--out", templates.to_str().unwrap()]);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(data.join("manifest.json")).unwrap()).unwrap();
    let subject = |i: usize| manifest["subjects"][i]["id"].as_str().unwrap().to_owned();
    let probe = |i: usize| data.join(manifest["subjects"][i]["genuine"][4].as_str().unwrap());
    let template = templates.join(format!("{}.json", subject(0)));
    let t = template.to_str().unwrap();

    let own = mvqc(&["verify", "--template", t, "--sample", probe(0).to_str().unwrap(), "--classifier", "avgmax"]);
    assert_eq!(own.status.code(), Some(0), "{}", String::from_utf8_lossy(&own.stdout));
    assert!(String::from_utf8_lossy(&own.stdout).starts_with("accept"));

    let other = mvqc(&["verify", "--template", t, "--sample", probe(1).to_str().unwrap(), "--classifier", "avgmax"]);
    assert_eq!(other.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&other.stdout).starts_with("reject"));

    let missing = mvqc(&["verify", "--template", t, "--sample", dir.path().join("nope.pgm").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error:"));
}

#[test]
fn bad_configuration_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "2");
    let m = dir.path().join("manifest.json");
    let out = mvqc(&["evaluate", "--manifest", m.to_str().unwrap(), "--d1", "100"]);
    assert_eq!(out.status.code(), Some(2));
    let out = mvqc(&["evaluate", "--manifest", m.to_str().unwrap(), "--modality", "iris"]);
    assert_eq!(out.status.code(), Some(2));
}
