use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn kmoment(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kmoment"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn sos_exit_codes() {
    let found = kmoment(&["sos", &fixture("square.json")]);
    assert_eq!(found.status.code(), Some(0));
    let v = json(&found);
    assert_eq!(v["status"], "decomposed");
    assert_eq!(v["report"]["exact"], true);

    let refuted = kmoment(&["sos", &fixture("motzkin.json")]);
    assert_eq!(refuted.status.code(), Some(1));
    let v = json(&refuted);
    assert_eq!(v["status"], "refuted");
    assert_eq!(v["check"]["valid"], true);
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "").unwrap();
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{\"d\": 1, \"terms\": [{\"c\": \"1/0\", \"e\": [0]}]}").unwrap();
    for args in [
        vec!["sos".to_string(), empty.to_string_lossy().into_owned()],
        vec!["sos".to_string(), garbage.to_string_lossy().into_owned()],
        vec!["sos".to_string(), "/nonexistent/p.json".to_string()],
        vec!["sos".to_string(), fixture("square.json"), "--tol=-1".to_string()],
        vec!["frobnicate".to_string()],
    ] {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = kmoment(&refs);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn certify_subcommands() {
    let put = kmoment(&[
        "certify",
        "putinar",
        "--g",
        &fixture("g_ball.json"),
        "--K",
        &fixture("ball.json"),
        "--degree",
        "2",
    ]);
    assert_eq!(put.status.code(), Some(0));
    assert_eq!(json(&put)["report"]["exact"], true);

    let empty = kmoment(&["certify", "empty", "--K", &fixture("neg.json"), "--degree", "2"]);
    assert_eq!(empty.status.code(), Some(0));

    let interval = kmoment(&["certify", "empty", "--K", &fixture("interval.json"), "--degree", "4"]);
    assert_eq!(interval.status.code(), Some(1));
    assert_eq!(json(&interval)["status"], "not-found-at-degree");

    let half = kmoment(&["certify", "archimedean", "--K", &fixture("halfline.json"), "--degree", "4"]);
    assert_eq!(half.status.code(), Some(1));

    let boxed = kmoment(&[
        "certify",
        "archimedean",
        "--K",
        &fixture("box.json"),
        "--degree",
        "2",
        "--mode",
        "coordinates",
    ]);
    assert_eq!(boxed.status.code(), Some(0));
    assert_eq!(json(&boxed)["witness"]["lambdas"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        vec!["sos", "SQUARE"],
        vec!["sos", "MOTZKIN"],
        vec!["certify", "putinar", "--g", "G", "--K", "BALL", "--degree", "2"],
        vec!["certify", "archimedean", "--K", "BALL", "--degree", "2"],
    ];
    for (i, case) in cases.iter().enumerate() {
        let out_path = dir.path().join(format!("result{i}.json"));
        let mut args: Vec<String> = case
            .iter()
            .map(|a| match *a {
                "SQUARE" => fixture("square.json"),
                "MOTZKIN" => fixture("motzkin.json"),
                "G" => fixture("g_ball.json"),
                "BALL" => fixture("ball.json"),
                other => other.to_string(),
            })
            .collect();
        args.extend(["--out".to_string(), out_path.to_string_lossy().into_owned()]);
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let produced = kmoment(&refs);
        assert!(produced.stdout.is_empty());
        assert!(out_path.exists(), "{case:?}");

        let checked = kmoment(&["verify", &out_path.to_string_lossy()]);
        assert_eq!(
            checked.status.code(),
            Some(0),
            "{case:?}: {}",
            String::from_utf8_lossy(&checked.stderr)
        );
        assert_eq!(json(&checked)["valid"], true, "{case:?}");
    }
}

#[test]
fn verify_rejects_tampered_certificate() {
    let out = kmoment(&["sos", &fixture("square.json")]);
    let mut v = json(&out);
    v["decomposition"]["weights"][0] = Value::String("2/1".into());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tampered.json");
    std::fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    let checked = kmoment(&["verify", &path.to_string_lossy()]);
    assert_eq!(checked.status.code(), Some(1));
    assert_eq!(json(&checked)["valid"], false);
}

#[test]
fn runs_are_deterministic() {
    for args in [
        vec!["sos".to_string(), fixture("motzkin.json")],
        vec![
            "moment".to_string(),
            "atoms".to_string(),
            fixture("sym_seq.json"),
            "--seed".to_string(),
            "5".to_string(),
        ],
    ] {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = kmoment(&refs);
        let b = kmoment(&refs);
        assert_eq!(a.stdout, b.stdout);
        assert_eq!(a.status.code(), b.status.code());
    }
}

#[test]
fn failed_command_leaves_no_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("atoms.json");
    let out = kmoment(&[
        "moment",
        "atoms",
        &fixture("nonflat_seq.json"),
        "--out",
        &out_path.to_string_lossy(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_path.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn moment_and_measure_commands() {
    let flat = kmoment(&["moment", "flat", &fixture("sym_seq.json")]);
    assert_eq!(flat.status.code(), Some(0));
    assert_eq!(json(&flat)["rank_n"], 2);
    assert_eq!(kmoment(&["moment", "flat", &fixture("nonflat_seq.json")]).status.code(), Some(1));

    let atoms = kmoment(&["moment", "atoms", &fixture("sym_seq.json"), "--K", &fixture("interval.json")]);
    assert_eq!(atoms.status.code(), Some(0));
    let v = json(&atoms);
    let xs: Vec<f64> = v["atoms"].as_array().unwrap().iter().map(|a| a["x"][0].as_f64().unwrap()).collect();
    assert_eq!(xs.len(), 2);
    assert!((xs[0] + 1.0).abs() < 1e-9 && (xs[1] - 1.0).abs() < 1e-9);
    assert_eq!(v["support"]["all_inside"], true);

    let matrix = kmoment(&["moment", "matrix", &fixture("sym_seq.json"), "--n", "1"]);
    assert_eq!(json(&matrix)["matrix"], serde_json::json!([["1", "0"], ["0", "1"]]));

    let moments = kmoment(&["measure", "moments", &fixture("dirac2.json"), "--degree", "1"]);
    let ys: Vec<Value> = json(&moments)["moments"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["y"].clone())
        .collect();
    assert_eq!(ys, ["1/1", "1/2", "-1/4"]);

    assert_eq!(
        kmoment(&["measure", "carleman", &fixture("normal_even.json")]).status.code(),
        Some(0)
    );
    assert_eq!(
        kmoment(&["measure", "carleman", &fixture("fast_growth.json")]).status.code(),
        Some(1)
    );
    assert_eq!(
        kmoment(&["measure", "petersen", &fixture("quad_measure.json")]).status.code(),
        Some(0)
    );
    let bound = kmoment(&[
        "measure",
        "bound",
        &fixture("quad_measure.json"),
        "--K",
        &fixture("box.json"),
        "--p",
        &fixture("g_ball.json"),
    ]);
    assert_eq!(bound.status.code(), Some(0));
    assert_eq!(json(&bound)["holds"], true);
}

#[test]
fn text_format_is_flat() {
    let out = kmoment(&["moment", "flat", &fixture("sym_seq.json"), "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("flat") && l.trim_end().ends_with("true")));
    assert!(text.lines().any(|l| l.starts_with("rank_n ") && l.trim_end().ends_with('2')));
}
