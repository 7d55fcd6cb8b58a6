use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn soliton(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_soliton"))
        .args(args)
        .env("SOLITON_LOG", "quiet")
        .output()
        .expect("spawn soliton")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn page_writes_verified_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p");
    let o = soliton(&["page", "--m", "2", "--k", "1", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let meta = read_json(&out.join("metadata.json"));
    let a = meta["a"].as_f64().unwrap();
    assert!((a + 0.2817).abs() < 1e-4, "{a}");
    assert_eq!(meta["verified"], Value::Bool(true));
    assert_eq!(meta["params"]["rel_tol"].as_f64(), Some(1e-10));
    assert_eq!(meta, stdout_json(&o));
    let residuals = fs::read_to_string(out.join("residuals.csv")).unwrap();
    assert_eq!(residuals.lines().count(), 1002);
    assert!(out.join("trajectory.csv").exists());

    let o = soliton(&["verify", s(&out.join("trajectory.csv")), "--m", "2", "--k", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["pass"], Value::Bool(true));
}

#[test]
fn page_rejects_invalid_pair() {
    let o = soliton(&["page", "--m", "1", "--k", "1"]);
    assert_eq!(code(&o), 64);
    assert!(o.stdout.is_empty());
}

#[test]
fn page_m4_k2() {
    let o = soliton(&["page", "--m", "4", "--k", "2"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn cao_records_both_objectives() {
    let o = soliton(&["cao", "--m", "2", "--k", "1"]);
    assert_eq!(code(&o), 0);
    let meta = stdout_json(&o);
    assert_eq!(meta["T"].as_f64(), Some(3f64.ln()));
    assert_eq!(meta["objective"], "quadrature_J");
    assert!(meta["j_residual"].as_f64().unwrap().abs() < 1e-12);
    assert!(meta["s_residual"].as_f64().unwrap().is_finite());
}

#[test]
fn cao_moment_objective_failure_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = soliton(&[
        "cao",
        "--m",
        "2",
        "--k",
        "1",
        "--objective",
        "paper_S",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 3);
    let meta = read_json(&out.join("metadata.json"));
    assert_eq!(meta["verified"], Value::Bool(false));
    assert!(meta["phi_T"].as_f64().unwrap() > 1e-3);
    assert!(meta["boundary"]
        .as_str()
        .unwrap()
        .contains("boundary verification failed"));
    assert!(out.join("trajectory.csv").exists());
}

#[test]
fn inverted_cao_is_case_iii() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c");
    let inv = dir.path().join("inv");
    assert_eq!(
        code(&soliton(&[
            "cao",
            "--m",
            "3",
            "--k",
            "1",
            "--out",
            s(&c),
            "--format",
            "json"
        ])),
        0
    );

    let o = soliton(&["classify", s(&c.join("trajectory.json"))]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["tag"], "case_ii");

    let o = soliton(&[
        "invert",
        s(&c.join("trajectory.json")),
        "--out",
        s(&inv),
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0);
    let o = soliton(&["classify", s(&inv.join("trajectory.json"))]);
    assert_eq!(stdout_json(&o)["tag"], "case_iii");
    let rep = dir.path().join("rep");
    let o = soliton(&["verify", s(&inv.join("trajectory.json")), "--out", s(&rep)]);
    assert_eq!(code(&o), 0);
    let sup = &stdout_json(&o)["soliton_sup"];
    for key in ["r_nfz", "r_med", "r_eyd"] {
        assert!(sup[key].as_f64().unwrap() < 1e-7, "{key}: {sup}");
    }
    for f in ["residuals.csv", "geometry.csv", "soliton.csv", "metadata.json"] {
        assert!(rep.join(f).exists(), "{f}");
    }
}

#[test]
fn invert_to_stdout_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p");
    soliton(&["page", "--m", "3", "--k", "2", "--out", s(&p), "--samples", "101"]);
    let traj = p.join("trajectory.csv");
    let once = soliton(&["invert", s(&traj), "--m", "3", "--k", "2"]);
    assert_eq!(code(&once), 0);
    let inv = dir.path().join("inv.csv");
    fs::write(&inv, &once.stdout).unwrap();
    let twice = soliton(&["invert", s(&inv), "--m", "3", "--k", "2"]);
    let rows = |text: &str| -> Vec<Vec<f64>> {
        text.lines()
            .skip(1)
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect()
    };
    let back = rows(std::str::from_utf8(&twice.stdout).unwrap());
    let orig = rows(&fs::read_to_string(&traj).unwrap());
    assert_eq!(back.len(), orig.len());
    for (b, o) in back.iter().zip(&orig) {
        // t passes through T − (T − t), which may round; the fields may not
        assert!((b[0] - o[0]).abs() <= 4.0 * f64::EPSILON);
        assert_eq!(b[1..], o[1..]);
    }
}

#[test]
fn malformed_input_exits_65() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p");
    soliton(&["page", "--m", "2", "--k", "1", "--out", s(&p)]);
    let full = fs::read_to_string(p.join("trajectory.csv")).unwrap();
    let truncated = dir.path().join("truncated.csv");
    fs::write(&truncated, &full[..full.len() / 2]).unwrap();
    let o = soliton(&["verify", s(&truncated), "--m", "2", "--k", "1"]);
    assert_eq!(code(&o), 65, "{}", String::from_utf8_lossy(&o.stderr));

    let short = dir.path().join("short.csv");
    let head: Vec<&str> = full.lines().take(4).collect();
    fs::write(&short, head.join("\n")).unwrap();
    assert_eq!(code(&soliton(&["verify", s(&short), "--m", "2", "--k", "1"])), 65);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"metadata\": {}}").unwrap();
    assert_eq!(code(&soliton(&["classify", s(&bad)])), 65);
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p");
    soliton(&["cao", "--m", "2", "--k", "1", "--out", s(&p), "--format", "json"]);
    let csv = dir.path().join("x.csv");
    fs::write(&csv, "t,x,xd,y,yd,phi,phid\n").unwrap();
    assert_eq!(code(&soliton(&["verify", s(&csv)])), 64);
    assert_eq!(
        code(&soliton(&["verify", s(&p.join("trajectory.json")), "--m", "3"])),
        64
    );
    assert_eq!(
        code(&soliton(&[
            "scan", "--m", "2", "--k", "1", "--x0", "1:0:3", "--y0", "0:1:2"
        ])),
        64
    );
    assert_eq!(
        code(&soliton(&[
            "scan", "--m", "2", "--k", "1", "--x0", "nope", "--y0", "0:1:2"
        ])),
        64
    );
    assert_eq!(code(&soliton(&["frobnicate"])), 64);
    assert_eq!(code(&soliton(&["--help"])), 0);
}

#[test]
fn missing_file_exits_74() {
    let o = soliton(&["classify", "/nonexistent/traj.json"]);
    assert_eq!(code(&o), 74);
}

#[test]
fn scan_and_refine() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan");
    let o = soliton(&[
        "scan",
        "--m",
        "2",
        "--k",
        "1",
        "--x0",
        "-0.6:-0.45:4",
        "--y0",
        "-0.6:-0.45:4",
        "--out",
        s(&out),
        "--serial",
    ]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(out.join("scan.csv")).unwrap();
    assert_eq!(csv.lines().count(), 17);
    assert!(csv.starts_with("x0,y0,hit,T_hit,mismatch1,mismatch2,drift,nontriviality,terminated_by"));
    let meta = read_json(&out.join("metadata.json"));
    assert_eq!(meta["parallel"], Value::Bool(false));

    let o = soliton(&["refine", "--m", "2", "--k", "1", "--x0", "-0.53", "--y0", "-0.52"]);
    assert_eq!(code(&o), 0);
    let r = &stdout_json(&o)["refined"];
    assert!((r["x0"].as_f64().unwrap() + 0.5276195).abs() < 1e-6);
    assert_eq!(r["candidate"], Value::Bool(false));
}

#[test]
fn refine_failure_exits_3() {
    let o = soliton(&[
        "refine",
        "--m",
        "2",
        "--k",
        "1",
        "--x0",
        "40",
        "--y0",
        "40",
        "--max-iter",
        "2",
    ]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn shoot_and_radial() {
    let dir = tempfile::tempdir().unwrap();
    let shot = dir.path().join("shot");
    let o = soliton(&[
        "shoot",
        "--m",
        "2",
        "--k",
        "1",
        "--x0",
        "-0.5",
        "--y0",
        "0.1",
        "--out",
        s(&shot),
    ]);
    assert_eq!(code(&o), 0);
    let info = read_json(&shot.join("shot.json"));
    assert_eq!(info["result"]["hit"], Value::Bool(true));
    assert!(shot.join("trajectory.csv").exists());

    let p = dir.path().join("p");
    soliton(&["page", "--m", "2", "--k", "1", "--out", s(&p)]);
    let rad = dir.path().join("rad");
    let o = soliton(&[
        "radial",
        s(&p.join("trajectory.csv")),
        "--m",
        "2",
        "--k",
        "1",
        "--points",
        "51",
        "--out",
        s(&rad),
    ]);
    assert_eq!(code(&o), 0);
    let rows: Vec<Vec<f64>> = fs::read_to_string(rad.join("radial.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 51);
    assert!(rows.windows(2).all(|w| w[1][1] > w[0][1]));
    assert_eq!(rows[0][0], 1e-6);
}
