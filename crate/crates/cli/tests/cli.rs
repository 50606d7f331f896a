use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qp(out_root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpcocycle"))
        .args(args)
        .env("QPCOCYCLE_OUT", out_root)
        .output()
        .expect("binary runs")
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn lyapunov_const_diag_writes_reports_under_env_root() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qp(tmp.path(), &["lyapunov", "--example", "const-diag", "--n", "1000", "--phases", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&tmp.path().join("lyapunov"));
    let e = s["result"]["exponents"].as_array().unwrap();
    assert!((e[0].as_f64().unwrap() - 2f64.ln()).abs() < 1e-10);
    assert!((e[1].as_f64().unwrap() + 2f64.ln()).abs() < 1e-10);
    assert_eq!(s["config"]["phases"], 2);
    let csv = fs::read_to_string(tmp.path().join("lyapunov/exponents.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,exponent,stderr,expected"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    // 17 significant digits in exponent notation.
    let mantissa = first[1].split('e').next().unwrap();
    assert_eq!(mantissa.replace('.', "").len(), 17);
    assert!((first[1].parse::<f64>().unwrap() - 2f64.ln()).abs() < 1e-10);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let refuted = qp(tmp.path(), &["dominate", "--example", "unitary-rotation", "--k", "1"]);
    assert_eq!(refuted.status.code(), Some(0));
    assert_eq!(summary(&tmp.path().join("dominate"))["result"]["verdict"], "refuted");

    let inconclusive = qp(tmp.path(), &["homology", "obstruct", "--d", "3", "--k", "2", "--m", "4"]);
    assert_eq!(inconclusive.status.code(), Some(2));

    let bad = qp(tmp.path(), &["lyapunov", "--example", "const-diag", "--param", "colour=red"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("colour"));

    let usage = qp(tmp.path(), &["no-such-command"]);
    assert_eq!(usage.status.code(), Some(1));
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(
        &cfg,
        "operation = \"lyapunov\"\nexample = \"const-diag\"\nn = 500\nphases = 1\nparams = { a = 3, b = 0.25 }\n",
    )
    .unwrap();
    let out = tmp.path().join("explicit");
    let o = qp(
        tmp.path(),
        &["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "lyapunov", "--n", "800"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["config"]["n"], 800);
    assert_eq!(s["config"]["params"]["a"], 3);
    let top = s["result"]["exponents"][0].as_f64().unwrap();
    assert!((top - 3f64.ln()).abs() < 1e-10);
}

#[test]
fn degree_construct_and_split() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qp(tmp.path(), &["degree", "weierstrass", "--n", "128"]);
    assert_eq!(o.status.code(), Some(0));
    let s = summary(&tmp.path().join("degree"));
    assert_eq!(s["result"]["degree"], 2);
    assert!(s["result"]["residual"].as_f64().unwrap() < 0.1);

    let o = qp(tmp.path(), &["construct", "prop34-block", "lambda=3", "k=2", "m=4", "d=3"]);
    assert_eq!(o.status.code(), Some(0));
    let cocycle = tmp.path().join("construct/cocycle.json");
    let text = fs::read_to_string(&cocycle).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!((v["d"].as_u64(), v["m"].as_u64()), (Some(3), Some(4)));

    let factor = tmp.path().join("jordan.json");
    fs::write(&factor, r#"{"f":[["1","1"],["0","1"]],"pi":[["0","1"]],"h":[["1"]]}"#).unwrap();
    let o = qp(tmp.path(), &["homology", "split", factor.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(summary(&tmp.path().join("homology"))["result"]["splitting"], false);
}

#[test]
fn reproduce_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = qp(dir.path(), &["reproduce", "prop2.1-splitting"]);
        assert_eq!(o.status.code(), Some(0));
        assert!(String::from_utf8_lossy(&o.stdout).contains("PASS prop2.1-splitting"));
    }
    for name in ["summary.json", "checks.csv", "splitting.csv"] {
        let x = fs::read(a.path().join("reproduce").join(name)).unwrap();
        let y = fs::read(b.path().join("reproduce").join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}
