use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ewens-charpoly"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn json_line(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(text.lines().next().expect("a line")).expect("json")
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["sample", "--family", "ewens:-1"]).status.code(), Some(1));
    assert_eq!(run(&["sample", "--z", "1+xi"]).status.code(), Some(1));
    assert_eq!(run(&["portrait"]).status.code(), Some(1));
    assert_eq!(run(&["sample", "--n", "5", "--z", "1.2"]).status.code(), Some(2));
    assert_eq!(run(&["enumerate-check", "--n", "13"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    // n = 3 is far from the Poisson limit
    let out = run(&["traces", "--n", "3", "--samples", "20000", "--assert"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn enumerate_check_families() {
    for fam in ["ewens:1", "scaled:2:2"] {
        let out = run(&["enumerate-check", "--family", fam, "--n", "8", "--assert"]);
        assert!(out.status.success(), "{fam}");
        let v = json_line(&out);
        assert!(v["max_abs_error"].as_f64().unwrap() < 1e-10);
    }
    let v = json_line(&run(&["enumerate-check", "--n", "1"]));
    assert!(v["max_abs_error"].as_f64().unwrap() < 1e-15);
}

#[test]
fn json_reports() {
    let v = json_line(&run(&[
        "second-moment",
        "--n",
        "2",
        "--samples",
        "20000",
        "--seed",
        "3",
    ]));
    assert_eq!(v["experiment"], "second_moment");
    assert_eq!(v["target"].as_f64().unwrap(), 0.3125);
    assert!(v["z_sigma"].as_f64().unwrap().abs() < 5.0);

    let out = run(&["sample", "--n", "20", "--samples", "3", "--seed", "9"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    for line in text.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        let total: u64 = v["cycle_counts"]
            .as_object()
            .unwrap()
            .iter()
            .map(|(k, c)| k.parse::<u64>().unwrap() * c.as_u64().unwrap())
            .sum();
        assert_eq!(total, 20);
    }

    let v = json_line(&run(&["limit-sample", "--family", "ewens:2", "--z", "0.3+0.4i"]));
    assert!(v["depth"].as_u64().unwrap() > 0);

    let v = json_line(&run(&["covariance", "--samples", "20000", "--z", "0.4", "--w", "0.2"]));
    assert!(v["target"].is_number() || v["target"].is_object());

    let v = json_line(&run(&["converge", "--n", "200", "--samples", "500"]));
    assert_eq!(v["experiment"], "charpoly_vs_limit");
}

#[test]
fn portrait_is_valid_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.ppm");
    let b = dir.path().join("b.ppm");
    for p in [&a, &b] {
        let out = run(&[
            "portrait",
            "--family",
            "ewens:3",
            "--n",
            "500",
            "--grid",
            "64",
            "--seed",
            "4",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let bytes = std::fs::read(&a).unwrap();
    let header = ewens_charpoly::portrait::validate_ppm(&bytes).unwrap();
    assert_eq!((header.width, header.height), (64, 64));
    assert_eq!(bytes, std::fs::read(&b).unwrap());

    let lim = dir.path().join("lim.ppm");
    let out = run(&["portrait", "--limit", "--grid", "32", "--out", lim.to_str().unwrap()]);
    assert!(out.status.success());
    ewens_charpoly::portrait::validate_ppm(&std::fs::read(&lim).unwrap()).unwrap();

    let small = dir.path().join("s.ppm");
    assert_eq!(
        run(&["portrait", "--grid", "8", "--out", small.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn portrait_csv_identity() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    // n = 1 gives the identity type, p_1(z) = 1 - z
    let out = run(&[
        "portrait",
        "--n",
        "1",
        "--grid",
        "16",
        "--csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,re,im"));
    let mut rows = 0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
        assert!(v[0].hypot(v[1]) < 0.98);
        assert!((v[2] - (1.0 - v[0])).abs() < 1e-12 && (v[3] + v[1]).abs() < 1e-12);
        rows += 1;
    }
    assert!(rows > 100 && rows < 256);
}
