use std::path::PathBuf;
use std::process::{Command, Output};

use rapidstab_cli::demo::demo_system;
use rapidstab_cli::system_file::{parse_system, read_system_file, write_system};
use rapidstab_cli::CliError;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn rapidstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rapidstab"))
        .args(args)
        .env_remove("RAPIDSTAB_QUAD_NODES")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn committed_fixture_matches_the_demo() {
    let from_file = read_system_file(&fixture("oscillator.json")).unwrap();
    let demo = demo_system("oscillator", None).unwrap();
    assert_eq!(from_file.a(), demo.a());
    assert_eq!(from_file.b(), demo.b());
    assert_eq!(from_file.controllability_rank(), 2);
    let again = parse_system(write_system(&from_file).as_bytes()).unwrap();
    assert_eq!(again.a(), from_file.a());
}

#[test]
fn bad_fixtures_have_distinct_diagnostics() {
    assert!(matches!(
        read_system_file(&fixture("nan.json")),
        Err(CliError::NonFinite(_))
    ));
    assert!(matches!(
        read_system_file(&fixture("short_a.json")),
        Err(CliError::Dimension(_))
    ));
    assert!(matches!(
        read_system_file(&fixture("missing.json")),
        Err(CliError::Io { .. })
    ));

    let nan = rapidstab(&["synth", "--system", fixture("nan.json").to_str().unwrap()]);
    let short = rapidstab(&[
        "synth",
        "--system",
        fixture("short_a.json").to_str().unwrap(),
    ]);
    assert_ne!(nan.status.code(), Some(0));
    assert_ne!(short.status.code(), Some(0));
    let (e1, e2) = (
        String::from_utf8_lossy(&nan.stderr),
        String::from_utf8_lossy(&short.stderr),
    );
    assert!(e1.contains("non-finite"), "{e1}");
    assert!(e2.contains("dimension"), "{e2}");
}

#[test]
fn verify_exit_codes() {
    let ok = rapidstab(&["verify", "--demo", "oscillator"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok)
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(1) == Some("pass")));

    let rank = rapidstab(&[
        "verify",
        "--system",
        fixture("uncontrollable.json").to_str().unwrap(),
    ]);
    assert_eq!(rank.status.code(), Some(1));
    let report = stdout(&rank);
    assert!(report.lines().nth(1).unwrap().starts_with("rank,fail"));
    assert_eq!(
        report.lines().filter(|l| l.contains(",skipped,")).count(),
        6
    );

    let coarse = rapidstab(&["verify", "--demo", "oscillator", "--quad-nodes", "2"]);
    assert_eq!(coarse.status.code(), Some(1));
    assert!(stdout(&coarse).contains("riccati_residual,fail"));
}

#[test]
fn quadrature_env_var_is_overridden_by_the_flag() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_rapidstab"));
        cmd.args(["verify", "--demo", "oscillator"]);
        match env {
            Some(v) => cmd.env("RAPIDSTAB_QUAD_NODES", v),
            None => cmd.env_remove("RAPIDSTAB_QUAD_NODES"),
        };
        if let Some(f) = flag {
            cmd.args(["--quad-nodes", f]);
        }
        cmd.output().unwrap().status.code()
    };
    assert_eq!(run(Some("2"), None), Some(1));
    assert_eq!(run(Some("2"), Some("16")), Some(0));
    assert_eq!(run(None, None), Some(0));
}

#[test]
fn usage_and_validation_errors_exit_nonzero() {
    for args in [
        vec!["synth"],
        vec!["synth", "--demo", "pendulum"],
        vec!["synth", "--demo", "oscillator", "--omega", "-1"],
        vec!["synth", "--demo", "oscillator", "--T0", "3", "--T", "2"],
        vec!["simulate", "--demo", "oscillator", "--x0", "1,2,3"],
        vec!["simulate", "--demo", "oscillator", "--dt", "0"],
        vec!["sweep", "--demo", "oscillator", "--T", "1"],
        vec!["frobnicate"],
    ] {
        let out = rapidstab(&args);
        assert_ne!(out.status.code(), Some(0), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec![
            "synth",
            "--demo",
            "skew(6)",
            "--seed",
            "3",
            "--variant",
            "standard",
            "--T",
            "4",
        ],
        vec!["simulate", "--demo", "oscillator", "--t-final", "2"],
        vec!["sweep", "--demo", "skew(4,7)"],
        vec!["verify", "--demo", "string(10)"],
        vec!["demo", "--demo", "skew(5,9)"],
    ] {
        let mut files = Vec::new();
        for k in 0..2 {
            let path = dir.path().join(format!("{}-{k}.out", args[0]));
            let mut full = args.clone();
            full.extend(["--out", path.to_str().unwrap()]);
            let out = rapidstab(&full);
            assert_eq!(
                out.status.code(),
                Some(0),
                "{full:?}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            files.push(std::fs::read(&path).unwrap());
        }
        assert!(!files[0].is_empty());
        assert_eq!(files[0], files[1], "{args:?}");
        assert!(!files[0].contains(&b'\r'));
    }
}

#[test]
fn demo_documents_load_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("string.json");
    let out = rapidstab(&[
        "demo",
        "--demo",
        "string(6,2)",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let loaded = read_system_file(&path).unwrap();
    let direct = demo_system("string(6,2)", None).unwrap();
    assert_eq!(loaded.a(), direct.a());
    assert_eq!(loaded.b(), direct.b());

    let synth = rapidstab(&["synth", "--system", path.to_str().unwrap()]);
    assert_eq!(synth.status.code(), Some(0));
    assert!(stdout(&synth).starts_with("quantity,row,col,value\n"));
}

#[test]
fn simulate_table_shape() {
    let out = rapidstab(&[
        "simulate",
        "--demo",
        "oscillator",
        "--t-final",
        "1",
        "--dt",
        "0.01",
        "--x0",
        "1,-0.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,norm,lyapunov,x0,x1"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 101);
    assert!(rows[0].starts_with("0.0000000000000000e0,"));
    assert!(rows[0].ends_with(",1.0000000000000000e0,-5.0000000000000000e-1"));
}
