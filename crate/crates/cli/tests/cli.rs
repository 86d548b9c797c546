use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cstar_approx_cli::commands::SolveArgs;
use cstar_approx_cli::format::{parse_report, ReportFile};
use cstar_approx_cli::{run_delta, run_solve, run_verify, CliError};
use tempfile::TempDir;

fn sample(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn binary(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cstar-approx"))
        .args(args)
        .output()
        .unwrap()
}

fn solve_to(dir: &TempDir, input: &Path) -> (PathBuf, ReportFile, u8) {
    let output = dir.path().join("report.json");
    let out = run_solve(&SolveArgs {
        input: input.to_path_buf(),
        output: output.clone(),
        tol: None,
        seed: None,
    })
    .unwrap();
    (output, out.report, out.exit_code)
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn diagonal_samples_match_closed_forms() {
    let dir = TempDir::new().unwrap();
    // Off-diagonal moduli are 5, 0.5, 0 and 2.
    for (file, expect) in [("diagonal_operator.json", 5.0), ("diagonal_trace.json", 7.5)] {
        let (report, r, code) = solve_to(&dir, &sample(file));
        assert_eq!(code, 0);
        assert!((r.distance - expect).abs() <= 1e-6, "{file}: {}", r.distance);
        assert!(r.converged && r.gap <= r.tol);
        let v = run_verify(&sample(file), &report).unwrap();
        assert_eq!(v.exit_code, 0, "{v:?}");
    }
}

#[test]
fn binary_reports_exit_codes() {
    let dir = TempDir::new().unwrap();
    let input = sample("diagonal_trace.json");
    let report = dir.path().join("r.json");
    let out = binary(&[
        "solve",
        "--input",
        input.to_str().unwrap(),
        "--output",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("distance = 7.5"));
    let out = binary(&[
        "verify",
        "--input",
        input.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("lower_bound = ") && text.contains("gap = "));
}

#[test]
fn malformed_block_names_the_signature() {
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "bad.json",
        r#"{"schema_version":"1","signature":[2],"norm":"trace",
            "x":[[[[1,0]]]],"basis":[[[[[1,0],[0,0]],[[0,0],[0,0]]]]]}"#,
    );
    let out = binary(&["solve", "--input", input.to_str().unwrap(), "--output", "/dev/null"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("signature"));
}

#[test]
fn unknown_fields_are_rejected() {
    let dir = TempDir::new().unwrap();
    let mut text = std::fs::read_to_string(sample("diagonal_trace.json")).unwrap();
    text.insert_str(1, r#""colour": "blue","#);
    let input = write(&dir, "extra.json", &text);
    let err = run_solve(&SolveArgs {
        input,
        output: dir.path().join("r.json"),
        tol: None,
        seed: None,
    })
    .unwrap_err();
    assert!(matches!(err, CliError::Parse(ref m) if m.contains("colour")), "{err}");
    assert_eq!(err.exit_code(), 1);
    assert!(!dir.path().join("r.json").exists());
}

#[test]
fn trace_class_tail_interval_contains_two() {
    let dir = TempDir::new().unwrap();
    let (report, r, code) = solve_to(&dir, &sample("trace_class_tail.json"));
    assert_eq!(code, 0);
    let i = r.interval.unwrap();
    assert!(i.lo <= 2.0 && 2.0 <= i.hi, "{i:?}");
    assert!(i.hi - i.lo <= 1e-3);
    assert!(r.truncation.is_some());
    assert_eq!(
        run_verify(&sample("trace_class_tail.json"), &report).unwrap().exit_code,
        0
    );
}

#[test]
fn tolerance_flag_overrides_the_file() {
    let dir = TempDir::new().unwrap();
    let out = run_solve(&SolveArgs {
        input: sample("trace_class_tail.json"),
        output: dir.path().join("r.json"),
        tol: Some(1e-5),
        seed: None,
    })
    .unwrap();
    assert_eq!(out.report.tol, 1e-5);
    let i = out.report.interval.unwrap();
    assert!(i.hi - i.lo <= 1e-5);
}

fn tampered(dir: &TempDir, report: &Path, edit: impl FnOnce(&mut ReportFile)) -> PathBuf {
    let mut r = parse_report(&std::fs::read(report).unwrap()).unwrap();
    edit(&mut r);
    write(dir, "tampered.json", &serde_json::to_string(&r).unwrap())
}

#[test]
fn verify_rejects_tampered_reports() {
    let dir = TempDir::new().unwrap();
    let input = sample("diagonal_operator.json");
    let (report, _, _) = solve_to(&dir, &input);

    let zeroed = tampered(&dir, &report, |r| {
        let w = &mut r.certificate.as_mut().unwrap().witness;
        w.iter_mut().flatten().flatten().for_each(|z| *z = [0.0, 0.0]);
    });
    assert_eq!(run_verify(&input, &zeroed).unwrap().exit_code, 3);

    let shifted = tampered(&dir, &report, |r| r.distance += 0.1);
    let v = run_verify(&input, &shifted).unwrap();
    assert_eq!(v.exit_code, 3);
    assert!(v.feasible);

    let removed = tampered(&dir, &report, |r| r.certificate = None);
    assert_eq!(run_verify(&input, &removed).unwrap().exit_code, 3);
}

#[test]
fn verify_rejects_a_different_input() {
    let dir = TempDir::new().unwrap();
    let (report, _, _) = solve_to(&dir, &sample("diagonal_operator.json"));
    let err = run_verify(&sample("diagonal_trace.json"), &report).unwrap_err();
    assert!(matches!(err, CliError::DigestMismatch { .. }));
    let out = binary(&[
        "verify",
        "--input",
        sample("diagonal_trace.json").to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_needs_only_the_two_files() {
    let dir = TempDir::new().unwrap();
    let (report, _, _) = solve_to(&dir, &sample("shifted_identity_tail.json"));
    let copy = dir.path().join("problem.json");
    std::fs::copy(sample("shifted_identity_tail.json"), &copy).unwrap();
    let v = run_verify(&copy, &report).unwrap();
    assert_eq!(v.exit_code, 0);
    assert!((v.lower_bound - 2.0).abs() <= 1e-6);
}

#[test]
fn solves_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    for file in [
        "diagonal_trace.json",
        "trace_class_tail.json",
        "shifted_identity_tail.json",
    ] {
        let a = dir.path().join("a.json");
        let b = dir.path().join("b.json");
        for out in [&a, &b] {
            run_solve(&SolveArgs {
                input: sample(file),
                output: out.clone(),
                tol: None,
                seed: Some(7),
            })
            .unwrap();
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{file}");
    }
}

#[test]
fn reports_round_trip_losslessly() {
    let dir = TempDir::new().unwrap();
    let (report, r, _) = solve_to(&dir, &sample("trace_class_tail.json"));
    let bytes = std::fs::read(&report).unwrap();
    let parsed = parse_report(&bytes).unwrap();
    assert_eq!(parsed, r);
    let mut again = serde_json::to_vec_pretty(&parsed).unwrap();
    again.push(b'\n');
    assert_eq!(again, bytes);
}

#[test]
fn output_directory_holds_only_the_report() {
    let dir = TempDir::new().unwrap();
    solve_to(&dir, &sample("diagonal_trace.json"));
    let names: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names, vec![std::ffi::OsString::from("report.json")]);
}

#[test]
fn unreachable_tolerance_gives_exit_two_with_a_report() {
    // A tolerance below rounding cannot be certified.
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "capped.json",
        r#"{"schema_version":"1","signature":[3],"norm":"operator",
            "x":[[[[1,0],[2,1],[0,3]],[[0,-1],[0.1,0],[2,2]],[[1,1],[0,0],[-1,0]]]],
            "basis":[[[[[1,0],[0,1],[1,0]],[[0,0],[2,0],[0,0]],[[1,0],[0,0],[0,1]]]]],
            "options":{"max_iter":1,"restarts":1,"tol":1e-300}}"#,
    );
    let out = binary(&[
        "solve",
        "--input",
        input.to_str().unwrap(),
        "--output",
        dir.path().join("r.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
    let r = parse_report(&std::fs::read(dir.path().join("r.json")).unwrap()).unwrap();
    assert!(!r.converged);
}

#[test]
fn delta_reports_the_essential_shift_norm() {
    let shifted = run_delta(&sample("shifted_identity_tail.json")).unwrap();
    assert_eq!(shifted.delta, 1.0);
    let i = shifted.distance.unwrap();
    assert!((i.lo - 2.0).abs() <= 1e-6 && (i.hi - 2.0).abs() <= 1e-6);
    assert_eq!(shifted.strict, Some(true));

    let compact = run_delta(&sample("compact_tail.json")).unwrap();
    assert_eq!(compact.delta, 0.0);
    assert_eq!(compact.strict, None);

    assert_eq!(run_delta(&sample("harmonic_tail.json")).unwrap().delta, 2.0);
}

#[test]
fn delta_exit_codes() {
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "growing.json",
        r#"{"schema_version":"1","norm":"operator",
            "tail":{"head":[[[1,0]]],"weights":{"rule":"geometric","first":1,"ratio":2}}}"#,
    );
    let out = binary(&["delta", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let out = binary(&[
        "delta",
        "--input",
        sample("shifted_identity_tail.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("delta < distance: true"));
    let out = binary(&["delta", "--input", sample("diagonal_trace.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tail_and_finite_fields_are_exclusive() {
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "mixed.json",
        r#"{"schema_version":"1","signature":[1],"norm":"trace",
            "tail":{"head":[[[1,0]]],"weights":{"rule":"constant","value":1}}}"#,
    );
    let err = run_delta(&input).unwrap_err();
    assert!(err.to_string().contains("tail"), "{err}");
}
