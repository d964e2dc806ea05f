//! End-to-end runs of the `dualgeo` binary: exit codes, the expectation
//! protocol, determinism of the machine format, and the zoo round trip
//! through the spec-file format.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dualgeo"))
}

#[test]
fn darboux_all_suites_exit_zero() {
    let out = bin().args(["--zoo", "darboux-3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[PASS] duality/duality-identity"));
    assert!(!text.contains("[FAIL]"));
}

#[test]
fn warped_killing_fails_with_located_residual() {
    let out = bin()
        .args(["--zoo", "warped", "--suite", "killing"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[FAIL] killing/killing-field"));
    assert!(text.contains("max 2.000e0"), "{text}");
    assert!(text.contains("worst at [0.0,"), "{text}");
}

#[test]
fn unknown_inputs_exit_three() {
    let out = bin().args(["--spec", "/no/such/file.spec"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = bin().args(["--zoo", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = bin()
        .args(["--zoo", "darboux-3", "--suite", "nope"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn expectation_protocol_distinguishes_exit_codes() {
    let dir = std::env::temp_dir().join(format!("dualgeo-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();

    // exported zoo entries carry their golden matrix: mismatches exit 2
    // only when outcomes drift from it
    let export = bin().args(["--zoo", "warped", "--export"]).output().unwrap();
    assert_eq!(export.status.code(), Some(0));
    let spec_path = dir.join("warped.spec");
    std::fs::write(&spec_path, &export.stdout).unwrap();

    let rerun = bin().arg("--spec").arg(&spec_path).output().unwrap();
    assert_eq!(
        rerun.status.code(),
        Some(0),
        "golden expectations should match: {}",
        String::from_utf8_lossy(&rerun.stdout)
    );

    // flip one expectation: killing is declared to pass but fails
    let text = String::from_utf8(export.stdout).unwrap();
    let doctored = text.replace("killing = fail", "killing = pass");
    let doctored_path = dir.join("doctored.spec");
    std::fs::write(&doctored_path, doctored).unwrap();
    let out = bin().arg("--spec").arg(&doctored_path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("expectation mismatch"), "{err}");

    // a parse error reports the line and exits 3
    let broken_path = dir.join("broken.spec");
    std::fs::write(&broken_path, "[chart]\ncoords = x y\n[metric]\ng 0 0 = 1 +\n").unwrap();
    let out = bin().arg("--spec").arg(&broken_path).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 4"), "{err}");

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn machine_format_is_byte_identical_across_runs() {
    let run = || {
        bin()
            .args([
                "--zoo",
                "gaussian",
                "--format",
                "json-lines",
                "--seed",
                "42",
                "--grid",
                "4",
            ])
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
    // stable key order and one record per line
    let text = String::from_utf8(a.stdout).unwrap();
    for line in text.lines() {
        assert!(line.starts_with("{\"suite\":"), "{line}");
    }
}

#[test]
fn list_flags_work() {
    let out = bin().arg("--list-zoo").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("darboux-3"));

    let out = bin().arg("--list-checks").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("duality/curvature-duality"));
    assert!(text.contains("pseudo-kahler/pk-parallel-form"));
}
