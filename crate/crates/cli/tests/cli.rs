use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn lfp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lfp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn scratch(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("lfp-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn normalize_prints_normal_form() {
    let out = lfp(&["normalize", "(λx.x x) (λy.y) a"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "a");
}

#[test]
fn normalize_accepts_backslash_syntax() {
    let out = lfp(&["normalize", r"(\x.x) b"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "b");
}

#[test]
fn fuel_exhaustion_is_inconclusive() {
    let out = lfp(&["normalize", "(λx.x x) (λx.x x)", "--fuel", "15"]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("fuel exhausted"));
}

#[test]
fn parse_errors_exit_3() {
    let out = lfp(&["normalize", "(λx.x"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("column"));
}

#[test]
fn unknown_constant_exits_3() {
    let out = lfp(&["normalize", "NOPE a"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("unknown constant"));
}

#[test]
fn bad_usage_exits_3() {
    assert_eq!(code(&lfp(&["normalize"])), 3);
    assert_eq!(code(&lfp(&["no-such-command"])), 3);
    assert_eq!(code(&lfp(&["normalize", "a", "--rule", "gamma"])), 3);
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(code(&lfp(&["--help"])), 0);
    assert_eq!(code(&lfp(&["certify", "--help"])), 0);
    assert_eq!(code(&lfp(&["--version"])), 0);
}

#[test]
fn joinable_exit_codes() {
    assert_eq!(code(&lfp(&["joinable", "(λx.x) a", "a"])), 0);
    assert_eq!(code(&lfp(&["joinable", "a", "b"])), 1);
    assert_eq!(
        code(&lfp(&[
            "joinable",
            "(λx.x x) (λx.x x)",
            "a",
            "--fuel",
            "10"
        ])),
        2
    );
}

#[test]
fn eta_only_under_beta_eta() {
    let out = lfp(&["normalize", "λx.q x"]);
    assert_eq!(stdout(&out).trim(), "λx.q x");
    let out = lfp(&["normalize", "λx.q x", "--rule", "beta-eta"]);
    assert_eq!(stdout(&out).trim(), "q");
}

#[test]
fn trace_lists_steps() {
    let out = lfp(&["trace", "(λx.x) ((λy.y) a)"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.matches("» beta").count(), 2);
    assert!(text.trim_end().ends_with('a'));
}

#[test]
fn trace_json_records() {
    let out = lfp(&["trace", "(λx.x) a", "--json-lines"]);
    assert_eq!(code(&out), 0);
    let lines: Vec<serde_json::Value> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str(l).expect("valid json"))
        .collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["rec"], "step");
    assert_eq!(lines[0]["rule"], "beta");
    assert_eq!(lines[1]["rec"], "status");
    assert_eq!(lines[1]["status"], "normal-form");
    assert_eq!(lines[1]["detail"], "a");
}

#[test]
fn definitions_file() {
    let path = scratch("defs");
    std::fs::write(&path, "# basics\nK = λx y.x\nOMEGA = (λx.x x) (λx.x x)\n").unwrap();
    let out = lfp(&["normalize", "K a OMEGA", "--defs", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "a");
    let out = lfp(&["normalize", "K a", "--defs", "/no/such/file"]);
    assert_eq!(code(&out), 3);
    std::fs::remove_file(&path).ok();
}

#[test]
fn builtin_combinators() {
    let out = lfp(&["normalize", "Y (λf.λx.x) q"]);
    assert_eq!(stdout(&out).trim(), "q");
    let out = lfp(&["normalize", "THETA (λf.λx.x) q"]);
    assert_eq!(stdout(&out).trim(), "q");
    let out = lfp(&["normalize", "Y_2 (λf.λx.x) q"]);
    assert_eq!(stdout(&out).trim(), "q");
}

#[test]
fn fix_var_extension_rule() {
    let out = lfp(&["normalize", "y a", "--fix-var", "y", "--fix-term", "λu.a"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "a a");
    // y free in F is rejected as usage
    let out = lfp(&["normalize", "y", "--fix-var", "y", "--fix-term", "λu.y"]);
    assert_eq!(code(&out), 3);
    // --fix-var without --fix-term is a usage error
    let out = lfp(&["normalize", "y", "--fix-var", "y"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn fixpoint_check_verdicts() {
    assert_eq!(code(&lfp(&["fixpoint-check", "λf x.x", "λx.x"])), 0);
    assert_eq!(code(&lfp(&["fixpoint-check", "λf x.x", "λx.x x"])), 1);
    assert_eq!(
        code(&lfp(&[
            "fixpoint-check",
            "λf x.f x x",
            "(λx.x x) (λx.x x)",
            "--fuel",
            "20"
        ])),
        2
    );
}

#[test]
fn certify_and_check_round_trip() {
    let path = scratch("cert");
    let out = lfp(&[
        "certify",
        "λf x.x",
        "λx.x",
        "c",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let check = lfp(&["check-cert", path.to_str().unwrap()]);
    assert_eq!(code(&check), 0);
    assert!(stdout(&check).contains("valid"));

    // stdin form
    let text = std::fs::read_to_string(&path).unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_lfp"))
        .args(["check-cert", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(text.as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    std::fs::remove_file(&path).ok();
}

#[test]
fn tampered_certificate_is_refuted() {
    let path = scratch("tampered");
    let out = lfp(&[
        "certify",
        "λf x.x",
        "λx.x",
        "c",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    // forge the claimed normal form
    let forged = text.replace("\"normal_form\":\"c\"", "\"normal_form\":\"q\"");
    assert_ne!(text, forged);
    std::fs::write(&path, forged).unwrap();
    let check = lfp(&["check-cert", path.to_str().unwrap()]);
    assert_eq!(code(&check), 1);
    std::fs::remove_file(&path).ok();
}

#[test]
fn certify_refuses_non_fixed_point() {
    let out = lfp(&["certify", "λf x.x", "λx.x x", "w"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("not a fixed point"));
}

#[test]
fn certify_divergent_is_inconclusive() {
    // M = Y F is a fixed point syntactically but nothing here normalizes
    let out = lfp(&["certify", "λf.λx.f", "Y (λf.λx.f)", "w", "--fuel", "300"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn certify_theta_family() {
    let out = lfp(&[
        "certify",
        "λf x.x",
        "λx.x",
        "w",
        "--family",
        "theta",
        "--json-lines",
    ]);
    assert_eq!(code(&out), 0);
    let first: serde_json::Value =
        serde_json::from_str(stdout(&out).lines().next().unwrap()).unwrap();
    assert_eq!(first["rec"], "cert");
    assert_eq!(first["family"], "theta");
}

#[test]
fn certify_diagnostic_includes_plain_steps() {
    let out = lfp(&[
        "certify",
        "λf x.x",
        "λx.x",
        "w",
        "--json-lines",
        "--diagnostic",
    ]);
    assert_eq!(code(&out), 0);
    let kinds: Vec<String> = stdout(&out)
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["rec"]
                .as_str()
                .unwrap()
                .to_string()
        })
        .collect();
    assert!(kinds.iter().any(|k| k == "step"));
    assert!(kinds.iter().any(|k| k == "witness-step"));
    assert!(kinds.iter().any(|k| k == "main-step"));
}
