//! The command-line contract: exit codes, artifact names and schemas,
//! canonical JSON and determinism.

use std::path::Path;
use std::process::Command;

use stable_leaf::cli::run_command;
use stable_leaf::report::json_string;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stable-leaf"))
}

fn converge_args(out: &Path) -> Vec<String> {
    "converge --map perturbed --lambda-s 0.5 --lambda-u 2 --c 0.05 --z 0,0 --eps0 0.05 --kmax 16 --seed 42"
        .split(' ')
        .map(String::from)
        .chain(["--out-dir".into(), out.display().to_string()])
        .collect()
}

#[test]
fn converge_happy_path_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("run1"), dir.path().join("run2"));
    for out in [&a, &b] {
        let status = bin().args(converge_args(out)).status().unwrap();
        assert_eq!(status.code(), Some(0));
    }
    for name in ["leaf.csv", "convergence.json"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap());
    }
    let csv = std::fs::read_to_string(a.join("leaf.csv")).unwrap();
    assert!(csv.starts_with("t,x,y,theta,k\n"));
    assert!(!csv.contains('\r'));
    assert_eq!(csv.lines().count(), 258);
    assert!(csv.lines().nth(1).unwrap().ends_with(",-1"));

    let json = std::fs::read_to_string(a.join("convergence.json")).unwrap();
    for key in ["\"d_k\"", "\"gronwall_bound\"", "\"eps_chosen\"", "\"L_used\"", "\"C_fit\""] {
        assert!(json.contains(key), "missing {key}");
    }
    let reparsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(json_string(&reparsed), json);
}

#[test]
fn bad_decay_names_the_key() {
    let out = bin().args(["budget", "--decay", "1.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("decay"), "{err}");
    assert_eq!(err.trim().lines().count(), 1);
}

#[test]
fn validation_errors_exit_2() {
    for argv in [
        vec!["stable-leaf", "budget", "--map", "lorenz"],
        vec!["stable-leaf", "budget", "--map", "linear", "--c", "1"],
        vec!["stable-leaf", "budget", "--eps0", "-1"],
        vec!["stable-leaf", "budget", "--z", "1;2"],
        vec!["stable-leaf", "budget", "--kmax", "1"],
        vec!["stable-leaf", "budget", "--frobnicate"],
        vec!["stable-leaf", "explode"],
    ] {
        assert_eq!(run_command(argv.clone()), 2, "{argv:?}");
    }
}

#[test]
fn numerical_and_io_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // a regular file where the output directory should be
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let code = run_command(["stable-leaf", "budget", "--kmax", "4", "--samples", "20", "--out-dir", blocker.to_str().unwrap()]);
    assert_eq!(code, 3);

    // tolerance far below round-off: the partial report is still written
    let out = dir.path().join("nc");
    let code = run_command([
        "stable-leaf", "converge", "--map", "henon", "--z", "0.6314,0.1894", "--eps0", "0.05",
        "--kmax", "5", "--samples", "100", "--tol", "1e-300", "--out-dir", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 3);
    assert!(out.join("convergence.json").exists());
    assert!(out.join("leaf.csv").exists());
}

#[test]
fn config_file_maps_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# budget run\nmap = henon\nz = 0.6,0.2\neps0 = 0.05\nkmax = 6\nsamples = 50\n").unwrap();
    let out = dir.path().join("out");
    let code = run_command([
        "stable-leaf", "budget", "--config", cfg.to_str().unwrap(), "--kmax", "5", "--out-dir", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("budget.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["map"], "henon");
    assert_eq!(json["config"]["kmax"], 5);

    std::fs::write(&cfg, "nonsense = 3\n").unwrap();
    assert_eq!(run_command(["stable-leaf", "budget", "--config", cfg.to_str().unwrap()]), 2);
}

#[test]
fn fixedpoint_writes_theorem_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fp");
    let code = run_command([
        "stable-leaf", "fixedpoint", "--map", "henon", "--z", "0.6,0.2", "--eps0", "0.05", "--kmax", "12",
        "--samples", "300", "--out-dir", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("theorem.json")).unwrap()).unwrap();
    for block in ["tangency", "leaf_length", "contraction_rate", "uniqueness"] {
        assert!(json[block].is_object(), "missing {block}");
    }
}
