use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

const BIN: &str = env!("CARGO_BIN_EXE_affwords");

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(BIN).arg("--out").arg(out).args(args).output().expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) -> String {
    let o = run(out, args);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

/// Dataset and models built once for the whole file.
fn trained() -> &'static Path {
    static DIR: OnceLock<(tempfile::TempDir, PathBuf)> = OnceLock::new();
    &DIR.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        for cmd in ["simulate", "train-bn", "train-hmm"] {
            ok(&out, &[cmd]);
        }
        (dir, out)
    })
    .1
}

fn scratch(name: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join(name);
    std::fs::create_dir_all(&out).unwrap();
    for f in ["models/network.bn", "models/gestures.bank"] {
        let dst = out.join(f);
        std::fs::create_dir_all(dst.parent().unwrap()).unwrap();
        std::fs::copy(trained().join(f), dst).unwrap();
    }
    (dir, out)
}

#[test]
fn unknown_variable_is_named() {
    let (_d, out) = scratch("unknown");
    let o = run(&out, &["infer", "-e", "Colour=blue", "-i", "ObjVel"]);
    assert!(!o.status.success());
    assert_eq!(o.status.code(), Some(4));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("Colour"), "{err}");
}

#[test]
fn bad_inputs_fail_with_categories() {
    let (_d, out) = scratch("bad");
    assert_eq!(run(&out, &["infer", "-e", "Size", "-i", "ObjVel"]).status.code(), Some(2));
    assert_eq!(run(&out, &["infer", "-e", "Size=huge", "-i", "ObjVel"]).status.code(), Some(4));
    let o = run(&out, &["describe", "-e", "Action=tap", "--soft", "grasp"]);
    assert_eq!(o.status.code(), Some(4));
    let empty = tempfile::tempdir().unwrap();
    let o = run(empty.path(), &["infer", "-i", "ObjVel"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("network.bn"));
    assert!(!Command::new(BIN).arg("fly").output().unwrap().status.success());
}

#[test]
fn describe_prefers_and_for_successful_grasp() {
    let (_d, out) = scratch("describe");
    ok(&out, &["describe", "-e", "Action=grasp,ObjVel=medium"]);
    let csv = std::fs::read_to_string(out.join("nbest.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "rank,score,sentence");
    assert_eq!(rows.len(), 11);
    assert!(rows[1].split(',').nth(2).unwrap().split(' ').any(|w| w == "and"), "{}", rows[1]);

    ok(&out, &["describe", "-e", "Action=grasp", "-e", "ObjVel=slow"]);
    let csv = std::fs::read_to_string(out.join("nbest.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().split(' ').any(|w| w == "but"));
    let words = std::fs::read_to_string(out.join("words.csv")).unwrap();
    assert_eq!(words.lines().next().unwrap(), "word,p_network,p_combined,delta");
    assert_eq!(words.lines().count(), 50);
}

#[test]
fn infer_with_trajectory_and_soft() {
    let (_d, out) = scratch("infer");
    let probe = trained().join("dataset/probe/tap-0000.csv");
    let stdout = ok(&out, &["infer", "-e", "Shape=sphere", "-i", "Action,ObjVel", "--trajectory", probe.to_str().unwrap()]);
    assert!(stdout.contains("normalizer"));
    let csv = std::fs::read_to_string(out.join("infer.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "Action,ObjVel,p");
    assert_eq!(csv.lines().count(), 10);
    let total: f64 = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-6);

    ok(&out, &["infer", "-e", "Shape=box", "-i", "ObjVel", "--soft", "grasp=0.2,tap=0.5,touch=0.3"]);
    ok(&out, &["infer", "-e", "Action=tap,Shape=box", "-i", "ObjVel"]);
}

#[test]
fn anticipate_and_sweep_tables() {
    let (_d, out) = scratch("curves");
    let probe = trained().join("dataset/probe/grasp-0001.csv");
    ok(&out, &["anticipate", "--trajectory", probe.to_str().unwrap(), "-e", "Shape=sphere"]);
    let csv = std::fs::read_to_string(out.join("anticipate.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("t,fraction,loglik:grasp,loglik:tap,loglik:touch,Action=grasp"));
    assert!(header.ends_with("ObjVel=slow,ObjVel=medium,ObjVel=fast"));
    assert_eq!(csv.lines().last().unwrap().split(',').nth(8), Some("grasp"));

    ok(&out, &["sweep", "-e", "Size=small,Shape=sphere,ObjVel=slow", "-t", "tap"]);
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "p,Action=grasp,Action=tap,Action=touch,argmax,normalizer");
    assert_eq!(csv.lines().count(), 101);
    ok(&out, &["sweep", "-e", "Shape=sphere", "-t", "tap", "-i", "ObjVel"]);
}

#[test]
fn config_file_and_seed_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, "version = 1\n[simulate]\ntrials = 200\ntrajectories_per_action = 3\nprobes_per_action = 1\n").unwrap();
    let out = dir.path().join("run");
    let o = Command::new(BIN)
        .args(["--config", cfg.to_str().unwrap(), "--seed", "5", "--out", out.to_str().unwrap(), "simulate"])
        .output()
        .unwrap();
    assert!(o.status.success());
    let trials = std::fs::read_to_string(out.join("dataset/trials.txt")).unwrap();
    assert!(trials.starts_with("# provenance: synthworld seed=5 trials=200"));
    assert_eq!(std::fs::read_dir(out.join("dataset/traj")).unwrap().count(), 9);

    std::fs::write(&cfg, "version = 3\n").unwrap();
    let o = Command::new(BIN).args(["--config", cfg.to_str().unwrap(), "simulate"]).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("version"));
}
