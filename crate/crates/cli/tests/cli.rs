use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn npf(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_npf")).args(args).current_dir(cwd).output().expect("spawn npf")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_dataset(dir: &Path) {
    fs::write(dir.join("small.toml"), "clouds_per_class = 12\npoints = 40\n").unwrap();
    let o = npf(&["gen", "circles-lines", "--seed", "3", "--out", "d", "--config", "small.toml"], dir);
    assert!(o.status.success(), "{}", stderr(&o));
}

fn test_auroc(out: &str) -> f64 {
    let line = out.lines().find(|l| l.starts_with("test AUROC")).expect("AUROC line");
    line.rsplit(' ').next().unwrap().parse().unwrap()
}

#[test]
fn gen_writes_manifest_and_is_byte_identical_on_rerun() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    for out in ["a", "b"] {
        let o = npf(&["gen", "circles-lines", "--seed", "7", "--out", out], dir);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let csvs = fs::read_dir(dir.join("a")).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv")).count();
    assert_eq!(csvs, 600);
    for entry in fs::read_dir(dir.join("a")).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(fs::read(dir.join("a").join(&name)).unwrap(), fs::read(dir.join("b").join(&name)).unwrap(), "{name:?}");
    }
    assert!(fs::read_to_string(dir.join("a/manifest.toml")).unwrap().contains("intrinsic_dim = 1"));
}

#[test]
fn usage_errors_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let o = npf(&["gen", "spirals", "--out", "x"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("possible values"));
    let o = npf(&["precompute", "--dataset", "x", "--dim", "zero"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(npf(&["--help"], tmp.path()).status.code(), Some(0));
}

#[test]
fn missing_data_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let o = npf(&["precompute", "--dataset", "nowhere"], tmp.path());
    assert_eq!(o.status.code(), Some(2));

    small_dataset(tmp.path());
    let o = npf(&["train", "--dataset", "d", "--out", "t"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("npf precompute"), "{}", stderr(&o));
}

#[test]
fn precompute_reports_exact_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    small_dataset(dir);
    let o = npf(&["precompute", "--dataset", "d"], dir);
    assert!(o.status.success(), "{}", stderr(&o));
    // 24 clouds of 40 points, 4 bytes per entry, D = 2.
    let expected = 24 * 4 * 40 * 2 * 2;
    assert!(stdout(&o).contains(&format!("gram payload {expected} B, estimate {expected} B")), "{}", stdout(&o));
    let caches = fs::read_dir(dir.join("d/gram")).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "gram")).count();
    assert_eq!(caches, 24);
    let echo = fs::read_to_string(dir.join("d/gram/run.toml")).unwrap();
    assert!(echo.contains("dataset_sha256") && echo.contains("known = 1"), "{echo}");
}

#[test]
fn train_then_eval_reproduces_auroc_and_readouts_differ() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    small_dataset(dir);
    assert!(npf(&["precompute", "--dataset", "d"], dir).status.success());

    let common = ["--dataset", "d", "--epochs", "15", "--hidden", "8", "--ell", "3", "--lr", "0.01"];
    let mut tri = vec!["train", "--out", "tri", "--readout", "tri"];
    tri.extend(common);
    let o = npf(&tri, dir);
    assert!(o.status.success(), "{}", stderr(&o));
    let auc = test_auroc(&stdout(&o));

    let o = npf(&["eval", "--dataset", "d", "--checkpoint", "tri/checkpoint.npfm", "--out", "ev"], dir);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(test_auroc(&stdout(&o)), auc);
    assert_eq!(fs::read(dir.join("tri/test_scores.csv")).unwrap(), fs::read(dir.join("ev/eval_scores.csv")).unwrap());

    let mut diag = vec!["train", "--out", "diag", "--readout", "diag"];
    diag.extend(common);
    assert!(npf(&diag, dir).status.success());
    let h_tri = fs::read_to_string(dir.join("tri/history.csv")).unwrap();
    let h_diag = fs::read_to_string(dir.join("diag/history.csv")).unwrap();
    assert_eq!(h_tri.lines().count(), 16);
    assert_ne!(h_tri, h_diag);
    assert!(fs::read_to_string(dir.join("diag/run.toml")).unwrap().contains("readout = \"diag\""));

    let mut again = vec!["train", "--out", "tri2", "--readout", "tri"];
    again.extend(common);
    assert!(npf(&again, dir).status.success());
    for f in ["checkpoint.npfm", "history.csv", "test_scores.csv", "metrics.toml"] {
        assert_eq!(fs::read(dir.join("tri").join(f)).unwrap(), fs::read(dir.join("tri2").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn density_corrected_training_uses_true_density() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let o = npf(&["gen", "density-shift", "--kappas", "0,6", "--points", "48", "--clouds", "10", "--out", "d"], dir);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(npf(&["precompute", "--dataset", "d", "--k", "1"], dir).status.success());
    let o = npf(
        &["train", "--dataset", "d", "--out", "t", "--epochs", "3", "--hidden", "4", "--ell", "2", "--measure", "density-corrected"],
        dir,
    );
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn consistency_prints_verdict_and_warns_on_bad_theta() {
    let tmp = tempfile::tempdir().unwrap();
    let o = npf(&["consistency", "--manifold", "circle", "--sizes", "100,200", "--seeds", "2", "--theta", "0.9", "--out", "c"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("outside") && err.contains("seed"), "{err}");
    assert!(stdout(&o).contains("PASS") || stdout(&o).contains("FAIL"));
    assert!(fs::read_to_string(tmp.path().join("c/consistency.csv")).unwrap().starts_with("manifold,n,"));

    let o = npf(&["consistency", "--manifold", "sphere", "--k", "2", "--sizes", "150,300", "--seeds", "3"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(npf(&["consistency", "--manifold", "klein"], tmp.path()).status.code(), Some(1));
}

#[test]
fn density_check_flags_single_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let o = npf(&["density-check", "--kappas", "0,8", "--n", "128", "--seeds", "1", "--out", "dc"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("single seed"));
    assert_eq!(stdout(&o).lines().count(), 3);
    assert!(tmp.path().join("dc/density_summary.csv").is_file());
}

#[test]
fn mem_prints_formula() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| stdout(&npf(args, tmp.path()));
    assert!(run(&["mem", "--m", "256", "--dim", "12", "--k", "2"]).contains("4,460,544 B ≈ 4.25 MiB"));
    assert_eq!(run(&["mem", "--m", "128", "--dim", "2", "--k", "2"]).trim(), "4·128·1² = 512 B");
    assert!(run(&["mem", "--m", "256", "--dim", "12", "--k", "3"]).starts_with("4·256·220² = 49,561,600 B"));
    assert_eq!(npf(&["mem", "--m", "10", "--dim", "2", "--k", "3"], tmp.path()).status.code(), Some(1));
}
