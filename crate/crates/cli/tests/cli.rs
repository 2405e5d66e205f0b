use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const CONSTANT: &str = r#"
experiments = ["measure", "aux-m", "decompose", "fp"]
seed = 7

[system]
k = 1.0

[potential]
family = "constant"
value = 4.0

[spectral]
h = 0.05
half_width = 8.0
"#;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dunkl-lab")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.toml");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn sandwich_on_the_oscillator_exits_zero() {
    let out = tempfile::tempdir().unwrap();
    let cfg = configs().join("oscillator_k0.toml");
    let o = run(&["--config", cfg.to_str().unwrap(), "--out", out.path().to_str().unwrap(), "sandwich"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(out.path().join("sandwich.csv")).unwrap();
    assert_eq!(table.lines().count(), 25);
    assert!(out.path().join("sandwich.svg").exists());
}

#[test]
fn same_seed_gives_identical_csv() {
    let work = tempfile::tempdir().unwrap();
    let cfg = write_config(work.path(), CONSTANT);
    let a = work.path().join("a");
    let b = work.path().join("b");
    for (dir, extra) in [(&a, None), (&b, Some("--sequential"))] {
        let mut args = vec!["--config", cfg.as_str(), "--out", dir.to_str().unwrap(), "--seed", "11"];
        args.extend(extra);
        args.extend(["report"]);
        let o = run(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (fa, fb) = (csv_files(&a), csv_files(&b));
    assert!(fa.len() >= 10);
    assert_eq!(fa, fb);
}

#[test]
fn failing_invariant_exits_one() {
    let work = tempfile::tempdir().unwrap();
    let cfg = write_config(work.path(), &format!("{CONSTANT}\n[decompose]\nneighbor_limit = 0.5\n"));
    let o = run(&["--config", &cfg, "--out", work.path().to_str().unwrap(), "decompose"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("neighbor side ratios bounded"));
}

#[test]
fn bad_config_exits_two() {
    let work = tempfile::tempdir().unwrap();
    let cfg = write_config(work.path(), "[spectral]\nh = -1.0\n");
    let o = run(&["--config", &cfg, "measure"]);
    assert_eq!(o.status.code(), Some(2));
    let missing = run(&["--config", "/nonexistent/config.toml", "measure"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn describe_lists_columns() {
    let o = run(&["--describe", "sandwich"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("[sandwich]") && text.contains("C1"));
}
