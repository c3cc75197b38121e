use std::fs;
use std::path::Path;

use qhedge::cli::main_with_args;

fn run(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("qhedge").chain(args.iter().copied()))
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn toy_exits_zero_with_a_single_histogram_bin() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["toy", "--out", dir.path().to_str().unwrap()]), 0);
    let hist = fs::read_to_string(dir.path().join("histogram.csv")).unwrap();
    assert!(hist.starts_with("s_lo,s_hi,count\n"));
    let filled: Vec<_> = hist
        .lines()
        .skip(1)
        .filter(|l| !l.ends_with(",0"))
        .collect();
    assert_eq!(filled.len(), 1);
}

#[test]
fn strong_disorder_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"params": {"b": 1.0, "w": 0.6}}"#).unwrap();
    let out = dir.path().join("out");
    let code = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert!(!out.exists());
}

#[test]
fn unknown_config_field_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"params": {"bfield": 1.0}}"#).unwrap();
    assert_eq!(run(&["toy", "--config", cfg.to_str().unwrap()]), 2);
    assert_eq!(run(&["toy", "--config", "/nonexistent/cfg.json"]), 2);
    assert_eq!(run(&["toy", "--phi-steps", "1"]), 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["fly"]), 2);
    assert_eq!(run(&["sweep", "--seed", "x"]), 2);
}

#[test]
fn rerun_from_emitted_config_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"params": {"l": 6.0, "w": 0.02}, "phi_steps": 64, "seed": 5}"#,
    )
    .unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    for cmd in ["sweep", "index", "decouple"] {
        let code = run(&[
            cmd,
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            a.to_str().unwrap(),
        ]);
        assert!(code == 0 || code == 1, "{cmd}: {code}");
        let emitted = a.join("config.json");
        let again = run(&[
            cmd,
            "--config",
            emitted.to_str().unwrap(),
            "--out",
            b.to_str().unwrap(),
        ]);
        assert_eq!(code, again);
        let third = run(&[
            cmd,
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            c.to_str().unwrap(),
        ]);
        assert_eq!(code, third);
        let ra = read_all(&a);
        let rb = read_all(&b);
        let names: Vec<_> = ra.iter().map(|f| f.0.clone()).collect();
        assert_eq!(names, rb.iter().map(|f| f.0.clone()).collect::<Vec<_>>());
        for ((name, x), (_, y)) in ra.iter().zip(&rb) {
            // the echoed config differs only in `out`
            if name != "config.json" {
                assert!(x == y, "{cmd}: {name} differs");
            }
        }
        for ((name, x), (_, y)) in ra.iter().zip(&read_all(&c)) {
            if name != "config.json" {
                assert!(x == y, "{cmd}: {name} differs between reruns");
            }
        }
        for d in [&a, &b, &c] {
            fs::remove_dir_all(d).unwrap();
        }
    }
}
