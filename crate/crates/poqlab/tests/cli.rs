use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn poqlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poqlab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&o.stdout);
    serde_json::from_str(text.lines().last().expect("a JSON line")).expect("valid JSON")
}

#[test]
fn prove_verify_round_trip_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = poqlab(d, &["prove", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(json(&o)["accepted"].as_bool().unwrap());
    let o = poqlab(d, &["verify", "o/proof.txt"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["queries"], 4);

    let text = fs::read_to_string(d.join("o/proof.txt")).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let last = lines.last_mut().unwrap();
    let first = last.chars().next().unwrap().to_digit(5).unwrap();
    let replaced = std::char::from_digit((first + 1) % 5, 5).unwrap();
    last.replace_range(0..1, &replaced.to_string());
    fs::write(d.join("bad.txt"), lines.join("\n") + "\n").unwrap();
    assert_eq!(code(&poqlab(d, &["verify", "bad.txt"])), 1);

    // A proof made under other parameters is an input error.
    assert_eq!(code(&poqlab(d, &["verify", "o/proof.txt", "--seed", "3"])), 0);
    fs::write(d.join("other.toml"), "[protocol]\noracle_seed = 99\n").unwrap();
    assert_eq!(code(&poqlab(d, &["--config", "other.toml", "verify", "o/proof.txt"])), 2);
}

#[test]
fn config_errors_and_caps() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.toml"), "[code]\nq = 5\nm = 3\nk = 1\n").unwrap();
    assert_eq!(code(&poqlab(d, &["--config", "bad.toml", "prove"])), 2);
    fs::write(d.join("garbage.toml"), "this is = = not toml").unwrap();
    assert_eq!(code(&poqlab(d, &["--config", "garbage.toml", "prove"])), 2);
    assert_eq!(code(&poqlab(d, &["--config", "missing.toml", "prove"])), 2);
    assert_eq!(code(&poqlab(d, &["prove", "--y", "10"])), 2);
    assert_eq!(code(&poqlab(d, &["prove", "--cap-amplitudes", "100"])), 3);
    assert_eq!(code(&poqlab(d, &["experiment", "no-such"])), 2);
}

#[test]
fn print_defaults_is_a_valid_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = poqlab(d, &["print-defaults"]);
    assert_eq!(code(&o), 0);
    fs::write(d.join("defaults.toml"), &o.stdout).unwrap();
    let a = poqlab(d, &["--config", "defaults.toml", "experiment", "collision", "--out", "a"]);
    let b = poqlab(d, &["experiment", "collision", "--out", "b"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn experiments_are_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for name in ["fourier-selftest", "decode-bench", "soundness", "collision", "inverter-uniformity"] {
        for out in ["r1", "r2"] {
            let o = poqlab(d, &["experiment", name, "--seed", "5", "--out", out]);
            assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stderr));
        }
        for ext in ["jsonl", "csv"] {
            let a = fs::read(d.join(format!("r1/{name}.{ext}"))).unwrap();
            let b = fs::read(d.join(format!("r2/{name}.{ext}"))).unwrap();
            assert!(!a.is_empty());
            assert_eq!(a, b, "{name}.{ext}");
        }
    }
    for out in ["e1", "e2"] {
        assert_eq!(code(&poqlab(d, &["entropy", "--seed", "5", "--out", out])), 0);
    }
    assert_eq!(fs::read(d.join("e1/entropy.jsonl")).unwrap(), fs::read(d.join("e2/entropy.jsonl")).unwrap());
    assert_eq!(fs::read(d.join("e1/entropy.tsv")).unwrap(), fs::read(d.join("e2/entropy.tsv")).unwrap());
}

#[test]
fn soundness_workers_do_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&poqlab(d, &["experiment", "soundness", "--workers", "1", "--out", "w1"])), 0);
    assert_eq!(code(&poqlab(d, &["experiment", "soundness", "--workers", "3", "--out", "w3"])), 0);
    assert_eq!(fs::read(d.join("w1/soundness.jsonl")).unwrap(), fs::read(d.join("w3/soundness.jsonl")).unwrap());
    let lines = fs::read_to_string(d.join("w1/soundness.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 100);
}

#[test]
fn fourier_selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = poqlab(dir.path(), &["experiment", "fourier-selftest", "--out", "o"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["all_pass"], true);
}

#[test]
fn entropy_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = poqlab(d, &["entropy", "--out", "o"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert!(r["measured_min_entropy"].as_f64().unwrap() >= 1.0);
    assert!(r["exact_support"].as_u64().unwrap() >= 2);
    assert_eq!(r["extractor"]["output"].as_str().unwrap().len(), 1);

    let o = poqlab(d, &["entropy", "--stub", "--out", "s"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["measured_min_entropy"].as_f64().unwrap(), 0.0);
    assert!(r["extractor"].is_null());

    let o = poqlab(d, &["entropy", "--out", "x", "--extractor-seed", "00010000"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["extractor"]["seed"], "00010000");
    assert_eq!(code(&poqlab(d, &["entropy", "--out", "x", "--extractor-seed", "zz"])), 2);
}

#[test]
fn invert_finds_preimage() {
    let dir = tempfile::tempdir().unwrap();
    let o = poqlab(dir.path(), &["invert", "--y", "1010", "--out", "o"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["preimage_found"], true);
}
