//! End-to-end checks of the command-line surface: flag handling, config
//! precedence, file formats and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_xalab"))
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("xalab-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process terminated by signal")
}

fn read_kv(path: &Path) -> Vec<(String, String)> {
    let text = std::fs::read_to_string(path).unwrap();
    xalab_core::report::parse_key_values(&text).unwrap()
}

fn kv<'a>(pairs: &'a [(String, String)], key: &str) -> &'a str {
    xalab_core::report::lookup(pairs, key).unwrap_or_else(|| panic!("missing key {key}"))
}

#[test]
fn generate_writes_positive_taus_and_manifest() {
    let dir = tmpdir("gen");
    let out_file = dir.join("pois.txt");
    let out = bin()
        .args([
            "generate", "--kind", "poisson", "--lambda", "1", "--n", "3000", "--seed", "7",
        ])
        .arg("--out")
        .arg(&out_file)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
    let body = std::fs::read_to_string(&out_file).unwrap();
    let values: Vec<f64> = body
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(values.len(), 3000);
    assert!(values.iter().all(|v| *v > 0.0));

    let manifest = read_kv(&dir.join("pois.manifest.txt"));
    assert_eq!(kv(&manifest, "command"), "generate");
    assert_eq!(kv(&manifest, "seed"), "7");
    assert_eq!(kv(&manifest, "spec"), "poisson:lambda=1,n=3000");
}

#[test]
fn generate_is_deterministic_under_seed() {
    let dir = tmpdir("gen-det");
    let (a, b) = (dir.join("a.txt"), dir.join("b.txt"));
    for f in [&a, &b] {
        let out = bin()
            .args([
                "generate", "--kind", "exp_ar1", "--beta", "0.5", "--n", "500", "--seed", "9",
            ])
            .arg("--out")
            .arg(f)
            .output()
            .unwrap();
        assert_eq!(exit_code(&out), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn generate_rejects_nonstationary_ar() {
    let dir = tmpdir("gen-bad");
    let out = bin()
        .args([
            "generate", "--kind", "abs_ar1", "--beta", "1.1", "--n", "10",
        ])
        .arg("--out")
        .arg(dir.join("x.txt"))
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("non-stationary"), "stderr: {err}");
}

#[test]
fn generate_hawkes_count_near_stationary_rate() {
    // lambda_bar T = (beta/(beta-alpha)) lambda0 T = 6000 expected events.
    let dir = tmpdir("gen-hawkes");
    let out_file = dir.join("hawkes.txt");
    let out = bin()
        .args([
            "generate",
            "--kind",
            "hawkes",
            "--lambda0",
            "0.75",
            "--alpha",
            "0.2",
            "--beta",
            "0.4",
            "--horizon",
            "4000",
            "--seed",
            "1",
        ])
        .arg("--out")
        .arg(&out_file)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
    let count = std::fs::read_to_string(&out_file)
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .count();
    assert!(
        (count as f64 - 6000.0).abs() < 300.0,
        "event count {count} not within 5% of 6000"
    );
}

#[test]
fn xa_missing_input_file_exits_2() {
    let dir = tmpdir("xa-missing");
    let out = bin()
        .args(["xa", "--input", "/nonexistent/file.txt"])
        .arg("--out-dir")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn xa_requires_a_source() {
    let dir = tmpdir("xa-nosource");
    let out = bin()
        .arg("xa")
        .arg("--out-dir")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--spec or --input"));
}

#[test]
fn xa_writes_all_output_files() {
    let dir = tmpdir("xa-files");
    let out_dir = dir.join("out");
    let out = bin()
        .args([
            "xa",
            "--spec",
            "poisson:lambda=1,n=600",
            "--N",
            "10",
            "--Ta",
            "4",
            "--ta-min",
            "1",
            "--ta-max",
            "8",
            "--seed",
            "5",
            "--plot",
        ])
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(
        exit_code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in [
        "results.csv",
        "ages.csv",
        "summary.txt",
        "manifest.txt",
        "plot.svg",
    ] {
        assert!(out_dir.join(f).is_file(), "missing {f}");
    }
    let results = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 1 + 4 * 10);
    let summary = read_kv(&out_dir.join("summary.txt"));
    assert_eq!(kv(&summary, "alpha"), "0.05");
    assert_eq!(kv(&summary, "reject_renewal"), "false");
    // Manifest digests match the files on disk.
    let manifest = read_kv(&out_dir.join("manifest.txt"));
    let digest = {
        use sha2::{Digest, Sha256};
        let d = Sha256::digest(results.as_bytes());
        d.iter().map(|b| format!("{b:02x}")).collect::<String>()
    };
    assert_eq!(kv(&manifest, "results_digest"), digest);
}

#[test]
fn flag_config_default_precedence() {
    // Three layers: the config file sets alpha and Ta; the flag overrides
    // alpha; trials stay at the built-in default.
    let dir = tmpdir("precedence");
    let config_path = dir.join("run.conf");
    std::fs::write(&config_path, "alpha = 0.2\nTa = 3\nseed = 99\n").unwrap();
    let out_dir = dir.join("out");
    let out = bin()
        .args(["xa", "--spec", "poisson:lambda=1,n=600", "--N", "8"])
        .arg("--config")
        .arg(&config_path)
        .args(["--alpha", "0.1", "--ta-min", "1", "--ta-max", "6"])
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(
        exit_code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let manifest = read_kv(&out_dir.join("manifest.txt"));
    assert_eq!(
        kv(&manifest, "config.alpha"),
        "0.1",
        "flag must beat config"
    );
    assert_eq!(kv(&manifest, "config.Ta"), "3", "config must beat default");
    assert_eq!(kv(&manifest, "config.seed"), "99", "config seed honored");
    assert_eq!(kv(&manifest, "config.N"), "8");
}

#[test]
fn env_seed_honored_but_flag_wins() {
    let dir = tmpdir("env-seed");
    let out_dir_env = dir.join("env");
    let out = bin()
        .args([
            "xa",
            "--spec",
            "poisson:lambda=1,n=600",
            "--N",
            "6",
            "--Ta",
            "3",
        ])
        .args(["--ta-min", "1", "--ta-max", "6"])
        .env("XALAB_SEED", "1234")
        .arg("--out-dir")
        .arg(&out_dir_env)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
    let manifest = read_kv(&out_dir_env.join("manifest.txt"));
    assert_eq!(kv(&manifest, "config.seed"), "1234");

    let out_dir_flag = dir.join("flag");
    let out = bin()
        .args([
            "xa",
            "--spec",
            "poisson:lambda=1,n=600",
            "--N",
            "6",
            "--Ta",
            "3",
        ])
        .args(["--ta-min", "1", "--ta-max", "6", "--seed", "7"])
        .env("XALAB_SEED", "1234")
        .arg("--out-dir")
        .arg(&out_dir_flag)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
    let manifest = read_kv(&out_dir_flag.join("manifest.txt"));
    assert_eq!(kv(&manifest, "config.seed"), "7");
}

#[test]
fn xa_single_window_too_large_exits_2() {
    let dir = tmpdir("xs-tw");
    let input = dir.join("seq.txt");
    let out = bin()
        .args([
            "generate", "--kind", "poisson", "--lambda", "1", "--n", "800", "--seed", "3",
        ])
        .arg("--out")
        .arg(&input)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
    let out = bin()
        .arg("xa-single")
        .arg("--input")
        .arg(&input)
        .args(["--tw", "500"])
        .arg("--out-dir")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("too short"));
}

#[test]
fn xa_accepts_timestamp_inputs() {
    let dir = tmpdir("xa-ts");
    // Write two small timestamp files and run the recorded-samples path.
    for (i, seed) in [(0, 11u64), (1, 12), (2, 13), (3, 14)] {
        let taus: Vec<String> = {
            use rand::Rng;
            let mut r = xalab_core::RngHandle::new(seed).rng();
            let mut t = 0.0;
            (0..400)
                .map(|_| {
                    let u: f64 = r.random();
                    t += -(1.0f64 - u).ln();
                    format!("{t}")
                })
                .collect()
        };
        std::fs::write(dir.join(format!("r{i}.txt")), taus.join("\n") + "\n").unwrap();
    }
    let out = bin()
        .args(["xa", "--input-mode", "timestamps", "--N", "2", "--Ta", "3"])
        .args(["--ta-min", "1", "--ta-max", "6", "--seed", "2"])
        .arg("--input")
        .args((0..4).map(|i| dir.join(format!("r{i}.txt"))))
        .arg("--out-dir")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(
        exit_code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn power_table_monotone_and_reference_point() {
    let out = bin()
        .args(["power", "--mu1", "0.3", "--Ta", "100", "--sweep", "n"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let powers: Vec<f64> = stdout
        .lines()
        .skip(1)
        .map(|l| l.split(',').next_back().unwrap().parse().unwrap())
        .collect();
    assert!(powers.len() > 10);
    for w in powers.windows(2) {
        assert!(w[1] >= w[0] - 1e-12, "power table not monotone");
    }

    // mu1 at the null mean: power equals alpha.
    let mu0 = xalab_core::meta::GeoNull::new(100).unwrap().mu0();
    let out = bin()
        .args([
            "power",
            "--mu1",
            &format!("{mu0}"),
            "--N",
            "100",
            "--Ta",
            "50",
        ])
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    let p: f64 = stdout
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .next_back()
        .unwrap()
        .parse()
        .unwrap();
    assert!((p - 0.05).abs() < 1e-9, "power at the null mean was {p}");
}
