//! End-to-end runs of the `vgip` binary: determinism, output-directory
//! precedence and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SCENARIO: &str = r#"
[model]
sigma = 2.0
m = 50.0
r = 0.01
T = 1.0

[grid]
n_steps = 40

[[factor.components]]
weight = 0.3
kind = "normal"
mu = -1.0
nu = 0.5

[[factor.components]]
weight = 0.7
kind = "exponential"
lambda = 2.0

[payoff]
kind = "digital"
strike = 0.0

[simulation]
n_paths = 64
seed = 17

[output]
directory = "unused"
formats = ["csv", "json"]
"#;

fn vgip(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_vgip"));
    cmd.args(args).env_remove("VGIP_OUT_DIR");
    if let Some(d) = env_out {
        cmd.env("VGIP_OUT_DIR", d);
    }
    cmd.output().expect("binary runs")
}

fn scenario(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("scenario.toml");
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_and_price_are_byte_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario(tmp.path(), SCENARIO);
    for cmd in ["simulate", "price"] {
        let mut outputs = Vec::new();
        for threads in ["1", "2", "7"] {
            let out = tmp.path().join(format!("{cmd}-{threads}"));
            let o = vgip(
                &[cmd, "--config", s(&cfg), "--threads", threads, "--out", s(&out)],
                None,
            );
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            let file = if cmd == "simulate" { "paths.csv" } else { "prices.csv" };
            outputs.push(fs::read(out.join(file)).unwrap());
        }
        assert!(!outputs[0].is_empty());
        assert!(
            outputs.windows(2).all(|w| w[0] == w[1]),
            "{cmd} differs across thread counts"
        );
    }
}

#[test]
fn seed_flag_overrides_scenario_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario(tmp.path(), SCENARIO);
    let run = |seed: &str, name: &str| {
        let out = tmp.path().join(name);
        assert!(vgip(
            &["simulate", "--config", s(&cfg), "--seed", seed, "--out", s(&out)],
            None
        )
        .status
        .success());
        fs::read(out.join("paths.csv")).unwrap()
    };
    assert_eq!(run("17", "a"), run("17", "b"));
    assert_ne!(run("17", "a"), run("18", "c"));
}

#[test]
fn env_var_sets_output_directory_and_flag_wins() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario(tmp.path(), SCENARIO);
    let env_dir = tmp.path().join("from_env");
    assert!(vgip(&["simulate", "--config", s(&cfg)], Some(&env_dir))
        .status
        .success());
    assert!(env_dir.join("paths.csv").exists());
    assert!(env_dir.join("manifest.json").exists());
    let flag_dir = tmp.path().join("from_flag");
    let other_env = tmp.path().join("ignored");
    assert!(vgip(
        &["simulate", "--config", s(&cfg), "--out", s(&flag_dir)],
        Some(&other_env)
    )
    .status
    .success());
    assert!(flag_dir.join("paths.csv").exists());
    assert!(!other_env.exists());
}

#[test]
fn single_value_sweep_reproduces_price() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario(tmp.path(), SCENARIO);
    let (p, w) = (tmp.path().join("p"), tmp.path().join("w"));
    assert!(vgip(&["price", "--config", s(&cfg), "--out", s(&p)], None)
        .status
        .success());
    let o = vgip(
        &[
            "sweep",
            "--config",
            s(&cfg),
            "--axis",
            "sigma",
            "--values",
            "2.0",
            "--out",
            s(&w),
        ],
        None,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let price = fs::read_to_string(p.join("prices.csv")).unwrap();
    let sweep = fs::read_to_string(w.join("sweep.csv")).unwrap();
    let stripped: Vec<String> = sweep
        .lines()
        .map(|l| l.split_once(',').unwrap().1.to_string())
        .collect();
    assert_eq!(stripped, price.lines().map(String::from).collect::<Vec<_>>());
}

#[test]
fn closed_form_and_forced_kernel_agree_through_cli() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SCENARIO.replace(
        "[[factor.components]]\nweight = 0.3\nkind = \"normal\"\nmu = -1.0\nnu = 0.5\n\n[[factor.components]]\nweight = 0.7\nkind = \"exponential\"\nlambda = 2.0\n\n[payoff]\nkind = \"digital\"\nstrike = 0.0",
        "[[factor.components]]\nweight = 1.0\nkind = \"normal\"\nmu = 0.0\nnu = 1.0\n\n[payoff]\nkind = \"exponential_scale\"\nq = 1.0",
    );
    assert_ne!(text, SCENARIO);
    let cfg = scenario(tmp.path(), &text);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let oa = vgip(&["price", "--config", s(&cfg), "--out", s(&a)], None);
    assert!(String::from_utf8_lossy(&oa.stdout).contains("pricer: lognormal"));
    let ob = vgip(
        &["price", "--config", s(&cfg), "--force-general-kernel", "--out", s(&b)],
        None,
    );
    assert!(String::from_utf8_lossy(&ob.stdout).contains("pricer: general"));
    let read = |d: &Path| -> Vec<f64> {
        let mut r = csv::Reader::from_path(d.join("prices.csv")).unwrap();
        r.records().map(|rec| rec.unwrap()[6].parse().unwrap()).collect()
    };
    for (x, y) in read(&a).iter().zip(read(&b)) {
        assert!((x - y).abs() <= 1e-10 * y.abs().max(1.0), "{x} vs {y}");
    }
}

#[test]
fn usage_and_config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let good = scenario(tmp.path(), SCENARIO);
    let bad_sigma = tmp.path().join("bad.toml");
    fs::write(&bad_sigma, SCENARIO.replace("sigma = 2.0", "sigma = -2.0")).unwrap();
    let unknown_field = tmp.path().join("unknown.toml");
    fs::write(&unknown_field, SCENARIO.replace("m = 50.0", "m = 50.0\nmu = 1.0")).unwrap();
    let missing = tmp.path().join("missing.toml");
    let cases: Vec<Vec<&str>> = vec![
        vec!["price", "--config", s(&bad_sigma)],
        vec!["price", "--config", s(&unknown_field)],
        vec!["simulate", "--config", s(&missing)],
        vec!["simulate", "--config", s(&good), "--threads", "0"],
        vec!["sweep", "--config", s(&good), "--axis", "kappa", "--values", "1"],
        vec!["verify", "--k-sigma", "-1"],
        vec!["verify", "--level", "slow"],
        vec!["simulate"],
        vec!["bogus"],
    ];
    for args in cases {
        let o = vgip(&args, None);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn config_error_names_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, SCENARIO.replace("n_paths = 64", "n_paths = 0")).unwrap();
    let o = vgip(&["simulate", "--config", s(&cfg)], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("simulation.n_paths"));
}
