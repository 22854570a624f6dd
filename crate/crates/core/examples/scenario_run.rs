//! Runs a scenario from TOML text: simulate, price and a sigma sweep, writing
//! into a directory given as the first argument (default `out/example`).

use std::path::PathBuf;

use vgip::scenario::{cmd_price, cmd_simulate, cmd_sweep, RunOptions, ScenarioConfig, SweepAxis};

const SCENARIO: &str = r#"
[model]
sigma = 1.0
m = 100.0
r = 0.0
T = 1.0

[grid]
n_steps = 100

[factor]
components = [
  { kind = "atom", x = 0.0, weight = 0.4 },
  { kind = "atom", x = 1.0, weight = 0.6 },
]

[payoff]
kind = "identity"

[simulation]
n_paths = 5
seed = 42

[output]
directory = "out/example"
formats = ["csv", "json"]
"#;

fn main() -> vgip::Result<()> {
    let cfg = ScenarioConfig::from_toml_str(SCENARIO)?;
    let opts = RunOptions {
        out_dir: std::env::args().nth(1).map(PathBuf::from),
        ..RunOptions::default()
    };
    for out in [
        cmd_simulate(&cfg, &opts)?,
        cmd_price(&cfg, &opts)?,
        cmd_sweep(&cfg, SweepAxis::Sigma, &[0.5, 1.0, 2.0], &opts)?,
    ] {
        for f in &out.files {
            println!("wrote {}", f.display());
        }
    }
    Ok(())
}
