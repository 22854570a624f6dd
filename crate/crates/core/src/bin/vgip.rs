//! Command-line front end. Exit status: 0 on success, 1 when a check fails
//! or a run errors, 2 on a usage or configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vgip::error::Error;
use vgip::scenario::{
    cmd_price, cmd_simulate, cmd_sweep, resolve_out_dir, RunOptions, ScenarioConfig, SweepAxis, OUT_DIR_ENV,
};
use vgip::verify::{cmd_verify, VerifyLevel, VerifyOptions, DEFAULT_VERIFY_SEED};

#[derive(Parser)]
#[command(name = "vgip", version, about = "Variance-gamma information-based pricing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Master seed; overrides the scenario file.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory; overrides the environment and the scenario file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate paths and write paths.csv.
    Simulate(ScenarioArgs),
    /// Simulate and price; write prices.csv.
    Price {
        #[command(flatten)]
        args: ScenarioArgs,
        /// Price with the general kernel even when a closed form applies.
        #[arg(long)]
        force_general_kernel: bool,
    },
    /// Price once per value of a model parameter; write sweep.csv.
    Sweep {
        #[command(flatten)]
        args: ScenarioArgs,
        /// sigma, m or r.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Price with the general kernel even when a closed form applies.
        #[arg(long)]
        force_general_kernel: bool,
    },
    /// Run the verification suite.
    Verify {
        /// quick or full.
        #[arg(long, default_value = "quick")]
        level: String,
        /// Acceptance band in standard errors.
        #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
        k_sigma: f64,
        #[command(flatten)]
        common: Common,
    },
}

fn options(common: &Common, force_general_kernel: bool) -> RunOptions {
    RunOptions {
        seed: common.seed,
        threads: common.threads,
        force_general_kernel,
        out_dir: common.out.clone(),
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    let report_files = |out: vgip::scenario::CommandOutput| {
        if let Some(p) = &out.pricer {
            println!("pricer: {p}");
        }
        for f in &out.files {
            println!("wrote {}", f.display());
        }
        true
    };
    match cli.command {
        Command::Simulate(a) => {
            let cfg = ScenarioConfig::load(&a.config)?;
            Ok(report_files(cmd_simulate(&cfg, &options(&a.common, false))?))
        }
        Command::Price {
            args,
            force_general_kernel,
        } => {
            let cfg = ScenarioConfig::load(&args.config)?;
            Ok(report_files(cmd_price(
                &cfg,
                &options(&args.common, force_general_kernel),
            )?))
        }
        Command::Sweep {
            args,
            axis,
            values,
            force_general_kernel,
        } => {
            let axis: SweepAxis = axis.parse()?;
            let cfg = ScenarioConfig::load(&args.config)?;
            Ok(report_files(cmd_sweep(
                &cfg,
                axis,
                &values,
                &options(&args.common, force_general_kernel),
            )?))
        }
        Command::Verify { level, k_sigma, common } => {
            let opts = VerifyOptions {
                level: level.parse::<VerifyLevel>()?,
                seed: common.seed.unwrap_or(DEFAULT_VERIFY_SEED),
                k_sigma,
                threads: common.threads,
            };
            let report = cmd_verify(&opts)?;
            println!("{report}");
            let env = std::env::var(OUT_DIR_ENV).ok();
            if common.out.is_some() || env.as_deref().is_some_and(|e| !e.is_empty()) {
                let dir = resolve_out_dir(common.out.as_deref(), env.as_deref(), "".as_ref());
                std::fs::create_dir_all(&dir)?;
                let path = dir.join("verify_report.json");
                report.write_json(&path)?;
                println!("wrote {}", path.display());
            }
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ (Error::Config { .. } | Error::Usage(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
