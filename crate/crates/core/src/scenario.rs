//! Scenario files and the `simulate`, `price` and `sweep` commands.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! [model]
//! sigma = 1.0
//! m = 100.0
//! r = 0.0
//! T = 1.0
//!
//! [grid]
//! n_steps = 500
//!
//! [[factor.components]]
//! weight = 0.4
//! kind = "atom"
//! x = 0.0
//!
//! [[factor.components]]
//! weight = 0.6
//! kind = "atom"
//! x = 1.0
//!
//! [payoff]
//! kind = "identity"
//!
//! [simulation]
//! n_paths = 15
//! seed = 42
//!
//! [output]
//! directory = "out/bond"
//! formats = ["csv"]
//! ```
//!
//! Every command writes into one output directory. Its location is, in
//! order of precedence, the `--out` flag, the [`OUT_DIR_ENV`] variable, and
//! `output.directory`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::Pricer;
use crate::distribution::MarketFactorDistribution;
use crate::error::{Error, Result};
use crate::path_sim::{fmt_f64, simulate_bundle, ModelParams, PathBundle, TimeGrid};
use crate::pricing_kernel::{self, price_path_with, MarketState, Payoff, PosteriorSummary};
use crate::stats_validation::decimated_nodes;

/// Environment variable that overrides `output.directory`.
pub const OUT_DIR_ENV: &str = "VGIP_OUT_DIR";
pub const PATHS_FILE: &str = "paths.csv";
pub const PRICES_FILE: &str = "prices.csv";
pub const POSTERIORS_FILE: &str = "posteriors.json";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const PRICE_CSV_HEADER: [&str; 7] = ["path_id", "k", "t", "bridge", "info", "x_draw", "price"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub n_paths: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            formats: default_formats(),
        }
    }
}

/// Payoff as written in a scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PayoffSpec {
    Identity,
    ExponentialScale { q: f64 },
    Digital { strike: f64 },
}

impl PayoffSpec {
    pub fn payoff(&self) -> Payoff {
        match *self {
            PayoffSpec::Identity => Payoff::Identity,
            PayoffSpec::ExponentialScale { q } => Payoff::ExponentialScale { q },
            PayoffSpec::Digital { strike } => Payoff::Digital { strike },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelParams,
    pub grid: GridConfig,
    pub factor: MarketFactorDistribution,
    pub payoff: PayoffSpec,
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::config("<scenario>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<scenario>", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.grid.n_steps < 1 {
            return Err(Error::config("grid.n_steps", "must be at least 1"));
        }
        if self.simulation.n_paths < 1 {
            return Err(Error::config("simulation.n_paths", "must be at least 1"));
        }
        self.factor
            .validate()
            .map_err(|e| Error::config("factor", e.to_string()))?;
        match self.payoff {
            PayoffSpec::ExponentialScale { q } if !q.is_finite() => {
                return Err(Error::config("payoff.q", "must be finite"));
            }
            PayoffSpec::Digital { strike } if !strike.is_finite() => {
                return Err(Error::config("payoff.strike", "must be finite"));
            }
            _ => {}
        }
        if self.output.formats.is_empty() {
            return Err(Error::config("output.formats", "must list at least one of csv, json"));
        }
        Ok(())
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.model.horizon, self.grid.n_steps)
    }

    fn wants(&self, f: OutputFormat) -> bool {
        self.output.formats.contains(&f)
    }
}

/// Command-line overrides shared by every command.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    /// Worker threads; `None` uses every available core.
    pub threads: Option<usize>,
    pub force_general_kernel: bool,
    pub out_dir: Option<PathBuf>,
}

/// Output directory by precedence: flag, then environment, then config.
pub fn resolve_out_dir(flag: Option<&Path>, env: Option<&str>, config: &Path) -> PathBuf {
    match (flag, env) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(e)) if !e.is_empty() => PathBuf::from(e),
        _ => config.to_path_buf(),
    }
}

/// Runs `f` on a dedicated pool with the requested number of threads.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == Some(0) {
        return Err(Error::config("--threads", "must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Simulation(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Files written by one command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommandOutput {
    pub directory: PathBuf,
    pub files: Vec<PathBuf>,
    pub pricer: Option<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    seed: u64,
    pricer: Option<&'a str>,
    files: Vec<String>,
    scenario: &'a ScenarioConfig,
}

fn prepare_dir(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<PathBuf> {
    let env = std::env::var(OUT_DIR_ENV).ok();
    let dir = resolve_out_dir(opts.out_dir.as_deref(), env.as_deref(), &cfg.output.directory);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn effective(cfg: &ScenarioConfig, opts: &RunOptions) -> ScenarioConfig {
    let mut cfg = cfg.clone();
    if let Some(seed) = opts.seed {
        cfg.simulation.seed = seed;
    }
    cfg
}

fn finish(
    dir: PathBuf,
    command: &str,
    cfg: &ScenarioConfig,
    pricer: Option<&str>,
    mut files: Vec<PathBuf>,
) -> Result<CommandOutput> {
    if cfg.wants(OutputFormat::Json) {
        let manifest = Manifest {
            command,
            seed: cfg.simulation.seed,
            pricer,
            files: files.iter().map(|f| f.display().to_string()).collect(),
            scenario: cfg,
        };
        let path = dir.join(MANIFEST_FILE);
        let mut w = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut w, &manifest)?;
        w.flush()?;
        files.push(path);
    }
    Ok(CommandOutput {
        directory: dir,
        files,
        pricer: pricer.map(str::to_owned),
    })
}

fn simulate_cfg(cfg: &ScenarioConfig) -> Result<PathBundle> {
    simulate_bundle(
        &cfg.time_grid()?,
        &cfg.model,
        &cfg.factor,
        cfg.simulation.seed,
        cfg.simulation.n_paths,
    )
}

/// Simulates the scenario's paths and writes `paths.csv`.
pub fn cmd_simulate(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<CommandOutput> {
    let cfg = effective(cfg, opts);
    cfg.validate()?;
    let bundle = with_threads(opts.threads, || simulate_cfg(&cfg))??;
    let dir = prepare_dir(&cfg, opts)?;
    let path = dir.join(PATHS_FILE);
    bundle.write_csv(BufWriter::new(File::create(&path)?))?;
    finish(dir, "simulate", &cfg, None, vec![path])
}

/// Price trajectories of a bundle: `out[i][k]` is the price on path `i` at
/// node `k`, with the realised payoff at the last node.
pub fn price_bundle(bundle: &PathBundle, payoff: &Payoff, pricer: &Pricer) -> Result<Vec<Vec<f64>>> {
    let params = bundle.params;
    bundle
        .paths
        .par_iter()
        .map(|p| {
            let terminal = payoff.eval(p.x_draw, params.r, params.horizon);
            price_path_with(p, &bundle.grid, &params, terminal, |s| pricer.price(s))
        })
        .collect()
}

fn write_price_rows<W: Write>(
    wtr: &mut csv::Writer<W>,
    key: Option<f64>,
    bundle: &PathBundle,
    prices: &[Vec<f64>],
) -> Result<()> {
    let times = bundle.grid.times();
    for (id, (p, row)) in bundle.paths.iter().zip(prices).enumerate() {
        for (k, t) in times.iter().enumerate() {
            let mut rec = Vec::with_capacity(8);
            if let Some(v) = key {
                rec.push(fmt_f64(v));
            }
            rec.extend([
                id.to_string(),
                k.to_string(),
                fmt_f64(*t),
                fmt_f64(p.bridge[k]),
                fmt_f64(p.info[k]),
                fmt_f64(p.x_draw),
                fmt_f64(row[k]),
            ]);
            wtr.write_record(&rec)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct PosteriorRecord {
    path_id: usize,
    k: usize,
    t: f64,
    posterior: PosteriorSummary,
}

fn posterior_records(bundle: &PathBundle, dist: &MarketFactorDistribution) -> Result<Vec<PosteriorRecord>> {
    let n = bundle.grid.n_steps();
    let nodes: Vec<usize> = decimated_nodes(n).into_iter().filter(|&k| k < n).collect();
    let mut out = Vec::new();
    for (id, p) in bundle.paths.iter().enumerate() {
        for &k in &nodes {
            let t = bundle.grid.time(k);
            let state = MarketState::at(&bundle.params, t, p.info[k], p.bridge[k])?;
            out.push(PosteriorRecord {
                path_id: id,
                k,
                t,
                posterior: pricing_kernel::posterior(dist, &state)?.summary(),
            });
        }
    }
    Ok(out)
}

/// Simulates and prices the scenario; writes `prices.csv` and, with the
/// json format, posterior summaries on every tenth node.
pub fn cmd_price(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<CommandOutput> {
    let cfg = effective(cfg, opts);
    cfg.validate()?;
    let payoff = cfg.payoff.payoff();
    let pricer = Pricer::select(&cfg.factor, &payoff, opts.force_general_kernel);
    let (bundle, prices) = with_threads(opts.threads, || -> Result<_> {
        let bundle = simulate_cfg(&cfg)?;
        let prices = price_bundle(&bundle, &payoff, &pricer)?;
        Ok((bundle, prices))
    })??;
    let dir = prepare_dir(&cfg, opts)?;
    let mut files = Vec::new();
    if cfg.wants(OutputFormat::Csv) {
        let path = dir.join(PRICES_FILE);
        let mut wtr = csv::Writer::from_writer(BufWriter::new(File::create(&path)?));
        wtr.write_record(PRICE_CSV_HEADER)?;
        write_price_rows(&mut wtr, None, &bundle, &prices)?;
        wtr.flush()?;
        files.push(path);
    }
    if cfg.wants(OutputFormat::Json) {
        let records = posterior_records(&bundle, &cfg.factor)?;
        let path = dir.join(POSTERIORS_FILE);
        let mut w = BufWriter::new(File::create(&path)?);
        serde_json::to_writer(&mut w, &records)?;
        w.flush()?;
        files.push(path);
    }
    finish(dir, "price", &cfg, Some(pricer.name()), files)
}

/// Model parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Sigma,
    M,
    R,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Sigma => "sigma",
            SweepAxis::M => "m",
            SweepAxis::R => "r",
        }
    }

    fn apply(&self, model: &mut ModelParams, v: f64) {
        match self {
            SweepAxis::Sigma => model.sigma = v,
            SweepAxis::M => model.m = v,
            SweepAxis::R => model.r = v,
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigma" => Ok(SweepAxis::Sigma),
            "m" => Ok(SweepAxis::M),
            "r" => Ok(SweepAxis::R),
            other => Err(Error::Usage(format!(
                "unknown sweep axis `{other}`; expected sigma, m or r"
            ))),
        }
    }
}

/// One priced run per value with a shared seed, concatenated into
/// `sweep.csv` whose first column holds the swept value.
pub fn cmd_sweep(cfg: &ScenarioConfig, axis: SweepAxis, values: &[f64], opts: &RunOptions) -> Result<CommandOutput> {
    if values.is_empty() {
        return Err(Error::Usage("sweep needs at least one value".into()));
    }
    let base = effective(cfg, opts);
    let runs: Vec<ScenarioConfig> = values
        .iter()
        .map(|&v| {
            let mut c = base.clone();
            axis.apply(&mut c.model, v);
            c.validate().map(|_| c)
        })
        .collect::<Result<_>>()?;
    let payoff = base.payoff.payoff();
    let pricer = Pricer::select(&base.factor, &payoff, opts.force_general_kernel);
    let results = with_threads(opts.threads, || {
        runs.iter()
            .map(|c| {
                let bundle = simulate_cfg(c)?;
                let prices = price_bundle(&bundle, &payoff, &pricer)?;
                Ok((bundle, prices))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let dir = prepare_dir(&base, opts)?;
    let path = dir.join(SWEEP_FILE);
    let mut wtr = csv::Writer::from_writer(BufWriter::new(File::create(&path)?));
    let mut header = vec![axis.name()];
    header.extend(PRICE_CSV_HEADER);
    wtr.write_record(&header)?;
    for (&v, (bundle, prices)) in values.iter().zip(&results) {
        write_price_rows(&mut wtr, Some(v), bundle, prices)?;
    }
    wtr.flush()?;
    finish(dir, "sweep", &base, Some(pricer.name()), vec![path])
}
