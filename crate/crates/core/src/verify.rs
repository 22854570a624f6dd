//! The `verify` command: simulation, closed-form and statistical checks run
//! at two sample-size levels, collected into a [`RunReport`].
//!
//! Each negative control is reported as its own check, which passes when
//! the control is rejected.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::closed_form::{
    binary_bond_price, exponential_payoff_price, lognormal_price, lognormal_price_i_ratio, power_payoff_price,
    recovery_bond_price, BinaryBondSpec, ExponentialSpec, LogNormalSpec, Pricer, RecoveryBondSpec,
};
use crate::distribution::MarketFactorDistribution;
use crate::error::{Error, Result};
use crate::path_sim::{decomposition_checks, simulate_path, ModelParams, SamplePath, TimeGrid};
use crate::pricing_kernel::{self, MarketState, Payoff};
use crate::quadrature::GaussLegendre;
use crate::rng::{Seed, Stage};
use crate::scenario::with_threads;
use crate::special_math::{
    bridge_moments, exp_integral_e1, levy_measure_interval, levy_ratio, vg_bridge_variance, LevyInterval,
};
use crate::stats_validation::{
    beta_cdf, correlation_zero_test, decimated_nodes, gamma_cdf, ks_test, martingale_flatness_on, with_injected_drift,
    CheckResult, MomentCheck, DEFAULT_K_SIGMA,
};

pub const DEFAULT_VERIFY_SEED: u64 = 20_240_607;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyLevel {
    Quick,
    Full,
}

impl FromStr for VerifyLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(VerifyLevel::Quick),
            "full" => Ok(VerifyLevel::Full),
            other => Err(Error::Usage(format!(
                "unknown verify level `{other}`; expected quick or full"
            ))),
        }
    }
}

impl fmt::Display for VerifyLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerifyLevel::Quick => "quick",
            VerifyLevel::Full => "full",
        })
    }
}

/// Sample sizes of one level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VerifySizes {
    pub moment_paths: usize,
    pub decomposition_paths: usize,
    pub martingale_paths: usize,
    pub martingale_steps: usize,
    pub terminal_paths: usize,
    pub ks_paths: usize,
    pub correlation_paths: usize,
}

impl VerifyLevel {
    pub fn sizes(&self) -> VerifySizes {
        match self {
            VerifyLevel::Quick => VerifySizes {
                moment_paths: 200_000,
                decomposition_paths: 1_000,
                martingale_paths: 100_000,
                martingale_steps: 20,
                terminal_paths: 10_000,
                ks_paths: 100_000,
                correlation_paths: 100_000,
            },
            VerifyLevel::Full => VerifySizes {
                moment_paths: 200_000,
                decomposition_paths: 1_000,
                martingale_paths: 100_000,
                martingale_steps: 500,
                terminal_paths: 10_000,
                ks_paths: 100_000,
                correlation_paths: 100_000,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub level: VerifyLevel,
    pub seed: u64,
    pub k_sigma: f64,
    pub threads: Option<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            level: VerifyLevel::Quick,
            seed: DEFAULT_VERIFY_SEED,
            k_sigma: DEFAULT_K_SIGMA,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub level: VerifyLevel,
    pub seed: u64,
    pub k_sigma: f64,
    pub checks: Vec<CheckResult>,
    pub timings: Vec<StageTiming>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<48} {:.4e} <= {:.4e}  {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.statistic,
                c.tolerance,
                c.detail
            )?;
        }
        for t in &self.timings {
            writeln!(f, "time {:<16} {:.2}s", t.stage, t.seconds)?;
        }
        let failed = self.failures().count();
        write!(
            f,
            "{}: {} checks, {} failed",
            if failed == 0 { "PASS" } else { "FAIL" },
            self.checks.len(),
            failed
        )
    }
}

/// Runs every stage. Only option errors are returned as `Err`; a stage
/// that errors is reported as a failed check.
pub fn cmd_verify(opts: &VerifyOptions) -> Result<RunReport> {
    if !(opts.k_sigma > 0.0 && opts.k_sigma.is_finite()) {
        return Err(Error::config(
            "--k-sigma",
            format!("must be positive and finite, got {}", opts.k_sigma),
        ));
    }
    let sizes = opts.level.sizes();
    let (k, seed) = (opts.k_sigma, opts.seed);
    type Stage<'a> = (&'a str, Box<dyn Fn() -> Result<Vec<CheckResult>> + Send + Sync + 'a>);
    let stages: Vec<Stage> = vec![
        (
            "bridge_moments",
            Box::new(move || bridge_moment_checks(sizes.moment_paths, seed, k)),
        ),
        ("levy", Box::new(levy_checks)),
        (
            "decomposition",
            Box::new(move || decomposition_suite(sizes.decomposition_paths, 10, seed.wrapping_add(1))),
        ),
        ("oracle_grid", Box::new(oracle_grid_checks)),
        ("lognormal", Box::new(lognormal_checks)),
        (
            "martingale",
            Box::new(move || {
                martingale_checks(sizes.martingale_paths, sizes.martingale_steps, seed.wrapping_add(2), k)
            }),
        ),
        (
            "terminal",
            Box::new(move || terminal_convergence_checks(sizes.terminal_paths, seed.wrapping_add(3))),
        ),
        (
            "distribution",
            Box::new(move || distribution_checks(sizes.ks_paths, sizes.correlation_paths, seed.wrapping_add(4))),
        ),
    ];
    let (checks, timings) = with_threads(opts.threads, || {
        let mut checks = Vec::new();
        let mut timings = Vec::new();
        for (name, run) in &stages {
            let start = Instant::now();
            match run() {
                Ok(mut c) => checks.append(&mut c),
                Err(e) => checks.push(CheckResult {
                    name: format!("{name}: stage error"),
                    statistic: f64::NAN,
                    tolerance: f64::NAN,
                    passed: false,
                    detail: e.to_string(),
                }),
            }
            timings.push(StageTiming {
                stage: name.to_string(),
                seconds: start.elapsed().as_secs_f64(),
            });
        }
        (checks, timings)
    })?;
    Ok(RunReport {
        level: opts.level,
        seed: opts.seed,
        k_sigma: opts.k_sigma,
        checks,
        timings,
    })
}

fn check(
    name: impl Into<String>,
    statistic: f64,
    tolerance: f64,
    passed: bool,
    detail: impl Into<String>,
) -> CheckResult {
    CheckResult {
        name: name.into(),
        statistic,
        tolerance,
        passed,
        detail: detail.into(),
    }
}

/// The control is a check that must fail; its entry passes when it did.
fn control(name: impl Into<String>, inner: &CheckResult) -> CheckResult {
    check(
        name,
        inner.statistic,
        inner.tolerance,
        !inner.passed,
        format!("rejected={} ({})", !inner.passed, inner.detail),
    )
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

/// Simulates paths `0..n` in parallel and keeps `extract` of each.
pub fn simulate_map<T: Send>(
    n: usize,
    grid: &TimeGrid,
    params: &ModelParams,
    dist: &MarketFactorDistribution,
    seed: u64,
    extract: impl Fn(&SamplePath) -> T + Sync,
) -> Result<Vec<T>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| simulate_path(grid, params, dist, Seed::new(seed, i)).map(|p| extract(&p)))
        .collect()
}

fn unit_factor() -> MarketFactorDistribution {
    MarketFactorDistribution::atoms(&[(1.0, 0.0)]).expect("single atom is valid")
}

/// Bridge and VG-bridge moments at `t = T/2` for `m = 100`, `T = 1`.
pub fn bridge_moment_checks(n_paths: usize, seed: u64, k_sigma: f64) -> Result<Vec<CheckResult>> {
    let (m, horizon, t) = (100.0, 1.0, 0.5);
    let params = ModelParams {
        sigma: 1.0,
        m,
        r: 0.0,
        horizon,
    };
    let grid = TimeGrid::new(horizon, 2)?;
    let samples = simulate_map(n_paths, &grid, &params, &unit_factor(), seed, |p| {
        (p.bridge[1], p.vgb[1])
    })?;
    let (bridge, vgb): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
    let (mean, var) = bridge_moments(m, t, horizon)?;
    let vgb_var = vg_bridge_variance(m, t, horizon)?;
    Ok(vec![
        MomentCheck::mean("bridge mean", &bridge, mean, k_sigma)?.result(),
        MomentCheck::variance("bridge variance", &bridge, var, k_sigma)?.result(),
        MomentCheck::mean("vg bridge mean", &vgb, 0.0, k_sigma)?.result(),
        MomentCheck::variance("vg bridge variance", &vgb, vgb_var, k_sigma)?.result(),
    ])
}

/// `m int_a^b e^{-m x} / x dx` by Gauss–Legendre, independent of the
/// exponential-integral code.
pub fn levy_measure_by_quadrature(m: f64, a: f64, b: f64) -> f64 {
    let gl = GaussLegendre::standard();
    // split so each piece spans at most one decay length
    let pieces = ((m * (b - a)).ceil() as usize).clamp(1, 64);
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + i as f64 * h;
            m * gl.integrate(lo, lo + h, |x| (-m * x).exp() / x)
        })
        .sum()
}

/// Ratio monotonicity over `m`, and the Lévy measure against quadrature.
pub fn levy_checks() -> Result<Vec<CheckResult>> {
    let ms = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
    let ab = LevyInterval::new(1.0, 2.0)?;
    let cd = LevyInterval::new(1.5, 2.5)?;
    let ratios: Vec<f64> = ms.iter().map(|&m| levy_ratio(m, &ab, &cd)).collect::<Result<_>>()?;
    let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let min_step = ratios.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let mut worst = 0.0f64;
    for &m in &ms {
        for iv in [&ab, &cd] {
            let direct = levy_measure_by_quadrature(m, iv.lo(), iv.hi());
            worst = worst.max(rel_err(levy_measure_interval(m, iv)?, direct));
        }
    }
    let e1_point = rel_err(exp_integral_e1(1.0)?, 0.219_383_934_395_520_27);
    Ok(vec![
        check(
            "levy ratio > 1",
            1.0 - min_ratio,
            0.0,
            min_ratio > 1.0,
            format!("ratios={ratios:.6?}"),
        ),
        check(
            "levy ratio increasing in m",
            -min_step,
            0.0,
            min_step > 0.0,
            format!("smallest step {min_step:.3e}"),
        ),
        check(
            "levy measure vs quadrature",
            worst,
            1e-8,
            worst <= 1e-8,
            "max relative error",
        ),
        check("e1(1) reference", e1_point, 1e-14, e1_point <= 1e-14, "relative error"),
    ])
}

/// Pathwise decomposition residuals on `pairs` random `(s, t)` per path.
pub fn decomposition_suite(n_paths: usize, pairs: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let n_steps = 100;
    let grid = TimeGrid::new(1.0, n_steps)?;
    let params = ModelParams {
        sigma: 2.0,
        m: 10.0,
        r: 0.0,
        horizon: 1.0,
    };
    let dist = MarketFactorDistribution::normal(0.0, 1.0)?;
    let residuals = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let path = simulate_path(&grid, &params, &dist, Seed::new(seed, i))?;
            let mut rng = Seed::new(seed ^ 0x5eed, i).rng(Stage::Gaussian);
            let mut worst = 0.0f64;
            for _ in 0..pairs {
                let a = rng.random_range(0..=n_steps);
                let b = rng.random_range(1..=n_steps);
                let (s, t) = if a <= b { (a, b) } else { (b, a) };
                worst = worst.max(decomposition_checks(&path, params.sigma, s, t)?.max());
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = residuals.into_iter().fold(0.0, f64::max);
    Ok(vec![check(
        "pathwise decompositions",
        worst,
        1e-10,
        worst <= 1e-10,
        format!("{n_paths} paths x {pairs} pairs, max abs residual"),
    )])
}

pub const ORACLE_XI: [f64; 5] = [-5.0, -2.5, 0.0, 2.5, 5.0];
pub const ORACLE_BRIDGE: [f64; 5] = [0.01, 0.25, 0.5, 0.75, 0.99];
pub const ORACLE_SIGMA: [f64; 4] = [1.0, 2.0, 3.0, 4.0];

/// The 100 states `xi x bridge x sigma` at `t = 0.5`, `T = 1`, `r = 0.03`.
pub fn oracle_states() -> Result<Vec<MarketState>> {
    let mut out = Vec::with_capacity(100);
    for &xi in &ORACLE_XI {
        for &b in &ORACLE_BRIDGE {
            for &sigma in &ORACLE_SIGMA {
                out.push(MarketState::new(0.5, 1.0, xi, b, sigma, 0.03, 100.0)?);
            }
        }
    }
    Ok(out)
}

/// Worst relative gap between `closed` and the general kernel over the
/// oracle states.
pub fn oracle_gap(
    dist: &MarketFactorDistribution,
    payoff: &Payoff,
    closed: impl Fn(&MarketState) -> Result<f64>,
) -> Result<(f64, MarketState)> {
    let mut worst = (0.0, MarketState::new(0.5, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0)?);
    for s in oracle_states()? {
        let e = rel_err(closed(&s)?, pricing_kernel::price(payoff, dist, &s)?);
        if !(e <= worst.0) {
            worst = (e, s);
        }
    }
    Ok(worst)
}

/// Each closed form against the general kernel on the oracle states, plus
/// the binary-bond spot value.
pub fn oracle_grid_checks() -> Result<Vec<CheckResult>> {
    let bin = BinaryBondSpec::new(0.4, 0.6)?;
    let rec = RecoveryBondSpec::new(0.4, 0.6, 0.0, 0.5, 1.0)?;
    let ln = LogNormalSpec::new(0.0, 1.0, 1.0)?;
    let pow = LogNormalSpec::new(0.0, 1.0, 2.0)?;
    let ex = ExponentialSpec::new(1.0)?;
    type Closed = Box<dyn Fn(&MarketState) -> Result<f64>>;
    let cases: Vec<(&str, MarketFactorDistribution, Payoff, Closed)> = vec![
        (
            "binary bond",
            bin.prior()?,
            Payoff::Identity,
            Box::new(move |s| binary_bond_price(&bin, s)),
        ),
        (
            "recovery bond",
            rec.prior()?,
            Payoff::Identity,
            Box::new(move |s| recovery_bond_price(&rec, s)),
        ),
        (
            "lognormal asset",
            ln.prior()?,
            Payoff::ExponentialScale { q: 1.0 },
            Box::new(move |s| lognormal_price(&ln, s)),
        ),
        (
            "power payoff q=2",
            pow.prior()?,
            Payoff::ExponentialScale { q: 2.0 },
            Box::new(move |s| power_payoff_price(&pow, s)),
        ),
        (
            "exponential payoff",
            ex.prior()?,
            Payoff::Identity,
            Box::new(move |s| exponential_payoff_price(&ex, s)),
        ),
    ];
    let mut out = Vec::new();
    for (name, dist, payoff, closed) in &cases {
        let (gap, s) = oracle_gap(dist, payoff, closed)?;
        out.push(check(
            format!("oracle: {name}"),
            gap,
            1e-8,
            gap <= 1e-8,
            format!("worst at xi={}, bridge={}, sigma={}", s.xi, s.bridge, s.sigma),
        ));
    }
    let spot = binary_bond_price(&bin, &MarketState::new(0.5, 1.0, 0.5, 0.5, 1.0, 0.0, 100.0)?)?;
    let dev = (spot - 0.71207).abs();
    out.push(check(
        "binary bond spot",
        dev,
        1e-5,
        dev <= 1e-5,
        format!("price={spot:.8}"),
    ));
    Ok(out)
}

/// Initial log-normal asset price and agreement of its two algebraic forms.
pub fn lognormal_checks() -> Result<Vec<CheckResult>> {
    let spec = LogNormalSpec::new(0.0, 1.0, 1.0)?;
    let params = ModelParams {
        sigma: 1.0,
        m: 100.0,
        r: 0.0,
        horizon: 1.0,
    };
    let s0 = lognormal_price(&spec, &MarketState::initial(&params)?)?;
    let dev = (s0 - 0.5f64.exp()).abs();
    // the quoted 7-digit value, to its rounding half-unit
    let dev_quoted = (s0 - 1.648721).abs();
    let mut worst = 0.0f64;
    for s in oracle_states()? {
        worst = worst.max(rel_err(
            lognormal_price(&spec, &s)?,
            lognormal_price_i_ratio(&spec, &s)?,
        ));
    }
    Ok(vec![
        check(
            "lognormal S_0 = e^(1/2)",
            dev,
            1e-9,
            dev <= 1e-9,
            format!("S_0={s0:.12}"),
        ),
        check(
            "lognormal S_0 vs 1.648721",
            dev_quoted,
            5e-7,
            dev_quoted <= 5e-7,
            format!("S_0={s0:.12}"),
        ),
        check(
            "lognormal forms agree",
            worst,
            1e-12,
            worst <= 1e-12,
            "max relative gap over oracle states",
        ),
    ])
}

fn binary_bond_params(sigma: f64) -> ModelParams {
    ModelParams {
        sigma,
        m: 100.0,
        r: 0.0,
        horizon: 1.0,
    }
}

/// Binary-bond prices at the decimated nodes of `n_paths` paths.
pub fn decimated_price_rows(
    n_paths: usize,
    grid: &TimeGrid,
    params: &ModelParams,
    dist: &MarketFactorDistribution,
    payoff: &Payoff,
    pricer: &Pricer,
    seed: u64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let nodes = decimated_nodes(grid.n_steps());
    let times: Vec<f64> = nodes.iter().map(|&k| grid.time(k)).collect();
    let n = grid.n_steps();
    let rows = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let p = simulate_path(grid, params, dist, Seed::new(seed, i))?;
            nodes
                .iter()
                .map(|&k| {
                    if k == n {
                        Ok(payoff.eval(p.x_draw, params.r, params.horizon))
                    } else {
                        pricer.price(&MarketState::at(params, grid.time(k), p.info[k], p.bridge[k])?)
                    }
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((times, rows))
}

/// Martingale flatness of the binary bond with the drift control, and
/// exact flatness of the unit payoff.
pub fn martingale_checks(n_paths: usize, n_steps: usize, seed: u64, k_sigma: f64) -> Result<Vec<CheckResult>> {
    let params = binary_bond_params(1.0);
    let grid = TimeGrid::new(params.horizon, n_steps)?;
    let dist = BinaryBondSpec::new(0.4, 0.6)?.prior()?;
    let payoff = Payoff::Identity;
    let pricer = Pricer::select(&dist, &payoff, false);
    let (times, rows) = decimated_price_rows(n_paths, &grid, &params, &dist, &payoff, &pricer, seed)?;
    let clean = martingale_flatness_on(&rows, &times, params.r, k_sigma)?.result("martingale: binary bond");
    let drifted = with_injected_drift(&rows, &times, 0.01);
    let drift = martingale_flatness_on(&drifted, &times, params.r, k_sigma)?.result("drift");

    // h = 1 under a discounting rate: e^{-rt} S_t is exactly e^{-rT}
    let unit_params = ModelParams { r: 0.05, ..params };
    let unit_dist = LogNormalSpec::new(0.0, 1.0, 0.0)?.prior()?;
    let unit_payoff = Payoff::ExponentialScale { q: 0.0 };
    let unit_pricer = Pricer::select(&unit_dist, &unit_payoff, false);
    let unit_grid = TimeGrid::new(1.0, 20)?;
    let (ut, urows) = decimated_price_rows(
        10_000,
        &unit_grid,
        &unit_params,
        &unit_dist,
        &unit_payoff,
        &unit_pricer,
        seed ^ 1,
    )?;
    let unit = martingale_flatness_on(&urows, &ut, unit_params.r, k_sigma)?.result("martingale: unit payoff exact");

    Ok(vec![clean, control("control: injected drift rejected", &drift), unit])
}

/// Share of paths whose binary-bond price at node 99 of 100 lies within
/// 0.15 of the realised payoff.
pub fn terminal_hit_rate(sigma: f64, n_paths: usize, seed: u64) -> Result<f64> {
    let params = binary_bond_params(sigma);
    let grid = TimeGrid::new(1.0, 100)?;
    let spec = BinaryBondSpec::new(0.4, 0.6)?;
    let dist = spec.prior()?;
    let hits = simulate_map(n_paths, &grid, &params, &dist, seed, |p| {
        let s = MarketState::at(&params, grid.time(99), p.info[99], p.bridge[99])?;
        Ok::<_, Error>((binary_bond_price(&spec, &s)? - p.x_draw).abs() <= 0.15)
    })?
    .into_iter()
    .collect::<Result<Vec<bool>>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / n_paths as f64)
}

pub fn terminal_convergence_checks(n_paths: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let strong = terminal_hit_rate(4.0, n_paths, seed)?;
    let weak = terminal_hit_rate(0.1, n_paths, seed)?;
    let weak_check = check("weak", 0.95 - weak, 0.0, weak >= 0.95, format!("hit rate {weak:.4}"));
    Ok(vec![
        check(
            "terminal convergence sigma=4",
            0.95 - strong,
            0.0,
            strong >= 0.95,
            format!("hit rate {strong:.4}"),
        ),
        control("control: terminal convergence sigma=0.1 rejected", &weak_check),
    ])
}

/// Sub-bridge `Gamma_{st}` rebuilt from the raw path at nodes `s <= t`.
pub fn sub_bridge(p: &SamplePath, s: usize, t: usize) -> f64 {
    (p.w[s] - p.gamma[s] / p.gamma[t] * p.w[t]) / p.gamma[t].sqrt()
}

/// KS tests on the bridge and subordinator laws, and zero-correlation
/// checks of the bridge independence properties with a same-interval control.
///
/// `Gamma_{st}` is symmetric given the subordinator, so raw correlations
/// with any function of the subordinator vanish even under dependence; the
/// squared bridge is used alongside the raw one.
pub fn distribution_checks(ks_paths: usize, corr_paths: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();

    let (m, t) = (100.0, 0.5);
    let params = ModelParams {
        sigma: 1.0,
        m,
        r: 0.0,
        horizon: 1.0,
    };
    let grid = TimeGrid::new(1.0, 2)?;
    let draws = simulate_map(ks_paths, &grid, &params, &unit_factor(), seed, |p| {
        (p.bridge[1], p.gamma[1])
    })?;
    let (bridge, gamma): (Vec<f64>, Vec<f64>) = draws.into_iter().unzip();
    out.push(ks_test(&bridge, beta_cdf(m * t, m * (1.0 - t))?)?.result("KS bridge ~ Beta(mt, m(T-t))"));
    out.push(ks_test(&gamma, gamma_cdf(m * t, 1.0 / m)?)?.result("KS subordinator ~ Gamma(mt, 1/m)"));
    let wrong_m = 50.0;
    let wrong = ks_test(&bridge, beta_cdf(wrong_m * t, wrong_m * (1.0 - t))?)?.result("wrong m");
    out.push(control("control: KS against wrong m rejected", &wrong));

    let params = ModelParams { m: 1.0, ..params };
    let grid = TimeGrid::new(1.0, 8)?;
    let cols = simulate_map(corr_paths, &grid, &params, &unit_factor(), seed ^ 0x00c0_ffee, |p| {
        let g_24 = sub_bridge(p, 2, 4);
        let g_13 = sub_bridge(p, 1, 3);
        let g_47 = sub_bridge(p, 4, 7);
        let b = p.bridge[4];
        [g_24, p.gamma[6], g_13, g_47, p.vgb[4], b * (1.0 - b)]
    })?;
    let col = |j: usize| -> Vec<f64> { cols.iter().map(|c| c[j]).collect() };
    let sq = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| x * x).collect() };
    let (g24, g6, g13, g47, vgb4, bvar) = (col(0), col(1), col(2), col(3), col(4), col(5));
    out.push(correlation_zero_test(&g24, &g6)?.result("corr(Gamma_st, gamma_u)"));
    out.push(correlation_zero_test(&sq(&g24), &g6)?.result("corr(Gamma_st^2, gamma_u)"));
    out.push(correlation_zero_test(&g13, &g47)?.result("corr(Gamma_st, Gamma_uv)"));
    out.push(correlation_zero_test(&sq(&g13), &sq(&g47))?.result("corr(Gamma_st^2, Gamma_uv^2)"));
    let same = correlation_zero_test(&sq(&vgb4), &bvar)?.result("same interval");
    out.push(control(
        "control: corr(Gamma_tT^2, gamma_tT(1-gamma_tT)) rejected",
        &same,
    ));
    Ok(out)
}
