//! Simulation of gamma subordinator paths, gamma bridges, normalized
//! variance-gamma bridges and information processes on a uniform grid.
//!
//! One path is produced in four steps: draw the market factor, draw the
//! subordinator increments, subordinate a Brownian motion to them, then
//! assemble the bridges and the information process. Each step reads its
//! own random stream (see [`crate::rng`]).

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::MarketFactorDistribution;
use crate::error::{Error, Result};
use crate::rng::{Seed, Stage};

/// Smallest admissible subordinator increment.
pub const MIN_INCREMENT: f64 = 1e-300;

/// Uniform grid `t_k = k T / n`, `k = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    horizon: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) || n_steps == 0 {
            return Err(Error::Simulation(format!(
                "grid needs T > 0 and n_steps >= 1, got T={horizon}, n_steps={n_steps}"
            )));
        }
        Ok(Self { horizon, n_steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    /// Node `k`; the last node is exactly `T`.
    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.horizon
        } else {
            k as f64 * self.horizon / self.n_steps as f64
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|k| self.time(k)).collect()
    }
}

/// Model constants shared by simulation and pricing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Information flow rate.
    pub sigma: f64,
    /// Subordinator shape rate.
    pub m: f64,
    /// Continuously compounded short rate.
    pub r: f64,
    /// Cash-flow date.
    #[serde(rename = "T")]
    pub horizon: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let field_err = |f: &str, msg: &str| Err(Error::config(format!("model.{f}"), msg));
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return field_err("sigma", "must be positive and finite");
        }
        if !(self.m > 0.0 && self.m.is_finite()) {
            return field_err("m", "must be positive and finite");
        }
        if !self.r.is_finite() {
            return field_err("r", "must be finite");
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return field_err("T", "must be positive and finite");
        }
        Ok(())
    }
}

/// Gamma variate with unit scale.
///
/// Marsaglia–Tsang squeeze/rejection for `shape >= 1`; below that the
/// draw is boosted, `G_a = G_{a+1} U^{1/a}`, evaluated in log space.
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        let g = sample_gamma(shape + 1.0, rng);
        let u: f64 = rng.random();
        return (g.ln() + u.ln() / shape).exp();
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u: f64 = rng.random();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Standard gamma subordinator (`kappa = 1/m`) sampled on `grid`.
/// `gamma[0] = 0`; increments have shape `m dt` and scale `1/m`.
pub fn sample_gamma_path(grid: &TimeGrid, m: f64, seed: Seed) -> Result<Vec<f64>> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Simulation(format!("m must be positive, got {m}")));
    }
    let mut rng = seed.rng(Stage::Gamma);
    let shape = m * grid.dt();
    let mut out = Vec::with_capacity(grid.n_steps() + 1);
    let mut acc = 0.0;
    out.push(acc);
    for _ in 0..grid.n_steps() {
        let inc = (sample_gamma(shape, &mut rng) / m).max(MIN_INCREMENT);
        acc += inc;
        out.push(acc);
    }
    Ok(out)
}

/// Gamma bridge `gamma_t / gamma_T`, with exact endpoints.
pub fn bridge_from_gamma(gamma: &[f64]) -> Result<Vec<f64>> {
    let total = match gamma.last() {
        Some(&g) if g > 0.0 && g.is_finite() => g,
        other => {
            return Err(Error::Simulation(format!(
                "terminal subordinator value must be positive, got {other:?}"
            )))
        }
    };
    let n = gamma.len() - 1;
    let mut bridge: Vec<f64> = gamma.iter().map(|g| g / total).collect();
    bridge[n] = 1.0;
    Ok(bridge)
}

/// Brownian motion subordinated to one gamma path, and the normalized
/// variance-gamma bridge built from it.
#[derive(Debug, Clone, PartialEq)]
pub struct VgBridgeSample {
    /// `W_{gamma_{t_k}}`.
    pub w: Vec<f64>,
    /// `Gamma_{t_k T}`.
    pub vgb: Vec<f64>,
}

impl VgBridgeSample {
    pub fn w_terminal(&self) -> f64 {
        *self.w.last().expect("non-empty path")
    }
}

/// `Gamma_{tT} = gamma_T^{-1/2} (W_{gamma_t} - gamma_{tT} W_{gamma_T})`.
pub fn sample_vg_bridge(gamma: &[f64], bridge: &[f64], seed: Seed) -> VgBridgeSample {
    assert_eq!(gamma.len(), bridge.len(), "gamma and bridge must share a grid");
    let mut rng = seed.rng(Stage::Gaussian);
    let mut w = Vec::with_capacity(gamma.len());
    w.push(0.0);
    for k in 1..gamma.len() {
        let z: f64 = rng.sample(StandardNormal);
        w.push(w[k - 1] + z * (gamma[k] - gamma[k - 1]).sqrt());
    }
    let n = gamma.len() - 1;
    let scale = gamma[n].sqrt();
    let wt = w[n];
    let mut vgb: Vec<f64> = w.iter().zip(bridge).map(|(wk, bk)| (wk - bk * wt) / scale).collect();
    vgb[0] = 0.0;
    vgb[n] = 0.0;
    VgBridgeSample { w, vgb }
}

/// `xi_t = Gamma_{tT} + sigma gamma_{tT} X_T`.
pub fn sample_information_path(vgb: &[f64], bridge: &[f64], sigma: f64, x: f64) -> Vec<f64> {
    assert_eq!(vgb.len(), bridge.len(), "vgb and bridge must share a grid");
    vgb.iter().zip(bridge).map(|(g, b)| g + sigma * b * x).collect()
}

pub fn sample_market_factor(dist: &MarketFactorDistribution, seed: Seed) -> f64 {
    dist.sample(&mut seed.rng(Stage::Factor))
}

/// Every per-node quantity of one simulated path.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub gamma: Vec<f64>,
    pub w: Vec<f64>,
    pub bridge: Vec<f64>,
    pub vgb: Vec<f64>,
    pub info: Vec<f64>,
    pub x_draw: f64,
}

pub fn simulate_path(
    grid: &TimeGrid,
    params: &ModelParams,
    dist: &MarketFactorDistribution,
    seed: Seed,
) -> Result<SamplePath> {
    let x_draw = sample_market_factor(dist, seed);
    let gamma = sample_gamma_path(grid, params.m, seed)?;
    let bridge = bridge_from_gamma(&gamma)?;
    let VgBridgeSample { w, vgb } = sample_vg_bridge(&gamma, &bridge, seed);
    let info = sample_information_path(&vgb, &bridge, params.sigma, x_draw);
    Ok(SamplePath {
        gamma,
        w,
        bridge,
        vgb,
        info,
        x_draw,
    })
}

/// A set of paths sharing one grid and parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle {
    pub grid: TimeGrid,
    pub params: ModelParams,
    pub master_seed: u64,
    pub paths: Vec<SamplePath>,
}

/// Simulates paths `0..n_paths` in parallel on the current rayon pool.
/// Path `i` depends only on `(master_seed, i)`.
pub fn simulate_bundle(
    grid: &TimeGrid,
    params: &ModelParams,
    dist: &MarketFactorDistribution,
    master_seed: u64,
    n_paths: usize,
) -> Result<PathBundle> {
    let paths = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| simulate_path(grid, params, dist, Seed::new(master_seed, i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PathBundle {
        grid: *grid,
        params: *params,
        master_seed,
        paths,
    })
}

pub const PATH_CSV_HEADER: [&str; 8] = ["path_id", "k", "t", "gamma", "bridge", "vgb", "info", "x_draw"];

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

impl PathBundle {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(PATH_CSV_HEADER)?;
        let times = self.grid.times();
        for (id, p) in self.paths.iter().enumerate() {
            for (k, t) in times.iter().enumerate() {
                wtr.write_record([
                    id.to_string(),
                    k.to_string(),
                    fmt_f64(*t),
                    fmt_f64(p.gamma[k]),
                    fmt_f64(p.bridge[k]),
                    fmt_f64(p.vgb[k]),
                    fmt_f64(p.info[k]),
                    fmt_f64(p.x_draw),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Largest absolute residuals of the two pathwise identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionResiduals {
    /// `Gamma_{sT} - (gamma_{tT}^{1/2} Gamma_{st} + gamma_{st} Gamma_{tT})`.
    pub vg_bridge: f64,
    /// `xi_s - (Gamma_{st} gamma_{tT}^{1/2} + xi_t gamma_{st})`.
    pub information: f64,
}

impl DecompositionResiduals {
    pub fn max(&self) -> f64 {
        self.vg_bridge.max(self.information)
    }
}

/// Checks both identities at grid nodes `s <= t` (with `t > 0`), rebuilding
/// the sub-bridges over `[s, t]` from the raw subordinator and Brownian values.
pub fn decomposition_checks(path: &SamplePath, sigma: f64, s: usize, t: usize) -> Result<DecompositionResiduals> {
    let n = path.gamma.len() - 1;
    if !(s <= t && t <= n && t > 0) {
        return Err(Error::Simulation(format!(
            "decomposition needs 0 <= s <= t <= n with t > 0, got s={s}, t={t}, n={n}"
        )));
    }
    let g = &path.gamma;
    let w = &path.w;
    let gamma_st = g[s] / g[t];
    let gamma_t_end = g[t] / g[n];
    let vgb_st = (w[s] - gamma_st * w[t]) / g[t].sqrt();
    let vgb_s_end = (w[s] - g[s] / g[n] * w[n]) / g[n].sqrt();
    let vgb_t_end = (w[t] - gamma_t_end * w[n]) / g[n].sqrt();

    let vg_bridge = (vgb_s_end - (gamma_t_end.sqrt() * vgb_st + gamma_st * vgb_t_end)).abs();
    let xi_s = vgb_s_end + sigma * g[s] / g[n] * path.x_draw;
    let xi_t = vgb_t_end + sigma * gamma_t_end * path.x_draw;
    let information = (xi_s - (vgb_st * gamma_t_end.sqrt() + xi_t * gamma_st)).abs();
    // the stored path must agree with the rebuilt ingredients as well
    let stored = (path.vgb[s] - vgb_s_end).abs().max((path.info[s] - xi_s).abs());
    Ok(DecompositionResiduals {
        vg_bridge: vg_bridge.max(stored),
        information: information.max((path.info[t] - xi_t).abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn binary_bond_params() -> ModelParams {
        ModelParams {
            sigma: 1.0,
            m: 100.0,
            r: 0.0,
            horizon: 1.0,
        }
    }

    #[test]
    fn grid_nodes() {
        let g = TimeGrid::new(2.0, 3).unwrap();
        let ts = g.times();
        assert_eq!(ts.len(), 4);
        assert_eq!(ts[0], 0.0);
        assert_eq!(ts[3], 2.0);
        assert!(ts.windows(2).all(|w| w[0] < w[1]));
        assert!(TimeGrid::new(0.0, 3).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
    }

    #[test]
    fn gamma_sampler_moments_small_and_large_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &shape in &[0.05, 0.3, 1.0, 4.5] {
            let n = 100_000;
            let xs: Vec<f64> = (0..n).map(|_| sample_gamma(shape, &mut rng)).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            let se = (var / n as f64).sqrt();
            assert!((mean - shape).abs() < 4.0 * se, "shape {shape}: mean {mean}");
            assert!((var / shape - 1.0).abs() < 0.1, "shape {shape}: var {var}");
        }
    }

    #[test]
    fn path_invariants() {
        let grid = TimeGrid::new(1.0, 200).unwrap();
        let dist = MarketFactorDistribution::atoms(&[(0.4, 0.0), (0.6, 1.0)]).unwrap();
        for i in 0..20 {
            let p = simulate_path(&grid, &binary_bond_params(), &dist, Seed::new(5, i)).unwrap();
            assert_eq!(p.gamma[0], 0.0);
            assert!(p.gamma.windows(2).all(|w| w[0] <= w[1]));
            assert!(p.bridge.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(p.bridge[0], 0.0);
            assert_eq!(p.bridge[200], 1.0);
            assert_eq!(p.vgb[0], 0.0);
            assert_eq!(p.vgb[200], 0.0);
            assert_eq!(p.info[0], 0.0);
            assert_eq!(p.info[200], 1.0 * p.x_draw);
        }
    }

    #[test]
    fn tiny_shape_increments_are_clamped() {
        let grid = TimeGrid::new(1.0, 1000).unwrap();
        let g = sample_gamma_path(&grid, 0.5, Seed::new(1, 0)).unwrap();
        assert!(g.windows(2).all(|w| w[1] - w[0] >= 0.0));
        assert!(*g.last().unwrap() > 0.0);
        let b = bridge_from_gamma(&g).unwrap();
        assert_eq!(b[1000], 1.0);
    }

    #[test]
    fn bridge_needs_positive_terminal() {
        assert!(bridge_from_gamma(&[0.0, 0.0]).is_err());
        assert!(bridge_from_gamma(&[]).is_err());
    }

    #[test]
    fn information_degenerate_cases() {
        let vgb = [0.0, 0.3, -0.1, 0.0];
        let bridge = [0.0, 0.2, 0.7, 1.0];
        assert_eq!(sample_information_path(&vgb, &bridge, 2.0, 0.0), vgb.to_vec());
        assert_eq!(sample_information_path(&vgb, &bridge, 0.0, 3.0), vgb.to_vec());
        assert_eq!(sample_information_path(&vgb, &bridge, 2.0, 1.5)[3], 3.0);
    }

    #[test]
    fn single_step_grid_has_exact_endpoints() {
        let grid = TimeGrid::new(1.0, 1).unwrap();
        let dist = MarketFactorDistribution::normal(0.0, 1.0).unwrap();
        let p = simulate_path(&grid, &binary_bond_params(), &dist, Seed::new(9, 0)).unwrap();
        assert_eq!(p.bridge, vec![0.0, 1.0]);
        assert_eq!(p.vgb, vec![0.0, 0.0]);
    }

    #[test]
    fn decomposition_residuals_are_rounding_only() {
        let grid = TimeGrid::new(1.0, 50).unwrap();
        let dist = MarketFactorDistribution::normal(0.0, 1.0).unwrap();
        let p = simulate_path(&grid, &binary_bond_params(), &dist, Seed::new(3, 1)).unwrap();
        for &(s, t) in &[(0, 10), (5, 5), (10, 40), (0, 50), (49, 50), (20, 50)] {
            let r = decomposition_checks(&p, 1.0, s, t).unwrap();
            assert!(r.max() < 1e-12, "s={s} t={t}: {r:?}");
        }
        assert!(decomposition_checks(&p, 1.0, 3, 2).is_err());
        assert!(decomposition_checks(&p, 1.0, 0, 0).is_err());
    }

    #[test]
    fn bundle_is_order_independent() {
        let grid = TimeGrid::new(1.0, 20).unwrap();
        let dist = MarketFactorDistribution::normal(0.0, 1.0).unwrap();
        let bundle = simulate_bundle(&grid, &binary_bond_params(), &dist, 77, 8).unwrap();
        let single = simulate_path(&grid, &binary_bond_params(), &dist, Seed::new(77, 5)).unwrap();
        assert_eq!(bundle.paths[5], single);
    }

    #[test]
    fn csv_layout() {
        let grid = TimeGrid::new(1.0, 2).unwrap();
        let dist = MarketFactorDistribution::atoms(&[(1.0, 1.0)]).unwrap();
        let bundle = simulate_bundle(&grid, &binary_bond_params(), &dist, 1, 2).unwrap();
        let mut buf = Vec::new();
        bundle.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "path_id,k,t,gamma,bridge,vgb,info,x_draw");
        assert_eq!(lines.len(), 1 + 2 * 3);
        assert!(lines[3].starts_with("0,2,1.0,"));
        assert!(lines[3].ends_with(",1.0,0.0,1.0,1.0"));
        // every value parses back bit-for-bit
        let g: f64 = lines[2].split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(g, bundle.paths[0].gamma[1]);
    }
}
