//! Statistical checks over simulated samples: moment bands, zero-correlation,
//! Kolmogorov–Smirnov against a known law, and martingale flatness of
//! discounted price paths.
//!
//! Every check reports a [`CheckResult`], and standard errors always come
//! from the sample itself.

use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF, Gamma};

use crate::error::{Error, Result};
use crate::path_sim::TimeGrid;

/// Default half-width of the acceptance band in standard errors.
pub const DEFAULT_K_SIGMA: f64 = 4.0;
/// Asymptotic 1% critical value of `sqrt(N) D_N`.
pub const KS_CRITICAL_1PCT: f64 = 1.63;
pub const KS_MIN_SAMPLES: usize = 100;
pub const CORRELATION_MIN_SAMPLES: usize = 10_000;
pub const MARTINGALE_MIN_PATHS: usize = 10_000;
/// Martingale flatness is checked on every `MARTINGALE_STRIDE`-th node.
pub const MARTINGALE_STRIDE: usize = 10;

/// Outcome of one check, as listed in a run report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// The quantity compared against `tolerance`.
    pub statistic: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

fn check_k_sigma(k_sigma: f64) -> Result<()> {
    if !(k_sigma > 0.0 && k_sigma.is_finite()) {
        return Err(Error::config(
            "k_sigma",
            format!("must be positive and finite, got {k_sigma}"),
        ));
    }
    Ok(())
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// `|statistic - target| <= k_sigma * std_error`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCheck {
    pub name: String,
    pub n: usize,
    pub statistic: f64,
    pub target: f64,
    pub std_error: f64,
    pub k_sigma: f64,
}

impl MomentCheck {
    /// Sample mean against `target`, standard error `s / sqrt(N)`.
    pub fn mean(name: impl Into<String>, sample: &[f64], target: f64, k_sigma: f64) -> Result<Self> {
        check_k_sigma(k_sigma)?;
        if sample.len() < 2 {
            return Err(Error::Stats("moment check needs at least two samples".into()));
        }
        let n = sample.len();
        Ok(Self {
            name: name.into(),
            n,
            statistic: mean(sample),
            target,
            std_error: (variance(sample) / n as f64).sqrt(),
            k_sigma,
        })
    }

    /// Unbiased sample variance against `target`. The standard error is
    /// `sqrt((m4 - (N-3)/(N-1) s^4) / N)` from the sample fourth central
    /// moment `m4`.
    pub fn variance(name: impl Into<String>, sample: &[f64], target: f64, k_sigma: f64) -> Result<Self> {
        check_k_sigma(k_sigma)?;
        if sample.len() < 4 {
            return Err(Error::Stats("variance check needs at least four samples".into()));
        }
        let n = sample.len();
        let nf = n as f64;
        let m = mean(sample);
        let s2 = variance(sample);
        let m4 = sample.iter().map(|x| (x - m).powi(4)).sum::<f64>() / nf;
        let var_s2 = ((m4 - (nf - 3.0) / (nf - 1.0) * s2 * s2) / nf).max(0.0);
        Ok(Self {
            name: name.into(),
            n,
            statistic: s2,
            target,
            std_error: var_s2.sqrt(),
            k_sigma,
        })
    }

    pub fn passed(&self) -> bool {
        (self.statistic - self.target).abs() <= self.k_sigma * self.std_error
    }

    pub fn result(&self) -> CheckResult {
        let dev = (self.statistic - self.target).abs();
        CheckResult {
            name: self.name.clone(),
            statistic: dev,
            tolerance: self.k_sigma * self.std_error,
            passed: self.passed(),
            detail: format!(
                "N={} statistic={:.6e} target={:.6e} se={:.3e}",
                self.n, self.statistic, self.target, self.std_error
            ),
        }
    }
}

/// Kolmogorov–Smirnov statistic against a continuous law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsOutcome {
    pub n: usize,
    pub statistic: f64,
    pub critical: f64,
    pub passed: bool,
}

/// `D_N = sup |F_N - F|`, rejected at the 1% level when
/// `D_N > 1.63 / sqrt(N)`.
pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsOutcome> {
    let n = sample.len();
    if n < KS_MIN_SAMPLES {
        return Err(Error::Stats(format!("KS test needs N >= {KS_MIN_SAMPLES}, got {n}")));
    }
    if sample.iter().any(|x| x.is_nan()) {
        return Err(Error::Stats("KS sample contains NaN".into()));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / nf).max((i + 1) as f64 / nf - f)
        })
        .fold(0.0, f64::max);
    let critical = KS_CRITICAL_1PCT / nf.sqrt();
    Ok(KsOutcome {
        n,
        statistic,
        critical,
        passed: statistic <= critical,
    })
}

impl KsOutcome {
    pub fn result(&self, name: impl Into<String>) -> CheckResult {
        CheckResult {
            name: name.into(),
            statistic: self.statistic,
            tolerance: self.critical,
            passed: self.passed,
            detail: format!("N={} D={:.4e} critical={:.4e}", self.n, self.statistic, self.critical),
        }
    }
}

/// CDF of `Beta(a, b)`.
pub fn beta_cdf(a: f64, b: f64) -> Result<impl Fn(f64) -> f64> {
    let law = Beta::new(a, b).map_err(|e| Error::Stats(format!("Beta({a}, {b}): {e}")))?;
    Ok(move |x: f64| law.cdf(x))
}

/// CDF of the gamma law with the given shape and scale.
pub fn gamma_cdf(shape: f64, scale: f64) -> Result<impl Fn(f64) -> f64> {
    let law = Gamma::new(shape, 1.0 / scale).map_err(|e| Error::Stats(format!("Gamma({shape}, {scale}): {e}")))?;
    Ok(move |x: f64| law.cdf(x))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationOutcome {
    pub n: usize,
    pub r: f64,
    pub bound: f64,
    pub passed: bool,
}

impl CorrelationOutcome {
    pub fn result(&self, name: impl Into<String>) -> CheckResult {
        CheckResult {
            name: name.into(),
            statistic: self.r.abs(),
            tolerance: self.bound,
            passed: self.passed,
            detail: format!("N={} r={:.4e} bound={:.4e}", self.n, self.r, self.bound),
        }
    }
}

/// Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Stats(format!(
            "need equal lengths >= 2, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return Err(Error::Stats("zero-variance sample in correlation".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Passes iff `|r| <= 4 / sqrt(N)`.
pub fn correlation_zero_test(x: &[f64], y: &[f64]) -> Result<CorrelationOutcome> {
    if x.len() < CORRELATION_MIN_SAMPLES {
        return Err(Error::Stats(format!(
            "correlation test needs N >= {CORRELATION_MIN_SAMPLES}, got {}",
            x.len()
        )));
    }
    let r = pearson(x, y)?;
    let bound = DEFAULT_K_SIGMA / (x.len() as f64).sqrt();
    Ok(CorrelationOutcome {
        n: x.len(),
        r,
        bound,
        passed: r.abs() <= bound,
    })
}

/// Deviation of one checked node from the `k = 0` price.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeDeviation {
    pub k: usize,
    pub t: f64,
    pub mean_discounted: f64,
    pub mean_diff: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartingaleOutcome {
    pub n_paths: usize,
    pub k_sigma: f64,
    pub nodes: Vec<NodeDeviation>,
    pub passed: bool,
}

impl MartingaleOutcome {
    /// Largest `|mean_diff| / std_error` over the checked nodes; infinite if
    /// a node with zero spread moved.
    pub fn max_z(&self) -> f64 {
        self.nodes
            .iter()
            .map(|n| {
                if n.std_error > 0.0 {
                    n.mean_diff.abs() / n.std_error
                } else if n.mean_diff.abs() <= exact_tol(n.mean_discounted) {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn result(&self, name: impl Into<String>) -> CheckResult {
        CheckResult {
            name: name.into(),
            statistic: self.max_z(),
            tolerance: self.k_sigma,
            passed: self.passed,
            detail: format!(
                "paths={} nodes={} max|z|={:.3}",
                self.n_paths,
                self.nodes.len(),
                self.max_z()
            ),
        }
    }
}

fn exact_tol(level: f64) -> f64 {
    1e-12 * level.abs().max(1.0)
}

/// Nodes `0, 10, 20, ...`, plus the last node.
pub fn decimated_nodes(n_steps: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = (0..=n_steps).step_by(MARTINGALE_STRIDE).collect();
    if ks.last() != Some(&n_steps) {
        ks.push(n_steps);
    }
    ks
}

/// `prices[i][k]` is the price on path `i` at grid node `k`. Checks the
/// decimated nodes (see [`martingale_flatness_on`]).
pub fn martingale_flatness(prices: &[Vec<f64>], r: f64, grid: &TimeGrid, k_sigma: f64) -> Result<MartingaleOutcome> {
    let n_nodes = grid.n_steps() + 1;
    if let Some(p) = prices.iter().find(|p| p.len() != n_nodes) {
        return Err(Error::Stats(format!(
            "price path has {} nodes, grid has {n_nodes}",
            p.len()
        )));
    }
    let nodes = decimated_nodes(grid.n_steps());
    let times: Vec<f64> = nodes.iter().map(|&k| grid.time(k)).collect();
    let rows: Vec<Vec<f64>> = prices.iter().map(|p| nodes.iter().map(|&k| p[k]).collect()).collect();
    let mut out = martingale_flatness_on(&rows, &times, r, k_sigma)?;
    for (n, k) in out.nodes.iter_mut().zip(nodes) {
        n.k = k;
    }
    Ok(out)
}

/// `prices[i][j]` is the price on path `i` at `times[j]`, with
/// `times[0] = 0`. At each time the path-wise difference
/// `e^{-r t} S_i(t) - S_i(0)` must have mean within `k_sigma` standard
/// errors of zero; a time whose differences have no spread must match
/// exactly. The reported `k` is the column index.
pub fn martingale_flatness_on(prices: &[Vec<f64>], times: &[f64], r: f64, k_sigma: f64) -> Result<MartingaleOutcome> {
    check_k_sigma(k_sigma)?;
    if prices.len() < MARTINGALE_MIN_PATHS {
        return Err(Error::Stats(format!(
            "martingale check needs >= {MARTINGALE_MIN_PATHS} paths, got {}",
            prices.len()
        )));
    }
    if times.first() != Some(&0.0) {
        return Err(Error::Stats("martingale check needs the first column at t = 0".into()));
    }
    if let Some(p) = prices.iter().find(|p| p.len() != times.len()) {
        return Err(Error::Stats(format!(
            "price row has {} entries, expected {}",
            p.len(),
            times.len()
        )));
    }
    let nf = prices.len() as f64;
    let mut nodes = Vec::new();
    let mut passed = true;
    for (k, &t) in times.iter().enumerate() {
        let disc = (-r * t).exp();
        let diffs: Vec<f64> = prices.iter().map(|p| disc * p[k] - p[0]).collect();
        let mean_diff = mean(&diffs);
        let std_error = (variance(&diffs) / nf).sqrt();
        let mean_discounted = prices.iter().map(|p| disc * p[k]).sum::<f64>() / nf;
        let ok = if std_error > 0.0 {
            mean_diff.abs() <= k_sigma * std_error
        } else {
            mean_diff.abs() <= exact_tol(mean_discounted)
        };
        passed &= ok;
        nodes.push(NodeDeviation {
            k,
            t,
            mean_discounted,
            mean_diff,
            std_error,
        });
    }
    Ok(MartingaleOutcome {
        n_paths: prices.len(),
        k_sigma,
        nodes,
        passed,
    })
}

/// Copy of `prices` (columns at `times`) with `rate * t` added; a negative
/// control for the martingale checks.
pub fn with_injected_drift(prices: &[Vec<f64>], times: &[f64], rate: f64) -> Vec<Vec<f64>> {
    prices
        .iter()
        .map(|p| p.iter().zip(times).map(|(v, t)| v + rate * t).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Seed, Stage};
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn normals(n: usize, path: u64) -> Vec<f64> {
        let mut rng = Seed::new(11, path).rng(Stage::Gaussian);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn moment_checks() {
        let xs = normals(20_000, 0);
        assert!(MomentCheck::mean("m", &xs, 0.0, 4.0).unwrap().passed());
        assert!(!MomentCheck::mean("m", &xs, 0.2, 4.0).unwrap().passed());
        let v = MomentCheck::variance("v", &xs, 1.0, 4.0).unwrap();
        assert!(v.passed());
        // se of s^2 for a normal sample is about sqrt(2/N)
        assert!((v.std_error / (2.0f64 / 20_000.0).sqrt() - 1.0).abs() < 0.05);
        assert!(!MomentCheck::variance("v", &xs, 1.1, 4.0).unwrap().passed());
        assert!(MomentCheck::mean("m", &xs, 0.0, -1.0).is_err());
        assert!(MomentCheck::mean("m", &xs, 0.0, 0.0).is_err());
    }

    #[test]
    fn ks_calibration_and_power() {
        let xs = normals(5_000, 1);
        let ok = ks_test(&xs, crate::special_math::normal_cdf).unwrap();
        assert!(ok.passed, "{ok:?}");
        let shifted = ks_test(&xs, |x| crate::special_math::normal_cdf(x - 0.2)).unwrap();
        assert!(!shifted.passed);
        assert!(ks_test(&xs[..99], crate::special_math::normal_cdf).is_err());
    }

    #[test]
    fn ks_statistic_exact_small_case() {
        // uniform sample at midpoints: D = 1 / (2N)
        let n = 200;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let out = ks_test(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((out.statistic - 0.5 / n as f64).abs() < 1e-15);
    }

    #[test]
    fn law_cdfs() {
        let b = beta_cdf(2.0, 2.0).unwrap();
        assert!((b(0.5) - 0.5).abs() < 1e-14);
        assert!((b(0.25) - 0.15625).abs() < 1e-12);
        let g = gamma_cdf(1.0, 2.0).unwrap();
        assert!((g(2.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert!(beta_cdf(0.0, 1.0).is_err());
    }

    #[test]
    fn correlation_tests() {
        let x = normals(20_000, 2);
        let y = normals(20_000, 3);
        assert!(correlation_zero_test(&x, &y).unwrap().passed);
        let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + 0.2 * b).collect();
        assert!(!correlation_zero_test(&x, &z).unwrap().passed);
        assert!(correlation_zero_test(&x[..9_999], &y[..9_999]).is_err());
        let flat = vec![1.0; 20_000];
        assert!(correlation_zero_test(&x, &flat).is_err());
    }

    #[test]
    fn martingale_flatness_and_controls() {
        let grid = TimeGrid::new(1.0, 20).unwrap();
        let n = 20_000;
        // a random walk martingale started at 1
        let paths: Vec<Vec<f64>> = (0..n as u64)
            .map(|i| {
                let mut rng = Seed::new(5, i).rng(Stage::Gaussian);
                let mut v = 1.0;
                let mut p = vec![v];
                for _ in 0..20 {
                    let z: f64 = rng.sample(StandardNormal);
                    v += 0.1 * z;
                    p.push(v);
                }
                p
            })
            .collect();
        let out = martingale_flatness(&paths, 0.0, &grid, 4.0).unwrap();
        assert!(out.passed, "{out:?}");
        assert_eq!(out.nodes.iter().map(|n| n.k).collect::<Vec<_>>(), vec![0, 10, 20]);
        let drifted = with_injected_drift(&paths, &grid.times(), 0.05);
        assert!(!martingale_flatness(&drifted, 0.0, &grid, 4.0).unwrap().passed);

        // constant discounted price: exact flatness
        let r = 0.05;
        let flat: Vec<Vec<f64>> = (0..n)
            .map(|_| grid.times().iter().map(|t| (r * t).exp() * 0.9).collect())
            .collect();
        let out = martingale_flatness(&flat, r, &grid, 4.0).unwrap();
        assert!(out.passed);
        assert_eq!(out.max_z(), 0.0);
        assert!(
            !martingale_flatness(&with_injected_drift(&flat, &grid.times(), 1e-6), r, &grid, 4.0)
                .unwrap()
                .passed
        );
        assert!(martingale_flatness(&flat[..100], r, &grid, 4.0).is_err());
        assert!(martingale_flatness(&flat, r, &grid, -4.0).is_err());
    }

    #[test]
    fn decimation_includes_last_node() {
        assert_eq!(decimated_nodes(25), vec![0, 10, 20, 25]);
        assert_eq!(decimated_nodes(1), vec![0, 1]);
    }
}
