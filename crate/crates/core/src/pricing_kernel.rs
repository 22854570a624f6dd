//! General information-based pricing: the posterior law of `X_T` given
//! `(xi_t, gamma_tT)` and prices of single cash flows `h(X_T)` at `T`.
//!
//! The prior is tilted by `exp[(sigma xi x - sigma^2 x^2 b / 2) / (1 - b)]`.
//! Everything is evaluated in log space and normalised with the largest
//! log-weight across atoms and quadrature nodes, because the exponent
//! blows up as the bridge approaches one.
//!
//! Continuous components use a 256-node Gauss–Legendre rule placed on a
//! window around the mode of the tilted log-density (log-concave for the
//! uniform, normal and exponential families), cut where the log-density
//! has fallen [`WINDOW_DROP`] nats below its peak. Tabulated densities use
//! the trapezoid rule on their own nodes.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::distribution::{Component, MarketFactorDistribution};
use crate::error::{Error, Result};
use crate::path_sim::{ModelParams, SamplePath, TimeGrid};
use crate::quadrature::GaussLegendre;
use crate::special_math::log_sum_exp;

/// States with `1 - bridge` below this are clamped to `1 - BRIDGE_CLAMP`.
pub const BRIDGE_CLAMP: f64 = 1e-10;
/// Log-density drop that delimits the quadrature window.
pub const WINDOW_DROP: f64 = 80.0;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const MAX_DOUBLINGS: usize = 1100;
const EDGE_TOL: f64 = 1e-9;

/// Conditioning information at time `t`: the pair `(xi_t, gamma_tT)` plus
/// model constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketState {
    pub t: f64,
    pub horizon: f64,
    pub xi: f64,
    pub bridge: f64,
    pub sigma: f64,
    pub r: f64,
    pub m: f64,
    /// Set when `bridge` was pulled back from within `BRIDGE_CLAMP` of one.
    pub clamped: bool,
}

impl MarketState {
    pub fn new(t: f64, horizon: f64, xi: f64, bridge: f64, sigma: f64, r: f64, m: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) || !(t >= 0.0 && t < horizon) {
            return Err(Error::State(format!("need 0 <= t < T, got t={t}, T={horizon}")));
        }
        if !xi.is_finite() {
            return Err(Error::State(format!("xi must be finite, got {xi}")));
        }
        if !(0.0..=1.0).contains(&bridge) {
            return Err(Error::State(format!("bridge must lie in [0, 1], got {bridge}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::State(format!("sigma must be positive, got {sigma}")));
        }
        if !r.is_finite() || !(m > 0.0) {
            return Err(Error::State(format!("need finite r and m > 0, got r={r}, m={m}")));
        }
        let clamped = 1.0 - bridge < BRIDGE_CLAMP;
        Ok(Self {
            t,
            horizon,
            xi,
            bridge: if clamped { 1.0 - BRIDGE_CLAMP } else { bridge },
            sigma,
            r,
            m,
            clamped,
        })
    }

    pub fn at(params: &ModelParams, t: f64, xi: f64, bridge: f64) -> Result<Self> {
        Self::new(t, params.horizon, xi, bridge, params.sigma, params.r, params.m)
    }

    /// `t = 0`, where no information has arrived yet.
    pub fn initial(params: &ModelParams) -> Result<Self> {
        Self::at(params, 0.0, 0.0, 0.0)
    }

    /// `e^{-r (T - t)}`.
    pub fn discount(&self) -> f64 {
        (-self.r * (self.horizon - self.t)).exp()
    }

    fn check(&self) -> Result<()> {
        if !(self.bridge < 1.0 && self.bridge >= 0.0) {
            return Err(Error::State(format!("bridge must lie in [0, 1), got {}", self.bridge)));
        }
        Ok(())
    }

    /// `(slope, curvature)` with `log_kernel(x) = slope x - curvature x^2`.
    fn tilt(&self) -> (f64, f64) {
        let denom = 1.0 - self.bridge;
        (
            self.sigma * self.xi / denom,
            0.5 * self.sigma * self.sigma * self.bridge / denom,
        )
    }
}

/// Log of the Bayes reweighting factor,
/// `(sigma xi x - sigma^2 x^2 b / 2) / (1 - b)`.
pub fn log_kernel(x: f64, state: &MarketState) -> Result<f64> {
    state.check()?;
    let (a, c) = state.tilt();
    Ok(x * (a - c * x))
}

/// The tilt `slope x - curv x^2` re-centred at `r` as
/// `lin (x - r) - curv (x - r)^2`. The dropped constant `slope r - curv r^2`
/// is shared by every component, so it cancels in normalised quantities;
/// near `bridge = 1` both coefficients are huge and the direct form loses
/// most of its digits.
#[derive(Debug, Clone, Copy)]
struct Tilt {
    r: f64,
    lin: f64,
    curv: f64,
}

impl Tilt {
    fn at(&self, x: f64) -> f64 {
        let d = x - self.r;
        d * (self.lin - self.curv * d)
    }

    fn deriv(&self, x: f64) -> f64 {
        self.lin - 2.0 * self.curv * (x - self.r)
    }

    /// Same centre, slope raised by `eps`.
    fn shifted(&self, eps: f64) -> Self {
        Self {
            lin: self.lin + eps,
            ..*self
        }
    }
}

/// Centre for [`Tilt`]: the maximiser `a / (2c)` of the kernel, clamped to
/// the region where the prior has mass.
fn centred_tilt(dist: &MarketFactorDistribution, state: &MarketState) -> (Tilt, f64) {
    let (a, c) = state.tilt();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for wc in dist.components.iter().filter(|wc| wc.weight > 0.0) {
        let (l, h) = match wc.component {
            Component::Atom { x } => (x, x),
            Component::Uniform { a, b } => (a, b),
            Component::Normal { mu, nu } => (mu - 40.0 * nu, mu + 40.0 * nu),
            Component::Exponential { lambda } => (0.0, 40.0 / lambda),
            Component::Tabulated { ref nodes, .. } => (nodes[0], nodes[nodes.len() - 1]),
        };
        lo = lo.min(l);
        hi = hi.max(h);
    }
    let x0 = if c > 0.0 { a / (2.0 * c) } else { 0.0 };
    let r = if lo <= hi { x0.clamp(lo, hi) } else { 0.0 };
    let tilt = Tilt {
        r,
        lin: a - 2.0 * c * r,
        curv: c,
    };
    (tilt, a * r - c * r * r)
}

#[derive(Clone)]
pub struct CustomPayoff(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl fmt::Debug for CustomPayoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomPayoff(..)")
    }
}

/// Cash flow `h(X_T)` paid at `T`.
#[derive(Debug, Clone)]
pub enum Payoff {
    /// `h(x) = x`.
    Identity,
    /// `h(x) = e^{q x}`; `q = 0` is the unit payoff.
    ExponentialScale {
        q: f64,
    },
    /// `h(x) = e^{r T} 1{x <= K}`.
    Digital {
        strike: f64,
    },
    Custom(CustomPayoff),
}

impl Payoff {
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Payoff::Custom(CustomPayoff(Arc::new(f)))
    }

    /// `h(x)`; the digital payoff needs `r` and `T`.
    pub fn eval(&self, x: f64, r: f64, horizon: f64) -> f64 {
        match self {
            Payoff::Identity => x,
            Payoff::ExponentialScale { q } => (q * x).exp(),
            Payoff::Digital { strike } => {
                if x <= *strike {
                    (r * horizon).exp()
                } else {
                    0.0
                }
            }
            Payoff::Custom(f) => (f.0)(x),
        }
    }
}

// ---------------------------------------------------------------------------
// Continuous components
// ---------------------------------------------------------------------------

/// Tilted log-density `g(x) = ln p(x) + (a + eps) x - c x^2` of one
/// parametric component.
struct Tilted<'a> {
    comp: &'a Component,
    tilt: Tilt,
}

impl Tilted<'_> {
    fn support(&self) -> (f64, f64) {
        match *self.comp {
            Component::Uniform { a, b } => (a, b),
            Component::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Component::Exponential { .. } => (0.0, f64::INFINITY),
            _ => unreachable!("only parametric components are tilted"),
        }
    }

    /// Starting point and length scale for the bracket search.
    fn anchor(&self) -> (f64, f64) {
        let (x0, scale) = match *self.comp {
            Component::Uniform { a, b } => (0.5 * (a + b), b - a),
            Component::Normal { mu, nu } => (mu, nu),
            Component::Exponential { lambda } => (1.0 / lambda, 1.0 / lambda),
            _ => unreachable!(),
        };
        if self.tilt.curv > 0.0 {
            let kernel_scale = (0.5 / self.tilt.curv).sqrt();
            (x0, scale.min(kernel_scale))
        } else {
            (x0, scale)
        }
    }

    fn log_prior(&self, x: f64) -> f64 {
        match *self.comp {
            Component::Uniform { a, b } => -(b - a).ln(),
            Component::Normal { mu, nu } => {
                let z = (x - mu) / nu;
                -0.5 * z * z - nu.ln() - LN_SQRT_2PI
            }
            Component::Exponential { lambda } => lambda.ln() - lambda * x,
            _ => unreachable!(),
        }
    }

    fn dlog_prior(&self, x: f64) -> f64 {
        match *self.comp {
            Component::Uniform { .. } => 0.0,
            Component::Normal { mu, nu } => -(x - mu) / (nu * nu),
            Component::Exponential { lambda } => -lambda,
            _ => unreachable!(),
        }
    }

    fn g(&self, x: f64) -> f64 {
        self.log_prior(x) + self.tilt.at(x)
    }

    fn dg(&self, x: f64) -> f64 {
        self.dlog_prior(x) + self.tilt.deriv(x)
    }
}

/// Quadrature nodes over one component with their tilted log-densities.
struct NodeSet {
    xs: Vec<f64>,
    qweights: Vec<f64>,
    log_vals: Vec<f64>,
    /// `ln int p(x) e^{tilt(x)} dx` over the clipped support.
    log_mass: f64,
    /// Windows cut short of an infinite support boundary, with the tilted
    /// log-density there; used to detect payoffs that outgrow the window.
    open_edges: Vec<(f64, f64)>,
}

impl NodeSet {
    fn empty() -> Self {
        Self {
            xs: vec![],
            qweights: vec![],
            log_vals: vec![],
            log_mass: f64::NEG_INFINITY,
            open_edges: vec![],
        }
    }
}

fn not_integrable(comp: &Component, state_slope: f64) -> Error {
    Error::Integrability(format!(
        "tilted density of {comp:?} does not decay (linear tilt {state_slope})"
    ))
}

/// Root of the decreasing function `dg` on `[lo, hi]` (or the end where it
/// keeps its sign), by bracketing outwards from `x0` and bisecting.
fn find_mode(t: &Tilted<'_>, lo: f64, hi: f64) -> Result<f64> {
    let (anchor, scale) = t.anchor();
    let x0 = anchor.clamp(lo, hi);
    let d0 = t.dg(x0);
    if d0 == 0.0 {
        return Ok(x0);
    }
    let dir = if d0 > 0.0 { 1.0 } else { -1.0 };
    let end = if dir > 0.0 { hi } else { lo };
    if end.is_finite() && t.dg(end) * dir >= 0.0 {
        return Ok(end);
    }
    let (mut inner, mut step) = (x0, scale);
    let mut outer = None;
    for _ in 0..MAX_DOUBLINGS {
        let x = inner + dir * step;
        let x = if dir > 0.0 { x.min(hi) } else { x.max(lo) };
        if !x.is_finite() {
            break;
        }
        if t.dg(x) * dir <= 0.0 {
            outer = Some(x);
            break;
        }
        inner = x;
        step *= 2.0;
    }
    let mut outer = outer.ok_or_else(|| not_integrable(t.comp, t.tilt.lin))?;
    for _ in 0..200 {
        let mid = 0.5 * (inner + outer);
        if mid == inner || mid == outer {
            break;
        }
        if t.dg(mid) * dir > 0.0 {
            inner = mid;
        } else {
            outer = mid;
        }
    }
    Ok(0.5 * (inner + outer))
}

/// Point beyond `mode` in direction `dir` where `g` drops below `target`,
/// or the support end if it never does.
fn find_edge(t: &Tilted<'_>, mode: f64, dir: f64, end: f64, target: f64, scale: f64) -> Result<f64> {
    if end.is_finite() && t.g(end) >= target {
        return Ok(end);
    }
    let (mut inner, mut step) = (mode, scale);
    let mut outer = None;
    for _ in 0..MAX_DOUBLINGS {
        let x = inner + dir * step;
        let x = if dir > 0.0 { x.min(end) } else { x.max(end) };
        if !x.is_finite() {
            break;
        }
        if t.g(x) < target {
            outer = Some(x);
            break;
        }
        inner = x;
        step *= 2.0;
    }
    let mut outer = outer.ok_or_else(|| not_integrable(t.comp, t.tilt.lin))?;
    for _ in 0..60 {
        let mid = 0.5 * (inner + outer);
        if t.g(mid) < target {
            outer = mid;
        } else {
            inner = mid;
        }
    }
    Ok(outer)
}

fn parametric_nodes(comp: &Component, tilt: Tilt, clip: (f64, f64)) -> Result<NodeSet> {
    let t = Tilted { comp, tilt };
    let (s_lo, s_hi) = t.support();
    let lo = s_lo.max(clip.0);
    let hi = s_hi.min(clip.1);
    if !(lo < hi) {
        return Ok(NodeSet::empty());
    }
    let mode = find_mode(&t, lo, hi)?;
    let peak = t.g(mode);
    let target = peak - WINDOW_DROP;
    let (_, scale) = t.anchor();
    let w_lo = find_edge(&t, mode, -1.0, lo, target, scale)?;
    let w_hi = find_edge(&t, mode, 1.0, hi, target, scale)?;

    let mut open_edges = Vec::new();
    if !lo.is_finite() {
        open_edges.push((w_lo, t.g(w_lo)));
    }
    if !hi.is_finite() {
        open_edges.push((w_hi, t.g(w_hi)));
    }

    let rule = GaussLegendre::standard();
    let mut xs = Vec::with_capacity(rule.nodes.len());
    let mut qweights = Vec::with_capacity(rule.nodes.len());
    let mut log_vals = Vec::with_capacity(rule.nodes.len());
    let mut acc = 0.0;
    if w_hi > w_lo {
        for (x, w) in rule.mapped(w_lo, w_hi) {
            let gv = t.g(x);
            acc += w * (gv - peak).exp();
            xs.push(x);
            qweights.push(w);
            log_vals.push(gv);
        }
    }
    Ok(NodeSet {
        xs,
        qweights,
        log_vals,
        log_mass: peak + acc.ln(),
        open_edges,
    })
}

fn tabulated_nodes(nodes: &[f64], densities: &[f64], tilt: Tilt, clip: (f64, f64)) -> NodeSet {
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(nodes.len() + 1);
    for i in 0..nodes.len() {
        let x = nodes[i];
        if x < clip.0 || x > clip.1 {
            continue;
        }
        pts.push((x, densities[i]));
    }
    // linear interpolation at a clip point falling strictly inside the table
    for &edge in &[clip.0, clip.1] {
        if edge > nodes[0] && edge < nodes[nodes.len() - 1] && !nodes.contains(&edge) {
            let i = nodes.partition_point(|&x| x < edge);
            let (x0, x1) = (nodes[i - 1], nodes[i]);
            let d = densities[i - 1] + (densities[i] - densities[i - 1]) * (edge - x0) / (x1 - x0);
            pts.push((edge, d));
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.len() < 2 {
        return NodeSet::empty();
    }
    let n = pts.len();
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let qweights: Vec<f64> = (0..n)
        .map(|i| {
            let left = if i > 0 { xs[i] - xs[i - 1] } else { 0.0 };
            let right = if i + 1 < n { xs[i + 1] - xs[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect();
    let log_vals: Vec<f64> = pts.iter().map(|&(x, d)| d.ln() + tilt.at(x)).collect();
    let log_mass = log_sum_exp(qweights.iter().zip(&log_vals).map(|(w, l)| w.ln() + l));
    NodeSet {
        xs,
        qweights,
        log_vals,
        log_mass,
        open_edges: vec![],
    }
}

fn component_nodes(comp: &Component, tilt: Tilt, clip: (f64, f64)) -> Result<NodeSet> {
    match comp {
        Component::Atom { .. } => unreachable!("atoms are summed exactly"),
        Component::Tabulated { nodes, densities } => Ok(tabulated_nodes(nodes, densities, tilt, clip)),
        other => parametric_nodes(other, tilt, clip),
    }
}

/// Unnormalised log-masses of every component under the tilt
/// `(a + eps) x - c x^2`, restricted to `clip`, less the constant
/// `(a + eps) r - c r^2` of the centred form.
fn component_log_masses(dist: &MarketFactorDistribution, tilt: Tilt, clip: (f64, f64)) -> Result<Vec<f64>> {
    dist.components
        .iter()
        .map(|wc| {
            if wc.weight == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            let lw = wc.weight.ln();
            match wc.component {
                Component::Atom { x } => {
                    if x < clip.0 || x > clip.1 {
                        Ok(f64::NEG_INFINITY)
                    } else {
                        Ok(lw + tilt.at(x))
                    }
                }
                ref comp => Ok(lw + component_nodes(comp, tilt, clip)?.log_mass),
            }
        })
        .collect()
}

const FULL_LINE: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);

// ---------------------------------------------------------------------------
// Posterior
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorAtom {
    pub x: f64,
    pub mass: f64,
}

/// Posterior restricted to one continuous prior component, carried on
/// quadrature nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorContinuous {
    /// Posterior probability of this component.
    pub mass: f64,
    pub xs: Vec<f64>,
    /// Posterior density at each node (including the component weight).
    pub densities: Vec<f64>,
    /// Posterior probability carried by each node; sums to `mass`.
    pub node_masses: Vec<f64>,
    open_edges: Vec<(f64, f64)>,
}

/// Law of `X_T` given the market state.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDistribution {
    /// `ln Z`, `Z = int exp(log_kernel(x)) F(dx)`.
    pub log_z: f64,
    /// One entry per prior atom, in prior order.
    pub atoms: Vec<PosteriorAtom>,
    /// One entry per continuous prior component, in prior order.
    pub continuous: Vec<PosteriorContinuous>,
    pub clamped: bool,
}

impl PosteriorDistribution {
    pub fn z(&self) -> f64 {
        self.log_z.exp()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum::<f64>() + self.continuous.iter().map(|c| c.mass).sum::<f64>()
    }

    /// `E[h(X_T) | state]` on the stored nodes.
    pub fn expectation(&self, h: impl Fn(f64) -> f64) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.mass * h(a.x)).sum();
        let cont: f64 = self
            .continuous
            .iter()
            .flat_map(|c| c.xs.iter().zip(&c.node_masses))
            .map(|(&x, &w)| w * h(x))
            .sum();
        atoms + cont
    }

    pub fn summary(&self) -> PosteriorSummary {
        PosteriorSummary {
            z: self.z(),
            log_z: self.log_z,
            atom_masses: self.atoms.iter().map(|a| a.mass).collect(),
            node_xs: self.continuous.iter().flat_map(|c| c.xs.iter().copied()).collect(),
            node_densities: self
                .continuous
                .iter()
                .flat_map(|c| c.densities.iter().copied())
                .collect(),
        }
    }
}

/// JSON record of a posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    #[serde(rename = "Z")]
    pub z: f64,
    #[serde(rename = "log_Z")]
    pub log_z: f64,
    pub atom_masses: Vec<f64>,
    pub node_xs: Vec<f64>,
    pub node_densities: Vec<f64>,
}

/// Bayes update of the prior by the information kernel.
pub fn posterior(dist: &MarketFactorDistribution, state: &MarketState) -> Result<PosteriorDistribution> {
    state.check()?;
    let (tilt, offset) = centred_tilt(dist, state);

    enum Part {
        Atom(f64, f64),
        Cont(f64, NodeSet),
    }
    let mut parts = Vec::with_capacity(dist.components.len());
    let mut max_log_kernel = f64::NEG_INFINITY;
    for wc in &dist.components {
        let lw = wc.weight.ln();
        match wc.component {
            Component::Atom { x } => {
                let lk = tilt.at(x);
                max_log_kernel = max_log_kernel.max(lk);
                parts.push(Part::Atom(x, lw + lk));
            }
            ref comp => {
                let ns = if wc.weight == 0.0 {
                    NodeSet::empty()
                } else {
                    component_nodes(comp, tilt, FULL_LINE)?
                };
                max_log_kernel = max_log_kernel.max(ns.log_mass);
                parts.push(Part::Cont(lw, ns));
            }
        }
    }

    let log_z = log_sum_exp(parts.iter().map(|p| match p {
        Part::Atom(_, l) => *l,
        Part::Cont(lw, ns) => lw + ns.log_mass,
    }));
    if !log_z.is_finite() {
        return Err(Error::Underflow {
            max_log_kernel: max_log_kernel + offset,
        });
    }

    let mut atoms = Vec::new();
    let mut continuous = Vec::new();
    for part in parts {
        match part {
            Part::Atom(x, l) => atoms.push(PosteriorAtom {
                x,
                mass: (l - log_z).exp(),
            }),
            Part::Cont(lw, ns) => {
                let densities: Vec<f64> = ns.log_vals.iter().map(|l| (lw + l - log_z).exp()).collect();
                let node_masses: Vec<f64> = densities.iter().zip(&ns.qweights).map(|(d, w)| d * w).collect();
                continuous.push(PosteriorContinuous {
                    mass: (lw + ns.log_mass - log_z).exp(),
                    xs: ns.xs,
                    densities,
                    node_masses,
                    open_edges: ns
                        .open_edges
                        .into_iter()
                        .map(|(x, l)| (x, (lw + l - log_z).exp()))
                        .collect(),
                });
            }
        }
    }
    Ok(PosteriorDistribution {
        log_z: log_z + offset,
        atoms,
        continuous,
        clamped: state.clamped,
    })
}

// ---------------------------------------------------------------------------
// Prices
// ---------------------------------------------------------------------------

/// `S_t = e^{-r(T-t)} E[h(X_T) | xi_t, gamma_tT]`.
pub fn price(payoff: &Payoff, dist: &MarketFactorDistribution, state: &MarketState) -> Result<f64> {
    state.check()?;
    match payoff {
        Payoff::Digital { strike } => digital_price(*strike, dist, state),
        Payoff::ExponentialScale { q } => {
            if !q.is_finite() {
                return Err(Error::Integrability(format!("payoff exponent {q} not finite")));
            }
            let (tilt, _) = centred_tilt(dist, state);
            let log_z = log_sum_exp(component_log_masses(dist, tilt, FULL_LINE)?);
            if !log_z.is_finite() {
                return Err(Error::Underflow { max_log_kernel: log_z });
            }
            // e^{q x} = e^{q r} e^{q (x - r)}
            let log_num = log_sum_exp(component_log_masses(dist, tilt.shifted(*q), FULL_LINE)?);
            let value = state.discount() * (q * tilt.r + log_num - log_z).exp();
            if !value.is_finite() {
                return Err(Error::Integrability(format!("e^({q} x) has no finite posterior mean")));
            }
            Ok(value)
        }
        Payoff::Identity => expectation_price(|x| x, dist, state),
        Payoff::Custom(f) => expectation_price(|x| (f.0)(x), dist, state),
    }
}

fn expectation_price(h: impl Fn(f64) -> f64, dist: &MarketFactorDistribution, state: &MarketState) -> Result<f64> {
    let post = posterior(dist, state)?;
    let value = post.expectation(&h);
    if !value.is_finite() {
        return Err(Error::Integrability("payoff has no finite posterior mean".into()));
    }
    // a payoff that is still significant where the window was cut is not
    // captured by the nodes
    for c in &post.continuous {
        let width = match (c.xs.first(), c.xs.last()) {
            (Some(a), Some(b)) => b - a,
            _ => continue,
        };
        for &(x, dens) in &c.open_edges {
            let edge = (h(x) * dens * width).abs();
            if !(edge <= EDGE_TOL * value.abs().max(f64::MIN_POSITIVE)) {
                return Err(Error::Integrability(format!(
                    "payoff still carries {edge:e} at the quadrature cut-off x={x}"
                )));
            }
        }
    }
    Ok(state.discount() * value)
}

/// Posterior probability `P(X_T <= strike | state)`.
pub fn posterior_cdf(strike: f64, dist: &MarketFactorDistribution, state: &MarketState) -> Result<f64> {
    state.check()?;
    let (tilt, _) = centred_tilt(dist, state);
    let log_z = log_sum_exp(component_log_masses(dist, tilt, FULL_LINE)?);
    if !log_z.is_finite() {
        return Err(Error::Underflow { max_log_kernel: log_z });
    }
    let log_below = log_sum_exp(component_log_masses(dist, tilt, (f64::NEG_INFINITY, strike))?);
    Ok((log_below - log_z).exp().min(1.0))
}

/// Price of `e^{rT} 1{X_T <= strike}`: `e^{rt} P(X_T <= strike | state)`.
pub fn digital_price(strike: f64, dist: &MarketFactorDistribution, state: &MarketState) -> Result<f64> {
    Ok((state.r * state.t).exp() * posterior_cdf(strike, dist, state)?)
}

/// Price trajectory along one simulated path using `pricer` for `t < T`;
/// the last node carries the limit `h(X_T)`.
pub fn price_path_with(
    path: &SamplePath,
    grid: &TimeGrid,
    params: &ModelParams,
    terminal: f64,
    pricer: impl Fn(&MarketState) -> Result<f64>,
) -> Result<Vec<f64>> {
    let n = grid.n_steps();
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..n {
        let state = MarketState::at(params, grid.time(k), path.info[k], path.bridge[k])?;
        out.push(pricer(&state)?);
    }
    out.push(terminal);
    Ok(out)
}

/// Price trajectory with the general kernel.
pub fn price_path(
    payoff: &Payoff,
    dist: &MarketFactorDistribution,
    path: &SamplePath,
    grid: &TimeGrid,
    params: &ModelParams,
) -> Result<Vec<f64>> {
    let terminal = payoff.eval(path.x_draw, params.r, params.horizon);
    price_path_with(path, grid, params, terminal, |s| price(payoff, dist, s))
}
