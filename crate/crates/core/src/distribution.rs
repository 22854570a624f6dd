//! A priori law of the market factor `X_T`: a finite mixture of point
//! masses and continuous components.

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_math::normal_cdf;

const WEIGHT_TOL: f64 = 1e-12;
const TABULATED_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Component {
    /// Point mass at `x`.
    Atom { x: f64 },
    /// Uniform on `[a, b)`.
    Uniform { a: f64, b: f64 },
    /// Normal with mean `mu` and standard deviation `nu`.
    Normal { mu: f64, nu: f64 },
    /// Exponential with rate `lambda` on `[0, inf)`.
    Exponential { lambda: f64 },
    /// Piecewise-linear density through `(nodes[i], densities[i])`.
    Tabulated { nodes: Vec<f64>, densities: Vec<f64> },
}

impl Component {
    pub fn is_atom(&self) -> bool {
        matches!(self, Component::Atom { .. })
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Distribution(msg));
        match *self {
            Component::Atom { x } if !x.is_finite() => bad(format!("atom location {x} not finite")),
            Component::Uniform { a, b } if !(a.is_finite() && b.is_finite() && a < b) => {
                bad(format!("uniform needs finite a < b, got [{a}, {b})"))
            }
            Component::Normal { mu, nu } if !(mu.is_finite() && nu > 0.0 && nu.is_finite()) => {
                bad(format!("normal needs finite mu and nu > 0, got mu={mu}, nu={nu}"))
            }
            Component::Exponential { lambda } if !(lambda > 0.0 && lambda.is_finite()) => {
                bad(format!("exponential needs lambda > 0, got {lambda}"))
            }
            Component::Tabulated {
                ref nodes,
                ref densities,
            } => {
                if nodes.len() < 2 || nodes.len() != densities.len() {
                    return bad(format!(
                        "tabulated density needs >= 2 nodes and matching densities ({} nodes, {} densities)",
                        nodes.len(),
                        densities.len()
                    ));
                }
                if !nodes.iter().all(|x| x.is_finite()) || !nodes.windows(2).all(|w| w[0] < w[1]) {
                    return bad("tabulated nodes must be finite and strictly increasing".into());
                }
                if !densities.iter().all(|d| d.is_finite() && *d >= 0.0) {
                    return bad("tabulated densities must be finite and nonnegative".into());
                }
                let total = trapezoid_total(nodes, densities);
                if (total - 1.0).abs() > TABULATED_TOL {
                    return bad(format!("tabulated density integrates to {total}, not 1"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        match *self {
            Component::Atom { x: a } => f64::from(u8::from(x >= a)),
            Component::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Component::Normal { mu, nu } => normal_cdf((x - mu) / nu),
            Component::Exponential { lambda } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-lambda * x).exp_m1()
                }
            }
            Component::Tabulated {
                ref nodes,
                ref densities,
            } => {
                let mut acc = 0.0;
                for i in 0..nodes.len() - 1 {
                    let (x0, x1) = (nodes[i], nodes[i + 1]);
                    if x <= x0 {
                        break;
                    }
                    let h = x1 - x0;
                    let s = (x.min(x1)) - x0;
                    let slope = (densities[i + 1] - densities[i]) / h;
                    acc += densities[i] * s + 0.5 * slope * s * s;
                }
                acc.clamp(0.0, 1.0)
            }
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Component::Atom { x } => x,
            Component::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
            Component::Normal { mu, nu } => Normal::new(mu, nu).expect("validated normal").sample(rng),
            Component::Exponential { lambda } => Exp::new(lambda).expect("validated exponential").sample(rng),
            Component::Tabulated {
                ref nodes,
                ref densities,
            } => sample_tabulated(nodes, densities, rng.random::<f64>()),
        }
    }
}

fn trapezoid_total(nodes: &[f64], densities: &[f64]) -> f64 {
    nodes
        .windows(2)
        .zip(densities.windows(2))
        .map(|(x, d)| 0.5 * (x[1] - x[0]) * (d[0] + d[1]))
        .sum()
}

/// Inverse-CDF draw from a piecewise-linear density.
fn sample_tabulated(nodes: &[f64], densities: &[f64], u: f64) -> f64 {
    let total = trapezoid_total(nodes, densities);
    let mut target = u * total;
    for i in 0..nodes.len() - 1 {
        let h = nodes[i + 1] - nodes[i];
        let mass = 0.5 * h * (densities[i] + densities[i + 1]);
        if target <= mass || i == nodes.len() - 2 {
            let d0 = densities[i];
            let slope = (densities[i + 1] - d0) / h;
            let disc = (d0 * d0 + 2.0 * slope * target).max(0.0);
            let denom = d0 + disc.sqrt();
            let s = if denom > 0.0 { 2.0 * target / denom } else { 0.0 };
            return nodes[i] + s.clamp(0.0, h);
        }
        target -= mass;
    }
    nodes[nodes.len() - 1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedComponent {
    pub weight: f64,
    #[serde(flatten)]
    pub component: Component,
}

/// Mixture prior for `X_T`. Weights sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketFactorDistribution {
    pub components: Vec<WeightedComponent>,
}

impl MarketFactorDistribution {
    pub fn new(components: Vec<WeightedComponent>) -> Result<Self> {
        let dist = Self { components };
        dist.validate()?;
        Ok(dist)
    }

    pub fn single(component: Component) -> Result<Self> {
        Self::new(vec![WeightedComponent { weight: 1.0, component }])
    }

    /// Point masses `(weight, location)`.
    pub fn atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            atoms
                .iter()
                .map(|&(weight, x)| WeightedComponent {
                    weight,
                    component: Component::Atom { x },
                })
                .collect(),
        )
    }

    pub fn normal(mu: f64, nu: f64) -> Result<Self> {
        Self::single(Component::Normal { mu, nu })
    }

    pub fn exponential(lambda: f64) -> Result<Self> {
        Self::single(Component::Exponential { lambda })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::single(Component::Uniform { a, b })
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::Distribution("no components".into()));
        }
        for (i, c) in self.components.iter().enumerate() {
            if !(c.weight >= 0.0 && c.weight <= 1.0) {
                return Err(Error::Distribution(format!(
                    "component {i}: weight {} outside [0, 1]",
                    c.weight
                )));
            }
            c.component
                .validate()
                .map_err(|e| Error::Distribution(format!("component {i}: {e}")))?;
        }
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::Distribution(format!("weights sum to {total}, not 1")));
        }
        Ok(())
    }

    /// `P(X_T <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * c.component.cdf(x))
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let last = self
            .components
            .iter()
            .rposition(|c| c.weight > 0.0)
            .unwrap_or(self.components.len() - 1);
        for (i, c) in self.components.iter().enumerate() {
            acc += c.weight;
            if u < acc || i == last {
                return c.component.sample(rng);
            }
        }
        unreachable!("mixture selection always returns")
    }
}
