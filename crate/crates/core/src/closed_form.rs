//! Analytic prices for the standard priors, and the dispatcher that picks
//! them over the general kernel when the (prior, payoff) pair matches.
//!
//! Every formula is written in log space or in a sigmoid / Mills-ratio form,
//! since the tilt exponent grows like `1 / (1 - gamma_tT)`.
//!
//! The recovery-bond and exponential-payoff formulas contain `xi / gamma_tT`;
//! below [`SMALL_BRIDGE`] they hand the state to the general kernel.

use crate::distribution::{Component, MarketFactorDistribution, WeightedComponent};
use crate::error::{Error, Result};
use crate::pricing_kernel::{self, MarketState, Payoff};
use crate::quadrature::GaussLegendre;
use crate::special_math::{
    ln_normal_interval, ln_normal_pdf, log_sum_exp, truncated_normal_mean, z_plus_inverse_mills,
};

/// Bridge values below this are priced by the general kernel.
pub const SMALL_BRIDGE: f64 = 1e-8;

fn check_probabilities(p0: f64, p1: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p0) || !(0.0..=1.0).contains(&p1) || (p0 + p1 - 1.0).abs() > 1e-12 {
        return Err(Error::domain(
            "probabilities",
            format!("need p0, p1 in [0, 1] summing to 1, got {p0}, {p1}"),
        ));
    }
    Ok(())
}

/// Zero-recovery bond: `X_T = 0` with probability `p0`, `X_T = 1` with `p1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryBondSpec {
    pub p0: f64,
    pub p1: f64,
}

impl BinaryBondSpec {
    pub fn new(p0: f64, p1: f64) -> Result<Self> {
        check_probabilities(p0, p1)?;
        Ok(Self { p0, p1 })
    }

    pub fn prior(&self) -> Result<MarketFactorDistribution> {
        MarketFactorDistribution::atoms(&[(self.p0, 0.0), (self.p1, 1.0)])
    }
}

/// Bond with partial recovery: `X_T = c` with probability `p1`, otherwise
/// uniform on `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryBondSpec {
    pub p0: f64,
    pub p1: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl RecoveryBondSpec {
    pub fn new(p0: f64, p1: f64, a: f64, b: f64, c: f64) -> Result<Self> {
        check_probabilities(p0, p1)?;
        if !(0.0 <= a && a < b && b <= c && c.is_finite()) {
            return Err(Error::domain(
                "recovery_bond",
                format!("need 0 <= a < b <= c, got a={a}, b={b}, c={c}"),
            ));
        }
        Ok(Self { p0, p1, a, b, c })
    }

    pub fn prior(&self) -> Result<MarketFactorDistribution> {
        MarketFactorDistribution::new(vec![
            WeightedComponent {
                weight: self.p0,
                component: Component::Uniform { a: self.a, b: self.b },
            },
            WeightedComponent {
                weight: self.p1,
                component: Component::Atom { x: self.c },
            },
        ])
    }
}

/// Normal market factor `X_T ~ N(mu, nu^2)` with payoff `e^{q X_T}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormalSpec {
    pub mu: f64,
    pub nu: f64,
    pub q: f64,
}

impl LogNormalSpec {
    pub fn new(mu: f64, nu: f64, q: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) || !mu.is_finite() || !q.is_finite() {
            return Err(Error::domain(
                "lognormal",
                format!("need finite mu, q and nu > 0, got mu={mu}, nu={nu}, q={q}"),
            ));
        }
        Ok(Self { mu, nu, q })
    }

    pub fn prior(&self) -> Result<MarketFactorDistribution> {
        MarketFactorDistribution::normal(self.mu, self.nu)
    }
}

/// Exponential market factor with rate `lambda`, paid as `X_T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialSpec {
    pub lambda: f64,
}

impl ExponentialSpec {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::domain("exponential", format!("need lambda > 0, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    pub fn prior(&self) -> Result<MarketFactorDistribution> {
        MarketFactorDistribution::exponential(self.lambda)
    }
}

fn check_state(state: &MarketState) -> Result<()> {
    if !(state.bridge < 1.0) {
        return Err(Error::State(format!("bridge must be below 1, got {}", state.bridge)));
    }
    Ok(())
}

/// `e^{-r(T-t)} p1 e^A / (p0 + p1 e^A)` with
/// `A = (sigma xi - sigma^2 gamma / 2) / (1 - gamma)`.
pub fn binary_bond_price(spec: &BinaryBondSpec, state: &MarketState) -> Result<f64> {
    check_state(state)?;
    if spec.p1 == 0.0 {
        return Ok(0.0);
    }
    if spec.p0 == 0.0 {
        return Ok(state.discount());
    }
    let b = state.bridge;
    let a = (state.sigma * state.xi - 0.5 * state.sigma * state.sigma * b) / (1.0 - b);
    let logit = a + spec.p1.ln() - spec.p0.ln();
    let sigmoid = if logit >= 0.0 {
        1.0 / (1.0 + (-logit).exp())
    } else {
        let e = logit.exp();
        e / (1.0 + e)
    };
    Ok(state.discount() * sigmoid)
}

/// Posterior location and scale of the Gaussian kernel:
/// `(xi / (sigma gamma), sqrt((1 - gamma) / gamma) / sigma)`.
fn kernel_gaussian(state: &MarketState) -> (f64, f64) {
    let b = state.bridge;
    (state.xi / (state.sigma * b), ((1.0 - b) / b).sqrt() / state.sigma)
}

/// Kernel mass (log) and mean of `x` on the band `[a, b]` under the Gaussian
/// weight centred at `mu_hat` with scale `nu_hat`.
///
/// For a band narrow on the `nu_hat` scale, `mu_hat + nu_hat E[Z | band]`
/// cancels badly; there the band is parametrised from its midpoint,
/// `z = z_m + u` with `|u| <= h`, so the mass is
/// `phi(z_m) int exp(-z_m u - u^2/2) du` and the mean is the midpoint plus
/// `nu_hat` times the weighted mean of `u`.
fn band_moments(a: f64, b: f64, mu_hat: f64, nu_hat: f64) -> (f64, f64) {
    let za = (a - mu_hat) / nu_hat;
    let zb = (b - mu_hat) / nu_hat;
    let h = 0.5 * (zb - za);
    let zm = 0.5 * (za + zb);
    if h <= 1.0 && zm.abs() * h <= 50.0 {
        let rule = GaussLegendre::standard();
        let (mut i0, mut i1) = (0.0, 0.0);
        for (u, w) in rule.mapped(-h, h) {
            let e = w * (-zm * u - 0.5 * u * u).exp();
            i0 += e;
            i1 += u * e;
        }
        (ln_normal_pdf(zm) + i0.ln(), 0.5 * (a + b) + nu_hat * (i1 / i0))
    } else {
        let mean = mu_hat + nu_hat * truncated_normal_mean(za, zb);
        (ln_normal_interval(za, zb), mean.clamp(a, b))
    }
}

/// Recovery-bond price: the tilt is a Gaussian in `x` centred at
/// `xi / (sigma gamma)`, so the uniform part contributes a truncated-normal
/// mean and the atom at `c` contributes the Gaussian density at `c`.
pub fn recovery_bond_price(spec: &RecoveryBondSpec, state: &MarketState) -> Result<f64> {
    check_state(state)?;
    if state.bridge < SMALL_BRIDGE {
        return pricing_kernel::price(&Payoff::Identity, &spec.prior()?, state);
    }
    let (mu_hat, nu_hat) = kernel_gaussian(state);
    let zc = (spec.c - mu_hat) / nu_hat;
    let (ln_band_mass, band_mean) = band_moments(spec.a, spec.b, mu_hat, nu_hat);
    // uniform density p0 / (b - a) times the kernel mass on [a, b], against
    // the atom weight p1 times the kernel density at c
    let l_band = if spec.p0 > 0.0 {
        (spec.p0 / (spec.b - spec.a)).ln() + ln_band_mass
    } else {
        f64::NEG_INFINITY
    };
    let l_atom = if spec.p1 > 0.0 {
        spec.p1.ln() + ln_normal_pdf(zc) - nu_hat.ln()
    } else {
        f64::NEG_INFINITY
    };
    let l_total = log_sum_exp([l_band, l_atom]);
    if !l_total.is_finite() {
        return Err(Error::Underflow {
            max_log_kernel: l_total,
        });
    }
    let w_band = (l_band - l_total).exp();
    let w_atom = (l_atom - l_total).exp();
    let band = if w_band > 0.0 { w_band * band_mean } else { 0.0 };
    Ok(state.discount() * (band + w_atom * spec.c))
}

/// `(A_t, B_t at q = 0, C)` of the Gaussian tilt integral.
fn tilt_coefficients(spec: &LogNormalSpec, state: &MarketState) -> (f64, f64, f64) {
    let b = state.bridge;
    let nu2 = spec.nu * spec.nu;
    let a_t = (1.0 - b + nu2 * state.sigma * state.sigma * b) / (nu2 * (1.0 - b));
    let b0 = spec.mu / nu2 + state.sigma * state.xi / (1.0 - b);
    let c = spec.mu * spec.mu / (2.0 * nu2);
    (a_t, b0, c)
}

/// `ln I_t(q)` with `I_t(q) = exp(B_t^2 / (2 A_t) - C) / (nu sqrt(A_t))`
/// and `B_t = q + mu / nu^2 + sigma xi / (1 - gamma)`.
pub fn ln_gaussian_tilt_integral(q: f64, spec: &LogNormalSpec, state: &MarketState) -> Result<f64> {
    check_state(state)?;
    let (a_t, b0, c) = tilt_coefficients(spec, state);
    let b_q = q + b0;
    Ok(0.5 * b_q * b_q / a_t - c - spec.nu.ln() - 0.5 * a_t.ln())
}

/// `I_t(q) = integral of e^{q x} times the normal prior density times the kernel`.
pub fn gaussian_tilt_integral(q: f64, spec: &LogNormalSpec, state: &MarketState) -> Result<f64> {
    Ok(ln_gaussian_tilt_integral(q, spec, state)?.exp())
}

/// `e^{-r(T-t)} I_t(q) / I_t(0)`, expanded so the large `B_t^2` terms cancel
/// analytically: `ln(I(q) / I(0)) = (q B_t(0) + q^2 / 2) / A_t`.
pub fn power_payoff_price_i_ratio(spec: &LogNormalSpec, state: &MarketState) -> Result<f64> {
    check_state(state)?;
    let (a_t, b0, _) = tilt_coefficients(spec, state);
    let q = spec.q;
    let log_ratio = (q * b0 + 0.5 * q * q) / a_t;
    Ok((log_ratio - state.r * (state.horizon - state.t)).exp())
}

/// `C_t = e^{rt} C_0 exp[K (q xi / (sigma gamma) - q mu - q^2 nu^2 / 2)]` with
/// `C_0 = e^{-rT} e^{q mu + q^2 nu^2 / 2}` and
/// `K = nu^2 sigma^2 gamma / (1 - gamma + nu^2 sigma^2 gamma)`.
///
/// `K xi / (sigma gamma)` is evaluated as `nu^2 sigma xi / (1 - gamma + nu^2 sigma^2 gamma)`,
/// which also covers `gamma = 0`.
pub fn power_payoff_price(spec: &LogNormalSpec, state: &MarketState) -> Result<f64> {
    check_state(state)?;
    let b = state.bridge;
    let q = spec.q;
    let nu2 = spec.nu * spec.nu;
    let denom = 1.0 - b + nu2 * state.sigma * state.sigma * b;
    let k = nu2 * state.sigma * state.sigma * b / denom;
    let k_signal = nu2 * state.sigma * state.xi / denom;
    let prior_log_moment = q * spec.mu + 0.5 * q * q * nu2;
    let log_c0 = -state.r * state.horizon + prior_log_moment;
    Ok((state.r * state.t + log_c0 + q * k_signal - k * prior_log_moment).exp())
}

/// Price of the asset `e^{X_T}`; `spec.q` is ignored here.
pub fn lognormal_price(spec: &LogNormalSpec, state: &MarketState) -> Result<f64> {
    power_payoff_price(&LogNormalSpec { q: 1.0, ..*spec }, state)
}

/// The asset price through the tilt-integral ratio, the second of the two
/// algebraic forms.
pub fn lognormal_price_i_ratio(spec: &LogNormalSpec, state: &MarketState) -> Result<f64> {
    power_payoff_price_i_ratio(&LogNormalSpec { q: 1.0, ..*spec }, state)
}

/// Price of `X_T` under an exponential prior. The tilted density is a
/// normal truncated to `x >= 0` with location
/// `xi / (sigma gamma) - lambda (1 - gamma) / (sigma^2 gamma)`, so the price
/// is `e^{-r(T-t)} nu_hat (z + phi(z) / N(z))` with `z = mu_hat / nu_hat`.
pub fn exponential_payoff_price(spec: &ExponentialSpec, state: &MarketState) -> Result<f64> {
    check_state(state)?;
    if state.bridge < SMALL_BRIDGE {
        return pricing_kernel::price(&Payoff::Identity, &spec.prior()?, state);
    }
    let (loc, nu_hat) = kernel_gaussian(state);
    let b = state.bridge;
    let mu_hat = loc - spec.lambda * (1.0 - b) / (state.sigma * state.sigma * b);
    let z = mu_hat / nu_hat;
    Ok(state.discount() * nu_hat * z_plus_inverse_mills(z))
}

/// A (prior, payoff) pair with an analytic price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormCase {
    BinaryBond(BinaryBondSpec),
    RecoveryBond(RecoveryBondSpec),
    /// Normal prior with payoff `e^{q x}`.
    LogNormal(LogNormalSpec),
    Exponential(ExponentialSpec),
}

impl ClosedFormCase {
    /// Recognise the analytic cases. Binary and recovery bonds and the
    /// exponential prior need the identity payoff; a normal prior needs
    /// an exponential-scale payoff.
    pub fn detect(dist: &MarketFactorDistribution, payoff: &Payoff) -> Option<Self> {
        let comps = &dist.components;
        match payoff {
            Payoff::Identity => {
                if comps
                    .iter()
                    .all(|c| matches!(c.component, Component::Atom { x } if x == 0.0 || x == 1.0))
                {
                    let p1: f64 = comps
                        .iter()
                        .filter(|c| matches!(c.component, Component::Atom { x } if x == 1.0))
                        .map(|c| c.weight)
                        .sum();
                    return BinaryBondSpec::new(1.0 - p1, p1).ok().map(Self::BinaryBond);
                }
                match comps.as_slice() {
                    [one] => match one.component {
                        Component::Exponential { lambda } => ExponentialSpec::new(lambda).ok().map(Self::Exponential),
                        _ => None,
                    },
                    [x, y] => {
                        let (u, c) = if x.component.is_atom() { (y, x) } else { (x, y) };
                        match (&u.component, &c.component) {
                            (Component::Uniform { a, b }, Component::Atom { x }) => {
                                RecoveryBondSpec::new(u.weight, c.weight, *a, *b, *x)
                                    .ok()
                                    .map(Self::RecoveryBond)
                            }
                            _ => None,
                        }
                    }
                    _ => None,
                }
            }
            Payoff::ExponentialScale { q } => match comps.as_slice() {
                [one] => match one.component {
                    Component::Normal { mu, nu } => LogNormalSpec::new(mu, nu, *q).ok().map(Self::LogNormal),
                    _ => None,
                },
                _ => None,
            },
            _ => None,
        }
    }

    pub fn price(&self, state: &MarketState) -> Result<f64> {
        match self {
            Self::BinaryBond(s) => binary_bond_price(s, state),
            Self::RecoveryBond(s) => recovery_bond_price(s, state),
            Self::LogNormal(s) => power_payoff_price(s, state),
            Self::Exponential(s) => exponential_payoff_price(s, state),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::BinaryBond(_) => "binary_bond",
            Self::RecoveryBond(_) => "recovery_bond",
            Self::LogNormal(_) => "lognormal",
            Self::Exponential(_) => "exponential",
        }
    }
}

/// Pricing route for one (prior, payoff) pair.
#[derive(Debug, Clone)]
pub enum Pricer {
    Closed(ClosedFormCase),
    General {
        payoff: Payoff,
        dist: MarketFactorDistribution,
    },
}

impl Pricer {
    /// Closed form when one applies and `force_general` is off.
    pub fn select(dist: &MarketFactorDistribution, payoff: &Payoff, force_general: bool) -> Self {
        match ClosedFormCase::detect(dist, payoff) {
            Some(case) if !force_general => Pricer::Closed(case),
            _ => Pricer::General {
                payoff: payoff.clone(),
                dist: dist.clone(),
            },
        }
    }

    pub fn price(&self, state: &MarketState) -> Result<f64> {
        match self {
            Pricer::Closed(case) => case.price(state),
            Pricer::General { payoff, dist } => pricing_kernel::price(payoff, dist, state),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Pricer::Closed(case) => case.name(),
            Pricer::General { .. } => "general",
        }
    }
}
