//! Special functions and closed-form Lévy / bridge analytics.
//!
//! Everything here is a pure function of its arguments. The exponential
//! integral uses the usual two-regime scheme (power series for `z <= 1`,
//! modified Lentz continued fraction above). Gaussian tail quantities go
//! through the scaled complementary error function so posterior weights
//! stay finite deep in the tails.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Jump-size interval `[lo, hi]` with `0 < lo < hi < inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevyInterval {
    lo: f64,
    hi: f64,
}

impl LevyInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
            return Err(Error::domain(
                "LevyInterval",
                format!("need 0 < lo < hi < inf, got [{lo}, {hi}]"),
            ));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Gamma process parameters: shape rate `m` per unit time and scale `kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    pub m: f64,
    pub kappa: f64,
}

impl GammaParams {
    pub fn new(m: f64, kappa: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite() && kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::domain(
                "GammaParams",
                format!("m and kappa must be positive and finite, got m={m}, kappa={kappa}"),
            ));
        }
        Ok(Self { m, kappa })
    }

    /// Standard subordinator: `kappa = 1/m`, so `E[gamma_t] = t`.
    pub fn standard(m: f64) -> Result<Self> {
        Self::new(m, 1.0 / m)
    }

    pub fn is_standard(&self) -> bool {
        self.kappa * self.m == 1.0
    }

    /// Mean growth per unit time, `kappa * m`.
    pub fn mean_rate(&self) -> f64 {
        self.kappa * self.m
    }

    /// Variance growth per unit time, `kappa^2 * m`.
    pub fn variance_rate(&self) -> f64 {
        self.kappa * self.kappa * self.m
    }
}

/// Exponential integral `E1(z) = int_z^inf e^{-x}/x dx` for `z > 0`.
pub fn exp_integral_e1(z: f64) -> Result<f64> {
    Ok(ln_exp_integral_e1(z)?.exp())
}

/// `ln E1(z)`; stays finite where `E1` itself would underflow.
pub fn ln_exp_integral_e1(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::domain("exp_integral_e1", format!("need z > 0, got {z}")));
    }
    if z == f64::INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    if z <= 1.0 {
        // E1(z) = -gamma - ln z + sum_{k>=1} (-1)^{k+1} z^k / (k k!)
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..200 {
            let kf = k as f64;
            term *= -z / kf;
            let contrib = -term / kf;
            sum += contrib;
            if contrib.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        Ok((-EULER_GAMMA - z.ln() + sum).ln())
    } else {
        // Modified Lentz on the even form of the continued fraction.
        const TINY: f64 = 1e-300;
        let mut b = z + 1.0;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        Ok(h.ln() - z)
    }
}

/// Lévy measure of the standard gamma subordinator on `iv`:
/// `m (E1(m lo) - E1(m hi))`.
pub fn levy_measure_interval(m: f64, iv: &LevyInterval) -> Result<f64> {
    Ok(ln_levy_measure_interval(m, iv)?.exp())
}

fn ln_levy_measure_interval(m: f64, iv: &LevyInterval) -> Result<f64> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::domain("levy_measure_interval", format!("need m > 0, got {m}")));
    }
    let la = ln_exp_integral_e1(m * iv.lo)?;
    let lb = ln_exp_integral_e1(m * iv.hi)?;
    Ok(m.ln() + la + (-(lb - la).exp_m1()).ln())
}

/// Ratio of Lévy measures `nu_m[ab] / nu_m[cd]`.
pub fn levy_ratio(m: f64, ab: &LevyInterval, cd: &LevyInterval) -> Result<f64> {
    if ab == cd {
        return Ok(1.0);
    }
    Ok((ln_levy_measure_interval(m, ab)? - ln_levy_measure_interval(m, cd)?).exp())
}

/// Lévy exponent of the gamma process, `-m ln(1 - kappa alpha)`.
pub fn gamma_levy_exponent(alpha: f64, p: &GammaParams) -> Result<f64> {
    if !(alpha * p.kappa < 1.0) {
        return Err(Error::domain(
            "gamma_levy_exponent",
            format!("need alpha < 1/kappa = {}, got {alpha}", 1.0 / p.kappa),
        ));
    }
    Ok(-p.m * (-p.kappa * alpha).ln_1p())
}

/// Lévy exponent of the standard variance-gamma process, `-m ln(1 - alpha^2/(2m))`.
pub fn vg_levy_exponent(alpha: f64, m: f64) -> Result<f64> {
    if !(m > 0.0) || !(alpha * alpha < 2.0 * m) {
        return Err(Error::domain(
            "vg_levy_exponent",
            format!("need alpha^2 < 2m, got alpha={alpha}, m={m}"),
        ));
    }
    Ok(-m * (-alpha * alpha / (2.0 * m)).ln_1p())
}

/// Rising factorial `(a)_n = a (a+1) ... (a+n-1)`, `(a)_0 = 1`.
pub fn pochhammer(a: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (a + k as f64))
}

/// Raw moment `E[Gamma_t^n] = kappa^n (m t)_n`.
pub fn subordinator_moment(n: u32, p: &GammaParams, t: f64) -> f64 {
    p.kappa.powi(n as i32) * pochhammer(p.m * t, n)
}

fn check_bridge_time(op: &'static str, m: f64, t: f64, horizon: f64) -> Result<()> {
    if !(horizon > 0.0 && m > 0.0 && (0.0..=horizon).contains(&t)) {
        return Err(Error::domain(
            op,
            format!("need m > 0, T > 0 and 0 <= t <= T, got m={m}, t={t}, T={horizon}"),
        ));
    }
    Ok(())
}

/// Mean and variance of the gamma bridge `gamma_{tT}`:
/// `t/T` and `t (T-t) / (T^2 (1 + m T))`.
pub fn bridge_moments(m: f64, t: f64, horizon: f64) -> Result<(f64, f64)> {
    check_bridge_time("bridge_moments", m, t, horizon)?;
    let mean = t / horizon;
    let var = t * (horizon - t) / (horizon * horizon * (1.0 + m * horizon));
    Ok((mean, var))
}

/// Variance of the normalized variance-gamma bridge,
/// `m t (T-t) / (T (1 + m T))`.
pub fn vg_bridge_variance(m: f64, t: f64, horizon: f64) -> Result<f64> {
    check_bridge_time("vg_bridge_variance", m, t, horizon)?;
    Ok(m * t * (horizon - t) / (horizon * (1.0 + m * horizon)))
}

// ---------------------------------------------------------------------------
// Gaussian helpers
// ---------------------------------------------------------------------------

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

fn check_scale(op: &'static str, nu: f64) -> Result<()> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::domain(op, format!("need nu > 0, got {nu}")));
    }
    Ok(())
}

/// Density of Normal(mu, nu^2) at `x`.
pub fn normal_pdf_general(x: f64, mu: f64, nu: f64) -> Result<f64> {
    check_scale("normal_pdf_general", nu)?;
    Ok(normal_pdf((x - mu) / nu) / nu)
}

/// `N0(x, mu, nu) = P(Y <= x)` for `Y ~ Normal(mu, nu^2)`.
pub fn normal_partial_cdf(x: f64, mu: f64, nu: f64) -> Result<f64> {
    check_scale("normal_partial_cdf", nu)?;
    Ok(normal_cdf((x - mu) / nu))
}

/// Incomplete first moment `N1(x, mu, nu) = E[Y 1{Y <= x}]`.
pub fn incomplete_first_moment(x: f64, mu: f64, nu: f64) -> Result<f64> {
    check_scale("incomplete_first_moment", nu)?;
    if x == f64::INFINITY {
        return Ok(mu);
    }
    let z = (x - mu) / nu;
    Ok(mu * normal_cdf(z) - nu * normal_pdf(z))
}

/// `exp(x^2)` with the rounding error of `x*x` folded back in.
fn exp_square(x: f64) -> f64 {
    let hi = x * x;
    let lo = x.mul_add(x, -hi);
    hi.exp() * (1.0 + lo)
}

/// Scaled complementary error function `erfcx(x) = exp(x^2) erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 * exp_square(x) - erfcx(-x);
    }
    if x < 5.0 {
        return exp_square(x) * libm::erfc(x);
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    // erfc(x) e^{x^2} sqrt(pi) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let mut f = x;
    for k in (1..=80).rev() {
        f = x + 0.5 * k as f64 / f;
    }
    1.0 / (PI.sqrt() * f)
}

/// `ln N(z)`, accurate in both tails.
pub fn ln_normal_cdf(z: f64) -> f64 {
    if z < -5.0 {
        (0.5 * erfcx(-z * FRAC_1_SQRT_2)).ln() - 0.5 * z * z
    } else if z > 5.0 {
        (-normal_cdf(-z)).ln_1p()
    } else {
        normal_cdf(z).ln()
    }
}

/// `ln phi(z)` for the standard normal density.
pub fn ln_normal_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

/// Inverse Mills ratio `phi(z) / N(z)`.
pub fn inverse_mills(z: f64) -> f64 {
    if z < -5.0 {
        (2.0 / PI).sqrt() / erfcx(-z * FRAC_1_SQRT_2)
    } else {
        normal_pdf(z) / normal_cdf(z)
    }
}

/// `z + phi(z) / N(z)`, the mean of a standard normal conditioned on
/// `Z > -z`, shifted by `z`. Below `z = -5` the two terms nearly cancel, so
/// the continued fraction `1 / (u + 2 / (u + 3 / (u + ...)))` with `u = -z`
/// is used instead.
pub fn z_plus_inverse_mills(z: f64) -> f64 {
    if z >= -5.0 {
        return z + inverse_mills(z);
    }
    let u = -z;
    let mut tail = u;
    for k in (2..=120).rev() {
        tail = u + k as f64 / tail;
    }
    1.0 / tail
}

/// `ln(N(zb) - N(za))` for `za < zb`; either end may be infinite.
pub fn ln_normal_interval(za: f64, zb: f64) -> f64 {
    debug_assert!(za < zb);
    if zb <= 0.0 {
        let la = ln_normal_cdf(za);
        let lb = ln_normal_cdf(zb);
        lb + (-(la - lb).exp_m1()).ln()
    } else if za >= 0.0 {
        let la = ln_normal_cdf(-za);
        let lb = ln_normal_cdf(-zb);
        la + (-(lb - la).exp_m1()).ln()
    } else {
        (0.5 * (libm::erf(zb / SQRT_2) - libm::erf(za / SQRT_2))).ln()
    }
}

/// Mean of a standard normal truncated to `[za, zb]`.
pub fn truncated_normal_mean(za: f64, zb: f64) -> f64 {
    let l = ln_normal_interval(za, zb);
    (ln_normal_pdf(za) - l).exp() - (ln_normal_pdf(zb) - l).exp()
}

/// Numerically safe `ln(sum exp(x_i))`; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.into_iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}
