//! Independent numerical oracles for integration tests: adaptive Simpson
//! integration of prior times information kernel, written without the
//! library's quadrature or kernel code.

#![allow(dead_code)]

/// Prior piece with its mixture weight.
#[derive(Debug, Clone, Copy)]
pub enum Piece {
    Atom { w: f64, x: f64 },
    Uniform { w: f64, a: f64, b: f64 },
    Normal { w: f64, mu: f64, nu: f64 },
    Exponential { w: f64, lambda: f64 },
}

/// Model state at which a price is computed.
#[derive(Debug, Clone, Copy)]
pub struct State {
    pub t: f64,
    pub horizon: f64,
    pub xi: f64,
    pub bridge: f64,
    pub sigma: f64,
    pub r: f64,
}

/// Payoff as `x^p e^{q x}` with `p` in `{0, 1}`.
#[derive(Debug, Clone, Copy)]
pub struct Integrand {
    pub linear: bool,
    pub q: f64,
}

pub const IDENTITY: Integrand = Integrand { linear: true, q: 0.0 };

pub fn exp_scale(q: f64) -> Integrand {
    Integrand { linear: false, q }
}

fn log_tilt(x: f64, s: &State) -> f64 {
    (s.sigma * s.xi * x - 0.5 * s.sigma * s.sigma * x * x * s.bridge) / (1.0 - s.bridge)
}

fn support(p: &Piece) -> (f64, f64) {
    match *p {
        Piece::Atom { x, .. } => (x, x),
        Piece::Uniform { a, b, .. } => (a, b),
        Piece::Normal { mu, nu, .. } => (mu - 200.0 * nu, mu + 200.0 * nu),
        Piece::Exponential { lambda, .. } => (0.0, 2000.0 / lambda),
    }
}

fn log_prior_density(p: &Piece, x: f64) -> f64 {
    match *p {
        Piece::Atom { .. } => unreachable!(),
        Piece::Uniform { w, a, b } => w.ln() - (b - a).ln(),
        Piece::Normal { w, mu, nu } => {
            let z = (x - mu) / nu;
            w.ln() - 0.5 * z * z - nu.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
        }
        Piece::Exponential { w, lambda } => w.ln() + lambda.ln() - lambda * x,
    }
}

/// Golden-section maximum of a concave function on `[lo, hi]`.
fn argmax(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..300 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
        if hi - lo <= 1e-15 * (1.0 + lo.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// One refinement of `whole`, the Simpson estimate on `[a, b]`; `ends` holds
/// `(a, f(a))` and `(b, f(b))`.
fn simpson_step(f: &impl Fn(f64) -> f64, ends: [(f64, f64); 2], fm: f64, whole: f64, eps: f64, depth: u32) -> f64 {
    let [(a, fa), (b, fb)] = ends;
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    simpson_step(f, [(a, fa), (m, fm)], flm, left, 0.5 * eps, depth - 1)
        + simpson_step(f, [(m, fm), (b, fb)], frm, right, 0.5 * eps, depth - 1)
}

/// Adaptive Simpson with Richardson correction, run on `panels` equal
/// panels.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, eps: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            simpson_step(&f, [(lo, fa), (hi, fb)], fm, whole, eps / panels as f64, 30)
        })
        .sum()
}

/// `ln int e^{g(x)} dx` over the piece for a concave `g`; the window is
/// where `g` lies within 60 nats of its peak.
fn log_integral(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let mode = argmax(&g, lo, hi);
    let peak = g(mode);
    let edge = |dir: f64, bound: f64| {
        let mut step = 1e-6 * (1.0 + mode.abs());
        loop {
            let x = mode + dir * step;
            if dir * (x - bound) >= 0.0 {
                return bound;
            }
            if g(x) < peak - 60.0 {
                return x;
            }
            step *= 1.5;
        }
    };
    let (a, b) = (edge(-1.0, lo), edge(1.0, hi));
    if b <= a {
        return f64::NEG_INFINITY;
    }
    let val = adaptive_simpson(|x| (g(x) - peak).exp(), a, b, 1e-13 * (b - a), 64);
    peak + val.ln()
}

/// `ln int sign^p x^p e^{q x} e^{tilt} F(dx)` over `sign x > 0` (or all of
/// the support when `p = 0`).
fn log_moment(pieces: &[Piece], s: &State, linear: bool, q: f64, sign: f64) -> f64 {
    let mut terms = Vec::new();
    for p in pieces {
        let extra = |x: f64| q * x + if linear { (sign * x).ln() } else { 0.0 };
        match *p {
            Piece::Atom { w, x } => {
                if !linear || sign * x > 0.0 {
                    terms.push(w.ln() + log_tilt(x, s) + extra(x));
                }
            }
            _ => {
                let (mut lo, mut hi) = support(p);
                if linear && sign > 0.0 {
                    lo = lo.max(0.0);
                } else if linear {
                    hi = hi.min(0.0);
                }
                if hi > lo {
                    terms.push(log_integral(
                        |x| log_prior_density(p, x) + log_tilt(x, s) + extra(x),
                        lo,
                        hi,
                    ));
                }
            }
        }
    }
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Discounted `E[h(X_T) | state]` for a mixture prior.
pub fn oracle_price(pieces: &[Piece], h: Integrand, s: &State) -> f64 {
    let disc = (-s.r * (s.horizon - s.t)).exp();
    let den = log_moment(pieces, s, false, 0.0, 1.0);
    if h.linear {
        let pos = (log_moment(pieces, s, true, h.q, 1.0) - den).exp();
        let neg = (log_moment(pieces, s, true, h.q, -1.0) - den).exp();
        disc * (pos - neg)
    } else {
        disc * (log_moment(pieces, s, false, h.q, 1.0) - den).exp()
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}
