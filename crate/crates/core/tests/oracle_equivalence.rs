//! Closed-form prices and the general kernel against an independent
//! adaptive-Simpson oracle.

mod common;

use common::{exp_scale, oracle_price, rel_err, Piece, State, IDENTITY};
use vgip::closed_form::{
    binary_bond_price, exponential_payoff_price, lognormal_price, power_payoff_price, recovery_bond_price,
    BinaryBondSpec, ExponentialSpec, LogNormalSpec, RecoveryBondSpec,
};
use vgip::distribution::{Component, WeightedComponent};
use vgip::pricing_kernel::price;
use vgip::verify::oracle_states;
use vgip::{MarketFactorDistribution, MarketState, Payoff};

fn to_oracle(s: &MarketState) -> State {
    State {
        t: s.t,
        horizon: s.horizon,
        xi: s.xi,
        bridge: s.bridge,
        sigma: s.sigma,
        r: s.r,
    }
}

fn worst_gap(pieces: &[Piece], h: common::Integrand, f: impl Fn(&MarketState) -> f64) -> (f64, String) {
    let mut worst = (0.0, String::new());
    for s in oracle_states().unwrap() {
        let e = rel_err(f(&s), oracle_price(pieces, h, &to_oracle(&s)));
        if e > worst.0 {
            worst = (e, format!("xi={} b={} sigma={}", s.xi, s.bridge, s.sigma));
        }
    }
    worst
}

#[test]
fn binary_bond_matches_oracle() {
    let spec = BinaryBondSpec::new(0.4, 0.6).unwrap();
    let pieces = [Piece::Atom { w: 0.4, x: 0.0 }, Piece::Atom { w: 0.6, x: 1.0 }];
    let (gap, at) = worst_gap(&pieces, IDENTITY, |s| binary_bond_price(&spec, s).unwrap());
    assert!(gap <= 1e-10, "{gap:e} at {at}");
}

#[test]
fn recovery_bond_matches_oracle() {
    let spec = RecoveryBondSpec::new(0.4, 0.6, 0.0, 0.5, 1.0).unwrap();
    let pieces = [
        Piece::Uniform { w: 0.4, a: 0.0, b: 0.5 },
        Piece::Atom { w: 0.6, x: 1.0 },
    ];
    let (gap, at) = worst_gap(&pieces, IDENTITY, |s| recovery_bond_price(&spec, s).unwrap());
    assert!(gap <= 1e-8, "{gap:e} at {at}");
}

#[test]
fn lognormal_and_power_payoffs_match_oracle() {
    for q in [1.0, 2.0] {
        let spec = LogNormalSpec::new(0.0, 1.0, q).unwrap();
        let pieces = [Piece::Normal {
            w: 1.0,
            mu: 0.0,
            nu: 1.0,
        }];
        let (gap, at) = worst_gap(&pieces, exp_scale(q), |s| {
            if q == 1.0 {
                lognormal_price(&spec, s).unwrap()
            } else {
                power_payoff_price(&spec, s).unwrap()
            }
        });
        assert!(gap <= 1e-8, "q={q}: {gap:e} at {at}");
    }
}

#[test]
fn exponential_payoff_matches_oracle() {
    let spec = ExponentialSpec::new(1.0).unwrap();
    let pieces = [Piece::Exponential { w: 1.0, lambda: 1.0 }];
    let (gap, at) = worst_gap(&pieces, IDENTITY, |s| exponential_payoff_price(&spec, s).unwrap());
    assert!(gap <= 1e-8, "{gap:e} at {at}");
}

#[test]
fn general_kernel_on_mixture_matches_oracle() {
    let dist = MarketFactorDistribution::new(vec![
        WeightedComponent {
            weight: 0.2,
            component: Component::Atom { x: 0.5 },
        },
        WeightedComponent {
            weight: 0.3,
            component: Component::Normal { mu: -1.0, nu: 0.5 },
        },
        WeightedComponent {
            weight: 0.3,
            component: Component::Exponential { lambda: 2.0 },
        },
        WeightedComponent {
            weight: 0.2,
            component: Component::Uniform { a: 1.0, b: 3.0 },
        },
    ])
    .unwrap();
    let pieces = [
        Piece::Atom { w: 0.2, x: 0.5 },
        Piece::Normal {
            w: 0.3,
            mu: -1.0,
            nu: 0.5,
        },
        Piece::Exponential { w: 0.3, lambda: 2.0 },
        Piece::Uniform { w: 0.2, a: 1.0, b: 3.0 },
    ];
    for (payoff, h) in [
        (Payoff::Identity, IDENTITY),
        (Payoff::ExponentialScale { q: 0.7 }, exp_scale(0.7)),
    ] {
        let (gap, at) = worst_gap(&pieces, h, |s| price(&payoff, &dist, s).unwrap());
        assert!(gap <= 1e-8, "{payoff:?}: {gap:e} at {at}");
    }
}

#[test]
fn binary_bond_spot_value() {
    let spec = BinaryBondSpec::new(0.4, 0.6).unwrap();
    let s = MarketState::new(0.5, 1.0, 0.5, 0.5, 1.0, 0.0, 100.0).unwrap();
    let p = binary_bond_price(&spec, &s).unwrap();
    // 0.6 e^{1/2} / (0.4 + 0.6 e^{1/2})
    assert!((p - 0.712_071_288_7).abs() < 1e-9, "{p}");
    assert!((p - 0.71207).abs() <= 1e-5);
}

#[test]
fn recovery_bond_small_bridge_matches_oracle() {
    let spec = RecoveryBondSpec::new(0.4, 0.6, 0.0, 0.5, 1.0).unwrap();
    let pieces = [
        Piece::Uniform { w: 0.4, a: 0.0, b: 0.5 },
        Piece::Atom { w: 0.6, x: 1.0 },
    ];
    for b in [1e-7f64, 1e-5, 1e-3] {
        let s = MarketState::new(0.5, 1.0, 0.3 * b + 2.0 * b.sqrt(), b, 1.5, 0.02, 100.0).unwrap();
        let closed = recovery_bond_price(&spec, &s).unwrap();
        let oracle = oracle_price(&pieces, IDENTITY, &to_oracle(&s));
        assert!(rel_err(closed, oracle) <= 1e-9, "b={b}: {closed} vs {oracle}");
    }
}
