//! Laws of the simulated processes and of the Lévy-measure helpers, checked
//! against independent integration and exact moment formulas.

mod common;

use common::{adaptive_simpson, rel_err};
use vgip::special_math::{exp_integral_e1, levy_measure_interval, levy_ratio, vg_levy_exponent, LevyInterval};
use vgip::stats_validation::{beta_cdf, ks_test, MomentCheck};
use vgip::verify::simulate_map;
use vgip::{MarketFactorDistribution, ModelParams, TimeGrid};

#[test]
fn levy_measure_matches_simpson() {
    for m in [0.25, 1.0, 4.0, 16.0] {
        for (a, b) in [(0.01, 0.1), (1.0, 2.0), (1.5, 2.5)] {
            let direct = m * adaptive_simpson(|x| (-m * x).exp() / x, a, b, 1e-16, 256);
            let iv = LevyInterval::new(a, b).unwrap();
            let e = rel_err(levy_measure_interval(m, &iv).unwrap(), direct);
            assert!(e <= 1e-10, "m={m} [{a},{b}]: {e:e}");
        }
    }
}

#[test]
fn e1_matches_simpson() {
    // E1(z) = int_0^1 e^{-z/u} / u du
    for z in [0.1, 0.5, 1.0, 2.0, 5.0] {
        let direct = adaptive_simpson(
            |u: f64| if u == 0.0 { 0.0 } else { (-z / u).exp() / u },
            0.0,
            1.0,
            1e-16,
            256,
        );
        let e = rel_err(exp_integral_e1(z).unwrap(), direct);
        assert!(e <= 1e-9, "z={z}: {e:e}");
    }
}

#[test]
fn e1_difference_reference() {
    // e1(0.5) - e1(2.0), from an independent high-precision evaluation
    let d = exp_integral_e1(0.5).unwrap() - exp_integral_e1(2.0).unwrap();
    assert!((d - 0.510_873_084_1).abs() < 1e-9, "{d}");
}

#[test]
fn levy_ratio_exceeds_one_and_grows_with_m() {
    let ab = LevyInterval::new(1.0, 2.0).unwrap();
    let cd = LevyInterval::new(1.5, 2.5).unwrap();
    let ratios: Vec<f64> = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0]
        .iter()
        .map(|&m| levy_ratio(m, &ab, &cd).unwrap())
        .collect();
    assert!(ratios.iter().all(|&r| r > 1.0));
    assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
}

#[test]
fn vg_levy_exponent_matches_closed_value() {
    // log E[e^{alpha V_1}] with V_1 = W(gamma_1), gamma_1 ~ Gamma(m, 1/m):
    // E[e^{alpha^2 gamma_1 / 2}] = (1 - alpha^2/(2m))^{-m}; alpha = 2, m = 10
    let v = vg_levy_exponent(2.0, 10.0).unwrap();
    assert!((v + 10.0 * 0.8f64.ln()).abs() < 1e-14);
}

#[test]
fn bridge_law_on_moderate_sample() {
    let params = ModelParams {
        sigma: 1.0,
        m: 20.0,
        r: 0.0,
        horizon: 2.0,
    };
    let grid = TimeGrid::new(2.0, 4).unwrap();
    let dist = MarketFactorDistribution::atoms(&[(1.0, 0.0)]).unwrap();
    let draws = simulate_map(20_000, &grid, &params, &dist, 99, |p| (p.bridge[1], p.vgb[1])).unwrap();
    let (bridge, vgb): (Vec<f64>, Vec<f64>) = draws.into_iter().unzip();
    // t = 0.5, T = 2: Beta(10, 30)
    let (a, b) = (10.0, 30.0);
    let mean = a / (a + b);
    let var = a * b / ((a + b) * (a + b) * (a + b + 1.0));
    assert!(MomentCheck::mean("mean", &bridge, mean, 4.0).unwrap().passed());
    assert!(MomentCheck::variance("var", &bridge, var, 4.0).unwrap().passed());
    assert!(ks_test(&bridge, beta_cdf(a, b).unwrap()).unwrap().passed);
    // m t (T - t) / (T (1 + m T)) = 20 * 0.5 * 1.5 / (2 * 41)
    let vgb_var = 15.0 / 82.0;
    assert!(MomentCheck::variance("vgb var", &vgb, vgb_var, 4.0).unwrap().passed());
}
