//! Discounted binary-bond prices along simulated paths are flat in
//! expectation; an injected drift is detected.

use vgip::closed_form::{BinaryBondSpec, ClosedFormCase, Pricer};
use vgip::path_sim::simulate_bundle;
use vgip::scenario::price_bundle;
use vgip::stats_validation::{martingale_flatness, martingale_flatness_on, with_injected_drift};
use vgip::{ModelParams, Payoff, TimeGrid};

fn main() -> vgip::Result<()> {
    let spec = BinaryBondSpec::new(0.4, 0.6)?;
    let dist = spec.prior()?;
    let params = ModelParams {
        sigma: 1.0,
        m: 100.0,
        r: 0.0,
        horizon: 1.0,
    };
    let grid = TimeGrid::new(1.0, 50)?;
    let bundle = simulate_bundle(&grid, &params, &dist, 11, 20_000)?;
    let pricer = Pricer::Closed(ClosedFormCase::BinaryBond(spec));
    let prices = price_bundle(&bundle, &Payoff::Identity, &pricer)?;
    let flat = martingale_flatness(&prices, params.r, &grid, 4.0)?;
    let show = |c: vgip::stats_validation::CheckResult| {
        println!("{:<20} passed={} {}", c.name, c.passed, c.detail);
    };
    show(flat.result("martingale"));
    let times = grid.times();
    let drifted = with_injected_drift(&prices, &times, 0.05);
    let bad = martingale_flatness_on(&drifted, &times, params.r, 4.0)?;
    show(bad.result("with drift 0.05 t"));
    Ok(())
}
