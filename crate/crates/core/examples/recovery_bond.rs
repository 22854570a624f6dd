//! Defaultable bond with uniform recovery on [a, b] and full repayment c,
//! priced as the bridge rises toward one.

use vgip::closed_form::{recovery_bond_price, RecoveryBondSpec};
use vgip::pricing_kernel::price;
use vgip::{MarketState, Payoff};

fn main() -> vgip::Result<()> {
    let spec = RecoveryBondSpec::new(0.4, 0.6, 0.0, 0.5, 1.0)?;
    let prior = spec.prior()?;
    let (sigma, x_true) = (1.5, 0.3);
    println!("true recovery X_T = {x_true}");
    println!("{:>8} {:>16} {:>16}", "bridge", "closed form", "kernel");
    for b in [1e-6, 0.01, 0.1, 0.5, 0.9, 0.99, 0.9999] {
        let xi = sigma * b * x_true;
        let s = MarketState::new(0.5, 1.0, xi, b, sigma, 0.02, 100.0)?;
        println!(
            "{b:>8} {:>16.12} {:>16.12}",
            recovery_bond_price(&spec, &s)?,
            price(&Payoff::Identity, &prior, &s)?
        );
    }
    Ok(())
}
