//! Binary bond: closed form against the general kernel over a range of
//! information values.

use vgip::closed_form::{binary_bond_price, BinaryBondSpec};
use vgip::pricing_kernel::price;
use vgip::{MarketState, Payoff};

fn main() -> vgip::Result<()> {
    let spec = BinaryBondSpec::new(0.4, 0.6)?;
    let prior = spec.prior()?;
    println!("{:>6} {:>16} {:>16}", "xi", "closed form", "kernel");
    for xi in [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0] {
        let s = MarketState::new(0.5, 1.0, xi, 0.5, 1.0, 0.02, 100.0)?;
        println!(
            "{xi:>6} {:>16.12} {:>16.12}",
            binary_bond_price(&spec, &s)?,
            price(&Payoff::Identity, &prior, &s)?
        );
    }
    Ok(())
}
