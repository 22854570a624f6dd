//! Exponential prior with identity payoff, closed form against the kernel,
//! including deep negative information where the tail form matters.

use vgip::closed_form::{exponential_payoff_price, ExponentialSpec};
use vgip::pricing_kernel::price;
use vgip::{MarketState, Payoff};

fn main() -> vgip::Result<()> {
    let spec = ExponentialSpec::new(1.0)?;
    let prior = spec.prior()?;
    println!("{:>6} {:>20} {:>20}", "xi", "closed form", "kernel");
    for xi in [-20.0, -5.0, -1.0, 0.0, 1.0, 5.0] {
        let s = MarketState::new(0.5, 1.0, xi, 0.5, 2.0, 0.03, 100.0)?;
        println!(
            "{xi:>6} {:>20.14e} {:>20.14e}",
            exponential_payoff_price(&spec, &s)?,
            price(&Payoff::Identity, &prior, &s)?
        );
    }
    Ok(())
}
