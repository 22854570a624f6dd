//! Asset paying e^{X_T} with a normal prior: the two closed forms, the power
//! payoff and the general kernel.

use vgip::closed_form::{lognormal_price, lognormal_price_i_ratio, power_payoff_price, LogNormalSpec};
use vgip::pricing_kernel::price;
use vgip::{MarketState, Payoff};

fn main() -> vgip::Result<()> {
    let spec = LogNormalSpec::new(0.0, 1.0, 1.0)?;
    let s0 = MarketState::new(0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 100.0)?;
    println!(
        "S_0 = {:.12} (e^0.5 = {:.12})",
        lognormal_price(&spec, &s0)?,
        0.5f64.exp()
    );
    let s = MarketState::new(0.5, 1.0, 0.8, 0.6, 2.0, 0.03, 100.0)?;
    println!("K-form       {:.15}", lognormal_price(&spec, &s)?);
    println!("I-ratio form {:.15}", lognormal_price_i_ratio(&spec, &s)?);
    println!(
        "kernel       {:.15}",
        price(&Payoff::ExponentialScale { q: 1.0 }, &spec.prior()?, &s)?
    );
    let squared = LogNormalSpec::new(0.0, 1.0, 2.0)?;
    println!("e^(2X_T)     {:.15}", power_payoff_price(&squared, &s)?);
    Ok(())
}
