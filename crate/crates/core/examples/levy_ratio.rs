//! Lévy-measure ratios of the gamma subordinator and the VG Lévy exponent.

use vgip::special_math::{levy_measure_interval, levy_ratio, vg_levy_exponent, LevyInterval};

fn main() -> vgip::Result<()> {
    let near = LevyInterval::new(0.001, 0.01)?;
    let far = LevyInterval::new(0.1, 1.0)?;
    println!("{:>8} {:>14} {:>14} {:>12}", "m", "nu[near]", "nu[far]", "ratio");
    for m in [0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0] {
        println!(
            "{m:>8} {:>14.6e} {:>14.6e} {:>12.6}",
            levy_measure_interval(m, &near)?,
            levy_measure_interval(m, &far)?,
            levy_ratio(m, &near, &far)?
        );
    }
    for alpha in [0.5, 1.0, 2.0] {
        println!("psi_VG(alpha={alpha}, m=10) = {:.12}", vg_levy_exponent(alpha, 10.0)?);
    }
    Ok(())
}
