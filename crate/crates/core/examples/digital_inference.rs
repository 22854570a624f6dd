//! Posterior of a mixture prior along one simulated path, with the digital
//! price P(X_T <= K) discounted.

use vgip::distribution::{Component, WeightedComponent};
use vgip::path_sim::simulate_path;
use vgip::pricing_kernel::{digital_price, posterior};
use vgip::{MarketFactorDistribution, MarketState, ModelParams, Seed, TimeGrid};

fn main() -> vgip::Result<()> {
    let dist = MarketFactorDistribution::new(vec![
        WeightedComponent {
            weight: 0.3,
            component: Component::Normal { mu: -1.0, nu: 0.5 },
        },
        WeightedComponent {
            weight: 0.7,
            component: Component::Exponential { lambda: 2.0 },
        },
    ])?;
    let params = ModelParams {
        sigma: 2.0,
        m: 50.0,
        r: 0.01,
        horizon: 2.0,
    };
    let grid = TimeGrid::new(params.horizon, 200)?;
    let path = simulate_path(&grid, &params, &dist, Seed::new(3, 0))?;
    println!("X_T = {:.6}", path.x_draw);
    for k in [0, 50, 100, 150, 190, 199] {
        let s = MarketState::at(&params, grid.time(k), path.info[k], path.bridge[k])?;
        let post = posterior(&dist, &s)?;
        let mean = post.expectation(|x| x);
        println!(
            "t={:.2} bridge={:.4} E[X_T]={:+.6} P(normal part)={:.4} digital(K=0)={:.6}",
            s.t,
            s.bridge,
            mean,
            post.continuous[0].mass,
            digital_price(0.0, &dist, &s)?
        );
    }
    Ok(())
}
