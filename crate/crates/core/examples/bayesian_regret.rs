//! Bayesian simple regret of alternation under a standard normal prior on
//! both arms. T·R stays within a narrow band as T grows.

use bayes_bai::policies::Alternating;
use bayes_bai::simulate::{bayesian_regret, ArmPrior, MonteCarlo};
use bayes_bai::Seed;

fn main() -> bayes_bai::Result<()> {
    let prior = [ArmPrior::new(0.0, 1.0)?, ArmPrior::new(0.0, 1.0)?];
    for horizon in [11, 21, 51, 101] {
        let mc = MonteCarlo::new(100_000, Seed::new(3, 0)).workers(4);
        let r = bayesian_regret(&Alternating, &prior, horizon, &mc)?;
        println!("T={horizon:>3}: R = {:.5e} ± {:.1e}   T·R = {:.4}", r.mean, r.std_error, horizon as f64 * r.mean);
    }
    Ok(())
}
