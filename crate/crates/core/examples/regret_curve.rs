//! Frequentist simple regret of uniform allocation and successive rejects
//! on a fixed three-armed instance.

use bayes_bai::policies::{SuccessiveRejects, Uniform};
use bayes_bai::simulate::{frequentist_regret, MonteCarlo};
use bayes_bai::{Instance, Policy, Seed};

fn main() -> bayes_bai::Result<()> {
    let instance = Instance::new(vec![0.0, 0.0, 0.5])?;
    let policies: [&dyn Policy; 2] = [&Uniform, &SuccessiveRejects::default()];
    for horizon in [30, 90, 180, 300] {
        for (i, policy) in policies.iter().enumerate() {
            let mc = MonteCarlo::new(20_000, Seed::new(7, i as u64)).workers(4);
            let r = frequentist_regret(*policy, &instance, horizon, &mc)?;
            println!("T={horizon:>3} {:<20} {:.5} ± {:.5}", r.policy, r.mean, r.std_error);
        }
    }
    Ok(())
}
