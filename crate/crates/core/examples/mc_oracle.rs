//! Cross-checks the exact recursion against a Monte-Carlo oracle that
//! samples means from the posterior and runs the Bayes-optimal policy.

use bayes_bai::bellman::{exact_loss, loss_mc_oracle, DpConfig};
use bayes_bai::policies::{BayesOptimal, Uniform};
use bayes_bai::{BeliefState, Seed};

fn main() -> bayes_bai::Result<()> {
    let cfg = DpConfig::default();
    let belief = BeliefState::from_means(&[0.2, -0.1, 0.0], &[1, 2, 1], 7)?;
    let budget = 3;
    let exact = exact_loss(&belief, budget, &cfg)?.loss;
    let optimal = loss_mc_oracle(&belief, budget, &BayesOptimal::new(cfg.clone())?, 50_000, Seed::new(1, 0), 4)?;
    let uniform = loss_mc_oracle(&belief, budget, &Uniform, 50_000, Seed::new(1, 0), 4)?;
    println!("exact DP loss      {exact:.5}");
    println!("oracle, optimal    {:.5} ± {:.5}", optimal.mean, optimal.std_error);
    println!("oracle, uniform    {:.5} ± {:.5}", uniform.mean, uniform.std_error);
    Ok(())
}
