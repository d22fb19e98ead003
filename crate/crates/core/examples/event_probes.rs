//! Exact probability of the first-pull underestimation event against its
//! lower bound, and Monte-Carlo frequencies of the closeness and drift
//! events of the two remaining arms.

use bayes_bai::simulate::{event_probes, underestimation_bound, underestimation_probability};
use bayes_bai::Seed;

fn main() -> bayes_bai::Result<()> {
    for horizon in [10, 100, 1000] {
        let (p, _) = underestimation_probability(horizon, 2.0, 0.5);
        println!("T={horizon:>4}: P[X] = {p:.4e} ≥ f_under = {:.4e}", underestimation_bound(horizon, 2.0, 0.5));
    }
    for horizon in [11, 51] {
        let r = event_probes(horizon, 2.0, 0.5, 200_000, Seed::new(11, 0), 4)?;
        println!(
            "T={horizon}: P[Y] = {:.3e} (bound {:.3e})  P[Y, no drift] = {:.3e} (bound {:.3e})",
            r.close.probability, r.close.bound, r.drift.probability, r.drift.bound
        );
    }
    Ok(())
}
