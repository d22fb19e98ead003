//! Posterior, predictive and increment distributions for a small history,
//! plus the two-arm terminal loss and the normal tail sandwich.

use bayes_bai::posterior::{self, normal_tail, normal_tail_bounds};
use bayes_bai::{Arm, BeliefState};

fn main() -> bayes_bai::Result<()> {
    let mut belief = BeliefState::new(2, 10)?;
    for (arm, reward) in [(1, 0.4), (2, -0.3), (1, 1.1), (2, 0.2), (1, 0.7)] {
        belief.record(Arm::new(arm).expect("arm numbers start at 1"), reward)?;
    }

    for arm in belief_arms(&belief) {
        let post = posterior::posterior_params(&belief, arm)?;
        let pred = posterior::predictive_params(&belief, arm)?;
        let inc = posterior::posterior_mean_increment_params(&belief, arm)?;
        println!(
            "arm {}: posterior N({:.4}, {:.4})  predictive N({:.4}, {:.4})  increment var {:.4}",
            arm.number(),
            post.mean,
            post.variance,
            pred.mean,
            pred.variance,
            inc.variance
        );
    }

    println!("terminal loss now: {:.6}", posterior::terminal_loss_general(&belief)?);
    println!("1/sqrt(pi) check:  {:.12}", posterior::terminal_loss_two(0.0, 1, 1)?);

    for x in [1.0, 2.0, 4.0] {
        let b = normal_tail_bounds(x)?;
        println!("x={x}: {:.6e} < {:.6e} < {:.6e}", b.lower, normal_tail(x), b.upper);
    }
    Ok(())
}

fn belief_arms(b: &BeliefState) -> impl Iterator<Item = Arm> {
    (0..b.num_arms()).map(Arm::from_index)
}
