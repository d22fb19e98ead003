//! With two arms the optimal policy balances the pull counts. The loss of
//! that policy has a closed form, which the exact recursion reproduces.

use bayes_bai::bellman::{alternating_counts, exact_loss, two_armed_loss_fast, DpConfig};
use bayes_bai::BeliefState;

fn main() -> bayes_bai::Result<()> {
    let cfg = DpConfig::default();
    for (delta, n1, n2, budget) in [(0.0, 1, 1, 2), (0.5, 2, 1, 4), (-0.3, 3, 1, 3), (1.2, 1, 4, 5)] {
        let belief = BeliefState::from_means(&[delta, 0.0], &[n1, n2], (n1 + n2) as usize + budget)?;
        let r = exact_loss(&belief, budget, &cfg)?;
        let fast = two_armed_loss_fast(delta, n1, n2, budget)?;
        println!(
            "Δ̂={delta:>5} N=({n1},{n2}) b={budget}: DP {:.10} closed form {fast:.10} |diff| {:.1e}  first draw arm {}  final counts {:?}",
            r.loss,
            (r.loss - fast).abs(),
            r.chosen_arm.map_or(0, |a| a.number()),
            alternating_counts(n1, n2, budget)
        );
    }
    Ok(())
}
