//! Exact Bayes-optimal loss, per-arm losses and expected Bellman
//! improvement for a three-armed state, across quadrature orders.

use bayes_bai::bellman::{choose, exact_loss, DpConfig};
use bayes_bai::BeliefState;

fn main() -> bayes_bai::Result<()> {
    let means = [0.3, 0.1, -0.2];
    let counts = [2, 1, 1];
    for budget in 1..=3 {
        let belief = BeliefState::from_means(&means, &counts, 4 + budget)?;
        let cfg = DpConfig::default();
        let r = exact_loss(&belief, budget, &cfg)?;
        println!(
            "budget {budget}: loss {:.6}  arm losses {:.6?}  EBI [{}]  draw arm {}  ({} nodes)",
            r.loss,
            r.arm_losses,
            sci(&r.ebi),
            choose(&belief, budget, &cfg)?.number(),
            r.nodes_evaluated
        );
    }

    let belief = BeliefState::from_means(&means, &counts, 7)?;
    for order in [4, 8, 16, 24] {
        let cfg = DpConfig { quadrature_order: order, ..DpConfig::default() };
        println!("order {order:>2}: loss {:.12}", exact_loss(&belief, 3, &cfg)?.loss);
    }
    Ok(())
}

fn sci(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}
