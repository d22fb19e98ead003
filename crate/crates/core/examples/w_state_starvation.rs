//! A state where arm 3 was badly underestimated on its single pull. Its
//! expected Bellman improvement stays below both other arms, so the
//! Bayes-optimal policy keeps drawing arms 1 and 2.

use bayes_bai::bellman::{exact_loss, DpConfig};
use bayes_bai::simulate::construct_w_state;

fn main() -> bayes_bai::Result<()> {
    let cfg = DpConfig::default();
    let horizon = 13;
    let c_u = 3.0;
    for n12 in [1, 3, 6] {
        let w = construct_w_state(horizon, c_u, n12)?;
        let means: Vec<f64> = w.arms().iter().map(|s| s.empirical_mean().unwrap_or(f64::NAN)).collect();
        println!("n12={n12}: means {means:.3?} counts {:?}", w.arms().iter().map(|s| s.pulls()).collect::<Vec<_>>());
        for budget in 1..=4.min(w.remaining()) {
            let r = exact_loss(&w, budget, &cfg)?;
            println!("  budget {budget}: EBI [{}] -> draw arm {}", sci(&r.ebi), r.chosen_arm.map_or(0, |a| a.number()));
        }
    }
    Ok(())
}

fn sci(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}
