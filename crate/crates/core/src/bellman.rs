//! Exact small-horizon solution of the Bayesian loss recursion.
//!
//! The recursion is solved in value form. For a state with posterior means
//! `μ̂` and counts `N`, let `U(b)` be the largest achievable expected value of
//! the recommended arm's posterior mean after `b` more samples, and `U_i(b)`
//! the same when the next sample goes to arm `i`. Then
//!
//! * `U(0) = max_i μ̂_i`
//! * `U(b) = max_i U_i(b)`
//! * `U_i(b) = E[U(b − 1)]` after one predictive draw from arm `i`.
//!
//! One draw moves `μ̂_i` by a zero-mean Gaussian with variance `1/(N(N+1))`
//! and leaves the other arms alone, so `U_i(1) = c + E[(μ̂_i + δ − c)⁺]` with
//! `c = max_{j≠i} μ̂_j` has a closed form. Deeper levels use Gauss–Hermite
//! quadrature of order `m` over the increment. Losses follow from
//! `L = E_H[max μ] − U`, which is computed as the terminal loss plus
//! `max μ̂ − U`.
//!
//! There is no memoization: the state is continuous, so the work grows like
//! `(K·m)^depth`. [`DpConfig`] caps it and oversized problems fail with
//! [`Error::Capacity`].

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{argmax, Arm, BeliefState, Seed};
use crate::policies::Policy;
use crate::posterior::{self, increment_variance, normal_pdf, positive_part_mean};
use crate::quadrature::{integrate, NormalRule};
use crate::simulate::{replicate, RegretEstimate};

/// Hard upper bound on arms handled by the exact recursion.
pub const MAX_ARMS: usize = 8;

/// Replications below this are rejected by [`loss_mc_oracle`].
pub const MIN_ORACLE_REPS: u64 = 10_000;

/// Knobs of the exact recursion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DpConfig {
    /// Gauss–Hermite order for each predictive expectation. Order 1 is
    /// accepted but collapses every draw onto its mean.
    pub quadrature_order: usize,
    /// Largest remaining budget solved exactly.
    pub max_depth: usize,
    /// Largest arm count solved exactly.
    pub max_arms_exact: usize,
    /// Absolute tolerance of the terminal-loss integral.
    pub terminal_tolerance: f64,
    /// Cap on arm-value evaluations per call.
    pub node_budget: u64,
    /// Arms whose value falls short of the best by at most this fraction of
    /// the best EBI (or by [`TIE_FLOOR`]) count as tied. Ties go to the arm
    /// with the fewest pulls, then the lowest index.
    pub tie_tolerance: f64,
}

impl Default for DpConfig {
    fn default() -> Self {
        DpConfig {
            quadrature_order: 16,
            max_depth: 6,
            max_arms_exact: 3,
            terminal_tolerance: posterior::EXPECTED_MAX_TOLERANCE,
            node_budget: 100_000_000,
            tie_tolerance: 1e-3,
        }
    }
}

impl DpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.quadrature_order == 0 {
            return Err(Error::InvalidParameter("quadrature order must be at least 1".into()));
        }
        if !(self.terminal_tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "terminal tolerance must be positive, got {}",
                self.terminal_tolerance
            )));
        }
        if !(self.tie_tolerance >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tie tolerance must be nonnegative, got {}",
                self.tie_tolerance
            )));
        }
        Ok(())
    }

    /// Arm-value evaluations needed by [`exact_loss`] at this size with the
    /// fixed rule at every level. With three or more arms the adaptive
    /// second-to-last level adds more.
    pub fn node_estimate(&self, arms: usize, budget: usize) -> u64 {
        let at = |b: usize| nodes_for_value(arms as u64, self.quadrature_order as u64, b);
        if budget == 0 {
            0
        } else {
            at(budget).saturating_add(at(budget - 1))
        }
    }

    fn check_capacity(&self, arms: usize, budget: usize) -> Result<()> {
        self.validate()?;
        let limit = self.max_arms_exact.min(MAX_ARMS);
        if arms > limit {
            return Err(Error::Capacity {
                reason: format!("{arms} arms exceed the exact limit of {limit}"),
            });
        }
        if budget > self.max_depth {
            return Err(Error::Capacity {
                reason: format!("budget {budget} exceeds max depth {}", self.max_depth),
            });
        }
        let nodes = self.node_estimate(arms, budget);
        if nodes > self.node_budget {
            return Err(Error::Capacity {
                reason: format!(
                    "{nodes} node evaluations exceed the node budget {}",
                    self.node_budget
                ),
            });
        }
        Ok(())
    }
}

// Arm-value evaluations behind one `U(b)`.
fn nodes_for_value(k: u64, m: u64, b: usize) -> u64 {
    match b {
        0 => 0,
        1 => k,
        _ => k.saturating_mul(
            1u64.saturating_add(m.saturating_mul(nodes_for_value(k, m, b - 1))),
        ),
    }
}

/// Output of [`exact_loss`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellmanResult {
    /// Optimal Bayesian loss with `budget` samples left.
    pub loss: f64,
    /// Optimal loss with one sample fewer; absent at budget 0.
    pub loss_one_fewer: Option<f64>,
    /// Loss after committing the next sample to each arm.
    pub arm_losses: Vec<f64>,
    /// Expected Bellman improvement of each arm.
    pub ebi: Vec<f64>,
    pub chosen_arm: Option<Arm>,
    pub nodes_evaluated: u64,
    pub quadrature_order: usize,
    pub budget: usize,
}

struct Solver {
    k: usize,
    rule: NormalRule,
    nodes: u64,
    failure: Option<Error>,
}

/// Adaptive integration window, tolerance and segment cap for the
/// second-to-last level with three or more arms.
const TAIL_SD: f64 = 9.0;
const LEVEL_TWO_TOLERANCE: f64 = 1e-10;
const LEVEL_TWO_SEGMENTS: usize = 400;

type Means = [f64; MAX_ARMS];
type Counts = [u32; MAX_ARMS];

impl Solver {
    fn new(k: usize, cfg: &DpConfig) -> Result<Self> {
        Ok(Solver {
            k,
            rule: NormalRule::new(cfg.quadrature_order)?,
            nodes: 0,
            failure: None,
        })
    }

    fn finish(&mut self) -> Result<()> {
        match self.failure.take() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    fn value(&mut self, means: &Means, counts: &Counts, b: usize) -> f64 {
        if b == 0 {
            return means[..self.k].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        }
        (0..self.k)
            .map(|i| self.arm_value(means, counts, i, b))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn arm_value(&mut self, means: &Means, counts: &Counts, i: usize, b: usize) -> f64 {
        self.nodes += 1;
        let variance = increment_variance(counts[i]);
        if b == 1 {
            let rival = (0..self.k)
                .filter(|&j| j != i)
                .map(|j| means[j])
                .fold(f64::NEG_INFINITY, f64::max);
            return rival + positive_part_mean(means[i] - rival, variance);
        }
        let sd = variance.sqrt();
        let mut child_means = *means;
        let mut child_counts = *counts;
        child_counts[i] += 1;
        if b == 2 {
            return self.second_to_last(means, &child_counts, i, variance);
        }
        let mut total = 0.0;
        for idx in 0..self.rule.order() {
            let (z, w) = (self.rule.nodes()[idx], self.rule.weights()[idx]);
            child_means[i] = means[i] + sd * z;
            total += w * self.value(&child_means, &child_counts, b - 1);
        }
        total
    }

    /// `U_i(2)`. The child value is `max_j f_j(δ)` with each `f_j` a
    /// one-step arm value. One `f_j` has a Gaussian expectation in closed
    /// form; it is integrated exactly and the quadrature only sees the
    /// nonnegative remainder `max_j f_j − f_j`. Without this split the
    /// Gaussian-smoothed hinge inside `f_j` needs far more nodes.
    fn second_to_last(&mut self, means: &Means, child_counts: &Counts, i: usize, variance: f64) -> f64 {
        let k = self.k;
        let rival = (0..k)
            .filter(|&j| j != i)
            .map(|j| means[j])
            .fold(f64::NEG_INFINITY, f64::max);
        // f_i(δ) = rival + G(μ_i + δ − rival, v_i).
        let v_i = increment_variance(child_counts[i]);
        let mut control = (i, rival + positive_part_mean(means[i] - rival, v_i + variance));
        if k == 2 {
            // f_j(δ) = μ_i + δ + G(μ_j − μ_i − δ, v_j), linear rival.
            let j = 1 - i;
            let exact = means[i] + positive_part_mean(means[j] - means[i], increment_variance(child_counts[j]) + variance);
            if exact > control.1 {
                control = (j, exact);
            }
        }
        let sd = variance.sqrt();
        let remainder = if k == 2 {
            // The remainder is smooth here (it vanishes when one arm's
            // one-step value dominates), so the fixed rule suffices.
            let mut total = 0.0;
            for idx in 0..self.rule.order() {
                let (z, w) = (self.rule.nodes()[idx], self.rule.weights()[idx]);
                total += w * self.excess(means, child_counts, i, means[i] + sd * z, control.0);
            }
            total
        } else {
            // With three or more arms the remainder has kinks where the
            // maximizing arm or a rival changes; integrate adaptively.
            let integral = integrate(
                |z| normal_pdf(z) * self.excess(means, child_counts, i, means[i] + sd * z, control.0),
                -TAIL_SD,
                TAIL_SD,
                LEVEL_TWO_TOLERANCE,
                LEVEL_TWO_SEGMENTS,
            );
            match integral {
                Ok(r) => r.value,
                Err(e) => {
                    self.failure.get_or_insert(e);
                    f64::NAN
                }
            }
        };
        control.1 + remainder
    }

    /// `max_j f_j − f_control` with arm `i` moved to `moved`.
    fn excess(&mut self, means: &Means, child_counts: &Counts, i: usize, moved: f64, control: usize) -> f64 {
        let mut child_means = *means;
        child_means[i] = moved;
        let mut best = f64::NEG_INFINITY;
        let mut base = 0.0;
        for j in 0..self.k {
            let f = self.arm_value(&child_means, child_counts, j, 1);
            best = best.max(f);
            if j == control {
                base = f;
            }
        }
        best - base
    }
}

fn load(belief: &BeliefState) -> Result<(Means, Counts)> {
    let (m, n) = posterior::effective_all(belief)?;
    let mut means = [0.0; MAX_ARMS];
    let mut counts = [0; MAX_ARMS];
    means[..m.len()].copy_from_slice(&m);
    counts[..n.len()].copy_from_slice(&n);
    Ok((means, counts))
}

/// Absolute tie window, the size of rounding error in arm values.
pub const TIE_FLOOR: f64 = 1e-12;

/// Largest shortfall from the best arm value that still counts as a tie,
/// given the best EBI.
pub fn tie_window(cfg: &DpConfig, best_ebi: f64) -> f64 {
    (cfg.tie_tolerance * best_ebi).max(TIE_FLOOR)
}

fn pick(values: &[f64], counts: &[u32], window: f64) -> Arm {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut chosen: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v >= best - window && chosen.is_none_or(|c| counts[i] < counts[c]) {
            chosen = Some(i);
        }
    }
    Arm::from_index(chosen.expect("at least one arm"))
}

/// Solves the recursion from `belief` with `budget` samples left.
///
/// `budget` is independent of the belief's own clock. Every arm needs a
/// defined posterior.
pub fn exact_loss(belief: &BeliefState, budget: usize, cfg: &DpConfig) -> Result<BellmanResult> {
    let k = belief.num_arms();
    cfg.check_capacity(k, budget)?;
    let (means, counts) = load(belief)?;
    let terminal = posterior::terminal_loss_with_tolerance(belief, cfg.terminal_tolerance)?;
    if budget == 0 {
        return Ok(BellmanResult {
            loss: terminal,
            loss_one_fewer: None,
            arm_losses: Vec::new(),
            ebi: Vec::new(),
            chosen_arm: None,
            nodes_evaluated: 0,
            quadrature_order: cfg.quadrature_order,
            budget,
        });
    }
    let top = means[..k].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut solver = Solver::new(k, cfg)?;
    let values: Vec<f64> = (0..k)
        .map(|i| solver.arm_value(&means, &counts, i, budget))
        .collect();
    let fewer = solver.value(&means, &counts, budget - 1);
    solver.finish()?;
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(BellmanResult {
        loss: terminal - (best - top),
        loss_one_fewer: Some(terminal - (fewer - top)),
        arm_losses: values.iter().map(|u| terminal - (u - top)).collect(),
        ebi: values.iter().map(|u| u - fewer).collect(),
        chosen_arm: Some(pick(&values, &counts[..k], tie_window(cfg, best - fewer))),
        nodes_evaluated: solver.nodes,
        quadrature_order: cfg.quadrature_order,
        budget,
    })
}

/// Expected Bellman improvement of every arm.
pub fn ebi(belief: &BeliefState, budget: usize, cfg: &DpConfig) -> Result<Vec<f64>> {
    if budget == 0 {
        return Err(Error::InvalidBudget("EBI needs at least one remaining sample".into()));
    }
    Ok(exact_loss(belief, budget, cfg)?.ebi)
}

/// The Bayes-optimal next arm, skipping the loss bookkeeping.
pub fn choose(belief: &BeliefState, budget: usize, cfg: &DpConfig) -> Result<Arm> {
    if budget == 0 {
        return Err(Error::InvalidBudget("no samples left to allocate".into()));
    }
    let k = belief.num_arms();
    cfg.check_capacity(k, budget)?;
    let (means, counts) = load(belief)?;
    let mut solver = Solver::new(k, cfg)?;
    let values: Vec<f64> = (0..k)
        .map(|i| solver.arm_value(&means, &counts, i, budget))
        .collect();
    let fewer = solver.value(&means, &counts, budget - 1);
    solver.finish()?;
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(pick(&values, &counts[..k], tie_window(cfg, best - fewer)))
}

/// Final counts when two arms are pulled `budget` more times, each time the
/// arm with fewer pulls (arm 1 on ties).
pub fn alternating_counts(n1: u32, n2: u32, budget: usize) -> (u32, u32) {
    let (mut a, mut b) = (n1, n2);
    for _ in 0..budget {
        if a <= b {
            a += 1;
        } else {
            b += 1;
        }
    }
    (a, b)
}

/// Loss of the count-balancing policy on two arms, in closed form.
///
/// The draw sequence does not depend on the rewards, so the final
/// difference of means is Gaussian around `Δ̂` with variance
/// `V₀ − V_r` (`V₀ = 1/N1 + 1/N2` now, `V_r` at the end). The loss is
/// `E[(d)⁺]` under the current posterior minus the same under that spread.
pub fn two_armed_loss_fast(delta_hat: f64, n1: u32, n2: u32, budget: usize) -> Result<f64> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "two-armed loss needs positive counts, got ({n1}, {n2})"
        )));
    }
    if !delta_hat.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite mean gap {delta_hat}")));
    }
    let (f1, f2) = alternating_counts(n1, n2, budget);
    let v0 = 1.0 / n1 as f64 + 1.0 / n2 as f64;
    let vr = 1.0 / f1 as f64 + 1.0 / f2 as f64;
    let a = -delta_hat.abs();
    Ok(positive_part_mean(a, v0) - positive_part_mean(a, (v0 - vr).max(0.0)))
}

/// Monte-Carlo estimate of `policy`'s Bayesian loss from `belief` with
/// `budget` samples left. Each replication draws the means from the
/// posterior, plays the policy on unit-variance rewards and scores the
/// regret of its recommendation.
pub fn loss_mc_oracle(
    belief: &BeliefState,
    budget: usize,
    policy: &dyn Policy,
    reps: u64,
    seed: Seed,
    workers: usize,
) -> Result<RegretEstimate> {
    if reps < MIN_ORACLE_REPS {
        return Err(Error::InvalidParameter(format!(
            "the oracle needs at least {MIN_ORACLE_REPS} replications, got {reps}"
        )));
    }
    let k = belief.num_arms();
    let params = posterior::posterior_all(belief)?;
    let horizon = belief.t() + budget;
    let start = belief.clone().with_horizon(horizon)?;
    let [stats] = replicate(
        reps,
        seed,
        workers,
        || policy.box_clone(),
        |policy, _, rng| {
            let mu: Vec<f64> = params
                .iter()
                .map(|g| {
                    let z: f64 = StandardNormal.sample(rng);
                    g.mean + g.sd() * z
                })
                .collect();
            let mut state = start.clone();
            policy.reset(k, horizon)?;
            for _ in 0..budget {
                let arm = policy.select(&state, rng)?;
                arm.check(k)?;
                let noise: f64 = StandardNormal.sample(rng);
                state.record(arm, mu[arm.index()] + noise)?;
            }
            let j = policy.recommend(&state)?;
            j.check(k)?;
            Ok([mu[argmax(&mu).index()] - mu[j.index()]])
        },
    )?;
    Ok(RegretEstimate::from_stats(policy.name(), horizon, &stats, seed))
}
