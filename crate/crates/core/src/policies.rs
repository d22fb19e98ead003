//! Sampling and recommendation rules.
//!
//! Every policy first pulls each arm once under the flat prior (the
//! posterior is undefined before that). With an informative prior there is
//! no forced phase.

use num_rational::Ratio;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bellman::{self, DpConfig};
use crate::error::{Error, Result};
use crate::model::{argmax, Arm, BeliefState};
use crate::posterior;

/// A sampling rule plus a recommendation rule.
pub trait Policy: Send + Sync {
    fn name(&self) -> &str;

    /// Whether `select` ignores its random source.
    fn is_deterministic(&self) -> bool {
        true
    }

    /// Prepares for a fresh episode.
    fn reset(&mut self, _arms: usize, _horizon: usize) -> Result<()> {
        Ok(())
    }

    /// Arm to pull next.
    fn select(&mut self, belief: &BeliefState, rng: &mut dyn RngCore) -> Result<Arm>;

    /// Arm to recommend once the budget is spent.
    fn recommend(&self, belief: &BeliefState) -> Result<Arm> {
        recommend_empirical_best(belief)
    }

    fn box_clone(&self) -> Box<dyn Policy>;
}

impl Clone for Box<dyn Policy> {
    fn clone(&self) -> Self {
        self.box_clone()
    }
}

/// Names accepted by [`policy_by_name`].
pub const POLICY_NAMES: [&str; 4] = ["bayes-optimal", "alternating", "successive-rejects", "uniform"];

/// Builds a policy from its config name.
pub fn policy_by_name(name: &str, dp: &DpConfig) -> Result<Box<dyn Policy>> {
    Ok(match name {
        "bayes-optimal" => Box::new(BayesOptimal::new(dp.clone())?),
        "alternating" => Box::new(Alternating),
        "successive-rejects" => Box::new(SuccessiveRejects::default()),
        "uniform" => Box::new(Uniform),
        other => return Err(Error::UnknownPolicy(other.to_string())),
    })
}

/// Arm with the largest posterior mean, lowest index on ties.
pub fn recommend_empirical_best(belief: &BeliefState) -> Result<Arm> {
    let (means, _) = posterior::effective_all(belief).map_err(|err| match err {
        Error::UndefinedPosterior { arm } => Error::UndefinedRecommendation { arm },
        other => other,
    })?;
    Ok(argmax(&means))
}

fn ensure_budget(belief: &BeliefState) -> Result<()> {
    if belief.remaining() == 0 {
        return Err(Error::BudgetExhausted {
            t: belief.t(),
            horizon: belief.horizon(),
        });
    }
    Ok(())
}

/// Exact Bayes-optimal rule: the arm with the largest EBI.
#[derive(Debug, Clone)]
pub struct BayesOptimal {
    cfg: DpConfig,
    // Decisions from expensive states; the root of a Monte-Carlo study is
    // revisited on every replication.
    memo: Vec<(BeliefState, Arm)>,
}

const MEMO_MIN_BUDGET: usize = 3;
const MEMO_CAPACITY: usize = 16;

impl BayesOptimal {
    pub fn new(cfg: DpConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(BayesOptimal {
            cfg,
            memo: Vec::new(),
        })
    }

    pub fn config(&self) -> &DpConfig {
        &self.cfg
    }
}

impl Policy for BayesOptimal {
    fn name(&self) -> &str {
        "bayes-optimal"
    }

    fn select(&mut self, belief: &BeliefState, _rng: &mut dyn RngCore) -> Result<Arm> {
        ensure_budget(belief)?;
        if let Some(arm) = belief.forced_arm() {
            return Ok(arm);
        }
        let budget = belief.remaining();
        if budget < MEMO_MIN_BUDGET {
            return bellman::choose(belief, budget, &self.cfg);
        }
        if let Some((_, arm)) = self.memo.iter().find(|(b, _)| b == belief) {
            return Ok(*arm);
        }
        let arm = bellman::choose(belief, budget, &self.cfg)?;
        if self.memo.len() == MEMO_CAPACITY {
            self.memo.remove(0);
        }
        self.memo.push((belief.clone(), arm));
        Ok(arm)
    }

    fn box_clone(&self) -> Box<dyn Policy> {
        Box::new(self.clone())
    }
}

fn check_two(arms: usize) -> Result<()> {
    if arms != 2 {
        return Err(Error::UnsupportedArity {
            policy: "alternating".into(),
            supported: 2,
            arms,
        });
    }
    Ok(())
}

/// Two-armed count balancing: the arm with fewer pulls, arm 1 on ties.
#[derive(Debug, Clone, Copy, Default)]
pub struct Alternating;

impl Policy for Alternating {
    fn name(&self) -> &str {
        "alternating"
    }

    fn reset(&mut self, arms: usize, _horizon: usize) -> Result<()> {
        check_two(arms)
    }

    fn select(&mut self, belief: &BeliefState, _rng: &mut dyn RngCore) -> Result<Arm> {
        check_two(belief.num_arms())?;
        ensure_budget(belief)?;
        if let Some(arm) = belief.forced_arm() {
            return Ok(arm);
        }
        let n = |i: usize| belief.arms()[i].pulls();
        Ok(Arm::from_index(if n(1) < n(0) { 1 } else { 0 }))
    }

    fn box_clone(&self) -> Box<dyn Policy> {
        Box::new(*self)
    }
}

/// Round-robin: arm `(t mod K) + 1` at round `t + 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Uniform;

impl Policy for Uniform {
    fn name(&self) -> &str {
        "uniform"
    }

    fn select(&mut self, belief: &BeliefState, _rng: &mut dyn RngCore) -> Result<Arm> {
        ensure_budget(belief)?;
        if let Some(arm) = belief.forced_arm() {
            return Ok(arm);
        }
        Ok(Arm::from_index(belief.t() % belief.num_arms()))
    }

    fn box_clone(&self) -> Box<dyn Policy> {
        Box::new(*self)
    }
}

/// Always pulls one arm (after the forced phase).
#[derive(Debug, Clone, Copy)]
pub struct FixedArm(pub Arm);

impl Policy for FixedArm {
    fn name(&self) -> &str {
        "fixed-arm"
    }

    fn select(&mut self, belief: &BeliefState, _rng: &mut dyn RngCore) -> Result<Arm> {
        ensure_budget(belief)?;
        self.0.check(belief.num_arms())?;
        Ok(belief.forced_arm().unwrap_or(self.0))
    }

    fn box_clone(&self) -> Box<dyn Policy> {
        Box::new(*self)
    }
}

// Keeps the harmonic sum's denominator well inside u128.
const MAX_SR_ARMS: usize = 40;

/// Phase targets of successive rejects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrSchedule {
    pub arms: usize,
    pub horizon: usize,
    /// Cumulative per-arm pull target at the end of phase `k` (`k = 1..K−1`).
    pub targets: Vec<u64>,
    /// Pulls each survivor receives during each phase.
    pub phase_pulls: Vec<u64>,
    /// Budget left after the scheduled pulls; spent round-robin on the final
    /// two survivors.
    pub slack: u64,
}

/// `n_k = ⌈(T − K) / (L̄ (K + 1 − k))⌉` with `L̄ = 1/2 + Σ_{i=2}^K 1/i`,
/// evaluated in exact rational arithmetic.
pub fn successive_rejects_schedule(arms: usize, horizon: usize) -> Result<SrSchedule> {
    if arms < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 arms, got {arms}")));
    }
    if horizon < arms {
        return Err(Error::InvalidBudget(format!(
            "successive rejects needs T >= K, got T = {horizon}, K = {arms}"
        )));
    }
    if arms > MAX_SR_ARMS {
        return Err(Error::InvalidParameter(format!(
            "successive rejects supports at most {MAX_SR_ARMS} arms, got {arms}"
        )));
    }
    let mut log_bar = Ratio::new(1u128, 2);
    for i in 2..=arms as u128 {
        log_bar += Ratio::new(1, i);
    }
    let spare = Ratio::from_integer((horizon - arms) as u128);
    let targets: Vec<u64> = (1..arms)
        .map(|k| {
            let n = spare / (log_bar * Ratio::from_integer((arms + 1 - k) as u128));
            n.ceil().to_integer() as u64
        })
        .collect();
    let mut phase_pulls = Vec::with_capacity(arms - 1);
    let mut used = 0u64;
    let mut prev = 0u64;
    for (k, &n) in targets.iter().enumerate() {
        let survivors = (arms - k) as u64;
        phase_pulls.push(n - prev);
        used += survivors * (n - prev);
        prev = n;
    }
    // The forced first pull of every arm can exceed a zero first target.
    let used = used.max(arms as u64);
    Ok(SrSchedule {
        arms,
        horizon,
        targets,
        phase_pulls,
        slack: horizon as u64 - used,
    })
}

/// Successive rejects with the forced first pull of every arm.
///
/// Within phase `k` the surviving arm with the fewest pulls below the target
/// goes next. When all survivors reach the target, the survivor with the
/// lowest posterior mean is eliminated (highest index on ties). The last
/// phase never eliminates: leftover budget goes round-robin to the final two
/// survivors and the better of them is recommended.
#[derive(Debug, Clone, Default)]
pub struct SuccessiveRejects {
    schedule: Option<SrSchedule>,
    alive: Vec<bool>,
    phase: usize,
}

impl SuccessiveRejects {
    /// Arms not yet eliminated, 1-based.
    pub fn survivors(&self) -> Vec<Arm> {
        self.alive
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| Arm::from_index(i))
            .collect()
    }

    pub fn schedule(&self) -> Option<&SrSchedule> {
        self.schedule.as_ref()
    }

    fn ensure_ready(&mut self, belief: &BeliefState) -> Result<()> {
        let stale = match &self.schedule {
            Some(s) => s.arms != belief.num_arms() || s.horizon != belief.horizon(),
            None => true,
        };
        if stale {
            self.reset(belief.num_arms(), belief.horizon())?;
        }
        Ok(())
    }

    fn eliminate_worst(&mut self, means: &[f64]) {
        let mut worst: Option<usize> = None;
        for (i, &alive) in self.alive.iter().enumerate() {
            if alive && worst.is_none_or(|w| means[i] <= means[w]) {
                worst = Some(i);
            }
        }
        if let Some(w) = worst {
            self.alive[w] = false;
        }
    }
}

impl Policy for SuccessiveRejects {
    fn name(&self) -> &str {
        "successive-rejects"
    }

    fn reset(&mut self, arms: usize, horizon: usize) -> Result<()> {
        self.schedule = Some(successive_rejects_schedule(arms, horizon)?);
        self.alive = vec![true; arms];
        self.phase = 0;
        Ok(())
    }

    fn select(&mut self, belief: &BeliefState, _rng: &mut dyn RngCore) -> Result<Arm> {
        ensure_budget(belief)?;
        self.ensure_ready(belief)?;
        if let Some(arm) = belief.forced_arm() {
            return Ok(arm);
        }
        let last = belief.num_arms() - 2;
        let pulls: Vec<u64> = belief.arms().iter().map(|s| s.pulls() as u64).collect();
        loop {
            let target = self.schedule.as_ref().expect("schedule is set").targets[self.phase];
            let next = (0..pulls.len())
                .filter(|&i| self.alive[i] && pulls[i] < target)
                .min_by_key(|&i| pulls[i]);
            if let Some(i) = next {
                return Ok(Arm::from_index(i));
            }
            if self.phase == last {
                let i = (0..pulls.len())
                    .filter(|&i| self.alive[i])
                    .min_by_key(|&i| pulls[i])
                    .expect("two survivors remain");
                return Ok(Arm::from_index(i));
            }
            let (means, _) = posterior::effective_all(belief)?;
            self.eliminate_worst(&means);
            self.phase += 1;
        }
    }

    fn recommend(&self, belief: &BeliefState) -> Result<Arm> {
        if self.alive.len() != belief.num_arms() {
            return recommend_empirical_best(belief);
        }
        let (means, _) = posterior::effective_all(belief).map_err(|err| match err {
            Error::UndefinedPosterior { arm } => Error::UndefinedRecommendation { arm },
            other => other,
        })?;
        let mut best: Option<usize> = None;
        for (i, &alive) in self.alive.iter().enumerate() {
            if alive && best.is_none_or(|b| means[i] > means[b]) {
                best = Some(i);
            }
        }
        Ok(Arm::from_index(best.expect("a survivor remains")))
    }

    fn box_clone(&self) -> Box<dyn Policy> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::History;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn arm(n: usize) -> Arm {
        Arm::new(n).unwrap()
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0)
    }

    #[test]
    fn empirical_best_examples() {
        let b = BeliefState::from_means(&[0.1, 0.3, 0.2], &[1, 1, 1], 5).unwrap();
        assert_eq!(recommend_empirical_best(&b).unwrap(), arm(2));
        let b = BeliefState::from_means(&[0.5, 0.5], &[1, 1], 5).unwrap();
        assert_eq!(recommend_empirical_best(&b).unwrap(), arm(1));
        let b = BeliefState::new(2, 5).unwrap();
        assert_eq!(
            recommend_empirical_best(&b),
            Err(Error::UndefinedRecommendation { arm: 1 })
        );
    }

    #[test]
    fn alternating_examples() {
        let mut p = Alternating;
        let b = BeliefState::from_means(&[0.0, 0.0], &[1, 1], 5).unwrap();
        assert_eq!(p.select(&b, &mut rng()).unwrap(), arm(1));
        let b = BeliefState::from_means(&[0.0, 0.0], &[5, 2], 10).unwrap();
        assert_eq!(p.select(&b, &mut rng()).unwrap(), arm(2));
        assert!(matches!(p.reset(3, 9), Err(Error::UnsupportedArity { .. })));
    }

    #[test]
    fn alternating_odd_episode_counts() {
        let mut p = Alternating;
        let mut b = BeliefState::new(2, 9).unwrap();
        while b.remaining() > 0 {
            let a = p.select(&b, &mut rng()).unwrap();
            b.record(a, 0.1).unwrap();
        }
        assert_eq!(b.arms()[0].pulls(), 5);
        assert_eq!(b.arms()[1].pulls(), 4);
    }

    #[test]
    fn forced_initialization() {
        let mut policies: Vec<Box<dyn Policy>> = vec![
            Box::new(BayesOptimal::new(DpConfig::default()).unwrap()),
            Box::new(Uniform),
            Box::new(SuccessiveRejects::default()),
            Box::new(FixedArm(arm(3))),
        ];
        for p in policies.iter_mut() {
            p.reset(3, 6).unwrap();
            let mut b = BeliefState::new(3, 6).unwrap();
            for t in 1..=3 {
                let a = p.select(&b, &mut rng()).unwrap();
                assert_eq!(a, arm(t), "{}", p.name());
                b.record(a, -(t as f64)).unwrap();
            }
        }
    }

    #[test]
    fn sr_schedule_examples() {
        let s = successive_rejects_schedule(3, 60).unwrap();
        assert_eq!(s.targets, vec![15, 22]);
        assert_eq!(s.phase_pulls, vec![15, 7]);
        assert_eq!(s.slack, 1);
        let s = successive_rejects_schedule(2, 10).unwrap();
        assert_eq!(s.targets, vec![4]);
        assert_eq!(s.slack, 2);
        let s = successive_rejects_schedule(2, 2).unwrap();
        assert_eq!(s.targets, vec![0]);
        assert!(matches!(
            successive_rejects_schedule(3, 2),
            Err(Error::InvalidBudget(_))
        ));
    }

    fn run_sr(means: &[f64], horizon: usize) -> (SuccessiveRejects, History, BeliefState) {
        let mut p = SuccessiveRejects::default();
        p.reset(means.len(), horizon).unwrap();
        let mut b = BeliefState::new(means.len(), horizon).unwrap();
        let mut h = History::new();
        while b.remaining() > 0 {
            let a = p.select(&b, &mut rng()).unwrap();
            b.record(a, means[a.index()]).unwrap();
            h.push(a, means[a.index()]);
        }
        h.recommendation = Some(p.recommend(&b).unwrap());
        (p, h, b)
    }

    #[test]
    fn sr_two_arms_ten_rounds() {
        let (_, h, _) = run_sr(&[0.0, 1.0], 10);
        assert_eq!(h.counts(2), vec![5, 5]);
        assert_eq!(h.recommendation, Some(arm(2)));
        let (_, h, _) = run_sr(&[0.0, 1.0], 2);
        assert_eq!(h.counts(2), vec![1, 1]);
    }

    #[test]
    fn sr_never_pulls_eliminated() {
        let (p, h, _) = run_sr(&[0.0, 0.3, 0.2], 60);
        // arm 1 is worst and goes after 15 pulls
        assert_eq!(h.counts(3), vec![15, 23, 22]);
        assert_eq!(p.survivors(), vec![arm(2), arm(3)]);
        assert_eq!(h.recommendation, Some(arm(2)));
        let after: Vec<_> = h.draws[45..].iter().map(|d| d.arm).collect();
        assert!(!after.contains(&arm(1)));
    }

    #[test]
    fn sr_elimination_tie_drops_highest_index() {
        let (p, _, _) = run_sr(&[0.0, 0.0, 0.0], 60);
        assert_eq!(p.survivors(), vec![arm(1), arm(2)]);
    }

    #[test]
    fn uniform_cycles() {
        let mut p = Uniform;
        let mut b = BeliefState::new(2, 4).unwrap();
        let mut seen = Vec::new();
        while b.remaining() > 0 {
            let a = p.select(&b, &mut rng()).unwrap();
            seen.push(a.number());
            b.record(a, 0.0).unwrap();
        }
        assert_eq!(seen, vec![1, 2, 1, 2]);
    }

    #[test]
    fn names_round_trip() {
        for name in POLICY_NAMES {
            assert_eq!(policy_by_name(name, &DpConfig::default()).unwrap().name(), name);
        }
        assert!(matches!(
            policy_by_name("thompson", &DpConfig::default()),
            Err(Error::UnknownPolicy(_))
        ));
    }
}
