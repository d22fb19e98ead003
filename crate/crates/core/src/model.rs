//! Domain types shared by every other module: arms, instances, sufficient
//! statistics, beliefs, histories and seeds.
//!
//! Arm indices are 1-based on every public surface. [`Arm`] carries the
//! 1-based number; [`Arm::index`] gives the 0-based slot used for vectors.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 1-based arm number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Arm(usize);

impl Arm {
    /// Builds an arm from its 1-based number. Returns `None` for 0.
    pub fn new(number: usize) -> Option<Self> {
        (number >= 1).then_some(Arm(number))
    }

    /// Builds an arm from a 0-based vector slot.
    pub fn from_index(index: usize) -> Self {
        Arm(index + 1)
    }

    /// The 1-based arm number.
    pub fn number(self) -> usize {
        self.0
    }

    /// The 0-based vector slot.
    pub fn index(self) -> usize {
        self.0 - 1
    }

    pub(crate) fn check(self, arms: usize) -> Result<()> {
        if self.0 > arms {
            return Err(Error::ArmOutOfRange { arm: self.0, arms });
        }
        Ok(())
    }
}

impl TryFrom<usize> for Arm {
    type Error = String;

    fn try_from(value: usize) -> Result<Self, Self::Error> {
        Arm::new(value).ok_or_else(|| "arm numbers start at 1".to_string())
    }
}

impl From<Arm> for usize {
    fn from(arm: Arm) -> usize {
        arm.0
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// True arm means of a frequentist problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Instance {
    means: Vec<f64>,
}

impl Instance {
    pub fn new(means: Vec<f64>) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::InvalidInstance(format!(
                "need at least 2 arms, got {}",
                means.len()
            )));
        }
        if let Some(bad) = means.iter().find(|m| !m.is_finite()) {
            return Err(Error::InvalidInstance(format!("non-finite mean {bad}")));
        }
        Ok(Instance { means })
    }

    pub fn num_arms(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn mean(&self, arm: Arm) -> f64 {
        self.means[arm.index()]
    }

    /// Largest true mean.
    pub fn best_mean(&self) -> f64 {
        self.means.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Best arm, lowest index on ties.
    pub fn best_arm(&self) -> Arm {
        argmax(&self.means)
    }

    /// Gap between the best mean and `arm`'s mean.
    pub fn gap(&self, arm: Arm) -> f64 {
        self.best_mean() - self.mean(arm)
    }
}

impl TryFrom<Vec<f64>> for Instance {
    type Error = Error;

    fn try_from(means: Vec<f64>) -> Result<Self> {
        Instance::new(means)
    }
}

impl From<Instance> for Vec<f64> {
    fn from(instance: Instance) -> Vec<f64> {
        instance.means
    }
}

/// Reward sum and pull count of one arm.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ArmStats {
    sum: f64,
    pulls: u32,
}

impl ArmStats {
    pub fn new(sum: f64, pulls: u32) -> Result<Self> {
        if pulls == 0 && sum != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "arm with no pulls must have zero reward sum, got {sum}"
            )));
        }
        if !sum.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite reward sum {sum}")));
        }
        Ok(ArmStats { sum, pulls })
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn pulls(&self) -> u32 {
        self.pulls
    }

    /// `S / N`, defined once the arm has been pulled.
    pub fn empirical_mean(&self) -> Option<f64> {
        (self.pulls > 0).then(|| self.sum / self.pulls as f64)
    }

    pub(crate) fn record(&mut self, reward: f64) {
        self.sum += reward;
        self.pulls += 1;
    }
}

/// How the posterior is seeded before any observation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum PriorMode {
    /// Improper flat prior; every arm is pulled once before the posterior
    /// is defined.
    #[default]
    FlatInit,
    /// Unit-variance Gaussian prior `N(means[i], 1)` per arm. Acts as one
    /// pseudo-observation equal to the prior mean.
    Informative { means: Vec<f64> },
}

impl PriorMode {
    pub fn is_flat(&self) -> bool {
        matches!(self, PriorMode::FlatInit)
    }
}

/// Per-arm sufficient statistics plus the round clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    arms: Vec<ArmStats>,
    t: usize,
    horizon: usize,
    #[serde(default)]
    prior: PriorMode,
}

impl BeliefState {
    /// Empty flat-prior belief for `arms` arms and a budget of `horizon` rounds.
    pub fn new(arms: usize, horizon: usize) -> Result<Self> {
        if arms < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 arms, got {arms}")));
        }
        Ok(BeliefState {
            arms: vec![ArmStats::default(); arms],
            t: 0,
            horizon,
            prior: PriorMode::FlatInit,
        })
    }

    /// Empty belief under the given prior mode.
    pub fn with_prior(arms: usize, horizon: usize, prior: PriorMode) -> Result<Self> {
        if let PriorMode::Informative { means } = &prior {
            if means.len() != arms {
                return Err(Error::InvalidParameter(format!(
                    "prior has {} means for {arms} arms",
                    means.len()
                )));
            }
            if means.iter().any(|m| !m.is_finite()) {
                return Err(Error::InvalidParameter("non-finite prior mean".into()));
            }
        }
        let mut belief = BeliefState::new(arms, horizon)?;
        belief.prior = prior;
        Ok(belief)
    }

    /// Belief from explicit statistics; the clock is set to the total pull count.
    pub fn from_stats(stats: Vec<ArmStats>, horizon: usize) -> Result<Self> {
        let mut belief = BeliefState::new(stats.len(), horizon)?;
        let t: usize = stats.iter().map(|s| s.pulls as usize).sum();
        if t > horizon {
            return Err(Error::InvalidBudget(format!(
                "{t} pulls already exceed the horizon {horizon}"
            )));
        }
        belief.arms = stats;
        belief.t = t;
        Ok(belief)
    }

    /// Flat-prior belief whose arm `i` has posterior mean `means[i]` after
    /// `counts[i]` pulls.
    pub fn from_means(means: &[f64], counts: &[u32], horizon: usize) -> Result<Self> {
        if means.len() != counts.len() {
            return Err(Error::InvalidParameter(format!(
                "{} means but {} counts",
                means.len(),
                counts.len()
            )));
        }
        let stats = means
            .iter()
            .zip(counts)
            .map(|(&m, &n)| ArmStats::new(if n == 0 { 0.0 } else { m * n as f64 }, n))
            .collect::<Result<Vec<_>>>()?;
        BeliefState::from_stats(stats, horizon)
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn arms(&self) -> &[ArmStats] {
        &self.arms
    }

    pub fn stats(&self, arm: Arm) -> ArmStats {
        self.arms[arm.index()]
    }

    /// Samples consumed so far.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Rounds left before the budget is exhausted.
    pub fn remaining(&self) -> usize {
        self.horizon - self.t
    }

    pub fn prior(&self) -> &PriorMode {
        &self.prior
    }

    /// Returns the same statistics with a different total budget.
    pub fn with_horizon(mut self, horizon: usize) -> Result<Self> {
        if horizon < self.t {
            return Err(Error::InvalidBudget(format!(
                "horizon {horizon} is before the current round {}",
                self.t
            )));
        }
        self.horizon = horizon;
        Ok(self)
    }

    /// Records one observation in place.
    pub fn record(&mut self, arm: Arm, reward: f64) -> Result<()> {
        arm.check(self.num_arms())?;
        if self.t >= self.horizon {
            return Err(Error::BudgetExhausted {
                t: self.t,
                horizon: self.horizon,
            });
        }
        self.arms[arm.index()].record(reward);
        self.t += 1;
        Ok(())
    }

    /// First arm never pulled, if the flat-prior initialization is unfinished.
    pub fn forced_arm(&self) -> Option<Arm> {
        if !self.prior.is_flat() {
            return None;
        }
        self.arms.iter().position(|s| s.pulls == 0).map(Arm::from_index)
    }
}

/// One observed round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub round: usize,
    pub arm: Arm,
    pub reward: f64,
}

/// Ordered record of an episode plus its final recommendation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct History {
    pub draws: Vec<Draw>,
    pub recommendation: Option<Arm>,
}

impl History {
    pub fn new() -> Self {
        History::default()
    }

    pub fn push(&mut self, arm: Arm, reward: f64) {
        let round = self.draws.len() + 1;
        self.draws.push(Draw { round, arm, reward });
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Pull counts per arm.
    pub fn counts(&self, arms: usize) -> Vec<u32> {
        let mut counts = vec![0; arms];
        for d in &self.draws {
            if d.arm.index() < arms {
                counts[d.arm.index()] += 1;
            }
        }
        counts
    }
}

/// Folds a history into flat-prior sufficient statistics. The horizon of
/// the result equals the number of draws.
pub fn replay(history: &History, arms: usize) -> Result<BeliefState> {
    let mut belief = BeliefState::new(arms, history.len())?;
    for draw in &history.draws {
        if draw.arm.index() >= arms {
            return Err(Error::MalformedHistory(format!(
                "round {} pulls arm {} but there are only {arms} arms",
                draw.round, draw.arm
            )));
        }
        belief.record(draw.arm, draw.reward)?;
    }
    Ok(belief)
}

/// Identifies one independent random stream: a root seed and a stream index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub root: u64,
    pub stream: u64,
}

impl Seed {
    pub fn new(root: u64, stream: u64) -> Self {
        Seed { root, stream }
    }

    /// Seed of replication `rep` under this root, offset by this stream.
    pub fn replication(self, rep: u64) -> Seed {
        Seed {
            root: self.root,
            stream: self.stream.wrapping_add(rep),
        }
    }

    /// Counter-based generator for this stream. Independent of how
    /// replications are scheduled across threads.
    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root);
        rng.set_stream(self.stream);
        rng
    }
}

/// Index of the largest value, lowest index on ties.
pub(crate) fn argmax(values: &[f64]) -> Arm {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    Arm::from_index(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arm(n: usize) -> Arm {
        Arm::new(n).unwrap()
    }

    #[test]
    fn replay_empty() {
        let belief = replay(&History::new(), 2).unwrap();
        assert_eq!(belief.t(), 0);
        assert_eq!(belief.arms(), &[ArmStats::default(); 2]);
    }

    #[test]
    fn replay_single_and_cancel() {
        let mut h = History::new();
        h.push(arm(1), 1.0);
        let b = replay(&h, 2).unwrap();
        assert_eq!(b.stats(arm(1)), ArmStats::new(1.0, 1).unwrap());
        assert_eq!(b.stats(arm(2)), ArmStats::default());

        h.push(arm(1), -1.0);
        let b = replay(&h, 2).unwrap();
        assert_eq!(b.stats(arm(1)), ArmStats::new(0.0, 2).unwrap());
        assert_eq!(b.t(), 2);
    }

    #[test]
    fn replay_rejects_bad_arm() {
        let mut h = History::new();
        h.push(arm(3), 0.5);
        assert!(matches!(replay(&h, 2), Err(Error::MalformedHistory(_))));
    }

    #[test]
    fn arm_numbering() {
        assert!(Arm::new(0).is_none());
        assert_eq!(Arm::from_index(0).number(), 1);
        assert_eq!(arm(3).index(), 2);
        assert_eq!(serde_json::to_string(&arm(2)).unwrap(), "2");
        assert!(serde_json::from_str::<Arm>("0").is_err());
    }

    #[test]
    fn instance_validation() {
        assert!(Instance::new(vec![1.0]).is_err());
        assert!(Instance::new(vec![0.0, f64::NAN]).is_err());
        let inst = Instance::new(vec![0.0, 0.5, 0.5]).unwrap();
        assert_eq!(inst.best_arm(), arm(2));
        assert_eq!(inst.gap(arm(1)), 0.5);
    }

    #[test]
    fn record_respects_budget() {
        let mut b = BeliefState::new(2, 1).unwrap();
        b.record(arm(2), 0.3).unwrap();
        assert_eq!(
            b.record(arm(1), 0.1),
            Err(Error::BudgetExhausted { t: 1, horizon: 1 })
        );
    }

    #[test]
    fn seed_streams_differ() {
        use rand::Rng;
        let a: u64 = Seed::new(7, 0).rng().random();
        let b: u64 = Seed::new(7, 1).rng().random();
        let a2: u64 = Seed::new(7, 0).rng().random();
        assert_ne!(a, b);
        assert_eq!(a, a2);
    }
}
