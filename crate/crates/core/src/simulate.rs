//! Monte-Carlo harness: episodes, frequentist and Bayesian simple regret,
//! probes of the underestimation / closeness / drift events, and the
//! starvation state.
//!
//! Replication `r` always draws from `seed.replication(r)`. Replications are
//! grouped in fixed blocks that are accumulated sequentially and merged in
//! block order, so results are bit-identical for every worker count.

use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Arm, BeliefState, History, Instance, PriorMode, Seed};
use crate::policies::Policy;
use crate::posterior::{log_normal_tail, normal_tail};
use crate::stats::RunningStats;

const BLOCK: u64 = 1024;

// Offset of the root seed for prior draws, so reward streams line up with
// the frequentist run on the same seed.
const PRIOR_ROOT_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Runs `reps` replications of `f` and accumulates each of its `N` outputs.
///
/// `init` builds per-block scratch state (for instance a policy clone);
/// `f` receives it with the replication index and that replication's rng.
pub fn replicate<const N: usize, S, I, F>(
    reps: u64,
    seed: Seed,
    workers: usize,
    init: I,
    f: F,
) -> Result<[RunningStats; N]>
where
    I: Fn() -> S + Sync,
    F: Fn(&mut S, u64, &mut ChaCha8Rng) -> Result<[f64; N]> + Sync,
{
    let blocks = reps.div_ceil(BLOCK);
    let run_block = |block: u64| -> Result<[RunningStats; N]> {
        let mut state = init();
        let mut acc = [RunningStats::new(); N];
        for rep in block * BLOCK..((block + 1) * BLOCK).min(reps) {
            let mut rng = seed.replication(rep).rng();
            for (a, x) in acc.iter_mut().zip(f(&mut state, rep, &mut rng)?) {
                a.push(x);
            }
        }
        Ok(acc)
    };
    let partials: Vec<Result<[RunningStats; N]>> = if workers <= 1 {
        (0..blocks).map(run_block).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("cannot start {workers} workers: {e}")))?;
        pool.install(|| (0..blocks).into_par_iter().map(run_block).collect())
    };
    let mut total = [RunningStats::new(); N];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part?) {
            t.merge(&p);
        }
    }
    Ok(total)
}

/// Monte-Carlo run settings shared by the regret estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub reps: u64,
    pub seed: Seed,
    #[serde(default = "one")]
    pub workers: usize,
    /// Prior the policies' beliefs start from.
    #[serde(default)]
    pub prior_mode: PriorMode,
}

fn one() -> usize {
    1
}

impl MonteCarlo {
    pub fn new(reps: u64, seed: Seed) -> Self {
        MonteCarlo {
            reps,
            seed,
            workers: 1,
            prior_mode: PriorMode::FlatInit,
        }
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn prior_mode(mut self, mode: PriorMode) -> Self {
        self.prior_mode = mode;
        self
    }

    fn check(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidParameter("need at least one replication".into()));
        }
        Ok(())
    }
}

/// Mean simple regret with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretEstimate {
    pub policy: String,
    pub horizon: usize,
    pub reps: u64,
    pub mean: f64,
    pub std_error: f64,
    pub seed: Seed,
}

impl RegretEstimate {
    pub fn from_stats(policy: &str, horizon: usize, stats: &RunningStats, seed: Seed) -> Self {
        RegretEstimate {
            policy: policy.to_string(),
            horizon,
            reps: stats.count(),
            mean: stats.mean(),
            std_error: stats.std_error(),
            seed,
        }
    }
}

fn check_horizon(arms: usize, horizon: usize, mode: &PriorMode) -> Result<()> {
    if mode.is_flat() && horizon < arms {
        return Err(Error::InvalidBudget(format!(
            "horizon {horizon} cannot pull each of {arms} arms once"
        )));
    }
    Ok(())
}

fn play(
    policy: &mut dyn Policy,
    means: &[f64],
    horizon: usize,
    mode: &PriorMode,
    rng: &mut dyn RngCore,
) -> Result<History> {
    let k = means.len();
    policy.reset(k, horizon)?;
    let mut belief = BeliefState::with_prior(k, horizon, mode.clone())?;
    let mut history = History::new();
    while belief.remaining() > 0 {
        let arm = policy.select(&belief, rng)?;
        arm.check(k)?;
        let noise: f64 = StandardNormal.sample(rng);
        let reward = means[arm.index()] + noise;
        belief.record(arm, reward)?;
        history.push(arm, reward);
    }
    history.recommendation = Some(policy.recommend(&belief)?);
    Ok(history)
}

/// Plays one flat-prior episode of `horizon` rounds on unit-variance
/// Gaussian rewards.
pub fn run_episode(
    policy: &mut dyn Policy,
    instance: &Instance,
    horizon: usize,
    seed: Seed,
) -> Result<History> {
    check_horizon(instance.num_arms(), horizon, &PriorMode::FlatInit)?;
    play(policy, instance.means(), horizon, &PriorMode::FlatInit, &mut seed.rng())
}

fn regret_of(means: &[f64], history: &History) -> f64 {
    let best = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let j: Arm = history.recommendation.expect("episodes end with a recommendation");
    best - means[j.index()]
}

/// Frequentist simple regret `μ⋆ − E[μ_J]` on a fixed instance.
pub fn frequentist_regret(
    policy: &dyn Policy,
    instance: &Instance,
    horizon: usize,
    mc: &MonteCarlo,
) -> Result<RegretEstimate> {
    mc.check()?;
    check_horizon(instance.num_arms(), horizon, &mc.prior_mode)?;
    let means = instance.means();
    let [stats] = replicate(
        mc.reps,
        mc.seed,
        mc.workers,
        || policy.box_clone(),
        |p, _, rng| {
            let h = play(p.as_mut(), means, horizon, &mc.prior_mode, rng)?;
            Ok([regret_of(means, &h)])
        },
    )?;
    Ok(RegretEstimate::from_stats(policy.name(), horizon, &stats, mc.seed))
}

/// Independent Gaussian prior on one arm's mean; variance 0 is a point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmPrior {
    pub mean: f64,
    pub variance: f64,
}

impl ArmPrior {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() || !(variance >= 0.0) || !variance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "prior needs finite mean and nonnegative variance, got ({mean}, {variance})"
            )));
        }
        Ok(ArmPrior { mean, variance })
    }
}

/// Bayesian simple regret: the means are drawn from `prior` once per
/// replication, then one episode is played.
///
/// Prior draws come from a stream separate from the rewards, so a point
/// prior reproduces [`frequentist_regret`] on the same seed exactly.
pub fn bayesian_regret(
    policy: &dyn Policy,
    prior: &[ArmPrior],
    horizon: usize,
    mc: &MonteCarlo,
) -> Result<RegretEstimate> {
    mc.check()?;
    if prior.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need a prior for at least 2 arms, got {}",
            prior.len()
        )));
    }
    for p in prior {
        ArmPrior::new(p.mean, p.variance)?;
    }
    check_horizon(prior.len(), horizon, &mc.prior_mode)?;
    let prior_seed = Seed::new(mc.seed.root ^ PRIOR_ROOT_SALT, mc.seed.stream);
    let [stats] = replicate(
        mc.reps,
        mc.seed,
        mc.workers,
        || policy.box_clone(),
        |p, rep, rng| {
            let mut prior_rng = prior_seed.replication(rep).rng();
            let means: Vec<f64> = prior
                .iter()
                .map(|a| {
                    let z: f64 = StandardNormal.sample(&mut prior_rng);
                    a.mean + a.variance.sqrt() * z
                })
                .collect();
            let h = play(p.as_mut(), &means, horizon, &mc.prior_mode, rng)?;
            Ok([regret_of(&means, &h)])
        },
    )?;
    Ok(RegretEstimate::from_stats(policy.name(), horizon, &stats, mc.seed))
}

/// `T^{−(C_U+Δ_G)²/2} / (2 (C_U+Δ_G) √(2π log T))`, returned as its logarithm.
pub fn log_underestimation_bound(horizon: usize, c_u: f64, delta_g: f64) -> f64 {
    let a = c_u + delta_g;
    let log_t = (horizon as f64).ln();
    -0.5 * a * a * log_t - (2.0 * a * (2.0 * std::f64::consts::PI * log_t).sqrt()).ln()
}

/// Lower bound on the probability that the best arm's first reward falls
/// below `−C_U √(log T)`.
pub fn underestimation_bound(horizon: usize, c_u: f64, delta_g: f64) -> f64 {
    log_underestimation_bound(horizon, c_u, delta_g).exp()
}

/// `Φ^c(C_U √(log T) + Δ_G)` and its logarithm.
pub fn underestimation_probability(horizon: usize, c_u: f64, delta_g: f64) -> (f64, f64) {
    let x = c_u * (horizon as f64).ln().sqrt() + delta_g;
    (normal_tail(x), log_normal_tail(x))
}

/// `(1/2) √(1/(π T³))`.
pub fn close_means_bound(horizon: usize) -> f64 {
    let t = horizon as f64;
    0.5 * (1.0 / (std::f64::consts::PI * t * t * t)).sqrt()
}

/// `2 T^{−7/2}`.
pub fn drift_bound(horizon: usize) -> f64 {
    2.0 * (horizon as f64).powf(-3.5)
}

/// Exact probability of the underestimation event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactProbe {
    pub probability: f64,
    pub log_probability: f64,
    pub bound: f64,
    pub log_bound: f64,
    pub holds: bool,
}

/// Monte-Carlo estimate of an event probability against a bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McProbe {
    pub probability: f64,
    pub std_error: f64,
    pub bound: f64,
    /// The bound holds up to three standard errors.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventProbeResult {
    pub horizon: usize,
    pub c_u: f64,
    pub delta_g: f64,
    pub reps: u64,
    pub seed: Seed,
    /// `P[μ̂_{3,1} ≤ −C_U √(log T)]` when arm 3 is `Δ_G` above the others.
    pub underestimation: ExactProbe,
    /// `P[|μ̂_{T'}| ≤ 1/T²]` against its lower bound.
    pub close: McProbe,
    /// Closeness together with a drift beyond `4 √(log T) √(Σ_{m≥n} 1/m²)`.
    pub drift: McProbe,
    /// The same with the envelope constant 3.
    pub drift_tight: McProbe,
}

fn check_odd(horizon: usize) -> Result<()> {
    if horizon < 3 || horizon % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "horizon must be odd and at least 3, got {horizon}"
        )));
    }
    Ok(())
}

/// Probes the three events at horizon `T = 2T' + 1`. Each replication draws
/// `T'` standard normal rewards and follows their running mean.
pub fn event_probes(
    horizon: usize,
    c_u: f64,
    delta_g: f64,
    reps: u64,
    seed: Seed,
    workers: usize,
) -> Result<EventProbeResult> {
    check_odd(horizon)?;
    if !(c_u > 0.0 && delta_g > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "C_U and Δ_G must be positive, got {c_u} and {delta_g}"
        )));
    }
    if reps == 0 {
        return Err(Error::InvalidParameter("need at least one replication".into()));
    }
    let half = (horizon - 1) / 2;
    let t = horizon as f64;
    let sqrt_log_t = t.ln().sqrt();
    let close_radius = 1.0 / (t * t);
    // tail[n-1] = √(Σ_{m=n}^{T'-1} 1/m²)
    let mut tail = vec![0.0; half];
    let mut acc = 0.0;
    for n in (1..half).rev() {
        acc += 1.0 / (n as f64 * n as f64);
        tail[n - 1] = acc.sqrt();
    }
    let [close, drift, drift_tight] = replicate(
        reps,
        seed,
        workers,
        || vec![0.0; half],
        |running, _, rng| {
            let mut sum = 0.0;
            for (n, slot) in running.iter_mut().enumerate() {
                let x: f64 = StandardNormal.sample(rng);
                sum += x;
                *slot = sum / (n + 1) as f64;
            }
            let last = running[half - 1];
            if last.abs() > close_radius {
                return Ok([0.0; 3]);
            }
            let worst = |c: f64| {
                running
                    .iter()
                    .zip(&tail)
                    .any(|(m, env)| (m - last).abs() > c * sqrt_log_t * env)
            };
            let indicator = |b: bool| if b { 1.0 } else { 0.0 };
            Ok([1.0, indicator(worst(4.0)), indicator(worst(3.0))])
        },
    )?;
    let (probability, log_probability) = underestimation_probability(horizon, c_u, delta_g);
    let log_bound = log_underestimation_bound(horizon, c_u, delta_g);
    let fclose = close_means_bound(horizon);
    let fdrift = drift_bound(horizon);
    let upper = |s: &RunningStats| McProbe {
        probability: s.mean(),
        std_error: s.std_error(),
        bound: fdrift,
        holds: s.mean() <= fdrift + 3.0 * s.std_error(),
    };
    Ok(EventProbeResult {
        horizon,
        c_u,
        delta_g,
        reps,
        seed,
        underestimation: ExactProbe {
            probability,
            log_probability,
            bound: log_bound.exp(),
            log_bound,
            holds: log_probability >= log_bound,
        },
        close: McProbe {
            probability: close.mean(),
            std_error: close.std_error(),
            bound: fclose,
            holds: close.mean() >= fclose - 3.0 * close.std_error(),
        },
        drift: upper(&drift),
        drift_tight: upper(&drift_tight),
    })
}

/// Canonical starvation snapshot: arms 1 and 2 at mean 0 with `n12` pulls
/// each, arm 3 at `−C_U √(log T)` after one pull, horizon `T`.
pub fn construct_w_state(horizon: usize, c_u: f64, n12: u32) -> Result<BeliefState> {
    check_odd(horizon)?;
    let half = (horizon - 1) / 2;
    if n12 == 0 || n12 as usize > half {
        return Err(Error::InvalidParameter(format!(
            "n12 must lie in 1..={half} for T = {horizon}, got {n12}"
        )));
    }
    if !(c_u > 0.0) || !c_u.is_finite() {
        return Err(Error::InvalidParameter(format!("C_U must be positive, got {c_u}")));
    }
    let low = -c_u * (horizon as f64).ln().sqrt();
    BeliefState::from_means(&[0.0, 0.0, low], &[n12, n12, 1], horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::{Alternating, Uniform};
    use approx::assert_abs_diff_eq;

    fn inst(means: &[f64]) -> Instance {
        Instance::new(means.to_vec()).unwrap()
    }

    #[test]
    fn episodes_are_reproducible() {
        let i = inst(&[0.0, 0.5]);
        let a = run_episode(&mut Uniform, &i, 6, Seed::new(3, 0)).unwrap();
        let b = run_episode(&mut Uniform, &i, 6, Seed::new(3, 0)).unwrap();
        assert_eq!(a, b);
        let u = run_episode(&mut Uniform, &i, 4, Seed::new(1, 0)).unwrap();
        assert_eq!(u.counts(2), vec![2, 2]);
    }

    #[test]
    fn equal_means_have_zero_regret() {
        let r = frequentist_regret(&Uniform, &inst(&[0.2; 3]), 9, &MonteCarlo::new(500, Seed::new(1, 0)))
            .unwrap();
        assert_eq!(r.mean, 0.0);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mc = MonteCarlo::new(5000, Seed::new(11, 2));
        let one = frequentist_regret(&Alternating, &inst(&[0.0, 0.3]), 7, &mc).unwrap();
        let four = frequentist_regret(&Alternating, &inst(&[0.0, 0.3]), 7, &mc.clone().workers(4)).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn point_prior_collapses_exactly() {
        let mc = MonteCarlo::new(3000, Seed::new(5, 0));
        let f = frequentist_regret(&Uniform, &inst(&[0.0, 0.5]), 4, &mc).unwrap();
        let prior = [ArmPrior::new(0.0, 0.0).unwrap(), ArmPrior::new(0.5, 0.0).unwrap()];
        let b = bayesian_regret(&Uniform, &prior, 4, &mc).unwrap();
        assert_eq!(f, b);
    }

    #[test]
    fn underestimation_examples() {
        // C_U √(log T) = 1 with Δ_G = 0.5
        let t = 3usize;
        let c_u = 1.0 / (t as f64).ln().sqrt();
        let (p, _) = underestimation_probability(t, c_u, 0.5);
        assert_abs_diff_eq!(p, 0.066_807_201_268_858, epsilon = 1e-9);
        let (p, lp) = underestimation_probability(100, 2.0, 0.5);
        assert!((p - 8.3e-7).abs() < 0.05e-7, "{p}");
        assert_abs_diff_eq!(lp, p.ln(), epsilon = 1e-9);
        let f = underestimation_bound(100, 2.0, 0.5);
        assert!((f - 2.1e-8).abs() < 0.05e-8, "{f}");
    }

    #[test]
    fn w_state_example() {
        let b = construct_w_state(9, 3.0, 2).unwrap();
        let s: Vec<f64> = b.arms().iter().map(|a| a.sum()).collect();
        assert_eq!(s, vec![0.0, 0.0, -3.0 * 9f64.ln().sqrt()]);
        let n: Vec<u32> = b.arms().iter().map(|a| a.pulls()).collect();
        assert_eq!(n, vec![2, 2, 1]);
        assert_eq!(b.horizon(), 9);
        assert!(construct_w_state(9, 3.0, 5).is_err());
        assert!(construct_w_state(10, 3.0, 2).is_err());
    }

    #[test]
    fn event_probe_shapes() {
        let r = event_probes(11, 2.0, 0.5, 2000, Seed::new(1, 0), 1).unwrap();
        assert!(r.underestimation.holds);
        assert!((0.0..=1.0).contains(&r.close.probability));
        assert!(r.drift.probability <= r.close.probability);
        assert!(r.drift.probability <= r.drift_tight.probability);
    }
}
