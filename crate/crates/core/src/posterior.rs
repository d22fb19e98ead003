//! Closed-form Gaussian posterior mathematics for unit-variance arms.
//!
//! With a flat prior and `N` observations summing to `S`, an arm's mean has
//! posterior `N(S/N, 1/N)`. The informative prior `N(m, 1)` behaves as one
//! extra pseudo-observation equal to `m`, so everything below works on an
//! *effective* count (`N` or `N + 1`).
//!
//! Expected maxima of independent Gaussians are reduced to one-dimensional
//! integrals of products of CDFs and evaluated with the adaptive
//! Gauss–Kronrod integrator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{argmax, Arm, BeliefState, PriorMode};
use crate::quadrature;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Absolute tolerance for the expected-maximum integrals.
pub const EXPECTED_MAX_TOLERANCE: f64 = 1e-10;
const MAX_SEGMENTS: usize = 4000;
// Integration window half-width in posterior standard deviations.
const WINDOW_SDS: f64 = 12.0;

/// Mean and variance of a Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub mean: f64,
    pub variance: f64,
}

impl GaussianParams {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) || !variance.is_finite() || !mean.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gaussian needs finite mean and positive variance, got ({mean}, {variance})"
            )));
        }
        Ok(GaussianParams { mean, variance })
    }

    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        normal_cdf((x - self.mean) / self.sd())
    }

    pub fn sf(&self, x: f64) -> f64 {
        normal_tail((x - self.mean) / self.sd())
    }
}

/// Posterior mean and effective count of one arm.
pub(crate) fn effective(belief: &BeliefState, arm: Arm) -> Result<(f64, u32)> {
    arm.check(belief.num_arms())?;
    let stats = belief.stats(arm);
    match belief.prior() {
        PriorMode::FlatInit => match stats.empirical_mean() {
            Some(mean) => Ok((mean, stats.pulls())),
            None => Err(Error::UndefinedPosterior { arm: arm.number() }),
        },
        PriorMode::Informative { means } => {
            let n = stats.pulls() + 1;
            Ok(((means[arm.index()] + stats.sum()) / n as f64, n))
        }
    }
}

/// Posterior means and effective counts of all arms.
pub(crate) fn effective_all(belief: &BeliefState) -> Result<(Vec<f64>, Vec<u32>)> {
    (0..belief.num_arms())
        .map(|i| effective(belief, Arm::from_index(i)))
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().unzip())
}

/// Records `reward` on `arm`, returning the new belief.
pub fn update(belief: &BeliefState, arm: Arm, reward: f64) -> Result<BeliefState> {
    let mut next = belief.clone();
    next.record(arm, reward)?;
    Ok(next)
}

/// Posterior of the arm's mean: `N(S/N, 1/N)` under the flat prior.
pub fn posterior_params(belief: &BeliefState, arm: Arm) -> Result<GaussianParams> {
    let (mean, n) = effective(belief, arm)?;
    GaussianParams::new(mean, 1.0 / n as f64)
}

/// Posterior parameters of every arm.
pub fn posterior_all(belief: &BeliefState) -> Result<Vec<GaussianParams>> {
    (0..belief.num_arms())
        .map(|i| posterior_params(belief, Arm::from_index(i)))
        .collect()
}

/// Predictive law of the next reward from `arm`: the posterior draw of the
/// mean followed by unit noise, composed into `N(mean, 1 + 1/N)`.
pub fn predictive_params(belief: &BeliefState, arm: Arm) -> Result<GaussianParams> {
    let post = posterior_params(belief, arm)?;
    GaussianParams::new(post.mean, 1.0 + post.variance)
}

/// Law of the change in the posterior mean caused by one more pull of
/// `arm`: zero mean, variance `1/(N(N+1))`.
pub fn posterior_mean_increment_params(belief: &BeliefState, arm: Arm) -> Result<GaussianParams> {
    let (_, n) = effective(belief, arm)?;
    GaussianParams::new(0.0, increment_variance(n))
}

/// `1/(n(n+1))`, the variance of the posterior-mean increment at count `n`.
pub fn increment_variance(n: u32) -> f64 {
    let n = n as f64;
    1.0 / (n * (n + 1.0))
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// `P[Z <= x]` for standard normal `Z`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Upper tail `P[Z > x]` for standard normal `Z`, via `erfc`.
pub fn normal_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// `ln P[Z > x]`, finite far past the point where [`normal_tail`] underflows.
pub fn log_normal_tail(x: f64) -> f64 {
    if x < 30.0 {
        normal_tail(x).ln()
    } else {
        // Asymptotic series of the Mills ratio; four terms are exact to
        // double precision beyond x = 30.
        let x2 = x * x;
        let series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
        -0.5 * x2 - (x * (2.0 * std::f64::consts::PI).sqrt()).ln() + series.ln()
    }
}

/// Classical sandwich around the normal tail, valid for `x > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBounds {
    pub lower: f64,
    pub upper: f64,
}

/// `(1/x − 1/x³) φ(x) <= P[Z > x] <= φ(x)/x`.
pub fn normal_tail_bounds(x: f64) -> Result<TailBounds> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "tail bounds need finite x > 0, got {x}"
        )));
    }
    let pdf = normal_pdf(x);
    Ok(TailBounds {
        lower: (1.0 / x - 1.0 / (x * x * x)) * pdf,
        upper: pdf / x,
    })
}

/// `E[X⁺]` for `X ~ N(mean, variance)`; `variance` may be zero.
pub fn positive_part_mean(mean: f64, variance: f64) -> f64 {
    if variance <= 0.0 {
        return mean.max(0.0);
    }
    let sd = variance.sqrt();
    let z = mean / sd;
    sd * normal_pdf(z) + mean * normal_cdf(z)
}

/// Bayesian simple regret of recommending the empirical best of two arms,
/// `E[(r − |Δ̂|)⁺]` with `r ~ N(0, 1/N1 + 1/N2)`.
pub fn terminal_loss_two(delta_hat: f64, n1: u32, n2: u32) -> Result<f64> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "terminal loss needs positive counts, got ({n1}, {n2})"
        )));
    }
    let variance = 1.0 / n1 as f64 + 1.0 / n2 as f64;
    Ok(positive_part_mean(-delta_hat.abs(), variance))
}

/// `E[(M − X)⁺]` where `M` is the max of `others` and all are independent:
/// `∫ P[X < z] P[M > z] dz`.
fn shortfall_below_max(x: GaussianParams, others: &[GaussianParams], tol: f64) -> Result<f64> {
    if others.is_empty() {
        return Ok(0.0);
    }
    let lower = x.mean - WINDOW_SDS * x.sd();
    let upper = others
        .iter()
        .map(|g| g.mean + WINDOW_SDS * g.sd())
        .fold(f64::NEG_INFINITY, f64::max);
    if lower >= upper {
        return Ok(0.0);
    }
    let integrand = |z: f64| {
        let below: f64 = others.iter().map(|g| g.cdf(z)).product();
        x.cdf(z) * (1.0 - below)
    };
    quadrature::integrate(integrand, lower, upper, tol, MAX_SEGMENTS).map(|r| r.value.max(0.0))
}

/// `E[(X − M)⁺]` where `M` is the max of `others`: `∫ P[M < z] P[X > z] dz`.
fn excess_over_max(x: GaussianParams, others: &[GaussianParams]) -> Result<f64> {
    if others.is_empty() {
        return Err(Error::InvalidParameter("excess mass needs at least two arms".into()));
    }
    let lower = others
        .iter()
        .map(|g| g.mean - WINDOW_SDS * g.sd())
        .fold(f64::NEG_INFINITY, f64::max);
    let upper = x.mean + WINDOW_SDS * x.sd();
    if lower >= upper {
        return Ok(0.0);
    }
    let integrand = |z: f64| {
        let below: f64 = others.iter().map(|g| g.cdf(z)).product();
        below * x.sf(z)
    };
    quadrature::integrate(integrand, lower, upper, EXPECTED_MAX_TOLERANCE, MAX_SEGMENTS)
        .map(|r| r.value.max(0.0))
}

/// `E[max_i X_i]` for independent Gaussians.
pub fn expected_max(params: &[GaussianParams]) -> Result<f64> {
    let means: Vec<f64> = params.iter().map(|g| g.mean).collect();
    let lead = argmax(&means).index();
    let others: Vec<GaussianParams> = params
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != lead)
        .map(|(_, g)| *g)
        .collect();
    Ok(params[lead].mean + shortfall_below_max(params[lead], &others, EXPECTED_MAX_TOLERANCE)?)
}

/// Posterior expected regret of recommending the empirical best arm now:
/// `E_H[max_i μ_i] − max_i μ̂_i`.
pub fn terminal_loss_general(belief: &BeliefState) -> Result<f64> {
    terminal_loss_with_tolerance(belief, EXPECTED_MAX_TOLERANCE)
}

pub(crate) fn terminal_loss_with_tolerance(belief: &BeliefState, tol: f64) -> Result<f64> {
    let params = posterior_all(belief)?;
    let means: Vec<f64> = params.iter().map(|g| g.mean).collect();
    let lead = argmax(&means).index();
    let others: Vec<GaussianParams> = params
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != lead)
        .map(|(_, g)| *g)
        .collect();
    shortfall_below_max(params[lead], &others, tol)
}

/// Posterior regret mass of a recommendation that never picks `arm`:
/// `E_H[(μ_arm − max_{j≠arm} μ_j)⁺]`. Computed by one-dimensional adaptive
/// quadrature over the product of the other arms' CDFs.
pub fn best_arm_excess_mass(belief: &BeliefState, arm: Arm) -> Result<f64> {
    arm.check(belief.num_arms())?;
    let params = posterior_all(belief)?;
    let others: Vec<GaussianParams> = params
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != arm.index())
        .map(|(_, g)| *g)
        .collect();
    excess_over_max(params[arm.index()], &others)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn arm(n: usize) -> Arm {
        Arm::new(n).unwrap()
    }

    fn belief(means: &[f64], counts: &[u32]) -> BeliefState {
        let horizon = counts.iter().sum::<u32>() as usize + 10;
        BeliefState::from_means(means, counts, horizon).unwrap()
    }

    #[test]
    fn update_examples() {
        let b = belief(&[0.0, 0.0], &[1, 1]);
        let b = update(&b, arm(1), 1.0).unwrap();
        assert_eq!(b.stats(arm(1)).pulls(), 2);
        assert_eq!(b.stats(arm(1)).empirical_mean(), Some(0.5));
        assert_eq!(b.t(), 3);

        let b = belief(&[0.0, 0.75], &[1, 4]);
        let b = update(&b, arm(2), -3.0).unwrap();
        assert_eq!(b.stats(arm(2)).empirical_mean(), Some(0.0));
        assert_eq!(posterior_params(&b, arm(2)).unwrap().variance, 0.2);
    }

    #[test]
    fn update_at_horizon_fails() {
        let b = BeliefState::from_means(&[0.0, 0.0], &[1, 1], 2).unwrap();
        assert!(matches!(
            update(&b, arm(1), 0.0),
            Err(Error::BudgetExhausted { .. })
        ));
    }

    #[test]
    fn posterior_examples() {
        let b = belief(&[0.75, 0.0], &[4, 1]);
        let p = posterior_params(&b, arm(1)).unwrap();
        assert_eq!((p.mean, p.variance), (0.75, 0.25));
        let p = posterior_params(&b, arm(2)).unwrap();
        assert_eq!((p.mean, p.variance), (0.0, 1.0));

        let empty = BeliefState::new(2, 4).unwrap();
        assert_eq!(
            posterior_params(&empty, arm(1)),
            Err(Error::UndefinedPosterior { arm: 1 })
        );

        let informative = BeliefState::with_prior(
            2,
            4,
            PriorMode::Informative {
                means: vec![0.3, -1.0],
            },
        )
        .unwrap();
        let p = posterior_params(&informative, arm(2)).unwrap();
        assert_eq!((p.mean, p.variance), (-1.0, 1.0));
    }

    #[test]
    fn predictive_examples() {
        let b = belief(&[0.0, 0.75], &[1, 4]);
        let p = predictive_params(&b, arm(1)).unwrap();
        assert_eq!((p.mean, p.variance), (0.0, 2.0));
        let p = predictive_params(&b, arm(2)).unwrap();
        assert_eq!((p.mean, p.variance), (0.75, 1.25));
    }

    #[test]
    fn increment_examples() {
        let b = belief(&[0.2, 0.0], &[1, 3]);
        let p = posterior_mean_increment_params(&b, arm(1)).unwrap();
        assert_eq!((p.mean, p.variance), (0.0, 0.5));
        let p = posterior_mean_increment_params(&b, arm(2)).unwrap();
        assert_abs_diff_eq!(p.variance, 1.0 / 12.0, epsilon = 1e-16);
    }

    #[test]
    fn increment_variance_matches_predictive_scaling() {
        for n in 1..=50u32 {
            let nf = n as f64;
            let via_predictive = (1.0 + 1.0 / nf) / ((nf + 1.0) * (nf + 1.0));
            assert_abs_diff_eq!(via_predictive, increment_variance(n), epsilon = 1e-15);
        }
    }

    #[test]
    fn variance_decomposition() {
        for n in 1..=100u32 {
            let nf = n as f64;
            assert_abs_diff_eq!(
                1.0 / nf - (increment_variance(n) + 1.0 / (nf + 1.0)),
                0.0,
                epsilon = 4.0 * f64::EPSILON
            );
        }
    }

    #[test]
    fn tail_values() {
        assert_eq!(normal_tail(0.0), 0.5);
        assert_abs_diff_eq!(normal_tail(1.0), 0.158_655_253_931_457, epsilon = 1e-12);
        assert_abs_diff_eq!(normal_tail(2.0), 0.022_750_131_948_179, epsilon = 1e-12);
        let b = normal_tail_bounds(2.0).unwrap();
        // (1/2 − 1/8) φ(2) = 0.375 × 0.053991
        assert_abs_diff_eq!(b.lower, 0.020_246_6, epsilon = 1e-6);
        assert_abs_diff_eq!(b.upper, 0.026_995, epsilon = 1e-6);
        assert!(normal_tail_bounds(0.0).is_err());
    }

    #[test]
    fn log_tail_is_continuous_at_switch() {
        let below = normal_tail(29.999_999).ln();
        assert_abs_diff_eq!(log_normal_tail(30.0), below, epsilon = 1e-4);
        assert!(log_normal_tail(60.0).is_finite());
        assert!(normal_tail(60.0) == 0.0);
    }

    #[test]
    fn terminal_two_examples() {
        let l = terminal_loss_two(0.0, 1, 1).unwrap();
        assert_abs_diff_eq!(l, 1.0 / std::f64::consts::PI.sqrt(), epsilon = 1e-12);
        let l = terminal_loss_two(1.0, 1, 1).unwrap();
        assert_abs_diff_eq!(l, 0.199_64, epsilon = 1e-5);
        assert!(terminal_loss_two(1e3, 1, 1).unwrap() < 1e-300);
        assert!(terminal_loss_two(0.0, 0, 1).is_err());
    }

    #[test]
    fn terminal_general_examples() {
        let l = terminal_loss_general(&belief(&[0.0, 0.0], &[1, 1])).unwrap();
        assert_abs_diff_eq!(l, 0.564_189_583_547_756, epsilon = 1e-9);
        let l = terminal_loss_general(&belief(&[0.0, 0.0, 0.0], &[1, 1, 1])).unwrap();
        assert_abs_diff_eq!(l, 1.5 / std::f64::consts::PI.sqrt(), epsilon = 1e-9);
        let l = terminal_loss_general(&belief(&[10.0, 0.0], &[100, 100])).unwrap();
        assert!(l < 1e-12, "{l}");
    }

    #[test]
    fn excess_mass_examples() {
        let b = belief(&[0.0, 10.0], &[100, 100]);
        assert!(best_arm_excess_mass(&b, arm(1)).unwrap() < 1e-12);
        let b = belief(&[0.0, 0.0], &[1, 1]);
        assert_abs_diff_eq!(
            best_arm_excess_mass(&b, arm(1)).unwrap(),
            0.564_189_583_547_756,
            epsilon = 1e-9
        );
        let b = belief(&[0.4, 0.4, 0.4], &[3, 3, 3]);
        let vals: Vec<f64> = (1..=3).map(|i| best_arm_excess_mass(&b, arm(i)).unwrap()).collect();
        assert_abs_diff_eq!(vals[0], vals[1], epsilon = 1e-10);
        assert_abs_diff_eq!(vals[0], vals[2], epsilon = 1e-10);
    }

    #[test]
    fn expected_max_two_matches_closed_form() {
        let a = GaussianParams::new(0.3, 0.5).unwrap();
        let b = GaussianParams::new(-0.2, 0.25).unwrap();
        let closed = b.mean + positive_part_mean(a.mean - b.mean, a.variance + b.variance);
        assert_abs_diff_eq!(expected_max(&[a, b]).unwrap(), closed, epsilon = 1e-10);
    }
}
