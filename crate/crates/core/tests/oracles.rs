//! Closed-form and Monte-Carlo oracles for quantities computed
//! analytically by the library.

use std::f64::consts::PI;

use bayes_bai::policies::{Alternating, Uniform};
use bayes_bai::posterior::{self, GaussianParams};
use bayes_bai::simulate::{bayesian_regret, frequentist_regret, replicate, ArmPrior, MonteCarlo};
use bayes_bai::{Arm, BeliefState, Instance, Seed};
use rand_distr::{Distribution, StandardNormal};

#[test]
fn expected_max_of_three_standard_normals() {
    let p = GaussianParams { mean: 0.0, variance: 1.0 };
    let v = posterior::expected_max(&[p, p, p]).unwrap();
    assert!((v - 1.5 / PI.sqrt()).abs() < 1e-9, "{v}");
    assert!((v - 0.846284).abs() < 1e-6);
    let b = BeliefState::from_means(&[0.0, 0.0, 0.0], &[1, 1, 1], 3).unwrap();
    assert!((posterior::terminal_loss_general(&b).unwrap() - v).abs() < 1e-9);
}

#[test]
fn predictive_matches_two_stage_sampling() {
    let b = BeliefState::from_means(&[0.3, -0.5], &[3, 1], 6).unwrap();
    let arm = Arm::from_index(0);
    let pred = posterior::predictive_params(&b, arm).unwrap();
    let post = posterior::posterior_params(&b, arm).unwrap();
    let [m, sq] = replicate(400_000, Seed::new(9, 0), 1, || (), |_, _, r| {
        let z1: f64 = StandardNormal.sample(r);
        let z2: f64 = StandardNormal.sample(r);
        let x = post.mean + post.variance.sqrt() * z1 + z2;
        Ok([x, (x - pred.mean).powi(2)])
    })
    .unwrap();
    assert!((m.mean() - pred.mean).abs() < 3.0 * m.std_error());
    assert!((sq.mean() - pred.variance).abs() < 3.0 * sq.std_error());
}

#[test]
fn three_arm_terminal_loss_matches_sampling() {
    let means = [0.2, 0.0, -0.3];
    let counts = [2u32, 1, 4];
    let b = BeliefState::from_means(&means, &counts, 7).unwrap();
    let exact = posterior::terminal_loss_general(&b).unwrap();
    let [s] = replicate(1_000_000, Seed::new(10, 0), 4, || (), |_, _, r| {
        let mu: Vec<f64> = means
            .iter()
            .zip(counts)
            .map(|(&m, n)| {
                let z: f64 = StandardNormal.sample(r);
                m + z / (n as f64).sqrt()
            })
            .collect();
        Ok([mu.iter().copied().fold(f64::NEG_INFINITY, f64::max) - mu[0]])
    })
    .unwrap();
    assert!((s.mean() - exact).abs() < 3.0 * s.std_error(), "{} vs {exact}", s.mean());
}

#[test]
fn bayesian_regret_two_rounds() {
    // One pull per arm under N(0,1) priors: 1/√π − 1/√(2π).
    let target = 1.0 / PI.sqrt() - 1.0 / (2.0 * PI).sqrt();
    assert!((target - 0.165248).abs() < 1e-6);
    let prior = [ArmPrior::new(0.0, 1.0).unwrap(); 2];
    let mc = MonteCarlo::new(400_000, Seed::new(12, 0)).workers(2);
    let r = bayesian_regret(&Alternating, &prior, 2, &mc).unwrap();
    assert!((r.mean - target).abs() < 3.0 * r.std_error, "{} ± {}", r.mean, r.std_error);
}

#[test]
fn point_prior_reproduces_frequentist_run() {
    let means = [0.0, 0.25, 0.5];
    let prior: Vec<ArmPrior> = means.iter().map(|&m| ArmPrior::new(m, 0.0).unwrap()).collect();
    let mc = MonteCarlo::new(5_000, Seed::new(13, 2));
    let a = bayesian_regret(&Uniform, &prior, 9, &mc).unwrap();
    let b = frequentist_regret(&Uniform, &Instance::new(means.to_vec()).unwrap(), 9, &mc).unwrap();
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
}
