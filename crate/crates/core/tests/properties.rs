//! Structural properties of the exact recursion, the posterior and the
//! policies, checked over random states.

use bayes_bai::bellman::{exact_loss, DpConfig};
use bayes_bai::policies::{policy_by_name, POLICY_NAMES};
use bayes_bai::posterior::terminal_loss_general;
use bayes_bai::simulate::run_episode;
use bayes_bai::{replay, Arm, BeliefState, Instance, Seed};
use proptest::prelude::*;

fn belief(means: &[f64], counts: &[u32], budget: usize) -> BeliefState {
    let t: u32 = counts.iter().sum();
    BeliefState::from_means(means, counts, t as usize + budget).unwrap()
}

fn state() -> impl Strategy<Value = (Vec<f64>, Vec<u32>, usize)> {
    (2usize..=3).prop_flat_map(|k| {
        (
            prop::collection::vec(-2.0f64..2.0, k),
            prop::collection::vec(1u32..6, k),
            1usize..=3,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn loss_is_invariant_under_arm_permutation((means, counts, budget) in state(), rot in 0usize..3) {
        let cfg = DpConfig::default();
        let k = means.len();
        let r = rot % k;
        let pm: Vec<f64> = (0..k).map(|i| means[(i + r) % k]).collect();
        let pc: Vec<u32> = (0..k).map(|i| counts[(i + r) % k]).collect();
        let a = exact_loss(&belief(&means, &counts, budget), budget, &cfg).unwrap();
        let b = exact_loss(&belief(&pm, &pc, budget), budget, &cfg).unwrap();
        prop_assert!((a.loss - b.loss).abs() < 1e-10);
        for i in 0..k {
            prop_assert!((b.arm_losses[i] - a.arm_losses[(i + r) % k]).abs() < 1e-10);
        }
    }

    #[test]
    fn loss_is_invariant_under_translation((means, counts, budget) in state(), shift in -3.0f64..3.0) {
        let cfg = DpConfig::default();
        let moved: Vec<f64> = means.iter().map(|m| m + shift).collect();
        let a = exact_loss(&belief(&means, &counts, budget), budget, &cfg).unwrap();
        let b = exact_loss(&belief(&moved, &counts, budget), budget, &cfg).unwrap();
        prop_assert!((a.loss - b.loss).abs() < 1e-9, "{} vs {}", a.loss, b.loss);
    }

    #[test]
    fn more_budget_never_hurts((means, counts, budget) in state()) {
        let cfg = DpConfig::default();
        let b = belief(&means, &counts, budget);
        let r = exact_loss(&b, budget, &cfg).unwrap();
        let fewer = r.loss_one_fewer.unwrap();
        prop_assert!(r.loss <= fewer + 1e-9, "{} > {}", r.loss, fewer);
        prop_assert!(fewer <= terminal_loss_general(&b).unwrap() + 1e-9);
        prop_assert!(r.loss >= -1e-12);
    }

    #[test]
    fn replay_matches_incremental_updates(rewards in prop::collection::vec((0usize..3, -4.0f64..4.0), 1..40)) {
        let mut live = BeliefState::new(3, rewards.len()).unwrap();
        let mut history = bayes_bai::History::new();
        for &(i, x) in &rewards {
            live.record(Arm::from_index(i), x).unwrap();
            history.push(Arm::from_index(i), x);
        }
        let folded = replay(&history, 3).unwrap();
        prop_assert_eq!(folded.arms(), live.arms());
        prop_assert_eq!(history.counts(3), live.arms().iter().map(|s| s.pulls()).collect::<Vec<_>>());
    }
}

#[test]
fn budget_zero_is_terminal_loss() {
    let b = belief(&[0.4, -0.2, 0.1], &[2, 3, 1], 0);
    let r = exact_loss(&b, 0, &DpConfig::default()).unwrap();
    assert!((r.loss - terminal_loss_general(&b).unwrap()).abs() < 1e-15);
    assert!(r.chosen_arm.is_none());
}

#[test]
fn every_policy_opens_with_one_pull_per_arm() {
    let instance = Instance::new(vec![0.1, 0.0, -0.1]).unwrap();
    for name in POLICY_NAMES {
        if name == "alternating" {
            continue;
        }
        let mut policy = policy_by_name(name, &DpConfig::default()).unwrap();
        let h = run_episode(policy.as_mut(), &instance, 6, Seed::new(5, 0)).unwrap();
        let opening: Vec<usize> = h.draws[..3].iter().map(|d| d.arm.number()).collect();
        assert_eq!(opening, vec![1, 2, 3], "{name}");
        assert_eq!(h.len(), 6);
        assert!(h.recommendation.is_some());
    }
}

#[test]
fn bayes_optimal_alternates_with_two_arms() {
    let instance = Instance::new(vec![0.0, 0.8]).unwrap();
    let mut policy = policy_by_name("bayes-optimal", &DpConfig::default()).unwrap();
    for seed in 0..5 {
        let h = run_episode(policy.as_mut(), &instance, 7, Seed::new(seed, 0)).unwrap();
        let counts = h.counts(2);
        assert!(counts[0].abs_diff(counts[1]) <= 1, "{counts:?}");
    }
}
