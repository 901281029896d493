mod common;

use common::{bfs_hops, policy_iteration, random_lattice, random_lattice_spec};
use pdql_core::env::{make_lattice, scale_rewards};
use pdql_core::mdp::validate_mdp;
use pdql_core::submdp::{build_submdp, plan_centers, plan_with_target, truncation_radius};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn quiet(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

#[test]
fn generated_lattices_pass_validation_across_a_seed_matrix() {
    for seed in 0..40 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = random_lattice(&mut rng, 200);
        for gamma in [0.5, 0.9] {
            let spec = make_lattice(&cfg, gamma).unwrap();
            let report = validate_mdp(&spec, 20_000, seed).unwrap();
            assert!(report.passed(), "seed {seed}: {report}");
        }
    }
}

proptest! {
    #![proptest_config(quiet(24))]

    #[test]
    fn lattice_metric_equals_transition_hops(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cfg = random_lattice(&mut rng, 150);
        cfg.slip_prob = 0.2;
        cfg.reward.absorbing = false;
        let spec = make_lattice(&cfg, 0.9).unwrap();
        for src in [0, spec.num_states() / 2, spec.num_states() - 1] {
            let hops = bfs_hops(&spec, src);
            for (t, &h) in hops.iter().enumerate() {
                prop_assert_eq!(spec.distance(src, t), h as f64, "{:?} {} -> {}", cfg.dims, src, t);
            }
        }
    }

    #[test]
    fn scale_rewards_is_idempotent(seed in any::<u64>()) {
        let spec = random_lattice_spec(seed, 100, 0.9);
        let once = scale_rewards(&spec);
        let twice = scale_rewards(&once);
        prop_assert_eq!(once.rewards(), twice.rewards());
    }

    #[test]
    fn submdp_values_stay_inside_the_distance_envelope(
        seed in any::<u64>(),
        gamma in prop::sample::select(vec![0.5, 0.7]),
        epsilon in prop::sample::select(vec![0.1, 0.25, 0.5]),
    ) {
        let spec = random_lattice_spec(seed, 80, gamma);
        let parent = policy_iteration(&spec);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        for _ in 0..4 {
            let center = rand::Rng::random_range(&mut rng, 0..spec.num_states());
            let sub = build_submdp(&spec, center, epsilon).unwrap();
            let local = sub.local_spec();
            for r in 0..local.num_states() * local.num_actions() {
                let (_, probs) = local.row(r / local.num_actions(), r % local.num_actions());
                prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            }
            let v_sub = policy_iteration(local);
            for (l, &v) in v_sub.iter().enumerate() {
                let d = sub.distance_to_center(l);
                let gap = (v - parent[sub.to_parent(l)]).abs();
                let envelope = epsilon / gamma.powi(d as i32);
                prop_assert!(gap <= envelope + 2e-8, "gap {gap} > {envelope} at distance {d}");
                if d == 0 {
                    prop_assert!(gap <= epsilon + 2e-8);
                }
            }
        }
    }

    #[test]
    fn truncation_radius_is_monotone(
        e1 in 0.001f64..0.99,
        e2 in 0.001f64..0.99,
        g1 in 0.01f64..0.99,
        g2 in 0.01f64..0.99,
    ) {
        let (elo, ehi) = (e1.min(e2), e1.max(e2));
        let (glo, ghi) = (g1.min(g2), g1.max(g2));
        prop_assert!(truncation_radius(ehi, g1).unwrap() <= truncation_radius(elo, g1).unwrap());
        prop_assert!(truncation_radius(e1, glo).unwrap() <= truncation_radius(e1, ghi).unwrap());
    }

    #[test]
    fn coverage_meets_every_requirement_on_recount(
        seed in any::<u64>(),
        radius in 1u32..4,
        target in 1usize..12,
    ) {
        let spec = random_lattice_spec(seed, 120, 0.9);
        let plan = plan_with_target(&spec, radius, target);
        let n = spec.num_states();
        let hops: Vec<Vec<usize>> = (0..n).map(|s| bfs_hops(&spec, s)).collect();
        for s in 0..n {
            let ball = (0..n).filter(|&t| hops[s][t] <= radius as usize).count();
            let covered = plan.centers.iter().filter(|&&c| hops[c][s] <= radius as usize).count();
            prop_assert!(covered >= target.min(ball), "state {s}: {covered} < min({target}, {ball})");
            prop_assert_eq!(plan.clamped_states.contains(&s), ball < target);
        }
    }
}

#[test]
fn planned_centers_cover_with_bound_derived_targets() {
    for seed in 0..5 {
        let spec = random_lattice_spec(seed, 150, 0.5);
        let plan = plan_centers(&spec, 0.25, 0.1).unwrap();
        let n = spec.num_states();
        for s in 0..n {
            let hops = bfs_hops(&spec, s);
            let ball = hops
                .iter()
                .filter(|&&h| h <= plan.coverage_radius as usize)
                .count();
            let covered = plan
                .centers
                .iter()
                .filter(|&&c| hops[c] <= plan.coverage_radius as usize)
                .count();
            assert!(covered >= plan.target_overlap.min(ball));
        }
    }
    assert_eq!(truncation_radius(0.01, 0.9).unwrap(), 66);
}
