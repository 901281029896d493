use pdql_core::submdp::fuse_estimates;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn empirical_deviation_frequency_stays_under_the_fused_tail() {
    const N: usize = 100;
    const TRIALS: usize = 10_000;
    let v_star = 3.0;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    // each estimate lies within its own error bound of V*
    let bounds: Vec<f64> = (0..N).map(|_| rng.random_range(0.05..0.2)).collect();
    let thresholds = [0.01, 0.02, 0.03, 0.04, 0.05];
    let mut hits = [0usize; 5];
    let mut tails = [0.0; 5];
    for _ in 0..TRIALS {
        let estimates: Vec<(f64, f64)> = bounds
            .iter()
            .map(|&e| (v_star + rng.random_range(-e..=e), e))
            .collect();
        let fused = fuse_estimates(&estimates).unwrap();
        for (i, &eps) in thresholds.iter().enumerate() {
            tails[i] = fused.tail_bound(eps);
            hits[i] += usize::from((fused.value - v_star).abs() >= eps);
        }
    }
    for i in 0..thresholds.len() {
        let freq = hits[i] as f64 / TRIALS as f64;
        assert!(
            freq <= tails[i],
            "ε = {}: frequency {freq} > tail {}",
            thresholds[i],
            tails[i]
        );
    }
    // the bound is informative at the widest threshold
    assert!(tails[4] < 0.05);
}

#[test]
fn zero_spread_tail_depends_only_on_the_declared_bounds() {
    let f = fuse_estimates(&vec![(1.5, 0.1); 50]).unwrap();
    assert_eq!(f.value, 1.5);
    // below ε ≈ 0.02 the tail exceeds 1 despite zero spread
    assert!(f.tail_bound(0.05) < 1.0);
    assert!(f.tail_bound(0.001) > 1.0);
}
