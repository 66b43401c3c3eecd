use cachedos::workload::sattolo_cycle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn every_chain_is_one_cycle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let n = rng.gen_range(2..2000);
        let next = sattolo_cycle(n, &mut rng);
        let mut seen = vec![false; n];
        let mut at = 0;
        for _ in 0..n {
            assert!(!seen[at], "revisited {at} before covering all {n}");
            seen[at] = true;
            at = next[at];
        }
        assert_eq!(at, 0);
        assert!(seen.iter().all(|&s| s));
    }
}

#[test]
fn small_cycles_are_uniform() {
    // Sattolo yields each of the (n-1)! cyclic permutations equally often.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut counts = std::collections::HashMap::new();
    let trials = 60_000;
    for _ in 0..trials {
        *counts.entry(sattolo_cycle(4, &mut rng)).or_insert(0u32) += 1;
    }
    assert_eq!(counts.len(), 6);
    for (perm, c) in counts {
        let expect = trials as f64 / 6.0;
        assert!((c as f64 - expect).abs() < 0.05 * expect, "{perm:?}: {c}");
    }
}
