//! Shared-cache blocking: a full MSHR file rejects everyone, including cores
//! that would hit.

use cachedos::cachesim::{AccessResult, CacheConfig, CacheState, Requester};

mod common;
use common::blocking::victim_blocked;

fn req(core: usize) -> Requester {
    Requester { core, token: 0 }
}

#[test]
fn kplus1th_miss_is_blocked() {
    for k in 1..=12 {
        let mut c = CacheState::new(CacheConfig::new(64 << 10, 4, 64, k, 4, 5)).unwrap();
        // Make one line resident for the hit-only core.
        let AccessResult::MissAllocated { mshr } = c.access(req(1), 0, false, 0) else {
            panic!()
        };
        c.fill(mshr, 1).unwrap();
        for i in 0..k as u64 {
            assert!(!c.is_blocked());
            let r = c.access(req(0), (i + 1) * 64, false, 2);
            assert!(
                matches!(r, AccessResult::MissAllocated { .. }),
                "k={k} miss {i}: {r:?}"
            );
        }
        assert!(c.is_blocked());
        assert_eq!(c.access(req(0), 4096 * 64, false, 3), AccessResult::Blocked);
        // The resident line is not served either.
        assert_eq!(c.access(req(1), 0, false, 3), AccessResult::Blocked);
        c.check_invariants().unwrap();
    }
}

#[test]
fn hit_only_core_blocks_only_when_mshrs_fill() {
    let k = 4;
    let (victim, llc) = victim_blocked(k, k);
    assert!(victim > 0 && llc > 0, "victim {victim} llc {llc}");
    for chains in 1..k {
        assert_eq!(victim_blocked(k, chains), (0, 0), "{chains} chains");
    }
}
