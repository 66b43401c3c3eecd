use cachedos::addrmap::{AddressMapping, DramGeometry};
use cachedos::cachesim::{AccessResult, CacheConfig, CacheState, FillOutcome, Requester};
use cachedos::dramsim::{DramConfig, DramTiming};
use cachedos::engine::{
    build_programs, run_with, solo_vs_corun, CoreConfig, RunOptions, SimConfig,
};
use cachedos::workload::{WorkloadKind, WorkloadSpec};
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Op {
    Access { core: usize, line: u64, write: bool },
    Fill(usize),
    Drain,
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        4 => (0..3usize, 0..48u64, any::<bool>()).prop_map(|(core, line, write)| Op::Access { core, line, write }),
        3 => (0..8usize).prop_map(Op::Fill),
        1 => Just(Op::Drain),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cache_invariants_hold(mshrs in 1..6usize, wb in 1..4usize, ops in prop::collection::vec(op(), 1..300)) {
        // 4 sets x 4 ways; core 0 owns ways 0-1, cores 1-2 share ways 2-3.
        let mut c = CacheState::new(CacheConfig::new(1024, 4, 64, mshrs, wb, 2)).unwrap();
        c.set_partition(0, 0b0011).unwrap();
        c.set_partition(1, 0b0100).unwrap();
        c.set_partition(2, 0b1000).unwrap();
        let mut owner = std::collections::HashMap::new();
        for (cycle, op) in ops.into_iter().enumerate() {
            let cycle = cycle as u64;
            match op {
                Op::Access { core, line, write } => {
                    let before = c.clone();
                    let addr = line * 64;
                    let r = c.access(Requester { core, token: 0 }, addr, write, cycle);
                    if before.is_blocked() {
                        prop_assert_eq!(r, AccessResult::Blocked);
                        prop_assert_eq!(before.live_mshrs(), c.live_mshrs());
                        prop_assert_eq!(before.contains(addr), c.contains(addr));
                    }
                    if let AccessResult::MissAllocated { .. } = r {
                        owner.insert(addr, core);
                    }
                }
                Op::Fill(id) => {
                    if let Some(m) = c.mshr(id).cloned() {
                        if let FillOutcome::Installed { line, .. } = c.fill(id, cycle).unwrap() {
                            let way = c.way_of(line).unwrap();
                            // Fills land in the allocating core's ways.
                            let allowed = if m.owner == 0 { 0b0011 } else if m.owner == 1 { 0b0100 } else { 0b1000 };
                            prop_assert!(allowed & (1 << way) != 0, "core {} filled way {}", m.owner, way);
                        }
                    }
                }
                Op::Drain => {
                    c.wb_drain_policy(cycle);
                }
            }
            prop_assert!(c.check_invariants().is_ok(), "{:?}", c.check_invariants());
            prop_assert!(c.live_mshrs() <= mshrs && c.wb_occupancy() <= wb);
        }
    }
}

fn machine(window: usize, l1_mshrs: usize, llc_mshrs: usize, wb: usize, cores: usize) -> SimConfig {
    SimConfig {
        cores: vec![CoreConfig::out_of_order(window); cores],
        l1: CacheConfig::new(2 << 10, 2, 64, l1_mshrs, 2, 2),
        llc: CacheConfig::new(32 << 10, 8, 64, llc_mshrs, wb, 6),
        dram: DramConfig {
            geometry: DramGeometry::new(4, 1024, 64).unwrap(),
            mapping: AddressMapping::from_bits(&[10, 11]).unwrap(),
            timing: DramTiming::GENERIC,
            transfer_rate: 1600,
            cpu_freq_mhz: 1600,
            scheduler_window: 4,
        },
        seed: 0,
    }
}

fn kind() -> impl Strategy<Value = WorkloadKind> {
    prop::sample::select(WorkloadKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn engine_conserves_and_repeats(
        window in 1..10usize, l1_mshrs in 1..5usize, llc_mshrs in 4..10usize, wb in 1..4usize,
        vk in kind(), ak in kind(), n in 0..3usize, mlp in 1..5usize, in_order in any::<bool>(), throttle in prop::option::of(1..40u32),
    ) {
        let mut sim = machine(window, l1_mshrs, llc_mshrs, wb, 3);
        for c in 1..3 {
            sim.cores[c].in_order = in_order;
            if let Some(t) = throttle {
                sim.apply_throttle(c, t).unwrap();
            }
        }
        let victim = WorkloadSpec::new(vk, 8 << 10).with_mlp(2);
        let attacker = WorkloadSpec::new(ak, 64 << 10).with_mlp(mlp);
        let programs = build_programs(&sim, &victim, &attacker, n).unwrap();
        let a = run_with(&sim, &programs, 2, RunOptions { fast_forward: true }).unwrap();
        let b = run_with(&sim, &programs, 2, RunOptions { fast_forward: false }).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.totals.issued, a.totals.completed);
        prop_assert_eq!(a.totals.dram_writes, a.totals.llc_writebacks);
        prop_assert_eq!(a.totals.dram_reads, a.totals.llc_mshr_allocations);
        prop_assert_eq!(a.victim_iterations, 2);
        for c in &a.cores {
            prop_assert!(c.blocked_cycles <= a.total_cycles);
        }
        prop_assert_eq!(a.bank_accesses.iter().sum::<u64>(), a.dram.started);
    }

    #[test]
    fn partitioned_victim_misses_like_solo(ak in kind(), n in 1..3usize, mlp in 1..5usize) {
        let mut sim = machine(8, 4, 8, 2, 3);
        sim.partition_llc_evenly();
        // A single chain larger than the victim's ways: it misses every lap,
        // in the same order solo and co-run.
        let victim = WorkloadSpec::new(WorkloadKind::PllRead, 16 << 10);
        let attacker = WorkloadSpec::new(ak, 64 << 10).with_mlp(mlp);
        let r = solo_vs_corun(&sim, &victim, &attacker, n, 2).unwrap();
        prop_assert!(r.solo.victim().llc_misses > 0);
        prop_assert_eq!(r.solo.victim().llc_misses, r.corun.victim().llc_misses);
    }
}
