//! Reference implementations shared by the test suites.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use cachedos::addrmap::{AddressMapping, DramCoord, DramGeometry};
use cachedos::cachesim::CacheConfig;
use cachedos::dramsim::{Dram, DramConfig, DramTiming, MemRequest, RequestKind};
use cachedos::engine::{build_programs, run, CoreConfig, SimConfig};
use cachedos::workload::{WorkloadKind, WorkloadSpec};

pub fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// Bit `i` of the bank index is address bit `bits[i]`.
pub fn naive_mask(bits: &[u32], addr: u64) -> u64 {
    let mut bank = 0;
    for (i, &b) in bits.iter().enumerate() {
        if addr & (1u64 << b) != 0 {
            bank += 1 << i;
        }
    }
    bank
}

pub mod fr_fcfs {
    use super::*;

    // One DRAM clock per CPU clock; hit, closed and conflict costs all differ.
    const HIT: u64 = 3;
    const CLOSED: u64 = 6;
    const CONFLICT: u64 = 8;

    fn config(window: usize) -> DramConfig {
        DramConfig {
            geometry: DramGeometry::new(2, 8192, 64).unwrap(),
            mapping: AddressMapping::from_bits(&[13]).unwrap(),
            timing: DramTiming {
                t_rcd: 3,
                t_rp: 2,
                t_cl: 2,
                t_burst: 1,
            },
            transfer_rate: 1600,
            cpu_freq_mhz: 800,
            scheduler_window: window,
        }
    }

    #[derive(Clone, Copy)]
    pub struct Req {
        pub bank: usize,
        pub row: u64,
        pub arrival: u64,
    }

    /// (id, start cycle) in start order.
    pub type Schedule = Vec<(usize, u64)>;

    pub fn run_model(trace: &[Req], window: usize) -> Schedule {
        let mut dram = Dram::new(config(window)).unwrap();
        let mut out = Vec::new();
        let mut cycle = 0;
        while out.len() < trace.len() || !dram.is_idle() {
            for (id, r) in trace.iter().enumerate().filter(|(_, r)| r.arrival == cycle) {
                let coord = DramCoord {
                    bank: r.bank as u64,
                    row: r.row,
                    col: 0,
                };
                dram.enqueue(
                    MemRequest {
                        id: id as u64,
                        kind: RequestKind::ReadFill,
                        coord,
                        arrival: 0,
                    },
                    cycle,
                )
                .unwrap();
            }
            dram.complete(cycle);
            if let Some(id) = dram.schedule(cycle) {
                out.push((id as usize, cycle));
            }
            cycle += 1;
            assert!(cycle < 10_000);
        }
        out
    }

    /// Direct reading of the rule: at each cycle, rows left open by requests
    /// that finished by now are visible; among the first `window` requests that
    /// arrived strictly earlier, those whose bank is free are candidates; the
    /// oldest candidate hitting its bank's open row starts, else the oldest
    /// candidate. One start per cycle.
    pub fn run_oracle(trace: &[Req], window: usize) -> Schedule {
        let mut started: Vec<Option<u64>> = vec![None; trace.len()];
        let mut done_at: Vec<u64> = vec![u64::MAX; trace.len()];
        let mut out = Vec::new();
        let mut t = 0;
        while out.len() < trace.len() {
            let open_row = |bank: usize| -> Option<u64> {
                (0..trace.len())
                    .filter(|&i| trace[i].bank == bank && done_at[i] <= t)
                    .max_by_key(|&i| done_at[i])
                    .map(|i| trace[i].row)
            };
            let bank_free = |bank: usize| {
                (0..trace.len())
                    .all(|i| trace[i].bank != bank || started[i].is_none() || done_at[i] <= t)
            };
            // Queue order is arrival order, ties by id.
            let mut waiting: Vec<usize> = (0..trace.len())
                .filter(|&i| started[i].is_none() && trace[i].arrival < t)
                .collect();
            waiting.sort_by_key(|&i| (trace[i].arrival, i));
            let candidates: Vec<usize> = waiting
                .into_iter()
                .take(window)
                .filter(|&i| bank_free(trace[i].bank))
                .collect();
            let hit = candidates
                .iter()
                .copied()
                .find(|&i| open_row(trace[i].bank) == Some(trace[i].row));
            if let Some(i) = hit.or(candidates.first().copied()) {
                let cost = match open_row(trace[i].bank) {
                    Some(r) if r == trace[i].row => HIT,
                    Some(_) => CONFLICT,
                    None => CLOSED,
                };
                started[i] = Some(t);
                done_at[i] = t + cost;
                out.push((i, t));
            }
            t += 1;
        }
        out
    }

    pub fn traces(len: usize) -> impl Iterator<Item = Vec<Req>> {
        // Each request picks a bank, a row and one of two arrival cycles.
        (0..8usize.pow(len as u32)).map(move |mut code| {
            (0..len)
                .map(|_| {
                    let d = code % 8;
                    code /= 8;
                    Req {
                        bank: d & 1,
                        row: ((d >> 1) & 1) as u64,
                        arrival: if d & 4 == 0 { 0 } else { 5 },
                    }
                })
                .collect()
        })
    }
}

pub mod blocking {
    use super::*;

    fn machine(llc_mshrs: usize) -> SimConfig {
        let mapping = AddressMapping::from_bits(&[13, 14, 15]).unwrap();
        SimConfig {
            cores: vec![CoreConfig::out_of_order(8); 2],
            l1: CacheConfig::new(4 << 10, 2, 64, 6, 4, 2),
            llc: CacheConfig::new(256 << 10, 8, 64, llc_mshrs, 8, 10),
            dram: DramConfig {
                geometry: DramGeometry::new(8, 2048, 64).unwrap(),
                mapping,
                timing: DramTiming::GENERIC,
                transfer_rate: 1600,
                cpu_freq_mhz: 1600,
                scheduler_window: 8,
            },
            seed: 0,
        }
    }

    /// Victim: L1 misses that all hit the LLC. Attacker: `chains` independent
    /// LLC-missing read chains.
    pub fn victim_blocked(llc_mshrs: usize, chains: usize) -> (u64, u64) {
        let sim = machine(llc_mshrs);
        let victim = WorkloadSpec::new(WorkloadKind::SeqRead, 32 << 10);
        let attacker = WorkloadSpec::new(WorkloadKind::PllRead, 2 << 20).with_mlp(chains);
        let m = run(
            &sim,
            &build_programs(&sim, &victim, &attacker, 1).unwrap(),
            2,
        )
        .unwrap();
        assert_eq!(m.victim().llc_misses, 0);
        assert!(m.victim().llc_hits > 0);
        (m.victim().blocked_cycles, m.llc.blocked_cycles)
    }
}
