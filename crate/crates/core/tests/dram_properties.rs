//! Timing properties of the DRAM model, each checked against counts or
//! cycle numbers worked out by hand.

use cachedos::addrmap::{AddressMapping, DramCoord, DramGeometry};
use cachedos::dramsim::{Dram, DramConfig, DramTiming, MemRequest, RequestKind};

fn config(window: usize, rate: u32) -> DramConfig {
    DramConfig {
        geometry: DramGeometry::new(2, 8192, 64).unwrap(),
        mapping: AddressMapping::from_bits(&[13]).unwrap(),
        timing: DramTiming::GENERIC,
        transfer_rate: rate,
        cpu_freq_mhz: 1600,
        scheduler_window: window,
    }
}

/// Enqueue everything at cycle 0 and run to completion. Returns completion
/// cycles by id and the final DRAM.
fn drain(cfg: DramConfig, reqs: &[(u64, u64)]) -> (Vec<u64>, Dram) {
    let mut dram = Dram::new(cfg).unwrap();
    for (id, &(bank, row)) in reqs.iter().enumerate() {
        let coord = DramCoord { bank, row, col: 0 };
        dram.enqueue(
            MemRequest {
                id: id as u64,
                kind: RequestKind::ReadFill,
                coord,
                arrival: 0,
            },
            0,
        )
        .unwrap();
    }
    let mut done = vec![0; reqs.len()];
    let mut cycle = 0;
    while !dram.is_idle() {
        for r in dram.complete(cycle) {
            done[r.id as usize] = cycle;
        }
        dram.schedule(cycle);
        cycle += 1;
    }
    (done, dram)
}

// At 1600 MT/s and 1600 MHz one DRAM cycle is two CPU cycles.
const CLOSED: u64 = 2 * (14 + 14 + 4);
const CONFLICT: u64 = 2 * (14 + 14 + 14 + 4);
const HIT: u64 = 2 * (14 + 4);

#[test]
fn banks_overlap_rows_serialize() {
    // Different banks: starts at cycles 1 and 2, both closed-row.
    let (done, _) = drain(config(8, 1600), &[(0, 0), (1, 0)]);
    assert_eq!(done, vec![1 + CLOSED, 2 + CLOSED]);
    // Same bank, different rows: the second waits for the first, then pays a
    // conflict.
    let (done, _) = drain(config(8, 1600), &[(0, 0), (0, 1)]);
    assert_eq!(done, vec![1 + CLOSED, 1 + CLOSED + CONFLICT]);
}

#[test]
fn alternating_rows_conflict_every_time_in_order() {
    let n = 10;
    let reqs: Vec<(u64, u64)> = (0..n).map(|i| (0, i % 2)).collect();
    // Window 1 is plain FCFS: one closed access, then n-1 conflicts.
    let (_, d) = drain(config(1, 1600), &reqs);
    assert_eq!(
        (
            d.counters.row_closed,
            d.counters.row_conflicts,
            d.counters.row_hits
        ),
        (1, n - 1, 0)
    );
    // A wide window batches each row: row 0 five times, then row 1 five times.
    let (done, d) = drain(config(16, 1600), &reqs);
    assert_eq!(
        (
            d.counters.row_closed,
            d.counters.row_conflicts,
            d.counters.row_hits
        ),
        (1, 1, n - 2)
    );
    assert_eq!(
        *done.iter().max().unwrap(),
        1 + CLOSED + 4 * HIT + CONFLICT + 4 * HIT
    );
}

#[test]
fn faster_memory_never_finishes_later() {
    let reqs: Vec<(u64, u64)> = (0..24).map(|i| ((i * 7) % 2, (i * 5) % 3)).collect();
    let mut last = u64::MAX;
    for rate in (1..=32).map(|r| r * 100) {
        let (done, _) = drain(config(8, rate), &reqs);
        let end = *done.iter().max().unwrap();
        assert!(
            end <= last,
            "{rate} MT/s finished at {end}, slower rate at {last}"
        );
        last = end;
    }
}
