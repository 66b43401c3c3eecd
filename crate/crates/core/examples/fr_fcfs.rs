//! Row hits overtake older conflicting requests under FR-FCFS.

use cachedos::addrmap::{AddressMapping, DramCoord, DramGeometry};
use cachedos::dramsim::{Dram, DramConfig, DramTiming, MemRequest, RequestKind};

fn run(window: usize) -> anyhow::Result<Vec<(u64, u64)>> {
    let config = DramConfig {
        geometry: DramGeometry::new(2, 2048, 64)?,
        mapping: AddressMapping::from_bits(&[13])?,
        timing: DramTiming {
            t_rcd: 3,
            t_rp: 3,
            t_cl: 3,
            t_burst: 4,
        },
        transfer_rate: 1600,
        cpu_freq_mhz: 800,
        scheduler_window: window,
    };
    let mut dram = Dram::new(config)?;
    for (id, row) in [0u64, 1, 0, 1, 0].into_iter().enumerate() {
        let coord = DramCoord {
            bank: 0,
            row,
            col: id as u64,
        };
        dram.enqueue(
            MemRequest {
                id: id as u64,
                kind: RequestKind::ReadFill,
                coord,
                arrival: 0,
            },
            0,
        )?;
    }
    let mut done = Vec::new();
    let mut cycle = 1;
    while !dram.is_idle() {
        done.extend(dram.complete(cycle).into_iter().map(|r| (r.id, cycle)));
        dram.schedule(cycle);
        cycle += 1;
    }
    Ok(done)
}

fn main() -> anyhow::Result<()> {
    for window in [1, 8] {
        println!("window {window}: (id, done) {:?}", run(window)?);
    }
    Ok(())
}
