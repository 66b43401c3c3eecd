//! Build each attack program and show where its accesses land.

use cachedos::presets;
use cachedos::workload::{bank_histogram, build_program, WorkloadKind, WorkloadSpec};

fn main() -> anyhow::Result<()> {
    let p = presets::xu4_a15();
    let (mapping, geom) = (&p.sim.dram.mapping, &p.sim.dram.geometry);
    for kind in WorkloadKind::ALL {
        let spec = WorkloadSpec::new(kind, 1 << 20)
            .with_mlp(p.attacker_mlp)
            .with_target_bank(3);
        let prog = build_program(&spec, mapping, geom)?;
        let hist = bank_histogram(&prog, mapping, geom);
        println!(
            "{:<11} chains {:>2} accesses {:>6} banks {:?}",
            kind.to_string(),
            prog.chain_count(),
            prog.len(),
            hist
        );
    }
    Ok(())
}
