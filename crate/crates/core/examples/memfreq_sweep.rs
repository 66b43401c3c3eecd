//! Slow the memory down and watch the bank-aware attack get worse.

use cachedos::engine::sweep_memfreq;
use cachedos::presets;
use cachedos::workload::{WorkloadKind, WorkloadSpec};

fn main() -> anyhow::Result<()> {
    let p = presets::pi3_lpddr2();
    let mut sim = p.sim.clone();
    sim.partition_llc_evenly();
    let victim = WorkloadSpec::new(WorkloadKind::SeqRead, p.llc_victim);
    let attacker =
        WorkloadSpec::new(WorkloadKind::BkPllWrite, p.attacker_ws).with_mlp(p.attacker_mlp);
    let rates = [1000, 800, 600, 400, 200, 100];
    for (rate, r) in sweep_memfreq(&sim, &victim, &attacker, 3, 1, &rates)? {
        println!("{rate:>5} MT/s  slowdown {:>7.2}", r.slowdown);
    }
    Ok(())
}
