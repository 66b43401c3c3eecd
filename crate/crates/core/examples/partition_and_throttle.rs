//! Way partitioning and bandwidth throttling against BkPLLWrite.

use cachedos::engine::{solo_vs_corun, SimConfig};
use cachedos::presets;
use cachedos::workload::{WorkloadKind, WorkloadSpec};

fn main() -> anyhow::Result<()> {
    let p = presets::xu4_a15();
    let victim = WorkloadSpec::new(WorkloadKind::SeqRead, p.llc_victim);
    let attacker =
        WorkloadSpec::new(WorkloadKind::BkPllWrite, p.attacker_ws).with_mlp(p.attacker_mlp);
    let report = |label: &str, sim: &SimConfig| -> anyhow::Result<()> {
        let r = solo_vs_corun(sim, &victim, &attacker, 3, 1)?;
        println!(
            "{label:<14} slowdown {:>6.2}  victim LLC misses {}",
            r.slowdown,
            r.corun.victim().llc_misses
        );
        Ok(())
    };

    report("baseline", &p.sim)?;
    let mut part = p.sim.clone();
    part.partition_llc_evenly();
    report("partitioned", &part)?;
    let mut inorder = p.sim.clone();
    for core in &mut inorder.cores[1..] {
        core.in_order = true;
    }
    report("in-order", &inorder)?;
    for budget in [1, 4] {
        let mut thr = p.sim.clone();
        for core in 1..4 {
            thr.apply_throttle(core, budget)?;
        }
        report(&format!("throttle {budget}"), &thr)?;
    }
    Ok(())
}
