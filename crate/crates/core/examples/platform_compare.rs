//! BkPLLRead slowdown against attacker count on every preset.

use cachedos::engine::solo_vs_corun;
use cachedos::presets;
use cachedos::workload::{WorkloadKind, WorkloadSpec};
use rayon::prelude::*;

fn main() -> anyhow::Result<()> {
    for name in presets::NAMES {
        let p = presets::by_name(name).expect("known preset");
        let victim = WorkloadSpec::new(WorkloadKind::SeqRead, p.llc_victim);
        let attacker =
            WorkloadSpec::new(WorkloadKind::BkPllRead, p.attacker_ws).with_mlp(p.attacker_mlp);
        let s: Vec<f64> = (0..4)
            .into_par_iter()
            .map(|n| solo_vs_corun(&p.sim, &victim, &attacker, n, 1).map(|r| r.slowdown))
            .collect::<Result<_, _>>()?;
        println!(
            "{name:<12} LLC MSHRs {:>2}  n=0..3: {s:.2?}",
            p.sim.llc.num_mshrs
        );
    }
    Ok(())
}
