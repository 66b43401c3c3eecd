//! Slowdown of an LLC-resident victim under each attack, per platform.

use cachedos::engine::solo_vs_corun;
use cachedos::presets;
use cachedos::workload::{WorkloadKind, WorkloadSpec};
use rayon::prelude::*;

fn main() -> anyhow::Result<()> {
    let platforms = [presets::xu4_a15(), presets::pi4_a72()];
    print!("{:<11}", "attack");
    for p in &platforms {
        print!("{:>12}", p.name);
    }
    println!();
    for kind in WorkloadKind::ALL {
        let row: Vec<f64> = platforms
            .par_iter()
            .map(|p| {
                let victim = WorkloadSpec::new(WorkloadKind::SeqRead, p.llc_victim);
                let attacker = WorkloadSpec::new(kind, p.attacker_ws).with_mlp(p.attacker_mlp);
                solo_vs_corun(&p.sim, &victim, &attacker, 3, 1).map(|r| r.slowdown)
            })
            .collect::<Result<_, _>>()?;
        print!("{:<11}", kind.to_string());
        for s in row {
            print!("{s:>12.2}");
        }
        println!();
    }
    Ok(())
}
