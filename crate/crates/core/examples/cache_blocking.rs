//! Fill every MSHR of a small cache and watch a hit get rejected.

use cachedos::cachesim::{AccessResult, CacheConfig, CacheState, Requester};

fn main() -> anyhow::Result<()> {
    let mut llc = CacheState::new(CacheConfig::new(64 << 10, 4, 64, 2, 2, 10))?;
    let r = |core| Requester { core, token: 0 };

    let AccessResult::MissAllocated { mshr } = llc.access(r(1), 0x0, false, 0) else {
        unreachable!()
    };
    llc.fill(mshr, 20)?;
    println!("line 0x0 resident for core 1");

    for (cycle, addr) in [(21, 0x1000), (22, 0x2000)] {
        println!(
            "core 0 miss {addr:#x}: {:?}",
            llc.access(r(0), addr, false, cycle)
        );
    }
    println!("blocked: {}", llc.is_blocked());
    println!("core 1 hit 0x0: {:?}", llc.access(r(1), 0x0, false, 23));
    Ok(())
}
