//! Platform presets.
//!
//! Cache geometry, MSHR counts and bank bits follow the published platform
//! descriptions. DRAM timings for the LPDDR parts are not published and use
//! conventional values; only trends across presets are meaningful.

use crate::addrmap::{AddressMapping, DramGeometry};
use crate::cachesim::CacheConfig;
use crate::dramsim::{DramConfig, DramTiming};
use crate::engine::{CoreConfig, SimConfig};

pub const NAMES: [&str; 4] = ["xu4-a15", "pi4-a72", "boom-medium", "pi3-lpddr2"];

/// A platform plus the working-set sizes its experiments use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preset {
    pub name: &'static str,
    pub sim: SimConfig,
    /// Victim working set that fits in the LLC.
    pub llc_victim: u64,
    /// Victim working set that does not fit in the LLC.
    pub dram_victim: u64,
    /// Attacker working set (bytes of lines touched per lap).
    pub attacker_ws: u64,
    /// Chains per linked-list attacker.
    pub attacker_mlp: usize,
}

struct Params {
    cpu_mhz: u32,
    l1_mshrs: usize,
    llc_size: u64,
    llc_mshrs: usize,
    llc_wb: usize,
    llc_latency: u64,
    bank_bits: &'static [u32],
    row_size: u64,
    timing: DramTiming,
    transfer_rate: u32,
    window: usize,
}

fn build(name: &'static str, p: Params) -> Preset {
    let mapping = AddressMapping::from_bits(p.bank_bits).expect("valid preset bank bits");
    let geometry =
        DramGeometry::new(mapping.num_banks(), p.row_size, 64).expect("valid preset geometry");
    let sim = SimConfig {
        cores: vec![CoreConfig::out_of_order(p.window); 4],
        l1: CacheConfig::new(32 << 10, 2, 64, p.l1_mshrs, 4, 4),
        llc: CacheConfig::new(p.llc_size, 16, 64, p.llc_mshrs, p.llc_wb, p.llc_latency),
        dram: DramConfig {
            geometry,
            mapping,
            timing: p.timing,
            transfer_rate: p.transfer_rate,
            cpu_freq_mhz: p.cpu_mhz,
            scheduler_window: 8,
        },
        seed: 0,
    };
    Preset {
        name,
        llc_victim: p.llc_size / 8,
        dram_victim: p.llc_size * 2,
        attacker_ws: p.llc_size * 4,
        attacker_mlp: 6,
        sim,
    }
}

pub fn xu4_a15() -> Preset {
    build(
        "xu4-a15",
        Params {
            cpu_mhz: 2000,
            l1_mshrs: 6,
            llc_size: 2 << 20,
            llc_mshrs: 11,
            llc_wb: 8,
            llc_latency: 21,
            bank_bits: &[8, 13, 14, 15, 16],
            row_size: 2 << 10,
            timing: DramTiming::GENERIC,
            transfer_rate: 1866,
            window: 16,
        },
    )
}

pub fn pi4_a72() -> Preset {
    build(
        "pi4-a72",
        Params {
            cpu_mhz: 1500,
            l1_mshrs: 6,
            llc_size: 1 << 20,
            llc_mshrs: 19,
            llc_wb: 16,
            llc_latency: 21,
            bank_bits: &[11, 12, 13, 14],
            row_size: 2 << 10,
            timing: DramTiming {
                t_rcd: 29,
                t_rp: 29,
                t_cl: 28,
                t_burst: 8,
            },
            transfer_rate: 3200,
            window: 16,
        },
    )
}

pub fn boom_medium() -> Preset {
    build(
        "boom-medium",
        Params {
            cpu_mhz: 2130,
            l1_mshrs: 6,
            llc_size: 512 << 10,
            llc_mshrs: 11,
            llc_wb: 8,
            llc_latency: 14,
            bank_bits: &[13, 14, 15],
            row_size: 32 << 10,
            timing: DramTiming::GENERIC,
            transfer_rate: 2133,
            window: 16,
        },
    )
}

pub fn pi3_lpddr2() -> Preset {
    build(
        "pi3-lpddr2",
        Params {
            cpu_mhz: 1200,
            l1_mshrs: 4,
            llc_size: 512 << 10,
            llc_mshrs: 8,
            llc_wb: 8,
            llc_latency: 15,
            bank_bits: &[11, 12, 13],
            row_size: 2 << 10,
            timing: DramTiming {
                t_rcd: 8,
                t_rp: 8,
                t_cl: 7,
                t_burst: 4,
            },
            transfer_rate: 900,
            window: 8,
        },
    )
}

pub fn by_name(name: &str) -> Option<Preset> {
    match name {
        "xu4-a15" => Some(xu4_a15()),
        "pi4-a72" => Some(pi4_a72()),
        "boom-medium" => Some(boom_medium()),
        "pi3-lpddr2" => Some(pi3_lpddr2()),
        _ => None,
    }
}
