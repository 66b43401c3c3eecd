//! Cycle-level simulation of cache denial-of-service attacks on multicore
//! memory hierarchies: attack workload generation, DRAM bank mapping, a
//! non-blocking shared cache, an FR-FCFS DRAM model, and the engine that runs
//! victim and attacker programs against them.

pub mod addrmap;
pub mod cachesim;
pub mod cli;
pub mod config;
pub mod dramsim;
pub mod engine;
pub mod presets;
pub mod workload;
