//! Command-line front end. The binary only calls [`main`]; everything else is
//! here so tests can drive commands without spawning processes.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::addrmap::{coord_of, AddrError, MappingFile, PhysAddr};
use crate::config::{format_size, RunConfig};
use crate::engine::{solo_vs_corun, ExperimentResult};
use crate::presets;
use crate::workload::{bank_histogram, build_program, WorkloadKind, WorkloadSpec};

pub const CSV_HEADER: &str = "preset,victim,attacker,n_attackers,mem_mts,partitioned,throttle,solo_cycles_per_iter,corun_cycles_per_iter,slowdown,victim_blocked_cycles,dram_row_hits,dram_row_conflicts,seed";

/// Transfer rates of the memory-frequency sweep, fastest first.
pub fn memfreq_rates() -> Vec<u32> {
    (1..=10).rev().map(|r| r * 100).collect()
}

#[derive(Parser, Debug)]
#[command(
    name = "cachedos",
    version,
    about = "Shared-cache denial-of-service simulator"
)]
pub struct Cli {
    /// Use a built-in platform instead of the config's [sim] section.
    #[arg(long, global = true, value_parser = clap::builder::PossibleValuesParser::new(presets::NAMES))]
    pub preset: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the configured experiment and print one CSV row.
    Run {
        #[arg(short = 'c', long = "config")]
        config: PathBuf,
    },
    /// Vary one parameter of the configured experiment.
    Sweep {
        #[arg(short = 'c', long = "config")]
        config: PathBuf,
        #[arg(long, value_enum)]
        axis: Axis,
    },
    /// Decode addresses or audit a workload's bank placement.
    Mapinspect {
        #[arg(short = 'm', long = "map")]
        map: PathBuf,
        #[arg(long = "addr", value_parser = parse_addr, conflicts_with = "config")]
        addr: Vec<u64>,
        #[arg(short = 'c', long = "config")]
        config: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Attackers,
    Memfreq,
    AttackerKind,
}

fn parse_addr(s: &str) -> Result<u64, String> {
    let t = s.trim();
    match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    }
    .map_err(|_| format!("invalid address `{s}`"))
}

/// One output row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub preset: String,
    pub victim: WorkloadKind,
    pub attacker: WorkloadKind,
    pub n_attackers: usize,
    pub mem_mts: u32,
    pub partitioned: bool,
    pub throttle: Option<u32>,
    pub solo_cycles_per_iter: f64,
    pub corun_cycles_per_iter: f64,
    pub slowdown: f64,
    pub victim_blocked_cycles: u64,
    pub dram_row_hits: u64,
    pub dram_row_conflicts: u64,
    pub seed: u64,
}

impl CsvRow {
    pub fn new(cfg: &RunConfig, r: &ExperimentResult) -> Self {
        Self {
            preset: cfg.name.clone(),
            victim: cfg.victim.kind,
            attacker: cfg.attacker.kind,
            n_attackers: cfg.experiment.n_attackers,
            mem_mts: cfg.sim.dram.transfer_rate,
            partitioned: cfg.experiment.partition,
            throttle: cfg.experiment.throttle,
            solo_cycles_per_iter: r.solo_cycles_per_iter,
            corun_cycles_per_iter: r.corun_cycles_per_iter,
            slowdown: r.slowdown,
            victim_blocked_cycles: r.corun.victim().blocked_cycles,
            dram_row_hits: r.corun.dram.row_hits,
            dram_row_conflicts: r.corun.dram.row_conflicts,
            seed: cfg.experiment.seed,
        }
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.2},{:.2},{:.4},{},{},{},{}",
            self.preset,
            self.victim,
            self.attacker,
            self.n_attackers,
            self.mem_mts,
            if self.partitioned { "on" } else { "off" },
            self.throttle.map_or("none".to_string(), |b| b.to_string()),
            self.solo_cycles_per_iter,
            self.corun_cycles_per_iter,
            self.slowdown,
            self.victim_blocked_cycles,
            self.dram_row_hits,
            self.dram_row_conflicts,
            self.seed
        )
    }
}

pub fn to_csv(rows: &[CsvRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

pub fn run_experiment(cfg: &RunConfig) -> Result<CsvRow> {
    let sim = cfg.effective_sim()?;
    let r = solo_vs_corun(
        &sim,
        &cfg.victim,
        &cfg.attacker,
        cfg.experiment.n_attackers,
        cfg.experiment.laps,
    )?;
    Ok(CsvRow::new(cfg, &r))
}

/// The configs a sweep runs, in output order.
pub fn sweep_configs(cfg: &RunConfig, axis: Axis) -> Result<Vec<RunConfig>> {
    let mut out = Vec::new();
    match axis {
        Axis::Attackers => {
            for n in 0..cfg.sim.cores.len() {
                let mut c = cfg.clone();
                c.experiment.n_attackers = n;
                out.push(c);
            }
        }
        Axis::Memfreq => {
            for rate in memfreq_rates() {
                let mut c = cfg.clone();
                c.sim = cfg.sim.with_transfer_rate(rate)?;
                out.push(c);
            }
        }
        Axis::AttackerKind => {
            for kind in WorkloadKind::ALL {
                let mut c = cfg.clone();
                c.attacker = WorkloadSpec {
                    kind,
                    target_bank: kind
                        .is_bank_aware()
                        .then(|| cfg.attacker.target_bank.unwrap_or(0)),
                    ..cfg.attacker.clone()
                };
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// Run every sweep point; rows keep sweep order whatever the execution order.
pub fn run_sweep(cfg: &RunConfig, axis: Axis) -> Result<Vec<CsvRow>> {
    sweep_configs(cfg, axis)?
        .par_iter()
        .map(run_experiment)
        .collect()
}

fn load_config(path: &PathBuf, preset: Option<&str>) -> Result<RunConfig> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg: RunConfig = text
        .parse()
        .with_context(|| format!("{}", path.display()))?;
    Ok(match preset {
        Some(name) => cfg.with_preset(&presets::by_name(name).context("unknown preset")?),
        None => cfg,
    })
}

/// Report for `mapinspect --addr`.
pub fn inspect_addrs(map: &MappingFile, addrs: &[u64]) -> Result<String> {
    let mut s = String::new();
    for &a in addrs {
        let c = coord_of(&map.geometry, &map.mapping, PhysAddr::new(a)?)?;
        writeln!(s, "{a:#x}: bank {} row {} col {}", c.bank, c.row, c.col)?;
    }
    Ok(s)
}

/// Report for `mapinspect -c`: bank histogram of the victim and attacker
/// programs, with a purity verdict for bank-aware kinds. The flag is false if
/// any verdict failed or a program could not be built.
pub fn inspect_workloads(map: &MappingFile, cfg: &RunConfig) -> (String, bool) {
    let mut s = String::new();
    let mut ok = true;
    for (role, spec) in [("victim", &cfg.victim), ("attacker", &cfg.attacker)] {
        let _ = writeln!(
            s,
            "[{role}] {} working_set {} mlp {}",
            spec.kind,
            format_size(spec.working_set),
            spec.mlp
        );
        let program = match build_program(spec, &map.mapping, &map.geometry) {
            Ok(p) => p,
            Err(e) => {
                ok = false;
                let _ = writeln!(s, "{e}");
                if matches!(
                    e,
                    crate::workload::WorkloadError::Addr(AddrError::BankBitsNotControllable { .. })
                ) {
                    let _ = writeln!(s, "purity: FAIL (bank bits outside the 2 MiB hugepage)");
                }
                continue;
            }
        };
        let hist = bank_histogram(&program, &map.mapping, &map.geometry);
        let total: u64 = hist.iter().sum();
        for (bank, n) in hist.iter().enumerate() {
            let _ = writeln!(
                s,
                "bank {bank:>3}: {n:>8} {:6.2}%",
                100.0 * *n as f64 / total.max(1) as f64
            );
        }
        if let Some(target) = spec.target_bank.filter(|_| spec.kind.is_bank_aware()) {
            let hits = hist.get(target as usize).copied().unwrap_or(0);
            if hits == total {
                let _ = writeln!(s, "purity: PASS 100%");
            } else {
                ok = false;
                let _ = writeln!(
                    s,
                    "purity: FAIL {:.2}%",
                    100.0 * hits as f64 / total.max(1) as f64
                );
            }
        }
    }
    (s, ok)
}

fn dispatch(cli: Cli) -> Result<bool> {
    let preset = cli.preset.as_deref();
    match cli.command {
        Command::Run { config } => {
            let cfg = load_config(&config, preset)?;
            print!("{}", to_csv(&[run_experiment(&cfg)?]));
        }
        Command::Sweep { config, axis } => {
            let cfg = load_config(&config, preset)?;
            print!("{}", to_csv(&run_sweep(&cfg, axis)?));
        }
        Command::Mapinspect { map, addr, config } => {
            let text = std::fs::read_to_string(&map)
                .with_context(|| format!("reading {}", map.display()))?;
            let mf: MappingFile = text.parse().with_context(|| format!("{}", map.display()))?;
            mf.geometry.validate(&mf.mapping)?;
            println!(
                "mapping: {} ({} banks, row {} B, line {} B)",
                mf.mapping, mf.geometry.num_banks, mf.geometry.row_size, mf.geometry.line_size
            );
            match config {
                Some(path) => {
                    let (report, ok) = inspect_workloads(&mf, &load_config(&path, preset)?);
                    print!("{report}");
                    return Ok(ok);
                }
                None if addr.is_empty() => bail!("mapinspect needs --addr or -c"),
                None => print!("{}", inspect_addrs(&mf, &addr)?),
            }
        }
    }
    Ok(true)
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
