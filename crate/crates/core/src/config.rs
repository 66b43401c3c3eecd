//! Run configuration files and size parsing.
//!
//! A run config is an INI file with four sections:
//!
//! ```text
//! [sim]
//! preset = xu4-a15        # or every inline key below
//! mem_mts = 1866          # inline keys override the preset
//!
//! [victim]
//! kind = BwRead
//! working_set = 256KiB
//!
//! [attacker]
//! kind = BkPLLWrite
//! working_set = 8MiB
//! mlp = 6
//!
//! [experiment]
//! n_attackers = 3
//! laps = 1
//! partition = off
//! throttle = none
//! attacker_order = ooo
//! seed = 0
//! ```
//!
//! Unknown sections and keys are rejected; every error names its line.

use std::fmt::Write as _;

use thiserror::Error;

use crate::addrmap::{AddressMapping, DramGeometry};
use crate::cachesim::CacheConfig;
use crate::dramsim::{DramConfig, DramTiming};
use crate::engine::{CoreConfig, SimConfig};
use crate::presets;
use crate::workload::{WorkloadKind, WorkloadSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SizeError {
    #[error("empty size")]
    Empty,
    #[error("invalid size `{0}`")]
    Invalid(String),
    #[error("size `{0}` overflows")]
    Overflow(String),
}

/// Parse `4096`, `0x1000`, `4KiB`, `2 MiB`, `1GiB`. `K`, `KB`, `M`, `MB`
/// are accepted as binary multiples too.
pub fn parse_size(text: &str) -> Result<u64, SizeError> {
    let t = text.trim();
    if t.is_empty() {
        return Err(SizeError::Empty);
    }
    if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        return u64::from_str_radix(hex, 16).map_err(|_| SizeError::Invalid(t.into()));
    }
    let split = t.find(|c: char| !c.is_ascii_digit()).unwrap_or(t.len());
    let (digits, suffix) = t.split_at(split);
    let n: u64 = digits.parse().map_err(|_| SizeError::Invalid(t.into()))?;
    let shift = match suffix.trim().to_ascii_lowercase().as_str() {
        "" | "b" => 0,
        "k" | "kb" | "kib" => 10,
        "m" | "mb" | "mib" => 20,
        "g" | "gb" | "gib" => 30,
        _ => return Err(SizeError::Invalid(t.into())),
    };
    n.checked_mul(1 << shift)
        .ok_or_else(|| SizeError::Overflow(t.into()))
}

/// Inverse of [`parse_size`] using the largest exact binary suffix.
pub fn format_size(bytes: u64) -> String {
    for (shift, suffix) in [(30, "GiB"), (20, "MiB"), (10, "KiB")] {
        if bytes != 0 && bytes.is_multiple_of(1 << shift) {
            return format!("{}{}", bytes >> shift, suffix);
        }
    }
    bytes.to_string()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct ConfigError {
    pub line: usize,
    pub msg: String,
}

fn cerr(line: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        msg: msg.into(),
    }
}

/// How the experiment uses the simulated machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Experiment {
    pub n_attackers: usize,
    /// Measured victim laps.
    pub laps: u64,
    /// Give every core a disjoint, equal share of LLC ways.
    pub partition: bool,
    /// LLC-bound accesses per 1000 cycles for each attacker core.
    pub throttle: Option<u32>,
    pub in_order_attackers: bool,
    pub seed: u64,
}

impl Default for Experiment {
    fn default() -> Self {
        Self {
            n_attackers: 3,
            laps: 1,
            partition: false,
            throttle: None,
            in_order_attackers: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    /// Label for output rows: the preset name, or `custom`.
    pub name: String,
    /// Machine before experiment settings are applied.
    pub sim: SimConfig,
    pub victim: WorkloadSpec,
    pub attacker: WorkloadSpec,
    pub experiment: Experiment,
}

impl RunConfig {
    /// Defaults for a preset: LLC-fitting BwRead victim, three BkPLLWrite
    /// attackers.
    pub fn for_preset(p: &presets::Preset) -> Self {
        Self {
            name: p.name.to_string(),
            sim: p.sim.clone(),
            victim: WorkloadSpec::new(WorkloadKind::SeqRead, p.llc_victim),
            attacker: WorkloadSpec::new(WorkloadKind::BkPllWrite, p.attacker_ws)
                .with_mlp(p.attacker_mlp),
            experiment: Experiment {
                n_attackers: p.sim.cores.len() - 1,
                ..Experiment::default()
            },
        }
    }

    /// Replace the machine with a preset, keeping workloads and experiment.
    pub fn with_preset(mut self, p: &presets::Preset) -> Self {
        self.name = p.name.to_string();
        self.sim = p.sim.clone();
        self
    }

    /// The machine with partitioning, throttling, issue order and seed
    /// applied.
    pub fn effective_sim(&self) -> Result<SimConfig, crate::engine::EngineError> {
        let mut sim = self.sim.clone();
        sim.seed = self.experiment.seed;
        if self.experiment.partition {
            sim.partition_llc_evenly();
        }
        for core in 1..sim.cores.len() {
            if let Some(budget) = self.experiment.throttle {
                sim.apply_throttle(core, budget)?;
            }
            sim.cores[core].in_order = self.experiment.in_order_attackers;
        }
        sim.validate()?;
        Ok(sim)
    }

    /// Serialize with every `[sim]` key inline, so the text does not depend
    /// on the preset table.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let sim = &self.sim;
        let core = sim.cores[0];
        let bits = sim.dram.mapping.as_mask().map(|m| {
            m.bits()
                .iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join(",")
        });
        let t = sim.dram.timing;
        let _ = writeln!(s, "[sim]");
        let _ = writeln!(s, "name = {}", self.name);
        let _ = writeln!(s, "cores = {}", sim.cores.len());
        let _ = writeln!(s, "window = {}", core.window);
        let _ = writeln!(s, "cpu_mhz = {}", sim.dram.cpu_freq_mhz);
        for (prefix, c) in [("l1", &sim.l1), ("llc", &sim.llc)] {
            let _ = writeln!(s, "{prefix}_size = {}", format_size(c.size()));
            let _ = writeln!(s, "{prefix}_ways = {}", c.ways);
            let _ = writeln!(s, "{prefix}_mshrs = {}", c.num_mshrs);
            let _ = writeln!(s, "{prefix}_wb = {}", c.wb_entries);
            let _ = writeln!(s, "{prefix}_latency = {}", c.hit_latency);
        }
        let _ = writeln!(s, "line_size = {}", sim.l1.line_size);
        if let Some(bits) = bits {
            let _ = writeln!(s, "bank_bits = {bits}");
        }
        let _ = writeln!(s, "row_size = {}", format_size(sim.dram.geometry.row_size));
        let _ = writeln!(
            s,
            "timing = {}/{}/{}/{}",
            t.t_rcd, t.t_rp, t.t_cl, t.t_burst
        );
        let _ = writeln!(s, "mem_mts = {}", sim.dram.transfer_rate);
        let _ = writeln!(s, "scheduler_window = {}", sim.dram.scheduler_window);
        for (section, w) in [("victim", &self.victim), ("attacker", &self.attacker)] {
            let _ = writeln!(s, "\n[{section}]");
            let _ = writeln!(s, "kind = {}", w.kind);
            let _ = writeln!(s, "working_set = {}", format_size(w.working_set));
            let _ = writeln!(s, "mlp = {}", w.mlp);
            if let Some(b) = w.target_bank {
                let _ = writeln!(s, "target_bank = {b}");
            }
            let _ = writeln!(s, "seed = {}", w.seed);
        }
        let e = &self.experiment;
        let _ = writeln!(s, "\n[experiment]");
        let _ = writeln!(s, "n_attackers = {}", e.n_attackers);
        let _ = writeln!(s, "laps = {}", e.laps);
        let _ = writeln!(s, "partition = {}", if e.partition { "on" } else { "off" });
        let _ = writeln!(
            s,
            "throttle = {}",
            e.throttle.map_or("none".to_string(), |b| b.to_string())
        );
        let _ = writeln!(
            s,
            "attacker_order = {}",
            if e.in_order_attackers {
                "in-order"
            } else {
                "ooo"
            }
        );
        let _ = writeln!(s, "seed = {}", e.seed);
        s
    }
}

const SIM_KEYS: [&str; 21] = [
    "name",
    "cores",
    "window",
    "cpu_mhz",
    "l1_size",
    "l1_ways",
    "l1_mshrs",
    "l1_wb",
    "l1_latency",
    "llc_size",
    "llc_ways",
    "llc_mshrs",
    "llc_wb",
    "llc_latency",
    "line_size",
    "bank_bits",
    "row_size",
    "timing",
    "mem_mts",
    "scheduler_window",
    "preset",
];
const WORKLOAD_KEYS: [&str; 5] = ["kind", "working_set", "mlp", "target_bank", "seed"];
const EXPERIMENT_KEYS: [&str; 6] = [
    "n_attackers",
    "laps",
    "partition",
    "throttle",
    "attacker_order",
    "seed",
];

#[derive(Debug)]
struct Entry {
    line: usize,
    key: String,
    value: String,
}

#[derive(Debug, Default)]
struct Sections {
    sim: Vec<Entry>,
    victim: Vec<Entry>,
    attacker: Vec<Entry>,
    experiment: Vec<Entry>,
    attacker_line: Option<usize>,
    sim_line: usize,
}

fn split_sections(text: &str) -> Result<Sections, ConfigError> {
    let mut out = Sections::default();
    let mut current: Option<&'static str> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split(['#', ';']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| cerr(line, "unterminated section header"))?
                .trim();
            current = Some(match name {
                "sim" => {
                    out.sim_line = line;
                    "sim"
                }
                "victim" => "victim",
                "attacker" => {
                    out.attacker_line = Some(line);
                    "attacker"
                }
                "experiment" => "experiment",
                other => return Err(cerr(line, format!("unknown section `[{other}]`"))),
            });
            continue;
        }
        let section = current.ok_or_else(|| cerr(line, "key outside of any section"))?;
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| cerr(line, "expected `key = value`"))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let (allowed, list): (&[&str], &mut Vec<Entry>) = match section {
            "sim" => (&SIM_KEYS, &mut out.sim),
            "victim" => (&WORKLOAD_KEYS, &mut out.victim),
            "attacker" => (&WORKLOAD_KEYS, &mut out.attacker),
            _ => (&EXPERIMENT_KEYS, &mut out.experiment),
        };
        if !allowed.contains(&key.as_str()) {
            return Err(cerr(line, format!("unknown key `{key}` in [{section}]")));
        }
        if list.iter().any(|e| e.key == key) {
            return Err(cerr(line, format!("duplicate key `{key}` in [{section}]")));
        }
        list.push(Entry { line, key, value });
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(e: &Entry) -> Result<T, ConfigError> {
    e.value
        .parse()
        .map_err(|_| cerr(e.line, format!("`{}`: invalid number `{}`", e.key, e.value)))
}

fn size(e: &Entry) -> Result<u64, ConfigError> {
    parse_size(&e.value).map_err(|err| cerr(e.line, format!("`{}`: {err}", e.key)))
}

fn flag(e: &Entry, yes: &[&str], no: &[&str]) -> Result<bool, ConfigError> {
    let v = e.value.to_ascii_lowercase();
    if yes.contains(&v.as_str()) {
        Ok(true)
    } else if no.contains(&v.as_str()) {
        Ok(false)
    } else {
        Err(cerr(
            e.line,
            format!("`{}`: expected one of {:?} or {:?}", e.key, yes, no),
        ))
    }
}

/// Inline machine description; every field must be set unless a preset
/// supplied it.
#[derive(Default)]
struct SimDraft {
    cores: Option<usize>,
    window: Option<usize>,
    cpu_mhz: Option<u32>,
    l1: [Option<u64>; 5],
    llc: [Option<u64>; 5],
    line_size: Option<u64>,
    bank_bits: Option<Vec<u32>>,
    row_size: Option<u64>,
    timing: Option<DramTiming>,
    mem_mts: Option<u32>,
    scheduler_window: Option<usize>,
}

impl SimDraft {
    fn from_sim(sim: &SimConfig) -> Self {
        let cache = |c: &CacheConfig| {
            [
                Some(c.size()),
                Some(c.ways as u64),
                Some(c.num_mshrs as u64),
                Some(c.wb_entries as u64),
                Some(c.hit_latency),
            ]
        };
        Self {
            cores: Some(sim.cores.len()),
            window: Some(sim.cores[0].window),
            cpu_mhz: Some(sim.dram.cpu_freq_mhz),
            l1: cache(&sim.l1),
            llc: cache(&sim.llc),
            line_size: Some(sim.l1.line_size),
            bank_bits: sim.dram.mapping.as_mask().map(|m| m.bits().to_vec()),
            row_size: Some(sim.dram.geometry.row_size),
            timing: Some(sim.dram.timing),
            mem_mts: Some(sim.dram.transfer_rate),
            scheduler_window: Some(sim.dram.scheduler_window),
        }
    }

    fn apply(&mut self, e: &Entry) -> Result<(), ConfigError> {
        const FIELDS: [&str; 5] = ["size", "ways", "mshrs", "wb", "latency"];
        let key = e.key.as_str();
        for (prefix, slot) in [("llc_", &mut self.llc), ("l1_", &mut self.l1)] {
            if let Some(field) = key.strip_prefix(prefix) {
                let i = FIELDS
                    .iter()
                    .position(|f| *f == field)
                    .expect("key list matches fields");
                slot[i] = Some(if field == "size" { size(e)? } else { num(e)? });
                return Ok(());
            }
        }
        match key {
            "cores" => self.cores = Some(num(e)?),
            "window" => self.window = Some(num(e)?),
            "cpu_mhz" => self.cpu_mhz = Some(num(e)?),
            "line_size" => self.line_size = Some(size(e)?),
            "row_size" => self.row_size = Some(size(e)?),
            "mem_mts" => self.mem_mts = Some(num(e)?),
            "scheduler_window" => self.scheduler_window = Some(num(e)?),
            "bank_bits" => {
                let bits: Result<Vec<u32>, _> =
                    e.value.split(',').map(|b| b.trim().parse()).collect();
                self.bank_bits = Some(bits.map_err(|_| {
                    cerr(
                        e.line,
                        format!(
                            "`bank_bits`: expected comma-separated bit positions, got `{}`",
                            e.value
                        ),
                    )
                })?);
            }
            "timing" => {
                let parts: Result<Vec<u32>, _> =
                    e.value.split('/').map(|p| p.trim().parse()).collect();
                match parts.as_deref() {
                    Ok([rcd, rp, cl, burst]) => {
                        self.timing = Some(DramTiming {
                            t_rcd: *rcd,
                            t_rp: *rp,
                            t_cl: *cl,
                            t_burst: *burst,
                        })
                    }
                    _ => {
                        return Err(cerr(
                            e.line,
                            format!("`timing`: expected tRCD/tRP/tCL/tBURST, got `{}`", e.value),
                        ))
                    }
                }
            }
            _ => unreachable!("key checked against SIM_KEYS"),
        }
        Ok(())
    }

    fn build(self, line: usize) -> Result<SimConfig, ConfigError> {
        let need = |what: &str| {
            cerr(
                line,
                format!("[sim] is missing `{what}` (set it or name a preset)"),
            )
        };
        let cache = |prefix: &str,
                     v: [Option<u64>; 5],
                     line_size: u64|
         -> Result<CacheConfig, ConfigError> {
            const FIELDS: [&str; 5] = ["size", "ways", "mshrs", "wb", "latency"];
            let mut got = [0u64; 5];
            for i in 0..5 {
                got[i] = v[i].ok_or_else(|| need(&format!("{prefix}_{}", FIELDS[i])))?;
            }
            Ok(CacheConfig::new(
                got[0],
                got[1] as usize,
                line_size,
                got[2] as usize,
                got[3] as usize,
                got[4],
            ))
        };
        let line_size = self.line_size.ok_or_else(|| need("line_size"))?;
        let bits = self.bank_bits.ok_or_else(|| need("bank_bits"))?;
        let mapping = AddressMapping::from_bits(&bits).map_err(|e| cerr(line, e.to_string()))?;
        let row_size = self.row_size.ok_or_else(|| need("row_size"))?;
        let geometry = DramGeometry::new(mapping.num_banks(), row_size, line_size)
            .map_err(|e| cerr(line, e.to_string()))?;
        let window = self.window.ok_or_else(|| need("window"))?;
        let sim = SimConfig {
            cores: vec![CoreConfig::out_of_order(window); self.cores.ok_or_else(|| need("cores"))?],
            l1: cache("l1", self.l1, line_size)?,
            llc: cache("llc", self.llc, line_size)?,
            dram: DramConfig {
                geometry,
                mapping,
                timing: self.timing.ok_or_else(|| need("timing"))?,
                transfer_rate: self.mem_mts.ok_or_else(|| need("mem_mts"))?,
                cpu_freq_mhz: self.cpu_mhz.ok_or_else(|| need("cpu_mhz"))?,
                scheduler_window: self
                    .scheduler_window
                    .ok_or_else(|| need("scheduler_window"))?,
            },
            seed: 0,
        };
        sim.validate().map_err(|e| cerr(line, e.to_string()))?;
        Ok(sim)
    }
}

fn workload(
    entries: &[Entry],
    mut spec: WorkloadSpec,
    explicit_kind: bool,
) -> Result<WorkloadSpec, ConfigError> {
    let mut bank = None;
    for e in entries {
        match e.key.as_str() {
            "kind" if !explicit_kind => {}
            "kind" => {
                spec.kind = e
                    .value
                    .parse()
                    .map_err(|err: crate::workload::WorkloadError| cerr(e.line, err.to_string()))?
            }
            "working_set" => spec.working_set = size(e)?,
            "mlp" => spec.mlp = num(e)?,
            "target_bank" => bank = Some(num(e)?),
            "seed" => spec.seed = num(e)?,
            _ => unreachable!("key checked against WORKLOAD_KEYS"),
        }
    }
    spec.target_bank = if spec.kind.is_bank_aware() {
        Some(bank.or(spec.target_bank).unwrap_or(0))
    } else {
        None
    };
    Ok(spec)
}

fn kind_of(entries: &[Entry]) -> Result<Option<WorkloadKind>, ConfigError> {
    entries
        .iter()
        .find(|e| e.key == "kind")
        .map(|e| {
            e.value
                .parse()
                .map_err(|err: crate::workload::WorkloadError| cerr(e.line, err.to_string()))
        })
        .transpose()
}

impl std::str::FromStr for RunConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let sec = split_sections(text)?;
        let preset = match sec.sim.iter().find(|e| e.key == "preset") {
            Some(e) => Some(presets::by_name(&e.value).ok_or_else(|| {
                cerr(
                    e.line,
                    format!(
                        "unknown preset `{}` (known: {})",
                        e.value,
                        presets::NAMES.join(", ")
                    ),
                )
            })?),
            None => None,
        };
        let mut draft = preset
            .as_ref()
            .map(|p| SimDraft::from_sim(&p.sim))
            .unwrap_or_default();
        let mut name = preset
            .as_ref()
            .map_or("custom".to_string(), |p| p.name.to_string());
        for e in &sec.sim {
            match e.key.as_str() {
                "preset" => {}
                "name" => name = e.value.clone(),
                _ => draft.apply(e)?,
            }
        }
        let sim = draft.build(sec.sim_line.max(1))?;

        let defaults = preset.as_ref().map(RunConfig::for_preset);
        let need_ws = |section: &str, entries: &[Entry], line: usize| -> Result<(), ConfigError> {
            if defaults.is_none() && !entries.iter().any(|e| e.key == "working_set") {
                return Err(cerr(
                    line,
                    format!("[{section}] needs `working_set` when no preset is named"),
                ));
            }
            Ok(())
        };
        need_ws("victim", &sec.victim, sec.sim_line.max(1))?;
        let victim_kind = kind_of(&sec.victim)?.unwrap_or(WorkloadKind::SeqRead);
        let victim_base = defaults
            .as_ref()
            .map_or(WorkloadSpec::new(victim_kind, 0), |d| WorkloadSpec {
                kind: victim_kind,
                ..d.victim.clone()
            });
        let victim = workload(&sec.victim, victim_base, false)?;

        let attacker_line = sec.attacker_line.unwrap_or(sec.sim_line.max(1));
        let attacker_kind = kind_of(&sec.attacker)?
            .ok_or_else(|| cerr(attacker_line, "[attacker] needs `kind`"))?;
        need_ws("attacker", &sec.attacker, attacker_line)?;
        let attacker_base = defaults
            .as_ref()
            .map_or(WorkloadSpec::new(attacker_kind, 0), |d| WorkloadSpec {
                kind: attacker_kind,
                target_bank: None,
                ..d.attacker.clone()
            });
        let attacker = workload(&sec.attacker, attacker_base, false)?;

        let mut experiment = Experiment {
            n_attackers: sim.cores.len() - 1,
            ..Experiment::default()
        };
        for e in &sec.experiment {
            match e.key.as_str() {
                "n_attackers" => {
                    experiment.n_attackers = num(e)?;
                    if experiment.n_attackers >= sim.cores.len() {
                        return Err(cerr(
                            e.line,
                            format!(
                                "n_attackers {} needs more than {} cores",
                                experiment.n_attackers,
                                sim.cores.len()
                            ),
                        ));
                    }
                }
                "laps" => {
                    experiment.laps = num(e)?;
                    if experiment.laps == 0 {
                        return Err(cerr(e.line, "laps must be at least 1"));
                    }
                }
                "partition" => {
                    experiment.partition = flag(e, &["on", "true", "yes"], &["off", "false", "no"])?
                }
                "throttle" => {
                    experiment.throttle = match e.value.to_ascii_lowercase().as_str() {
                        "none" | "off" => None,
                        _ => match num::<u32>(e)? {
                            0 => return Err(cerr(e.line, "throttle budget must be at least 1")),
                            b => Some(b),
                        },
                    }
                }
                "attacker_order" => {
                    experiment.in_order_attackers =
                        flag(e, &["in-order", "inorder"], &["ooo", "out-of-order"])?
                }
                "seed" => experiment.seed = num(e)?,
                _ => unreachable!("key checked against EXPERIMENT_KEYS"),
            }
        }
        Ok(RunConfig {
            name,
            sim,
            victim,
            attacker,
            experiment,
        })
    }
}
