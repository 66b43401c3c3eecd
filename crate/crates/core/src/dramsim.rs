//! Open-page DRAM with per-bank row buffers and an FR-FCFS scheduler.
//!
//! One rank, one channel. Each bank services one request at a time; at most
//! one request starts per CPU cycle across the whole device. Timings are given
//! in DRAM clock cycles and converted to CPU cycles with the ratio of the CPU
//! clock to the DRAM clock (half the transfer rate).

use std::collections::HashSet;
use std::str::FromStr;

use thiserror::Error;

use crate::addrmap::{
    coord_of_unchecked, AddrError, AddressMapping, DramCoord, DramGeometry, PhysAddr,
};

pub const MIN_TRANSFER_RATE: u32 = 100;
pub const MAX_TRANSFER_RATE: u32 = 3200;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DramError {
    #[error("request id {0} already enqueued")]
    DuplicateId(u64),
    #[error("timing {0} must be at least 1")]
    ZeroTiming(&'static str),
    #[error("transfer rate {0} MT/s outside [100, 3200]")]
    TransferRate(u32),
    #[error("scheduler window must be at least 1")]
    ZeroWindow,
    #[error("cpu frequency must be positive")]
    ZeroCpuFreq,
    #[error("timing preset line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Addr(#[from] AddrError),
}

/// DRAM timing parameters, in DRAM clock cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DramTiming {
    pub t_rcd: u32,
    pub t_rp: u32,
    pub t_cl: u32,
    pub t_burst: u32,
}

impl DramTiming {
    /// `ddr-generic`: 14-14-14 with a 4-cycle burst.
    pub const GENERIC: DramTiming = DramTiming {
        t_rcd: 14,
        t_rp: 14,
        t_cl: 14,
        t_burst: 4,
    };
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DramConfig {
    pub geometry: DramGeometry,
    pub mapping: AddressMapping,
    pub timing: DramTiming,
    /// Mega-transfers per second; the DRAM clock is half of this.
    pub transfer_rate: u32,
    pub cpu_freq_mhz: u32,
    pub scheduler_window: usize,
}

impl DramConfig {
    pub fn validate(&self) -> Result<(), DramError> {
        let t = &self.timing;
        for (name, v) in [
            ("tRCD", t.t_rcd),
            ("tRP", t.t_rp),
            ("tCL", t.t_cl),
            ("tBURST", t.t_burst),
        ] {
            if v == 0 {
                return Err(DramError::ZeroTiming(name));
            }
        }
        if !(MIN_TRANSFER_RATE..=MAX_TRANSFER_RATE).contains(&self.transfer_rate) {
            return Err(DramError::TransferRate(self.transfer_rate));
        }
        if self.scheduler_window == 0 {
            return Err(DramError::ZeroWindow);
        }
        if self.cpu_freq_mhz == 0 {
            return Err(DramError::ZeroCpuFreq);
        }
        self.geometry.validate(&self.mapping)?;
        Ok(())
    }

    /// DRAM cycles to CPU cycles, rounded up.
    pub fn to_cpu_cycles(&self, dram_cycles: u32) -> u64 {
        let num = u64::from(dram_cycles) * u64::from(self.cpu_freq_mhz) * 2;
        num.div_ceil(u64::from(self.transfer_rate))
    }

    pub fn coord(&self, addr: PhysAddr) -> DramCoord {
        coord_of_unchecked(&self.geometry, &self.mapping, addr)
    }

    /// Parse `key = integer` timing preset text on top of this config.
    pub fn apply_timing_text(&mut self, text: &str) -> Result<(), DramError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content.split_once('=').ok_or_else(|| DramError::Parse {
                line,
                msg: format!("expected `key = integer`, got `{content}`"),
            })?;
            let v: u32 = v.trim().parse().map_err(|_| DramError::Parse {
                line,
                msg: format!("`{}` is not an integer", v.trim()),
            })?;
            match k.trim() {
                "tRCD" => self.timing.t_rcd = v,
                "tRP" => self.timing.t_rp = v,
                "tCL" => self.timing.t_cl = v,
                "tBURST" => self.timing.t_burst = v,
                "transfer_rate" => self.transfer_rate = v,
                "cpu_freq" => self.cpu_freq_mhz = v,
                "scheduler_window" => self.scheduler_window = v as usize,
                other => {
                    return Err(DramError::Parse {
                        line,
                        msg: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        self.validate()
    }

    pub fn timing_text(&self) -> String {
        let t = &self.timing;
        format!(
            "tRCD = {}\ntRP = {}\ntCL = {}\ntBURST = {}\ntransfer_rate = {}\ncpu_freq = {}\nscheduler_window = {}\n",
            t.t_rcd, t.t_rp, t.t_cl, t.t_burst, self.transfer_rate, self.cpu_freq_mhz, self.scheduler_window
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RequestKind {
    ReadFill,
    Writeback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemRequest {
    pub id: u64,
    pub kind: RequestKind,
    pub coord: DramCoord,
    pub arrival: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BankState {
    pub open_row: Option<u64>,
    pub busy_until: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOutcome {
    Hit,
    Closed,
    Conflict,
}

pub fn row_outcome(bank: &BankState, coord: &DramCoord) -> RowOutcome {
    match bank.open_row {
        Some(r) if r == coord.row => RowOutcome::Hit,
        Some(_) => RowOutcome::Conflict,
        None => RowOutcome::Closed,
    }
}

/// Service time in CPU cycles for `coord` given the bank's current row.
pub fn service_time(bank: &BankState, coord: &DramCoord, config: &DramConfig) -> u64 {
    let t = &config.timing;
    let dram = match row_outcome(bank, coord) {
        RowOutcome::Hit => t.t_cl + t.t_burst,
        RowOutcome::Closed => t.t_rcd + t.t_cl + t.t_burst,
        RowOutcome::Conflict => t.t_rp + t.t_rcd + t.t_cl + t.t_burst,
    };
    config.to_cpu_cycles(dram)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct InService {
    req: MemRequest,
    done_at: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DramCounters {
    pub started: u64,
    pub completed: u64,
    pub row_hits: u64,
    pub row_closed: u64,
    pub row_conflicts: u64,
    pub reads: u64,
    pub writes: u64,
}

#[derive(Debug, Clone)]
pub struct Dram {
    config: DramConfig,
    banks: Vec<BankState>,
    /// Waiting requests, oldest first.
    queue: Vec<MemRequest>,
    in_service: Vec<InService>,
    known_ids: HashSet<u64>,
    last_start: Option<u64>,
    pub counters: DramCounters,
    /// Requests started per bank.
    pub bank_accesses: Vec<u64>,
}

impl Dram {
    pub fn new(config: DramConfig) -> Result<Self, DramError> {
        config.validate()?;
        let n = config.geometry.num_banks as usize;
        Ok(Self {
            config,
            banks: vec![BankState::default(); n],
            queue: Vec::new(),
            in_service: Vec::new(),
            known_ids: HashSet::new(),
            last_start: None,
            counters: DramCounters::default(),
            bank_accesses: vec![0; n],
        })
    }

    pub fn config(&self) -> &DramConfig {
        &self.config
    }

    pub fn bank(&self, b: u64) -> &BankState {
        &self.banks[b as usize]
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    pub fn in_flight(&self) -> usize {
        self.in_service.len()
    }

    pub fn is_idle(&self) -> bool {
        self.queue.is_empty() && self.in_service.is_empty()
    }

    /// Admit a request; it becomes schedulable from `cycle + 1`. Ids must be
    /// unique among requests not yet completed.
    pub fn enqueue(&mut self, mut req: MemRequest, cycle: u64) -> Result<(), DramError> {
        if !self.known_ids.insert(req.id) {
            return Err(DramError::DuplicateId(req.id));
        }
        req.arrival = cycle;
        self.queue.push(req);
        Ok(())
    }

    /// Pick and start at most one request: within the `scheduler_window`
    /// oldest visible requests whose bank is idle, the oldest row hit wins,
    /// otherwise the oldest.
    pub fn schedule(&mut self, cycle: u64) -> Option<u64> {
        if self.last_start == Some(cycle) {
            return None;
        }
        let mut first_ready = None;
        let mut first_hit = None;
        for (pos, req) in self
            .queue
            .iter()
            .enumerate()
            .filter(|(_, r)| r.arrival < cycle)
            .take(self.config.scheduler_window)
        {
            let bank = &self.banks[req.coord.bank as usize];
            if bank.busy_until > cycle {
                continue;
            }
            if first_ready.is_none() {
                first_ready = Some(pos);
            }
            if bank.open_row == Some(req.coord.row) {
                first_hit = Some(pos);
                break;
            }
        }
        let pos = first_hit.or(first_ready)?;
        let req = self.queue.remove(pos);
        self.last_start = Some(cycle);
        let bank = &mut self.banks[req.coord.bank as usize];
        let svc = service_time(bank, &req.coord, &self.config);
        match row_outcome(bank, &req.coord) {
            RowOutcome::Hit => self.counters.row_hits += 1,
            RowOutcome::Closed => self.counters.row_closed += 1,
            RowOutcome::Conflict => self.counters.row_conflicts += 1,
        }
        bank.busy_until = cycle + svc;
        self.counters.started += 1;
        self.bank_accesses[req.coord.bank as usize] += 1;
        match req.kind {
            RequestKind::ReadFill => self.counters.reads += 1,
            RequestKind::Writeback => self.counters.writes += 1,
        }
        self.in_service.push(InService {
            req,
            done_at: cycle + svc,
        });
        Some(req.id)
    }

    /// Requests finishing at `cycle`, in start order. Their banks keep the
    /// serviced row open.
    pub fn complete(&mut self, cycle: u64) -> Vec<MemRequest> {
        let mut done = Vec::new();
        let banks = &mut self.banks;
        let known = &mut self.known_ids;
        self.in_service.retain(|s| {
            if s.done_at <= cycle {
                banks[s.req.coord.bank as usize].open_row = Some(s.req.coord.row);
                known.remove(&s.req.id);
                done.push(s.req);
                false
            } else {
                true
            }
        });
        self.counters.completed += done.len() as u64;
        done
    }

    /// Earliest cycle at or after `cycle` at which [`Self::schedule`] might
    /// start a request. May be early, never late.
    pub fn next_start(&self, cycle: u64) -> Option<u64> {
        let floor = if self.last_start == Some(cycle) {
            cycle + 1
        } else {
            cycle
        };
        self.queue
            .iter()
            .map(|r| {
                (r.arrival + 1)
                    .max(self.banks[r.coord.bank as usize].busy_until)
                    .max(floor)
            })
            .min()
    }

    /// Earliest future cycle at which a completion is due.
    pub fn next_completion(&self) -> Option<u64> {
        self.in_service.iter().map(|s| s.done_at).min()
    }
}

impl FromStr for DramTiming {
    type Err = DramError;

    /// Accepts the four timing keys only.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut t = DramTiming::GENERIC;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content.split_once('=').ok_or_else(|| DramError::Parse {
                line,
                msg: "expected `key = integer`".into(),
            })?;
            let v: u32 = v.trim().parse().map_err(|_| DramError::Parse {
                line,
                msg: format!("`{}` is not an integer", v.trim()),
            })?;
            match k.trim() {
                "tRCD" => t.t_rcd = v,
                "tRP" => t.t_rp = v,
                "tCL" => t.t_cl = v,
                "tBURST" => t.t_burst = v,
                other => {
                    return Err(DramError::Parse {
                        line,
                        msg: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        Ok(t)
    }
}
