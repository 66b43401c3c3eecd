//! Cycle-driven composition of cores, private L1 data caches, the shared LLC
//! and DRAM.
//!
//! Core 0 hosts the victim. Each simulated cycle runs these steps in order:
//!
//! 1. DRAM completions: line fills into the LLC. Fills deferred on a full
//!    writeback buffer retry first, the cycle after a writeback drains.
//! 2. Due events: L1 fills and L1 hit completions.
//! 3. LLC writeback drain into the DRAM queue; the slot frees on hand-off.
//! 4. LLC arbitration: at most one request per core. On the cycle the LLC
//!    unblocks, waiting cores are served in ascending id; otherwise the pass
//!    is round-robin starting from `cycle mod cores`.
//! 5. Core issue: at most one access per core.
//! 6. DRAM scheduling and per-cycle accounting.
//!
//! Warmup lasts until the victim has finished two laps and the LLC has
//! reached steady state: every attacker has finished a lap, or the LLC has
//! filled as many lines as it holds. Measurement then starts at the next
//! victim lap boundary. Attackers loop for as long as the victim runs. After the victim's last measured lap no core issues new
//! work and in-flight requests drain.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::ops::Sub;

use rayon::prelude::*;
use thiserror::Error;

use crate::addrmap::PhysAddr;
use crate::cachesim::{
    AccessResult, CacheConfig, CacheCounters, CacheError, CacheState, FillKind, FillOutcome,
    Requester,
};
use crate::dramsim::{
    Dram, DramConfig, DramCounters, DramError, MemRequest, RequestKind, MAX_TRANSFER_RATE,
    MIN_TRANSFER_RATE,
};
use crate::workload::{
    build_program, AccessProgram, ProgramCursor, ReadyAccess, WorkloadError, WorkloadSpec,
};

/// Length of a throttling epoch in CPU cycles.
pub const THROTTLE_EPOCH: u64 = 1000;
/// Victim laps excluded before measurement. The lap after the cold one still
/// carries replacement-state transients.
pub const VICTIM_WARMUP_LAPS: u64 = 2;
/// Physical address stride between per-core program images.
pub const CORE_STRIDE_SHIFT: u32 = 40;
/// Cycles without any completion before a run is declared stuck.
const STALL_LIMIT: u64 = 50_000_000;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("simulation needs at least one core")]
    NoCores,
    #[error("core {core}: window must be at least 1")]
    ZeroWindow { core: usize },
    #[error("core {core}: throttle budget must be at least 1")]
    ZeroThrottle { core: usize },
    #[error("no core {0}")]
    NoSuchCore(usize),
    #[error("line sizes differ: l1 {l1}, llc {llc}, dram {dram}")]
    LineSizeMismatch { l1: u64, llc: u64, dram: u64 },
    #[error("program for core {core} uses {program}-byte lines, caches use {cache}")]
    ProgramLineSize {
        core: usize,
        program: u64,
        cache: u64,
    },
    #[error("core 0 must run a non-empty victim program")]
    NoVictim,
    #[error("{programs} programs for {cores} cores")]
    TooManyPrograms { programs: usize, cores: usize },
    #[error("{n} attackers need {need} cores, configuration has {cores}")]
    TooManyAttackers { n: usize, need: usize, cores: usize },
    #[error("lap count must be at least 1")]
    ZeroLaps,
    #[error("transfer rate {0} MT/s outside [100, 3200]")]
    RateOutOfRange(u32),
    #[error("rate list is empty")]
    EmptyRates,
    #[error("no completion for {0} cycles; simulation is stuck")]
    Stuck(u64),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Dram(#[from] DramError),
    #[error(transparent)]
    Addr(#[from] crate::addrmap::AddrError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoreConfig {
    /// Maximum in-flight memory accesses.
    pub window: usize,
    /// Forces a window of one.
    pub in_order: bool,
    /// Maximum LLC-bound accesses per [`THROTTLE_EPOCH`] cycles.
    pub throttle: Option<u32>,
}

impl CoreConfig {
    pub fn out_of_order(window: usize) -> Self {
        Self {
            window,
            in_order: false,
            throttle: None,
        }
    }

    pub fn effective_window(&self) -> usize {
        if self.in_order {
            1
        } else {
            self.window
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimConfig {
    pub cores: Vec<CoreConfig>,
    pub l1: CacheConfig,
    pub llc: CacheConfig,
    pub dram: DramConfig,
    /// Mixed into every workload seed by [`solo_vs_corun`].
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.cores.is_empty() {
            return Err(EngineError::NoCores);
        }
        for (core, c) in self.cores.iter().enumerate() {
            if c.window == 0 {
                return Err(EngineError::ZeroWindow { core });
            }
            if c.throttle == Some(0) {
                return Err(EngineError::ZeroThrottle { core });
            }
        }
        let (l1, llc, dram) = (
            self.l1.line_size,
            self.llc.line_size,
            self.dram.geometry.line_size,
        );
        if l1 != llc || llc != dram {
            return Err(EngineError::LineSizeMismatch { l1, llc, dram });
        }
        self.l1.validate()?;
        self.llc.validate()?;
        self.dram.validate()?;
        Ok(())
    }

    /// Limit `core` to `budget` LLC-bound accesses per 1000-cycle epoch. When
    /// the budget is spent the core stalls until the next epoch.
    pub fn apply_throttle(&mut self, core: usize, budget: u32) -> Result<(), EngineError> {
        if budget == 0 {
            return Err(EngineError::ZeroThrottle { core });
        }
        self.cores
            .get_mut(core)
            .ok_or(EngineError::NoSuchCore(core))?
            .throttle = Some(budget);
        Ok(())
    }

    /// Give every core an equal, disjoint share of the LLC ways.
    pub fn partition_llc_evenly(&mut self) {
        self.llc.partition = Some(CacheConfig::even_partition(self.llc.ways, self.cores.len()));
    }

    pub fn with_transfer_rate(&self, rate: u32) -> Result<SimConfig, EngineError> {
        if !(MIN_TRANSFER_RATE..=MAX_TRANSFER_RATE).contains(&rate) {
            return Err(EngineError::RateOutOfRange(rate));
        }
        let mut s = self.clone();
        s.dram.transfer_rate = rate;
        Ok(s)
    }
}

/// Per-core counters. `issued` and `completed` cover the whole run; the rest
/// cover the measured laps only.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CoreMetrics {
    pub issued: u64,
    pub completed: u64,
    pub l1_hits: u64,
    pub l1_misses: u64,
    pub llc_hits: u64,
    /// LLC misses, both newly allocated and merged into a live MSHR.
    pub llc_misses: u64,
    /// Cycles with a request ready for the LLC while the LLC was blocked.
    pub blocked_cycles: u64,
    /// Cycles with a ready access that could not issue (window full or L1
    /// blocked).
    pub stall_cycles: u64,
    /// Cycles spent stalled after exhausting the throttle budget.
    pub throttled_cycles: u64,
}

impl Sub for CoreMetrics {
    type Output = CoreMetrics;

    fn sub(self, o: CoreMetrics) -> CoreMetrics {
        CoreMetrics {
            issued: self.issued,
            completed: self.completed,
            l1_hits: self.l1_hits - o.l1_hits,
            l1_misses: self.l1_misses - o.l1_misses,
            llc_hits: self.llc_hits - o.llc_hits,
            llc_misses: self.llc_misses - o.llc_misses,
            blocked_cycles: self.blocked_cycles - o.blocked_cycles,
            stall_cycles: self.stall_cycles - o.stall_cycles,
            throttled_cycles: self.throttled_cycles - o.throttled_cycles,
        }
    }
}

/// Whole-run totals used for conservation checks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunTotals {
    pub issued: u64,
    pub completed: u64,
    pub llc_mshr_allocations: u64,
    pub llc_writebacks: u64,
    pub dram_reads: u64,
    pub dram_writes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metrics {
    /// Cycles in the measured laps.
    pub total_cycles: u64,
    /// Victim laps measured (warmup excluded).
    pub victim_iterations: u64,
    /// Cycle at which the warmup lap ended.
    pub warmup_cycles: u64,
    /// Cycle at which all in-flight work had drained.
    pub end_cycle: u64,
    pub cores: Vec<CoreMetrics>,
    /// DRAM requests started per bank during the measured laps.
    pub bank_accesses: Vec<u64>,
    pub dram: DramCounters,
    pub llc: CacheCounters,
    pub totals: RunTotals,
}

impl Metrics {
    pub fn cycles_per_iter(&self) -> f64 {
        self.total_cycles as f64 / self.victim_iterations as f64
    }

    pub fn victim(&self) -> &CoreMetrics {
        &self.cores[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub solo: Metrics,
    pub corun: Metrics,
    pub solo_cycles_per_iter: f64,
    pub corun_cycles_per_iter: f64,
    pub slowdown: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    /// An L1 hit finishes for (core, chain).
    Complete { core: usize, chain: usize },
    /// The LLC delivers a line to a core's L1 MSHR.
    L1Fill { core: usize, mshr: usize },
}

#[derive(Debug, Clone, Copy)]
struct LlcRequest {
    l1_mshr: usize,
    line: u64,
    ready_at: u64,
}

#[derive(Debug, Clone, Copy)]
enum DramTag {
    Fill { mshr: usize },
    Writeback,
}

struct Core {
    cfg: CoreConfig,
    program: Option<AccessProgram>,
    cursor: Option<ProgramCursor>,
    l1: CacheState,
    llc_queue: VecDeque<LlcRequest>,
    /// Issue limit in accesses, set for the victim once measurement starts;
    /// `None` loops forever.
    issue_limit: Option<u64>,
    next_chain: usize,
    epoch: u64,
    epoch_used: u32,
    m: CoreMetrics,
}

enum IssueState {
    /// Nothing to issue: no program, issue limit reached, draining, or every
    /// chain waiting on its predecessor.
    Idle,
    Throttled,
    /// An access is ready but the window or the L1 MSHRs are full.
    Stalled,
    Ready(ReadyAccess),
}

impl Core {
    fn outstanding(&self) -> u64 {
        self.cursor.as_ref().map_or(0, ProgramCursor::outstanding)
    }

    fn issue_state(&self, cycle: u64, draining: bool) -> IssueState {
        let (Some(program), Some(cursor)) = (self.program.as_ref(), self.cursor.as_ref()) else {
            return IssueState::Idle;
        };
        if draining || self.issue_limit.is_some_and(|lim| cursor.issued() >= lim) {
            return IssueState::Idle;
        }
        let used = if cycle / THROTTLE_EPOCH == self.epoch {
            self.epoch_used
        } else {
            0
        };
        if self.cfg.throttle.is_some_and(|b| used >= b) {
            return IssueState::Throttled;
        }
        let chains = program.chain_count();
        let Some(ready) = (0..chains)
            .map(|k| (self.next_chain + k) % chains)
            .find_map(|ch| cursor.ready_in_chain(program, ch))
        else {
            return IssueState::Idle;
        };
        if cursor.outstanding() >= self.cfg.effective_window() as u64 || self.l1.is_blocked() {
            return IssueState::Stalled;
        }
        IssueState::Ready(ready)
    }
}

struct Sim {
    cores: Vec<Core>,
    llc: CacheState,
    dram: Dram,
    events: BinaryHeap<Reverse<(u64, u64, Event)>>,
    event_seq: u64,
    dram_tags: HashMap<u64, DramTag>,
    next_dram_id: u64,
    deferred_fills: VecDeque<usize>,
    /// Cycle at which deferred fills retry, set after a writeback frees a slot.
    retry_at: Option<u64>,
    llc_was_blocked: bool,
    fast_forward: bool,
    cycle: u64,
    draining: bool,
    last_progress: u64,
}

struct Snapshot {
    cycle: u64,
    cores: Vec<CoreMetrics>,
    bank: Vec<u64>,
    dram: DramCounters,
    llc: CacheCounters,
}

impl Sim {
    fn new(
        sim: &SimConfig,
        programs: Vec<Option<AccessProgram>>,
        opts: RunOptions,
    ) -> Result<Self, EngineError> {
        let mut cores = Vec::with_capacity(sim.cores.len());
        let mut programs = programs.into_iter();
        for cfg in &sim.cores {
            let program = programs.next().flatten().filter(|p| !p.is_empty());
            let cursor = program.as_ref().map(ProgramCursor::new);
            cores.push(Core {
                cfg: *cfg,
                program,
                cursor,
                l1: CacheState::new(sim.l1.clone())?,
                llc_queue: VecDeque::new(),
                issue_limit: None,
                next_chain: 0,
                epoch: 0,
                epoch_used: 0,
                m: CoreMetrics::default(),
            });
        }
        Ok(Self {
            cores,
            llc: CacheState::new(sim.llc.clone())?,
            dram: Dram::new(sim.dram.clone())?,
            events: BinaryHeap::new(),
            event_seq: 0,
            dram_tags: HashMap::new(),
            next_dram_id: 0,
            deferred_fills: VecDeque::new(),
            retry_at: None,
            llc_was_blocked: false,
            fast_forward: opts.fast_forward,
            cycle: 0,
            draining: false,
            last_progress: 0,
        })
    }

    fn push_event(&mut self, at: u64, ev: Event) {
        self.events.push(Reverse((at, self.event_seq, ev)));
        self.event_seq += 1;
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            cycle: self.cycle,
            cores: self.cores.iter().map(|c| c.m).collect(),
            bank: self.dram.bank_accesses.clone(),
            dram: self.dram.counters,
            llc: self.llc.counters,
        }
    }

    fn enqueue_dram(
        &mut self,
        kind: RequestKind,
        line: u64,
        tag: DramTag,
    ) -> Result<(), EngineError> {
        let id = self.next_dram_id;
        self.next_dram_id += 1;
        let coord = self.dram.config().coord(PhysAddr::new(line)?);
        self.dram.enqueue(
            MemRequest {
                id,
                kind,
                coord,
                arrival: self.cycle,
            },
            self.cycle,
        )?;
        self.dram_tags.insert(id, tag);
        Ok(())
    }

    fn complete_access(&mut self, core: usize, chain: usize) {
        let c = &mut self.cores[core];
        if let Some(cur) = c.cursor.as_mut() {
            cur.complete(chain);
        }
        c.m.completed += 1;
        self.last_progress = self.cycle;
    }

    fn try_llc_fill(&mut self, mshr: usize) -> Result<bool, EngineError> {
        match self.llc.fill(mshr, self.cycle)? {
            FillOutcome::Deferred => Ok(false),
            FillOutcome::Installed { requesters, .. } => {
                for r in requesters {
                    self.push_event(
                        self.cycle + 1,
                        Event::L1Fill {
                            core: r.core,
                            mshr: r.token as usize,
                        },
                    );
                }
                Ok(true)
            }
        }
    }

    fn dram_completions(&mut self) -> Result<(), EngineError> {
        if self.retry_at.is_some_and(|t| t <= self.cycle) {
            self.retry_at = None;
            let mut still = VecDeque::new();
            while let Some(m) = self.deferred_fills.pop_front() {
                if !self.try_llc_fill(m)? {
                    still.push_back(m);
                }
            }
            self.deferred_fills = still;
        }
        for req in self.dram.complete(self.cycle) {
            match self.dram_tags.remove(&req.id).expect("tagged request") {
                DramTag::Fill { mshr } => {
                    if !self.try_llc_fill(mshr)? {
                        self.deferred_fills.push_back(mshr);
                    }
                }
                DramTag::Writeback => {}
            }
        }
        Ok(())
    }

    fn due_events(&mut self) {
        while let Some(&Reverse((at, _, ev))) = self.events.peek() {
            if at > self.cycle {
                break;
            }
            self.events.pop();
            match ev {
                Event::Complete { core, chain } => self.complete_access(core, chain),
                Event::L1Fill { core, mshr } => {
                    let c = &mut self.cores[core];
                    let FillOutcome::Installed { requesters, .. } =
                        c.l1.fill(mshr, self.cycle).expect("live L1 MSHR")
                    else {
                        unreachable!("L1 writebacks are taken after every fill")
                    };
                    // L1 writebacks are absorbed by the LLC copy when present.
                    for line in c.l1.take_writebacks() {
                        self.llc.mark_dirty(line);
                    }
                    for r in requesters {
                        self.complete_access(core, r.token as usize);
                    }
                }
            }
        }
    }

    fn drain_writebacks(&mut self) -> Result<(), EngineError> {
        for line in self.llc.wb_drain_policy(self.cycle) {
            self.enqueue_dram(RequestKind::Writeback, line, DramTag::Writeback)?;
            if !self.deferred_fills.is_empty() {
                self.retry_at = Some(self.cycle + 1);
            }
        }
        Ok(())
    }

    fn arbitrate_llc(&mut self) -> Result<(), EngineError> {
        let n = self.cores.len();
        let unblocked_now = self.llc_was_blocked && !self.llc.is_blocked();
        let start = if unblocked_now {
            0
        } else {
            (self.cycle % n as u64) as usize
        };
        let mut blocked = false;
        for k in 0..n {
            let core = (start + k) % n;
            let Some(&req) = self.cores[core].llc_queue.front() else {
                continue;
            };
            if req.ready_at > self.cycle {
                continue;
            }
            if blocked {
                self.cores[core].m.blocked_cycles += 1;
                continue;
            }
            let write = self.cores[core]
                .l1
                .mshr(req.l1_mshr)
                .is_some_and(|m| m.kind == FillKind::WriteFill);
            let who = Requester {
                core,
                token: req.l1_mshr as u64,
            };
            match self.llc.access(who, req.line, write, self.cycle) {
                AccessResult::Blocked => {
                    blocked = true;
                    self.cores[core].m.blocked_cycles += 1;
                    continue;
                }
                AccessResult::Hit { latency } => {
                    self.cores[core].m.llc_hits += 1;
                    self.push_event(
                        self.cycle + latency,
                        Event::L1Fill {
                            core,
                            mshr: req.l1_mshr,
                        },
                    );
                }
                AccessResult::MissAllocated { mshr } => {
                    self.cores[core].m.llc_misses += 1;
                    self.enqueue_dram(RequestKind::ReadFill, req.line, DramTag::Fill { mshr })?;
                }
                AccessResult::MergedIntoMshr { .. } => {
                    self.cores[core].m.llc_misses += 1;
                }
            }
            self.cores[core].llc_queue.pop_front();
        }
        self.llc_was_blocked = self.llc.is_blocked();
        Ok(())
    }

    fn issue(&mut self) {
        let cycle = self.cycle;
        let draining = self.draining;
        for (id, c) in self.cores.iter_mut().enumerate() {
            let epoch = cycle / THROTTLE_EPOCH;
            if epoch != c.epoch {
                c.epoch = epoch;
                c.epoch_used = 0;
            }
            let ready = match c.issue_state(cycle, draining) {
                IssueState::Idle => continue,
                IssueState::Throttled => {
                    c.m.throttled_cycles += 1;
                    continue;
                }
                IssueState::Stalled => {
                    c.m.stall_cycles += 1;
                    continue;
                }
                IssueState::Ready(r) => r,
            };
            let (Some(program), Some(cursor)) = (c.program.as_ref(), c.cursor.as_mut()) else {
                unreachable!()
            };
            let a = ready.access;
            let who = Requester {
                core: id,
                token: ready.chain as u64,
            };
            match c.l1.access(who, a.addr.value(), a.is_write, cycle) {
                AccessResult::Blocked => unreachable!("issue_state checks the L1"),
                AccessResult::Hit { latency } => {
                    c.m.l1_hits += 1;
                    self.events.push(Reverse((
                        cycle + latency,
                        self.event_seq,
                        Event::Complete {
                            core: id,
                            chain: ready.chain,
                        },
                    )));
                    self.event_seq += 1;
                }
                AccessResult::MissAllocated { mshr } => {
                    c.m.l1_misses += 1;
                    c.epoch_used += 1;
                    let line = c.l1.line_of(a.addr.value());
                    c.llc_queue.push_back(LlcRequest {
                        l1_mshr: mshr,
                        line,
                        ready_at: cycle + c.l1.config().hit_latency,
                    });
                }
                AccessResult::MergedIntoMshr { .. } => {
                    c.m.l1_misses += 1;
                }
            }
            cursor.issue(program, ready.chain);
            c.m.issued += 1;
            c.next_chain = (ready.chain + 1) % program.chain_count();
        }
    }

    /// First cycle at or after the current one where a step can change state
    /// beyond per-cycle counters.
    fn next_action(&self) -> u64 {
        let now = self.cycle;
        if self.llc.wb_drain_ready() {
            return now;
        }
        let mut next = u64::MAX;
        let mut consider = |t: Option<u64>| {
            if let Some(t) = t {
                next = next.min(t);
            }
        };
        consider(self.dram.next_completion());
        consider(self.retry_at);
        consider(self.events.peek().map(|Reverse((t, _, _))| *t));
        consider(self.dram.next_start(now));
        for c in &self.cores {
            if let Some(h) = c.llc_queue.front() {
                if h.ready_at > now {
                    consider(Some(h.ready_at));
                } else if !self.llc.is_blocked() {
                    return now;
                }
            }
            match c.issue_state(now, self.draining) {
                IssueState::Ready(_) => return now,
                IssueState::Throttled => {
                    consider(Some((now / THROTTLE_EPOCH + 1) * THROTTLE_EPOCH))
                }
                IssueState::Idle | IssueState::Stalled => {}
            }
        }
        if next == u64::MAX {
            now
        } else {
            next.max(now)
        }
    }

    /// Account `cycles` consecutive cycles in which only counters change.
    fn skip(&mut self, cycles: u64) {
        let now = self.cycle;
        let mut rejected = false;
        for c in &mut self.cores {
            if c.llc_queue.front().is_some_and(|h| h.ready_at <= now) {
                c.m.blocked_cycles += cycles;
                rejected = true;
            }
            match c.issue_state(now, self.draining) {
                IssueState::Throttled => c.m.throttled_cycles += cycles,
                IssueState::Stalled => c.m.stall_cycles += cycles,
                IssueState::Idle | IssueState::Ready(_) => {}
            }
        }
        if rejected {
            self.llc.counters.rejected += cycles;
        }
        if self.llc.is_blocked() {
            self.llc.counters.blocked_cycles += cycles;
        }
        self.cycle += cycles;
    }

    fn step(&mut self) -> Result<(), EngineError> {
        if self.fast_forward {
            let next = self.next_action();
            if next > self.cycle {
                self.skip(next - self.cycle);
            }
        }
        self.dram_completions()?;
        self.due_events();
        self.drain_writebacks()?;
        self.arbitrate_llc()?;
        self.issue();
        self.dram.schedule(self.cycle);
        self.llc.tick();
        if self.cycle.saturating_sub(self.last_progress) > STALL_LIMIT {
            return Err(EngineError::Stuck(STALL_LIMIT));
        }
        self.cycle += 1;
        Ok(())
    }

    fn victim_completed(&self) -> u64 {
        self.cores[0]
            .cursor
            .as_ref()
            .map_or(0, ProgramCursor::completed)
    }

    /// The victim has finished its warmup laps, and either every other
    /// program has finished one lap or the LLC has seen as many fills as it
    /// has lines.
    fn warmed_up(&self) -> bool {
        let laps = |c: &Core, n: u64| match (&c.program, &c.cursor) {
            (Some(p), Some(cur)) => cur.laps_done(p) >= n,
            _ => true,
        };
        if !laps(&self.cores[0], VICTIM_WARMUP_LAPS) {
            return false;
        }
        let cfg = self.llc.config();
        let capacity = (cfg.sets * cfg.ways) as u64;
        self.llc.counters.misses >= capacity || self.cores[1..].iter().all(|c| laps(c, 1))
    }

    fn quiescent(&self) -> bool {
        self.events.is_empty()
            && self.dram.is_idle()
            && self.deferred_fills.is_empty()
            && self.llc.live_mshrs() == 0
            && self.llc.wb_occupancy() == 0
            && self
                .cores
                .iter()
                .all(|c| c.outstanding() == 0 && c.llc_queue.is_empty())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Jump over cycles in which nothing but counters can change. Results are
    /// identical either way.
    pub fast_forward: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { fast_forward: true }
    }
}

/// Run until the victim on core 0 finishes `stop` measured laps, then drain.
/// `programs[i]` runs on core `i`; missing entries leave a core idle.
pub fn run(
    sim: &SimConfig,
    programs: &[Option<AccessProgram>],
    stop: u64,
) -> Result<Metrics, EngineError> {
    run_with(sim, programs, stop, RunOptions::default())
}

pub fn run_with(
    sim: &SimConfig,
    programs: &[Option<AccessProgram>],
    stop: u64,
    opts: RunOptions,
) -> Result<Metrics, EngineError> {
    sim.validate()?;
    if stop == 0 {
        return Err(EngineError::ZeroLaps);
    }
    if programs.len() > sim.cores.len() {
        return Err(EngineError::TooManyPrograms {
            programs: programs.len(),
            cores: sim.cores.len(),
        });
    }
    let lap_len = match programs.first() {
        Some(Some(p)) if !p.is_empty() => p.len() as u64,
        _ => return Err(EngineError::NoVictim),
    };
    for (core, p) in programs.iter().enumerate() {
        if let Some(p) = p {
            let misaligned = p
                .accesses()
                .iter()
                .any(|a| a.addr.value() % sim.l1.line_size != 0);
            if misaligned {
                return Err(EngineError::ProgramLineSize {
                    core,
                    program: p.accesses()[0].addr.value() % sim.l1.line_size,
                    cache: sim.l1.line_size,
                });
            }
        }
    }
    let mut s = Sim::new(sim, programs.to_vec(), opts)?;
    // Warmup, then measurement starts at the next victim lap boundary.
    while !s.warmed_up() {
        s.step()?;
    }
    let first = s.victim_completed().div_ceil(lap_len).max(1) * lap_len;
    while s.victim_completed() < first {
        s.step()?;
    }
    let start = s.snapshot();
    let last = first + stop * lap_len;
    s.cores[0].issue_limit = Some(last);
    while s.victim_completed() < last {
        s.step()?;
    }
    let end = s.snapshot();
    s.draining = true;
    while !s.quiescent() {
        s.step()?;
    }
    let totals = RunTotals {
        issued: s.cores.iter().map(|c| c.m.issued).sum(),
        completed: s.cores.iter().map(|c| c.m.completed).sum(),
        llc_mshr_allocations: s.llc.counters.misses,
        llc_writebacks: s.llc.counters.writebacks,
        dram_reads: s.dram.counters.reads,
        dram_writes: s.dram.counters.writes,
    };
    let cores = s
        .cores
        .iter()
        .zip(end.cores.iter().zip(&start.cores))
        .map(|(c, (e, b))| CoreMetrics {
            issued: c.m.issued,
            completed: c.m.completed,
            ..(*e - *b)
        })
        .collect();
    Ok(Metrics {
        total_cycles: end.cycle - start.cycle,
        victim_iterations: stop,
        warmup_cycles: start.cycle,
        end_cycle: s.cycle,
        cores,
        bank_accesses: end
            .bank
            .iter()
            .zip(&start.bank)
            .map(|(e, b)| e - b)
            .collect(),
        dram: diff_dram(&end.dram, &start.dram),
        llc: diff_cache(&end.llc, &start.llc),
        totals,
    })
}

fn diff_dram(e: &DramCounters, b: &DramCounters) -> DramCounters {
    DramCounters {
        started: e.started - b.started,
        completed: e.completed - b.completed,
        row_hits: e.row_hits - b.row_hits,
        row_closed: e.row_closed - b.row_closed,
        row_conflicts: e.row_conflicts - b.row_conflicts,
        reads: e.reads - b.reads,
        writes: e.writes - b.writes,
    }
}

fn diff_cache(e: &CacheCounters, b: &CacheCounters) -> CacheCounters {
    CacheCounters {
        hits: e.hits - b.hits,
        misses: e.misses - b.misses,
        merges: e.merges - b.merges,
        rejected: e.rejected - b.rejected,
        blocked_cycles: e.blocked_cycles - b.blocked_cycles,
        wb_stalls: e.wb_stalls - b.wb_stalls,
        writebacks: e.writebacks - b.writebacks,
        peak_mshrs: e.peak_mshrs,
        peak_wb: e.peak_wb,
    }
}

/// Build the victim program for core 0 and `n_attackers` copies of the
/// attacker for cores 1..=n, each with its own seed and address range.
pub fn build_programs(
    sim: &SimConfig,
    victim: &WorkloadSpec,
    attacker: &WorkloadSpec,
    n_attackers: usize,
) -> Result<Vec<Option<AccessProgram>>, EngineError> {
    let need = n_attackers + 1;
    if need > sim.cores.len() {
        return Err(EngineError::TooManyAttackers {
            n: n_attackers,
            need,
            cores: sim.cores.len(),
        });
    }
    let (mapping, geom) = (&sim.dram.mapping, &sim.dram.geometry);
    let mut v = victim.clone();
    v.seed = v.seed.wrapping_add(sim.seed);
    let mut out = vec![Some(build_program(&v, mapping, geom)?)];
    if n_attackers > 0 {
        let mut a = attacker.clone();
        a.seed = a.seed.wrapping_add(sim.seed);
        for i in 1..=n_attackers {
            let mut spec = a.clone();
            spec.seed = a.seed.wrapping_add(i as u64);
            let p = build_program(&spec, mapping, geom)?;
            out.push(Some(p.relocated((i as u64) << CORE_STRIDE_SHIFT)?));
        }
    }
    Ok(out)
}

/// Victim alone, then victim plus `n_attackers`, on the same configuration.
pub fn solo_vs_corun(
    sim: &SimConfig,
    victim: &WorkloadSpec,
    attacker: &WorkloadSpec,
    n_attackers: usize,
    laps: u64,
) -> Result<ExperimentResult, EngineError> {
    let programs = build_programs(sim, victim, attacker, n_attackers)?;
    compare(sim, &programs, laps)
}

fn compare(
    sim: &SimConfig,
    programs: &[Option<AccessProgram>],
    laps: u64,
) -> Result<ExperimentResult, EngineError> {
    let solo = run(sim, &programs[..1], laps)?;
    let corun = if programs.len() == 1 {
        solo.clone()
    } else {
        run(sim, programs, laps)?
    };
    let (s, c) = (solo.cycles_per_iter(), corun.cycles_per_iter());
    Ok(ExperimentResult {
        solo,
        corun,
        solo_cycles_per_iter: s,
        corun_cycles_per_iter: c,
        slowdown: c / s,
    })
}

/// One [`solo_vs_corun`] per transfer rate, evaluated in parallel; results
/// follow the order of `rates`.
pub fn sweep_memfreq(
    sim: &SimConfig,
    victim: &WorkloadSpec,
    attacker: &WorkloadSpec,
    n_attackers: usize,
    laps: u64,
    rates: &[u32],
) -> Result<Vec<(u32, ExperimentResult)>, EngineError> {
    if rates.is_empty() {
        return Err(EngineError::EmptyRates);
    }
    let configs = rates
        .iter()
        .map(|&r| sim.with_transfer_rate(r))
        .collect::<Result<Vec<_>, _>>()?;
    // Rate changes neither the mapping nor the programs.
    let programs = build_programs(sim, victim, attacker, n_attackers)?;
    configs
        .par_iter()
        .zip(rates.par_iter())
        .map(|(cfg, &rate)| compare(cfg, &programs, laps).map(|r| (rate, r)))
        .collect()
}
