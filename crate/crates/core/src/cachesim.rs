//! Non-blocking set-associative cache with a finite MSHR file and writeback
//! buffer.
//!
//! The cache is *blocked* whenever the MSHR file or the writeback buffer is
//! full. A blocked cache rejects every access, hits included, from every core.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CacheError {
    #[error("cache needs at least one set, way and MSHR")]
    ZeroSized,
    #[error("{what} must be a power of two, got {value}")]
    NotPowerOfTwo { what: &'static str, value: u64 },
    #[error("way mask for core {core} is empty")]
    EmptyPartition { core: usize },
    #[error("way mask for core {core} selects ways beyond {ways}")]
    PartitionOutOfRange { core: usize, ways: usize },
    #[error("way mask for core {core} overlaps core {other}")]
    OverlappingPartition { core: usize, other: usize },
    #[error("no live MSHR with id {0}")]
    UnknownMshr(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheConfig {
    pub sets: usize,
    pub ways: usize,
    pub line_size: u64,
    pub num_mshrs: usize,
    pub wb_entries: usize,
    pub hit_latency: u64,
    /// Optional per-core way masks; cores without a mask are unrestricted.
    pub partition: Option<Vec<u64>>,
}

impl CacheConfig {
    pub fn new(
        size: u64,
        ways: usize,
        line_size: u64,
        num_mshrs: usize,
        wb_entries: usize,
        hit_latency: u64,
    ) -> Self {
        let sets = (size / (line_size * ways as u64)).max(1) as usize;
        Self {
            sets,
            ways,
            line_size,
            num_mshrs,
            wb_entries,
            hit_latency,
            partition: None,
        }
    }

    pub fn size(&self) -> u64 {
        self.sets as u64 * self.ways as u64 * self.line_size
    }

    pub fn validate(&self) -> Result<(), CacheError> {
        if self.sets == 0 || self.ways == 0 || self.num_mshrs == 0 || self.wb_entries == 0 {
            return Err(CacheError::ZeroSized);
        }
        if !self.line_size.is_power_of_two() {
            return Err(CacheError::NotPowerOfTwo {
                what: "line_size",
                value: self.line_size,
            });
        }
        if !self.sets.is_power_of_two() {
            return Err(CacheError::NotPowerOfTwo {
                what: "sets",
                value: self.sets as u64,
            });
        }
        if let Some(masks) = &self.partition {
            validate_partition(masks, self.ways)?;
        }
        Ok(())
    }

    /// Evenly split the ways among `cores` (remainder to the last core).
    pub fn even_partition(ways: usize, cores: usize) -> Vec<u64> {
        let per = (ways / cores).max(1);
        (0..cores)
            .map(|c| {
                let lo = (c * per).min(ways - 1);
                let hi = if c + 1 == cores {
                    ways
                } else {
                    ((c + 1) * per).min(ways)
                };
                let hi = hi.max(lo + 1);
                ((1u64 << hi) - 1) & !((1u64 << lo) - 1)
            })
            .collect()
    }
}

fn validate_partition(masks: &[u64], ways: usize) -> Result<(), CacheError> {
    let all = if ways >= 64 {
        u64::MAX
    } else {
        (1u64 << ways) - 1
    };
    for (core, &m) in masks.iter().enumerate() {
        if m == 0 {
            return Err(CacheError::EmptyPartition { core });
        }
        if m & !all != 0 {
            return Err(CacheError::PartitionOutOfRange { core, ways });
        }
        if let Some(other) = masks[..core].iter().position(|&o| o & m != 0) {
            return Err(CacheError::OverlappingPartition { core, other });
        }
    }
    Ok(())
}

/// Who is waiting on an MSHR. `token` is opaque to the cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Requester {
    pub core: usize,
    pub token: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FillKind {
    ReadFill,
    WriteFill,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mshr {
    pub line: u64,
    pub kind: FillKind,
    pub requesters: Vec<Requester>,
    pub alloc_cycle: u64,
    /// Core whose miss allocated the entry; fills victimize its partition.
    pub owner: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WbEntry {
    pub line: u64,
    pub enqueue_cycle: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessResult {
    Hit { latency: u64 },
    MissAllocated { mshr: usize },
    MergedIntoMshr { mshr: usize },
    Blocked,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FillOutcome {
    Installed {
        /// Dirty line pushed to the writeback buffer, if any.
        writeback: Option<u64>,
        /// Clean line silently dropped, if any.
        evicted_clean: Option<u64>,
        requesters: Vec<Requester>,
        line: u64,
    },
    /// The victim is dirty and the writeback buffer is full.
    Deferred,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CacheCounters {
    pub hits: u64,
    pub misses: u64,
    pub merges: u64,
    pub rejected: u64,
    pub blocked_cycles: u64,
    pub wb_stalls: u64,
    pub writebacks: u64,
    pub peak_mshrs: usize,
    pub peak_wb: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct Way {
    tag: u64,
    valid: bool,
    dirty: bool,
    lru: u64,
}

#[derive(Debug, Clone)]
pub struct CacheState {
    config: CacheConfig,
    ways: Vec<Way>,
    mshrs: Vec<Option<Mshr>>,
    live_mshrs: usize,
    wb: Vec<WbEntry>,
    blocked: bool,
    lru_clock: u64,
    line_shift: u32,
    set_mask: u64,
    pub counters: CacheCounters,
}

impl CacheState {
    pub fn new(config: CacheConfig) -> Result<Self, CacheError> {
        config.validate()?;
        let ways = vec![Way::default(); config.sets * config.ways];
        let mshrs = vec![None; config.num_mshrs];
        Ok(Self {
            line_shift: config.line_size.trailing_zeros(),
            set_mask: config.sets as u64 - 1,
            config,
            ways,
            mshrs,
            live_mshrs: 0,
            wb: Vec::new(),
            blocked: false,
            lru_clock: 0,
            counters: CacheCounters::default(),
        })
    }

    pub fn config(&self) -> &CacheConfig {
        &self.config
    }

    pub fn is_blocked(&self) -> bool {
        self.blocked
    }

    pub fn live_mshrs(&self) -> usize {
        self.live_mshrs
    }

    pub fn wb_occupancy(&self) -> usize {
        self.wb.len()
    }

    pub fn wb_entries(&self) -> &[WbEntry] {
        &self.wb
    }

    pub fn mshr(&self, id: usize) -> Option<&Mshr> {
        self.mshrs.get(id).and_then(Option::as_ref)
    }

    pub fn mshr_for_line(&self, line: u64) -> Option<usize> {
        self.mshrs
            .iter()
            .position(|m| m.as_ref().is_some_and(|m| m.line == line))
    }

    pub fn line_of(&self, addr: u64) -> u64 {
        addr & !(self.config.line_size - 1)
    }

    fn set_of(&self, line: u64) -> usize {
        ((line >> self.line_shift) & self.set_mask) as usize
    }

    fn tag_of(&self, line: u64) -> u64 {
        line >> self.line_shift
    }

    fn set_range(&self, set: usize) -> std::ops::Range<usize> {
        set * self.config.ways..(set + 1) * self.config.ways
    }

    fn find(&self, line: u64) -> Option<usize> {
        let tag = self.tag_of(line);
        self.set_range(self.set_of(line))
            .find(|&i| self.ways[i].valid && self.ways[i].tag == tag)
    }

    pub fn contains(&self, line: u64) -> bool {
        self.find(self.line_of(line)).is_some()
    }

    pub fn is_dirty(&self, line: u64) -> bool {
        self.find(self.line_of(line))
            .is_some_and(|i| self.ways[i].dirty)
    }

    /// Way index (within its set) holding `line`.
    pub fn way_of(&self, line: u64) -> Option<usize> {
        let line = self.line_of(line);
        self.find(line)
            .map(|i| i - self.set_of(line) * self.config.ways)
    }

    fn refresh_blocked(&mut self) {
        self.blocked =
            self.live_mshrs == self.config.num_mshrs || self.wb.len() == self.config.wb_entries;
        self.counters.peak_mshrs = self.counters.peak_mshrs.max(self.live_mshrs);
        self.counters.peak_wb = self.counters.peak_wb.max(self.wb.len());
    }

    fn touch(&mut self, idx: usize) {
        self.lru_clock += 1;
        self.ways[idx].lru = self.lru_clock;
    }

    /// Look up `addr` on behalf of `requester`.
    pub fn access(
        &mut self,
        requester: Requester,
        addr: u64,
        is_write: bool,
        cycle: u64,
    ) -> AccessResult {
        if self.blocked {
            self.counters.rejected += 1;
            return AccessResult::Blocked;
        }
        let line = self.line_of(addr);
        if let Some(idx) = self.find(line) {
            self.touch(idx);
            if is_write {
                self.ways[idx].dirty = true;
            }
            self.counters.hits += 1;
            return AccessResult::Hit {
                latency: self.config.hit_latency,
            };
        }
        if let Some(id) = self.mshr_for_line(line) {
            let m = self.mshrs[id].as_mut().expect("live");
            m.requesters.push(requester);
            if is_write {
                m.kind = FillKind::WriteFill;
            }
            self.counters.merges += 1;
            return AccessResult::MergedIntoMshr { mshr: id };
        }
        let id = self
            .mshrs
            .iter()
            .position(Option::is_none)
            .expect("unblocked cache has a free MSHR");
        self.mshrs[id] = Some(Mshr {
            line,
            kind: if is_write {
                FillKind::WriteFill
            } else {
                FillKind::ReadFill
            },
            requesters: vec![requester],
            alloc_cycle: cycle,
            owner: requester.core,
        });
        self.live_mshrs += 1;
        self.counters.misses += 1;
        self.refresh_blocked();
        AccessResult::MissAllocated { mshr: id }
    }

    fn all_ways(&self) -> u64 {
        if self.config.ways >= 64 {
            u64::MAX
        } else {
            (1u64 << self.config.ways) - 1
        }
    }

    fn allowed_ways(&self, core: usize) -> u64 {
        match self.config.partition.as_ref().and_then(|m| m.get(core)) {
            Some(&m) if m != 0 => m,
            _ => self.all_ways(),
        }
    }

    /// Install the line an MSHR was waiting for.
    pub fn fill(&mut self, id: usize, cycle: u64) -> Result<FillOutcome, CacheError> {
        let m = self
            .mshrs
            .get(id)
            .and_then(Option::as_ref)
            .ok_or(CacheError::UnknownMshr(id))?;
        let (line, owner, dirty_fill) = (m.line, m.owner, m.kind == FillKind::WriteFill);
        let set = self.set_of(line);
        let allowed = self.allowed_ways(owner);
        // Invalid way first, then least recently used, among allowed ways.
        let victim = self
            .set_range(set)
            .enumerate()
            .filter(|(w, _)| (allowed >> w) & 1 == 1)
            .map(|(_, i)| i)
            .min_by_key(|&i| (self.ways[i].valid, self.ways[i].lru))
            .expect("partition masks are non-empty");
        let old = self.ways[victim];
        let old_line = old.tag << self.line_shift;
        if old.valid && old.dirty && self.wb.len() == self.config.wb_entries {
            self.counters.wb_stalls += 1;
            return Ok(FillOutcome::Deferred);
        }
        let mut writeback = None;
        let mut evicted_clean = None;
        if old.valid {
            if old.dirty {
                self.wb.push(WbEntry {
                    line: old_line,
                    enqueue_cycle: cycle,
                });
                self.counters.writebacks += 1;
                writeback = Some(old_line);
            } else {
                evicted_clean = Some(old_line);
            }
        }
        self.ways[victim] = Way {
            tag: self.tag_of(line),
            valid: true,
            dirty: dirty_fill,
            lru: 0,
        };
        self.touch(victim);
        let m = self.mshrs[id].take().expect("checked above");
        self.live_mshrs -= 1;
        self.refresh_blocked();
        Ok(FillOutcome::Installed {
            writeback,
            evicted_clean,
            requesters: m.requesters,
            line,
        })
    }

    /// Live MSHRs whose fill was requested by a read miss.
    pub fn live_read_mshrs(&self) -> usize {
        self.mshrs
            .iter()
            .flatten()
            .filter(|m| m.kind == FillKind::ReadFill)
            .count()
    }

    /// Whether [`Self::wb_drain_policy`] would emit an entry now.
    pub fn wb_drain_ready(&self) -> bool {
        let full = self.wb.len() == self.config.wb_entries;
        !self.wb.is_empty() && (full || self.live_read_mshrs() == 0)
    }

    /// Writeback emission rule: the oldest entry leaves when no read-fill MSHR
    /// is live or when the buffer is full. At most one per call. The slot frees
    /// as the entry is handed to the next level.
    pub fn wb_drain_policy(&mut self, _cycle: u64) -> Vec<u64> {
        if !self.wb_drain_ready() {
            return Vec::new();
        }
        let e = self.wb.remove(0);
        self.refresh_blocked();
        vec![e.line]
    }

    /// Drop every buffered writeback (for a level whose writebacks are absorbed
    /// upstream without timing).
    pub fn take_writebacks(&mut self) -> Vec<u64> {
        let out = self.wb.drain(..).map(|e| e.line).collect();
        self.refresh_blocked();
        out
    }

    /// Mark a resident line dirty without touching LRU.
    pub fn mark_dirty(&mut self, line: u64) -> bool {
        match self.find(self.line_of(line)) {
            Some(i) => {
                self.ways[i].dirty = true;
                true
            }
            None => false,
        }
    }

    /// Restrict which ways fills caused by `core` may victimize. Cores that
    /// were never assigned a mask stay unrestricted.
    pub fn set_partition(&mut self, core: usize, way_mask: u64) -> Result<(), CacheError> {
        if way_mask == 0 {
            return Err(CacheError::EmptyPartition { core });
        }
        if way_mask & !self.all_ways() != 0 {
            return Err(CacheError::PartitionOutOfRange {
                core,
                ways: self.config.ways,
            });
        }
        let mut masks = self.config.partition.clone().unwrap_or_default();
        if masks.len() <= core {
            masks.resize(core + 1, 0);
        }
        if let Some(other) = masks
            .iter()
            .enumerate()
            .position(|(o, &m)| o != core && m & way_mask != 0)
        {
            return Err(CacheError::OverlappingPartition { core, other });
        }
        masks[core] = way_mask;
        self.config.partition = Some(masks);
        Ok(())
    }

    /// Account one cycle; call once per simulated cycle.
    pub fn tick(&mut self) {
        if self.blocked {
            self.counters.blocked_cycles += 1;
        }
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        let live = self.mshrs.iter().filter(|m| m.is_some()).count();
        if live != self.live_mshrs || live > self.config.num_mshrs {
            return Err(format!("mshr count {live} vs tracked {}", self.live_mshrs));
        }
        if self.wb.len() > self.config.wb_entries {
            return Err("writeback buffer overflow".into());
        }
        let expect_blocked =
            live == self.config.num_mshrs || self.wb.len() == self.config.wb_entries;
        if expect_blocked != self.blocked {
            return Err("blocked flag out of sync".into());
        }
        let mut lines: Vec<u64> = self.mshrs.iter().flatten().map(|m| m.line).collect();
        lines.sort_unstable();
        if lines.windows(2).any(|w| w[0] == w[1]) {
            return Err("two MSHRs share a line".into());
        }
        if self.ways.iter().any(|w| w.dirty && !w.valid) {
            return Err("dirty invalid way".into());
        }
        Ok(())
    }
}
