//! Attack and victim programs as dependency-annotated access streams.
//!
//! Sequential programs are one chain of independent accesses. Linked-list
//! programs are `mlp` chains; within a chain every access depends on the one
//! before it, chains are independent of each other.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::addrmap::{
    same_bank_lines, AddrError, AddressMapping, DramGeometry, HugePageRegion, PhysAddr, PAGE_2M,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WorkloadError {
    #[error("working set {working_set} is smaller than one line ({line_size})")]
    WorkingSetTooSmall { working_set: u64, line_size: u64 },
    #[error("working set {working_set} is not a multiple of the line size {line_size}")]
    UnalignedWorkingSet { working_set: u64, line_size: u64 },
    #[error("mlp must be at least 1")]
    ZeroMlp,
    #[error("{kind} is not a {expected} workload")]
    WrongKind {
        kind: WorkloadKind,
        expected: &'static str,
    },
    #[error("{0} requires a target bank")]
    MissingTargetBank(WorkloadKind),
    #[error("placer supplied {got} candidate lines, need {need}")]
    NotEnoughLines { got: usize, need: usize },
    #[error("unknown workload kind `{0}`")]
    UnknownKind(String),
    #[error(transparent)]
    Addr(#[from] AddrError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WorkloadKind {
    SeqRead,
    SeqWrite,
    PllRead,
    PllWrite,
    BkPllRead,
    BkPllWrite,
}

impl WorkloadKind {
    pub const ALL: [WorkloadKind; 6] = [
        WorkloadKind::SeqRead,
        WorkloadKind::SeqWrite,
        WorkloadKind::PllRead,
        WorkloadKind::PllWrite,
        WorkloadKind::BkPllRead,
        WorkloadKind::BkPllWrite,
    ];

    pub fn is_write(self) -> bool {
        matches!(self, Self::SeqWrite | Self::PllWrite | Self::BkPllWrite)
    }

    pub fn is_sequential(self) -> bool {
        matches!(self, Self::SeqRead | Self::SeqWrite)
    }

    pub fn is_bank_aware(self) -> bool {
        matches!(self, Self::BkPllRead | Self::BkPllWrite)
    }

    /// Conventional benchmark name (BwRead, PLLWrite, ...).
    pub fn name(self) -> &'static str {
        match self {
            Self::SeqRead => "BwRead",
            Self::SeqWrite => "BwWrite",
            Self::PllRead => "PLLRead",
            Self::PllWrite => "PLLWrite",
            Self::BkPllRead => "BkPLLRead",
            Self::BkPllWrite => "BkPLLWrite",
        }
    }
}

impl fmt::Display for WorkloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WorkloadKind {
    type Err = WorkloadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match norm.as_str() {
            "seqread" | "bwread" => Self::SeqRead,
            "seqwrite" | "bwwrite" => Self::SeqWrite,
            "pllread" => Self::PllRead,
            "pllwrite" => Self::PllWrite,
            "bkpllread" => Self::BkPllRead,
            "bkpllwrite" => Self::BkPllWrite,
            _ => return Err(WorkloadError::UnknownKind(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkloadSpec {
    pub kind: WorkloadKind,
    /// Bytes of distinct lines the program touches per lap.
    pub working_set: u64,
    pub line_size: u64,
    /// Number of independent chains; ignored by sequential kinds.
    pub mlp: usize,
    pub target_bank: Option<u64>,
    pub seed: u64,
    /// Laps the program is expected to run; the engine loops programs freely.
    pub iterations: u64,
}

impl WorkloadSpec {
    pub fn new(kind: WorkloadKind, working_set: u64) -> Self {
        Self {
            kind,
            working_set,
            line_size: 64,
            mlp: 1,
            target_bank: if kind.is_bank_aware() { Some(0) } else { None },
            seed: 0,
            iterations: 1,
        }
    }

    pub fn with_mlp(mut self, mlp: usize) -> Self {
        self.mlp = mlp;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_target_bank(mut self, bank: u64) -> Self {
        self.target_bank = Some(bank);
        self
    }

    pub fn lines(&self) -> u64 {
        self.working_set / self.line_size
    }

    fn validate(&self) -> Result<(), WorkloadError> {
        if self.working_set < self.line_size {
            return Err(WorkloadError::WorkingSetTooSmall {
                working_set: self.working_set,
                line_size: self.line_size,
            });
        }
        if !self.working_set.is_multiple_of(self.line_size) {
            return Err(WorkloadError::UnalignedWorkingSet {
                working_set: self.working_set,
                line_size: self.line_size,
            });
        }
        if !self.kind.is_sequential() && self.mlp == 0 {
            return Err(WorkloadError::ZeroMlp);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Access {
    pub addr: PhysAddr,
    pub is_write: bool,
    pub chain: u32,
    pub ordinal: u32,
}

/// An immutable generated access stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessProgram {
    kind: WorkloadKind,
    /// Accesses of every chain, chain-major.
    accesses: Vec<Access>,
    /// Start offset of each chain in `accesses`, plus a trailing end marker.
    chain_starts: Vec<usize>,
    dependent: bool,
    pub laps: u64,
}

impl AccessProgram {
    pub fn kind(&self) -> WorkloadKind {
        self.kind
    }

    pub fn accesses(&self) -> &[Access] {
        &self.accesses
    }

    pub fn len(&self) -> usize {
        self.accesses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accesses.is_empty()
    }

    pub fn chain_count(&self) -> usize {
        self.chain_starts.len().saturating_sub(1)
    }

    pub fn chain(&self, c: usize) -> &[Access] {
        &self.accesses[self.chain_starts[c]..self.chain_starts[c + 1]]
    }

    /// True when accesses within a chain must wait for their predecessor.
    pub fn is_dependent(&self) -> bool {
        self.dependent
    }

    /// Shift every address by `base`. Used to place programs of different
    /// cores in disjoint physical ranges.
    pub fn relocated(&self, base: u64) -> Result<AccessProgram, AddrError> {
        let mut out = self.clone();
        for a in &mut out.accesses {
            a.addr = PhysAddr::new(a.addr.value() + base)?;
        }
        Ok(out)
    }

    pub fn empty() -> Self {
        Self {
            kind: WorkloadKind::SeqRead,
            accesses: Vec::new(),
            chain_starts: vec![0],
            dependent: false,
            laps: 0,
        }
    }

    /// One `chain=<c> ord=<k> addr=0x<hex> w=<0|1>` line per access.
    pub fn dump(&self) -> String {
        let mut s = String::with_capacity(self.accesses.len() * 40);
        for a in &self.accesses {
            s.push_str(&format!(
                "chain={} ord={} addr={:#x} w={}\n",
                a.chain,
                a.ordinal,
                a.addr.value(),
                u8::from(a.is_write)
            ));
        }
        s
    }
}

pub fn build_sequential(spec: &WorkloadSpec) -> Result<AccessProgram, WorkloadError> {
    if !spec.kind.is_sequential() {
        return Err(WorkloadError::WrongKind {
            kind: spec.kind,
            expected: "sequential",
        });
    }
    spec.validate()?;
    let is_write = spec.kind == WorkloadKind::SeqWrite;
    let accesses: Vec<Access> = (0..spec.lines())
        .map(|i| Access {
            addr: PhysAddr::new_unchecked(i * spec.line_size),
            is_write,
            chain: 0,
            ordinal: i as u32,
        })
        .collect();
    let n = accesses.len();
    Ok(AccessProgram {
        kind: spec.kind,
        accesses,
        chain_starts: vec![0, n],
        dependent: false,
        laps: spec.iterations,
    })
}

/// Source of candidate line addresses for linked-list nodes.
pub trait LinePlacer {
    /// At least `needed` distinct line addresses, or fewer if the placer
    /// cannot supply them (the builder reports the shortfall).
    fn candidates(&self, needed: usize) -> Result<Vec<PhysAddr>, WorkloadError>;
}

/// Lines `0, line, 2*line, ...` of a contiguous working set.
#[derive(Debug, Clone)]
pub struct Unconstrained {
    pub working_set: u64,
    pub line_size: u64,
}

impl LinePlacer for Unconstrained {
    fn candidates(&self, _needed: usize) -> Result<Vec<PhysAddr>, WorkloadError> {
        Ok((0..self.working_set / self.line_size)
            .map(|i| PhysAddr::new_unchecked(i * self.line_size))
            .collect())
    }
}

/// Lines of consecutive 2 MiB hugepages that land on one DRAM bank. Pages are
/// added until enough lines are found.
#[derive(Debug, Clone)]
pub struct SameBank {
    pub mapping: AddressMapping,
    pub geometry: DramGeometry,
    pub target_bank: u64,
    /// Upper bound on hugepages to scan.
    pub max_pages: u64,
}

impl SameBank {
    pub fn new(mapping: AddressMapping, geometry: DramGeometry, target_bank: u64) -> Self {
        Self {
            mapping,
            geometry,
            target_bank,
            max_pages: 1 << 12,
        }
    }
}

impl LinePlacer for SameBank {
    fn candidates(&self, needed: usize) -> Result<Vec<PhysAddr>, WorkloadError> {
        let mut out = Vec::with_capacity(needed);
        let mut page = 0;
        while out.len() < needed && page < self.max_pages {
            let region = HugePageRegion::new(PhysAddr::new(page * PAGE_2M)?, PAGE_2M)?;
            out.extend(same_bank_lines(
                &region,
                &self.mapping,
                &self.geometry,
                self.target_bank,
            )?);
            page += 1;
        }
        // Validation errors must surface even when nothing was scanned.
        if page == 0 {
            self.mapping
                .check_controllable(crate::addrmap::HUGEPAGE_SHIFT)?;
        }
        Ok(out)
    }
}

/// Per-chain successor tables; each table is one cycle over its chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListLayout {
    pub next: Vec<Vec<usize>>,
}

impl ListLayout {
    /// Visit order starting from entry 0 following the successor links.
    pub fn traversal(&self, chain: usize) -> Vec<usize> {
        let next = &self.next[chain];
        let mut order = Vec::with_capacity(next.len());
        if next.is_empty() {
            return order;
        }
        let mut cur = 0;
        loop {
            order.push(cur);
            cur = next[cur];
            if cur == 0 || order.len() > next.len() {
                break;
            }
        }
        order
    }
}

/// Sattolo's algorithm: a uniformly random cyclic permutation, so following
/// `next` from any entry visits all `n` entries before returning.
pub fn sattolo_cycle<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut items: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..i);
        items.swap(i, j);
    }
    items
}

fn shuffle<T, R: Rng>(v: &mut [T], rng: &mut R) {
    for i in (1..v.len()).rev() {
        let j = rng.gen_range(0..=i);
        v.swap(i, j);
    }
}

/// Build `spec.mlp` pointer-chasing chains over lines supplied by `placer`.
pub fn build_parallel_lists(
    spec: &WorkloadSpec,
    placer: &dyn LinePlacer,
) -> Result<AccessProgram, WorkloadError> {
    if spec.kind.is_sequential() {
        return Err(WorkloadError::WrongKind {
            kind: spec.kind,
            expected: "linked-list",
        });
    }
    if spec.kind.is_bank_aware() && spec.target_bank.is_none() {
        return Err(WorkloadError::MissingTargetBank(spec.kind));
    }
    spec.validate()?;
    let needed = spec.lines() as usize;
    let mut pool = placer.candidates(needed)?;
    if pool.len() < needed {
        return Err(WorkloadError::NotEnoughLines {
            got: pool.len(),
            need: needed,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    shuffle(&mut pool, &mut rng);
    pool.truncate(needed);

    let mlp = spec.mlp.min(needed).max(1);
    let base = needed / mlp;
    let extra = needed % mlp;
    let mut layout = ListLayout {
        next: Vec::with_capacity(mlp),
    };
    let mut accesses = Vec::with_capacity(needed * if spec.kind.is_write() { 2 } else { 1 });
    let mut chain_starts = Vec::with_capacity(mlp + 1);
    let mut offset = 0;
    for c in 0..mlp {
        let size = base + usize::from(c < extra);
        let members = &pool[offset..offset + size];
        offset += size;
        let next = sattolo_cycle(size, &mut rng);
        layout.next.push(next);
        chain_starts.push(accesses.len());
        let mut ordinal = 0u32;
        for idx in layout.traversal(c) {
            let addr = members[idx];
            if spec.kind.is_write() {
                accesses.push(Access {
                    addr,
                    is_write: true,
                    chain: c as u32,
                    ordinal,
                });
                ordinal += 1;
            }
            accesses.push(Access {
                addr,
                is_write: false,
                chain: c as u32,
                ordinal,
            });
            ordinal += 1;
        }
    }
    chain_starts.push(accesses.len());
    Ok(AccessProgram {
        kind: spec.kind,
        accesses,
        chain_starts,
        dependent: true,
        laps: spec.iterations,
    })
}

/// Build any kind, choosing the placer from the kind. Bank-aware kinds need
/// the platform mapping.
pub fn build_program(
    spec: &WorkloadSpec,
    mapping: &AddressMapping,
    geom: &DramGeometry,
) -> Result<AccessProgram, WorkloadError> {
    if spec.kind.is_sequential() {
        build_sequential(spec)
    } else if spec.kind.is_bank_aware() {
        let bank = spec
            .target_bank
            .ok_or(WorkloadError::MissingTargetBank(spec.kind))?;
        build_parallel_lists(spec, &SameBank::new(mapping.clone(), *geom, bank))
    } else {
        build_parallel_lists(
            spec,
            &Unconstrained {
                working_set: spec.working_set,
                line_size: spec.line_size,
            },
        )
    }
}

/// A ready access: which chain it belongs to and its position in the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReadyAccess {
    pub chain: usize,
    pub index: usize,
    pub access: Access,
}

/// Per-program issue/completion bookkeeping.
#[derive(Debug, Clone)]
pub struct ProgramCursor {
    /// Next index to issue, per chain.
    next: Vec<usize>,
    in_flight: Vec<u32>,
    completed: u64,
    issued: u64,
}

impl ProgramCursor {
    pub fn new(program: &AccessProgram) -> Self {
        let chains = program.chain_count();
        Self {
            next: vec![0; chains],
            in_flight: vec![0; chains],
            completed: 0,
            issued: 0,
        }
    }

    pub fn completed(&self) -> u64 {
        self.completed
    }

    pub fn issued(&self) -> u64 {
        self.issued
    }

    pub fn outstanding(&self) -> u64 {
        self.issued - self.completed
    }

    /// Whole laps finished so far.
    pub fn laps_done(&self, program: &AccessProgram) -> u64 {
        if program.is_empty() {
            0
        } else {
            self.completed / program.len() as u64
        }
    }

    fn peek(&self, program: &AccessProgram, chain: usize) -> Option<ReadyAccess> {
        let len = program.chain_starts[chain + 1] - program.chain_starts[chain];
        if len == 0 {
            return None;
        }
        if program.dependent && self.in_flight[chain] > 0 {
            return None;
        }
        let index = self.next[chain];
        Some(ReadyAccess {
            chain,
            index,
            access: program.chain(chain)[index],
        })
    }

    /// Next access of `chain` if it may issue now.
    pub fn ready_in_chain(&self, program: &AccessProgram, chain: usize) -> Option<ReadyAccess> {
        self.peek(program, chain)
    }

    /// All accesses that may issue now. Dependent programs offer at most one
    /// per idle chain; sequential programs always offer their next access.
    pub fn ready_set(&self, program: &AccessProgram) -> Vec<ReadyAccess> {
        (0..program.chain_count())
            .filter_map(|c| self.peek(program, c))
            .collect()
    }

    pub fn issue(&mut self, program: &AccessProgram, chain: usize) {
        let len = program.chain_starts[chain + 1] - program.chain_starts[chain];
        self.next[chain] = (self.next[chain] + 1) % len;
        self.in_flight[chain] += 1;
        self.issued += 1;
    }

    pub fn complete(&mut self, chain: usize) {
        debug_assert!(self.in_flight[chain] > 0);
        self.in_flight[chain] -= 1;
        self.completed += 1;
    }
}

/// Per-bank count of accesses in `program`.
pub fn bank_histogram(
    program: &AccessProgram,
    mapping: &AddressMapping,
    geom: &DramGeometry,
) -> Vec<u64> {
    let mut hist = vec![0u64; geom.num_banks as usize];
    for a in program.accesses() {
        hist[mapping.bank_of(a.addr.line_aligned(geom.line_size)) as usize] += 1;
    }
    hist
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn sequential_addresses() {
        let p = build_sequential(&WorkloadSpec::new(WorkloadKind::SeqRead, 256)).unwrap();
        let addrs: Vec<u64> = p.accesses().iter().map(|a| a.addr.value()).collect();
        assert_eq!(addrs, vec![0, 64, 128, 192]);
        assert!(p.accesses().iter().all(|a| !a.is_write));
        assert!(!p.is_dependent());

        let w = build_sequential(&WorkloadSpec::new(WorkloadKind::SeqWrite, 256)).unwrap();
        assert!(w.accesses().iter().all(|a| a.is_write));
        assert_eq!(
            w.accesses().iter().map(|a| a.addr).collect::<Vec<_>>(),
            p.accesses().iter().map(|a| a.addr).collect::<Vec<_>>()
        );
    }

    #[test]
    fn sequential_errors() {
        let e = build_sequential(&WorkloadSpec::new(WorkloadKind::SeqRead, 32)).unwrap_err();
        assert!(matches!(e, WorkloadError::WorkingSetTooSmall { .. }));
        let e = build_sequential(&WorkloadSpec::new(WorkloadKind::PllRead, 4096)).unwrap_err();
        assert!(matches!(e, WorkloadError::WrongKind { .. }));
    }

    #[test]
    fn four_chains_of_sixteen() {
        let spec = WorkloadSpec::new(WorkloadKind::PllRead, 64 * 64)
            .with_mlp(4)
            .with_seed(9);
        let p = build_parallel_lists(
            &spec,
            &Unconstrained {
                working_set: spec.working_set,
                line_size: 64,
            },
        )
        .unwrap();
        assert_eq!(p.chain_count(), 4);
        for c in 0..4 {
            let chain = p.chain(c);
            assert_eq!(chain.len(), 16);
            let uniq: HashSet<_> = chain.iter().map(|a| a.addr).collect();
            assert_eq!(uniq.len(), 16);
        }
    }

    #[test]
    fn uneven_chain_sizes() {
        let spec = WorkloadSpec::new(WorkloadKind::PllRead, 10 * 64).with_mlp(3);
        let p = build_parallel_lists(
            &spec,
            &Unconstrained {
                working_set: spec.working_set,
                line_size: 64,
            },
        )
        .unwrap();
        let sizes: Vec<usize> = (0..3).map(|c| p.chain(c).len()).collect();
        assert_eq!(sizes, vec![4, 3, 3]);
    }

    #[test]
    fn mlp_one_is_a_single_chase() {
        let spec = WorkloadSpec::new(WorkloadKind::PllRead, 32 * 64).with_mlp(1);
        let p = build_parallel_lists(
            &spec,
            &Unconstrained {
                working_set: spec.working_set,
                line_size: 64,
            },
        )
        .unwrap();
        assert_eq!(p.chain_count(), 1);
        assert_eq!(p.len(), 32);
    }

    #[test]
    fn placer_shortfall() {
        let spec = WorkloadSpec::new(WorkloadKind::PllRead, 128 * 64).with_mlp(2);
        let e = build_parallel_lists(
            &spec,
            &Unconstrained {
                working_set: 64 * 64,
                line_size: 64,
            },
        )
        .unwrap_err();
        assert_eq!(e, WorkloadError::NotEnoughLines { got: 64, need: 128 });
    }

    #[test]
    fn bank_aware_purity() {
        let mapping = AddressMapping::from_bits(&[11, 12, 13, 14]).unwrap();
        let geom = DramGeometry::new(16, 2048, 64).unwrap();
        let spec = WorkloadSpec::new(WorkloadKind::BkPllRead, 2048 * 64)
            .with_mlp(6)
            .with_seed(3);
        let p = build_program(&spec, &mapping, &geom).unwrap();
        assert!(p.accesses().iter().all(|a| a.addr.value() & 0x7800 == 0));
        let hist = bank_histogram(&p, &mapping, &geom);
        assert_eq!(hist[0], p.len() as u64);
        assert_eq!(hist.iter().sum::<u64>(), p.len() as u64);
    }

    #[test]
    fn write_kind_pairs() {
        let spec = WorkloadSpec::new(WorkloadKind::PllWrite, 64 * 64).with_mlp(4);
        let p = build_parallel_lists(
            &spec,
            &Unconstrained {
                working_set: spec.working_set,
                line_size: 64,
            },
        )
        .unwrap();
        assert_eq!(p.len(), 128);
        for c in 0..4 {
            for pair in p.chain(c).chunks(2) {
                assert!(pair[0].is_write && !pair[1].is_write);
                assert_eq!(pair[0].addr, pair[1].addr);
            }
        }
    }

    #[test]
    fn ready_set_rules() {
        let spec = WorkloadSpec::new(WorkloadKind::PllRead, 64 * 64).with_mlp(4);
        let p = build_parallel_lists(
            &spec,
            &Unconstrained {
                working_set: spec.working_set,
                line_size: 64,
            },
        )
        .unwrap();
        let mut cur = ProgramCursor::new(&p);
        assert_eq!(cur.ready_set(&p).len(), 4);
        for c in 0..4 {
            cur.issue(&p, c);
        }
        assert!(cur.ready_set(&p).is_empty());
        cur.complete(2);
        let ready = cur.ready_set(&p);
        assert_eq!(ready.len(), 1);
        assert_eq!(ready[0].chain, 2);
        assert_eq!(ready[0].index, 1);

        let seq = build_sequential(&WorkloadSpec::new(WorkloadKind::SeqRead, 64 * 64)).unwrap();
        let mut cur = ProgramCursor::new(&seq);
        for _ in 0..10 {
            cur.issue(&seq, 0);
        }
        assert_eq!(cur.ready_set(&seq).len(), 1);
        assert_eq!(cur.ready_set(&seq)[0].index, 10);
    }

    #[test]
    fn empty_histogram() {
        let geom = DramGeometry::new(4, 2048, 64).unwrap();
        let mapping = AddressMapping::from_bits(&[11, 12]).unwrap();
        assert_eq!(
            bank_histogram(&AccessProgram::empty(), &mapping, &geom),
            vec![0; 4]
        );
    }

    #[test]
    fn sequential_histogram_is_uniform() {
        let geom = DramGeometry::new(16, 2048, 64).unwrap();
        let mapping = AddressMapping::from_bits(&[11, 12, 13, 14]).unwrap();
        let p = build_sequential(&WorkloadSpec::new(WorkloadKind::SeqRead, 2 << 20)).unwrap();
        let hist = bank_histogram(&p, &mapping, &geom);
        assert!(hist.iter().all(|&h| h == 2048));
    }

    #[test]
    fn kind_names_parse() {
        for k in WorkloadKind::ALL {
            assert_eq!(k.name().parse::<WorkloadKind>().unwrap(), k);
            assert_eq!(format!("{k:?}").parse::<WorkloadKind>().unwrap(), k);
        }
        assert!("nope".parse::<WorkloadKind>().is_err());
    }

    #[test]
    fn dump_format() {
        let p = build_sequential(&WorkloadSpec::new(WorkloadKind::SeqWrite, 128)).unwrap();
        assert_eq!(
            p.dump(),
            "chain=0 ord=0 addr=0x0 w=1\nchain=0 ord=1 addr=0x40 w=1\n"
        );
    }
}
