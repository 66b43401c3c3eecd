//! Physical address to DRAM coordinate decoding.
//!
//! A mapping is a list of bank functions. Bit `i` of the bank index is the
//! parity of the address bits selected by function `i`. The plain bitmask form
//! used by most embedded platforms is the special case where every function
//! selects a single bit.
//!
//! Rows and columns are recovered by *compressing* the address: one pivot bit
//! per bank function is removed and the remaining bits are concatenated in
//! order. The low bits of the compressed address give the column, the rest the
//! row.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use thiserror::Error;

/// Addresses are capped at 48 bits.
pub const ADDR_BITS: u32 = 48;
pub const MAX_BANK_BITS: usize = 8;
pub const PAGE_4K: u64 = 4 << 10;
pub const PAGE_2M: u64 = 2 << 20;
/// Offset bits of a 2 MiB page; everything below passes through translation.
pub const HUGEPAGE_SHIFT: u32 = 21;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AddrError {
    #[error("physical address {0:#x} exceeds 48 bits")]
    AddrTooWide(u64),
    #[error("bank bit {0} out of range (must be < 48)")]
    BitOutOfRange(u32),
    #[error("bank bits must be strictly increasing")]
    BitsNotIncreasing,
    #[error("mapping needs between 1 and 8 bank functions, got {0}")]
    BadFunctionCount(usize),
    #[error("xor function {0} selects no bits")]
    EmptyFunction(usize),
    #[error("xor functions are linearly dependent; bank index would not be injective")]
    DependentFunctions,
    #[error("{what} must be a power of two, got {value}")]
    NotPowerOfTwo { what: &'static str, value: u64 },
    #[error("line size {line} exceeds row size {row}")]
    LineLargerThanRow { line: u64, row: u64 },
    #[error("mapping has {bits} bank bits but geometry declares {banks} banks")]
    BankCountMismatch { bits: usize, banks: u64 },
    #[error("bank bit {bit} lies inside the line offset (line size {line})")]
    BankBitInsideLine { bit: u32, line: u64 },
    #[error("BankBitsNotControllable: bank bit {bit} >= {limit}, not controllable from within a hugepage")]
    BankBitsNotControllable { bit: u32, limit: u32 },
    #[error("unsupported page size {0} (expected 4096 or 2097152)")]
    UnsupportedPageSize(u64),
    #[error("hugepage region base {0:#x} is not 2 MiB aligned")]
    UnalignedRegion(u64),
    #[error("hugepage region size {0} is not a positive multiple of 2 MiB")]
    BadRegionSize(u64),
    #[error("target bank {bank} out of range ({banks} banks)")]
    BankOutOfRange { bank: u64, banks: u64 },
    #[error("mapping file line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PhysAddr(u64);

impl PhysAddr {
    pub fn new(value: u64) -> Result<Self, AddrError> {
        if value >> ADDR_BITS != 0 {
            return Err(AddrError::AddrTooWide(value));
        }
        Ok(Self(value))
    }

    /// Caller guarantees `value < 2^48`.
    pub(crate) const fn new_unchecked(value: u64) -> Self {
        Self(value)
    }

    pub const fn value(self) -> u64 {
        self.0
    }

    pub const fn line_aligned(self, line_size: u64) -> Self {
        Self(self.0 & !(line_size - 1))
    }

    pub const fn bit(self, pos: u32) -> bool {
        (self.0 >> pos) & 1 == 1
    }
}

impl fmt::Display for PhysAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

/// Ordered set of address bits that select the bank, lowest bit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BankMask {
    bits: Vec<u32>,
}

impl BankMask {
    pub fn new(bits: impl Into<Vec<u32>>) -> Result<Self, AddrError> {
        let bits = bits.into();
        if bits.is_empty() || bits.len() > MAX_BANK_BITS {
            return Err(AddrError::BadFunctionCount(bits.len()));
        }
        for w in bits.windows(2) {
            if w[0] >= w[1] {
                return Err(AddrError::BitsNotIncreasing);
            }
        }
        if let Some(&b) = bits.iter().find(|&&b| b >= ADDR_BITS) {
            return Err(AddrError::BitOutOfRange(b));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[u32] {
        &self.bits
    }

    /// The mask as a raw word, as the platform tables list it.
    pub fn as_word(&self) -> u64 {
        self.bits.iter().fold(0, |m, &b| m | (1 << b))
    }
}

/// Walk the set bits of the mask in ascending order; bit `i` of the result is
/// the address bit found at the `i`-th mask position.
pub fn bank_of_mask(mask: &BankMask, addr: PhysAddr) -> u64 {
    let mut word = mask.as_word();
    let mut bank = 0u64;
    let mut idx = 0;
    while word != 0 {
        let bit = word.trailing_zeros();
        bank |= ((addr.value() >> bit) & 1) << idx;
        idx += 1;
        word &= word - 1;
    }
    bank
}

/// Bank functions expressed as XOR reductions over address-bit sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct XorMapping {
    /// One bit-selection word per bank bit, lowest bank bit first.
    functions: Vec<u64>,
}

impl XorMapping {
    pub fn new(functions: &[Vec<u32>]) -> Result<Self, AddrError> {
        let mut words = Vec::with_capacity(functions.len());
        for (i, set) in functions.iter().enumerate() {
            if set.is_empty() {
                return Err(AddrError::EmptyFunction(i));
            }
            let mut w = 0u64;
            for &b in set {
                if b >= ADDR_BITS {
                    return Err(AddrError::BitOutOfRange(b));
                }
                w |= 1 << b;
            }
            words.push(w);
        }
        Self::from_words(words)
    }

    pub fn from_words(functions: Vec<u64>) -> Result<Self, AddrError> {
        if functions.is_empty() || functions.len() > MAX_BANK_BITS {
            return Err(AddrError::BadFunctionCount(functions.len()));
        }
        for (i, &w) in functions.iter().enumerate() {
            if w == 0 {
                return Err(AddrError::EmptyFunction(i));
            }
            if w >> ADDR_BITS != 0 {
                return Err(AddrError::BitOutOfRange(63 - w.leading_zeros()));
            }
        }
        Ok(Self { functions })
    }

    pub fn functions(&self) -> &[u64] {
        &self.functions
    }

    pub fn bit_sets(&self) -> Vec<Vec<u32>> {
        self.functions.iter().map(|&w| bits_of(w)).collect()
    }
}

pub fn bank_of_xor(xm: &XorMapping, addr: PhysAddr) -> u64 {
    xm.functions.iter().enumerate().fold(0, |bank, (i, &f)| {
        bank | (u64::from((addr.value() & f).count_ones() & 1) << i)
    })
}

fn bits_of(mut w: u64) -> Vec<u32> {
    let mut out = Vec::new();
    while w != 0 {
        out.push(w.trailing_zeros());
        w &= w - 1;
    }
    out
}

/// The canonical mapping: XOR functions plus the pivot bits removed when
/// compressing an address into row/column space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AddressMapping {
    xor: XorMapping,
    /// Mask of pivot bits, one per function.
    pivots: u64,
}

impl AddressMapping {
    pub fn from_mask(mask: &BankMask) -> Self {
        let funcs = mask.bits().iter().map(|&b| 1u64 << b).collect();
        // Singleton functions are always independent.
        let xor = XorMapping { functions: funcs };
        let pivots = mask.as_word();
        Self { xor, pivots }
    }

    pub fn from_bits(bits: &[u32]) -> Result<Self, AddrError> {
        Ok(Self::from_mask(&BankMask::new(bits.to_vec())?))
    }

    /// Pivot of each function is its lowest bit not already claimed; the
    /// pivot columns must form an invertible matrix so decoding stays injective.
    pub fn from_xor(xor: XorMapping) -> Result<Self, AddrError> {
        let pivots = choose_pivots(xor.functions()).ok_or(AddrError::DependentFunctions)?;
        Ok(Self { xor, pivots })
    }

    pub fn bank_bits(&self) -> usize {
        self.xor.functions.len()
    }

    pub fn num_banks(&self) -> u64 {
        1 << self.bank_bits()
    }

    pub fn xor(&self) -> &XorMapping {
        &self.xor
    }

    /// Some(mask) when every function is a single bit.
    pub fn as_mask(&self) -> Option<BankMask> {
        if self.xor.functions.iter().all(|f| f.count_ones() == 1) {
            let mut bits: Vec<u32> = self
                .xor
                .functions
                .iter()
                .map(|f| f.trailing_zeros())
                .collect();
            let sorted = bits.windows(2).all(|w| w[0] < w[1]);
            if sorted {
                bits.dedup();
                return BankMask::new(bits).ok();
            }
        }
        None
    }

    /// Every address bit that participates in any bank function.
    pub fn involved_bits(&self) -> u64 {
        self.xor.functions.iter().fold(0, |m, f| m | f)
    }

    pub fn pivot_bits(&self) -> u64 {
        self.pivots
    }

    pub fn bank_of(&self, addr: PhysAddr) -> u64 {
        bank_of_xor(&self.xor, addr)
    }

    /// Remove the pivot bits and concatenate the rest, preserving order.
    pub fn compress(&self, addr: PhysAddr) -> u64 {
        compress_bits(addr.value(), self.pivots)
    }

    /// Fails with `BankBitsNotControllable` when a bank function reads a bit
    /// at or above `limit`.
    pub fn check_controllable(&self, limit: u32) -> Result<(), AddrError> {
        let high = self.involved_bits() >> limit;
        if high != 0 {
            let bit = limit + high.trailing_zeros();
            return Err(AddrError::BankBitsNotControllable { bit, limit });
        }
        Ok(())
    }
}

impl fmt::Display for AddressMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, func) in self.xor.functions.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            let bits = bits_of(*func);
            let parts: Vec<String> = bits.iter().map(u32::to_string).collect();
            f.write_str(&parts.join("^"))?;
        }
        Ok(())
    }
}

/// Parallel-extract style compression: drop bits set in `remove`.
fn compress_bits(value: u64, remove: u64) -> u64 {
    let mut out = 0u64;
    let mut rest = value;
    let mut shift = 0;
    let mut rem = remove;
    // Copy contiguous runs between removed bits.
    while rem != 0 {
        let pos = rem.trailing_zeros();
        let run = rest & ((1u64 << pos) - 1);
        out |= run << shift;
        shift += pos;
        rest = (rest >> pos) >> 1;
        rem = (rem >> pos) >> 1;
    }
    out | (rest << shift)
}

fn choose_pivots(funcs: &[u64]) -> Option<u64> {
    // Gaussian elimination over GF(2); each row's leading (lowest) bit after
    // reduction becomes its pivot.
    let mut rows: Vec<u64> = funcs.to_vec();
    let mut pivots = 0u64;
    for i in 0..rows.len() {
        let row = rows[i];
        if row == 0 {
            return None;
        }
        let p = row.trailing_zeros();
        pivots |= 1 << p;
        for r in rows.iter_mut().skip(i + 1) {
            if (*r >> p) & 1 == 1 {
                *r ^= row;
            }
        }
    }
    Some(pivots)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DramGeometry {
    pub num_banks: u64,
    pub row_size: u64,
    pub line_size: u64,
}

impl DramGeometry {
    pub fn new(num_banks: u64, row_size: u64, line_size: u64) -> Result<Self, AddrError> {
        for (what, value) in [
            ("num_banks", num_banks),
            ("row_size", row_size),
            ("line_size", line_size),
        ] {
            if !value.is_power_of_two() {
                return Err(AddrError::NotPowerOfTwo { what, value });
            }
        }
        if line_size > row_size {
            return Err(AddrError::LineLargerThanRow {
                line: line_size,
                row: row_size,
            });
        }
        Ok(Self {
            num_banks,
            row_size,
            line_size,
        })
    }

    pub fn cols_per_row(&self) -> u64 {
        self.row_size / self.line_size
    }

    pub fn line_shift(&self) -> u32 {
        self.line_size.trailing_zeros()
    }

    pub fn row_shift(&self) -> u32 {
        self.row_size.trailing_zeros()
    }

    pub fn validate(&self, mapping: &AddressMapping) -> Result<(), AddrError> {
        if mapping.num_banks() != self.num_banks {
            return Err(AddrError::BankCountMismatch {
                bits: mapping.bank_bits(),
                banks: self.num_banks,
            });
        }
        let low = mapping.pivot_bits() & (self.line_size - 1);
        if low != 0 {
            return Err(AddrError::BankBitInsideLine {
                bit: low.trailing_zeros(),
                line: self.line_size,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DramCoord {
    pub bank: u64,
    pub row: u64,
    pub col: u64,
}

pub fn coord_of(
    geom: &DramGeometry,
    mapping: &AddressMapping,
    addr: PhysAddr,
) -> Result<DramCoord, AddrError> {
    geom.validate(mapping)?;
    Ok(coord_of_unchecked(geom, mapping, addr))
}

/// `coord_of` without re-validating the geometry on every call.
pub fn coord_of_unchecked(
    geom: &DramGeometry,
    mapping: &AddressMapping,
    addr: PhysAddr,
) -> DramCoord {
    let line = addr.line_aligned(geom.line_size);
    let bank = mapping.bank_of(line);
    let compressed = mapping.compress(line);
    let col = (compressed >> geom.line_shift()) & (geom.cols_per_row() - 1);
    let row = compressed >> geom.row_shift();
    DramCoord { bank, row, col }
}

/// Address bits a user-level process controls for a given page size.
pub fn controllable_bits(page_size: u64) -> Result<Range<u32>, AddrError> {
    match page_size {
        PAGE_4K => Ok(0..12),
        PAGE_2M => Ok(0..HUGEPAGE_SHIFT),
        other => Err(AddrError::UnsupportedPageSize(other)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HugePageRegion {
    base: PhysAddr,
    size: u64,
}

impl HugePageRegion {
    pub fn new(base: PhysAddr, size: u64) -> Result<Self, AddrError> {
        if !base.value().is_multiple_of(PAGE_2M) {
            return Err(AddrError::UnalignedRegion(base.value()));
        }
        if size == 0 || !size.is_multiple_of(PAGE_2M) {
            return Err(AddrError::BadRegionSize(size));
        }
        PhysAddr::new(base.value() + size - 1)?;
        Ok(Self { base, size })
    }

    pub fn base(&self) -> PhysAddr {
        self.base
    }

    pub fn size(&self) -> u64 {
        self.size
    }
}

/// Every line of `region` whose bank is `target_bank`, ascending.
///
/// Candidate lines are filtered by bank; the filter only makes sense when the
/// bank bits sit inside the hugepage offset, so mappings reading higher bits
/// are rejected.
pub fn same_bank_lines(
    region: &HugePageRegion,
    mapping: &AddressMapping,
    geom: &DramGeometry,
    target_bank: u64,
) -> Result<Vec<PhysAddr>, AddrError> {
    mapping.check_controllable(HUGEPAGE_SHIFT)?;
    geom.validate(mapping)?;
    if target_bank >= geom.num_banks {
        return Err(AddrError::BankOutOfRange {
            bank: target_bank,
            banks: geom.num_banks,
        });
    }
    let start = region.base.value();
    let lines = region.size / geom.line_size;
    let out = (0..lines)
        .map(|i| PhysAddr::new_unchecked(start + i * geom.line_size))
        .filter(|&a| mapping.bank_of(a) == target_bank)
        .collect();
    Ok(out)
}

/// Mapping file contents: the bank functions plus the geometry header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingFile {
    pub mapping: AddressMapping,
    pub geometry: DramGeometry,
}

impl MappingFile {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("banks {}\n", self.geometry.num_banks));
        s.push_str(&format!("row_size {}\n", self.geometry.row_size));
        s.push_str(&format!("line_size {}\n", self.geometry.line_size));
        for set in self.mapping.xor().bit_sets() {
            if set.len() == 1 {
                s.push_str(&format!("bit {}\n", set[0]));
            } else {
                let parts: Vec<String> = set.iter().map(u32::to_string).collect();
                s.push_str(&format!("xor {}\n", parts.join(" ")));
            }
        }
        s
    }
}

impl FromStr for MappingFile {
    type Err = AddrError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut funcs: Vec<u64> = Vec::new();
        let mut all_single = true;
        let mut banks = None;
        let mut row_size = None;
        let mut line_size = 64;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |msg: String| AddrError::Parse { line: line_no, msg };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut words = content.split_whitespace();
            let key = words.next().unwrap_or_default();
            let args: Vec<&str> = words.collect();
            let num = |s: &str| crate::config::parse_size(s).map_err(|e| err(e.to_string()));
            match key {
                "bit" | "xor" => {
                    if args.is_empty() || (key == "bit" && args.len() != 1) {
                        return Err(err(format!(
                            "`{key}` expects {} bit position(s)",
                            if key == "bit" { "one" } else { "one or more" }
                        )));
                    }
                    let mut w = 0u64;
                    for a in &args {
                        let b: u32 = a
                            .parse()
                            .map_err(|_| err(format!("bad bit position `{a}`")))?;
                        if b >= ADDR_BITS {
                            return Err(err(format!("bit {b} out of range")));
                        }
                        w ^= 1 << b;
                    }
                    if w == 0 {
                        return Err(err("xor function cancels to empty".into()));
                    }
                    all_single &= w.count_ones() == 1;
                    funcs.push(w);
                }
                "banks" | "row_size" | "line_size" => {
                    if args.len() != 1 {
                        return Err(err(format!("`{key}` expects one value")));
                    }
                    let v = num(args[0])?;
                    match key {
                        "banks" => banks = Some(v),
                        "row_size" => row_size = Some(v),
                        _ => line_size = v,
                    }
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }
        let last = text.lines().count().max(1);
        let at_end = |msg: &str| AddrError::Parse {
            line: last,
            msg: msg.into(),
        };
        if funcs.is_empty() {
            return Err(at_end("no `bit` or `xor` lines"));
        }
        let mapping = if all_single {
            let mut bits: Vec<u32> = funcs.iter().map(|f| f.trailing_zeros()).collect();
            bits.sort_unstable();
            if bits.windows(2).any(|w| w[0] == w[1]) {
                return Err(at_end("duplicate bank bit"));
            }
            let order_ok = funcs.windows(2).all(|w| w[0] < w[1]);
            if order_ok {
                AddressMapping::from_mask(&BankMask::new(bits)?)
            } else {
                AddressMapping::from_xor(XorMapping::from_words(funcs)?)?
            }
        } else {
            AddressMapping::from_xor(XorMapping::from_words(funcs)?)?
        };
        let banks = banks.unwrap_or(mapping.num_banks());
        let row_size = row_size.ok_or_else(|| at_end("missing `row_size`"))?;
        let geometry = DramGeometry::new(banks, row_size, line_size)?;
        geometry.validate(&mapping)?;
        Ok(Self { mapping, geometry })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pa(v: u64) -> PhysAddr {
        PhysAddr::new(v).unwrap()
    }

    fn xu4_mask() -> BankMask {
        BankMask::new(vec![8, 13, 14, 15, 16]).unwrap()
    }

    #[test]
    fn mask_examples() {
        assert_eq!(bank_of_mask(&xu4_mask(), pa(0)), 0);
        assert_eq!(bank_of_mask(&xu4_mask(), pa(1 << 13)), 2);
        assert_eq!(bank_of_mask(&xu4_mask(), pa((1 << 8) + (1 << 16))), 17);
        assert_eq!(xu4_mask().as_word(), 0x1E100);
    }

    #[test]
    fn xor_examples() {
        let a = XorMapping::new(&[vec![13], vec![14]]).unwrap();
        assert_eq!(bank_of_xor(&a, pa(0)), 0);
        let b = XorMapping::new(&[vec![13, 16]]).unwrap();
        assert_eq!(bank_of_xor(&b, pa((1 << 13) + (1 << 16))), 0);
        let c = XorMapping::new(&[vec![13, 16], vec![14]]).unwrap();
        assert_eq!(bank_of_xor(&c, pa((1 << 16) + (1 << 14))), 3);
    }

    #[test]
    fn mask_validation() {
        assert_eq!(BankMask::new(vec![]), Err(AddrError::BadFunctionCount(0)));
        assert_eq!(BankMask::new(vec![3, 3]), Err(AddrError::BitsNotIncreasing));
        assert_eq!(BankMask::new(vec![48]), Err(AddrError::BitOutOfRange(48)));
        assert!(BankMask::new((10..19).collect::<Vec<_>>()).is_err());
        assert!(PhysAddr::new(1 << 48).is_err());
    }

    #[test]
    fn coord_examples() {
        let geom = DramGeometry::new(8, 32 << 10, 64).unwrap();
        let m = AddressMapping::from_bits(&[11, 12, 13]).unwrap();
        assert_eq!(
            coord_of(&geom, &m, pa(0)).unwrap(),
            DramCoord {
                bank: 0,
                row: 0,
                col: 0
            }
        );
        assert_eq!(
            coord_of(&geom, &m, pa(1 << 11)).unwrap(),
            DramCoord {
                bank: 1,
                row: 0,
                col: 0
            }
        );
        // 2^20 compresses to 2^17 once bits 11..13 are dropped.
        assert_eq!(
            coord_of(&geom, &m, pa(1 << 20)).unwrap(),
            DramCoord {
                bank: 0,
                row: 4,
                col: 0
            }
        );
        let bad = AddressMapping::from_bits(&[11, 12]).unwrap();
        assert!(matches!(
            coord_of(&geom, &bad, pa(0)),
            Err(AddrError::BankCountMismatch { .. })
        ));
    }

    #[test]
    fn coord_truncates_to_line() {
        let geom = DramGeometry::new(8, 32 << 10, 64).unwrap();
        let m = AddressMapping::from_bits(&[11, 12, 13]).unwrap();
        assert_eq!(
            coord_of(&geom, &m, pa(0x47)).unwrap(),
            coord_of(&geom, &m, pa(0x40)).unwrap()
        );
        assert_eq!(coord_of(&geom, &m, pa(0x40)).unwrap().col, 1);
    }

    #[test]
    fn controllable_ranges() {
        assert_eq!(controllable_bits(4096).unwrap(), 0..12);
        assert_eq!(controllable_bits(2 << 20).unwrap(), 0..21);
        let r = controllable_bits(2 << 20).unwrap();
        assert!([11, 12, 13, 14].iter().all(|b| r.contains(b)));
        assert_eq!(
            controllable_bits(8192),
            Err(AddrError::UnsupportedPageSize(8192))
        );
    }

    #[test]
    fn same_bank_counts() {
        let region = HugePageRegion::new(pa(0), 2 << 20).unwrap();
        let m = AddressMapping::from_bits(&[11, 12, 13, 14]).unwrap();
        let geom = DramGeometry::new(16, 2 << 10, 64).unwrap();
        let lines = same_bank_lines(&region, &m, &geom, 0).unwrap();
        assert_eq!(lines.len(), 2048);
        assert!(lines.iter().all(|a| a.value() & 0x7800 == 0));

        let m1 = AddressMapping::from_bits(&[11]).unwrap();
        let g1 = DramGeometry::new(2, 2 << 10, 64).unwrap();
        let lines = same_bank_lines(&region, &m1, &g1, 1).unwrap();
        assert_eq!(lines.len(), 16384);
        assert!(lines.iter().all(|a| a.bit(11)));
    }

    #[test]
    fn same_bank_rejects_high_bits() {
        let region = HugePageRegion::new(pa(0), 2 << 20).unwrap();
        let m = AddressMapping::from_bits(&[22]).unwrap();
        let geom = DramGeometry::new(2, 2 << 10, 64).unwrap();
        let err = same_bank_lines(&region, &m, &geom, 0).unwrap_err();
        assert_eq!(
            err,
            AddrError::BankBitsNotControllable { bit: 22, limit: 21 }
        );
    }

    #[test]
    fn region_validation() {
        assert!(HugePageRegion::new(pa(4096), 2 << 20).is_err());
        assert!(HugePageRegion::new(pa(0), 4096).is_err());
        assert!(HugePageRegion::new(pa(0), 0).is_err());
    }

    #[test]
    fn xor_pivots_and_dependence() {
        let dep = XorMapping::new(&[vec![13, 14], vec![13, 14]]).unwrap();
        assert_eq!(
            AddressMapping::from_xor(dep),
            Err(AddrError::DependentFunctions)
        );
        let ok = XorMapping::new(&[vec![13, 17], vec![14, 18]]).unwrap();
        let m = AddressMapping::from_xor(ok).unwrap();
        assert_eq!(m.pivot_bits(), (1 << 13) | (1 << 14));
    }

    #[test]
    fn compress_drops_bits() {
        assert_eq!(compress_bits(0b1011, 0b0010), 0b101);
        assert_eq!(compress_bits(u64::MAX >> 16, 0), u64::MAX >> 16);
        assert_eq!(compress_bits(1 << 20, 0b111 << 11), 1 << 17);
    }

    #[test]
    fn mapping_file_parse() {
        let text =
            "# xu4\nbanks 32\nrow_size 2KiB\nline_size 64\nbit 8\nbit 13\nbit 14\nbit 15\nbit 16\n";
        let mf: MappingFile = text.parse().unwrap();
        assert_eq!(mf.mapping.as_mask().unwrap().bits(), &[8, 13, 14, 15, 16]);
        assert_eq!(mf.geometry.row_size, 2048);
        let again: MappingFile = mf.to_text().parse().unwrap();
        assert_eq!(again, mf);

        let xor: MappingFile = "row_size 8192\nxor 13 16\nbit 14\n".parse().unwrap();
        assert_eq!(xor.geometry.num_banks, 4);
        assert_eq!(xor.mapping.as_mask(), None);

        let err = "row_size 8192\nbit 13\nbogus 4\n"
            .parse::<MappingFile>()
            .unwrap_err();
        assert!(matches!(err, AddrError::Parse { line: 3, .. }));
        let err = "row_size 8192\nbanks 8\nbit 13\n"
            .parse::<MappingFile>()
            .unwrap_err();
        assert!(matches!(err, AddrError::BankCountMismatch { .. }));
    }
}
