//! Hit/miss sequences and the per-sequence conditional statistics.
//!
//! A position is *eligible* for a run condition of length `m` when the `m`
//! flips immediately before it all match the condition (all hits or all
//! misses). The statistic counts how many eligible positions are hits. The
//! final flip is never a conditioning flip but is counted as the outcome of
//! an earlier eligible position.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ratio::Ratio;

/// Longest sequence that fits the packed single-word representation.
pub const MAX_PACKED_LEN: usize = 64;

/// Longest unpacked sequence accepted anywhere in the crate.
pub const MAX_UNPACKED_LEN: usize = 1 << 16;

/// A packed binary record of up to 64 flips. Bit `i` is set iff flip `i`
/// (zero-based, in time order) is a hit.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequence {
    bits: u64,
    len: u8,
}

#[inline]
pub(crate) fn len_mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

impl Sequence {
    /// Builds a sequence from raw bits; bits at or above `len` must be clear.
    pub fn from_bits(bits: u64, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidLength);
        }
        if len > MAX_PACKED_LEN {
            return Err(Error::TooLong { len, max: MAX_PACKED_LEN });
        }
        Ok(Sequence { bits: bits & len_mask(len), len: len as u8 })
    }

    pub(crate) fn from_bits_unchecked(bits: u64, len: usize) -> Self {
        debug_assert!((1..=MAX_PACKED_LEN).contains(&len));
        debug_assert_eq!(bits & !len_mask(len), 0);
        Sequence { bits, len: len as u8 }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let flips = parse_flips(text, MAX_PACKED_LEN)?;
        let bits = flips
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &hit)| acc | ((hit as u64) << i));
        Ok(Sequence { bits, len: flips.len() as u8 })
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_hit(&self, index: usize) -> bool {
        index < self.len() && (self.bits >> index) & 1 == 1
    }

    pub fn hits(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn complement(&self) -> Self {
        Sequence { bits: !self.bits & len_mask(self.len()), len: self.len }
    }

    /// Bitmask of eligible positions (zero-based) for a run of `run` flips
    /// on the given side.
    pub fn eligible_mask(&self, side: RunSide, run: u32) -> u64 {
        let len = self.len();
        let mask = len_mask(len);
        let source = match side {
            RunSide::Hits => self.bits,
            RunSide::Misses => !self.bits & mask,
        };
        if run as usize >= len {
            return 0;
        }
        (1..=run).fold(mask, |acc, j| acc & (source << j))
    }

    pub fn to_outcomes(&self) -> Outcomes {
        Outcomes { flips: (0..self.len()).map(|i| self.is_hit(i)).collect() }
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len()).map(|i| if self.is_hit(i) { 'H' } else { 'T' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sequence({self})")
    }
}

impl FromStr for Sequence {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Sequence::parse(s)
    }
}

impl Serialize for Sequence {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// An unpacked hit/miss record for lengths beyond a single word (season-scale
/// data, up to 2^16 flips).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Outcomes {
    flips: Vec<bool>,
}

impl Outcomes {
    pub fn new(flips: Vec<bool>) -> Result<Self> {
        if flips.is_empty() {
            return Err(Error::InvalidLength);
        }
        if flips.len() > MAX_UNPACKED_LEN {
            return Err(Error::TooLong { len: flips.len(), max: MAX_UNPACKED_LEN });
        }
        Ok(Outcomes { flips })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(Outcomes { flips: parse_flips(text, MAX_UNPACKED_LEN)? })
    }

    pub fn flips(&self) -> &[bool] {
        &self.flips
    }

    pub fn len(&self) -> usize {
        self.flips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flips.is_empty()
    }

    pub fn is_hit(&self, index: usize) -> bool {
        self.flips.get(index).copied().unwrap_or(false)
    }

    pub fn hits(&self) -> u32 {
        self.flips.iter().filter(|&&h| h).count() as u32
    }

    /// The packed form, when the record is short enough.
    pub fn to_packed(&self) -> Option<Sequence> {
        (self.len() <= MAX_PACKED_LEN).then(|| {
            let bits = self
                .flips
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &hit)| acc | ((hit as u64) << i));
            Sequence::from_bits_unchecked(bits, self.len())
        })
    }

    /// Zero-based eligible positions for a run of `run` flips on `side`.
    pub fn eligible_positions(&self, side: RunSide, run: u32) -> Vec<usize> {
        let mut out = Vec::new();
        let mut streak = 0u32;
        for (t, &hit) in self.flips.iter().enumerate() {
            if streak >= run && t >= run as usize {
                out.push(t);
            }
            streak = if hit == side.is_hit() { streak + 1 } else { 0 };
        }
        out
    }
}

impl fmt::Display for Outcomes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.flips.iter().map(|&h| if h { 'H' } else { 'T' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for Outcomes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Outcomes({self})")
    }
}

impl FromStr for Outcomes {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Outcomes::parse(s)
    }
}

impl Serialize for Outcomes {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

fn parse_flips(text: &str, max: usize) -> Result<Vec<bool>> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(Error::EmptyInput);
    }
    let flips = trimmed
        .chars()
        .enumerate()
        .map(|(position, c)| match c {
            'H' | 'h' => Ok(true),
            'T' | 't' => Ok(false),
            found => Err(Error::InvalidCharacter { position, found }),
        })
        .collect::<Result<Vec<_>>>()?;
    if flips.len() > max {
        return Err(Error::TooLong { len: flips.len(), max });
    }
    Ok(flips)
}

/// Which flips form the conditioning run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunSide {
    Hits,
    Misses,
}

impl RunSide {
    fn is_hit(self) -> bool {
        matches!(self, RunSide::Hits)
    }
}

/// Which conditional statistic to compute; the payload is the conditioning
/// run length `m >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "run", rename_all = "snake_case")]
pub enum StatKind {
    /// Frequency of hits right after `m` consecutive hits. `m = 1` is the
    /// HH-percentage.
    AfterHitRun(u32),
    /// Frequency of hits right after `m` consecutive misses. `m = 1` is the
    /// TH-percentage.
    AfterMissRun(u32),
    /// Hit-run frequency minus miss-run frequency (the D statistic for `m = 1`).
    Difference(u32),
}

impl StatKind {
    pub fn run(&self) -> u32 {
        match *self {
            StatKind::AfterHitRun(m) | StatKind::AfterMissRun(m) | StatKind::Difference(m) => m,
        }
    }

    pub fn is_difference(&self) -> bool {
        matches!(self, StatKind::Difference(_))
    }

    pub fn validate(&self) -> Result<()> {
        if self.run() == 0 {
            return Err(Error::InvalidRunLength);
        }
        Ok(())
    }

    /// Checks the run length against a sequence length.
    pub fn check_len(&self, len: usize) -> Result<()> {
        self.validate()?;
        if self.run() as usize >= len {
            return Err(Error::RunTooLong { run: self.run(), len });
        }
        Ok(())
    }

    /// Same run length, H/T roles swapped. Differences map to themselves.
    pub fn mirrored(&self) -> StatKind {
        match *self {
            StatKind::AfterHitRun(m) => StatKind::AfterMissRun(m),
            StatKind::AfterMissRun(m) => StatKind::AfterHitRun(m),
            d @ StatKind::Difference(_) => d,
        }
    }

    pub fn tally<F: Flips + ?Sized>(&self, flips: &F) -> StatTally {
        match *self {
            StatKind::AfterHitRun(m) => StatTally::Single(flips.tally(RunSide::Hits, m)),
            StatKind::AfterMissRun(m) => StatTally::Single(flips.tally(RunSide::Misses, m)),
            StatKind::Difference(m) => {
                StatTally::Pair(flips.tally(RunSide::Hits, m), flips.tally(RunSide::Misses, m))
            }
        }
    }
}

impl fmt::Display for StatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatKind::AfterHitRun(m) => write!(f, "after-hits({m})"),
            StatKind::AfterMissRun(m) => write!(f, "after-misses({m})"),
            StatKind::Difference(m) => write!(f, "difference({m})"),
        }
    }
}

/// Counts of eligible positions and of hits among them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Tally {
    pub eligible: u32,
    pub successes: u32,
}

impl Tally {
    pub fn freq(&self) -> Option<Ratio> {
        Ratio::from_counts(self.successes as u64, self.eligible as u64)
    }
}

impl std::ops::AddAssign for Tally {
    fn add_assign(&mut self, rhs: Tally) {
        self.eligible += rhs.eligible;
        self.successes += rhs.successes;
    }
}

/// Raw counts behind one statistic value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(untagged)]
pub enum StatTally {
    Single(Tally),
    /// Hit-run side, miss-run side.
    Pair(Tally, Tally),
}

impl StatTally {
    /// The statistic, or `None` when undefined.
    pub fn value(&self) -> Option<Ratio> {
        match self {
            StatTally::Single(t) => t.freq(),
            StatTally::Pair(h, m) => Some(h.freq()? - m.freq()?),
        }
    }

    pub fn merge(&mut self, other: &StatTally) {
        match (self, other) {
            (StatTally::Single(a), StatTally::Single(b)) => *a += *b,
            (StatTally::Pair(a1, a2), StatTally::Pair(b1, b2)) => {
                *a1 += *b1;
                *a2 += *b2;
            }
            _ => panic!("cannot merge tallies of different statistics"),
        }
    }

    pub fn empty_like(kind: StatKind) -> StatTally {
        if kind.is_difference() {
            StatTally::Pair(Tally::default(), Tally::default())
        } else {
            StatTally::Single(Tally::default())
        }
    }
}

/// Anything that can be scanned for conditional statistics.
pub trait Flips {
    fn flip_count(&self) -> usize;
    fn tally(&self, side: RunSide, run: u32) -> Tally;
}

impl Flips for Sequence {
    fn flip_count(&self) -> usize {
        self.len()
    }

    #[inline]
    fn tally(&self, side: RunSide, run: u32) -> Tally {
        let eligible = self.eligible_mask(side, run);
        Tally {
            eligible: eligible.count_ones(),
            successes: (eligible & self.bits).count_ones(),
        }
    }
}

impl Flips for Outcomes {
    fn flip_count(&self) -> usize {
        self.len()
    }

    fn tally(&self, side: RunSide, run: u32) -> Tally {
        let mut tally = Tally::default();
        let mut streak = 0u32;
        for (t, &hit) in self.flips.iter().enumerate() {
            if streak >= run && t >= run as usize {
                tally.eligible += 1;
                tally.successes += hit as u32;
            }
            streak = if hit == side.is_hit() { streak.saturating_add(1) } else { 0 };
        }
        tally
    }
}

/// One-based indices of the trials counted by a run-conditioned frequency.
pub fn eligible_trials(seq: &Sequence, kind: StatKind) -> Result<Vec<usize>> {
    let side = frequency_side(kind)?;
    kind.check_len(seq.len())?;
    let mut mask = seq.eligible_mask(side, kind.run());
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    while mask != 0 {
        out.push(mask.trailing_zeros() as usize + 1);
        mask &= mask - 1;
    }
    Ok(out)
}

/// Hit frequency among eligible trials; `Ok(None)` when no trial is eligible.
pub fn conditional_freq<F: Flips + ?Sized>(flips: &F, kind: StatKind) -> Result<Option<Ratio>> {
    let side = frequency_side(kind)?;
    kind.check_len(flips.flip_count())?;
    Ok(flips.tally(side, kind.run()).freq())
}

/// Hit-run frequency minus miss-run frequency; `Ok(None)` if either side is
/// undefined.
pub fn d_statistic<F: Flips + ?Sized>(flips: &F, run: u32) -> Result<Option<Ratio>> {
    statistic(flips, StatKind::Difference(run))
}

/// Any [`StatKind`] evaluated on one sequence.
pub fn statistic<F: Flips + ?Sized>(flips: &F, kind: StatKind) -> Result<Option<Ratio>> {
    kind.check_len(flips.flip_count())?;
    Ok(kind.tally(flips).value())
}

fn frequency_side(kind: StatKind) -> Result<RunSide> {
    match kind {
        StatKind::AfterHitRun(_) => Ok(RunSide::Hits),
        StatKind::AfterMissRun(_) => Ok(RunSide::Misses),
        StatKind::Difference(_) => Err(Error::NotAFrequency(kind.to_string())),
    }
}

/// Whether `pattern` occurs in `seq` as a contiguous block.
pub fn contains_pattern(seq: &Sequence, pattern: &Sequence) -> bool {
    let (n, w) = (seq.len(), pattern.len());
    if w > n {
        return false;
    }
    let mask = len_mask(w);
    (0..=n - w).any(|i| (seq.bits >> i) & mask == pattern.bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> Sequence {
        s.parse().unwrap()
    }

    #[test]
    fn parse_examples() {
        let s = seq("HHTT");
        assert_eq!((s.bits(), s.len()), (0b0011, 4));
        assert_eq!(s.to_string(), "HHTT");
        let s = seq("T");
        assert_eq!((s.bits(), s.len()), (0, 1));
        let s = seq("hTtH");
        assert_eq!((s.bits(), s.len()), (0b1001, 4));
        assert_eq!(s.to_string(), "HTTH");
        assert_eq!(seq("  HT\n").to_string(), "HT");
    }

    #[test]
    fn parse_errors() {
        assert_eq!(Sequence::parse(""), Err(Error::EmptyInput));
        assert_eq!(Sequence::parse("   "), Err(Error::EmptyInput));
        assert_eq!(
            Sequence::parse("HHXT"),
            Err(Error::InvalidCharacter { position: 2, found: 'X' })
        );
        let long = "H".repeat(65);
        assert_eq!(Sequence::parse(&long), Err(Error::TooLong { len: 65, max: 64 }));
        assert!(Sequence::parse(&"T".repeat(64)).is_ok());
        assert!(Outcomes::parse(&long).is_ok());
    }

    #[test]
    fn from_bits_masks_high_bits() {
        let s = Sequence::from_bits(0xFF, 4).unwrap();
        assert_eq!(s.bits(), 0xF);
        assert!(Sequence::from_bits(0, 0).is_err());
        assert!(Sequence::from_bits(0, 65).is_err());
    }

    #[test]
    fn eligible_trial_examples() {
        assert_eq!(eligible_trials(&seq("HHTT"), StatKind::AfterHitRun(1)).unwrap(), vec![2, 3]);
        assert!(eligible_trials(&seq("TTTT"), StatKind::AfterHitRun(1)).unwrap().is_empty());
        assert_eq!(eligible_trials(&seq("HHHT"), StatKind::AfterHitRun(2)).unwrap(), vec![3, 4]);
        assert_eq!(
            eligible_trials(&seq("HH"), StatKind::AfterHitRun(2)),
            Err(Error::RunTooLong { run: 2, len: 2 })
        );
    }

    #[test]
    fn conditional_freq_examples() {
        let hh = StatKind::AfterHitRun(1);
        assert_eq!(conditional_freq(&seq("HHHH"), hh).unwrap(), Some(Ratio::ONE));
        assert_eq!(conditional_freq(&seq("HHTH"), hh).unwrap(), Some(Ratio::new(1, 2)));
        assert_eq!(conditional_freq(&seq("TTTH"), hh).unwrap(), None);
        assert_eq!(
            conditional_freq(&seq("HHTH"), StatKind::AfterMissRun(1)).unwrap(),
            Some(Ratio::ONE)
        );
        assert!(matches!(
            conditional_freq(&seq("HHTH"), StatKind::Difference(1)),
            Err(Error::NotAFrequency(_))
        ));
        assert_eq!(conditional_freq(&seq("H"), hh), Err(Error::RunTooLong { run: 1, len: 1 }));
        assert_eq!(
            conditional_freq(&seq("HHH"), StatKind::AfterHitRun(0)),
            Err(Error::InvalidRunLength)
        );
    }

    #[test]
    fn d_statistic_examples() {
        assert_eq!(d_statistic(&seq("HHTH"), 1).unwrap(), Some(Ratio::new(-1, 2)));
        assert_eq!(d_statistic(&seq("HHHH"), 1).unwrap(), None);
        assert_eq!(d_statistic(&seq("THHT"), 1).unwrap(), Some(Ratio::new(-1, 2)));
    }

    #[test]
    fn unpacked_matches_packed() {
        for text in ["HHTT", "THHHTHTTHH", "T", "HTHTHTHHHHTTTH"] {
            let packed = seq(text);
            let unpacked = Outcomes::parse(text).unwrap();
            for m in 1..4 {
                for side in [RunSide::Hits, RunSide::Misses] {
                    assert_eq!(packed.tally(side, m), unpacked.tally(side, m), "{text} {m} {side:?}");
                    let mask = packed.eligible_mask(side, m);
                    let from_mask: Vec<usize> = (0..64).filter(|i| mask >> i & 1 == 1).collect();
                    assert_eq!(from_mask, unpacked.eligible_positions(side, m));
                }
            }
            assert_eq!(unpacked.to_packed(), Some(packed));
        }
    }

    #[test]
    fn full_width_sequence() {
        let s = Sequence::from_bits(u64::MAX, 64).unwrap();
        assert_eq!(s.tally(RunSide::Hits, 1), Tally { eligible: 63, successes: 63 });
        assert_eq!(s.tally(RunSide::Hits, 63), Tally { eligible: 1, successes: 1 });
        assert_eq!(s.complement().bits(), 0);
    }

    #[test]
    fn pattern_containment() {
        assert!(contains_pattern(&seq("THHT"), &seq("HH")));
        assert!(!contains_pattern(&seq("HTHT"), &seq("HH")));
        assert!(!contains_pattern(&seq("H"), &seq("HH")));
    }
}
