//! Exhaustive enumeration of all `2^k` sequences under a Bernoulli(p) model.
//!
//! Every sequence is reduced to a key `(hits, tally)` and counted. The keyed
//! counts are exact integers, so the parallel reduction is schedule
//! independent; probability weights `p^h (1-p)^(k-h)` are applied afterwards
//! in a fixed key order. At `p = 0.5` the means are also produced as exact
//! rationals.

use std::collections::{BTreeMap, HashMap};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::parallel::{fold_reduce, Execution};
use crate::ratio::Ratio;
use crate::sequence::{contains_pattern, Flips, RunSide, Sequence, StatKind, StatTally, Tally, MAX_UNPACKED_LEN};

pub const DEFAULT_ENUMERATION_LIMIT: u32 = 28;
/// Upper bound accepted for an overridden enumeration limit.
pub const MAX_ENUMERATION_LIMIT: u32 = 36;
pub const ENUMERATION_LIMIT_ENV: &str = "STREAKLAB_ENUM_LIMIT";
/// Largest `k` rendered row by row by [`Enumerator::table_one`].
pub const TABLE_LIMIT: u32 = 16;

const BLOCK_BITS: u32 = 16;

/// Independent flips with hit probability `p`, `k` flips per sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NullModel {
    p: f64,
    k: u32,
}

impl NullModel {
    pub fn new(p: f64, k: u32) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidProbability(p));
        }
        if k == 0 {
            return Err(Error::InvalidLength);
        }
        if k as usize > MAX_UNPACKED_LEN {
            return Err(Error::TooLong { len: k as usize, max: MAX_UNPACKED_LEN });
        }
        Ok(NullModel { p, k })
    }

    pub fn fair(k: u32) -> Result<Self> {
        NullModel::new(0.5, k)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn is_fair(&self) -> bool {
        self.p == 0.5
    }

    pub fn with_k(&self, k: u32) -> Result<Self> {
        NullModel::new(self.p, k)
    }

    /// Probability of one particular sequence with `hits` hits.
    pub fn weight(&self, hits: u32) -> f64 {
        self.p.powi(hits as i32) * (1.0 - self.p).powi((self.k - hits) as i32)
    }
}

/// What to do with sequences on which the statistic is undefined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UndefinedPolicy {
    #[default]
    Exclude,
    /// Count the sequence with statistic 0 and full weight.
    IncludeAsZero,
}

impl UndefinedPolicy {
    pub fn check(&self, stat: StatKind) -> Result<()> {
        if stat.is_difference() && *self == UndefinedPolicy::IncludeAsZero {
            return Err(Error::PolicyNotSupported);
        }
        Ok(())
    }
}

/// Exact expectations of a statistic over the whole sequence space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BiasSummary {
    pub model: NullModel,
    pub stat: StatKind,
    pub policy: UndefinedPolicy,
    /// Expected per-sequence statistic (one vote per sequence).
    pub unweighted_mean: f64,
    /// Expected successes over expected eligible trials. For the difference
    /// statistic, the pooled hit-run side minus the pooled miss-run side.
    pub pooled_mean: f64,
    pub defined_count: u64,
    pub defined_probability: f64,
    /// Probability mass of each attainable value among defined sequences.
    #[serde(serialize_with = "histogram_entries")]
    pub histogram: BTreeMap<Ratio, f64>,
    /// `unweighted_mean` as an exact fraction, available when `p = 0.5`.
    pub exact_unweighted_mean: Option<Ratio>,
    /// `pooled_mean` as an exact fraction, available when `p = 0.5`.
    pub exact_pooled_mean: Option<Ratio>,
}

impl BiasSummary {
    /// `P(stat >= value | defined)`.
    pub fn upper_tail(&self, value: Ratio) -> f64 {
        self.histogram.range(value..).map(|(_, m)| m).sum::<f64>() / self.defined_probability
    }

    /// `P(stat <= value | defined)`.
    pub fn lower_tail(&self, value: Ratio) -> f64 {
        self.histogram.range(..=value).map(|(_, m)| m).sum::<f64>() / self.defined_probability
    }
}

fn histogram_entries<S: Serializer>(hist: &BTreeMap<Ratio, f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Entry<'a> {
        value: &'a Ratio,
        probability: f64,
    }
    s.collect_seq(hist.iter().map(|(value, &probability)| Entry { value, probability }))
}

/// One row of a per-sequence table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub sequence: Sequence,
    pub eligible: u32,
    pub successes: u32,
    pub value: Option<Ratio>,
}

/// Every sequence of length `k` with its statistic, totals, and the average
/// of the defined per-sequence values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequenceTable {
    pub k: u32,
    pub stat: StatKind,
    pub policy: UndefinedPolicy,
    pub rows: Vec<TableRow>,
    pub total_eligible: u64,
    pub total_successes: u64,
    pub defined_rows: usize,
    /// Total successes over total eligible.
    pub pooled: Option<Ratio>,
    pub unweighted_average: Option<Ratio>,
}

/// Exhaustive enumeration engine with a configurable size limit.
#[derive(Clone, Copy, Debug)]
pub struct Enumerator {
    limit: u32,
    execution: Execution,
}

impl Default for Enumerator {
    fn default() -> Self {
        Enumerator { limit: DEFAULT_ENUMERATION_LIMIT, execution: Execution::default() }
    }
}

impl Enumerator {
    pub fn with_limit(limit: u32) -> Result<Self> {
        if limit == 0 || limit > MAX_ENUMERATION_LIMIT {
            return Err(Error::KTooLarge { k: limit, limit: MAX_ENUMERATION_LIMIT });
        }
        Ok(Enumerator { limit, ..Enumerator::default() })
    }

    /// Honours `STREAKLAB_ENUM_LIMIT` when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(ENUMERATION_LIMIT_ENV) {
            Ok(v) => {
                let limit = v.trim().parse::<u32>().map_err(|_| Error::Parse {
                    line: 0,
                    reason: format!("{ENUMERATION_LIMIT_ENV}={v:?} is not a non-negative integer"),
                })?;
                Enumerator::with_limit(limit)
            }
            Err(_) => Ok(Enumerator::default()),
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn limit(&self) -> u32 {
        self.limit
    }

    pub fn execution(&self) -> Execution {
        self.execution
    }

    fn check_k(&self, k: u32) -> Result<()> {
        if k > self.limit {
            return Err(Error::KTooLarge { k, limit: self.limit });
        }
        Ok(())
    }

    pub fn enumerate_summary(
        &self,
        model: NullModel,
        stat: StatKind,
        policy: UndefinedPolicy,
    ) -> Result<BiasSummary> {
        self.check_k(model.k())?;
        stat.check_len(model.k() as usize)?;
        policy.check(stat)?;
        let counts = self.keyed_counts(model.k(), stat);
        summarize(model, stat, policy, &counts)
    }

    pub fn bias_table(
        &self,
        k_min: u32,
        k_max: u32,
        p: f64,
        stat: StatKind,
        policy: UndefinedPolicy,
    ) -> Result<Vec<(u32, BiasSummary)>> {
        if k_min == 0 || k_min > k_max {
            return Err(Error::InvalidRange { min: k_min, max: k_max });
        }
        self.check_k(k_max)?;
        (k_min..=k_max)
            .map(|k| Ok((k, self.enumerate_summary(NullModel::new(p, k)?, stat, policy)?)))
            .collect()
    }

    /// Number of length-`k` sequences containing `pattern` as a contiguous block.
    pub fn count_sequences_containing(&self, k: u32, pattern: &Sequence) -> Result<u64> {
        if pattern.len() > k as usize {
            return Err(Error::PatternTooLong { pattern: pattern.len(), k });
        }
        self.check_k(k)?;
        let (blocks, block_len) = blocks(k);
        let pattern = *pattern;
        Ok(fold_reduce(
            self.execution,
            blocks,
            || 0u64,
            |acc, b| {
                let start = b as u64 * block_len;
                acc + (start..start + block_len)
                    .filter(|&bits| contains_pattern(&Sequence::from_bits_unchecked(bits, k as usize), &pattern))
                    .count() as u64
            },
            |a, b| a + b,
        ))
    }

    /// Per-sequence table in H-before-T lexicographic order.
    pub fn table_one(&self, k: u32, stat: StatKind, policy: UndefinedPolicy) -> Result<SequenceTable> {
        if k > TABLE_LIMIT {
            return Err(Error::KTooLarge { k, limit: TABLE_LIMIT });
        }
        if k == 0 {
            return Err(Error::InvalidLength);
        }
        stat.validate()?;
        let side = match stat {
            StatKind::AfterHitRun(_) => RunSide::Hits,
            StatKind::AfterMissRun(_) => RunSide::Misses,
            StatKind::Difference(_) => return Err(Error::NotAFrequency(stat.to_string())),
        };
        let len = k as usize;
        let rows: Vec<TableRow> = (0..1u64 << k)
            .map(|rank| {
                // Rank 0 is all hits; the first flip is the most significant digit.
                let bits = (0..len).fold(0u64, |acc, i| acc | ((!(rank >> (len - 1 - i)) & 1) << i));
                let sequence = Sequence::from_bits_unchecked(bits, len);
                let t = sequence.tally(side, stat.run());
                TableRow { sequence, eligible: t.eligible, successes: t.successes, value: t.freq() }
            })
            .collect();
        let total_eligible = rows.iter().map(|r| r.eligible as u64).sum();
        let total_successes = rows.iter().map(|r| r.successes as u64).sum();
        let defined: Vec<Ratio> = rows.iter().filter_map(|r| r.value).collect();
        let denominator = match policy {
            UndefinedPolicy::Exclude => defined.len(),
            UndefinedPolicy::IncludeAsZero => rows.len(),
        };
        let unweighted_average = (!defined.is_empty())
            .then(|| defined.iter().fold(Ratio::ZERO, |acc, &v| acc + v).div_int(denominator as i128));
        Ok(SequenceTable {
            k,
            stat,
            policy,
            total_eligible,
            total_successes,
            defined_rows: defined.len(),
            pooled: Ratio::from_counts(total_successes, total_eligible),
            unweighted_average,
            rows,
        })
    }

    fn keyed_counts(&self, k: u32, stat: StatKind) -> Vec<(u32, StatTally, u64)> {
        let (blocks, block_len) = blocks(k);
        let len = k as usize;
        let run = stat.run();
        match stat {
            StatKind::AfterHitRun(_) | StatKind::AfterMissRun(_) => {
                let side = if matches!(stat, StatKind::AfterHitRun(_)) { RunSide::Hits } else { RunSide::Misses };
                let dim = len + 1;
                let index = move |h: u32, t: Tally| (h as usize * dim + t.successes as usize) * dim + t.eligible as usize;
                let dense = fold_reduce(
                    self.execution,
                    blocks,
                    || vec![0u64; dim * dim * dim],
                    |mut acc, b| {
                        let start = b as u64 * block_len;
                        for bits in start..start + block_len {
                            let seq = Sequence::from_bits_unchecked(bits, len);
                            acc[index(seq.hits(), seq.tally(side, run))] += 1;
                        }
                        acc
                    },
                    |mut a, b| {
                        a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                        a
                    },
                );
                dense
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(i, &c)| {
                        let eligible = (i % dim) as u32;
                        let successes = ((i / dim) % dim) as u32;
                        let h = (i / (dim * dim)) as u32;
                        (h, StatTally::Single(Tally { eligible, successes }), c)
                    })
                    .collect()
            }
            StatKind::Difference(_) => {
                let pack = |h: u32, a: Tally, b: Tally| -> u64 {
                    [h, a.successes, a.eligible, b.successes, b.eligible]
                        .iter()
                        .fold(0u64, |acc, &x| (acc << 7) | x as u64)
                };
                let sparse = fold_reduce(
                    self.execution,
                    blocks,
                    HashMap::<u64, u64>::new,
                    |mut acc, b| {
                        let start = b as u64 * block_len;
                        for bits in start..start + block_len {
                            let seq = Sequence::from_bits_unchecked(bits, len);
                            let key = pack(seq.hits(), seq.tally(RunSide::Hits, run), seq.tally(RunSide::Misses, run));
                            *acc.entry(key).or_insert(0) += 1;
                        }
                        acc
                    },
                    |mut a, b| {
                        for (key, c) in b {
                            *a.entry(key).or_insert(0) += c;
                        }
                        a
                    },
                );
                let mut keys: Vec<_> = sparse.into_iter().collect();
                keys.sort_unstable();
                keys.into_iter()
                    .map(|(key, c)| {
                        let field = |shift: u32| ((key >> shift) & 0x7F) as u32;
                        let hit = Tally { successes: field(21), eligible: field(14) };
                        let miss = Tally { successes: field(7), eligible: field(0) };
                        (field(28), StatTally::Pair(hit, miss), c)
                    })
                    .collect()
            }
        }
    }
}

fn blocks(k: u32) -> (usize, u64) {
    if k <= BLOCK_BITS {
        (1, 1u64 << k)
    } else {
        (1usize << (k - BLOCK_BITS), 1u64 << BLOCK_BITS)
    }
}

fn summarize(
    model: NullModel,
    stat: StatKind,
    policy: UndefinedPolicy,
    counts: &[(u32, StatTally, u64)],
) -> Result<BiasSummary> {
    let mut histogram: BTreeMap<Ratio, f64> = BTreeMap::new();
    let mut defined_count = 0u64;
    let mut defined_mass = 0.0;
    let mut total_mass = 0.0;
    let mut value_mass = 0.0;
    // Pooled sums per side: [successes, eligible] for hit-run and miss-run sides.
    let mut pooled = [[0.0f64; 2]; 2];
    let mut pooled_int = [[0u128; 2]; 2];
    let mut exact_sum = Ratio::ZERO;

    for &(h, tally, count) in counts {
        let mass = count as f64 * model.weight(h);
        total_mass += mass;
        let (sides, n) = match tally {
            StatTally::Single(t) => ([t, Tally::default()], 1),
            StatTally::Pair(a, b) => ([a, b], 2),
        };
        for (i, t) in sides[..n].iter().enumerate() {
            pooled[i][0] += mass * t.successes as f64;
            pooled[i][1] += mass * t.eligible as f64;
            pooled_int[i][0] += count as u128 * t.successes as u128;
            pooled_int[i][1] += count as u128 * t.eligible as u128;
        }
        if let Some(v) = tally.value() {
            *histogram.entry(v).or_insert(0.0) += mass;
            defined_count += count;
            defined_mass += mass;
            value_mass += mass * v.to_f64();
            exact_sum = exact_sum + v.scale(count as i128);
        }
    }

    if defined_count == 0 {
        return Err(Error::NoDefinedSequences { k: model.k() });
    }

    let side_count = if stat.is_difference() { 2 } else { 1 };
    let exact = model.is_fair();
    let exact_unweighted_mean = exact.then(|| match policy {
        UndefinedPolicy::Exclude => exact_sum.div_int(defined_count as i128),
        UndefinedPolicy::IncludeAsZero => exact_sum.div_int(1i128 << model.k()),
    });
    let exact_pooled_mean = exact.then(|| {
        let side = |i: usize| Ratio::new(pooled_int[i][0] as i128, pooled_int[i][1] as i128);
        if side_count == 2 {
            side(0) - side(1)
        } else {
            side(0)
        }
    });
    let unweighted_mean = match exact_unweighted_mean {
        Some(r) => r.to_f64(),
        None => match policy {
            UndefinedPolicy::Exclude => value_mass / defined_mass,
            UndefinedPolicy::IncludeAsZero => value_mass / total_mass,
        },
    };
    let pooled_mean = match exact_pooled_mean {
        Some(r) => r.to_f64(),
        None => {
            let side = |i: usize| pooled[i][0] / pooled[i][1];
            if side_count == 2 {
                side(0) - side(1)
            } else {
                side(0)
            }
        }
    };

    Ok(BiasSummary {
        model,
        stat,
        policy,
        unweighted_mean,
        pooled_mean,
        defined_count,
        defined_probability: defined_mass,
        histogram,
        exact_unweighted_mean,
        exact_pooled_mean,
    })
}

pub fn enumerate_summary(model: NullModel, stat: StatKind, policy: UndefinedPolicy) -> Result<BiasSummary> {
    Enumerator::default().enumerate_summary(model, stat, policy)
}

pub fn bias_table(
    k_min: u32,
    k_max: u32,
    p: f64,
    stat: StatKind,
    policy: UndefinedPolicy,
) -> Result<Vec<(u32, BiasSummary)>> {
    Enumerator::default().bias_table(k_min, k_max, p, stat, policy)
}

pub fn count_sequences_containing(k: u32, pattern: &Sequence) -> Result<u64> {
    Enumerator::default().count_sequences_containing(k, pattern)
}

pub fn table_one(k: u32) -> Result<SequenceTable> {
    Enumerator::default().table_one(k, StatKind::AfterHitRun(1), UndefinedPolicy::Exclude)
}
