//! Hot-hand reports for recorded hit/miss data.
//!
//! Input format: one unit (game or season) per line, optionally prefixed with
//! `player_id,`. Blank lines and lines starting with `#` are ignored.
//!
//! A record's observed statistic pools successes and eligible trials over all
//! of its units. The reference number is either the long-run pooled value or
//! the expected per-sequence value for the unit length; records with units
//! of different lengths mix per-length references weighted by unit length.
//! The p-value is one-sided and conditions on the synthetic statistic being
//! defined.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{Enumerator, NullModel, UndefinedPolicy};
use crate::ratio::Ratio;
use crate::sampling::{run_chunks, Draw, Sampler, SeededStream, StreamMetadata};
use crate::sequence::{Outcomes, StatKind, StatTally};
use crate::parallel::Execution;

/// Single-unit records up to this length get an exact p-value.
pub const EXACT_PVALUE_MAX_LEN: usize = 12;

const REFERENCE_SALT: u64 = 0x5245_4645_5245_4E43;

pub const CONDITIONING_NOTE: &str = "p-value conditions on the synthetic statistic being defined (undefined draws excluded)";
pub const MIXING_NOTE: &str =
    "observed value pools successes and eligible trials over all units; reference mixes per-length values weighted by unit length (tool convention)";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Record {
    pub player_id: Option<String>,
    pub units: Vec<Outcomes>,
}

impl Record {
    pub fn new(player_id: Option<String>, units: Vec<Outcomes>) -> Result<Self> {
        if units.is_empty() {
            return Err(Error::EmptyFile);
        }
        Ok(Record { player_id, units })
    }

    pub fn total_flips(&self) -> u64 {
        self.units.iter().map(|u| u.len() as u64).sum()
    }

    pub fn total_hits(&self) -> u64 {
        self.units.iter().map(|u| u.hits() as u64).sum()
    }

    pub fn hit_rate(&self) -> f64 {
        self.total_hits() as f64 / self.total_flips() as f64
    }
}

/// Parses records, one per player id in order of first appearance. Lines
/// without an id form a single anonymous record.
pub fn ingest<R: BufRead>(reader: R) -> Result<Vec<Record>> {
    let mut records: Vec<Record> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let (player_id, seq_text) = match text.split_once(',') {
            Some((id, rest)) => {
                let id = id.trim();
                if id.is_empty() {
                    return Err(Error::Parse { line: line_no, reason: "empty player id".into() });
                }
                (Some(id.to_string()), rest)
            }
            None => (None, text),
        };
        let unit = Outcomes::parse(seq_text).map_err(|e| Error::Parse { line: line_no, reason: e.to_string() })?;
        match records.iter_mut().find(|r| r.player_id == player_id) {
            Some(r) => r.units.push(unit),
            None => records.push(Record { player_id, units: vec![unit] }),
        }
    }
    if records.is_empty() {
        return Err(Error::EmptyFile);
    }
    Ok(records)
}

pub fn ingest_str(text: &str) -> Result<Vec<Record>> {
    ingest(text.as_bytes())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// The long-run value: `p` for frequencies, 0 for differences.
    PooledLongRun,
    /// The expected per-sequence value for sequences of the unit's length.
    #[default]
    PerSequenceUnweighted,
}

/// Which tail counts as evidence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// High values: evidence for a hot hand.
    #[default]
    Upper,
    /// Low values: the gambler's-fallacy direction.
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReferenceSpec {
    pub convention: Convention,
    /// Hit probability of the null model; `None` uses the record's hit rate.
    pub p: Option<f64>,
    pub stat: StatKind,
    pub policy: UndefinedPolicy,
    pub tail: Tail,
}

impl Default for ReferenceSpec {
    fn default() -> Self {
        ReferenceSpec {
            convention: Convention::default(),
            p: None,
            stat: StatKind::AfterHitRun(1),
            policy: UndefinedPolicy::Exclude,
            tail: Tail::Upper,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PValueMethod {
    Exact,
    MonteCarlo {
        #[serde(flatten)]
        metadata: StreamMetadata,
        defined_draws: u64,
        std_error: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnitStat {
    pub sequence: Outcomes,
    pub length: usize,
    pub tally: StatTally,
    pub value: Option<Ratio>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HotHandReport {
    pub player_id: Option<String>,
    pub convention: Convention,
    pub stat: StatKind,
    pub policy: UndefinedPolicy,
    pub tail: Tail,
    pub hit_probability: f64,
    pub hit_probability_source: &'static str,
    pub per_unit: Vec<UnitStat>,
    pub aggregate_tally: StatTally,
    pub aggregate_observed_exact: Ratio,
    pub aggregate_observed: f64,
    pub reference_number: f64,
    pub excess: f64,
    pub p_value: f64,
    pub method: PValueMethod,
    pub conditioning: &'static str,
    pub mixing: &'static str,
}

/// Tail probability with its provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct PValue {
    pub value: f64,
    pub method: PValueMethod,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Analyzer {
    enumerator: Enumerator,
    sampler: Sampler,
    execution: Execution,
}

impl Analyzer {
    pub fn new(enumerator: Enumerator) -> Self {
        let execution = enumerator.execution();
        Analyzer { enumerator, sampler: Sampler::new(execution), execution }
    }

    /// Reference value for one unit length. `mc_trials` and `stream` are only
    /// used when the length exceeds the enumeration limit.
    pub fn reference_number(
        &self,
        spec: &ReferenceSpec,
        p: f64,
        unit_length: usize,
        mc_trials: u64,
        stream: SeededStream,
    ) -> Result<f64> {
        spec.stat.check_len(unit_length)?;
        let model = NullModel::new(p, unit_length as u32)?;
        match spec.convention {
            Convention::PooledLongRun => Ok(if spec.stat.is_difference() { 0.0 } else { p }),
            Convention::PerSequenceUnweighted => {
                if model.k() <= self.enumerator.limit() {
                    Ok(self.enumerator.enumerate_summary(model, spec.stat, spec.policy)?.unweighted_mean)
                } else {
                    let est = self.sampler.sample_unweighted_mean(
                        model,
                        spec.stat,
                        spec.policy,
                        mc_trials,
                        stream.derive(REFERENCE_SALT),
                    )?;
                    Ok(est.estimate)
                }
            }
        }
    }

    pub fn hot_hand_report(
        &self,
        record: &Record,
        spec: &ReferenceSpec,
        pvalue_trials: u64,
        stream: SeededStream,
    ) -> Result<HotHandReport> {
        spec.stat.validate()?;
        spec.policy.check(spec.stat)?;
        let (p, source) = match spec.p {
            Some(p) => (p, "override"),
            None => (record.hit_rate(), "empirical"),
        };
        if !(p > 0.0 && p < 1.0) {
            return Err(if spec.p.is_some() { Error::InvalidProbability(p) } else { Error::DegenerateHitRate(p) });
        }

        let per_unit: Vec<UnitStat> = record
            .units
            .iter()
            .map(|u| {
                let tally = spec.stat.tally(u);
                UnitStat { sequence: u.clone(), length: u.len(), tally, value: tally.value() }
            })
            .collect();
        let mut aggregate_tally = StatTally::empty_like(spec.stat);
        for u in &per_unit {
            aggregate_tally.merge(&u.tally);
        }
        let observed = aggregate_tally.value().ok_or(Error::AllUndefined)?;

        let run = spec.stat.run() as usize;
        let mut by_length: BTreeMap<usize, f64> = BTreeMap::new();
        let (mut weighted, mut total_len) = (0.0, 0u64);
        for unit in record.units.iter().filter(|u| u.len() > run) {
            let len = unit.len();
            let reference = match by_length.get(&len) {
                Some(&r) => r,
                None => {
                    let r = self.reference_number(spec, p, len, pvalue_trials, stream)?;
                    by_length.insert(len, r);
                    r
                }
            };
            weighted += reference * len as f64;
            total_len += len as u64;
        }
        let reference_number = weighted / total_len as f64;

        let lengths: Vec<usize> = record.units.iter().map(|u| u.len()).collect();
        let pv = if lengths.len() == 1 && lengths[0] <= EXACT_PVALUE_MAX_LEN {
            self.exact_p_value(p, lengths[0], spec.stat, spec.tail, observed)?
        } else {
            self.monte_carlo_p_value(p, &lengths, spec.stat, spec.tail, observed, pvalue_trials, stream)?
        };

        let aggregate_observed = observed.to_f64();
        Ok(HotHandReport {
            player_id: record.player_id.clone(),
            convention: spec.convention,
            stat: spec.stat,
            policy: spec.policy,
            tail: spec.tail,
            hit_probability: p,
            hit_probability_source: source,
            per_unit,
            aggregate_tally,
            aggregate_observed_exact: observed,
            aggregate_observed,
            reference_number,
            excess: aggregate_observed - reference_number,
            p_value: pv.value,
            method: pv.method,
            conditioning: CONDITIONING_NOTE,
            mixing: MIXING_NOTE,
        })
    }

    /// Tail probability of `observed` over all sequences of length `len`.
    pub fn exact_p_value(&self, p: f64, len: usize, stat: StatKind, tail: Tail, observed: Ratio) -> Result<PValue> {
        let summary =
            self.enumerator.enumerate_summary(NullModel::new(p, len as u32)?, stat, UndefinedPolicy::Exclude)?;
        let value = match tail {
            Tail::Upper => summary.upper_tail(observed),
            Tail::Lower => summary.lower_tail(observed),
        };
        Ok(PValue { value: value.clamp(0.0, 1.0), method: PValueMethod::Exact })
    }

    /// Tail probability estimated from synthetic records with the given unit lengths.
    #[allow(clippy::too_many_arguments)]
    pub fn monte_carlo_p_value(
        &self,
        p: f64,
        lengths: &[usize],
        stat: StatKind,
        tail: Tail,
        observed: Ratio,
        trials: u64,
        stream: SeededStream,
    ) -> Result<PValue> {
        if trials == 0 {
            return Err(Error::ZeroCount("p-value trials"));
        }
        let models = lengths.iter().map(|&l| NullModel::new(p, l as u32)).collect::<Result<Vec<_>>>()?;
        let counts = run_chunks(self.execution, &stream, trials, |rng, n| {
            let (mut defined, mut extreme) = (0u64, 0u64);
            for _ in 0..n {
                let mut tally = StatTally::empty_like(stat);
                for model in &models {
                    tally.merge(&stat.tally(&Draw::sample(rng, model)));
                }
                if let Some(v) = tally.value() {
                    defined += 1;
                    let hit = match tail {
                        Tail::Upper => v >= observed,
                        Tail::Lower => v <= observed,
                    };
                    extreme += hit as u64;
                }
            }
            (defined, extreme)
        });
        let (defined, extreme) = counts.iter().fold((0, 0), |(d, e), &(a, b)| (d + a, e + b));
        if defined == 0 {
            return Err(Error::ZeroDefinedDraws);
        }
        let value = extreme as f64 / defined as f64;
        Ok(PValue {
            value,
            method: PValueMethod::MonteCarlo {
                metadata: stream.metadata(trials),
                defined_draws: defined,
                std_error: (value * (1.0 - value) / defined as f64).sqrt(),
            },
        })
    }
}

pub fn reference_number(spec: &ReferenceSpec, p: f64, unit_length: usize, mc_trials: u64, stream: SeededStream) -> Result<f64> {
    Analyzer::default().reference_number(spec, p, unit_length, mc_trials, stream)
}

pub fn hot_hand_report(
    record: &Record,
    spec: &ReferenceSpec,
    pvalue_trials: u64,
    stream: SeededStream,
) -> Result<HotHandReport> {
    Analyzer::default().hot_hand_report(record, spec, pvalue_trials, stream)
}
