//! TSV and JSON renderers. TSV tables have a fixed header and a constant
//! column count per command; stochastic commands prefix `#` metadata lines.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::json;
use streaklab_core::exact::{BiasSummary, SequenceTable};
use streaklab_core::inference::{HotHandReport, PValueMethod, CONDITIONING_NOTE, MIXING_NOTE};
use streaklab_core::sampling::{GameResult, LearningTrace, StreamMetadata};
use streaklab_core::{Flips, GameConfig, Outcomes, Ratio, RunSide, StatKind};

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Tsv,
    Json,
}

const UNDEFINED: &str = "-";

/// Six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.6}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn percent(r: Option<Ratio>) -> String {
    r.map_or(UNDEFINED.into(), |r| format!("{:.2}", 100.0 * r.to_f64()))
}

fn fraction(r: Option<Ratio>) -> String {
    r.map_or(UNDEFINED.into(), |r| r.to_string())
}

fn value(r: Option<Ratio>) -> String {
    r.map_or(UNDEFINED.into(), |r| sig6(r.to_f64()))
}

fn row(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join("\t"));
    out.push('\n');
}

fn header(out: &mut String, cells: &[&str]) {
    out.push_str(&cells.join("\t"));
    out.push('\n');
}

fn metadata_lines(out: &mut String, meta: &StreamMetadata) {
    let _ = writeln!(out, "# seed\t{}", meta.seed);
    let _ = writeln!(out, "# chunk_size\t{}", meta.chunk_size);
    let _ = writeln!(out, "# generator\t{}", meta.generator);
    let _ = writeln!(out, "# trials\t{}", meta.trials);
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable output");
    s.push('\n');
    s
}

pub fn enumerate(format: Format, table: &SequenceTable) -> String {
    if format == Format::Json {
        return to_json(table);
    }
    let mut out = String::new();
    header(&mut out, &["sequence", "eligible", "successes", "fraction", "value", "percent"]);
    for r in &table.rows {
        row(
            &mut out,
            &[
                r.sequence.to_string(),
                r.eligible.to_string(),
                r.successes.to_string(),
                fraction(r.value),
                value(r.value),
                percent(r.value),
            ],
        );
    }
    row(
        &mut out,
        &[
            "TOTAL".into(),
            table.total_eligible.to_string(),
            table.total_successes.to_string(),
            fraction(table.pooled),
            value(table.pooled),
            percent(table.pooled),
        ],
    );
    row(
        &mut out,
        &[
            "AVERAGE".into(),
            UNDEFINED.into(),
            table.defined_rows.to_string(),
            fraction(table.unweighted_average),
            value(table.unweighted_average),
            percent(table.unweighted_average),
        ],
    );
    out
}

pub fn bias(format: Format, rows: &[(u32, BiasSummary)]) -> String {
    if format == Format::Json {
        let rows: Vec<&BiasSummary> = rows.iter().map(|(_, s)| s).collect();
        return to_json(&rows);
    }
    let mut out = String::new();
    header(
        &mut out,
        &[
            "k",
            "p",
            "stat",
            "policy",
            "unweighted_mean",
            "pooled_mean",
            "defined_count",
            "defined_probability",
            "exact_unweighted_mean",
            "exact_pooled_mean",
        ],
    );
    for (k, s) in rows {
        row(
            &mut out,
            &[
                k.to_string(),
                s.model.p().to_string(),
                s.stat.to_string(),
                format!("{:?}", s.policy).to_lowercase(),
                sig6(s.unweighted_mean),
                sig6(s.pooled_mean),
                s.defined_count.to_string(),
                sig6(s.defined_probability),
                fraction(s.exact_unweighted_mean),
                fraction(s.exact_pooled_mean),
            ],
        );
    }
    out
}

pub fn game(format: Format, config: &GameConfig, r: &GameResult) -> String {
    if format == Format::Json {
        return to_json(&json!({ "config": config, "result": r }));
    }
    let mut out = String::new();
    metadata_lines(&mut out, &r.metadata);
    header(
        &mut out,
        &["mode", "k", "p", "run", "bet", "trials", "wins", "win_freq", "std_error", "rejected_draws"],
    );
    row(
        &mut out,
        &[
            serde_json::to_value(r.mode).unwrap().as_str().unwrap().to_string(),
            config.model.k().to_string(),
            config.model.p().to_string(),
            config.run.to_string(),
            serde_json::to_value(r.bet).unwrap().as_str().unwrap().to_string(),
            r.trials.to_string(),
            r.wins.to_string(),
            sig6(r.win_freq),
            sig6(r.std_error),
            r.rejected_draws.to_string(),
        ],
    );
    out
}

pub fn learn(format: Format, t: &LearningTrace) -> String {
    if format == Format::Json {
        return to_json(t);
    }
    let mut out = String::new();
    metadata_lines(&mut out, &t.metadata);
    let _ = writeln!(out, "# stat\t{}", t.stat);
    let _ = writeln!(out, "# final_estimate\t{}", sig6(t.final_estimate));
    let _ = writeln!(out, "# final_std_error\t{}", sig6(t.final_std_error));
    let _ = writeln!(out, "# skipped_episodes\t{}", t.skipped_episodes);
    header(&mut out, &["episode", "defined_episodes", "estimate"]);
    for s in &t.running_estimate {
        row(&mut out, &[s.episode.to_string(), s.defined_episodes.to_string(), sig6(s.estimate)]);
    }
    row(
        &mut out,
        &["final".into(), (t.episodes - t.skipped_episodes).to_string(), sig6(t.final_estimate)],
    );
    out
}

pub fn test(format: Format, meta: &StreamMetadata, reports: &[HotHandReport]) -> String {
    if format == Format::Json {
        return to_json(&json!({ "metadata": meta, "reports": reports }));
    }
    let mut out = String::new();
    metadata_lines(&mut out, meta);
    let _ = writeln!(out, "# conditioning\t{CONDITIONING_NOTE}");
    let _ = writeln!(out, "# mixing\t{MIXING_NOTE}");
    header(
        &mut out,
        &[
            "player",
            "units",
            "flips",
            "hit_probability",
            "hit_probability_source",
            "stat",
            "convention",
            "tail",
            "observed",
            "observed_fraction",
            "reference",
            "excess",
            "p_value",
            "method",
        ],
    );
    for r in reports {
        let method = match &r.method {
            PValueMethod::Exact => "exact".to_string(),
            PValueMethod::MonteCarlo { std_error, .. } => format!("monte-carlo(se={})", sig6(*std_error)),
        };
        row(
            &mut out,
            &[
                r.player_id.clone().unwrap_or_else(|| UNDEFINED.into()),
                r.per_unit.len().to_string(),
                r.per_unit.iter().map(|u| u.length).sum::<usize>().to_string(),
                sig6(r.hit_probability),
                r.hit_probability_source.to_string(),
                r.stat.to_string(),
                serde_json::to_value(r.convention).unwrap().as_str().unwrap().to_string(),
                format!("{:?}", r.tail).to_lowercase(),
                sig6(r.aggregate_observed),
                r.aggregate_observed_exact.to_string(),
                sig6(r.reference_number),
                format!("{:+.6}", r.excess),
                sig6(r.p_value),
                method,
            ],
        );
    }
    out
}

#[derive(Serialize)]
struct StatRow<'a> {
    sequence: &'a Outcomes,
    length: usize,
    stat: StatKind,
    hit_run_eligible: u32,
    hit_run_successes: u32,
    miss_run_eligible: u32,
    miss_run_successes: u32,
    value: Option<Ratio>,
}

pub fn stat(format: Format, kind: StatKind, units: &[Outcomes]) -> String {
    let rows: Vec<StatRow> = units
        .iter()
        .map(|u| {
            let hit = u.tally(RunSide::Hits, kind.run());
            let miss = u.tally(RunSide::Misses, kind.run());
            StatRow {
                sequence: u,
                length: u.len(),
                stat: kind,
                hit_run_eligible: hit.eligible,
                hit_run_successes: hit.successes,
                miss_run_eligible: miss.eligible,
                miss_run_successes: miss.successes,
                value: kind.tally(u).value(),
            }
        })
        .collect();
    if format == Format::Json {
        return to_json(&rows);
    }
    let mut out = String::new();
    header(
        &mut out,
        &[
            "sequence",
            "length",
            "stat",
            "hit_run_eligible",
            "hit_run_successes",
            "miss_run_eligible",
            "miss_run_successes",
            "fraction",
            "value",
        ],
    );
    for r in rows {
        row(
            &mut out,
            &[
                r.sequence.to_string(),
                r.length.to_string(),
                r.stat.to_string(),
                r.hit_run_eligible.to_string(),
                r.hit_run_successes.to_string(),
                r.miss_run_eligible.to_string(),
                r.miss_run_successes.to_string(),
                fraction(r.value),
                value(r.value),
            ],
        );
    }
    out
}
