//! `streaklab`: streak statistics from the command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or limit error.

mod output;

use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use streaklab_core::exact::TABLE_LIMIT;
use streaklab_core::inference::{ingest, Analyzer, Convention, ReferenceSpec, Tail};
use streaklab_core::sampling::{Bet, Sampler, DEFAULT_CHUNK_SIZE};
use streaklab_core::{
    parallel, Enumerator, Error, GameConfig, GameMode, NullModel, Outcomes, SeededStream, StatKind, UndefinedPolicy,
};

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "streaklab", version, about = "Conditional streak statistics on hit/miss sequences")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Tsv, global = true)]
    format: Format,
    /// Seed for every stochastic computation.
    #[arg(long, default_value_t = 42, global = true)]
    seed: u64,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate every sequence of length k with its statistic.
    Enumerate {
        #[arg(long, default_value_t = 4)]
        k: u32,
        #[command(flatten)]
        stat: StatArgs,
    },
    /// Exact unweighted and pooled means across a range of k.
    Bias {
        #[arg(long, default_value_t = 4)]
        k_min: u32,
        #[arg(long, default_value_t = 4)]
        k_max: u32,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[command(flatten)]
        stat: StatArgs,
    },
    /// Simulate the selection game.
    Game {
        #[arg(long, value_enum, default_value_t = ModeArg::TwoStage)]
        mode: ModeArg,
        #[arg(long, default_value_t = 4)]
        k: u32,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, value_enum, default_value_t = BetArg::H, ignore_case = true)]
        bet: BetArg,
        /// Required run of hits before the selected position.
        #[arg(long, default_value_t = 1)]
        run: u32,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_CHUNK_SIZE)]
        chunk_size: u64,
    },
    /// Simulate an agent that averages per-sequence statistics.
    Learn {
        #[arg(long, default_value_t = 4)]
        k: u32,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[command(flatten)]
        stat: StatArgs,
        #[arg(long, default_value_t = 1_000_000)]
        episodes: u64,
        /// Record the running estimate every this many episodes.
        #[arg(long, default_value_t = 10_000)]
        stride: u64,
        #[arg(long, default_value_t = DEFAULT_CHUNK_SIZE)]
        chunk_size: u64,
    },
    /// Test recorded shot sequences for a hot hand.
    Test {
        /// Input file, or "-" for stdin.
        input: String,
        /// Null-model hit probability (default: the record's hit rate).
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_enum, default_value_t = ConventionArg::PerSequence)]
        convention: ConventionArg,
        #[command(flatten)]
        stat: StatArgs,
        #[arg(long, value_enum, default_value_t = TailArg::Upper)]
        tail: TailArg,
        /// Monte Carlo trials for p-values and long-unit references.
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_CHUNK_SIZE)]
        chunk_size: u64,
    },
    /// Per-sequence statistics for ad-hoc input ("-" reads lines from stdin).
    Stat {
        #[arg(required = true)]
        sequences: Vec<String>,
        #[command(flatten)]
        stat: StatArgs,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct StatArgs {
    /// Statistic: hits after a hit run, after a miss run, or their difference.
    #[arg(long = "stat", value_enum, default_value_t = StatArg::Hit)]
    kind: StatArg,
    /// Conditioning run length.
    #[arg(long, default_value_t = 1)]
    run: u32,
    #[arg(long, value_enum, default_value_t = PolicyArg::Exclude)]
    policy: PolicyArg,
}

impl StatArgs {
    fn stat(&self) -> StatKind {
        match self.kind {
            StatArg::Hit => StatKind::AfterHitRun(self.run),
            StatArg::Miss => StatKind::AfterMissRun(self.run),
            StatArg::Diff => StatKind::Difference(self.run),
        }
    }

    fn policy(&self) -> UndefinedPolicy {
        match self.policy {
            PolicyArg::Exclude => UndefinedPolicy::Exclude,
            PolicyArg::Zero => UndefinedPolicy::IncludeAsZero,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum StatArg {
    Hit,
    Miss,
    Diff,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum PolicyArg {
    Exclude,
    Zero,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ModeArg {
    TwoStage,
    OneStage,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum BetArg {
    H,
    T,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ConventionArg {
    PerSequence,
    Pooled,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum TailArg {
    Upper,
    Lower,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidRange { .. }
            | Error::InvalidProbability(_)
            | Error::ZeroCount(_)
            | Error::InvalidRunLength
            | Error::RunTooLong { .. }
            | Error::PolicyNotSupported
            | Error::NotAFrequency(_)
            | Error::InvalidLength
            | Error::PatternTooLong { .. } => Failure::Usage(msg),
            _ => Failure::Data(msg),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(text) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<String, Failure> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        parallel::configure_threads(threads);
    }
    let enumerator = Enumerator::from_env().map_err(|e| Failure::Usage(e.to_string()))?;
    let sampler = Sampler::default();
    let format = cli.format;

    match cli.command {
        Command::Enumerate { k, stat } => {
            if k > TABLE_LIMIT {
                return Err(Failure::Usage(format!("--k: k exceeds presentation limit {TABLE_LIMIT}")));
            }
            let table = enumerator.table_one(k, stat.stat(), stat.policy())?;
            Ok(output::enumerate(format, &table))
        }
        Command::Bias { k_min, k_max, p, stat } => {
            if k_min == 0 || k_min > k_max {
                return Err(Failure::Usage(format!("--k-min {k_min} / --k-max {k_max}: invalid range")));
            }
            if k_max > enumerator.limit() {
                return Err(Failure::Data(format!(
                    "--k-max {k_max} exceeds the enumeration limit {}",
                    enumerator.limit()
                )));
            }
            let rows = enumerator.bias_table(k_min, k_max, p, stat.stat(), stat.policy())?;
            Ok(output::bias(format, &rows))
        }
        Command::Game { mode, k, p, bet, run, trials, chunk_size } => {
            let config = GameConfig {
                mode: match mode {
                    ModeArg::TwoStage => GameMode::TwoStage,
                    ModeArg::OneStage => GameMode::OneStage,
                },
                model: model(p, k)?,
                bet: match bet {
                    BetArg::H => Bet::Hit,
                    BetArg::T => Bet::Miss,
                },
                trials,
                stream: stream(cli.seed, chunk_size)?,
                run,
            };
            let result = sampler.play_selection_game(&config)?;
            Ok(output::game(format, &config, &result))
        }
        Command::Learn { k, p, stat, episodes, stride, chunk_size } => {
            if episodes == 0 {
                return Err(Failure::Usage("--episodes must be at least 1".into()));
            }
            if stride == 0 {
                return Err(Failure::Usage("--stride must be at least 1".into()));
            }
            let trace = sampler.run_gambler_learning(
                model(p, k)?,
                stat.stat(),
                stat.policy(),
                episodes,
                stream(cli.seed, chunk_size)?,
                stride,
            )?;
            Ok(output::learn(format, &trace))
        }
        Command::Test { input, p, convention, stat, tail, trials, chunk_size } => {
            if trials == 0 {
                return Err(Failure::Usage("--trials must be at least 1".into()));
            }
            let records = if input == "-" {
                ingest(io::stdin().lock())?
            } else {
                let file = File::open(&input).map_err(|e| Failure::Data(format!("{input}: {e}")))?;
                ingest(BufReader::new(file))?
            };
            let spec = ReferenceSpec {
                convention: match convention {
                    ConventionArg::PerSequence => Convention::PerSequenceUnweighted,
                    ConventionArg::Pooled => Convention::PooledLongRun,
                },
                p,
                stat: stat.stat(),
                policy: stat.policy(),
                tail: match tail {
                    TailArg::Upper => Tail::Upper,
                    TailArg::Lower => Tail::Lower,
                },
            };
            let stream = stream(cli.seed, chunk_size)?;
            let analyzer = Analyzer::new(enumerator);
            let reports = records
                .iter()
                .map(|r| analyzer.hot_hand_report(r, &spec, trials, stream))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(output::test(format, &stream.metadata(trials), &reports))
        }
        Command::Stat { sequences, stat } => {
            let texts: Vec<String> = if sequences == ["-"] {
                let mut buf = String::new();
                io::stdin().lock().read_to_string(&mut buf)?;
                buf.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(String::from).collect()
            } else {
                sequences
            };
            let kind = stat.stat();
            kind.validate()?;
            let units = texts
                .iter()
                .map(|t| Outcomes::parse(t).map_err(|e| Failure::Data(format!("{t:?}: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(output::stat(format, kind, &units))
        }
    }
}

fn model(p: f64, k: u32) -> Result<NullModel, Failure> {
    NullModel::new(p, k).map_err(|e| Failure::Usage(format!("--p/--k: {e}")))
}

fn stream(seed: u64, chunk_size: u64) -> Result<SeededStream, Failure> {
    SeededStream::with_chunk_size(seed, chunk_size).map_err(|e| Failure::Usage(format!("--chunk-size: {e}")))
}
