//! Seeded Monte Carlo over the Bernoulli null model.
//!
//! Work is cut into fixed chunks of `chunk_size` trials. Chunk `c` draws from
//! ChaCha8 keyed by the user seed with stream id `c`, so every chunk has its
//! own independent substream and the output depends only on
//! `(seed, chunk_size, trials)`, never on the number of workers. Chunk
//! tallies are merged in chunk order.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{NullModel, UndefinedPolicy};
use crate::parallel::{map_ordered, Execution};
use crate::sequence::{len_mask, Flips, Outcomes, RunSide, Sequence, StatKind, Tally, MAX_PACKED_LEN};

/// Identifies the generator and substream scheme in result metadata.
pub const GENERATOR_ID: &str = "chacha8 (rand_chacha 0.3), seed_from_u64(seed), stream = chunk index";
pub const DEFAULT_CHUNK_SIZE: u64 = 65_536;

/// How many chunks of a learning run are generated ahead at once.
const LEARNING_BATCH: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SeededStream {
    pub seed: u64,
    pub chunk_size: u64,
}

impl SeededStream {
    pub fn new(seed: u64) -> Self {
        SeededStream { seed, chunk_size: DEFAULT_CHUNK_SIZE }
    }

    pub fn with_chunk_size(seed: u64, chunk_size: u64) -> Result<Self> {
        if chunk_size == 0 {
            return Err(Error::ZeroCount("chunk size"));
        }
        Ok(SeededStream { seed, chunk_size })
    }

    /// A stream for an unrelated purpose, derived deterministically from this one.
    pub fn derive(&self, salt: u64) -> SeededStream {
        // splitmix64 finaliser
        let mut z = self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        SeededStream { seed: z ^ (z >> 31), chunk_size: self.chunk_size }
    }

    pub fn chunk_rng(&self, chunk: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(chunk);
        rng
    }

    fn chunk_count(&self, total: u64) -> usize {
        total.div_ceil(self.chunk_size) as usize
    }

    fn chunk_len(&self, chunk: usize, total: u64) -> u64 {
        let start = chunk as u64 * self.chunk_size;
        self.chunk_size.min(total - start)
    }

    pub fn metadata(&self, trials: u64) -> StreamMetadata {
        StreamMetadata { seed: self.seed, chunk_size: self.chunk_size, generator: GENERATOR_ID, trials }
    }
}

/// Reproducibility record attached to every stochastic result.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StreamMetadata {
    pub seed: u64,
    pub chunk_size: u64,
    pub generator: &'static str,
    pub trials: u64,
}

/// Runs `f(rng, chunk_len)` for every chunk of `total` trials; results come
/// back in chunk order.
pub(crate) fn run_chunks<T, F>(exec: Execution, stream: &SeededStream, total: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync + Send,
{
    map_ordered(exec, stream.chunk_count(total), |c| {
        let mut rng = stream.chunk_rng(c as u64);
        f(&mut rng, stream.chunk_len(c, total))
    })
}

/// A sequence drawn from the null model, packed when it fits in a word.
#[derive(Clone, Debug)]
pub enum Draw {
    Packed(Sequence),
    Unpacked(Outcomes),
}

impl Draw {
    pub fn sample<R: RngCore>(rng: &mut R, model: &NullModel) -> Draw {
        let k = model.k() as usize;
        if k <= MAX_PACKED_LEN {
            let bits = if model.is_fair() {
                rng.next_u64() & len_mask(k)
            } else {
                (0..k).fold(0u64, |acc, i| acc | ((rng.gen_bool(model.p()) as u64) << i))
            };
            Draw::Packed(Sequence::from_bits_unchecked(bits, k))
        } else {
            let flips = if model.is_fair() {
                let mut flips = Vec::with_capacity(k);
                while flips.len() < k {
                    let word = rng.next_u64();
                    let take = (k - flips.len()).min(64);
                    flips.extend((0..take).map(|i| (word >> i) & 1 == 1));
                }
                flips
            } else {
                (0..k).map(|_| rng.gen_bool(model.p())).collect()
            };
            Draw::Unpacked(Outcomes::new(flips).expect("model length is within bounds"))
        }
    }

    pub fn is_hit(&self, index: usize) -> bool {
        match self {
            Draw::Packed(s) => s.is_hit(index),
            Draw::Unpacked(o) => o.is_hit(index),
        }
    }

    fn eligible_count(&self, side: RunSide, run: u32) -> usize {
        match self {
            Draw::Packed(s) => s.eligible_mask(side, run).count_ones() as usize,
            Draw::Unpacked(o) => o.tally(side, run).eligible as usize,
        }
    }

    /// The `n`-th (zero-based) eligible position.
    fn nth_eligible(&self, side: RunSide, run: u32, n: usize) -> usize {
        match self {
            Draw::Packed(s) => {
                let mut mask = s.eligible_mask(side, run);
                for _ in 0..n {
                    mask &= mask - 1;
                }
                mask.trailing_zeros() as usize
            }
            Draw::Unpacked(o) => o.eligible_positions(side, run)[n],
        }
    }
}

impl Flips for Draw {
    fn flip_count(&self) -> usize {
        match self {
            Draw::Packed(s) => s.len(),
            Draw::Unpacked(o) => o.len(),
        }
    }

    fn tally(&self, side: RunSide, run: u32) -> Tally {
        match self {
            Draw::Packed(s) => s.tally(side, run),
            Draw::Unpacked(o) => o.tally(side, run),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct MeanTally {
    draws: u64,
    defined: u64,
    sum: f64,
    sum_sq: f64,
}

impl MeanTally {
    fn push(&mut self, value: Option<f64>) {
        self.draws += 1;
        if let Some(v) = value {
            self.defined += 1;
            self.sum += v;
            self.sum_sq += v * v;
        }
    }

    fn merge(mut self, other: &MeanTally) -> MeanTally {
        self.draws += other.draws;
        self.defined += other.defined;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self
    }

    fn denominator(&self, policy: UndefinedPolicy) -> u64 {
        match policy {
            UndefinedPolicy::Exclude => self.defined,
            UndefinedPolicy::IncludeAsZero => self.draws,
        }
    }

    fn mean(&self, policy: UndefinedPolicy) -> f64 {
        self.sum / self.denominator(policy) as f64
    }

    fn std_error(&self, policy: UndefinedPolicy) -> f64 {
        let n = self.denominator(policy) as f64;
        if n < 2.0 {
            return 0.0;
        }
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Monte Carlo estimate of an expected per-sequence statistic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleEstimate {
    pub model: NullModel,
    pub stat: StatKind,
    pub policy: UndefinedPolicy,
    pub estimate: f64,
    pub std_error: f64,
    pub draws: u64,
    pub defined_draws: u64,
    pub metadata: StreamMetadata,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameMode {
    /// Uniform qualifying sequence, then a uniform eligible position in it.
    TwoStage,
    /// Uniform over all eligible positions of all sequences.
    OneStage,
}

/// Bob's call on the flip following the selected position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Bet {
    #[serde(rename = "H")]
    Hit,
    #[serde(rename = "T")]
    Miss,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GameConfig {
    pub mode: GameMode,
    pub model: NullModel,
    pub bet: Bet,
    pub trials: u64,
    pub stream: SeededStream,
    /// The selected position must follow this many consecutive hits.
    pub run: u32,
}

impl GameConfig {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::ZeroCount("trials"));
        }
        StatKind::AfterHitRun(self.run).check_len(self.model.k() as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameResult {
    pub mode: GameMode,
    pub bet: Bet,
    pub trials: u64,
    pub wins: u64,
    pub win_freq: f64,
    pub std_error: f64,
    /// Draws thrown away before a position was selected.
    pub rejected_draws: u64,
    pub metadata: StreamMetadata,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Snapshot {
    pub episode: u64,
    pub defined_episodes: u64,
    pub estimate: f64,
}

/// Running belief of an agent that averages per-sequence statistics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearningTrace {
    pub model: NullModel,
    pub stat: StatKind,
    pub policy: UndefinedPolicy,
    pub episodes: u64,
    pub trace_stride: u64,
    pub running_estimate: Vec<Snapshot>,
    pub final_estimate: f64,
    pub final_std_error: f64,
    pub skipped_episodes: u64,
    pub metadata: StreamMetadata,
}

/// Monte Carlo engine bound to an execution strategy.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sampler {
    execution: Execution,
}

impl Sampler {
    pub fn new(execution: Execution) -> Self {
        Sampler { execution }
    }

    pub fn sample_unweighted_mean(
        &self,
        model: NullModel,
        stat: StatKind,
        policy: UndefinedPolicy,
        trials: u64,
        stream: SeededStream,
    ) -> Result<SampleEstimate> {
        if trials == 0 {
            return Err(Error::ZeroCount("trials"));
        }
        stat.check_len(model.k() as usize)?;
        policy.check(stat)?;
        let tally = run_chunks(self.execution, &stream, trials, |rng, n| {
            let mut t = MeanTally::default();
            for _ in 0..n {
                let draw = Draw::sample(rng, &model);
                t.push(stat.tally(&draw).value().map(|v| v.to_f64()));
            }
            t
        })
        .iter()
        .fold(MeanTally::default(), MeanTally::merge);
        if tally.defined == 0 {
            return Err(Error::ZeroDefinedDraws);
        }
        Ok(SampleEstimate {
            model,
            stat,
            policy,
            estimate: tally.mean(policy),
            std_error: tally.std_error(policy),
            draws: tally.draws,
            defined_draws: tally.defined,
            metadata: stream.metadata(trials),
        })
    }

    pub fn play_selection_game(&self, config: &GameConfig) -> Result<GameResult> {
        config.validate()?;
        let model = config.model;
        let run = config.run;
        let slots = model.k() as usize - run as usize;
        let bet_hit = config.bet == Bet::Hit;
        let tallies = run_chunks(self.execution, &config.stream, config.trials, |rng, n| {
            let (mut wins, mut rejected) = (0u64, 0u64);
            for _ in 0..n {
                let position = loop {
                    let draw = Draw::sample(rng, &model);
                    let count = draw.eligible_count(RunSide::Hits, run);
                    let accepted = match config.mode {
                        GameMode::TwoStage => count > 0,
                        GameMode::OneStage => rng.gen_range(0..slots) < count,
                    };
                    if accepted {
                        let pick = rng.gen_range(0..count);
                        break draw.is_hit(draw.nth_eligible(RunSide::Hits, run, pick));
                    }
                    rejected += 1;
                };
                wins += (position == bet_hit) as u64;
            }
            (wins, rejected)
        });
        let (wins, rejected_draws) = tallies.iter().fold((0, 0), |(w, r), &(a, b)| (w + a, r + b));
        let win_freq = wins as f64 / config.trials as f64;
        Ok(GameResult {
            mode: config.mode,
            bet: config.bet,
            trials: config.trials,
            wins,
            win_freq,
            std_error: (win_freq * (1.0 - win_freq) / config.trials as f64).sqrt(),
            rejected_draws,
            metadata: config.stream.metadata(config.trials),
        })
    }

    #[allow(clippy::too_many_arguments)]
    pub fn run_gambler_learning(
        &self,
        model: NullModel,
        stat: StatKind,
        policy: UndefinedPolicy,
        episodes: u64,
        stream: SeededStream,
        trace_stride: u64,
    ) -> Result<LearningTrace> {
        if episodes == 0 {
            return Err(Error::ZeroCount("episodes"));
        }
        if trace_stride == 0 {
            return Err(Error::ZeroCount("trace stride"));
        }
        stat.check_len(model.k() as usize)?;
        policy.check(stat)?;

        let chunks = stream.chunk_count(episodes);
        let mut tally = MeanTally::default();
        let mut running_estimate = Vec::new();
        let mut episode = 0u64;
        for batch_start in (0..chunks).step_by(LEARNING_BATCH) {
            let batch = LEARNING_BATCH.min(chunks - batch_start);
            let values: Vec<Vec<Option<f64>>> = map_ordered(self.execution, batch, |i| {
                let c = batch_start + i;
                let mut rng = stream.chunk_rng(c as u64);
                (0..stream.chunk_len(c, episodes))
                    .map(|_| stat.tally(&Draw::sample(&mut rng, &model)).value().map(|v| v.to_f64()))
                    .collect()
            });
            for value in values.into_iter().flatten() {
                tally.push(value);
                episode += 1;
                if episode.is_multiple_of(trace_stride) && tally.denominator(policy) > 0 {
                    running_estimate.push(Snapshot {
                        episode,
                        defined_episodes: tally.defined,
                        estimate: tally.mean(policy),
                    });
                }
            }
        }
        if tally.defined == 0 {
            return Err(Error::ZeroDefinedDraws);
        }
        Ok(LearningTrace {
            model,
            stat,
            policy,
            episodes,
            trace_stride,
            running_estimate,
            final_estimate: tally.mean(policy),
            final_std_error: tally.std_error(policy),
            skipped_episodes: tally.draws - tally.defined,
            metadata: stream.metadata(episodes),
        })
    }
}

pub fn sample_unweighted_mean(
    model: NullModel,
    stat: StatKind,
    policy: UndefinedPolicy,
    trials: u64,
    stream: SeededStream,
) -> Result<SampleEstimate> {
    Sampler::default().sample_unweighted_mean(model, stat, policy, trials, stream)
}

pub fn play_selection_game(config: &GameConfig) -> Result<GameResult> {
    Sampler::default().play_selection_game(config)
}

pub fn run_gambler_learning(
    model: NullModel,
    stat: StatKind,
    policy: UndefinedPolicy,
    episodes: u64,
    stream: SeededStream,
    trace_stride: u64,
) -> Result<LearningTrace> {
    Sampler::default().run_gambler_learning(model, stat, policy, episodes, stream, trace_stride)
}
