//! Conditional streak statistics on binary hit/miss sequences.
//!
//! * [`sequence`]: packed and unpacked sequences, run-conditioned frequencies
//!   and the hit-minus-miss difference statistic.
//! * [`grouped`]: pooled versus unweighted averages of group means.
//! * [`exact`]: exhaustive enumeration of the `2^k` sequence space.
//! * [`sampling`]: seeded, chunked Monte Carlo for large `k`, the two
//!   selection games and the belief-learning process.
//! * [`inference`]: hot-hand reports for recorded shot sequences.

pub mod error;
pub mod exact;
pub mod grouped;
pub mod inference;
pub mod parallel;
pub mod ratio;
pub mod sampling;
pub mod sequence;

pub use error::{Error, Result};
pub use exact::{BiasSummary, Enumerator, NullModel, SequenceTable, TableRow, UndefinedPolicy};
pub use grouped::{pooled_mean, unweighted_mean, GroupSummary};
pub use parallel::Execution;
pub use ratio::Ratio;
pub use sampling::{GameConfig, GameMode, GameResult, LearningTrace, SampleEstimate, SeededStream};
pub use sequence::{
    conditional_freq, d_statistic, eligible_trials, statistic, Flips, Outcomes, RunSide, Sequence, StatKind,
    StatTally, Tally,
};
