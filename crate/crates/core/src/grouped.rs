//! Averages of group means: pooled (weighted by group size) versus unweighted
//! (one vote per group).

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GroupSummary {
    pub mean: f64,
    pub count: u64,
}

impl GroupSummary {
    pub fn new(mean: f64, count: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::ZeroCount("group count"));
        }
        Ok(GroupSummary { mean, count })
    }
}

/// Mean over all members: `sum(mean_i * count_i) / sum(count_i)`.
pub fn pooled_mean(groups: &[GroupSummary]) -> Result<f64> {
    if groups.is_empty() {
        return Err(Error::EmptyList);
    }
    let total: f64 = groups.iter().map(|g| g.count as f64).sum();
    let weighted: f64 = groups.iter().map(|g| g.mean * g.count as f64).sum();
    Ok(weighted / total)
}

/// Mean of the group means, ignoring group sizes.
pub fn unweighted_mean(groups: &[GroupSummary]) -> Result<f64> {
    if groups.is_empty() {
        return Err(Error::EmptyList);
    }
    Ok(groups.iter().map(|g| g.mean).sum::<f64>() / groups.len() as f64)
}
