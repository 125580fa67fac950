//! Rank-one summand pruning for a staged system of finite direct sums of
//! homogeneous blocks.
//!
//! Only maps between rank-one summands of consecutive stages matter: a
//! rank-one summand can only receive a nonzero map from another rank-one
//! summand. The system is clean at stage `j` once no rank-one summand of
//! stage `j` is reachable from stage 1.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PruneError {
    #[error("system has no stages")]
    Empty,
    #[error("{maps} map layers for {stages} stages; expected {}", stages.saturating_sub(1))]
    LayerCount { stages: usize, maps: usize },
    #[error("stage {stage} summand {summand} has rank 0")]
    ZeroRank { stage: usize, summand: usize },
    #[error("map layer {layer} refers to summand {summand} outside stage {stage}")]
    OutOfRange { layer: usize, stage: usize, summand: usize },
    #[error("map layer {layer} touches summand {summand} of stage {stage}, which is not rank one")]
    NotRankOne { layer: usize, stage: usize, summand: usize },
}

/// Stages are 1-based in verdicts; summands are 0-based within a stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StagedSystem {
    /// `ranks[j]` lists the summand ranks at stage `j + 1`.
    pub ranks: Vec<Vec<u64>>,
    /// `maps[j]` lists the nonzero partial maps `(from, to)` from stage
    /// `j + 1` to stage `j + 2`.
    #[serde(default)]
    pub maps: Vec<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PruneVerdict {
    Clean { stage: usize },
    SurvivingChain { length: usize, chain: Vec<usize> },
}

impl StagedSystem {
    fn validate(&self) -> Result<(), PruneError> {
        if self.ranks.is_empty() {
            return Err(PruneError::Empty);
        }
        if self.maps.len() + 1 != self.ranks.len() {
            return Err(PruneError::LayerCount {
                stages: self.ranks.len(),
                maps: self.maps.len(),
            });
        }
        for (s, stage) in self.ranks.iter().enumerate() {
            if let Some(summand) = stage.iter().position(|&r| r == 0) {
                return Err(PruneError::ZeroRank { stage: s + 1, summand });
            }
        }
        for (layer, edges) in self.maps.iter().enumerate() {
            for &(from, to) in edges {
                for (stage, summand) in [(layer, from), (layer + 1, to)] {
                    match self.ranks[stage].get(summand) {
                        None => {
                            return Err(PruneError::OutOfRange {
                                layer: layer + 1,
                                stage: stage + 1,
                                summand,
                            })
                        }
                        Some(&r) if r != 1 => {
                            return Err(PruneError::NotRankOne {
                                layer: layer + 1,
                                stage: stage + 1,
                                summand,
                            })
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn prune_rank_one(system: &StagedSystem) -> Result<PruneVerdict, PruneError> {
    system.validate()?;
    let rank_one = |stage: usize| -> BTreeSet<usize> {
        system.ranks[stage]
            .iter()
            .enumerate()
            .filter(|&(_, &r)| r == 1)
            .map(|(j, _)| j)
            .collect()
    };
    // parent[s][j] = predecessor of summand j at stage s on a surviving chain.
    let mut parents: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut alive = rank_one(0);
    if alive.is_empty() {
        return Ok(PruneVerdict::Clean { stage: 1 });
    }
    for (layer, edges) in system.maps.iter().enumerate() {
        let mut next = BTreeSet::new();
        let mut links = Vec::new();
        for &(from, to) in edges {
            if alive.contains(&from) && next.insert(to) {
                links.push((to, from));
            }
        }
        if next.is_empty() {
            return Ok(PruneVerdict::Clean { stage: layer + 2 });
        }
        parents.push(links);
        alive = next;
    }
    let mut chain = vec![*alive.iter().next().expect("nonempty")];
    for links in parents.iter().rev() {
        let cur = *chain.last().expect("nonempty");
        let &(_, from) = links.iter().find(|&&(to, _)| to == cur).expect("every survivor has a parent");
        chain.push(from);
    }
    chain.reverse();
    Ok(PruneVerdict::SurvivingChain {
        length: chain.len(),
        chain,
    })
}
