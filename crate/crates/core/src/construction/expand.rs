//! Compact bundle layouts and the perforation expansion
//! `2·φ_{1i}(ξ_{I₁¹}) ⊗ p_i² ⊗ ⋯ ⊗ p_i^e` over `X_i^e`.
//!
//! `p_i = θ₁ ⊕ 2ξ_{[1,N₁]} ⊕ ⊕_{j=2}^{i} (m_j·d_{j−1})·ξ_{[N_{j−1}+1, N_j]}`,
//! and `φ_{1i}` has the same shape started from a single summand.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::stage::{StageError, StageState};
use crate::bundles::{BundleError, LineBundle, Reindexing, VectorBundle};
use crate::json;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpandError {
    #[error("expansion needs {summands} summands and about {cells} support cells; guard allows {max_summands} and {max_cells}")]
    SizeGuard {
        summands: String,
        cells: String,
        max_summands: usize,
        max_cells: usize,
    },
    #[error("exponent must be at least 1")]
    ZeroExponent,
    #[error(transparent)]
    Stage(#[from] StageError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
}

/// Limits on materialised expansions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionGuard {
    pub max_summands: usize,
    /// Bound on `Σ |support|` over all summands.
    pub max_cells: usize,
}

impl Default for ExpansionGuard {
    fn default() -> Self {
        Self {
            max_summands: 20_000,
            max_cells: 8_000_000,
        }
    }
}

impl ExpansionGuard {
    pub fn with_summands(max_summands: usize) -> Self {
        Self {
            max_summands,
            ..Self::default()
        }
    }

    fn admit(&self, summands: &BigUint, cells: &BigUint) -> Result<(usize, usize), ExpandError> {
        match (summands.to_usize(), cells.to_usize()) {
            (Some(s), Some(c)) if s <= self.max_summands && c <= self.max_cells => Ok((s, c)),
            _ => Err(ExpandError::SizeGuard {
                summands: summands.to_string(),
                cells: cells.to_string(),
                max_summands: self.max_summands,
                max_cells: self.max_cells,
            }),
        }
    }
}

/// `count` copies of `ξ_{[lo, hi]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineGroup {
    #[serde(with = "json::biguint")]
    pub lo: BigUint,
    #[serde(with = "json::biguint")]
    pub hi: BigUint,
    #[serde(with = "json::biguint")]
    pub count: BigUint,
}

impl LineGroup {
    fn width(&self) -> BigUint {
        &self.hi - &self.lo + 1u32
    }
}

/// `θ_trivial ⊕ ⊕ groups` over `(S²)^ambient`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    #[serde(with = "json::biguint")]
    pub ambient: BigUint,
    #[serde(with = "json::biguint")]
    pub trivial: BigUint,
    pub groups: Vec<LineGroup>,
}

impl Layout {
    pub fn rank(&self) -> BigUint {
        self.groups.iter().fold(self.trivial.clone(), |acc, g| acc + &g.count)
    }

    pub fn line_count(&self) -> BigUint {
        self.groups.iter().map(|g| g.count.clone()).sum()
    }

    pub fn cells(&self) -> BigUint {
        self.groups.iter().map(|g| &g.count * g.width()).sum()
    }

    pub fn materialize(&self, guard: &ExpansionGuard) -> Result<VectorBundle, ExpandError> {
        let (summands, _) = guard.admit(&self.rank(), &self.cells())?;
        let ambient = self.ambient.to_usize().ok_or_else(|| ExpandError::SizeGuard {
            summands: summands.to_string(),
            cells: self.ambient.to_string(),
            max_summands: guard.max_summands,
            max_cells: guard.max_cells,
        })?;
        let mut lines = Vec::with_capacity(summands);
        for g in &self.groups {
            let line = LineBundle::xi_range(ambient, to_usize(&g.lo), to_usize(&g.hi))?;
            lines.extend(std::iter::repeat_n(line, to_usize(&g.count)));
        }
        Ok(VectorBundle::new(ambient, to_usize(&self.trivial), lines)?)
    }
}

fn to_usize(value: &BigUint) -> usize {
    value.to_usize().expect("bounded by the guard")
}

/// Which summand `φ_{1i}` is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiSource {
    Xi,
    Theta,
}

pub fn p_layout(state: &StageState, stage: usize) -> Result<Layout, StageError> {
    let params = state.params(stage)?;
    let first = state.params(1)?;
    let mut groups = vec![LineGroup {
        lo: BigUint::one(),
        hi: first.sphere_count.clone(),
        count: BigUint::from(2u32),
    }];
    for j in 2..=stage {
        let q = state.params(j)?;
        let before = state.params(j - 1)?;
        groups.push(LineGroup {
            lo: &before.sphere_count + 1u32,
            hi: q.sphere_count.clone(),
            count: q.m.as_ref().expect("m_j exists for j ≥ 2") * &before.rank,
        });
    }
    Ok(Layout {
        ambient: params.sphere_count.clone(),
        trivial: BigUint::one(),
        groups,
    })
}

/// `φ_{1i}(ξ_{I₁¹})` or `φ_{1i}(θ₁)` over `X_i`.
pub fn phi_layout(state: &StageState, stage: usize, source: PhiSource) -> Result<Layout, StageError> {
    let params = state.params(stage)?;
    let first = state.params(1)?;
    let mut groups = Vec::new();
    let mut trivial = BigUint::zero();
    match source {
        PhiSource::Xi => groups.push(LineGroup {
            lo: BigUint::one(),
            hi: first.sphere_count.clone(),
            count: BigUint::one(),
        }),
        PhiSource::Theta => trivial = BigUint::one(),
    }
    let mut rank = BigUint::one();
    for j in 2..=stage {
        let q = state.params(j)?;
        let before = state.params(j - 1)?;
        let m = q.m.as_ref().expect("m_j exists for j ≥ 2");
        groups.push(LineGroup {
            lo: &before.sphere_count + 1u32,
            hi: q.sphere_count.clone(),
            count: m * &rank,
        });
        rank *= m + 1u32;
    }
    Ok(Layout {
        ambient: params.sphere_count.clone(),
        trivial,
        groups,
    })
}

/// Rank of the expansion: `2·rank(φ_{1i})·d_i^{e−1}`.
pub fn expansion_rank(state: &StageState, stage: usize, exponent: u32) -> Result<BigUint, ExpandError> {
    if exponent == 0 {
        return Err(ExpandError::ZeroExponent);
    }
    let phi = phi_layout(state, stage, PhiSource::Xi)?.rank();
    let d = &state.params(stage)?.rank;
    Ok(num_traits::Pow::pow(d, exponent - 1) * phi * 2u32)
}

/// Generic route: materialise `φ` and `p_i`, pull back into the blocks of
/// `X_i^e`, tensor out, and keep the line summands.
pub fn perforation_expand(
    state: &StageState,
    stage: usize,
    exponent: u32,
    guard: &ExpansionGuard,
) -> Result<VectorBundle, ExpandError> {
    let summands = expansion_rank(state, stage, exponent)?;
    let big_n = &state.params(stage)?.sphere_count;
    let ambient_big = big_n * exponent;
    guard.admit(&summands, &(&summands * &ambient_big))?;
    let n = to_usize(big_n);
    let ambient = to_usize(&ambient_big);

    let phi = phi_layout(state, stage, PhiSource::Xi)?.materialize(guard)?;
    let p = p_layout(state, stage)?.materialize(guard)?;
    let mut acc = phi.pullback(&Reindexing::shift(n, 0, ambient)?)?.multiple(2);
    for l in 2..=exponent as usize {
        let block = p.pullback(&Reindexing::shift(n, (l - 1) * n, ambient)?)?;
        acc = acc.tensor(&block)?;
    }
    debug_assert_eq!(acc.trivial_rank(), 0);
    Ok(acc)
}

/// Closed form at stage 1: two copies of `I₁`, and `2^{|J|+1}` copies of
/// `I₁ ∪ I_J` for each nonempty `J ⊆ {2..e}`, with `I_l` the whole block `l`.
pub fn stage_one_family(n1: usize, exponent: u32) -> Vec<Vec<usize>> {
    let block = |l: usize| ((l - 1) * n1 + 1)..=(l * n1);
    let others = exponent.saturating_sub(1) as usize;
    let mut family = Vec::new();
    for mask in 0u64..(1u64 << others) {
        let mut set: Vec<usize> = block(1).collect();
        for bit in 0..others {
            if mask >> bit & 1 == 1 {
                set.extend(block(bit + 2));
            }
        }
        let copies = 1usize << (mask.count_ones() + 1);
        family.extend(std::iter::repeat_n(set, copies));
    }
    family
}

/// Split of expansion supports at stage `i ≥ 2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupportPartition {
    /// Supports disjoint from every `I_l^i`.
    pub pulled_back: usize,
    /// Supports containing some `I_l^i`.
    pub new: usize,
    /// Supports of neither kind.
    pub stray: usize,
    /// Whether the disjoint part equals the relabelled stage-(i−1) expansion.
    pub pulled_back_matches: bool,
}

impl SupportPartition {
    pub fn holds(&self) -> bool {
        self.stray == 0 && self.pulled_back_matches
    }
}

/// Checks that the stage-`i` expansion splits into the relabelled
/// stage-`(i−1)` expansion and summands that each contain a whole block.
pub fn support_partition(
    state: &StageState,
    stage: usize,
    exponent: u32,
    guard: &ExpansionGuard,
) -> Result<SupportPartition, ExpandError> {
    assert!(stage >= 2, "the partition starts at stage 2");
    let current = perforation_expand(state, stage, exponent, guard)?;
    let previous = perforation_expand(state, stage - 1, exponent, guard)?;
    let blocks: Vec<(usize, usize)> = state
        .blocks(stage, exponent)?
        .iter()
        .map(|b| (to_usize(&b.lo), to_usize(&b.hi)))
        .collect();
    let n = to_usize(&state.params(stage)?.sphere_count);
    let n_prev = to_usize(&state.params(stage - 1)?.sphere_count);

    let mut pulled = Vec::new();
    let (mut new, mut stray) = (0, 0);
    for support in current.supports() {
        let hits = |&(lo, hi): &(usize, usize)| support.iter().filter(|&&s| lo <= s && s <= hi).count();
        if blocks.iter().all(|b| hits(b) == 0) {
            pulled.push(support);
        } else if blocks.iter().any(|b| hits(b) == b.1 - b.0 + 1) {
            new += 1;
        } else {
            stray += 1;
        }
    }
    // Coordinate s in block l of X_(i−1)^e sits at (l−1)N_i + (s − (l−1)N_(i−1)).
    let mut relabelled: Vec<Vec<usize>> = previous
        .supports()
        .into_iter()
        .map(|support| {
            support
                .into_iter()
                .map(|s| {
                    let l = (s - 1) / n_prev;
                    l * n + (s - l * n_prev)
                })
                .collect()
        })
        .collect();
    relabelled.sort();
    let pulled_back = pulled.len();
    pulled.sort();
    Ok(SupportPartition {
        pulled_back,
        new,
        stray,
        pulled_back_matches: pulled == relabelled,
    })
}
