//! Stage parameters of the inductive system.
//!
//! Stage `i` lives over `X_i = (S²)^{N_i}` with `N_i = n_1⋯n_i`. The unit
//! projection `p_i` has rank `d_i`, and the `e`-fold tensor power is
//! watched through the blocks `I_l^i` of `X_i^e`, `l = 1..e`. Parameters are
//! kept as big integers; bundles are materialised only on request.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::json;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StageError {
    #[error("target_n must be at least 1")]
    ZeroTarget,
    #[error("n_1 override must be at least 1")]
    ZeroN1,
    #[error("policy chose m = 0 at stage {stage}; a point-evaluation summand is required")]
    ZeroMultiplicity { stage: usize },
    #[error("multiplicity schedule has no entry for stage {stage}")]
    ScheduleExhausted { stage: usize },
    #[error("exponent at stage {stage} overflows")]
    ExponentOverflow { stage: usize },
    #[error("stage {0} does not exist")]
    NoSuchStage(usize),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Exponent `target_n` at every stage.
    #[default]
    Finite,
    /// Exponent `i·target_n` at stage `i`.
    Infinite,
}

/// How `m_{i+1}` is chosen before `n_{i+1}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MultiplicityPolicy {
    /// Least `m ≥ 1` with `(d_i(1+m))^{target_n+1} ≥ 2^{i+1}·2N_i`.
    #[default]
    SummableTail,
    Constant { m: u64 },
    /// `m[0]` is `m_2`, `m[1]` is `m_3`, and so on.
    Schedule { m: Vec<u64> },
}

impl MultiplicityPolicy {
    fn choose(&self, from: &StageParams, target_n: u32) -> Result<BigUint, StageError> {
        let next = from.stage + 1;
        let m = match self {
            MultiplicityPolicy::SummableTail => {
                let target = (BigUint::one() << (from.stage + 2)) * &from.sphere_count;
                let root = ceil_root(&target, target_n + 1);
                let factor = Integer::div_ceil(&root, &from.rank);
                if factor > BigUint::one() {
                    factor - 1u32
                } else {
                    BigUint::one()
                }
            }
            MultiplicityPolicy::Constant { m } => BigUint::from(*m),
            MultiplicityPolicy::Schedule { m } => BigUint::from(
                *m.get(from.stage - 1)
                    .ok_or(StageError::ScheduleExhausted { stage: next })?,
            ),
        };
        if m.is_zero() {
            return Err(StageError::ZeroMultiplicity { stage: next });
        }
        Ok(m)
    }
}

/// Least `r` with `r^k ≥ x`.
pub fn ceil_root(x: &BigUint, k: u32) -> BigUint {
    let r = x.nth_root(k);
    if Pow::pow(&r, k) == *x {
        r
    } else {
        r + 1u32
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageParams {
    pub stage: usize,
    #[serde(rename = "n_i", with = "json::biguint")]
    pub n: BigUint,
    /// `N_i`.
    #[serde(rename = "N_i", with = "json::biguint")]
    pub sphere_count: BigUint,
    /// `m_i`; absent at stage 1.
    #[serde(rename = "m_i", with = "json::opt_biguint")]
    pub m: Option<BigUint>,
    /// `d_i = rank(p_i)`.
    #[serde(rename = "d_i", with = "json::biguint")]
    pub rank: BigUint,
    /// Tensor exponent `e` the stage is sized for.
    pub exponent: u32,
    /// Number of disc factors `i·d_i²`, when tracked.
    #[serde(with = "json::opt_biguint")]
    pub disc_count: Option<BigUint>,
}

impl StageParams {
    /// Real dimension of the base: `2N_i`, plus `2·i·d_i²` with discs.
    pub fn real_dim(&self) -> BigUint {
        let mut dim = &self.sphere_count * 2u32;
        if let Some(discs) = &self.disc_count {
            dim += discs * 2u32;
        }
        dim
    }
}

/// `I_l^i`, inclusive and 1-based in the coordinates of `X_i^e`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub l: u32,
    #[serde(with = "json::biguint")]
    pub lo: BigUint,
    #[serde(with = "json::biguint")]
    pub hi: BigUint,
}

impl Block {
    pub fn len(&self) -> BigUint {
        if self.hi < self.lo {
            BigUint::zero()
        } else {
            &self.hi - &self.lo + 1u32
        }
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageConfig {
    pub target_n: u32,
    #[serde(default)]
    pub variant: Variant,
    #[serde(default)]
    pub discs: bool,
    #[serde(default)]
    pub policy: MultiplicityPolicy,
    /// Replaces `n_1 = 3^target_n`.
    #[serde(default)]
    pub n1: Option<u64>,
}

impl StageConfig {
    pub fn new(target_n: u32) -> Self {
        Self {
            target_n,
            variant: Variant::Finite,
            discs: false,
            policy: MultiplicityPolicy::SummableTail,
            n1: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageState {
    pub target_n: u32,
    pub variant: Variant,
    pub discs: bool,
    pub policy: MultiplicityPolicy,
    /// False once `n_1` is overridden.
    pub canonical: bool,
    history: Vec<StageParams>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinimalityReport {
    pub stage: usize,
    /// `d_i^e`.
    #[serde(with = "json::biguint")]
    pub required: BigUint,
    /// `N_i − N_{i−1}`.
    #[serde(with = "json::biguint")]
    pub block_size: BigUint,
    /// `(n_i − 1)·N_{i−1} − N_{i−1}`, the block size one step smaller.
    #[serde(with = "json::biguint")]
    pub block_size_one_less: BigUint,
    /// `d_i^e + 2N_{i−1}`.
    #[serde(with = "json::biguint")]
    pub upper_bound: BigUint,
    pub sufficient: bool,
    pub one_less_fails: bool,
    pub bound_holds: bool,
}

impl MinimalityReport {
    pub fn holds(&self) -> bool {
        self.sufficient && self.one_less_fails && self.bound_holds
    }
}

impl StageState {
    pub fn init(config: &StageConfig) -> Result<Self, StageError> {
        if config.target_n == 0 {
            return Err(StageError::ZeroTarget);
        }
        let n = match config.n1 {
            Some(0) => return Err(StageError::ZeroN1),
            Some(n1) => BigUint::from(n1),
            None => Pow::pow(BigUint::from(3u32), config.target_n),
        };
        let canonical = config.n1.is_none_or(|n1| BigUint::from(n1) == Pow::pow(BigUint::from(3u32), config.target_n));
        let rank = BigUint::from(3u32);
        let disc_count = config.discs.then(|| &rank * &rank);
        Ok(Self {
            target_n: config.target_n,
            variant: config.variant,
            discs: config.discs,
            policy: config.policy.clone(),
            canonical,
            history: vec![StageParams {
                stage: 1,
                sphere_count: n.clone(),
                n,
                m: None,
                rank,
                exponent: config.target_n,
                disc_count,
            }],
        })
    }

    pub fn exponent_at(&self, stage: usize) -> Result<u32, StageError> {
        match self.variant {
            Variant::Finite => Ok(self.target_n),
            Variant::Infinite => u32::try_from(stage)
                .ok()
                .and_then(|s| s.checked_mul(self.target_n))
                .ok_or(StageError::ExponentOverflow { stage }),
        }
    }

    pub fn history(&self) -> &[StageParams] {
        &self.history
    }

    pub fn current(&self) -> &StageParams {
        self.history.last().expect("at least one stage")
    }

    pub fn params(&self, stage: usize) -> Result<&StageParams, StageError> {
        stage
            .checked_sub(1)
            .and_then(|i| self.history.get(i))
            .ok_or(StageError::NoSuchStage(stage))
    }

    /// `N_{i−1}` with `N_0 = 1`.
    pub fn previous_sphere_count(&self, stage: usize) -> Result<BigUint, StageError> {
        if stage == 1 {
            return Ok(BigUint::one());
        }
        Ok(self.params(stage - 1)?.sphere_count.clone())
    }

    /// Offset of `I_l^i` inside block `l`: `N_{i−1}` for `i ≥ 2`, and `0` at
    /// stage 1, where the whole block carries `ξ_{I_l^1}`.
    pub fn block_offset(&self, stage: usize) -> Result<BigUint, StageError> {
        if stage == 1 {
            self.params(1)?;
            return Ok(BigUint::zero());
        }
        self.previous_sphere_count(stage)
    }

    /// `I_l^i` for `l = 1..exponent`.
    pub fn blocks(&self, stage: usize, exponent: u32) -> Result<Vec<Block>, StageError> {
        let big_n = &self.params(stage)?.sphere_count;
        let offset = self.block_offset(stage)?;
        Ok((1..=exponent)
            .map(|l| Block {
                l,
                lo: big_n * (l - 1) + &offset + 1u32,
                hi: big_n * l,
            })
            .collect())
    }

    pub fn advance(&mut self) -> Result<&StageParams, StageError> {
        let prev = self.current().clone();
        let stage = prev.stage + 1;
        let exponent = self.exponent_at(stage)?;
        let m = self.policy.choose(&prev, self.target_n)?;
        let rank = &prev.rank * (&m + 1u32);
        let required: BigUint = Pow::pow(&rank, exponent);
        let n = Integer::div_ceil(&required, &prev.sphere_count) + 1u32;
        let sphere_count = &prev.sphere_count * &n;
        let disc_count = self.discs.then(|| &rank * &rank * stage);
        self.history.push(StageParams {
            stage,
            n,
            sphere_count,
            m: Some(m),
            rank,
            exponent,
            disc_count,
        });
        Ok(self.current())
    }

    pub fn advance_to(&mut self, stages: usize) -> Result<(), StageError> {
        while self.history.len() < stages {
            self.advance()?;
        }
        Ok(())
    }

    pub fn minimality(&self, stage: usize) -> Result<Option<MinimalityReport>, StageError> {
        if stage == 1 {
            self.params(1)?;
            return Ok(None);
        }
        let p = self.params(stage)?;
        let prev = self.previous_sphere_count(stage)?;
        let required: BigUint = Pow::pow(&p.rank, p.exponent);
        let block_size = &p.sphere_count - &prev;
        let block_size_one_less = if p.n >= BigUint::from(2u32) {
            &prev * (&p.n - 2u32)
        } else {
            BigUint::zero()
        };
        let upper_bound = &required + &prev * 2u32;
        Ok(Some(MinimalityReport {
            stage,
            sufficient: block_size >= required,
            one_less_fails: block_size_one_less < required,
            bound_holds: p.sphere_count <= upper_bound,
            required,
            block_size,
            block_size_one_less,
            upper_bound,
        }))
    }

    /// Every structural invariant of every recorded stage; the first failure
    /// is described.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (idx, p) in self.history.iter().enumerate() {
            let stage = idx + 1;
            if p.stage != stage {
                return Err(format!("stage {stage} recorded as {}", p.stage));
            }
            let prev = if stage == 1 {
                None
            } else {
                Some(&self.history[idx - 1])
            };
            let prev_count = prev.map_or_else(BigUint::one, |q| q.sphere_count.clone());
            if p.sphere_count != &prev_count * &p.n {
                return Err(format!("stage {stage}: N_i ≠ N_(i-1)·n_i"));
            }
            match (prev, &p.m) {
                (None, None) if p.rank == BigUint::from(3u32) => {}
                (None, _) => return Err("stage 1: expected d_1 = 3 and no m_1".into()),
                (Some(q), Some(m)) => {
                    if m.is_zero() {
                        return Err(format!("stage {stage}: m_i = 0"));
                    }
                    if p.rank != &q.rank * (m + 1u32) {
                        return Err(format!("stage {stage}: d_i ≠ d_(i-1)·(1 + m_i)"));
                    }
                }
                (Some(_), None) => return Err(format!("stage {stage}: missing m_i")),
            }
            let exponent = self.exponent_at(stage).map_err(|e| e.to_string())?;
            if p.exponent != exponent {
                return Err(format!("stage {stage}: exponent {} ≠ {exponent}", p.exponent));
            }
            // Rank of p_i from its summands: θ₁ ⊕ 2ξ ⊕ Σ_j m_j·d_(j-1) ξ.
            let summed = self.history[1..stage]
                .iter()
                .zip(&self.history[..stage - 1])
                .fold(BigUint::from(3u32), |acc, (q, before)| {
                    acc + q.m.as_ref().expect("checked above") * &before.rank
                });
            if summed != p.rank {
                return Err(format!("stage {stage}: summand ranks add to {summed}, not d_i = {}", p.rank));
            }
            let expected_discs = self.discs.then(|| &p.rank * &p.rank * stage);
            if p.disc_count != expected_discs {
                return Err(format!("stage {stage}: disc count is not i·d_i²"));
            }
            let blocks = self.blocks(stage, p.exponent).map_err(|e| e.to_string())?;
            let offset = self.block_offset(stage).map_err(|e| e.to_string())?;
            let width = &p.sphere_count - &offset;
            let total = &p.sphere_count * p.exponent;
            for (j, b) in blocks.iter().enumerate() {
                if b.len() != width {
                    return Err(format!("stage {stage}: |I_{}| = {} ≠ {width}", b.l, b.len()));
                }
                if b.is_empty() || b.lo.is_zero() || b.hi > total {
                    return Err(format!("stage {stage}: I_{} outside 1..={total}", b.l));
                }
                if let Some(next) = blocks.get(j + 1) {
                    if b.hi >= next.lo {
                        return Err(format!("stage {stage}: I_{} and I_{} overlap", b.l, next.l));
                    }
                }
            }
            if let Some(report) = self.minimality(stage).map_err(|e| e.to_string())? {
                if !report.sufficient {
                    return Err(format!("stage {stage}: N_i − N_(i-1) < d_i^e"));
                }
            }
        }
        Ok(())
    }
}

/// One stage of a ratio trace, in both dimension conventions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioPoint {
    pub stage: usize,
    pub k: u32,
    /// `k·D_i / d_i^k` with `D_i` the real dimension.
    #[serde(serialize_with = "ser_rational")]
    pub real: BigRational,
    /// Half of `real`: sphere count instead of real dimension.
    #[serde(serialize_with = "ser_rational")]
    pub complex: BigRational,
    pub real_f64: f64,
    pub complex_f64: f64,
}

fn ser_rational<S: serde::Serializer>(value: &BigRational, serializer: S) -> Result<S::Ok, S::Error> {
    serializer.serialize_str(&json::rational_string(value))
}

pub fn ratio_trace(history: &[StageParams], k: u32) -> Vec<RatioPoint> {
    history
        .iter()
        .map(|p| {
            let denom: BigUint = Pow::pow(&p.rank, k);
            let real = BigRational::new((p.real_dim() * k).into(), denom.into());
            let complex = &real / BigRational::from_integer(2.into());
            RatioPoint {
                stage: p.stage,
                k,
                real_f64: json::rational_to_f64(&real),
                complex_f64: json::rational_to_f64(&complex),
                real,
                complex,
            }
        })
        .collect()
}

/// `2k/d_i + k·2^{1−i}`, the summable-tail bound on the real ratio at `k = target_n + 1`.
pub fn ratio_bound(params: &StageParams, k: u32) -> BigRational {
    let first = BigRational::new((2 * k).into(), params.rank.clone().into());
    let tail = BigRational::new((2 * k).into(), (BigUint::one() << params.stage).into());
    first + tail
}

/// `(real dimension, rank)` pairs for `stages` stages, parameters only.
pub fn growth_profile(config: &StageConfig, stages: usize) -> Result<Vec<(BigUint, BigUint)>, StageError> {
    let mut state = StageState::init(config)?;
    state.advance_to(stages)?;
    Ok(state
        .history()
        .iter()
        .map(|p| (p.real_dim(), p.rank.clone()))
        .collect())
}

/// Convenience for tests and reports: a parameter as `u64` when it fits.
pub fn small(value: &BigUint) -> Option<u64> {
    value.to_u64()
}
