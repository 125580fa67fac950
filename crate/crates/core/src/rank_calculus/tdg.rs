//! Tensor dimension growth of a profile of `(dim, rank)` maxima.
//!
//! `tdg` is the least `k` with `k·dim_i / rank_i^k → 0`. In closed form
//! (`dim = c·rank^m`) this is decided exactly; on a table it is judged on
//! the tail.

use std::io::Read;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::json;

/// Shortest table whose tail is worth judging.
pub const MIN_TABLE: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TdgError {
    #[error("growth profile is empty")]
    Empty,
    #[error("rank at entry {0} is zero")]
    ZeroRank(usize),
    #[error("rank decreases at entry {0}")]
    RankDecreasing(usize),
    #[error("n_max must be at least 1")]
    ZeroNMax,
    #[error("tolerance must be positive and finite")]
    BadTolerance,
    #[error("malformed profile row {row}: {reason}")]
    Malformed { row: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileEntry {
    #[serde(with = "json::biguint")]
    pub dim: BigUint,
    #[serde(with = "json::biguint")]
    pub rank: BigUint,
}

impl ProfileEntry {
    pub fn new(dim: impl Into<BigUint>, rank: impl Into<BigUint>) -> Self {
        Self {
            dim: dim.into(),
            rank: rank.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GrowthProfile {
    /// `dim = c·rank^k` along an unbounded rank sequence.
    ClosedForm {
        #[serde(with = "json::biguint")]
        c: BigUint,
        k: u32,
    },
    Tabulated(Vec<ProfileEntry>),
}

impl GrowthProfile {
    /// Reads `i,dim,rank` rows; a non-numeric first row is taken as a header.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, TdgError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut entries = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| TdgError::Malformed {
                row,
                reason: e.to_string(),
            })?;
            if record.len() != 3 {
                return Err(TdgError::Malformed {
                    row,
                    reason: format!("expected 3 columns (i,dim,rank), got {}", record.len()),
                });
            }
            let parse = |s: &str| s.parse::<BigUint>();
            match (parse(&record[1]), parse(&record[2])) {
                (Ok(dim), Ok(rank)) => entries.push(ProfileEntry { dim, rank }),
                _ if row == 0 => continue,
                _ => {
                    return Err(TdgError::Malformed {
                        row,
                        reason: "dim and rank must be nonnegative integers".into(),
                    })
                }
            }
        }
        Ok(GrowthProfile::Tabulated(entries))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailStatus {
    /// Strictly decreasing over the window and below tolerance at its end.
    Converged,
    /// Strictly decreasing but still above tolerance.
    Decreasing,
    NotDecreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentJudgement {
    pub k: u32,
    pub status: TailStatus,
    /// Ratio at the last entry, as `p/q`.
    pub last_ratio: String,
    pub last_ratio_f64: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum TdgVerdict {
    Exact { tdg: u32 },
    /// `tdg > n_max`.
    Exceeds { n_max: u32 },
    Inconclusive { reason: String, window: (usize, usize) },
}

impl TdgVerdict {
    pub fn value(&self) -> Option<u32> {
        match self {
            TdgVerdict::Exact { tdg } => Some(*tdg),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TdgReport {
    pub verdict: TdgVerdict,
    /// Tail judgements for each exponent tried; empty in closed form.
    pub exponents: Vec<ExponentJudgement>,
}

/// `k·dim / rank^k`.
pub fn tdg_ratio(k: u32, entry: &ProfileEntry) -> BigRational {
    let denom: BigUint = Pow::pow(&entry.rank, k);
    BigRational::new((BigUint::from(k) * &entry.dim).into(), denom.into())
}

/// Indices `[start, end)` of the judged tail: the last quarter, at least two entries.
pub fn tail_window(len: usize) -> (usize, usize) {
    let width = len.div_ceil(4).max(2).min(len);
    (len - width, len)
}

pub fn tdg_estimate(profile: &GrowthProfile, n_max: u32, tolerance: f64) -> Result<TdgReport, TdgError> {
    if n_max == 0 {
        return Err(TdgError::ZeroNMax);
    }
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(TdgError::BadTolerance);
    }
    let tolerance = BigRational::from_float(tolerance).ok_or(TdgError::BadTolerance)?;
    match profile {
        GrowthProfile::ClosedForm { c, k } => {
            let tdg = if c.is_zero() { 1 } else { k.saturating_add(1) };
            let verdict = if tdg <= n_max {
                TdgVerdict::Exact { tdg }
            } else {
                TdgVerdict::Exceeds { n_max }
            };
            Ok(TdgReport {
                verdict,
                exponents: Vec::new(),
            })
        }
        GrowthProfile::Tabulated(entries) => tabulated(entries, n_max, &tolerance),
    }
}

fn tabulated(entries: &[ProfileEntry], n_max: u32, tolerance: &BigRational) -> Result<TdgReport, TdgError> {
    if entries.is_empty() {
        return Err(TdgError::Empty);
    }
    for (i, e) in entries.iter().enumerate() {
        if e.rank.is_zero() {
            return Err(TdgError::ZeroRank(i));
        }
        if i > 0 && e.rank < entries[i - 1].rank {
            return Err(TdgError::RankDecreasing(i));
        }
    }
    let window = tail_window(entries.len());
    if entries.len() < MIN_TABLE {
        return Ok(TdgReport {
            verdict: TdgVerdict::Inconclusive {
                reason: format!("{} entries, at least {MIN_TABLE} needed", entries.len()),
                window,
            },
            exponents: Vec::new(),
        });
    }
    // The AF-like profile is decided without a tail.
    if entries.iter().all(|e| e.dim.is_zero()) {
        return Ok(TdgReport {
            verdict: TdgVerdict::Exact { tdg: 1 },
            exponents: Vec::new(),
        });
    }

    let mut exponents = Vec::new();
    for k in 1..=n_max {
        let ratios: Vec<BigRational> = entries[window.0..window.1].iter().map(|e| tdg_ratio(k, e)).collect();
        let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
        let last = ratios.last().expect("window is nonempty").clone();
        let status = match (decreasing, &last < tolerance) {
            (true, true) => TailStatus::Converged,
            (true, false) => TailStatus::Decreasing,
            (false, _) => TailStatus::NotDecreasing,
        };
        exponents.push(ExponentJudgement {
            k,
            status,
            last_ratio: json::rational_string(&last),
            last_ratio_f64: json::rational_to_f64(&last),
        });
        if status == TailStatus::Converged {
            return Ok(TdgReport {
                verdict: TdgVerdict::Exact { tdg: k },
                exponents,
            });
        }
    }
    let verdict = if exponents.last().map(|e| e.status) == Some(TailStatus::Decreasing) {
        TdgVerdict::Inconclusive {
            reason: format!("ratio for k = {n_max} decreases but stays above tolerance"),
            window,
        }
    } else {
        TdgVerdict::Exceeds { n_max }
    };
    Ok(TdgReport { verdict, exponents })
}

/// Whether `k·dim/rank^k` is at most `bound` at every entry.
pub fn ratio_bounded(entries: &[ProfileEntry], k: u32, bound: &BigRational) -> bool {
    entries.iter().all(|e| &tdg_ratio(k, e) <= bound)
}

impl Default for GrowthProfile {
    fn default() -> Self {
        GrowthProfile::ClosedForm {
            c: BigUint::one(),
            k: 0,
        }
    }
}
