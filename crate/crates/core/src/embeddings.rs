//! Two-generator numerical-semigroup witnesses for unital embeddings.
//!
//! * `M_N ⊕ M_{N+1}` embeds unitally into a homogeneous algebra once
//!   `rank(p) = aN + b(N+1)` with `a, b ≥ ⌈dim(X)/2⌉`.
//! * A prime dimension drop interval `I[p, pq, q]` maps unitally into
//!   `M_k` whenever `k = a·p + b·q` with `a, b ≥ 0`; every `k` above the
//!   Frobenius number `pq − p − q` qualifies.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Pow;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbedError {
    #[error("generators must be at least 2, got ({p}, {q})")]
    GeneratorTooSmall { p: u64, q: u64 },
    #[error("generators ({p}, {q}) share the factor {gcd}")]
    NotCoprime { p: u64, q: u64, gcd: u64 },
    #[error("generators must be positive, got ({p}, {q})")]
    ZeroGenerator { p: u64, q: u64 },
    #[error("summand size {size} does not exceed the Frobenius number {frobenius} of ({p}, {q})")]
    BelowThreshold { size: u64, frobenius: u64, p: u64, q: u64 },
    #[error("minimum rank must be at least 2, got {0}")]
    RankTooSmall(u64),
    #[error("tolerance must be positive and finite")]
    BadTolerance,
    #[error("matrix size N must be at least 1")]
    ZeroBlock,
}

/// Nonnegative coefficient pair `a·p + b·q = target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pair {
    pub a: u64,
    pub b: u64,
}

/// Witness for `M_N ⊕ M_{N+1} → p(C(X)⊗K)p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedWitness {
    pub rank: u64,
    pub block: u64,
    /// `⌈dim(X)/2⌉`, the floor both coefficients must meet.
    pub floor: u64,
    pub pair: Pair,
}

fn check_coprime_pair(p: u64, q: u64) -> Result<(), EmbedError> {
    if p < 2 || q < 2 {
        return Err(EmbedError::GeneratorTooSmall { p, q });
    }
    let gcd = p.gcd(&q);
    if gcd != 1 {
        return Err(EmbedError::NotCoprime { p, q, gcd });
    }
    Ok(())
}

/// Largest integer not of the form `a·p + b·q`: `pq − p − q`.
pub fn frobenius(p: u64, q: u64) -> Result<u64, EmbedError> {
    check_coprime_pair(p, q)?;
    Ok(p * q - p - q)
}

/// Lexicographically least `(a, b)` with `a·p + b·q = target`.
pub fn represent(target: u64, p: u64, q: u64) -> Result<Option<Pair>, EmbedError> {
    if p == 0 || q == 0 {
        return Err(EmbedError::ZeroGenerator { p, q });
    }
    // If (a, b) works with a ≥ q then so does (a − q, b + p), so the least
    // a is below q.
    let limit = (target / p).min(q - 1);
    Ok((0..=limit).find_map(|a| {
        let rest = target - a * p;
        rest.is_multiple_of(q).then_some(Pair { a, b: rest / q })
    }))
}

/// `aN + b(N+1) = rank` with `a, b ≥ ⌈dim_x/2⌉`, least such `a`.
pub fn homembed_witness(rank: u64, dim_x: u64, block: u64) -> Result<Option<EmbedWitness>, EmbedError> {
    if block == 0 {
        return Err(EmbedError::ZeroBlock);
    }
    let floor = dim_x.div_ceil(2);
    let base = floor * block + floor * (block + 1);
    if rank < base {
        return Ok(None);
    }
    Ok(represent(rank - base, block, block + 1)?.map(|pair| EmbedWitness {
        rank,
        block,
        floor,
        pair: Pair {
            a: pair.a + floor,
            b: pair.b + floor,
        },
    }))
}

/// Least rank admitting a `homembed_witness`: `⌈dim_x/2⌉·(2N + 1)`.
pub fn homembed_min_rank(block: u64, dim_x: u64) -> Result<u64, EmbedError> {
    if block == 0 {
        return Err(EmbedError::ZeroBlock);
    }
    Ok(dim_x.div_ceil(2) * (2 * block + 1))
}

/// Per-summand coefficients `(a_k, b_k)` with `a_k·p + b_k·q = k` for a
/// finite-dimensional algebra `⊕ M_{k_j}`; every `k_j` must exceed
/// `pq − p − q`.
pub fn dimdrop_schedule(p: u64, q: u64, sizes: &[u64]) -> Result<Vec<Pair>, EmbedError> {
    let f = frobenius(p, q)?;
    sizes
        .iter()
        .map(|&k| {
            if k <= f {
                return Err(EmbedError::BelowThreshold { size: k, frobenius: f, p, q });
            }
            Ok(represent(k, p, q)?.expect("every size above the Frobenius number is representable"))
        })
        .collect()
}

fn positive_tolerance(eps: f64) -> Result<BigRational, EmbedError> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(EmbedError::BadTolerance);
    }
    BigRational::from_float(eps).ok_or(EmbedError::BadTolerance)
}

/// Least `k ≥ 1` with `k·max_dim / min_rank^k < eps`.
pub fn lochom_exponent(max_dim: u64, min_rank: u64, eps: f64) -> Result<u64, EmbedError> {
    if min_rank < 2 {
        return Err(EmbedError::RankTooSmall(min_rank));
    }
    let eps = positive_tolerance(eps)?;
    let dim = BigUint::from(max_dim);
    let rank = BigUint::from(min_rank);
    let mut power = rank.clone();
    let mut k: u64 = 1;
    loop {
        let ratio = BigRational::new((BigUint::from(k) * &dim).into(), power.clone().into());
        if ratio < eps {
            return Ok(k);
        }
        k += 1;
        power *= &rank;
    }
}

/// `k·max_dim / min_rank^k` exactly. `min_rank` must be positive.
pub fn lochom_ratio(k: u64, max_dim: u64, min_rank: u64) -> BigRational {
    let denom: BigUint = Pow::pow(BigUint::from(min_rank), k);
    BigRational::new((BigUint::from(k) * BigUint::from(max_dim)).into(), denom.into())
}
