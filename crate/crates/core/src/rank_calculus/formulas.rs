//! Closed-form rank arithmetic: binomial tensor powers, Nistor's stable
//! rank, and the very-slow-growth exponent.

use num_bigint::BigUint;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::Pow;
use serde::Serialize;
use thiserror::Error;

use super::gr::Gr;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("tensor exponent must be at least 1")]
    ZeroExponent,
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("n = {0}: no exponent exists unless n ≥ 2")]
    NoExponent(u64),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("tolerance must be positive and finite")]
    BadTolerance,
}

/// One summand `A^{⊗i} ⊗ B^{⊗(k−i)}` of `(A ⊕ B)^{⊗k}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BinomialTerm {
    pub i: u32,
    #[serde(with = "crate::json::biguint")]
    pub multiplicity: BigUint,
}

pub fn binomial_decompose(k: u32) -> Result<Vec<BinomialTerm>, FormulaError> {
    if k == 0 {
        return Err(FormulaError::ZeroExponent);
    }
    let kb = BigUint::from(k);
    Ok((0..=k)
        .map(|i| BinomialTerm {
            i,
            multiplicity: binomial(kb.clone(), BigUint::from(i)),
        })
        .collect())
}

/// Checks that at `k = gr(A) + gr(B)` every summand has `i ≥ gr(A)` or
/// `k − i ≥ gr(B)`. Returns the offending `i`, if any.
pub fn binomial_dichotomy(gr_a: u32, gr_b: u32) -> Result<Option<u32>, FormulaError> {
    let k = gr_a.checked_add(gr_b).ok_or(FormulaError::ZeroExponent)?;
    Ok(binomial_decompose(k)?
        .into_iter()
        .map(|t| t.i)
        .find(|&i| i < gr_a && k - i < gr_b))
}

/// Upper bound for `gr(A ⊕ B)` from bounds on the summands.
pub fn direct_sum_bound(a: Gr, b: Gr) -> Gr {
    a.saturating_add(b)
}

/// `⌈⌊dim_x/2⌋ / rank⌉ + 1`.
pub fn nistor_sr(dim_x: u64, rank: u64) -> Result<u64, FormulaError> {
    if rank == 0 {
        return Err(FormulaError::ZeroRank);
    }
    Ok((dim_x / 2).div_ceil(rank) + 1)
}

/// `rr ≤ 2·sr − 1`.
pub fn rr_upper(sr: u64) -> u64 {
    (2 * sr).saturating_sub(1)
}

/// Least `r ≥ 1` with `(k·r)³ / n^r < eps`.
pub fn very_slow_exponent(n: u64, k: u64, eps: f64) -> Result<u64, FormulaError> {
    if n <= 1 {
        return Err(FormulaError::NoExponent(n));
    }
    if k == 0 {
        return Err(FormulaError::ZeroK);
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(FormulaError::BadTolerance);
    }
    let eps = BigRational::from_float(eps).ok_or(FormulaError::BadTolerance)?;
    let mut r: u64 = 1;
    loop {
        if very_slow_ratio(n, k, r) < eps {
            return Ok(r);
        }
        r += 1;
    }
}

/// `(k·r)³ / n^r` exactly.
pub fn very_slow_ratio(n: u64, k: u64, r: u64) -> BigRational {
    let num: BigUint = Pow::pow(BigUint::from(k) * BigUint::from(r), 3u32);
    let den: BigUint = Pow::pow(BigUint::from(n), r);
    BigRational::new(num.into(), den.into())
}
