//! Square-free monomial arithmetic in the even cohomology of `(S²)^m`.
//!
//! `H*((S²)^m; Z)` is generated by degree-2 classes `x_1, …, x_m` with
//! `x_s² = 0`; every class is an integer combination of square-free
//! monomials `∏_{s∈S} x_s`, which we key by the subset `S`. All generators
//! sit in even degree, so the ring is commutative.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;
use thiserror::Error;

use crate::json;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CohomologyError {
    #[error("ambient mismatch: {left} sphere factors vs {right}")]
    AmbientMismatch { left: usize, right: usize },
    #[error("coordinate {index} outside 1..={ambient}")]
    IndexOutOfRange { index: usize, ambient: usize },
    #[error("ambient must have at least one sphere factor")]
    EmptyAmbient,
    #[error("subset lists coordinate {0} twice")]
    RepeatedIndex(usize),
    #[error("monomial {0:?} listed twice")]
    DuplicateTerm(Vec<usize>),
}

/// A square-free monomial `∏_{s∈S} x_s`, stored as a bitset over 1-based
/// coordinates. A single machine word covers `m ≤ 64` without allocating.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Monomial {
    words: SmallVec<[u64; 1]>,
}

impl Monomial {
    /// The empty product, i.e. the unit `1`.
    pub fn unit() -> Self {
        Self::default()
    }

    /// Builds the monomial from 1-based coordinates; repeats are rejected.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Result<Self, CohomologyError> {
        let mut mono = Self::unit();
        for s in indices {
            if s == 0 {
                return Err(CohomologyError::IndexOutOfRange { index: 0, ambient: 0 });
            }
            if mono.contains(s) {
                return Err(CohomologyError::RepeatedIndex(s));
            }
            mono.insert(s);
        }
        Ok(mono)
    }

    pub fn singleton(s: usize) -> Self {
        let mut mono = Self::unit();
        mono.insert(s);
        mono
    }

    /// Monomial on the contiguous coordinate range `lo..=hi`.
    pub fn range(lo: usize, hi: usize) -> Self {
        let mut mono = Self::unit();
        for s in lo..=hi {
            mono.insert(s);
        }
        mono
    }

    fn insert(&mut self, s: usize) {
        let bit = s - 1;
        let word = bit / 64;
        if self.words.len() <= word {
            self.words.resize(word + 1, 0);
        }
        self.words[word] |= 1u64 << (bit % 64);
    }

    pub fn contains(&self, s: usize) -> bool {
        if s == 0 {
            return false;
        }
        let bit = s - 1;
        self.words
            .get(bit / 64)
            .is_some_and(|w| w & (1u64 << (bit % 64)) != 0)
    }

    /// Number of generators, so the cohomological degree is `2 * len()`.
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn degree(&self) -> usize {
        2 * self.len()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.indices().last()
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & b == 0)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words.iter().enumerate().all(|(i, &w)| {
            let o = other.words.get(i).copied().unwrap_or(0);
            w & !o == 0
        })
    }

    pub fn union(&self, other: &Self) -> Self {
        let (long, short) = if self.words.len() >= other.words.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut words = long.words.clone();
        for (w, o) in words.iter_mut().zip(short.words.iter()) {
            *w |= o;
        }
        Self { words }
    }

    /// Ascending 1-based coordinates.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i * 64 + tz + 1)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.indices().collect()
    }
}

// Lexicographic on the ascending index lists, which is the order terms are
// serialized in: [] < [1] < [1, 2] < [2].
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.indices().cmp(other.indices())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.indices().map(|s| format!("x{s}")).collect();
        write!(f, "{}", parts.join("·"))
    }
}

/// An element of the square-free subring of `H*((S²)^m; Z)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CohomologyClass {
    ambient: usize,
    terms: BTreeMap<Monomial, BigInt>,
}

impl CohomologyClass {
    pub fn zero(ambient: usize) -> Result<Self, CohomologyError> {
        if ambient == 0 {
            return Err(CohomologyError::EmptyAmbient);
        }
        Ok(Self {
            ambient,
            terms: BTreeMap::new(),
        })
    }

    pub fn one(ambient: usize) -> Result<Self, CohomologyError> {
        Self::monomial(ambient, Monomial::unit(), BigInt::one())
    }

    /// The degree-2 generator `x_s`.
    pub fn generator(ambient: usize, s: usize) -> Result<Self, CohomologyError> {
        if s == 0 {
            return Err(CohomologyError::IndexOutOfRange { index: 0, ambient });
        }
        Self::monomial(ambient, Monomial::singleton(s), BigInt::one())
    }

    pub fn monomial(
        ambient: usize,
        mono: Monomial,
        coeff: impl Into<BigInt>,
    ) -> Result<Self, CohomologyError> {
        let mut class = Self::zero(ambient)?;
        class.check_monomial(&mono)?;
        let coeff = coeff.into();
        if !coeff.is_zero() {
            class.terms.insert(mono, coeff);
        }
        Ok(class)
    }

    /// Builds a class from `(subset, coefficient)` pairs, summing repeats.
    pub fn from_terms<I, C>(ambient: usize, terms: I) -> Result<Self, CohomologyError>
    where
        I: IntoIterator<Item = (Monomial, C)>,
        C: Into<BigInt>,
    {
        let mut class = Self::zero(ambient)?;
        for (mono, coeff) in terms {
            class.check_monomial(&mono)?;
            class.accumulate(mono, coeff.into());
        }
        Ok(class)
    }

    /// `Σ_s weight(s)·x_s`, the first Chern class of a line bundle.
    pub fn linear<I>(ambient: usize, weights: I) -> Result<Self, CohomologyError>
    where
        I: IntoIterator<Item = (usize, BigInt)>,
    {
        let mut class = Self::zero(ambient)?;
        for (s, w) in weights {
            if s == 0 || s > ambient {
                return Err(CohomologyError::IndexOutOfRange { index: s, ambient });
            }
            class.accumulate(Monomial::singleton(s), w);
        }
        Ok(class)
    }

    fn check_monomial(&self, mono: &Monomial) -> Result<(), CohomologyError> {
        match mono.max_index() {
            Some(s) if s > self.ambient => Err(CohomologyError::IndexOutOfRange {
                index: s,
                ambient: self.ambient,
            }),
            _ => Ok(()),
        }
    }

    fn accumulate(&mut self, mono: Monomial, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn same_ambient(&self, other: &Self) -> Result<(), CohomologyError> {
        if self.ambient != other.ambient {
            return Err(CohomologyError::AmbientMismatch {
                left: self.ambient,
                right: other.ambient,
            });
        }
        Ok(())
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, BigInt> {
        &self.terms
    }

    pub fn coefficient(&self, mono: &Monomial) -> BigInt {
        self.terms.get(mono).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Result<Self, CohomologyError> {
        self.same_ambient(other)?;
        let mut out = self.clone();
        for (mono, coeff) in &other.terms {
            out.accumulate(mono.clone(), coeff.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        Self {
            ambient: self.ambient,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, CohomologyError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, factor: &BigInt) -> Self {
        if factor.is_zero() {
            return Self {
                ambient: self.ambient,
                terms: BTreeMap::new(),
            };
        }
        Self {
            ambient: self.ambient,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * factor)).collect(),
        }
    }

    /// Cup product: `x_S · x_T = x_{S∪T}` when `S ∩ T = ∅`, else `0`.
    pub fn cup(&self, other: &Self) -> Result<Self, CohomologyError> {
        self.same_ambient(other)?;
        let mut out = Self {
            ambient: self.ambient,
            terms: BTreeMap::new(),
        };
        for (s, a) in &self.terms {
            for (t, b) in &other.terms {
                if s.is_disjoint(t) {
                    out.accumulate(s.union(t), a * b);
                }
            }
        }
        Ok(out)
    }

    /// Left-to-right product of `factors`; the empty product is `1`.
    pub fn product<'a, I>(ambient: usize, factors: I) -> Result<Self, CohomologyError>
    where
        I: IntoIterator<Item = &'a CohomologyClass>,
    {
        let mut acc = Self::one(ambient)?;
        for f in factors {
            acc = acc.cup(f)?;
            if acc.is_zero() {
                break;
            }
        }
        Ok(acc)
    }

    /// The `H^{2k}` component: terms whose monomial has exactly `k` factors.
    pub fn top_term(&self, k: usize) -> Self {
        Self {
            ambient: self.ambient,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.len() == k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Highest `k` with a nonzero `H^{2k}` component.
    pub fn top_degree(&self) -> Option<usize> {
        self.terms.keys().map(Monomial::len).max()
    }

    /// Every coefficient is nonnegative.
    pub fn is_nonnegative(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }
}

impl fmt::Debug for CohomologyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} (m={})", self.ambient)
    }
}

impl fmt::Display for CohomologyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (mono, coeff) in &self.terms {
            let (sign, mag) = if coeff.is_negative() {
                ("-", -coeff)
            } else {
                ("+", coeff.clone())
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{mag}{mono}")?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermWire {
    subset: Vec<usize>,
    coeff: serde_json::Number,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassWire {
    ambient: usize,
    terms: Vec<TermWire>,
}

impl Serialize for CohomologyClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ClassWire {
            ambient: self.ambient,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| TermWire {
                    subset: m.to_vec(),
                    coeff: json::bigint_to_number(c),
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CohomologyClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = ClassWire::deserialize(deserializer)?;
        let mut class = Self::zero(wire.ambient).map_err(D::Error::custom)?;
        for term in wire.terms {
            let mono = Monomial::from_indices(term.subset.iter().copied()).map_err(D::Error::custom)?;
            class.check_monomial(&mono).map_err(D::Error::custom)?;
            if class.terms.contains_key(&mono) {
                return Err(D::Error::custom(CohomologyError::DuplicateTerm(mono.to_vec())));
            }
            let coeff = json::number_to_bigint(&term.coeff)
                .ok_or_else(|| D::Error::custom(format!("non-integer coefficient {}", term.coeff)))?;
            class.accumulate(mono, coeff);
        }
        Ok(class)
    }
}
