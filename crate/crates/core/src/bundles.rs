//! Line bundles `ξ_I` over `(S²)^m`, Whitney sums and K⁰ formal differences.
//!
//! `ξ_s` is the pullback of the Hopf bundle along the `s`-th coordinate
//! projection, so `c₁(ξ_s) = e(ξ_s) = x_s`. A line bundle here is a tensor
//! product `⊗ ξ_s^{⊗mult(s)}`, hence `c₁ = Σ mult(s)·x_s`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::cohomology::{CohomologyClass, CohomologyError};
use crate::hall::{hall_check, HallError, HallVerdict};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BundleError {
    #[error("ambient mismatch: {left} sphere factors vs {right}")]
    AmbientMismatch { left: usize, right: usize },
    #[error("coordinate {index} outside 1..={ambient}")]
    IndexOutOfRange { index: usize, ambient: usize },
    #[error("multiplicity of coordinate {index} must be positive")]
    ZeroMultiplicity { index: usize },
    #[error("ambient must have at least one sphere factor")]
    EmptyAmbient,
    #[error("line bundle has empty support (it is trivial, use the trivial summand)")]
    EmptySupport,
    #[error("reindexing is not injective: coordinates {first} and {second} both map to {target}")]
    NonInjective { first: usize, second: usize, target: usize },
    #[error("reindexing covers coordinates 1..={covered} but the bundle lives over {ambient}")]
    ReindexTooShort { covered: usize, ambient: usize },
    #[error(transparent)]
    Hall(#[from] HallError),
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
}

/// A line bundle `⊗_s ξ_s^{⊗mult(s)}` over `(S²)^m`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LineBundle {
    ambient: usize,
    indices: BTreeMap<usize, u32>,
}

impl LineBundle {
    pub fn new(ambient: usize, indices: BTreeMap<usize, u32>) -> Result<Self, BundleError> {
        if ambient == 0 {
            return Err(BundleError::EmptyAmbient);
        }
        if indices.is_empty() {
            return Err(BundleError::EmptySupport);
        }
        for (&s, &mult) in &indices {
            if s == 0 || s > ambient {
                return Err(BundleError::IndexOutOfRange { index: s, ambient });
            }
            if mult == 0 {
                return Err(BundleError::ZeroMultiplicity { index: s });
            }
        }
        Ok(Self { ambient, indices })
    }

    /// `ξ_I` for a set `I` (multiplicity one on each coordinate).
    pub fn xi<I: IntoIterator<Item = usize>>(ambient: usize, set: I) -> Result<Self, BundleError> {
        Self::new(ambient, set.into_iter().map(|s| (s, 1)).collect())
    }

    /// `ξ_I` on the contiguous range `lo..=hi`.
    pub fn xi_range(ambient: usize, lo: usize, hi: usize) -> Result<Self, BundleError> {
        Self::xi(ambient, lo..=hi)
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn indices(&self) -> &BTreeMap<usize, u32> {
        &self.indices
    }

    /// Coordinates with nonzero multiplicity, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.indices.keys().copied().collect()
    }

    pub fn first_chern(&self) -> Result<CohomologyClass, BundleError> {
        Ok(CohomologyClass::linear(
            self.ambient,
            self.indices.iter().map(|(&s, &m)| (s, BigInt::from(m))),
        )?)
    }

    /// Internal tensor product: multiplicities add.
    pub fn tensor(&self, other: &Self) -> Result<Self, BundleError> {
        check_ambient(self.ambient, other.ambient)?;
        let mut indices = self.indices.clone();
        for (&s, &m) in &other.indices {
            *indices.entry(s).or_insert(0) += m;
        }
        Ok(Self {
            ambient: self.ambient,
            indices,
        })
    }

    fn reindexed(&self, map: &Reindexing) -> Self {
        Self {
            ambient: map.target_ambient,
            indices: self
                .indices
                .iter()
                .map(|(&s, &m)| (map.image(s), m))
                .collect(),
        }
    }
}

impl fmt::Debug for LineBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LineBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .indices
            .iter()
            .map(|(s, m)| if *m == 1 { s.to_string() } else { format!("{s}^{m}") })
            .collect();
        write!(f, "ξ{{{}}}", parts.join(","))
    }
}

fn check_ambient(left: usize, right: usize) -> Result<(), BundleError> {
    if left != right {
        return Err(BundleError::AmbientMismatch { left, right });
    }
    Ok(())
}

/// Injective relabelling of coordinates `1..=source_ambient` into
/// `1..=target_ambient`; the pullback along the corresponding projection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reindexing {
    target_ambient: usize,
    images: Vec<usize>,
}

impl Reindexing {
    /// `images[s-1]` is the new coordinate of old coordinate `s`.
    pub fn new(target_ambient: usize, images: Vec<usize>) -> Result<Self, BundleError> {
        if target_ambient == 0 {
            return Err(BundleError::EmptyAmbient);
        }
        let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, &t) in images.iter().enumerate() {
            if t == 0 || t > target_ambient {
                return Err(BundleError::IndexOutOfRange {
                    index: t,
                    ambient: target_ambient,
                });
            }
            if let Some(first) = seen.insert(t, i + 1) {
                return Err(BundleError::NonInjective {
                    first,
                    second: i + 1,
                    target: t,
                });
            }
        }
        Ok(Self {
            target_ambient,
            images,
        })
    }

    /// Coordinate `s` of a factor with `source_ambient` spheres goes to `s + offset`.
    pub fn shift(source_ambient: usize, offset: usize, target_ambient: usize) -> Result<Self, BundleError> {
        Self::new(target_ambient, (1..=source_ambient).map(|s| s + offset).collect())
    }

    pub fn source_ambient(&self) -> usize {
        self.images.len()
    }

    pub fn target_ambient(&self) -> usize {
        self.target_ambient
    }

    fn image(&self, s: usize) -> usize {
        self.images[s - 1]
    }
}

/// `θ_t ⊕ L_1 ⊕ … ⊕ L_r` over `(S²)^m`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VectorBundle {
    ambient: usize,
    trivial_rank: usize,
    lines: Vec<LineBundle>,
}

impl VectorBundle {
    pub fn new(ambient: usize, trivial_rank: usize, lines: Vec<LineBundle>) -> Result<Self, BundleError> {
        if ambient == 0 {
            return Err(BundleError::EmptyAmbient);
        }
        for line in &lines {
            check_ambient(ambient, line.ambient)?;
        }
        Ok(Self {
            ambient,
            trivial_rank,
            lines,
        })
    }

    pub fn trivial(ambient: usize, rank: usize) -> Result<Self, BundleError> {
        Self::new(ambient, rank, Vec::new())
    }

    pub fn from_lines(ambient: usize, lines: Vec<LineBundle>) -> Result<Self, BundleError> {
        Self::new(ambient, 0, lines)
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn trivial_rank(&self) -> usize {
        self.trivial_rank
    }

    pub fn lines(&self) -> &[LineBundle] {
        &self.lines
    }

    pub fn rank(&self) -> usize {
        self.trivial_rank + self.lines.len()
    }

    pub fn supports(&self) -> Vec<Vec<usize>> {
        self.lines.iter().map(LineBundle::support).collect()
    }

    pub fn whitney_sum(&self, other: &Self) -> Result<Self, BundleError> {
        check_ambient(self.ambient, other.ambient)?;
        let mut lines = self.lines.clone();
        lines.extend(other.lines.iter().cloned());
        Ok(Self {
            ambient: self.ambient,
            trivial_rank: self.trivial_rank + other.trivial_rank,
            lines,
        })
    }

    /// `k` copies of `self`.
    pub fn multiple(&self, k: usize) -> Self {
        let mut lines = Vec::with_capacity(self.lines.len() * k);
        for _ in 0..k {
            lines.extend(self.lines.iter().cloned());
        }
        Self {
            ambient: self.ambient,
            trivial_rank: self.trivial_rank * k,
            lines,
        }
    }

    /// Fibre-wise tensor product; distributes over Whitney sums, `θ₁ ⊗ η = η`.
    pub fn tensor(&self, other: &Self) -> Result<Self, BundleError> {
        check_ambient(self.ambient, other.ambient)?;
        let mut lines = Vec::with_capacity(self.rank() * other.rank());
        for _ in 0..other.trivial_rank {
            lines.extend(self.lines.iter().cloned());
        }
        for _ in 0..self.trivial_rank {
            lines.extend(other.lines.iter().cloned());
        }
        for a in &self.lines {
            for b in &other.lines {
                lines.push(a.tensor(b)?);
            }
        }
        Ok(Self {
            ambient: self.ambient,
            trivial_rank: self.trivial_rank * other.trivial_rank,
            lines,
        })
    }

    /// `π_1^*(self) ⊗ π_2^*(other)` over `(S²)^{m₁+m₂}`.
    pub fn external_tensor(&self, other: &Self) -> Result<Self, BundleError> {
        let total = self.ambient + other.ambient;
        let left = self.pullback(&Reindexing::shift(self.ambient, 0, total)?)?;
        let right = other.pullback(&Reindexing::shift(other.ambient, self.ambient, total)?)?;
        left.tensor(&right)
    }

    /// Pullback along the projection dual to `map`: relabels every coordinate.
    pub fn pullback(&self, map: &Reindexing) -> Result<Self, BundleError> {
        if map.source_ambient() < self.ambient {
            return Err(BundleError::ReindexTooShort {
                covered: map.source_ambient(),
                ambient: self.ambient,
            });
        }
        Ok(Self {
            ambient: map.target_ambient,
            trivial_rank: self.trivial_rank,
            lines: self.lines.iter().map(|l| l.reindexed(map)).collect(),
        })
    }

    /// Summands sorted, so equal multisets compare equal.
    pub fn canonical(&self) -> Self {
        let mut lines = self.lines.clone();
        lines.sort();
        Self {
            ambient: self.ambient,
            trivial_rank: self.trivial_rank,
            lines,
        }
    }
}

impl fmt::Debug for VectorBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for VectorBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.trivial_rank > 0 || self.lines.is_empty() {
            parts.push(format!("θ{}", self.trivial_rank));
        }
        parts.extend(self.lines.iter().map(|l| l.to_string()));
        write!(f, "{}", parts.join(" ⊕ "))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct LineWire {
    pub indices: BTreeMap<String, u32>,
}

impl LineWire {
    pub(crate) fn from_line(line: &LineBundle) -> Self {
        Self {
            indices: line.indices.iter().map(|(s, m)| (s.to_string(), *m)).collect(),
        }
    }

    pub(crate) fn into_line(self, ambient: usize) -> Result<LineBundle, String> {
        let mut indices = BTreeMap::new();
        for (key, mult) in self.indices {
            let s: usize = key
                .parse()
                .map_err(|_| format!("coordinate key {key:?} is not a positive integer"))?;
            if indices.insert(s, mult).is_some() {
                return Err(format!("coordinate {s} listed twice"));
            }
        }
        LineBundle::new(ambient, indices).map_err(|e| e.to_string())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BundleWire {
    ambient: usize,
    #[serde(default)]
    trivial: usize,
    #[serde(default)]
    lines: Vec<LineWire>,
}

impl Serialize for VectorBundle {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        BundleWire {
            ambient: self.ambient,
            trivial: self.trivial_rank,
            lines: self.lines.iter().map(LineWire::from_line).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for VectorBundle {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = BundleWire::deserialize(deserializer)?;
        let lines = wire
            .lines
            .into_iter()
            .map(|l| l.into_line(wire.ambient))
            .collect::<Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        VectorBundle::new(wire.ambient, wire.trivial, lines).map_err(D::Error::custom)
    }
}

/// Euler class: `0` with a trivial summand, else `∏ c₁(L_j)`.
pub fn euler_class(v: &VectorBundle) -> Result<CohomologyClass, BundleError> {
    if v.trivial_rank > 0 {
        return Ok(CohomologyClass::zero(v.ambient)?);
    }
    let factors = v
        .lines
        .iter()
        .map(LineBundle::first_chern)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CohomologyClass::product(v.ambient, &factors)?)
}

/// Total Chern class `∏ (1 + c₁(L_j))`; trivial summands contribute `1`.
pub fn chern_class(v: &VectorBundle) -> Result<CohomologyClass, BundleError> {
    let one = CohomologyClass::one(v.ambient)?;
    let mut acc = one.clone();
    for line in &v.lines {
        acc = acc.cup(&one.add(&line.first_chern()?)?)?;
    }
    Ok(acc)
}

/// Hall check on the supports of a list of line bundles.
pub fn hall_on_supports(lines: &[LineBundle]) -> Result<HallVerdict, BundleError> {
    let supports: Vec<Vec<usize>> = lines.iter().map(LineBundle::support).collect();
    Ok(hall_check(&supports)?)
}

/// `e(v) ≠ 0`, decided by matching rather than expansion.
///
/// Every `c₁` coefficient is positive, so the coefficient of `∏_{s∈T} x_s` in
/// `∏_j c₁(L_j)` is a positive sum over systems of distinct representatives
/// with image `T`; the product is nonzero iff some SDR exists.
pub fn euler_nonzero(v: &VectorBundle) -> Result<bool, BundleError> {
    if v.trivial_rank > 0 {
        return Ok(false);
    }
    Ok(hall_on_supports(&v.lines)?.holds())
}

/// Evidence that `[η₁ ⊕ ⋯ ⊕ η_k] − [θ_l]` is not in `K⁰(X)⁺`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VilCertificate {
    pub ambient: usize,
    /// Number of line summands `k`.
    pub lines: usize,
    /// Rank `l < k` of the subtracted trivial bundle.
    pub trivial: usize,
    /// `assignment[j]`: distinct coordinate picked from the support of `η_j`,
    /// so `∏ e(η_j)` has a nonzero top coefficient.
    pub assignment: Vec<usize>,
}

impl VilCertificate {
    pub fn virtual_rank(&self) -> i64 {
        self.lines as i64 - self.trivial as i64
    }
}

/// Fires when `l < k` and `∏ e(η_i) ≠ 0`; otherwise makes no claim.
pub fn vil_obstruction(lines: &[LineBundle], l: usize) -> Result<Option<VilCertificate>, BundleError> {
    let Some(first) = lines.first() else {
        return Ok(None);
    };
    for line in lines {
        check_ambient(first.ambient, line.ambient)?;
    }
    if l >= lines.len() {
        return Ok(None);
    }
    match hall_on_supports(lines)? {
        HallVerdict::Matching { assignment } => Ok(Some(VilCertificate {
            ambient: first.ambient,
            lines: lines.len(),
            trivial: l,
            assignment,
        })),
        HallVerdict::Violation { .. } => Ok(None),
    }
}

/// Formal difference in `K⁰((S²)^m)`: `t[θ₁] + Σ mult(L)·[L]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct KClass {
    ambient: usize,
    trivial_part: i64,
    lines: BTreeMap<LineBundle, i64>,
}

impl KClass {
    pub fn zero(ambient: usize) -> Result<Self, BundleError> {
        if ambient == 0 {
            return Err(BundleError::EmptyAmbient);
        }
        Ok(Self {
            ambient,
            trivial_part: 0,
            lines: BTreeMap::new(),
        })
    }

    pub fn of_bundle(v: &VectorBundle) -> Self {
        let mut lines = BTreeMap::new();
        for line in &v.lines {
            *lines.entry(line.clone()).or_insert(0) += 1;
        }
        Self {
            ambient: v.ambient,
            trivial_part: v.trivial_rank as i64,
            lines,
        }
    }

    /// `[a] − [b]`.
    pub fn difference(a: &VectorBundle, b: &VectorBundle) -> Result<Self, BundleError> {
        Self::of_bundle(a).sub(&Self::of_bundle(b))
    }

    pub fn add(&self, other: &Self) -> Result<Self, BundleError> {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, BundleError> {
        self.combine(other, -1)
    }

    fn combine(&self, other: &Self, sign: i64) -> Result<Self, BundleError> {
        check_ambient(self.ambient, other.ambient)?;
        let mut out = self.clone();
        out.trivial_part += sign * other.trivial_part;
        for (line, &m) in &other.lines {
            let entry = out.lines.entry(line.clone()).or_insert(0);
            *entry += sign * m;
            if *entry == 0 {
                out.lines.remove(line);
            }
        }
        Ok(out)
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn trivial_part(&self) -> i64 {
        self.trivial_part
    }

    pub fn lines(&self) -> &BTreeMap<LineBundle, i64> {
        &self.lines
    }

    pub fn virtual_rank(&self) -> i64 {
        self.trivial_part + self.lines.values().sum::<i64>()
    }
}

impl fmt::Debug for KClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.trivial_part != 0 {
            parts.push(format!("{}[θ1]", self.trivial_part));
        }
        for (line, m) in &self.lines {
            parts.push(format!("{m}[{line}]"));
        }
        if parts.is_empty() {
            parts.push("0".into());
        }
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KLineWire {
    indices: BTreeMap<String, u32>,
    mult: i64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KClassWire {
    ambient: usize,
    trivial: i64,
    lines: Vec<KLineWire>,
}

impl Serialize for KClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        KClassWire {
            ambient: self.ambient,
            trivial: self.trivial_part,
            lines: self
                .lines
                .iter()
                .map(|(l, &mult)| KLineWire {
                    indices: LineWire::from_line(l).indices,
                    mult,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for KClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = KClassWire::deserialize(deserializer)?;
        let mut class = KClass::zero(wire.ambient).map_err(D::Error::custom)?;
        class.trivial_part = wire.trivial;
        for entry in wire.lines {
            let line = LineWire { indices: entry.indices }
                .into_line(wire.ambient)
                .map_err(D::Error::custom)?;
            if class.lines.contains_key(&line) {
                return Err(D::Error::custom(format!("line bundle {line} listed twice")));
            }
            if entry.mult != 0 {
                class.lines.insert(line, entry.mult);
            }
        }
        Ok(class)
    }
}

/// One-sided positivity test: `true` only when `x` is an honest bundle class
/// minus a trivial one and its virtual rank is at least `real_dim / 2`.
/// `false` means "not certified", never "not positive".
pub fn certified_positive(x: &KClass, real_dim: u64) -> bool {
    let honest = x.lines.values().all(|&m| m >= 0);
    let vrank = x.virtual_rank();
    honest && vrank >= 0 && 2 * (vrank as i128) >= real_dim as i128
}
