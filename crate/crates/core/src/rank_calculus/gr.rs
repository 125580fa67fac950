//! Growth-rank bounds propagated over a graph of algebra descriptors.
//!
//! Each descriptor carries an interval `lower ≤ gr ≤ upper` with values in
//! `{1, 2, …} ∪ {∞}`. Relations between descriptors are the permanence
//! rules for the growth rank, treated as axioms:
//!
//! | relation | consequence |
//! |---|---|
//! | hereditary `H ⊆ A` | `gr(H) ≤ gr(A)` |
//! | quotient `A/I` | `gr(A/I) ≤ gr(A)` |
//! | stabilization `A⊗M_k`, `A⊗K` | `gr` equal |
//! | tensor `A⊗B` | `gr ≤ min(gr(A), gr(B))` |
//! | direct sum `A⊕B` | `gr ≤ gr(A) + gr(B)`; summands are corners |
//! | sum of hereditaries of `A` | `gr ≤ gr(A)` |
//! | inductive limit | `gr ≤ sup gr(A_i)` |
//! | extension `0→I→A→Q→0` | `gr(I) = gr(Q) = 1 ⇒ gr(A) = 1` |
//!
//! Every rule is applied in both directions where the inequality allows
//! (an upper bound on the big side, a lower bound on the small side), and
//! propagation iterates to a fixpoint. Bounds only ever tighten.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A growth-rank value: a positive integer or `∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gr {
    Finite(u32),
    Infinite,
}

impl Gr {
    pub fn finite(self) -> Option<u32> {
        match self {
            Gr::Finite(n) => Some(n),
            Gr::Infinite => None,
        }
    }

    pub fn saturating_add(self, other: Gr) -> Gr {
        match (self, other) {
            (Gr::Finite(a), Gr::Finite(b)) => a.checked_add(b).map_or(Gr::Infinite, Gr::Finite),
            _ => Gr::Infinite,
        }
    }
}

impl fmt::Display for Gr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gr::Finite(n) => write!(f, "{n}"),
            Gr::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Gr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Gr::Finite(n) => serializer.serialize_u32(*n),
            Gr::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Gr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u32),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(0) => Err(D::Error::custom("growth rank starts at 1")),
            Raw::Int(n) => Ok(Gr::Finite(n)),
            Raw::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "∞") => Ok(Gr::Infinite),
            Raw::Text(s) => Err(D::Error::custom(format!("expected integer or \"inf\", got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrError {
    #[error("contradictory bounds on {node}: lower {lower} > upper {upper}\n{}", chain.join("\n"))]
    Contradiction {
        node: String,
        lower: u32,
        upper: Gr,
        chain: Vec<String>,
    },
    #[error("unknown descriptor {0:?}")]
    UnknownNode(String),
    #[error("descriptor {0:?} declared twice")]
    DuplicateNode(String),
    #[error("descriptor {node:?} starts with lower {lower} above upper {upper}")]
    InvalidBounds { node: String, lower: u32, upper: Gr },
    #[error("relation {0} needs at least one operand")]
    EmptyRelation(&'static str),
}

/// A relation between descriptors, generic over how nodes are named.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Relation<N> {
    Hereditary { sub: N, of: N },
    Quotient { quotient: N, of: N },
    Stabilization { stable: N, of: N },
    Tensor { product: N, factors: Vec<N> },
    DirectSum { sum: N, summands: Vec<N> },
    HereditarySum { sum: N, parts: Vec<N>, of: N },
    InductiveLimit { limit: N, stages: Vec<N> },
    Extension { algebra: N, ideal: N, quotient: N },
}

impl<N> Relation<N> {
    pub fn kind(&self) -> &'static str {
        match self {
            Relation::Hereditary { .. } => "hereditary",
            Relation::Quotient { .. } => "quotient",
            Relation::Stabilization { .. } => "stabilization",
            Relation::Tensor { .. } => "tensor",
            Relation::DirectSum { .. } => "direct_sum",
            Relation::HereditarySum { .. } => "hereditary_sum",
            Relation::InductiveLimit { .. } => "inductive_limit",
            Relation::Extension { .. } => "extension",
        }
    }

    fn try_map<M, E>(&self, mut f: impl FnMut(&N) -> Result<M, E>) -> Result<Relation<M>, E> {
        let mut all = |v: &Vec<N>| v.iter().map(&mut f).collect::<Result<Vec<M>, E>>();
        Ok(match self {
            Relation::Hereditary { sub, of } => Relation::Hereditary { sub: f(sub)?, of: f(of)? },
            Relation::Quotient { quotient, of } => Relation::Quotient {
                quotient: f(quotient)?,
                of: f(of)?,
            },
            Relation::Stabilization { stable, of } => Relation::Stabilization {
                stable: f(stable)?,
                of: f(of)?,
            },
            Relation::Tensor { product, factors } => {
                let factors = all(factors)?;
                Relation::Tensor { product: f(product)?, factors }
            }
            Relation::DirectSum { sum, summands } => {
                let summands = all(summands)?;
                Relation::DirectSum { sum: f(sum)?, summands }
            }
            Relation::HereditarySum { sum, parts, of } => {
                let parts = all(parts)?;
                Relation::HereditarySum {
                    sum: f(sum)?,
                    parts,
                    of: f(of)?,
                }
            }
            Relation::InductiveLimit { limit, stages } => {
                let stages = all(stages)?;
                Relation::InductiveLimit { limit: f(limit)?, stages }
            }
            Relation::Extension { algebra, ideal, quotient } => Relation::Extension {
                algebra: f(algebra)?,
                ideal: f(ideal)?,
                quotient: f(quotient)?,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescriptorDecl {
    pub name: String,
    #[serde(default = "one")]
    pub lower: u32,
    #[serde(default = "infinite")]
    pub upper: Gr,
}

fn one() -> u32 {
    1
}

fn infinite() -> Gr {
    Gr::Infinite
}

/// Wire form of a descriptor graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDecl {
    pub nodes: Vec<DescriptorDecl>,
    #[serde(default)]
    pub relations: Vec<Relation<String>>,
}

/// Why a bound has its current value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub rule: &'static str,
    pub sources: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Descriptor {
    pub name: String,
    pub lower: u32,
    pub upper: Gr,
    lower_reason: Option<Derivation>,
    upper_reason: Option<Derivation>,
}

impl Descriptor {
    pub fn lower_reason(&self) -> Option<&Derivation> {
        self.lower_reason.as_ref()
    }

    pub fn upper_reason(&self) -> Option<&Derivation> {
        self.upper_reason.as_ref()
    }

    pub fn is_pinned(&self) -> bool {
        self.upper == Gr::Finite(self.lower)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PropagationSummary {
    /// Full passes over the relation list, including the final quiet one.
    pub sweeps: usize,
    /// Individual bound tightenings.
    pub updates: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescriptorGraph {
    nodes: Vec<Descriptor>,
    relations: Vec<Relation<usize>>,
}

impl DescriptorGraph {
    pub fn from_decl(decl: &GraphDecl) -> Result<Self, GrError> {
        let mut index = BTreeMap::new();
        let mut nodes = Vec::with_capacity(decl.nodes.len());
        for d in &decl.nodes {
            if index.insert(d.name.clone(), nodes.len()).is_some() {
                return Err(GrError::DuplicateNode(d.name.clone()));
            }
            if Gr::Finite(d.lower) > d.upper || d.lower == 0 {
                return Err(GrError::InvalidBounds {
                    node: d.name.clone(),
                    lower: d.lower,
                    upper: d.upper,
                });
            }
            nodes.push(Descriptor {
                name: d.name.clone(),
                lower: d.lower,
                upper: d.upper,
                lower_reason: None,
                upper_reason: None,
            });
        }
        let mut graph = Self {
            nodes,
            relations: Vec::new(),
        };
        for r in &decl.relations {
            let mapped = r.try_map(|name| {
                index
                    .get(name)
                    .copied()
                    .ok_or_else(|| GrError::UnknownNode(name.clone()))
            })?;
            graph.add_relation(mapped)?;
        }
        Ok(graph)
    }

    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            relations: Vec::new(),
        }
    }

    pub fn add_node(&mut self, name: impl Into<String>, lower: u32, upper: Gr) -> Result<usize, GrError> {
        let name = name.into();
        if self.nodes.iter().any(|n| n.name == name) {
            return Err(GrError::DuplicateNode(name));
        }
        if lower == 0 || Gr::Finite(lower) > upper {
            return Err(GrError::InvalidBounds { node: name, lower, upper });
        }
        self.nodes.push(Descriptor {
            name,
            lower,
            upper,
            lower_reason: None,
            upper_reason: None,
        });
        Ok(self.nodes.len() - 1)
    }

    pub fn add_relation(&mut self, relation: Relation<usize>) -> Result<(), GrError> {
        let empty = match &relation {
            Relation::Tensor { factors: v, .. }
            | Relation::DirectSum { summands: v, .. }
            | Relation::HereditarySum { parts: v, .. }
            | Relation::InductiveLimit { stages: v, .. } => v.is_empty(),
            _ => false,
        };
        if empty {
            return Err(GrError::EmptyRelation(relation.kind()));
        }
        self.relations.push(relation);
        Ok(())
    }

    pub fn nodes(&self) -> &[Descriptor] {
        &self.nodes
    }

    pub fn relations(&self) -> &[Relation<usize>] {
        &self.relations
    }

    pub fn node(&self, name: &str) -> Option<&Descriptor> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub fn to_decl(&self) -> GraphDecl {
        GraphDecl {
            nodes: self
                .nodes
                .iter()
                .map(|n| DescriptorDecl {
                    name: n.name.clone(),
                    lower: n.lower,
                    upper: n.upper,
                })
                .collect(),
            relations: self
                .relations
                .iter()
                .map(|r| {
                    r.try_map(|&i| Ok::<_, ()>(self.nodes[i].name.clone()))
                        .expect("infallible")
                })
                .collect(),
        }
    }

    /// Runs every rule to a fixpoint.
    pub fn propagate(&mut self) -> Result<PropagationSummary, GrError> {
        let mut summary = PropagationSummary { sweeps: 0, updates: 0 };
        loop {
            summary.sweeps += 1;
            let mut changed = 0;
            for r in 0..self.relations.len() {
                changed += self.apply(r)?;
            }
            summary.updates += changed;
            if changed == 0 {
                return Ok(summary);
            }
        }
    }

    fn tighten_upper(&mut self, node: usize, value: Gr, rule: &'static str, sources: Vec<usize>) -> Result<usize, GrError> {
        if value >= self.nodes[node].upper {
            return Ok(0);
        }
        self.nodes[node].upper = value;
        self.nodes[node].upper_reason = Some(Derivation { rule, sources });
        self.check(node)?;
        Ok(1)
    }

    fn tighten_lower(&mut self, node: usize, value: u32, rule: &'static str, sources: Vec<usize>) -> Result<usize, GrError> {
        if value <= self.nodes[node].lower {
            return Ok(0);
        }
        self.nodes[node].lower = value;
        self.nodes[node].lower_reason = Some(Derivation { rule, sources });
        self.check(node)?;
        Ok(1)
    }

    fn check(&self, node: usize) -> Result<(), GrError> {
        let d = &self.nodes[node];
        if Gr::Finite(d.lower) > d.upper {
            return Err(GrError::Contradiction {
                node: d.name.clone(),
                lower: d.lower,
                upper: d.upper,
                chain: self.derivation_chain(node),
            });
        }
        Ok(())
    }

    /// Human-readable provenance of a node's bounds, newest first.
    pub fn derivation_chain(&self, node: usize) -> Vec<String> {
        let mut lines = Vec::new();
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([node]);
        while let Some(n) = queue.pop_front() {
            if !seen.insert(n) || lines.len() >= 64 {
                continue;
            }
            let d = &self.nodes[n];
            let names = |srcs: &[usize]| {
                srcs.iter()
                    .map(|&s| self.nodes[s].name.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            match &d.upper_reason {
                Some(r) => {
                    lines.push(format!("{}: upper {} by {} from [{}]", d.name, d.upper, r.rule, names(&r.sources)));
                    queue.extend(r.sources.iter().copied());
                }
                None => lines.push(format!("{}: upper {} given", d.name, d.upper)),
            }
            match &d.lower_reason {
                Some(r) => {
                    lines.push(format!("{}: lower {} by {} from [{}]", d.name, d.lower, r.rule, names(&r.sources)));
                    queue.extend(r.sources.iter().copied());
                }
                None => lines.push(format!("{}: lower {} given", d.name, d.lower)),
            }
        }
        lines
    }

    /// `gr(small) ≤ gr(big)` in both directions.
    fn le(&mut self, small: usize, big: usize, rule: &'static str) -> Result<usize, GrError> {
        let mut changed = self.tighten_upper(small, self.nodes[big].upper, rule, vec![big])?;
        changed += self.tighten_lower(big, self.nodes[small].lower, rule, vec![small])?;
        Ok(changed)
    }

    fn apply(&mut self, r: usize) -> Result<usize, GrError> {
        let relation = self.relations[r].clone();
        let mut changed = 0;
        match relation {
            Relation::Hereditary { sub, of } => changed += self.le(sub, of, "hereditary")?,
            Relation::Quotient { quotient, of } => changed += self.le(quotient, of, "quotient")?,
            Relation::Stabilization { stable, of } => {
                changed += self.le(stable, of, "stabilization")?;
                changed += self.le(of, stable, "stabilization")?;
            }
            Relation::Tensor { product, factors } => {
                let min = factors.iter().map(|&f| self.nodes[f].upper).min().expect("nonempty");
                changed += self.tighten_upper(product, min, "tensor", factors.clone())?;
                for &f in &factors {
                    changed += self.tighten_lower(f, self.nodes[product].lower, "tensor", vec![product])?;
                }
            }
            Relation::DirectSum { sum, summands } => changed += self.direct_sum(sum, &summands, "direct_sum")?,
            Relation::HereditarySum { sum, parts, of } => {
                changed += self.direct_sum(sum, &parts, "hereditary_sum")?;
                changed += self.le(sum, of, "hereditary_sum")?;
                for &p in &parts {
                    changed += self.le(p, of, "hereditary")?;
                }
            }
            Relation::InductiveLimit { limit, stages } => {
                let sup = stages.iter().map(|&s| self.nodes[s].upper).max().expect("nonempty");
                changed += self.tighten_upper(limit, sup, "inductive_limit", stages.clone())?;
            }
            Relation::Extension { algebra, ideal, quotient } => {
                changed += self.le(ideal, algebra, "hereditary")?;
                changed += self.le(quotient, algebra, "quotient")?;
                let one = Gr::Finite(1);
                let ideal_one = self.nodes[ideal].upper == one;
                let quotient_one = self.nodes[quotient].upper == one;
                if ideal_one && quotient_one {
                    changed += self.tighten_upper(algebra, one, "extension", vec![ideal, quotient])?;
                }
                // Contrapositive: gr(A) ≥ 2 forces the other end above 1.
                if self.nodes[algebra].lower >= 2 {
                    if ideal_one {
                        changed += self.tighten_lower(quotient, 2, "extension", vec![algebra, ideal])?;
                    }
                    if quotient_one {
                        changed += self.tighten_lower(ideal, 2, "extension", vec![algebra, quotient])?;
                    }
                }
            }
        }
        Ok(changed)
    }

    fn direct_sum(&mut self, sum: usize, summands: &[usize], rule: &'static str) -> Result<usize, GrError> {
        let mut changed = 0;
        let total = summands
            .iter()
            .fold(Gr::Finite(0), |acc, &s| acc.saturating_add(self.nodes[s].upper));
        changed += self.tighten_upper(sum, total, rule, summands.to_vec())?;
        // Each summand is a corner, hence hereditary in the sum.
        for &s in summands {
            changed += self.le(s, sum, rule)?;
        }
        // gr(sum) ≤ gr(s) + Σ_{t≠s} gr(t) bounds gr(s) from below.
        for (i, &s) in summands.iter().enumerate() {
            let others = summands
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(Gr::Finite(0), |acc, (_, &t)| acc.saturating_add(self.nodes[t].upper));
            if let Gr::Finite(rest) = others {
                let need = self.nodes[sum].lower.saturating_sub(rest);
                if need > 0 {
                    let mut sources = vec![sum];
                    sources.extend(summands.iter().copied().filter(|&t| t != s));
                    changed += self.tighten_lower(s, need, rule, sources)?;
                }
            }
        }
        Ok(changed)
    }
}

impl Default for DescriptorGraph {
    fn default() -> Self {
        Self::new()
    }
}
