//! Growth-rank and dimension-growth arithmetic at the level of descriptors.

pub mod formulas;
pub mod gr;
pub mod prune;
pub mod tdg;

pub use formulas::{
    binomial_decompose, binomial_dichotomy, nistor_sr, rr_upper, very_slow_exponent, very_slow_ratio, BinomialTerm,
    FormulaError,
};
pub use gr::{
    Derivation, Descriptor, DescriptorGraph, DescriptorDecl, Gr, GrError, GraphDecl, PropagationSummary, Relation,
};
pub use prune::{prune_rank_one, PruneError, PruneVerdict, StagedSystem};
pub use tdg::{tdg_estimate, GrowthProfile, ProfileEntry, TdgError, TdgReport, TdgVerdict};
