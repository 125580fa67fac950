//! Exact combinatorial engine for characteristic classes over products of
//! 2-spheres, Hall-condition Euler certificates, K⁰ perforation
//! obstructions, the staged Villadsen-type construction, growth-rank and
//! dimension-growth calculus, and numerical-semigroup embedding witnesses.

pub mod bundles;
pub mod cohomology;
pub mod construction;
pub mod embeddings;
pub mod hall;
pub mod json;
pub mod rank_calculus;

pub use bundles::{
    certified_positive, chern_class, euler_class, euler_nonzero, vil_obstruction, BundleError,
    KClass, LineBundle, Reindexing, VectorBundle, VilCertificate,
};
pub use cohomology::{CohomologyClass, CohomologyError, Monomial};
pub use hall::{hall_check, HallError, HallVerdict};

/// Version of every module, embedded in reports.
pub fn module_versions() -> std::collections::BTreeMap<&'static str, &'static str> {
    const VERSION: &str = env!("CARGO_PKG_VERSION");
    ["bundles", "cohomology", "construction", "embeddings", "hall", "rank_calculus"]
        .into_iter()
        .map(|m| (m, VERSION))
        .chain([(env!("CARGO_PKG_NAME"), VERSION)])
        .collect()
}
