//! Staged construction of the inductive system and its perforation
//! certificates.

pub mod campaign;
pub mod certify;
pub mod expand;
pub mod stage;

pub use campaign::{run_campaign, CampaignError, CampaignReport, Outcome, Overrides, RunFile, StageReport};
pub use certify::{certify_perforation, theta_multiplicity, CertifyError, Method, PerforationCertificate, Witness};
pub use expand::{
    expansion_rank, p_layout, perforation_expand, phi_layout, stage_one_family, support_partition, ExpandError,
    ExpansionGuard, Layout, PhiSource, SupportPartition,
};
pub use stage::{
    growth_profile, ratio_bound, ratio_trace, Block, MinimalityReport, MultiplicityPolicy, RatioPoint, StageConfig,
    StageError, StageParams, StageState, Variant,
};
