//! Multi-stage runs driven by a JSON run file.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::certify::{certify_perforation, theta_multiplicity, CertifyError, Method, PerforationCertificate};
use super::expand::{expansion_rank, support_partition, ExpansionGuard, SupportPartition};
use super::stage::{
    ratio_trace, Block, MinimalityReport, MultiplicityPolicy, RatioPoint, StageConfig, StageError, StageParams,
    StageState, Variant,
};
use crate::json;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n1: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub target_n: u32,
    pub stages: usize,
    #[serde(default)]
    pub policy: MultiplicityPolicy,
    #[serde(default)]
    pub overrides: Overrides,
    #[serde(default)]
    pub discs: bool,
    #[serde(default)]
    pub variant: Variant,
    /// Cap on materialised summands for the direct method.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct_cap: Option<usize>,
    /// Tensor exponents to trace; defaults to `target_n + 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_k: Option<Vec<u32>>,
}

impl RunFile {
    pub fn new(target_n: u32, stages: usize) -> Self {
        Self {
            target_n,
            stages,
            policy: MultiplicityPolicy::SummableTail,
            overrides: Overrides::default(),
            discs: false,
            variant: Variant::Finite,
            direct_cap: None,
            ratio_k: None,
        }
    }

    pub fn stage_config(&self) -> StageConfig {
        StageConfig {
            target_n: self.target_n,
            variant: self.variant,
            discs: self.discs,
            policy: self.policy.clone(),
            n1: self.overrides.n1,
        }
    }

    pub fn guard(&self) -> ExpansionGuard {
        self.direct_cap.map_or_else(ExpansionGuard::default, ExpansionGuard::with_summands)
    }

    pub fn ratio_exponents(&self) -> Vec<u32> {
        self.ratio_k.clone().unwrap_or_else(|| vec![self.target_n + 1])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CampaignError {
    #[error("stages must be at least 1")]
    NoStages,
    #[error("ratio exponent must be at least 1")]
    ZeroRatioExponent,
    #[error(transparent)]
    Stage(#[from] StageError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Certified { certificate: PerforationCertificate },
    /// The method ran and found no certificate.
    Failed { reason: String },
    /// The method could not run within its limits.
    Infeasible { reason: String },
}

impl Outcome {
    fn from_result(result: Result<PerforationCertificate, CertifyError>) -> Self {
        match result {
            Ok(certificate) => Outcome::Certified { certificate },
            Err(e) if e.is_infeasible() => Outcome::Infeasible { reason: e.to_string() },
            Err(e) => Outcome::Failed { reason: e.to_string() },
        }
    }

    pub fn certified(&self) -> Option<bool> {
        match self {
            Outcome::Certified { .. } => Some(true),
            Outcome::Failed { .. } => Some(false),
            Outcome::Infeasible { .. } => None,
        }
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Outcome::Certified { .. } => None,
            Outcome::Failed { reason } | Outcome::Infeasible { reason } => Some(reason),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageReport {
    pub params: StageParams,
    pub blocks: Vec<Block>,
    pub minimality: Option<MinimalityReport>,
    #[serde(with = "json::biguint")]
    pub expansion_rank: BigUint,
    /// `θ₁` occurs in `φ_{1i}(θ₁) ⊗ p_i² ⊗ ⋯`.
    pub theta_summand: bool,
    pub direct: Outcome,
    pub recursive: Outcome,
    /// Present when both methods ran.
    pub methods_agree: Option<bool>,
    /// Present from stage 2 on when the expansions fit the guard.
    pub partition: Option<SupportPartition>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    pub versions: BTreeMap<&'static str, &'static str>,
    pub run: RunFile,
    pub canonical: bool,
    /// `"ok"` or the first violated invariant.
    pub invariants: String,
    pub stages: Vec<StageReport>,
    /// Keyed by tensor exponent `k`.
    pub ratios: BTreeMap<u32, Vec<RatioPoint>>,
}

impl CampaignReport {
    pub fn ratios_csv(&self) -> String {
        let mut out = String::from("stage,k,real,complex,real_f64,complex_f64\n");
        for points in self.ratios.values() {
            for p in points {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    p.stage,
                    p.k,
                    json::rational_string(&p.real),
                    json::rational_string(&p.complex),
                    p.real_f64,
                    p.complex_f64
                ));
            }
        }
        out
    }
}

pub fn run_campaign(run: &RunFile) -> Result<CampaignReport, CampaignError> {
    if run.stages == 0 {
        return Err(CampaignError::NoStages);
    }
    let exponents = run.ratio_exponents();
    if exponents.contains(&0) {
        return Err(CampaignError::ZeroRatioExponent);
    }
    let mut state = StageState::init(&run.stage_config())?;
    state.advance_to(run.stages)?;
    let guard = run.guard();

    let mut stages = Vec::with_capacity(run.stages);
    for stage in 1..=run.stages {
        let params = state.params(stage)?.clone();
        let exponent = params.exponent;
        let direct = Outcome::from_result(certify_perforation(&state, stage, exponent, Method::Direct, &guard));
        let recursive = Outcome::from_result(certify_perforation(&state, stage, exponent, Method::Recursive, &guard));
        let methods_agree = direct
            .certified()
            .zip(recursive.certified())
            .map(|(d, r)| d == r);
        let partition = if stage >= 2 {
            support_partition(&state, stage, exponent, &guard).ok()
        } else {
            None
        };
        stages.push(StageReport {
            blocks: state.blocks(stage, exponent)?,
            minimality: state.minimality(stage)?,
            expansion_rank: expansion_rank(&state, stage, exponent).map_err(|e| match e {
                super::expand::ExpandError::Stage(s) => s,
                _ => unreachable!("exponent is positive"),
            })?,
            theta_summand: theta_multiplicity(&state, stage, exponent)? >= BigUint::from(1u32),
            params,
            direct,
            recursive,
            methods_agree,
            partition,
        });
    }
    let ratios = exponents
        .iter()
        .map(|&k| (k, ratio_trace(state.history(), k)))
        .collect();
    Ok(CampaignReport {
        versions: crate::module_versions(),
        run: run.clone(),
        canonical: state.canonical,
        invariants: state.check_invariants().err().unwrap_or_else(|| "ok".into()),
        stages,
        ratios,
    })
}
