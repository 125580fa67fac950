use std::fs;
use std::io::Read;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};
use villadsen_core::construction::{run_campaign, RunFile, Variant};
use villadsen_core::embeddings::{
    dimdrop_schedule, frobenius, homembed_min_rank, homembed_witness, lochom_exponent, lochom_ratio, represent,
};
use villadsen_core::json::{rational_string, rational_to_f64};
use villadsen_core::rank_calculus::{
    nistor_sr, prune_rank_one, rr_upper, tdg_estimate, Derivation, DescriptorGraph, GraphDecl, GrError, GrowthProfile,
    StagedSystem,
};
use villadsen_core::{
    chern_class, euler_class, euler_nonzero, hall_check, module_versions, vil_obstruction, HallVerdict, LineBundle,
    VectorBundle,
};

use crate::{Command, Rendered};

#[derive(Args)]
pub struct ConstructArgs {
    /// Target dimension-growth exponent
    #[arg(long)]
    n: Option<u32>,

    #[arg(long)]
    stages: Option<usize>,

    /// Summand cap for the direct method
    #[arg(long, env = "VILLADSEN_LAB_CAP")]
    direct_cap: Option<usize>,

    /// Replace the first-stage sphere count
    #[arg(long)]
    override_n1: Option<u64>,

    /// JSON run file; flags given alongside it take precedence
    #[arg(long)]
    run_file: Option<PathBuf>,

    /// Add the disc factors that make the spaces contractible
    #[arg(long)]
    discs: bool,

    /// Exponents grow with the stage
    #[arg(long)]
    infinite: bool,

    /// Tensor exponents to trace (repeatable)
    #[arg(long)]
    ratio_k: Vec<u32>,

    /// Emit the ratio traces as CSV
    #[arg(long, conflicts_with = "json")]
    csv: bool,

    /// Emit the full JSON report (default)
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
pub struct BundleArgs {
    /// JSON list of line-bundle supports, e.g. "[[1,2],[2]]"
    #[arg(long, conflicts_with = "bundle", required_unless_present = "bundle")]
    sets: Option<String>,

    /// Number of sphere factors; defaults to the largest index used
    #[arg(long, requires = "sets")]
    ambient: Option<usize>,

    /// Trivial summands added to the sum
    #[arg(long = "trivial-summands", default_value_t = 0, requires = "sets")]
    trivial_summands: usize,

    /// Bundle JSON file with `ambient`, `trivial` and `lines`
    #[arg(long)]
    bundle: Option<String>,
}

#[derive(Subcommand)]
pub enum EmbedCommand {
    /// Largest integer not in the semigroup generated by P and Q
    Frobenius { p: u64, q: u64 },
    /// Least a with a·P + b·Q = M
    Represent { m: u64, p: u64, q: u64 },
    /// Witness for M_N ⊕ M_{N+1} into a corner of rank RANK over a space of dimension DIM
    Homembed { rank: u64, dim: u64, n: u64 },
    /// Coefficients a·P + b·Q = k for each summand size
    Dimdrop {
        p: u64,
        q: u64,
        #[arg(required = true)]
        sizes: Vec<u64>,
    },
    /// Least k with k·MAX_DIM / MIN_RANK^k below EPS
    Lochom { max_dim: u64, min_rank: u64, eps: f64 },
}

fn value(x: &impl Serialize) -> Value {
    serde_json::to_value(x).expect("report types always serialize")
}

fn read_source(source: &str) -> Result<String> {
    if source == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text).context("reading stdin")?;
        Ok(text)
    } else {
        fs::read_to_string(source).with_context(|| format!("reading {source}"))
    }
}

fn parse_sets(text: &str) -> Result<Vec<Vec<usize>>> {
    serde_json::from_str(text).with_context(|| format!("--sets must be a JSON list of integer lists, got {text:?}"))
}

impl BundleArgs {
    fn bundle(&self) -> Result<VectorBundle> {
        if let Some(source) = &self.bundle {
            return serde_json::from_str(&read_source(source)?).context("parsing bundle JSON");
        }
        let sets = parse_sets(self.sets.as_deref().unwrap_or_default())?;
        let widest = sets.iter().flatten().copied().max().unwrap_or(0);
        let ambient = self.ambient.unwrap_or(widest);
        let lines = sets
            .iter()
            .map(|s| LineBundle::xi(ambient, s.iter().copied()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VectorBundle::new(ambient, self.trivial_summands, lines)?)
    }
}

fn hall_json(verdict: &HallVerdict) -> Value {
    match verdict {
        HallVerdict::Matching { assignment } => {
            let matching: Map<String, Value> =
                assignment.iter().enumerate().map(|(j, s)| (j.to_string(), json!(s))).collect();
            json!({ "hall": true, "matching": matching })
        }
        HallVerdict::Violation { family, union } => {
            json!({ "hall": false, "violation": { "family": family, "union": union } })
        }
    }
}

fn construct(args: ConstructArgs) -> Result<Rendered> {
    let mut run = match &args.run_file {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<RunFile>(&text).with_context(|| format!("parsing run file {}", path.display()))?
        }
        None => {
            let n = args.n.context("--n is required without --run-file")?;
            RunFile::new(n, 1)
        }
    };
    if let Some(n) = args.n {
        run.target_n = n;
    }
    if let Some(stages) = args.stages {
        run.stages = stages;
    }
    if args.direct_cap.is_some() {
        run.direct_cap = args.direct_cap;
    }
    if args.override_n1.is_some() {
        run.overrides.n1 = args.override_n1;
    }
    if args.discs {
        run.discs = true;
    }
    if args.infinite {
        run.variant = Variant::Infinite;
    }
    if !args.ratio_k.is_empty() {
        run.ratio_k = Some(args.ratio_k);
    }
    let report = run_campaign(&run)?;
    Ok(if args.csv {
        Rendered::Text(report.ratios_csv())
    } else {
        Rendered::Json(value(&report))
    })
}

fn tdg(input: &str, n_max: u32, tol: f64) -> Result<Value> {
    let text = read_source(input)?;
    let trimmed = text.trim_start();
    let profile: GrowthProfile = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        serde_json::from_str(trimmed).context("parsing profile JSON")?
    } else {
        GrowthProfile::from_csv(text.as_bytes())?
    };
    let report = tdg_estimate(&profile, n_max, tol)?;
    let mut out = value(&report);
    out["n_max"] = json!(n_max);
    out["tolerance"] = json!(tol);
    out["versions"] = value(&module_versions());
    Ok(out)
}

fn grcalc(input: &str) -> Result<Value> {
    let decl: GraphDecl = serde_json::from_str(&read_source(input)?).context("parsing descriptor graph")?;
    let mut graph = DescriptorGraph::from_decl(&decl)?;
    let versions = value(&module_versions());
    match graph.propagate() {
        Ok(summary) => {
            let nodes: Map<String, Value> = graph
                .nodes()
                .iter()
                .map(|d| {
                    let reason = |r: Option<&Derivation>| {
                        r.map(|r| {
                            json!({
                                "rule": r.rule,
                                "from": r.sources.iter().map(|&s| graph.nodes()[s].name.clone()).collect::<Vec<_>>(),
                            })
                        })
                    };
                    let entry = json!({
                        "lower": d.lower,
                        "upper": d.upper,
                        "pinned": d.is_pinned(),
                        "lower_reason": reason(d.lower_reason()),
                        "upper_reason": reason(d.upper_reason()),
                    });
                    (d.name.clone(), entry)
                })
                .collect();
            Ok(json!({ "consistent": true, "nodes": nodes, "summary": summary, "versions": versions }))
        }
        Err(GrError::Contradiction { node, lower, upper, chain }) => Ok(json!({
            "consistent": false,
            "contradiction": { "node": node, "lower": lower, "upper": upper, "chain": chain },
            "versions": versions,
        })),
        Err(e) => Err(e.into()),
    }
}

fn embed(cmd: EmbedCommand) -> Result<Value> {
    Ok(match cmd {
        EmbedCommand::Frobenius { p, q } => json!({ "frobenius": frobenius(p, q)? }),
        EmbedCommand::Represent { m, p, q } => json!({ "witness": represent(m, p, q)? }),
        EmbedCommand::Homembed { rank, dim, n } => json!({
            "witness": homembed_witness(rank, dim, n)?,
            "min_rank": homembed_min_rank(n, dim)?,
        }),
        EmbedCommand::Dimdrop { p, q, sizes } => {
            let schedule = dimdrop_schedule(p, q, &sizes)?;
            let rows: Vec<Value> = sizes
                .iter()
                .zip(&schedule)
                .map(|(k, w)| json!({ "size": k, "a": w.a, "b": w.b }))
                .collect();
            json!({ "frobenius": frobenius(p, q)?, "schedule": rows })
        }
        EmbedCommand::Lochom { max_dim, min_rank, eps } => {
            let k = lochom_exponent(max_dim, min_rank, eps)?;
            let ratio = lochom_ratio(k, max_dim, min_rank);
            json!({ "k": k, "ratio": rational_string(&ratio), "ratio_f64": rational_to_f64(&ratio) })
        }
    })
}

pub fn run(command: Command) -> Result<Rendered> {
    let out = match command {
        Command::Construct(args) => return construct(args),
        Command::Hall { sets } => hall_json(&hall_check(&parse_sets(&sets)?)?),
        Command::Euler(args) => {
            let v = args.bundle()?;
            json!({
                "bundle": v,
                "rank": v.rank(),
                "euler": euler_class(&v)?,
                "chern": chern_class(&v)?,
                "nonzero": euler_nonzero(&v)?,
            })
        }
        Command::Vil { bundle, trivial } => {
            let v = bundle.bundle()?;
            if v.trivial_rank() > 0 {
                bail!("vil takes a sum of nontrivial line bundles");
            }
            let cert = vil_obstruction(v.lines(), trivial)?;
            json!({
                "lines": v.lines().len(),
                "trivial": trivial,
                "obstructed": cert.is_some(),
                "certificate": cert,
            })
        }
        Command::Tdg { input, n_max, tol } => tdg(&input, n_max, tol)?,
        Command::Sr { dim, rank } => {
            let sr = nistor_sr(dim, rank)?;
            json!({ "sr": sr, "rr_upper": rr_upper(sr) })
        }
        Command::Grcalc { input } => grcalc(&input)?,
        Command::Prune { input } => {
            let system: StagedSystem = serde_json::from_str(&read_source(&input)?).context("parsing staged system")?;
            let mut out = value(&prune_rank_one(&system)?);
            out["versions"] = value(&module_versions());
            out
        }
        Command::Embed(cmd) => embed(cmd)?,
    };
    Ok(Rendered::Json(out))
}
