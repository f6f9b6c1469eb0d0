use std::path::{Path, PathBuf};

use kernel_causal::causal::{self, CausalRequest, EvalGrid};
use kernel_causal::distributions::{self, default_candidate_grid, embed_counterfactual, herd as herd_samples};
use kernel_causal::simulate::{run_study_with, DesignKind, StudyConfig};
use kernel_causal::{graphical, BlockKernels, Dataset, Estimand, Matrix, Penalties};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::io::{self, num};
use crate::options::{GridSpec, KernelSpecs, KernelsRecord, PenaltyRecord, PolicyRecord, StagePolicies};
use crate::{EstimateArgs, FitArgs, HerdArgs, SimulateArgs, StudyArgs, TuneArgs};

struct Prepared {
    estimand: Estimand,
    data: Dataset,
    alt: Option<Matrix>,
    kernels: BlockKernels,
    policies: StagePolicies,
}

fn prepare(fit: &FitArgs, with_outcome: bool) -> Result<Prepared> {
    let estimand = Estimand::from_name(&fit.estimand).ok_or_else(|| {
        let names: Vec<&str> = Estimand::ALL.iter().map(|e| e.name()).collect();
        CliError::Config(format!("unknown estimand `{}` ({})", fit.estimand, names.join(", ")))
    })?;
    match (estimand, &fit.alt_covariates) {
        (Estimand::Ds, None) => {
            return Err(CliError::Config("estimand `ds` needs --alt-covariates".into()));
        }
        (e, Some(_)) if e != Estimand::Ds => {
            return Err(CliError::Config(format!("--alt-covariates is only used by `ds`, not `{}`", e.name())));
        }
        _ => {}
    }
    let policies = StagePolicies::parse(&fit.penalties)?;
    let kernel_specs = KernelSpecs::parse(&fit.kernels)?;
    let data = io::read_dataset(&fit.data)?;
    if estimand == Estimand::Cate && data.interpretable().is_none() {
        return Err(CliError::Schema { path: fit.data.clone(), msg: "estimand `cate` needs column `v`".into() });
    }
    let alt = match &fit.alt_covariates {
        Some(path) => {
            let alt = io::read_covariates(path)?;
            if alt.ncols() != data.covariates().ncols() {
                return Err(CliError::Schema {
                    path: path.clone(),
                    msg: format!(
                        "has {} covariate columns but the data has {}",
                        alt.ncols(),
                        data.covariates().ncols()
                    ),
                });
            }
            Some(alt)
        }
        None => None,
    };
    let kernels = kernel_specs.resolve(&data, with_outcome)?;
    Ok(Prepared { estimand, data, alt, kernels, policies })
}

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

#[derive(Serialize)]
struct SimulateSidecar {
    design: &'static str,
    n: usize,
    seed: u64,
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let design: DesignKind = a.design.into();
    let data = design.generate(a.n, a.seed)?;
    let (header, rows) = io::dataset_rows(&data);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    io::write_csv(&a.out, &header, &rows)?;
    io::write_json(&io::sidecar_path(&a.out), &SimulateSidecar { design: design.name(), n: a.n, seed: a.seed })
}

#[derive(Serialize)]
struct EstimateSidecar {
    estimand: &'static str,
    data: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    alt_covariates: Option<String>,
    n: usize,
    policies: PolicyRecord,
    penalties: PenaltyRecord,
    kernels: KernelsRecord,
    grid: Vec<GridSpec>,
    points: usize,
}

fn point_header(estimand: Estimand) -> &'static [&'static str] {
    match estimand {
        Estimand::Att | Estimand::IncAtt => &["d", "d_prime"],
        Estimand::Cate => &["d", "v"],
        _ => &["d"],
    }
}

pub fn estimate(a: EstimateArgs) -> Result<()> {
    let p = prepare(&a.fit, false)?;
    let arity = p.estimand.arity();
    if a.grids.len() != arity {
        return Err(CliError::Config(format!(
            "`{}` takes {arity} --grid specification(s), got {}",
            p.estimand.name(),
            a.grids.len()
        )));
    }
    let grid = match &a.grids[..] {
        [g] => EvalGrid::scalar(&g.values()),
        [g1, g2] => {
            let (first, second) = (g1.values(), g2.values());
            let pairs: Vec<(f64, f64)> = first.iter().flat_map(|&x| second.iter().map(move |&y| (x, y))).collect();
            EvalGrid::scalar_pairs(&pairs)
        }
        _ => unreachable!("arity is 1 or 2"),
    };
    let policies = p.policies.policies();
    let penalties = match p.estimand {
        Estimand::FrontDoor => graphical::resolve_penalties(&p.data, &p.kernels, &policies, false)?,
        e => causal::resolve_penalties(e, &p.data, &p.kernels, &policies)?,
    };
    let req = CausalRequest {
        estimand: p.estimand,
        data: &p.data,
        alt_covariates: p.alt.as_ref(),
        grid,
        penalties,
        kernels: &p.kernels,
    };
    let est = causal::estimate(&req)?;
    let mut header = point_header(p.estimand).to_vec();
    header.push("estimate");
    let rows: Vec<Vec<String>> =
        est.points.iter().zip(&est.values).map(|(pt, &v)| pt.iter().copied().chain([v]).map(num).collect()).collect();
    io::write_csv(&a.out, &header, &rows)?;
    let sidecar = EstimateSidecar {
        estimand: p.estimand.name(),
        data: path_string(&a.fit.data),
        alt_covariates: a.fit.alt_covariates.as_deref().map(path_string),
        n: p.data.n(),
        policies: p.policies.record(),
        penalties: penalties.into(),
        kernels: (&p.kernels).into(),
        grid: a.grids.clone(),
        points: rows.len(),
    };
    io::write_json(&io::sidecar_path(&a.out), &sidecar)
}

#[derive(Serialize)]
struct StudySidecar {
    design: &'static str,
    seed: u64,
    replications: usize,
    sample_sizes: Vec<usize>,
    policies: PolicyRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<GridSpec>,
    summaries: Vec<SummaryRecord>,
    failures: Vec<FailureRecord>,
}

#[derive(Serialize)]
struct SummaryRecord {
    n: usize,
    mean_mse: f64,
    median_mse: f64,
    completed: usize,
    failed: usize,
}

#[derive(Serialize)]
struct FailureRecord {
    n: usize,
    replication: usize,
    error: String,
}

pub fn study(a: StudyArgs) -> Result<()> {
    let design: DesignKind = a.design.into();
    let policies = StagePolicies::parse(&a.penalties)?;
    let config = StudyConfig {
        design,
        sample_sizes: a.sizes.clone(),
        replications: a.replications,
        policies: policies.policies(),
        grid: a.grid.map(|g| g.values()),
        seed: a.seed,
    };
    let result = run_study_with(&config, |r| match &r.mse {
        Ok(mse) => eprintln!("{} n={} replication {}: mse {mse:.6}", r.design.name(), r.n, r.replication),
        Err(e) => eprintln!("{} n={} replication {}: failed: {e}", r.design.name(), r.n, r.replication),
    })?;
    let rows: Vec<Vec<String>> = result
        .records
        .iter()
        .map(|r| {
            vec![
                r.design.name().to_string(),
                r.n.to_string(),
                r.replication.to_string(),
                num(*r.mse.as_ref().unwrap_or(&f64::NAN)),
            ]
        })
        .collect();
    io::write_csv(&a.out, &["design", "n", "replication", "mse"], &rows)?;
    let sidecar = StudySidecar {
        design: design.name(),
        seed: a.seed,
        replications: a.replications,
        sample_sizes: a.sizes,
        policies: policies.record(),
        grid: a.grid,
        summaries: result
            .summaries
            .iter()
            .map(|s| SummaryRecord {
                n: s.n,
                mean_mse: s.mean_mse,
                median_mse: s.median_mse,
                completed: s.completed,
                failed: s.failed,
            })
            .collect(),
        failures: result
            .records
            .iter()
            .filter_map(|r| {
                r.mse.as_ref().err().map(|e| FailureRecord { n: r.n, replication: r.replication, error: e.clone() })
            })
            .collect(),
    };
    io::write_json(&io::sidecar_path(&a.out), &sidecar)
}

#[derive(Serialize)]
struct HerdSidecar {
    estimand: &'static str,
    data: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    alt_covariates: Option<String>,
    at: Vec<f64>,
    m: usize,
    policies: PolicyRecord,
    penalties: PenaltyRecord,
    kernels: KernelsRecord,
    candidates: GridSpec,
    /// Kernel distance between the embedding and the herded sample.
    distance: f64,
}

pub fn herd(a: HerdArgs) -> Result<()> {
    let p = prepare(&a.fit, true)?;
    let target: Option<distributions::EmbeddingTarget> = p.estimand.into();
    let target = target.ok_or_else(|| {
        CliError::Config(format!("estimand `{}` has no counterfactual distribution", p.estimand.name()))
    })?;
    if a.at.len() != p.estimand.arity() {
        return Err(CliError::Config(format!(
            "`{}` takes {} --at value(s), got {}",
            p.estimand.name(),
            p.estimand.arity(),
            a.at.len()
        )));
    }
    if a.m == 0 {
        return Err(CliError::Config("--m must be at least 1".into()));
    }
    let penalties = distributions::resolve_penalties(target, &p.data, &p.kernels, &p.policies.policies())?;
    let (d, second) = a.at.split_at(1);
    let embedding = embed_counterfactual(
        target,
        &p.data,
        &p.kernels,
        p.alt.as_ref(),
        &penalties,
        d,
        (!second.is_empty()).then_some(second),
    )?;
    let candidates = match a.grid {
        Some(g) => g,
        None => {
            let values = default_candidate_grid(p.data.outcome().as_slice(), distributions::DEFAULT_CANDIDATES)?;
            GridSpec { min: values[0], max: values[values.len() - 1], count: values.len() }
        }
    };
    let sample = herd_samples(&embedding, a.m, &candidates.values())?;
    let rows: Vec<Vec<String>> =
        sample.points.iter().enumerate().map(|(j, &y)| vec![(j + 1).to_string(), num(y)]).collect();
    io::write_csv(&a.out, &["index", "y"], &rows)?;
    let sidecar = HerdSidecar {
        estimand: p.estimand.name(),
        data: path_string(&a.fit.data),
        alt_covariates: a.fit.alt_covariates.as_deref().map(path_string),
        at: a.at.clone(),
        m: a.m,
        policies: p.policies.record(),
        penalties: penalties_for_herd(penalties),
        kernels: (&p.kernels).into(),
        candidates,
        distance: embedding.distance_to_samples(&sample.points),
    };
    io::write_json(&io::sidecar_path(&a.out), &sidecar)
}

/// Embeddings use λ₃ (plus λ₁ or λ₂), never the outcome-regression λ.
fn penalties_for_herd(p: Penalties) -> PenaltyRecord {
    PenaltyRecord { lambda: None, ..p.into() }
}

#[derive(Serialize)]
struct TuneOutput {
    estimand: &'static str,
    data: String,
    n: usize,
    policies: PolicyRecord,
    penalties: PenaltyRecord,
    kernels: KernelsRecord,
}

pub fn tune(a: TuneArgs) -> Result<()> {
    let p = prepare(&a.fit, a.distribution)?;
    let policies = p.policies.policies();
    let mut penalties = match p.estimand {
        Estimand::FrontDoor => graphical::resolve_penalties(&p.data, &p.kernels, &policies, a.distribution)?,
        e => causal::resolve_penalties(e, &p.data, &p.kernels, &policies)?,
    };
    if a.distribution && p.estimand != Estimand::FrontDoor {
        let target: Option<distributions::EmbeddingTarget> = p.estimand.into();
        let target = target.ok_or_else(|| {
            CliError::Config(format!("estimand `{}` has no counterfactual distribution", p.estimand.name()))
        })?;
        penalties.lambda3 = distributions::resolve_penalties(target, &p.data, &p.kernels, &policies)?.lambda3;
    }
    let out = TuneOutput {
        estimand: p.estimand.name(),
        data: path_string(&a.fit.data),
        n: p.data.n(),
        policies: p.policies.record(),
        penalties: penalties.into(),
        kernels: (&p.kernels).into(),
    };
    match &a.out {
        Some(path) => io::write_json(path, &out),
        None => {
            let text =
                serde_json::to_string_pretty(&out).map_err(|e| CliError::io(PathBuf::from("<stdout>"), e.into()))?;
            println!("{text}");
            Ok(())
        }
    }
}
