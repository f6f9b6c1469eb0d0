//! Counterfactual distribution embeddings and kernel herding.
//!
//! An embedding estimate is the function `y ↦ K_yY β` with coefficients
//! `β = (K + nλ₃I)⁻¹ c`, where `c` is the same counterfactual kernel column the
//! mean estimators use. Herding turns the embedding into a deterministic
//! sequence of outcome samples whose empirical embedding approaches it.

use alloc::vec::Vec;

use crate::causal::{Estimand, Penalties, PenaltyPolicies};
use crate::data::Dataset;
use crate::design::{outcome_kernel, Design, Stage};
use crate::error::{Error, Result};
use crate::kernels::{gram, BlockKernels, KernelConfig};
use crate::ridge::RidgeSystem;
use crate::{Matrix, Vector};

/// Which counterfactual distribution an embedding describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingTarget {
    Ate,
    Ds,
    Att,
    Cate,
    FrontDoor,
}

impl EmbeddingTarget {
    pub fn name(self) -> &'static str {
        match self {
            EmbeddingTarget::Ate => "ate",
            EmbeddingTarget::Ds => "ds",
            EmbeddingTarget::Att => "att",
            EmbeddingTarget::Cate => "cate",
            EmbeddingTarget::FrontDoor => "frontdoor",
        }
    }
}

/// An element of the outcome RKHS, `Σ_i β_i k_Y(Y_i, ·)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingEstimate {
    coefficients: Vector,
    outcome_points: Vec<f64>,
    outcome_kernel: KernelConfig,
    target: EmbeddingTarget,
    at: Vec<f64>,
}

impl EmbeddingEstimate {
    pub fn new(
        coefficients: Vector,
        outcome_points: Vec<f64>,
        outcome_kernel: KernelConfig,
        target: EmbeddingTarget,
        at: Vec<f64>,
    ) -> Result<Self> {
        if coefficients.len() != outcome_points.len() {
            return Err(Error::Shape { expected: outcome_points.len(), got: coefficients.len() });
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config("embedding coefficients must be finite".into()));
        }
        if !outcome_kernel.lengthscales().is_empty() && outcome_kernel.lengthscales().len() != 1 {
            return Err(Error::Config("outcome kernel must be scalar".into()));
        }
        Ok(Self { coefficients, outcome_points, outcome_kernel, target, at })
    }

    pub fn coefficients(&self) -> &Vector {
        &self.coefficients
    }

    pub fn outcome_points(&self) -> &[f64] {
        &self.outcome_points
    }

    pub fn outcome_kernel(&self) -> &KernelConfig {
        &self.outcome_kernel
    }

    pub fn target(&self) -> EmbeddingTarget {
        self.target
    }

    /// Evaluation point the embedding was built at.
    pub fn at(&self) -> &[f64] {
        &self.at
    }

    pub fn evaluate(&self, y: f64) -> f64 {
        self.outcome_points
            .iter()
            .zip(self.coefficients.iter())
            .map(|(&yi, c)| c * self.outcome_kernel.eval(&[yi], &[y]))
            .sum()
    }

    fn evaluate_many(&self, ys: &[f64]) -> Vector {
        let pts = Matrix::from_column_slice(self.outcome_points.len(), 1, &self.outcome_points);
        let at = Matrix::from_column_slice(ys.len(), 1, ys);
        let k = gram(&at, &pts, &self.outcome_kernel).expect("scalar outcome kernel");
        k * &self.coefficients
    }

    /// RKHS norm of `self - m⁻¹ Σ_j φ(samples_j)`, expanded through kernel
    /// evaluations.
    pub fn distance_to_samples(&self, samples: &[f64]) -> f64 {
        let pts = Matrix::from_column_slice(self.outcome_points.len(), 1, &self.outcome_points);
        let s = Matrix::from_column_slice(samples.len(), 1, samples);
        let cfg = &self.outcome_kernel;
        let c = &self.coefficients;
        let aa = c.dot(&(gram(&pts, &pts, cfg).expect("scalar") * c));
        let (ab, bb) = if samples.is_empty() {
            (0.0, 0.0)
        } else {
            let m = samples.len() as f64;
            let ab = (gram(&s, &pts, cfg).expect("scalar") * c).sum() / m;
            let bb = gram(&s, &s, cfg).expect("scalar").sum() / (m * m);
            (ab, bb)
        };
        libm::sqrt((aa - 2.0 * ab + bb).max(0.0))
    }
}

fn build(
    design: &Design<'_>,
    lambda3: f64,
    column: &Vector,
    target: EmbeddingTarget,
    at: Vec<f64>,
) -> Result<EmbeddingEstimate> {
    let cfg = outcome_kernel(design.kernels)?.clone();
    let system = RidgeSystem::factor(&design.response_gram(), lambda3)?;
    EmbeddingEstimate::new(system.solve_vector(column)?, design.data.outcome().as_slice().to_vec(), cfg, target, at)
}

/// Embedding of the counterfactual outcome distribution under treatment `d`.
pub fn embed_ate(data: &Dataset, kernels: &BlockKernels, lambda3: f64, d: &[f64]) -> Result<EmbeddingEstimate> {
    embed_shifted(data, kernels, data.covariates(), lambda3, d, EmbeddingTarget::Ate)
}

/// As [`embed_ate`] with covariates drawn from an alternative population.
pub fn embed_ds(
    data: &Dataset,
    kernels: &BlockKernels,
    alt_covariates: &Matrix,
    lambda3: f64,
    d: &[f64],
) -> Result<EmbeddingEstimate> {
    embed_shifted(data, kernels, alt_covariates, lambda3, d, EmbeddingTarget::Ds)
}

fn embed_shifted(
    data: &Dataset,
    kernels: &BlockKernels,
    sample: &Matrix,
    lambda3: f64,
    d: &[f64],
    target: EmbeddingTarget,
) -> Result<EmbeddingEstimate> {
    let design = Design::new(data, kernels, false)?;
    let col = design.treatment_column(d)?.component_mul(&design.covariate_mean(sample)?);
    build(&design, lambda3, &col, target, d.to_vec())
}

/// Counterfactual distribution of `Y^(d′)` among units that received `d`.
pub fn embed_att(
    data: &Dataset,
    kernels: &BlockKernels,
    lambda3: f64,
    lambda1: f64,
    d: &[f64],
    d_cf: &[f64],
) -> Result<EmbeddingEstimate> {
    let design = Design::new(data, kernels, false)?;
    let mu = design.treatment_embedding(lambda1)?.column(&design.treatment_column(d)?)?;
    let col = design.treatment_column(d_cf)?.component_mul(&mu);
    build(&design, lambda3, &col, EmbeddingTarget::Att, d.iter().chain(d_cf).copied().collect())
}

/// Counterfactual distribution of `Y^(d)` in the subpopulation `V = v`.
pub fn embed_cate(
    data: &Dataset,
    kernels: &BlockKernels,
    lambda3: f64,
    lambda2: f64,
    d: &[f64],
    v: &[f64],
) -> Result<EmbeddingEstimate> {
    let design = Design::new(data, kernels, true)?;
    let k_v = design.interpretable_column(v)?;
    let mu = design.interpretable_embedding(lambda2)?.column(&k_v)?;
    let col = design.treatment_column(d)?.component_mul(&k_v).component_mul(&mu);
    build(&design, lambda3, &col, EmbeddingTarget::Cate, d.iter().chain(v).copied().collect())
}

/// Dispatches on `target` (front-door embeddings live in [`crate::graphical`]).
/// `second` is `d′` for [`EmbeddingTarget::Att`] and `v` for
/// [`EmbeddingTarget::Cate`].
pub fn embed_counterfactual(
    target: EmbeddingTarget,
    data: &Dataset,
    kernels: &BlockKernels,
    alt_covariates: Option<&Matrix>,
    penalties: &Penalties,
    d: &[f64],
    second: Option<&[f64]>,
) -> Result<EmbeddingEstimate> {
    let l3 = penalties.require3()?;
    let need_second = || second.ok_or_else(|| Error::Config("embedding needs a second evaluation coordinate".into()));
    match target {
        EmbeddingTarget::Ate => embed_ate(data, kernels, l3, d),
        EmbeddingTarget::Ds => {
            let alt = alt_covariates
                .ok_or_else(|| Error::Schema("distribution shift needs alternative covariates".into()))?;
            embed_ds(data, kernels, alt, l3, d)
        }
        EmbeddingTarget::Att => embed_att(data, kernels, l3, penalties.require1()?, d, need_second()?),
        EmbeddingTarget::Cate => embed_cate(data, kernels, l3, penalties.require2()?, d, need_second()?),
        EmbeddingTarget::FrontDoor => crate::graphical::embed_frontdoor(data, kernels, l3, penalties.require1()?, d),
    }
}

/// Resolves λ₃ (regression of `φ(Y)` on the response features, targets the
/// columns of `K_YY`) plus λ₁ or λ₂ when `target` needs them.
pub fn resolve_penalties(
    target: EmbeddingTarget,
    data: &Dataset,
    kernels: &BlockKernels,
    policies: &PenaltyPolicies,
) -> Result<Penalties> {
    let design = Design::new(data, kernels, target == EmbeddingTarget::Cate)?;
    let l3 = design.resolve(Stage::OutcomeEmbedding, &policies.outcome_embedding)?;
    let mut p = Penalties::new(l3).with_lambda3(l3);
    match target {
        EmbeddingTarget::Att | EmbeddingTarget::FrontDoor => {
            p.lambda1 = Some(design.resolve(Stage::TreatmentEmbedding, &policies.treatment_embedding)?);
        }
        EmbeddingTarget::Cate => {
            p.lambda2 = Some(design.resolve(Stage::InterpretableEmbedding, &policies.interpretable_embedding)?);
        }
        EmbeddingTarget::Ate | EmbeddingTarget::Ds => {}
    }
    Ok(p)
}

impl From<Estimand> for Option<EmbeddingTarget> {
    fn from(e: Estimand) -> Self {
        match e {
            Estimand::Ate => Some(EmbeddingTarget::Ate),
            Estimand::Ds => Some(EmbeddingTarget::Ds),
            Estimand::Att => Some(EmbeddingTarget::Att),
            Estimand::Cate => Some(EmbeddingTarget::Cate),
            Estimand::FrontDoor => Some(EmbeddingTarget::FrontDoor),
            Estimand::IncAte | Estimand::IncAtt => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HerdedSample {
    /// `Ỹ_1, …, Ỹ_m` in herding order; each is a candidate grid value.
    pub points: Vec<f64>,
    /// Index of each point in the candidate grid.
    pub indices: Vec<usize>,
    pub candidate_grid: Vec<f64>,
}

/// Default number of herding candidates.
pub const DEFAULT_CANDIDATES: usize = 512;

/// `count` equally spaced candidates spanning the outcome range extended by
/// half its width on each side.
pub fn default_candidate_grid(outcomes: &[f64], count: usize) -> Result<Vec<f64>> {
    if outcomes.is_empty() || count == 0 {
        return Err(Error::Config("herding grid needs outcomes and a positive count".into()));
    }
    let lo = outcomes.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = outcomes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { hi - lo } else { 1.0 };
    let (a, b) = (lo - 0.5 * width, hi + 0.5 * width);
    if count == 1 {
        return Ok(alloc::vec![0.5 * (a + b)]);
    }
    let step = (b - a) / (count - 1) as f64;
    Ok((0..count).map(|i| a + step * i as f64).collect())
}

/// Kernel herding over a finite candidate set.
///
/// `Ỹ_1` maximizes the embedding; for `j > 1`, `Ỹ_j` maximizes
/// `embedding(y) - (j + 1)⁻¹ Σ_{ℓ<j} k_Y(Ỹ_ℓ, y)`. Ties go to the lowest grid
/// index.
pub fn herd(embedding: &EmbeddingEstimate, m: usize, candidate_grid: &[f64]) -> Result<HerdedSample> {
    if candidate_grid.is_empty() {
        return Err(Error::Config("herding candidate grid is empty".into()));
    }
    if m == 0 {
        return Err(Error::Config("herding needs at least one sample".into()));
    }
    let target = embedding.evaluate_many(candidate_grid);
    let cfg = embedding.outcome_kernel();
    let mut repulsion = alloc::vec![0.0; candidate_grid.len()];
    let mut points = Vec::with_capacity(m);
    let mut indices = Vec::with_capacity(m);
    for j in 1..=m {
        let weight = 1.0 / (j as f64 + 1.0);
        let mut best = (0, f64::NEG_INFINITY);
        for (g, (t, r)) in target.iter().zip(&repulsion).enumerate() {
            let score = t - weight * r;
            if score > best.1 {
                best = (g, score);
            }
        }
        let idx = best.0;
        let chosen = candidate_grid[idx];
        for (r, &y) in repulsion.iter_mut().zip(candidate_grid) {
            *r += cfg.eval(&[chosen], &[y]);
        }
        points.push(chosen);
        indices.push(idx);
    }
    Ok(HerdedSample { points, indices, candidate_grid: candidate_grid.to_vec() })
}
