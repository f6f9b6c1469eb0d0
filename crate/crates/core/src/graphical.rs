//! Front-door estimators for a mediator `X` between treatment `D` and outcome
//! `Y` with unobserved treatment-outcome confounding.
//!
//! `θ̂(d) = n⁻¹ Σ_i Yᵀ(K_DD ⊙ K_XX + nλI)⁻¹[K_{D d_i} ⊙ K_XX (K_DD + nλ₁I)⁻¹ K_Dd]`.
//! The mediator embedding `μ̂_x(d)` does not depend on `i`, so it is computed
//! once per grid point and the sum over `i` collapses to the row means of
//! `K_DD`.
//!
//! For back-door adjustment use [`crate::causal::estimate_ate`]; the two
//! formulas coincide.

use alloc::vec::Vec;

use crate::causal::{CurveEstimate, Estimand, Penalties, PenaltyPolicies};
use crate::data::Dataset;
use crate::design::{Design, Stage};
use crate::distributions::{EmbeddingEstimate, EmbeddingTarget};
use crate::error::{Error, Result};
use crate::kernels::BlockKernels;
use crate::ridge::{fit, RidgeSystem};
use crate::{Matrix, Vector};

/// A front-door estimation request; `data.covariates()` holds the mediator.
#[derive(Debug, Clone)]
pub struct FrontDoorRequest<'a> {
    pub data: &'a Dataset,
    pub kernels: &'a BlockKernels,
    /// λ and λ₁ (plus λ₃ for embeddings).
    pub penalties: Penalties,
    /// Treatment levels, one per row.
    pub grid: Matrix,
}

impl FrontDoorRequest<'_> {
    fn validate(&self) -> Result<f64> {
        if self.grid.nrows() == 0 {
            return Err(Error::Config("evaluation grid is empty".into()));
        }
        if self.grid.ncols() != self.data.treatment().ncols() {
            return Err(Error::Config("grid dimension differs from the treatment dimension".into()));
        }
        self.penalties.require1()
    }
}

/// `K_XX (K_DD + nλ₁I)⁻¹ K_Dd` scaled by the mean treatment column.
fn frontdoor_column(design: &Design<'_>, system: &RidgeSystem, d_mean: &Vector, d: &[f64]) -> Result<Vector> {
    let mu = &design.k_xx * system.solve_vector(&design.treatment_column(d)?)?;
    Ok(d_mean.component_mul(&mu))
}

pub fn estimate_frontdoor(req: &FrontDoorRequest<'_>) -> Result<CurveEstimate> {
    let lambda1 = req.validate()?;
    let design = Design::new(req.data, req.kernels, false)?;
    let y = Matrix::from_column_slice(design.n(), 1, req.data.outcome().as_slice());
    let sol = fit(&design.response_gram(), &y, req.penalties.lambda)?;
    let inner = RidgeSystem::factor(&design.k_dd, lambda1)?;
    let d_mean = design.treatment_mean();
    let mut values = Vec::with_capacity(req.grid.nrows());
    let mut points = Vec::with_capacity(req.grid.nrows());
    for row in req.grid.row_iter() {
        let d: Vec<f64> = row.iter().copied().collect();
        values.push(sol.predict_one(&frontdoor_column(&design, &inner, &d_mean, &d)?)?);
        points.push(d);
    }
    Ok(CurveEstimate {
        estimand: Estimand::FrontDoor,
        points,
        values,
        penalties: Penalties::new(req.penalties.lambda).with_lambda1(lambda1),
    })
}

/// Front-door counterfactual distribution embedding at treatment `d`.
pub fn embed_frontdoor(
    data: &Dataset,
    kernels: &BlockKernels,
    lambda3: f64,
    lambda1: f64,
    d: &[f64],
) -> Result<EmbeddingEstimate> {
    let design = Design::new(data, kernels, false)?;
    let cfg = crate::design::outcome_kernel(kernels)?.clone();
    let inner = RidgeSystem::factor(&design.k_dd, lambda1)?;
    let col = frontdoor_column(&design, &inner, &design.treatment_mean(), d)?;
    let outer = RidgeSystem::factor(&design.response_gram(), lambda3)?;
    EmbeddingEstimate::new(
        outer.solve_vector(&col)?,
        data.outcome().as_slice().to_vec(),
        cfg,
        EmbeddingTarget::FrontDoor,
        d.to_vec(),
    )
}

/// Resolves λ and λ₁ (and λ₃ when `with_outcome_embedding`).
pub fn resolve_penalties(
    data: &Dataset,
    kernels: &BlockKernels,
    policies: &PenaltyPolicies,
    with_outcome_embedding: bool,
) -> Result<Penalties> {
    let design = Design::new(data, kernels, false)?;
    let mut p = Penalties::new(design.resolve(Stage::Response, &policies.response)?)
        .with_lambda1(design.resolve(Stage::TreatmentEmbedding, &policies.treatment_embedding)?);
    if with_outcome_embedding {
        p.lambda3 = Some(design.resolve(Stage::OutcomeEmbedding, &policies.outcome_embedding)?);
    }
    Ok(p)
}
