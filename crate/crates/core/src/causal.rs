//! Causal function estimators.
//!
//! Every estimator is `αᵀ c` where `α = (K + nλI)⁻¹ Y` is the dual weight
//! vector of the outcome regression on the tensor-product features and `c` is
//! a kernel column describing the counterfactual population:
//!
//! | estimand | column `c` |
//! |---|---|
//! | dose response `θ(d)` | `K_Dd ⊙ n⁻¹ Σ_i K_{X x_i}` |
//! | distribution shift `θ(d, P̃)` | `K_Dd ⊙ ñ⁻¹ Σ_i K_{X x̃_i}` |
//! | effect on the treated `θ(d, d′)` | `K_Dd′ ⊙ K_XX (K_DD + nλ₁I)⁻¹ K_Dd` |
//! | conditional response `θ(d, v)` | `K_Dd ⊙ K_Vv ⊙ K_XX (K_VV + nλ₂I)⁻¹ K_Vv` |
//!
//! The incremental versions replace `K_Dd` (or `K_Dd′`) by its derivative in
//! the treatment level. The outcome regression is factored once per request
//! and reused over the whole evaluation grid.
//!
//! The back-door adjustment formula for a DAG coincides with the dose response
//! estimator [`estimate_ate`].

use alloc::format;
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::design::{Design, Stage};
use crate::error::{Error, Result};
use crate::kernels::BlockKernels;
use crate::ridge::{fit, PenaltyPolicy, RidgeSolution};
use crate::{Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Estimand {
    /// Dose response `E[Y^(d)]`.
    Ate,
    /// Dose response under an alternative covariate distribution.
    Ds,
    /// Conditional dose response `E[Y^(d′) | D = d]`.
    Att,
    /// Heterogeneous response `E[Y^(d) | V = v]`.
    Cate,
    /// Derivative of the dose response in `d`.
    IncAte,
    /// Derivative of the effect on the treated in `d′`.
    IncAtt,
    /// Front-door identified dose response; `x` holds the mediator.
    FrontDoor,
}

impl Estimand {
    pub const ALL: [Estimand; 7] = [
        Estimand::Ate,
        Estimand::Ds,
        Estimand::Att,
        Estimand::Cate,
        Estimand::IncAte,
        Estimand::IncAtt,
        Estimand::FrontDoor,
    ];

    /// Number of coordinates per evaluation point: 1 for `d`, 2 for `(d, d′)` or `(d, v)`.
    pub fn arity(self) -> usize {
        match self {
            Estimand::Ate | Estimand::Ds | Estimand::IncAte | Estimand::FrontDoor => 1,
            Estimand::Att | Estimand::Cate | Estimand::IncAtt => 2,
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Estimand::Ate => "ate",
            Estimand::Ds => "ds",
            Estimand::Att => "att",
            Estimand::Cate => "cate",
            Estimand::IncAte => "inc_ate",
            Estimand::IncAtt => "inc_att",
            Estimand::FrontDoor => "frontdoor",
        }
    }

    pub fn uses_lambda1(self) -> bool {
        matches!(self, Estimand::Att | Estimand::IncAtt | Estimand::FrontDoor)
    }

    pub fn uses_lambda2(self) -> bool {
        self == Estimand::Cate
    }
}

/// Ridge penalties of one estimate: λ for the outcome regression, λ₁ for the
/// embedding given the treatment, λ₂ for the embedding given `V`, and λ₃ for
/// the outcome-feature regression of distribution embeddings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penalties {
    pub lambda: f64,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub lambda3: Option<f64>,
}

impl Penalties {
    pub fn new(lambda: f64) -> Self {
        Self { lambda, lambda1: None, lambda2: None, lambda3: None }
    }

    pub fn with_lambda1(mut self, l: f64) -> Self {
        self.lambda1 = Some(l);
        self
    }

    pub fn with_lambda2(mut self, l: f64) -> Self {
        self.lambda2 = Some(l);
        self
    }

    pub fn with_lambda3(mut self, l: f64) -> Self {
        self.lambda3 = Some(l);
        self
    }

    pub(crate) fn require1(&self) -> Result<f64> {
        self.lambda1.ok_or_else(|| Error::Config("estimand needs penalty lambda1".into()))
    }

    pub(crate) fn require2(&self) -> Result<f64> {
        self.lambda2.ok_or_else(|| Error::Config("estimand needs penalty lambda2".into()))
    }

    pub(crate) fn require3(&self) -> Result<f64> {
        self.lambda3.ok_or_else(|| Error::Config("distribution embedding needs penalty lambda3".into()))
    }
}

/// Penalty policy per ridge stage.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PenaltyPolicies {
    pub response: PenaltyPolicy,
    pub treatment_embedding: PenaltyPolicy,
    pub interpretable_embedding: PenaltyPolicy,
    pub outcome_embedding: PenaltyPolicy,
}

impl PenaltyPolicies {
    pub fn uniform(policy: PenaltyPolicy) -> Self {
        Self {
            response: policy.clone(),
            treatment_embedding: policy.clone(),
            interpretable_embedding: policy.clone(),
            outcome_embedding: policy,
        }
    }
}

/// Resolves every penalty `estimand` needs. Embedding penalties are tuned on
/// the multi-output regression whose targets are the columns of `K_XX`, with
/// the per-output losses summed.
pub fn resolve_penalties(
    estimand: Estimand,
    data: &Dataset,
    kernels: &BlockKernels,
    policies: &PenaltyPolicies,
) -> Result<Penalties> {
    let design = Design::new(data, kernels, estimand == Estimand::Cate)?;
    let mut p = Penalties::new(design.resolve(Stage::Response, &policies.response)?);
    if estimand.uses_lambda1() {
        p.lambda1 = Some(design.resolve(Stage::TreatmentEmbedding, &policies.treatment_embedding)?);
    }
    if estimand.uses_lambda2() {
        p.lambda2 = Some(design.resolve(Stage::InterpretableEmbedding, &policies.interpretable_embedding)?);
    }
    Ok(p)
}

/// Evaluation points, one per row. Pairs are `(d, d′)` for the treated
/// effects and `(d, v)` for the conditional response.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalGrid {
    Points(Matrix),
    Pairs(Matrix, Matrix),
}

impl EvalGrid {
    /// Scalar grid `[d_1, …, d_m]`.
    pub fn scalar(values: &[f64]) -> Self {
        EvalGrid::Points(Matrix::from_column_slice(values.len(), 1, values))
    }

    /// Scalar pairs `[(a_1, b_1), …]`.
    pub fn scalar_pairs(pairs: &[(f64, f64)]) -> Self {
        let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        EvalGrid::Pairs(Matrix::from_column_slice(a.len(), 1, &a), Matrix::from_column_slice(b.len(), 1, &b))
    }

    pub fn arity(&self) -> usize {
        match self {
            EvalGrid::Points(_) => 1,
            EvalGrid::Pairs(..) => 2,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            EvalGrid::Points(m) | EvalGrid::Pairs(m, _) => m.nrows(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveEstimate {
    pub estimand: Estimand,
    /// Coordinates of each evaluation point (both components concatenated for pairs).
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub penalties: Penalties,
}

/// A complete causal estimation request.
#[derive(Debug, Clone)]
pub struct CausalRequest<'a> {
    pub estimand: Estimand,
    pub data: &'a Dataset,
    /// Covariates drawn from the shifted population; required for, and only
    /// for, [`Estimand::Ds`].
    pub alt_covariates: Option<&'a Matrix>,
    pub grid: EvalGrid,
    pub penalties: Penalties,
    pub kernels: &'a BlockKernels,
}

impl CausalRequest<'_> {
    pub fn validate(&self) -> Result<()> {
        match (self.estimand, self.alt_covariates.is_some()) {
            (Estimand::Ds, false) => {
                return Err(Error::Schema("distribution shift needs alternative covariates".into()))
            }
            (e, true) if e != Estimand::Ds => {
                return Err(Error::Schema(format!("alternative covariates are not used by `{}`", e.name())))
            }
            _ => {}
        }
        if self.grid.arity() != self.estimand.arity() {
            return Err(Error::Config(format!(
                "`{}` takes evaluation points of arity {}, grid has arity {}",
                self.estimand.name(),
                self.estimand.arity(),
                self.grid.arity()
            )));
        }
        if self.grid.is_empty() {
            return Err(Error::Config("evaluation grid is empty".into()));
        }
        Ok(())
    }
}

/// Runs the estimator named by `req.estimand`.
pub fn estimate(req: &CausalRequest<'_>) -> Result<CurveEstimate> {
    req.validate()?;
    let (data, kernels, p) = (req.data, req.kernels, &req.penalties);
    match (&req.grid, req.estimand) {
        (EvalGrid::Points(g), Estimand::Ate) => estimate_ate(data, kernels, p.lambda, g),
        (EvalGrid::Points(g), Estimand::Ds) => {
            estimate_ds(data, kernels, req.alt_covariates.expect("validated"), p.lambda, g)
        }
        (EvalGrid::Points(g), Estimand::IncAte) => estimate_incremental(data, kernels, p.lambda, g),
        (EvalGrid::Points(g), Estimand::FrontDoor) => {
            crate::graphical::estimate_frontdoor(&crate::graphical::FrontDoorRequest {
                data,
                kernels,
                penalties: *p,
                grid: g.clone(),
            })
        }
        (EvalGrid::Pairs(a, b), Estimand::Att) => estimate_att(data, kernels, p.lambda, p.require1()?, a, b),
        (EvalGrid::Pairs(a, b), Estimand::IncAtt) => {
            estimate_incremental_att(data, kernels, p.lambda, p.require1()?, a, b)
        }
        (EvalGrid::Pairs(a, b), Estimand::Cate) => estimate_cate(data, kernels, p.lambda, p.require2()?, a, b),
        _ => unreachable!("arity checked by validate"),
    }
}

fn outcome_fit(design: &Design<'_>, lambda: f64) -> Result<RidgeSolution> {
    let y = Matrix::from_column_slice(design.n(), 1, design.data.outcome().as_slice());
    fit(&design.response_gram(), &y, lambda)
}

fn rows(m: &Matrix) -> impl Iterator<Item = Vec<f64>> + '_ {
    m.row_iter().map(|r| r.iter().copied().collect())
}

fn check_grid(grid: &Matrix, cols: usize, what: &str) -> Result<()> {
    if grid.nrows() == 0 {
        return Err(Error::Config("evaluation grid is empty".into()));
    }
    if grid.ncols() != cols {
        return Err(Error::Config(format!("{what} grid has dimension {} but the data block has {cols}", grid.ncols())));
    }
    Ok(())
}

fn check_pairs(a: &Matrix, b: &Matrix) -> Result<()> {
    if a.nrows() != b.nrows() {
        return Err(Error::Shape { expected: a.nrows(), got: b.nrows() });
    }
    Ok(())
}

fn curve(estimand: Estimand, points: Vec<Vec<f64>>, values: Vec<f64>, penalties: Penalties) -> CurveEstimate {
    CurveEstimate { estimand, points, values, penalties }
}

// Shared by the dose response and distribution-shift estimators so that the
// shift estimator with the training covariates reproduces the dose response
// bit for bit.
fn averaged_curve(
    data: &Dataset,
    kernels: &BlockKernels,
    lambda: f64,
    sample: &Matrix,
    grid: &Matrix,
    estimand: Estimand,
) -> Result<CurveEstimate> {
    check_grid(grid, data.treatment().ncols(), "treatment")?;
    let design = Design::new(data, kernels, false)?;
    let sol = outcome_fit(&design, lambda)?;
    let x_mean = design.covariate_mean(sample)?;
    let mut values = Vec::with_capacity(grid.nrows());
    for d in rows(grid) {
        let col = design.treatment_column(&d)?.component_mul(&x_mean);
        values.push(sol.predict_one(&col)?);
    }
    Ok(curve(estimand, rows(grid).collect(), values, Penalties::new(lambda)))
}

/// Dose response curve `θ̂(d) = n⁻¹ Σ_i Yᵀ(K_DD ⊙ K_XX + nλI)⁻¹(K_Dd ⊙ K_{X x_i})`,
/// computed through the averaged covariate column.
pub fn estimate_ate(data: &Dataset, kernels: &BlockKernels, lambda: f64, grid: &Matrix) -> Result<CurveEstimate> {
    averaged_curve(data, kernels, lambda, data.covariates(), grid, Estimand::Ate)
}

/// Dose response under the covariate distribution of `alt_covariates`.
pub fn estimate_ds(
    data: &Dataset,
    kernels: &BlockKernels,
    alt_covariates: &Matrix,
    lambda: f64,
    grid: &Matrix,
) -> Result<CurveEstimate> {
    averaged_curve(data, kernels, lambda, alt_covariates, grid, Estimand::Ds)
}

/// Incremental dose response `∂θ(d)/∂d`.
pub fn estimate_incremental(
    data: &Dataset,
    kernels: &BlockKernels,
    lambda: f64,
    grid: &Matrix,
) -> Result<CurveEstimate> {
    check_grid(grid, 1, "treatment")?;
    let design = Design::new(data, kernels, false)?;
    let sol = outcome_fit(&design, lambda)?;
    let x_mean = design.covariate_mean(data.covariates())?;
    let mut values = Vec::with_capacity(grid.nrows());
    for i in 0..grid.nrows() {
        let col = design.treatment_gradient(grid[(i, 0)])?.component_mul(&x_mean);
        values.push(sol.predict_one(&col)?);
    }
    Ok(curve(Estimand::IncAte, rows(grid).collect(), values, Penalties::new(lambda)))
}

/// Effect on the treated `θ̂(d, d′)`: the response to `d′` of the
/// subpopulation that received `d`. Rows of `received` are `d`, rows of
/// `counterfactual` are `d′`.
pub fn estimate_att(
    data: &Dataset,
    kernels: &BlockKernels,
    lambda: f64,
    lambda1: f64,
    received: &Matrix,
    counterfactual: &Matrix,
) -> Result<CurveEstimate> {
    treated_curve(data, kernels, lambda, lambda1, received, counterfactual, false)
}

/// Derivative of the effect on the treated in the counterfactual level `d′`.
pub fn estimate_incremental_att(
    data: &Dataset,
    kernels: &BlockKernels,
    lambda: f64,
    lambda1: f64,
    received: &Matrix,
    counterfactual: &Matrix,
) -> Result<CurveEstimate> {
    treated_curve(data, kernels, lambda, lambda1, received, counterfactual, true)
}

fn treated_curve(
    data: &Dataset,
    kernels: &BlockKernels,
    lambda: f64,
    lambda1: f64,
    received: &Matrix,
    counterfactual: &Matrix,
    incremental: bool,
) -> Result<CurveEstimate> {
    let p = data.treatment().ncols();
    check_grid(received, p, "treatment")?;
    check_grid(counterfactual, p, "treatment")?;
    check_pairs(received, counterfactual)?;
    let design = Design::new(data, kernels, false)?;
    let sol = outcome_fit(&design, lambda)?;
    let embedding = design.treatment_embedding(lambda1)?;
    let mut values = Vec::with_capacity(received.nrows());
    let mut points = Vec::with_capacity(received.nrows());
    for (d, d_cf) in rows(received).zip(rows(counterfactual)) {
        let mu = embedding.column(&design.treatment_column(&d)?)?;
        let k_cf = if incremental {
            if p != 1 {
                return Err(Error::Unsupported("incremental estimands require a scalar treatment"));
            }
            design.treatment_gradient(d_cf[0])?
        } else {
            design.treatment_column(&d_cf)?
        };
        values.push(sol.predict_one(&k_cf.component_mul(&mu))?);
        points.push(d.into_iter().chain(d_cf).collect());
    }
    let estimand = if incremental { Estimand::IncAtt } else { Estimand::Att };
    Ok(curve(estimand, points, values, Penalties::new(lambda).with_lambda1(lambda1)))
}

/// Heterogeneous response `θ̂(d, v)`.
pub fn estimate_cate(
    data: &Dataset,
    kernels: &BlockKernels,
    lambda: f64,
    lambda2: f64,
    treatments: &Matrix,
    interpretable: &Matrix,
) -> Result<CurveEstimate> {
    let v_dim = data
        .interpretable()
        .ok_or_else(|| Error::Schema("estimand requires the interpretable covariate block `v`".into()))?
        .ncols();
    check_grid(treatments, data.treatment().ncols(), "treatment")?;
    check_grid(interpretable, v_dim, "interpretable covariate")?;
    check_pairs(treatments, interpretable)?;
    let design = Design::new(data, kernels, true)?;
    let sol = outcome_fit(&design, lambda)?;
    let embedding = design.interpretable_embedding(lambda2)?;
    let mut values = Vec::with_capacity(treatments.nrows());
    let mut points = Vec::with_capacity(treatments.nrows());
    for (d, v) in rows(treatments).zip(rows(interpretable)) {
        let k_v = design.interpretable_column(&v)?;
        let col = design.treatment_column(&d)?.component_mul(&k_v).component_mul(&embedding.column(&k_v)?);
        values.push(sol.predict_one(&col)?);
        points.push(d.into_iter().chain(v).collect());
    }
    Ok(curve(Estimand::Cate, points, values, Penalties::new(lambda).with_lambda2(lambda2)))
}

/// Dual weights `(K + nλI)⁻¹ Y` of the outcome regression used by
/// `estimand`; exposed for diagnostics and two-stage checks.
pub fn outcome_dual_weights(estimand: Estimand, data: &Dataset, kernels: &BlockKernels, lambda: f64) -> Result<Vector> {
    let design = Design::new(data, kernels, estimand == Estimand::Cate)?;
    Ok(outcome_fit(&design, lambda)?.dual_weights().column(0).into_owned())
}
