// Gram blocks and kernel columns shared by the causal, distribution and
// front-door estimators.

use alloc::format;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernels::{grad_kernel_column, gram, kernel_column, BlockKernels, KernelConfig};
use crate::ridge::{PenaltyPolicy, RidgeSystem};
use crate::{Matrix, Vector};

pub(crate) struct Design<'a> {
    pub data: &'a Dataset,
    pub kernels: &'a BlockKernels,
    pub k_dd: Matrix,
    pub k_xx: Matrix,
    pub k_vv: Option<Matrix>,
}

impl<'a> Design<'a> {
    /// Builds `K_DD`, `K_XX` and, when `interpretable` is set, `K_VV`.
    pub fn new(data: &'a Dataset, kernels: &'a BlockKernels, interpretable: bool) -> Result<Self> {
        let k_dd = gram(data.treatment(), data.treatment(), &kernels.treatment)?;
        let k_xx = gram(data.covariates(), data.covariates(), &kernels.covariates)?;
        let k_vv = if interpretable {
            let (v, cfg) = interpretable_parts(data, kernels)?;
            Some(gram(v, v, cfg)?)
        } else {
            None
        };
        Ok(Self { data, kernels, k_dd, k_xx, k_vv })
    }

    pub fn n(&self) -> usize {
        self.data.n()
    }

    /// `K_DD ⊙ K_XX`, or `K_DD ⊙ K_VV ⊙ K_XX` when `K_VV` was built.
    pub fn response_gram(&self) -> Matrix {
        let k = self.k_dd.component_mul(&self.k_xx);
        match &self.k_vv {
            Some(vv) => k.component_mul(vv),
            None => k,
        }
    }

    pub fn treatment_column(&self, d: &[f64]) -> Result<Vector> {
        kernel_column(self.data.treatment(), d, &self.kernels.treatment)
    }

    /// `(∂/∂d k(D_i, d))_i`; requires a scalar treatment.
    pub fn treatment_gradient(&self, d: f64) -> Result<Vector> {
        let t = self.data.treatment();
        if t.ncols() != 1 {
            return Err(Error::Unsupported("incremental estimands require a scalar treatment"));
        }
        grad_kernel_column(t.as_slice(), d, &self.kernels.treatment)
    }

    pub fn interpretable_column(&self, v: &[f64]) -> Result<Vector> {
        let (points, cfg) = interpretable_parts(self.data, self.kernels)?;
        kernel_column(points, v, cfg)
    }

    /// `ñ⁻¹ Σ_i K_{X x̃_i}` over the rows of `sample`.
    pub fn covariate_mean(&self, sample: &Matrix) -> Result<Vector> {
        if sample.ncols() != self.data.covariates().ncols() {
            return Err(Error::Schema(format!(
                "alternative covariates have {} columns but x has {}",
                sample.ncols(),
                self.data.covariates().ncols()
            )));
        }
        if sample.nrows() == 0 {
            return Err(Error::Schema("alternative covariate sample is empty".into()));
        }
        let k = gram(self.data.covariates(), sample, &self.kernels.covariates)?;
        Ok(column_mean(&k))
    }

    /// `n⁻¹ Σ_i K_{D d_i}` over the training treatments.
    pub fn treatment_mean(&self) -> Vector {
        column_mean(&self.k_dd)
    }

    /// Conditional mean embedding of `X` given `D`.
    pub fn treatment_embedding(&self, lambda1: f64) -> Result<ConditionalEmbedding<'_>> {
        Ok(ConditionalEmbedding { system: RidgeSystem::factor(&self.k_dd, lambda1)?, k_xx: &self.k_xx })
    }

    /// Conditional mean embedding of `X` given `V`.
    pub fn interpretable_embedding(&self, lambda2: f64) -> Result<ConditionalEmbedding<'_>> {
        let k_vv = self.k_vv.as_ref().ok_or_else(missing_interpretable)?;
        Ok(ConditionalEmbedding { system: RidgeSystem::factor(k_vv, lambda2)?, k_xx: &self.k_xx })
    }

    pub fn resolve(&self, stage: Stage, policy: &PenaltyPolicy) -> Result<f64> {
        match stage {
            Stage::Response => {
                let y = Matrix::from_column_slice(self.n(), 1, self.data.outcome().as_slice());
                policy.resolve(&self.response_gram(), &y)
            }
            Stage::TreatmentEmbedding => policy.resolve(&self.k_dd, &self.k_xx),
            Stage::InterpretableEmbedding => {
                let k_vv = self.k_vv.as_ref().ok_or_else(missing_interpretable)?;
                policy.resolve(k_vv, &self.k_xx)
            }
            Stage::OutcomeEmbedding => {
                let cfg = outcome_kernel(self.kernels)?;
                let y = Matrix::from_column_slice(self.n(), 1, self.data.outcome().as_slice());
                policy.resolve(&self.response_gram(), &gram(&y, &y, cfg)?)
            }
        }
    }
}

/// One ridge regression inside an estimator, named by what it regresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stage {
    /// `Y` on the response features (λ).
    Response,
    /// `φ(X)` on `φ(D)` (λ₁).
    TreatmentEmbedding,
    /// `φ(X)` on `φ(V)` (λ₂).
    InterpretableEmbedding,
    /// `φ(Y)` on the response features (λ₃).
    OutcomeEmbedding,
}

/// `μ̂_x(w)` as the column `K_XX (K_WW + nλI)⁻¹ K_Ww`.
pub(crate) struct ConditionalEmbedding<'a> {
    system: RidgeSystem,
    k_xx: &'a Matrix,
}

impl ConditionalEmbedding<'_> {
    pub fn column(&self, k_at: &Vector) -> Result<Vector> {
        Ok(self.k_xx * self.system.solve_vector(k_at)?)
    }
}

pub(crate) fn column_mean(k: &Matrix) -> Vector {
    let mut acc = Vector::zeros(k.nrows());
    for c in k.column_iter() {
        acc += c;
    }
    acc / k.ncols() as f64
}

pub(crate) fn outcome_kernel(kernels: &BlockKernels) -> Result<&KernelConfig> {
    let cfg = kernels
        .outcome
        .as_ref()
        .ok_or_else(|| Error::Config("distribution embeddings need an outcome kernel".into()))?;
    if cfg.family() == crate::KernelFamily::ExpQuadratic && cfg.lengthscales().len() != 1 {
        return Err(Error::Config("outcome kernel must be scalar".into()));
    }
    Ok(cfg)
}

fn interpretable_parts<'a>(data: &'a Dataset, kernels: &'a BlockKernels) -> Result<(&'a Matrix, &'a KernelConfig)> {
    let v = data.interpretable().ok_or_else(missing_interpretable)?;
    let cfg =
        kernels.interpretable.as_ref().ok_or_else(|| Error::Config("no kernel configured for block `v`".into()))?;
    Ok((v, cfg))
}

fn missing_interpretable() -> Error {
    Error::Schema("estimand requires the interpretable covariate block `v`".into())
}
