//! Synthetic designs with known causal functions, and Monte Carlo MSE studies.
//!
//! * Dose design: `X ~ N(0, Σ)` in 100 dimensions with `Σ` tridiagonal (unit
//!   diagonal, 0.5 off-diagonal), `β_j = j⁻²`,
//!   `D = Φ(3Xᵀβ) + 0.75ν`, `Y = 1.2D + 1.2Xᵀβ + D² + D X₁ + ε`, with
//!   `ν, ε ~ N(0, 1)`. The dose response is `1.2d + d²`.
//! * Heterogeneous design: `V = ε₁`, `X = (1 + 2V + ε₂, 1 + 2V + ε₃,
//!   (V - 1)² + ε₄)` with `ε_j ~ U(-1/2, 1/2)`,
//!   `D ~ Bernoulli(Λ((V + X₁ + X₂ + X₃) / 2))`, and `Y = V X₁ X₂ X₃ + ν`
//!   when `D = 1`, `Y = 0` otherwise, `ν ~ N(0, 1/16)`. The conditional
//!   response at `d = 1` is `v (1 + 2v)² (v - 1)²`.
//!
//! Random numbers come from `ChaCha8Rng` seeded with `seed_from_u64`; a study
//! replication `r` uses seed `base_seed + r`.

use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::Cholesky;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::causal::{
    estimate_ate, estimate_cate, resolve_penalties, CurveEstimate, Estimand, Penalties, PenaltyPolicies,
};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernels::{BlockKernels, KernelConfig};
use crate::{Matrix, Vector};

/// Covariate dimension of the dose design.
pub const DOSE_DIM: usize = 100;

/// `β_j = j⁻²`, `j = 1..=100`.
pub fn dose_beta() -> Vector {
    Vector::from_fn(DOSE_DIM, |j, _| {
        let j = (j + 1) as f64;
        1.0 / (j * j)
    })
}

/// Covariance with unit diagonal and 0.5 on the first off-diagonals.
pub fn dose_sigma() -> Matrix {
    Matrix::from_fn(DOSE_DIM, DOSE_DIM, |i, j| match i.abs_diff(j) {
        0 => 1.0,
        1 => 0.5,
        _ => 0.0,
    })
}

/// Standard normal CDF.
pub fn normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t / core::f64::consts::SQRT_2)
}

fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-t))
}

/// Treatment and outcome of one dose-design observation given its covariates
/// and noise draws.
pub fn dose_observation(x: &[f64], beta: &Vector, nu: f64, eps: f64) -> (f64, f64) {
    let index: f64 = x.iter().zip(beta.iter()).map(|(a, b)| a * b).sum();
    let d = normal_cdf(3.0 * index) + 0.75 * nu;
    let y = 1.2 * d + 1.2 * index + d * d + d * x[0] + eps;
    (d, y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HteObservation {
    pub y: f64,
    pub d: f64,
    pub v: f64,
    pub x: [f64; 3],
    /// Treatment probability `Λ((V + X₁ + X₂ + X₃) / 2)`.
    pub propensity: f64,
}

/// One heterogeneous-design observation from its noise draws: `eps` uniform on
/// `(-1/2, 1/2)`, `nu ~ N(0, 1/16)`, and `u ~ U(0, 1)` deciding treatment.
pub fn hte_observation(eps: [f64; 4], nu: f64, u: f64) -> HteObservation {
    let v = eps[0];
    let x = [1.0 + 2.0 * v + eps[1], 1.0 + 2.0 * v + eps[2], (v - 1.0) * (v - 1.0) + eps[3]];
    let propensity = logistic(0.5 * (v + x[0] + x[1] + x[2]));
    let d = if u < propensity { 1.0 } else { 0.0 };
    let y = if d == 1.0 { v * x[0] * x[1] * x[2] + nu } else { 0.0 };
    HteObservation { y, d, v, x, propensity }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DoseDesignParams {
    pub n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HteDesignParams {
    pub n: usize,
    pub seed: u64,
}

pub fn gen_dose_design(params: DoseDesignParams) -> Result<Dataset> {
    if params.n == 0 {
        return Err(Error::Config("sample size must be positive".into()));
    }
    let n = params.n;
    let chol = Cholesky::new(dose_sigma()).expect("tridiagonal covariance is positive definite");
    let l = chol.l();
    let beta = dose_beta();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut x = Matrix::zeros(n, DOSE_DIM);
    let mut d = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let z = Vector::from_fn(DOSE_DIM, |_, _| StandardNormal.sample(&mut rng));
        let xi = &l * z;
        let nu: f64 = StandardNormal.sample(&mut rng);
        let eps: f64 = StandardNormal.sample(&mut rng);
        let (di, yi) = dose_observation(xi.as_slice(), &beta, nu, eps);
        x.row_mut(i).copy_from(&xi.transpose());
        d.push(di);
        y.push(yi);
    }
    Dataset::from_columns(&y, &d, x)
}

pub fn gen_hte_design(params: HteDesignParams) -> Result<Dataset> {
    if params.n == 0 {
        return Err(Error::Config("sample size must be positive".into()));
    }
    let n = params.n;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (mut y, mut d, mut v) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let mut x = Matrix::zeros(n, 3);
    for i in 0..n {
        let eps: [f64; 4] = core::array::from_fn(|_| rng.random::<f64>() - 0.5);
        let z: f64 = StandardNormal.sample(&mut rng);
        let nu = 0.25 * z;
        let u: f64 = rng.random();
        let obs = hte_observation(eps, nu, u);
        y.push(obs.y);
        d.push(obs.d);
        v.push(obs.v);
        for (c, xc) in obs.x.iter().enumerate() {
            x[(i, c)] = *xc;
        }
    }
    Dataset::new(Vector::from_vec(y), Matrix::from_column_slice(n, 1, &d), Some(Matrix::from_column_slice(n, 1, &v)), x)
}

/// Dose response of the dose design, `1.2d + d²`.
pub fn true_ate(d: f64) -> f64 {
    1.2 * d + d * d
}

/// Conditional response of the heterogeneous design at `d = 1`,
/// `v (1 + 2v)² (v - 1)²`; the `d = 0` response is identically zero.
pub fn true_cate(v: f64) -> f64 {
    let a = 1.0 + 2.0 * v;
    let b = v - 1.0;
    v * a * a * b * b
}

pub fn true_ate_curve(grid: &[f64]) -> CurveEstimate {
    truth(Estimand::Ate, grid.iter().map(|&d| alloc::vec![d]).collect(), grid.iter().map(|&d| true_ate(d)).collect())
}

/// Truth at `(1, v)` for each `v` in `grid`.
pub fn true_cate_curve(grid: &[f64]) -> CurveEstimate {
    truth(
        Estimand::Cate,
        grid.iter().map(|&v| alloc::vec![1.0, v]).collect(),
        grid.iter().map(|&v| true_cate(v)).collect(),
    )
}

fn truth(estimand: Estimand, points: Vec<Vec<f64>>, values: Vec<f64>) -> CurveEstimate {
    CurveEstimate { estimand, points, values, penalties: Penalties::new(f64::NAN) }
}

/// `d ∈ {0.01, 0.02, …, 1.00}`.
pub fn default_dose_grid() -> Vec<f64> {
    (1..=100).map(|i| i as f64 / 100.0).collect()
}

/// `v ∈ {-0.49, -0.48, …, 0.49}`.
pub fn default_hte_grid() -> Vec<f64> {
    (-49..=49).map(|i| i as f64 / 100.0).collect()
}

/// Mean squared deviation over a grid.
pub fn grid_mse(estimate: &[f64], truth: &[f64]) -> f64 {
    debug_assert_eq!(estimate.len(), truth.len());
    let s: f64 = estimate.iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum();
    s / estimate.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignKind {
    Dose,
    Hte,
}

impl DesignKind {
    pub fn name(self) -> &'static str {
        match self {
            DesignKind::Dose => "dose",
            DesignKind::Hte => "hte",
        }
    }

    pub fn generate(self, n: usize, seed: u64) -> Result<Dataset> {
        match self {
            DesignKind::Dose => gen_dose_design(DoseDesignParams { n, seed }),
            DesignKind::Hte => gen_hte_design(HteDesignParams { n, seed }),
        }
    }

    pub fn default_grid(self) -> Vec<f64> {
        match self {
            DesignKind::Dose => default_dose_grid(),
            DesignKind::Hte => default_hte_grid(),
        }
    }

    pub fn truth(self, grid: &[f64]) -> Vec<f64> {
        match self {
            DesignKind::Dose => grid.iter().map(|&d| true_ate(d)).collect(),
            DesignKind::Hte => grid.iter().map(|&v| true_cate(v)).collect(),
        }
    }

    /// Kernels the studies use: median-heuristic exponentiated-quadratic
    /// kernels, with the exact-match kernel on the binary treatment of the
    /// heterogeneous design.
    pub fn kernels(self, data: &Dataset) -> Result<BlockKernels> {
        let k = BlockKernels::median_heuristic(data)?;
        Ok(match self {
            DesignKind::Dose => k,
            DesignKind::Hte => k.with_treatment(KernelConfig::exact_match()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub design: DesignKind,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub policies: PenaltyPolicies,
    /// Evaluation grid; the design default when `None`.
    pub grid: Option<Vec<f64>>,
    pub seed: u64,
}

/// Fitted curve of one replication on the design's grid: `θ̂(d)` for the dose
/// design and `θ̂(1, v) - θ̂(0, v)` for the heterogeneous design.
pub fn fit_design_curve(
    design: DesignKind,
    data: &Dataset,
    policies: &PenaltyPolicies,
    grid: &[f64],
) -> Result<(Vec<f64>, Penalties)> {
    let kernels = design.kernels(data)?;
    match design {
        DesignKind::Dose => {
            let p = resolve_penalties(Estimand::Ate, data, &kernels, policies)?;
            let g = Matrix::from_column_slice(grid.len(), 1, grid);
            Ok((estimate_ate(data, &kernels, p.lambda, &g)?.values, p))
        }
        DesignKind::Hte => {
            let p = resolve_penalties(Estimand::Cate, data, &kernels, policies)?;
            let lambda2 = p.lambda2.expect("resolved");
            let m = grid.len();
            let mut d = Matrix::zeros(2 * m, 1);
            d.rows_mut(0, m).fill(1.0);
            let v = Matrix::from_fn(2 * m, 1, |i, _| grid[i % m]);
            let est = estimate_cate(data, &kernels, p.lambda, lambda2, &d, &v)?;
            let diff = (0..m).map(|i| est.values[i] - est.values[m + i]).collect();
            Ok((diff, p))
        }
    }
}

/// Grid MSE of one replication.
pub fn replicate(design: DesignKind, n: usize, seed: u64, policies: &PenaltyPolicies, grid: &[f64]) -> Result<f64> {
    let data = design.generate(n, seed)?;
    let (fitted, _) = fit_design_curve(design, &data, policies, grid)?;
    Ok(grid_mse(&fitted, &design.truth(grid)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRecord {
    pub design: DesignKind,
    pub n: usize,
    pub replication: usize,
    /// Grid MSE, or the error that stopped this replication.
    pub mse: core::result::Result<f64, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizeSummary {
    pub n: usize,
    pub mean_mse: f64,
    pub median_mse: f64,
    pub completed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub records: Vec<StudyRecord>,
    pub summaries: Vec<SizeSummary>,
}

impl StudyResult {
    pub fn summary(&self, n: usize) -> Option<&SizeSummary> {
        self.summaries.iter().find(|s| s.n == n)
    }
}

/// Runs every (sample size, replication) pair. Replication failures are
/// recorded, not propagated.
pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    run_study_with(config, |_| {})
}

/// As [`run_study`], calling `progress` after each replication.
pub fn run_study_with(config: &StudyConfig, mut progress: impl FnMut(&StudyRecord)) -> Result<StudyResult> {
    if config.replications == 0 {
        return Err(Error::Config("a study needs at least one replication".into()));
    }
    if config.sample_sizes.is_empty() || config.sample_sizes.contains(&0) {
        return Err(Error::Config("sample sizes must be positive".into()));
    }
    let grid = config.grid.clone().unwrap_or_else(|| config.design.default_grid());
    if grid.is_empty() {
        return Err(Error::Config("evaluation grid is empty".into()));
    }
    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for &n in &config.sample_sizes {
        let mut mses = Vec::with_capacity(config.replications);
        let mut failed = 0;
        for r in 0..config.replications {
            let seed = config.seed.wrapping_add(r as u64);
            let mse = replicate(config.design, n, seed, &config.policies, &grid).map_err(|e| alloc::format!("{e}"));
            match &mse {
                Ok(v) => mses.push(*v),
                Err(_) => failed += 1,
            }
            let record = StudyRecord { design: config.design, n, replication: r, mse };
            progress(&record);
            records.push(record);
        }
        mses.sort_by(f64::total_cmp);
        summaries.push(SizeSummary {
            n,
            mean_mse: if mses.is_empty() { f64::NAN } else { mses.iter().sum::<f64>() / mses.len() as f64 },
            median_mse: median(&mses),
            completed: mses.len(),
            failed,
        });
    }
    Ok(StudyResult { records, summaries })
}

/// Median of sorted values (average of the two middle values for even
/// counts); NaN when empty.
fn median(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    match m {
        0 => f64::NAN,
        _ if m % 2 == 1 => sorted[m / 2],
        _ => 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]),
    }
}
