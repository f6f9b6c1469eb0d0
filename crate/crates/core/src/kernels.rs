//! Kernel functions and Gram assembly.
//!
//! Two families are supported: the product exponentiated-quadratic kernel
//! `Π_d exp{-(a_d - b_d)² / (2 ι_d²)}` with one lengthscale per input
//! dimension, and the exact-match kernel `1{a == b}` for discrete encodings
//! such as a binary treatment. Both satisfy `k(w, w) = 1`.

use alloc::format;
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::{Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    ExpQuadratic,
    ExactMatch,
}

/// A kernel on one variable block.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelConfig {
    family: KernelFamily,
    lengthscales: Vec<f64>,
}

impl KernelConfig {
    pub fn exp_quadratic(lengthscales: Vec<f64>) -> Result<Self> {
        if lengthscales.is_empty() {
            return Err(Error::Config("exponentiated-quadratic kernel needs at least one lengthscale".into()));
        }
        if let Some(bad) = lengthscales.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::Config(format!("lengthscale must be positive and finite, got {bad}")));
        }
        Ok(Self { family: KernelFamily::ExpQuadratic, lengthscales })
    }

    pub fn exact_match() -> Self {
        Self { family: KernelFamily::ExactMatch, lengthscales: Vec::new() }
    }

    /// Exponentiated-quadratic kernel with median-heuristic lengthscales.
    pub fn median_heuristic(points: &Matrix) -> Result<Self> {
        Self::exp_quadratic(median_heuristic(points)?)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    /// Empty for [`KernelFamily::ExactMatch`].
    pub fn lengthscales(&self) -> &[f64] {
        &self.lengthscales
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        match self.family {
            KernelFamily::ExpQuadratic if dim != self.lengthscales.len() => Err(Error::Config(format!(
                "kernel has {} lengthscales but points have dimension {dim}",
                self.lengthscales.len()
            ))),
            _ => Ok(()),
        }
    }

    /// Kernel value for two points of matching dimension.
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self.family {
            KernelFamily::ExpQuadratic => {
                let mut s = 0.0;
                for ((x, y), l) in a.iter().zip(b).zip(&self.lengthscales) {
                    let t = (x - y) / l;
                    s += t * t;
                }
                libm::exp(-0.5 * s)
            }
            KernelFamily::ExactMatch => {
                if a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Gram matrix with entry `(i, j) = k(a_i, b_j)`; rows of `a` and `b` are points.
pub fn gram(a: &Matrix, b: &Matrix, config: &KernelConfig) -> Result<Matrix> {
    if a.ncols() != b.ncols() {
        return Err(Error::Config(format!("point sets have dimensions {} and {}", a.ncols(), b.ncols())));
    }
    config.check_dim(a.ncols())?;
    let (n, m) = (a.nrows(), b.nrows());
    match config.family {
        KernelFamily::ExpQuadratic => {
            // Accumulate scaled squared distances dimension by dimension, then
            // exponentiate once per entry.
            let mut acc = Matrix::zeros(n, m);
            for (dim, &l) in config.lengthscales.iter().enumerate() {
                let ca = a.column(dim);
                let cb = b.column(dim);
                for j in 0..m {
                    let bj = cb[j];
                    let mut col = acc.column_mut(j);
                    for i in 0..n {
                        let t = (ca[i] - bj) / l;
                        col[i] += t * t;
                    }
                }
            }
            acc.apply(|s| *s = libm::exp(-0.5 * *s));
            Ok(acc)
        }
        KernelFamily::ExactMatch => Ok(Matrix::from_fn(n, m, |i, j| {
            let same = (0..a.ncols()).all(|c| a[(i, c)].to_bits() == b[(j, c)].to_bits());
            if same {
                1.0
            } else {
                0.0
            }
        })),
    }
}

/// Kernel column `(k(p_i, at))_i`.
pub fn kernel_column(points: &Matrix, at: &[f64], config: &KernelConfig) -> Result<Vector> {
    if points.ncols() != at.len() {
        return Err(Error::Config(format!(
            "evaluation point has dimension {} but points have {}",
            at.len(),
            points.ncols()
        )));
    }
    let at = Matrix::from_row_slice(1, at.len(), at);
    Ok(gram(points, &at, config)?.column(0).into_owned())
}

/// Column of derivatives `∂/∂t k(p_i, t)` at `t = at` for a scalar
/// exponentiated-quadratic kernel: `k(p_i, at) (p_i - at) / ι²`.
pub fn grad_kernel_column(points: &[f64], at: f64, config: &KernelConfig) -> Result<Vector> {
    match config.family {
        KernelFamily::ExactMatch => Err(Error::Unsupported("the exact-match kernel has no derivative")),
        KernelFamily::ExpQuadratic => {
            config.check_dim(1)?;
            let l = config.lengthscales[0];
            let l2 = l * l;
            Ok(Vector::from_iterator(
                points.len(),
                points.iter().map(|&p| {
                    let t = (p - at) / l;
                    libm::exp(-0.5 * t * t) * (p - at) / l2
                }),
            ))
        }
    }
}

/// Per-dimension median heuristic.
///
/// For each dimension the lengthscale is the lower median of `|x_id - x_jd|`
/// over all pairs `i < j`. A zero median falls back to the mean of the
/// strictly positive distances, and to `1.0` when every distance is zero.
pub fn median_heuristic(points: &Matrix) -> Result<Vec<f64>> {
    let n = points.nrows();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    let mut out = Vec::with_capacity(points.ncols());
    for col in points.column_iter() {
        dists.clear();
        for i in 0..n {
            for j in i + 1..n {
                dists.push(libm::fabs(col[i] - col[j]));
            }
        }
        out.push(lower_median_or_fallback(&mut dists));
    }
    Ok(out)
}

fn lower_median_or_fallback(dists: &mut [f64]) -> f64 {
    let mid = (dists.len() - 1) / 2;
    let (_, median, _) = dists.select_nth_unstable_by(mid, f64::total_cmp);
    let median = *median;
    if median > 0.0 {
        return median;
    }
    let (sum, count) = dists.iter().filter(|d| **d > 0.0).fold((0.0, 0usize), |(s, c), d| (s + d, c + 1));
    if count == 0 {
        1.0
    } else {
        sum / count as f64
    }
}

/// Kernels for every variable block of a [`Dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct BlockKernels {
    pub treatment: KernelConfig,
    pub interpretable: Option<KernelConfig>,
    pub covariates: KernelConfig,
    /// Needed only for distribution embeddings.
    pub outcome: Option<KernelConfig>,
}

impl BlockKernels {
    /// Exponentiated-quadratic kernels with median-heuristic lengthscales on
    /// every block present in `data`, including the outcome.
    pub fn median_heuristic(data: &Dataset) -> Result<Self> {
        let y = Matrix::from_column_slice(data.n(), 1, data.outcome().as_slice());
        Ok(Self {
            treatment: KernelConfig::median_heuristic(data.treatment())?,
            interpretable: data.interpretable().map(KernelConfig::median_heuristic).transpose()?,
            covariates: KernelConfig::median_heuristic(data.covariates())?,
            outcome: Some(KernelConfig::median_heuristic(&y)?),
        })
    }

    pub fn with_treatment(mut self, config: KernelConfig) -> Self {
        self.treatment = config;
        self
    }

    pub fn with_covariates(mut self, config: KernelConfig) -> Self {
        self.covariates = config;
        self
    }

    pub fn with_interpretable(mut self, config: KernelConfig) -> Self {
        self.interpretable = Some(config);
        self
    }

    pub fn with_outcome(mut self, config: KernelConfig) -> Self {
        self.outcome = Some(config);
        self
    }
}
