//! Kernel ridge regression on a precomputed Gram matrix.
//!
//! The regularizer is `nλ`: a fit solves `(K + nλI) α = targets` and predicts
//! `αᵀ k_w` at a new kernel column `k_w`. Targets may have several columns,
//! which is how conditional mean embeddings are fitted in one solve.
//!
//! Penalties are tuned by the closed-form leave-one-out loss
//! `n⁻¹‖diag(H)⁻¹ H Y‖²` or the generalized loss `n⁻¹‖H Y / tr(H)‖²`, where
//! `H = I - K(K + nλI)⁻¹ = nλ(K + nλI)⁻¹`.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{Cholesky, Dyn, SymmetricEigen};

use crate::error::{Error, Result};
use crate::{Matrix, Vector};

const JITTER_RETRIES: usize = 6;

/// Cholesky factorization of `K + nλI`.
#[derive(Debug, Clone)]
pub struct RidgeSystem {
    chol: Cholesky<f64, Dyn>,
    lambda: f64,
    jitter: f64,
}

impl RidgeSystem {
    /// Factors `K + nλI`. If roundoff breaks positive definiteness, diagonal
    /// jitter starting at `1e-12 · tr(K) / n` is added, growing tenfold per
    /// retry.
    pub fn factor(k: &Matrix, lambda: f64) -> Result<Self> {
        let n = check_square(k)?;
        check_lambda(lambda)?;
        let shift = n as f64 * lambda;
        let mut jitter = 0.0;
        let base = {
            let t = k.trace() / n as f64;
            if t > 0.0 && t.is_finite() {
                1e-12 * t
            } else {
                1e-12
            }
        };
        for attempt in 0..=JITTER_RETRIES {
            if attempt > 0 {
                jitter = if attempt == 1 { base } else { jitter * 10.0 };
            }
            let mut a = k.clone();
            for i in 0..n {
                a[(i, i)] += shift + jitter;
            }
            if let Some(chol) = Cholesky::new(a) {
                return Ok(Self { chol, lambda, jitter });
            }
        }
        Err(Error::Factorization { jitter })
    }

    pub fn n(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Diagonal jitter that was needed on top of `nλ` (usually zero).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix> {
        if rhs.nrows() != self.n() {
            return Err(Error::Shape { expected: self.n(), got: rhs.nrows() });
        }
        Ok(self.chol.solve(rhs))
    }

    pub fn solve_vector(&self, rhs: &Vector) -> Result<Vector> {
        if rhs.len() != self.n() {
            return Err(Error::Shape { expected: self.n(), got: rhs.len() });
        }
        Ok(self.chol.solve(rhs))
    }
}

/// A fitted kernel ridge regression.
#[derive(Debug, Clone)]
pub struct RidgeSolution {
    system: RidgeSystem,
    dual_weights: Matrix,
}

/// Solves `(K + nλI) α = targets`.
pub fn fit(k: &Matrix, targets: &Matrix, lambda: f64) -> Result<RidgeSolution> {
    let system = RidgeSystem::factor(k, lambda)?;
    let dual_weights = system.solve(targets)?;
    Ok(RidgeSolution { system, dual_weights })
}

impl RidgeSolution {
    pub fn system(&self) -> &RidgeSystem {
        &self.system
    }

    /// `n × t` dual weights, one column per target.
    pub fn dual_weights(&self) -> &Matrix {
        &self.dual_weights
    }

    pub fn lambda(&self) -> f64 {
        self.system.lambda
    }

    pub fn n(&self) -> usize {
        self.system.n()
    }

    /// `t × m` predictions `αᵀ K_wW` for `n × m` kernel columns.
    pub fn predict(&self, k_columns: &Matrix) -> Result<Matrix> {
        if k_columns.nrows() != self.n() {
            return Err(Error::Shape { expected: self.n(), got: k_columns.nrows() });
        }
        Ok(self.dual_weights.tr_mul(k_columns))
    }

    /// Prediction of a single-target fit at one kernel column.
    pub fn predict_one(&self, k_column: &Vector) -> Result<f64> {
        if self.dual_weights.ncols() != 1 {
            return Err(Error::Shape { expected: 1, got: self.dual_weights.ncols() });
        }
        if k_column.len() != self.n() {
            return Err(Error::Shape { expected: self.n(), got: k_column.len() });
        }
        Ok(self.dual_weights.column(0).dot(k_column))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Loocv,
    Gcv,
}

/// Closed-form leave-one-out loss `n⁻¹‖diag(H)⁻¹ H Y‖²`, summed over target
/// columns.
pub fn loocv_loss(k: &Matrix, targets: &Matrix, lambda: f64) -> Result<f64> {
    let (h_y, h_diag) = hat_products(k, targets, lambda)?;
    leave_one_out(&h_y, &h_diag, lambda)
}

/// Generalized cross-validation loss `n⁻¹‖tr(H)⁻¹ H Y‖²`, summed over target
/// columns.
///
/// This differs from the classical `n‖HY‖² / tr(H)²` by the constant `n²`, so
/// both select the same penalty.
pub fn gcv_loss(k: &Matrix, targets: &Matrix, lambda: f64) -> Result<f64> {
    let (h_y, h_diag) = hat_products(k, targets, lambda)?;
    generalized(&h_y, h_diag.sum(), lambda)
}

// H = I - K(K + nλI)^{-1} is computed as nλ(K + nλI)^{-1}, which avoids the
// cancellation in the subtraction for small λ.
fn hat_products(k: &Matrix, targets: &Matrix, lambda: f64) -> Result<(Matrix, Vector)> {
    let system = RidgeSystem::factor(k, lambda)?;
    let n = system.n();
    let shift = n as f64 * lambda;
    let h_y = system.solve(targets)? * shift;
    let inv = system.solve(&Matrix::identity(n, n))?;
    Ok((h_y, inv.diagonal() * shift))
}

fn leave_one_out(h_y: &Matrix, h_diag: &Vector, lambda: f64) -> Result<f64> {
    let n = h_y.nrows();
    let mut total = 0.0;
    for i in 0..n {
        let h = h_diag[i];
        if h == 0.0 || !h.is_finite() {
            return Err(Error::DegenerateHat { lambda });
        }
        for c in 0..h_y.ncols() {
            let r = h_y[(i, c)] / h;
            total += r * r;
        }
    }
    Ok(total / n as f64)
}

fn generalized(h_y: &Matrix, trace: f64, lambda: f64) -> Result<f64> {
    if trace == 0.0 || !trace.is_finite() {
        return Err(Error::DegenerateHat { lambda });
    }
    Ok(h_y.norm_squared() / (trace * trace) / h_y.nrows() as f64)
}

/// Eigendecomposition of `K` cached for evaluating validation losses over many
/// penalties.
///
/// With `K = U diag(σ) Uᵀ` the hat matrix is `U diag(nλ / (σ + nλ)) Uᵀ`, so
/// each penalty costs one product with the projected targets `UᵀY` instead of
/// a fresh factorization.
#[derive(Debug, Clone)]
pub struct SpectralSweep {
    basis: Matrix,
    basis_sq: Matrix,
    spectrum: Vector,
    projected: Matrix,
}

impl SpectralSweep {
    pub fn new(k: &Matrix, targets: &Matrix) -> Result<Self> {
        let n = check_square(k)?;
        if targets.nrows() != n {
            return Err(Error::Shape { expected: n, got: targets.nrows() });
        }
        let eig = SymmetricEigen::new(k.clone());
        // K is PSD; negative eigenvalues are roundoff.
        let spectrum = eig.eigenvalues.map(|s| s.max(0.0));
        let basis = eig.eigenvectors;
        let projected = basis.tr_mul(targets);
        let basis_sq = basis.component_mul(&basis);
        Ok(Self { basis, basis_sq, spectrum, projected })
    }

    pub fn n(&self) -> usize {
        self.basis.nrows()
    }

    pub fn loss(&self, criterion: Criterion, lambda: f64) -> Result<f64> {
        check_lambda(lambda)?;
        let shift = self.n() as f64 * lambda;
        let h = self.spectrum.map(|s| shift / (s + shift));
        let mut scaled = self.projected.clone();
        for (mut row, hk) in scaled.row_iter_mut().zip(h.iter()) {
            row *= *hk;
        }
        let h_y = &self.basis * scaled;
        match criterion {
            Criterion::Loocv => leave_one_out(&h_y, &(&self.basis_sq * &h), lambda),
            Criterion::Gcv => generalized(&h_y, h.sum(), lambda),
        }
    }
}

/// Candidate penalties: nonempty, finite, positive, strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyGrid(Vec<f64>);

impl PenaltyGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("penalty grid is empty".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("penalty grid values must be positive and finite".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("penalty grid must be strictly increasing".into()));
        }
        Ok(Self(values))
    }

    /// `count` log-spaced values from `lo` to `hi` inclusive.
    pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count == 0 || !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::Config(format!("invalid log grid [{lo}, {hi}] x {count}")));
        }
        if count == 1 {
            return Self::new(alloc::vec![lo]);
        }
        let (a, b) = (libm::log10(lo), libm::log10(hi));
        let step = (b - a) / (count - 1) as f64;
        Self::new((0..count).map(|i| libm::pow(10.0, a + step * i as f64)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl Default for PenaltyGrid {
    /// 50 log-spaced values in `[1e-8, 1e2]`.
    fn default() -> Self {
        Self::log_spaced(1e-8, 1e2, 50).expect("valid default grid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tuned {
    pub lambda: f64,
    /// Loss per grid value; `None` where the hat matrix was degenerate.
    pub losses: Vec<Option<f64>>,
}

/// Grid search for the penalty minimizing `criterion`. Ties go to the larger
/// penalty.
pub fn tune_lambda(k: &Matrix, targets: &Matrix, grid: &PenaltyGrid, criterion: Criterion) -> Result<Tuned> {
    let sweep = SpectralSweep::new(k, targets)?;
    let mut best: Option<(f64, f64)> = None;
    let mut losses = Vec::with_capacity(grid.values().len());
    for &lambda in grid.values() {
        let loss = sweep.loss(criterion, lambda).ok().filter(|l| l.is_finite());
        if let Some(l) = loss {
            if best.is_none_or(|(_, b)| l <= b) {
                best = Some((lambda, l));
            }
        }
        losses.push(loss);
    }
    let (lambda, _) = best.ok_or(Error::TuningFailed)?;
    Ok(Tuned { lambda, losses })
}

/// Rate-optimal penalty `n^{-1/(c + 1/b)}` for spectral decay `b ≥ 1`
/// (`b = ∞` allowed) and smoothness `c ∈ (1, 2]`.
pub fn theoretical_lambda(n: usize, b: f64, c: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Config("sample size must be positive".into()));
    }
    if b.is_nan() || b < 1.0 {
        return Err(Error::Config(format!("spectral decay b must be >= 1, got {b}")));
    }
    if !(c > 1.0 && c <= 2.0) {
        return Err(Error::Config(format!("smoothness c must lie in (1, 2], got {c}")));
    }
    Ok(libm::pow(n as f64, -1.0 / (c + 1.0 / b)))
}

/// How one ridge stage picks its penalty.
#[derive(Debug, Clone, PartialEq)]
pub enum PenaltyPolicy {
    Fixed(f64),
    Loocv(PenaltyGrid),
    Gcv(PenaltyGrid),
    Theoretical { b: f64, c: f64 },
}

impl Default for PenaltyPolicy {
    fn default() -> Self {
        PenaltyPolicy::Loocv(PenaltyGrid::default())
    }
}

impl PenaltyPolicy {
    /// Penalty for regressing `targets` on the Gram matrix `k`.
    pub fn resolve(&self, k: &Matrix, targets: &Matrix) -> Result<f64> {
        match self {
            PenaltyPolicy::Fixed(l) => {
                check_lambda(*l)?;
                Ok(*l)
            }
            PenaltyPolicy::Loocv(grid) => Ok(tune_lambda(k, targets, grid, Criterion::Loocv)?.lambda),
            PenaltyPolicy::Gcv(grid) => Ok(tune_lambda(k, targets, grid, Criterion::Gcv)?.lambda),
            PenaltyPolicy::Theoretical { b, c } => theoretical_lambda(k.nrows(), *b, *c),
        }
    }
}

fn check_square(k: &Matrix) -> Result<usize> {
    if k.nrows() != k.ncols() {
        return Err(Error::Shape { expected: k.nrows(), got: k.ncols() });
    }
    if k.nrows() == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    Ok(k.nrows())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("penalty must be positive and finite, got {lambda}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{gram, KernelConfig};
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn col(v: &[f64]) -> Matrix {
        Matrix::from_column_slice(v.len(), 1, v)
    }

    fn random_instance(rng: &mut ChaCha8Rng, n: usize, p: usize) -> (Matrix, Matrix) {
        let x = Matrix::from_fn(n, p, |_, _| rng.random_range(-2.0..2.0));
        let l: Vec<f64> = (0..p).map(|_| rng.random_range(0.5..2.0)).collect();
        let k = gram(&x, &x, &KernelConfig::exp_quadratic(l).unwrap()).unwrap();
        let y = Matrix::from_fn(n, 1, |_, _| rng.random_range(-1.0..1.0));
        (k, y)
    }

    // Independent oracle: dense LU solve of (K + nλI) x = b.
    fn lu_solve(k: &Matrix, b: &Matrix, lambda: f64) -> Matrix {
        let n = k.nrows();
        let a = k + Matrix::identity(n, n) * (n as f64 * lambda);
        a.lu().solve(b).unwrap()
    }

    // Independent oracle: refit without each observation, keeping the
    // absolute penalty nλ of the full fit.
    fn brute_loocv(k: &Matrix, y: &Matrix, lambda: f64) -> f64 {
        let n = k.nrows();
        let mut total = 0.0;
        for i in 0..n {
            let keep: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let pred = if keep.is_empty() {
                0.0
            } else {
                let m = keep.len();
                let kk = k.select_rows(keep.iter()).select_columns(keep.iter());
                let yy = y.select_rows(keep.iter());
                let a = kk + Matrix::identity(m, m) * (n as f64 * lambda);
                let alpha = a.lu().solve(&yy).unwrap();
                let kcol = k.select_rows(keep.iter()).column(i).into_owned();
                alpha.column(0).dot(&kcol)
            };
            total += (y[(i, 0)] - pred).powi(2);
        }
        total / n as f64
    }

    #[test]
    fn fit_trivial_systems() {
        let sol = fit(&Matrix::from_element(1, 1, 1.0), &col(&[3.0]), 0.5).unwrap();
        assert!((sol.dual_weights()[(0, 0)] - 3.0 / 1.5).abs() < 1e-15);
        assert!((sol.predict_one(&Vector::from_element(1, 1.0)).unwrap() - 2.0).abs() < 1e-15);

        let sol = fit(&Matrix::identity(3, 3), &col(&[4.0, 8.0, -2.0]), 1.0).unwrap();
        assert_eq!(sol.dual_weights().as_slice(), &[1.0, 2.0, -0.5]);

        let sol = fit(&Matrix::from_element(1, 1, 1.0), &col(&[2.0]), 1.0).unwrap();
        assert!((sol.predict_one(&Vector::from_element(1, 1.0)).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(sol.predict_one(&Vector::zeros(1)).unwrap(), 0.0);
    }

    #[test]
    fn fit_matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (k, y) = random_instance(&mut rng, 10, 2);
        let sol = fit(&k, &y, 0.1).unwrap();
        let oracle = lu_solve(&k, &y, 0.1);
        assert!((sol.dual_weights() - &oracle).amax() < 1e-8);
        let resid = (&k + Matrix::identity(10, 10) * 1.0) * sol.dual_weights() - &y;
        assert!(resid.norm() / y.norm() <= 1e-8);
    }

    #[test]
    fn predict_matches_explicit_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = Matrix::from_fn(5, 1, |_, _| rng.random_range(-2.0..2.0));
        let cfg = KernelConfig::exp_quadratic(vec![0.8]).unwrap();
        let k = gram(&x, &x, &cfg).unwrap();
        let y = Matrix::from_fn(5, 1, |_, _| rng.random_range(-1.0..1.0));
        let w = Matrix::from_row_slice(3, 1, &[-0.3, 0.1, 1.7]);
        let kw = gram(&x, &w, &cfg).unwrap();
        let sol = fit(&k, &y, 0.05).unwrap();
        let got = sol.predict(&kw).unwrap();
        let expect = y.transpose() * lu_solve(&k, &kw, 0.05);
        assert!((got - expect).amax() < 1e-10);
        assert!(matches!(sol.predict(&Matrix::zeros(4, 1)), Err(Error::Shape { expected: 5, got: 4 })));
    }

    #[test]
    fn fit_rejects_bad_penalty() {
        let k = Matrix::identity(2, 2);
        assert!(matches!(fit(&k, &col(&[1.0, 2.0]), 0.0), Err(Error::Config(_))));
        assert!(matches!(fit(&k, &col(&[1.0, 2.0]), -1.0), Err(Error::Config(_))));
    }

    #[test]
    fn jitter_rescues_slightly_indefinite_matrix() {
        // Indefinite by far less than nλ would repair only for tiny λ.
        let mut k = Matrix::from_element(3, 3, 1.0);
        k[(0, 0)] = 1.0 - 1e-9;
        let sys = RidgeSystem::factor(&k, 1e-300).unwrap();
        assert!(sys.jitter() > 0.0);
    }

    #[test]
    fn factorization_failure_reports_jitter() {
        let k = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        match RidgeSystem::factor(&k, 1e-12) {
            // tr(K) = 0 so the base jitter is 1e-12; six retries end at 1e-7.
            Err(Error::Factorization { jitter }) => assert!((jitter - 1e-7).abs() < 1e-18),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn loocv_single_point_is_y_squared() {
        let k = Matrix::from_element(1, 1, 1.0);
        for lambda in [1e-3, 0.5, 10.0] {
            let l = loocv_loss(&k, &col(&[1.5]), lambda).unwrap();
            assert!((l - 2.25).abs() < 1e-12);
            let g = gcv_loss(&k, &col(&[1.5]), lambda).unwrap();
            assert!((g - 2.25).abs() < 1e-12);
        }
    }

    #[test]
    fn losses_vanish_for_zero_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (k, _) = random_instance(&mut rng, 6, 1);
        for lambda in [1e-4, 1e-1, 10.0] {
            assert_eq!(loocv_loss(&k, &Matrix::zeros(6, 1), lambda).unwrap(), 0.0);
            assert_eq!(gcv_loss(&k, &Matrix::zeros(6, 1), lambda).unwrap(), 0.0);
        }
    }

    #[test]
    fn loocv_matches_refitting() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (k, y) = random_instance(&mut rng, 6, 2);
        for lambda in [1e-3, 1e-2, 0.3] {
            let closed = loocv_loss(&k, &y, lambda).unwrap();
            let brute = brute_loocv(&k, &y, lambda);
            assert!((closed - brute).abs() <= 1e-8 * brute, "{closed} vs {brute}");
        }
    }

    #[test]
    fn gcv_argmin_matches_classical() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (k, y) = random_instance(&mut rng, 8, 2);
        let grid = PenaltyGrid::log_spaced(1e-6, 1e1, 30).unwrap();
        let classical = |lambda: f64| {
            let n = 8.0;
            let a = &k * lu_solve(&k, &Matrix::identity(8, 8), lambda);
            let h = Matrix::identity(8, 8) - a;
            n * (&h * &y).norm_squared() / h.trace().powi(2)
        };
        let ours: Vec<f64> = grid.values().iter().map(|&l| gcv_loss(&k, &y, l).unwrap()).collect();
        let theirs: Vec<f64> = grid.values().iter().map(|&l| classical(l)).collect();
        let argmin = |v: &[f64]| (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
        assert_eq!(argmin(&ours), argmin(&theirs));
        for (o, t) in ours.iter().zip(&theirs) {
            assert!((o * 64.0 - t).abs() <= 1e-8 * t);
        }
    }

    #[test]
    fn spectral_sweep_matches_direct_losses() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (k, _) = random_instance(&mut rng, 12, 3);
        let targets = Matrix::from_fn(12, 3, |_, _| rng.random_range(-1.0..1.0));
        let sweep = SpectralSweep::new(&k, &targets).unwrap();
        for lambda in [1e-4, 1e-2, 1.0] {
            for criterion in [Criterion::Loocv, Criterion::Gcv] {
                let direct = match criterion {
                    Criterion::Loocv => loocv_loss(&k, &targets, lambda).unwrap(),
                    Criterion::Gcv => gcv_loss(&k, &targets, lambda).unwrap(),
                };
                let fast = sweep.loss(criterion, lambda).unwrap();
                assert!((direct - fast).abs() <= 1e-8 * direct, "{direct} vs {fast}");
            }
        }
    }

    #[test]
    fn tune_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (k, y) = random_instance(&mut rng, 8, 1);
        let one = PenaltyGrid::new(vec![0.3]).unwrap();
        assert_eq!(tune_lambda(&k, &y, &one, Criterion::Loocv).unwrap().lambda, 0.3);

        let grid = PenaltyGrid::log_spaced(1e-4, 1.0, 9).unwrap();
        let zero = tune_lambda(&k, &Matrix::zeros(8, 1), &grid, Criterion::Gcv).unwrap();
        assert_eq!(zero.lambda, 1.0);

        let tuned = tune_lambda(&k, &y, &grid, Criterion::Loocv).unwrap();
        let exhaustive = grid
            .values()
            .iter()
            .map(|&l| (l, loocv_loss(&k, &y, l).unwrap()))
            .fold((0.0, f64::INFINITY), |best, (l, v)| if v <= best.1 { (l, v) } else { best });
        assert_eq!(tuned.lambda, exhaustive.0);
    }

    #[test]
    fn grid_validation() {
        assert!(PenaltyGrid::new(vec![]).is_err());
        assert!(PenaltyGrid::new(vec![1.0, 1.0]).is_err());
        assert!(PenaltyGrid::new(vec![0.0, 1.0]).is_err());
        assert!(PenaltyGrid::new(vec![1.0, f64::INFINITY]).is_err());
        let g = PenaltyGrid::default();
        assert_eq!(g.values().len(), 50);
        assert!((g.values()[0] - 1e-8).abs() < 1e-20);
        assert!((g.values()[49] - 1e2).abs() < 1e-10);
    }

    #[test]
    fn theoretical_schedule() {
        assert_eq!(theoretical_lambda(1, 3.0, 1.5).unwrap(), 1.0);
        let n = 10_000;
        assert!((theoretical_lambda(n, 1e9, 2.0).unwrap() - 0.01).abs() < 1e-8);
        assert!((theoretical_lambda(n, f64::INFINITY, 2.0).unwrap() - 0.01).abs() < 1e-15);
        let expect = 10f64.powf(-1.6);
        assert!((theoretical_lambda(n, 2.0, 2.0).unwrap() - expect).abs() < 1e-15);
        assert!((expect - 0.02512).abs() < 1e-5);
        assert!(theoretical_lambda(n, 0.5, 2.0).is_err());
        assert!(theoretical_lambda(n, 2.0, 1.0).is_err());
        assert!(theoretical_lambda(n, 2.0, 2.5).is_err());
    }
}
