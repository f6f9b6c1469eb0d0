#![allow(dead_code)]

use std::collections::BTreeMap;

use kernel_causal::{BlockKernels, Dataset, KernelConfig, Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Reference kernel evaluation, written out directly.
pub fn k_eq(a: &[f64], b: &[f64], ls: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        let t = (a[i] - b[i]) / ls[i];
        s += t * t;
    }
    (-0.5 * s).exp()
}

pub fn dk_eq(point: f64, at: f64, ls: f64) -> f64 {
    k_eq(&[point], &[at], &[ls]) * (point - at) / (ls * ls)
}

pub fn row(m: &Matrix, i: usize) -> Vec<f64> {
    m.row(i).iter().copied().collect()
}

pub fn gram_ref(a: &Matrix, b: &Matrix, ls: &[f64]) -> Matrix {
    Matrix::from_fn(a.nrows(), b.nrows(), |i, j| k_eq(&row(a, i), &row(b, j), ls))
}

pub fn col_ref(a: &Matrix, at: &[f64], ls: &[f64]) -> Vector {
    Vector::from_fn(a.nrows(), |i, _| k_eq(&row(a, i), at, ls))
}

/// `(K + nλI)⁻¹ b` by dense LU.
pub fn lu_solve(k: &Matrix, lambda: f64, b: &Vector) -> Vector {
    let n = k.nrows();
    let a = k + Matrix::identity(n, n) * (n as f64 * lambda);
    a.lu().solve(b).expect("nonsingular")
}

pub struct Smooth {
    pub data: Dataset,
    pub kernels: BlockKernels,
    pub ls_d: Vec<f64>,
    pub ls_x: Vec<f64>,
    pub ls_v: Vec<f64>,
    pub ls_y: Vec<f64>,
}

/// Continuous instance with scalar D, scalar V, two-dimensional X and an
/// outcome depending on all of them.
pub fn smooth_instance(seed: u64, n: usize) -> Smooth {
    let mut r = rng(seed);
    let v: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    let x = Matrix::from_fn(n, 2, |i, _| v[i] + r.random_range(-1.0..1.0));
    let d: Vec<f64> = (0..n).map(|i| 0.5 * x[(i, 0)] + r.random_range(-1.0..1.0)).collect();
    let y: Vec<f64> =
        (0..n).map(|i| d[i] * d[i] + x[(i, 1)] * v[i] + d[i] * x[(i, 0)] + 0.3 * r.random_range(-1.0..1.0)).collect();
    let ls_d = vec![r.random_range(0.5..1.5)];
    let ls_x = vec![r.random_range(0.5..1.5), r.random_range(0.5..1.5)];
    let ls_v = vec![r.random_range(0.3..1.0)];
    let ls_y = vec![r.random_range(0.5..1.5)];
    let data = Dataset::new(
        Vector::from_vec(y),
        Matrix::from_column_slice(n, 1, &d),
        Some(Matrix::from_column_slice(n, 1, &v)),
        x,
    )
    .unwrap();
    let kernels = BlockKernels {
        treatment: KernelConfig::exp_quadratic(ls_d.clone()).unwrap(),
        interpretable: Some(KernelConfig::exp_quadratic(ls_v.clone()).unwrap()),
        covariates: KernelConfig::exp_quadratic(ls_x.clone()).unwrap(),
        outcome: Some(KernelConfig::exp_quadratic(ls_y.clone()).unwrap()),
    };
    Smooth { data, kernels, ls_d, ls_x, ls_v, ls_y }
}

impl Smooth {
    pub fn response_gram(&self, with_v: bool) -> Matrix {
        let d = self.data.treatment();
        let x = self.data.covariates();
        let mut k = gram_ref(d, d, &self.ls_d).component_mul(&gram_ref(x, x, &self.ls_x));
        if with_v {
            let v = self.data.interpretable().unwrap();
            k = k.component_mul(&gram_ref(v, v, &self.ls_v));
        }
        k
    }

    /// Dual weights of the outcome regression.
    pub fn gamma(&self, lambda: f64, with_v: bool) -> Vector {
        lu_solve(&self.response_gram(with_v), lambda, self.data.outcome())
    }

    /// Dual weights of the regression of `φ(Y)` evaluated at `y`.
    pub fn y_features(&self, y: f64) -> Vector {
        let yy = Matrix::from_column_slice(self.data.n(), 1, self.data.outcome().as_slice());
        col_ref(&yy, &[y], &self.ls_y)
    }

    /// `K_XX (K_WW + nλI)⁻¹ K_Ww`.
    pub fn embedding(&self, w: &Matrix, ls_w: &[f64], lambda: f64, at: &[f64]) -> Vector {
        let x = self.data.covariates();
        gram_ref(x, x, &self.ls_x) * lu_solve(&gram_ref(w, w, ls_w), lambda, &col_ref(w, at, ls_w))
    }
}

/// Discrete instance over a full support. Every (d, v, x) cell, and for the
/// embedding checks every (d, x, y) cell, is populated before random rows
/// are added.
pub struct Discrete {
    pub data: Dataset,
    pub kernels: BlockKernels,
    pub d: Vec<f64>,
    pub v: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

pub fn discrete_instance(seed: u64, n_extra: usize, nd: usize, nv: usize, nx: usize, ny: usize) -> Discrete {
    let mut r = rng(seed);
    let mut rows = Vec::new();
    for d in 0..nd {
        for v in 0..nv {
            for x in 0..nx {
                for y in 0..ny {
                    rows.push((d as f64, v as f64, x as f64, y as f64));
                }
            }
        }
    }
    for _ in 0..n_extra {
        let v = r.random_range(0..nv) as f64;
        let x = ((v as usize + r.random_range(0..nx + 1)) % nx) as f64;
        let d = ((x as usize + r.random_range(0..nd + 1)) % nd) as f64;
        let y = ((d as usize + x as usize + r.random_range(0..ny)) % ny) as f64;
        rows.push((d, v, x, y));
    }
    let n = rows.len();
    // Outcomes take finitely many values, so the same rows serve the mean
    // and the probability checks.
    let y: Vec<f64> = rows.iter().map(|r| r.3 + 0.25 * r.0 - 0.5 * r.2 * r.1).collect();
    let d: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let v: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let x: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let data = Dataset::new(
        Vector::from_vec(y.clone()),
        Matrix::from_column_slice(n, 1, &d),
        Some(Matrix::from_column_slice(n, 1, &v)),
        Matrix::from_column_slice(n, 1, &x),
    )
    .unwrap();
    let kernels = BlockKernels {
        treatment: KernelConfig::exact_match(),
        interpretable: Some(KernelConfig::exact_match()),
        covariates: KernelConfig::exact_match(),
        outcome: Some(KernelConfig::exact_match()),
    };
    Discrete { data, kernels, d, v, x, y }
}

type Key = Vec<u64>;

fn key(vals: &[f64]) -> Key {
    vals.iter().map(|v| v.to_bits()).collect()
}

/// Empirical frequency tables keyed on exact values.
impl Discrete {
    pub fn n(&self) -> usize {
        self.d.len()
    }

    fn mean_where(&self, pred: impl Fn(usize) -> bool, value: impl Fn(usize) -> f64) -> f64 {
        let (mut s, mut c) = (0.0, 0usize);
        for i in 0..self.n() {
            if pred(i) {
                s += value(i);
                c += 1;
            }
        }
        assert!(c > 0, "empty cell");
        s / c as f64
    }

    pub fn ybar_dx(&self, d: f64, x: f64) -> f64 {
        self.mean_where(|i| self.d[i] == d && self.x[i] == x, |i| self.y[i])
    }

    pub fn ybar_dvx(&self, d: f64, v: f64, x: f64) -> f64 {
        self.mean_where(|i| self.d[i] == d && self.v[i] == v && self.x[i] == x, |i| self.y[i])
    }

    pub fn p_y_given_dx(&self, y: f64, d: f64, x: f64) -> f64 {
        self.mean_where(|i| self.d[i] == d && self.x[i] == x, |i| (self.y[i] == y) as u8 as f64)
    }

    pub fn p_x_given_d(&self) -> BTreeMap<(Key, Key), f64> {
        conditional(&self.x, &self.d)
    }

    pub fn p_x_given_v(&self) -> BTreeMap<(Key, Key), f64> {
        conditional(&self.x, &self.v)
    }

    pub fn support(values: &[f64]) -> Vec<f64> {
        let mut s: Vec<f64> = values.to_vec();
        s.sort_by(f64::total_cmp);
        s.dedup();
        s
    }

    pub fn p(values: &[f64], at: f64) -> f64 {
        values.iter().filter(|&&v| v == at).count() as f64 / values.len() as f64
    }
}

/// `P̂(a | b)` keyed by (a, b).
fn conditional(a: &[f64], b: &[f64]) -> BTreeMap<(Key, Key), f64> {
    let mut counts: BTreeMap<(Key, Key), f64> = BTreeMap::new();
    let mut totals: BTreeMap<Key, f64> = BTreeMap::new();
    for i in 0..a.len() {
        *counts.entry((key(&[a[i]]), key(&[b[i]]))).or_default() += 1.0;
        *totals.entry(key(&[b[i]])).or_default() += 1.0;
    }
    counts.into_iter().map(|((ka, kb), c)| ((ka, kb.clone()), c / totals[&kb])).collect()
}

pub fn cond(table: &BTreeMap<(Key, Key), f64>, a: f64, b: f64) -> f64 {
    table.get(&(key(&[a]), key(&[b]))).copied().unwrap_or(0.0)
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b} (diff {:e})", (a - b).abs());
}

/// Exhaustive plug-in formulas over the discrete support.
impl Discrete {
    pub fn plugin_ate(&self, d: f64) -> f64 {
        self.x.iter().map(|&xi| self.ybar_dx(d, xi)).sum::<f64>() / self.n() as f64
    }

    pub fn plugin_att(&self, d: f64, d_cf: f64) -> f64 {
        let px = self.p_x_given_d();
        Self::support(&self.x).iter().map(|&x| cond(&px, x, d) * self.ybar_dx(d_cf, x)).sum()
    }

    pub fn plugin_cate(&self, d: f64, v: f64) -> f64 {
        let px = self.p_x_given_v();
        Self::support(&self.x).iter().map(|&x| cond(&px, x, v) * self.ybar_dvx(d, v, x)).sum()
    }

    pub fn plugin_frontdoor(&self, d: f64) -> f64 {
        let px = self.p_x_given_d();
        let mut s = 0.0;
        for &dd in &Self::support(&self.d) {
            for &x in &Self::support(&self.x) {
                s += Self::p(&self.d, dd) * cond(&px, x, d) * self.ybar_dx(dd, x);
            }
        }
        s
    }

    pub fn plugin_embed_ate(&self, d: f64, y: f64) -> f64 {
        self.x.iter().map(|&xi| self.p_y_given_dx(y, d, xi)).sum::<f64>() / self.n() as f64
    }

    pub fn plugin_embed_frontdoor(&self, d: f64, y: f64) -> f64 {
        let px = self.p_x_given_d();
        let mut s = 0.0;
        for &dd in &Self::support(&self.d) {
            for &x in &Self::support(&self.x) {
                s += Self::p(&self.d, dd) * cond(&px, x, d) * self.p_y_given_dx(y, dd, x);
            }
        }
        s
    }
}
