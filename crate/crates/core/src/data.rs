use alloc::format;

use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// Observations of outcome `y`, treatment `d`, optional interpretable
/// covariate `v` and covariates `x`. Every block stores one row per
/// observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: Vector,
    d: Matrix,
    v: Option<Matrix>,
    x: Matrix,
}

impl Dataset {
    pub fn new(y: Vector, d: Matrix, v: Option<Matrix>, x: Matrix) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        let check = |name: &str, m: &Matrix| -> Result<()> {
            if m.nrows() != n {
                return Err(Error::Schema(format!("block `{name}` has {} rows but y has {n}", m.nrows())));
            }
            if m.ncols() == 0 {
                return Err(Error::Schema(format!("block `{name}` has no columns")));
            }
            Ok(())
        };
        check("d", &d)?;
        check("x", &x)?;
        if let Some(v) = &v {
            check("v", v)?;
        }
        if y.iter().chain(d.iter()).chain(x.iter()).any(|t| !t.is_finite())
            || v.as_ref().is_some_and(|v| v.iter().any(|t| !t.is_finite()))
        {
            return Err(Error::Schema("non-finite value in data".into()));
        }
        Ok(Self { y, d, v, x })
    }

    /// Dataset with scalar treatment and no interpretable covariate.
    pub fn from_columns(y: &[f64], d: &[f64], x: Matrix) -> Result<Self> {
        Self::new(Vector::from_column_slice(y), Matrix::from_column_slice(d.len(), 1, d), None, x)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn outcome(&self) -> &Vector {
        &self.y
    }

    pub fn treatment(&self) -> &Matrix {
        &self.d
    }

    pub fn interpretable(&self) -> Option<&Matrix> {
        self.v.as_ref()
    }

    pub fn covariates(&self) -> &Matrix {
        &self.x
    }

    /// Same observations with the outcome replaced.
    pub fn with_outcome(&self, y: Vector) -> Result<Self> {
        Self::new(y, self.d.clone(), self.v.clone(), self.x.clone())
    }

    /// Reorders observations: row `i` of the result is row `order[i]` here.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n() {
            return Err(Error::Shape { expected: self.n(), got: order.len() });
        }
        let rows = |m: &Matrix| m.select_rows(order.iter());
        Self::new(
            Vector::from_iterator(order.len(), order.iter().map(|&i| self.y[i])),
            rows(&self.d),
            self.v.as_ref().map(rows),
            rows(&self.x),
        )
    }
}
