//! Parsing of grid, penalty and kernel specifications.

use std::fmt;
use std::str::FromStr;

use kernel_causal::causal::PenaltyPolicies;
use kernel_causal::{BlockKernels, Dataset, KernelConfig, KernelFamily, Matrix, Penalties, PenaltyGrid, PenaltyPolicy};
use serde::Serialize;

use crate::error::{CliError, Result};

fn numbers(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            match t {
                "inf" | "infinity" => Ok(f64::INFINITY),
                _ => t.parse::<f64>().map_err(|_| format!("`{t}` is not a number")),
            }
        })
        .collect()
}

/// `min,max,count`: `count` equally spaced points from `min` to `max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(',').collect();
        let [min, max, count] = parts[..] else {
            return Err(format!("grid `{s}` must be min,max,count"));
        };
        let min: f64 = min.trim().parse().map_err(|_| format!("grid minimum `{min}` is not a number"))?;
        let max: f64 = max.trim().parse().map_err(|_| format!("grid maximum `{max}` is not a number"))?;
        let count: usize =
            count.trim().parse().map_err(|_| format!("grid count `{count}` is not a positive integer"))?;
        if count == 0 {
            return Err("grid count must be at least 1".into());
        }
        if !(min.is_finite() && max.is_finite()) || max < min {
            return Err(format!("grid `{s}` needs finite min <= max"));
        }
        if count > 1 && max == min {
            return Err(format!("grid `{s}` has {count} points on an empty interval"));
        }
        Ok(GridSpec { min, max, count })
    }
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.max } else { self.min + step * i as f64 }).collect()
    }
}

/// Penalty policy: `fixed:λ`, `loocv[:lo,hi,count]`, `gcv[:lo,hi,count]` or
/// `theoretical:b,c`. Tuning grids are log-spaced.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySpec {
    text: String,
    policy: PenaltyPolicy,
}

impl FromStr for PolicySpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (kind, args) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a)),
            None => (s.trim(), None),
        };
        let grid = |args: Option<&str>| -> std::result::Result<PenaltyGrid, String> {
            match args {
                None => Ok(PenaltyGrid::default()),
                Some(a) => match numbers(a)?[..] {
                    [lo, hi, count] if count >= 1.0 && count.fract() == 0.0 => {
                        PenaltyGrid::log_spaced(lo, hi, count as usize).map_err(|e| e.to_string())
                    }
                    _ => Err(format!("tuning grid `{a}` must be lo,hi,count")),
                },
            }
        };
        let policy = match kind {
            "fixed" => match args.map(numbers).transpose()?.as_deref() {
                Some([l]) if *l > 0.0 && l.is_finite() => PenaltyPolicy::Fixed(*l),
                _ => return Err(format!("`{s}`: fixed penalty must be fixed:λ with λ > 0")),
            },
            "loocv" => PenaltyPolicy::Loocv(grid(args)?),
            "gcv" => PenaltyPolicy::Gcv(grid(args)?),
            "theoretical" => match args.map(numbers).transpose()?.as_deref() {
                Some([b, c]) => PenaltyPolicy::Theoretical { b: *b, c: *c },
                _ => return Err(format!("`{s}`: expected theoretical:b,c")),
            },
            _ => return Err(format!("unknown penalty policy `{kind}` (fixed, loocv, gcv, theoretical)")),
        };
        Ok(PolicySpec { text: s.trim().to_string(), policy })
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl Default for PolicySpec {
    fn default() -> Self {
        PolicySpec { text: "loocv".into(), policy: PenaltyPolicy::default() }
    }
}

const STAGES: [&str; 4] = ["lambda", "lambda1", "lambda2", "lambda3"];

/// One policy per ridge stage, from repeated `--penalty [stage=]policy`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StagePolicies {
    specs: [PolicySpec; 4],
}

impl StagePolicies {
    pub fn parse(items: &[String]) -> Result<Self> {
        let mut default: Option<PolicySpec> = None;
        let mut stage: [Option<PolicySpec>; 4] = Default::default();
        for item in items {
            match item.split_once('=') {
                Some((name, spec)) => {
                    let i = STAGES.iter().position(|s| *s == name.trim()).ok_or_else(|| {
                        CliError::Config(format!("unknown penalty stage `{name}` (lambda, lambda1, lambda2, lambda3)"))
                    })?;
                    if stage[i].is_some() {
                        return Err(CliError::Config(format!("penalty for `{name}` given twice")));
                    }
                    stage[i] = Some(spec.parse().map_err(CliError::Config)?);
                }
                None => {
                    if default.is_some() {
                        return Err(CliError::Config("more than one default penalty policy".into()));
                    }
                    default = Some(item.parse().map_err(CliError::Config)?);
                }
            }
        }
        let default = default.unwrap_or_default();
        Ok(StagePolicies { specs: stage.map(|s| s.unwrap_or_else(|| default.clone())) })
    }

    pub fn policies(&self) -> PenaltyPolicies {
        let [a, b, c, d] = self.specs.clone().map(|s| s.policy);
        PenaltyPolicies { response: a, treatment_embedding: b, interpretable_embedding: c, outcome_embedding: d }
    }

    pub fn record(&self) -> PolicyRecord {
        let [a, b, c, d] = self.specs.clone().map(|s| s.text);
        PolicyRecord { lambda: a, lambda1: b, lambda2: c, lambda3: d }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PolicyRecord {
    pub lambda: String,
    pub lambda1: String,
    pub lambda2: String,
    pub lambda3: String,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PenaltyRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda3: Option<f64>,
}

impl From<Penalties> for PenaltyRecord {
    fn from(p: Penalties) -> Self {
        PenaltyRecord { lambda: Some(p.lambda), lambda1: p.lambda1, lambda2: p.lambda2, lambda3: p.lambda3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum KernelChoice {
    Median,
    Exact,
    Lengthscales(Vec<f64>),
}

impl FromStr for KernelChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "median" => Ok(KernelChoice::Median),
            "exact" => Ok(KernelChoice::Exact),
            other => match other.strip_prefix("ls:") {
                Some(list) => Ok(KernelChoice::Lengthscales(numbers(list)?)),
                None => Err(format!("unknown kernel `{other}` (median, exact, ls:l1,l2,...)")),
            },
        }
    }
}

const BLOCKS: [&str; 4] = ["d", "v", "x", "y"];

/// Kernel per variable block, from repeated `--kernel [block=]choice`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpecs {
    choices: [KernelChoice; 4],
}

impl KernelSpecs {
    pub fn parse(items: &[String]) -> Result<Self> {
        let mut default: Option<KernelChoice> = None;
        let mut block: [Option<KernelChoice>; 4] = Default::default();
        for item in items {
            match item.split_once('=') {
                Some((name, spec)) => {
                    let i = BLOCKS
                        .iter()
                        .position(|b| *b == name.trim())
                        .ok_or_else(|| CliError::Config(format!("unknown kernel block `{name}` (d, v, x, y)")))?;
                    if block[i].is_some() {
                        return Err(CliError::Config(format!("kernel for block `{name}` given twice")));
                    }
                    block[i] = Some(spec.parse().map_err(CliError::Config)?);
                }
                None => {
                    if default.is_some() {
                        return Err(CliError::Config("more than one default kernel".into()));
                    }
                    default = Some(item.parse().map_err(CliError::Config)?);
                }
            }
        }
        let default = default.unwrap_or(KernelChoice::Median);
        Ok(KernelSpecs { choices: block.map(|b| b.unwrap_or_else(|| default.clone())) })
    }

    fn build(choice: &KernelChoice, name: &str, points: &Matrix) -> Result<KernelConfig> {
        Ok(match choice {
            KernelChoice::Median => KernelConfig::median_heuristic(points)?,
            KernelChoice::Exact => KernelConfig::exact_match(),
            KernelChoice::Lengthscales(ls) => {
                if ls.len() != points.ncols() {
                    return Err(CliError::Config(format!(
                        "block `{name}` has {} columns but {} lengthscales were given",
                        points.ncols(),
                        ls.len()
                    )));
                }
                KernelConfig::exp_quadratic(ls.clone())?
            }
        })
    }

    /// Kernels for `data`; the outcome kernel only when `with_outcome`.
    pub fn resolve(&self, data: &Dataset, with_outcome: bool) -> Result<BlockKernels> {
        let y = Matrix::from_column_slice(data.n(), 1, data.outcome().as_slice());
        Ok(BlockKernels {
            treatment: Self::build(&self.choices[0], "d", data.treatment())?,
            interpretable: data.interpretable().map(|v| Self::build(&self.choices[1], "v", v)).transpose()?,
            covariates: Self::build(&self.choices[2], "x", data.covariates())?,
            outcome: if with_outcome { Some(Self::build(&self.choices[3], "y", &y)?) } else { None },
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelRecord {
    pub family: &'static str,
    pub lengthscales: Vec<f64>,
}

impl From<&KernelConfig> for KernelRecord {
    fn from(k: &KernelConfig) -> Self {
        let family = match k.family() {
            KernelFamily::ExpQuadratic => "exp_quadratic",
            KernelFamily::ExactMatch => "exact_match",
        };
        KernelRecord { family, lengthscales: k.lengthscales().to_vec() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelsRecord {
    pub d: KernelRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<KernelRecord>,
    pub x: KernelRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<KernelRecord>,
}

impl From<&BlockKernels> for KernelsRecord {
    fn from(k: &BlockKernels) -> Self {
        KernelsRecord {
            d: (&k.treatment).into(),
            v: k.interpretable.as_ref().map(Into::into),
            x: (&k.covariates).into(),
            y: k.outcome.as_ref().map(Into::into),
        }
    }
}
