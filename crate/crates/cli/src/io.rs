//! CSV ingestion and atomic output.
//!
//! Input headers carry the column roles: `y`, `d`, optional `v`, and
//! covariates `x1..xp`. Alternative-population files carry `x1..xp` only.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use kernel_causal::{Dataset, Matrix, Vector};
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Y,
    D,
    V,
    X(usize),
}

fn role(name: &str) -> Option<Role> {
    match name {
        "y" => Some(Role::Y),
        "d" => Some(Role::D),
        "v" => Some(Role::V),
        _ => {
            let k: usize = name.strip_prefix('x')?.parse().ok()?;
            (k >= 1 && !name[1..].starts_with('0')).then_some(Role::X(k))
        }
    }
}

struct Table {
    roles: Vec<Role>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn column(&self, r: Role) -> Option<Vec<f64>> {
        let idx = self.roles.iter().position(|&c| c == r)?;
        Some(self.rows.iter().map(|row| row[idx]).collect())
    }

    fn covariates(&self) -> Matrix {
        let p = self.roles.iter().filter(|r| matches!(r, Role::X(_))).count();
        let idx: Vec<usize> =
            (1..=p).map(|k| self.roles.iter().position(|&c| c == Role::X(k)).expect("checked contiguous")).collect();
        Matrix::from_fn(self.rows.len(), p, |i, j| self.rows[i][idx[j]])
    }
}

fn check_exists(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Config(format!("input file `{}` does not exist", path.display())))
    }
}

fn read_table(path: &Path, allowed: impl Fn(Role) -> bool) -> Result<Table> {
    check_exists(path)?;
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let schema = |msg: String| CliError::Schema { path: path.to_path_buf(), msg };
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let mut roles = Vec::with_capacity(headers.len());
    for name in headers.iter() {
        let r = role(name).filter(|&r| allowed(r)).ok_or_else(|| schema(format!("unexpected column `{name}`")))?;
        if roles.contains(&r) {
            return Err(schema(format!("duplicate column `{name}`")));
        }
        roles.push(r);
    }
    let p = roles.iter().filter(|r| matches!(r, Role::X(_))).count();
    if p == 0 {
        return Err(schema("missing column `x1`".into()));
    }
    if let Some(k) = (1..=p).find(|&k| !roles.contains(&Role::X(k))) {
        return Err(schema(format!("missing column `x{k}`")));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let mut row = Vec::with_capacity(roles.len());
        for (field, name) in record.iter().zip(headers.iter()) {
            let value: f64 = field.parse().map_err(|_| CliError::Parse {
                path: path.to_path_buf(),
                line,
                msg: format!("column `{name}`: cannot parse `{field}` as a number"),
            })?;
            if !value.is_finite() {
                return Err(CliError::Parse {
                    path: path.to_path_buf(),
                    line,
                    msg: format!("column `{name}`: non-finite value `{field}`"),
                });
            }
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(schema("no data rows".into()));
    }
    Ok(Table { roles, rows })
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        kind => CliError::Parse { path: path.to_path_buf(), line, msg: csv_kind_message(kind) },
    }
}

fn csv_kind_message(kind: csv::ErrorKind) -> String {
    match kind {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("expected {expected_len} fields, found {len}")
        }
        csv::ErrorKind::Utf8 { err, .. } => format!("invalid UTF-8: {err}"),
        other => format!("{other:?}"),
    }
}

/// Reads an observational dataset.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let table = read_table(path, |_| true)?;
    let schema = |msg: &str| CliError::Schema { path: path.to_path_buf(), msg: msg.into() };
    let y = table.column(Role::Y).ok_or_else(|| schema("missing column `y`"))?;
    let d = table.column(Role::D).ok_or_else(|| schema("missing column `d`"))?;
    let v = table.column(Role::V).map(|v| Matrix::from_column_slice(v.len(), 1, &v));
    let n = y.len();
    Ok(Dataset::new(Vector::from_vec(y), Matrix::from_column_slice(n, 1, &d), v, table.covariates())?)
}

/// Reads covariates of an alternative population.
pub fn read_covariates(path: &Path) -> Result<Matrix> {
    Ok(read_table(path, |r| matches!(r, Role::X(_)))?.covariates())
}

/// Full-precision number formatting (17 significant digits, round-trips).
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `path` by filling a temporary file in the same directory and
/// renaming it into place.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Writes a CSV with `header` and already formatted rows.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "{}", header.join(","))?;
        for row in rows {
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    })
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(std::io::Error::other)?;
        writeln!(w)
    })
}

/// `results.csv` -> `results.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

pub fn dataset_rows(data: &Dataset) -> (Vec<String>, Vec<Vec<String>>) {
    let p = data.covariates().ncols();
    let mut header = vec!["y".to_string(), "d".to_string()];
    if data.interpretable().is_some() {
        header.push("v".into());
    }
    header.extend((1..=p).map(|k| format!("x{k}")));
    let rows = (0..data.n())
        .map(|i| {
            let mut row = vec![num(data.outcome()[i]), num(data.treatment()[(i, 0)])];
            if let Some(v) = data.interpretable() {
                row.push(num(v[(i, 0)]));
            }
            row.extend(data.covariates().row(i).iter().map(|&x| num(x)));
            row
        })
        .collect();
    (header, rows)
}
