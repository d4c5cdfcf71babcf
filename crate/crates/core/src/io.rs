//! CSV series and the structured-text model format.
//!
//! A model file lists `s`, `d` and one `[[season]]` table per season, with
//! matrices written row by row:
//!
//! ```toml
//! s = 2
//! d = 2
//!
//! [[season]]
//! phi = [[[0.3, 0.0], [0.0, -0.6]]]   # one matrix per lag
//! sigma = [[1.5, 0.0], [0.0, 2.5]]
//!
//! [[season]]
//! phi = [[[-0.7, 0.0], [0.0, 0.15]]]
//! sigma = [[1.0, 0.0], [0.0, 0.5]]
//! mu = [0.0, 0.0]                      # optional
//! ```

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PeriodicSeries, PvarModel};

pub type RowMatrix = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonSpec {
    #[serde(default)]
    pub phi: Vec<RowMatrix>,
    pub sigma: RowMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub s: usize,
    pub d: usize,
    #[serde(rename = "season")]
    pub seasons: Vec<SeasonSpec>,
}

pub fn matrix_from_rows(rows: &RowMatrix, d: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidModel(format!("{what} must be {d}x{d}")));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> RowMatrix {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl ModelSpec {
    pub fn to_model(&self) -> Result<PvarModel> {
        let d = self.d;
        if self.seasons.len() != self.s {
            return Err(Error::InvalidModel(format!(
                "s = {} but {} season blocks given",
                self.s,
                self.seasons.len()
            )));
        }
        let mut phi = Vec::new();
        let mut sigma = Vec::new();
        let mut mu = Vec::new();
        for (v, season) in self.seasons.iter().enumerate() {
            let lags = season
                .phi
                .iter()
                .enumerate()
                .map(|(k, m)| matrix_from_rows(m, d, &format!("phi lag {} of season {}", k + 1, v + 1)))
                .collect::<Result<Vec<_>>>()?;
            phi.push(lags);
            sigma.push(matrix_from_rows(&season.sigma, d, &format!("sigma of season {}", v + 1))?);
            let m = season.mu.clone().unwrap_or_else(|| vec![0.0; d]);
            if m.len() != d {
                return Err(Error::InvalidModel(format!("mu of season {} must have {d} entries", v + 1)));
            }
            mu.push(DVector::from_vec(m));
        }
        PvarModel::new(self.s, d, phi, sigma)?.with_mean(mu)
    }

    pub fn from_model(model: &PvarModel) -> Self {
        let seasons = (1..=model.s())
            .map(|v| {
                let mu = model.mu(v);
                SeasonSpec {
                    phi: model.phis(v).iter().map(matrix_to_rows).collect(),
                    sigma: matrix_to_rows(model.sigma(v)),
                    mu: (mu.iter().any(|&x| x != 0.0)).then(|| mu.iter().copied().collect()),
                }
            })
            .collect();
        Self {
            s: model.s(),
            d: model.d(),
            seasons,
        }
    }
}

pub fn parse_model_toml(text: &str) -> Result<PvarModel> {
    let spec: ModelSpec = toml::from_str(text).map_err(|e| Error::InvalidModel(format!("model file: {e}")))?;
    spec.to_model()
}

pub fn read_model_file(path: &Path) -> Result<PvarModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_model_toml(&text)
}

pub fn model_to_toml(model: &PvarModel) -> String {
    toml::to_string(&ModelSpec::from_model(model)).expect("model spec serializes")
}

/// How leading rows of a CSV file are used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PresamplePolicy {
    /// All rows are data; the estimator consumes cycles as needed.
    #[default]
    None,
    /// The first `k` cycles become the pre-sample.
    FirstCycles(usize),
}

impl PresamplePolicy {
    pub fn parse(text: &str) -> Option<Self> {
        match text.trim() {
            "none" => Some(Self::None),
            t => t
                .strip_prefix("first-cycles")
                .map(|r| r.trim_start_matches([':', '=']))
                .and_then(|r| if r.is_empty() { Some(1) } else { r.parse().ok() })
                .map(Self::FirstCycles),
        }
    }
}

/// A parsed CSV series plus any non-fatal notes produced while reading.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSeries {
    pub series: PeriodicSeries,
    pub warnings: Vec<String>,
}

/// Read `d` numeric columns, one row per time point, with an optional header
/// row. A trailing incomplete cycle is dropped with a warning.
pub fn read_csv_from(reader: impl Read, s: usize, policy: PresamplePolicy) -> Result<CsvSeries> {
    if s == 0 {
        return Err(Error::Config("the period s must be positive".into()));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut warnings = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let row = line + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            column: 0,
            reason: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<std::result::Result<f64, String>> = record
            .iter()
            .map(|cell| cell.parse::<f64>().map_err(|_| cell.to_string()))
            .collect();
        if rows.is_empty() && line == 0 && parsed.iter().any(|c| c.is_err()) {
            continue; // header
        }
        let mut values = Vec::with_capacity(parsed.len());
        for (col, cell) in parsed.into_iter().enumerate() {
            match cell {
                Ok(v) if v.is_finite() => values.push(v),
                Ok(v) => {
                    return Err(Error::Parse {
                        row,
                        column: col + 1,
                        reason: format!("non-finite value {v}"),
                    })
                }
                Err(text) => {
                    return Err(Error::Parse {
                        row,
                        column: col + 1,
                        reason: format!("'{text}' is not a number"),
                    })
                }
            }
        }
        if let Some(first) = rows.first() {
            if first.len() != values.len() {
                return Err(Error::Parse {
                    row,
                    column: values.len().min(first.len()) + 1,
                    reason: format!("expected {} columns, found {}", first.len(), values.len()),
                });
            }
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let extra = rows.len() % s;
    if extra > 0 {
        warnings.push(format!(
            "dropped {extra} trailing row{} that do not fill a cycle of {s}",
            if extra == 1 { "" } else { "s" }
        ));
        rows.truncate(rows.len() - extra);
    }
    let pre_rows = match policy {
        PresamplePolicy::None => 0,
        PresamplePolicy::FirstCycles(k) => k * s,
    };
    if rows.len() <= pre_rows {
        return Err(Error::InsufficientData {
            season: 1,
            available: rows.len() / s,
            required: pre_rows / s + 1,
        });
    }
    let d = rows[0].len();
    let to_matrix = |rs: &[Vec<f64>]| DMatrix::from_fn(d, rs.len(), |i, c| rs[c][i]);
    let series = PeriodicSeries::new(s, to_matrix(&rows[..pre_rows]), to_matrix(&rows[pre_rows..]))?;
    Ok(CsvSeries { series, warnings })
}

pub fn read_csv(path: &Path, s: usize, policy: PresamplePolicy) -> Result<CsvSeries> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_csv_from(file, s, policy)
}

/// Write the observed values (not the pre-sample) with a `y1..yd` header.
/// Values use the shortest representation that parses back exactly.
pub fn write_csv(series: &PeriodicSeries, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let d = series.d();
    w.write_record((1..=d).map(|i| format!("y{i}")))
        .map_err(|e| Error::Io(e.to_string()))?;
    for col in series.data().column_iter() {
        w.write_record(col.iter().map(|v| v.to_string()))
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
