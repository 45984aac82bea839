use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Per-series transformation applied at ingestion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    /// `100 (y_t − y_{t−1}) / y_{t−1}`; drops the first row.
    PctChange,
    Log,
    #[default]
    None,
}

impl Transform {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pct-change" => Ok(Self::PctChange),
            "log" => Ok(Self::Log),
            "none" => Ok(Self::None),
            _ => Err(Error::Config(format!("unknown transform '{s}'"))),
        }
    }
}

/// Quarterly observations, one row per date.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeriesPanel {
    pub dates: Vec<String>,
    pub values: DMatrix<f64>,
    pub names: Vec<String>,
    pub transforms: Vec<Transform>,
    pub nonstationary: Vec<bool>,
    /// Leading rows reserved for prior calibration.
    pub presample: usize,
}

impl TimeSeriesPanel {
    /// Panel with synthetic quarterly dates starting in 1960Q1.
    pub fn from_matrix(values: DMatrix<f64>, names: Vec<String>, presample: usize) -> Self {
        let n = values.ncols();
        let dates = (0..values.nrows())
            .map(|i| quarter_label(1960 * 4 + i as i64))
            .collect();
        Self {
            dates,
            values,
            names,
            transforms: vec![Transform::None; n],
            nonstationary: vec![false; n],
            presample,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_vars(&self) -> usize {
        self.values.ncols()
    }

    /// First `rows` rows.
    pub fn head(&self, rows: usize) -> Self {
        Self {
            dates: self.dates[..rows].to_vec(),
            values: self.values.rows(0, rows).into_owned(),
            ..self.clone()
        }
    }
}

fn quarter_label(q: i64) -> String {
    format!("{}Q{}", q.div_euclid(4), q.rem_euclid(4) + 1)
}

/// Quarter index of `YYYYQn`, `YYYY-Qn`, `YYYY-MM` or `YYYY-MM-DD`.
fn quarter_index(s: &str) -> Option<i64> {
    let s = s.trim();
    let up = s.to_ascii_uppercase();
    if let Some(pos) = up.find('Q') {
        let year: i64 = up[..pos].trim_end_matches('-').parse().ok()?;
        let q: i64 = up[pos + 1..].parse().ok()?;
        return (1..=4).contains(&q).then_some(year * 4 + q - 1);
    }
    let mut it = s.split('-');
    let year: i64 = it.next()?.parse().ok()?;
    let month: i64 = it.next()?.parse().ok()?;
    (1..=12)
        .contains(&month)
        .then_some(year * 4 + (month - 1) / 3)
}

/// Read a CSV with a header row (`date`, then one column per series).
pub fn ingest(path: &Path, transforms: &[Transform]) -> Result<TimeSeriesPanel> {
    ingest_reader(std::fs::File::open(path)?, transforms)
}

pub fn ingest_reader<R: Read>(reader: R, transforms: &[Transform]) -> Result<TimeSeriesPanel> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() < 2 {
        return Err(Error::Parse {
            row: 1,
            col: 1,
            msg: "need a date column and at least one series".into(),
        });
    }
    let names: Vec<String> = headers.iter().skip(1).map(|s| s.to_string()).collect();
    let n = names.len();
    let transforms: Vec<Transform> = match transforms.len() {
        0 => vec![Transform::None; n],
        l if l == n => transforms.to_vec(),
        l => return Err(Error::Config(format!("{l} transforms for {n} series"))),
    };
    let mut dates = Vec::new();
    let mut raw: Vec<f64> = Vec::new();
    let mut prev_q: Option<i64> = None;
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2; // 1-based, header is row 1
        let rec = rec?;
        if rec.len() != n + 1 {
            return Err(Error::Parse {
                row,
                col: rec.len() + 1,
                msg: format!("expected {} fields", n + 1),
            });
        }
        let date = rec[0].to_string();
        let q = quarter_index(&date).ok_or_else(|| Error::Parse {
            row,
            col: 1,
            msg: format!("bad date '{date}'"),
        })?;
        if let Some(pq) = prev_q {
            if q != pq + 1 {
                return Err(Error::Gap {
                    row,
                    prev: dates.last().cloned().unwrap_or_default(),
                    next: date,
                });
            }
        }
        prev_q = Some(q);
        for j in 0..n {
            let v: f64 = rec[j + 1].parse().map_err(|_| Error::Parse {
                row,
                col: j + 2,
                msg: format!("not a number: '{}'", &rec[j + 1]),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    col: j + 2,
                    msg: "missing or non-finite value".into(),
                });
            }
            raw.push(v);
        }
        dates.push(date);
    }
    let rows = dates.len();
    let levels = DMatrix::from_row_slice(rows, n, &raw);
    let drop = usize::from(transforms.contains(&Transform::PctChange));
    if rows <= drop {
        return Err(Error::InsufficientData(
            "no rows left after transformation".into(),
        ));
    }
    let out_rows = rows - drop;
    let mut values = DMatrix::zeros(out_rows, n);
    for j in 0..n {
        for r in 0..out_rows {
            let src = r + drop;
            let v = match transforms[j] {
                Transform::PctChange => {
                    100.0 * (levels[(src, j)] - levels[(src - 1, j)]) / levels[(src - 1, j)]
                }
                Transform::Log => levels[(src, j)].ln(),
                Transform::None => levels[(src, j)],
            };
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: src + 2,
                    col: j + 2,
                    msg: "transformation produced a non-finite value".into(),
                });
            }
            values[(r, j)] = v;
        }
    }
    Ok(TimeSeriesPanel {
        dates: dates[drop..].to_vec(),
        values,
        names,
        transforms,
        nonstationary: vec![false; n],
        presample: 0,
    })
}

/// Write the panel as CSV using shortest round-trip float formatting.
pub fn emit_csv<W: Write>(panel: &TimeSeriesPanel, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["date".to_string()];
    header.extend(panel.names.iter().cloned());
    wr.write_record(&header)?;
    for r in 0..panel.n_rows() {
        let mut rec = vec![panel.dates[r].clone()];
        rec.extend((0..panel.n_vars()).map(|j| format!("{}", panel.values[(r, j)])));
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}
