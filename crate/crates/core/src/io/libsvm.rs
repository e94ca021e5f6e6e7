//! The libsvm sparse text format: `label idx:val idx:val …`, 1-based strictly
//! increasing indices, `#` comments.

use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};
use crate::targets::Dataset;

/// A densified libsvm file with labels normalized to `{0, 1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LibsvmDataset {
    pub dim: usize,
    /// `n × dim`, row-major.
    pub features: Vec<f64>,
    pub labels: Vec<f64>,
}

impl LibsvmDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn into_dataset(self) -> Result<Dataset> {
        Dataset::new(self.features, self.labels, self.dim)
    }
}

impl From<&Dataset> for LibsvmDataset {
    fn from(d: &Dataset) -> Self {
        let features = (0..d.len()).flat_map(|i| d.row(i).iter().copied()).collect();
        Self {
            dim: d.dim(),
            features,
            labels: d.labels().to_vec(),
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

struct SparseRow {
    line: usize,
    label: f64,
    entries: Vec<(usize, f64)>,
}

fn parse_line(line_no: usize, raw: &str) -> Result<Option<SparseRow>> {
    let body = raw.split_once('#').map_or(raw, |(b, _)| b);
    let mut tokens = body.split_ascii_whitespace();
    let Some(label_tok) = tokens.next() else {
        return Ok(None);
    };
    let label: f64 = label_tok
        .parse()
        .map_err(|_| parse_err(line_no, format!("label {label_tok:?} is not a number")))?;
    let mut entries = Vec::new();
    let mut last = 0usize;
    for tok in tokens {
        let (i, v) = tok
            .split_once(':')
            .ok_or_else(|| parse_err(line_no, format!("expected idx:val, got {tok:?}")))?;
        let idx: usize = i
            .parse()
            .map_err(|_| parse_err(line_no, format!("index {i:?} is not a positive integer")))?;
        if idx == 0 {
            return Err(parse_err(line_no, "indices are 1-based"));
        }
        if idx <= last {
            return Err(parse_err(line_no, format!("index {idx} does not increase past {last}")));
        }
        let val: f64 = v
            .parse()
            .map_err(|_| parse_err(line_no, format!("value {v:?} is not a number")))?;
        if !val.is_finite() {
            return Err(parse_err(line_no, format!("value {v:?} is not finite")));
        }
        last = idx;
        entries.push((idx, val));
    }
    Ok(Some(SparseRow {
        line: line_no,
        label,
        entries,
    }))
}

fn normalize_label(label: f64, minus_one_seen: bool, zero_seen: bool, line: usize) -> Result<f64> {
    match label {
        l if l == 1.0 => Ok(1.0),
        l if l == -1.0 && !zero_seen => Ok(0.0),
        l if l == 0.0 && !minus_one_seen => Ok(0.0),
        l if l == -1.0 || l == 0.0 => Err(parse_err(line, "labels mix {-1, +1} with {0, 1}")),
        l => Err(parse_err(line, format!("label {l} is not in {{-1, +1}} or {{0, 1}}"))),
    }
}

/// Parses libsvm text. Without a hint the dimension is the largest index seen; with one,
/// indices beyond it are an error.
pub fn parse_libsvm<R: BufRead>(reader: R, dim_hint: Option<usize>) -> Result<LibsvmDataset> {
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        if let Some(row) = parse_line(i + 1, &line?)? {
            rows.push(row);
        }
    }
    if rows.is_empty() {
        return Err(parse_err(0, "no data lines"));
    }
    let max_idx = rows
        .iter()
        .filter_map(|r| r.entries.last().map(|e| e.0))
        .max()
        .unwrap_or(0);
    let dim = match dim_hint {
        Some(h) if h < max_idx => {
            let bad = rows.iter().find(|r| r.entries.last().is_some_and(|e| e.0 > h)).unwrap();
            return Err(parse_err(bad.line, format!("index {max_idx} exceeds dimension hint {h}")));
        }
        Some(h) => h,
        None => max_idx,
    };
    if dim == 0 {
        return Err(parse_err(0, "no features and no dimension hint"));
    }
    let minus = rows.iter().any(|r| r.label == -1.0);
    let zero = rows.iter().any(|r| r.label == 0.0);
    let mut features = vec![0.0; rows.len() * dim];
    let mut labels = Vec::with_capacity(rows.len());
    for (n, r) in rows.iter().enumerate() {
        labels.push(normalize_label(r.label, minus, zero, r.line)?);
        for &(idx, v) in &r.entries {
            features[n * dim + idx - 1] = v;
        }
    }
    Ok(LibsvmDataset { dim, features, labels })
}

pub fn read_libsvm(path: &Path, dim_hint: Option<usize>) -> Result<LibsvmDataset> {
    let f = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
    parse_libsvm(std::io::BufReader::new(f), dim_hint)
}

/// Writes `+1`/`-1` labels and the nonzero features in shortest round-trip form.
pub fn to_libsvm(data: &LibsvmDataset) -> String {
    let mut out = String::new();
    for i in 0..data.len() {
        out.push_str(if data.labels[i] == 1.0 { "+1" } else { "-1" });
        for (j, v) in data.row(i).iter().enumerate() {
            if *v != 0.0 {
                write!(out, " {}:{:?}", j + 1, v).unwrap();
            }
        }
        out.push('\n');
    }
    out
}
