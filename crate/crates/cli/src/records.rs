//! CSV records and the histogram sidecar.
//!
//! The CSV starts with `# config: <json>` followed by a header row and one row per
//! `(grid point, observable, k)`:
//!
//! `model,N,n_a,axis_value,k,observable,mean,se,n_samples`
//!
//! `k` is empty for observables that are not moment distances. Floats carry 17
//! significant digits.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const CONFIG_PREFIX: &str = "# config: ";
pub const HEADER: [&str; 9] = [
    "model",
    "N",
    "n_a",
    "axis_value",
    "k",
    "observable",
    "mean",
    "se",
    "n_samples",
];

/// `{:.16e}`, i.e. 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub model: String,
    pub n: usize,
    pub n_a: usize,
    pub axis_value: f64,
    pub k: Option<usize>,
    pub observable: String,
    pub mean: f64,
    pub se: f64,
    pub n_samples: usize,
}

impl SweepRecord {
    fn to_row(&self) -> [String; 9] {
        [
            self.model.clone(),
            self.n.to_string(),
            self.n_a.to_string(),
            fmt_float(self.axis_value),
            self.k.map(|k| k.to_string()).unwrap_or_default(),
            self.observable.clone(),
            fmt_float(self.mean),
            fmt_float(self.se),
            self.n_samples.to_string(),
        ]
    }

    fn from_row(row: &csv::StringRecord) -> Option<Self> {
        if row.len() != HEADER.len() {
            return None;
        }
        let k = match &row[4] {
            "" => None,
            s => Some(s.parse().ok()?),
        };
        Some(Self {
            model: row[0].to_string(),
            n: row[1].parse().ok()?,
            n_a: row[2].parse().ok()?,
            axis_value: row[3].parse().ok()?,
            k,
            observable: row[5].to_string(),
            mean: row[6].parse().ok()?,
            se: row[7].parse().ok()?,
            n_samples: row[8].parse().ok()?,
        })
    }

    /// Grid coordinates as they appear in the file.
    pub fn point_key(&self) -> PointKey {
        PointKey {
            n: self.n,
            axis_value: fmt_float(self.axis_value),
        }
    }
}

/// Identity of a grid point within one output file (model, `n_a` and seed are fixed by the config).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointKey {
    pub n: usize,
    pub axis_value: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecordFile {
    pub config_echo: String,
    pub records: Vec<SweepRecord>,
}

pub fn read_records(path: &Path) -> Result<RecordFile> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let malformed = |reason: &str| CliError::Malformed {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let first = text.lines().next().ok_or_else(|| malformed("empty file"))?;
    let config_echo = first
        .strip_prefix(CONFIG_PREFIX)
        .ok_or_else(|| malformed("missing config line"))?
        .to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(HEADER.iter().copied()) {
        return Err(malformed("unexpected header row"));
    }
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row?;
        records.push(SweepRecord::from_row(&row).ok_or_else(|| malformed("bad row"))?);
    }
    Ok(RecordFile {
        config_echo,
        records,
    })
}

/// Writes via a temporary file and rename so a crash never leaves a truncated file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(&tmp, e))?;
    f.sync_all().map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn render_records(config_echo: &str, records: &[SweepRecord]) -> Result<Vec<u8>> {
    let mut out = format!("{CONFIG_PREFIX}{config_echo}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(HEADER)?;
        for r in records {
            w.write_record(r.to_row())?;
        }
        w.flush().map_err(|e| CliError::io("<buffer>", e))?;
    }
    Ok(out)
}

/// Pooled distribution of a per-state functional at one grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramRecord {
    pub model: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub n_a: usize,
    pub axis_value: f64,
    pub observable: String,
    pub edges: Vec<f64>,
    /// Born weight per bin averaged over samples; sums to 1.
    pub weights: Vec<f64>,
}

impl HistogramRecord {
    pub fn point_key(&self) -> PointKey {
        PointKey {
            n: self.n,
            axis_value: fmt_float(self.axis_value),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramFile {
    pub config: serde_json::Value,
    pub histograms: Vec<HistogramRecord>,
}

/// `sweep.csv` → `sweep.hist.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("hist.json")
}

pub fn read_histograms(path: &Path) -> Result<HistogramFile> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn render_histograms(file: &HistogramFile) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(file)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Records grouped by observable name and `k`, then by size, each curve sorted by axis value.
pub type CurveTable = BTreeMap<usize, Vec<(f64, f64, f64)>>;

pub fn curves_for(records: &[SweepRecord], observable: &str, k: Option<usize>) -> CurveTable {
    let mut table: CurveTable = BTreeMap::new();
    for r in records
        .iter()
        .filter(|r| r.observable == observable && r.k == k)
    {
        table
            .entry(r.n)
            .or_default()
            .push((r.axis_value, r.mean, r.se));
    }
    for pts in table.values_mut() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    table
}
