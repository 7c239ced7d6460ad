//! Serialization of phase-space maps for plotting.
//!
//! Rows follow the map's μ-outer order. The Wigner column holds `πW`, so
//! the values sit on the `[-1, 1]` color scale of the published panels.
//! Numbers are written in shortest round-trip decimal, which makes
//! [`import_csv`] and [`import_json`] bit-exact inverses of the writers.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hom::ScanReport;
use crate::lattice::Grid1D;
use crate::wigner::{negativity_volume, PhaseSpaceMap, PhaseSpacePoint};

pub const CSV_HEADER: &str = "mu,delta,pi_W,I";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Usage(format!(
                "unknown format '{other}' (expected csv or json)"
            ))),
        }
    }
}

/// One exported grid point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub mu: f64,
    pub delta: f64,
    #[serde(rename = "pi_W")]
    pub pi_w: Option<f64>,
    #[serde(rename = "I")]
    pub i: Option<f64>,
}

pub fn rows(map: &PhaseSpaceMap) -> Vec<Row> {
    (0..map.len())
        .map(|idx| {
            let pt = map.point(idx);
            Row {
                mu: pt.mu,
                delta: pt.delta,
                pi_w: map.wigner.as_ref().map(|w| PI * w[idx]),
                i: map.coincidence.as_ref().map(|v| v[idx]),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl From<&Grid1D> for GridSpec {
    fn from(g: &Grid1D) -> Self {
        Self {
            min: g.min(),
            max: g.max(),
            n: g.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grids {
    pub mu: GridSpec,
    pub delta: GridSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub mu: String,
    pub delta: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Argmax {
    pub mu: f64,
    pub delta: f64,
}

impl From<PhaseSpacePoint> for Argmax {
    fn from(p: PhaseSpacePoint) -> Self {
        Self {
            mu: p.mu,
            delta: p.delta,
        }
    }
}

/// Header object of the JSON export. The witness fields are null for maps
/// without coincidence values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub scenario: String,
    pub grids: Grids,
    pub units: Units,
    #[serde(rename = "max_I")]
    pub max_i: Option<f64>,
    pub argmax: Option<Argmax>,
    pub relative_violation: Option<f64>,
    pub negativity_volume: f64,
    pub violating_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl Meta {
    pub fn of(map: &PhaseSpaceMap) -> Self {
        let report = ScanReport::from_map(map).ok();
        Self {
            scenario: map.meta.scenario.clone(),
            grids: Grids {
                mu: (&map.mu_grid).into(),
                delta: (&map.delta_grid).into(),
            },
            units: Units {
                mu: map.meta.mu_units.clone(),
                delta: map.meta.delta_units.clone(),
            },
            max_i: report.as_ref().map(|r| r.max_i),
            argmax: report.as_ref().map(|r| r.argmax.into()),
            relative_violation: report.as_ref().map(|r| r.relative_violation),
            negativity_volume: negativity_volume(map),
            violating_points: report.as_ref().map(|r| r.violating_points),
            timestamp: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonDocument {
    pub meta: Meta,
    pub rows: Vec<Row>,
}

fn push_field(out: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        write!(out, "{v}").expect("writing to a String");
    }
}

pub fn to_csv(map: &PhaseSpaceMap) -> String {
    let mut out = String::with_capacity(48 * map.len());
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows(map) {
        write!(out, "{},{},", r.mu, r.delta).expect("writing to a String");
        push_field(&mut out, r.pi_w);
        out.push(',');
        push_field(&mut out, r.i);
        out.push('\n');
    }
    out
}

/// JSON document; `timestamp` is recorded in the metadata when given.
pub fn to_json(map: &PhaseSpaceMap, timestamp: Option<String>) -> Result<String> {
    let mut meta = Meta::of(map);
    meta.timestamp = timestamp;
    let doc = JsonDocument {
        meta,
        rows: rows(map),
    };
    let mut text = serde_json::to_string_pretty(&doc)
        .map_err(|e| Error::NumericalIntegrity(format!("cannot serialize map: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn render(map: &PhaseSpaceMap, format: Format, timestamp: Option<String>) -> Result<String> {
    match format {
        Format::Csv => Ok(to_csv(map)),
        Format::Json => to_json(map, timestamp),
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn export_map(
    map: &PhaseSpaceMap,
    format: Format,
    path: &Path,
    timestamp: Option<String>,
) -> Result<()> {
    write_atomic(path, &render(map, format, timestamp)?)
}

fn parse_field(field: &str, path: &Path, line: usize) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field.parse().map(Some).map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("not a number: '{field}'"),
    })
}

/// Reads rows written by [`to_csv`]. `origin` labels parse errors.
pub fn parse_csv(text: &str, origin: &Path) -> Result<Vec<Row>> {
    let mut lines = text.lines().enumerate();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(parse_err(1, format!("expected header '{CSV_HEADER}'"))),
    }
    let mut out = Vec::new();
    for (k, raw) in lines {
        let line = k + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 4 {
            return Err(parse_err(
                line,
                format!("expected 4 fields, found {}", fields.len()),
            ));
        }
        let required = |f: &str| {
            parse_field(f, origin, line)?
                .ok_or_else(|| parse_err(line, "missing coordinate".into()))
        };
        out.push(Row {
            mu: required(fields[0])?,
            delta: required(fields[1])?,
            pi_w: parse_field(fields[2], origin, line)?,
            i: parse_field(fields[3], origin, line)?,
        });
    }
    Ok(out)
}

pub fn import_csv(path: &Path) -> Result<Vec<Row>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, path)
}

pub fn import_json(path: &Path) -> Result<JsonDocument> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}
