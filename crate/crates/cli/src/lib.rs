//! Plumbing shared between the binary and its integration tests: the
//! on-disk field schema and the CSV point format.

use jet_extend::{Error, Site, TaylorField1};
use serde::{Deserialize, Serialize};

/// One site of the input document: location `s`, value `alpha`,
/// gradient `v`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SiteDocument {
    pub s: Vec<f64>,
    pub alpha: f64,
    pub v: Vec<f64>,
}

/// JSON schema for a field on disk. Serializing and re-parsing is lossless:
/// all reals go through decimal round-trip formatting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldDocument {
    pub dim: usize,
    pub sites: Vec<SiteDocument>,
}

impl FieldDocument {
    pub fn from_field(field: &TaylorField1) -> Self {
        FieldDocument {
            dim: field.dim(),
            sites: field
                .sites()
                .iter()
                .map(|site| SiteDocument {
                    s: site.location.clone(),
                    alpha: site.value,
                    v: site.gradient.clone(),
                })
                .collect(),
        }
    }

    pub fn into_field(self) -> Result<TaylorField1, Error> {
        let sites = self
            .sites
            .into_iter()
            .map(|doc| Site::new(doc.s, doc.alpha, doc.v))
            .collect();
        TaylorField1::new(self.dim, sites)
    }
}

/// Headerless CSV, `dim` columns per line. Blank lines are ignored;
/// errors carry the 1-based line number.
pub fn parse_points_csv(text: &str, dim: usize) -> Result<Vec<Vec<f64>>, String> {
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let coords: Result<Vec<f64>, _> =
            line.split(',').map(|tok| tok.trim().parse::<f64>()).collect();
        let coords = coords.map_err(|e| format!("line {}: {e}", lineno + 1))?;
        if coords.len() != dim {
            return Err(format!(
                "line {}: expected {dim} columns, got {}",
                lineno + 1,
                coords.len()
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(format!("line {}: non-finite coordinate", lineno + 1));
        }
        points.push(coords);
    }
    Ok(points)
}

pub fn csv_header(dim: usize) -> String {
    let mut cols: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    cols.push("value".to_string());
    cols.extend((0..dim).map(|i| format!("g{i}")));
    cols.join(",")
}

pub fn csv_row(coords: &[f64], value: f64, gradient: &[f64]) -> String {
    let mut cols: Vec<String> = coords.iter().map(|c| c.to_string()).collect();
    cols.push(value.to_string());
    cols.extend(gradient.iter().map(|g| g.to_string()));
    cols.join(",")
}
