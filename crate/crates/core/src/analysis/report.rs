//! CSV report rows.

use crate::Result;
use serde::Serialize;
use std::io::Write;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PbRow {
    pub method: String,
    pub n: usize,
    pub t: usize,
    /// Free-form `key=value;...` parameters.
    pub params: String,
    #[serde(rename = "P_B")]
    pub p_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub source: String,
    pub alpha: Option<f64>,
    #[serde(rename = "Rs")]
    pub r_s: f64,
    #[serde(rename = "Rl")]
    pub r_l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmaxRow {
    pub p_b: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "Smax")]
    pub s_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessRow {
    pub pair_count: usize,
    pub mean: f64,
    pub variance: f64,
}

/// Writes rows with a header derived from the field names.
pub fn write_csv<W: Write, T: Serialize>(writer: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row).map_err(|e| crate::Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}
