//! Summary tables over experiment reports, rendered as JSON and as an
//! aligned plain-text table.
//!
//! Numbers in both renderings use shortest round-trip formatting, so the
//! text table parses back to exactly the values in the JSON.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::ExperimentReport;

/// Placeholder for the die-area column, which this tool does not estimate.
pub const DIE_AREA: &str = "out of scope";

/// Contents of a `report.json` written by one CLI experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub experiment: String,
    pub reports: Vec<ExperimentReport>,
    /// Experiment-specific extras (search details, per-period decisions).
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

impl ReportFile {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub source: String,
    pub width: f64,
    pub length: f64,
    pub corner: String,
    pub frequency: f64,
    pub offset: f64,
    pub decision: String,
    pub f_max: Option<f64>,
    pub dead_zone: Option<f64>,
    pub avg_power: f64,
    pub rise_time: Option<f64>,
    pub die_area: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
}

const HEADERS: [&str; 12] = [
    "source",
    "width_m",
    "length_m",
    "corner",
    "freq_hz",
    "offset_s",
    "decision",
    "f_max_hz",
    "dead_zone_s",
    "power_w",
    "rise_s",
    "die_area",
];

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_else(|| "-".to_string())
}

impl SummaryRow {
    fn cells(&self) -> [String; 12] {
        [
            self.source.clone(),
            num(self.width),
            num(self.length),
            self.corner.clone(),
            num(self.frequency),
            num(self.offset),
            self.decision.clone(),
            opt(self.f_max),
            opt(self.dead_zone),
            num(self.avg_power),
            opt(self.rise_time),
            self.die_area.clone(),
        ]
    }
}

impl Summary {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Space-aligned table with a header line; missing values are `-`.
    pub fn to_text(&self) -> String {
        let cells: Vec<[String; 12]> = self.rows.iter().map(SummaryRow::cells).collect();
        let mut widths = HEADERS.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let mut line = |fields: Vec<&str>| {
            let mut l = String::new();
            for (i, (f, w)) in fields.iter().zip(widths).enumerate() {
                if i > 0 {
                    l.push_str("  ");
                }
                let _ = write!(l, "{f:<w$}");
            }
            out.push_str(l.trim_end());
            out.push('\n');
        };
        line(HEADERS.to_vec());
        for row in &cells {
            line(row.iter().map(String::as_str).collect());
        }
        out
    }
}

/// Flattens labelled report tables into one summary, keeping input order.
pub fn generate_report(tables: &[(String, Vec<ExperimentReport>)]) -> Result<Summary> {
    let rows: Vec<SummaryRow> = tables
        .iter()
        .flat_map(|(source, reports)| {
            reports.iter().map(move |r| SummaryRow {
                source: source.clone(),
                width: r.point.width,
                length: r.point.length,
                corner: r.point.corner.name.to_string(),
                frequency: r.point.frequency,
                offset: r.point.offset,
                decision: r.decision.as_str().to_string(),
                f_max: r.f_max,
                dead_zone: r.dead_zone,
                avg_power: r.avg_power,
                rise_time: r.up_rise_time,
                die_area: DIE_AREA.to_string(),
            })
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::InvalidParameter("no reports to summarize".into()));
    }
    Ok(Summary { rows })
}
