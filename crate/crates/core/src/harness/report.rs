use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::experiment::{ComparisonReport, PointResult};
use crate::error::{Error, Result};

/// Serialisation format of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "csv" => Some(Self::Csv),
            "json" => Some(Self::Json),
            _ => None,
        }
    }
}

const META_PREFIX: &str = "# ";

/// Canonical text of a report. Numbers use shortest round-trip decimals.
pub fn render_report(report: &ComparisonReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Csv => render_csv(report),
    }
}

fn render_csv(report: &ComparisonReport) -> Result<String> {
    let p = report.config.process.p();
    let mut meta = report.clone();
    for h in &mut meta.horizons {
        h.points.clear();
    }
    let mut out = String::new();
    writeln!(out, "{META_PREFIX}{}", serde_json::to_string(&meta)?).unwrap();
    let mut header = vec!["T".to_string(), "point_index".to_string()];
    for block in ["x", "y1", "y2"] {
        for k in 1..=p {
            header.push(format!("{block}_{k}"));
        }
    }
    header.extend(["empirical", "theoretical", "stderr", "sup_distance"].map(String::from));
    writeln!(out, "{}", header.join(",")).unwrap();
    for h in &report.horizons {
        for pt in &h.points {
            let mut cells = vec![h.t.to_string(), pt.index.to_string()];
            cells.extend(pt.x.iter().chain(&pt.y1).chain(&pt.y2).map(|v| v.to_string()));
            cells.extend([pt.empirical, pt.theoretical, pt.stderr, h.sup_distance].map(|v| v.to_string()));
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
    }
    Ok(out)
}

/// Writes the canonical text; IO errors are returned unchanged.
pub fn export_report(report: &ComparisonReport, format: ReportFormat, path: &Path) -> Result<()> {
    std::fs::write(path, render_report(report, format)?)?;
    Ok(())
}

pub fn parse_report(text: &str, format: ReportFormat) -> Result<ComparisonReport> {
    match format {
        ReportFormat::Json => Ok(serde_json::from_str(text)?),
        ReportFormat::Csv => parse_csv(text),
    }
}

pub fn import_report(path: &Path, format: ReportFormat) -> Result<ComparisonReport> {
    parse_report(&std::fs::read_to_string(path)?, format)
}

fn bad(msg: impl Into<String>) -> Error {
    Error::MalformedReport(msg.into())
}

fn parse_csv(text: &str) -> Result<ComparisonReport> {
    let mut lines = text.lines();
    let meta_line = lines
        .next()
        .and_then(|l| l.strip_prefix(META_PREFIX))
        .ok_or_else(|| bad("missing metadata line"))?;
    let mut report: ComparisonReport =
        serde_json::from_str(meta_line).map_err(|e| bad(format!("metadata: {e}")))?;
    let p = report.config.process.p();
    let header = lines.next().ok_or_else(|| bad("missing header"))?;
    let width = 2 + 3 * p + 4;
    if header.split(',').count() != width {
        return Err(bad("header width does not match p"));
    }
    for (ln, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != width {
            return Err(bad(format!("row {} has {} cells", ln + 1, cells.len())));
        }
        let num = |i: usize| -> Result<f64> {
            cells[i]
                .parse::<f64>()
                .map_err(|_| bad(format!("row {}: bad number {:?}", ln + 1, cells[i])))
        };
        let t = num(0)?;
        let index: usize = cells[1]
            .parse()
            .map_err(|_| bad(format!("row {}: bad index", ln + 1)))?;
        let block = |b: usize| (0..p).map(|k| num(2 + b * p + k)).collect::<Result<Vec<_>>>();
        let h = report
            .horizons
            .iter_mut()
            .find(|h| h.t == t)
            .ok_or_else(|| bad(format!("row {}: unknown horizon {t}", ln + 1)))?;
        h.points.push(PointResult {
            index,
            x: block(0)?,
            y1: block(1)?,
            y2: block(2)?,
            empirical: num(2 + 3 * p)?,
            theoretical: num(3 + 3 * p)?,
            stderr: num(4 + 3 * p)?,
        });
    }
    Ok(report)
}
