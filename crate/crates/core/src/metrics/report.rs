use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_video: BTreeMap<String, Vec<f64>>,
}

/// A table of scores: one row per method, one column per measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<ReportRow>,
}

impl MetricReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned plain-text table, three decimals.
    pub fn to_table(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                std::iter::once(r.name.clone())
                    .chain(r.values.iter().map(|v| format!("{v:.3}")))
                    .collect()
            })
            .collect();
        let header: Vec<String> = std::iter::once("method".to_string()).chain(self.columns.iter().cloned()).collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|c| {
                cells
                    .iter()
                    .filter_map(|row| row.get(c))
                    .chain(std::iter::once(&header[c]))
                    .map(|s| s.chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        writeln!(out, "{}", self.title).unwrap();
        let line = |row: &[String]| {
            row.iter()
                .enumerate()
                .map(|(i, s)| if i == 0 { format!("{s:<w$}", w = widths[i]) } else { format!("{s:>w$}", w = widths[i]) })
                .collect::<Vec<_>>()
                .join("  ")
        };
        writeln!(out, "{}", line(&header)).unwrap();
        writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1))).unwrap();
        for row in &cells {
            writeln!(out, "{}", line(row)).unwrap();
        }
        out
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_aligned() {
        let r = MetricReport {
            title: "t".into(),
            columns: vec!["cosine".into(), "x".into()],
            rows: vec![
                ReportRow {
                    name: "AutoCam".into(),
                    values: vec![0.5, 1.0],
                    per_video: BTreeMap::new(),
                },
                ReportRow {
                    name: "Eye".into(),
                    values: vec![-0.25, 0.0],
                    per_video: BTreeMap::new(),
                },
            ],
        };
        let table = r.to_table();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[1], "method   cosine      x");
        assert_eq!(lines[3], "AutoCam   0.500  1.000");
        assert_eq!(lines[4], "Eye      -0.250  0.000");
        let back: MetricReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
