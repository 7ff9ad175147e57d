use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{EvalError, RegressionReport, Result};

pub const REPORT_COLUMNS: [&str; 8] = [
    "model",
    "variant",
    "cluster",
    "rmse_mean",
    "rmse_std",
    "pcc",
    "ccc",
    "n_samples",
];

/// One report line; serializes to the CSV columns in [`REPORT_COLUMNS`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: String,
    pub variant: String,
    pub cluster: String,
    pub rmse_mean: f64,
    pub rmse_std: f64,
    pub pcc: f64,
    pub ccc: f64,
    pub n_samples: usize,
}

impl ReportRow {
    pub fn new(model: &str, variant: &str, cluster: &str, r: &RegressionReport) -> Self {
        ReportRow {
            model: model.into(),
            variant: variant.into(),
            cluster: cluster.into(),
            rmse_mean: r.rmse,
            rmse_std: r.rmse_std,
            pcc: r.pcc,
            ccc: r.ccc,
            n_samples: r.n_samples,
        }
    }
}

pub fn write_report_csv(rows: &[ReportRow], path: &Path) -> Result<()> {
    let io = |e: csv::Error| EvalError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| EvalError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Fixed-width table: `RMSE (± std) | PCC | CCC` per model and cluster, rows
/// in input order.
pub fn render_table(rows: &[ReportRow]) -> String {
    let body: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            [
                r.model.clone(),
                r.variant.clone(),
                r.cluster.clone(),
                format!("{:.2} (± {:.2})", r.rmse_mean, r.rmse_std),
                format!("{:.2}", r.pcc),
                format!("{:.2}", r.ccc),
                r.n_samples.to_string(),
            ]
        })
        .collect();
    let head = ["Model", "Variant", "Cluster", "RMSE", "PCC", "CCC", "N"];
    let mut width: Vec<usize> = head.iter().map(|h| h.chars().count()).collect();
    for row in &body {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::from("|");
        for (c, w) in cells.iter().zip(&width) {
            let _ = write!(s, " {c}{} |", " ".repeat(w - c.chars().count()));
        }
        s.push('\n');
        s
    };
    let rule: String = {
        let mut s = String::from("+");
        for w in &width {
            s.push_str(&"-".repeat(w + 2));
            s.push('+');
        }
        s.push('\n');
        s
    };
    let mut out = rule.clone();
    out += &line(&head.map(String::from));
    out += &rule;
    for row in &body {
        out += &line(row);
    }
    out += &rule;
    out
}

/// Writes `report.csv` and `report.txt` into `dir`; returns the CSV path and
/// the rendered table.
pub fn emit_report(rows: &[ReportRow], dir: &Path) -> Result<(PathBuf, String)> {
    if rows.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let csv_path = dir.join("report.csv");
    write_report_csv(rows, &csv_path)?;
    let table = render_table(rows);
    let txt = dir.join("report.txt");
    std::fs::write(&txt, &table).map_err(|e| EvalError::Io {
        path: txt.display().to_string(),
        message: e.to_string(),
    })?;
    Ok((csv_path, table))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(model: &str, cluster: &str, rmse: f64) -> ReportRow {
        ReportRow {
            model: model.into(),
            variant: "-".into(),
            cluster: cluster.into(),
            rmse_mean: rmse,
            rmse_std: 0.5,
            pcc: 0.6,
            ccc: 0.55,
            n_samples: 10,
        }
    }

    #[test]
    fn csv_schema_and_table() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![row("gpt", "WD", 1.37), row("gpt", "UC", 1.5), row("gpt", "CC", 1.1)];
        let (path, table) = emit_report(&rows, dir.path()).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), REPORT_COLUMNS.join(","));
        assert_eq!(lines.count(), 3);
        let clusters: Vec<&str> = table
            .lines()
            .filter(|l| l.starts_with("| gpt"))
            .map(|l| l.split('|').nth(3).unwrap().trim())
            .collect();
        assert_eq!(clusters, ["WD", "UC", "CC"]);
        assert!(table.contains("1.37 (± 0.50)"));
    }

    #[test]
    fn single_row_and_empty() {
        let t = render_table(&[row("m", "WD", 1.0)]);
        assert_eq!(t.lines().filter(|l| l.starts_with("| m")).count(), 1);
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(emit_report(&[], dir.path()), Err(EvalError::EmptyInput)));
    }
}
