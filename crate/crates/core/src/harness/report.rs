use std::fmt::Write as _;
use std::path::Path;

use super::experiment::{EvalReport, GridReport};
use super::{HarnessError, Result};
use crate::classifiers::ClassifierId;
use crate::moments::MomentKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Text,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "text" | "table" => Ok(ReportFormat::Text),
            other => Err(format!("unknown report format {other:?} (csv|json|text)")),
        }
    }
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_owned(), |x| format!("{x:.4}"))
}

pub fn render(report: &GridReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(report).expect("report serializes") + "\n",
        ReportFormat::Csv => {
            let mut out = String::from("classifier,b,d1,kind,frr_percent,far_percent,zero_frr,zero_far\n");
            for r in &report.runs {
                let c = &r.config;
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    c.classifier,
                    c.b,
                    c.d1,
                    c.kind,
                    pct(Some(r.frr)),
                    pct(r.far),
                    r.zero_frr,
                    r.zero_far
                );
            }
            out
        }
        ReportFormat::Text => text_tables(report),
    }
}

/// Classifier-by-b grids, one FRR and one FAR table per (kind, d1).
fn text_tables(report: &GridReport) -> String {
    let mut groups: Vec<(MomentKind, usize)> = Vec::new();
    for r in &report.runs {
        let key = (r.config.kind, r.config.d1);
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    let mut out = String::new();
    for (kind, d1) in groups {
        let runs: Vec<&EvalReport> = report.runs.iter().filter(|r| r.config.kind == kind && r.config.d1 == d1).collect();
        let mut bs: Vec<usize> = Vec::new();
        let mut classifiers: Vec<ClassifierId> = Vec::new();
        for r in &runs {
            if !bs.contains(&r.config.b) {
                bs.push(r.config.b);
            }
            if !classifiers.contains(&r.config.classifier) {
                classifiers.push(r.config.classifier);
            }
        }
        for (label, pick) in [("FRR", (|r: &EvalReport| Some(r.frr)) as fn(&EvalReport) -> Option<f64>), ("FAR", |r| r.far)] {
            let _ = writeln!(out, "Moment_{kind} {label} in % (d1 = {d1})");
            let _ = write!(out, "{:<20}", "Classifier");
            for b in &bs {
                let _ = write!(out, "{:>10}", format!("b={b}"));
            }
            out.push('\n');
            for &c in &classifiers {
                let _ = write!(out, "{:<20}", c.display_name());
                for &b in &bs {
                    let cell = runs
                        .iter()
                        .find(|r| r.config.classifier == c && r.config.b == b)
                        .map_or_else(|| "-".to_owned(), |r| pick(r).map_or_else(|| "NA".to_owned(), |v| format!("{v:.2}")));
                    let _ = write!(out, "{cell:>10}");
                }
                out.push('\n');
            }
            out.push('\n');
        }
    }
    if !report.warnings.is_empty() {
        out.push_str("Warnings:\n");
        for w in &report.warnings {
            let _ = writeln!(out, "  {w}");
        }
    }
    out
}

pub fn report_emit(report: &GridReport, format: ReportFormat, path: &Path) -> Result<()> {
    std::fs::write(path, render(report, format)).map_err(|source| HarnessError::Io { path: path.to_owned(), source })
}

pub fn read_report(path: &Path) -> Result<GridReport> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_owned(), source })?;
    serde_json::from_str(&text).map_err(|source| HarnessError::Schema { path: path.to_owned(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{ExperimentConfig, GridConfig};
    use crate::harness::dataset::Modality;
    use crate::harness::experiment::{SubjectResult, REPORT_VERSION};

    fn sample_report() -> GridReport {
        let mut runs = Vec::new();
        for b in [4, 6, 8] {
            for classifier in ClassifierId::ALL {
                let frr = 0.1 * b as f64 + classifier as usize as f64 / 3.0;
                runs.push(EvalReport {
                    config: ExperimentConfig { d1: 128, b, kind: MomentKind::C, classifier },
                    subjects: vec![SubjectResult {
                        id: "s1".into(),
                        genuine_tested: 3,
                        genuine_rejected: 1,
                        frr,
                        imposter_tested: 0,
                        imposter_accepted: 0,
                        far: None,
                    }],
                    frr,
                    far: if b == 4 { None } else { Some(1.0 / 7.0) },
                    zero_frr: 0,
                    zero_far: 0,
                    silhouette: classifier.is_kmeans().then_some(0.25),
                });
            }
        }
        GridReport {
            version: REPORT_VERSION,
            modality: Modality::Signature,
            database: "synthetic".into(),
            training_count: 10,
            config: GridConfig { b: vec![4, 6, 8], ..GridConfig::default() },
            runs,
            warnings: vec!["subject x skipped".into()],
            elapsed_ms: None,
        }
    }

    #[test]
    fn csv_has_one_row_per_run() {
        let r = sample_report();
        let csv = render(&r, ReportFormat::Csv);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + r.runs.len());
        assert_eq!(lines[0].split(',').count(), 8);
        assert!(lines[1].starts_with("kmeans-euclidean,4,128,C,"));
        assert!(lines[1].contains(",NA,"));
    }

    #[test]
    fn json_round_trips() {
        let r = sample_report();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        report_emit(&r, ReportFormat::Json, &path).unwrap();
        assert_eq!(read_report(&path).unwrap(), r);
        assert!(!std::fs::read_to_string(&path).unwrap().contains("elapsed_ms"));
    }

    #[test]
    fn text_table_layout() {
        let text = render(&sample_report(), ReportFormat::Text);
        let blocks: Vec<&str> = text.split("\n\n").collect();
        let frr: Vec<&str> = blocks[0].lines().collect();
        assert_eq!(frr[0], "Moment_C FRR in % (d1 = 128)");
        assert_eq!(frr[1].split_whitespace().collect::<Vec<_>>(), ["Classifier", "b=4", "b=6", "b=8"]);
        let rows = &frr[2..];
        assert_eq!(rows.len(), 7);
        for (row, c) in rows.iter().zip(ClassifierId::ALL) {
            assert!(row.starts_with(c.display_name()), "{row}");
            let cells: Vec<&str> = row[20..].split_whitespace().collect();
            assert_eq!(cells.len(), 3, "{row}");
            assert!(cells.iter().all(|v| v.parse::<f64>().is_ok()), "{row}");
        }
        assert!(blocks[1].contains("FAR"));
        assert!(text.contains("Warnings:"));
    }

    #[test]
    fn unwritable_path_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing").join("r.csv");
        assert!(report_emit(&sample_report(), ReportFormat::Csv, &path).is_err());
    }
}
