//! Report rendering: a stored JSON form that excludes wall-clock times (so
//! identical seeds give byte-identical files), a separate timings sidecar,
//! per-fold CSV, and a text table with one row per classifier and columns
//! Training / Temporal Validation / Subject Validation / Train Time /
//! Score Time.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::eval::{EvalReport, SweepCurve};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredFold {
    pub fold: usize,
    pub train_rows: usize,
    pub validation_rows: usize,
    pub train_accuracy: f64,
    pub validation_accuracy: f64,
}

/// Everything in an `EvalReport` except wall-clock durations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredReport {
    pub classifier: String,
    pub protocol: String,
    pub n_classes: usize,
    pub folds: Vec<StoredFold>,
    pub train_accuracy_mean: f64,
    pub train_accuracy_std: f64,
    pub validation_accuracy_mean: f64,
    pub validation_accuracy_std: f64,
    pub confusion: Vec<u64>,
    pub warnings: Vec<String>,
    pub threads: usize,
}

impl From<&EvalReport> for StoredReport {
    fn from(r: &EvalReport) -> StoredReport {
        StoredReport {
            classifier: r.classifier.clone(),
            protocol: r.protocol.clone(),
            n_classes: r.n_classes,
            folds: r
                .folds
                .iter()
                .map(|f| StoredFold {
                    fold: f.fold,
                    train_rows: f.train_rows,
                    validation_rows: f.validation_rows,
                    train_accuracy: f.train_accuracy,
                    validation_accuracy: f.validation_accuracy,
                })
                .collect(),
            train_accuracy_mean: r.train_accuracy_mean,
            train_accuracy_std: r.train_accuracy_std,
            validation_accuracy_mean: r.validation_accuracy_mean,
            validation_accuracy_std: r.validation_accuracy_std,
            confusion: r.confusion.clone(),
            warnings: r.warnings.clone(),
            threads: r.threads,
        }
    }
}

impl StoredReport {
    pub fn confusion_at(&self, truth: usize, predicted: usize) -> u64 {
        self.confusion[truth * self.n_classes + predicted]
    }
}

pub fn report_json(report: &EvalReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(&StoredReport::from(report))?)
}

pub fn stored_report_json(report: &StoredReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn parse_report_json(text: &str) -> Result<StoredReport> {
    Ok(serde_json::from_str(text)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingEntry {
    pub classifier: String,
    pub protocol: String,
    pub train_seconds_total: f64,
    pub score_seconds_total: f64,
    pub fold_train_seconds: Vec<f64>,
    pub fold_score_seconds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub threads: usize,
    pub entries: Vec<TimingEntry>,
}

pub fn timings_of(reports: &[EvalReport]) -> Timings {
    Timings {
        threads: reports.first().map(|r| r.threads).unwrap_or(0),
        entries: reports
            .iter()
            .map(|r| TimingEntry {
                classifier: r.classifier.clone(),
                protocol: r.protocol.clone(),
                train_seconds_total: r.train_seconds_total,
                score_seconds_total: r.score_seconds_total,
                fold_train_seconds: r.folds.iter().map(|f| f.train_seconds).collect(),
                fold_score_seconds: r.folds.iter().map(|f| f.score_seconds).collect(),
            })
            .collect(),
    }
}

pub fn timings_json(reports: &[EvalReport]) -> Result<String> {
    Ok(serde_json::to_string_pretty(&timings_of(reports))?)
}

pub fn parse_timings_json(text: &str) -> Result<Timings> {
    Ok(serde_json::from_str(text)?)
}

/// One CSV row per fold across all reports; accuracies keep full precision.
pub fn report_csv(reports: &[StoredReport]) -> String {
    let mut out = String::from(
        "classifier,protocol,fold,train_rows,validation_rows,train_accuracy,validation_accuracy\n",
    );
    for r in reports {
        for f in &r.folds {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                csv_quote(&r.classifier),
                r.protocol,
                f.fold,
                f.train_rows,
                f.validation_rows,
                f.train_accuracy,
                f.validation_accuracy
            );
        }
    }
    out
}

pub fn sweep_csv(curve: &SweepCurve) -> String {
    let mut out = format!("{},mean_validation_accuracy,std_validation_accuracy\n", curve.axis);
    for p in &curve.points {
        let _ = writeln!(
            out,
            "{},{},{}",
            p.value, p.mean_validation_accuracy, p.std_validation_accuracy
        );
    }
    out
}

fn csv_quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn acc_cell(mean: f64, std: f64) -> String {
    format!("{mean:.3} \u{00b1} {std:.3}")
}

/// Text table, one row per classifier. Training statistics come from the
/// temporal protocol when both are present. Time columns read from the
/// timings sidecar and stay blank without one.
pub fn render_table(reports: &[StoredReport], timings: Option<&Timings>) -> String {
    let mut order: Vec<&str> = Vec::new();
    for r in reports {
        if !order.contains(&r.classifier.as_str()) {
            order.push(&r.classifier);
        }
    }
    let header = [
        "Classifier",
        "Training",
        "Temporal Validation",
        "Subject Validation",
        "Train Time",
        "Score Time",
    ];
    let mut rows: Vec<[String; 6]> = Vec::new();
    for name in order {
        let temporal = reports
            .iter()
            .find(|r| r.classifier == name && r.protocol == "temporal");
        let subject = reports
            .iter()
            .find(|r| r.classifier == name && r.protocol == "subject");
        let lead = temporal.or(subject);
        let training = lead
            .map(|r| acc_cell(r.train_accuracy_mean, r.train_accuracy_std))
            .unwrap_or_else(|| "-".into());
        let temporal_cell = temporal
            .map(|r| acc_cell(r.validation_accuracy_mean, r.validation_accuracy_std))
            .unwrap_or_else(|| "-".into());
        let subject_cell = subject
            .map(|r| acc_cell(r.validation_accuracy_mean, r.validation_accuracy_std))
            .unwrap_or_else(|| "-".into());
        let (mut train_s, mut score_s) = (0.0, 0.0);
        let mut timed = false;
        if let Some(t) = timings {
            for e in t.entries.iter().filter(|e| e.classifier == name) {
                train_s += e.train_seconds_total;
                score_s += e.score_seconds_total;
                timed = true;
            }
        }
        rows.push([
            name.to_string(),
            training,
            temporal_cell,
            subject_cell,
            if timed { format!("{train_s:.2} s") } else { "-".into() },
            if timed { format!("{score_s:.2} s") } else { "-".into() },
        ]);
    }
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let emit = |out: &mut String, cells: &[String]| {
        let line: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{:w$}", c, w = widths[i]))
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    };
    emit(&mut out, &header.iter().map(|h| h.to_string()).collect::<Vec<_>>());
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    emit(&mut out, &rule);
    for row in &rows {
        emit(&mut out, row);
    }
    out
}

/// Terminal confusion rendering with class names on both axes.
pub fn confusion_text(report: &StoredReport, class_names: &[&str]) -> String {
    let nc = report.n_classes;
    assert_eq!(class_names.len(), nc, "one name per class");
    let width = class_names
        .iter()
        .map(|n| n.len())
        .max()
        .unwrap_or(4)
        .max(6);
    let mut out = format!(
        "{} / {} validation confusion (rows = true class)\n",
        report.classifier, report.protocol
    );
    let _ = write!(out, "{:w$}", "", w = width + 2);
    for name in class_names {
        let _ = write!(out, "{name:>w$}", w = width + 1);
    }
    out.push('\n');
    for (r, name) in class_names.iter().enumerate() {
        let _ = write!(out, "{name:<w$}", w = width + 2);
        for c in 0..nc {
            let _ = write!(out, "{:>w$}", report.confusion[r * nc + c], w = width + 1);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::FoldOutcome;

    fn fake_report(classifier: &str, protocol: &str) -> EvalReport {
        let folds: Vec<FoldOutcome> = (0..5)
            .map(|i| FoldOutcome {
                fold: i,
                train_rows: 400,
                validation_rows: 100,
                train_accuracy: 0.99,
                validation_accuracy: 0.9 + i as f64 * 0.01,
                train_seconds: 1.5 + i as f64,
                score_seconds: 0.25,
            })
            .collect();
        EvalReport {
            classifier: classifier.to_string(),
            protocol: protocol.to_string(),
            n_classes: 3,
            train_accuracy_mean: 0.99,
            train_accuracy_std: 0.0,
            validation_accuracy_mean: 0.92,
            validation_accuracy_std: 0.014,
            train_seconds_total: folds.iter().map(|f| f.train_seconds).sum(),
            score_seconds_total: folds.iter().map(|f| f.score_seconds).sum(),
            folds,
            confusion: vec![30, 2, 1, 0, 35, 0, 3, 1, 28],
            warnings: vec![],
            threads: 4,
        }
    }

    #[test]
    fn stored_json_ignores_wall_times() {
        let a = fake_report("knn(k=1)", "temporal");
        let mut b = a.clone();
        for f in b.folds.iter_mut() {
            f.train_seconds *= 17.0;
            f.score_seconds += 3.0;
        }
        b.train_seconds_total = 1e9;
        b.score_seconds_total = 1e9;
        assert_eq!(report_json(&a).unwrap(), report_json(&b).unwrap());
        // And the same report twice is byte-identical.
        assert_eq!(report_json(&a).unwrap(), report_json(&a).unwrap());
    }

    #[test]
    fn stored_json_round_trips() {
        let r = fake_report("svc(C=1, gamma=0.005)", "subject");
        let text = report_json(&r).unwrap();
        let back = parse_report_json(&text).unwrap();
        assert_eq!(back, StoredReport::from(&r));
        assert_eq!(stored_report_json(&back).unwrap(), text);
    }

    #[test]
    fn csv_has_a_row_per_fold() {
        let stored = [
            StoredReport::from(&fake_report("knn(k=1)", "temporal")),
            StoredReport::from(&fake_report("knn(k=1)", "subject")),
        ];
        let csv = report_csv(&stored);
        assert_eq!(csv.lines().count(), 1 + 10);
        assert!(csv.starts_with("classifier,protocol,fold"));
        // Full-precision accuracy survives a parse back.
        let field = csv.lines().nth(1).unwrap().split(',').nth(6).unwrap();
        assert_eq!(field.parse::<f64>().unwrap(), 0.9);
    }

    #[test]
    fn table_merges_protocols_per_classifier() {
        let reports = [
            fake_report("random_forest(trees=150, max_features=0.1)", "temporal"),
            fake_report("random_forest(trees=150, max_features=0.1)", "subject"),
            fake_report("knn(k=1)", "temporal"),
        ];
        let stored: Vec<StoredReport> = reports.iter().map(StoredReport::from).collect();
        let timings = timings_of(&reports);
        let table = render_table(&stored, Some(&timings));
        let lines: Vec<&str> = table.lines().collect();
        assert!(lines[0].contains("Temporal Validation"));
        assert!(lines[0].contains("Subject Validation"));
        assert!(lines[0].contains("Train Time"));
        assert_eq!(lines.len(), 4); // header + rule + 2 classifiers
        assert!(lines[2].contains("random_forest"));
        assert!(lines[2].contains("0.920 \u{00b1} 0.014"));
        // knn has no subject run: a dash in that column.
        assert!(lines[3].contains("knn(k=1)"));
        assert!(lines[3].contains("-"));
        // Without timings the time columns are dashes.
        let bare = render_table(&stored, None);
        assert!(bare.lines().nth(2).unwrap().trim_end().ends_with('-'));
    }

    #[test]
    fn sweep_csv_lists_every_point() {
        let curve = SweepCurve {
            axis: "overlap".into(),
            points: vec![
                crate::eval::SweepPoint {
                    value: 0.0,
                    mean_validation_accuracy: 0.9,
                    std_validation_accuracy: 0.01,
                },
                crate::eval::SweepPoint {
                    value: 0.5,
                    mean_validation_accuracy: 0.95,
                    std_validation_accuracy: 0.008,
                },
            ],
            warnings: vec![],
        };
        let csv = sweep_csv(&curve);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("overlap,"));
    }

    #[test]
    fn confusion_text_names_classes() {
        let stored = StoredReport::from(&fake_report("knn(k=1)", "temporal"));
        let text = confusion_text(&stored, &["pen", "abd", "fel"]);
        assert!(text.contains("pen"));
        assert!(text.contains("35"));
    }

    #[test]
    fn timings_round_trip() {
        let reports = [fake_report("knn(k=1)", "temporal")];
        let text = timings_json(&reports).unwrap();
        let t = parse_timings_json(&text).unwrap();
        assert_eq!(t.threads, 4);
        assert_eq!(t.entries[0].fold_train_seconds.len(), 5);
        assert!((t.entries[0].train_seconds_total - 17.5).abs() < 1e-12);
    }
}
