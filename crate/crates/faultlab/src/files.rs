//! Segment, prediction and report files.

use std::fs;
use std::path::Path;

use faultlab_core::cascade::CascadePrediction;
use faultlab_core::changepoint::Segment;
use faultlab_core::eval::{parse_cell, render_report, EvalReport, ReportFormat, REPORT_COLUMNS};

pub const SEGMENTS_HEADER: &str = "start,end";
pub const PREDICTIONS_HEADER: &str = "index,class,p_anomaly";

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {message}")]
    Parse { path: String, line: usize, message: String },
}

fn write_text(path: &Path, text: &str) -> Result<(), FileError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| FileError::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| FileError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read_text(path: &Path) -> Result<String, FileError> {
    fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Half-open `[start, end)` record intervals, one per line.
pub fn segments_csv(segments: &[Segment]) -> String {
    let mut out = format!("{SEGMENTS_HEADER}\n");
    for s in segments {
        out.push_str(&format!("{},{}\n", s.start, s.end));
    }
    out
}

pub fn write_segments(path: &Path, segments: &[Segment]) -> Result<(), FileError> {
    write_text(path, &segments_csv(segments))
}

pub fn read_segments(path: &Path) -> Result<Vec<Segment>, FileError> {
    let text = read_text(path)?;
    let err = |line: usize, message: &str| FileError::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    };
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(SEGMENTS_HEADER) {
        return Err(err(1, "expected header `start,end`"));
    }
    let mut out = Vec::new();
    for (i, l) in lines.enumerate() {
        let (a, b) = l.split_once(',').ok_or_else(|| err(i + 2, "expected two fields"))?;
        let (start, end): (usize, usize) = match (a.trim().parse(), b.trim().parse()) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return Err(err(i + 2, "not an integer")),
        };
        if start >= end {
            return Err(err(i + 2, "start must be below end"));
        }
        out.push(Segment { start, end });
    }
    Ok(out)
}

/// One line per step: index, predicted class (1..=12), `1 − p(class 12)`.
pub fn predictions_csv(pred: &CascadePrediction) -> String {
    let mut out = String::with_capacity(24 * pred.classes.len() + 32);
    out.push_str(PREDICTIONS_HEADER);
    out.push('\n');
    for (i, (c, p)) in pred.classes.iter().zip(&pred.p_anomaly).enumerate() {
        out.push_str(&format!("{i},{c},{p}\n"));
    }
    out
}

pub fn write_predictions(path: &Path, pred: &CascadePrediction) -> Result<(), FileError> {
    write_text(path, &predictions_csv(pred))
}

/// `.csv` files get CSV, anything else Markdown.
pub fn format_for(path: &Path) -> ReportFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("csv") => ReportFormat::Csv,
        _ => ReportFormat::Markdown,
    }
}

pub fn write_report(path: &Path, reports: &[EvalReport], format: ReportFormat) -> Result<(), FileError> {
    write_text(path, &render_report(reports, format))
}

/// Per-fold details of every report as pretty JSON.
pub fn write_report_json(path: &Path, reports: &[EvalReport]) -> Result<(), FileError> {
    let mut text = serde_json::to_string_pretty(reports).expect("reports serialise");
    text.push('\n');
    write_text(path, &text)
}

/// A report row read back from CSV: variant label and `(mean, std)` per column, in percent.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub variant: String,
    pub cells: [(f64, f64); 5],
}

pub fn parse_report_csv(text: &str) -> Result<Vec<ReportRow>, String> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    if header.len() != 6 || header[0] != "variant" || header[1..] != REPORT_COLUMNS {
        return Err(format!("unexpected report header `{}`", header.join(",")));
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            let fields: Vec<&str> = l.split(',').collect();
            if fields.len() != 6 {
                return Err(format!("line {}: expected 6 fields", i + 2));
            }
            let mut cells = [(0.0, 0.0); 5];
            for (c, f) in cells.iter_mut().zip(&fields[1..]) {
                *c = parse_cell(f).ok_or_else(|| format!("line {}: bad cell `{f}`", i + 2))?;
            }
            Ok(ReportRow {
                variant: fields[0].to_string(),
                cells,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use faultlab_core::eval::{FoldResult, MetricSet};
    use faultlab_core::Tensor2;

    #[test]
    fn segments_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("segs.csv");
        let segs = vec![Segment::new(3, 40), Segment::new(52, 60)];
        write_segments(&path, &segs).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "start,end\n3,40\n52,60\n");
        assert_eq!(read_segments(&path).unwrap(), segs);
        fs::write(&path, "start,end\n5,5\n").unwrap();
        assert!(matches!(read_segments(&path), Err(FileError::Parse { line: 2, .. })));
    }

    #[test]
    fn predictions_layout() {
        let pred = CascadePrediction {
            classes: vec![12, 4],
            anomaly: vec![false, true],
            p_anomaly: vec![0.25, 0.875],
            probs: Tensor2::zeros(2, 12),
            segments: Vec::new(),
        };
        assert_eq!(predictions_csv(&pred), "index,class,p_anomaly\n0,12,0.25\n1,4,0.875\n");
    }

    #[test]
    fn report_csv_reads_back() {
        let metrics = |v: f64| MetricSet {
            accuracy: v,
            balanced_accuracy: v,
            precision: v / 2.0,
            recall: v,
            specificity: 0.99,
            f1: v / 3.0,
        };
        let folds = |vs: &[f64]| {
            vs.iter()
                .enumerate()
                .map(|(i, &v)| FoldResult {
                    index: i,
                    fold: None,
                    metrics: metrics(v),
                })
                .collect()
        };
        let reports = vec![
            EvalReport::from_folds("SMTCNN", folds(&[0.9, 0.95]), vec![]).unwrap(),
            EvalReport::from_folds("B2 (no segmentation)", folds(&[0.5, 0.7, 0.6]), vec![1]).unwrap(),
        ];
        let rows = parse_report_csv(&render_report(&reports, ReportFormat::Csv)).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].variant, "B2 (no segmentation)");
        assert_eq!(rows[0].cells[0], (92.5, 2.5));
        assert_eq!(rows[0].cells[3], (99.0, 0.0));
        for (row, rep) in rows.iter().zip(&reports) {
            let means = [rep.mean.balanced_accuracy, rep.mean.precision, rep.mean.recall, rep.mean.specificity, rep.mean.f1];
            for (cell, m) in row.cells.iter().zip(means) {
                assert!((cell.0 - 100.0 * m).abs() <= 0.005 * (100.0 * m).abs().max(1.0));
            }
        }
    }

    #[test]
    fn format_follows_extension() {
        assert_eq!(format_for(Path::new("r.csv")), ReportFormat::Csv);
        assert_eq!(format_for(Path::new("r.md")), ReportFormat::Markdown);
    }
}
