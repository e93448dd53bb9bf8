//! Telemetry CSV files.
//!
//! One record per line under the header `timestamp,energy,cpu,duration,anomaly,fault_class`.
//! Floats are written in Rust's shortest round-trip form, so reading a written file gives
//! back the same bits. `anomaly` is written as `0`/`1`; `true`/`false` are accepted too.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use faultlab_core::sim::{Regime, SimError, TelemetryRecord, TimeSeriesDataset};

pub const HEADER: [&str; 6] = ["timestamp", "energy", "cpu", "duration", "anomaly", "fault_class"];

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("expected header `{}`, found `{found}`", HEADER.join(","))]
    Header { found: String },
    #[error("{0}")]
    Dataset(#[from] SimError),
}

fn line_error(line: u64, message: impl Into<String>) -> CsvError {
    CsvError::Parse {
        line,
        message: message.into(),
    }
}

fn csv_failure(e: csv::Error) -> CsvError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CsvError::Io {
            path: "<stream>".into(),
            source,
        },
        other => line_error(line, format!("{other:?}")),
    }
}

pub fn write_dataset<W: Write>(ds: &TimeSeriesDataset, out: W) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER).map_err(csv_failure)?;
    for r in &ds.records {
        w.write_record([
            r.timestamp.to_string(),
            r.energy.to_string(),
            r.cpu.to_string(),
            r.duration.to_string(),
            u8::from(r.anomaly).to_string(),
            r.fault_class.to_string(),
        ])
        .map_err(csv_failure)?;
    }
    w.flush().map_err(|source| CsvError::Io {
        path: "<stream>".into(),
        source,
    })
}

pub fn write_csv(ds: &TimeSeriesDataset, path: &Path) -> Result<(), CsvError> {
    let file = File::create(path).map_err(|source| CsvError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_dataset(ds, BufWriter::new(file))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T, CsvError> {
    let raw = rec.get(i).unwrap_or("");
    raw.trim()
        .parse()
        .map_err(|_| line_error(line, format!("{}: cannot parse `{raw}`", HEADER[i])))
}

fn parse_flag(raw: &str, line: u64) -> Result<bool, CsvError> {
    match raw.trim() {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        other => Err(line_error(line, format!("anomaly: cannot parse `{other}`"))),
    }
}

/// Regime implied by the labels: no faults → normal-only, only faults → anomaly-only.
pub fn infer_regime(records: &[TelemetryRecord]) -> Regime {
    let faults = records.iter().filter(|r| r.anomaly).count();
    if faults == 0 {
        Regime::NormalOnly
    } else if faults == records.len() {
        Regime::AnomalyOnly
    } else {
        Regime::Mixed
    }
}

/// Reads a dataset. With `regime` given, every record must satisfy that regime's label
/// contract; otherwise the regime is inferred from the labels.
pub fn read_dataset<R: Read>(input: R, regime: Option<Regime>) -> Result<TimeSeriesDataset, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut rows = rdr.records();
    let header = match rows.next() {
        Some(h) => h.map_err(csv_failure)?,
        None => return Err(CsvError::Header { found: String::new() }),
    };
    if header.iter().map(str::trim).ne(HEADER) {
        return Err(CsvError::Header {
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut records: Vec<TelemetryRecord> = Vec::new();
    for row in rows {
        let row = row.map_err(csv_failure)?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != HEADER.len() {
            return Err(line_error(line, format!("expected {} fields, found {}", HEADER.len(), row.len())));
        }
        let rec = TelemetryRecord {
            timestamp: field(&row, 0, line)?,
            energy: field(&row, 1, line)?,
            cpu: field(&row, 2, line)?,
            duration: field(&row, 3, line)?,
            anomaly: parse_flag(&row[4], line)?,
            fault_class: field(&row, 5, line)?,
        };
        rec.check().map_err(|reason| line_error(line, reason))?;
        if let Some(prev) = records.last() {
            if rec.timestamp <= prev.timestamp {
                return Err(line_error(line, "timestamps not strictly increasing"));
            }
        }
        match regime {
            Some(Regime::NormalOnly) if rec.anomaly => {
                return Err(line_error(line, "anomalous record in a normal-only dataset"))
            }
            Some(Regime::AnomalyOnly) if !rec.anomaly => {
                return Err(line_error(line, "normal record in an anomaly-only dataset"))
            }
            _ => {}
        }
        records.push(rec);
    }
    let regime = regime.unwrap_or_else(|| infer_regime(&records));
    Ok(TimeSeriesDataset::new(records, regime)?)
}

pub fn read_csv(path: &Path, regime: Option<Regime>) -> Result<TimeSeriesDataset, CsvError> {
    let file = File::open(path).map_err(|source| CsvError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_dataset(BufReader::new(file), regime).map_err(|e| match e {
        CsvError::Parse { line, message } => CsvError::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use faultlab_core::sim::{generate_dataset, SimConfig};

    fn roundtrip(ds: &TimeSeriesDataset) -> TimeSeriesDataset {
        let mut buf = Vec::new();
        write_dataset(ds, &mut buf).unwrap();
        read_dataset(buf.as_slice(), Some(ds.regime)).unwrap()
    }

    #[test]
    fn write_then_read_is_identity() {
        for regime in [Regime::NormalOnly, Regime::AnomalyOnly, Regime::Mixed] {
            let cfg = SimConfig {
                length: 500,
                fault_rate: 0.05,
                seed: 3,
                ..SimConfig::default()
            };
            let ds = generate_dataset(regime, &cfg).unwrap();
            assert_eq!(roundtrip(&ds), ds);
        }
    }

    #[test]
    fn empty_dataset_is_header_only() {
        let ds = TimeSeriesDataset::new(Vec::new(), Regime::Mixed).unwrap();
        let mut buf = Vec::new();
        write_dataset(&ds, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "timestamp,energy,cpu,duration,anomaly,fault_class\n");
        assert_eq!(roundtrip(&ds), ds);
    }

    #[test]
    fn cpu_out_of_range_names_the_line() {
        let text = "timestamp,energy,cpu,duration,anomaly,fault_class\n\
                    60,1.0,0.5,2.0,0,12\n\
                    120,1.0,1.5,2.0,0,12\n";
        let err = read_dataset(text.as_bytes(), None).unwrap_err();
        match err {
            CsvError::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("cpu"), "{message}");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn malformed_rows_are_rejected_with_line_numbers() {
        let cases = [
            ("60,1.0,0.5,2.0,0,12\n60,1.0,0.5,2.0,0,12\n", 3),
            ("60,1.0,0.5,2.0,0,12\n120,x,0.5,2.0,0,12\n", 3),
            ("60,1.0,0.5,2.0,1,12\n", 2),
            ("60,1.0,0.5,2.0,0\n", 2),
        ];
        for (body, expected) in cases {
            let text = format!("{}\n{body}", HEADER.join(","));
            match read_dataset(text.as_bytes(), None) {
                Err(CsvError::Parse { line, .. }) => assert_eq!(line, expected, "{body}"),
                other => panic!("{body}: {other:?}"),
            }
        }
    }

    #[test]
    fn wrong_header_is_rejected() {
        let err = read_dataset("time,energy\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, CsvError::Header { .. }));
    }

    #[test]
    fn regime_contract_is_enforced() {
        let text = format!("{}\n60,1.0,0.5,2.0,1,3\n", HEADER.join(","));
        assert!(read_dataset(text.as_bytes(), Some(Regime::NormalOnly)).is_err());
        assert_eq!(read_dataset(text.as_bytes(), None).unwrap().regime, Regime::AnomalyOnly);
    }
}
