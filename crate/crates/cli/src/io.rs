//! CSV and JSON file handling for the command line.
//!
//! Canonical CSV layout: header row of unique dimension names, then one row
//! per time point. `--transpose` accepts the rotated layout instead, where
//! each row is one dimension: its name in the first field, values after.
//! Floats are written with `Display`, whose shortest-round-trip form parses
//! back to the identical bits.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use sketchcord::sketch::SketchFile;
use sketchcord::{MultiSeries, Series, SketchedSeries};

/// CSV-level failures, reported with 1-based data-row coordinates and column
/// names.
#[derive(Debug)]
pub enum CsvError {
    Io(String, std::io::Error),
    Parse {
        row: usize,
        column: String,
        value: String,
    },
    NonFinite {
        row: usize,
        column: String,
    },
    RaggedRows {
        row: usize,
        expected: usize,
        got: usize,
    },
    MissingHeader,
    DuplicateColumn(String),
    Empty,
    Invalid(String),
}

impl fmt::Display for CsvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CsvError::Io(path, err) => write!(f, "{path}: {err}"),
            CsvError::Parse { row, column, value } => {
                write!(f, "cannot parse {value:?} at row {row}, column {column:?}")
            }
            CsvError::NonFinite { row, column } => {
                write!(f, "non-finite value at row {row}, column {column:?}")
            }
            CsvError::RaggedRows { row, expected, got } => {
                write!(f, "row {row} has {got} fields, expected {expected}")
            }
            CsvError::MissingHeader => write!(f, "missing header row"),
            CsvError::DuplicateColumn(name) => write!(f, "duplicate column {name:?}"),
            CsvError::Empty => write!(f, "no data rows"),
            CsvError::Invalid(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CsvError {}

pub fn load_csv(path: &Path, transpose: bool) -> Result<MultiSeries, CsvError> {
    if transpose {
        load_csv_transposed(path)
    } else {
        load_csv_canonical(path)
    }
}

fn open_reader(path: &Path, has_header: bool) -> Result<csv::Reader<File>, CsvError> {
    csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CsvError::Io(path.display().to_string(), to_io(e)))
}

fn to_io(e: csv::Error) -> std::io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    }
}

fn parse_cell(raw: &str, row: usize, column: &str) -> Result<f64, CsvError> {
    let value: f64 = raw.parse().map_err(|_| CsvError::Parse {
        row,
        column: column.to_string(),
        value: raw.to_string(),
    })?;
    if !value.is_finite() {
        return Err(CsvError::NonFinite {
            row,
            column: column.to_string(),
        });
    }
    Ok(value)
}

fn load_csv_canonical(path: &Path) -> Result<MultiSeries, CsvError> {
    let mut reader = open_reader(path, true)?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CsvError::Io(path.display().to_string(), to_io(e)))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() {
        return Err(CsvError::MissingHeader);
    }
    for (i, name) in header.iter().enumerate() {
        if header[..i].contains(name) {
            return Err(CsvError::DuplicateColumn(name.clone()));
        }
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| CsvError::Io(path.display().to_string(), to_io(e)))?;
        if record.len() != header.len() {
            return Err(CsvError::RaggedRows {
                row,
                expected: header.len(),
                got: record.len(),
            });
        }
        for (col, raw) in record.iter().enumerate() {
            columns[col].push(parse_cell(raw, row, &header[col])?);
        }
    }
    build_multiseries(header, columns)
}

fn load_csv_transposed(path: &Path) -> Result<MultiSeries, CsvError> {
    let mut reader = open_reader(path, false)?;
    let mut names = Vec::new();
    let mut columns = Vec::new();
    let mut expected = None;
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| CsvError::Io(path.display().to_string(), to_io(e)))?;
        let mut fields = record.iter();
        let name = fields
            .next()
            .ok_or(CsvError::RaggedRows {
                row,
                expected: 2,
                got: 0,
            })?
            .to_string();
        let values: Vec<f64> = fields
            .enumerate()
            .map(|(i, raw)| parse_cell(raw, row, &format!("{name}[{i}]")))
            .collect::<Result<_, _>>()?;
        let expected = *expected.get_or_insert(values.len());
        if values.len() != expected {
            return Err(CsvError::RaggedRows {
                row,
                expected: expected + 1,
                got: values.len() + 1,
            });
        }
        if names.contains(&name) {
            return Err(CsvError::DuplicateColumn(name));
        }
        names.push(name);
        columns.push(values);
    }
    build_multiseries(names, columns)
}

fn build_multiseries(
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
) -> Result<MultiSeries, CsvError> {
    if columns.is_empty() || columns[0].is_empty() {
        return Err(CsvError::Empty);
    }
    let dims = names
        .into_iter()
        .zip(columns)
        .map(|(name, values)| {
            let series = Series::new(values).map_err(|e| CsvError::Invalid(e.to_string()))?;
            Ok((name, series))
        })
        .collect::<Result<Vec<_>, CsvError>>()?;
    MultiSeries::new(dims).map_err(|e| CsvError::Invalid(e.to_string()))
}

/// Write the canonical layout: header of dimension names, one row per time
/// point.
pub fn save_csv(path: &Path, t: &MultiSeries) -> Result<(), CsvError> {
    let file = File::create(path).map_err(|e| CsvError::Io(path.display().to_string(), e))?;
    let mut out = BufWriter::new(file);
    let io_err = |e: std::io::Error| CsvError::Io(path.display().to_string(), e);

    let names: Vec<&str> = t.names().collect();
    writeln!(out, "{}", names.join(",")).map_err(io_err)?;
    for row in 0..t.n() {
        let mut line = String::new();
        for (pos, (_, series)) in t.iter().enumerate() {
            if pos > 0 {
                line.push(',');
            }
            line.push_str(&format!("{}", series.values()[row]));
        }
        writeln!(out, "{line}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// One binary label per row: a single 0/1 column with a header line.
pub fn load_labels(path: &Path) -> Result<Vec<bool>, CsvError> {
    let mut reader = open_reader(path, true)?;
    let mut labels = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| CsvError::Io(path.display().to_string(), to_io(e)))?;
        let raw = record.get(0).unwrap_or("");
        match raw {
            "0" => labels.push(false),
            "1" => labels.push(true),
            other => {
                return Err(CsvError::Parse {
                    row,
                    column: "label".to_string(),
                    value: other.to_string(),
                })
            }
        }
    }
    if labels.is_empty() {
        return Err(CsvError::Empty);
    }
    Ok(labels)
}

pub fn load_sketch(path: &Path) -> Result<SketchedSeries, String> {
    let file = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let parsed: SketchFile = serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| format!("{}: {e}", path.display()))?;
    SketchedSeries::from_persist(parsed).map_err(|e| e.to_string())
}

pub fn save_sketch(path: &Path, sketch: &SketchedSeries) -> Result<(), String> {
    let file = File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer(&mut out, &sketch.to_persist())
        .map_err(|e| format!("{}: {e}", path.display()))?;
    out.flush().map_err(|e| format!("{}: {e}", path.display()))
}

/// Write one score per row with a header.
pub fn save_scores(path: &Path, scores: &[f64]) -> Result<(), std::io::Error> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "score")?;
    for s in scores {
        writeln!(out, "{s}")?;
    }
    out.flush()
}

/// Histogram CSV: lo,hi,count per bin.
pub fn save_histogram(
    path: &Path,
    bins: &[sketchcord::eval::HistogramBin],
) -> Result<(), std::io::Error> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "lo,hi,count")?;
    for bin in bins {
        writeln!(out, "{},{},{}", bin.lo, bin.hi, bin.count)?;
    }
    out.flush()
}
