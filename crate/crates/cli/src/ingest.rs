//! Reading one column of delimited text into a [`TimeSeries`].

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use specstat::{Advisory, Provenance, TimeSeries};

use crate::error::{CliError, Result};

/// Shortest series accepted after preprocessing.
pub const MIN_INGEST_LEN: usize = 64;

/// A column picked by 1-based position or by header name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
}

impl Default for ColumnSelector {
    fn default() -> Self {
        ColumnSelector::Index(1)
    }
}

impl FromStr for ColumnSelector {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err("column selector is empty".into());
        }
        match s.parse::<usize>() {
            Ok(0) => Err("column positions start at 1".into()),
            Ok(i) => Ok(ColumnSelector::Index(i)),
            Err(_) => Ok(ColumnSelector::Name(s.to_string())),
        }
    }
}

impl fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnSelector::Index(i) => write!(f, "{i}"),
            ColumnSelector::Name(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    Comma,
    Tab,
    Whitespace,
}

impl Delimiter {
    /// Comma if the line has one, else tab, else runs of whitespace.
    pub fn detect(line: &str) -> Self {
        if line.contains(',') {
            Delimiter::Comma
        } else if line.contains('\t') {
            Delimiter::Tab
        } else {
            Delimiter::Whitespace
        }
    }

    pub fn split(self, line: &str) -> Vec<&str> {
        match self {
            Delimiter::Comma => line.split(',').map(str::trim).collect(),
            Delimiter::Tab => line.split('\t').map(str::trim).collect(),
            Delimiter::Whitespace => line.split_whitespace().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOptions {
    pub column: ColumnSelector,
    /// Lines dropped from the top before anything is parsed.
    pub header_skip: usize,
    pub difference: bool,
    pub demean: bool,
    /// Standard deviation of Gaussian noise added after differencing.
    pub jitter_sd: f64,
    pub seed: u64,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            column: ColumnSelector::default(),
            header_skip: 0,
            difference: false,
            demean: true,
            jitter_sd: 0.0,
            seed: 0,
        }
    }
}

/// Where the series came from and what was done to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDescriptor {
    pub path: String,
    pub column: ColumnSelector,
    pub delimiter: Delimiter,
    pub header: Option<String>,
    /// Observations read before preprocessing.
    pub rows: usize,
    pub n: usize,
    pub header_skip: usize,
    pub difference: bool,
    pub demean: bool,
    pub jitter_sd: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub series: TimeSeries,
    pub input: InputDescriptor,
    pub advisories: Vec<Advisory>,
}

/// A parsed numeric column.
#[derive(Debug, Clone, PartialEq)]
pub struct RawColumn {
    pub values: Vec<f64>,
    pub delimiter: Delimiter,
    pub header: Option<String>,
}

/// Reads `path` (or standard input for `-`) and preprocesses the selected column.
pub fn ingest(path: &Path, opts: &IngestOptions) -> Result<Ingested> {
    let label = path.display().to_string();
    let text = read_text(path)?;
    ingest_str(&text, &label, opts)
}

pub fn read_text(path: &Path) -> Result<String> {
    let label = path.display().to_string();
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(CliError::io("reading standard input"))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(CliError::io(format!("reading {label}")))
}

pub fn ingest_str(text: &str, label: &str, opts: &IngestOptions) -> Result<Ingested> {
    if !(opts.jitter_sd >= 0.0 && opts.jitter_sd.is_finite()) {
        return Err(CliError::usage(format!(
            "--jitter-sd must be a finite non-negative number, got {}",
            opts.jitter_sd
        )));
    }
    let raw = parse_column(text, label, &opts.column, opts.header_skip)?;
    let rows = raw.values.len();
    let (values, meta) = preprocess(raw.values, opts);
    if values.len() < MIN_INGEST_LEN {
        return Err(CliError::Data {
            path: label.to_string(),
            message: format!(
                "{} observations after preprocessing; at least {MIN_INGEST_LEN} are required",
                values.len()
            ),
        });
    }
    let mut advisories = Vec::new();
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        advisories.push(Advisory {
            code: "zero-variance".into(),
            message:
                "the series is constant after preprocessing; spectral estimates are degenerate"
                    .into(),
        });
    }
    let n = values.len();
    let series = TimeSeries::with_provenance(values, meta)?;
    Ok(Ingested {
        series,
        input: InputDescriptor {
            path: label.to_string(),
            column: opts.column.clone(),
            delimiter: raw.delimiter,
            header: raw.header,
            rows,
            n,
            header_skip: opts.header_skip,
            difference: opts.difference,
            demean: opts.demean,
            jitter_sd: opts.jitter_sd,
            seed: opts.seed,
        },
        advisories,
    })
}

/// Non-empty, non-comment lines after the first `skip`, with 1-based line numbers.
fn content_lines(text: &str, skip: usize) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .skip(skip)
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim_matches('"')
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
}

/// Extracts one column. A leading line is taken as a header when a column
/// is selected by name or when none of its fields is numeric.
pub fn parse_column(
    text: &str,
    label: &str,
    column: &ColumnSelector,
    header_skip: usize,
) -> Result<RawColumn> {
    let mut lines = content_lines(text, header_skip).peekable();
    let Some(&(first_no, first)) = lines.peek() else {
        return Err(CliError::Data {
            path: label.to_string(),
            message: "no data lines".into(),
        });
    };
    let delimiter = Delimiter::detect(first);
    let first_fields = delimiter.split(first);
    let is_header = matches!(column, ColumnSelector::Name(_))
        || first_fields.iter().all(|c| parse_cell(c).is_none());
    let (idx, header) = match column {
        ColumnSelector::Index(i) => (
            i - 1,
            is_header
                .then(|| {
                    first_fields
                        .get(i - 1)
                        .map(|s| s.trim_matches('"').to_string())
                })
                .flatten(),
        ),
        ColumnSelector::Name(name) => {
            let pos = first_fields
                .iter()
                .position(|c| c.trim_matches('"') == name)
                .ok_or_else(|| CliError::Parse {
                    path: label.to_string(),
                    line: first_no,
                    message: format!("header has no column named {name:?}"),
                })?;
            (pos, Some(name.clone()))
        }
    };
    if is_header {
        lines.next();
    }
    let mut values = Vec::new();
    for (no, line) in lines {
        let fields = delimiter.split(line);
        let cell = fields.get(idx).ok_or_else(|| CliError::Parse {
            path: label.to_string(),
            line: no,
            message: format!(
                "line has {} fields, column {} requested",
                fields.len(),
                idx + 1
            ),
        })?;
        let v = parse_cell(cell).ok_or_else(|| CliError::Parse {
            path: label.to_string(),
            line: no,
            message: format!("non-numeric value {cell:?} in column {}", idx + 1),
        })?;
        values.push(v);
    }
    Ok(RawColumn {
        values,
        delimiter,
        header,
    })
}

/// Every numeric row of a delimited file, for tables with several columns.
pub fn parse_rows(text: &str, label: &str, width: usize) -> Result<Vec<Vec<f64>>> {
    let mut lines = content_lines(text, 0).peekable();
    let Some(&(_, first)) = lines.peek() else {
        return Err(CliError::Data {
            path: label.to_string(),
            message: "no data lines".into(),
        });
    };
    let delimiter = Delimiter::detect(first);
    if delimiter
        .split(first)
        .iter()
        .all(|c| parse_cell(c).is_none())
    {
        lines.next();
    }
    lines
        .map(|(no, line)| {
            let fields = delimiter.split(line);
            if fields.len() != width {
                return Err(CliError::Parse {
                    path: label.to_string(),
                    line: no,
                    message: format!("expected {width} fields, found {}", fields.len()),
                });
            }
            fields
                .iter()
                .map(|c| {
                    parse_cell(c).ok_or_else(|| CliError::Parse {
                        path: label.to_string(),
                        line: no,
                        message: format!("non-numeric value {c:?}"),
                    })
                })
                .collect()
        })
        .collect()
}

/// Differencing, then jitter, then demeaning.
pub fn preprocess(mut values: Vec<f64>, opts: &IngestOptions) -> (Vec<f64>, Provenance) {
    if opts.difference {
        values = values.windows(2).map(|w| w[1] - w[0]).collect();
    }
    if opts.jitter_sd > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let noise = Normal::new(0.0, opts.jitter_sd).expect("finite non-negative sd");
        for v in &mut values {
            *v += noise.sample(&mut rng);
        }
    }
    if opts.demean && !values.is_empty() {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        for v in &mut values {
            *v -= mean;
        }
    }
    let meta = Provenance {
        demeaned: opts.demean,
        differenced: opts.difference,
        jitter_sd: opts.jitter_sd,
    };
    (values, meta)
}
