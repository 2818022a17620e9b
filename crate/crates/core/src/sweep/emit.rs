//! CSV and JSON output of sweep results, and the matching readers.
//!
//! Both formats carry the same nine fields per row. Numbers are written in
//! Rust's shortest round-trip form, so reading a file back reproduces the
//! result bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Axis, AxisValue, Metric, RawValue, SweepError, SweepResult, SweepRow};
use crate::channel::CsirQuality;

pub const CSV_COLUMNS: [&str; 9] =
    ["axis_name", "axis_value", "scheme", "method", "metric", "target", "value", "std_err", "infeasible"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(OutputFormat::Csv),
            "json" => Some(OutputFormat::Json),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(format!("unknown format `{s}` (expected csv or json)")),
        }
    }
}

fn fmt_num(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> SweepError {
    SweepError::Parse(format!("row {line}: {msg}"))
}

/// JSON row; scalar axis values are written as numbers.
#[derive(Debug, Serialize, Deserialize)]
struct JsonRow {
    axis_name: String,
    axis_value: RawValue,
    scheme: String,
    method: String,
    metric: String,
    target: String,
    value: f64,
    std_err: Option<f64>,
    infeasible: bool,
}

impl From<&SweepRow> for JsonRow {
    fn from(r: &SweepRow) -> Self {
        let axis_value = match r.axis_value {
            AxisValue::Scalar(x) | AxisValue::Delta(CsirQuality::Estimated(x)) => RawValue::Num(x),
            other => RawValue::Text(other.to_string()),
        };
        Self {
            axis_name: r.axis.as_str().into(),
            axis_value,
            scheme: r.scheme.as_str().into(),
            method: r.method.as_str().into(),
            metric: r.metric.as_str().into(),
            target: r.target.as_str().into(),
            value: r.value,
            std_err: r.std_err,
            infeasible: r.infeasible,
        }
    }
}

fn build_row(
    line: usize,
    axis: &str,
    value_of: impl FnOnce(Axis) -> Result<AxisValue, SweepError>,
    labels: [&str; 4],
    value: f64,
    std_err: Option<f64>,
    infeasible: bool,
) -> Result<SweepRow, SweepError> {
    let axis: Axis = axis.parse().map_err(|e| parse_err(line, e))?;
    let [scheme, method, metric, target] = labels;
    Ok(SweepRow {
        axis,
        axis_value: value_of(axis).map_err(|e| parse_err(line, e))?,
        scheme: scheme.parse().map_err(|e| parse_err(line, e))?,
        method: method.parse().map_err(|e| parse_err(line, e))?,
        metric: metric.parse::<Metric>().map_err(|e| parse_err(line, e))?,
        target: target.parse().map_err(|e| parse_err(line, e))?,
        value,
        std_err,
        infeasible,
    })
}

pub fn write_csv<W: Write>(result: &SweepResult, w: W) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_COLUMNS)?;
    for r in &result.rows {
        out.write_record([
            r.axis.as_str(),
            &r.axis_value.to_string(),
            r.scheme.as_str(),
            r.method.as_str(),
            r.metric.as_str(),
            r.target.as_str(),
            &fmt_num(r.value),
            &r.std_err.map(fmt_num).unwrap_or_default(),
            if r.infeasible { "true" } else { "false" },
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(result: &SweepResult, w: W) -> Result<(), serde_json::Error> {
    let rows: Vec<JsonRow> = result.rows.iter().map(JsonRow::from).collect();
    serde_json::to_writer_pretty(w, &rows)
}

pub fn read_csv<R: Read>(r: R) -> Result<SweepResult, SweepError> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers().map_err(|e| SweepError::Parse(e.to_string()))?;
    if header.iter().ne(CSV_COLUMNS) {
        return Err(SweepError::Parse(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| parse_err(line, e))?;
        let num = |s: &str| s.parse::<f64>().map_err(|e| parse_err(line, format!("`{s}`: {e}")));
        let std_err = match &rec[7] {
            "" => None,
            s => Some(num(s)?),
        };
        let infeasible = rec[8].parse::<bool>().map_err(|e| parse_err(line, e))?;
        rows.push(build_row(
            line,
            &rec[0],
            |axis| AxisValue::parse(axis, &rec[1]),
            [&rec[2], &rec[3], &rec[4], &rec[5]],
            num(&rec[6])?,
            std_err,
            infeasible,
        )?);
    }
    Ok(SweepResult { rows })
}

pub fn read_json<R: Read>(r: R) -> Result<SweepResult, SweepError> {
    let raw: Vec<JsonRow> = serde_json::from_reader(r).map_err(|e| SweepError::Parse(e.to_string()))?;
    let rows = raw
        .into_iter()
        .enumerate()
        .map(|(i, j)| {
            build_row(
                i + 1,
                &j.axis_name,
                |axis| j.axis_value.to_axis_value(axis),
                [&j.scheme, &j.method, &j.metric, &j.target],
                j.value,
                j.std_err,
                j.infeasible,
            )
        })
        .collect::<Result<_, _>>()?;
    Ok(SweepResult { rows })
}

/// Writes `result` to `path`; I/O failures name the path.
pub fn emit(result: &SweepResult, format: OutputFormat, path: &Path) -> Result<(), SweepError> {
    let io = |source| SweepError::Io { path: path.to_path_buf(), source };
    let file = File::create(path).map_err(io)?;
    let mut w = BufWriter::new(file);
    match format {
        OutputFormat::Csv => write_csv(result, &mut w).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => io(source),
            other => SweepError::Parse(format!("{other:?}")),
        })?,
        OutputFormat::Json => write_json(result, &mut w).map_err(|e| io(e.into()))?,
    }
    w.flush().map_err(io)
}

pub fn load_result(path: &Path, format: OutputFormat) -> Result<SweepResult, SweepError> {
    let file = File::open(path).map_err(|source| SweepError::Io { path: path.to_path_buf(), source })?;
    let r = BufReader::new(file);
    match format {
        OutputFormat::Csv => read_csv(r),
        OutputFormat::Json => read_json(r),
    }
    .map_err(|e| e.with_path(path))
}

/// `dir/stem.ext` → `dir/stem.label.ext`.
pub fn series_path(path: &Path, label: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{label}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{label}"),
    };
    path.with_file_name(name)
}
