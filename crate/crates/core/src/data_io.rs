//! Input parsers and result emitters.
//!
//! Inputs:
//! * balance snapshots, two-column CSV `holder,balance` with an optional
//!   header row;
//! * calibration inputs, `key = value` per line;
//! * transaction-size samples, one number per line.
//!
//! Blank lines and lines starting with `#` are ignored in the line-oriented
//! formats. LF and CRLF are both accepted; output always uses LF.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};

use crate::calibration::CalibrationInputs;
use crate::distribution_analytics::{BalanceSnapshot, Holding};
use crate::error::{Error, Result};

/// Minimum significant digits written for every float in machine formats.
pub const MIN_SIGNIFICANT_DIGITS: usize = 12;

/// Calibration keys in file order.
pub const CALIBRATION_KEYS: [&str; 7] = [
    "tx_per_day",
    "volume_per_day",
    "fees_per_day",
    "supply",
    "blocks_per_day",
    "annual_discount",
    "reward_per_block",
];

pub fn parse_snapshot<R: Read>(reader: R, label: &str) -> Result<BalanceSnapshot> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);

    let mut entries = Vec::new();
    let mut first = true;
    let mut last_line = 0;
    for record in csv.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(last_line + 1, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(last_line + 1, |p| p.line());
        last_line = line;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields `holder,balance`, found {}", record.len()),
            });
        }
        let is_header = first && record[1].parse::<f64>().is_err();
        first = false;
        if is_header {
            continue;
        }
        let balance = parse_number(&record[1]).map_err(|message| Error::Parse { line, message })?;
        if balance < 0.0 {
            return Err(Error::Parse {
                line,
                message: format!("negative balance {balance}"),
            });
        }
        entries.push(Holding {
            holder: record[0].to_string(),
            balance,
        });
    }
    if entries.is_empty() {
        return Err(Error::Parse {
            line: last_line.max(1),
            message: "snapshot has no entries".into(),
        });
    }
    BalanceSnapshot::new(label, entries)
}

/// Where a calibration input came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputSource {
    Default,
    File,
    Flag,
}

impl InputSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            InputSource::Default => "default",
            InputSource::File => "file",
            InputSource::Flag => "flag",
        }
    }
}

/// Calibration inputs with the source of every field.
#[derive(Debug, Clone, PartialEq)]
pub struct SourcedInputs {
    pub inputs: CalibrationInputs,
    sources: [InputSource; 7],
}

impl Default for SourcedInputs {
    fn default() -> Self {
        SourcedInputs {
            inputs: CalibrationInputs::PAPER_2015,
            sources: [InputSource::Default; 7],
        }
    }
}

impl SourcedInputs {
    pub fn source(&self, key: &str) -> Option<InputSource> {
        key_index(key).map(|i| self.sources[i])
    }

    /// `(key, value, source)` in [`CALIBRATION_KEYS`] order.
    pub fn entries(&self) -> Vec<(&'static str, f64, InputSource)> {
        CALIBRATION_KEYS
            .iter()
            .enumerate()
            .map(|(i, &k)| (k, get_field(&self.inputs, k), self.sources[i]))
            .collect()
    }

    /// Sets `key` from its text form and records `source`.
    pub fn set(&mut self, key: &str, value: &str, source: InputSource) -> Result<()> {
        let idx = key_index(key).ok_or_else(|| Error::UnknownKey(key.to_string()))?;
        let invalid = |message: String| Error::InvalidValue {
            key: key.to_string(),
            message,
        };
        if key == "blocks_per_day" {
            let n: u32 = value
                .trim()
                .parse()
                .map_err(|e| invalid(format!("`{value}`: {e}")))?;
            self.inputs.blocks_per_day = n;
        } else {
            let x = parse_number(value).map_err(invalid)?;
            set_field(&mut self.inputs, key, x);
        }
        self.sources[idx] = source;
        Ok(())
    }
}

fn key_index(key: &str) -> Option<usize> {
    CALIBRATION_KEYS.iter().position(|&k| k == key)
}

fn get_field(inputs: &CalibrationInputs, key: &str) -> f64 {
    match key {
        "tx_per_day" => inputs.tx_per_day,
        "volume_per_day" => inputs.volume_per_day,
        "fees_per_day" => inputs.fees_per_day,
        "supply" => inputs.supply,
        "blocks_per_day" => f64::from(inputs.blocks_per_day),
        "annual_discount" => inputs.annual_discount,
        "reward_per_block" => inputs.reward_per_block,
        _ => unreachable!("unknown calibration key {key}"),
    }
}

fn set_field(inputs: &mut CalibrationInputs, key: &str, value: f64) {
    match key {
        "tx_per_day" => inputs.tx_per_day = value,
        "volume_per_day" => inputs.volume_per_day = value,
        "fees_per_day" => inputs.fees_per_day = value,
        "supply" => inputs.supply = value,
        "annual_discount" => inputs.annual_discount = value,
        "reward_per_block" => inputs.reward_per_block = value,
        _ => unreachable!("unknown float calibration key {key}"),
    }
}

/// Reads `key = value` lines. Missing keys keep their 2015 defaults.
pub fn parse_calibration_inputs<R: Read>(reader: R) -> Result<SourcedInputs> {
    let mut sourced = SourcedInputs::default();
    let mut seen = [false; 7];
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let (key, value) = text.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected `key = value`, found `{text}`"),
        })?;
        let key = key.trim();
        let slot = key_index(key).ok_or_else(|| Error::UnknownKey(key.to_string()))?;
        if seen[slot] {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
        seen[slot] = true;
        sourced.set(key, value.trim(), InputSource::File)?;
    }
    Ok(sourced)
}

/// One positive transaction size per line.
pub fn parse_shock_samples<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut samples = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let x = parse_number(text).map_err(|message| Error::Parse {
            line: line_no,
            message,
        })?;
        if !(x > 0.0) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("transaction size must be positive, got {x}"),
            });
        }
        samples.push(x);
    }
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(samples)
}

fn parse_number(text: &str) -> std::result::Result<f64, String> {
    let text = text.trim();
    match text.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        Ok(_) => Err(format!("non-finite number `{text}`")),
        Err(_) => Err(format!("not a number: `{text}`")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::Int(x as i64)
    }
}

impl From<u32> for Value {
    fn from(x: u32) -> Self {
        Value::Int(i64::from(x))
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

impl Value {
    fn machine(&self) -> String {
        match self {
            Value::Float(x) => format_float(*x),
            Value::Int(n) => n.to_string(),
            Value::Text(s) => s.clone(),
        }
    }

    fn human(&self) -> String {
        match self {
            Value::Float(x) => x.to_string(),
            Value::Int(n) => n.to_string(),
            Value::Text(s) => s.clone(),
        }
    }
}

/// Column-oriented rows for plotting.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Metadata {
    pub seed: Option<u64>,
    pub version: String,
    /// Unix seconds; only written in the human-readable table.
    pub timestamp: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultDocument {
    pub command: String,
    pub inputs: Vec<(String, Value)>,
    pub outputs: Vec<(String, Value)>,
    pub series: Option<Series>,
    pub metadata: Metadata,
}

impl ResultDocument {
    pub fn new(command: impl Into<String>) -> Self {
        ResultDocument {
            command: command.into(),
            metadata: Metadata {
                version: env!("CARGO_PKG_VERSION").to_string(),
                ..Metadata::default()
            },
            ..ResultDocument::default()
        }
    }

    pub fn input(&mut self, key: impl Into<String>, value: impl Into<Value>) -> &mut Self {
        self.inputs.push((key.into(), value.into()));
        self
    }

    pub fn output(&mut self, key: impl Into<String>, value: impl Into<Value>) -> &mut Self {
        self.outputs.push((key.into(), value.into()));
        self
    }

    pub fn get_output(&self, key: &str) -> Option<&Value> {
        self.outputs.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Table,
    KeyValue,
    Csv,
}

/// Shortest round-trip decimal in scientific notation, padded with zeros to
/// at least [`MIN_SIGNIFICANT_DIGITS`] significant digits.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let shortest = format!("{x:e}");
    let (mantissa, exponent) = shortest.split_once('e').expect("`{:e}` always has an exponent");
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    let mut frac = frac_part.to_string();
    while int_part.len() + frac.len() < MIN_SIGNIFICANT_DIGITS {
        frac.push('0');
    }
    format!("{sign}{int_part}.{frac}e{exponent}")
}

pub fn emit(doc: &ResultDocument, format: Format) -> String {
    match format {
        Format::Table => emit_table(doc),
        Format::KeyValue => emit_keyvalue(doc),
        Format::Csv => emit_csv(doc),
    }
}

fn emit_table(doc: &ResultDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", doc.command);
    let width = doc
        .inputs
        .iter()
        .chain(&doc.outputs)
        .map(|(k, _)| k.len())
        .max()
        .unwrap_or(0);
    for (title, pairs) in [("inputs", &doc.inputs), ("outputs", &doc.outputs)] {
        if pairs.is_empty() {
            continue;
        }
        let _ = writeln!(out, "\n{title}");
        for (k, v) in pairs {
            let _ = writeln!(out, "  {k:<width$}  {}", v.human());
        }
    }
    if let Some(series) = &doc.series {
        let _ = writeln!(out, "\nseries ({} rows)", series.rows.len());
        let cells: Vec<Vec<String>> = series
            .rows
            .iter()
            .map(|r| r.iter().map(Value::human).collect())
            .collect();
        let widths: Vec<usize> = (0..series.columns.len())
            .map(|c| {
                cells
                    .iter()
                    .filter_map(|r| r.get(c).map(String::len))
                    .chain([series.columns[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |row: &[String]| {
            let joined: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:>w$}"))
                .collect();
            format!("  {}", joined.join("  "))
        };
        let _ = writeln!(out, "{}", line(&series.columns));
        for row in &cells {
            let _ = writeln!(out, "{}", line(row));
        }
    }
    let _ = writeln!(out, "\nmetadata");
    if let Some(seed) = doc.metadata.seed {
        let _ = writeln!(out, "  seed       {seed}");
    }
    let _ = writeln!(out, "  version    {}", doc.metadata.version);
    if let Some(ts) = doc.metadata.timestamp {
        let _ = writeln!(out, "  timestamp  {ts}");
    }
    out
}

fn emit_keyvalue(doc: &ResultDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "command={}", doc.command);
    for (k, v) in &doc.inputs {
        let _ = writeln!(out, "input.{k}={}", v.machine());
    }
    for (k, v) in &doc.outputs {
        let _ = writeln!(out, "output.{k}={}", v.machine());
    }
    if let Some(series) = &doc.series {
        let _ = writeln!(out, "series.columns={}", series.columns.join(","));
        for (i, row) in series.rows.iter().enumerate() {
            for (col, v) in series.columns.iter().zip(row) {
                let _ = writeln!(out, "series.{i}.{col}={}", v.machine());
            }
        }
    }
    if let Some(seed) = doc.metadata.seed {
        let _ = writeln!(out, "meta.seed={seed}");
    }
    let _ = writeln!(out, "meta.version={}", doc.metadata.version);
    out
}

fn emit_csv(doc: &ResultDocument) -> String {
    let mut out = String::new();
    match &doc.series {
        Some(series) => {
            let _ = writeln!(out, "{}", series.columns.join(","));
            for row in &series.rows {
                let cells: Vec<String> = row.iter().map(Value::machine).collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
        }
        None => {
            let _ = writeln!(out, "key,value");
            for (k, v) in &doc.outputs {
                let _ = writeln!(out, "{k},{}", v.machine());
            }
        }
    }
    out
}

/// Splits KEYVALUE output back into `(key, value)` pairs.
pub fn parse_keyvalue(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::Parse {
                    line: i as u64 + 1,
                    message: format!("expected `key=value`, found `{l}`"),
                })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_rows_in_file_order() {
        let s = parse_snapshot("a,1\nb,2".as_bytes(), "t").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.entries()[0].holder, "a");
        assert_eq!(s.entries()[1].balance, 2.0);
        assert_eq!(s.label, "t");
    }

    #[test]
    fn snapshot_header_skipped() {
        let s = parse_snapshot("holder,balance\r\nx,0.5\r\ny,0\r\n".as_bytes(), "").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.entries()[1].balance, 0.0);
    }

    #[test]
    fn snapshot_errors_name_the_line() {
        assert!(matches!(
            parse_snapshot("a,-1".as_bytes(), ""),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_snapshot("holder,balance\na,1\nb,lots".as_bytes(), ""),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_snapshot("a,1\nb,2,3".as_bytes(), ""),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(parse_snapshot("".as_bytes(), ""), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_snapshot("holder,balance\n".as_bytes(), ""),
            Err(Error::Parse { .. })
        ));
        assert!(parse_snapshot("a,NaN".as_bytes(), "").is_err());
        assert!(parse_snapshot(&b"a,1\n\xff\xfe,2"[..], "").is_err());
    }

    #[test]
    fn calibration_file_defaults_and_overrides() {
        let s = parse_calibration_inputs("".as_bytes()).unwrap();
        assert_eq!(s.inputs, CalibrationInputs::PAPER_2015);
        assert!(s.entries().iter().all(|e| e.2 == InputSource::Default));

        let s = parse_calibration_inputs("# 2015\nsupply = 1000000\n".as_bytes()).unwrap();
        assert_eq!(s.inputs.supply, 1_000_000.0);
        assert_eq!(s.inputs.tx_per_day, 122_129.7534);
        assert_eq!(s.source("supply"), Some(InputSource::File));
        assert_eq!(s.source("tx_per_day"), Some(InputSource::Default));

        let s = parse_calibration_inputs("blocks_per_day=96\r\n".as_bytes()).unwrap();
        assert_eq!(s.inputs.blocks_per_day, 96);
    }

    #[test]
    fn calibration_file_errors() {
        assert_eq!(
            parse_calibration_inputs("suply = 1".as_bytes()),
            Err(Error::UnknownKey("suply".into()))
        );
        assert!(matches!(
            parse_calibration_inputs("supply = lots".as_bytes()),
            Err(Error::InvalidValue { key, .. }) if key == "supply"
        ));
        assert!(matches!(
            parse_calibration_inputs("blocks_per_day = 1.5".as_bytes()),
            Err(Error::InvalidValue { .. })
        ));
        assert!(matches!(
            parse_calibration_inputs("supply".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_calibration_inputs("supply=1\nsupply=2".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn shock_samples() {
        assert_eq!(
            parse_shock_samples("1.5\n\n# c\n2\n".as_bytes()).unwrap(),
            vec![1.5, 2.0]
        );
        assert!(matches!(
            parse_shock_samples("1\n0\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert_eq!(parse_shock_samples("".as_bytes()), Err(Error::EmptyInput));
    }

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(0.1), "1.00000000000e-1");
        assert_eq!(format_float(-2.5), "-2.50000000000e0");
        assert_eq!(format_float(0.0), "0.00000000000e0");
        assert_eq!(format_float(9.136_821_879_277_744e-4), "9.136821879277744e-4");
        assert_eq!(format_float(1.0 / 3.0).parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    fn sample_doc() -> ResultDocument {
        let mut doc = ResultDocument::new("wealth lorenz");
        doc.input("snapshot", "x.csv").output("gini", 0.25).output("n", 4u64);
        doc.series = Some(Series {
            columns: vec!["population_share".into(), "wealth_share".into()],
            rows: vec![
                vec![0.0.into(), 0.0.into()],
                vec![0.5.into(), 0.3.into()],
                vec![1.0.into(), 1.0.into()],
            ],
        });
        doc.metadata.seed = Some(42);
        doc.metadata.timestamp = Some(1_700_000_000);
        doc
    }

    #[test]
    fn csv_series_has_header() {
        let csv = emit(&sample_doc(), Format::Csv);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("population_share,wealth_share"));
        assert_eq!(lines.count(), 3);
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn keyvalue_roundtrip_and_no_timestamp() {
        let doc = sample_doc();
        let text = emit(&doc, Format::KeyValue);
        assert!(!text.contains("1700000000"));
        let pairs = parse_keyvalue(&text).unwrap();
        let get = |k: &str| pairs.iter().find(|(key, _)| key == k).unwrap().1.clone();
        assert_eq!(get("command"), "wealth lorenz");
        assert_eq!(get("output.gini").parse::<f64>().unwrap(), 0.25);
        assert_eq!(get("output.n"), "4");
        assert_eq!(get("series.1.wealth_share").parse::<f64>().unwrap(), 0.3);
        assert_eq!(get("meta.seed"), "42");
    }

    #[test]
    fn table_is_readable() {
        let table = emit(&sample_doc(), Format::Table);
        assert!(table.starts_with("wealth lorenz\n"));
        assert!(table.contains("gini"));
        assert!(table.contains("timestamp  1700000000"));
    }
}
