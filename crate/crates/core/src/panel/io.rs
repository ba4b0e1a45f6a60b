use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{PricePanel, RawSeries};
use crate::error::{Error, Result};

const DATE_FORMAT: &str = "%Y-%m-%d";

/// Layout of a price CSV.
///
/// * `wide`: header `date,<label1>,...,<labelN>`, one row per day, an empty
///   cell means the market was closed.
/// * `long`: header `date,label,close`, one row per observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PanelFormat {
    Wide,
    Long,
}

impl FromStr for PanelFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wide" => Ok(PanelFormat::Wide),
            "long" => Ok(PanelFormat::Long),
            other => Err(Error::InvalidParameter(format!(
                "unknown panel format `{other}` (expected wide or long)"
            ))),
        }
    }
}

impl fmt::Display for PanelFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PanelFormat::Wide => "wide",
            PanelFormat::Long => "long",
        })
    }
}

/// A close that was present in the file but could not be used.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadWarning {
    /// 1-based line number in the file (header is line 1).
    pub line: usize,
    pub label: String,
    pub date: NaiveDate,
    pub value: String,
    pub reason: &'static str,
}

impl fmt::Display for LoadWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}: dropped `{}` for {} on {} ({})",
            self.line, self.value, self.label, self.date, self.reason
        )
    }
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub series: Vec<RawSeries>,
    pub warnings: Vec<LoadWarning>,
}

pub fn load_raw(path: impl AsRef<Path>, format: PanelFormat) -> Result<Loaded> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        PanelFormat::Wide => read_wide(file),
        PanelFormat::Long => read_long(file),
    }
}

fn parse_date(s: &str, line: usize) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), DATE_FORMAT)
        .map_err(|_| Error::Parse(format!("line {line}: bad date `{s}`")))
}

/// Outcome of parsing one close cell.
enum Cell {
    Closed,
    Value(f64),
    Rejected(&'static str),
}

fn parse_close(s: &str) -> Cell {
    let s = s.trim();
    if s.is_empty() {
        return Cell::Closed;
    }
    match s.parse::<f64>() {
        Ok(v) if !v.is_finite() => Cell::Rejected("non-numeric close"),
        Ok(v) if v <= 0.0 => Cell::Rejected("non-positive close"),
        Ok(v) => Cell::Value(v),
        Err(_) => Cell::Rejected("non-numeric close"),
    }
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(reader)
}

fn finish(
    labels: Vec<String>,
    obs: Vec<Vec<(NaiveDate, f64)>>,
    warnings: Vec<LoadWarning>,
) -> Result<Loaded> {
    for w in &warnings {
        log::warn!("{w}");
    }
    if obs.iter().all(|o| o.is_empty()) {
        return Err(Error::NoSeries);
    }
    let series = labels
        .into_iter()
        .zip(obs)
        .map(|(label, o)| RawSeries::new(label, o))
        .collect::<Result<Vec<_>>>()?;
    Ok(Loaded { series, warnings })
}

pub fn read_wide<R: Read>(reader: R) -> Result<Loaded> {
    let mut rdr = csv_reader(reader);
    let header = rdr.headers()?.clone();
    if header.len() < 2 || !header[0].eq_ignore_ascii_case("date") {
        return Err(Error::Parse(
            "wide header must be `date,<label1>,...`".into(),
        ));
    }
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if let Some(dup) = first_duplicate(&labels) {
        return Err(Error::Parse(format!(
            "label `{dup}` appears twice in header"
        )));
    }
    let mut obs: Vec<Vec<(NaiveDate, f64)>> = vec![Vec::new(); labels.len()];
    let mut seen = HashMap::new();
    let mut warnings = Vec::new();
    for (row_no, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row_no + 2;
        let date = parse_date(&rec[0], line)?;
        if seen.insert(date, line).is_some() {
            // Every label with a value on both rows is duplicated; report the first.
            let label = labels
                .iter()
                .zip(rec.iter().skip(1))
                .find(|(_, c)| !c.trim().is_empty())
                .map(|(l, _)| l.clone())
                .unwrap_or_else(|| labels[0].clone());
            return Err(Error::DuplicateObservation { label, date });
        }
        for (i, cell) in rec.iter().skip(1).enumerate() {
            match parse_close(cell) {
                Cell::Closed => {}
                Cell::Value(v) => obs[i].push((date, v)),
                Cell::Rejected(reason) => warnings.push(LoadWarning {
                    line,
                    label: labels[i].clone(),
                    date,
                    value: cell.to_string(),
                    reason,
                }),
            }
        }
    }
    finish(labels, obs, warnings)
}

pub fn read_long<R: Read>(reader: R) -> Result<Loaded> {
    let mut rdr = csv_reader(reader);
    let header = rdr.headers()?.clone();
    let names: Vec<String> = header.iter().map(|h| h.to_ascii_lowercase()).collect();
    if names != ["date", "label", "close"] {
        return Err(Error::Parse(
            "long header must be `date,label,close`".into(),
        ));
    }
    let mut labels: Vec<String> = Vec::new();
    let mut slot: HashMap<String, usize> = HashMap::new();
    let mut obs: Vec<Vec<(NaiveDate, f64)>> = Vec::new();
    let mut seen: HashMap<(usize, NaiveDate), usize> = HashMap::new();
    let mut warnings = Vec::new();
    for (row_no, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row_no + 2;
        let date = parse_date(&rec[0], line)?;
        let label = rec[1].to_string();
        if label.is_empty() {
            return Err(Error::Parse(format!("line {line}: empty label")));
        }
        let i = *slot.entry(label.clone()).or_insert_with(|| {
            labels.push(label.clone());
            obs.push(Vec::new());
            labels.len() - 1
        });
        if seen.insert((i, date), line).is_some() {
            return Err(Error::DuplicateObservation { label, date });
        }
        match parse_close(&rec[2]) {
            Cell::Closed => {}
            Cell::Value(v) => obs[i].push((date, v)),
            Cell::Rejected(reason) => warnings.push(LoadWarning {
                line,
                label,
                date,
                value: rec[2].to_string(),
                reason,
            }),
        }
    }
    finish(labels, obs, warnings)
}

fn first_duplicate(labels: &[String]) -> Option<&str> {
    let mut seen = std::collections::HashSet::new();
    labels
        .iter()
        .find(|l| !seen.insert(l.as_str()))
        .map(|s| s.as_str())
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

fn wrap_io(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

/// Writes raw series in wide layout over the union of their dates.
pub fn write_raw_wide(series: &[RawSeries], mut out: impl Write) -> std::io::Result<()> {
    let mut dates: Vec<NaiveDate> = series
        .iter()
        .flat_map(|s| s.observations.iter().map(|(d, _)| *d))
        .collect();
    dates.sort();
    dates.dedup();
    write!(out, "date")?;
    for s in series {
        write!(out, ",{}", s.label)?;
    }
    writeln!(out)?;
    let mut cursors = vec![0usize; series.len()];
    for d in dates {
        write!(out, "{}", d.format(DATE_FORMAT))?;
        for (s, cur) in series.iter().zip(cursors.iter_mut()) {
            match s.observations.get(*cur) {
                Some((od, v)) if *od == d => {
                    write!(out, ",{v}")?;
                    *cur += 1;
                }
                _ => write!(out, ",")?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Writes raw series in long layout, grouped by label.
pub fn write_raw_long(series: &[RawSeries], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "date,label,close")?;
    for s in series {
        for (d, v) in &s.observations {
            writeln!(out, "{},{},{v}", d.format(DATE_FORMAT), s.label)?;
        }
    }
    Ok(())
}

/// Exports a panel as wide CSV at `path` plus the imputation flags in the
/// sibling `<stem>.mask.csv`. Returns the mask path.
pub fn write_panel(panel: &PricePanel, path: impl AsRef<Path>) -> Result<PathBuf> {
    let path = path.as_ref();
    let mask_path = mask_path_for(path);

    let mut out = std::io::BufWriter::new(create(path)?);
    let mut mask = std::io::BufWriter::new(create(&mask_path)?);
    let header = std::iter::once("date")
        .chain(panel.labels().iter().map(String::as_str))
        .collect::<Vec<_>>()
        .join(",");
    writeln!(out, "{header}").map_err(wrap_io(path))?;
    writeln!(mask, "{header}").map_err(wrap_io(&mask_path))?;
    for (t, d) in panel.dates().iter().enumerate() {
        let date = d.format(DATE_FORMAT).to_string();
        let prices = panel
            .prices()
            .iter()
            .map(|row| row[t].to_string())
            .collect::<Vec<_>>()
            .join(",");
        let flags = panel
            .fill_mask()
            .iter()
            .map(|row| if row[t] { "1" } else { "0" })
            .collect::<Vec<_>>()
            .join(",");
        writeln!(out, "{date},{prices}").map_err(wrap_io(path))?;
        writeln!(mask, "{date},{flags}").map_err(wrap_io(&mask_path))?;
    }
    out.flush().map_err(wrap_io(path))?;
    mask.flush().map_err(wrap_io(&mask_path))?;
    Ok(mask_path)
}

fn mask_path_for(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "panel".into());
    path.with_file_name(format!("{stem}.mask.csv"))
}
