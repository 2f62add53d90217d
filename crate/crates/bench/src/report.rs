//! Run reports and their CSV / JSON / plot-data renderings.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

pub const CSV_HEADER: [&str; 6] = ["quantity", "theory", "measured", "tol", "pass", "relation"];

/// How `measured` is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|measured - theory| <= tol`.
    Within,
    /// `measured <= tol`.
    AtMost,
    /// `measured >= tol`.
    AtLeast,
    /// Informational; always passes.
    Reported,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Within => "within",
            Relation::AtMost => "at_most",
            Relation::AtLeast => "at_least",
            Relation::Reported => "reported",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "within" => Ok(Relation::Within),
            "at_most" => Ok(Relation::AtMost),
            "at_least" => Ok(Relation::AtLeast),
            "reported" => Ok(Relation::Reported),
            _ => Err(BenchError::Format(format!("unknown relation '{s}'"))),
        }
    }
}

/// Non-finite floats are written as strings so JSON stays valid.
mod float_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&super::fmt_float(*v))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) => super::parse_float(&t).map_err(serde::de::Error::custom),
        }
    }
}

mod opt_float_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => super::float_repr::serialize(x, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "super::float_repr")] f64);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn parse_float(s: &str) -> std::result::Result<f64, String> {
    match s {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s.parse().map_err(|_| format!("not a number: '{s}'")),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    pub quantity: String,
    #[serde(with = "opt_float_repr")]
    pub theory: Option<f64>,
    #[serde(with = "float_repr")]
    pub measured: f64,
    #[serde(with = "opt_float_repr")]
    pub tol: Option<f64>,
    pub pass: bool,
    pub relation: Relation,
}

fn same_float(a: f64, b: f64) -> bool {
    a == b || (a.is_nan() && b.is_nan())
}

impl PartialEq for ReportRow {
    fn eq(&self, o: &Self) -> bool {
        let opt = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => same_float(x, y),
            (None, None) => true,
            _ => false,
        };
        self.quantity == o.quantity
            && opt(self.theory, o.theory)
            && same_float(self.measured, o.measured)
            && opt(self.tol, o.tol)
            && self.pass == o.pass
            && self.relation == o.relation
    }
}

impl ReportRow {
    /// `|measured - theory| <= tol`.
    pub fn within(quantity: impl Into<String>, theory: f64, measured: f64, tol: f64) -> Self {
        let pass = (measured - theory).abs() <= tol;
        Self { quantity: quantity.into(), theory: Some(theory), measured, tol: Some(tol), pass, relation: Relation::Within }
    }

    /// `measured <= bound`; `theory` is the value the bound protects, when there is one.
    pub fn at_most(quantity: impl Into<String>, theory: Option<f64>, measured: f64, bound: f64) -> Self {
        let pass = measured <= bound;
        Self { quantity: quantity.into(), theory, measured, tol: Some(bound), pass, relation: Relation::AtMost }
    }

    pub fn at_least(quantity: impl Into<String>, theory: Option<f64>, measured: f64, bound: f64) -> Self {
        let pass = measured >= bound;
        Self { quantity: quantity.into(), theory, measured, tol: Some(bound), pass, relation: Relation::AtLeast }
    }

    pub fn reported(quantity: impl Into<String>, theory: Option<f64>, measured: f64) -> Self {
        Self { quantity: quantity.into(), theory, measured, tol: None, pass: true, relation: Relation::Reported }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub grid: String,
    pub version: String,
    /// Seconds since the Unix epoch; the only field that varies between identical runs.
    pub timestamp: u64,
}

/// A figure's data: `(x, y)` pairs written as one two-column file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

impl PartialEq for Series {
    fn eq(&self, o: &Self) -> bool {
        self.name == o.name
            && self.x_label == o.x_label
            && self.y_label == o.y_label
            && self.points.len() == o.points.len()
            && self.points.iter().zip(&o.points).all(|(a, b)| same_float(a.0, b.0) && same_float(a.1, b.1))
    }
}

impl Series {
    pub fn new(name: impl Into<String>, x_label: &str, y_label: &str, points: Vec<(f64, f64)>) -> Self {
        Self { name: name.into(), x_label: x_label.into(), y_label: y_label.into(), points }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub provenance: Provenance,
    pub rows: Vec<ReportRow>,
    pub series: Vec<Series>,
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn new(provenance: Provenance) -> Self {
        Self { provenance, rows: Vec::new(), series: Vec::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, row: ReportRow) {
        self.rows.push(row);
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<&ReportRow> {
        self.rows.iter().filter(|r| !r.pass).collect()
    }

    pub fn row(&self, quantity: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }

    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    /// Appends another report's rows, series and notes, prefixing quantities and series names.
    pub fn absorb(&mut self, prefix: &str, other: RunReport) {
        for mut r in other.rows {
            r.quantity = format!("{prefix}{}", r.quantity);
            self.rows.push(r);
        }
        for mut s in other.series {
            s.name = format!("{prefix}{}", s.name);
            self.series.push(s);
        }
        self.notes.extend(other.notes);
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.provenance;
        writeln!(f, "{} (seed {}, grid {}, config {})", p.experiment, p.seed, p.grid, &p.config_hash[..12.min(p.config_hash.len())])?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "-".into());
        for r in &self.rows {
            writeln!(
                f,
                "  {:<4} {:<44} measured {:>14.6e}  theory {:>14}  tol {:>12} ({})",
                if r.pass { "ok" } else { "FAIL" },
                r.quantity,
                r.measured,
                opt(r.theory),
                opt(r.tol),
                r.relation.as_str()
            )?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    PlotData,
}

impl Format {
    pub const ALL: [Format; 3] = [Format::Csv, Format::Json, Format::PlotData];
}

pub fn csv_path(dir: &Path) -> PathBuf {
    dir.join("report.csv")
}

pub fn json_path(dir: &Path) -> PathBuf {
    dir.join("report.json")
}

pub fn plotdata_path(dir: &Path, series: &str) -> PathBuf {
    dir.join("plotdata").join(format!("{series}.dat"))
}

fn csv_err(e: csv::Error) -> BenchError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => BenchError::Io(io.to_string()),
        other => BenchError::Format(format!("{other:?}")),
    }
}

/// Writes the requested formats under `dir` and returns the paths written.
pub fn emit_report(report: &RunReport, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for fmt in formats {
        match fmt {
            Format::Csv => {
                let path = csv_path(dir);
                let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
                w.write_record(CSV_HEADER).map_err(csv_err)?;
                let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
                for r in &report.rows {
                    w.write_record([
                        r.quantity.clone(),
                        opt(r.theory),
                        fmt_float(r.measured),
                        opt(r.tol),
                        r.pass.to_string(),
                        r.relation.as_str().to_string(),
                    ])
                    .map_err(csv_err)?;
                }
                w.flush()?;
                written.push(path);
            }
            Format::Json => {
                let path = json_path(dir);
                let text = serde_json::to_string_pretty(report).map_err(|e| BenchError::Format(e.to_string()))?;
                fs::write(&path, text + "\n")?;
                written.push(path);
            }
            Format::PlotData => {
                for s in &report.series {
                    let path = plotdata_path(dir, &s.name);
                    fs::create_dir_all(path.parent().expect("has parent"))?;
                    let body: String = s.points.iter().map(|(x, y)| format!("{} {}\n", fmt_float(*x), fmt_float(*y))).collect();
                    fs::write(&path, body)?;
                    written.push(path);
                }
            }
        }
    }
    Ok(written)
}

pub fn read_report_json(path: &Path) -> Result<RunReport> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| BenchError::Format(e.to_string()))
}

pub fn read_report_csv(path: &Path) -> Result<Vec<ReportRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(String::from).collect();
    if header != CSV_HEADER {
        return Err(BenchError::Format(format!("unexpected CSV header {header:?}")));
    }
    let opt = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            parse_float(s).map(Some).map_err(BenchError::Format)
        }
    };
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != CSV_HEADER.len() {
            return Err(BenchError::Format(format!("row has {} fields", rec.len())));
        }
        rows.push(ReportRow {
            quantity: rec[0].to_string(),
            theory: opt(&rec[1])?,
            measured: parse_float(&rec[2]).map_err(BenchError::Format)?,
            tol: opt(&rec[3])?,
            pass: rec[4].parse().map_err(|_| BenchError::Format(format!("bad pass flag '{}'", &rec[4])))?,
            relation: Relation::parse(&rec[5])?,
        });
    }
    Ok(rows)
}

pub fn read_plotdata(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut it = l.split_whitespace();
            match (it.next(), it.next(), it.next()) {
                (Some(a), Some(b), None) => Ok((
                    parse_float(a).map_err(BenchError::Format)?,
                    parse_float(b).map_err(BenchError::Format)?,
                )),
                _ => Err(BenchError::Format(format!("expected two columns: '{l}'"))),
            }
        })
        .collect()
}
