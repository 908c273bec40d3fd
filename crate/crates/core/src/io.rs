//! CSV and JSON-lines input and output of point sets and derived tables.
//!
//! Floats are written in the shortest decimal form that parses back to the
//! same bits.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::OutputFormat;
use crate::error::{Error, Result};
use crate::extraction::{CornerSet, MarkedLifetime, StepPath};
use crate::pointset::{GroundPointSet, PlanarPoint};

/// One cell of an output table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Field {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::Float(v) => format!("{v}"),
            Field::Int(v) => v.to_string(),
            Field::Bool(v) => v.to_string(),
            Field::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Field::Float(v) => serde_json::Number::from_f64(*v)
                .map(serde_json::Value::Number)
                .unwrap_or_else(|| serde_json::Value::String(format!("{v}"))),
            Field::Int(v) => serde_json::Value::from(*v),
            Field::Bool(v) => serde_json::Value::Bool(*v),
            Field::Text(s) => serde_json::Value::String(s.clone()),
        }
    }
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Float(v)
    }
}

impl From<u64> for Field {
    fn from(v: u64) -> Self {
        Field::Int(v)
    }
}

impl From<bool> for Field {
    fn from(v: bool) -> Self {
        Field::Bool(v)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Text(v.to_string())
    }
}

/// A named table with a fixed header.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Field>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Field>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to(&self, out: impl Write, format: OutputFormat) -> Result<()> {
        match format {
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.header)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Field::render))?;
                }
                w.flush()?;
            }
            OutputFormat::Jsonl => {
                let mut out = BufWriter::new(out);
                for row in &self.rows {
                    let obj: serde_json::Map<String, serde_json::Value> = self
                        .header
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Field::json))
                        .collect();
                    serde_json::to_writer(&mut out, &obj)?;
                    out.write_all(b"\n")?;
                }
                out.flush()?;
            }
        }
        Ok(())
    }

    pub fn write_file(&self, path: &Path, format: OutputFormat) -> Result<()> {
        self.write_to(File::create(path)?, format)
    }
}

pub fn points_table(points: &[PlanarPoint]) -> Table {
    let mut t = Table::new("points", &["t", "x"]);
    for p in points {
        t.push(vec![p.t.into(), p.x.into()]);
    }
    t
}

pub fn ground_table(gs: &GroundPointSet) -> Table {
    let mut t = Table::new("ground", &["u"]);
    for &u in gs.points() {
        t.push(vec![u.into()]);
    }
    t
}

pub fn corners_table(cs: &CornerSet) -> Table {
    let mut t = Table::new("corners", &["t", "x", "clause", "is_record"]);
    for c in &cs.corners {
        t.push(vec![
            c.point.t.into(),
            c.point.x.into(),
            Field::Text(c.clause.to_string()),
            c.is_record().into(),
        ]);
    }
    t
}

pub fn path_table(path: &StepPath) -> Table {
    let mut t = Table::new("path", &["jump_time", "value"]);
    for &(time, value) in &path.jumps {
        t.push(vec![time.into(), value.into()]);
    }
    t
}

pub fn lifetimes_table(lts: &[MarkedLifetime]) -> Table {
    let mut t = Table::new("lifetimes", &["s", "x"]);
    for l in lts {
        t.push(vec![l.s.into(), l.x.into()]);
    }
    t
}

#[derive(Deserialize)]
struct PointRow {
    t: f64,
    x: f64,
}

/// Reads a `t,x` CSV. Rows must be strictly increasing in time; errors
/// carry the 1-based data row.
pub fn read_points_csv(input: impl Read) -> Result<Vec<PlanarPoint>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "x" {
        return Err(Error::Validation {
            row: 0,
            message: format!("expected header 't,x', found '{}'", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut points: Vec<PlanarPoint> = Vec::new();
    for (i, rec) in rdr.deserialize::<PointRow>().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Validation {
            row,
            message: format!("unparsable row: {e}"),
        })?;
        let p = PlanarPoint::new(rec.t, rec.x).map_err(|e| Error::Validation {
            row,
            message: e.to_string(),
        })?;
        if let Some(prev) = points.last() {
            if p.t == prev.t {
                return Err(Error::Validation {
                    row,
                    message: format!("duplicate time coordinate {}", p.t),
                });
            }
            if p.t < prev.t {
                return Err(Error::Validation {
                    row,
                    message: "rows must be in increasing time order".into(),
                });
            }
        }
        points.push(p);
    }
    Ok(points)
}

pub fn read_points_file(path: &Path) -> Result<Vec<PlanarPoint>> {
    read_points_csv(File::open(path)?)
}
