use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::infinite;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub r: f64,
    #[serde(with = "crate::infinite")]
    pub e: f64,
    /// Optimizers and flags for this point, written to the `params_json` column.
    pub params: Map<String, Value>,
}

/// Sampled (R, E) pairs of one bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub bound_name: String,
    pub points: Vec<CurvePoint>,
    /// Solver settings shared by all points.
    pub params: BTreeMap<String, Value>,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    #[serde(rename = "R")]
    r: String,
    #[serde(rename = "E")]
    e: String,
    bound: String,
    params_json: String,
}

impl BoundCurve {
    pub fn new(bound_name: impl Into<String>) -> Self {
        BoundCurve { bound_name: bound_name.into(), points: Vec::new(), params: BTreeMap::new() }
    }

    pub fn push(&mut self, r: f64, e: f64, params: Map<String, Value>) {
        self.points.push(CurvePoint { r, e, params });
    }

    pub fn rates(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.r).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.e).collect()
    }

    /// Rates finite and strictly increasing.
    pub fn validate(&self) -> Result<()> {
        for (i, w) in self.points.windows(2).enumerate() {
            if !(w[1].r > w[0].r) {
                return Err(Error::Format(format!("rates not strictly increasing at point {}", i + 1)));
            }
        }
        match self.points.iter().find(|p| !p.r.is_finite()) {
            Some(p) => Err(Error::Format(format!("non-finite rate {}", p.r))),
            None => Ok(()),
        }
    }

    /// E non-increasing along the curve within `tol`.
    pub fn is_non_increasing(&self, tol: f64) -> bool {
        self.points.windows(2).all(|w| w[1].e <= w[0].e + tol || w[0].e.is_infinite())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for p in &self.points {
            w.serialize(CsvRow {
                r: infinite::format(p.r),
                e: infinite::format(p.e),
                bound: self.bound_name.clone(),
                params_json: Value::Object(p.params.clone()).to_string(),
            })
            .map_err(csv_error)?;
        }
        if self.points.is_empty() {
            w.write_record(["R", "E", "bound", "params_json"]).map_err(csv_error)?;
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))
    }

    /// Reads the curves of a CSV file, one per distinct `bound` label, in order of first appearance.
    pub fn read_csv<R: Read>(input: R) -> Result<Vec<BoundCurve>> {
        let mut reader = csv::Reader::from_reader(input);
        let mut curves: Vec<BoundCurve> = Vec::new();
        for (i, row) in reader.deserialize::<CsvRow>().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| Error::Parse { line, message: e.to_string() })?;
            let num = |s: &str| {
                infinite::parse(s).ok_or_else(|| Error::Parse { line, message: format!("not a number: {s:?}") })
            };
            let params = match serde_json::from_str::<Value>(&row.params_json) {
                Ok(Value::Object(m)) => m,
                Ok(_) | Err(_) => {
                    return Err(Error::Parse { line, message: "params_json is not a JSON object".into() });
                }
            };
            let (r, e) = (num(&row.r)?, num(&row.e)?);
            match curves.iter_mut().find(|c| c.bound_name == row.bound) {
                Some(c) => c.push(r, e, params),
                None => {
                    let mut c = BoundCurve::new(row.bound);
                    c.push(r, e, params);
                    curves.push(c);
                }
            }
        }
        Ok(curves)
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}
