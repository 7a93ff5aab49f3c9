//! CSV time series written by scenario runs. Floats are written in
//! shortest round-trip exponent form, so equal runs give equal bytes.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kaniel_shinbrot::NestingRecord;
use crate::picard::StabilityRecord;
use crate::problem::Check;

/// A row type with a fixed header.
pub trait DiagnosticRecord {
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Per-slice envelope margin `sup_weighted - 2R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnvelopeRecord {
    pub t: f64,
    pub sup_weighted: f64,
    pub bound_2r: f64,
    pub margin: f64,
}

impl DiagnosticRecord for EnvelopeRecord {
    fn header() -> &'static [&'static str] {
        &["t", "sup_weighted", "bound_2R", "margin"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            num(self.t),
            num(self.sup_weighted),
            num(self.bound_2r),
            num(self.margin),
        ]
    }
}

/// Change of one Picard iteration and its ratio to the previous change
/// (blank on the first row).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContractionRecord {
    pub iter: usize,
    pub delta_norm: f64,
    pub ratio: Option<f64>,
}

impl ContractionRecord {
    pub fn from_history(history: &[f64]) -> Vec<Self> {
        history
            .iter()
            .enumerate()
            .map(|(i, &d)| ContractionRecord {
                iter: i + 1,
                delta_norm: d,
                ratio: (i > 0).then(|| d / history[i - 1]),
            })
            .collect()
    }
}

impl DiagnosticRecord for ContractionRecord {
    fn header() -> &'static [&'static str] {
        &["iter", "delta_norm", "ratio"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.iter.to_string(),
            num(self.delta_norm),
            self.ratio.map(num).unwrap_or_default(),
        ]
    }
}

impl DiagnosticRecord for NestingRecord {
    fn header() -> &'static [&'static str] {
        &["iter", "sup_gap", "min_l", "monotonicity_violation"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.iter.to_string(),
            num(self.sup_gap),
            num(self.min_l),
            num(self.monotonicity_violation),
        ]
    }
}

impl DiagnosticRecord for StabilityRecord {
    fn header() -> &'static [&'static str] {
        &["t", "diff_norm", "ratio_vs_2"]
    }

    fn fields(&self) -> Vec<String> {
        vec![num(self.t), num(self.diff_norm), num(self.ratio_vs_2)]
    }
}

/// Measured Lipschitz ratio of one random probe pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbeRecord {
    pub pair: usize,
    pub ratio: f64,
}

impl DiagnosticRecord for ProbeRecord {
    fn header() -> &'static [&'static str] {
        &["pair", "ratio"]
    }

    fn fields(&self) -> Vec<String> {
        vec![self.pair.to_string(), num(self.ratio)]
    }
}

/// One random sample of a scalar lemma.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaRecord {
    pub lemma: &'static str,
    pub sample: usize,
    pub numeric: f64,
    pub bound: f64,
    /// The always-valid bound where it differs from `bound`.
    pub corrected_bound: Option<f64>,
}

impl DiagnosticRecord for LemmaRecord {
    fn header() -> &'static [&'static str] {
        &["lemma", "sample", "numeric", "bound", "corrected_bound"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.lemma.to_string(),
            self.sample.to_string(),
            num(self.numeric),
            num(self.bound),
            self.corrected_bound.map(num).unwrap_or_default(),
        ]
    }
}

/// A check together with whether it decides the exit status.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: Check,
    pub gating: bool,
}

impl DiagnosticRecord for CheckRecord {
    fn header() -> &'static [&'static str] {
        &["check", "value", "limit", "passed", "gating"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.check.name.clone(),
            num(self.check.value),
            num(self.check.limit),
            self.check.passed.to_string(),
            self.gating.to_string(),
        ]
    }
}

/// Writes a header row and one row per record.
pub fn write_diagnostics<R: DiagnosticRecord>(records: &[R], path: &Path) -> Result<()> {
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(path, e),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(R::header()).map_err(io)?;
    for r in records {
        w.write_record(r.fields()).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
