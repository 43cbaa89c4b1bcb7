//! CSV surfaces, experiment records and the JSON run summary.
//!
//! Numbers are written with six significant digits in the shortest of fixed
//! or scientific notation, always with a `.` decimal point.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use risvec_core::placement::SurfacePoint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Header of surface files.
pub const SURFACE_HEADER: [&str; 3] = ["h_m", "theta_deg", "avg_throughput"];
/// Header of record files.
pub const RECORD_HEADER: [&str; 8] = ["scheme", "param", "value", "throughput", "h_m", "theta_deg", "wall_s", "seed"];

/// `x` with six significant digits, like C's `%.6g`.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Placement schemes compared in experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Exhaustive grid search with optimal assignment.
    #[serde(rename = "OP")]
    Op,
    /// Adaptive hill climbing with optimal assignment.
    #[serde(rename = "HC")]
    Hc,
    /// Genetic search with optimal assignment.
    #[serde(rename = "GAP")]
    Gap,
    /// Grid search with greedy nearest-server assignment.
    #[serde(rename = "GOP")]
    Gop,
    /// Grid search maximising the expected sum rate.
    #[serde(rename = "SUMRATE")]
    Sumrate,
}

impl Scheme {
    /// All schemes in output order.
    pub const ALL: [Scheme; 5] = [Scheme::Op, Scheme::Hc, Scheme::Gap, Scheme::Gop, Scheme::Sumrate];

    /// Column label.
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Op => "OP",
            Scheme::Hc => "HC",
            Scheme::Gap => "GAP",
            Scheme::Gop => "GOP",
            Scheme::Sumrate => "SUMRATE",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown scheme `{s}`")))
    }
}

/// One scheme's result at one value of a swept parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    /// Scheme.
    pub scheme: Scheme,
    /// Swept parameter name (`none` outside sweeps).
    pub param: String,
    /// Swept parameter value.
    pub value: f64,
    /// Average task throughput (tasks per instance).
    pub throughput: f64,
    /// Chosen altitude (m).
    pub h_m: f64,
    /// Chosen tilt (degrees).
    pub theta_deg: f64,
    /// Optimizer wall time (s); zero when timing is off.
    pub wall_s: f64,
    /// Master seed.
    pub seed: u64,
    /// Placement evaluations performed.
    #[serde(skip)]
    pub evaluations: usize,
}

fn create(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))
}

/// Writes a throughput surface, one row per point in the given order.
pub fn write_surface(points: &[SurfacePoint], path: &Path) -> Result<()> {
    if points.is_empty() {
        return Err(Error::Contract(risvec_core::Error::Contract("surface must be nonempty")));
    }
    let mut w = create(path)?;
    w.write_record(SURFACE_HEADER).map_err(|e| Error::csv(path, e))?;
    for p in points {
        w.write_record([sig6(p.altitude_m), sig6(p.tilt_deg), sig6(p.avg_throughput)])
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn parse_f64(path: &Path, s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Config(format!("{}: `{s}` is not a number", path.display())))
}

fn check_header(path: &Path, r: &mut csv::Reader<fs::File>, expected: &[&str]) -> Result<()> {
    let h = r.headers().map_err(|e| Error::csv(path, e))?;
    if h.iter().ne(expected.iter().copied()) {
        return Err(Error::Config(format!("{}: expected header `{}`", path.display(), expected.join(","))));
    }
    Ok(())
}

/// Reads a surface written by [`write_surface`].
pub fn read_surface(path: &Path) -> Result<Vec<SurfacePoint>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    check_header(path, &mut r, &SURFACE_HEADER)?;
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::csv(path, e))?;
            Ok(SurfacePoint {
                altitude_m: parse_f64(path, &rec[0])?,
                tilt_deg: parse_f64(path, &rec[1])?,
                avg_throughput: parse_f64(path, &rec[2])?,
            })
        })
        .collect()
}

/// Writes experiment records under [`RECORD_HEADER`].
pub fn write_records(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(RECORD_HEADER).map_err(|e| Error::csv(path, e))?;
    for r in records {
        w.write_record([
            r.scheme.name().to_string(),
            r.param.clone(),
            sig6(r.value),
            sig6(r.throughput),
            sig6(r.h_m),
            sig6(r.theta_deg),
            sig6(r.wall_s),
            r.seed.to_string(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads records written by [`write_records`].
pub fn read_records(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    check_header(path, &mut r, &RECORD_HEADER)?;
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::csv(path, e))?;
            Ok(ExperimentRecord {
                scheme: rec[0].parse()?,
                param: rec[1].to_string(),
                value: parse_f64(path, &rec[2])?,
                throughput: parse_f64(path, &rec[3])?,
                h_m: parse_f64(path, &rec[4])?,
                theta_deg: parse_f64(path, &rec[5])?,
                wall_s: parse_f64(path, &rec[6])?,
                seed: rec[7].trim().parse().map_err(|_| Error::Config(format!("{}: bad seed", path.display())))?,
                evaluations: 0,
            })
        })
        .collect()
}

/// Per-scheme entry of a run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryEntry {
    /// Scheme.
    pub scheme: Scheme,
    /// Swept parameter name.
    pub param: String,
    /// Swept parameter value.
    pub value: f64,
    /// Average task throughput.
    pub throughput: f64,
    /// Chosen altitude (m).
    pub h_m: f64,
    /// Chosen tilt (degrees).
    pub theta_deg: f64,
    /// Placement evaluations performed.
    pub evaluations: usize,
}

/// Structured description of one CLI run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// Subcommand.
    pub command: String,
    /// SHA-256 of the canonical merged configuration.
    pub config_hash: String,
    /// Master seed.
    pub seed: u64,
    /// Results.
    pub results: Vec<SummaryEntry>,
}

impl RunSummary {
    /// Summary of `records`.
    pub fn new(command: &str, config_hash: String, seed: u64, records: &[ExperimentRecord]) -> Self {
        let results = records
            .iter()
            .map(|r| SummaryEntry {
                scheme: r.scheme,
                param: r.param.clone(),
                value: r.value,
                throughput: r.throughput,
                h_m: r.h_m,
                theta_deg: r.theta_deg,
                evaluations: r.evaluations,
            })
            .collect();
        Self { command: command.into(), config_hash, seed, results }
    }

    /// Writes pretty-printed JSON.
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("summary serializes");
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}
