use std::io::Write;
use std::path::Path;

use serde::Deserialize;

use super::CliError;
use crate::estimator::{AttenuationCurve, CurvePoint};

pub const CURVE_HEADER: [&str; 3] = ["g_T_per_m", "s_norm", "s_stderr"];

#[derive(Deserialize)]
struct Row {
    #[serde(rename = "g_T_per_m")]
    g: f64,
    #[serde(rename = "s_norm")]
    s: f64,
    #[serde(rename = "s_stderr", default)]
    sigma: Option<f64>,
}

/// Points of a curve CSV, in file order.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvCurve {
    pub points: Vec<CurvePoint>,
}

impl CsvCurve {
    pub fn into_curve(self, little_delta: f64, big_delta: f64, q_gamma: f64) -> AttenuationCurve {
        AttenuationCurve {
            points: self.points,
            little_delta,
            big_delta,
            q_gamma,
        }
    }
}

/// Reads `g_T_per_m,s_norm,s_stderr` rows; `s_stderr` may be blank or
/// absent. Errors name the offending line.
pub fn read_curve_csv(path: &Path) -> Result<CsvCurve, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?
        .clone();
    for required in &CURVE_HEADER[..2] {
        if !headers.iter().any(|h| h == *required) {
            return Err(CliError::input(format!(
                "{}: missing column `{required}`",
                path.display()
            )));
        }
    }
    let mut points = Vec::new();
    for record in reader.deserialize::<Row>() {
        match record {
            Ok(r) => points.push(CurvePoint {
                g: r.g,
                s: r.s,
                sigma: r.sigma,
            }),
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                return Err(CliError::input(format!(
                    "{}: line {line}: {}",
                    path.display(),
                    e.kind_message()
                )));
            }
        }
    }
    if points.len() < 3 {
        return Err(CliError::input(format!(
            "{}: need at least 3 data rows, found {}",
            path.display(),
            points.len()
        )));
    }
    Ok(CsvCurve { points })
}

trait KindMessage {
    fn kind_message(&self) -> String;
}

impl KindMessage for csv::Error {
    fn kind_message(&self) -> String {
        match self.kind() {
            csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
            _ => self.to_string(),
        }
    }
}

/// Writes the curve CSV with shortest round-trip float formatting;
/// `s_stderr` is left blank when absent.
pub fn write_curve_csv(path: &Path, curve: &AttenuationCurve) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    w.write_record(CURVE_HEADER).map_err(|e| io_error(path, e))?;
    for p in &curve.points {
        let sigma = p.sigma.map(|s| s.to_string()).unwrap_or_default();
        w.write_record([p.g.to_string(), p.s.to_string(), sigma])
            .map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

/// Two whitespace-separated columns, one row per point.
pub fn write_dat(path: &Path, header: &str, rows: &[(f64, f64)]) -> Result<(), CliError> {
    let mut out = format!("# {header}\n");
    for (x, y) in rows {
        out.push_str(&format!("{x} {y}\n"));
    }
    write_text(path, &out)
}

pub(super) fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path).map_err(|e| io_error(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::input(format!("{}: {e}", path.display()))
}
