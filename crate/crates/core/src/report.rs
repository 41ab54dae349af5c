//! JSON and CSV reports of certificate lists.
//!
//! Decimals are written with 17 significant digits. Non-finite numbers are
//! written as `null`; a non-finite certificate value also gets a flag naming it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::certify::{Certificate, CertificateKind, OptimizerConfig, Status};
use crate::error::{Error, Result};
use nalgebra::DVector;

pub const REPORT_VERSION: &str = "1";

const FLAG_POS_INF: &str = "value_pos_inf";
const FLAG_NEG_INF: &str = "value_neg_inf";
const FLAG_NAN: &str = "value_nan";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Parse(format!("unknown format `{other}`"))),
        }
    }
}

/// Decimal with 17 significant digits.
pub fn format_decimal(v: f64) -> String {
    format!("{v:.16e}")
}

struct Num(f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(format_decimal(self.0)).map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        } else {
            s.serialize_none()
        }
    }
}

fn nums(v: &[f64]) -> Vec<Num> {
    v.iter().map(|&x| Num(x)).collect()
}

#[derive(Serialize)]
struct ResultOut<'a> {
    kind: CertificateKind,
    t: Option<Num>,
    value: Num,
    status: Status,
    witness: Option<[Vec<Num>; 2]>,
    seed: u64,
    starts: usize,
    iters: usize,
    psi: &'a str,
    best_start: Option<usize>,
    max_iters: usize,
    stop_tol: Num,
    grad_step: Num,
    penalty_weight: Num,
    flags: Vec<String>,
    details: BTreeMap<&'a str, Num>,
}

#[derive(Serialize)]
struct ReportOut<'a> {
    version: &'a str,
    chain: &'a str,
    psi: &'a str,
    results: Vec<ResultOut<'a>>,
}

/// One parsed result.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ResultRecord {
    pub kind: CertificateKind,
    pub t: Option<f64>,
    pub value: Option<f64>,
    pub status: Status,
    pub witness: Option<[Vec<f64>; 2]>,
    pub seed: u64,
    pub starts: usize,
    pub iters: usize,
    pub psi: String,
    pub best_start: Option<usize>,
    pub max_iters: usize,
    pub stop_tol: f64,
    pub grad_step: f64,
    pub penalty_weight: f64,
    pub flags: Vec<String>,
    pub details: BTreeMap<String, Option<f64>>,
}

/// A parsed report.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Report {
    pub version: String,
    pub chain: String,
    pub psi: String,
    pub results: Vec<ResultRecord>,
}

fn value_flags(v: f64) -> Option<&'static str> {
    if v.is_nan() {
        Some(FLAG_NAN)
    } else if v == f64::INFINITY {
        Some(FLAG_POS_INF)
    } else if v == f64::NEG_INFINITY {
        Some(FLAG_NEG_INF)
    } else {
        None
    }
}

/// Serializes certificates as a JSON report terminated by a newline.
pub fn to_json(chain: &str, psi: &str, certs: &[Certificate]) -> String {
    let results = certs
        .iter()
        .map(|c| {
            let mut flags = c.flags.clone();
            if let Some(f) = value_flags(c.value) {
                if !flags.iter().any(|x| x == f) {
                    flags.push(f.to_string());
                }
            }
            ResultOut {
                kind: c.kind,
                t: c.t.map(Num),
                value: Num(c.value),
                status: c.status,
                witness: c.witness.as_ref().map(|(x, y)| [nums(x.as_slice()), nums(y.as_slice())]),
                seed: c.config.seed,
                starts: c.config.starts,
                iters: c.iterations,
                psi: &c.psi,
                best_start: c.best_start,
                max_iters: c.config.max_iters,
                stop_tol: Num(c.config.stop_tol),
                grad_step: Num(c.config.grad_step),
                penalty_weight: Num(c.config.penalty_weight),
                flags,
                details: c.details.iter().map(|(k, &v)| (k.as_str(), Num(v))).collect(),
            }
        })
        .collect();
    let doc = ReportOut {
        version: REPORT_VERSION,
        chain,
        psi,
        results,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serialization cannot fail");
    s.push('\n');
    s
}

/// Serializes certificates as CSV rows `t,kind,value,status,seed`.
pub fn to_csv(certs: &[Certificate]) -> String {
    let mut s = String::from("t,kind,value,status,seed\n");
    for c in certs {
        let t = c.t.map(format_decimal).unwrap_or_default();
        let v = if c.value.is_finite() {
            format_decimal(c.value)
        } else {
            c.value.to_string()
        };
        let _ = writeln!(s, "{t},{},{v},{},{}", c.kind.as_str(), c.status.as_str(), c.config.seed);
    }
    s
}

/// Renders certificates in `format`.
pub fn render(chain: &str, psi: &str, certs: &[Certificate], format: Format) -> String {
    match format {
        Format::Json => to_json(chain, psi, certs),
        Format::Csv => to_csv(certs),
    }
}

/// Writes the rendered report to `path`, or to stdout when `path` is `None`.
pub fn emit_report(chain: &str, psi: &str, certs: &[Certificate], format: Format, path: Option<&Path>) -> Result<()> {
    let text = render(chain, psi, certs, format);
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

impl Report {
    pub fn from_json(text: &str) -> Result<Report> {
        let r: Report = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if r.version != REPORT_VERSION {
            return Err(Error::Parse(format!("unsupported report version `{}`", r.version)));
        }
        Ok(r)
    }
}

impl ResultRecord {
    /// Rebuilds the certificate, with the chain name taken from the report.
    pub fn to_certificate(&self, chain: &str) -> Certificate {
        let has = |f: &str| self.flags.iter().any(|x| x == f);
        let value = self.value.unwrap_or(if has(FLAG_POS_INF) {
            f64::INFINITY
        } else if has(FLAG_NEG_INF) {
            f64::NEG_INFINITY
        } else {
            f64::NAN
        });
        Certificate {
            kind: self.kind,
            chain: chain.to_string(),
            psi: self.psi.clone(),
            t: self.t,
            value,
            witness: self
                .witness
                .as_ref()
                .map(|[x, y]| (DVector::from_column_slice(x), DVector::from_column_slice(y))),
            status: self.status,
            config: OptimizerConfig {
                seed: self.seed,
                starts: self.starts,
                max_iters: self.max_iters,
                grad_step: self.grad_step,
                stop_tol: self.stop_tol,
                penalty_weight: self.penalty_weight,
            },
            best_start: self.best_start,
            iterations: self.iters,
            flags: self
                .flags
                .iter()
                .filter(|f| ![FLAG_POS_INF, FLAG_NEG_INF, FLAG_NAN].contains(&f.as_str()))
                .cloned()
                .collect(),
            details: self
                .details
                .iter()
                .map(|(k, v)| (k.clone(), v.unwrap_or(f64::NAN)))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::fatness_margin;
    use crate::homogeneous::chain_by_key;

    fn sample() -> Vec<Certificate> {
        let c = chain_by_key("su2-so4-g2").unwrap().chain;
        let cfg = OptimizerConfig {
            starts: 4,
            max_iters: 100,
            ..Default::default()
        };
        let mut inf = Certificate::new(CertificateKind::Fatness, &c, "none", None, &cfg);
        inf.value = f64::INFINITY;
        inf.flags.push("empty_domain".into());
        vec![fatness_margin(&c, &cfg), inf]
    }

    #[test]
    fn empty_list_is_valid_document() {
        let s = to_json("x", "proj-m", &[]);
        let r = Report::from_json(&s).unwrap();
        assert!(r.results.is_empty());
        assert_eq!(r.chain, "x");
        assert_eq!(to_csv(&[]), "t,kind,value,status,seed\n");
    }

    #[test]
    fn decimals_have_17_significant_digits() {
        assert_eq!(format_decimal(0.1), "1.0000000000000001e-1");
        assert_eq!(format_decimal(-2.0), "-2.0000000000000000e0");
        let s = to_json("c", "p", &sample());
        assert!(s.contains("e0") || s.contains("e-"));
        assert!(!s.contains('\r'));
    }

    #[test]
    fn round_trip_preserves_certificates() {
        let certs = sample();
        let s = to_json("su2-so4-g2", "none", &certs);
        let r = Report::from_json(&s).unwrap();
        assert_eq!(r.results.len(), 2);
        let back = r.results[0].to_certificate(&certs[0].chain);
        assert_eq!(back, certs[0]);
        let inf = r.results[1].to_certificate(&certs[1].chain);
        assert_eq!(inf.value, f64::INFINITY);
        assert_eq!(inf.flags, certs[1].flags);
        assert!(r.results[1].value.is_none());
    }

    #[test]
    fn rendering_is_deterministic() {
        assert_eq!(to_json("c", "p", &sample()), to_json("c", "p", &sample()));
    }

    #[test]
    fn csv_rows_match_certificates() {
        let csv = to_csv(&sample());
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(1).unwrap().starts_with(",fatness,"));
    }

    #[test]
    fn unknown_format_is_rejected() {
        assert!("xml".parse::<Format>().is_err());
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let e = emit_report("c", "p", &[], Format::Json, Some(Path::new("/nonexistent/dir/r.json")));
        assert!(matches!(e, Err(Error::Io(_))));
    }
}
