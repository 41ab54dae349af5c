//! Optimization-based certification of curvature signs and of the constants
//! in the wedge and bracket conditions.
//!
//! "Certified" always means that no counterexample was found within the
//! optimizer budget recorded in the certificate. Refutations carry a witness
//! plane that re-evaluates under the curvature oracle.

mod commuting;
mod optimizer;
mod runs;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraElement;
use crate::curvature::{k_direct, kappa_direct, AreaForm, Deformation};
use crate::error::{Error, Result};
use crate::homogeneous::Chain;

pub use commuting::{orthonormalize, project_to_variety, random_commuting_pair};
pub use optimizer::{best_of, descend, multistart, multistart_all, random_start, Objective, RunOutcome};
pub use runs::{
    fatness_margin, first_refuted, hom_constant, infinitesimal_check, min_curvature, scan_t, theorem_ex_sweep,
    wallach_positivity, wedge_constant, DIVERGENCE_RATIO,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub seed: u64,
    pub starts: usize,
    pub max_iters: usize,
    pub grad_step: f64,
    pub stop_tol: f64,
    pub penalty_weight: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            seed: 42,
            starts: 64,
            max_iters: 500,
            grad_step: 0.1,
            stop_tol: 1e-9,
            penalty_weight: 1.0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts < 1 {
            return Err(Error::OutOfRange("starts must be at least 1".into()));
        }
        for (name, v) in [
            ("grad_step", self.grad_step),
            ("stop_tol", self.stop_tol),
            ("penalty_weight", self.penalty_weight),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::OutOfRange(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    MinCurvature,
    Fatness,
    HomConstant,
    WedgeConstant,
    Infinitesimal,
    Positivity,
    /// Left-invariant curvature of planes in `p`.
    KappaPlanes,
    /// Residuals of an algebra or chain construction.
    AlgebraCheck,
    /// Series-versus-oracle discrepancy.
    SeriesCheck,
}

impl CertificateKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CertificateKind::MinCurvature => "min_curvature",
            CertificateKind::Fatness => "fatness",
            CertificateKind::HomConstant => "hom_constant",
            CertificateKind::WedgeConstant => "wedge_constant",
            CertificateKind::Infinitesimal => "infinitesimal",
            CertificateKind::Positivity => "positivity",
            CertificateKind::KappaPlanes => "kappa_planes",
            CertificateKind::AlgebraCheck => "algebra_check",
            CertificateKind::SeriesCheck => "series_check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Certified,
    Refuted,
    Inconclusive,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Certified => "certified",
            Status::Refuted => "refuted",
            Status::Inconclusive => "inconclusive",
        }
    }

    /// Combined status of several results: any refutation dominates, then inconclusive.
    pub fn combine(statuses: impl IntoIterator<Item = Status>) -> Status {
        statuses.into_iter().fold(Status::Certified, |acc, s| match (acc, s) {
            (Status::Refuted, _) | (_, Status::Refuted) => Status::Refuted,
            (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
            _ => Status::Certified,
        })
    }
}

/// Outcome of one certification run.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub chain: String,
    pub psi: String,
    pub t: Option<f64>,
    pub value: f64,
    /// `(X, Y)` in `g`-coordinates.
    pub witness: Option<(AlgebraElement, AlgebraElement)>,
    pub status: Status,
    pub config: OptimizerConfig,
    /// Start index that produced the witness, and its iteration count.
    pub best_start: Option<usize>,
    pub iterations: usize,
    pub flags: Vec<String>,
    pub details: BTreeMap<String, f64>,
}

impl Certificate {
    pub(crate) fn new(kind: CertificateKind, chain: &Chain, psi: &str, t: Option<f64>, config: &OptimizerConfig) -> Self {
        Self::empty(kind, chain.name(), psi, t, config)
    }

    /// An inconclusive certificate with value `NaN` and no witness.
    pub fn empty(kind: CertificateKind, chain: &str, psi: &str, t: Option<f64>, config: &OptimizerConfig) -> Self {
        Certificate {
            kind,
            chain: chain.to_string(),
            psi: psi.to_string(),
            t,
            value: f64::NAN,
            witness: None,
            status: Status::Inconclusive,
            config: *config,
            best_start: None,
            iterations: 0,
            flags: Vec::new(),
            details: BTreeMap::new(),
        }
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    /// Recomputes the certified quantity from the witness alone.
    ///
    /// `def` is required for the curvature kinds; `None` is returned when the
    /// certificate has no witness.
    pub fn reevaluate(&self, chain: &Chain, def: Option<&Deformation>) -> Result<Option<f64>> {
        let Some((x, y)) = &self.witness else {
            return Ok(None);
        };
        let need_def = || def.ok_or_else(|| Error::Precondition(format!("{} needs a deformation", self.kind.as_str())));
        let t = self.t.unwrap_or(0.0);
        let g = chain.algebra();
        let v = match self.kind {
            CertificateKind::MinCurvature => k_direct(chain, need_def()?, t, x, y)?,
            CertificateKind::KappaPlanes => kappa_direct(chain, need_def()?, t, x, y)?,
            CertificateKind::Positivity => {
                let d = need_def()?;
                let metric = d.phi_at(t)?;
                let area = AreaForm::new(chain, &metric);
                let (a, _, _) = area.value_grad(&chain.to_p(x), &chain.to_p(y));
                k_direct(chain, d, t, x, y)? / a
            }
            CertificateKind::Fatness => g.lie(x, y).norm_squared(),
            CertificateKind::HomConstant => {
                let (num, den) = runs::hom_parts(chain, x, y);
                num / den
            }
            CertificateKind::WedgeConstant => {
                let (num, den) = runs::wedge_parts(chain, x, y);
                num / den
            }
            CertificateKind::Infinitesimal => crate::series::commuting_terms(chain, need_def()?, x, y)?.1,
            CertificateKind::AlgebraCheck | CertificateKind::SeriesCheck => return Ok(None),
        };
        Ok(Some(v))
    }
}
