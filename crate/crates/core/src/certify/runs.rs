//! The certification runs.

use nalgebra::{DMatrix, DVector};

use super::commuting::{orthonormalize, project_to_variety};
use super::optimizer::{best_of, multistart, multistart_all, Objective, RunOutcome};
use super::{Certificate, CertificateKind, OptimizerConfig, Status};
use crate::algebra::AlgebraElement;
use crate::curvature::{k_direct, kappa_direct, AreaForm, CurvatureForm, Deformation};
use crate::error::{Error, Result};
use crate::homogeneous::{Chain, Part, CHAIN_TOL};
use crate::series::commuting_terms;

/// Ratio beyond which a constant estimate is reported as divergent.
pub const DIVERGENCE_RATIO: f64 = 1e6;
/// Values of ratio objectives where the denominator vanishes.
const GUARD: f64 = 1e12;
/// Penalty scale keeping infinitesimal searches close to the commuting variety.
const VARIETY_PENALTY: f64 = 1e3;
/// `|k'''(0)|` below which a minimizer counts as flat.
const FLAT_K3: f64 = 1e-6;

struct PlaneObjective<'a> {
    form: &'a CurvatureForm,
    rho: f64,
}

impl Objective for PlaneObjective<'_> {
    fn dims(&self) -> Vec<usize> {
        vec![self.form.dim_p(); 2]
    }
    fn value(&self, x: &[DVector<f64>]) -> f64 {
        let c = x[0].dot(&x[1]);
        self.form.value(&x[0], &x[1]) + self.rho * c * c
    }
    fn value_grad(&self, x: &[DVector<f64>]) -> Option<(f64, Vec<DVector<f64>>)> {
        let (q, gx, gy) = self.form.value_grad(&x[0], &x[1]);
        let c = x[0].dot(&x[1]);
        let gx = gx + &x[1] * (2.0 * self.rho * c);
        let gy = gy + &x[0] * (2.0 * self.rho * c);
        Some((q + self.rho * c * c, vec![gx, gy]))
    }
}

struct NormalizedObjective<'a> {
    form: &'a CurvatureForm,
    area: &'a AreaForm,
    rho: f64,
}

impl Objective for NormalizedObjective<'_> {
    fn dims(&self) -> Vec<usize> {
        vec![self.form.dim_p(); 2]
    }
    fn value(&self, x: &[DVector<f64>]) -> f64 {
        self.value_grad(x).map(|v| v.0).unwrap_or(f64::INFINITY)
    }
    fn value_grad(&self, x: &[DVector<f64>]) -> Option<(f64, Vec<DVector<f64>>)> {
        let (q, qx, qy) = self.form.value_grad(&x[0], &x[1]);
        let (a, ax, ay) = self.area.value_grad(&x[0], &x[1]);
        let c = x[0].dot(&x[1]);
        if a < 1e-12 {
            return Some((GUARD, vec![DVector::zeros(x[0].len()), DVector::zeros(x[1].len())]));
        }
        let r = q / a;
        let gx = (qx - ax * r) / a + &x[1] * (2.0 * self.rho * c);
        let gy = (qy - ay * r) / a + &x[0] * (2.0 * self.rho * c);
        Some((r + self.rho * c * c, vec![gx, gy]))
    }
}

/// `|[A, B]|²` over unit `A ∈ m`, `B ∈ s`.
struct FatnessObjective<'a> {
    chain: &'a Chain,
    m: DMatrix<f64>,
    s: DMatrix<f64>,
}

impl Objective for FatnessObjective<'_> {
    fn dims(&self) -> Vec<usize> {
        vec![self.m.ncols(), self.s.ncols()]
    }
    fn value(&self, x: &[DVector<f64>]) -> f64 {
        let g = self.chain.algebra();
        g.lie(&(&self.m * &x[0]), &(&self.s * &x[1])).norm_squared()
    }
    fn value_grad(&self, x: &[DVector<f64>]) -> Option<(f64, Vec<DVector<f64>>)> {
        let g = self.chain.algebra();
        let (a, b) = (&self.m * &x[0], &self.s * &x[1]);
        let z = g.lie(&a, &b);
        let ga = self.m.transpose() * g.ad_transpose(&b, &z) * -2.0;
        let gb = self.s.transpose() * g.ad_transpose(&a, &z) * 2.0;
        Some((z.norm_squared(), vec![ga, gb]))
    }
}

/// `(|M^m|², |[X, Y]|²)` with `M = [X^m, Y^m]`.
pub(crate) fn hom_parts(chain: &Chain, x: &AlgebraElement, y: &AlgebraElement) -> (f64, f64) {
    let g = chain.algebra();
    let xm = chain.project_unchecked(x, Part::M);
    let ym = chain.project_unchecked(y, Part::M);
    let mm = chain.project_unchecked(&g.lie(&xm, &ym), Part::M);
    (mm.norm_squared(), g.lie(x, y).norm_squared())
}

/// `(|[X, Y]|², |X^m ∧ Y^m|²)`.
pub(crate) fn wedge_parts(chain: &Chain, x: &AlgebraElement, y: &AlgebraElement) -> (f64, f64) {
    let g = chain.algebra();
    let xm = chain.project_unchecked(x, Part::M);
    let ym = chain.project_unchecked(y, Part::M);
    let w = xm.norm_squared() * ym.norm_squared() - xm.dot(&ym).powi(2);
    (g.lie(x, y).norm_squared(), w)
}

/// `|[X, Y]|² / |M^m|²` over unit `X, Y ∈ p`.
struct HomObjective<'a> {
    chain: &'a Chain,
}

impl Objective for HomObjective<'_> {
    fn dims(&self) -> Vec<usize> {
        vec![self.chain.part_dim(Part::P); 2]
    }
    fn value(&self, x: &[DVector<f64>]) -> f64 {
        self.value_grad(x).map(|v| v.0).unwrap_or(f64::INFINITY)
    }
    fn value_grad(&self, x: &[DVector<f64>]) -> Option<(f64, Vec<DVector<f64>>)> {
        let c = self.chain;
        let g = c.algebra();
        let p = c.p_basis();
        let (xv, yv) = (c.from_p(&x[0]), c.from_p(&x[1]));
        let z = g.lie(&xv, &yv);
        let xm = c.project_unchecked(&xv, Part::M);
        let ym = c.project_unchecked(&yv, Part::M);
        let mm = c.project_unchecked(&g.lie(&xm, &ym), Part::M);
        let (d, n) = (z.norm_squared(), mm.norm_squared());
        if n < 1e-14 {
            return Some((GUARD, vec![DVector::zeros(x[0].len()), DVector::zeros(x[1].len())]));
        }
        let dx = g.ad_transpose(&yv, &z) * -2.0;
        let dy = g.ad_transpose(&xv, &z) * 2.0;
        let nx = c.project_unchecked(&(g.ad_transpose(&ym, &mm) * -2.0), Part::M);
        let ny = c.project_unchecked(&(g.ad_transpose(&xm, &mm) * 2.0), Part::M);
        let r = d / n;
        let gx = p.transpose() * ((dx - nx * r) / n);
        let gy = p.transpose() * ((dy - ny * r) / n);
        Some((r, vec![gx, gy]))
    }
}

/// `|[X, Y]|² / |X^m ∧ Y^m|²` over unit `X, Y ∈ p`.
struct WedgeObjective<'a> {
    chain: &'a Chain,
}

impl Objective for WedgeObjective<'_> {
    fn dims(&self) -> Vec<usize> {
        vec![self.chain.part_dim(Part::P); 2]
    }
    fn value(&self, x: &[DVector<f64>]) -> f64 {
        self.value_grad(x).map(|v| v.0).unwrap_or(f64::INFINITY)
    }
    fn value_grad(&self, x: &[DVector<f64>]) -> Option<(f64, Vec<DVector<f64>>)> {
        let c = self.chain;
        let g = c.algebra();
        let p = c.p_basis();
        let (xv, yv) = (c.from_p(&x[0]), c.from_p(&x[1]));
        let z = g.lie(&xv, &yv);
        let xm = c.project_unchecked(&xv, Part::M);
        let ym = c.project_unchecked(&yv, Part::M);
        let (a, b, e) = (xm.norm_squared(), ym.norm_squared(), xm.dot(&ym));
        let w = a * b - e * e;
        if w < 1e-14 {
            return Some((GUARD, vec![DVector::zeros(x[0].len()), DVector::zeros(x[1].len())]));
        }
        let d = z.norm_squared();
        let dx = g.ad_transpose(&yv, &z) * -2.0;
        let dy = g.ad_transpose(&xv, &z) * 2.0;
        let wx = &xm * (2.0 * b) - &ym * (2.0 * e);
        let wy = &ym * (2.0 * a) - &xm * (2.0 * e);
        let r = d / w;
        let gx = p.transpose() * ((dx - wx * r) / w);
        let gy = p.transpose() * ((dy - wy * r) / w);
        Some((r, vec![gx, gy]))
    }
}

/// `k'''(0)` plus penalties for leaving `[X, Y] = 0`, `A^h = 0` and for parallel pairs.
struct InfinitesimalObjective<'a> {
    chain: &'a Chain,
    def: &'a Deformation,
    weight: f64,
    rho: f64,
}

impl Objective for InfinitesimalObjective<'_> {
    fn dims(&self) -> Vec<usize> {
        vec![self.chain.part_dim(Part::P); 2]
    }
    fn value(&self, x: &[DVector<f64>]) -> f64 {
        let (xv, yv) = (self.chain.from_p(&x[0]), self.chain.from_p(&x[1]));
        let Ok((_, k3, _, bt)) = commuting_terms(self.chain, self.def, &xv, &yv) else {
            return f64::INFINITY;
        };
        let ah = self.chain.project_unchecked(&bt.a, Part::H);
        let c = x[0].dot(&x[1]);
        k3 + self.weight * (bt.z.norm_squared() + ah.norm_squared()) + self.rho * c * c
    }
}

fn unit_witness(chain: &Chain, o: &RunOutcome) -> (AlgebraElement, AlgebraElement) {
    let (xi, eta) = match orthonormalize(&o.point[0], &o.point[1], 1e-8) {
        Some(pair) => pair,
        None => (o.point[0].clone(), o.point[1].clone()),
    };
    (chain.from_p(&xi), chain.from_p(&eta))
}

fn sign_status(value: f64, stop_tol: f64) -> Status {
    if value >= -stop_tol {
        Status::Certified
    } else if value < -10.0 * stop_tol {
        Status::Refuted
    } else {
        Status::Inconclusive
    }
}

fn record(cert: &mut Certificate, o: &RunOutcome) {
    cert.best_start = Some(o.start);
    cert.iterations = o.iterations;
    cert.details.insert("objective".into(), o.value);
}

/// Minimum of `k(t)` over planes in `p` (orthonormal in `g0`).
pub fn min_curvature(chain: &Chain, def: &Deformation, t: f64, config: &OptimizerConfig) -> Result<Certificate> {
    config.validate()?;
    let form = CurvatureForm::new(chain, def, t, true)?;
    let mut cert = Certificate::new(CertificateKind::MinCurvature, chain, def.label(), Some(t), config);
    cert.details.insert("form_min_eigenvalue".into(), form.min_eigenvalue());
    if chain.part_dim(Part::P) < 2 {
        cert.value = 0.0;
        cert.status = Status::Certified;
        cert.flags.push("no_planes".into());
        return Ok(cert);
    }
    let best = multistart(
        &PlaneObjective {
            form: &form,
            rho: config.penalty_weight,
        },
        config,
    );
    let (x, y) = unit_witness(chain, &best);
    cert.value = k_direct(chain, def, t, &x, &y)?;
    cert.witness = Some((x, y));
    record(&mut cert, &best);
    cert.status = sign_status(cert.value, config.stop_tol);
    Ok(cert)
}

/// `min_curvature` at every grid point.
pub fn scan_t(chain: &Chain, def: &Deformation, grid: &[f64], config: &OptimizerConfig) -> Result<Vec<Certificate>> {
    grid.iter().map(|&t| min_curvature(chain, def, t, config)).collect()
}

/// Smallest grid value whose certificate is refuted.
pub fn first_refuted(certs: &[Certificate]) -> Option<f64> {
    certs
        .iter()
        .filter(|c| c.status == Status::Refuted)
        .filter_map(|c| c.t)
        .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.min(t))))
}

/// Minimum of `|[A, B]|²` over unit `A ∈ m`, `B ∈ s`.
pub fn fatness_margin(chain: &Chain, config: &OptimizerConfig) -> Certificate {
    let mut cert = Certificate::new(CertificateKind::Fatness, chain, "none", None, config);
    if chain.part_dim(Part::M) == 0 || chain.part_dim(Part::S) == 0 {
        cert.value = f64::INFINITY;
        cert.status = Status::Certified;
        cert.flags.push("empty_domain".into());
        return cert;
    }
    let obj = FatnessObjective {
        chain,
        m: chain.basis(Part::M),
        s: chain.basis(Part::S),
    };
    let best = multistart(&obj, config);
    let a = &obj.m * &best.point[0];
    let b = &obj.s * &best.point[1];
    cert.value = chain.algebra().lie(&a, &b).norm_squared();
    cert.witness = Some((a, b));
    record(&mut cert, &best);
    cert.status = if cert.value > 1e-6 {
        Status::Certified
    } else if cert.value <= config.stop_tol {
        Status::Refuted
    } else {
        Status::Inconclusive
    };
    cert
}

/// Estimate of `C²` in `|[X^m, Y^m]^m| <= C |[X, Y]|`.
pub fn hom_constant(chain: &Chain, config: &OptimizerConfig) -> Certificate {
    let mut cert = Certificate::new(CertificateKind::HomConstant, chain, "none", None, config);
    if chain.part_dim(Part::M) == 0 || chain.symmetric_pair_residual() < CHAIN_TOL {
        cert.value = 0.0;
        cert.status = Status::Certified;
        cert.flags.push("numerator_identically_zero".into());
        cert.details.insert("C".into(), 0.0);
        return cert;
    }
    let best = multistart(&HomObjective { chain }, config);
    let (x, y) = (chain.from_p(&best.point[0]), chain.from_p(&best.point[1]));
    let (num, den) = hom_parts(chain, &x, &y);
    let ratio = num / den;
    cert.value = ratio;
    cert.details.insert("min_bracket_ratio".into(), best.value);
    cert.details.insert("C".into(), ratio.sqrt());
    cert.details.insert("m_bracket_norm".into(), num.sqrt());
    cert.witness = Some((x, y));
    record(&mut cert, &best);
    if ratio > DIVERGENCE_RATIO && num.sqrt() >= 0.1 {
        cert.flags.push("divergent".into());
        cert.status = Status::Refuted;
    } else {
        cert.status = Status::Certified;
    }
    cert
}

/// Minimum `μ` of `|[X, Y]|²` subject to `|X^m ∧ Y^m|² = 1`; `C = 1/√μ`.
pub fn wedge_constant(chain: &Chain, config: &OptimizerConfig) -> Certificate {
    let mut cert = Certificate::new(CertificateKind::WedgeConstant, chain, "none", None, config);
    if chain.part_dim(Part::M) < 2 {
        cert.value = f64::INFINITY;
        cert.status = Status::Certified;
        cert.flags.push("vacuous".into());
        return cert;
    }
    let best = multistart(&WedgeObjective { chain }, config);
    let (x, y) = (chain.from_p(&best.point[0]), chain.from_p(&best.point[1]));
    let (num, den) = wedge_parts(chain, &x, &y);
    cert.value = num / den;
    cert.witness = Some((x, y));
    record(&mut cert, &best);
    if cert.value > config.stop_tol {
        cert.details.insert("C".into(), 1.0 / cert.value.sqrt());
        cert.status = Status::Certified;
    } else {
        cert.flags.push("divergent".into());
        cert.status = Status::Refuted;
    }
    cert
}

/// Minimum of `k'''(0)` over unit pairs with `[X, Y] = 0` and `A^h = 0`.
pub fn infinitesimal_check(chain: &Chain, def: &Deformation, config: &OptimizerConfig) -> Result<Certificate> {
    config.validate()?;
    let mut cert = Certificate::new(CertificateKind::Infinitesimal, chain, def.label(), Some(0.0), config);
    if chain.part_dim(Part::P) < 2 {
        cert.value = 0.0;
        cert.status = Status::Certified;
        cert.flags.push("no_planes".into());
        return Ok(cert);
    }
    let obj = InfinitesimalObjective {
        chain,
        def,
        weight: VARIETY_PENALTY * config.penalty_weight,
        rho: config.penalty_weight,
    };
    let runs = multistart_all(&obj, config);
    let mut best: Option<(f64, usize, AlgebraElement, AlgebraElement, f64, usize)> = None;
    let mut flat = 0usize;
    let mut worst_flat_d0 = 0.0f64;
    let mut projected = 0usize;
    for o in &runs {
        let Some((xi, eta, _)) = project_to_variety(chain, Some(def), &o.point[0], &o.point[1]) else {
            continue;
        };
        let Some((xi, eta)) = orthonormalize(&xi, &eta, 1e-3) else {
            continue;
        };
        let (x, y) = (chain.from_p(&xi), chain.from_p(&eta));
        let (_, k3, d0p, bt) = commuting_terms(chain, def, &x, &y)?;
        let res = bt.z.norm_squared() + chain.project_unchecked(&bt.a, Part::H).norm_squared();
        if res > 1e-16 {
            continue;
        }
        projected += 1;
        if k3.abs() <= FLAT_K3 {
            flat += 1;
            worst_flat_d0 = worst_flat_d0.max(d0p.norm());
        }
        if best.as_ref().is_none_or(|b| k3 < b.0) {
            best = Some((k3, o.start, x, y, d0p.norm(), o.iterations));
        }
    }
    cert.details.insert("projected_minimizers".into(), projected as f64);
    cert.details.insert("flat_minimizers".into(), flat as f64);
    cert.details.insert("max_flat_d0p".into(), worst_flat_d0);
    let Some((k3, start, x, y, d0, iters)) = best else {
        cert.flags.push("no_point_on_variety".into());
        return Ok(cert);
    };
    cert.value = k3;
    cert.details.insert("d0p_at_witness".into(), d0);
    cert.witness = Some((x, y));
    cert.best_start = Some(start);
    cert.iterations = iters;
    if let Some(b) = best_of(&runs) {
        cert.details.insert("objective".into(), b.value);
    }
    cert.status = if k3 < -10.0 * config.stop_tol {
        Status::Refuted
    } else if k3 >= -config.stop_tol && worst_flat_d0 <= FLAT_K3 {
        Status::Certified
    } else {
        if worst_flat_d0 > FLAT_K3 {
            cert.flags.push("d0p_nonzero_at_flat_minimizer".into());
        }
        Status::Inconclusive
    };
    Ok(cert)
}

/// Minimum of the normalized curvature `k / |X' ∧ Y'|²_{g_t}` along `Ψ = P_m`.
pub fn wallach_positivity(chain: &Chain, t: f64, config: &OptimizerConfig) -> Result<Certificate> {
    config.validate()?;
    if t == 0.0 || !(t < 0.25) {
        return Err(Error::Precondition(format!("t must lie in (-inf, 1/4) without 0, got {t}")));
    }
    let inner = chain.symmetric_pair_residual();
    let outer = chain.outer_symmetric_residual();
    if inner >= CHAIN_TOL || outer >= CHAIN_TOL {
        return Err(Error::Precondition(format!(
            "both pairs must be symmetric (residuals {inner:e}, {outer:e})"
        )));
    }
    let fat = fatness_margin(chain, config);
    if !(fat.value > config.stop_tol) {
        return Err(Error::Precondition(format!("bundle is not fat (margin {:e})", fat.value)));
    }
    let def = Deformation::proj_m(chain);
    let metric = def.phi_at(t)?;
    let form = CurvatureForm::from_metric(chain, &metric, true);
    let area = AreaForm::new(chain, &metric);
    let best = multistart(
        &NormalizedObjective {
            form: &form,
            area: &area,
            rho: config.penalty_weight,
        },
        config,
    );
    let (x, y) = unit_witness(chain, &best);
    let (a, _, _) = area.value_grad(&chain.to_p(&x), &chain.to_p(&y));
    let mut cert = Certificate::new(CertificateKind::Positivity, chain, def.label(), Some(t), config);
    cert.value = k_direct(chain, &def, t, &x, &y)? / a;
    cert.details.insert("fatness_margin".into(), fat.value);
    cert.witness = Some((x, y));
    record(&mut cert, &best);
    cert.status = if cert.value > config.stop_tol {
        Status::Certified
    } else if cert.value < -10.0 * config.stop_tol {
        Status::Refuted
    } else {
        Status::Inconclusive
    };
    Ok(cert)
}

/// Minimum of the left-invariant curvature `κ(t)` over planes in `p`, for
/// `Ψ = psi_m` on `m` (in the chain's `m`-basis) and zero on `h ⊕ s`.
pub fn theorem_ex_sweep(chain: &Chain, psi_m: &DMatrix<f64>, t: f64, config: &OptimizerConfig) -> Result<Certificate> {
    config.validate()?;
    let def = Deformation::from_m_map(chain, psi_m, "psi-m").map_err(|e| Error::Precondition(e.to_string()))?;
    let form = CurvatureForm::new(chain, &def, t, false)?;
    let mut cert = Certificate::new(CertificateKind::KappaPlanes, chain, def.label(), Some(t), config);
    cert.details.insert("form_min_eigenvalue".into(), form.min_eigenvalue());
    let best = multistart(
        &PlaneObjective {
            form: &form,
            rho: config.penalty_weight,
        },
        config,
    );
    let (x, y) = unit_witness(chain, &best);
    cert.value = kappa_direct(chain, &def, t, &x, &y)?;
    cert.witness = Some((x, y));
    record(&mut cert, &best);
    cert.status = sign_status(cert.value, config.stop_tol);
    Ok(cert)
}
