//! Inverse-linear deformations, the Koszul curvature oracle and the O'Neill term.

mod form;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgebraElement, MatrixLieAlgebra};
use crate::error::{Error, Result};
use crate::homogeneous::{Chain, Part};
use crate::series;

pub use form::{wedge_index, wedge_pairs, AreaForm, CurvatureForm};

/// Margin by which the eigenvalues of `I - tΨ` must stay positive.
pub const DOMAIN_MARGIN: f64 = 1e-9;

/// A symmetric, `h`-equivariant endomorphism `Ψ` of `g` vanishing on `h`.
#[derive(Debug, Clone)]
pub struct Deformation {
    psi: DMatrix<f64>,
    label: String,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl Deformation {
    /// Validates `psi` against the chain: self-adjoint, zero on `h`, `ad_h`-equivariant.
    pub fn new(chain: &Chain, psi: DMatrix<f64>, label: impl Into<String>) -> Result<Deformation> {
        let n = chain.dim();
        if psi.nrows() != n || psi.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: psi.nrows(),
            });
        }
        let scale = psi.abs().max().max(1.0);
        let asym = (&psi - psi.transpose()).abs().max();
        if asym > 1e-12 * scale {
            return Err(Error::InvalidDeformation(format!("not self-adjoint (residual {asym:e})")));
        }
        let on_h = (&psi * chain.projector(Part::H)).abs().max();
        if on_h > 1e-12 * scale {
            return Err(Error::InvalidDeformation(format!("does not vanish on h (residual {on_h:e})")));
        }
        let inv = chain.ad_invariance_residual(&psi)?;
        if inv > 1e-10 * scale {
            return Err(Error::InvalidDeformation(format!("not Ad_H-invariant (residual {inv:e})")));
        }
        let sym = (&psi + psi.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone());
        Ok(Deformation {
            psi: sym,
            label: label.into(),
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn zero(chain: &Chain) -> Deformation {
        Self::new(chain, DMatrix::zeros(chain.dim(), chain.dim()), "zero").expect("zero is admissible")
    }

    /// `Ψ = P_m`, the path that scales up the fibers of `G/H -> G/K`.
    pub fn proj_m(chain: &Chain) -> Deformation {
        Self::new(chain, chain.projector(Part::M), "proj-m").expect("P_m is admissible on a valid chain")
    }

    /// `Ψ = P S P^T` for a symmetric matrix `S` in the chain's `p`-basis.
    pub fn from_p_matrix(chain: &Chain, s: &DMatrix<f64>, label: impl Into<String>) -> Result<Deformation> {
        let p = chain.p_basis();
        if s.nrows() != p.ncols() || s.ncols() != p.ncols() {
            return Err(Error::DimensionMismatch {
                expected: p.ncols(),
                got: s.nrows(),
            });
        }
        Self::new(chain, p * s * p.transpose(), label)
    }

    /// `Ψ` acting by `s` on `m` (in the chain's `m`-basis) and by zero on `h ⊕ s`.
    pub fn from_m_map(chain: &Chain, s: &DMatrix<f64>, label: impl Into<String>) -> Result<Deformation> {
        let m = chain.basis(Part::M);
        if s.nrows() != m.ncols() || s.ncols() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.ncols(),
                got: s.nrows(),
            });
        }
        Self::new(chain, &m * s * m.transpose(), label)
    }

    pub fn psi(&self) -> &DMatrix<f64> {
        &self.psi
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn apply(&self, x: &AlgebraElement) -> AlgebraElement {
        &self.psi * x
    }

    /// Smallest eigenvalue of `I - tΨ`.
    pub fn min_factor(&self, t: f64) -> f64 {
        self.eigenvalues
            .iter()
            .map(|l| 1.0 - t * l)
            .fold(f64::INFINITY, f64::min)
    }

    /// Open interval of `t` for which `Φ_t` is a metric.
    pub fn domain(&self) -> (f64, f64) {
        let lmax = self.eigenvalues.max();
        let lmin = self.eigenvalues.min();
        let hi = if lmax > 0.0 { 1.0 / lmax } else { f64::INFINITY };
        let lo = if lmin < 0.0 { 1.0 / lmin } else { f64::NEG_INFINITY };
        (lo, hi)
    }

    pub fn check_domain(&self, t: f64) -> Result<()> {
        let f = self.min_factor(t);
        if !(f > DOMAIN_MARGIN) || !t.is_finite() {
            return Err(Error::Domain { t, eigenvalue: f });
        }
        Ok(())
    }

    /// `Φ_t = (I - tΨ)^{-1}`.
    pub fn phi_at(&self, t: f64) -> Result<MetricAtT> {
        self.check_domain(t)?;
        let q = &self.eigenvectors;
        let n = q.nrows();
        let mut phi = DMatrix::zeros(n, n);
        let mut phi_inv = DMatrix::zeros(n, n);
        for (i, l) in self.eigenvalues.iter().enumerate() {
            let f = 1.0 - t * l;
            let col = q.column(i);
            let outer = &col * col.transpose();
            phi += &outer / f;
            phi_inv += outer * f;
        }
        Ok(MetricAtT { t, phi, phi_inv })
    }
}

/// `Φ_t` and its inverse.
#[derive(Debug, Clone)]
pub struct MetricAtT {
    pub t: f64,
    pub phi: DMatrix<f64>,
    pub phi_inv: DMatrix<f64>,
}

impl MetricAtT {
    /// Builds a metric from an arbitrary endomorphism, which must be symmetric positive definite.
    pub fn from_phi(t: f64, phi: DMatrix<f64>) -> Result<MetricAtT> {
        let sym = (&phi + phi.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone());
        let lmin = eig.eigenvalues.min();
        if !(lmin > DOMAIN_MARGIN) {
            return Err(Error::Domain { t, eigenvalue: lmin });
        }
        let phi_inv = sym.clone().try_inverse().ok_or(Error::Domain { t, eigenvalue: lmin })?;
        Ok(MetricAtT { t, phi: sym, phi_inv })
    }

    pub fn identity(n: usize) -> MetricAtT {
        MetricAtT {
            t: 0.0,
            phi: DMatrix::identity(n, n),
            phi_inv: DMatrix::identity(n, n),
        }
    }

    /// `g_t(a, b) = g0(Φ a, b)`.
    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        (&self.phi * a).dot(b)
    }
}

/// Random `ad_h`-invariant symmetric map on `part` (in that part's basis),
/// scaled to spectral norm 1; zero when only the zero map qualifies.
pub fn random_invariant_map<R: Rng>(chain: &Chain, part: Part, rng: &mut R) -> DMatrix<f64> {
    let basis = chain.basis(part);
    let d = basis.ncols();
    let mut s = DMatrix::zeros(d, d);
    for b in chain.invariant_symmetric_maps(&basis) {
        s += b * rng.sample::<f64, _>(StandardNormal);
    }
    let norm = if d == 0 {
        0.0
    } else {
        SymmetricEigen::new(s.clone()).eigenvalues.abs().max()
    };
    if norm > 1e-12 {
        s / norm
    } else {
        s
    }
}

/// `random_invariant_map` driven by a ChaCha8 generator seeded with `seed`.
pub fn seeded_invariant_map(chain: &Chain, part: Part, seed: u64) -> DMatrix<f64> {
    random_invariant_map(chain, part, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `Φ_t` for a deformation.
pub fn phi_at(def: &Deformation, t: f64) -> Result<MetricAtT> {
    def.phi_at(t)
}

/// Levi-Civita connection of the left-invariant metric `g0(Φ ·, ·)` on left-invariant fields.
fn nabla(alg: &MatrixLieAlgebra, metric: &MetricAtT, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    // 2Φ∇_u v = Φ[u, v] - ad_u^T Φ v - ad_v^T Φ u
    let pu = &metric.phi * u;
    let pv = &metric.phi * v;
    let rhs = &metric.phi * alg.lie(u, v) - alg.ad_transpose(u, &pv) - alg.ad_transpose(v, &pu);
    &metric.phi_inv * rhs * 0.5
}

/// `<R(X', Y') Y', X'>` in the left-invariant metric `g0(Φ ·, ·)`, with `X' = Φ^{-1} X`.
///
/// Computed directly from the Koszul connection with
/// `R(a, b) = ∇_a ∇_b - ∇_b ∇_a - ∇_[a, b]`.
pub fn kappa_oracle(alg: &MatrixLieAlgebra, metric: &MetricAtT, x: &AlgebraElement, y: &AlgebraElement) -> Result<f64> {
    let n = alg.dim();
    for v in [x, y] {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
    }
    if metric.phi.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: metric.phi.nrows(),
        });
    }
    let xp = &metric.phi_inv * x;
    let yp = &metric.phi_inv * y;
    Ok(kappa_at(alg, metric, &xp, &yp))
}

/// `<R(a, b) b, a>` for already-transformed vectors.
pub(crate) fn kappa_at(alg: &MatrixLieAlgebra, metric: &MetricAtT, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let nbb = nabla(alg, metric, b, b);
    let nab = nabla(alg, metric, a, b);
    let r = nabla(alg, metric, a, &nbb) - nabla(alg, metric, b, &nab) - nabla(alg, metric, &alg.lie(a, b), b);
    metric.inner(&r, a)
}

fn check_in_p(chain: &Chain, v: &AlgebraElement) -> Result<()> {
    if v.len() != chain.dim() {
        return Err(Error::DimensionMismatch {
            expected: chain.dim(),
            got: v.len(),
        });
    }
    let off = chain.project_unchecked(v, Part::H).norm();
    if off > 1e-9 * v.norm().max(1.0) {
        return Err(Error::Precondition(format!("vector has h-component {off:e}")));
    }
    Ok(())
}

/// O'Neill term `(3/4) |[Φ^{-1} X, Φ^{-1} Y]^h|^2`.
pub fn oneill_term(chain: &Chain, def: &Deformation, t: f64, x: &AlgebraElement, y: &AlgebraElement) -> Result<f64> {
    check_in_p(chain, x)?;
    check_in_p(chain, y)?;
    let metric = def.phi_at(t)?;
    Ok(oneill_at(chain, &metric, x, y))
}

fn oneill_at(chain: &Chain, metric: &MetricAtT, x: &AlgebraElement, y: &AlgebraElement) -> f64 {
    let xp = &metric.phi_inv * x;
    let yp = &metric.phi_inv * y;
    let z = chain.project_unchecked(&chain.algebra().lie(&xp, &yp), Part::H);
    0.75 * z.norm_squared()
}

/// Unnormalized curvature on `G/H` of the plane spanned by `Φ_t^{-1} X, Φ_t^{-1} Y`.
pub fn k_direct(chain: &Chain, def: &Deformation, t: f64, x: &AlgebraElement, y: &AlgebraElement) -> Result<f64> {
    check_in_p(chain, x)?;
    check_in_p(chain, y)?;
    let metric = def.phi_at(t)?;
    Ok(k_direct_at(chain, &metric, x, y))
}

pub(crate) fn k_direct_at(chain: &Chain, metric: &MetricAtT, x: &AlgebraElement, y: &AlgebraElement) -> f64 {
    let xp = &metric.phi_inv * x;
    let yp = &metric.phi_inv * y;
    kappa_at(chain.algebra(), metric, &xp, &yp) + oneill_at(chain, metric, x, y)
}

/// Left-invariant curvature `κ(t)` on `G` of the plane `Φ_t^{-1} X, Φ_t^{-1} Y`.
pub fn kappa_direct(chain: &Chain, def: &Deformation, t: f64, x: &AlgebraElement, y: &AlgebraElement) -> Result<f64> {
    let metric = def.phi_at(t)?;
    kappa_oracle(chain.algebra(), &metric, x, y)
}

/// Lower bound `(1/10)|[X,Y]^h|^2 + g(t)|M^m|^2 + (1/4)|[X,Y]^s|^2` for `k(t)` along `Ψ = P_m`.
///
/// The bound on `T2` needs `c(t) > 0`, so it is only returned for `t < 1/4`.
pub fn k_lower_bound(chain: &Chain, x: &AlgebraElement, y: &AlgebraElement, t: f64) -> Result<f64> {
    check_in_p(chain, x)?;
    check_in_p(chain, y)?;
    if !(t < 0.25) {
        return Err(Error::OutOfRange(format!("k_lower_bound needs t < 1/4, got {t}")));
    }
    let g = chain.algebra();
    let z = g.lie(x, y);
    let xm = chain.project_unchecked(x, Part::M);
    let ym = chain.project_unchecked(y, Part::M);
    let mm = chain.project_unchecked(&g.lie(&xm, &ym), Part::M);
    let zh = chain.project_unchecked(&z, Part::H);
    let zs = chain.project_unchecked(&z, Part::S);
    Ok(0.1 * zh.norm_squared() + series::g_penalty(t)? * mm.norm_squared() + 0.25 * zs.norm_squared())
}
