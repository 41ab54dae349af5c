//! Curvature as a quadratic form on `Λ²p`.
//!
//! For fixed `t`, `k(X, Y)` depends on `X ∧ Y` only, so it is `wᵀ F w` for a
//! symmetric matrix `F` on the wedge basis `e_a ∧ e_b`, `a < b`, of the
//! chain's `p`-basis. Building `F` once makes each evaluation in the optimizer
//! a dense matrix-vector product.

use nalgebra::{DMatrix, DVector};

use super::{Deformation, MetricAtT};
use crate::error::Result;
use crate::homogeneous::{Chain, Part};

/// Index of `e_a ∧ e_b` (`a < b`) in the lexicographic wedge basis of `R^d`.
pub fn wedge_index(d: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b && b < d);
    a * (2 * d - a - 1) / 2 + (b - a - 1)
}

pub fn wedge_pairs(d: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(d * (d.saturating_sub(1)) / 2);
    for a in 0..d {
        for b in (a + 1)..d {
            out.push((a, b));
        }
    }
    out
}

/// Coordinates of `ξ ∧ η` in the wedge basis.
pub fn wedge(xi: &DVector<f64>, eta: &DVector<f64>, pairs: &[(usize, usize)]) -> DVector<f64> {
    DVector::from_iterator(pairs.len(), pairs.iter().map(|&(a, b)| xi[a] * eta[b] - xi[b] * eta[a]))
}

/// `(2Ωη, -2Ωξ)` where `Ω` is the antisymmetric matrix with entries `v` above the diagonal.
fn wedge_gradient(
    v: &DVector<f64>,
    xi: &DVector<f64>,
    eta: &DVector<f64>,
    pairs: &[(usize, usize)],
) -> (DVector<f64>, DVector<f64>) {
    let d = xi.len();
    let mut gx = DVector::zeros(d);
    let mut gy = DVector::zeros(d);
    for (k, &(a, b)) in pairs.iter().enumerate() {
        let o = v[k];
        gx[a] += 2.0 * o * eta[b];
        gx[b] -= 2.0 * o * eta[a];
        gy[a] -= 2.0 * o * xi[b];
        gy[b] += 2.0 * o * xi[a];
    }
    (gx, gy)
}

/// A symmetric quadratic form on `Λ²p` in the chain's `p`-coordinates.
#[derive(Debug, Clone)]
pub struct CurvatureForm {
    dim_p: usize,
    pairs: Vec<(usize, usize)>,
    matrix: DMatrix<f64>,
}

impl CurvatureForm {
    /// Curvature of `Φ_t^{-1} X, Φ_t^{-1} Y` on `G/H` (`with_oneill`) or on `G`.
    pub fn new(chain: &Chain, def: &Deformation, t: f64, with_oneill: bool) -> Result<CurvatureForm> {
        let metric = def.phi_at(t)?;
        Ok(Self::from_metric(chain, &metric, with_oneill))
    }

    pub fn from_metric(chain: &Chain, metric: &MetricAtT, with_oneill: bool) -> CurvatureForm {
        let g = chain.algebra();
        let n = g.dim();
        let p = chain.p_basis();
        let d = p.ncols();
        let pairs = wedge_pairs(d);
        let np = pairs.len();
        if np == 0 {
            return CurvatureForm {
                dim_p: d,
                pairs,
                matrix: DMatrix::zeros(0, 0),
            };
        }
        // u_a = Φ^{-1} e_a, so that Φ u_a = e_a
        let u = &metric.phi_inv * p;
        let uc: Vec<DVector<f64>> = (0..d).map(|a| u.column(a).clone_owned()).collect();
        let ec: Vec<DVector<f64>> = (0..d).map(|a| p.column(a).clone_owned()).collect();

        // Q_ab = Φ ∇_{u_a} u_b and N_ab = ∇_{u_a} u_b, column a*d + b
        let mut qm = DMatrix::zeros(n, d * d);
        for a in 0..d {
            for b in 0..d {
                let l = g.lie(&uc[a], &uc[b]);
                let q = (&metric.phi * l - g.ad_transpose(&uc[a], &ec[b]) - g.ad_transpose(&uc[b], &ec[a])) * 0.5;
                qm.set_column(a * d + b, &q);
            }
        }
        let nm = &metric.phi_inv * &qm;
        // G[(ad), (bc)] = <N_ad, N_bc>_Φ
        let gram = nm.transpose() * &qm;

        // L_ab = [u_a, u_b] for a < b, and ΦL_ab
        let mut lm = DMatrix::zeros(n, np);
        for (k, &(a, b)) in pairs.iter().enumerate() {
            lm.set_column(k, &g.lie(&uc[a], &uc[b]));
        }
        let plm = &metric.phi * &lm;
        // <[u_d, u_c], L_ab>_Φ for all d, c
        let mut lall = DMatrix::zeros(n, d * d);
        for dd in 0..d {
            for c in 0..d {
                if dd != c {
                    lall.set_column(dd * d + c, &g.lie(&uc[dd], &uc[c]));
                }
            }
        }
        let cross = lall.transpose() * &plm; // (d*d) x np
        let ph = chain.projector(Part::H);
        let lh = &ph * &lm;

        let mut f = DMatrix::zeros(np, np);
        for (r, &(a, b)) in pairs.iter().enumerate() {
            // T[c, dd] = e_c . [L_ab, u_dd]
            let ad = g.ad_matrix(&lm.column(r).clone_owned());
            let tmat = p.transpose() * ad * &u;
            for (col, &(c, dd)) in pairs.iter().enumerate() {
                // Rm(a, b, dd, c) = <R(u_a, u_b) u_dd, u_c>
                let rm = gram[(a * d + dd, b * d + c)] - gram[(b * d + dd, a * d + c)]
                    - 0.5 * (tmat[(c, dd)] - cross[(dd * d + c, r)] - tmat[(dd, c)]);
                f[(r, col)] = rm;
            }
        }
        if with_oneill {
            f += (lh.transpose() * &lh) * 0.75;
        }
        let matrix = (&f + f.transpose()) * 0.5;
        CurvatureForm {
            dim_p: d,
            pairs,
            matrix,
        }
    }

    /// Form with an explicit matrix on the wedge basis.
    pub fn from_matrix(dim_p: usize, matrix: DMatrix<f64>) -> CurvatureForm {
        CurvatureForm {
            dim_p,
            pairs: wedge_pairs(dim_p),
            matrix,
        }
    }

    pub fn dim_p(&self) -> usize {
        self.dim_p
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Smallest eigenvalue of the form: a lower bound for the curvature of unit-area planes.
    pub fn min_eigenvalue(&self) -> f64 {
        if self.matrix.nrows() == 0 {
            return 0.0;
        }
        nalgebra::SymmetricEigen::new(self.matrix.clone()).eigenvalues.min()
    }

    pub fn value(&self, xi: &DVector<f64>, eta: &DVector<f64>) -> f64 {
        if self.pairs.is_empty() {
            return 0.0;
        }
        let w = wedge(xi, eta, &self.pairs);
        w.dot(&(&self.matrix * &w))
    }

    /// Value and gradients with respect to `ξ` and `η`.
    pub fn value_grad(&self, xi: &DVector<f64>, eta: &DVector<f64>) -> (f64, DVector<f64>, DVector<f64>) {
        if self.pairs.is_empty() {
            return (0.0, DVector::zeros(xi.len()), DVector::zeros(eta.len()));
        }
        let w = wedge(xi, eta, &self.pairs);
        let fw = &self.matrix * &w;
        let (gx, gy) = wedge_gradient(&fw, xi, eta, &self.pairs);
        (w.dot(&fw), gx, gy)
    }
}

/// `|X' ∧ Y'|²_{g_t}` for `X' = Φ^{-1} X`, as a form in `p`-coordinates.
#[derive(Debug, Clone)]
pub struct AreaForm {
    gram: DMatrix<f64>,
}

impl AreaForm {
    pub fn new(chain: &Chain, metric: &MetricAtT) -> AreaForm {
        let p = chain.p_basis();
        AreaForm {
            gram: p.transpose() * &metric.phi_inv * p,
        }
    }

    pub fn value_grad(&self, xi: &DVector<f64>, eta: &DVector<f64>) -> (f64, DVector<f64>, DVector<f64>) {
        let gx = &self.gram * xi;
        let gy = &self.gram * eta;
        let (a, b, c) = (xi.dot(&gx), eta.dot(&gy), xi.dot(&gy));
        (a * b - c * c, &gx * (2.0 * b) - &gy * (2.0 * c), &gy * (2.0 * a) - &gx * (2.0 * c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::k_direct;
    use crate::homogeneous::chain_by_key;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wedge_index_is_lexicographic() {
        let d = 5;
        for (k, &(a, b)) in wedge_pairs(d).iter().enumerate() {
            assert_eq!(wedge_index(d, a, b), k);
        }
    }

    #[test]
    fn form_matches_oracle() {
        for key in ["su2-so4-g2", "t2-u2-su3", "sp2-su4-so7"] {
            let c = chain_by_key(key).unwrap().chain;
            let maps = c.invariant_maps_on(Part::P);
            let psi = maps
                .iter()
                .enumerate()
                .fold(DMatrix::zeros(c.dim(), c.dim()), |acc, (i, m)| acc + m * (0.5 - 0.17 * i as f64));
            let def = Deformation::new(&c, psi, "mix").unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let (lo, hi) = def.domain();
            let t = (0.3f64).min(0.5 * hi).max(0.5 * lo);
            let form = CurvatureForm::new(&c, &def, t, true).unwrap();
            let asym = (form.matrix() - form.matrix().transpose()).abs().max();
            assert!(asym < 1e-10);
            for _ in 0..5 {
                let dp = c.part_dim(Part::P);
                let xi = DVector::from_fn(dp, |_, _| rng.random_range(-1.0..1.0));
                let eta = DVector::from_fn(dp, |_, _| rng.random_range(-1.0..1.0));
                let k = k_direct(&c, &def, t, &c.from_p(&xi), &c.from_p(&eta)).unwrap();
                let q = form.value(&xi, &eta);
                assert!((k - q).abs() < 1e-10 * k.abs().max(1.0), "{key}: {k} vs {q}");
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let c = chain_by_key("t2-u2-su3").unwrap().chain;
        let def = Deformation::proj_m(&c);
        let form = CurvatureForm::new(&c, &def, 0.2, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let xi = DVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
        let eta = DVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
        let (_, gx, gy) = form.value_grad(&xi, &eta);
        let h = 1e-6;
        for i in 0..6 {
            let mut e = DVector::zeros(6);
            e[i] = h;
            let fx = (form.value(&(&xi + &e), &eta) - form.value(&(&xi - &e), &eta)) / (2.0 * h);
            let fy = (form.value(&xi, &(&eta + &e)) - form.value(&xi, &(&eta - &e))) / (2.0 * h);
            assert!((fx - gx[i]).abs() < 1e-6);
            assert!((fy - gy[i]).abs() < 1e-6);
        }
    }
}
