//! Gauss-Newton projection onto the commuting variety `[X, Y] = 0` (optionally with `A^h = 0`).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::AlgebraElement;
use crate::curvature::Deformation;
use crate::homogeneous::{Chain, Part};

/// Residual `[Z; A^h]` of a pair in `p`-coordinates.
fn residual(chain: &Chain, def: Option<&Deformation>, xi: &DVector<f64>, eta: &DVector<f64>) -> DVector<f64> {
    let g = chain.algebra();
    let (x, y) = (chain.from_p(xi), chain.from_p(eta));
    let z = g.lie(&x, &y);
    match def {
        None => z,
        Some(d) => {
            let a = g.lie(&d.apply(&x), &y) + g.lie(&x, &d.apply(&y));
            let ah = chain.project_unchecked(&a, Part::H);
            let mut r = DVector::zeros(2 * z.len());
            r.rows_mut(0, z.len()).copy_from(&z);
            r.rows_mut(z.len(), z.len()).copy_from(&ah);
            r
        }
    }
}

fn jacobian(chain: &Chain, def: Option<&Deformation>, xi: &DVector<f64>, eta: &DVector<f64>) -> DMatrix<f64> {
    let g = chain.algebra();
    let p = chain.p_basis();
    let n = g.dim();
    let dp = p.ncols();
    let (x, y) = (chain.from_p(xi), chain.from_p(eta));
    let adx = g.ad_matrix(&x);
    let ady = g.ad_matrix(&y);
    let rows = if def.is_some() { 2 * n } else { n };
    let mut j = DMatrix::zeros(rows, 2 * dp);
    j.view_mut((0, 0), (n, dp)).copy_from(&(-&ady * p));
    j.view_mut((0, dp), (n, dp)).copy_from(&(&adx * p));
    if let Some(d) = def {
        let ph = chain.projector(Part::H);
        let psi = d.psi();
        let ad_px = g.ad_matrix(&d.apply(&x));
        let ad_py = g.ad_matrix(&d.apply(&y));
        let jx = &ph * (-&ady * psi - &ad_py) * p;
        let jy = &ph * (&ad_px + &adx * psi) * p;
        j.view_mut((n, 0), (n, dp)).copy_from(&jx);
        j.view_mut((n, dp), (n, dp)).copy_from(&jy);
    }
    j
}

/// Minimal-norm Gauss-Newton steps from `(ξ, η)` onto the variety.
///
/// Returns the projected pair and its residual norm once the residual drops
/// below `1e-13` (or stops improving below `1e-8`).
pub fn project_to_variety(
    chain: &Chain,
    def: Option<&Deformation>,
    xi: &DVector<f64>,
    eta: &DVector<f64>,
) -> Option<(DVector<f64>, DVector<f64>, f64)> {
    let dp = xi.len();
    let (mut xi, mut eta) = (xi.clone(), eta.clone());
    let mut r = residual(chain, def, &xi, &eta);
    for _ in 0..100 {
        let rn = r.norm();
        if rn < 1e-13 {
            break;
        }
        let j = jacobian(chain, def, &xi, &eta);
        let svd = j.svd(true, true);
        let smax = svd.singular_values.max();
        let step = match svd.solve(&r, 1e-10 * smax.max(1e-300)) {
            Ok(s) => s,
            Err(_) => return None,
        };
        let nxi = &xi - step.rows(0, dp);
        let neta = &eta - step.rows(dp, dp);
        let nr = residual(chain, def, &nxi, &neta);
        if nr.norm() >= rn {
            break;
        }
        xi = nxi;
        eta = neta;
        r = nr;
    }
    let rn = r.norm();
    if rn <= 1e-8 {
        Some((xi, eta, rn))
    } else {
        None
    }
}

/// Replaces `η` by its unit component orthogonal to `ξ` and normalizes `ξ`;
/// `None` when the pair is nearly parallel or the plane is degenerate.
pub fn orthonormalize(xi: &DVector<f64>, eta: &DVector<f64>, min_ratio: f64) -> Option<(DVector<f64>, DVector<f64>)> {
    let nx = xi.norm();
    if nx == 0.0 {
        return None;
    }
    let u = xi / nx;
    let perp = eta - &u * u.dot(eta);
    let np = perp.norm();
    if np < min_ratio * eta.norm() || np == 0.0 {
        return None;
    }
    Some((u, perp / np))
}

/// A random orthonormal pair in `p` with `[X, Y] = 0` to `1e-10`, or `None` after `tries` attempts.
pub fn random_commuting_pair<R: Rng>(chain: &Chain, rng: &mut R, tries: usize) -> Option<(AlgebraElement, AlgebraElement)> {
    let dp = chain.part_dim(Part::P);
    for _ in 0..tries {
        let xi = DVector::from_fn(dp, |_, _| rng.sample::<f64, _>(StandardNormal));
        let eta = DVector::from_fn(dp, |_, _| rng.sample::<f64, _>(StandardNormal));
        let Some((xi, eta, _)) = project_to_variety(chain, None, &xi, &eta) else {
            continue;
        };
        let Some((u, v)) = orthonormalize(&xi, &eta, 0.1) else {
            continue;
        };
        // polish after normalization
        let Some((u, v, _)) = project_to_variety(chain, None, &u, &v) else {
            continue;
        };
        let Some((u, v)) = orthonormalize(&u, &v, 0.5) else {
            continue;
        };
        let (x, y) = (chain.from_p(&u), chain.from_p(&v));
        if chain.algebra().lie(&x, &y).norm() < 1e-10 {
            return Some((x, y));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homogeneous::chain_by_key;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn finds_commuting_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for key in ["so4-so5-so6", "su3-spin6-spin7", "t2-u2-su3", "0-su2-su3"] {
            let c = chain_by_key(key).unwrap().chain;
            let (x, y) = random_commuting_pair(&c, &mut rng, 50).unwrap_or_else(|| panic!("{key}"));
            assert!(c.algebra().lie(&x, &y).norm() < 1e-10);
            assert!(x.dot(&y).abs() < 1e-12);
            assert!((x.norm() - 1.0).abs() < 1e-12 && (y.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_jacobian_matches_differences() {
        let c = chain_by_key("su2-so4-g2").unwrap().chain;
        let d = Deformation::proj_m(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let dp = c.part_dim(Part::P);
        let xi = DVector::from_fn(dp, |_, _| rng.sample::<f64, _>(StandardNormal));
        let eta = DVector::from_fn(dp, |_, _| rng.sample::<f64, _>(StandardNormal));
        let j = jacobian(&c, Some(&d), &xi, &eta);
        let h = 1e-6;
        for k in 0..dp {
            let mut e = DVector::zeros(dp);
            e[k] = h;
            let fd = (residual(&c, Some(&d), &(&xi + &e), &eta) - residual(&c, Some(&d), &(&xi - &e), &eta)) / (2.0 * h);
            assert!((fd - j.column(k)).norm() < 1e-6);
            let fd = (residual(&c, Some(&d), &xi, &(&eta + &e)) - residual(&c, Some(&d), &xi, &(&eta - &e))) / (2.0 * h);
            assert!((fd - j.column(dp + k)).norm() < 1e-6);
        }
    }
}
