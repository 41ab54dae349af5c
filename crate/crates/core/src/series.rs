//! Closed-form curvature expansions along inverse-linear paths.

use nalgebra::DVector;

use crate::algebra::AlgebraElement;
use crate::curvature::Deformation;
use crate::error::{Error, Result};
use crate::homogeneous::{Chain, Part};

/// Brackets entering the expansions, in `g`-coordinates.
#[derive(Debug, Clone)]
pub struct BracketTerms {
    /// `[X, Y]`
    pub z: AlgebraElement,
    /// `[ΨX, Y] + [X, ΨY]`
    pub a: AlgebraElement,
    /// `[ΨX, ΨY]`
    pub b: AlgebraElement,
    /// `[ΨX, Y] - [X, ΨY]`
    pub c: AlgebraElement,
    /// `Ψ²[X, Y] + B - ΨA`
    pub d: AlgebraElement,
    /// `[ΨX, ΨY] - ΨA`
    pub d0: AlgebraElement,
    /// `[X^m, Y^m]`
    pub m: AlgebraElement,
    /// `[X^s, Y^s]`
    pub s: AlgebraElement,
    /// `[ΨX, X]`
    pub px_x: AlgebraElement,
    /// `[ΨY, Y]`
    pub py_y: AlgebraElement,
}

impl BracketTerms {
    pub fn new(chain: &Chain, def: &Deformation, x: &AlgebraElement, y: &AlgebraElement) -> Result<BracketTerms> {
        let n = chain.dim();
        for v in [x, y] {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: v.len() });
            }
        }
        let g = chain.algebra();
        let (px, py) = (def.apply(x), def.apply(y));
        let z = g.lie(x, y);
        let pxy = g.lie(&px, y);
        let xpy = g.lie(x, &py);
        let a = &pxy + &xpy;
        let b = g.lie(&px, &py);
        let c = &pxy - &xpy;
        let pa = def.apply(&a);
        let d = def.apply(&def.apply(&z)) + &b - &pa;
        let d0 = &b - &pa;
        let xm = chain.project_unchecked(x, Part::M);
        let ym = chain.project_unchecked(y, Part::M);
        let xs = chain.project_unchecked(x, Part::S);
        let ys = chain.project_unchecked(y, Part::S);
        Ok(BracketTerms {
            z,
            a,
            b,
            c,
            d,
            d0,
            m: g.lie(&xm, &ym),
            s: g.lie(&xs, &ys),
            px_x: g.lie(&px, x),
            py_y: g.lie(&py, y),
        })
    }
}

/// Evaluates `|V|²_{g_t} = g0(Φ_t V, V)` from the coordinates of `V` in the eigenbasis of `Ψ`.
#[derive(Debug, Clone)]
pub struct QuarticData {
    pub coords: DVector<f64>,
    pub eigenvalues: DVector<f64>,
}

impl QuarticData {
    fn new(def: &Deformation, v: &AlgebraElement) -> QuarticData {
        QuarticData {
            coords: def.eigenvectors().transpose() * v,
            eigenvalues: def.eigenvalues().clone(),
        }
    }

    /// `|V|²_{g_t}`, a rational function of `t`.
    pub fn norm_squared_at(&self, t: f64) -> f64 {
        self.coords
            .iter()
            .zip(self.eigenvalues.iter())
            .map(|(c, l)| c * c / (1.0 - t * l))
            .sum()
    }

    /// The quartic term `-(3/4) t⁴ |V|²_{g_t}`.
    pub fn term(&self, t: f64) -> f64 {
        -0.75 * t.powi(4) * self.norm_squared_at(t)
    }
}

/// `k(t) = α + βt + γt² + δt³ - (3/4)t⁴|D^p|²_{g_t}`.
#[derive(Debug, Clone)]
pub struct CurvatureSeries {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub quartic: QuarticData,
}

impl CurvatureSeries {
    pub fn eval(&self, t: f64) -> f64 {
        self.alpha + t * (self.beta + t * (self.gamma + t * self.delta)) + self.quartic.term(t)
    }
}

/// Coefficients of the curvature series of the plane `X, Y ∈ p`.
pub fn series_general(chain: &Chain, def: &Deformation, x: &AlgebraElement, y: &AlgebraElement) -> Result<CurvatureSeries> {
    let bt = BracketTerms::new(chain, def, x, y)?;
    let h = |v: &AlgebraElement| chain.project_unchecked(v, Part::H);
    let pp = |v: &AlgebraElement| chain.project_unchecked(v, Part::P);
    let psi = |v: &AlgebraElement| def.apply(v);
    let (z, a, b, c) = (&bt.z, &bt.a, &bt.b, &bt.c);
    let zh = h(z);
    let zp = pp(z);
    let ah = h(a);
    let pz = psi(z);
    let ppz = psi(&pz);
    let pppz = psi(&ppz);

    let alpha = zh.norm_squared() + 0.25 * zp.norm_squared();
    let beta = -0.75 * pz.dot(z) - 1.5 * zh.dot(a);
    // the O'Neill contribution 2<Z^h, B> combines with -<Z, B> from κ to give Z^p
    let gamma = -0.75 * pz.norm_squared() + 1.5 * pz.dot(a) - 1.5 * zp.dot(b) + 0.75 * ah.norm_squared();
    let delta = -0.75 * pppz.dot(z) + 1.5 * ppz.dot(a) - 1.5 * pz.dot(b) - 0.75 * psi(a).dot(a) - 0.25 * psi(c).dot(c)
        + psi(&bt.px_x).dot(&bt.py_y)
        + a.dot(b)
        - 1.5 * ah.dot(b);
    Ok(CurvatureSeries {
        alpha,
        beta,
        gamma,
        delta,
        quartic: QuarticData::new(def, &pp(&bt.d)),
    })
}

/// Expansion of `k(t)` for a commuting pair.
#[derive(Debug, Clone)]
pub struct CommutingSeries {
    /// `k''(0)`
    pub k2: f64,
    /// `k'''(0)`
    pub k3: f64,
    /// `D0^p`
    pub d0p: AlgebraElement,
    pub quartic: QuarticData,
}

impl CommutingSeries {
    /// `t² k''(0)/2 + t³ k'''(0)/6 - (3/4)t⁴|D0^p|²_{g_t}`.
    pub fn eval(&self, t: f64) -> f64 {
        0.5 * self.k2 * t * t + self.k3 / 6.0 * t.powi(3) + self.quartic.term(t)
    }
}

/// Parts of the expansion that need no commuting precondition: `k''(0)`
/// restricted to `[X, Y] = 0`, `k'''(0)` and `D0^p`.
pub(crate) fn commuting_terms(chain: &Chain, def: &Deformation, x: &AlgebraElement, y: &AlgebraElement) -> Result<(f64, f64, AlgebraElement, BracketTerms)> {
    let bt = BracketTerms::new(chain, def, x, y)?;
    let g = chain.algebra();
    let (px, py) = (def.apply(x), def.apply(y));
    let ah = chain.project_unchecked(&bt.a, Part::H);
    let k2 = 1.5 * ah.norm_squared();
    let pxy = g.lie(&px, y);
    let sixth = (&bt.a - &ah * 1.5).dot(&bt.b) + bt.px_x.dot(&def.apply(&bt.py_y))
        - g.lie(x, &py).dot(&def.apply(&bt.a))
        - pxy.dot(&def.apply(&pxy));
    let d0p = chain.project_unchecked(&bt.d0, Part::P);
    Ok((k2, 6.0 * sixth, d0p, bt))
}

/// `k''(0)`, `k'''(0)` and `D0^p` for `X, Y ∈ p` with `[X, Y] = 0`.
pub fn series_commuting(chain: &Chain, def: &Deformation, x: &AlgebraElement, y: &AlgebraElement) -> Result<CommutingSeries> {
    let (k2, k3, d0p, bt) = commuting_terms(chain, def, x, y)?;
    let zn = bt.z.norm();
    if zn >= 1e-10 {
        return Err(Error::Precondition(format!("|[X, Y]| = {zn:e} is not below 1e-10")));
    }
    Ok(CommutingSeries {
        k2,
        k3,
        quartic: QuarticData::new(def, &d0p),
        d0p,
    })
}

/// Coefficients of the T-split of `k(t)` along `Ψ = P_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TSplitCoeffs {
    pub a_bar: f64,
    pub b_bar: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

pub fn tsplit_coeffs(t: f64) -> Result<TSplitCoeffs> {
    if t == 1.0 {
        return Err(Error::OutOfRange("t = 1 makes c singular".into()));
    }
    let u = 1.0 - t;
    Ok(TSplitCoeffs {
        a_bar: u * u * u,
        b_bar: 2.0 - 3.0 * t,
        a: 0.25 * u * u * u,
        b: 0.5 - 1.5 * t,
        c: (1.0 - 4.0 * t) / (4.0 * u),
    })
}

/// `(T1, T2, T3)` with `k(t) = T1 + T2 + T3` for `Ψ = P_m`.
pub fn k_split(chain: &Chain, x: &AlgebraElement, y: &AlgebraElement, t: f64) -> Result<(f64, f64, f64)> {
    let co = tsplit_coeffs(t)?;
    let n = chain.dim();
    for v in [x, y] {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
    }
    let g = chain.algebra();
    let proj = |v: &AlgebraElement, p: Part| chain.project_unchecked(v, p);
    let m = g.lie(&proj(x, Part::M), &proj(y, Part::M));
    let s = g.lie(&proj(x, Part::S), &proj(y, Part::S));
    let (mh, sh, mm, sm) = (proj(&m, Part::H), proj(&s, Part::H), proj(&m, Part::M), proj(&s, Part::M));
    let zs = proj(&g.lie(x, y), Part::S);
    let t1 = co.a_bar * mh.norm_squared() + co.b_bar * mh.dot(&sh) + sh.norm_squared();
    let t2 = co.a * mm.norm_squared() + co.b * mm.dot(&sm) + co.c * sm.norm_squared();
    let t3 = 0.25 * zs.norm_squared();
    Ok((t1, t2, t3))
}

/// `g(t) = t³(t - 1)/(1 - 4t)`, defined for `t < 1/4`.
pub fn g_penalty(t: f64) -> Result<f64> {
    if !(t < 0.25) {
        return Err(Error::OutOfRange(format!("g(t) needs t < 1/4, got {t}")));
    }
    Ok(t.powi(3) * (t - 1.0) / (1.0 - 4.0 * t))
}

/// Eigenvalues `λ/(1 + tλ)` of the Cheeger family `h_t = h(I + t h)^{-1}`.
pub fn cheeger_path(eigenvalues: &[f64], t: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(eigenvalues.len());
    for &l in eigenvalues {
        let den = 1.0 + t * l;
        if !(den > 0.0) {
            return Err(Error::OutOfRange(format!("1 + t*λ = {den} for λ = {l}, t = {t}")));
        }
        out.push(l / den);
    }
    Ok(out)
}

/// Initial direction `Ψ = I - h^{-1}` of the inverse-linear path from `I` to `h`.
pub fn inverse_linear_direction(eigenvalues: &[f64]) -> Result<Vec<f64>> {
    eigenvalues
        .iter()
        .map(|&l| {
            if l > 0.0 {
                Ok(1.0 - 1.0 / l)
            } else {
                Err(Error::OutOfRange(format!("eigenvalue {l} is not positive")))
            }
        })
        .collect()
}

/// Eigenvalues of `(I - sΨ)^{-1}` for a diagonal `Ψ`.
pub fn inverse_linear_path(direction: &[f64], s: f64) -> Result<Vec<f64>> {
    direction
        .iter()
        .map(|&p| {
            let den = 1.0 - s * p;
            if den > 0.0 {
                Ok(1.0 / den)
            } else {
                Err(Error::OutOfRange(format!("1 - s*ψ = {den}")))
            }
        })
        .collect()
}

/// `(f''(0), f'''(0))` from central differences at `h`, `h/2`, `h/4`, with two Richardson steps.
pub fn richardson_derivatives(f: impl Fn(f64) -> f64, h: f64) -> (f64, f64) {
    let f0 = f(0.0);
    let d2 = |s: f64| (f(s) - 2.0 * f0 + f(-s)) / (s * s);
    let d3 = |s: f64| (f(2.0 * s) - 2.0 * f(s) + 2.0 * f(-s) - f(-2.0 * s)) / (2.0 * s.powi(3));
    let extrapolate = |vals: [f64; 3]| {
        let r1 = [(4.0 * vals[1] - vals[0]) / 3.0, (4.0 * vals[2] - vals[1]) / 3.0];
        (16.0 * r1[1] - r1[0]) / 15.0
    };
    (
        extrapolate([d2(h), d2(h / 2.0), d2(h / 4.0)]),
        extrapolate([d3(h), d3(h / 2.0), d3(h / 4.0)]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::k_direct;
    use crate::homogeneous::chain_by_key;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_p(chain: &Chain, rng: &mut ChaCha8Rng) -> DVector<f64> {
        chain.from_p(&DVector::from_fn(chain.part_dim(Part::P), |_, _| rng.random_range(-1.0..1.0)))
    }

    fn mixed_psi(chain: &Chain) -> Deformation {
        let maps = chain.invariant_maps_on(Part::P);
        let psi = maps
            .iter()
            .enumerate()
            .fold(DMatrix::zeros(chain.dim(), chain.dim()), |acc, (i, m)| acc + m * (0.8 - 0.45 * i as f64));
        Deformation::new(chain, psi, "mix").unwrap()
    }

    #[test]
    fn zero_psi_series_is_constant() {
        let c = chain_by_key("su3-spin6-spin7").unwrap().chain;
        let d = Deformation::zero(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = series_general(&c, &d, &random_p(&c, &mut rng), &random_p(&c, &mut rng)).unwrap();
        assert_eq!((s.beta, s.gamma, s.delta), (0.0, 0.0, 0.0));
        assert_eq!(s.quartic.term(0.7), 0.0);
        assert_eq!(s.eval(3.0), s.alpha);
    }

    #[test]
    fn series_matches_oracle() {
        for key in ["su2-so4-g2", "t2-u2-su3", "sp2-su4-su5"] {
            let c = chain_by_key(key).unwrap().chain;
            let d = mixed_psi(&c);
            let (lo, hi) = d.domain();
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            for _ in 0..3 {
                let (x, y) = (random_p(&c, &mut rng), random_p(&c, &mut rng));
                let s = series_general(&c, &d, &x, &y).unwrap();
                for _ in 0..5 {
                    let t = rng.random_range(lo.max(-3.0) * 0.95..hi.min(3.0) * 0.95);
                    let k = k_direct(&c, &d, t, &x, &y).unwrap();
                    assert!((s.eval(t) - k).abs() <= 1e-8 * k.abs().max(1.0), "{key} t={t}: {} vs {k}", s.eval(t));
                }
            }
        }
    }

    #[test]
    fn gamma_jacobi_identity() {
        let c = chain_by_key("sp2-su4-su5").unwrap().chain;
        let d = mixed_psi(&c);
        let g = c.algebra();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (x, y) = (random_p(&c, &mut rng), random_p(&c, &mut rng));
        let bt = BracketTerms::new(&c, &d, &x, &y).unwrap();
        let lhs = bt.px_x.dot(&bt.py_y);
        let rhs = bt.z.dot(&bt.b) - g.lie(&x, &d.apply(&y)).dot(&g.lie(&d.apply(&x), &y));
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn quartic_identity() {
        let c = chain_by_key("su3-spin6-spin7").unwrap().chain;
        let d = mixed_psi(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (x, y) = (random_p(&c, &mut rng), random_p(&c, &mut rng));
        let bt = BracketTerms::new(&c, &d, &x, &y).unwrap();
        let t = 0.2;
        let metric = d.phi_at(t).unwrap();
        let bh = c.project(&bt.b, Part::H).unwrap();
        let dp = c.project(&bt.d, Part::P).unwrap();
        let lhs = bh.norm_squared() - metric.inner(&bt.d, &bt.d);
        assert!((lhs + metric.inner(&dp, &dp)).abs() < 1e-10);
    }

    #[test]
    fn commuting_gamma_is_three_quarters_ah() {
        let c = chain_by_key("so4-so5-so6").unwrap().chain;
        let d = mixed_psi(&c);
        // two commuting elements of p: e_16 and e_25 style block rotations
        let g = c.algebra();
        let p = c.p_basis();
        let mut pair = None;
        'outer: for i in 0..p.ncols() {
            for j in (i + 1)..p.ncols() {
                let (x, y) = (p.column(i).clone_owned(), p.column(j).clone_owned());
                if g.lie(&x, &y).norm() < 1e-14 {
                    pair = Some((x, y));
                    break 'outer;
                }
            }
        }
        let (x, y) = pair.expect("commuting basis pair");
        let s = series_general(&c, &d, &x, &y).unwrap();
        let sc = series_commuting(&c, &d, &x, &y).unwrap();
        assert_eq!(s.alpha, 0.0);
        assert!(s.beta.abs() < 1e-14);
        assert!((s.gamma - 0.5 * sc.k2).abs() < 1e-12);
        assert!((s.delta - sc.k3 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn commuting_precondition_is_enforced() {
        let c = chain_by_key("so4-so5-so6").unwrap().chain;
        let d = Deformation::proj_m(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = series_commuting(&c, &d, &random_p(&c, &mut rng), &random_p(&c, &mut rng));
        assert!(matches!(r, Err(Error::Precondition(_))));
        let z = DVector::zeros(c.dim());
        let sc = series_commuting(&c, &Deformation::zero(&c), &z, &z).unwrap();
        assert_eq!((sc.k2, sc.k3, sc.d0p.norm()), (0.0, 0.0, 0.0));
    }

    #[test]
    fn tsplit_values() {
        let co = tsplit_coeffs(0.0).unwrap();
        assert_eq!((co.a_bar, co.b_bar, co.a, co.b, co.c), (1.0, 2.0, 0.25, 0.5, 0.25));
        assert_eq!(tsplit_coeffs(0.25).unwrap().c, 0.0);
        let h = tsplit_coeffs(0.5).unwrap();
        assert!((4.0 * h.a_bar - h.b_bar * h.b_bar - 0.25).abs() < 1e-15);
        assert!(tsplit_coeffs(1.0).is_err());
    }

    #[test]
    fn t1_form_is_nonnegative_exactly_up_to_three_quarters() {
        // T1 = ā|M^h|² + b̄<M^h, S^h> + |S^h|² is nonnegative for all brackets iff this 2x2 form is
        let min_eig = |t: f64| {
            let co = tsplit_coeffs(t).unwrap();
            let (p, q, r) = (co.a_bar, 0.5 * co.b_bar, 1.0);
            0.5 * (p + r) - (0.25 * (p - r).powi(2) + q * q).sqrt()
        };
        for i in 0..=75 {
            let t = -1.0 + i as f64 * (1.75 / 75.0);
            assert!(min_eig(t) >= -1e-14, "t = {t}");
        }
        for t in [0.76, 0.8, 0.9, 0.99] {
            assert!(min_eig(t) < 0.0, "t = {t}");
        }
    }

    #[test]
    fn tsplit_matches_oracle() {
        let c = chain_by_key("su3-spin6-spin7").unwrap().chain;
        let d = Deformation::proj_m(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for t in [-1.0, 0.0, 0.2, 0.6] {
            let (x, y) = (random_p(&c, &mut rng), random_p(&c, &mut rng));
            let (t1, t2, t3) = k_split(&c, &x, &y, t).unwrap();
            let k = k_direct(&c, &d, t, &x, &y).unwrap();
            assert!((t1 + t2 + t3 - k).abs() < 1e-9 * k.abs().max(1.0));
        }
    }

    #[test]
    fn g_penalty_values() {
        assert_eq!(g_penalty(0.0).unwrap(), 0.0);
        assert!((g_penalty(0.125).unwrap() + 7.0 / 2048.0).abs() < 1e-15);
        assert!(g_penalty(0.25).is_err());
        for t in [0.01, 0.1, 0.2, 0.24] {
            assert!(g_penalty(t).unwrap() < 0.0);
        }
    }

    #[test]
    fn cheeger_and_inverse_linear() {
        assert_eq!(cheeger_path(&[1.0, 1.0], 1.0).unwrap(), vec![0.5, 0.5]);
        assert!((cheeger_path(&[2.0], 1.0).unwrap()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!(cheeger_path(&[2.0], -0.5).is_err());
        assert_eq!(inverse_linear_direction(&[1.0, 2.0]).unwrap(), vec![0.0, 0.5]);
        let dir = inverse_linear_direction(&[0.5, 3.0]).unwrap();
        let back = inverse_linear_path(&dir, 1.0).unwrap();
        assert!((back[0] - 0.5).abs() < 1e-15 && (back[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn richardson_recovers_polynomial_derivatives() {
        let (d2, d3) = richardson_derivatives(|t| 1.0 + 2.0 * t + 3.0 * t * t - 4.0 * t.powi(3) + t.powi(5), 1e-2);
        assert!((d2 - 6.0).abs() < 1e-8);
        assert!((d3 + 24.0).abs() < 1e-6);
    }
}
