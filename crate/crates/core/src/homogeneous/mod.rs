//! Chains `h ⊂ k ⊂ g` with the orthogonal splitting `g = h ⊕ m ⊕ s`.

mod catalog;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::algebra::{AlgebraElement, MatrixLieAlgebra};
use crate::error::{Error, Result};
use crate::linalg;

pub use crate::certify::fatness_margin;
pub use catalog::{catalog, catalog_keys, chain_by_key, sp1_3_triple, ChainRole, NamedChain};

/// Tolerance for the chain invariants.
pub const CHAIN_TOL: f64 = 1e-10;
/// Relative eigenvalue cutoff for the commutant kernel.
const COMMUTANT_CUTOFF: f64 = 1e-10;

/// Named components of the splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    H,
    M,
    S,
    /// `m ⊕ s`
    P,
    /// `h ⊕ m`
    K,
}

impl FromStr for Part {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h" => Ok(Part::H),
            "m" => Ok(Part::M),
            "s" => Ok(Part::S),
            "p" => Ok(Part::P),
            "k" => Ok(Part::K),
            other => Err(Error::UnknownPart(other.to_string())),
        }
    }
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Part::H => "h",
            Part::M => "m",
            Part::S => "s",
            Part::P => "p",
            Part::K => "k",
        };
        f.write_str(s)
    }
}

/// Residuals of the chain invariants, measured at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainResiduals {
    pub projectors: f64,
    pub h_closed: f64,
    pub k_closed: f64,
    pub h_preserves_m: f64,
    pub h_preserves_s: f64,
    pub k_preserves_s: f64,
}

impl ChainResiduals {
    pub fn max(&self) -> f64 {
        [
            self.projectors,
            self.h_closed,
            self.k_closed,
            self.h_preserves_m,
            self.h_preserves_s,
            self.k_preserves_s,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// `h ⊂ k ⊂ g` with orthonormal bases of `h`, `m = k ⊖ h` and `s = g ⊖ k`,
/// all stored as columns in `g`-coordinates.
#[derive(Debug, Clone)]
pub struct Chain {
    name: String,
    g: Arc<MatrixLieAlgebra>,
    h: DMatrix<f64>,
    m: DMatrix<f64>,
    s: DMatrix<f64>,
    p: DMatrix<f64>,
    ph: DMatrix<f64>,
    pm: DMatrix<f64>,
    ps: DMatrix<f64>,
    residuals: ChainResiduals,
}

/// Largest component of `[a, b]` outside the subspace with projector `proj`,
/// over all pairs of columns.
fn bracket_leak(g: &MatrixLieAlgebra, a: &DMatrix<f64>, b: &DMatrix<f64>, proj: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.ncols() {
        let x = a.column(i).clone_owned();
        for j in 0..b.ncols() {
            let z = g.lie(&x, &b.column(j).clone_owned());
            let leak = &z - proj * &z;
            worst = worst.max(leak.norm());
        }
    }
    worst
}

fn projector(basis: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    if basis.ncols() == 0 {
        DMatrix::zeros(n, n)
    } else {
        basis * basis.transpose()
    }
}

impl Chain {
    /// Builds the chain from generators of `k` and `h` (coefficient vectors in `g`).
    ///
    /// `h` is the span of `h_generators`, `k` the span of both lists; both spans
    /// must already be subalgebras.
    pub fn build(
        name: impl Into<String>,
        g: Arc<MatrixLieAlgebra>,
        k_generators: &[AlgebraElement],
        h_generators: &[AlgebraElement],
    ) -> Result<Chain> {
        let n = g.dim();
        for v in k_generators.iter().chain(h_generators) {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: v.len() });
            }
        }
        let h_list = linalg::gram_schmidt(h_generators);
        let k_only = linalg::gram_schmidt(k_generators);
        // h must lie in the span of the k generators
        let kmat = linalg::columns(&k_only, n);
        for v in &h_list {
            let proj = &kmat * (kmat.transpose() * v);
            let off = (v - proj).norm();
            if off > 1e-9 {
                return Err(Error::NotNested(format!("h leaves k by {off:e}")));
            }
        }
        let m_list = linalg::complement_within(&h_list, &k_only);
        let mut hk = h_list.clone();
        hk.extend(m_list.iter().cloned());
        let units: Vec<DVector<f64>> = (0..n).map(|i| g.unit(i)).collect();
        let s_list = linalg::complement_within(&hk, &units);
        Self::from_bases(
            name,
            g,
            linalg::columns(&h_list, n),
            linalg::columns(&m_list, n),
            linalg::columns(&s_list, n),
        )
    }

    /// Assembles a chain from orthonormal bases of `h`, `m` and `s` and validates it.
    pub fn from_bases(
        name: impl Into<String>,
        g: Arc<MatrixLieAlgebra>,
        h: DMatrix<f64>,
        m: DMatrix<f64>,
        s: DMatrix<f64>,
    ) -> Result<Chain> {
        let name = name.into();
        let n = g.dim();
        if h.ncols() + m.ncols() + s.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: h.ncols() + m.ncols() + s.ncols(),
            });
        }
        let ph = projector(&h, n);
        let pm = projector(&m, n);
        let ps = projector(&s, n);
        let mut projectors = linalg::max_abs(&(&ph + &pm + &ps - DMatrix::identity(n, n)));
        for p in [&ph, &pm, &ps] {
            projectors = projectors
                .max(linalg::max_abs(&(p * p - p)))
                .max(linalg::max_abs(&(p - p.transpose())));
        }
        let pk = &ph + &pm;
        let k = concat(&h, &m);
        let residuals = ChainResiduals {
            projectors,
            h_closed: bracket_leak(&g, &h, &h, &ph),
            k_closed: bracket_leak(&g, &k, &k, &pk),
            h_preserves_m: bracket_leak(&g, &h, &m, &pm),
            h_preserves_s: bracket_leak(&g, &h, &s, &ps),
            k_preserves_s: bracket_leak(&g, &k, &s, &ps),
        };
        if residuals.h_closed > CHAIN_TOL {
            return Err(Error::NotClosed {
                context: format!("{name}: h"),
                residual: residuals.h_closed,
            });
        }
        if residuals.k_closed > CHAIN_TOL {
            return Err(Error::NotClosed {
                context: format!("{name}: k"),
                residual: residuals.k_closed,
            });
        }
        if residuals.max() > CHAIN_TOL {
            return Err(Error::NotNested(format!("{name}: splitting not invariant ({residuals:?})")));
        }
        let p = concat(&m, &s);
        Ok(Chain {
            name,
            g,
            h,
            m,
            s,
            p,
            ph,
            pm,
            ps,
            residuals,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn algebra(&self) -> &MatrixLieAlgebra {
        &self.g
    }

    pub fn algebra_arc(&self) -> &Arc<MatrixLieAlgebra> {
        &self.g
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn residuals(&self) -> ChainResiduals {
        self.residuals
    }

    /// Orthonormal basis of a part, as columns in `g`-coordinates.
    /// The basis of `p` is `[m | s]` and that of `k` is `[h | m]`.
    pub fn basis(&self, part: Part) -> DMatrix<f64> {
        match part {
            Part::H => self.h.clone(),
            Part::M => self.m.clone(),
            Part::S => self.s.clone(),
            Part::P => self.p.clone(),
            Part::K => concat(&self.h, &self.m),
        }
    }

    pub fn p_basis(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn part_dim(&self, part: Part) -> usize {
        match part {
            Part::H => self.h.ncols(),
            Part::M => self.m.ncols(),
            Part::S => self.s.ncols(),
            Part::P => self.p.ncols(),
            Part::K => self.h.ncols() + self.m.ncols(),
        }
    }

    pub fn projector(&self, part: Part) -> DMatrix<f64> {
        match part {
            Part::H => self.ph.clone(),
            Part::M => self.pm.clone(),
            Part::S => self.ps.clone(),
            Part::P => &self.pm + &self.ps,
            Part::K => &self.ph + &self.pm,
        }
    }

    pub fn projector_ref(&self, part: Part) -> Option<&DMatrix<f64>> {
        match part {
            Part::H => Some(&self.ph),
            Part::M => Some(&self.pm),
            Part::S => Some(&self.ps),
            _ => None,
        }
    }

    /// The named component of `x`.
    pub fn project(&self, x: &AlgebraElement, part: Part) -> Result<AlgebraElement> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self.project_unchecked(x, part))
    }

    pub(crate) fn project_unchecked(&self, x: &AlgebraElement, part: Part) -> AlgebraElement {
        match part {
            Part::H => &self.ph * x,
            Part::M => &self.pm * x,
            Part::S => &self.ps * x,
            Part::P => x - &self.ph * x,
            Part::K => &self.ph * x + &self.pm * x,
        }
    }

    /// `g`-coordinates of the vector with `p`-coordinates `xi`.
    pub fn from_p(&self, xi: &DVector<f64>) -> AlgebraElement {
        &self.p * xi
    }

    /// `p`-coordinates of `x` (its `h` component is discarded).
    pub fn to_p(&self, x: &AlgebraElement) -> DVector<f64> {
        self.p.transpose() * x
    }

    /// Largest `|[x, y]^m|` over basis pairs of `m`; zero for symmetric pairs `(k, h)`.
    pub fn symmetric_pair_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.m.ncols() {
            let x = self.m.column(i).clone_owned();
            for j in (i + 1)..self.m.ncols() {
                let z = self.g.lie(&x, &self.m.column(j).clone_owned());
                worst = worst.max((&self.pm * z).norm());
            }
        }
        worst
    }

    /// Largest `|[x, y]^s|` over basis pairs of `s`; zero when `(g, k)` is symmetric.
    pub fn outer_symmetric_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.s.ncols() {
            let x = self.s.column(i).clone_owned();
            for j in (i + 1)..self.s.ncols() {
                let z = self.g.lie(&x, &self.s.column(j).clone_owned());
                worst = worst.max((&self.ps * z).norm());
            }
        }
        worst
    }

    pub fn is_symmetric_pair(&self) -> bool {
        self.symmetric_pair_residual() < CHAIN_TOL
    }

    /// Largest `|[h, E v] - E [h, v]|` over basis vectors `h` of `h` and `v` of `p`,
    /// for an endomorphism `endo` of `g`-coordinates.
    pub fn ad_invariance_residual(&self, endo: &DMatrix<f64>) -> Result<f64> {
        let n = self.dim();
        if endo.nrows() != n || endo.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: endo.nrows(),
            });
        }
        let mut worst = 0.0f64;
        for i in 0..self.h.ncols() {
            let ad = self.g.ad_matrix(&self.h.column(i).clone_owned());
            let comm = &ad * endo - endo * &ad;
            worst = worst.max((comm * &self.p).abs().max());
        }
        Ok(worst)
    }

    /// Basis of the `ad_h`-invariant symmetric endomorphisms of the span of `basis`
    /// (columns in `g`-coordinates), in the coordinates of that basis.
    pub fn invariant_symmetric_maps(&self, basis: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
        let gens: Vec<DMatrix<f64>> = (0..self.h.ncols())
            .map(|i| {
                let ad = self.g.ad_matrix(&self.h.column(i).clone_owned());
                basis.transpose() * ad * basis
            })
            .collect();
        symmetric_commutant(&gens, basis.ncols())
    }

    /// Invariant symmetric endomorphisms of a part, lifted to `g`-coordinates.
    pub fn invariant_maps_on(&self, part: Part) -> Vec<DMatrix<f64>> {
        let b = self.basis(part);
        self.invariant_symmetric_maps(&b)
            .into_iter()
            .map(|s| &b * s * b.transpose())
            .collect()
    }
}

fn concat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// Orthonormal (Frobenius) basis of the symmetric `d x d` matrices commuting with
/// every matrix in `gens`.
///
/// The basis spans the kernel of `S -> Σ_i |[g_i, S]|²`, whose Gram matrix is
/// assembled directly in the orthonormal basis of symmetric matrices.
pub fn symmetric_commutant(gens: &[DMatrix<f64>], d: usize) -> Vec<DMatrix<f64>> {
    if d == 0 {
        return Vec::new();
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    // each basis element as its at most two (row, col, weight) entries
    let mut sym_basis: Vec<Vec<(usize, usize, f64)>> = Vec::new();
    for i in 0..d {
        for j in i..d {
            if i == j {
                sym_basis.push(vec![(i, i, 1.0)]);
            } else {
                sym_basis.push(vec![(i, j, r), (j, i, r)]);
            }
        }
    }
    let to_matrix = |coeffs: &[f64]| {
        let mut s = DMatrix::zeros(d, d);
        for (e, &c) in sym_basis.iter().zip(coeffs) {
            for &(i, j, w) in e {
                s[(i, j)] += w * c;
            }
        }
        s
    };
    let nb = sym_basis.len();
    if gens.is_empty() {
        return (0..nb)
            .map(|a| {
                let mut c = vec![0.0; nb];
                c[a] = 1.0;
                to_matrix(&c)
            })
            .collect();
    }
    let gtg = gens.iter().fold(DMatrix::zeros(d, d), |acc, g| acc + g.transpose() * g);
    let ggt = gens.iter().fold(DMatrix::zeros(d, d), |acc, g| acc + g * g.transpose());
    // <L(E_rc), L(E_r'c')> summed over generators, with L(S) = gS - Sg
    let entry = |r0: usize, c0: usize, r1: usize, c1: usize| {
        let mut v = 0.0;
        if c0 == c1 {
            v += gtg[(r0, r1)];
        }
        if r0 == r1 {
            v += ggt[(c0, c1)];
        }
        for g in gens {
            v -= g[(r1, r0)] * g[(c1, c0)] + g[(r0, r1)] * g[(c0, c1)];
        }
        v
    };
    let mut gram = DMatrix::zeros(nb, nb);
    for a in 0..nb {
        for b in a..nb {
            let mut v = 0.0;
            for &(r0, c0, w0) in &sym_basis[a] {
                for &(r1, c1, w1) in &sym_basis[b] {
                    v += w0 * w1 * entry(r0, c0, r1, c1);
                }
            }
            gram[(a, b)] = v;
            gram[(b, a)] = v;
        }
    }
    let eig = SymmetricEigen::new(gram);
    let scale = eig.eigenvalues.abs().max().max(1e-300);
    let mut kernel: Vec<usize> = (0..nb).filter(|&i| eig.eigenvalues[i] < COMMUTANT_CUTOFF * scale).collect();
    kernel.sort_unstable();
    kernel
        .into_iter()
        .map(|i| {
            let v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            to_matrix(&v)
        })
        .collect()
}

/// Splits the subalgebra spanned by the orthonormal columns of `basis` into the
/// isotypic pieces of its adjoint action (the simple ideals when they are
/// pairwise non-isomorphic as modules), ordered by first basis appearance.
pub fn split_ideals(g: &MatrixLieAlgebra, basis: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    let d = basis.ncols();
    let gens: Vec<DMatrix<f64>> = (0..d)
        .map(|i| basis.transpose() * g.ad_matrix(&basis.column(i).clone_owned()) * basis)
        .collect();
    let comm = symmetric_commutant(&gens, d);
    let mut t = DMatrix::zeros(d, d);
    for (i, s) in comm.iter().enumerate() {
        // fixed incommensurable weights separate the eigenspaces generically
        t += s * (1.0 + 0.618_033_988_749_895 * (i as f64 + 1.0).sqrt());
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let scale = eig.eigenvalues.abs().max().max(1.0);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match groups.last_mut() {
            Some(gr) if (eig.eigenvalues[i] - eig.eigenvalues[gr[0]]).abs() < 1e-6 * scale => gr.push(i),
            _ => groups.push(vec![i]),
        }
    }
    let mut pieces: Vec<DMatrix<f64>> = groups
        .iter()
        .map(|gr| {
            let vecs: Vec<DVector<f64>> = gr.iter().map(|&i| basis * eig.eigenvectors.column(i)).collect();
            linalg::columns(&linalg::gram_schmidt(&vecs), g.dim())
        })
        .collect();
    let first = |m: &DMatrix<f64>| {
        let coeffs = basis.transpose() * m;
        (0..d)
            .find(|&r| coeffs.row(r).norm() > 1e-6)
            .unwrap_or(d)
    };
    pieces.sort_by_key(first);
    pieces
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{block_embed, build_so, build_su, complex_block_embed, realify, su_complex_basis};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn so_block_chain(n: usize) -> Chain {
        let g = Arc::new(build_so(n + 2).unwrap());
        let k: Vec<_> = build_so(n + 1)
            .unwrap()
            .basis()
            .iter()
            .map(|b| g.element_of(&block_embed(b, n + 2)).unwrap())
            .collect();
        let h: Vec<_> = build_so(n)
            .unwrap()
            .basis()
            .iter()
            .map(|b| g.element_of(&block_embed(b, n + 2)).unwrap())
            .collect();
        Chain::build("so", g, &k, &h).unwrap()
    }

    #[test]
    fn so4_so5_so6_dimensions() {
        let c = so_block_chain(4);
        assert_eq!(c.part_dim(Part::H), 6);
        assert_eq!(c.part_dim(Part::M), 4);
        assert_eq!(c.part_dim(Part::S), 5);
        assert!(c.residuals().max() < 1e-12);
    }

    #[test]
    fn trivial_h_gives_p_equal_g() {
        let g = Arc::new(build_so(4).unwrap());
        let k: Vec<_> = build_so(3)
            .unwrap()
            .basis()
            .iter()
            .map(|b| g.element_of(&block_embed(b, 4)).unwrap())
            .collect();
        let c = Chain::build("0-so3-so4", g, &k, &[]).unwrap();
        assert_eq!(c.part_dim(Part::H), 0);
        assert_eq!(c.part_dim(Part::P), 6);
        assert!(linalg::max_abs(&c.projector(Part::H)) == 0.0);
    }

    #[test]
    fn h_equal_k_gives_trivial_m() {
        let g = Arc::new(build_so(4).unwrap());
        let k: Vec<_> = build_so(3)
            .unwrap()
            .basis()
            .iter()
            .map(|b| g.element_of(&block_embed(b, 4)).unwrap())
            .collect();
        let c = Chain::build("so3-so3-so4", g, &k, &k).unwrap();
        assert_eq!(c.part_dim(Part::M), 0);
        assert_eq!(c.symmetric_pair_residual(), 0.0);
    }

    #[test]
    fn non_nested_spans_are_rejected() {
        let g = Arc::new(build_so(4).unwrap());
        let k = vec![g.unit(0)];
        let h = vec![g.unit(1)];
        assert!(matches!(Chain::build("bad", g, &k, &h), Err(Error::NotNested(_))));
    }

    #[test]
    fn non_subalgebra_is_rejected() {
        let g = Arc::new(build_so(4).unwrap());
        // e12 and e13 do not span a subalgebra
        let k = vec![g.unit(0), g.unit(1)];
        assert!(matches!(Chain::build("bad", g, &k, &[]), Err(Error::NotClosed { .. })));
    }

    #[test]
    fn projections_resolve_identity() {
        let c = so_block_chain(4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = DVector::from_fn(c.dim(), |_, _| rng.random_range(-1.0..1.0));
        let y = DVector::from_fn(c.dim(), |_, _| rng.random_range(-1.0..1.0));
        let sum = c.project(&x, Part::H).unwrap() + c.project(&x, Part::M).unwrap() + c.project(&x, Part::S).unwrap();
        assert!((sum - &x).norm() < 1e-12);
        let xm = c.project(&x, Part::M).unwrap();
        let ys = c.project(&y, Part::S).unwrap();
        assert!(xm.dot(&ys).abs() < 1e-12);
        assert!((c.project(&xm, Part::M).unwrap() - &xm).norm() < 1e-12);
        assert!(matches!("q".parse::<Part>(), Err(Error::UnknownPart(_))));
        assert!(c.project(&DVector::zeros(3), Part::M).is_err());
    }

    #[test]
    fn symmetric_pair_residuals() {
        assert!(so_block_chain(4).symmetric_pair_residual() < 1e-10);
        let g = Arc::new(build_su(4).unwrap());
        let embed = |n: usize| -> Vec<AlgebraElement> {
            su_complex_basis(n)
                .iter()
                .map(|z| g.element_of(&realify(&complex_block_embed(z, 4))).unwrap())
                .collect()
        };
        let c = Chain::build("su2-su3-su4", g.clone(), &embed(3), &embed(2)).unwrap();
        assert!(c.symmetric_pair_residual() > 0.1);
    }

    #[test]
    fn invariance_residuals() {
        let c = so_block_chain(4);
        let n = c.dim();
        let ip = c.projector(Part::P);
        assert!(c.ad_invariance_residual(&ip).unwrap() < 1e-12);
        assert!(c.ad_invariance_residual(&c.projector(Part::M)).unwrap() < 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let r = c.projector(Part::P) * (&r + r.transpose()) * c.projector(Part::P);
        assert!(c.ad_invariance_residual(&r).unwrap() > 1e-3);
    }

    #[test]
    fn commutant_of_nothing_is_all_symmetric_maps() {
        assert_eq!(symmetric_commutant(&[], 3).len(), 6);
    }

    #[test]
    fn so4_splits_into_two_ideals() {
        let so4 = build_so(4).unwrap();
        let basis = DMatrix::identity(6, 6);
        let ideals = split_ideals(&so4, &basis);
        assert_eq!(ideals.len(), 2);
        assert_eq!(ideals[0].ncols(), 3);
        // the two ideals commute
        for i in 0..3 {
            for j in 0..3 {
                let z = so4.lie(&ideals[0].column(i).clone_owned(), &ideals[1].column(j).clone_owned());
                assert!(z.norm() < 1e-12);
            }
        }
    }
}
