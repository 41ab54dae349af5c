//! The named chains used by the examples, controls and the CLI.

use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};

use super::{split_ideals, Chain, Part};
use crate::algebra::{
    block_embed, build_g2, build_so, build_spin7_prime, build_su, complex_block_embed,
    embed_su4_in_so6, realify, su_complex_basis, AlgebraElement, CMatrix, MatrixLieAlgebra,
};
use crate::error::{Error, Result};
use crate::linalg;

/// What a catalog chain is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainRole {
    /// Satisfies the wedge condition `|X^m ∧ Y^m| <= C |[X, Y]|`.
    WedgeExample,
    /// Fat bundle with both pairs symmetric of rank one.
    WallachFlag,
    /// `(k, h)` symmetric, or `m` abelian.
    SymmetricControl,
    /// `h = 0` with `k` semisimple and not an ideal.
    NegativeControl,
    Exploratory,
}

#[derive(Debug, Clone)]
pub struct NamedChain {
    pub key: &'static str,
    pub chain: Chain,
    pub description: &'static str,
    pub role: ChainRole,
    /// Whether `(k, h)` is a symmetric pair.
    pub symmetric: bool,
}

struct Entry {
    key: &'static str,
    description: &'static str,
    role: ChainRole,
    symmetric: bool,
    build: fn() -> Result<Chain>,
}

const ENTRIES: &[Entry] = &[
    Entry {
        key: "sp2-su4-su5",
        description: "sp(2) < su(4) < su(5)",
        role: ChainRole::WedgeExample,
        symmetric: true,
        build: sp2_su4_su5,
    },
    Entry {
        key: "su3-spin6-spin7",
        description: "su(3) < su(4) = so(6) < so(7)",
        role: ChainRole::WedgeExample,
        symmetric: false,
        build: su3_spin6_spin7,
    },
    Entry {
        key: "g2-spin7-spin8",
        description: "g2 < so(7) < so(8)",
        role: ChainRole::WedgeExample,
        symmetric: false,
        build: || g2_chain(8),
    },
    Entry {
        key: "g2-spin7-spin9",
        description: "g2 < so(7) < so(9)",
        role: ChainRole::WedgeExample,
        symmetric: false,
        build: || g2_chain(9),
    },
    Entry {
        key: "spin7p-spin8-spin9",
        description: "so(7)' < so(8) < so(9)",
        role: ChainRole::WedgeExample,
        symmetric: false,
        build: || spin7p_chain(9),
    },
    Entry {
        key: "spin7p-spin8-spin10",
        description: "so(7)' < so(8) < so(10)",
        role: ChainRole::WedgeExample,
        symmetric: false,
        build: || spin7p_chain(10),
    },
    Entry {
        key: "spin7p-spin8-spin11",
        description: "so(7)' < so(8) < so(11)",
        role: ChainRole::WedgeExample,
        symmetric: false,
        build: || spin7p_chain(11),
    },
    Entry {
        key: "su2-so4-g2",
        description: "sp(1) < so(4) < g2, with m the complementary ideal of so(4)",
        role: ChainRole::WedgeExample,
        symmetric: false,
        build: su2_so4_g2,
    },
    Entry {
        key: "t2-u2-su3",
        description: "t2 < u(2) < su(3), the Wallach flag",
        role: ChainRole::WallachFlag,
        symmetric: true,
        build: t2_u2_su3,
    },
    Entry {
        key: "so4-so5-so6",
        description: "so(4) < so(5) < so(6) block chain",
        role: ChainRole::SymmetricControl,
        symmetric: true,
        build: so4_so5_so6,
    },
    Entry {
        key: "sp2-su4-so7",
        description: "sp(2) < su(4) = so(6) < so(7)",
        role: ChainRole::SymmetricControl,
        symmetric: true,
        build: sp2_su4_so7,
    },
    Entry {
        key: "0-so2-so3",
        description: "0 < so(2) < so(3)",
        role: ChainRole::SymmetricControl,
        symmetric: true,
        build: || trivial_h_so(2),
    },
    Entry {
        key: "0-so3-so4",
        description: "0 < so(3) < so(4)",
        role: ChainRole::Exploratory,
        symmetric: false,
        build: || trivial_h_so(3),
    },
    Entry {
        key: "0-su2-su3",
        description: "0 < su(2) < su(3)",
        role: ChainRole::NegativeControl,
        symmetric: false,
        build: zero_su2_su3,
    },
];

/// Stable keys of every catalog chain.
pub fn catalog_keys() -> Vec<&'static str> {
    ENTRIES.iter().map(|e| e.key).collect()
}

/// Builds and validates one catalog chain.
pub fn chain_by_key(key: &str) -> Result<NamedChain> {
    let entry = ENTRIES
        .iter()
        .find(|e| e.key == key)
        .ok_or_else(|| Error::UnknownChain(key.to_string()))?;
    let chain = (entry.build)().map_err(|e| Error::Catalog {
        key: entry.key.to_string(),
        reason: e.to_string(),
    })?;
    Ok(NamedChain {
        key: entry.key,
        chain,
        description: entry.description,
        role: entry.role,
        symmetric: entry.symmetric,
    })
}

/// Builds and validates every catalog chain.
pub fn catalog() -> Result<Vec<NamedChain>> {
    ENTRIES.iter().map(|e| chain_by_key(e.key)).collect()
}

fn real_block(g: &MatrixLieAlgebra, small: &MatrixLieAlgebra) -> Result<Vec<AlgebraElement>> {
    small
        .basis()
        .iter()
        .map(|b| g.element_of(&block_embed(b, g.ambient_dim())))
        .collect()
}

fn complex_block(g: &MatrixLieAlgebra, gens: &[CMatrix]) -> Result<Vec<AlgebraElement>> {
    let n = g.ambient_dim() / 2;
    gens.iter()
        .map(|z| g.element_of(&realify(&complex_block_embed(z, n))))
        .collect()
}

fn sp2_su4_su5() -> Result<Chain> {
    let g = Arc::new(build_su(5)?);
    let k = complex_block(&g, &su_complex_basis(4))?;
    let h = complex_block(&g, &crate::algebra::sp_complex_basis(2)?)?;
    Chain::build("sp2-su4-su5", g, &k, &h)
}

/// Images in `so(n)` of su(4) elements under su(4) = so(6) followed by the block inclusion.
fn via_so6(g: &MatrixLieAlgebra, su4_elements: &[AlgebraElement]) -> Result<Vec<AlgebraElement>> {
    let map = embed_su4_in_so6()?;
    su4_elements
        .iter()
        .map(|a| {
            let m6 = map.target.to_matrix(&map.apply(a));
            g.element_of(&block_embed(&m6, g.ambient_dim()))
        })
        .collect()
}

fn su4_elements(gens: &[CMatrix]) -> Result<Vec<AlgebraElement>> {
    let su4 = build_su(4)?;
    complex_block(&su4, gens)
}

fn su3_spin6_spin7() -> Result<Chain> {
    let g = Arc::new(build_so(7)?);
    let k = real_block(&g, &build_so(6)?)?;
    let h = via_so6(&g, &su4_elements(&su_complex_basis(3))?)?;
    Chain::build("su3-spin6-spin7", g, &k, &h)
}

fn sp2_su4_so7() -> Result<Chain> {
    let g = Arc::new(build_so(7)?);
    let k = real_block(&g, &build_so(6)?)?;
    let h = via_so6(&g, &su4_elements(&crate::algebra::sp_complex_basis(2)?)?)?;
    Chain::build("sp2-su4-so7", g, &k, &h)
}

fn g2_chain(n: usize) -> Result<Chain> {
    let g = Arc::new(build_so(n)?);
    let k = real_block(&g, &build_so(7)?)?;
    let h = real_block(&g, &build_g2()?)?;
    Chain::build(format!("g2-spin7-spin{n}"), g, &k, &h)
}

fn spin7p_chain(n: usize) -> Result<Chain> {
    let g = Arc::new(build_so(n)?);
    let k = real_block(&g, &build_so(8)?)?;
    let h = real_block(&g, &build_spin7_prime()?)?;
    Chain::build(format!("spin7p-spin8-spin{n}"), g, &k, &h)
}

fn so4_so5_so6() -> Result<Chain> {
    let g = Arc::new(build_so(6)?);
    let k = real_block(&g, &build_so(5)?)?;
    let h = real_block(&g, &build_so(4)?)?;
    Chain::build("so4-so5-so6", g, &k, &h)
}

fn trivial_h_so(n: usize) -> Result<Chain> {
    let g = Arc::new(build_so(n + 1)?);
    let k = real_block(&g, &build_so(n)?)?;
    Chain::build(format!("0-so{n}-so{}", n + 1), g, &k, &[])
}

fn zero_su2_su3() -> Result<Chain> {
    let g = Arc::new(build_su(3)?);
    let k = complex_block(&g, &su_complex_basis(2))?;
    Chain::build("0-su2-su3", g, &k, &[])
}

fn t2_u2_su3() -> Result<Chain> {
    let g = Arc::new(build_su(3)?);
    let i = Complex::new(0.0, 1.0);
    let diag = |d: [f64; 3]| CMatrix::from_fn(3, 3, |r, c| if r == c { i * d[r] } else { Complex::new(0.0, 0.0) });
    let t1 = diag([1.0, -1.0, 0.0]);
    let t2 = diag([1.0, 1.0, -2.0]);
    let mut kgens = su_complex_basis(2)
        .iter()
        .map(|z| complex_block_embed(z, 3))
        .collect::<Vec<_>>();
    kgens.push(t2.clone());
    let k = complex_block(&g, &kgens)?;
    let h = complex_block(&g, &[t1, t2])?;
    Chain::build("t2-u2-su3", g, &k, &h)
}

/// so(4) inside g2 as the stabilizer of the quaternions `H ⊂ O`.
fn so4_in_g2(g2: &MatrixLieAlgebra) -> Result<DMatrix<f64>> {
    // D(Im H) ⊆ Im H: rows e..ke of the i, j, k columns vanish
    let mut sys = DMatrix::zeros(12, g2.dim());
    for (col, b) in g2.basis().iter().enumerate() {
        let mut row = 0;
        for r in 3..7 {
            for c in 0..3 {
                sys[(row, col)] = b[(r, c)];
                row += 1;
            }
        }
    }
    let null = linalg::nullspace(&sys);
    if null.ncols() != 6 {
        return Err(Error::RankMismatch {
            context: "stabilizer of H in g2".into(),
            expected: 6,
            got: null.ncols(),
        });
    }
    Ok(null)
}

/// Dimension of the common kernel on `Im O` of the matrices of an ideal.
fn common_kernel_dim(g2: &MatrixLieAlgebra, ideal: &DMatrix<f64>) -> usize {
    let mut stacked = DMatrix::zeros(7 * ideal.ncols(), 7);
    for c in 0..ideal.ncols() {
        let m = g2.to_matrix(&ideal.column(c).clone_owned());
        stacked.view_mut((7 * c, 0), (7, 7)).copy_from(&m);
    }
    linalg::nullspace(&stacked).ncols()
}

fn su2_so4_g2() -> Result<Chain> {
    let g2 = Arc::new(build_g2()?);
    let so4 = so4_in_g2(&g2)?;
    let ideals = split_ideals(&g2, &so4);
    if ideals.len() != 2 || ideals.iter().any(|i| i.ncols() != 3) {
        return Err(Error::RankMismatch {
            context: "simple ideals of so(4)".into(),
            expected: 2,
            got: ideals.len(),
        });
    }
    let kernels: Vec<usize> = ideals.iter().map(|i| common_kernel_dim(&g2, i)).collect();
    let (h_idx, m_idx) = match (kernels[0] > 0, kernels[1] > 0) {
        (true, false) => (0, 1),
        (false, true) => (1, 0),
        _ => {
            return Err(Error::Catalog {
                key: "su2-so4-g2".into(),
                reason: format!("common-kernel discriminator ambiguous: {kernels:?}"),
            })
        }
    };
    let h = &ideals[h_idx];
    let m = &ideals[m_idx];
    let mut hm: Vec<DVector<f64>> = linalg::column_vectors(h);
    hm.extend(linalg::column_vectors(m));
    let units: Vec<DVector<f64>> = (0..g2.dim()).map(|i| g2.unit(i)).collect();
    let s = linalg::columns(&linalg::complement_within(&hm, &units), g2.dim());
    Chain::from_bases("su2-so4-g2", g2, h.clone(), m.clone(), s)
}

/// An orthonormal oriented basis `u` of `m` for the `su2-so4-g2` chain, rescaled
/// to `(E+, E-, E0) = (2/κ) u` with `κ = <[u1, u2], u3>`, so that
/// `[E0, E±] = ±2 E∓` and `[E+, E-] = 2 E0`.
pub fn sp1_3_triple(chain: &Chain) -> Result<[AlgebraElement; 3]> {
    if chain.part_dim(Part::M) != 3 {
        return Err(Error::Precondition(format!(
            "m has dimension {}, expected 3",
            chain.part_dim(Part::M)
        )));
    }
    let m = chain.basis(Part::M);
    let g = chain.algebra();
    let mut u: Vec<DVector<f64>> = linalg::column_vectors(&m);
    let mut kappa = g.lie(&u[0], &u[1]).dot(&u[2]);
    if kappa < 0.0 {
        u.swap(0, 1);
        kappa = -kappa;
    }
    if kappa.abs() < 1e-9 {
        return Err(Error::Precondition("m is abelian".into()));
    }
    let lam = 2.0 / kappa;
    Ok([&u[2] * lam, &u[0] * lam, &u[1] * lam])
}
