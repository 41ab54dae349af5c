//! g2, spin'(7), the su(4) -> so(6) isomorphism and the quaternionic sp(1) triple.

use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};

use super::classical::{build_so, build_su, CMatrix};
use super::octonion::{self, qmul, Octonion, Quaternion};
use super::{AlgebraMap, MatrixLieAlgebra};
use crate::error::{Error, Result};
use crate::linalg;

/// Acts with a 7x7 matrix on the imaginary part of `x` (and by zero on `1`).
fn act_imaginary(d: &DMatrix<f64>, x: &Octonion) -> Octonion {
    let mut out = [0.0; 8];
    for r in 0..7 {
        let mut s = 0.0;
        for c in 0..7 {
            s += d[(r, c)] * x.0[c + 1];
        }
        out[r + 1] = s;
    }
    Octonion(out)
}

/// Derivation residual system: column `c` holds `D(xy) - D(x)y - xD(y)`
/// for `D` the `c`-th so(7) basis element, over all imaginary basis pairs.
fn derivation_system(so7: &MatrixLieAlgebra) -> DMatrix<f64> {
    let mut sys = DMatrix::zeros(7 * 7 * 8, so7.dim());
    for (col, d) in so7.basis().iter().enumerate() {
        let mut row = 0;
        for p in 0..7 {
            for q in 0..7 {
                let (x, y) = (Octonion::imaginary_unit(p), Octonion::imaginary_unit(q));
                let lhs = act_imaginary(d, &(x * y));
                let rhs = act_imaginary(d, &x) * y + x * act_imaginary(d, &y);
                let diff = lhs - rhs;
                for v in diff.0 {
                    sys[(row, col)] = v;
                    row += 1;
                }
            }
        }
    }
    sys
}

fn g2_subspaces() -> Result<(MatrixLieAlgebra, DMatrix<f64>, DMatrix<f64>)> {
    let so7 = build_so(7)?;
    let derivations = linalg::nullspace(&derivation_system(&so7));
    if derivations.ncols() != 14 {
        return Err(Error::RankMismatch {
            context: "g2 derivation system".into(),
            expected: 14,
            got: derivations.ncols(),
        });
    }
    let ad: Vec<DVector<f64>> = (0..7)
        .map(|q| so7.element_of(&octonion::ad_imaginary(&Octonion::imaginary_unit(q))))
        .collect::<Result<_>>()?;
    let ad = linalg::gram_schmidt(&ad);
    let units: Vec<DVector<f64>> = (0..so7.dim()).map(|i| so7.unit(i)).collect();
    let complement = linalg::columns(&linalg::complement_within(&ad, &units), so7.dim());
    Ok((so7, derivations, complement))
}

/// Distance between the two characterizations of g2 inside so(7): the
/// derivation algebra of the octonions, and the orthogonal complement of
/// `{ad_q : q in Im(O)}`.
pub fn g2_characterization_distance() -> Result<f64> {
    let (_, derivations, complement) = g2_subspaces()?;
    if complement.ncols() != derivations.ncols() {
        return Ok(f64::INFINITY);
    }
    Ok(linalg::subspace_distance(&derivations, &complement))
}

/// g2 as the derivation algebra of the octonions, acting on `Im(O) = R^7`.
pub fn build_g2() -> Result<MatrixLieAlgebra> {
    let (so7, derivations, complement) = g2_subspaces()?;
    let dist = linalg::subspace_distance(&derivations, &complement);
    if complement.ncols() != 14 || dist > 1e-8 {
        return Err(Error::NotNested(format!(
            "derivations and ad_q-complement disagree (distance {dist:e})"
        )));
    }
    let mats: Vec<DMatrix<f64>> = linalg::column_vectors(&derivations)
        .iter()
        .map(|c| so7.to_matrix(c))
        .collect();
    MatrixLieAlgebra::from_matrices("g2", 7, &mats)
}

/// so(7)' inside so(8): the orthogonal complement of the left multiplications
/// `L_q`, `q in Im(O)`.
pub fn build_spin7_prime() -> Result<MatrixLieAlgebra> {
    let so8 = build_so(8)?;
    let lq: Vec<DVector<f64>> = (0..7)
        .map(|q| so8.element_of(&octonion::left_multiplication(&Octonion::imaginary_unit(q))))
        .collect::<Result<_>>()?;
    let lq = linalg::gram_schmidt(&lq);
    let units: Vec<DVector<f64>> = (0..so8.dim()).map(|i| so8.unit(i)).collect();
    let complement = linalg::complement_within(&lq, &units);
    if complement.len() != 21 {
        return Err(Error::RankMismatch {
            context: "complement of L_q in so(8)".into(),
            expected: 21,
            got: complement.len(),
        });
    }
    let mats: Vec<DMatrix<f64>> = complement.iter().map(|c| so8.to_matrix(c)).collect();
    MatrixLieAlgebra::from_matrices("spin7'", 8, &mats)
}

/// Inverse of realification for matrices of the form `[[A, -B], [B, A]]`.
pub(crate) fn complexify(r: &DMatrix<f64>) -> CMatrix {
    let n = r.nrows() / 2;
    CMatrix::from_fn(n, n, |i, j| Complex::new(r[(i, j)], r[(i + n, j)]))
}

/// Index of `e_a ^ e_b` (`a < b`) in the basis e12, e13, e14, e23, e24, e34.
fn wedge_index(a: usize, b: usize) -> usize {
    const IDX: [[usize; 4]; 4] = [[9, 0, 1, 2], [0, 9, 3, 4], [1, 3, 9, 5], [2, 4, 5, 9]];
    IDX[a][b]
}

/// Induced derivation action of a 4x4 complex matrix on `Λ²C⁴`.
fn wedge_action(z: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(6, 6);
    let mut add = |a: usize, b: usize, coeff: Complex<f64>, col: usize| {
        if a == b {
            return;
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        out[(wedge_index(lo, hi), col)] += coeff * sign;
    };
    for i in 0..4 {
        for j in (i + 1)..4 {
            let col = wedge_index(i, j);
            for k in 0..4 {
                add(k, j, z[(k, i)], col);
                add(i, k, z[(k, j)], col);
            }
        }
    }
    out
}

/// Orthonormal basis of the real form of `Λ²C⁴` fixed by the conjugate-linear
/// Hodge star.
fn real_form_basis() -> Vec<DVector<Complex<f64>>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re = Complex::new(s, 0.0);
    let im = Complex::new(0.0, s);
    let vec = |entries: [(usize, Complex<f64>); 2]| {
        let mut v = DVector::from_element(6, Complex::new(0.0, 0.0));
        for (idx, c) in entries {
            v[idx] = c;
        }
        v
    };
    // e12=0, e13=1, e14=2, e23=3, e24=4, e34=5
    vec![
        vec([(0, re), (5, re)]),
        vec([(0, im), (5, -im)]),
        vec([(1, re), (4, -re)]),
        vec([(1, im), (4, im)]),
        vec([(2, re), (3, re)]),
        vec([(2, im), (3, -im)]),
    ]
}

/// The isomorphism su(4) -> so(6) from the action of su(4) on the real form of `Λ²C⁴`.
pub fn embed_su4_in_so6() -> Result<AlgebraMap> {
    let su4 = Arc::new(build_su(4)?);
    let so6 = Arc::new(build_so(6)?);
    let v = real_form_basis();
    let mut matrix = DMatrix::zeros(so6.dim(), su4.dim());
    for (col, b) in su4.basis().iter().enumerate() {
        let action = wedge_action(&complexify(b));
        let mut real = DMatrix::zeros(6, 6);
        for (bi, vb) in v.iter().enumerate() {
            let image = &action * vb;
            let mut rebuilt = DVector::from_element(6, Complex::new(0.0, 0.0));
            for (ai, va) in v.iter().enumerate() {
                let c = va.dotc(&image);
                if c.im.abs() > 1e-12 {
                    return Err(Error::NotHomomorphism(format!(
                        "real structure of Λ²C⁴ not preserved (imaginary part {:e})",
                        c.im
                    )));
                }
                real[(ai, bi)] = c.re;
                rebuilt += va * Complex::new(c.re, 0.0);
            }
            let off = (image - rebuilt).norm();
            if off > 1e-12 {
                return Err(Error::NotHomomorphism(format!(
                    "image leaves the real form of Λ²C⁴ (residual {off:e})"
                )));
            }
        }
        matrix.set_column(col, &so6.element_of(&real)?);
    }
    let map = AlgebraMap {
        source: su4,
        target: so6,
        matrix,
    };
    let residual = map.homomorphism_residual();
    if residual > 1e-10 || map.rank() != 15 {
        return Err(Error::NotHomomorphism(format!(
            "su(4) -> so(6): residual {residual:e}, rank {}",
            map.rank()
        )));
    }
    Ok(map)
}

/// Left multiplication by a quaternion on `H = R^4`.
fn quaternion_left(q: &Quaternion) -> DMatrix<f64> {
    DMatrix::from_fn(4, 4, |r, c| {
        let mut e = [0.0; 4];
        e[c] = 1.0;
        qmul(q, &e)[r]
    })
}

/// Realifies a 2x2 quaternionic matrix acting on `H²` from the left.
pub fn quaternionic_matrix(entries: [[Quaternion; 2]; 2]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(8, 8);
    for (r, row) in entries.iter().enumerate() {
        for (c, q) in row.iter().enumerate() {
            out.view_mut((4 * r, 4 * c), (4, 4)).copy_from(&quaternion_left(q));
        }
    }
    out
}

pub const SP1_3_MODEL_NAMES: [&str; 3] = ["E0", "E+", "E-"];

/// The sp(1) triple `E0 = diag(3i, i)`, `E+ = [[0, √3], [-√3, 2j]]`,
/// `E- = [[0, √3 i], [√3 i, 2k]]` acting on `H²`, realified to 8x8.
pub fn sp1_3_model_basis() -> [DMatrix<f64>; 3] {
    let r3 = 3f64.sqrt();
    let z = [0.0; 4];
    let e0 = quaternionic_matrix([[[0.0, 3.0, 0.0, 0.0], z], [z, [0.0, 1.0, 0.0, 0.0]]]);
    let ep = quaternionic_matrix([[z, [r3, 0.0, 0.0, 0.0]], [[-r3, 0.0, 0.0, 0.0], [0.0, 0.0, 2.0, 0.0]]]);
    let em = quaternionic_matrix([[z, [0.0, r3, 0.0, 0.0]], [[0.0, r3, 0.0, 0.0], [0.0, 0.0, 0.0, 2.0]]]);
    [e0, ep, em]
}
