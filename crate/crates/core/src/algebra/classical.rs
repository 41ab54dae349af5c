//! so(n), su(n), sp(n) in their defining (realified) representations.

use nalgebra::{Complex, DMatrix, DVector};

use super::MatrixLieAlgebra;
use crate::error::{Error, Result};
use crate::linalg;

pub type CMatrix = DMatrix<Complex<f64>>;

/// Realification `A + iB -> [[A, -B], [B, A]]`.
pub fn realify(z: &CMatrix) -> DMatrix<f64> {
    let n = z.nrows();
    let mut r = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let c = z[(i, j)];
            r[(i, j)] = c.re;
            r[(i + n, j + n)] = c.re;
            r[(i, j + n)] = -c.im;
            r[(i + n, j)] = c.im;
        }
    }
    r
}

/// Embeds `m` as the upper-left block of an `n x n` zero matrix.
pub fn block_embed(m: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, n);
    out.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    out
}

/// Complex version of [`block_embed`].
pub fn complex_block_embed(m: &CMatrix, n: usize) -> CMatrix {
    let mut out = CMatrix::zeros(n, n);
    out.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    out
}

/// so(n) with basis `(E_ab - E_ba)/sqrt(2)` for `a < b` in lexicographic order.
pub fn build_so(n: usize) -> Result<MatrixLieAlgebra> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("so(n) needs n >= 2, got {n}")));
    }
    let mut mats = Vec::with_capacity(n * (n - 1) / 2);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for a in 0..n {
        for b in (a + 1)..n {
            let mut m = DMatrix::zeros(n, n);
            m[(a, b)] = s;
            m[(b, a)] = -s;
            mats.push(m);
        }
    }
    MatrixLieAlgebra::from_matrices(format!("so({n})"), n, &mats)
}

/// Spanning set of su(n) as complex matrices: off-diagonal real and imaginary
/// parts first, then the diagonal differences `i(E_kk - E_(k+1)(k+1))`.
pub fn su_complex_basis(n: usize) -> Vec<CMatrix> {
    let one = Complex::new(1.0, 0.0);
    let i = Complex::new(0.0, 1.0);
    let mut out = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let mut m = CMatrix::zeros(n, n);
            m[(a, b)] = one;
            m[(b, a)] = -one;
            out.push(m);
            let mut m = CMatrix::zeros(n, n);
            m[(a, b)] = i;
            m[(b, a)] = i;
            out.push(m);
        }
    }
    for k in 0..n.saturating_sub(1) {
        let mut m = CMatrix::zeros(n, n);
        m[(k, k)] = i;
        m[(k + 1, k + 1)] = -i;
        out.push(m);
    }
    out
}

/// su(n), realified to `2n x 2n` real matrices.
pub fn build_su(n: usize) -> Result<MatrixLieAlgebra> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("su(n) needs n >= 2, got {n}")));
    }
    let mats: Vec<_> = su_complex_basis(n).iter().map(realify).collect();
    MatrixLieAlgebra::from_matrices(format!("su({n})"), 2 * n, &mats)
}

/// Complex matrices of sp(n) = su(2n) ∩ sp(2n, C), i.e. `A^T J + J A = 0`
/// with `J = [[0, I], [-I, 0]]`.
pub fn sp_complex_basis(n: usize) -> Result<Vec<CMatrix>> {
    let m = 2 * n;
    let su = su_complex_basis(m);
    let mut j = CMatrix::zeros(m, m);
    for a in 0..n {
        j[(a, a + n)] = Complex::new(1.0, 0.0);
        j[(a + n, a)] = Complex::new(-1.0, 0.0);
    }
    // real linear system on real coefficients of the su(2n) spanning set
    let conds: Vec<CMatrix> = su.iter().map(|a| a.transpose() * &j + &j * a).collect();
    let rows = 2 * m * m;
    let mut sys = DMatrix::zeros(rows, su.len());
    for (col, c) in conds.iter().enumerate() {
        for (idx, z) in c.iter().enumerate() {
            sys[(2 * idx, col)] = z.re;
            sys[(2 * idx + 1, col)] = z.im;
        }
    }
    let null = linalg::nullspace(&sys);
    let expected = n * (2 * n + 1);
    if null.ncols() != expected {
        return Err(Error::RankMismatch {
            context: format!("sp({n}) symplectic condition"),
            expected,
            got: null.ncols(),
        });
    }
    Ok((0..null.ncols())
        .map(|c| {
            let coeffs: DVector<f64> = null.column(c).into_owned();
            let mut acc = CMatrix::zeros(m, m);
            for (w, b) in coeffs.iter().zip(&su) {
                acc += b * Complex::new(*w, 0.0);
            }
            acc
        })
        .collect())
}

/// sp(n) as a subalgebra of su(2n), realified to `4n x 4n` real matrices.
pub fn build_sp(n: usize) -> Result<MatrixLieAlgebra> {
    if n < 1 {
        return Err(Error::OutOfRange(format!("sp(n) needs n >= 1, got {n}")));
    }
    let mats: Vec<_> = sp_complex_basis(n)?.iter().map(realify).collect();
    MatrixLieAlgebra::from_matrices(format!("sp({n})"), 4 * n, &mats)
}
