//! Small dense linear-algebra helpers shared by the subspace constructions.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value cutoff for nullspaces, complements and spans.
pub const RANK_CUTOFF: f64 = 1e-9;

/// Orthonormalizes `vectors` in order with twice-applied modified Gram-Schmidt.
///
/// A vector is dropped when its residual norm falls below `RANK_CUTOFF`
/// times the largest input norm, so the output order follows the input order.
pub fn gram_schmidt(vectors: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let scale = vectors.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut out: Vec<DVector<f64>> = Vec::new();
    if scale == 0.0 {
        return out;
    }
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let n = w.norm();
        if n > RANK_CUTOFF * scale {
            out.push(w / n);
        }
    }
    out
}

/// Orthonormal basis of `extra` projected away from the span of the orthonormal `base`.
pub fn complement_within(base: &[DVector<f64>], extra: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let projected: Vec<DVector<f64>> = extra
        .iter()
        .map(|v| {
            let mut w = v.clone();
            for q in base {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
            w
        })
        .collect();
    let mut out = Vec::new();
    let scale = extra.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for v in projected {
        let mut w = v;
        for _ in 0..2 {
            for q in base.iter().chain(out.iter()) {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let n = w.norm();
        if n > RANK_CUTOFF * scale.max(1e-300) {
            out.push(w / n);
        }
    }
    out
}

/// Orthonormal basis of the nullspace of `a` (columns of the result).
///
/// Singular values at or below `RANK_CUTOFF * sigma_max` count as zero.
pub fn nullspace(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    // pad so the SVD returns a full right singular basis
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = RANK_CUTOFF * smax.max(f64::MIN_POSITIVE);
    let null: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| smax == 0.0 || s <= cutoff)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    // SVD ordering is not canonical; re-orthonormalize for a stable basis
    let basis = gram_schmidt(&null);
    columns(&basis, cols)
}

/// Stacks vectors as the columns of a matrix with `rows` rows.
pub fn columns(vectors: &[DVector<f64>], rows: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

/// Splits the columns of `m` into vectors.
pub fn column_vectors(m: &DMatrix<f64>) -> Vec<DVector<f64>> {
    (0..m.ncols()).map(|j| m.column(j).into_owned()).collect()
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Frobenius distance between the orthogonal projectors onto two column spans.
pub fn subspace_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let pa = a * a.transpose();
    let pb = b * b.transpose();
    (pa - pb).norm()
}
