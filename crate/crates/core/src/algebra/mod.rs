//! Matrix Lie algebras with a bi-invariant inner product.
//!
//! Every algebra is a real span of skew-symmetric `n x n` matrices (complex and
//! quaternionic algebras are realified at construction). The inner product is
//! `g0(X, Y) = -tr(XY)` on those real matrices and every constructor returns
//! a `g0`-orthonormal basis, so coefficient vectors carry the Euclidean inner
//! product and the structure constants `c[i][j][k] = g0([b_i, b_j], b_k)` are
//! totally antisymmetric.

mod classical;
mod exceptional;
pub mod octonion;

pub use classical::{
    block_embed, build_so, build_sp, build_su, complex_block_embed, realify, sp_complex_basis, su_complex_basis,
    CMatrix,
};
pub use exceptional::{
    build_g2, build_spin7_prime, embed_su4_in_so6, g2_characterization_distance, quaternionic_matrix,
    sp1_3_model_basis, SP1_3_MODEL_NAMES,
};
pub use octonion::Octonion;

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Coefficient vector of an element in an algebra's orthonormal basis.
pub type AlgebraElement = DVector<f64>;

/// Structure constants, stored densely and as a list of non-zero entries.
#[derive(Debug, Clone)]
pub struct StructureTensor {
    dim: usize,
    dense: Vec<f64>,
    // (i, j, k, c) with c = c[i][j][k] != 0, all ordered pairs i != j
    entries: Vec<(u32, u32, u32, f64)>,
}

impl StructureTensor {
    fn from_dense(dim: usize, dense: Vec<f64>) -> Self {
        let mut entries = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    let c = dense[(i * dim + j) * dim + k];
                    if c != 0.0 {
                        entries.push((i as u32, j as u32, k as u32, c));
                    }
                }
            }
        }
        StructureTensor { dim, dense, entries }
    }

    /// `c[i][j][k]`: the `b_k` coefficient of `[b_i, b_j]`.
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.dense[(i * self.dim + j) * self.dim + k]
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.len()
    }
}

/// A compact matrix Lie algebra with orthonormal basis, structure constants and Gram matrix.
#[derive(Debug, Clone)]
pub struct MatrixLieAlgebra {
    name: String,
    ambient_dim: usize,
    basis: Vec<DMatrix<f64>>,
    structure: StructureTensor,
    gram: DMatrix<f64>,
}

/// `g0(A, B) = -tr(AB)`.
pub fn trace_form(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    // -tr(AB) = -sum_ij A_ij B_ji
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    -s
}

pub fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

impl MatrixLieAlgebra {
    /// Builds the algebra spanned by `matrices`.
    ///
    /// The span is orthonormalized in input order; the result must be closed
    /// under the matrix commutator (residual below `1e-8`).
    pub fn from_matrices(name: impl Into<String>, ambient_dim: usize, matrices: &[DMatrix<f64>]) -> Result<Self> {
        let name = name.into();
        for m in matrices {
            if m.nrows() != ambient_dim || m.ncols() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    got: m.nrows(),
                });
            }
        }
        let flat: Vec<DVector<f64>> = matrices
            .iter()
            .map(|m| DVector::from_column_slice(m.as_slice()))
            .collect();
        // on skew matrices the Frobenius product equals -tr(XY)
        let ortho = linalg::gram_schmidt(&flat);
        let basis: Vec<DMatrix<f64>> = ortho
            .iter()
            .map(|v| DMatrix::from_column_slice(ambient_dim, ambient_dim, v.as_slice()))
            .collect();
        let dim = basis.len();
        let gram = DMatrix::from_fn(dim, dim, |i, j| trace_form(&basis[i], &basis[j]));

        let mut dense = vec![0.0; dim * dim * dim];
        let mut closure = 0.0f64;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let c = commutator(&basis[i], &basis[j]);
                let mut rebuilt = DMatrix::zeros(ambient_dim, ambient_dim);
                for k in 0..dim {
                    let mut v = trace_form(&c, &basis[k]);
                    if v.abs() < 1e-15 {
                        v = 0.0;
                    }
                    dense[(i * dim + j) * dim + k] = v;
                    dense[(j * dim + i) * dim + k] = -v;
                    rebuilt += &basis[k] * v;
                }
                closure = closure.max((c - rebuilt).norm());
            }
        }
        if closure > 1e-8 {
            return Err(Error::NotClosed {
                context: name,
                residual: closure,
            });
        }
        Ok(MatrixLieAlgebra {
            name,
            ambient_dim,
            basis,
            structure: StructureTensor::from_dense(dim, dense),
            gram,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &[DMatrix<f64>] {
        &self.basis
    }

    pub fn structure(&self) -> &StructureTensor {
        &self.structure
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    fn check_dim(&self, a: &AlgebraElement) -> Result<()> {
        if a.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: a.len(),
            });
        }
        Ok(())
    }

    /// `[a, b]` through the structure tensor.
    pub fn bracket(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_dim(a)?;
        self.check_dim(b)?;
        Ok(self.lie(a, b))
    }

    /// Unchecked bracket for inner loops; dimensions are asserted in debug builds.
    pub fn lie(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        debug_assert_eq!(a.len(), self.dim());
        debug_assert_eq!(b.len(), self.dim());
        let mut out = DVector::zeros(self.dim());
        for &(i, j, k, c) in &self.structure.entries {
            let (i, j) = (i as usize, j as usize);
            out[k as usize] += c * a[i] * b[j];
        }
        out
    }

    /// `ad_a^T w`, the transpose of `ad_a` applied to `w`.
    pub fn ad_transpose(&self, a: &AlgebraElement, w: &AlgebraElement) -> AlgebraElement {
        let mut out = DVector::zeros(self.dim());
        for &(i, j, k, c) in &self.structure.entries {
            out[j as usize] += c * a[i as usize] * w[k as usize];
        }
        out
    }

    /// Matrix of `ad_a` on coefficient vectors.
    pub fn ad_matrix(&self, a: &AlgebraElement) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for &(i, j, k, c) in &self.structure.entries {
            m[(k as usize, j as usize)] += c * a[i as usize];
        }
        m
    }

    /// `g0(a, b)` through the Gram matrix.
    pub fn inner(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<f64> {
        self.check_dim(a)?;
        self.check_dim(b)?;
        Ok((&self.gram * a).dot(b))
    }

    pub fn unit(&self, i: usize) -> AlgebraElement {
        let mut v = DVector::zeros(self.dim());
        v[i] = 1.0;
        v
    }

    /// The matrix `sum_i a_i b_i`.
    pub fn to_matrix(&self, a: &AlgebraElement) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.ambient_dim, self.ambient_dim);
        for (c, b) in a.iter().zip(&self.basis) {
            if *c != 0.0 {
                m += b * *c;
            }
        }
        m
    }

    /// Coefficients of `m` and the norm of its component outside the algebra.
    pub fn coefficients(&self, m: &DMatrix<f64>) -> (AlgebraElement, f64) {
        let c = DVector::from_iterator(self.dim(), self.basis.iter().map(|b| trace_form(m, b)));
        let residual = (m - self.to_matrix(&c)).norm();
        (c, residual)
    }

    /// Coefficients of `m`, failing when `m` is not in the algebra (residual above `1e-9`).
    pub fn element_of(&self, m: &DMatrix<f64>) -> Result<AlgebraElement> {
        let (c, r) = self.coefficients(m);
        if r > 1e-9 * m.norm().max(1.0) {
            return Err(Error::NotNested(format!(
                "matrix lies outside {} (residual {r:e})",
                self.name
            )));
        }
        Ok(c)
    }

    /// Maximum over basis pairs of the distance of `[b_i, b_j]` from the span.
    pub fn closure_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let c = commutator(&self.basis[i], &self.basis[j]);
                worst = worst.max(self.coefficients(&c).1);
            }
        }
        worst
    }

    /// Maximum entry of `[ad_i, ad_j] - ad_[b_i, b_j]` over basis pairs.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim();
        let ads: Vec<DMatrix<f64>> = (0..n).map(|i| self.ad_matrix(&self.unit(i))).collect();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let lhs = &ads[i] * &ads[j] - &ads[j] * &ads[i];
                let br = self.lie(&self.unit(i), &self.unit(j));
                let rhs = self.ad_matrix(&br);
                worst = worst.max(linalg::max_abs(&(lhs - rhs)));
            }
        }
        worst
    }

    /// Maximum of `|g0([b_i, b_j], b_k) + g0(b_j, [b_i, b_k])|`.
    pub fn ad_invariance_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = self.structure.get(i, j, k) + self.structure.get(i, k, j);
                    worst = worst.max(v.abs());
                }
            }
        }
        worst
    }

    /// Distance of the Gram matrix from the identity.
    pub fn orthonormality_residual(&self) -> f64 {
        linalg::max_abs(&(&self.gram - DMatrix::identity(self.dim(), self.dim())))
    }

    /// Checks that the Gram matrix is symmetric positive definite.
    pub fn gram_is_positive_definite(&self) -> bool {
        let sym = linalg::max_abs(&(&self.gram - self.gram.transpose())) < 1e-12;
        sym && self.gram.clone().cholesky().is_some()
    }

    /// All structural residuals of the algebra.
    pub fn residuals(&self) -> AlgebraResiduals {
        AlgebraResiduals {
            closure: self.closure_residual(),
            jacobi: self.jacobi_residual(),
            ad_invariance: self.ad_invariance_residual(),
            orthonormality: self.orthonormality_residual(),
        }
    }

    /// Plain-text dump: a header line, then each basis matrix as rows of
    /// space-separated decimals, matrices separated by blank lines.
    pub fn dump_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {} dim {} ambient {}", self.name, self.dim(), self.ambient_dim);
        for (idx, b) in self.basis.iter().enumerate() {
            if idx > 0 {
                out.push('\n');
            }
            for r in 0..self.ambient_dim {
                let row: Vec<String> = (0..self.ambient_dim).map(|c| format!("{:.16e}", b[(r, c)])).collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        }
        out
    }
}

/// Residuals reported by [`MatrixLieAlgebra::residuals`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgebraResiduals {
    pub closure: f64,
    pub jacobi: f64,
    pub ad_invariance: f64,
    pub orthonormality: f64,
}

impl AlgebraResiduals {
    pub fn max(&self) -> f64 {
        self.closure
            .max(self.jacobi)
            .max(self.ad_invariance)
            .max(self.orthonormality)
    }
}

/// Orthonormal basis (coefficient vectors) of the subalgebra generated by `generators`.
pub fn subalgebra_span(alg: &MatrixLieAlgebra, generators: &[AlgebraElement]) -> Result<Vec<AlgebraElement>> {
    for g in generators {
        alg.check_dim(g)?;
    }
    let mut basis = linalg::gram_schmidt(generators);
    loop {
        let mut candidates = Vec::new();
        for i in 0..basis.len() {
            for j in (i + 1)..basis.len() {
                candidates.push(alg.lie(&basis[i], &basis[j]));
            }
        }
        let scale = candidates.iter().map(|v| v.norm()).fold(0.0, f64::max);
        // drop brackets that are numerically zero before testing the span
        let candidates: Vec<_> = candidates
            .into_iter()
            .filter(|v| v.norm() > 1e-12 * scale.max(1.0))
            .collect();
        let added = linalg::complement_within(&basis, &candidates);
        if added.is_empty() {
            return Ok(basis);
        }
        basis.extend(added);
    }
}

/// A linear map between coefficient spaces of two algebras.
#[derive(Debug, Clone)]
pub struct AlgebraMap {
    pub source: Arc<MatrixLieAlgebra>,
    pub target: Arc<MatrixLieAlgebra>,
    /// `target.dim() x source.dim()`.
    pub matrix: DMatrix<f64>,
}

impl AlgebraMap {
    pub fn apply(&self, a: &AlgebraElement) -> AlgebraElement {
        &self.matrix * a
    }

    /// Maximum over source basis pairs of `|f[a, b] - [f a, f b]|`.
    pub fn homomorphism_residual(&self) -> f64 {
        let n = self.source.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (self.source.unit(i), self.source.unit(j));
                let lhs = self.apply(&self.source.lie(&a, &b));
                let rhs = self.target.lie(&self.apply(&a), &self.apply(&b));
                worst = worst.max((lhs - rhs).norm());
            }
        }
        worst
    }

    /// Numerical rank of the map.
    pub fn rank(&self) -> usize {
        let svd = self.matrix.clone().svd(false, false);
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        svd.singular_values
            .iter()
            .filter(|&&s| s > linalg::RANK_CUTOFF * smax)
            .count()
    }
}
