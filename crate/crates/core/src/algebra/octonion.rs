//! Octonions by Cayley-Dickson doubling of the quaternions.
//!
//! Coefficients are stored in the basis `1, i, j, k, e, ie, je, ke`, where
//! `(a, b)` with quaternions `a, b` stands for `a + b e` and
//!
//! ```text
//! (a, b) (c, d) = (a c - conj(d) b,  d a + b conj(c))
//! ```
//!
//! Products of basis elements (row times column, `-x` means minus):
//!
//! ```text
//!        1    i    j    k    e    ie   je   ke
//!  1     1    i    j    k    e    ie   je   ke
//!  i     i   -1    k   -j    ie  -e   -ke   je
//!  j     j   -k   -1    i    je   ke  -e   -ie
//!  k     k    j   -i   -1    ke  -je   ie  -e
//!  e     e   -ie  -je  -ke  -1    i    j    k
//!  ie    ie   e   -ke   je  -i   -1   -k    j
//!  je    je   ke   e   -ie  -j    k   -1   -i
//!  ke    ke  -je   ie   e   -k   -j    i   -1
//! ```
//!
//! Every construction that touches the octonions (the derivation algebra,
//! `ad_q`, left multiplications) goes through [`Octonion::mul`], so this
//! table is the single sign convention of the crate.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

/// Names of the basis elements in coefficient order.
pub const BASIS_NAMES: [&str; 8] = ["1", "i", "j", "k", "e", "ie", "je", "ke"];

pub(crate) type Quaternion = [f64; 4];

pub(crate) fn qmul(a: &Quaternion, b: &Quaternion) -> Quaternion {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

fn qconj(a: &Quaternion) -> Quaternion {
    [a[0], -a[1], -a[2], -a[3]]
}

/// An octonion with coefficients in the basis `1, i, j, k, e, ie, je, ke`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Octonion(pub [f64; 8]);

impl Octonion {
    pub fn new(coefficients: [f64; 8]) -> Self {
        Octonion(coefficients)
    }

    /// The `index`-th basis element.
    pub fn unit(index: usize) -> Self {
        let mut c = [0.0; 8];
        c[index] = 1.0;
        Octonion(c)
    }

    /// The imaginary basis element `index` in `0..7` (so `imaginary_unit(0) = i`).
    pub fn imaginary_unit(index: usize) -> Self {
        Self::unit(index + 1)
    }

    pub fn one() -> Self {
        Self::unit(0)
    }

    pub fn real(&self) -> f64 {
        self.0[0]
    }

    pub fn conj(&self) -> Self {
        let mut c = self.0;
        for x in c.iter_mut().skip(1) {
            *x = -*x;
        }
        Octonion(c)
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    fn halves(&self) -> (Quaternion, Quaternion) {
        let c = &self.0;
        ([c[0], c[1], c[2], c[3]], [c[4], c[5], c[6], c[7]])
    }

    fn from_halves(a: Quaternion, b: Quaternion) -> Self {
        Octonion([a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3]])
    }

    /// Cayley-Dickson product.
    pub fn mul(&self, other: &Octonion) -> Octonion {
        let (a, b) = self.halves();
        let (c, d) = other.halves();
        let ac = qmul(&a, &c);
        let db = qmul(&qconj(&d), &b);
        let da = qmul(&d, &a);
        let bc = qmul(&b, &qconj(&c));
        Self::from_halves(
            [ac[0] - db[0], ac[1] - db[1], ac[2] - db[2], ac[3] - db[3]],
            [da[0] + bc[0], da[1] + bc[1], da[2] + bc[2], da[3] + bc[3]],
        )
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &Octonion) -> Octonion {
        self.mul(other) - other.mul(self)
    }
}

impl Add for Octonion {
    type Output = Octonion;
    fn add(self, rhs: Octonion) -> Octonion {
        let mut c = self.0;
        for (x, y) in c.iter_mut().zip(rhs.0) {
            *x += y;
        }
        Octonion(c)
    }
}

impl Sub for Octonion {
    type Output = Octonion;
    fn sub(self, rhs: Octonion) -> Octonion {
        self + (-rhs)
    }
}

impl Neg for Octonion {
    type Output = Octonion;
    fn neg(self) -> Octonion {
        Octonion(self.0.map(|x| -x))
    }
}

impl Mul for Octonion {
    type Output = Octonion;
    fn mul(self, rhs: Octonion) -> Octonion {
        Octonion::mul(&self, &rhs)
    }
}

impl Mul<Octonion> for f64 {
    type Output = Octonion;
    fn mul(self, rhs: Octonion) -> Octonion {
        Octonion(rhs.0.map(|x| self * x))
    }
}

/// Octonion product of two basis elements as `(sign, index)`.
pub fn basis_product(a: usize, b: usize) -> (f64, usize) {
    let p = Octonion::unit(a) * Octonion::unit(b);
    let (idx, val) = p
        .0
        .iter()
        .enumerate()
        .find(|(_, v)| v.abs() > 0.5)
        .expect("basis product is a signed basis element");
    (val.signum(), idx)
}

/// Matrix of left multiplication `x -> q x` on `O = R^8`.
pub fn left_multiplication(q: &Octonion) -> DMatrix<f64> {
    DMatrix::from_fn(8, 8, |r, c| q.mul(&Octonion::unit(c)).0[r])
}

/// Matrix of `ad_q(x) = q x - x q` on `Im(O) = R^7` (coordinates `i, ..., ke`).
pub fn ad_imaginary(q: &Octonion) -> DMatrix<f64> {
    DMatrix::from_fn(7, 7, |r, c| q.commutator(&Octonion::imaginary_unit(c)).0[r + 1])
}
