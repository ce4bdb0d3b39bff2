//! Shared dense linear-algebra helpers over `nalgebra` dynamic matrices.

use nalgebra::{Cholesky, Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;
pub type CVec = DVector<C64>;

pub const IM: C64 = Complex::new(0.0, 1.0);

pub fn c(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

/// Promote a real matrix to a complex one.
pub fn to_complex(m: &RMat) -> CMat {
    CMat::from_iterator(m.nrows(), m.ncols(), m.iter().map(|&x| c(x)))
}

pub fn frobenius_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius_norm_real(m: &RMat) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_unitary(u: &CMat, tol: f64) -> bool {
    if u.nrows() != u.ncols() {
        return false;
    }
    let n = u.nrows();
    let gram = u.adjoint() * u;
    max_abs_diff(&gram, &CMat::identity(n, n)) <= tol
}

pub fn is_symmetric(m: &RMat, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let n = m.nrows();
    (0..n).all(|i| (i..n).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol))
}

/// All eigenvalues of a Hermitian matrix are > `floor`.
pub fn is_positive_definite(m: &CMat, floor: f64) -> bool {
    // Cholesky succeeds iff the Hermitian part is PD; shift by the floor first.
    let n = m.nrows();
    let shifted = m - CMat::identity(n, n) * c(floor);
    Cholesky::new(shifted).is_some()
}

/// Eigendecomposition of a real symmetric matrix with eigenpairs sorted by
/// descending eigenvalue (stable in the solver's original order on ties).
pub fn symmetric_eigen_sorted(m: &RMat) -> (RVec, RMat) {
    let n = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let values = RVec::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = RMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// exp(G) for an anti-Hermitian generator G, via the Hermitian eigenproblem
/// of iG. Exactly unitary up to the eigensolver's accuracy.
pub fn expm_antihermitian(g: &CMat) -> CMat {
    let n = g.nrows();
    assert_eq!(n, g.ncols(), "generator must be square");
    let h = g.map(|z| z * IM); // Hermitian when g is anti-Hermitian
    debug_assert!(max_abs_diff(&h, &h.adjoint()) < 1e-10 * (1.0 + frobenius_norm(&h)));
    let eig = h.symmetric_eigen();
    // exp(G) = exp(-iH) = V exp(-i diag) V†
    let mut scaled = eig.eigenvectors.clone();
    for (j, lam) in eig.eigenvalues.iter().enumerate() {
        let phase = (-IM * c(*lam)).exp();
        scaled.column_mut(j).scale_mut(1.0);
        for i in 0..n {
            scaled[(i, j)] *= phase;
        }
    }
    scaled * eig.eigenvectors.adjoint()
}

/// Row-major serialization of a complex matrix as [re, im] pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMat) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push([m[(i, j)].re, m[(i, j)].im]);
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn to_matrix(&self) -> Result<CMat, String> {
        if self.data.len() != self.rows * self.cols {
            return Err(format!(
                "matrix data length {} does not match {}x{}",
                self.data.len(),
                self.rows,
                self.cols
            ));
        }
        let mut m = CMat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let [re, im] = self.data[i * self.cols + j];
                m[(i, j)] = Complex::new(re, im);
            }
        }
        Ok(m)
    }
}
