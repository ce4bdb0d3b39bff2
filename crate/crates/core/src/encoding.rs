//! Graph-to-Gaussian encoding: kernel matrices, covariance matrices, the
//! Takagi-based squeezer/interferometer prescription, and symplectic
//! transforms of covariances.
//!
//! Operator ordering is fixed as xi = (a_1..a_M, a_1^dag..a_M^dag)
//! throughout. In that ordering a covariance matrix has block structure
//! sigma = [[B, G], [G*, B*]] with B Hermitian and G symmetric, the vacuum is
//! sigma = I/2, and the Husimi covariance is sigma_Q = sigma + I/2. The
//! kernel of a state is K = X (I - sigma_Q^{-1}) with X the block swap
//! [[0, I], [I, 0]]; graph encodings have K = B_k ⊕ B_k with the real
//! symmetric block B_k produced by `WeightedEncoding::kernel_block`.

use crate::graph::WeightedEncoding;
use crate::linalg::{self, c, C64, CMat, CVec, RMat, RVec, IM};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const UNITARITY_TOL: f64 = 1e-10;
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum EncodingError {
    #[error("kernel spectral radius {0} is not below 1; invalid encoding")]
    KernelNotRepresentable(f64),
    #[error("kernel at or beyond squeezing limit")]
    SqueezingLimit,
    #[error("input not symmetric (max asymmetry {0:.3e})")]
    AsymmetricInput(f64),
    #[error("matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("covariance is not a valid Gaussian state: {0}")]
    InvalidCovariance(String),
    #[error("matrix deserialization failed: {0}")]
    BadMatrixData(String),
}

/// Kernel matrix K of a Gaussian state in the doubled mode ordering.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    matrix: CMat,
}

impl KernelMatrix {
    pub fn new(matrix: CMat) -> Self {
        assert_eq!(matrix.nrows(), matrix.ncols());
        assert_eq!(matrix.nrows() % 2, 0, "kernel must be 2M x 2M");
        Self { matrix }
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn mode_count(&self) -> usize {
        self.size() / 2
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }
}

/// Covariance data of an undisplaced multimode Gaussian state.
#[derive(Debug, Clone)]
pub struct GaussianState {
    mode_count: usize,
    sigma: CMat,
    displacement: CVec,
}

impl GaussianState {
    pub fn new(sigma: CMat) -> Result<Self, EncodingError> {
        let n = sigma.nrows();
        if n != sigma.ncols() || n % 2 != 0 {
            return Err(EncodingError::InvalidCovariance(format!(
                "covariance must be square 2M x 2M, got {}x{}",
                n,
                sigma.ncols()
            )));
        }
        let state = Self {
            mode_count: n / 2,
            sigma,
            displacement: CVec::zeros(n),
        };
        state.check_block_structure(1e-10)?;
        if !state.sigma_q_positive_definite() {
            return Err(EncodingError::InvalidCovariance(
                "sigma_Q is not positive definite".into(),
            ));
        }
        Ok(state)
    }

    pub fn vacuum(mode_count: usize) -> Self {
        let n = 2 * mode_count;
        Self {
            mode_count,
            sigma: CMat::identity(n, n) * c(0.5),
            displacement: CVec::zeros(n),
        }
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn sigma(&self) -> &CMat {
        &self.sigma
    }

    /// Displacements are identically zero in this artifact.
    pub fn displacement(&self) -> &CVec {
        &self.displacement
    }

    /// Husimi covariance sigma_Q = sigma + I/2.
    pub fn sigma_q(&self) -> CMat {
        let n = 2 * self.mode_count;
        &self.sigma + CMat::identity(n, n) * c(0.5)
    }

    /// Upper-left (a a^dag) block, Hermitian for valid states.
    pub fn b_block(&self) -> CMat {
        let m = self.mode_count;
        self.sigma.view((0, 0), (m, m)).into()
    }

    /// Upper-right (a a) block, symmetric for valid states.
    pub fn g_block(&self) -> CMat {
        let m = self.mode_count;
        self.sigma.view((0, m), (m, m)).into()
    }

    pub fn check_block_structure(&self, tol: f64) -> Result<(), EncodingError> {
        let m = self.mode_count;
        let b = self.b_block();
        let g = self.g_block();
        let lower_left: CMat = self.sigma.view((m, 0), (m, m)).into();
        let lower_right: CMat = self.sigma.view((m, m), (m, m)).into();
        let residual = [
            linalg::max_abs_diff(&b, &b.adjoint()),
            linalg::max_abs_diff(&g, &g.transpose()),
            linalg::max_abs_diff(&lower_left, &g.map(|z| z.conj())),
            linalg::max_abs_diff(&lower_right, &b.map(|z| z.conj())),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        if residual > tol {
            return Err(EncodingError::InvalidCovariance(format!(
                "block symmetry residual {residual:.3e} above {tol:.1e}"
            )));
        }
        Ok(())
    }

    pub fn sigma_q_positive_definite(&self) -> bool {
        linalg::is_positive_definite(&self.sigma_q(), 1e-12)
    }

    pub fn det_sigma_q(&self) -> f64 {
        self.sigma_q().determinant().norm()
    }
}

/// Block swap X = [[0, I], [I, 0]] on 2M modes.
pub fn x_matrix(mode_count: usize) -> CMat {
    let n = 2 * mode_count;
    let mut x = CMat::zeros(n, n);
    for i in 0..mode_count {
        x[(i, mode_count + i)] = c(1.0);
        x[(mode_count + i, i)] = c(1.0);
    }
    x
}

/// K = B ⊕ B for the weighted kernel block B = c (1+w) A (1+w).
pub fn kernel_from_graph(encoding: &WeightedEncoding) -> Result<KernelMatrix, EncodingError> {
    let block = encoding.kernel_block();
    let radius = encoding.kernel_spectral_radius();
    if radius >= 1.0 {
        return Err(EncodingError::KernelNotRepresentable(radius));
    }
    let m = block.nrows();
    let mut k = CMat::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            k[(i, j)] = c(block[(i, j)]);
            k[(m + i, m + j)] = c(block[(i, j)]);
        }
    }
    Ok(KernelMatrix::new(k))
}

/// Invert the kernel relation: sigma = (I - X K)^{-1} - I/2.
pub fn covariance_from_kernel(kernel: &KernelMatrix) -> Result<GaussianState, EncodingError> {
    let n = kernel.size();
    let m = kernel.mode_count();
    let lhs = CMat::identity(n, n) - x_matrix(m) * kernel.matrix();
    let sigma_q = lhs.try_inverse().ok_or(EncodingError::SqueezingLimit)?;
    let sigma = sigma_q - CMat::identity(n, n) * c(0.5);
    GaussianState::new(sigma).map_err(|_| EncodingError::SqueezingLimit)
}

/// Recover K = X (I - sigma_Q^{-1}) from a state.
pub fn kernel_of(state: &GaussianState) -> Result<KernelMatrix, EncodingError> {
    let n = 2 * state.mode_count();
    let sigma_q_inv = state
        .sigma_q()
        .try_inverse()
        .ok_or(EncodingError::SqueezingLimit)?;
    let k = x_matrix(state.mode_count()) * (CMat::identity(n, n) - sigma_q_inv);
    Ok(KernelMatrix::new(k))
}

/// Covariance of M independent single-mode squeezed vacua: diagonal blocks
/// (cosh^2 r + sinh^2 r)/2 and off blocks cosh r sinh r.
pub fn squeezed_vacuum_covariance(squeeze_params: &[f64]) -> GaussianState {
    let m = squeeze_params.len();
    let n = 2 * m;
    let mut sigma = CMat::zeros(n, n);
    for (j, &r) in squeeze_params.iter().enumerate() {
        let (ch, sh) = (r.cosh(), r.sinh());
        sigma[(j, j)] = c(0.5 * (ch * ch + sh * sh));
        sigma[(m + j, m + j)] = sigma[(j, j)];
        sigma[(j, m + j)] = c(ch * sh);
        sigma[(m + j, j)] = c(ch * sh);
    }
    GaussianState {
        mode_count: m,
        sigma,
        displacement: CVec::zeros(n),
    }
}

/// Conjugate the covariance by the passive transform diag(U, U*):
/// B -> U B U^dag and G -> U G U^T.
pub fn apply_interferometer(
    state: &GaussianState,
    unitary: &CMat,
) -> Result<GaussianState, EncodingError> {
    let m = state.mode_count();
    if unitary.nrows() != m || unitary.ncols() != m {
        return Err(EncodingError::DimensionMismatch {
            expected: m,
            found: unitary.nrows(),
        });
    }
    let gram = unitary.adjoint() * unitary;
    let residual = linalg::max_abs_diff(&gram, &CMat::identity(m, m));
    if residual > UNITARITY_TOL {
        return Err(EncodingError::NotUnitary(residual));
    }
    let n = 2 * m;
    let mut u_tilde = CMat::zeros(n, n);
    for i in 0..m {
        for j in 0..m {
            u_tilde[(i, j)] = unitary[(i, j)];
            u_tilde[(m + i, m + j)] = unitary[(i, j)].conj();
        }
    }
    let sigma = &u_tilde * state.sigma() * u_tilde.adjoint();
    Ok(GaussianState {
        mode_count: m,
        sigma,
        displacement: CVec::zeros(n),
    })
}

/// Takagi factorization S = U diag(lambda) U^T of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct TakagiFactors {
    /// Columns of the real eigenvector basis, multiplied by i on the
    /// negative-eigenvalue subspace.
    pub unitary: CMat,
    /// Singular values, descending.
    pub singular_values: RVec,
    /// r_j = artanh(lambda_j); present only when every singular value of the
    /// input is strictly below 1 (tanh-representable inputs).
    pub squeeze_params: Option<Vec<f64>>,
}

impl TakagiFactors {
    /// U diag(lambda) U^T, for reconstruction checks.
    pub fn reconstruct(&self) -> CMat {
        let m = self.unitary.nrows();
        let mut d = CMat::zeros(m, m);
        for j in 0..m {
            d[(j, j)] = c(self.singular_values[j]);
        }
        &self.unitary * d * self.unitary.transpose()
    }
}

/// Factor a real symmetric matrix via its eigendecomposition: take absolute
/// eigenvalues as singular values and rotate negative-eigenvalue columns by
/// the imaginary unit. Deterministic for a fixed input; any unitary mixing
/// within degenerate subspaces is acceptable (reconstruction is the
/// contract, not U uniqueness).
pub fn takagi(matrix: &RMat) -> Result<TakagiFactors, EncodingError> {
    let n = matrix.nrows();
    let asym = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (matrix[(i, j)] - matrix[(j, i)]).abs())
        .fold(0.0, f64::max);
    if matrix.ncols() != n || asym > SYMMETRY_TOL {
        return Err(EncodingError::AsymmetricInput(asym));
    }
    let eig = matrix.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .abs()
            .partial_cmp(&eig.eigenvalues[a].abs())
            .unwrap()
            .then(a.cmp(&b))
    });
    let singular_values = RVec::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i].abs()));
    let mut unitary = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let phase = if eig.eigenvalues[src] < 0.0 { IM } else { c(1.0) };
        for row in 0..n {
            unitary[(row, dst)] = phase * c(eig.eigenvectors[(row, src)]);
        }
    }
    let squeeze_params = if singular_values.iter().all(|&s| s < 1.0) {
        Some(singular_values.iter().map(|&s| s.atanh()).collect())
    } else {
        None
    };
    Ok(TakagiFactors {
        unitary,
        singular_values,
        squeeze_params,
    })
}

/// Takagi factors of the kernel block of a graph encoding; the squeeze
/// parameters are guaranteed present because the block's spectral radius is
/// below 1.
pub fn circuit_prescription(encoding: &WeightedEncoding) -> Result<TakagiFactors, EncodingError> {
    let radius = encoding.kernel_spectral_radius();
    if radius >= 1.0 {
        return Err(EncodingError::KernelNotRepresentable(radius));
    }
    takagi(&encoding.kernel_block())
}

/// Reference covariance built through the circuit route:
/// squeeze by the Takagi parameters, then rotate by the Takagi unitary.
pub fn covariance_from_circuit(factors: &TakagiFactors) -> Result<GaussianState, EncodingError> {
    let r = factors
        .squeeze_params
        .as_ref()
        .ok_or(EncodingError::KernelNotRepresentable(f64::INFINITY))?;
    let squeezed = squeezed_vacuum_covariance(r);
    apply_interferometer(&squeezed, &factors.unitary)
}

/// Husimi function at a phase-space point alpha = (a_1..a_M, a_1*..a_M*):
/// pi^{-M} exp(-alpha^dag sigma_Q^{-1} alpha / 2) / sqrt(|det sigma_Q|).
pub fn husimi_q(state: &GaussianState, alpha: &[C64]) -> Result<f64, EncodingError> {
    let n = 2 * state.mode_count();
    if alpha.len() != n {
        return Err(EncodingError::DimensionMismatch {
            expected: n,
            found: alpha.len(),
        });
    }
    let sigma_q = state.sigma_q();
    let inv = sigma_q
        .clone()
        .try_inverse()
        .ok_or(EncodingError::SqueezingLimit)?;
    let alpha = CVec::from_column_slice(alpha);
    let quad: C64 = (alpha.adjoint() * &inv * &alpha)[(0, 0)];
    let det = sigma_q.determinant().norm();
    let norm = std::f64::consts::PI.powi(-(state.mode_count() as i32)) / det.sqrt();
    Ok(norm * (-0.5 * quad.re).exp())
}

/// Serialized covariance artifact.
#[derive(Debug, Serialize, Deserialize)]
pub struct CovarianceFile {
    pub mode_count: usize,
    pub sigma: linalg::MatrixJson,
    /// Always zero in this artifact; kept explicit in the schema.
    pub displacement: Vec<[f64; 2]>,
}

impl CovarianceFile {
    pub fn from_state(state: &GaussianState) -> Self {
        Self {
            mode_count: state.mode_count(),
            sigma: linalg::MatrixJson::from_matrix(state.sigma()),
            displacement: state.displacement().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_state(&self) -> Result<GaussianState, EncodingError> {
        let sigma = self
            .sigma
            .to_matrix()
            .map_err(EncodingError::BadMatrixData)?;
        if sigma.nrows() != 2 * self.mode_count {
            return Err(EncodingError::BadMatrixData(format!(
                "sigma is {}x{} but mode_count is {}",
                sigma.nrows(),
                sigma.ncols(),
                self.mode_count
            )));
        }
        GaussianState::new(sigma)
    }
}

/// Serialized Takagi-factor artifact.
#[derive(Debug, Serialize, Deserialize)]
pub struct TakagiFile {
    pub unitary: linalg::MatrixJson,
    pub singular_values: Vec<f64>,
    pub squeeze_params: Option<Vec<f64>>,
}

impl TakagiFile {
    pub fn from_factors(f: &TakagiFactors) -> Self {
        Self {
            unitary: linalg::MatrixJson::from_matrix(&f.unitary),
            singular_values: f.singular_values.iter().copied().collect(),
            squeeze_params: f.squeeze_params.clone(),
        }
    }
}

/// Serialized kernel artifact.
#[derive(Debug, Serialize, Deserialize)]
pub struct KernelFile {
    pub size: usize,
    pub matrix: linalg::MatrixJson,
}

impl KernelFile {
    pub fn from_kernel(k: &KernelMatrix) -> Self {
        Self {
            size: k.size(),
            matrix: linalg::MatrixJson::from_matrix(k.matrix()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{self, InteractionGraph};
    use crate::linalg::{frobenius_norm, max_abs_diff};

    fn swap_graph() -> InteractionGraph {
        InteractionGraph::from_edges(2, &[(0, 1)], None, None).unwrap()
    }

    fn swap_encoding(c_val: f64) -> WeightedEncoding {
        graph::weighted_encoding(&swap_graph(), c_val).unwrap()
    }

    fn complete_graph(n: usize) -> InteractionGraph {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i, j));
            }
        }
        InteractionGraph::from_edges(n, &edges, None, None).unwrap()
    }

    #[test]
    fn kernel_of_two_mode_graph_is_half_adjacency_blocks() {
        let k = kernel_from_graph(&swap_encoding(0.5)).unwrap();
        assert_eq!(k.size(), 4);
        let expect = [
            [0.0, 0.5, 0.0, 0.0],
            [0.5, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.5],
            [0.0, 0.0, 0.5, 0.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((k.matrix()[(i, j)] - c(expect[i][j])).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn kernel_of_empty_graph_is_zero() {
        let g = InteractionGraph::from_edges(3, &[], None, None).unwrap();
        let enc = graph::weighted_encoding(&g, 0.3).unwrap();
        let k = kernel_from_graph(&enc).unwrap();
        assert!(k.matrix().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn k4_kernel_spectral_radius_is_half() {
        let enc = graph::weighted_encoding(&complete_graph(4), 1.0 / 6.0).unwrap();
        assert!((enc.kernel_spectral_radius() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_kernel_gives_vacuum() {
        let k = KernelMatrix::new(CMat::zeros(4, 4));
        let state = covariance_from_kernel(&k).unwrap();
        assert!(max_abs_diff(state.sigma(), &(CMat::identity(4, 4) * c(0.5))) < 1e-15);
    }

    #[test]
    fn two_mode_sigma_q_matches_hand_inversion() {
        // Direct 4x4 oracle: sigma_Q^{-1} = I - XK = [[I, -cA], [-cA, I]].
        let k = kernel_from_graph(&swap_encoding(0.5)).unwrap();
        let state = covariance_from_kernel(&k).unwrap();
        let sigma_q = state.sigma_q();
        let inv = sigma_q.clone().try_inverse().unwrap();
        let expect = [
            [1.0, 0.0, 0.0, -0.5],
            [0.0, 1.0, -0.5, 0.0],
            [0.0, -0.5, 1.0, 0.0],
            [-0.5, 0.0, 0.0, 1.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((inv[(i, j)] - c(expect[i][j])).norm() < 1e-12);
            }
        }
        assert!((state.det_sigma_q() - 16.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn near_limit_kernel_is_still_positive_definite() {
        let enc = swap_encoding(0.999);
        let state = covariance_from_kernel(&kernel_from_graph(&enc).unwrap()).unwrap();
        assert!(state.sigma_q_positive_definite());
        assert!(state.sigma().iter().all(|z| z.norm().is_finite()));
    }

    #[test]
    fn kernel_round_trip() {
        for seed in [3, 5, 11] {
            let g = graph::random_graph(5, 0.6, seed).unwrap();
            if g.edge_count() == 0 {
                continue;
            }
            let c_val = graph::choose_c(&g, 0.5).unwrap();
            let enc = graph::weighted_encoding(&g, c_val).unwrap();
            let k = kernel_from_graph(&enc).unwrap();
            let state = covariance_from_kernel(&k).unwrap();
            let back = kernel_of(&state).unwrap();
            let rel = frobenius_norm(&(back.matrix() - k.matrix()))
                / frobenius_norm(k.matrix()).max(1e-30);
            assert!(rel < 1e-9, "round-trip error {rel}");
        }
    }

    #[test]
    fn squeezed_vacuum_matches_scalar_formulas() {
        let vac = squeezed_vacuum_covariance(&[0.0, 0.0]);
        assert!(max_abs_diff(vac.sigma(), &(CMat::identity(4, 4) * c(0.5))) < 1e-15);

        let r = 0.5_f64;
        let s = squeezed_vacuum_covariance(&[r]);
        assert!((s.sigma()[(0, 0)].re - 0.5 * (r.cosh().powi(2) + r.sinh().powi(2))).abs() < 1e-15);
        assert!((s.sigma()[(0, 1)].re - r.cosh() * r.sinh()).abs() < 1e-15);

        // Negative squeeze flips the off-diagonal sign (odd sinh).
        let two = squeezed_vacuum_covariance(&[0.3, -0.3]);
        assert!((two.sigma()[(0, 2)].re + two.sigma()[(1, 3)].re).abs() < 1e-15);
    }

    #[test]
    fn squeezed_vacuum_agrees_with_bogoliubov_moments() {
        // Evaluate sigma entries from the transformed operators
        // a' = cosh(r) a + sinh(r) a^dag on the vacuum moment table
        // <a a^dag> = 1, all other second moments zero.
        let r = 0.37_f64;
        let (ch, sh) = (r.cosh(), r.sinh());
        // sigma_11 = <a' a'^dag + a'^dag a'>/2 = (ch^2 + sh^2)/2
        let sigma_11 = 0.5 * (ch * ch + sh * sh);
        // sigma_12 = <a' a'> = ch sh <a a^dag> = ch sh
        let sigma_12 = ch * sh;
        let s = squeezed_vacuum_covariance(&[r]);
        assert!((s.sigma()[(0, 0)].re - sigma_11).abs() < 1e-15);
        assert!((s.sigma()[(0, 1)].re - sigma_12).abs() < 1e-15);
    }

    #[test]
    fn interferometer_identity_and_vacuum_invariance() {
        let state = squeezed_vacuum_covariance(&[0.4, 0.2]);
        let id = CMat::identity(2, 2);
        let out = apply_interferometer(&state, &id).unwrap();
        assert!(max_abs_diff(out.sigma(), state.sigma()) < 1e-14);

        let vac = GaussianState::vacuum(2);
        let swap = CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let rotated = apply_interferometer(&vac, &swap).unwrap();
        assert!(max_abs_diff(rotated.sigma(), vac.sigma()) < 1e-14);
    }

    #[test]
    fn interferometer_rejects_non_unitary() {
        let state = GaussianState::vacuum(2);
        let bad = CMat::from_row_slice(2, 2, &[c(1.0), c(0.1), c(0.0), c(1.0)]);
        assert!(matches!(
            apply_interferometer(&state, &bad),
            Err(EncodingError::NotUnitary(_))
        ));
    }

    #[test]
    fn takagi_zero_matrix() {
        let f = takagi(&RMat::zeros(3, 3)).unwrap();
        assert!(f.singular_values.iter().all(|&s| s == 0.0));
        assert!(linalg::is_unitary(&f.unitary, 1e-12));
        assert!(frobenius_norm(&f.reconstruct()) < 1e-12);
    }

    #[test]
    fn takagi_swap_matrix_reconstructs() {
        let s = RMat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let f = takagi(&s).unwrap();
        assert!((f.singular_values[0] - 1.0).abs() < 1e-12);
        assert!((f.singular_values[1] - 1.0).abs() < 1e-12);
        let rebuilt = f.reconstruct();
        assert!(max_abs_diff(&rebuilt, &linalg::to_complex(&s)) < 1e-10);
        assert!(linalg::is_unitary(&f.unitary, 1e-10));
    }

    #[test]
    fn takagi_scaled_k4_spectrum() {
        // K4 spectrum is {3, -1, -1, -1}; scaled by 1/6 the singular values
        // are (1/2, 1/6, 1/6, 1/6).
        let a = complete_graph(4).adjacency() / 6.0;
        let f = takagi(&a).unwrap();
        let expect = [0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0];
        for (got, want) in f.singular_values.iter().zip(expect) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(max_abs_diff(&f.reconstruct(), &linalg::to_complex(&a)) < 1e-8);
        let r = f.squeeze_params.as_ref().unwrap();
        assert!((r[0] - 0.5_f64.atanh()).abs() < 1e-12);
    }

    #[test]
    fn takagi_rejects_asymmetric() {
        let s = RMat::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(takagi(&s), Err(EncodingError::AsymmetricInput(_))));
    }

    #[test]
    fn circuit_route_matches_direct_inversion_for_two_modes() {
        // End-to-end identity: squeeze by Takagi parameters, rotate by the
        // Takagi unitary, and land on the directly inverted covariance.
        let enc = swap_encoding(0.5);
        let direct = covariance_from_kernel(&kernel_from_graph(&enc).unwrap()).unwrap();
        let factors = circuit_prescription(&enc).unwrap();
        let circuit = covariance_from_circuit(&factors).unwrap();
        let rel =
            frobenius_norm(&(circuit.sigma() - direct.sigma())) / frobenius_norm(direct.sigma());
        assert!(rel < 1e-12, "relative error {rel}");
    }

    #[test]
    fn husimi_at_origin() {
        let pi = std::f64::consts::PI;
        let vac = GaussianState::vacuum(1);
        let q = husimi_q(&vac, &[c(0.0), c(0.0)]).unwrap();
        assert!((q - 1.0 / pi).abs() < 1e-14);

        let enc = swap_encoding(0.5);
        let state = covariance_from_kernel(&kernel_from_graph(&enc).unwrap()).unwrap();
        let q0 = husimi_q(&state, &[c(0.0); 4]).unwrap();
        assert!((q0 - 0.75 / (pi * pi)).abs() < 1e-12);
    }

    #[test]
    fn husimi_normalizes_on_quadrature_grid() {
        // Trapezoidal integration over the complex plane for one squeezed
        // mode; d^2 alpha = dRe dIm.
        let state = squeezed_vacuum_covariance(&[0.4]);
        let half_width = 6.0;
        let steps = 240;
        let h = 2.0 * half_width / steps as f64;
        let mut total = 0.0;
        for i in 0..=steps {
            for j in 0..=steps {
                let re = -half_width + i as f64 * h;
                let im = -half_width + j as f64 * h;
                let a = C64::new(re, im);
                let q = husimi_q(&state, &[a, a.conj()]).unwrap();
                let wi = if i == 0 || i == steps { 0.5 } else { 1.0 };
                let wj = if j == 0 || j == steps { 0.5 } else { 1.0 };
                total += wi * wj * q;
            }
        }
        total *= h * h;
        assert!((total - 1.0).abs() < 1e-3, "integral {total}");
    }

    #[test]
    fn husimi_checks_point_length() {
        let vac = GaussianState::vacuum(2);
        assert!(matches!(
            husimi_q(&vac, &[c(0.0)]),
            Err(EncodingError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn interferometer_preserves_sigma_q_positive_definiteness() {
        let state = squeezed_vacuum_covariance(&[0.6, -0.2, 0.4]);
        let f = takagi(&(complete_graph(3).adjacency() * 0.3)).unwrap();
        let out = apply_interferometer(&state, &f.unitary).unwrap();
        assert!(out.sigma_q_positive_definite());
    }

    #[test]
    fn covariance_file_round_trip() {
        let enc = swap_encoding(0.4);
        let state = covariance_from_kernel(&kernel_from_graph(&enc).unwrap()).unwrap();
        let file = CovarianceFile::from_state(&state);
        let json = serde_json::to_string(&file).unwrap();
        let parsed: CovarianceFile = serde_json::from_str(&json).unwrap();
        let back = parsed.to_state().unwrap();
        assert!(max_abs_diff(back.sigma(), state.sigma()) < 1e-15);
    }
}
