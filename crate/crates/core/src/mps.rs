//! Nearest-neighbor beam-splitter circuits in 1-/2-layer chain topology and
//! the variational fit of their angles to a reference covariance matrix.
//!
//! Each gate acts on adjacent modes (a, a+1) as the 2x2 unitary
//!
//!   U(theta, phi) = [[cos(theta) e^{i phi}, sin(theta)],
//!                    [-sin(theta) e^{i phi}, cos(theta)]]
//!
//! (a phase shifter on the first mode feeding a beam-splitter; a one-gate
//! circuit with this phase placement can realize the two-mode reference
//! state exactly, which the output-phase placement cannot). Gates
//! apply in layer-major order and later gates multiply the accumulated
//! mode transform from the left. Squeeze parameters are held fixed at their
//! Takagi values; only (theta, phi) are variational. The fit minimizes the
//! squared Frobenius distance between the circuit covariance and the
//! reference, using analytic gradients backpropagated through the gate
//! chain and a multi-start conjugate-gradient search.

use crate::encoding::{self, EncodingError, GaussianState};
use crate::linalg::{self, c, C64, CMat};
use crate::optim::{self, NcgConfig};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, TAU};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MpsError {
    #[error("layer count must be 1 or 2, got {0}")]
    BadLayerCount(usize),
    #[error("mode count must be at least 2, got {0}")]
    BadModeCount(usize),
    #[error("expected {expected} squeeze parameters, got {found}")]
    SqueezeLength { expected: usize, found: usize },
    #[error("expected {expected} values per parameter vector, got {found}")]
    ParamLength { expected: usize, found: usize },
    #[error("reference covariance has {found} modes, circuit has {expected}")]
    ReferenceMismatch { expected: usize, found: usize },
    #[error("objective became non-finite at iteration {0}")]
    NonFiniteObjective(usize),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

/// One beam-splitter (plus phase) on adjacent modes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BeamSplitterGate {
    pub mode_a: usize,
    pub mode_b: usize,
    pub theta: f64,
    pub phi: f64,
}

impl BeamSplitterGate {
    /// Local 2x2 matrix in (mode_a, mode_b) row/column order.
    pub fn local_matrix(theta: f64, phi: f64) -> [[C64; 2]; 2] {
        let phase = C64::new(phi.cos(), phi.sin());
        [
            [phase * c(theta.cos()), c(theta.sin())],
            [phase * c(-theta.sin()), c(theta.cos())],
        ]
    }
}

/// Chain circuit: squeezers feeding 1 or 2 layers of nearest-neighbor
/// beam-splitters, gates ordered (0,1), (1,2), ... within each layer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MpsCircuit {
    pub mode_count: usize,
    pub squeeze_params: Vec<f64>,
    pub layers: Vec<Vec<BeamSplitterGate>>,
}

impl MpsCircuit {
    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(|l| l.len()).sum()
    }

    /// Total variational parameter count: 2 per gate.
    pub fn param_count(&self) -> usize {
        2 * self.gate_count()
    }

    /// Gates in application (layer-major) order.
    pub fn gates(&self) -> impl Iterator<Item = &BeamSplitterGate> {
        self.layers.iter().flatten()
    }

    /// Copy of the circuit with (theta, phi) vectors bound into the gates.
    pub fn bind(&self, theta: &[f64], phi: &[f64]) -> Result<MpsCircuit, MpsError> {
        check_params(self, theta, phi)?;
        let mut bound = self.clone();
        let mut idx = 0;
        for layer in &mut bound.layers {
            for gate in layer {
                gate.theta = theta[idx];
                gate.phi = phi[idx];
                idx += 1;
            }
        }
        Ok(bound)
    }
}

/// Build the chain circuit with all angles zero.
pub fn build_circuit(
    mode_count: usize,
    layer_count: usize,
    squeeze_params: &[f64],
) -> Result<MpsCircuit, MpsError> {
    if mode_count < 2 {
        return Err(MpsError::BadModeCount(mode_count));
    }
    if !(1..=2).contains(&layer_count) {
        return Err(MpsError::BadLayerCount(layer_count));
    }
    if squeeze_params.len() != mode_count {
        return Err(MpsError::SqueezeLength {
            expected: mode_count,
            found: squeeze_params.len(),
        });
    }
    let layers = (0..layer_count)
        .map(|_| {
            (0..mode_count - 1)
                .map(|a| BeamSplitterGate {
                    mode_a: a,
                    mode_b: a + 1,
                    theta: 0.0,
                    phi: 0.0,
                })
                .collect()
        })
        .collect();
    Ok(MpsCircuit {
        mode_count,
        squeeze_params: squeeze_params.to_vec(),
        layers,
    })
}

fn check_params(circuit: &MpsCircuit, theta: &[f64], phi: &[f64]) -> Result<(), MpsError> {
    let expected = circuit.gate_count();
    for v in [theta, phi] {
        if v.len() != expected {
            return Err(MpsError::ParamLength {
                expected,
                found: v.len(),
            });
        }
    }
    Ok(())
}

fn left_multiply_gate(m: &mut CMat, a: usize, b: usize, g: &[[C64; 2]; 2]) {
    for col in 0..m.ncols() {
        let ra = m[(a, col)];
        let rb = m[(b, col)];
        m[(a, col)] = g[0][0] * ra + g[0][1] * rb;
        m[(b, col)] = g[1][0] * ra + g[1][1] * rb;
    }
}

fn right_multiply_gate_adjoint(m: &mut CMat, a: usize, b: usize, g: &[[C64; 2]; 2]) {
    // m <- m * G^dag for the embedded gate G.
    for row in 0..m.nrows() {
        let ca = m[(row, a)];
        let cb = m[(row, b)];
        m[(row, a)] = ca * g[0][0].conj() + cb * g[0][1].conj();
        m[(row, b)] = ca * g[1][0].conj() + cb * g[1][1].conj();
    }
}

/// Product of the embedded gates in circuit order (later gates on the left).
pub fn circuit_unitary(
    circuit: &MpsCircuit,
    theta: &[f64],
    phi: &[f64],
) -> Result<CMat, MpsError> {
    check_params(circuit, theta, phi)?;
    let m = circuit.mode_count;
    let mut u = CMat::identity(m, m);
    for (idx, gate) in circuit.gates().enumerate() {
        let local = BeamSplitterGate::local_matrix(theta[idx], phi[idx]);
        left_multiply_gate(&mut u, gate.mode_a, gate.mode_b, &local);
    }
    Ok(u)
}

/// Covariance produced by the squeezers followed by the circuit unitary.
pub fn forward_covariance(
    circuit: &MpsCircuit,
    theta: &[f64],
    phi: &[f64],
) -> Result<GaussianState, MpsError> {
    let u = circuit_unitary(circuit, theta, phi)?;
    let squeezed = encoding::squeezed_vacuum_covariance(&circuit.squeeze_params);
    Ok(encoding::apply_interferometer(&squeezed, &u)?)
}

/// Optimizer settings for [`fit_parameters`].
#[derive(Debug, Clone)]
pub struct FitConfig {
    /// Random restarts in addition to the all-zeros start.
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Angles initialize uniformly in [-init_range, init_range].
    pub init_range: f64,
    /// Additional full parameter vectors ([theta.., phi..]) to use as
    /// warm starts, e.g. a 1-layer optimum extended by an identity layer.
    pub extra_starts: Vec<Vec<f64>>,
}

impl FitConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            restarts: 8,
            seed,
            max_iters: 2000,
            init_range: FRAC_PI_4,
            extra_starts: Vec::new(),
        }
    }
}

/// Outcome of the variational fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// Frobenius distance ||sigma_opt - sigma_ref||_F, recomputed from the
    /// returned parameters.
    pub final_distance: f64,
    /// final_distance / ||sigma_ref||_F.
    pub relative_distance: f64,
    pub iterations: usize,
    pub restarts_used: usize,
    pub seed: u64,
}

/// Shared precomputation for the objective: squeezer diagonals and the
/// reference blocks.
struct Objective<'a> {
    circuit: &'a MpsCircuit,
    gate_modes: Vec<(usize, usize)>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    b_ref: CMat,
    g_ref: CMat,
}

impl<'a> Objective<'a> {
    fn new(circuit: &'a MpsCircuit, sigma_ref: &GaussianState) -> Self {
        let d1: Vec<f64> = circuit
            .squeeze_params
            .iter()
            .map(|r| 0.5 * (r.cosh().powi(2) + r.sinh().powi(2)))
            .collect();
        let d2: Vec<f64> = circuit
            .squeeze_params
            .iter()
            .map(|r| r.cosh() * r.sinh())
            .collect();
        Self {
            circuit,
            gate_modes: circuit.gates().map(|g| (g.mode_a, g.mode_b)).collect(),
            d1,
            d2,
            b_ref: sigma_ref.b_block(),
            g_ref: sigma_ref.g_block(),
        }
    }

    fn unitary(&self, x: &[f64]) -> CMat {
        let m = self.circuit.mode_count;
        let k = self.gate_modes.len();
        let mut u = CMat::identity(m, m);
        for (idx, &(a, b)) in self.gate_modes.iter().enumerate() {
            let local = BeamSplitterGate::local_matrix(x[idx], x[k + idx]);
            left_multiply_gate(&mut u, a, b, &local);
        }
        u
    }

    fn scale_cols(&self, u: &CMat, d: &[f64]) -> CMat {
        let mut scaled = u.clone();
        for (j, &dj) in d.iter().enumerate() {
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= c(dj);
            }
        }
        scaled
    }

    /// Squared Frobenius distance between the circuit covariance and the
    /// reference; fills `grad` (layout [theta.., phi..]) when provided.
    fn eval(&self, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let k = self.gate_modes.len();
        let u = self.unitary(x);
        // B = U D1 U^dag, G = U D2 U^T.
        let ud1 = self.scale_cols(&u, &self.d1);
        let ud2 = self.scale_cols(&u, &self.d2);
        let b = &ud1 * u.adjoint();
        let g = &ud2 * u.transpose();
        let xm = b - &self.b_ref;
        let ym = g - &self.g_ref;
        let value = 2.0
            * (xm.iter().map(|z| z.norm_sqr()).sum::<f64>()
                + ym.iter().map(|z| z.norm_sqr()).sum::<f64>());

        let Some(grad) = grad else {
            return value;
        };

        // df = Re tr(W dU) with W = 8 (D1 U^dag X + D2 U^T Y*).
        let udx = u.adjoint() * xm;
        let uty = u.transpose() * ym.map(|z| z.conj());
        let mut w = CMat::zeros(u.nrows(), u.ncols());
        for i in 0..u.nrows() {
            for j in 0..u.ncols() {
                w[(i, j)] = c(8.0) * (c(self.d1[i]) * udx[(i, j)] + c(self.d2[i]) * uty[(i, j)]);
            }
        }

        // T_i = P_i W S_i, accumulated as T_1 = (W U) G_1^dag and
        // T_{i+1} = G_i T_i G_{i+1}^dag.
        let mut t = &w * &u;
        let gate_mats: Vec<[[C64; 2]; 2]> = (0..k)
            .map(|i| BeamSplitterGate::local_matrix(x[i], x[k + i]))
            .collect();
        for i in 0..k {
            let (a, b_mode) = self.gate_modes[i];
            right_multiply_gate_adjoint(&mut t, a, b_mode, &gate_mats[i]);
            // d/dtheta and d/dphi of the local gate.
            let (theta, phi) = (x[i], x[k + i]);
            let phase = C64::new(phi.cos(), phi.sin());
            let i_phase = C64::new(0.0, 1.0) * phase;
            let d_theta = [
                [phase * c(-theta.sin()), c(theta.cos())],
                [phase * c(-theta.cos()), c(-theta.sin())],
            ];
            let d_phi = [
                [i_phase * c(theta.cos()), c(0.0)],
                [i_phase * c(-theta.sin()), c(0.0)],
            ];
            let taa = t[(a, a)];
            let tab = t[(a, b_mode)];
            let tba = t[(b_mode, a)];
            let tbb = t[(b_mode, b_mode)];
            grad[i] = (taa * d_theta[0][0]
                + tab * d_theta[1][0]
                + tba * d_theta[0][1]
                + tbb * d_theta[1][1])
                .re;
            grad[k + i] = (taa * d_phi[0][0]
                + tab * d_phi[1][0]
                + tba * d_phi[0][1]
                + tbb * d_phi[1][1])
                .re;
            if i + 1 < k {
                left_multiply_gate(&mut t, a, b_mode, &gate_mats[i]);
            }
        }
        value
    }
}

fn wrap_angle(x: f64) -> f64 {
    let wrapped = x.rem_euclid(TAU);
    if wrapped == TAU {
        0.0
    } else {
        wrapped
    }
}

/// Fit (theta, phi) by Frobenius-distance minimization over multiple
/// deterministic restarts; the best restart wins ties by index.
pub fn fit_parameters(
    circuit: &MpsCircuit,
    sigma_ref: &GaussianState,
    config: &FitConfig,
) -> Result<FitResult, MpsError> {
    if sigma_ref.mode_count() != circuit.mode_count {
        return Err(MpsError::ReferenceMismatch {
            expected: circuit.mode_count,
            found: sigma_ref.mode_count(),
        });
    }
    let k = circuit.gate_count();
    let n_params = 2 * k;
    let objective = Objective::new(circuit, sigma_ref);

    // Start 0 is all zeros; the rest draw uniformly from the seeded stream.
    let mut starts: Vec<Vec<f64>> = vec![vec![0.0; n_params]];
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    for _ in 0..config.restarts {
        starts.push(
            (0..n_params)
                .map(|_| rng.gen_range(-config.init_range..=config.init_range))
                .collect(),
        );
    }
    for extra in &config.extra_starts {
        if extra.len() == n_params {
            starts.push(extra.clone());
        }
    }

    let ncg = NcgConfig {
        max_iters: config.max_iters,
        ..NcgConfig::default()
    };
    let runs: Vec<optim::NcgResult> = starts
        .par_iter()
        .map(|x0| optim::minimize(|x, g| objective.eval(x, g), x0, &ncg))
        .collect();

    let mut best: Option<(usize, &optim::NcgResult)> = None;
    for (i, run) in runs.iter().enumerate() {
        if !run.value.is_finite() {
            return Err(MpsError::NonFiniteObjective(i));
        }
        let better = match best {
            None => true,
            Some((_, incumbent)) => run.value < incumbent.value,
        };
        if better {
            best = Some((i, run));
        }
    }
    let (_, winner) = best.expect("at least the zero start ran");

    let theta: Vec<f64> = winner.x[..k].iter().map(|&v| wrap_angle(v)).collect();
    let phi: Vec<f64> = winner.x[k..].iter().map(|&v| wrap_angle(v)).collect();

    // Independent recomputation of the distance from the wrapped parameters.
    let sigma_opt = forward_covariance(circuit, &theta, &phi)?;
    let final_distance = linalg::frobenius_norm(&(sigma_opt.sigma() - sigma_ref.sigma()));
    let ref_norm = linalg::frobenius_norm(sigma_ref.sigma());

    Ok(FitResult {
        theta,
        phi,
        final_distance,
        relative_distance: final_distance / ref_norm,
        iterations: winner.iterations,
        restarts_used: runs.len(),
        seed: config.seed,
    })
}
