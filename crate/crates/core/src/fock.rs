//! Truncated Fock-space simulator: squeezers, beam-splitters, phase shifts,
//! general interferometers, mid-circuit measurement and reset, and exact
//! joint output distributions for both static circuits and holographic
//! schedules. This is the oracle every Gaussian-side formula is validated
//! against.
//!
//! States are dense complex tensors over m modes with d levels each, indexed
//! lexicographically with mode 0 slowest. Beam-splitters conserve total
//! photon number, so they are exponentiated per total-N block and remain
//! exactly unitary on the truncated space. Squeezers do not conserve photon
//! number: their generator is exponentiated at a padded dimension and the
//! resulting matrix is clipped to the working cutoff, so squeezing loses a
//! little norm near the cutoff; the loss is tracked in `norm_deficit` and
//! never hidden.

use crate::encoding::UNITARITY_TOL;
use crate::hafnian::PhotonPattern;
use crate::holo::{HolographicSchedule, Instruction};
use crate::linalg::{self, c, C64, CMat};
use crate::mps::{MpsCircuit, MpsError};
use crate::sampler::PatternDistribution;
use rand::Rng;
use std::collections::BTreeMap;
use thiserror::Error;

/// Padding applied to the squeeze generator before exponentiation; the
/// clipped d x d block then matches the exact operator to well below the
/// acceptance tolerances for |tanh r| <= 0.6.
const SQUEEZE_PAD: usize = 60;

/// Branches below this probability are dropped during schedule enumeration.
const BRANCH_EPS: f64 = 1e-18;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("cutoff must be at least 2, got {0}")]
    CutoffTooSmall(usize),
    #[error("mode {0} out of range for {1} modes")]
    ModeOutOfRange(usize, usize),
    #[error("beam-splitter modes must differ, got {0} twice")]
    SameMode(usize),
    #[error("resource bound exceeded: {0}")]
    ResourceBound(String),
    #[error("interferometer matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),
    #[error("mode {0} has an (numerically) all-zero marginal")]
    ZeroMarginal(usize),
    #[error("reset requires a just-measured mode; mode {0} still has spread")]
    NotCollapsed(usize),
    #[error(transparent)]
    Circuit(#[from] MpsError),
}

/// Dense state vector over a truncated multimode Fock space.
#[derive(Debug, Clone)]
pub struct FockState {
    mode_count: usize,
    cutoff: usize,
    amps: Vec<C64>,
    norm_deficit: f64,
}

impl FockState {
    pub fn vacuum(mode_count: usize, cutoff: usize) -> Result<Self, FockError> {
        if cutoff < 2 {
            return Err(FockError::CutoffTooSmall(cutoff));
        }
        let mut amps = vec![c(0.0); cutoff.pow(mode_count as u32)];
        amps[0] = c(1.0);
        Ok(Self {
            mode_count,
            cutoff,
            amps,
            norm_deficit: 0.0,
        })
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// 1 - ||psi||^2, the mass lost to cutoff clipping so far.
    pub fn norm_deficit(&self) -> f64 {
        self.norm_deficit
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn stride(&self, mode: usize) -> usize {
        self.cutoff.pow((self.mode_count - 1 - mode) as u32)
    }

    fn check_mode(&self, mode: usize) -> Result<(), FockError> {
        if mode >= self.mode_count {
            return Err(FockError::ModeOutOfRange(mode, self.mode_count));
        }
        Ok(())
    }

    fn refresh_deficit(&mut self) {
        self.norm_deficit = (1.0 - self.norm_sqr()).max(0.0);
    }

    /// Amplitude of one basis tuple.
    pub fn amplitude(&self, occupation: &[u8]) -> C64 {
        let mut idx = 0;
        for (&n, mode) in occupation.iter().zip(0..self.mode_count) {
            idx += (n as usize) * self.stride(mode);
        }
        self.amps[idx]
    }

    /// Probability of each basis tuple (not renormalized).
    pub fn probabilities(&self) -> BTreeMap<Vec<u8>, f64> {
        let mut out = BTreeMap::new();
        for (idx, amp) in self.amps.iter().enumerate() {
            let p = amp.norm_sqr();
            if p > 0.0 {
                out.insert(self.unindex(idx), p);
            }
        }
        out
    }

    fn unindex(&self, mut idx: usize) -> Vec<u8> {
        let mut occ = vec![0u8; self.mode_count];
        for mode in (0..self.mode_count).rev() {
            occ[mode] = (idx % self.cutoff) as u8;
            idx /= self.cutoff;
        }
        occ
    }

    /// Marginal photon-number distribution of one mode (not renormalized).
    pub fn marginal(&self, mode: usize) -> Result<Vec<f64>, FockError> {
        self.check_mode(mode)?;
        let d = self.cutoff;
        let stride = self.stride(mode);
        let mut marginal = vec![0.0; d];
        for (idx, amp) in self.amps.iter().enumerate() {
            let n = (idx / stride) % d;
            marginal[n] += amp.norm_sqr();
        }
        Ok(marginal)
    }

    fn apply_one_mode(&mut self, mode: usize, op: &CMat) {
        let d = self.cutoff;
        let stride = self.stride(mode);
        let block = stride * d;
        let mut scratch = vec![c(0.0); d];
        for base in (0..self.amps.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (k, slot) in scratch.iter_mut().enumerate() {
                    *slot = self.amps[start + k * stride];
                }
                for i in 0..d {
                    let mut acc = c(0.0);
                    for k in 0..d {
                        acc += op[(i, k)] * scratch[k];
                    }
                    self.amps[start + i * stride] = acc;
                }
            }
        }
    }

    fn apply_two_mode(&mut self, mode_a: usize, mode_b: usize, op: &CMat) {
        let d = self.cutoff;
        let sa = self.stride(mode_a);
        let sb = self.stride(mode_b);
        let dd = d * d;
        let mut scratch = vec![c(0.0); dd];
        let mut offsets = vec![0usize; dd];
        for (na, offs) in offsets.chunks_mut(d).enumerate() {
            for (nb, off) in offs.iter_mut().enumerate() {
                *off = na * sa + nb * sb;
            }
        }
        // Enumerate bases where both target modes read zero.
        let total = self.amps.len();
        for idx in 0..total {
            let na = (idx / sa) % d;
            let nb = (idx / sb) % d;
            if na != 0 || nb != 0 {
                continue;
            }
            for (slot, &off) in scratch.iter_mut().zip(&offsets) {
                *slot = self.amps[idx + off];
            }
            for i in 0..dd {
                let mut acc = c(0.0);
                for k in 0..dd {
                    acc += op[(i, k)] * scratch[k];
                }
                self.amps[idx + offsets[i]] = acc;
            }
        }
    }
}

/// Clipped matrix exponential of the squeeze generator r (adag^2 - a^2) / 2.
pub fn squeeze_matrix(cutoff: usize, r: f64) -> CMat {
    let padded = cutoff + SQUEEZE_PAD;
    let mut gen = CMat::zeros(padded, padded);
    for n in 0..padded - 2 {
        let coupling = 0.5 * r * (((n + 1) * (n + 2)) as f64).sqrt();
        gen[(n + 2, n)] = c(coupling);
        gen[(n, n + 2)] = c(-coupling);
    }
    let full = linalg::expm_antihermitian(&gen);
    full.view((0, 0), (cutoff, cutoff)).into()
}

/// Two-mode beam-splitter plus input phase on mode a, as a d^2 x d^2 matrix
/// over the (n_a * d + n_b) product basis. The beam-splitter part is the
/// per-total-N exponential of theta (a_a^dag a_b - a_a a_b^dag), so it is
/// exactly unitary on the truncated space.
pub fn beamsplitter_matrix(cutoff: usize, theta: f64, phi: f64) -> CMat {
    let d = cutoff;
    let mut gate = CMat::zeros(d * d, d * d);
    for total in 0..=(2 * d - 2) {
        let lo = total.saturating_sub(d - 1);
        let hi = total.min(d - 1);
        let size = hi - lo + 1;
        let mut gen = CMat::zeros(size, size);
        for i in 0..size - 1 {
            let k = lo + i; // photons in mode a
            let coupling = theta * (((k + 1) * (total - k)) as f64).sqrt();
            gen[(i + 1, i)] = c(coupling);
            gen[(i, i + 1)] = c(-coupling);
        }
        let block = if size == 1 {
            CMat::identity(1, 1)
        } else {
            linalg::expm_antihermitian(&gen)
        };
        for i in 0..size {
            let row = (lo + i) * d + (total - (lo + i));
            for j in 0..size {
                let col = (lo + j) * d + (total - (lo + j));
                gate[(row, col)] = block[(i, j)];
            }
        }
    }
    // Input phase on mode a: scale columns by e^{i phi n_a}.
    for na in 0..d {
        let phase = C64::new(0.0, phi * na as f64).exp();
        for nb in 0..d {
            let col = na * d + nb;
            for row in 0..d * d {
                gate[(row, col)] *= phase;
            }
        }
    }
    gate
}

/// Apply a single-mode squeezer. Norm can only decrease (cutoff clipping).
pub fn apply_squeeze(state: &FockState, mode: usize, r: f64) -> Result<FockState, FockError> {
    state.check_mode(mode)?;
    let mut out = state.clone();
    out.apply_one_mode(mode, &squeeze_matrix(state.cutoff, r));
    out.refresh_deficit();
    Ok(out)
}

/// Apply e^{i phi n} on one mode. Exact.
pub fn apply_phase(state: &FockState, mode: usize, phi: f64) -> Result<FockState, FockError> {
    state.check_mode(mode)?;
    let d = state.cutoff;
    let mut op = CMat::zeros(d, d);
    for n in 0..d {
        op[(n, n)] = C64::new(0.0, phi * n as f64).exp();
    }
    let mut out = state.clone();
    out.apply_one_mode(mode, &op);
    Ok(out)
}

/// Apply the two-mode gate U(theta, phi) on (mode_a, mode_b).
pub fn apply_beamsplitter(
    state: &FockState,
    mode_a: usize,
    mode_b: usize,
    theta: f64,
    phi: f64,
) -> Result<FockState, FockError> {
    state.check_mode(mode_a)?;
    state.check_mode(mode_b)?;
    if mode_a == mode_b {
        return Err(FockError::SameMode(mode_a));
    }
    let mut out = state.clone();
    out.apply_two_mode(mode_a, mode_b, &beamsplitter_matrix(state.cutoff, theta, phi));
    out.refresh_deficit();
    Ok(out)
}

/// Primitive instruction stream realizing a general M-mode interferometer.
#[derive(Debug, Clone, Copy)]
pub enum PassiveOp {
    Phase { mode: usize, phi: f64 },
    Mix { a: usize, b: usize, theta: f64 },
}

fn two_by_two_ops(a: usize, b: usize, v: &[[C64; 2]; 2], ops: &mut Vec<PassiveOp>) {
    let eps = 1e-14;
    let sin_theta = v[1][0].norm();
    let cos_theta = v[0][0].norm();
    let theta = sin_theta.atan2(cos_theta);
    let push_phase = |mode: usize, phi: f64, ops: &mut Vec<PassiveOp>| {
        if phi.abs() > eps {
            ops.push(PassiveOp::Phase { mode, phi });
        }
    };
    if sin_theta <= eps {
        push_phase(a, v[0][0].arg(), ops);
        push_phase(b, v[1][1].arg(), ops);
        return;
    }
    if cos_theta <= eps {
        ops.push(PassiveOp::Mix {
            a,
            b,
            theta: std::f64::consts::FRAC_PI_2,
        });
        push_phase(a, v[0][1].arg(), ops);
        push_phase(b, (-v[1][0]).arg(), ops);
        return;
    }
    // V = diag(e^{ix}, e^{iy}) R(theta) diag(1, e^{iv}); the (0,1) entry is
    // then consistent automatically by unitarity.
    let x = v[0][0].arg();
    let y = (-v[1][0]).arg();
    let v_phase = v[1][1].arg() - y;
    push_phase(b, v_phase, ops);
    ops.push(PassiveOp::Mix { a, b, theta });
    push_phase(a, x, ops);
    push_phase(b, y, ops);
}

/// Decompose a unitary into adjacent-pair rotations and phases,
/// in application order.
pub fn decompose_unitary(unitary: &CMat) -> Result<Vec<PassiveOp>, FockError> {
    let n = unitary.nrows();
    let gram = unitary.adjoint() * unitary;
    let residual = linalg::max_abs_diff(&gram, &CMat::identity(n, n));
    if residual > UNITARITY_TOL {
        return Err(FockError::NotUnitary(residual));
    }
    let mut v = unitary.clone();
    let mut rotations: Vec<(usize, [[C64; 2]; 2])> = Vec::new();
    for col in 0..n.saturating_sub(1) {
        for row in ((col + 1)..n).rev() {
            if v[(row, col)].norm() <= 1e-14 {
                continue;
            }
            let f = v[(row - 1, col)];
            let g = v[(row, col)];
            let norm = (f.norm_sqr() + g.norm_sqr()).sqrt();
            let w = [
                [f.conj() / norm, g.conj() / norm],
                [-g / norm, f / norm],
            ];
            for k in 0..n {
                let top = v[(row - 1, k)];
                let bot = v[(row, k)];
                v[(row - 1, k)] = w[0][0] * top + w[0][1] * bot;
                v[(row, k)] = w[1][0] * top + w[1][1] * bot;
            }
            rotations.push((row - 1, w));
        }
    }
    // v is now diagonal: U = W_1^dag ... W_T^dag D, applied D first.
    let mut ops = Vec::new();
    for j in 0..n {
        let phi = v[(j, j)].arg();
        if phi.abs() > 1e-14 {
            ops.push(PassiveOp::Phase { mode: j, phi });
        }
    }
    for (top, w) in rotations.iter().rev() {
        let w_dag = [
            [w[0][0].conj(), w[1][0].conj()],
            [w[0][1].conj(), w[1][1].conj()],
        ];
        two_by_two_ops(*top, top + 1, &w_dag, &mut ops);
    }
    Ok(ops)
}

/// Apply a general interferometer by running its primitive decomposition.
pub fn apply_interferometer(state: &FockState, unitary: &CMat) -> Result<FockState, FockError> {
    if unitary.nrows() != state.mode_count {
        return Err(FockError::ModeOutOfRange(
            unitary.nrows(),
            state.mode_count,
        ));
    }
    let mut out = state.clone();
    for op in decompose_unitary(unitary)? {
        match op {
            PassiveOp::Phase { mode, phi } => out = apply_phase(&out, mode, phi)?,
            PassiveOp::Mix { a, b, theta } => out = apply_beamsplitter(&out, a, b, theta, 0.0)?,
        }
    }
    Ok(out)
}

/// Project one mode onto a photon-count outcome. Returns the outcome
/// probability (relative to the current norm) and the renormalized state.
pub fn project_mode(
    state: &FockState,
    mode: usize,
    outcome: u8,
) -> Result<(f64, FockState), FockError> {
    state.check_mode(mode)?;
    let d = state.cutoff;
    let stride = state.stride(mode);
    let total = state.norm_sqr();
    if total <= 0.0 {
        return Err(FockError::ZeroMarginal(mode));
    }
    let mut mass = 0.0;
    for (idx, amp) in state.amps.iter().enumerate() {
        if (idx / stride) % d == outcome as usize {
            mass += amp.norm_sqr();
        }
    }
    let prob = mass / total;
    let mut collapsed = state.clone();
    let scale = if mass > 0.0 {
        c(1.0 / mass.sqrt())
    } else {
        c(0.0)
    };
    for (idx, amp) in collapsed.amps.iter_mut().enumerate() {
        if (idx / stride) % d == outcome as usize {
            *amp *= scale;
        } else {
            *amp = c(0.0);
        }
    }
    collapsed.norm_deficit = 0.0;
    Ok((prob, collapsed))
}

/// Sample one mode's photon number; the state collapses and renormalizes.
/// Any accumulated norm deficit is renormalized away here (and signalled by
/// the returned `truncation_flagged`).
pub struct MeasureOutcome {
    pub outcome: u8,
    pub state: FockState,
    pub truncation_flagged: bool,
}

pub fn measure_mode(
    state: &FockState,
    mode: usize,
    rng: &mut impl Rng,
) -> Result<MeasureOutcome, FockError> {
    state.check_mode(mode)?;
    let marginal = state.marginal(mode)?;
    let total: f64 = marginal.iter().sum();
    if total <= 0.0 {
        return Err(FockError::ZeroMarginal(mode));
    }
    let truncation_flagged = state.norm_deficit > 1e-9;
    let u: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    // Fall back to the heaviest outcome if rounding pushes u past the sum.
    let mut outcome = marginal
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(n, _)| n)
        .unwrap();
    for (n, p) in marginal.iter().enumerate() {
        acc += p;
        if u < acc {
            outcome = n;
            break;
        }
    }
    let (_, collapsed) = project_mode(state, mode, outcome as u8)?;
    Ok(MeasureOutcome {
        outcome: outcome as u8,
        state: collapsed,
        truncation_flagged,
    })
}

/// Replace a just-measured mode by vacuum, leaving the rest untouched.
pub fn reset_mode(state: &FockState, mode: usize) -> Result<FockState, FockError> {
    state.check_mode(mode)?;
    let d = state.cutoff;
    let stride = state.stride(mode);
    // The mode must be collapsed onto a single photon number.
    let marginal = state.marginal(mode)?;
    let total: f64 = marginal.iter().sum();
    let occupied: Vec<usize> = marginal
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 1e-12 * total.max(1e-300))
        .map(|(n, _)| n)
        .collect();
    if occupied.len() != 1 {
        return Err(FockError::NotCollapsed(mode));
    }
    let n_star = occupied[0];
    let mut out = state.clone();
    for amp in out.amps.iter_mut() {
        *amp = c(0.0);
    }
    for (idx, amp) in state.amps.iter().enumerate() {
        if (idx / stride) % d == n_star {
            let target = idx - n_star * stride;
            out.amps[target] = *amp;
        }
    }
    Ok(out)
}

/// Exact joint photon-number distribution (keys are occupation tuples).
#[derive(Debug, Clone)]
pub struct JointDistribution {
    pub mode_count: usize,
    pub probs: BTreeMap<Vec<u8>, f64>,
}

impl JointDistribution {
    pub fn total_mass(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Total variation distance, treating missing keys as zero.
    pub fn tvd(&self, other: &JointDistribution) -> f64 {
        let mut keys: Vec<&Vec<u8>> = self.probs.keys().collect();
        for k in other.probs.keys() {
            if !self.probs.contains_key(k) {
                keys.push(k);
            }
        }
        0.5 * keys
            .into_iter()
            .map(|k| {
                (self.probs.get(k).copied().unwrap_or(0.0)
                    - other.probs.get(k).copied().unwrap_or(0.0))
                .abs()
            })
            .sum::<f64>()
    }

    /// Keep only binary tuples; everything else (multiphoton mass plus
    /// truncation loss) becomes leakage.
    pub fn binary_capped(&self) -> PatternDistribution {
        let mut entries = BTreeMap::new();
        let mut mass = 0.0;
        for (tuple, &p) in &self.probs {
            if tuple.iter().all(|&n| n <= 1) && p > 0.0 {
                mass += p;
                entries.insert(
                    PhotonPattern::new(tuple.clone()).expect("binary tuple"),
                    p,
                );
            }
        }
        PatternDistribution {
            mode_count: self.mode_count,
            entries,
            max_photons: self.mode_count,
            leakage: (1.0 - mass).max(0.0),
        }
    }
}

fn check_static_bounds(mode_count: usize, cutoff: usize) -> Result<(), FockError> {
    if mode_count > 4 {
        return Err(FockError::ResourceBound(format!(
            "static simulation limited to 4 modes, got {mode_count}"
        )));
    }
    if cutoff > 10 {
        return Err(FockError::ResourceBound(format!(
            "cutoff limited to 10 for joint distributions, got {cutoff}"
        )));
    }
    if cutoff < 2 {
        return Err(FockError::CutoffTooSmall(cutoff));
    }
    Ok(())
}

fn distribution_of(state: &FockState) -> JointDistribution {
    JointDistribution {
        mode_count: state.mode_count,
        probs: state.probabilities(),
    }
}

/// Exact distribution of the squeeze-then-interferometer preparation.
pub fn gbs_joint_distribution(
    squeeze_params: &[f64],
    unitary: &CMat,
    cutoff: usize,
) -> Result<JointDistribution, FockError> {
    check_static_bounds(squeeze_params.len(), cutoff)?;
    let mut state = FockState::vacuum(squeeze_params.len(), cutoff)?;
    for (mode, &r) in squeeze_params.iter().enumerate() {
        state = apply_squeeze(&state, mode, r)?;
    }
    state = apply_interferometer(&state, unitary)?;
    Ok(distribution_of(&state))
}

/// Exact distribution of a bound chain circuit run statically.
pub fn circuit_joint_distribution(
    circuit: &MpsCircuit,
    theta: &[f64],
    phi: &[f64],
    cutoff: usize,
) -> Result<JointDistribution, FockError> {
    check_static_bounds(circuit.mode_count, cutoff)?;
    let bound = circuit.bind(theta, phi)?;
    let mut state = FockState::vacuum(circuit.mode_count, cutoff)?;
    for (mode, &r) in bound.squeeze_params.iter().enumerate() {
        state = apply_squeeze(&state, mode, r)?;
    }
    for gate in bound.gates() {
        state = apply_beamsplitter(&state, gate.mode_a, gate.mode_b, gate.theta, gate.phi)?;
    }
    Ok(distribution_of(&state))
}

/// Exact distribution of a holographic schedule by enumerating every
/// measurement-outcome branch (no sampling).
pub fn schedule_joint_distribution(
    schedule: &HolographicSchedule,
    cutoff: usize,
) -> Result<JointDistribution, FockError> {
    if schedule.slot_count > 3 {
        return Err(FockError::ResourceBound(format!(
            "schedule enumeration limited to 3 slots, got {}",
            schedule.slot_count
        )));
    }
    if cutoff > 10 {
        return Err(FockError::ResourceBound(format!(
            "cutoff limited to 10 for joint distributions, got {cutoff}"
        )));
    }
    let state = FockState::vacuum(schedule.slot_count, cutoff)?;
    let mut probs: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
    let mut outcomes: Vec<Option<u8>> = vec![None; schedule.logical_mode_count];
    branch_walk(schedule, 0, state, 1.0, &mut outcomes, &mut probs)?;
    Ok(JointDistribution {
        mode_count: schedule.logical_mode_count,
        probs,
    })
}

fn branch_walk(
    schedule: &HolographicSchedule,
    pc: usize,
    mut state: FockState,
    branch_prob: f64,
    outcomes: &mut Vec<Option<u8>>,
    probs: &mut BTreeMap<Vec<u8>, f64>,
) -> Result<(), FockError> {
    let mut pc = pc;
    while pc < schedule.instructions.len() {
        match schedule.instructions[pc] {
            Instruction::Squeeze { slot, r, .. } => {
                state = apply_squeeze(&state, slot, r)?;
            }
            Instruction::BeamSplit {
                slot_a,
                slot_b,
                theta,
                phi,
            } => {
                state = apply_beamsplitter(&state, slot_a, slot_b, theta, phi)?;
            }
            Instruction::Reset { slot } => {
                state = reset_mode(&state, slot)?;
            }
            Instruction::Measure { slot, logical } => {
                // The branch weight uses the unnormalized mass so that
                // truncation loss shows up as missing total probability,
                // exactly as in the static simulation.
                let norm = state.norm_sqr();
                for outcome in 0..state.cutoff as u8 {
                    let (p, collapsed) = project_mode(&state, slot, outcome)?;
                    let weight = branch_prob * p * norm;
                    if weight <= BRANCH_EPS {
                        continue;
                    }
                    outcomes[logical] = Some(outcome);
                    // Renormalized state carries weight via branch_prob.
                    branch_walk(
                        schedule,
                        pc + 1,
                        collapsed,
                        weight,
                        outcomes,
                        probs,
                    )?;
                    outcomes[logical] = None;
                }
                return Ok(());
            }
        }
        pc += 1;
    }
    let key: Vec<u8> = outcomes
        .iter()
        .map(|o| o.expect("schedule measures every mode"))
        .collect();
    *probs.entry(key).or_insert(0.0) += branch_prob;
    Ok(())
}
