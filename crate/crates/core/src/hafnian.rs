//! Exact Hafnian evaluation by perfect-matching enumeration, and the
//! closed-form photon-pattern probabilities of a graph-encoded Gaussian
//! state.
//!
//! The enumeration pairs the lowest unmatched index with every other
//! unmatched index, visiting exactly (2k-1)!! leaves for a 2k x 2k input.
//! Pattern probabilities follow
//!
//!   Pr(n) = c^N / sqrt(|det sigma_Q|) * [det(W_S) Haf(A_S)]^2
//!
//! in the binary detection regime (n_j in {0,1}, so n! = 1), where A_S is
//! the adjacency submatrix on the detected modes and W_S the diagonal of
//! weight factors 1 + w_i on those modes.

use crate::encoding::{covariance_from_kernel, kernel_from_graph, EncodingError};
use crate::graph::{InteractionGraph, WeightedEncoding};
use crate::linalg::{RMat, RVec};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HafnianError {
    #[error("matrix not symmetric at ({0},{1})")]
    Asymmetric(usize, usize),
    #[error("perfect matching count requires an even node count, got {0}")]
    OddNodeCount(usize),
    #[error("pattern length {found} does not match mode count {expected}")]
    PatternLength { expected: usize, found: usize },
    #[error("pattern entry {0} at mode {1} is outside the binary regime")]
    NonBinaryEntry(u8, usize),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

/// Binary detection pattern: one bit per mode.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhotonPattern {
    bits: Vec<u8>,
}

impl PhotonPattern {
    pub fn new(bits: Vec<u8>) -> Result<Self, HafnianError> {
        for (i, &b) in bits.iter().enumerate() {
            if b > 1 {
                return Err(HafnianError::NonBinaryEntry(b, i));
            }
        }
        Ok(Self { bits })
    }

    pub fn zeros(mode_count: usize) -> Self {
        Self {
            bits: vec![0; mode_count],
        }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Total photon count N.
    pub fn total(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    /// Indices of the detected modes.
    pub fn support(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(i, _)| i)
            .collect()
    }

    /// "0101"-style rendering used by CSV exports.
    pub fn to_bitstring(&self) -> String {
        self.bits.iter().map(|b| char::from(b'0' + b)).collect()
    }

    pub fn from_bitstring(s: &str) -> Result<Self, HafnianError> {
        let bits = s.bytes().map(|b| b.wrapping_sub(b'0')).collect();
        Self::new(bits)
    }
}

/// Hafnian value together with the number of matchings enumerated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchingSum {
    pub value: f64,
    pub matchings_enumerated: u128,
}

fn check_symmetric(matrix: &RMat) -> Result<(), HafnianError> {
    let n = matrix.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-12 {
                return Err(HafnianError::Asymmetric(i, j));
            }
        }
    }
    Ok(())
}

/// Number of perfect matchings of a labeled even set: (2k-1)!!.
pub fn perfect_matchings(node_set_size: usize) -> Result<u128, HafnianError> {
    if node_set_size % 2 != 0 {
        return Err(HafnianError::OddNodeCount(node_set_size));
    }
    let mut count: u128 = 1;
    let mut odd = 1u128;
    while odd + 1 < node_set_size as u128 {
        count *= odd + 2;
        odd += 2;
    }
    Ok(count)
}

fn matching_recursion(
    matrix: &RMat,
    unmatched: &[usize],
    product: f64,
    prune_zero: bool,
    sum: &mut f64,
    leaves: &mut u128,
) {
    if unmatched.is_empty() {
        *sum += product;
        *leaves += 1;
        return;
    }
    let first = unmatched[0];
    for pos in 1..unmatched.len() {
        let partner = unmatched[pos];
        let term = product * matrix[(first, partner)];
        if prune_zero && term == 0.0 {
            continue;
        }
        let rest: Vec<usize> = unmatched
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != 0 && i != pos)
            .map(|(_, &v)| v)
            .collect();
        matching_recursion(matrix, &rest, term, prune_zero, sum, leaves);
    }
}

fn hafnian_impl(matrix: &RMat, prune_zero: bool) -> Result<MatchingSum, HafnianError> {
    check_symmetric(matrix)?;
    let n = matrix.nrows();
    if n % 2 != 0 {
        return Ok(MatchingSum {
            value: 0.0,
            matchings_enumerated: 0,
        });
    }
    if n == 0 {
        // Empty product: one (empty) matching.
        return Ok(MatchingSum {
            value: 1.0,
            matchings_enumerated: 1,
        });
    }
    let unmatched: Vec<usize> = (0..n).collect();
    let mut sum = 0.0;
    let mut leaves = 0u128;
    matching_recursion(matrix, &unmatched, 1.0, prune_zero, &mut sum, &mut leaves);
    Ok(MatchingSum {
        value: sum,
        matchings_enumerated: leaves,
    })
}

/// Sum over all perfect matchings of the products of matched entries,
/// walking every one of the (2k-1)!! pairings.
pub fn hafnian(matrix: &RMat) -> Result<MatchingSum, HafnianError> {
    hafnian_impl(matrix, false)
}

/// Same value as [`hafnian`] but with zero-product subtrees skipped;
/// used in the inner loops of distribution enumeration.
pub fn hafnian_value(matrix: &RMat) -> Result<f64, HafnianError> {
    Ok(hafnian_impl(matrix, true)?.value)
}

/// Everything `pattern_probability` needs about one encoded graph:
/// sqrt(|det sigma_Q|), the binary adjacency, weight factors 1 + w_i, and c.
#[derive(Debug, Clone)]
pub struct EncodingBundle {
    adjacency: RMat,
    weight_factors: RVec,
    c: f64,
    sqrt_det_sigma_q: f64,
}

impl EncodingBundle {
    pub fn from_graph_encoding(
        graph: &InteractionGraph,
        encoding: &WeightedEncoding,
    ) -> Result<Self, HafnianError> {
        let kernel = kernel_from_graph(encoding)?;
        let state = covariance_from_kernel(&kernel)?;
        Ok(Self {
            adjacency: graph.adjacency().clone(),
            weight_factors: encoding.weight_factors(),
            c: encoding.c,
            sqrt_det_sigma_q: state.det_sigma_q().sqrt(),
        })
    }

    pub fn mode_count(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn sqrt_det_sigma_q(&self) -> f64 {
        self.sqrt_det_sigma_q
    }

    pub fn weight_factors(&self) -> &RVec {
        &self.weight_factors
    }

    pub fn submatrix(&self, support: &[usize]) -> RMat {
        RMat::from_fn(support.len(), support.len(), |i, j| {
            self.adjacency[(support[i], support[j])]
        })
    }
}

/// Probability of one binary detection pattern.
pub fn pattern_probability(
    bundle: &EncodingBundle,
    pattern: &PhotonPattern,
) -> Result<f64, HafnianError> {
    let m = bundle.mode_count();
    if pattern.len() != m {
        return Err(HafnianError::PatternLength {
            expected: m,
            found: pattern.len(),
        });
    }
    let support = pattern.support();
    let n = support.len();
    if n % 2 != 0 {
        // Odd subgraphs have no perfect matching.
        return Ok(0.0);
    }
    let haf = hafnian_value(&bundle.submatrix(&support))?;
    if haf == 0.0 {
        return Ok(0.0);
    }
    let det_w: f64 = support.iter().map(|&i| bundle.weight_factors[i]).product();
    let amplitude = det_w * haf;
    if n > 6 {
        // Log space guards against underflow of c^N for deep patterns.
        let log_p = n as f64 * bundle.c.ln() + 2.0 * amplitude.abs().ln()
            - bundle.sqrt_det_sigma_q.ln();
        Ok(log_p.exp())
    } else {
        Ok(bundle.c.powi(n as i32) * amplitude * amplitude / bundle.sqrt_det_sigma_q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph;

    fn bundle_for(graph: &InteractionGraph, c_val: f64) -> EncodingBundle {
        let enc = graph::weighted_encoding(graph, c_val).unwrap();
        EncodingBundle::from_graph_encoding(graph, &enc).unwrap()
    }

    #[test]
    fn single_edge_hafnian() {
        let m = RMat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let h = hafnian(&m).unwrap();
        assert_eq!(h.value, 1.0);
        assert_eq!(h.matchings_enumerated, 1);
    }

    #[test]
    fn all_ones_four_matrix() {
        let m = RMat::from_element(4, 4, 1.0);
        let h = hafnian(&m).unwrap();
        assert_eq!(h.value, 3.0);
        assert_eq!(h.matchings_enumerated, 3);
    }

    #[test]
    fn four_cycle_has_two_matchings_with_weight() {
        // C4 on edges (0,1),(1,2),(2,3),(3,0): pairing {02,13} contributes 0.
        let g = InteractionGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], None, None)
            .unwrap();
        let h = hafnian(g.adjacency()).unwrap();
        assert_eq!(h.value, 2.0);
        assert_eq!(h.matchings_enumerated, 3);
    }

    #[test]
    fn odd_dimension_is_zero() {
        let m = RMat::from_element(3, 3, 1.0) - RMat::identity(3, 3);
        let h = hafnian(&m).unwrap();
        assert_eq!(h.value, 0.0);
        assert_eq!(h.matchings_enumerated, 0);
    }

    #[test]
    fn empty_matrix_is_one() {
        let h = hafnian(&RMat::zeros(0, 0)).unwrap();
        assert_eq!(h.value, 1.0);
        assert_eq!(h.matchings_enumerated, 1);
    }

    #[test]
    fn asymmetric_rejected() {
        let m = RMat::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(hafnian(&m), Err(HafnianError::Asymmetric(0, 1))));
    }

    #[test]
    fn pruned_and_full_enumeration_agree() {
        for seed in 0..6 {
            let g = graph::random_graph(8, 0.5, seed).unwrap();
            let full = hafnian(g.adjacency()).unwrap();
            let pruned = hafnian_value(g.adjacency()).unwrap();
            assert_eq!(full.value, pruned);
            assert_eq!(full.matchings_enumerated, perfect_matchings(8).unwrap());
        }
    }

    #[test]
    fn double_factorials() {
        assert_eq!(perfect_matchings(0).unwrap(), 1);
        assert_eq!(perfect_matchings(2).unwrap(), 1);
        assert_eq!(perfect_matchings(4).unwrap(), 3);
        assert_eq!(perfect_matchings(10).unwrap(), 945);
        assert_eq!(perfect_matchings(20).unwrap(), 654_729_075);
        assert!(matches!(
            perfect_matchings(5),
            Err(HafnianError::OddNodeCount(5))
        ));
    }

    #[test]
    fn two_mode_pattern_probabilities() {
        // tanh r = 0.5 two-mode squeezed state: P(00) = 1 - tanh^2 r,
        // P(11) = (1 - tanh^2 r) tanh^2 r.
        let g = InteractionGraph::from_edges(2, &[(0, 1)], None, None).unwrap();
        let b = bundle_for(&g, 0.5);
        let p00 = pattern_probability(&b, &PhotonPattern::new(vec![0, 0]).unwrap()).unwrap();
        let p10 = pattern_probability(&b, &PhotonPattern::new(vec![1, 0]).unwrap()).unwrap();
        let p11 = pattern_probability(&b, &PhotonPattern::new(vec![1, 1]).unwrap()).unwrap();
        assert!((p00 - 0.75).abs() < 1e-12);
        assert_eq!(p10, 0.0);
        assert!((p11 - 0.1875).abs() < 1e-12);
    }

    #[test]
    fn all_zeros_pattern_is_inverse_sqrt_det() {
        for seed in [1, 4, 9] {
            let g = graph::random_graph(5, 0.5, seed).unwrap();
            if g.edge_count() == 0 {
                continue;
            }
            let c_val = graph::choose_c(&g, 0.5).unwrap();
            let b = bundle_for(&g, c_val);
            let p0 = pattern_probability(&b, &PhotonPattern::zeros(5)).unwrap();
            assert!((p0 - 1.0 / b.sqrt_det_sigma_q()).abs() < 1e-14);
        }
    }

    #[test]
    fn log_space_branch_matches_direct_evaluation() {
        // An 8-node complete graph keeps Haf(A_S) nonzero at N = 8, which
        // exercises the log-space branch against the direct product.
        let mut edges = Vec::new();
        for i in 0..8 {
            for j in (i + 1)..8 {
                edges.push((i, j));
            }
        }
        let g = InteractionGraph::from_edges(8, &edges, Some(vec![0.3; 8]), None).unwrap();
        let c_val = graph::choose_c(&g, 0.5).unwrap();
        let b = bundle_for(&g, c_val);
        let pattern = PhotonPattern::new(vec![1; 8]).unwrap();
        let via_log = pattern_probability(&b, &pattern).unwrap();
        let haf = hafnian_value(&b.submatrix(&pattern.support())).unwrap();
        let det_w: f64 = (0..8).map(|i| b.weight_factors[i]).product();
        let direct = b.c.powi(8) * (det_w * haf).powi(2) / b.sqrt_det_sigma_q;
        assert!((via_log - direct).abs() <= 1e-12 * direct.max(1.0));
    }

    #[test]
    fn pattern_length_checked() {
        let g = InteractionGraph::from_edges(2, &[(0, 1)], None, None).unwrap();
        let b = bundle_for(&g, 0.5);
        assert!(matches!(
            pattern_probability(&b, &PhotonPattern::zeros(3)),
            Err(HafnianError::PatternLength { .. })
        ));
    }

    #[test]
    fn bitstring_round_trip() {
        let p = PhotonPattern::new(vec![1, 0, 1, 1, 0]).unwrap();
        assert_eq!(p.to_bitstring(), "10110");
        assert_eq!(PhotonPattern::from_bitstring("10110").unwrap(), p);
        assert!(PhotonPattern::from_bitstring("102").is_err());
    }
}
