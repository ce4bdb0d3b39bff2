//! Binding-interaction graphs: validation, generation, file I/O, and the
//! weighted rescaling that feeds the Gaussian encoding.
//!
//! A graph instance is a symmetric zero-diagonal binary adjacency matrix plus
//! one non-negative weight per node. The rescaling constant `c` is chosen as
//! a safety factor times the inverse of the top adjacency eigenvalue so that
//! every singular value handed to the squeezer parameterization stays
//! strictly below 1.

use crate::linalg::{self, RMat, RVec};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph parse failure: {0}")]
    Parse(String),
    #[error("adjacency not symmetric at ({0},{1})")]
    Asymmetric(usize, usize),
    #[error("nonzero diagonal at {0}")]
    NonzeroDiagonal(usize),
    #[error("negative weight at {0}")]
    NegativeWeight(usize),
    #[error("non-finite weight at {0}")]
    NonFiniteWeight(usize),
    #[error("edge ({0},{1}) out of range for {2} nodes")]
    EdgeOutOfRange(usize, usize, usize),
    #[error("expected {expected} weights, found {found}")]
    WeightCount { expected: usize, found: usize },
    #[error("expected {expected} labels, found {found}")]
    LabelCount { expected: usize, found: usize },
    #[error("node count must be at least 2, got {0}")]
    TooFewNodes(usize),
    #[error("zero adjacency; no encoding exists")]
    ZeroAdjacency,
    #[error("safety factor must lie in (0,1), got {0}")]
    BadSafetyFactor(f64),
    #[error("edge probability must lie in [0,1], got {0}")]
    BadEdgeProbability(f64),
    #[error("rescaling constant must be positive, got {0}")]
    BadRescaling(f64),
    #[error("weights too large for valid Gaussian; reduce c (max singular value {0})")]
    WeightsTooLarge(f64),
}

/// The docking problem instance: which pairs of contacts are compatible, and
/// how strongly each contact is favoured.
#[derive(Debug, Clone)]
pub struct InteractionGraph {
    node_count: usize,
    adjacency: RMat,
    node_weights: RVec,
    node_labels: Option<Vec<String>>,
}

impl InteractionGraph {
    /// Build from an explicit adjacency matrix, validating all invariants.
    pub fn new(
        adjacency: RMat,
        node_weights: RVec,
        node_labels: Option<Vec<String>>,
    ) -> Result<Self, GraphError> {
        let n = adjacency.nrows();
        if n < 2 {
            return Err(GraphError::TooFewNodes(n));
        }
        if adjacency.ncols() != n {
            return Err(GraphError::Parse(format!(
                "adjacency must be square, got {}x{}",
                n,
                adjacency.ncols()
            )));
        }
        for i in 0..n {
            if adjacency[(i, i)] != 0.0 {
                return Err(GraphError::NonzeroDiagonal(i));
            }
            for j in 0..n {
                let a = adjacency[(i, j)];
                if a != 0.0 && a != 1.0 {
                    return Err(GraphError::Parse(format!(
                        "adjacency entry ({i},{j}) = {a} is not 0 or 1"
                    )));
                }
                if adjacency[(i, j)] != adjacency[(j, i)] {
                    return Err(GraphError::Asymmetric(i, j));
                }
            }
        }
        if node_weights.len() != n {
            return Err(GraphError::WeightCount {
                expected: n,
                found: node_weights.len(),
            });
        }
        for (i, w) in node_weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(GraphError::NonFiniteWeight(i));
            }
            if *w < 0.0 {
                return Err(GraphError::NegativeWeight(i));
            }
        }
        if let Some(labels) = &node_labels {
            if labels.len() != n {
                return Err(GraphError::LabelCount {
                    expected: n,
                    found: labels.len(),
                });
            }
        }
        Ok(Self {
            node_count: n,
            adjacency,
            node_weights,
            node_labels,
        })
    }

    /// Build from an edge list with weights defaulting to zero.
    pub fn from_edges(
        node_count: usize,
        edges: &[(usize, usize)],
        weights: Option<Vec<f64>>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, GraphError> {
        if node_count < 2 {
            return Err(GraphError::TooFewNodes(node_count));
        }
        let mut adjacency = RMat::zeros(node_count, node_count);
        for &(i, j) in edges {
            if i >= node_count || j >= node_count {
                return Err(GraphError::EdgeOutOfRange(i, j, node_count));
            }
            if i == j {
                return Err(GraphError::NonzeroDiagonal(i));
            }
            adjacency[(i, j)] = 1.0;
            adjacency[(j, i)] = 1.0;
        }
        let weights = RVec::from_vec(weights.unwrap_or_else(|| vec![0.0; node_count]));
        Self::new(adjacency, weights, labels)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn adjacency(&self) -> &RMat {
        &self.adjacency
    }

    pub fn node_weights(&self) -> &RVec {
        &self.node_weights
    }

    pub fn node_labels(&self) -> Option<&[String]> {
        self.node_labels.as_deref()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[(i, j)] != 0.0
    }

    pub fn edge_count(&self) -> usize {
        let mut count = 0;
        for i in 0..self.node_count {
            for j in (i + 1)..self.node_count {
                if self.has_edge(i, j) {
                    count += 1;
                }
            }
        }
        count
    }

    /// Degree of `v` within the induced subgraph `set`.
    pub fn induced_degree(&self, v: usize, set: &[usize]) -> usize {
        set.iter().filter(|&&u| u != v && self.has_edge(u, v)).count()
    }

    /// Largest adjacency eigenvalue. Positive for any nonempty graph since
    /// the diagonal (hence the trace) is zero.
    pub fn top_eigenvalue(&self) -> f64 {
        let (vals, _) = linalg::symmetric_eigen_sorted(&self.adjacency);
        vals[0]
    }
}

/// Erdős–Rényi G(M, p) with a symmetric zero-diagonal binary adjacency.
/// Identical seeds give identical graphs (ChaCha12 generator).
pub fn random_graph(
    node_count: usize,
    edge_probability: f64,
    seed: u64,
) -> Result<InteractionGraph, GraphError> {
    if node_count < 2 {
        return Err(GraphError::TooFewNodes(node_count));
    }
    if !(0.0..=1.0).contains(&edge_probability) {
        return Err(GraphError::BadEdgeProbability(edge_probability));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut adjacency = RMat::zeros(node_count, node_count);
    for i in 0..node_count {
        for j in (i + 1)..node_count {
            if rng.gen::<f64>() < edge_probability {
                adjacency[(i, j)] = 1.0;
                adjacency[(j, i)] = 1.0;
            }
        }
    }
    InteractionGraph::new(adjacency, RVec::zeros(node_count), None)
}

/// Pick the rescaling constant c = t / lambda_1 for a safety factor
/// t in (0,1), guaranteeing 0 < c < 1/lambda_1.
pub fn choose_c(graph: &InteractionGraph, safety_factor: f64) -> Result<f64, GraphError> {
    if !(safety_factor > 0.0 && safety_factor < 1.0) {
        return Err(GraphError::BadSafetyFactor(safety_factor));
    }
    let lambda_1 = graph.top_eigenvalue();
    if lambda_1 <= 1e-12 {
        return Err(GraphError::ZeroAdjacency);
    }
    Ok(safety_factor / lambda_1)
}

/// The rescaled, weighted instance actually fed to the Gaussian encoding.
///
/// `omega[i] = c (1 + w_i)` and `scaled_adjacency = Omega A Omega`. The
/// matrix entering the kernel is `scaled_adjacency / c` (equal to `c A` when
/// all weights vanish), and its largest singular value must stay below 1.
#[derive(Debug, Clone)]
pub struct WeightedEncoding {
    pub c: f64,
    pub omega: RVec,
    pub scaled_adjacency: RMat,
}

impl WeightedEncoding {
    /// Diagonal weight factors 1 + w_i (omega with the rescaling divided out).
    pub fn weight_factors(&self) -> RVec {
        self.omega.map(|o| o / self.c)
    }

    /// The block that enters the kernel K = B ⊕ B: c (1+w) A (1+w).
    pub fn kernel_block(&self) -> RMat {
        self.scaled_adjacency.map(|x| x / self.c)
    }

    /// Largest singular value of the kernel block (must be < 1).
    pub fn kernel_spectral_radius(&self) -> f64 {
        let (vals, _) = linalg::symmetric_eigen_sorted(&self.kernel_block());
        vals.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }
}

/// Form omega and the doubly-weighted adjacency, re-verifying that the
/// weighted matrix is still representable after the kernel scaling.
pub fn weighted_encoding(
    graph: &InteractionGraph,
    c: f64,
) -> Result<WeightedEncoding, GraphError> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(GraphError::BadRescaling(c));
    }
    let n = graph.node_count();
    let omega = RVec::from_iterator(n, graph.node_weights().iter().map(|w| c * (1.0 + w)));
    let mut scaled = graph.adjacency().clone();
    for i in 0..n {
        for j in 0..n {
            scaled[(i, j)] *= omega[i] * omega[j];
        }
    }
    let encoding = WeightedEncoding {
        c,
        omega,
        scaled_adjacency: scaled,
    };
    let radius = encoding.kernel_spectral_radius();
    if radius >= 1.0 {
        return Err(GraphError::WeightsTooLarge(radius));
    }
    Ok(encoding)
}

/// On-disk representation: `nodes`, `edges` as 0-indexed pairs, optional
/// `weights` (default all zero) and `labels`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub nodes: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

pub fn load_graph(bytes: &[u8]) -> Result<InteractionGraph, GraphError> {
    let file: GraphFile =
        serde_json::from_slice(bytes).map_err(|e| GraphError::Parse(e.to_string()))?;
    let edges: Vec<(usize, usize)> = file.edges.iter().map(|&[i, j]| (i, j)).collect();
    InteractionGraph::from_edges(file.nodes, &edges, file.weights, file.labels)
}

pub fn save_graph(graph: &InteractionGraph) -> String {
    let mut edges = Vec::new();
    for i in 0..graph.node_count() {
        for j in (i + 1)..graph.node_count() {
            if graph.has_edge(i, j) {
                edges.push([i, j]);
            }
        }
    }
    let file = GraphFile {
        nodes: graph.node_count(),
        edges,
        weights: Some(graph.node_weights().iter().copied().collect()),
        labels: graph.node_labels().map(|l| l.to_vec()),
    };
    serde_json::to_string_pretty(&file).expect("graph serialization cannot fail")
}
