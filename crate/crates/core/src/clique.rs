//! Post-process sampled photon patterns into heavy cliques: shrink a sampled
//! subgraph by repeatedly dropping its lowest-degree vertex until a clique
//! remains, then greedily expand by vertices fully connected to the clique.
//! A branch-and-bound maximum-weight-clique search serves as the exact
//! oracle for validation.
//!
//! Clique weight is the sum of its node weights. Tie-breaking is
//! deterministic throughout: shrinking removes (min induced degree, min
//! weight, min index); expansion adds (max weight, min index).

use crate::graph::InteractionGraph;
use crate::hafnian::PhotonPattern;
use crate::sampler::SampleHistogram;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliqueError {
    #[error("pattern length {found} does not match graph size {expected}")]
    PatternLength { expected: usize, found: usize },
    #[error("input set is not a clique (vertices {0} and {1} not adjacent)")]
    NotAClique(usize, usize),
    #[error("graph too large for exhaustive search: {0} > {1} nodes")]
    SearchBudget(usize, usize),
}

/// One post-processed sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CliqueReport {
    /// Sorted vertex indices.
    pub vertex_set: Vec<usize>,
    /// Sum of node weights over the set.
    pub weight: f64,
    pub is_clique: bool,
    /// Lexicographically smallest source pattern mapping to this clique.
    pub source_pattern: PhotonPattern,
}

pub fn is_clique(graph: &InteractionGraph, set: &[usize]) -> bool {
    set.iter().enumerate().all(|(i, &u)| {
        set[i + 1..].iter().all(|&v| graph.has_edge(u, v))
    })
}

pub fn clique_weight(graph: &InteractionGraph, set: &[usize]) -> f64 {
    set.iter().map(|&v| graph.node_weights()[v]).sum()
}

/// Drop (min induced degree, min weight, min index) vertices until the
/// remaining set is a clique. The empty pattern maps to the empty set.
pub fn shrink_to_clique(
    graph: &InteractionGraph,
    pattern: &PhotonPattern,
) -> Result<Vec<usize>, CliqueError> {
    if pattern.len() != graph.node_count() {
        return Err(CliqueError::PatternLength {
            expected: graph.node_count(),
            found: pattern.len(),
        });
    }
    let mut set = pattern.support();
    while !is_clique(graph, &set) {
        let victim = set
            .iter()
            .copied()
            .min_by(|&u, &v| {
                let du = graph.induced_degree(u, &set);
                let dv = graph.induced_degree(v, &set);
                du.cmp(&dv)
                    .then(
                        graph.node_weights()[u]
                            .partial_cmp(&graph.node_weights()[v])
                            .unwrap(),
                    )
                    .then(u.cmp(&v))
            })
            .expect("non-clique set is nonempty");
        set.retain(|&v| v != victim);
    }
    Ok(set)
}

/// Grow a clique to maximality, adding (max weight, min index) candidates
/// one at a time.
pub fn expand_clique(
    graph: &InteractionGraph,
    clique: &[usize],
) -> Result<Vec<usize>, CliqueError> {
    for (i, &u) in clique.iter().enumerate() {
        for &v in &clique[i + 1..] {
            if !graph.has_edge(u, v) {
                return Err(CliqueError::NotAClique(u, v));
            }
        }
    }
    let mut set = clique.to_vec();
    loop {
        let candidate = (0..graph.node_count())
            .filter(|v| !set.contains(v))
            .filter(|&v| set.iter().all(|&u| graph.has_edge(u, v)))
            .min_by(|&a, &b| {
                graph.node_weights()[b]
                    .partial_cmp(&graph.node_weights()[a])
                    .unwrap()
                    .then(a.cmp(&b))
            });
        match candidate {
            Some(v) => set.push(v),
            None => break,
        }
    }
    set.sort_unstable();
    Ok(set)
}

/// Shrink + expand every sampled pattern, aggregating identical cliques.
/// Results sort by weight descending (vertex set ascending on ties).
pub fn postprocess_samples(
    graph: &InteractionGraph,
    histogram: &SampleHistogram,
) -> Result<Vec<(CliqueReport, u64)>, CliqueError> {
    let mut aggregated: BTreeMap<Vec<usize>, (u64, PhotonPattern)> = BTreeMap::new();
    for (pattern, &count) in &histogram.counts {
        let shrunk = shrink_to_clique(graph, pattern)?;
        let expanded = expand_clique(graph, &shrunk)?;
        aggregated
            .entry(expanded)
            .and_modify(|(freq, source)| {
                *freq += count;
                if pattern < source {
                    *source = pattern.clone();
                }
            })
            .or_insert_with(|| (count, pattern.clone()));
    }
    let mut reports: Vec<(CliqueReport, u64)> = aggregated
        .into_iter()
        .map(|(vertex_set, (freq, source_pattern))| {
            let weight = clique_weight(graph, &vertex_set);
            (
                CliqueReport {
                    is_clique: is_clique(graph, &vertex_set),
                    vertex_set,
                    weight,
                    source_pattern,
                },
                freq,
            )
        })
        .collect();
    reports.sort_by(|(a, _), (b, _)| {
        b.weight
            .partial_cmp(&a.weight)
            .unwrap()
            .then_with(|| a.vertex_set.cmp(&b.vertex_set))
    });
    Ok(reports)
}

/// Most frequent postprocessed clique (ties: higher weight, then smaller
/// vertex set).
pub fn modal_clique(reports: &[(CliqueReport, u64)]) -> Option<&CliqueReport> {
    reports
        .iter()
        .max_by(|(ra, fa), (rb, fb)| {
            fa.cmp(fb)
                .then(ra.weight.partial_cmp(&rb.weight).unwrap())
                .then_with(|| rb.vertex_set.cmp(&ra.vertex_set))
        })
        .map(|(r, _)| r)
}

const BRUTE_FORCE_LIMIT: usize = 30;

/// Exact maximum-weight clique by branch and bound over index-ordered
/// candidates; ties resolve to the lexicographically smallest vertex set.
pub fn brute_force_max_clique(
    graph: &InteractionGraph,
) -> Result<(Vec<usize>, f64), CliqueError> {
    let n = graph.node_count();
    if n > BRUTE_FORCE_LIMIT {
        return Err(CliqueError::SearchBudget(n, BRUTE_FORCE_LIMIT));
    }
    let mut best_set: Vec<usize> = Vec::new();
    let mut best_weight = f64::NEG_INFINITY;

    fn search(
        graph: &InteractionGraph,
        current: &mut Vec<usize>,
        current_weight: f64,
        candidates: &[usize],
        best_set: &mut Vec<usize>,
        best_weight: &mut f64,
    ) {
        let remaining: f64 = candidates
            .iter()
            .map(|&v| graph.node_weights()[v])
            .sum();
        if current_weight + remaining < *best_weight {
            return;
        }
        let better = current_weight > *best_weight
            || (current_weight == *best_weight && current < best_set);
        if better && !current.is_empty() {
            *best_set = current.clone();
            *best_weight = current_weight;
        }
        for (i, &v) in candidates.iter().enumerate() {
            let next: Vec<usize> = candidates[i + 1..]
                .iter()
                .copied()
                .filter(|&u| graph.has_edge(u, v))
                .collect();
            current.push(v);
            search(
                graph,
                current,
                current_weight + graph.node_weights()[v],
                &next,
                best_set,
                best_weight,
            );
            current.pop();
        }
    }

    let all: Vec<usize> = (0..n).collect();
    let mut current = Vec::new();
    search(
        graph,
        &mut current,
        0.0,
        &all,
        &mut best_set,
        &mut best_weight,
    );
    Ok((best_set, best_weight))
}

/// CSV rows `vertices` (semicolon-joined), `weight`, `frequency`.
pub fn clique_report_csv(reports: &[(CliqueReport, u64)]) -> String {
    let mut out = String::from("vertices,weight,frequency\n");
    for (report, freq) in reports {
        let vertices = report
            .vertex_set
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(";");
        writeln!(out, "{},{},{}", vertices, report.weight, freq).expect("string write");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{self, InteractionGraph};
    use crate::sampler;
    use std::collections::BTreeMap;

    fn pattern(bits: &[u8]) -> PhotonPattern {
        PhotonPattern::new(bits.to_vec()).unwrap()
    }

    #[test]
    fn triangle_shrinks_to_itself() {
        let g = InteractionGraph::from_edges(4, &[(0, 1), (1, 2), (0, 2)], None, None).unwrap();
        let set = shrink_to_clique(&g, &pattern(&[1, 1, 1, 0])).unwrap();
        assert_eq!(set, vec![0, 1, 2]);
    }

    #[test]
    fn pendant_vertex_is_removed_first() {
        // Triangle {1,2,3} plus vertex 0 attached only to 1.
        let g = InteractionGraph::from_edges(4, &[(1, 2), (2, 3), (1, 3), (0, 1)], None, None)
            .unwrap();
        let set = shrink_to_clique(&g, &pattern(&[1, 1, 1, 1])).unwrap();
        assert_eq!(set, vec![1, 2, 3]);
    }

    #[test]
    fn independent_pair_tie_breaks_deterministically() {
        let g = InteractionGraph::from_edges(3, &[(0, 2)], None, None).unwrap();
        // Vertices 0 and 1 are non-adjacent, both induced degree 0 and equal
        // weight: the smaller index is removed, the larger survives.
        let set = shrink_to_clique(&g, &pattern(&[1, 1, 0])).unwrap();
        assert_eq!(set, vec![1]);
    }

    #[test]
    fn empty_pattern_shrinks_to_empty_set() {
        let g = InteractionGraph::from_edges(3, &[(0, 1)], None, None).unwrap();
        let set = shrink_to_clique(&g, &pattern(&[0, 0, 0])).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn edge_in_triangle_expands_to_triangle() {
        let g = InteractionGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)], None, None).unwrap();
        let set = expand_clique(&g, &[0, 1]).unwrap();
        assert_eq!(set, vec![0, 1, 2]);
    }

    #[test]
    fn maximal_clique_is_unchanged_by_expansion() {
        let g = InteractionGraph::from_edges(4, &[(0, 1), (1, 2), (0, 2)], None, None).unwrap();
        let set = expand_clique(&g, &[0, 1, 2]).unwrap();
        assert_eq!(set, vec![0, 1, 2]);
    }

    #[test]
    fn expansion_prefers_heavier_candidates() {
        // Clique {0,1}; vertices 2 and 3 both complete it, 3 is heavier and
        // chosen first even though 2 has the smaller index.
        let g = InteractionGraph::from_edges(
            5,
            &[(0, 1), (0, 2), (1, 2), (0, 3), (1, 3)],
            Some(vec![0.0, 0.0, 0.1, 0.9, 0.0]),
            None,
        )
        .unwrap();
        let set = expand_clique(&g, &[0, 1]).unwrap();
        // Vertex 3 joins; vertex 2 is no longer fully connected afterwards
        // (2 and 3 are not adjacent).
        assert_eq!(set, vec![0, 1, 3]);
    }

    #[test]
    fn expansion_rejects_non_clique_input() {
        let g = InteractionGraph::from_edges(3, &[(0, 1)], None, None).unwrap();
        assert!(matches!(
            expand_clique(&g, &[0, 2]),
            Err(CliqueError::NotAClique(0, 2))
        ));
    }

    #[test]
    fn expansion_output_is_maximal() {
        for seed in 0..8 {
            let g = graph::random_graph(10, 0.5, seed).unwrap();
            let set = expand_clique(&g, &[]).unwrap();
            assert!(is_clique(&g, &set));
            for v in 0..10 {
                if set.contains(&v) {
                    continue;
                }
                assert!(
                    !set.iter().all(|&u| g.has_edge(u, v)),
                    "vertex {v} could extend {set:?}"
                );
            }
        }
    }

    #[test]
    fn all_zero_histogram_gives_single_entry() {
        let g = InteractionGraph::from_edges(3, &[(0, 1)], None, None).unwrap();
        let mut counts = BTreeMap::new();
        counts.insert(pattern(&[0, 0, 0]), 50u64);
        let hist = sampler::SampleHistogram {
            counts,
            total_draws: 50,
            seed: 0,
        };
        let reports = postprocess_samples(&g, &hist).unwrap();
        assert_eq!(reports.len(), 1);
        // The empty set expands greedily to a maximal clique.
        assert_eq!(reports[0].0.vertex_set, vec![0, 1]);
        assert_eq!(reports[0].1, 50);
    }

    #[test]
    fn postprocessing_is_idempotent_on_maximal_cliques() {
        let g = InteractionGraph::from_edges(5, &[(0, 1), (1, 2), (0, 2), (3, 4)], None, None)
            .unwrap();
        let p = pattern(&[1, 1, 1, 0, 0]);
        let shrunk = shrink_to_clique(&g, &p).unwrap();
        let expanded = expand_clique(&g, &shrunk).unwrap();
        assert_eq!(expanded, vec![0, 1, 2]);
    }

    #[test]
    fn brute_force_on_k4() {
        let mut edges = Vec::new();
        for i in 0..4 {
            for j in (i + 1)..4 {
                edges.push((i, j));
            }
        }
        let g = InteractionGraph::from_edges(4, &edges, Some(vec![1.0; 4]), None).unwrap();
        let (set, weight) = brute_force_max_clique(&g).unwrap();
        assert_eq!(set, vec![0, 1, 2, 3]);
        assert_eq!(weight, 4.0);
    }

    #[test]
    fn brute_force_prefers_heavier_triangle() {
        let g = InteractionGraph::from_edges(
            6,
            &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)],
            Some(vec![0.1, 0.1, 0.1, 1.0, 1.0, 1.0]),
            None,
        )
        .unwrap();
        let (set, weight) = brute_force_max_clique(&g).unwrap();
        assert_eq!(set, vec![3, 4, 5]);
        assert!((weight - 3.0).abs() < 1e-12);
    }

    #[test]
    fn brute_force_matches_bitmask_scan() {
        for seed in [2, 7, 13] {
            let g = graph::random_graph(12, 0.5, seed).unwrap();
            // Give deterministic pseudo-weights.
            let weights: Vec<f64> = (0..12).map(|i| ((i * 37 + seed as usize) % 10) as f64 / 10.0 + 0.1).collect();
            let g = InteractionGraph::new(g.adjacency().clone(), weights.clone().into(), None)
                .unwrap();
            let (set, weight) = brute_force_max_clique(&g).unwrap();

            // Independent oracle: scan all 2^12 subsets.
            let mut best_mask_weight = f64::NEG_INFINITY;
            let mut best_mask_set: Vec<usize> = Vec::new();
            for mask in 1u32..(1 << 12) {
                let subset: Vec<usize> = (0..12).filter(|&b| mask >> b & 1 == 1).collect();
                if !is_clique(&g, &subset) {
                    continue;
                }
                let w: f64 = subset.iter().map(|&v| weights[v]).sum();
                if w > best_mask_weight
                    || (w == best_mask_weight && subset < best_mask_set)
                {
                    best_mask_weight = w;
                    best_mask_set = subset;
                }
            }
            assert_eq!(set, best_mask_set, "seed {seed}");
            assert!((weight - best_mask_weight).abs() < 1e-12);
        }
    }

    #[test]
    fn search_budget_enforced() {
        let g = graph::random_graph(31, 0.2, 1).unwrap();
        assert!(matches!(
            brute_force_max_clique(&g),
            Err(CliqueError::SearchBudget(31, 30))
        ));
    }

    #[test]
    fn csv_has_expected_shape() {
        let g = InteractionGraph::from_edges(3, &[(0, 1)], Some(vec![0.5, 0.25, 0.0]), None)
            .unwrap();
        let mut counts = BTreeMap::new();
        counts.insert(pattern(&[1, 1, 0]), 10u64);
        counts.insert(pattern(&[0, 0, 0]), 5u64);
        let hist = sampler::SampleHistogram {
            counts,
            total_draws: 15,
            seed: 0,
        };
        let reports = postprocess_samples(&g, &hist).unwrap();
        let csv = clique_report_csv(&reports);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "vertices,weight,frequency");
        assert!(lines[1].starts_with("0;1,0.75,"), "{}", lines[1]);
    }
}
