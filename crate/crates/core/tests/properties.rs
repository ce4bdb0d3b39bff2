//! Property-based invariants over randomized inputs.

use gbs_core::encoding;
use gbs_core::graph::{self, InteractionGraph};
use gbs_core::hafnian;
use gbs_core::linalg::{self, RMat};
use proptest::prelude::*;

fn symmetric_matrix(n: usize) -> impl Strategy<Value = RMat> {
    proptest::collection::vec(-1.0f64..1.0, n * (n + 1) / 2).prop_map(move |upper| {
        let mut m = RMat::zeros(n, n);
        let mut it = upper.into_iter();
        for i in 0..n {
            for j in i..n {
                let v = it.next().unwrap();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    })
}

fn binary_symmetric_matrix(n: usize) -> impl Strategy<Value = RMat> {
    proptest::collection::vec(proptest::bool::ANY, n * (n - 1) / 2).prop_map(move |bits| {
        let mut m = RMat::zeros(n, n);
        let mut it = bits.into_iter();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = if it.next().unwrap() { 1.0 } else { 0.0 };
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hafnian_invariant_under_relabeling(
        m in binary_symmetric_matrix(6),
        perm_seed in 0u64..1000,
    ) {
        let reference = hafnian::hafnian(&m).unwrap().value;
        // Fisher-Yates from the seed.
        let mut perm: Vec<usize> = (0..6).collect();
        let mut state = perm_seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        for i in (1..6usize).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            perm.swap(i, j);
        }
        let permuted = RMat::from_fn(6, 6, |i, j| m[(perm[i], perm[j])]);
        prop_assert_eq!(hafnian::hafnian(&permuted).unwrap().value, reference);
    }

    #[test]
    fn adding_an_edge_never_decreases_binary_hafnian(
        m in binary_symmetric_matrix(6),
        edge in (0usize..6, 0usize..6),
    ) {
        let before = hafnian::hafnian(&m).unwrap().value;
        let (mut i, mut j) = edge;
        if i == j {
            j = (j + 1) % 6;
        }
        if i > j {
            std::mem::swap(&mut i, &mut j);
        }
        let mut grown = m.clone();
        grown[(i, j)] = 1.0;
        grown[(j, i)] = 1.0;
        let after = hafnian::hafnian(&grown).unwrap().value;
        prop_assert!(after >= before, "adding ({i},{j}): {after} < {before}");
    }

    #[test]
    fn takagi_reconstructs_and_stays_unitary(m in symmetric_matrix(5)) {
        let factors = encoding::takagi(&m).unwrap();
        prop_assert!(linalg::is_unitary(&factors.unitary, 1e-9));
        let residual = linalg::max_abs_diff(&factors.reconstruct(), &linalg::to_complex(&m));
        prop_assert!(residual < 1e-8, "reconstruction residual {residual}");
        // Singular values descending.
        let sv = &factors.singular_values;
        prop_assert!((0..sv.len() - 1).all(|i| sv[i] >= sv[i + 1] - 1e-12));
    }

    #[test]
    fn kernel_round_trip_on_random_encodings(seed in 0u64..500, t in 0.05f64..0.95) {
        let g = graph::random_graph(6, 0.5, seed).unwrap();
        prop_assume!(g.edge_count() > 0);
        let c_val = graph::choose_c(&g, t).unwrap();
        let enc = graph::weighted_encoding(&g, c_val).unwrap();
        let kernel = encoding::kernel_from_graph(&enc).unwrap();
        let state = encoding::covariance_from_kernel(&kernel).unwrap();
        let back = encoding::kernel_of(&state).unwrap();
        let rel = linalg::frobenius_norm(&(back.matrix() - kernel.matrix()))
            / linalg::frobenius_norm(kernel.matrix()).max(1e-30);
        prop_assert!(rel < 1e-9, "round-trip error {rel}");
        prop_assert!(state.sigma_q_positive_definite());
    }

    #[test]
    fn graph_file_round_trip(seed in 0u64..500, p in 0.0f64..=1.0) {
        let g = graph::random_graph(7, p, seed).unwrap();
        let back = graph::load_graph(graph::save_graph(&g).as_bytes()).unwrap();
        prop_assert_eq!(back.adjacency(), g.adjacency());
    }

    #[test]
    fn shrink_always_yields_a_clique(seed in 0u64..500, mask in 0u32..(1 << 9)) {
        let g = graph::random_graph(9, 0.4, seed).unwrap();
        let bits: Vec<u8> = (0..9).map(|b| ((mask >> b) & 1) as u8).collect();
        let pattern = hafnian::PhotonPattern::new(bits).unwrap();
        let set = gbs_core::clique::shrink_to_clique(&g, &pattern).unwrap();
        prop_assert!(gbs_core::clique::is_clique(&g, &set));
        let expanded = gbs_core::clique::expand_clique(&g, &set).unwrap();
        prop_assert!(gbs_core::clique::is_clique(&g, &expanded));
        // Maximality.
        for v in 0..9 {
            if !expanded.contains(&v) {
                prop_assert!(!expanded.iter().all(|&u| g.has_edge(u, v)));
            }
        }
    }
}

#[test]
fn interaction_graph_rejects_asymmetric_matrices() {
    let mut m = RMat::zeros(3, 3);
    m[(0, 1)] = 1.0;
    let err = InteractionGraph::new(m, linalg::RVec::zeros(3), None).unwrap_err();
    assert!(matches!(err, graph::GraphError::Asymmetric(_, _)));
}
