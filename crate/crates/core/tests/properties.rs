use hclab::brute::{all_tree_values, brute_force_opt};
use hclab::graph::{random_instance, WeightDist, WeightedGraph};
use hclab::linkage::{average_linkage, LinkageMode, TieBreak};
use hclab::objectives::{
    dasgupta_cost, dissimilarity_reward, similarity_reward, triplet_nonleaf_decomposition,
};
use hclab::random_hc::random_tree;
use hclab::sdp::{build_hc_sdp, check_feasibility, tree_to_vectors};
use hclab::sdp_round::{triplet_separation_probability, TripletAngles};
use hclab::{Dendrogram, Objective, RngStream};
use proptest::prelude::*;

fn graph(n: usize, density: f64, seed: u64) -> WeightedGraph {
    random_instance(n, density, WeightDist::Uniform01, RngStream::new(seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cost_plus_reward_is_n_w(n in 2usize..12, density in 0.1f64..1.0, seed in any::<u64>()) {
        let g = graph(n, density, seed);
        let t = random_tree(n, RngStream::new(seed ^ 1)).unwrap();
        let total = dasgupta_cost(&g, &t).unwrap() + similarity_reward(&g, &t).unwrap();
        prop_assert!((total - n as f64 * g.total_weight()).abs() <= 1e-9 * (1.0 + total));
        prop_assert_eq!(dasgupta_cost(&g, &t).unwrap(), dissimilarity_reward(&g, &t).unwrap());
    }

    #[test]
    fn triplet_form_matches_reward(n in 2usize..10, seed in any::<u64>()) {
        let g = graph(n, 0.7, seed);
        let t = random_tree(n, RngStream::new(seed).child("t")).unwrap();
        let a = similarity_reward(&g, &t).unwrap();
        let b = triplet_nonleaf_decomposition(&g, &t).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a));
    }

    #[test]
    fn similarity_reward_bounds(n in 2usize..12, seed in any::<u64>()) {
        let g = graph(n, 0.6, seed);
        let t = random_tree(n, RngStream::new(seed).child("t")).unwrap();
        let r = similarity_reward(&g, &t).unwrap();
        prop_assert!(r >= 0.0);
        prop_assert!(r <= (n as f64 - 2.0).max(0.0) * g.total_weight() + 1e-9);
    }

    #[test]
    fn tree_json_round_trip(n in 1usize..40, seed in any::<u64>()) {
        let t = random_tree(n, RngStream::new(seed)).unwrap();
        let back = Dendrogram::from_json_str(&t.to_json_string()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn graph_json_round_trip(n in 1usize..20, density in 0.05f64..1.0, seed in any::<u64>()) {
        let g = if n >= 2 { graph(n, density, seed) } else { WeightedGraph::empty(1).unwrap() };
        let text = serde_json::to_string(&g.to_json()).unwrap();
        let back = WeightedGraph::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn linkage_builds_valid_trees(n in 2usize..30, seed in any::<u64>()) {
        let g = graph(n, 0.5, seed);
        for mode in [LinkageMode::Similarity, LinkageMode::Dissimilarity] {
            let (t, trace) = average_linkage(&g, mode, TieBreak::Lexicographic);
            prop_assert_eq!(t.n(), n);
            prop_assert_eq!(trace.merges.len(), n - 1);
        }
    }

    #[test]
    fn embeddings_are_feasible(n in 2usize..9, seed in any::<u64>()) {
        let t = random_tree(n, RngStream::new(seed)).unwrap();
        let g = graph(n, 0.5, seed);
        let r = check_feasibility(&build_hc_sdp(&g).unwrap(), &tree_to_vectors(&t, n).unwrap());
        prop_assert_eq!(r.max(), 0.0);
    }

    #[test]
    fn triplet_probabilities_sum_to_one(a in 0.0f64..std::f64::consts::FRAC_PI_2, b in 0.0f64..std::f64::consts::FRAC_PI_2, c in 0.0f64..std::f64::consts::FRAC_PI_2) {
        if let Ok(p) = triplet_separation_probability(TripletAngles::new(a, b, c).unwrap()) {
            prop_assert!((p.sum() - 1.0).abs() <= 1e-12);
            prop_assert!(p.as_array().iter().all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn brute_force_is_optimal(n in 2usize..7, seed in any::<u64>()) {
        let g = graph(n, 0.7, seed);
        for obj in Objective::ALL {
            let (t, best) = brute_force_opt(&g, obj).unwrap();
            let tol = 1e-9 * (1.0 + best.abs());
            prop_assert!((obj.evaluate(&g, &t).unwrap() - best).abs() <= tol);
            for v in all_tree_values(&g, obj).unwrap() {
                let slack = if obj.is_maximized() { best + tol } else { best - tol };
                prop_assert!(!obj.improves(v, slack));
            }
        }
    }
}
