//! Seeded synthetic data: random simplex datasets for property checks and a
//! locality-biased ego generator for the end-to-end pipeline, so the full
//! suite runs without any external corpus.

use crate::egonet::{EgoKind, EgoNetwork};
use crate::rng::stream_rng;
use crate::simplex::{NodeId, Simplex, SimplexDataset};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::ops::RangeInclusive;

/// Node-id stride between generated egos; keeps their node spaces disjoint.
const EGO_BLOCK: NodeId = 10_000;

fn geometric(rng: &mut ChaCha8Rng, p: f64) -> u32 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    (u.ln() / (1.0 - p).ln()).floor() as u32
}

/// Generates one star ego-network with locality structure: each alter is
/// active for one contiguous run of geometrically distributed length, novel
/// alters are injected at a near-constant rate, and run lengths drift up so
/// later simplices tend to be larger.
pub fn locality_ego(seed: u64, index: u64, m_range: RangeInclusive<usize>) -> EgoNetwork {
    let mut rng = stream_rng(seed, index);
    let m = rng.gen_range(m_range);
    let ego: NodeId = index * EGO_BLOCK;
    let mut next_alter = ego + 1;
    let mut active: Vec<(NodeId, u32)> = Vec::new();
    let mut simplices = Vec::with_capacity(m);

    for t in 0..m {
        if active.len() < 2 || rng.gen_bool(0.45) {
            let run = 2 + geometric(&mut rng, 0.4) + (t / 6) as u32;
            active.push((next_alter, run));
            next_alter += 1;
        }
        let mut nodes: Vec<NodeId> = vec![ego];
        nodes.extend(active.iter().map(|&(a, _)| a));
        let mut simplex = Simplex::new(nodes, (t + 1) as i64);
        simplex.ordinal_time = (t + 1) as u32;
        simplex.source_index = t;
        simplices.push(simplex);

        for entry in active.iter_mut() {
            entry.1 -= 1;
        }
        active.retain(|&(_, left)| left > 0);
    }

    let alters: BTreeSet<NodeId> = (ego + 1..next_alter).collect();
    EgoNetwork {
        ego,
        kind: EgoKind::Star,
        simplices,
        alters,
    }
}

pub fn locality_egos(seed: u64, count: usize, m_range: RangeInclusive<usize>) -> Vec<EgoNetwork> {
    (0..count)
        .map(|i| locality_ego(seed, i as u64, m_range.clone()))
        .collect()
}

/// Packs generated egos into one dataset with globally unique, strictly
/// increasing timestamps. Extracting the star ego-network of node
/// `i * 10_000` recovers the `i`-th generated ego exactly.
pub fn locality_dataset(seed: u64, count: usize, m_range: RangeInclusive<usize>) -> SimplexDataset {
    let mut simplices = Vec::new();
    let mut clock: i64 = 0;
    for ego in locality_egos(seed, count, m_range) {
        for s in &ego.simplices {
            clock += 1;
            simplices.push(Simplex::new(s.nodes().iter().copied(), clock));
        }
    }
    SimplexDataset::from_simplices(format!("locality-{seed}"), simplices)
}

/// Ego node ids of a dataset produced by [`locality_dataset`].
pub fn locality_ego_nodes(dataset: &SimplexDataset) -> Vec<NodeId> {
    dataset.nodes().filter(|n| n % EGO_BLOCK == 0).collect()
}

/// A random dataset for structural property checks: sizes 1..=5 with about
/// one simplex in ten trivial, and repeated timestamps to exercise the tie
/// rules.
pub fn random_dataset(seed: u64, max_nodes: usize, max_simplices: usize) -> SimplexDataset {
    let mut rng = stream_rng(seed, u64::MAX);
    let node_count = rng.gen_range(2..=max_nodes.max(2));
    let simplex_count = rng.gen_range(1..=max_simplices.max(1));
    let universe: Vec<NodeId> = (0..node_count as NodeId).collect();

    let mut simplices = Vec::with_capacity(simplex_count);
    let mut clock: i64 = 0;
    for _ in 0..simplex_count {
        clock += rng.gen_range(0..=2);
        let size = if rng.gen_bool(0.1) {
            1
        } else {
            rng.gen_range(2..=5.min(node_count))
        };
        let nodes: Vec<NodeId> = universe
            .choose_multiple(&mut rng, size)
            .copied()
            .collect();
        simplices.push(Simplex::new(nodes, clock));
    }
    SimplexDataset::from_simplices(format!("random-{seed}"), simplices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::egonet::extract_ego;

    #[test]
    fn locality_egos_have_contiguous_alter_runs() {
        for index in 0..20 {
            let ego = locality_ego(7, index, 10..=20);
            assert!((10..=20).contains(&ego.len()));
            for &alter in &ego.alters {
                let positions: Vec<usize> = ego
                    .simplices
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| s.contains(alter))
                    .map(|(i, _)| i)
                    .collect();
                assert!(!positions.is_empty());
                let contiguous = positions.windows(2).all(|w| w[1] == w[0] + 1);
                assert!(contiguous, "alter {alter} occurs non-contiguously");
            }
            assert!(ego.simplices.iter().all(|s| s.size() >= 2));
            assert!(ego.simplices.iter().all(|s| s.contains(ego.ego)));
        }
    }

    #[test]
    fn dataset_round_trip_recovers_generated_egos() {
        let egos = locality_egos(3, 5, 10..=14);
        let ds = locality_dataset(3, 5, 10..=14);
        let nodes = locality_ego_nodes(&ds);
        assert_eq!(nodes.len(), 5);
        for (ego, &node) in egos.iter().zip(&nodes) {
            let extracted = extract_ego(&ds, node, EgoKind::Star).unwrap();
            let got: Vec<&[NodeId]> = extracted.simplices.iter().map(|s| s.nodes()).collect();
            let want: Vec<&[NodeId]> = ego.simplices.iter().map(|s| s.nodes()).collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn generators_are_seed_deterministic() {
        let a = locality_ego(11, 4, 10..=20);
        let b = locality_ego(11, 4, 10..=20);
        assert_eq!(a, b);
        assert_eq!(random_dataset(9, 30, 80), random_dataset(9, 30, 80));
        assert_ne!(
            locality_ego(11, 5, 10..=20).simplices,
            a.simplices,
            "different streams differ"
        );
    }
}
