//! Structural measures over simplex orderings: adjacent-intersection size,
//! alter-network spread, novelty, arrival times, and the feature vector fed
//! to the ordering classifier.
//!
//! All measures treat the presented order as ground: position `i` (1-based)
//! is the ordinal time of the `i`-th simplex, so shuffled candidates are
//! implicitly re-indexed.

pub mod curves;

use crate::egonet::{AlterNetwork, EgoKind, EgoNetwork};
use crate::error::{Error, Result};
use crate::simplex::{NodeId, Simplex};
use std::borrow::Borrow;
use std::collections::BTreeMap;

/// Arithmetic mean of adjacent intersection cardinalities.
pub fn avg_intersection_size<S: Borrow<Simplex>>(ordering: &[S]) -> Result<f64> {
    if ordering.len() < 2 {
        return Err(Error::UndefinedMeasure(ordering.len()));
    }
    let total: usize = ordering
        .windows(2)
        .map(|w| w[0].borrow().intersection_size(w[1].borrow()))
        .sum();
    Ok(total as f64 / (ordering.len() - 1) as f64)
}

pub fn mean_simplex_size<S: Borrow<Simplex>>(ordering: &[S]) -> f64 {
    if ordering.is_empty() {
        return 0.0;
    }
    let total: usize = ordering.iter().map(|s| s.borrow().size()).sum();
    total as f64 / ordering.len() as f64
}

/// Average adjacent intersection divided by mean simplex size.
pub fn intersection_density<S: Borrow<Simplex>>(ordering: &[S]) -> Result<f64> {
    Ok(avg_intersection_size(ordering)? / mean_simplex_size(ordering))
}

/// `(last ordinal - first ordinal) / (occurrences - 1)`; `None` for a
/// single-occurrence alter-network.
pub fn alter_spread(an: &AlterNetwork) -> Option<f64> {
    spread_of_ordinals(&an.ordinals)
}

fn spread_of_ordinals(ordinals: &[u32]) -> Option<f64> {
    match ordinals {
        [] | [_] => None,
        [first, .., last] => Some((last - first) as f64 / (ordinals.len() - 1) as f64),
    }
}

/// Mean alter-network spread over the alters occurring at least twice in the
/// ordering; falls back to `m` when every alter occurs exactly once.
pub fn avg_alter_spread<S: Borrow<Simplex>>(ordering: &[S], ego: NodeId) -> Result<f64> {
    if ordering.len() < 2 {
        return Err(Error::UndefinedMeasure(ordering.len()));
    }
    let occurrences = alter_occurrences(ordering, ego);
    let spreads: Vec<f64> = occurrences
        .values()
        .filter_map(|ordinals| spread_of_ordinals(ordinals))
        .collect();
    if spreads.is_empty() {
        return Ok(ordering.len() as f64);
    }
    Ok(spreads.iter().sum::<f64>() / spreads.len() as f64)
}

/// Positions (1-based, ascending) of each non-ego node in the ordering.
fn alter_occurrences<S: Borrow<Simplex>>(
    ordering: &[S],
    ego: NodeId,
) -> BTreeMap<NodeId, Vec<u32>> {
    let mut occurrences: BTreeMap<NodeId, Vec<u32>> = BTreeMap::new();
    for (pos, s) in ordering.iter().enumerate() {
        for &n in s.borrow().nodes() {
            if n != ego {
                occurrences.entry(n).or_default().push((pos + 1) as u32);
            }
        }
    }
    occurrences
}

/// Minimum alter-network size for the thirds analysis.
pub const THIRDS_MIN_SIZE: usize = 10;

/// Spread of each contiguous third of a large alter-network, remainder
/// occurrences assigned to the final third.
pub fn thirds_spread(an: &AlterNetwork) -> Result<(f64, f64, f64)> {
    let k = an.size();
    if k < THIRDS_MIN_SIZE {
        return Err(Error::TooSmallForThirds(k, THIRDS_MIN_SIZE));
    }
    let third = k / 3;
    let first = &an.ordinals[..third];
    let middle = &an.ordinals[third..2 * third];
    let last = &an.ordinals[2 * third..];
    let spread = |part: &[u32]| spread_of_ordinals(part).expect("thirds have size >= 3");
    Ok((spread(first), spread(middle), spread(last)))
}

/// Count of never-before-seen nodes in each simplex; position 1 always
/// equals the size of the first simplex.
pub fn novelty_profile<S: Borrow<Simplex>>(ordering: &[S]) -> Vec<usize> {
    let mut seen = std::collections::BTreeSet::new();
    ordering
        .iter()
        .map(|s| {
            let novel = s
                .borrow()
                .nodes()
                .iter()
                .filter(|&&n| seen.insert(n))
                .count();
            novel
        })
        .collect()
}

/// Number of later simplices the first simplex is a (non-strict) subset of.
pub fn first_subset_count<S: Borrow<Simplex>>(ordering: &[S]) -> Result<usize> {
    if ordering.len() < 2 {
        return Err(Error::UndefinedMeasure(ordering.len()));
    }
    let first = ordering[0].borrow();
    Ok(ordering[1..]
        .iter()
        .filter(|s| first.is_subset_of(s.borrow()))
        .count())
}

/// Number of earlier simplices the last simplex is a (non-strict) superset of.
pub fn last_superset_count<S: Borrow<Simplex>>(ordering: &[S]) -> Result<usize> {
    if ordering.len() < 2 {
        return Err(Error::UndefinedMeasure(ordering.len()));
    }
    let last = ordering[ordering.len() - 1].borrow();
    Ok(ordering[..ordering.len() - 1]
        .iter()
        .filter(|s| s.borrow().is_subset_of(last))
        .count())
}

/// Smallest position (1-based) whose simplex contains the user node.
pub fn user_arrival_time<S: Borrow<Simplex>>(ordering: &[S], ego: NodeId) -> Result<u32> {
    ordering
        .iter()
        .position(|s| s.borrow().contains(ego))
        .map(|pos| (pos + 1) as u32)
        .ok_or(Error::EgoAbsent(ego))
}

/// Numeric summary of an ordering, the classifier input.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FeatureVector {
    pub length: usize,
    pub intersection_density: f64,
    pub avg_alter_spread: f64,
    pub first_subset_count: usize,
    pub last_superset_count: usize,
    /// Present only for radial and contracted ego-networks.
    pub user_arrival: Option<u32>,
}

impl FeatureVector {
    pub fn input_dim(kind: EgoKind) -> usize {
        match kind {
            EgoKind::Star => 5,
            EgoKind::Radial | EgoKind::Contracted => 6,
        }
    }

    /// Flattens to the classifier input layout.
    pub fn to_input(&self) -> Vec<f64> {
        let mut input = vec![
            self.length as f64,
            self.intersection_density,
            self.avg_alter_spread,
            self.first_subset_count as f64,
            self.last_superset_count as f64,
        ];
        if let Some(arrival) = self.user_arrival {
            input.push(arrival as f64);
        }
        input
    }

    pub fn csv_header(kind: EgoKind) -> &'static str {
        match kind {
            EgoKind::Star => {
                "length,intersection_density,avg_alter_spread,first_subset_count,last_superset_count"
            }
            _ => {
                "length,intersection_density,avg_alter_spread,first_subset_count,last_superset_count,user_arrival"
            }
        }
    }

    pub fn csv_row(&self) -> String {
        let mut row = format!(
            "{},{},{},{},{}",
            self.length,
            self.intersection_density,
            self.avg_alter_spread,
            self.first_subset_count,
            self.last_superset_count,
        );
        if let Some(arrival) = self.user_arrival {
            row.push_str(&format!(",{arrival}"));
        }
        row
    }
}

/// Computes the full feature vector of an ordering. `user_arrival` is
/// included exactly for radial and contracted kinds.
pub fn featurize<S: Borrow<Simplex>>(
    ordering: &[S],
    ego: NodeId,
    kind: EgoKind,
) -> Result<FeatureVector> {
    let user_arrival = match kind {
        EgoKind::Star => None,
        EgoKind::Radial | EgoKind::Contracted => Some(user_arrival_time(ordering, ego)?),
    };
    Ok(FeatureVector {
        length: ordering.len(),
        intersection_density: intersection_density(ordering)?,
        avg_alter_spread: avg_alter_spread(ordering, ego)?,
        first_subset_count: first_subset_count(ordering)?,
        last_superset_count: last_superset_count(ordering)?,
        user_arrival,
    })
}

pub fn featurize_ego(ego: &EgoNetwork) -> Result<FeatureVector> {
    featurize(&ego.simplices, ego.ego, ego.kind)
}
