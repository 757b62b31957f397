//! Verification harness for the local-search guarantee on the
//! average-intersection objective: instance preprocessing, a brute-force
//! optimum oracle, seeded swap local search, and the ratio check that every
//! local optimum reaches at least `1/(2c^2 d)` of the optimum.
//!
//! Acceptance decisions (is this swap strictly improving?) compare integer
//! intersection totals, never floats: orderings of one instance share the
//! denominator `m - 1`.

use crate::error::{Error, Result};
use crate::features::avg_intersection_size;
use crate::rng::base_rng;
use crate::simplex::{NodeId, Simplex};
use itertools::Itertools;
use rand::Rng;
use std::collections::BTreeSet;

/// Default cap on instance size for exhaustive enumeration.
pub const BRUTE_FORCE_CAP: usize = 8;
/// Cap for the full local-optimum enumeration of the theorem check.
pub const THEOREM_CAP: usize = 6;

/// A preprocessed multiset of node sets with its two guarantee parameters:
/// `c` the maximum simplex size and `d` the maximum number of simplices any
/// node occurs in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    simplices: Vec<Simplex>,
    pub c: usize,
    pub d: usize,
}

impl Instance {
    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// `1 / (2 c^2 d)`, the guaranteed fraction of the optimum.
    pub fn bound(&self) -> f64 {
        1.0 / (2.0 * (self.c * self.c * self.d) as f64)
    }
}

/// Deletes elements occurring in at most one simplex, then simplices left
/// empty, repeating to a fixed point; such elements cannot contribute to
/// any intersection.
pub fn preprocess(raw: &[BTreeSet<NodeId>]) -> Instance {
    let mut sets: Vec<BTreeSet<NodeId>> = raw.to_vec();
    loop {
        let mut occurrences: std::collections::BTreeMap<NodeId, usize> = Default::default();
        for s in &sets {
            for &n in s {
                *occurrences.entry(n).or_insert(0) += 1;
            }
        }
        let rare: BTreeSet<NodeId> = occurrences
            .iter()
            .filter(|&(_, &count)| count <= 1)
            .map(|(&n, _)| n)
            .collect();
        if rare.is_empty() {
            break;
        }
        for s in sets.iter_mut() {
            s.retain(|n| !rare.contains(n));
        }
        sets.retain(|s| !s.is_empty());
    }

    let mut occurrences: std::collections::BTreeMap<NodeId, usize> = Default::default();
    for s in &sets {
        for &n in s {
            *occurrences.entry(n).or_insert(0) += 1;
        }
    }
    let c = sets.iter().map(|s| s.len()).max().unwrap_or(0);
    let d = occurrences.values().copied().max().unwrap_or(0);
    let simplices = sets
        .into_iter()
        .map(|nodes| Simplex::new(nodes, 0))
        .collect();
    Instance { simplices, c, d }
}

/// Integer total of adjacent intersections under a permutation.
pub fn total_intersection(instance: &Instance, perm: &[usize]) -> u64 {
    perm.windows(2)
        .map(|w| {
            instance.simplices[w[0]].intersection_size(&instance.simplices[w[1]]) as u64
        })
        .sum()
}

/// The average-intersection objective of an ordering, shared with the
/// ego-network measure (same formula, same implementation).
pub fn avg_isect_objective(instance: &Instance, perm: &[usize]) -> Result<f64> {
    if perm.len() < 2 {
        return Err(Error::UndefinedMeasure(perm.len()));
    }
    let view: Vec<&Simplex> = perm.iter().map(|&i| &instance.simplices[i]).collect();
    avg_intersection_size(&view)
}

fn improving_swaps(instance: &Instance, perm: &mut Vec<usize>, current: u64) -> Vec<(usize, usize, u64)> {
    let m = perm.len();
    let mut found = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            perm.swap(a, b);
            let total = total_intersection(instance, perm);
            perm.swap(a, b);
            if total > current {
                found.push((a, b, total));
            }
        }
    }
    found
}

/// Swaps pairs of simplices while a swap strictly increases the objective,
/// choosing uniformly at random among the improving swaps.
pub fn swap_local_search(instance: &Instance, start: &[usize], seed: u64) -> Vec<usize> {
    let mut rng = base_rng(seed);
    let mut perm = start.to_vec();
    if perm.len() < 2 {
        return perm;
    }
    let mut current = total_intersection(instance, &perm);
    loop {
        let improvers = improving_swaps(instance, &mut perm, current);
        if improvers.is_empty() {
            return perm;
        }
        let (a, b, total) = improvers[rng.gen_range(0..improvers.len())];
        perm.swap(a, b);
        current = total;
    }
}

/// True when no single pairwise swap strictly increases the total.
pub fn is_local_optimum(instance: &Instance, perm: &[usize]) -> bool {
    let mut perm = perm.to_vec();
    let current = total_intersection(instance, &perm);
    improving_swaps(instance, &mut perm, current).is_empty()
}

fn check_cap(m: usize, cap: usize) -> Result<()> {
    if m > cap {
        return Err(Error::OverEnumerationCap { m, cap });
    }
    Ok(())
}

/// Exact maximum of the objective over all `m!` orderings. The objective is
/// invariant under reversal, so only orderings with `perm[0] < perm[m-1]`
/// are enumerated.
pub fn brute_force_optimum(instance: &Instance, cap: usize) -> Result<f64> {
    let m = instance.len();
    check_cap(m, cap)?;
    if m < 2 {
        return Err(Error::UndefinedMeasure(m));
    }
    Ok(brute_force_total(instance) as f64 / (m - 1) as f64)
}

fn brute_force_total(instance: &Instance) -> u64 {
    let m = instance.len();
    (0..m)
        .permutations(m)
        .filter(|perm| perm[0] < perm[m - 1])
        .map(|perm| total_intersection(instance, &perm))
        .max()
        .expect("at least one ordering")
}

/// Every locally optimal ordering (up to reversal) with its total.
pub fn enumerate_local_optima(instance: &Instance, cap: usize) -> Result<Vec<(Vec<usize>, u64)>> {
    let m = instance.len();
    check_cap(m, cap)?;
    if m < 2 {
        return Err(Error::UndefinedMeasure(m));
    }
    let mut optima = Vec::new();
    for perm in (0..m).permutations(m) {
        if perm[0] > perm[m - 1] {
            continue;
        }
        if is_local_optimum(instance, &perm) {
            let total = total_intersection(instance, &perm);
            optima.push((perm, total));
        }
    }
    Ok(optima)
}

/// Outcome of the guarantee check on one instance.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TheoremReport {
    pub m: usize,
    pub c: usize,
    pub d: usize,
    /// `1 / (2 c^2 d)`.
    pub bound: f64,
    pub optimum: f64,
    pub worst_local: f64,
    pub local_optima: usize,
    /// `worst_local >= bound * optimum`, decided in integer arithmetic.
    pub holds: bool,
    /// The intermediate guarantee `worst_local >= 1 / (2 c d)` whenever the
    /// optimum is positive.
    pub holds_intermediate: bool,
}

/// Enumerates every local optimum of the instance and checks the worst one
/// against `optimum / (2 c^2 d)`.
pub fn theorem_ratio_check(instance: &Instance, cap: usize) -> Result<TheoremReport> {
    let m = instance.len();
    check_cap(m, cap)?;
    if m < 2 {
        return Err(Error::UndefinedMeasure(m));
    }
    let optima = enumerate_local_optima(instance, cap)?;
    let worst_total = optima.iter().map(|(_, t)| *t).min().expect("non-empty");
    let opt_total = brute_force_total(instance);
    let denom = (m - 1) as f64;
    let factor = 2 * instance.c * instance.c * instance.d;
    // worst/(m-1) >= opt/((m-1) * 2c^2d)  <=>  worst * 2c^2d >= opt
    let holds = worst_total as u128 * factor as u128 >= opt_total as u128;
    // worst/(m-1) >= 1/(2cd)  <=>  worst * 2cd >= m-1
    let holds_intermediate = opt_total == 0
        || worst_total as u128 * (2 * instance.c * instance.d) as u128 >= (m - 1) as u128;
    Ok(TheoremReport {
        m,
        c: instance.c,
        d: instance.d,
        bound: instance.bound(),
        optimum: opt_total as f64 / denom,
        worst_local: worst_total as f64 / denom,
        local_optima: optima.len(),
        holds,
        holds_intermediate,
    })
}

/// Canonical form of a multiset of node sets under node relabeling:
/// the lexicographically smallest sorted mask list over all permutations of
/// the universe.
fn canonical_masks(masks: &[u32], universe: usize) -> Vec<u32> {
    let mut best: Option<Vec<u32>> = None;
    for mapping in (0..universe).permutations(universe) {
        let mut relabeled: Vec<u32> = masks
            .iter()
            .map(|&mask| {
                let mut out = 0u32;
                for (from, &to) in mapping.iter().enumerate() {
                    if mask & (1 << from) != 0 {
                        out |= 1 << to;
                    }
                }
                out
            })
            .collect();
        relabeled.sort_unstable();
        if best.as_ref().is_none_or(|b| relabeled < *b) {
            best = Some(relabeled);
        }
    }
    best.unwrap_or_default()
}

fn masks_to_sets(masks: &[u32], universe: usize) -> Vec<BTreeSet<NodeId>> {
    masks
        .iter()
        .map(|&mask| {
            (0..universe)
                .filter(|&bit| mask & (1 << bit) != 0)
                .map(|bit| bit as NodeId)
                .collect()
        })
        .collect()
}

/// One row of the exhaustive sweep.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepRow {
    pub instance_id: usize,
    pub report: TheoremReport,
}

/// Exhaustively checks the guarantee over every instance with at most
/// `max_m` simplices drawn from a universe of `universe` nodes,
/// deduplicated up to relabeling after preprocessing. Instances smaller
/// than two simplices after preprocessing carry no objective and are
/// skipped.
pub fn sweep_instances(max_m: usize, universe: usize, cap: usize) -> Result<Vec<SweepRow>> {
    assert!(universe <= 8, "mask representation supports up to 8 nodes");
    let all_masks: Vec<u32> = (1..(1u32 << universe)).collect();

    // multisets as non-decreasing mask sequences
    let mut raw_instances: Vec<Vec<u32>> = Vec::new();
    let mut stack: Vec<Vec<u32>> = all_masks.iter().map(|&m| vec![m]).collect();
    while let Some(current) = stack.pop() {
        raw_instances.push(current.clone());
        if current.len() < max_m {
            let last = *current.last().unwrap();
            for &next in all_masks.iter().filter(|&&m| m >= last) {
                let mut extended = current.clone();
                extended.push(next);
                stack.push(extended);
            }
        }
    }

    let mut seen_raw: BTreeSet<Vec<u32>> = BTreeSet::new();
    let mut seen_preprocessed: BTreeSet<Vec<u32>> = BTreeSet::new();
    let mut rows = Vec::new();
    let mut instance_id = 0usize;
    for masks in raw_instances {
        if !seen_raw.insert(canonical_masks(&masks, universe)) {
            continue;
        }
        let instance = preprocess(&masks_to_sets(&masks, universe));
        if instance.len() < 2 {
            continue;
        }
        let processed_masks: Vec<u32> = instance
            .simplices()
            .iter()
            .map(|s| {
                s.nodes()
                    .iter()
                    .fold(0u32, |acc, &n| acc | (1 << (n as usize)))
            })
            .collect();
        if !seen_preprocessed.insert(canonical_masks(&processed_masks, universe)) {
            continue;
        }
        let report = theorem_ratio_check(&instance, cap)?;
        rows.push(SweepRow {
            instance_id,
            report,
        });
        instance_id += 1;
    }
    Ok(rows)
}

/// `instance_id,m,c,d,bound,worst_local,optimum,holds` rows.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("instance_id,m,c,d,bound,worst_local,optimum,holds\n");
    for row in rows {
        let r = &row.report;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.instance_id, r.m, r.c, r.d, r.bound, r.worst_local, r.optimum, r.holds
        ));
    }
    out
}
