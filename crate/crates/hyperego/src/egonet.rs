//! Star, radial, and contracted ego-networks, alter-networks, and the
//! eligibility filters applied before analysis.

use crate::error::{Error, Result};
use crate::simplex::{assign_ordinal_times, NodeId, Simplex, SimplexDataset};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EgoKind {
    /// All simplices that include the ego node.
    Star,
    /// All simplices whose nodes are the ego or its alters.
    Radial,
    /// Intersections of every simplex with the alters plus the ego,
    /// non-trivial ones retained.
    Contracted,
}

impl fmt::Display for EgoKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            EgoKind::Star => "star",
            EgoKind::Radial => "radial",
            EgoKind::Contracted => "contracted",
        };
        f.write_str(name)
    }
}

impl FromStr for EgoKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "star" => Ok(EgoKind::Star),
            "radial" => Ok(EgoKind::Radial),
            "contracted" => Ok(EgoKind::Contracted),
            other => Err(format!("unknown ego kind `{other}`")),
        }
    }
}

/// An ego node together with its arrival-ordered simplices and alter set.
///
/// Simplices carry fresh ordinals `1..=m` in dataset arrival order. Alters
/// are the nodes that co-occur with the ego in at least one non-trivial
/// simplex of the originating dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EgoNetwork {
    pub ego: NodeId,
    pub kind: EgoKind,
    pub simplices: Vec<Simplex>,
    pub alters: BTreeSet<NodeId>,
}

impl EgoNetwork {
    /// Number of simplices (the ego-network's length).
    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Line-oriented text form: header `ego kind m`, then one simplex per
    /// line as `ordinal real_time node...`.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = format!("{} {} {}\n", self.ego, self.kind, self.len());
        for s in &self.simplices {
            write!(out, "{} {}", s.ordinal_time, s.real_time).unwrap();
            for n in s.nodes() {
                write!(out, " {n}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<EgoNetwork> {
        let bad = |line: usize, token: &str| Error::Parse {
            file: "<ego text>".to_string(),
            line,
            token: token.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| bad(1, ""))?;
        let mut parts = header.split_whitespace();
        let ego: NodeId = parse_field(&mut parts, 1)?;
        let kind: EgoKind = parts
            .next()
            .ok_or_else(|| bad(1, header))?
            .parse()
            .map_err(|_| bad(1, header))?;
        let m: usize = parse_field(&mut parts, 1)?;

        let mut simplices = Vec::with_capacity(m);
        for (idx, line) in lines {
            let mut fields = line.split_whitespace();
            let ordinal: u32 = parse_field(&mut fields, idx + 1)?;
            let real_time: i64 = parse_field(&mut fields, idx + 1)?;
            let nodes: Vec<NodeId> = fields
                .map(|t| t.parse().map_err(|_| bad(idx + 1, t)))
                .collect::<Result<_>>()?;
            let mut simplex = Simplex::new(nodes, real_time);
            simplex.ordinal_time = ordinal;
            simplex.source_index = simplices.len();
            simplices.push(simplex);
        }
        if simplices.len() != m {
            return Err(Error::LengthMismatch {
                left_name: "header simplex count".to_string(),
                left: m,
                right_name: "simplex lines".to_string(),
                right: simplices.len(),
            });
        }
        let alters = alters_of_sequence(ego, &simplices);
        Ok(EgoNetwork {
            ego,
            kind,
            simplices,
            alters,
        })
    }
}

fn parse_field<'a, T: FromStr>(
    parts: &mut impl Iterator<Item = &'a str>,
    line: usize,
) -> Result<T> {
    let token = parts.next().unwrap_or("");
    token.parse().map_err(|_| Error::Parse {
        file: "<ego text>".to_string(),
        line,
        token: token.to_string(),
    })
}

fn alters_of_sequence(ego: NodeId, simplices: &[Simplex]) -> BTreeSet<NodeId> {
    let mut alters = BTreeSet::new();
    for s in simplices {
        if !s.is_trivial() && s.contains(ego) {
            alters.extend(s.nodes().iter().copied().filter(|&n| n != ego));
        }
    }
    alters
}

/// The nodes sharing at least one non-trivial simplex with `ego`.
pub fn alters(dataset: &SimplexDataset, ego: NodeId) -> Result<BTreeSet<NodeId>> {
    let alters = alters_of_sequence(ego, dataset.simplices());
    if alters.is_empty() {
        return Err(Error::UnknownEgo(ego));
    }
    Ok(alters)
}

/// Builds the ego-network of `ego` from a dataset.
///
/// Trivial simplices in the dataset are ignored throughout. Simplices keep
/// dataset arrival order and receive fresh ordinals `1..=m`; contracted
/// intersections of size below 2 are discarded.
pub fn extract_ego(dataset: &SimplexDataset, ego: NodeId, kind: EgoKind) -> Result<EgoNetwork> {
    let alters = alters(dataset, ego)?;
    let mut simplices: Vec<Simplex> = Vec::new();
    for s in dataset.simplices() {
        if s.is_trivial() {
            continue;
        }
        match kind {
            EgoKind::Star => {
                if s.contains(ego) {
                    simplices.push(s.clone());
                }
            }
            EgoKind::Radial => {
                let inside = s.nodes().iter().all(|&n| n == ego || alters.contains(&n));
                if inside {
                    simplices.push(s.clone());
                }
            }
            EgoKind::Contracted => {
                let kept: Vec<NodeId> = s
                    .nodes()
                    .iter()
                    .copied()
                    .filter(|&n| n == ego || alters.contains(&n))
                    .collect();
                if kept.len() >= 2 {
                    let mut contracted = Simplex::new(kept, s.real_time);
                    contracted.source_index = s.source_index;
                    simplices.push(contracted);
                }
            }
        }
    }
    for (i, s) in simplices.iter_mut().enumerate() {
        s.source_index = i;
        s.ordinal_time = (i + 1) as u32;
    }
    Ok(EgoNetwork {
        ego,
        kind,
        simplices,
        alters,
    })
}

/// The star-shaped collection of an alter's appearances inside an
/// ego-network: the ascending ordinals of the simplices containing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlterNetwork {
    pub alter: NodeId,
    pub ordinals: Vec<u32>,
}

impl AlterNetwork {
    pub fn size(&self) -> usize {
        self.ordinals.len()
    }
}

pub fn alter_network(ego: &EgoNetwork, alter: NodeId) -> Result<AlterNetwork> {
    if !ego.alters.contains(&alter) {
        return Err(Error::NotAnAlter {
            ego: ego.ego,
            alter,
        });
    }
    let ordinals: Vec<u32> = ego
        .simplices
        .iter()
        .filter(|s| s.contains(alter))
        .map(|s| s.ordinal_time)
        .collect();
    Ok(AlterNetwork { alter, ordinals })
}

/// Gates an ego-network must pass before entering analysis or training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EligibilityConfig {
    pub min_length: usize,
    pub min_alters: usize,
    /// Reject ego-networks where one simplex node-set accounts for more than
    /// half of all simplices.
    pub majority_identical_filter: bool,
}

impl EligibilityConfig {
    pub fn new(min_length: usize, min_alters: usize, majority_identical_filter: bool) -> Self {
        assert!(min_length >= 1, "min_length must be at least 1");
        EligibilityConfig {
            min_length,
            min_alters,
            majority_identical_filter,
        }
    }

    /// Defaults for co-authorship corpora.
    pub fn coauth() -> Self {
        Self::new(20, 10, true)
    }

    /// Defaults for email corpora (no alter-count gate).
    pub fn email() -> Self {
        Self::new(10, 0, true)
    }

    /// Defaults for thread corpora.
    pub fn threads() -> Self {
        Self::new(10, 10, true)
    }

    pub fn permissive() -> Self {
        Self::new(1, 0, false)
    }
}

impl Default for EligibilityConfig {
    fn default() -> Self {
        Self::threads()
    }
}

/// Why an ego-network failed (or passed) the eligibility gates. Gates are
/// checked in order: length, alter count, majority-identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Eligibility {
    Eligible,
    TooShort,
    TooFewAlters,
    MajorityIdentical,
}

impl Eligibility {
    pub fn is_eligible(&self) -> bool {
        matches!(self, Eligibility::Eligible)
    }

    pub fn reason(&self) -> &'static str {
        match self {
            Eligibility::Eligible => "eligible",
            Eligibility::TooShort => "length",
            Eligibility::TooFewAlters => "alters",
            Eligibility::MajorityIdentical => "majority-identical",
        }
    }
}

pub fn is_eligible(ego: &EgoNetwork, cfg: &EligibilityConfig) -> Eligibility {
    if ego.len() < cfg.min_length {
        return Eligibility::TooShort;
    }
    if ego.alters.len() < cfg.min_alters {
        return Eligibility::TooFewAlters;
    }
    if cfg.majority_identical_filter {
        let mut counts: BTreeMap<&[NodeId], usize> = BTreeMap::new();
        for s in &ego.simplices {
            *counts.entry(s.nodes()).or_insert(0) += 1;
        }
        let modal = counts.values().copied().max().unwrap_or(0);
        if 2 * modal > ego.len() {
            return Eligibility::MajorityIdentical;
        }
    }
    Eligibility::Eligible
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::toy_coauth;

    fn sets(ego: &EgoNetwork) -> Vec<Vec<NodeId>> {
        ego.simplices.iter().map(|s| s.nodes().to_vec()).collect()
    }

    #[test]
    fn star_extraction_matches_toy_sequence() {
        let ds = toy_coauth();
        let ego = extract_ego(&ds, 1, EgoKind::Star).unwrap();
        assert_eq!(
            sets(&ego),
            vec![
                vec![1, 2, 3],
                vec![1, 2],
                vec![1, 2, 3],
                vec![1, 4, 8],
                vec![1, 5, 7],
            ]
        );
        let ordinals: Vec<u32> = ego.simplices.iter().map(|s| s.ordinal_time).collect();
        assert_eq!(ordinals, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn radial_extraction_excludes_outsider_simplices() {
        let ds = toy_coauth();
        let ego = extract_ego(&ds, 1, EgoKind::Radial).unwrap();
        // {2,3,5,6} is excluded: node 6 never co-occurs with node 1.
        assert_eq!(
            sets(&ego),
            vec![
                vec![2, 3],
                vec![1, 2, 3],
                vec![1, 2],
                vec![2, 4, 8],
                vec![1, 2, 3],
                vec![1, 4, 8],
                vec![1, 5, 7],
            ]
        );
    }

    #[test]
    fn contracted_extraction_intersects_with_alter_closure() {
        let ds = toy_coauth();
        let ego = extract_ego(&ds, 1, EgoKind::Contracted).unwrap();
        assert_eq!(
            sets(&ego),
            vec![
                vec![2, 3],
                vec![1, 2, 3],
                vec![1, 2],
                vec![2, 4, 8],
                vec![1, 2, 3],
                vec![1, 4, 8],
                vec![2, 3, 5],
                vec![1, 5, 7],
            ]
        );
    }

    #[test]
    fn alters_examples() {
        let ds = toy_coauth();
        let a1 = alters(&ds, 1).unwrap();
        assert_eq!(a1, BTreeSet::from([2, 3, 4, 5, 7, 8]));
        let a6 = alters(&ds, 6).unwrap();
        assert_eq!(a6, BTreeSet::from([2, 3, 5]));

        let tiny = SimplexDataset::from_simplices("t", vec![Simplex::new([1, 2], 1)]);
        assert_eq!(alters(&tiny, 1).unwrap(), BTreeSet::from([2]));

        assert!(matches!(alters(&ds, 99), Err(Error::UnknownEgo(99))));
        assert!(matches!(
            extract_ego(&ds, 99, EgoKind::Star),
            Err(Error::UnknownEgo(99))
        ));
    }

    #[test]
    fn alter_network_ordinals() {
        let ds = toy_coauth();
        let star = extract_ego(&ds, 1, EgoKind::Star).unwrap();
        assert_eq!(alter_network(&star, 2).unwrap().ordinals, vec![1, 2, 3]);
        assert_eq!(alter_network(&star, 5).unwrap().ordinals, vec![5]);
        assert!(matches!(
            alter_network(&star, 6),
            Err(Error::NotAnAlter { ego: 1, alter: 6 })
        ));
    }

    #[test]
    fn alter_network_union_reconstitutes_the_ego() {
        let ds = toy_coauth();
        for kind in [EgoKind::Star, EgoKind::Radial, EgoKind::Contracted] {
            let ego = extract_ego(&ds, 1, kind).unwrap();
            let mut covered: BTreeSet<u32> = BTreeSet::new();
            for &a in &ego.alters {
                covered.extend(alter_network(&ego, a).unwrap().ordinals);
            }
            let all: BTreeSet<u32> = ego.simplices.iter().map(|s| s.ordinal_time).collect();
            assert_eq!(covered, all);
        }
    }

    #[test]
    fn eligibility_gates_fire_in_order() {
        let ds = toy_coauth();
        let ego = extract_ego(&ds, 1, EgoKind::Star).unwrap();
        // m = 5 and 6 alters: the length gate fails first.
        let verdict = is_eligible(&ego, &EligibilityConfig::coauth());
        assert_eq!(verdict, Eligibility::TooShort);
        assert_eq!(verdict.reason(), "length");

        let verdict = is_eligible(&ego, &EligibilityConfig::permissive());
        assert!(verdict.is_eligible());
    }

    #[test]
    fn majority_identical_filter_counts_the_mode() {
        let mut simplices: Vec<Simplex> = (0..12).map(|i| Simplex::new([1, 2], i)).collect();
        for i in 0..8 {
            simplices.push(Simplex::new([1, 10 + i, 20 + i], 100 + i as i64));
        }
        let ds = SimplexDataset::from_simplices("t", simplices);
        let ego = extract_ego(&ds, 1, EgoKind::Star).unwrap();
        assert_eq!(ego.len(), 20);

        let cfg = EligibilityConfig::new(1, 0, true);
        assert_eq!(is_eligible(&ego, &cfg), Eligibility::MajorityIdentical);

        // exactly half is not a majority
        let mut simplices: Vec<Simplex> = (0..10).map(|i| Simplex::new([1, 2], i)).collect();
        for i in 0..10 {
            simplices.push(Simplex::new([1, 10 + i, 20 + i], 100 + i as i64));
        }
        let ds = SimplexDataset::from_simplices("t", simplices);
        let ego = extract_ego(&ds, 1, EgoKind::Star).unwrap();
        assert!(is_eligible(&ego, &cfg).is_eligible());
    }

    #[test]
    fn text_round_trip() {
        let ds = toy_coauth();
        for kind in [EgoKind::Star, EgoKind::Radial, EgoKind::Contracted] {
            let ego = extract_ego(&ds, 1, kind).unwrap();
            let text = ego.to_text();
            let parsed = EgoNetwork::from_text(&text).unwrap();
            assert_eq!(parsed.ego, ego.ego);
            assert_eq!(parsed.kind, ego.kind);
            assert_eq!(sets(&parsed), sets(&ego));
        }
    }

    #[test]
    fn star_user_arrives_first() {
        let ds = toy_coauth();
        let star = extract_ego(&ds, 1, EgoKind::Star).unwrap();
        assert!(star.simplices[0].contains(1));
    }

    mod properties {
        use super::*;
        use crate::synth::random_dataset;
        use proptest::prelude::*;

        fn multiset(sets: &[Vec<NodeId>]) -> BTreeMap<Vec<NodeId>, usize> {
            let mut counts = BTreeMap::new();
            for s in sets {
                *counts.entry(s.clone()).or_insert(0) += 1;
            }
            counts
        }

        fn contained(inner: &BTreeMap<Vec<NodeId>, usize>, outer: &BTreeMap<Vec<NodeId>, usize>) -> bool {
            inner
                .iter()
                .all(|(k, &v)| outer.get(k).copied().unwrap_or(0) >= v)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]
            #[test]
            fn chain_inclusion_holds_on_random_datasets(seed in 0u64..10_000) {
                let ds = random_dataset(seed, 20, 60);
                for node in ds.nodes().collect::<Vec<_>>() {
                    let Ok(star) = extract_ego(&ds, node, EgoKind::Star) else { continue };
                    let radial = extract_ego(&ds, node, EgoKind::Radial).unwrap();
                    let contracted = extract_ego(&ds, node, EgoKind::Contracted).unwrap();
                    let (s, r, c) = (
                        multiset(&star.simplices.iter().map(|x| x.nodes().to_vec()).collect::<Vec<_>>()),
                        multiset(&radial.simplices.iter().map(|x| x.nodes().to_vec()).collect::<Vec<_>>()),
                        multiset(&contracted.simplices.iter().map(|x| x.nodes().to_vec()).collect::<Vec<_>>()),
                    );
                    prop_assert!(contained(&s, &r), "star not within radial for ego {}", node);
                    prop_assert!(contained(&r, &c), "radial not within contracted for ego {}", node);

                    // every alter-network is non-empty and unions back to the ego
                    for egonet in [&star, &radial, &contracted] {
                        let mut covered: BTreeSet<u32> = BTreeSet::new();
                        for &a in &egonet.alters {
                            let an = alter_network(egonet, a).unwrap();
                            prop_assert!(!an.ordinals.is_empty());
                            covered.extend(an.ordinals);
                        }
                        let all: BTreeSet<u32> =
                            egonet.simplices.iter().map(|s| s.ordinal_time).collect();
                        prop_assert_eq!(covered, all, "union of alter-networks misses simplices");
                    }

                    // radial simplices are fixed points of the contraction map
                    for s in &radial.simplices {
                        let kept: Vec<NodeId> = s
                            .nodes()
                            .iter()
                            .copied()
                            .filter(|&n| n == node || radial.alters.contains(&n))
                            .collect();
                        prop_assert_eq!(kept.as_slice(), s.nodes());
                    }

                    prop_assert!(star.simplices.is_empty() || star.simplices[0].ordinal_time == 1);
                }
            }
        }
    }
}
