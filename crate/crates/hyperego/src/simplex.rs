//! Timestamped simplex datasets: the three-file text format, ordinal-time
//! assignment, and trivial-simplex filtering.
//!
//! A dataset is distributed as three newline-delimited integer files sharing a
//! path prefix: `<name>-nverts.txt` (one simplex size per line),
//! `<name>-simplices.txt` (node identifiers, one per line, concatenated in
//! simplex order), and `<name>-times.txt` (one timestamp per line).

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

/// Node identifiers are non-negative integers; any text labels live in an
/// optional sidecar mapping outside this crate.
pub type NodeId = u64;

/// A timestamped set of nodes interacting simultaneously.
///
/// Nodes are deduplicated and canonically sorted. `real_time` is in dataset
/// units (years for co-authorship, seconds for email/thread corpora);
/// `ordinal_time` is the consecutive 1-based arrival index assigned after
/// ingestion or extraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Simplex {
    nodes: Vec<NodeId>,
    pub real_time: i64,
    pub ordinal_time: u32,
    pub source_index: usize,
}

impl Simplex {
    pub fn new(nodes: impl IntoIterator<Item = NodeId>, real_time: i64) -> Self {
        let mut nodes: Vec<NodeId> = nodes.into_iter().collect();
        nodes.sort_unstable();
        nodes.dedup();
        Simplex {
            nodes,
            real_time,
            ordinal_time: 0,
            source_index: 0,
        }
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// A simplex is trivial if it has fewer than two nodes.
    pub fn is_trivial(&self) -> bool {
        self.nodes.len() < 2
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.nodes.binary_search(&node).is_ok()
    }

    /// Cardinality of the node intersection with another simplex.
    pub fn intersection_size(&self, other: &Simplex) -> usize {
        let (mut i, mut j, mut count) = (0, 0, 0);
        while i < self.nodes.len() && j < other.nodes.len() {
            match self.nodes[i].cmp(&other.nodes[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        count
    }

    /// Non-strict subset test against another simplex.
    pub fn is_subset_of(&self, other: &Simplex) -> bool {
        self.intersection_size(other) == self.nodes.len()
    }
}

/// The full time-sorted stream of simplices plus its node universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplexDataset {
    pub name: String,
    simplices: Vec<Simplex>,
    degree_index: BTreeMap<NodeId, usize>,
    /// Duplicate node identifiers collapsed during ingestion.
    pub dedup_collapsed: usize,
}

impl SimplexDataset {
    /// Builds a dataset from in-memory simplices: sorts by real time with
    /// ties kept in input order, assigns ordinals, and indexes degrees.
    /// Source indices are canonicalized to the sorted positions, so the
    /// result round-trips exactly through `write_files`/`load_dataset`.
    pub fn from_simplices(name: impl Into<String>, mut simplices: Vec<Simplex>) -> Self {
        simplices.sort_by_key(|s| s.real_time);
        for (i, s) in simplices.iter_mut().enumerate() {
            s.source_index = i;
        }
        let simplices = assign_ordinal_times(simplices).expect("sorted by construction");
        let degree_index = recount_degrees(&simplices);
        SimplexDataset {
            name: name.into(),
            simplices,
            degree_index,
            dedup_collapsed: 0,
        }
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Number of distinct node identifiers.
    pub fn node_count(&self) -> usize {
        self.degree_index.len()
    }

    /// Number of simplices containing `node`.
    pub fn degree(&self, node: NodeId) -> usize {
        self.degree_index.get(&node).copied().unwrap_or(0)
    }

    pub fn degree_index(&self) -> &BTreeMap<NodeId, usize> {
        &self.degree_index
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.degree_index.keys().copied()
    }

    pub fn trivial_count(&self) -> usize {
        self.simplices.iter().filter(|s| s.is_trivial()).count()
    }

    pub fn time_range(&self) -> Option<(i64, i64)> {
        let first = self.simplices.first()?.real_time;
        let last = self.simplices.last()?.real_time;
        Some((first, last))
    }

    /// Serializes back to the three-file text format under `prefix`
    /// (producing `<prefix>-nverts.txt` etc.). Reloading the written files
    /// yields an identical dataset.
    pub fn write_files(&self, prefix: &Path) -> Result<()> {
        let mut nverts = String::new();
        let mut nodes = String::new();
        let mut times = String::new();
        for s in &self.simplices {
            writeln!(nverts, "{}", s.size()).unwrap();
            for n in s.nodes() {
                writeln!(nodes, "{n}").unwrap();
            }
            writeln!(times, "{}", s.real_time).unwrap();
        }
        std::fs::write(sibling(prefix, "nverts"), nverts)?;
        std::fs::write(sibling(prefix, "simplices"), nodes)?;
        std::fs::write(sibling(prefix, "times"), times)?;
        Ok(())
    }
}

fn sibling(prefix: &Path, part: &str) -> std::path::PathBuf {
    let mut name = prefix.file_name().unwrap_or_default().to_os_string();
    name.push(format!("-{part}.txt"));
    prefix.with_file_name(name)
}

fn recount_degrees(simplices: &[Simplex]) -> BTreeMap<NodeId, usize> {
    let mut degrees = BTreeMap::new();
    for s in simplices {
        for &n in s.nodes() {
            *degrees.entry(n).or_insert(0) += 1;
        }
    }
    degrees
}

fn parse_int_file(path: &Path) -> Result<Vec<i64>> {
    let text = std::fs::read_to_string(path)?;
    let file = path.display().to_string();
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let token = line.trim();
        if token.is_empty() {
            continue;
        }
        let value = token.parse::<i64>().map_err(|_| Error::Parse {
            file: file.clone(),
            line: idx + 1,
            token: token.to_string(),
        })?;
        values.push(value);
    }
    if values.is_empty() {
        return Err(Error::EmptyDataset(file));
    }
    Ok(values)
}

/// Loads a dataset from its three component files.
///
/// The result is sorted by `(real_time, source_index)` with ordinals
/// assigned; duplicate node identifiers inside one simplex are collapsed and
/// counted in `dedup_collapsed`.
pub fn load_dataset(
    nverts_path: &Path,
    simplices_path: &Path,
    times_path: &Path,
    name: &str,
) -> Result<SimplexDataset> {
    let nverts = parse_int_file(nverts_path)?;
    let flat_nodes = parse_int_file(simplices_path)?;
    let times = parse_int_file(times_path)?;

    if nverts.len() != times.len() {
        return Err(Error::LengthMismatch {
            left_name: nverts_path.display().to_string(),
            left: nverts.len(),
            right_name: times_path.display().to_string(),
            right: times.len(),
        });
    }
    let declared: usize = nverts.iter().map(|&n| n.max(0) as usize).sum();
    if declared != flat_nodes.len() {
        return Err(Error::LengthMismatch {
            left_name: format!("{} (sum of sizes)", nverts_path.display()),
            left: declared,
            right_name: simplices_path.display().to_string(),
            right: flat_nodes.len(),
        });
    }

    let mut simplices = Vec::with_capacity(nverts.len());
    let mut dedup_collapsed = 0usize;
    let mut cursor = 0usize;
    for (i, (&count, &time)) in nverts.iter().zip(&times).enumerate() {
        let count = count.max(0) as usize;
        let raw = &flat_nodes[cursor..cursor + count];
        cursor += count;
        let mut simplex = Simplex::new(raw.iter().map(|&n| n as NodeId), time);
        dedup_collapsed += count - simplex.size();
        simplex.source_index = i;
        simplices.push(simplex);
    }

    simplices.sort_by_key(|s| (s.real_time, s.source_index));
    let simplices = assign_ordinal_times(simplices)?;
    let degree_index = recount_degrees(&simplices);
    Ok(SimplexDataset {
        name: name.to_string(),
        simplices,
        degree_index,
        dedup_collapsed,
    })
}

/// Convenience loader for the `<prefix>-{nverts,simplices,times}.txt` layout.
pub fn load_dataset_prefix(prefix: &Path) -> Result<SimplexDataset> {
    let name = prefix
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    load_dataset(
        &sibling(prefix, "nverts"),
        &sibling(prefix, "simplices"),
        &sibling(prefix, "times"),
        &name,
    )
}

/// Drops every trivial simplex (size < 2), preserving order and recomputing
/// the degree index. An empty result is permitted.
pub fn filter_trivial(dataset: &SimplexDataset) -> SimplexDataset {
    let simplices: Vec<Simplex> = dataset
        .simplices
        .iter()
        .filter(|s| !s.is_trivial())
        .cloned()
        .collect();
    let simplices = assign_ordinal_times(simplices).expect("order preserved by filter");
    let degree_index = recount_degrees(&simplices);
    SimplexDataset {
        name: dataset.name.clone(),
        simplices,
        degree_index,
        dedup_collapsed: dataset.dedup_collapsed,
    }
}

/// Re-indexes a `(real_time, source_index)`-sorted sequence with consecutive
/// ordinals `1..=m`. Same-real-time simplices receive distinct consecutive
/// ordinals in source order.
pub fn assign_ordinal_times(mut simplices: Vec<Simplex>) -> Result<Vec<Simplex>> {
    let sorted = simplices
        .windows(2)
        .all(|w| (w[0].real_time, w[0].source_index) <= (w[1].real_time, w[1].source_index));
    if !sorted {
        return Err(Error::UnsortedInput);
    }
    for (i, s) in simplices.iter_mut().enumerate() {
        s.ordinal_time = (i + 1) as u32;
    }
    Ok(simplices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;
    use tempfile::TempDir;

    fn write_dataset_files(dir: &Path, name: &str, nverts: &str, nodes: &str, times: &str) {
        fs::write(dir.join(format!("{name}-nverts.txt")), nverts).unwrap();
        fs::write(dir.join(format!("{name}-simplices.txt")), nodes).unwrap();
        fs::write(dir.join(format!("{name}-times.txt")), times).unwrap();
    }

    fn load(dir: &Path, name: &str) -> Result<SimplexDataset> {
        load_dataset_prefix(&dir.join(name))
    }

    use crate::testutil::toy_coauth;

    fn node_sets(ds: &SimplexDataset) -> Vec<Vec<NodeId>> {
        ds.simplices().iter().map(|s| s.nodes().to_vec()).collect()
    }

    #[test]
    fn loads_minimal_dataset() {
        let dir = TempDir::new().unwrap();
        write_dataset_files(dir.path(), "mini", "3\n2\n", "1\n2\n3\n1\n2\n", "1995\n1996\n");
        let ds = load(dir.path(), "mini").unwrap();
        assert_eq!(node_sets(&ds), vec![vec![1, 2, 3], vec![1, 2]]);
        assert_eq!(ds.simplices()[0].real_time, 1995);
        assert_eq!(ds.simplices()[1].real_time, 1996);
        assert_eq!(ds.node_count(), 3);
        assert_eq!(ds.degree(1), 2);
        assert_eq!(ds.degree(3), 1);
    }

    #[test]
    fn collapses_duplicates_to_singleton() {
        let dir = TempDir::new().unwrap();
        write_dataset_files(dir.path(), "dup", "2\n", "7\n7\n", "5\n");
        let ds = load(dir.path(), "dup").unwrap();
        assert_eq!(node_sets(&ds), vec![vec![7]]);
        assert_eq!(ds.dedup_collapsed, 1);
        assert!(ds.simplices()[0].is_trivial());
        let filtered = filter_trivial(&ds);
        assert!(filtered.is_empty());
    }

    #[test]
    fn toy_fixture_sorts_into_expected_sequence() {
        let ds = toy_coauth();
        assert_eq!(
            node_sets(&ds),
            vec![
                vec![2, 3],
                vec![1, 2, 3],
                vec![1, 2],
                vec![2, 4, 8],
                vec![1, 2, 3],
                vec![1, 4, 8],
                vec![2, 3, 5, 6],
                vec![1, 5, 7],
            ]
        );
        assert_eq!(ds.len(), 8);
        assert_eq!(ds.node_count(), 8);
        assert_eq!(ds.trivial_count(), 0);
        // all 8 simplices are non-trivial, so the filter is a no-op
        assert_eq!(filter_trivial(&ds), ds);
    }

    #[test]
    fn sorts_by_time_then_source_order() {
        let simplices = vec![
            Simplex::new([4, 5], 2000),
            Simplex::new([1, 2], 1995),
            Simplex::new([2, 3], 1995),
        ];
        let ds = SimplexDataset::from_simplices("t", simplices);
        assert_eq!(
            node_sets(&ds),
            vec![vec![1, 2], vec![2, 3], vec![4, 5]],
            "ties broken by source order"
        );
        let ordinals: Vec<u32> = ds.simplices().iter().map(|s| s.ordinal_time).collect();
        assert_eq!(ordinals, vec![1, 2, 3]);
    }

    #[test]
    fn filter_trivial_examples() {
        let ds = SimplexDataset::from_simplices(
            "t",
            vec![Simplex::new([1], 1), Simplex::new([1, 2], 2)],
        );
        let filtered = filter_trivial(&ds);
        assert_eq!(node_sets(&filtered), vec![vec![1, 2]]);
        assert_eq!(filtered.degree(1), 1, "degree index recomputed");

        let all_trivial = SimplexDataset::from_simplices(
            "t",
            vec![Simplex::new([3], 1), Simplex::new([4], 2)],
        );
        assert!(filter_trivial(&all_trivial).is_empty());
    }

    #[test]
    fn ordinal_assignment_handles_ties_and_rejects_unsorted() {
        let mut simplices = vec![
            Simplex::new([1, 2], 1995),
            Simplex::new([2, 3], 1996),
            Simplex::new([3, 4], 1996),
        ];
        for (i, s) in simplices.iter_mut().enumerate() {
            s.source_index = i;
        }
        let out = assign_ordinal_times(simplices).unwrap();
        let ordinals: Vec<u32> = out.iter().map(|s| s.ordinal_time).collect();
        assert_eq!(ordinals, vec![1, 2, 3]);

        let single = assign_ordinal_times(vec![Simplex::new([1, 2], 7)]).unwrap();
        assert_eq!(single[0].ordinal_time, 1);

        let unsorted = vec![Simplex::new([1, 2], 2000), Simplex::new([2, 3], 1995)];
        assert!(matches!(
            assign_ordinal_times(unsorted),
            Err(Error::UnsortedInput)
        ));
    }

    #[test]
    fn parse_error_reports_line_number() {
        let dir = TempDir::new().unwrap();
        write_dataset_files(dir.path(), "bad", "2\n", "1\nx\n", "5\n");
        let err = load(dir.path(), "bad").unwrap_err();
        match err {
            Error::Parse { line, token, .. } => {
                assert_eq!(line, 2);
                assert_eq!(token, "x");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn length_mismatch_names_both_counts() {
        let dir = TempDir::new().unwrap();
        write_dataset_files(dir.path(), "mis", "2\n2\n", "1\n2\n3\n", "5\n6\n");
        let err = load(dir.path(), "mis").unwrap_err();
        match err {
            Error::LengthMismatch { left, right, .. } => {
                assert_eq!((left, right), (4, 3));
            }
            other => panic!("expected length mismatch, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_an_error() {
        let dir = TempDir::new().unwrap();
        write_dataset_files(dir.path(), "empty", "", "", "");
        assert!(matches!(
            load(dir.path(), "empty"),
            Err(Error::EmptyDataset(_))
        ));
    }

    #[test]
    fn round_trips_through_the_three_file_format() {
        let ds = toy_coauth();
        let dir = TempDir::new().unwrap();
        let prefix = dir.path().join("copy");
        ds.write_files(&prefix).unwrap();
        let reloaded = load_dataset_prefix(&prefix).unwrap();
        assert_eq!(reloaded.simplices(), ds.simplices());
        assert_eq!(reloaded.degree_index(), ds.degree_index());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_dataset() -> impl Strategy<Value = SimplexDataset> {
            proptest::collection::vec(
                (
                    proptest::collection::btree_set(0u64..30, 1..6),
                    0i64..50,
                ),
                1..40,
            )
            .prop_map(|entries| {
                let simplices = entries
                    .into_iter()
                    .map(|(nodes, t)| Simplex::new(nodes, t))
                    .collect();
                SimplexDataset::from_simplices("gen", simplices)
            })
        }

        proptest! {
            #[test]
            fn degree_index_matches_recount(ds in arb_dataset()) {
                for node in ds.nodes().collect::<Vec<_>>() {
                    let recount = ds
                        .simplices()
                        .iter()
                        .filter(|s| s.contains(node))
                        .count();
                    prop_assert_eq!(ds.degree(node), recount);
                }
            }

            #[test]
            fn ordinals_are_consecutive(ds in arb_dataset()) {
                let ordinals: Vec<u32> =
                    ds.simplices().iter().map(|s| s.ordinal_time).collect();
                let expected: Vec<u32> = (1..=ds.len() as u32).collect();
                prop_assert_eq!(ordinals, expected);
            }

            #[test]
            fn write_then_load_is_identity(ds in arb_dataset()) {
                let dir = TempDir::new().unwrap();
                let prefix = dir.path().join("rt");
                ds.write_files(&prefix).unwrap();
                let reloaded = load_dataset_prefix(&prefix).unwrap();
                prop_assert_eq!(reloaded.simplices(), ds.simplices());
            }
        }
    }
}
