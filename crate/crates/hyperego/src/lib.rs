//! Hypergraph ego-network toolkit: ingestion of timestamped simplex
//! datasets, star/radial/contracted ego-network extraction, temporal
//! structure measures, an ordering-correctness classifier, and temporal
//! reconstruction by swap-based hill climbing — plus a verification harness
//! for the local-search approximation guarantee on the average-intersection
//! objective.

pub mod classifier;
pub mod egonet;
pub mod error;
pub mod features;
pub mod isect;
pub mod reconstruct;
pub mod rng;
pub mod simplex;
pub mod synth;

pub use egonet::{
    alter_network, alters, extract_ego, is_eligible, AlterNetwork, EgoKind, EgoNetwork,
    Eligibility, EligibilityConfig,
};
pub use error::{Error, Result};
pub use features::FeatureVector;
pub use simplex::{
    assign_ordinal_times, filter_trivial, load_dataset, load_dataset_prefix, NodeId, Simplex,
    SimplexDataset,
};

#[cfg(test)]
pub(crate) mod testutil {
    use crate::simplex::{load_dataset_prefix, SimplexDataset};
    use std::path::{Path, PathBuf};

    pub fn toy_coauth_prefix() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/toy-coauth")
    }

    /// The eight-simplex toy co-authorship fixture used across the suite.
    pub fn toy_coauth() -> SimplexDataset {
        load_dataset_prefix(&toy_coauth_prefix()).unwrap()
    }
}
