//! Shared fixture builders for the criterion benches.

use std::path::PathBuf;

use supernet_core::hash::{hash_bytes, Hash256};

/// Resolves a bundled scenario by file name.
pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

/// Resolves a bundled data fixture by file name.
pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

/// Synthetic leaf digests for the merkle benches.
pub fn synthetic_leaves(n: u64) -> Vec<Hash256> {
    (0..n).map(|i| hash_bytes(&i.to_be_bytes())).collect()
}
