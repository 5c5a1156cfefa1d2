//! Test support shared by the workspace's integration and acceptance tests.
//!
//! Nothing here is used by the shipped crates. The [`oracle`] re-derives
//! conclusions straight from the proof conditions with no indexing or agenda,
//! so it stays independent of the reasoner it checks.

pub mod oracle;
pub mod random;

use std::path::PathBuf;

/// Workspace `fixtures/` directory.
pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(relative: &str) -> PathBuf {
    fixtures_dir().join(relative)
}

pub fn read_fixture(relative: &str) -> String {
    let path = fixture(relative);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

/// Loads a fixture config with its rule-base and template.
pub fn load_config(relative: &str) -> docasm_core::config::LoadedConfig {
    let path = fixture(relative);
    docasm_core::config::LoadedConfig::load(&path).unwrap_or_else(|e| panic!("loading {}: {e}", path.display()))
}
