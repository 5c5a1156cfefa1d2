use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use docasm_core::config::LoadedConfig;
use serde::Serialize;
use walkdir::WalkDir;

/// Every loadable interview config found under a directory, keyed by id.
#[derive(Debug, Default)]
pub struct Catalog {
    configs: BTreeMap<String, Arc<LoadedConfig>>,
    errors: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigSummary {
    pub id: String,
    pub title: String,
    pub goal: String,
    pub steps: usize,
}

impl Catalog {
    /// Loads each `*.xml` file whose root is `assembly_config`. Failures are
    /// recorded and skipped.
    pub fn scan(dir: &Path) -> Self {
        let mut catalog = Catalog::default();
        let files = WalkDir::new(dir)
            .sort_by_file_name()
            .into_iter()
            .filter_map(Result::ok)
            .filter(|e| e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "xml"));
        for entry in files {
            let path = entry.path();
            let Ok(text) = std::fs::read_to_string(path) else {
                continue;
            };
            if !text.contains("<assembly_config") {
                continue;
            }
            match LoadedConfig::load(path) {
                Ok(loaded) => {
                    let id = loaded.config.id.clone();
                    match catalog.configs.entry(id.clone()) {
                        Entry::Occupied(_) => catalog
                            .errors
                            .push(format!("{}: duplicate config id `{id}`", path.display())),
                        Entry::Vacant(slot) => {
                            tracing::info!(config = %id, path = %path.display(), "loaded config");
                            slot.insert(Arc::new(loaded));
                        }
                    }
                }
                Err(e) => {
                    tracing::warn!(path = %path.display(), "skipping config: {e}");
                    catalog.errors.push(format!("{}: {e}", path.display()));
                }
            }
        }
        catalog
    }

    pub fn insert(&mut self, loaded: LoadedConfig) {
        self.configs.insert(loaded.config.id.clone(), Arc::new(loaded));
    }

    pub fn get(&self, id: &str) -> Option<&Arc<LoadedConfig>> {
        self.configs.get(id)
    }

    pub fn errors(&self) -> &[String] {
        &self.errors
    }

    pub fn summaries(&self) -> Vec<ConfigSummary> {
        self.configs
            .values()
            .map(|c| ConfigSummary {
                id: c.config.id.clone(),
                title: c.config.title.clone(),
                goal: c.config.goal.clone(),
                steps: c.config.steps.len(),
            })
            .collect()
    }
}
