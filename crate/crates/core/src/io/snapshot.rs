use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{from_json, FormatError};
use crate::fuzzy::ShoulderRestriction;
use crate::model::{InputInterface, ReifiedRoleKey};
use crate::sit::{Category, CategoryId, MemoryGraph, Provenance};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryRecord {
    pub id: CategoryId,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<String>,
    /// Restriction cardinality `k` per key; the fuzziness is memory-wide.
    pub restrictions: BTreeMap<ReifiedRoleKey, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub child: CategoryId,
    pub parent: CategoryId,
    pub degree: f64,
}

/// On-disk form of a memory graph. Edges are stored for readers that do
/// not recompute them, and checked against the recomputed ones on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemorySnapshot {
    pub schema_version: u64,
    pub interface: InputInterface,
    pub fuzziness: f64,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
    pub categories: Vec<CategoryRecord>,
    pub edges: Vec<EdgeRecord>,
}

impl MemorySnapshot {
    pub fn from_memory(memory: &MemoryGraph) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            interface: memory.interface().clone(),
            fuzziness: memory.fuzziness(),
            metadata: memory.metadata().clone(),
            categories: memory
                .categories()
                .map(|c| CategoryRecord {
                    id: c.id(),
                    provenance: c.provenance().clone(),
                    annotation: c.annotation().map(str::to_owned),
                    restrictions: c.restrictions().map(|(k, r)| (k.clone(), r.k())).collect(),
                })
                .collect(),
            edges: memory
                .edges()
                .map(|e| EdgeRecord {
                    child: e.child,
                    parent: e.parent,
                    degree: e.degree.value(),
                })
                .collect(),
        }
    }

    pub fn into_memory(self) -> Result<MemoryGraph, FormatError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(FormatError::SchemaVersion {
                found: self.schema_version,
                supported: SCHEMA_VERSION,
            });
        }
        let a = self.fuzziness;
        let mut categories = Vec::with_capacity(self.categories.len());
        for (i, rec) in self.categories.into_iter().enumerate() {
            let field = format!("categories[{i}]");
            let restrictions = rec
                .restrictions
                .into_iter()
                .map(|(key, k)| {
                    ShoulderRestriction::new(k, a)
                        .map(|r| (key, r))
                        .map_err(|e| FormatError::validation(format!("{field}.restrictions"), e))
                })
                .collect::<Result<BTreeMap<_, _>, _>>()?;
            let mut cat = Category::new(rec.id, restrictions, rec.provenance)
                .map_err(|e| FormatError::validation(&field, e))?;
            cat.set_annotation(rec.annotation);
            categories.push(cat);
        }
        let mut memory = MemoryGraph::from_categories(self.interface, a, categories)
            .map_err(|e| FormatError::validation("categories", e))?;
        for (k, v) in self.metadata {
            memory.set_metadata(k, v);
        }
        let recomputed: Vec<EdgeRecord> = MemorySnapshot::from_memory(&memory).edges;
        if recomputed != self.edges {
            return Err(FormatError::validation(
                "edges",
                format!(
                    "stored edges do not match the categories ({} stored, {} recomputed)",
                    self.edges.len(),
                    recomputed.len()
                ),
            ));
        }
        Ok(memory)
    }
}

/// Pretty-printed JSON with a trailing newline. Saving a loaded snapshot
/// reproduces the input bytes.
pub fn save_memory(memory: &MemoryGraph) -> String {
    let mut text = serde_json::to_string_pretty(&MemorySnapshot::from_memory(memory))
        .expect("snapshots always serialize");
    text.push('\n');
    text
}

pub fn load_memory(text: &str) -> Result<MemoryGraph, FormatError> {
    let probe: serde_json::Value = from_json(text)?;
    match probe.get("schema_version").and_then(|v| v.as_u64()) {
        Some(SCHEMA_VERSION) => {}
        Some(found) => {
            return Err(FormatError::SchemaVersion {
                found,
                supported: SCHEMA_VERSION,
            })
        }
        None => {
            return Err(FormatError::validation(
                "schema_version",
                "missing or not an integer",
            ))
        }
    }
    from_json::<MemorySnapshot>(text)?.into_memory()
}

/// Hex SHA-256 of the saved form.
pub fn memory_digest(memory: &MemoryGraph) -> String {
    hex::encode(Sha256::digest(save_memory(memory).as_bytes()))
}

pub fn read_memory_file(path: impl AsRef<Path>) -> Result<MemoryGraph, FormatError> {
    load_memory(&std::fs::read_to_string(path)?)
}

pub fn write_memory_file(path: impl AsRef<Path>, memory: &MemoryGraph) -> Result<(), FormatError> {
    std::fs::write(path, save_memory(memory))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::run_tabletop_sequence;

    #[test]
    fn save_load_save_is_identical() {
        let (mut memory, _) = run_tabletop_sequence(0.7).unwrap();
        memory
            .annotate(CategoryId(4), Some("three \"balls\"".into()))
            .unwrap();
        memory.set_metadata("teacher", "lab");
        let first = save_memory(&memory);
        let loaded = load_memory(&first).unwrap();
        assert_eq!(loaded, memory);
        assert_eq!(save_memory(&loaded), first);
        assert_eq!(memory_digest(&loaded), memory_digest(&memory));
    }

    #[test]
    fn rejects_foreign_versions_and_tampered_edges() {
        let (memory, _) = run_tabletop_sequence(0.3).unwrap();
        let text = save_memory(&memory);
        let v2 = text.replacen("\"schema_version\": 1", "\"schema_version\": 2", 1);
        assert!(matches!(
            load_memory(&v2),
            Err(FormatError::SchemaVersion { found: 2, .. })
        ));
        let mut snap: MemorySnapshot = serde_json::from_str(&text).unwrap();
        snap.edges[0].degree = 0.5;
        let err = snap.into_memory().unwrap_err();
        assert_eq!(err.field(), Some("edges"));
        let missing = text.replacen("\"schema_version\": 1,", "", 1);
        assert_eq!(
            load_memory(&missing).unwrap_err().field(),
            Some("schema_version")
        );
    }

    #[test]
    fn empty_memory_round_trips() {
        let memory = MemoryGraph::new(
            InputInterface::tabletop(crate::model::ReificationMode::Full),
            0.3,
        )
        .unwrap();
        let text = save_memory(&memory);
        assert_eq!(save_memory(&load_memory(&text).unwrap()), text);
    }
}
