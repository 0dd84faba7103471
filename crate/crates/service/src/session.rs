use fsit_core::io::{parse_scene, SceneInput};
use fsit_core::model::{InputInterface, ReificationMode, SceneObservation};
use fsit_core::sit::{
    classify, encode, observe, CategoryId, ClassificationGraph, ClassifiedNode, Edge, MemoryGraph,
    SitParams, StructureDelta,
};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;

/// Version stamped on every JSON response body.
pub const API_VERSION: u32 = 1;

/// One line of a session's observation log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub scene_id: String,
    pub learned: Option<CategoryId>,
    pub max_degree: Option<f64>,
    pub max_similarity: Option<f64>,
    pub memory_size: usize,
}

/// A classification graph laid out for JSON clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationView {
    pub scene_id: String,
    pub nodes: Vec<ClassifiedNode>,
    pub edges: Vec<Edge>,
}

impl From<&ClassificationGraph> for ClassificationView {
    fn from(g: &ClassificationGraph) -> Self {
        Self {
            scene_id: g.scene_id.clone(),
            nodes: g.nodes().copied().collect(),
            edges: g.edges().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub api_version: u32,
    pub learned: bool,
    pub category: Option<CategoryId>,
    pub classification: ClassificationView,
    pub delta: Option<StructureDelta>,
    pub memory_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfReport {
    pub api_version: u32,
    pub fuzziness: f64,
    /// Whether observing this scene under the current thresholds would learn.
    pub would_learn: bool,
    pub classification: ClassificationView,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub api_version: u32,
    pub id: String,
    pub params: SitParams,
    pub mode: ReificationMode,
    pub memory_size: usize,
    pub edge_count: usize,
    pub log: Vec<LogEntry>,
}

/// One teaching session: a memory, its loop parameters and what it has seen.
#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    memory: MemoryGraph,
    params: SitParams,
    log: Vec<LogEntry>,
}

impl Session {
    pub fn new(
        id: impl Into<String>,
        memory: MemoryGraph,
        params: SitParams,
    ) -> Result<Self, ApiError> {
        params.validate().map_err(|e| ApiError::sit("params", e))?;
        if params.fuzziness != memory.fuzziness() {
            return Err(ApiError::invalid(
                "fuzziness",
                format!("the memory uses fuzziness {}", memory.fuzziness()),
            ));
        }
        Ok(Self {
            id: id.into(),
            memory,
            params,
            log: Vec::new(),
        })
    }

    pub fn memory(&self) -> &MemoryGraph {
        &self.memory
    }

    pub fn params(&self) -> &SitParams {
        &self.params
    }

    pub fn info(&self) -> SessionInfo {
        SessionInfo {
            api_version: API_VERSION,
            id: self.id.clone(),
            params: self.params,
            mode: self.memory.interface().mode(),
            memory_size: self.memory.len(),
            edge_count: self.memory.edge_count(),
            log: self.log.clone(),
        }
    }

    /// Parses the scene payload at body member `field` under the session's
    /// interface.
    pub fn scene(
        &self,
        field: &str,
        value: &serde_json::Value,
    ) -> Result<SceneObservation, ApiError> {
        let input = parse_scene(&value.to_string()).map_err(|e| ApiError::format(field, e))?;
        let iface = self.memory.interface();
        if let Some(declared) = input.interface() {
            check_interface(declared, iface)
                .map_err(|m| ApiError::invalid(format!("{field}.interface"), m))?;
        }
        let mut scene = input
            .to_observation(iface)
            .map_err(|e| ApiError::format(field, e))?;
        if scene.scene_id.is_empty() {
            scene.scene_id = format!("{}-{}", self.id, self.log.len() + 1);
        }
        if matches!(input, SceneInput::Symbolic(_)) && scene.timestamp == 0 {
            scene.timestamp = self.log.len() as u64 + 1;
        }
        Ok(scene)
    }

    pub fn post_scene(
        &mut self,
        scene: &SceneObservation,
        force_learn: bool,
    ) -> Result<StepReport, ApiError> {
        let outcome = observe(&mut self.memory, scene, &self.params, force_learn)
            .map_err(|e| ApiError::sit("scene", e))?;
        self.log.push(LogEntry {
            scene_id: scene.scene_id.clone(),
            learned: outcome.learned,
            max_degree: outcome.classification.max_degree(),
            max_similarity: outcome.classification.max_similarity(),
            memory_size: self.memory.len(),
        });
        Ok(StepReport {
            api_version: API_VERSION,
            learned: outcome.learned.is_some(),
            category: outcome.learned,
            classification: (&outcome.classification).into(),
            delta: outcome.delta,
            memory_size: self.memory.len(),
        })
    }

    /// Classifies without touching the memory; `fuzziness` re-parametrizes a
    /// scratch copy of it.
    pub fn what_if(
        &self,
        scene: &SceneObservation,
        fuzziness: Option<f64>,
    ) -> Result<WhatIfReport, ApiError> {
        let beliefs =
            encode(scene, self.memory.interface()).map_err(|e| ApiError::sit("scene", e))?;
        let (a, graph) = match fuzziness {
            Some(a) if a != self.memory.fuzziness() => {
                let scratch = self
                    .memory
                    .with_fuzziness(a)
                    .map_err(|e| ApiError::sit("fuzziness", e))?;
                (a, classify(&scratch, &beliefs))
            }
            _ => (self.memory.fuzziness(), classify(&self.memory, &beliefs)),
        };
        let graph = graph.map_err(|e| ApiError::sit("scene", e))?;
        Ok(WhatIfReport {
            api_version: API_VERSION,
            fuzziness: a,
            would_learn: self.params.needs_learning(&graph),
            classification: (&graph).into(),
        })
    }

    pub fn annotate(
        &mut self,
        category: CategoryId,
        label: Option<String>,
    ) -> Result<(), ApiError> {
        self.memory
            .annotate(category, label)
            .map_err(|e| ApiError::sit("category", e))
    }

    /// Updates the thresholds. The fuzziness is fixed for the session's
    /// lifetime and may only be restated.
    pub fn set_params(
        &mut self,
        fuzziness: Option<f64>,
        th_membership: Option<f64>,
        th_similarity: Option<f64>,
    ) -> Result<SitParams, ApiError> {
        if let Some(a) = fuzziness.filter(|a| *a != self.params.fuzziness) {
            return Err(ApiError::invalid(
                "fuzziness",
                format!(
                    "fixed at {} for this session, got {a}",
                    self.params.fuzziness
                ),
            ));
        }
        let next = SitParams {
            th_membership: th_membership.unwrap_or(self.params.th_membership),
            th_similarity: th_similarity.unwrap_or(self.params.th_similarity),
            ..self.params
        };
        next.validate().map_err(|e| match e {
            fsit_core::sit::SitError::InvalidParameter { name, .. } => ApiError::invalid(name, e),
            other => ApiError::sit("params", other),
        })?;
        self.params = next;
        Ok(next)
    }
}

fn check_interface(declared: &InputInterface, session: &InputInterface) -> Result<(), String> {
    if declared == session {
        Ok(())
    } else {
        Err("differs from the session's interface".into())
    }
}
