use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{
    classify, encode, learn, BeliefBag, CategoryId, ClassificationGraph, MemoryGraph, SitError,
    StructureDelta,
};
use crate::fuzzy::check_fuzziness;
use crate::model::SceneObservation;

/// Constants of the observe/learn loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SitParams {
    pub fuzziness: f64,
    pub th_membership: f64,
    pub th_similarity: f64,
}

impl Default for SitParams {
    fn default() -> Self {
        Self {
            fuzziness: 0.3,
            th_membership: 0.6,
            th_similarity: 0.5,
        }
    }
}

impl SitParams {
    pub fn new(fuzziness: f64, th_membership: f64, th_similarity: f64) -> Result<Self, SitError> {
        let params = Self {
            fuzziness,
            th_membership,
            th_similarity,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), SitError> {
        check_fuzziness(self.fuzziness)?;
        if !(0.0..=1.0).contains(&self.th_membership) {
            return Err(SitError::InvalidParameter {
                name: "th_membership",
                value: self.th_membership,
            });
        }
        if !(self.th_similarity >= 0.0 && self.th_similarity.is_finite()) {
            return Err(SitError::InvalidParameter {
                name: "th_similarity",
                value: self.th_similarity,
            });
        }
        Ok(())
    }

    /// Whether a classification is too weak to stand on its own: the best
    /// degree is below `th_membership` or the best similarity is below
    /// `th_similarity`. An empty classification always is.
    pub fn needs_learning(&self, graph: &ClassificationGraph) -> bool {
        match (graph.max_degree(), graph.max_similarity()) {
            (Some(p), Some(d)) => p < self.th_membership || d < self.th_similarity,
            _ => true,
        }
    }
}

/// Wall-clock time spent in each phase of one step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepTiming {
    pub encode_classify: Duration,
    pub learn_structure: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub beliefs: BeliefBag,
    pub classification: ClassificationGraph,
    pub learned: Option<CategoryId>,
    pub delta: Option<StructureDelta>,
    pub timing: StepTiming,
}

/// One observation: encode, classify, and learn a new category when the
/// classification is too weak.
pub fn bootstrap_step(
    memory: &mut MemoryGraph,
    scene: &SceneObservation,
    params: &SitParams,
) -> Result<StepOutcome, SitError> {
    observe(memory, scene, params, false)
}

/// Like [`bootstrap_step`], but `force_learn` learns even when the scene is
/// confidently classified.
pub fn observe(
    memory: &mut MemoryGraph,
    scene: &SceneObservation,
    params: &SitParams,
    force_learn: bool,
) -> Result<StepOutcome, SitError> {
    params.validate()?;
    if params.fuzziness != memory.fuzziness() {
        return Err(SitError::FuzzinessMismatch {
            expected: memory.fuzziness(),
            found: params.fuzziness,
        });
    }
    let start = Instant::now();
    let beliefs = encode(scene, memory.interface())?;
    let classification = classify(memory, &beliefs)?;
    let encode_classify = start.elapsed();

    if !(force_learn || params.needs_learning(&classification)) {
        return Ok(StepOutcome {
            beliefs,
            classification,
            learned: None,
            delta: None,
            timing: StepTiming {
                encode_classify,
                learn_structure: Duration::ZERO,
            },
        });
    }

    let start = Instant::now();
    let id = memory.next_category_id();
    let category = learn(&beliefs, params.fuzziness, id, scene.timestamp)?;
    let delta = memory.structure(category)?;
    let learn_structure = start.elapsed();

    let classification = classify(memory, &beliefs)?;
    Ok(StepOutcome {
        beliefs,
        classification,
        learned: Some(id),
        delta: Some(delta),
        timing: StepTiming {
            encode_classify,
            learn_structure,
        },
    })
}

/// Folds [`bootstrap_step`] over `scenes` in order.
pub fn run_sequence<'a>(
    memory: &mut MemoryGraph,
    scenes: impl IntoIterator<Item = &'a SceneObservation>,
    params: &SitParams,
) -> Result<Vec<StepOutcome>, SitError> {
    scenes
        .into_iter()
        .map(|scene| bootstrap_step(memory, scene, params))
        .collect()
}
