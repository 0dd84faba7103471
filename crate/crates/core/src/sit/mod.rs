//! Encoding, learning, structuring and classification of scenes, and the
//! observe/learn loop that ties them together over a persistent memory.

mod beliefs;
mod bootstrap;
mod category;
mod classify;
mod memory;

use thiserror::Error;

pub use beliefs::{encode, BeliefBag};
pub use bootstrap::{bootstrap_step, observe, run_sequence, SitParams, StepOutcome, StepTiming};
pub use category::{learn, Category, CategoryId, Provenance};
pub use classify::{classify, similarity, ClassificationGraph, ClassifiedNode};
pub use memory::{Edge, MemoryGraph, StructureDelta};

use crate::fuzzy::FuzzyError;
use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SitError {
    #[error("invalid scene: {0}")]
    InvalidScene(#[from] ModelError),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error("the scene has no beliefs to learn from")]
    EmptyBeliefs,
    #[error("category {0} is already in memory")]
    DuplicateCategory(CategoryId),
    #[error("no category {0} in memory")]
    UnknownCategory(CategoryId),
    #[error("similarity is undefined for a scene with zero belief energy")]
    ZeroSceneEnergy,
    #[error("interface mismatch: {0}")]
    InterfaceMismatch(String),
    #[error("fuzziness mismatch: memory uses {expected}, got {found}")]
    FuzzinessMismatch { expected: f64, found: f64 },
    #[error("invalid {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}
