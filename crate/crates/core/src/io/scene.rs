use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{from_json, FormatError};
use crate::grounding::{GeometricScene, GroundingError};
use crate::model::{Element, Fact, InputInterface, ModelError, SceneObservation, TypeSymbol};

/// Symbolic scene file: elements keyed by id with their type degrees, and
/// facts as `[subject, relation, object, degree]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interface: Option<InputInterface>,
    #[serde(default)]
    pub scene_id: String,
    #[serde(default)]
    pub timestamp: u64,
    pub elements: BTreeMap<String, BTreeMap<TypeSymbol, f64>>,
    #[serde(default)]
    pub facts: Vec<Fact>,
}

impl SceneDocument {
    pub fn from_observation(scene: &SceneObservation, interface: Option<InputInterface>) -> Self {
        Self {
            interface,
            scene_id: scene.scene_id.clone(),
            timestamp: scene.timestamp,
            elements: scene
                .elements
                .iter()
                .map(|e| (e.id.to_string(), e.type_degrees.clone()))
                .collect(),
            facts: scene.facts.clone(),
        }
    }

    pub fn observation(&self) -> SceneObservation {
        SceneObservation {
            scene_id: self.scene_id.clone(),
            timestamp: self.timestamp,
            elements: self
                .elements
                .iter()
                .map(|(id, types)| {
                    Element::new(id.clone(), types.iter().map(|(t, p)| (t.clone(), *p)))
                })
                .collect(),
            facts: self.facts.clone(),
        }
    }
}

/// Either kind of scene file.
#[derive(Debug, Clone, PartialEq)]
pub enum SceneInput {
    Symbolic(SceneDocument),
    Geometric(GeometricScene),
}

impl SceneInput {
    /// The interface declared by the file, if any.
    pub fn interface(&self) -> Option<&InputInterface> {
        match self {
            SceneInput::Symbolic(d) => d.interface.as_ref(),
            SceneInput::Geometric(g) => g.interface.as_ref(),
        }
    }

    pub fn scene_id(&self) -> &str {
        match self {
            SceneInput::Symbolic(d) => &d.scene_id,
            SceneInput::Geometric(g) => &g.scene_id,
        }
    }

    /// Validated observation under `iface`; geometric layouts are grounded
    /// with their own kernel and noise blocks.
    pub fn to_observation(&self, iface: &InputInterface) -> Result<SceneObservation, FormatError> {
        let scene = match self {
            SceneInput::Symbolic(d) => d.observation(),
            SceneInput::Geometric(g) => g.ground(iface).map_err(|e| match e {
                GroundingError::Model(m) => model_error(m),
                other => FormatError::validation("objects", other),
            })?,
        };
        scene.validate(iface).map_err(model_error)?;
        Ok(scene)
    }
}

/// Maps a model error to the document field it concerns.
pub(crate) fn model_error(e: ModelError) -> FormatError {
    let field = match &e {
        ModelError::DanglingFactEndpoint { fact, .. } | ModelError::SelfRelation { fact, .. } => {
            format!("facts[{fact}]")
        }
        ModelError::DuplicateFact { .. } => "facts".into(),
        ModelError::UnknownSymbol {
            kind: "relation", ..
        } => "facts".into(),
        ModelError::UnknownSymbol { .. } => "elements".into(),
        ModelError::DegreeOutOfRange { what, .. } => what.clone(),
        ModelError::DuplicateElement(id) | ModelError::UntypedElement(id) => {
            format!("elements.{id}")
        }
        _ => "interface".into(),
    };
    FormatError::validation(field, e)
}

/// Parses a scene file, symbolic or geometric (detected by an `objects` key).
pub fn parse_scene(text: &str) -> Result<SceneInput, FormatError> {
    let probe: serde_json::Value = from_json(text)?;
    if probe.get("objects").is_some() {
        Ok(SceneInput::Geometric(from_json(text)?))
    } else {
        Ok(SceneInput::Symbolic(from_json(text)?))
    }
}
