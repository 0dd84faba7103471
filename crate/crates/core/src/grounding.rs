//! Grounding of 2D tabletop layouts into fuzzy facts.
//!
//! Directional relations come from a kernel centred on the subject object:
//! `degree = max(0, cos θ)^n · radial(ρ)`, where θ is the angle between the
//! displacement to the object and the relation's direction, and `radial` is
//! 1 up to the plateau distance, then falls linearly to 0 at the cutoff.
//! The relation directions are successive clockwise quarter turns of one
//! base direction, so with the default `[front, right, behind, left]` order
//! `front`/`behind` and `right`/`left` are exact inverses.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    Element, Fact, InputInterface, ModelError, ReificationMode, RelationSymbol, SceneObservation,
    TypeSymbol,
};

/// Facts weaker than this are not emitted.
pub const DEGREE_FLOOR: f64 = 0.01;

/// Lower clip for noisy shape confidences that were positive before noise.
pub const MIN_NOISY_SHAPE_DEGREE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroundingError {
    #[error("a scene needs at least one object")]
    NoObjects,
    #[error("objects `{0}` and `{1}` share the same position")]
    CoincidentPositions(String, String),
    #[error("relation `{0}` has no kernel direction")]
    UnknownRelation(String),
    #[error("invalid kernel or noise configuration: {0}")]
    InvalidConfig(String),
    #[error("object `{0}` has no positive shape confidence")]
    UntypedObject(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Exact clockwise quarter turn about the origin.
    pub fn rotate_cw(self) -> Self {
        Self {
            x: self.y,
            y: -self.x,
        }
    }
}

/// An object on the workbench with its perceived shape confidences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricObject {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub shapes: BTreeMap<TypeSymbol, f64>,
}

impl GeometricObject {
    pub fn new(
        id: impl Into<String>,
        x: f64,
        y: f64,
        shapes: impl IntoIterator<Item = (&'static str, f64)>,
    ) -> Self {
        Self {
            id: id.into(),
            x,
            y,
            shapes: shapes
                .into_iter()
                .map(|(t, p)| (TypeSymbol::new(t), p))
                .collect(),
        }
    }

    pub fn position(&self) -> Position {
        Position::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelConfig {
    /// Direction of the first relation, in the workbench frame.
    pub base_direction: [f64; 2],
    /// Relations in clockwise quarter-turn order starting at `base_direction`.
    pub relations: Vec<RelationSymbol>,
    pub angular_exponent: f64,
    /// ρ0: distance up to which the radial factor is 1 (meters).
    pub plateau: f64,
    /// ρ1: distance at which the radial factor reaches 0 (meters).
    pub cutoff: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            base_direction: [0.0, 1.0],
            relations: ["front", "right", "behind", "left"]
                .map(RelationSymbol::new)
                .to_vec(),
            angular_exponent: 2.0,
            plateau: 0.3,
            cutoff: 1.0,
        }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<(), GroundingError> {
        let [bx, by] = self.base_direction;
        let norm = (bx * bx + by * by).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(GroundingError::InvalidConfig(
                "base direction must be nonzero".into(),
            ));
        }
        if self.relations.is_empty() || self.relations.len() > 4 {
            return Err(GroundingError::InvalidConfig(
                "between one and four relations are supported".into(),
            ));
        }
        if !(self.angular_exponent >= 1.0 && self.angular_exponent.is_finite()) {
            return Err(GroundingError::InvalidConfig(
                "angular exponent must be ≥ 1".into(),
            ));
        }
        if !(self.plateau > 0.0 && self.cutoff > self.plateau && self.cutoff.is_finite()) {
            return Err(GroundingError::InvalidConfig(
                "need 0 < plateau < cutoff".into(),
            ));
        }
        Ok(())
    }

    /// Unit direction of `relation`.
    pub fn direction(&self, relation: &RelationSymbol) -> Result<Position, GroundingError> {
        let turns = self
            .relations
            .iter()
            .position(|r| r == relation)
            .ok_or_else(|| GroundingError::UnknownRelation(relation.to_string()))?;
        let [bx, by] = self.base_direction;
        let norm = (bx * bx + by * by).sqrt();
        let mut dir = Position::new(bx / norm, by / norm);
        for _ in 0..turns {
            dir = dir.rotate_cw();
        }
        Ok(dir)
    }

    fn radial(&self, distance: f64) -> f64 {
        if distance <= self.plateau {
            1.0
        } else if distance >= self.cutoff {
            0.0
        } else {
            (self.cutoff - distance) / (self.cutoff - self.plateau)
        }
    }

    fn degree_towards(&self, dir: Position, from: Position, to: Position) -> Option<f64> {
        let dx = to.x - from.x;
        let dy = to.y - from.y;
        let distance = (dx * dx + dy * dy).sqrt();
        if distance == 0.0 {
            return None;
        }
        let cos = (dx * dir.x + dy * dir.y) / distance;
        Some(cos.max(0.0).powf(self.angular_exponent) * self.radial(distance))
    }
}

/// Degree of `relation(from, to)`: how much `to` lies in the relation's
/// direction as seen from `from`.
pub fn relation_degree(
    cfg: &KernelConfig,
    relation: &RelationSymbol,
    from: Position,
    to: Position,
) -> Result<f64, GroundingError> {
    let dir = cfg.direction(relation)?;
    cfg.degree_towards(dir, from, to)
        .ok_or_else(|| GroundingError::CoincidentPositions(format!("{from:?}"), format!("{to:?}")))
}

/// Perception noise applied before grounding.
///
/// Each object is displaced by `|N(position_mean, position_std)|` meters in
/// a uniformly random direction; each positive shape confidence moves by
/// `±|N(shape_mean, shape_std)|` and is clipped to
/// `[MIN_NOISY_SHAPE_DEGREE, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    pub position_mean: f64,
    pub position_std: f64,
    pub shape_mean: f64,
    pub shape_std: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            position_mean: 0.015,
            position_std: 0.038,
            shape_mean: 0.093,
            shape_std: 0.195,
            seed: 0,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<(), GroundingError> {
        let finite = [
            self.position_mean,
            self.position_std,
            self.shape_mean,
            self.shape_std,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite || self.position_std < 0.0 || self.shape_std < 0.0 {
            return Err(GroundingError::InvalidConfig(
                "noise parameters must be finite with σ ≥ 0".into(),
            ));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    /// Noisy copies of `objects`, deterministic in `seed`.
    pub fn perturb(
        &self,
        objects: &[GeometricObject],
    ) -> Result<Vec<GeometricObject>, GroundingError> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let position = Normal::new(self.position_mean, self.position_std)
            .map_err(|e| GroundingError::InvalidConfig(e.to_string()))?;
        let shape = Normal::new(self.shape_mean, self.shape_std)
            .map_err(|e| GroundingError::InvalidConfig(e.to_string()))?;
        let mut out = Vec::with_capacity(objects.len());
        for obj in objects {
            let magnitude: f64 = position.sample(&mut rng).abs();
            let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let mut noisy = obj.clone();
            noisy.x += magnitude * angle.cos();
            noisy.y += magnitude * angle.sin();
            for p in noisy.shapes.values_mut().filter(|p| **p > 0.0) {
                let delta: f64 = shape.sample(&mut rng).abs();
                let signed = if rng.random_bool(0.5) { delta } else { -delta };
                *p = (*p + signed).clamp(MIN_NOISY_SHAPE_DEGREE, 1.0);
            }
            out.push(noisy);
        }
        Ok(out)
    }
}

/// A layout document: objects plus optional kernel, noise and interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricScene {
    #[serde(default)]
    pub scene_id: String,
    #[serde(default)]
    pub timestamp: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interface: Option<InputInterface>,
    pub objects: Vec<GeometricObject>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
}

impl GeometricScene {
    pub fn new(scene_id: impl Into<String>, timestamp: u64, objects: Vec<GeometricObject>) -> Self {
        Self {
            scene_id: scene_id.into(),
            timestamp,
            interface: None,
            objects,
            kernel: None,
            noise: None,
        }
    }

    /// The declared interface, or the tabletop interface in `mode`.
    pub fn interface_or_default(&self, mode: ReificationMode) -> InputInterface {
        self.interface
            .clone()
            .unwrap_or_else(|| InputInterface::tabletop(mode))
    }

    pub fn object_mut(&mut self, id: &str) -> Option<&mut GeometricObject> {
        self.objects.iter_mut().find(|o| o.id == id)
    }

    /// Grounds with the document's own kernel and noise (defaults otherwise).
    pub fn ground(&self, iface: &InputInterface) -> Result<SceneObservation, GroundingError> {
        let kernel = self.kernel.clone().unwrap_or_default();
        ground(
            &self.objects,
            &kernel,
            self.noise.as_ref(),
            iface,
            &self.scene_id,
            self.timestamp,
        )
    }
}

/// Turns objects into a scene: element types from shape confidences and one
/// fact per ordered object pair and kernel relation above [`DEGREE_FLOOR`].
pub fn ground(
    objects: &[GeometricObject],
    cfg: &KernelConfig,
    noise: Option<&NoiseConfig>,
    iface: &InputInterface,
    scene_id: &str,
    timestamp: u64,
) -> Result<SceneObservation, GroundingError> {
    if objects.is_empty() {
        return Err(GroundingError::NoObjects);
    }
    cfg.validate()?;
    if let Some(r) = cfg.relations.iter().find(|r| !iface.has_relation(r)) {
        return Err(ModelError::UnknownSymbol {
            kind: "relation",
            name: r.to_string(),
        }
        .into());
    }
    let objects = match noise {
        Some(n) => n.perturb(objects)?,
        None => objects.to_vec(),
    };
    let mut scene = SceneObservation::new(scene_id, timestamp);
    for obj in &objects {
        if !obj.shapes.values().any(|&p| p > 0.0) {
            return Err(GroundingError::UntypedObject(obj.id.clone()));
        }
        scene.elements.push(Element::new(
            obj.id.clone(),
            obj.shapes.iter().map(|(t, &p)| (t.clone(), p)),
        ));
    }
    let directions = cfg
        .relations
        .iter()
        .map(|r| Ok((r, cfg.direction(r)?)))
        .collect::<Result<Vec<_>, GroundingError>>()?;
    for subject in &objects {
        for object in &objects {
            if subject.id == object.id {
                continue;
            }
            for (relation, dir) in &directions {
                let degree = cfg
                    .degree_towards(*dir, subject.position(), object.position())
                    .ok_or_else(|| {
                        GroundingError::CoincidentPositions(subject.id.clone(), object.id.clone())
                    })?;
                if degree > DEGREE_FLOOR {
                    scene.facts.push(Fact::new(
                        subject.id.clone(),
                        relation.as_str(),
                        object.id.clone(),
                        degree,
                    ));
                }
            }
        }
    }
    scene.validate(iface)?;
    Ok(scene)
}
