use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SitError;
use crate::model::{InputInterface, ReificationMode, ReifiedRoleKey, SceneObservation};

/// Reified role keys paired with σ-count cardinalities for one scene.
///
/// Only strictly positive cardinalities are stored; an absent key reads as 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefBag {
    scene_id: String,
    mode: ReificationMode,
    entries: BTreeMap<ReifiedRoleKey, f64>,
}

impl BeliefBag {
    pub fn empty(scene_id: impl Into<String>, mode: ReificationMode) -> Self {
        Self {
            scene_id: scene_id.into(),
            mode,
            entries: BTreeMap::new(),
        }
    }

    /// Builds a bag from explicit cardinalities, dropping non-positive ones.
    pub fn from_entries(
        scene_id: impl Into<String>,
        mode: ReificationMode,
        entries: impl IntoIterator<Item = (ReifiedRoleKey, f64)>,
    ) -> Result<Self, SitError> {
        let mut bag = Self::empty(scene_id, mode);
        for (key, c) in entries {
            if key.mode() != mode {
                return Err(SitError::InterfaceMismatch(format!(
                    "key {key} does not belong to {mode} reification"
                )));
            }
            if !c.is_finite() || c < 0.0 {
                return Err(SitError::InvalidParameter {
                    name: "cardinality",
                    value: c,
                });
            }
            if c > 0.0 {
                bag.entries.insert(key, c);
            }
        }
        Ok(bag)
    }

    pub fn scene_id(&self) -> &str {
        &self.scene_id
    }

    pub fn mode(&self) -> ReificationMode {
        self.mode
    }

    pub fn cardinality(&self, key: &ReifiedRoleKey) -> f64 {
        self.entries.get(key).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl ExactSizeIterator<Item = (&ReifiedRoleKey, f64)> {
        self.entries.iter().map(|(k, &c)| (k, c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of all cardinalities (the scene's belief energy).
    pub fn total_energy(&self) -> f64 {
        self.entries.values().sum()
    }

    pub(crate) fn check_interface(&self, iface: &InputInterface) -> Result<(), SitError> {
        if self.mode != iface.mode() {
            return Err(SitError::InterfaceMismatch(format!(
                "beliefs use {} reification, memory uses {}",
                self.mode,
                iface.mode()
            )));
        }
        if let Some(key) = self.entries.keys().find(|k| !iface.admits(k)) {
            return Err(SitError::InterfaceMismatch(format!(
                "belief key {key} is not part of the memory interface"
            )));
        }
        Ok(())
    }
}

/// Encodes a scene into beliefs.
///
/// Each fact contributes `min(p_relation, p_subject_type, p_object_type)` to
/// the key of every type combination. In simplified mode the object type is
/// marginalized out with a maximum, so each fact adds at most one value per
/// (relation, subject type) key.
pub fn encode(scene: &SceneObservation, iface: &InputInterface) -> Result<BeliefBag, SitError> {
    scene.validate(iface)?;
    let mut entries: BTreeMap<ReifiedRoleKey, f64> = BTreeMap::new();
    for fact in &scene.facts {
        let subject = scene.element(&fact.subject).expect("validated endpoint");
        let object = scene.element(&fact.object).expect("validated endpoint");
        for (s, &ps) in subject.type_degrees.iter().filter(|(_, &p)| p > 0.0) {
            let per_object = object
                .type_degrees
                .iter()
                .filter(|(_, &p)| p > 0.0)
                .map(|(h, &ph)| (h, fact.degree.min(ps).min(ph)));
            match iface.mode() {
                ReificationMode::Full => {
                    for (h, p) in per_object {
                        if p > 0.0 {
                            let key =
                                ReifiedRoleKey::full(fact.relation.clone(), s.clone(), h.clone());
                            *entries.entry(key).or_default() += p;
                        }
                    }
                }
                ReificationMode::Simplified => {
                    let p = per_object.map(|(_, p)| p).fold(0.0, f64::max);
                    if p > 0.0 {
                        let key = ReifiedRoleKey::simplified(fact.relation.clone(), s.clone());
                        *entries.entry(key).or_default() += p;
                    }
                }
            }
        }
    }
    Ok(BeliefBag {
        scene_id: scene.scene_id.clone(),
        mode: iface.mode(),
        entries,
    })
}
