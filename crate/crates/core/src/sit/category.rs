use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BeliefBag, SitError};
use crate::fuzzy::ShoulderRestriction;
use crate::model::{ReificationMode, ReifiedRoleKey};

/// Identifier of a learned category. Ids grow monotonically within a memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CategoryId(pub u64);

impl fmt::Display for CategoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Φ{}", self.0)
    }
}

/// Scene a category was learned from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub scene_id: String,
    pub timestamp: u64,
}

/// A learned scene concept: a conjunction of minimum-cardinality restrictions.
#[derive(Debug, Clone, PartialEq)]
pub struct Category {
    id: CategoryId,
    restrictions: BTreeMap<ReifiedRoleKey, ShoulderRestriction>,
    provenance: Provenance,
    annotation: Option<String>,
}

impl Category {
    /// Restrictions must be nonempty, share one fuzziness and one reification
    /// mode, and have `k > 0`.
    pub fn new(
        id: CategoryId,
        restrictions: BTreeMap<ReifiedRoleKey, ShoulderRestriction>,
        provenance: Provenance,
    ) -> Result<Self, SitError> {
        let mut iter = restrictions.iter();
        let Some((first_key, first)) = iter.next() else {
            return Err(SitError::EmptyBeliefs);
        };
        for (key, rest) in restrictions.iter() {
            if rest.k() <= 0.0 {
                return Err(SitError::InvalidParameter {
                    name: "restriction cardinality",
                    value: rest.k(),
                });
            }
            if rest.fuzziness() != first.fuzziness() {
                return Err(SitError::FuzzinessMismatch {
                    expected: first.fuzziness(),
                    found: rest.fuzziness(),
                });
            }
            if key.mode() != first_key.mode() {
                return Err(SitError::InterfaceMismatch(format!(
                    "category mixes reification modes at key {key}"
                )));
            }
        }
        Ok(Self {
            id,
            restrictions,
            provenance,
            annotation: None,
        })
    }

    pub fn id(&self) -> CategoryId {
        self.id
    }

    pub fn restrictions(
        &self,
    ) -> impl ExactSizeIterator<Item = (&ReifiedRoleKey, &ShoulderRestriction)> {
        self.restrictions.iter()
    }

    pub fn restriction(&self, key: &ReifiedRoleKey) -> Option<&ShoulderRestriction> {
        self.restrictions.get(key)
    }

    pub fn len(&self) -> usize {
        self.restrictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.restrictions.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn annotation(&self) -> Option<&str> {
        self.annotation.as_deref()
    }

    pub fn set_annotation(&mut self, label: Option<String>) {
        self.annotation = label;
    }

    pub fn with_annotation(mut self, label: impl Into<String>) -> Self {
        self.annotation = Some(label.into());
        self
    }

    pub fn mode(&self) -> ReificationMode {
        self.restrictions
            .keys()
            .next()
            .map(ReifiedRoleKey::mode)
            .expect("nonempty category")
    }

    pub fn fuzziness(&self) -> f64 {
        self.restrictions
            .values()
            .next()
            .map(ShoulderRestriction::fuzziness)
            .expect("nonempty category")
    }

    /// Sum of the learned cardinalities `k`.
    pub fn restriction_energy(&self) -> f64 {
        self.restrictions.values().map(ShoulderRestriction::k).sum()
    }

    /// Same cardinalities, re-parametrized with fuzziness `a`.
    pub fn with_fuzziness(&self, a: f64) -> Result<Self, SitError> {
        let restrictions = self
            .restrictions
            .iter()
            .map(|(k, r)| Ok((k.clone(), r.with_fuzziness(a)?)))
            .collect::<Result<_, SitError>>()?;
        Ok(Self {
            restrictions,
            ..self.clone()
        })
    }
}

/// One-shot learning: one restriction `^aΩ(c)` per belief of the scene.
pub fn learn(
    beliefs: &BeliefBag,
    a: f64,
    id: CategoryId,
    timestamp: u64,
) -> Result<Category, SitError> {
    if beliefs.is_empty() {
        return Err(SitError::EmptyBeliefs);
    }
    let restrictions = beliefs
        .entries()
        .map(|(k, c)| Ok((k.clone(), ShoulderRestriction::new(c, a)?)))
        .collect::<Result<_, SitError>>()?;
    Category::new(
        id,
        restrictions,
        Provenance {
            scene_id: beliefs.scene_id().to_owned(),
            timestamp,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::classification_degree;
    use crate::sit::similarity;

    fn bag(entries: &[(&str, f64)]) -> BeliefBag {
        BeliefBag::from_entries(
            "s",
            ReificationMode::Full,
            entries.iter().map(|(k, c)| (k.parse().unwrap(), *c)),
        )
        .unwrap()
    }

    #[test]
    fn learns_one_restriction_per_belief() {
        let cat = learn(&bag(&[("front.GLASS.CUP", 0.8)]), 0.3, CategoryId(1), 4).unwrap();
        assert_eq!(cat.len(), 1);
        let rest = cat
            .restriction(&"front.GLASS.CUP".parse().unwrap())
            .unwrap();
        assert_eq!(rest.k(), 0.8);
        assert_eq!(rest.fuzziness(), 0.3);
        assert_eq!(cat.provenance().timestamp, 4);
        assert_eq!(cat.id().to_string(), "Φ1");
    }

    #[test]
    fn learned_category_classifies_its_own_scene_fully() {
        let b = bag(&[
            ("front.GLASS.CUP", 1.2),
            ("front.GLASS.GLASS", 0.1),
            ("front.CUP.CUP", 0.7),
        ]);
        let cat = learn(&b, 0.5, CategoryId(2), 0).unwrap();
        assert_eq!(classification_degree(&cat, &b).unwrap(), 1.0);
        assert_eq!(similarity(&cat, &b).unwrap(), 1.0);
    }

    #[test]
    fn empty_beliefs_cannot_be_learned() {
        assert!(matches!(
            learn(&bag(&[]), 0.3, CategoryId(1), 0),
            Err(SitError::EmptyBeliefs)
        ));
    }
}
