use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Category, CategoryId, SitError};
use crate::fuzzy::{category_subsumption, check_fuzziness, SubsumptionDegree};
use crate::model::InputInterface;

/// A weighted implication `child ⊑ parent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub child: CategoryId,
    pub parent: CategoryId,
    pub degree: SubsumptionDegree,
}

/// What one structuring call added to the memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureDelta {
    pub category: CategoryId,
    pub edges: Vec<Edge>,
}

/// Learned categories connected by fuzzy subsumption edges.
///
/// The root (the empty scene) is implicit: every category implies it with
/// degree 1 and it carries no restrictions. Stored edges connect distinct
/// categories and always have a positive degree. Two categories may imply
/// each other.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryGraph {
    interface: InputInterface,
    fuzziness: f64,
    categories: BTreeMap<CategoryId, Category>,
    edges: BTreeMap<(CategoryId, CategoryId), SubsumptionDegree>,
    metadata: BTreeMap<String, String>,
}

impl MemoryGraph {
    pub const ROOT_LABEL: &'static str = "Φ";

    pub fn new(interface: InputInterface, fuzziness: f64) -> Result<Self, SitError> {
        check_fuzziness(fuzziness)?;
        Ok(Self {
            interface,
            fuzziness,
            categories: BTreeMap::new(),
            edges: BTreeMap::new(),
            metadata: BTreeMap::new(),
        })
    }

    pub fn interface(&self) -> &InputInterface {
        &self.interface
    }

    pub fn fuzziness(&self) -> f64 {
        self.fuzziness
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn categories(&self) -> impl ExactSizeIterator<Item = &Category> {
        self.categories.values()
    }

    pub fn category(&self, id: CategoryId) -> Option<&Category> {
        self.categories.get(&id)
    }

    pub fn contains(&self, id: CategoryId) -> bool {
        self.categories.contains_key(&id)
    }

    /// Edges ordered by (child, parent).
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().map(|(&(child, parent), &degree)| Edge {
            child,
            parent,
            degree,
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, child: CategoryId, parent: CategoryId) -> Option<SubsumptionDegree> {
        self.edges.get(&(child, parent)).copied()
    }

    pub fn parents(
        &self,
        child: CategoryId,
    ) -> impl Iterator<Item = (CategoryId, SubsumptionDegree)> + '_ {
        self.edges
            .iter()
            .filter(move |((c, _), _)| *c == child)
            .map(|(&(_, p), &d)| (p, d))
    }

    pub fn children(
        &self,
        parent: CategoryId,
    ) -> impl Iterator<Item = (CategoryId, SubsumptionDegree)> + '_ {
        self.edges
            .iter()
            .filter(move |((_, p), _)| *p == parent)
            .map(|(&(c, _), &d)| (c, d))
    }

    /// Pairs of categories implying each other.
    pub fn mutual_pairs(&self) -> Vec<(CategoryId, CategoryId)> {
        self.edges
            .keys()
            .filter(|(c, p)| c < p && self.edges.contains_key(&(*p, *c)))
            .copied()
            .collect()
    }

    pub fn next_category_id(&self) -> CategoryId {
        CategoryId(self.categories.keys().next_back().map_or(1, |id| id.0 + 1))
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn set_metadata(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.metadata.insert(key.into(), value.into());
    }

    pub fn annotate(&mut self, id: CategoryId, label: Option<String>) -> Result<(), SitError> {
        self.categories
            .get_mut(&id)
            .ok_or(SitError::UnknownCategory(id))?
            .set_annotation(label);
        Ok(())
    }

    fn check_category(&self, cat: &Category) -> Result<(), SitError> {
        if self.categories.contains_key(&cat.id()) {
            return Err(SitError::DuplicateCategory(cat.id()));
        }
        if let Some((key, _)) = cat.restrictions().find(|(k, _)| !self.interface.admits(k)) {
            return Err(SitError::InterfaceMismatch(format!(
                "restriction key {key} is not part of the memory interface"
            )));
        }
        if cat.fuzziness() != self.fuzziness {
            return Err(SitError::FuzzinessMismatch {
                expected: self.fuzziness,
                found: cat.fuzziness(),
            });
        }
        Ok(())
    }

    /// Adds `cat` and links it with every existing category in both
    /// directions. Edges among existing categories are left untouched.
    pub fn structure(&mut self, cat: Category) -> Result<StructureDelta, SitError> {
        self.check_category(&cat)?;
        let mut added = Vec::new();
        for other in self.categories.values() {
            let up = category_subsumption(other, &cat)?;
            if up.is_positive() {
                added.push(Edge {
                    child: cat.id(),
                    parent: other.id(),
                    degree: up,
                });
            }
            let down = category_subsumption(&cat, other)?;
            if down.is_positive() {
                added.push(Edge {
                    child: other.id(),
                    parent: cat.id(),
                    degree: down,
                });
            }
        }
        for e in &added {
            self.edges.insert((e.child, e.parent), e.degree);
        }
        let id = cat.id();
        self.categories.insert(id, cat);
        Ok(StructureDelta {
            category: id,
            edges: added,
        })
    }

    /// A copy of this memory with every restriction re-parametrized to
    /// fuzziness `a` and all edges recomputed.
    pub fn with_fuzziness(&self, a: f64) -> Result<Self, SitError> {
        let mut out = Self::new(self.interface.clone(), a)?;
        out.metadata = self.metadata.clone();
        for cat in self.categories.values() {
            out.structure(cat.with_fuzziness(a)?)?;
        }
        Ok(out)
    }

    /// Rebuilds a memory from stored categories, recomputing every edge.
    pub fn from_categories(
        interface: InputInterface,
        fuzziness: f64,
        categories: impl IntoIterator<Item = Category>,
    ) -> Result<Self, SitError> {
        let mut out = Self::new(interface, fuzziness)?;
        for cat in categories {
            out.structure(cat)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ReificationMode, ReifiedRoleKey};
    use crate::sit::{learn, BeliefBag};

    fn iface() -> InputInterface {
        InputInterface::tabletop(ReificationMode::Simplified)
    }

    fn cat(id: u64, a: f64, entries: &[(&str, f64)]) -> Category {
        let bag = BeliefBag::from_entries(
            format!("e{id}"),
            ReificationMode::Simplified,
            entries
                .iter()
                .map(|(k, c)| (k.parse::<ReifiedRoleKey>().unwrap(), *c)),
        )
        .unwrap();
        learn(&bag, a, CategoryId(id), id).unwrap()
    }

    /// Beliefs of the first two learned scenes of the bootstrapping example.
    fn phi1(a: f64) -> Category {
        cat(
            1,
            a,
            &[
                ("left.CYLINDER", 0.43),
                ("front.CYLINDER", 0.13),
                ("right.CYLINDER", 0.35),
                ("behind.CYLINDER", 0.9),
                ("front.PLANE", 0.78),
                ("left.PLANE", 0.72),
                ("right.CONE", 0.94),
                ("behind.CONE", 1.0),
                ("left.CONE", 0.43),
                ("front.CONE", 0.58),
            ],
        )
    }

    fn phi2(a: f64) -> Category {
        cat(
            2,
            a,
            &[
                ("right.CYLINDER", 0.17),
                ("behind.CYLINDER", 0.82),
                ("front.PLANE", 0.84),
                ("left.PLANE", 0.17),
                ("right.CONE", 0.17),
                ("behind.CONE", 0.84),
            ],
        )
    }

    #[test]
    fn first_category_only_links_to_root() {
        let mut m = MemoryGraph::new(iface(), 0.3).unwrap();
        let delta = m.structure(phi1(0.3)).unwrap();
        assert!(delta.edges.is_empty());
        assert_eq!(m.len(), 1);
        assert_eq!(m.edge_count(), 0);
    }

    #[test]
    fn richer_scene_implies_sparser_one() {
        for (a, expected) in [
            (0.3, (0.78 - 0.84 * 0.7) / (0.84 * 0.3)),
            (0.7, (0.78 - 0.84 * 0.3) / (0.84 * 0.7)),
        ] {
            let mut m = MemoryGraph::new(iface(), a).unwrap();
            m.structure(phi1(a)).unwrap();
            m.structure(phi2(a)).unwrap();
            // only front.PLANE is inside the ramp; every other key is satisfied
            let d = m.edge(CategoryId(1), CategoryId(2)).unwrap().value();
            assert!((d - expected).abs() < 1e-12, "a={a}: {d}");
            assert!(m.edge(CategoryId(2), CategoryId(1)).is_none());
        }
        // roughly 0.76 and 0.90, as in the bootstrapping example
        assert!(((0.78 - 0.84 * 0.7) / (0.84 * 0.3) - 0.76_f64).abs() < 0.01);
        assert!(((0.78 - 0.84 * 0.3) / (0.84 * 0.7) - 0.90_f64).abs() < 0.01);
    }

    #[test]
    fn near_identical_categories_imply_each_other() {
        let mut m = MemoryGraph::new(iface(), 0.7).unwrap();
        m.structure(cat(1, 0.7, &[("front.SPHERE", 1.0), ("right.SPHERE", 0.8)]))
            .unwrap();
        m.structure(cat(
            2,
            0.7,
            &[("front.SPHERE", 0.9), ("right.SPHERE", 0.85)],
        ))
        .unwrap();
        assert_eq!(m.mutual_pairs(), vec![(CategoryId(1), CategoryId(2))]);
    }

    #[test]
    fn structuring_rejects_bad_categories() {
        let mut m = MemoryGraph::new(iface(), 0.3).unwrap();
        m.structure(phi1(0.3)).unwrap();
        assert!(matches!(
            m.structure(phi1(0.3)),
            Err(SitError::DuplicateCategory(_))
        ));
        assert!(matches!(
            m.structure(phi2(0.5)),
            Err(SitError::FuzzinessMismatch { .. })
        ));
        let full = BeliefBag::from_entries(
            "f",
            ReificationMode::Full,
            [("front.CONE.PLANE".parse().unwrap(), 1.0)],
        )
        .unwrap();
        let wrong_mode = learn(&full, 0.3, CategoryId(9), 0).unwrap();
        assert!(matches!(
            m.structure(wrong_mode),
            Err(SitError::InterfaceMismatch(_))
        ));
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn ids_continue_after_the_largest() {
        let mut m = MemoryGraph::new(iface(), 0.3).unwrap();
        assert_eq!(m.next_category_id(), CategoryId(1));
        m.structure(cat(7, 0.3, &[("front.SPHERE", 1.0)])).unwrap();
        assert_eq!(m.next_category_id(), CategoryId(8));
    }

    #[test]
    fn annotation() {
        let mut m = MemoryGraph::new(iface(), 0.3).unwrap();
        m.structure(phi1(0.3)).unwrap();
        m.annotate(CategoryId(1), Some("cluttered".into())).unwrap();
        assert_eq!(
            m.category(CategoryId(1)).unwrap().annotation(),
            Some("cluttered")
        );
        assert!(m.annotate(CategoryId(5), None).is_err());
    }
}
