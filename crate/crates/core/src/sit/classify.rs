use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BeliefBag, Category, CategoryId, Edge, MemoryGraph, SitError};
use crate::fuzzy::classification_degree;

/// Ratio between the category's restricted cardinalities and the scene's
/// total belief cardinality. Exceeds 1 only when some restriction is
/// satisfied inside its fuzzy ramp.
pub fn similarity(cat: &Category, beliefs: &BeliefBag) -> Result<f64, SitError> {
    let energy = beliefs.total_energy();
    if energy <= 0.0 {
        return Err(SitError::ZeroSceneEnergy);
    }
    Ok(cat.restriction_energy() / energy)
}

/// A category that classifies the current scene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedNode {
    pub category: CategoryId,
    pub degree: f64,
    pub similarity: f64,
}

/// The part of memory classifying a scene with a positive degree, with the
/// subsumption edges among those categories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationGraph {
    pub scene_id: String,
    nodes: BTreeMap<CategoryId, ClassifiedNode>,
    edges: Vec<Edge>,
}

impl ClassificationGraph {
    pub fn empty(scene_id: impl Into<String>) -> Self {
        Self {
            scene_id: scene_id.into(),
            nodes: BTreeMap::new(),
            edges: Vec::new(),
        }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &ClassifiedNode> {
        self.nodes.values()
    }

    pub fn node(&self, id: CategoryId) -> Option<&ClassifiedNode> {
        self.nodes.get(&id)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_degree(&self) -> Option<f64> {
        self.nodes.values().map(|n| n.degree).reduce(f64::max)
    }

    pub fn max_similarity(&self) -> Option<f64> {
        self.nodes.values().map(|n| n.similarity).reduce(f64::max)
    }

    /// Node with the highest degree, ties broken by similarity then id.
    pub fn best(&self) -> Option<&ClassifiedNode> {
        self.nodes.values().max_by(|a, b| {
            a.degree
                .total_cmp(&b.degree)
                .then(a.similarity.total_cmp(&b.similarity))
                .then(b.category.cmp(&a.category))
        })
    }
}

/// Classifies `beliefs` against every category of `memory`.
pub fn classify(
    memory: &MemoryGraph,
    beliefs: &BeliefBag,
) -> Result<ClassificationGraph, SitError> {
    beliefs.check_interface(memory.interface())?;
    let mut nodes = BTreeMap::new();
    for cat in memory.categories() {
        let degree = classification_degree(cat, beliefs)?;
        if degree > 0.0 {
            nodes.insert(
                cat.id(),
                ClassifiedNode {
                    category: cat.id(),
                    degree,
                    similarity: similarity(cat, beliefs)?,
                },
            );
        }
    }
    let edges = memory
        .edges()
        .filter(|e| nodes.contains_key(&e.child) && nodes.contains_key(&e.parent))
        .collect();
    Ok(ClassificationGraph {
        scene_id: beliefs.scene_id().to_owned(),
        nodes,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::ShoulderRestriction;
    use crate::model::{InputInterface, ReificationMode, ReifiedRoleKey};
    use crate::sit::{learn, Provenance};

    fn key(s: &str) -> ReifiedRoleKey {
        s.parse().unwrap()
    }

    fn bag(entries: &[(&str, f64)]) -> BeliefBag {
        BeliefBag::from_entries(
            "s",
            ReificationMode::Full,
            entries.iter().map(|(k, c)| (key(k), *c)),
        )
        .unwrap()
    }

    fn hand_made(restrictions: &[(&str, f64, f64)]) -> Category {
        Category::new(
            CategoryId(1),
            restrictions
                .iter()
                .map(|(k, kk, a)| (key(k), ShoulderRestriction::new(*kk, *a).unwrap()))
                .collect(),
            Provenance {
                scene_id: "hand".into(),
                timestamp: 0,
            },
        )
        .unwrap()
    }

    #[test]
    fn classification_degree_examples() {
        let single = hand_made(&[("front.GLASS.CUP", 0.8, 0.5)]);
        assert_eq!(
            classification_degree(&single, &bag(&[("front.GLASS.CUP", 2.0)])).unwrap(),
            1.0
        );
        assert_eq!(
            classification_degree(&single, &bag(&[("front.CUP.CUP", 2.0)])).unwrap(),
            0.0
        );
        let pair = hand_made(&[("front.GLASS.CUP", 1.0, 0.5), ("front.CUP.CUP", 2.0, 0.5)]);
        let p = classification_degree(
            &pair,
            &bag(&[("front.GLASS.CUP", 1.0), ("front.CUP.CUP", 1.5)]),
        )
        .unwrap();
        assert_eq!(p, 0.5);
    }

    #[test]
    fn similarity_examples() {
        let sparse = learn(&bag(&[("front.GLASS.CUP", 0.8)]), 0.3, CategoryId(1), 0).unwrap();
        let rich = bag(&[
            ("front.GLASS.CUP", 1.2),
            ("front.GLASS.GLASS", 0.1),
            ("front.CUP.CUP", 0.7),
        ]);
        assert!((similarity(&sparse, &rich).unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(
            similarity(&sparse, &bag(&[])),
            Err(SitError::ZeroSceneEnergy)
        );
        // learned from a denser scene, evaluated on a sparser one
        let dense = learn(&bag(&[("front.GLASS.CUP", 1.0)]), 0.5, CategoryId(2), 0).unwrap();
        assert!(similarity(&dense, &bag(&[("front.GLASS.CUP", 0.8)])).unwrap() > 1.0);
    }

    #[test]
    fn empty_memory_classifies_nothing() {
        let iface =
            InputInterface::from_names(&["GLASS", "CUP"], &["front"], ReificationMode::Full)
                .unwrap();
        let m = MemoryGraph::new(iface, 0.3).unwrap();
        let g = classify(&m, &bag(&[("front.GLASS.CUP", 1.0)])).unwrap();
        assert!(g.is_empty());
        assert_eq!(g.max_degree(), None);
    }

    #[test]
    fn classification_keeps_induced_edges() {
        let iface =
            InputInterface::from_names(&["GLASS", "CUP"], &["front"], ReificationMode::Full)
                .unwrap();
        let mut m = MemoryGraph::new(iface, 0.3).unwrap();
        let b1 = bag(&[("front.GLASS.CUP", 0.8)]);
        let b2 = bag(&[
            ("front.GLASS.CUP", 1.2),
            ("front.GLASS.GLASS", 0.1),
            ("front.CUP.CUP", 0.7),
        ]);
        m.structure(learn(&b1, 0.3, CategoryId(1), 1).unwrap())
            .unwrap();
        m.structure(learn(&b2, 0.3, CategoryId(2), 2).unwrap())
            .unwrap();
        let g = classify(&m, &b2).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.node(CategoryId(1)).unwrap().degree, 1.0);
        assert!((g.node(CategoryId(1)).unwrap().similarity - 0.4).abs() < 1e-12);
        assert_eq!(g.node(CategoryId(2)).unwrap().similarity, 1.0);
        assert_eq!(g.edges().len(), 1);
        assert_eq!(
            (g.edges()[0].child, g.edges()[0].parent),
            (CategoryId(2), CategoryId(1))
        );
        assert_eq!(g.best().unwrap().category, CategoryId(2));

        let g1 = classify(&m, &b1).unwrap();
        assert_eq!(g1.len(), 1);
        assert!(g1.edges().is_empty());
    }

    #[test]
    fn mismatched_interface_is_rejected() {
        let iface =
            InputInterface::from_names(&["GLASS", "CUP"], &["front"], ReificationMode::Full)
                .unwrap();
        let m = MemoryGraph::new(iface, 0.3).unwrap();
        assert!(matches!(
            classify(&m, &bag(&[("behind.GLASS.CUP", 1.0)])),
            Err(SitError::InterfaceMismatch(_))
        ));
        let simple = BeliefBag::from_entries(
            "s",
            ReificationMode::Simplified,
            [(key("front.GLASS"), 1.0)],
        )
        .unwrap();
        assert!(matches!(
            classify(&m, &simple),
            Err(SitError::InterfaceMismatch(_))
        ));
    }
}
