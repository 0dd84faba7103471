//! Scene vocabulary and observation data model.
//!
//! An [`InputInterface`] fixes the closed vocabulary of element types and
//! relations a memory works with. A [`SceneObservation`] is a set of typed
//! [`Element`]s plus fuzzy binary [`Fact`]s between them. Everything here is
//! immutable once validated.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("unknown {kind} symbol `{name}`")]
    UnknownSymbol { kind: &'static str, name: String },
    #[error("fact {fact} references undeclared element `{element}`")]
    DanglingFactEndpoint { fact: usize, element: String },
    #[error("{what} has degree {value}, expected a value in [0, 1]")]
    DegreeOutOfRange { what: String, value: f64 },
    #[error("duplicate fact ({subject}, {relation}, {object})")]
    DuplicateFact {
        subject: String,
        relation: String,
        object: String,
    },
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("fact {fact} relates element `{element}` to itself")]
    SelfRelation { fact: usize, element: String },
    #[error("element `{0}` has no type with a positive degree")]
    UntypedElement(String),
    #[error("input interface declares no {0}")]
    EmptyInterface(&'static str),
    #[error("relation `{relation}` declares inverse `{inverse}` which does not declare it back")]
    InverseMismatch { relation: String, inverse: String },
    #[error("invalid identifier `{0}`: use ASCII letters, digits, `_` or `-`")]
    InvalidIdentifier(String),
}

fn check_identifier(name: &str) -> Result<(), ModelError> {
    let ok = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if ok {
        Ok(())
    } else {
        Err(ModelError::InvalidIdentifier(name.to_owned()))
    }
}

fn check_degree(what: impl FnOnce() -> String, value: f64) -> Result<(), ModelError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ModelError::DegreeOutOfRange {
            what: what(),
            value,
        })
    }
}

macro_rules! symbol {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(name: impl Into<String>) -> Self {
                Self(name.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }
    };
}

symbol!(
    /// An element type such as `SPHERE` or `CUP`.
    TypeSymbol
);
symbol!(
    /// A binary relation name such as `front`.
    RelationSymbol
);
symbol!(
    /// Identifier of an element inside one scene.
    ElementId
);

/// How facts are collapsed into role keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReificationMode {
    /// relation × subject type × object type (`w·v²` keys).
    Full,
    /// relation × subject type (`w·v` keys).
    Simplified,
}

impl fmt::Display for ReificationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReificationMode::Full => f.write_str("full"),
            ReificationMode::Simplified => f.write_str("simplified"),
        }
    }
}

impl std::str::FromStr for ReificationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(ReificationMode::Full),
            "simplified" => Ok(ReificationMode::Simplified),
            other => Err(format!("unknown reification mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelationDecl {
    pub name: RelationSymbol,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<RelationSymbol>,
    #[serde(default)]
    pub symmetric_with_inverse: bool,
}

impl RelationDecl {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: RelationSymbol::new(name),
            inverse: None,
            symmetric_with_inverse: false,
        }
    }

    pub fn with_inverse(mut self, inverse: impl Into<String>) -> Self {
        self.inverse = Some(RelationSymbol::new(inverse));
        self.symmetric_with_inverse = true;
        self
    }
}

/// The closed vocabulary a memory is built over.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "RawInterface", try_from = "RawInterface")]
pub struct InputInterface {
    types: BTreeSet<TypeSymbol>,
    relations: BTreeMap<RelationSymbol, RelationDecl>,
    mode: ReificationMode,
}

#[derive(Serialize, Deserialize)]
struct RawInterface {
    types: Vec<TypeSymbol>,
    relations: Vec<RelationDecl>,
    mode: ReificationMode,
}

impl TryFrom<RawInterface> for InputInterface {
    type Error = ModelError;

    fn try_from(raw: RawInterface) -> Result<Self, Self::Error> {
        InputInterface::new(raw.types, raw.relations, raw.mode)
    }
}

impl From<InputInterface> for RawInterface {
    fn from(iface: InputInterface) -> Self {
        RawInterface {
            types: iface.types.into_iter().collect(),
            relations: iface.relations.into_values().collect(),
            mode: iface.mode,
        }
    }
}

impl InputInterface {
    pub fn new(
        types: impl IntoIterator<Item = TypeSymbol>,
        relations: impl IntoIterator<Item = RelationDecl>,
        mode: ReificationMode,
    ) -> Result<Self, ModelError> {
        let mut type_set = BTreeSet::new();
        for t in types {
            check_identifier(t.as_str())?;
            if !type_set.insert(t.clone()) {
                return Err(ModelError::DuplicateElement(t.to_string()));
            }
        }
        let mut rel_map = BTreeMap::new();
        for r in relations {
            check_identifier(r.name.as_str())?;
            if rel_map.insert(r.name.clone(), r.clone()).is_some() {
                return Err(ModelError::DuplicateElement(r.name.to_string()));
            }
        }
        if type_set.is_empty() {
            return Err(ModelError::EmptyInterface("types"));
        }
        if rel_map.is_empty() {
            return Err(ModelError::EmptyInterface("relations"));
        }
        for decl in rel_map.values() {
            if let Some(inv) = &decl.inverse {
                let back = rel_map.get(inv).and_then(|d| d.inverse.as_ref());
                if back != Some(&decl.name) {
                    return Err(ModelError::InverseMismatch {
                        relation: decl.name.to_string(),
                        inverse: inv.to_string(),
                    });
                }
            }
        }
        Ok(Self {
            types: type_set,
            relations: rel_map,
            mode,
        })
    }

    /// Convenience constructor from plain names; relations have no inverses.
    pub fn from_names(
        types: &[&str],
        relations: &[&str],
        mode: ReificationMode,
    ) -> Result<Self, ModelError> {
        Self::new(
            types.iter().map(|t| TypeSymbol::new(*t)),
            relations.iter().map(|r| RelationDecl::new(*r)),
            mode,
        )
    }

    /// SPHERE/CONE/CYLINDER/PLANE shapes with front/right/behind/left relations
    /// declared as two inverse pairs.
    pub fn tabletop(mode: ReificationMode) -> Self {
        Self::new(
            ["SPHERE", "CONE", "CYLINDER", "PLANE"].map(TypeSymbol::new),
            [
                RelationDecl::new("front").with_inverse("behind"),
                RelationDecl::new("behind").with_inverse("front"),
                RelationDecl::new("right").with_inverse("left"),
                RelationDecl::new("left").with_inverse("right"),
            ],
            mode,
        )
        .expect("tabletop interface is well formed")
    }

    pub fn types(&self) -> impl ExactSizeIterator<Item = &TypeSymbol> {
        self.types.iter()
    }

    pub fn relations(&self) -> impl ExactSizeIterator<Item = &RelationDecl> {
        self.relations.values()
    }

    pub fn mode(&self) -> ReificationMode {
        self.mode
    }

    pub fn with_mode(&self, mode: ReificationMode) -> Self {
        Self {
            mode,
            ..self.clone()
        }
    }

    pub fn has_type(&self, t: &TypeSymbol) -> bool {
        self.types.contains(t)
    }

    pub fn has_relation(&self, r: &RelationSymbol) -> bool {
        self.relations.contains_key(r)
    }

    pub fn relation(&self, r: &RelationSymbol) -> Option<&RelationDecl> {
        self.relations.get(r)
    }

    /// Whether `key` can be produced by this interface.
    pub fn admits(&self, key: &ReifiedRoleKey) -> bool {
        let shape_ok = match self.mode {
            ReificationMode::Full => key.object_type.is_some(),
            ReificationMode::Simplified => key.object_type.is_none(),
        };
        shape_ok
            && self.has_relation(&key.relation)
            && self.has_type(&key.subject_type)
            && key.object_type.as_ref().is_none_or(|t| self.has_type(t))
    }

    /// Number of possible role keys: `w·v²` (full) or `w·v` (simplified).
    pub fn key_space_size(&self) -> usize {
        let v = self.types.len();
        let w = self.relations.len();
        match self.mode {
            ReificationMode::Full => w * v * v,
            ReificationMode::Simplified => w * v,
        }
    }

    /// All role keys in their total order.
    pub fn enumerate_keys(&self) -> Vec<ReifiedRoleKey> {
        let mut keys = Vec::with_capacity(self.key_space_size());
        for rel in self.relations.keys() {
            for s in &self.types {
                match self.mode {
                    ReificationMode::Full => {
                        for h in &self.types {
                            keys.push(ReifiedRoleKey::full(rel.clone(), s.clone(), h.clone()));
                        }
                    }
                    ReificationMode::Simplified => {
                        keys.push(ReifiedRoleKey::simplified(rel.clone(), s.clone()));
                    }
                }
            }
        }
        keys
    }
}

/// A scene element with its fuzzy type memberships.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub id: ElementId,
    pub type_degrees: BTreeMap<TypeSymbol, f64>,
}

impl Element {
    pub fn new(id: impl Into<String>, types: impl IntoIterator<Item = (TypeSymbol, f64)>) -> Self {
        Self {
            id: ElementId::new(id),
            type_degrees: types.into_iter().collect(),
        }
    }

    pub fn degree(&self, t: &TypeSymbol) -> f64 {
        self.type_degrees.get(t).copied().unwrap_or(0.0)
    }
}

/// `relation(subject, object)` holding with `degree`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "FactRecord", into = "FactRecord")]
pub struct Fact {
    pub subject: ElementId,
    pub relation: RelationSymbol,
    pub object: ElementId,
    pub degree: f64,
}

#[derive(Serialize, Deserialize)]
struct FactRecord(ElementId, RelationSymbol, ElementId, f64);

impl From<FactRecord> for Fact {
    fn from(r: FactRecord) -> Self {
        Fact {
            subject: r.0,
            relation: r.1,
            object: r.2,
            degree: r.3,
        }
    }
}

impl From<Fact> for FactRecord {
    fn from(f: Fact) -> Self {
        FactRecord(f.subject, f.relation, f.object, f.degree)
    }
}

impl Fact {
    pub fn new(
        subject: impl Into<String>,
        relation: impl Into<String>,
        object: impl Into<String>,
        degree: f64,
    ) -> Self {
        Self {
            subject: ElementId::new(subject),
            relation: RelationSymbol::new(relation),
            object: ElementId::new(object),
            degree,
        }
    }
}

/// The facts describing one scene instance at one time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObservation {
    pub scene_id: String,
    #[serde(default)]
    pub timestamp: u64,
    pub elements: Vec<Element>,
    pub facts: Vec<Fact>,
}

impl SceneObservation {
    pub fn new(scene_id: impl Into<String>, timestamp: u64) -> Self {
        Self {
            scene_id: scene_id.into(),
            timestamp,
            elements: Vec::new(),
            facts: Vec::new(),
        }
    }

    pub fn with_element(mut self, element: Element) -> Self {
        self.elements.push(element);
        self
    }

    pub fn with_fact(mut self, fact: Fact) -> Self {
        self.facts.push(fact);
        self
    }

    pub fn element(&self, id: &ElementId) -> Option<&Element> {
        self.elements.iter().find(|e| &e.id == id)
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty() && self.facts.is_empty()
    }

    /// Checks the scene against `iface`.
    pub fn validate(&self, iface: &InputInterface) -> Result<(), ModelError> {
        let mut ids = BTreeSet::new();
        for el in &self.elements {
            check_identifier(el.id.as_str())?;
            if !ids.insert(&el.id) {
                return Err(ModelError::DuplicateElement(el.id.to_string()));
            }
            for (t, &p) in &el.type_degrees {
                if !iface.has_type(t) {
                    return Err(ModelError::UnknownSymbol {
                        kind: "type",
                        name: t.to_string(),
                    });
                }
                check_degree(|| format!("type {t} of element {}", el.id), p)?;
            }
            if !el.type_degrees.values().any(|&p| p > 0.0) {
                return Err(ModelError::UntypedElement(el.id.to_string()));
            }
        }
        let mut seen = BTreeSet::new();
        for (i, f) in self.facts.iter().enumerate() {
            if !iface.has_relation(&f.relation) {
                return Err(ModelError::UnknownSymbol {
                    kind: "relation",
                    name: f.relation.to_string(),
                });
            }
            for end in [&f.subject, &f.object] {
                if !ids.contains(end) {
                    return Err(ModelError::DanglingFactEndpoint {
                        fact: i,
                        element: end.to_string(),
                    });
                }
            }
            if f.subject == f.object {
                return Err(ModelError::SelfRelation {
                    fact: i,
                    element: f.subject.to_string(),
                });
            }
            check_degree(|| format!("fact {i}"), f.degree)?;
            if !seen.insert((&f.subject, &f.relation, &f.object)) {
                return Err(ModelError::DuplicateFact {
                    subject: f.subject.to_string(),
                    relation: f.relation.to_string(),
                    object: f.object.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// Validates `scene` against `iface`, handing it back on success.
pub fn validate_scene(
    scene: SceneObservation,
    iface: &InputInterface,
) -> Result<SceneObservation, ModelError> {
    scene.validate(iface)?;
    Ok(scene)
}

/// A reified role: relation plus subject type, plus object type in full mode.
///
/// Ordered lexicographically over (relation, subject type, object type).
/// Rendered as `relation.SUBJECT[.OBJECT]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReifiedRoleKey {
    pub relation: RelationSymbol,
    pub subject_type: TypeSymbol,
    pub object_type: Option<TypeSymbol>,
}

impl ReifiedRoleKey {
    pub fn full(relation: RelationSymbol, subject: TypeSymbol, object: TypeSymbol) -> Self {
        Self {
            relation,
            subject_type: subject,
            object_type: Some(object),
        }
    }

    pub fn simplified(relation: RelationSymbol, subject: TypeSymbol) -> Self {
        Self {
            relation,
            subject_type: subject,
            object_type: None,
        }
    }

    pub fn mode(&self) -> ReificationMode {
        if self.object_type.is_some() {
            ReificationMode::Full
        } else {
            ReificationMode::Simplified
        }
    }
}

impl fmt::Display for ReifiedRoleKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.relation, self.subject_type)?;
        if let Some(h) = &self.object_type {
            write!(f, ".{h}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for ReifiedRoleKey {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split('.').collect();
        for p in &parts {
            check_identifier(p).map_err(|_| ModelError::InvalidIdentifier(s.to_owned()))?;
        }
        match parts.as_slice() {
            [r, t] => Ok(Self::simplified((*r).into(), (*t).into())),
            [r, t, h] => Ok(Self::full((*r).into(), (*t).into(), (*h).into())),
            _ => Err(ModelError::InvalidIdentifier(s.to_owned())),
        }
    }
}

impl Serialize for ReifiedRoleKey {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ReifiedRoleKey {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cup_glass() -> InputInterface {
        InputInterface::from_names(&["GLASS", "CUP"], &["front"], ReificationMode::Full).unwrap()
    }

    fn glass_cup() -> SceneObservation {
        SceneObservation::new("e1", 1)
            .with_element(Element::new("g1", [("GLASS".into(), 0.8)]))
            .with_element(Element::new("g2", [("CUP".into(), 0.9)]))
            .with_fact(Fact::new("g1", "front", "g2", 0.9))
    }

    #[test]
    fn glass_cup_scene_is_valid() {
        assert!(validate_scene(glass_cup(), &cup_glass()).is_ok());
    }

    #[test]
    fn empty_scene_is_valid() {
        assert!(SceneObservation::new("empty", 0)
            .validate(&cup_glass())
            .is_ok());
    }

    #[test]
    fn undeclared_relation_is_rejected() {
        let scene = glass_cup().with_fact(Fact::new("g2", "above", "g1", 0.5));
        assert!(matches!(
            scene.validate(&cup_glass()),
            Err(ModelError::UnknownSymbol {
                kind: "relation",
                ..
            })
        ));
    }

    #[test]
    fn error_paths() {
        let iface = cup_glass();
        let dangling = glass_cup().with_fact(Fact::new("g1", "front", "g9", 0.5));
        assert!(matches!(
            dangling.validate(&iface),
            Err(ModelError::DanglingFactEndpoint { fact: 1, .. })
        ));
        let dup = glass_cup().with_fact(Fact::new("g1", "front", "g2", 0.2));
        assert!(matches!(
            dup.validate(&iface),
            Err(ModelError::DuplicateFact { .. })
        ));
        let range =
            SceneObservation::new("s", 0).with_element(Element::new("g1", [("GLASS".into(), 1.3)]));
        assert!(matches!(
            range.validate(&iface),
            Err(ModelError::DegreeOutOfRange { .. })
        ));
        let untyped =
            SceneObservation::new("s", 0).with_element(Element::new("g1", [("GLASS".into(), 0.0)]));
        assert!(matches!(
            untyped.validate(&iface),
            Err(ModelError::UntypedElement(_))
        ));
        let selfrel = glass_cup().with_fact(Fact::new("g1", "front", "g1", 0.5));
        assert!(matches!(
            selfrel.validate(&iface),
            Err(ModelError::SelfRelation { .. })
        ));
        let nan = glass_cup().with_fact(Fact::new("g2", "front", "g1", f64::NAN));
        assert!(matches!(
            nan.validate(&iface),
            Err(ModelError::DegreeOutOfRange { .. })
        ));
    }

    #[test]
    fn key_space_sizes() {
        assert_eq!(cup_glass().enumerate_keys().len(), 4);
        let iface = InputInterface::tabletop(ReificationMode::Simplified);
        assert_eq!(iface.enumerate_keys().len(), 16);
        assert_eq!(iface.key_space_size(), 16);
    }

    #[test]
    fn full_keys_enumerate_lexicographically() {
        let names: Vec<String> = cup_glass()
            .enumerate_keys()
            .iter()
            .map(ToString::to_string)
            .collect();
        assert_eq!(
            names,
            [
                "front.CUP.CUP",
                "front.CUP.GLASS",
                "front.GLASS.CUP",
                "front.GLASS.GLASS"
            ]
        );
    }

    #[test]
    fn inverse_must_be_declared_back() {
        let err = InputInterface::new(
            [TypeSymbol::new("A")],
            [
                RelationDecl::new("front").with_inverse("behind"),
                RelationDecl::new("behind"),
            ],
            ReificationMode::Full,
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::InverseMismatch { .. }));
        assert!(matches!(
            InputInterface::from_names(&[], &["front"], ReificationMode::Full),
            Err(ModelError::EmptyInterface("types"))
        ));
    }

    #[test]
    fn key_text_form_round_trips() {
        for key in InputInterface::tabletop(ReificationMode::Full).enumerate_keys() {
            assert_eq!(key.to_string().parse::<ReifiedRoleKey>().unwrap(), key);
        }
        assert!("front".parse::<ReifiedRoleKey>().is_err());
        assert!("a.b.c.d".parse::<ReifiedRoleKey>().is_err());
    }
}
