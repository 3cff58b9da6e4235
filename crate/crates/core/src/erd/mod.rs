//! Entity-relationship descriptions.
//!
//! An [`Erd`] is read from the constructor-term notation
//!
//! ```text
//! ERD "Blog"
//!   [Entity "Tag" [Attribute "Name" (StringDom Nothing) Unique False]]
//!   []
//! ```
//!
//! and drives everything else: the relational schema, the generated forms and
//! controllers, and the constraint checks performed by every transaction.

mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::calendar::CalendarTime;

pub use parse::{parse_erd, ParseError};
pub use print::print_erd;

/// A complete ER description.
#[derive(Clone, Debug, PartialEq)]
pub struct Erd {
    pub name: String,
    pub entities: Vec<Entity>,
    pub relationships: Vec<Relationship>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entity {
    pub name: String,
    pub attributes: Vec<Attribute>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Attribute {
    pub name: String,
    pub domain: Domain,
    pub key: KeyKind,
    pub null_allowed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KeyKind {
    NoKey,
    Unique,
}

/// Attribute domain together with its optional default value.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Int(Option<i64>),
    Float(Option<f64>),
    Bool(Option<bool>),
    String(Option<String>),
    Date(Option<CalendarTime>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DomainKind {
    Int,
    Float,
    Bool,
    String,
    Date,
}

impl Domain {
    pub fn kind(&self) -> DomainKind {
        match self {
            Domain::Int(_) => DomainKind::Int,
            Domain::Float(_) => DomainKind::Float,
            Domain::Bool(_) => DomainKind::Bool,
            Domain::String(_) => DomainKind::String,
            Domain::Date(_) => DomainKind::Date,
        }
    }

    pub fn has_default(&self) -> bool {
        match self {
            Domain::Int(d) => d.is_some(),
            Domain::Float(d) => d.is_some(),
            Domain::Bool(d) => d.is_some(),
            Domain::String(d) => d.is_some(),
            Domain::Date(d) => d.is_some(),
        }
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::Int => "IntDom",
            DomainKind::Float => "FloatDom",
            DomainKind::Bool => "BoolDom",
            DomainKind::String => "StringDom",
            DomainKind::Date => "DateDom",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Relationship {
    pub name: String,
    pub end_a: REnd,
    pub end_b: REnd,
}

impl Relationship {
    pub fn ends(&self) -> [&REnd; 2] {
        [&self.end_a, &self.end_b]
    }
}

/// One end of a binary relationship.
///
/// The cardinality of an end constrains how many instances of `entity` a
/// single instance on the opposite end may be related to.
#[derive(Clone, Debug, PartialEq)]
pub struct REnd {
    pub entity: String,
    pub role: String,
    pub cardinality: Cardinality,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cardinality {
    Exactly(u64),
    Between(u64, MaxBound),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaxBound {
    Finite(u64),
    Infinite,
}

impl Cardinality {
    pub fn min(&self) -> u64 {
        match *self {
            Cardinality::Exactly(n) => n,
            Cardinality::Between(min, _) => min,
        }
    }

    /// Upper bound, `None` when unbounded.
    pub fn max(&self) -> Option<u64> {
        match *self {
            Cardinality::Exactly(n) => Some(n),
            Cardinality::Between(_, MaxBound::Finite(m)) => Some(m),
            Cardinality::Between(_, MaxBound::Infinite) => None,
        }
    }

    fn is_single(&self) -> bool {
        self.max() == Some(1)
    }
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cardinality::Exactly(n) => write!(f, "Exactly {n}"),
            Cardinality::Between(min, MaxBound::Finite(max)) => write!(f, "Between {min} {max}"),
            Cardinality::Between(min, MaxBound::Infinite) => write!(f, "Between {min} Infinite"),
        }
    }
}

/// A relationship end with its bounds, as retained by [`RelShape`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndInfo {
    pub entity: String,
    pub role: String,
    pub min: u64,
    pub max: Option<u64>,
}

impl EndInfo {
    fn of(end: &REnd) -> Self {
        EndInfo {
            entity: end.entity.clone(),
            role: end.role.clone(),
            min: end.cardinality.min(),
            max: end.cardinality.max(),
        }
    }
}

/// Implementable shape of a relationship.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelShape {
    /// Foreign key on `many.entity` referencing `one.entity`.
    OneToMany {
        relationship: String,
        one: EndInfo,
        many: EndInfo,
    },
    /// Unique foreign key on `dependent.entity` referencing `owner.entity`.
    OneToOne {
        relationship: String,
        owner: EndInfo,
        dependent: EndInfo,
    },
    /// Join table with one row per related pair.
    ManyToMany {
        relationship: String,
        a: EndInfo,
        b: EndInfo,
    },
}

impl RelShape {
    pub fn relationship(&self) -> &str {
        match self {
            RelShape::OneToMany { relationship, .. }
            | RelShape::OneToOne { relationship, .. }
            | RelShape::ManyToMany { relationship, .. } => relationship,
        }
    }

    /// `(referenced end, referencing end)` for shapes realized by a foreign key.
    pub fn foreign_key_ends(&self) -> Option<(&EndInfo, &EndInfo)> {
        match self {
            RelShape::OneToMany { one, many, .. } => Some((one, many)),
            RelShape::OneToOne { owner, dependent, .. } => Some((owner, dependent)),
            RelShape::ManyToMany { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("ERD name {0:?} must be an identifier starting with an uppercase letter")]
    InvalidErdName(String),
    #[error("ERD {0} has no entities")]
    NoEntities(String),
    #[error("entity name {0:?} must be an identifier starting with an uppercase letter")]
    InvalidEntityName(String),
    #[error("duplicate entity name {0}")]
    DuplicateEntity(String),
    #[error("entity {0} has no attributes")]
    NoAttributes(String),
    #[error("attribute name {attribute:?} of entity {entity} is not an identifier")]
    InvalidAttributeName { entity: String, attribute: String },
    #[error("duplicate attribute name {attribute} in entity {entity}")]
    DuplicateAttribute { entity: String, attribute: String },
    #[error("attribute {entity}.{attribute} is Unique and therefore must not allow null values")]
    UniqueNullable { entity: String, attribute: String },
    #[error("attribute {entity}.{attribute} has an ill-typed default value")]
    InvalidDefault { entity: String, attribute: String },
    #[error("relationship name {0:?} is not an identifier")]
    InvalidRelationshipName(String),
    #[error("duplicate relationship name {0}")]
    DuplicateRelationship(String),
    #[error("relationship name {0} clashes with an entity name")]
    RelationshipNamedLikeEntity(String),
    #[error("relationship {relationship} references unknown entity {entity}")]
    UnknownEntity { relationship: String, entity: String },
    #[error("role name {role:?} in relationship {relationship} is not an identifier")]
    InvalidRoleName { relationship: String, role: String },
    #[error("relationship {relationship} uses role name {role} on both ends")]
    DuplicateRole { relationship: String, role: String },
    #[error("relationship {relationship} has an invalid cardinality ({cardinality}) at end {entity}")]
    InvalidCardinality {
        relationship: String,
        entity: String,
        cardinality: Cardinality,
    },
    #[error("unsupported cardinality combination in relationship {relationship}: {detail}")]
    UnsupportedCardinality { relationship: String, detail: String },
    #[error("required references form a cycle through entity {entity} (relationships {relationships})")]
    RequiredReferenceCycle { entity: String, relationships: String },
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_upper_identifier(s: &str) -> bool {
    is_identifier(s) && s.starts_with(|c: char| c.is_ascii_uppercase())
}

fn cardinality_valid(c: &Cardinality) -> bool {
    match *c {
        Cardinality::Exactly(n) => n >= 1,
        Cardinality::Between(_, MaxBound::Infinite) => true,
        Cardinality::Between(min, MaxBound::Finite(max)) => max >= 1 && min <= max,
    }
}

/// Maps one relationship onto its implementable shape.
///
/// The cardinalities of both ends must already be individually valid.
pub fn classify_relationship(rel: &Relationship) -> Result<RelShape, ValidationError> {
    let unsupported = |detail: String| ValidationError::UnsupportedCardinality {
        relationship: rel.name.clone(),
        detail,
    };
    for end in rel.ends() {
        if let Cardinality::Exactly(n) = end.cardinality {
            if n >= 2 {
                return Err(unsupported(format!(
                    "end {} has Exactly {n}; only Exactly 1 is supported",
                    end.entity
                )));
            }
        }
    }
    let (a, b) = (&rel.end_a, &rel.end_b);
    let many_min_check = |end: &REnd| -> Result<(), ValidationError> {
        if !end.cardinality.is_single() && end.cardinality.min() >= 1 {
            Err(unsupported(format!(
                "end {} ({}) requires a minimum on the many side",
                end.entity, end.cardinality
            )))
        } else {
            Ok(())
        }
    };
    many_min_check(a)?;
    many_min_check(b)?;
    let name = rel.name.clone();
    let shape = match (a.cardinality.is_single(), b.cardinality.is_single()) {
        (true, false) => RelShape::OneToMany {
            relationship: name,
            one: EndInfo::of(a),
            many: EndInfo::of(b),
        },
        (false, true) => RelShape::OneToMany {
            relationship: name,
            one: EndInfo::of(b),
            many: EndInfo::of(a),
        },
        (false, false) => RelShape::ManyToMany {
            relationship: name,
            a: EndInfo::of(a),
            b: EndInfo::of(b),
        },
        (true, true) => match (a.cardinality.min(), b.cardinality.min()) {
            (1, 1) => {
                return Err(unsupported(format!(
                    "both ends ({} and {}) are mandatory",
                    a.cardinality, b.cardinality
                )))
            }
            (0, 1) => RelShape::OneToOne {
                relationship: name,
                owner: EndInfo::of(b),
                dependent: EndInfo::of(a),
            },
            _ => RelShape::OneToOne {
                relationship: name,
                owner: EndInfo::of(a),
                dependent: EndInfo::of(b),
            },
        },
    };
    if let Some((referenced, referencing)) = shape.foreign_key_ends() {
        if referenced.min >= 1 && referenced.entity == referencing.entity {
            return Err(unsupported(format!(
                "entity {} must reference another instance of itself",
                referenced.entity
            )));
        }
    }
    Ok(shape)
}

/// Classifies every relationship of a validated ERD.
pub fn classify_relationships(erd: &Erd) -> Result<Vec<RelShape>, ValidationError> {
    erd.relationships.iter().map(classify_relationship).collect()
}

/// Checks all structural invariants; an empty result means the ERD is valid.
///
/// Errors are reported in declaration order: ERD-level first, then entities
/// and their attributes, then relationships.
pub fn validate_erd(erd: &Erd) -> Vec<ValidationError> {
    let mut errors = Vec::new();
    if !is_upper_identifier(&erd.name) {
        errors.push(ValidationError::InvalidErdName(erd.name.clone()));
    }
    if erd.entities.is_empty() {
        errors.push(ValidationError::NoEntities(erd.name.clone()));
    }

    let mut entity_names = HashSet::new();
    for entity in &erd.entities {
        if !is_upper_identifier(&entity.name) {
            errors.push(ValidationError::InvalidEntityName(entity.name.clone()));
        }
        if !entity_names.insert(entity.name.as_str()) {
            errors.push(ValidationError::DuplicateEntity(entity.name.clone()));
        }
        if entity.attributes.is_empty() {
            errors.push(ValidationError::NoAttributes(entity.name.clone()));
        }
        let mut attr_names = HashSet::new();
        for attr in &entity.attributes {
            let names = || (entity.name.clone(), attr.name.clone());
            if !is_identifier(&attr.name) {
                let (entity, attribute) = names();
                errors.push(ValidationError::InvalidAttributeName { entity, attribute });
            }
            if !attr_names.insert(attr.name.as_str()) {
                let (entity, attribute) = names();
                errors.push(ValidationError::DuplicateAttribute { entity, attribute });
            }
            if attr.key == KeyKind::Unique && attr.null_allowed {
                let (entity, attribute) = names();
                errors.push(ValidationError::UniqueNullable { entity, attribute });
            }
            if let Domain::Float(Some(x)) = attr.domain {
                if !x.is_finite() {
                    let (entity, attribute) = names();
                    errors.push(ValidationError::InvalidDefault { entity, attribute });
                }
            }
        }
    }

    let mut rel_names = HashSet::new();
    let mut fk_edges: Vec<(String, String, String)> = Vec::new();
    for rel in &erd.relationships {
        if !is_identifier(&rel.name) {
            errors.push(ValidationError::InvalidRelationshipName(rel.name.clone()));
        }
        if !rel_names.insert(rel.name.as_str()) {
            errors.push(ValidationError::DuplicateRelationship(rel.name.clone()));
        }
        if entity_names.contains(rel.name.as_str()) {
            errors.push(ValidationError::RelationshipNamedLikeEntity(rel.name.clone()));
        }
        let mut ends_ok = true;
        for end in rel.ends() {
            if !entity_names.contains(end.entity.as_str()) {
                ends_ok = false;
                errors.push(ValidationError::UnknownEntity {
                    relationship: rel.name.clone(),
                    entity: end.entity.clone(),
                });
            }
            if !is_identifier(&end.role) {
                errors.push(ValidationError::InvalidRoleName {
                    relationship: rel.name.clone(),
                    role: end.role.clone(),
                });
            }
            if !cardinality_valid(&end.cardinality) {
                ends_ok = false;
                errors.push(ValidationError::InvalidCardinality {
                    relationship: rel.name.clone(),
                    entity: end.entity.clone(),
                    cardinality: end.cardinality,
                });
            }
        }
        if rel.end_a.role == rel.end_b.role {
            errors.push(ValidationError::DuplicateRole {
                relationship: rel.name.clone(),
                role: rel.end_a.role.clone(),
            });
        }
        if ends_ok {
            match classify_relationship(rel) {
                Ok(shape) => {
                    if let Some((referenced, referencing)) = shape.foreign_key_ends() {
                        if referenced.min >= 1 {
                            fk_edges.push((referencing.entity.clone(), referenced.entity.clone(), rel.name.clone()));
                        }
                    }
                }
                Err(e) => errors.push(e),
            }
        }
    }
    if let Some(err) = required_reference_cycle(&erd.entities, &fk_edges) {
        errors.push(err);
    }
    errors
}

/// A cycle of mandatory foreign keys makes every entity on it impossible to
/// insert first.
fn required_reference_cycle(entities: &[Entity], edges: &[(String, String, String)]) -> Option<ValidationError> {
    let mut graph: BTreeMap<&str, Vec<(&str, &str)>> = BTreeMap::new();
    for (from, to, rel) in edges {
        graph.entry(from).or_default().push((to, rel));
    }
    // Iterative DFS with colors, in entity declaration order for deterministic reporting.
    let mut done: BTreeSet<&str> = BTreeSet::new();
    for start in entities.iter().map(|e| e.name.as_str()) {
        if done.contains(start) {
            continue;
        }
        let mut path: Vec<(&str, usize)> = vec![(start, 0)];
        let mut on_path: Vec<&str> = vec![start];
        let mut via: Vec<&str> = Vec::new();
        while let Some(&mut (node, ref mut idx)) = path.last_mut() {
            let succ = graph.get(node).map(|v| v.as_slice()).unwrap_or(&[]);
            if *idx < succ.len() {
                let (next, rel) = succ[*idx];
                *idx += 1;
                if let Some(pos) = on_path.iter().position(|n| *n == next) {
                    let mut rels: Vec<&str> = via[pos..].to_vec();
                    rels.push(rel);
                    return Some(ValidationError::RequiredReferenceCycle {
                        entity: next.to_string(),
                        relationships: rels.join(", "),
                    });
                }
                if !done.contains(next) {
                    path.push((next, 0));
                    on_path.push(next);
                    via.push(rel);
                }
            } else {
                done.insert(node);
                path.pop();
                on_path.pop();
                via.pop();
            }
        }
    }
    None
}

impl Erd {
    pub fn entity(&self, name: &str) -> Option<&Entity> {
        self.entities.iter().find(|e| e.name == name)
    }
}

impl Entity {
    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }
}
