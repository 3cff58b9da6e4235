//! Relational schema derived from an ERD.

use std::collections::HashSet;

use crate::erd::{classify_relationships, validate_erd, DomainKind, Erd, RelShape, ValidationError};

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: DomainKind,
    pub nullable: bool,
    pub unique: bool,
}

/// Foreign-key column on the referencing entity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForeignKey {
    pub column: String,
    pub relationship: String,
    /// Referenced entity.
    pub target: String,
    /// Role name of the referenced end.
    pub role: String,
    /// Whether every row must reference a target.
    pub required: bool,
    /// How many rows may reference one target (unbounded when `None`).
    pub max_per_target: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub entity: String,
    pub columns: Vec<Column>,
    pub foreign_keys: Vec<ForeignKey>,
}

impl Table {
    /// `key`, attribute columns, foreign-key columns.
    pub fn column_names(&self) -> Vec<String> {
        std::iter::once("key".to_string())
            .chain(self.columns.iter().map(|c| c.name.clone()))
            .chain(self.foreign_keys.iter().map(|f| f.column.clone()))
            .collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn foreign_key_index(&self, relationship: &str) -> Option<usize> {
        self.foreign_keys.iter().position(|f| f.relationship == relationship)
    }
}

/// Join table of a many-to-many relationship, one row per related pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinTable {
    pub name: String,
    pub entity_a: String,
    pub entity_b: String,
    pub role_a: String,
    pub role_b: String,
    pub column_a: String,
    pub column_b: String,
    /// How many A rows one B row may be linked to.
    pub max_a: Option<u64>,
    /// How many B rows one A row may be linked to.
    pub max_b: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Schema {
    pub name: String,
    pub tables: Vec<Table>,
    pub join_tables: Vec<JoinTable>,
}

impl Schema {
    /// Derives the schema of a valid ERD; reports all validation errors
    /// otherwise.
    pub fn derive(erd: &Erd) -> Result<Schema, Vec<ValidationError>> {
        let errors = validate_erd(erd);
        if !errors.is_empty() {
            return Err(errors);
        }
        let shapes = classify_relationships(erd).map_err(|e| vec![e])?;
        let mut tables: Vec<Table> = erd
            .entities
            .iter()
            .map(|e| Table {
                entity: e.name.clone(),
                columns: e
                    .attributes
                    .iter()
                    .map(|a| Column {
                        name: a.name.clone(),
                        kind: a.domain.kind(),
                        nullable: a.null_allowed,
                        unique: a.key == crate::erd::KeyKind::Unique,
                    })
                    .collect(),
                foreign_keys: vec![],
            })
            .collect();
        let mut join_tables = vec![];
        for shape in &shapes {
            match shape {
                RelShape::OneToMany { .. } | RelShape::OneToOne { .. } => {
                    let (referenced, referencing) = shape.foreign_key_ends().expect("foreign key shape");
                    let max_per_target = match shape {
                        RelShape::OneToOne { .. } => Some(1),
                        _ => referencing.max,
                    };
                    let table = tables
                        .iter_mut()
                        .find(|t| t.entity == referencing.entity)
                        .expect("validated entity");
                    table.foreign_keys.push(ForeignKey {
                        column: String::new(),
                        relationship: shape.relationship().to_string(),
                        target: referenced.entity.clone(),
                        role: referenced.role.clone(),
                        required: referenced.min >= 1,
                        max_per_target,
                    });
                }
                RelShape::ManyToMany { relationship, a, b } => {
                    let (column_a, column_b) = if a.entity == b.entity {
                        (
                            format!("{}{}Key", a.entity, capitalize(&a.role)),
                            format!("{}{}Key", b.entity, capitalize(&b.role)),
                        )
                    } else {
                        (format!("{}Key", a.entity), format!("{}Key", b.entity))
                    };
                    join_tables.push(JoinTable {
                        name: relationship.clone(),
                        entity_a: a.entity.clone(),
                        entity_b: b.entity.clone(),
                        role_a: a.role.clone(),
                        role_b: b.role.clone(),
                        column_a,
                        column_b,
                        max_a: a.max,
                        max_b: b.max,
                    });
                }
            }
        }
        for table in &mut tables {
            name_foreign_keys(table);
        }
        Ok(Schema {
            name: erd.name.clone(),
            tables,
            join_tables,
        })
    }

    pub fn table(&self, entity: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.entity == entity)
    }

    pub fn table_index(&self, entity: &str) -> Option<usize> {
        self.tables.iter().position(|t| t.entity == entity)
    }

    pub fn join_index(&self, relationship: &str) -> Option<usize> {
        self.join_tables.iter().position(|j| j.name == relationship)
    }

    /// Many-to-many relationships in which `entity` is end A, in declaration
    /// order; these are the link lists accepted when creating `entity`.
    pub fn links_of(&self, entity: &str) -> Vec<&JoinTable> {
        self.join_tables.iter().filter(|j| j.entity_a == entity).collect()
    }
}

/// `<Target>Key`, or `<Target><Relationship>Key` when that name is already
/// taken by an attribute or another foreign key of the same table.
fn name_foreign_keys(table: &mut Table) {
    let attrs: HashSet<String> = table.columns.iter().map(|c| c.name.clone()).collect();
    let mut plain_count = std::collections::HashMap::new();
    for fk in &table.foreign_keys {
        *plain_count.entry(format!("{}Key", fk.target)).or_insert(0usize) += 1;
    }
    let mut taken = attrs.clone();
    taken.insert("key".to_string());
    for fk in &mut table.foreign_keys {
        let plain = format!("{}Key", fk.target);
        let name = if plain_count[&plain] == 1 && !taken.contains(&plain) {
            plain
        } else {
            format!("{}{}Key", fk.target, fk.relationship)
        };
        taken.insert(name.clone());
        fk.column = name;
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}
