//! In-memory tables and the constraint-checked mutations on them.

use std::collections::{BTreeMap, BTreeSet};

use super::query::Query;
use super::schema::{JoinTable, Schema};
use super::value::{EntityValue, Value};
use super::TxError;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Row {
    pub attrs: Vec<Value>,
    pub refs: Vec<Option<u64>>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct TableState {
    /// Last key handed out; keys start at 1.
    pub last_key: u64,
    pub rows: BTreeMap<u64, Row>,
}

/// Contents of all tables.
#[doc(hidden)]
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub(crate) tables: Vec<TableState>,
    /// Per join table, `(a key, b key)` pairs.
    pub(crate) joins: Vec<BTreeSet<(u64, u64)>>,
}

impl State {
    pub(crate) fn empty(schema: &Schema) -> State {
        State {
            tables: vec![TableState::default(); schema.tables.len()],
            joins: vec![BTreeSet::new(); schema.join_tables.len()],
        }
    }

    pub(crate) fn apply(&mut self, m: &Mutation) {
        match m {
            Mutation::Put { table, key, row } => {
                let t = &mut self.tables[*table];
                t.rows.insert(*key, row.clone());
                t.last_key = t.last_key.max(*key);
            }
            Mutation::Delete { table, key } => {
                self.tables[*table].rows.remove(key);
            }
            Mutation::Link { join, a, b } => {
                self.joins[*join].insert((*a, *b));
            }
            Mutation::Unlink { join, a, b } => {
                self.joins[*join].remove(&(*a, *b));
            }
        }
    }
}

/// Primitive change recorded in the journal.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Mutation {
    Put { table: usize, key: u64, row: Row },
    Delete { table: usize, key: u64 },
    Link { join: usize, a: u64, b: u64 },
    Unlink { join: usize, a: u64, b: u64 },
}

/// Read access shared by snapshots and open transactions.
pub trait Reader {
    #[doc(hidden)]
    fn parts(&self) -> (&Schema, &State);

    fn schema(&self) -> &Schema {
        self.parts().0
    }

    fn get(&self, entity: &str, key: u64) -> Option<EntityValue> {
        let (schema, state) = self.parts();
        let t = schema.table_index(entity)?;
        state.tables[t].rows.get(&key).map(|row| entity_value(entity, key, row))
    }

    /// All instances of `entity` in ascending key order.
    fn all(&self, entity: &str) -> Vec<EntityValue> {
        self.run_query(&Query::all(entity))
    }

    fn count(&self, entity: &str) -> usize {
        let (schema, state) = self.parts();
        schema.table_index(entity).map_or(0, |t| state.tables[t].rows.len())
    }

    /// B keys linked to `a` through the join table of `relationship`.
    fn linked(&self, relationship: &str, a: u64) -> Vec<u64> {
        let (schema, state) = self.parts();
        let Some(j) = schema.join_index(relationship) else {
            return vec![];
        };
        state.joins[j].range((a, 0)..=(a, u64::MAX)).map(|&(_, b)| b).collect()
    }

    /// A keys linked to `b` through the join table of `relationship`.
    fn linked_to(&self, relationship: &str, b: u64) -> Vec<u64> {
        let (schema, state) = self.parts();
        let Some(j) = schema.join_index(relationship) else {
            return vec![];
        };
        state.joins[j]
            .iter()
            .filter(|&&(_, y)| y == b)
            .map(|&(a, _)| a)
            .collect()
    }

    /// All `(a, b)` pairs of a join table.
    fn links(&self, relationship: &str) -> Vec<(u64, u64)> {
        let (schema, state) = self.parts();
        schema
            .join_index(relationship)
            .map_or_else(Vec::new, |j| state.joins[j].iter().copied().collect())
    }

    fn run_query(&self, q: &Query) -> Vec<EntityValue> {
        let (schema, state) = self.parts();
        q.evaluate(schema, state)
    }
}

pub(crate) fn entity_value(entity: &str, key: u64, row: &Row) -> EntityValue {
    EntityValue {
        entity: entity.to_string(),
        key,
        attrs: row.attrs.clone(),
        refs: row.refs.clone(),
    }
}

/// Working copy of the database inside one transaction.
///
/// Each operation checks all constraints before touching the working copy,
/// so a failed operation leaves it unchanged.
pub struct Tx<'a> {
    pub(crate) schema: &'a Schema,
    pub(crate) state: State,
    pub(crate) log: Vec<Mutation>,
}

impl Reader for Tx<'_> {
    fn parts(&self) -> (&Schema, &State) {
        (self.schema, &self.state)
    }
}

impl<'a> Tx<'a> {
    pub(crate) fn new(schema: &'a Schema, state: State) -> Self {
        Tx {
            schema,
            state,
            log: vec![],
        }
    }

    fn record(&mut self, m: Mutation) {
        self.state.apply(&m);
        self.log.push(m);
    }

    fn table_index(&self, entity: &str) -> Result<usize, TxError> {
        self.schema
            .table_index(entity)
            .ok_or_else(|| TxError::UnknownEntity(entity.to_string()))
    }

    fn join_index(&self, relationship: &str) -> Result<usize, TxError> {
        self.schema
            .join_index(relationship)
            .ok_or_else(|| TxError::UnknownRelationship(relationship.to_string()))
    }

    fn check_row(&self, t: usize, key: Option<u64>, row: &Row) -> Result<(), TxError> {
        let table = &self.schema.tables[t];
        let entity = &table.entity;
        if row.attrs.len() != table.columns.len() || row.refs.len() != table.foreign_keys.len() {
            return Err(TxError::Arity {
                entity: entity.clone(),
                expected: table.columns.len() + table.foreign_keys.len(),
                found: row.attrs.len() + row.refs.len(),
            });
        }
        for (col, v) in table.columns.iter().zip(&row.attrs) {
            match v.kind() {
                None if !col.nullable => {
                    return Err(TxError::MissingValue {
                        entity: entity.clone(),
                        attribute: col.name.clone(),
                    })
                }
                Some(k) if k != col.kind => {
                    return Err(TxError::TypeMismatch {
                        entity: entity.clone(),
                        attribute: col.name.clone(),
                        expected: col.kind,
                    })
                }
                _ => {}
            }
        }
        for (fk, r) in table.foreign_keys.iter().zip(&row.refs) {
            match r {
                None if fk.required => {
                    return Err(TxError::MissingReference {
                        entity: fk.target.clone(),
                        relationship: fk.relationship.clone(),
                    })
                }
                Some(k) => self.check_exists(&fk.target, *k)?,
                None => {}
            }
        }
        let others = || self.state.tables[t].rows.iter().filter(move |(k, _)| Some(**k) != key);
        for (i, col) in table.columns.iter().enumerate() {
            let v = &row.attrs[i];
            if col.unique && !v.is_null() && others().any(|(_, r)| r.attrs[i] == *v) {
                return Err(TxError::UniqueViolation {
                    entity: entity.clone(),
                    attribute: col.name.clone(),
                });
            }
        }
        for (i, fk) in table.foreign_keys.iter().enumerate() {
            let (Some(target), Some(max)) = (row.refs[i], fk.max_per_target) else {
                continue;
            };
            let existing = others().filter(|(_, r)| r.refs[i] == Some(target)).count() as u64;
            if existing + 1 > max {
                return Err(TxError::CardinalityExceeded {
                    relationship: fk.relationship.clone(),
                    entity: fk.target.clone(),
                    key: target,
                    max,
                });
            }
        }
        Ok(())
    }

    fn check_exists(&self, entity: &str, key: u64) -> Result<(), TxError> {
        let t = self.table_index(entity)?;
        if self.state.tables[t].rows.contains_key(&key) {
            Ok(())
        } else {
            Err(TxError::DanglingKey {
                entity: entity.to_string(),
                key,
            })
        }
    }

    /// Validates replacing the B side of `a`'s links with `bs`.
    fn check_links(&self, j: usize, a: u64, bs: &BTreeSet<u64>) -> Result<(), TxError> {
        let jt: &JoinTable = &self.schema.join_tables[j];
        for &b in bs {
            self.check_exists(&jt.entity_b, b)?;
        }
        let exceeded = |entity: &str, key: u64, max: u64| TxError::CardinalityExceeded {
            relationship: jt.name.clone(),
            entity: entity.to_string(),
            key,
            max,
        };
        if let Some(max) = jt.max_b {
            if bs.len() as u64 > max {
                return Err(exceeded(&jt.entity_a, a, max));
            }
        }
        if let Some(max) = jt.max_a {
            for &b in bs {
                let others = self.state.joins[j].iter().filter(|&&(x, y)| y == b && x != a).count() as u64;
                if others + 1 > max {
                    return Err(exceeded(&jt.entity_b, b, max));
                }
            }
        }
        Ok(())
    }

    fn replace_links(&mut self, j: usize, a: u64, bs: &BTreeSet<u64>) {
        let current: Vec<u64> = self.state.joins[j]
            .range((a, 0)..=(a, u64::MAX))
            .map(|&(_, b)| b)
            .collect();
        for b in current.iter().filter(|b| !bs.contains(b)) {
            self.record(Mutation::Unlink { join: j, a, b: *b });
        }
        for &b in bs {
            if !current.contains(&b) {
                self.record(Mutation::Link { join: j, a, b });
            }
        }
    }

    /// Inserts a new instance of `entity`.
    ///
    /// `refs` holds one key per foreign key of the entity's table, `links` one
    /// key list per many-to-many relationship in which the entity is end A
    /// (see [`Schema::links_of`]).
    pub fn new_entity(
        &mut self,
        entity: &str,
        attrs: Vec<Value>,
        refs: Vec<Option<u64>>,
        links: Vec<Vec<u64>>,
    ) -> Result<EntityValue, TxError> {
        let t = self.table_index(entity)?;
        let row = Row { attrs, refs };
        self.check_row(t, None, &row)?;
        let link_tables: Vec<usize> = self
            .schema
            .links_of(entity)
            .iter()
            .map(|jt| self.schema.join_index(&jt.name).expect("listed join table"))
            .collect();
        if links.len() != link_tables.len() {
            return Err(TxError::Arity {
                entity: entity.to_string(),
                expected: link_tables.len(),
                found: links.len(),
            });
        }
        let key = self.state.tables[t].last_key + 1;
        let link_sets: Vec<BTreeSet<u64>> = links.into_iter().map(|l| l.into_iter().collect()).collect();
        for (j, bs) in link_tables.iter().zip(&link_sets) {
            self.check_links(*j, key, bs)?;
        }
        let value = entity_value(entity, key, &row);
        self.record(Mutation::Put { table: t, key, row });
        for (j, bs) in link_tables.iter().zip(&link_sets) {
            self.replace_links(*j, key, bs);
        }
        Ok(value)
    }

    /// Replaces attributes and references of an existing instance.
    pub fn update_entity(&mut self, value: &EntityValue) -> Result<(), TxError> {
        let t = self.table_index(&value.entity)?;
        if !self.state.tables[t].rows.contains_key(&value.key) {
            return Err(TxError::UnknownKey {
                entity: value.entity.clone(),
                key: value.key,
            });
        }
        let row = Row {
            attrs: value.attrs.clone(),
            refs: value.refs.clone(),
        };
        self.check_row(t, Some(value.key), &row)?;
        self.record(Mutation::Put {
            table: t,
            key: value.key,
            row,
        });
        Ok(())
    }

    /// Removes an instance and its join-table rows.
    ///
    /// Fails if another instance references it through a required foreign
    /// key; optional references to it are cleared.
    pub fn delete_entity(&mut self, entity: &str, key: u64) -> Result<(), TxError> {
        let t = self.table_index(entity)?;
        if !self.state.tables[t].rows.contains_key(&key) {
            return Err(TxError::UnknownKey {
                entity: entity.to_string(),
                key,
            });
        }
        let mut cleared = vec![];
        for (ti, table) in self.schema.tables.iter().enumerate() {
            for (fi, fk) in table.foreign_keys.iter().enumerate() {
                if fk.target != entity {
                    continue;
                }
                let referencing: Vec<u64> = self.state.tables[ti]
                    .rows
                    .iter()
                    .filter(|(k, r)| r.refs[fi] == Some(key) && !(ti == t && **k == key))
                    .map(|(k, _)| *k)
                    .collect();
                if referencing.is_empty() {
                    continue;
                }
                if fk.required {
                    return Err(TxError::StillReferenced {
                        count: referencing.len(),
                        entity: table.entity.clone(),
                    });
                }
                cleared.extend(referencing.into_iter().map(|k| (ti, fi, k)));
            }
        }
        for (ti, fi, k) in cleared {
            let mut row = self.state.tables[ti].rows[&k].clone();
            row.refs[fi] = None;
            self.record(Mutation::Put { table: ti, key: k, row });
        }
        for (j, jt) in self.schema.join_tables.iter().enumerate() {
            let pairs: Vec<(u64, u64)> = self.state.joins[j]
                .iter()
                .filter(|&&(a, b)| (jt.entity_a == entity && a == key) || (jt.entity_b == entity && b == key))
                .copied()
                .collect();
            for (a, b) in pairs {
                self.record(Mutation::Unlink { join: j, a, b });
            }
        }
        self.record(Mutation::Delete { table: t, key });
        Ok(())
    }

    /// Makes `bs` exactly the set of B instances linked to `a`.
    pub fn set_links(&mut self, relationship: &str, a: u64, bs: &[u64]) -> Result<(), TxError> {
        let j = self.join_index(relationship)?;
        let entity_a = self.schema.join_tables[j].entity_a.clone();
        self.check_exists(&entity_a, a)?;
        let set: BTreeSet<u64> = bs.iter().copied().collect();
        self.check_links(j, a, &set)?;
        self.replace_links(j, a, &set);
        Ok(())
    }

    pub fn link(&mut self, relationship: &str, a: u64, b: u64) -> Result<(), TxError> {
        let mut bs = self.linked(relationship, a);
        bs.push(b);
        self.set_links(relationship, a, &bs)
    }

    pub fn unlink(&mut self, relationship: &str, a: u64, b: u64) -> Result<(), TxError> {
        let bs: Vec<u64> = self.linked(relationship, a).into_iter().filter(|&x| x != b).collect();
        self.set_links(relationship, a, &bs)
    }
}
