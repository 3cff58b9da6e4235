//! Composable read-only queries.

use std::fmt;
use std::sync::Arc;

use super::schema::Schema;
use super::state::{entity_value, State};
use super::value::{EntityValue, Value};

#[derive(Clone, Debug)]
enum Source {
    All,
    Key(u64),
    /// Instances related to `key` (of the other end) via `relationship`.
    Related {
        relationship: String,
        key: u64,
    },
}

type Predicate = Arc<dyn Fn(&EntityValue) -> bool + Send + Sync>;

/// Description of a set of instances of one entity.
///
/// Results come back in ascending key order.
#[derive(Clone)]
pub struct Query {
    entity: String,
    source: Source,
    filters: Vec<Predicate>,
}

impl fmt::Debug for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Query")
            .field("entity", &self.entity)
            .field("source", &self.source)
            .field("filters", &self.filters.len())
            .finish()
    }
}

impl Query {
    pub fn all(entity: &str) -> Query {
        Query {
            entity: entity.to_string(),
            source: Source::All,
            filters: vec![],
        }
    }

    pub fn by_key(entity: &str, key: u64) -> Query {
        Query {
            source: Source::Key(key),
            ..Query::all(entity)
        }
    }

    /// Instances of `entity` related to instance `key` of the other end of
    /// `relationship`.
    pub fn related(entity: &str, relationship: &str, key: u64) -> Query {
        Query {
            source: Source::Related {
                relationship: relationship.to_string(),
                key,
            },
            ..Query::all(entity)
        }
    }

    pub fn filter(mut self, p: impl Fn(&EntityValue) -> bool + Send + Sync + 'static) -> Query {
        self.filters.push(Arc::new(p));
        self
    }

    /// Keeps instances whose attribute `index` equals `value`.
    pub fn attr_eq(self, index: usize, value: Value) -> Query {
        self.filter(move |e| e.attrs.get(index) == Some(&value))
    }

    pub(crate) fn evaluate(&self, schema: &Schema, state: &State) -> Vec<EntityValue> {
        let Some(t) = schema.table_index(&self.entity) else {
            return vec![];
        };
        let rows = &state.tables[t].rows;
        let keys: Vec<u64> = match &self.source {
            Source::All => rows.keys().copied().collect(),
            Source::Key(k) => rows.contains_key(k).then_some(*k).into_iter().collect(),
            Source::Related { relationship, key } => related_keys(schema, state, t, relationship, *key),
        };
        keys.into_iter()
            .filter_map(|k| rows.get(&k).map(|r| entity_value(&self.entity, k, r)))
            .filter(|e| self.filters.iter().all(|p| p(e)))
            .collect()
    }
}

fn related_keys(schema: &Schema, state: &State, t: usize, rel: &str, key: u64) -> Vec<u64> {
    let entity = &schema.tables[t].entity;
    if let Some(fi) = schema.tables[t].foreign_key_index(rel) {
        return state.tables[t]
            .rows
            .iter()
            .filter(|(_, r)| r.refs[fi] == Some(key))
            .map(|(k, _)| *k)
            .collect();
    }
    for (ti, table) in schema.tables.iter().enumerate() {
        if let Some(fi) = table.foreign_key_index(rel) {
            if table.foreign_keys[fi].target != *entity {
                return vec![];
            }
            return state.tables[ti]
                .rows
                .get(&key)
                .and_then(|r| r.refs[fi])
                .into_iter()
                .collect();
        }
    }
    if let Some(j) = schema.join_index(rel) {
        let jt = &schema.join_tables[j];
        let pairs = &state.joins[j];
        let mut out: Vec<u64> = if jt.entity_b == *entity {
            pairs.iter().filter(|p| p.0 == key).map(|p| p.1).collect()
        } else if jt.entity_a == *entity {
            pairs.iter().filter(|p| p.1 == key).map(|p| p.0).collect()
        } else {
            vec![]
        };
        out.sort_unstable();
        return out;
    }
    vec![]
}
