use crate::names::lit;
use crate::plan::{AttrPlan, EntityPlan, GenPlan};

use super::{attr_type, fill_entity};
use spicey::erd::DomainKind;

fn key_path(plan: &GenPlan, target: usize) -> String {
    let t = &plan.entities[target];
    format!("crate::models::{}::{}", t.model_mod(), t.key_ty)
}

fn read_attr(a: &AttrPlan, i: usize) -> String {
    let get = match a.kind() {
        DomainKind::Int => "as_int()",
        DomainKind::Float => "as_float()",
        DomainKind::Bool => "as_bool()",
        DomainKind::String => "as_str()",
        DomainKind::Date => "as_date()",
    };
    match (a.kind(), a.nullable) {
        (DomainKind::String, true) => format!("v.attrs[{i}].as_str().map(str::to_string)"),
        (DomainKind::String, false) => format!("v.attrs[{i}].as_str().unwrap_or_default().to_string()"),
        (_, true) => format!("v.attrs[{i}].{get}"),
        (_, false) => format!("v.attrs[{i}].{get}.unwrap_or_default()"),
    }
}

/// Name of the creation function: `new_<e>` followed by one
/// `_with_<key field>` per foreign key.
pub fn new_fn(e: &EntityPlan) -> String {
    let mut name = format!("new_{}", e.stem);
    for fk in &e.fks {
        name.push_str("_with_");
        name.push_str(&fk.key_field);
    }
    name
}

const HEADER: &str = r#"//! Typed access to stored `@Name@` instances.

use spicey as sp;
use sp::persistence::{EntityValue, Query, Reader, Transaction, Value};

pub const ENTITY: &str = @name_lit@;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct @key_ty@(pub u64);

impl std::fmt::Display for @key_ty@ {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct @ty@ {
    pub key: @key_ty@,
@fields@}

impl @ty@ {
    pub fn from_value(v: &EntityValue) -> @ty@ {
        @ty@ {
            key: @key_ty@(v.key),
@reads@        }
    }

    pub fn to_value(&self) -> EntityValue {
        EntityValue {
            entity: ENTITY.to_string(),
            key: self.key.0,
            attrs: vec![@writes@],
            refs: vec![@refs@],
        }
    }
}

/// Inserts a new `@Name@`.
pub fn @new_fn@(@params@) -> Transaction<@ty@> {
    Transaction::new(move |tx_| {
        let v_ = tx_.new_entity(
            ENTITY,
            vec![@new_attrs@],
            vec![@new_refs@],
            vec![@new_links@],
        )?;
        Ok(@ty@::from_value(&v_))
    })
}

/// Stores the attributes and references of `value`.
pub fn update_@stem@(value: &@ty@) -> Transaction<()> {
    let v_ = value.to_value();
    Transaction::new(move |tx_| tx_.update_entity(&v_))
}

/// Fails while other instances still reference this one.
pub fn delete_@stem@(key: @key_ty@) -> Transaction<()> {
    Transaction::new(move |tx_| tx_.delete_entity(ENTITY, key.0))
}

pub fn get_@stem@(db: &impl Reader, key: @key_ty@) -> Option<@ty@> {
    db.get(ENTITY, key.0).map(|v| @ty@::from_value(&v))
}

pub fn query_all_@stem@(db: &impl Reader) -> Vec<@ty@> {
    db.all(ENTITY).iter().map(@ty@::from_value).collect()
}

pub fn run_@stem@_query(db: &impl Reader, q: &Query) -> Vec<@ty@> {
    db.run_query(q).iter().map(@ty@::from_value).collect()
}

/// Order of list views: attributes in declaration order, then key.
pub fn cmp_@stem@(a: &@ty@, b: &@ty@) -> std::cmp::Ordering {
    a.to_value().cmp_attrs(&b.to_value())
}

pub fn leq_@stem@(a: &@ty@, b: &@ty@) -> bool {
    cmp_@stem@(a, b) != std::cmp::Ordering::Greater
}
"#;

const FK_QUERY: &str = r#"
/// Instances referencing `target` via @rel@.
pub fn query_@stem@_by_@fk@(db: &impl Reader, target: @target_key@) -> Vec<@ty@> {
    run_@stem@_query(db, &Query::related(ENTITY, @rel_lit@, target.0))
}
"#;

const LINKS: &str = r#"
/// `@target@` instances linked to `a` via @rel@.
pub fn @rel_stem@_targets(db: &impl Reader, a: @key_ty@) -> Vec<@target_key@> {
    db.linked(@rel_lit@, a.0).into_iter().map(@target_key@).collect()
}

/// `@Name@` instances linked to `b` via @rel@.
pub fn @rel_stem@_sources(db: &impl Reader, b: @target_key@) -> Vec<@key_ty@> {
    db.linked_to(@rel_lit@, b.0).into_iter().map(@key_ty@).collect()
}

/// Replaces the @rel@ links of `a` with `bs`.
pub fn set_@rel_stem@_links(a: @key_ty@, bs: Vec<@target_key@>) -> Transaction<()> {
    Transaction::new(move |tx_| {
        let bs: Vec<u64> = bs.iter().map(|k| k.0).collect();
        tx_.set_links(@rel_lit@, a.0, &bs)
    })
}

pub fn new_@rel_stem@_link(a: @key_ty@, b: @target_key@) -> Transaction<()> {
    Transaction::new(move |tx_| tx_.link(@rel_lit@, a.0, b.0))
}

pub fn delete_@rel_stem@_link(a: @key_ty@, b: @target_key@) -> Transaction<()> {
    Transaction::new(move |tx_| tx_.unlink(@rel_lit@, a.0, b.0))
}
"#;

pub fn model_unit(plan: &GenPlan, e: &EntityPlan) -> String {
    let mut fields = String::new();
    let mut reads = String::new();
    let mut params = vec![];
    for (i, a) in e.attrs.iter().enumerate() {
        fields.push_str(&format!("    pub {}: {},\n", a.field, attr_type(a)));
        reads.push_str(&format!("            {}: {},\n", a.field, read_attr(a, i)));
        params.push(format!("{}: {}", a.field, attr_type(a)));
    }
    let mut refs = vec![];
    let mut new_refs = vec![];
    for (i, fk) in e.fks.iter().enumerate() {
        let kp = key_path(plan, fk.target);
        if fk.required {
            fields.push_str(&format!("    pub {}: {kp},\n", fk.key_field));
            reads.push_str(&format!(
                "            {}: {kp}(v.refs[{i}].unwrap_or_default()),\n",
                fk.key_field
            ));
            refs.push(format!("Some(self.{}.0)", fk.key_field));
            new_refs.push(format!("Some({}.0)", fk.key_field));
            params.push(format!("{}: {kp}", fk.key_field));
        } else {
            fields.push_str(&format!("    pub {}: Option<{kp}>,\n", fk.key_field));
            reads.push_str(&format!("            {}: v.refs[{i}].map({kp}),\n", fk.key_field));
            refs.push(format!("self.{}.map(|k| k.0)", fk.key_field));
            new_refs.push(format!("{}.map(|k| k.0)", fk.key_field));
            params.push(format!("{}: Option<{kp}>", fk.key_field));
        }
    }
    let mut new_links = vec![];
    for l in &e.links {
        let kp = key_path(plan, l.target);
        params.push(format!("{}: Vec<{kp}>", l.form_field));
        new_links.push(format!("{}.iter().map(|k| k.0).collect()", l.form_field));
    }
    let writes: Vec<String> = e
        .attrs
        .iter()
        .map(|a| format!("Value::from(self.{}.clone())", a.field))
        .collect();
    let new_attrs: Vec<String> = e.attrs.iter().map(|a| format!("Value::from({})", a.field)).collect();
    let mut out = fill_entity(
        HEADER,
        e,
        &[
            ("fields", fields),
            ("reads", reads),
            ("writes", writes.join(", ")),
            ("refs", refs.join(", ")),
            ("new_fn", new_fn(e)),
            ("params", params.join(", ")),
            ("new_attrs", new_attrs.join(", ")),
            ("new_refs", new_refs.join(", ")),
            ("new_links", new_links.join(", ")),
        ],
    );
    for fk in &e.fks {
        out.push_str(&fill_entity(
            FK_QUERY,
            e,
            &[
                ("rel", fk.relationship.clone()),
                ("rel_lit", lit(&fk.relationship)),
                ("fk", fk.form_field.clone()),
                ("target_key", key_path(plan, fk.target)),
            ],
        ));
    }
    for l in &e.links {
        out.push_str(&fill_entity(
            LINKS,
            e,
            &[
                ("rel", l.relationship.clone()),
                ("rel_lit", lit(&l.relationship)),
                ("rel_stem", l.stem.clone()),
                ("target", plan.entities[l.target].name.clone()),
                ("target_key", key_path(plan, l.target)),
            ],
        ));
    }
    out
}
