//! What gets generated for a validated ERD, with every name fixed.

use std::collections::HashSet;
use std::path::PathBuf;

use spicey::erd::{Domain, DomainKind, Erd, KeyKind, ValidationError};
use spicey::persistence::Schema;

use crate::names::{entity_type, field, fresh, is_reserved_type, snake};

#[derive(Clone, Debug, PartialEq)]
pub struct AttrPlan {
    pub name: String,
    pub field: String,
    pub domain: Domain,
    pub nullable: bool,
    pub unique: bool,
}

impl AttrPlan {
    pub fn kind(&self) -> DomainKind {
        self.domain.kind()
    }
}

/// Foreign key held by the entity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FkPlan {
    pub relationship: String,
    /// Index of the referenced entity in [`GenPlan::entities`].
    pub target: usize,
    /// Role of the referenced end; used as form label.
    pub role: String,
    pub required: bool,
    /// Field holding the key, e.g. `entry_commenting_key`.
    pub key_field: String,
    /// Form field holding the selected entity, e.g. `entry_commenting`.
    pub form_field: String,
}

/// Many-to-many relationship where the entity is end A.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkPlan {
    pub relationship: String,
    /// Index of the end-B entity.
    pub target: usize,
    /// Role of end B; used as form label.
    pub role: String,
    /// Snake-case relationship name used in function names.
    pub stem: String,
    pub form_field: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntityPlan {
    pub name: String,
    pub ty: String,
    pub key_ty: String,
    pub form_ty: String,
    /// Snake-case stem of function and module names.
    pub stem: String,
    pub attrs: Vec<AttrPlan>,
    pub fks: Vec<FkPlan>,
    pub links: Vec<LinkPlan>,
    /// Many-to-many relationships where the entity is end B, as
    /// `(entity index of end A, link index there)`.
    pub linked_from: Vec<(usize, usize)>,
}

impl EntityPlan {
    /// Attribute names, then the roles of referenced ends, then the roles of
    /// linked ends.
    pub fn labels(&self) -> Vec<String> {
        self.attrs
            .iter()
            .map(|a| a.name.clone())
            .chain(self.fks.iter().map(|f| f.role.clone()))
            .chain(self.links.iter().map(|l| l.role.clone()))
            .collect()
    }

    /// Number of form components: attributes, foreign keys and links.
    pub fn form_arity(&self) -> usize {
        self.attrs.len() + self.fks.len() + self.links.len()
    }

    /// Attribute shown when an instance is referenced elsewhere.
    pub fn short_attr(&self) -> Option<usize> {
        self.attrs.iter().position(|a| a.unique)
    }

    pub fn model_mod(&self) -> String {
        format!("{}_model", self.stem)
    }

    pub fn view_mod(&self) -> String {
        format!("{}_view", self.stem)
    }

    pub fn html_mod(&self) -> String {
        format!("{}_html", self.stem)
    }

    pub fn controller_mod(&self) -> String {
        format!("{}_controller", self.stem)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenPlan {
    pub erd_name: String,
    pub crate_name: String,
    pub entities: Vec<EntityPlan>,
    /// Whether the tag-and-entry example process fits this model.
    pub tag_and_entry: bool,
}

const RESERVED_CRATES: &[&str] = &["alloc", "core", "proc_macro", "spicey", "std", "test"];

impl GenPlan {
    pub fn new(erd: &Erd) -> Result<GenPlan, Vec<ValidationError>> {
        let schema = Schema::derive(erd)?;
        let mut types: HashSet<String> = HashSet::new();
        let mut stems: HashSet<String> = HashSet::new();
        let index_of = |name: &str| {
            erd.entities
                .iter()
                .position(|e| e.name == name)
                .expect("validated model")
        };
        let mut entities: Vec<EntityPlan> = erd
            .entities
            .iter()
            .map(|e| {
                let mut ty = entity_type(&e.name);
                while [ty.clone(), format!("{ty}Key"), format!("{ty}Form")]
                    .iter()
                    .any(|n| types.contains(n) || is_reserved_type(n))
                {
                    ty = format!("Ent{ty}");
                }
                types.extend([ty.clone(), format!("{ty}Key"), format!("{ty}Form")]);
                let mut fields: HashSet<String> = ["key".to_string()].into();
                let attrs = e
                    .attributes
                    .iter()
                    .map(|a| AttrPlan {
                        name: a.name.clone(),
                        field: fresh(field(&a.name), &mut fields),
                        domain: a.domain.clone(),
                        nullable: a.null_allowed,
                        unique: a.key == KeyKind::Unique,
                    })
                    .collect();
                let table = schema.table(&e.name).expect("one table per entity");
                let mut form_fields = fields.clone();
                let fks = table
                    .foreign_keys
                    .iter()
                    .map(|fk| {
                        let base = format!("{}_{}", snake(&fk.target), snake(&fk.relationship));
                        FkPlan {
                            relationship: fk.relationship.clone(),
                            target: index_of(&fk.target),
                            role: fk.role.clone(),
                            required: fk.required,
                            key_field: fresh(format!("{base}_key"), &mut fields),
                            form_field: fresh(base, &mut form_fields),
                        }
                    })
                    .collect();
                let links = schema
                    .links_of(&e.name)
                    .into_iter()
                    .map(|j| LinkPlan {
                        relationship: j.name.clone(),
                        target: index_of(&j.entity_b),
                        role: j.role_b.clone(),
                        stem: snake(&j.name),
                        form_field: fresh(field(&j.name), &mut form_fields),
                    })
                    .collect();
                EntityPlan {
                    name: e.name.clone(),
                    key_ty: format!("{ty}Key"),
                    form_ty: format!("{ty}Form"),
                    ty,
                    stem: fresh(snake(&e.name), &mut stems),
                    attrs,
                    fks,
                    links,
                    linked_from: vec![],
                }
            })
            .collect();
        for a in 0..entities.len() {
            for l in 0..entities[a].links.len() {
                let b = entities[a].links[l].target;
                entities[b].linked_from.push((a, l));
            }
        }
        let mut crate_name = snake(&erd.name);
        if RESERVED_CRATES.contains(&crate_name.as_str()) {
            crate_name.push_str("_app");
        }
        let tag_and_entry = erd.name == "Blog"
            && ["Entry", "Tag"]
                .iter()
                .all(|n| erd.entities.iter().any(|e| &e.name == n));
        Ok(GenPlan {
            erd_name: erd.name.clone(),
            crate_name,
            entities,
            tag_and_entry,
        })
    }

    pub fn entity(&self, name: &str) -> Option<&EntityPlan> {
        self.entities.iter().find(|e| e.name == name)
    }

    /// Every output path, in generation order.
    pub fn output_paths(&self) -> Vec<PathBuf> {
        let mut paths: Vec<PathBuf> = [
            "Cargo.toml",
            "README.md",
            "src/main.rs",
            "src/models/mod.rs",
            "src/views/mod.rs",
            "src/controllers/mod.rs",
            "src/config/mod.rs",
            "src/config/controller_reference.rs",
            "src/config/routes.rs",
            "src/config/authorization.rs",
            "src/config/user_processes.rs",
            "src/system/mod.rs",
            "scripts/build.sh",
            "scripts/run.sh",
            "public/style.css",
        ]
        .iter()
        .map(PathBuf::from)
        .collect();
        paths.push(PathBuf::from(self.erd_file()));
        for e in &self.entities {
            paths.push(PathBuf::from(format!("src/models/{}.rs", e.model_mod())));
            paths.push(PathBuf::from(format!("src/views/{}.rs", e.view_mod())));
            paths.push(PathBuf::from(format!("src/views/{}.rs", e.html_mod())));
            paths.push(PathBuf::from(format!("src/controllers/{}.rs", e.controller_mod())));
        }
        paths
    }

    /// Copy of the model in the generated tree.
    pub fn erd_file(&self) -> String {
        format!("{}.erdterm", self.erd_name)
    }
}
