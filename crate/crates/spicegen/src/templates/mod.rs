//! Source text of the generated application.

mod app;
mod controller;
mod model;
mod view;

use spicey::calendar;
use spicey::erd::{Domain, DomainKind};

use crate::names::lit;
use crate::plan::{AttrPlan, EntityPlan};

pub use app::{
    authorization, build_script, cargo_toml, controller_reference, main_rs, mod_rs, readme, routes, run_script,
    style_css, system, user_processes,
};
pub use controller::controller_unit;
pub use model::model_unit;
pub use view::{html_unit, view_unit};

/// Replaces every `@name@` in `template` with its value.
pub(crate) fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (name, value) in vars {
        out = out.replace(&format!("@{name}@"), value);
    }
    debug_assert!(
        !out.contains("@ty@") && !out.contains("@stem@"),
        "unfilled placeholder in template"
    );
    out
}

/// Placeholders shared by all per-entity templates.
pub(crate) fn entity_vars(e: &EntityPlan) -> Vec<(&'static str, String)> {
    vec![
        ("Name", e.name.clone()),
        ("name_lit", lit(&e.name)),
        ("ty", e.ty.clone()),
        ("key_ty", e.key_ty.clone()),
        ("form_ty", e.form_ty.clone()),
        ("stem", e.stem.clone()),
        ("model", e.model_mod()),
        ("view", e.view_mod()),
        ("html", e.html_mod()),
        ("labels_const", format!("{}_LABELS", e.stem.to_ascii_uppercase())),
    ]
}

pub(crate) fn fill_entity(template: &str, e: &EntityPlan, extra: &[(&str, String)]) -> String {
    let vars: Vec<(&str, String)> = entity_vars(e).into_iter().chain(extra.iter().cloned()).collect();
    let refs: Vec<(&str, &str)> = vars.iter().map(|(k, v)| (*k, v.as_str())).collect();
    fill(template, &refs)
}

pub(crate) fn base_type(kind: DomainKind) -> &'static str {
    match kind {
        DomainKind::Int => "i64",
        DomainKind::Float => "f64",
        DomainKind::Bool => "bool",
        DomainKind::String => "String",
        DomainKind::Date => "sp::calendar::CalendarTime",
    }
}

pub(crate) fn attr_type(a: &AttrPlan) -> String {
    if a.nullable {
        format!("Option<{}>", base_type(a.kind()))
    } else {
        base_type(a.kind()).to_string()
    }
}

fn float_lit(f: f64) -> String {
    if f.is_nan() {
        return "f64::NAN".to_string();
    }
    if f.is_infinite() {
        return if f > 0.0 { "f64::INFINITY" } else { "f64::NEG_INFINITY" }.to_string();
    }
    let s = format!("{f:?}");
    if s.contains('.') || s.contains('e') {
        s
    } else {
        format!("{s}.0")
    }
}

/// Value of the attribute's base type used when the form starts empty.
pub(crate) fn default_expr(d: &Domain) -> String {
    match d {
        Domain::Int(v) => v.unwrap_or(0).to_string(),
        Domain::Float(v) => float_lit(v.unwrap_or(0.0)),
        Domain::Bool(v) => v.unwrap_or(false).to_string(),
        Domain::String(v) => match v {
            Some(s) => format!("{}.to_string()", lit(s)),
            None => "String::new()".to_string(),
        },
        Domain::Date(Some(t)) => format!(
            "sp::calendar::from_epoch_seconds({}).unwrap_or_default()",
            calendar::to_epoch_seconds(t)
        ),
        Domain::Date(None) => "sp::calendar::now()".to_string(),
    }
}

/// Initial form value of an attribute.
pub(crate) fn initial_expr(a: &AttrPlan) -> String {
    if a.nullable {
        if a.domain.has_default() {
            format!("Some({})", default_expr(&a.domain))
        } else {
            "None".to_string()
        }
    } else {
        default_expr(&a.domain)
    }
}
