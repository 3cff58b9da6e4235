use crate::plan::{EntityPlan, GenPlan};

use super::model::new_fn;
use super::view::choice_params;
use super::{fill_entity, initial_expr};

fn model_path(plan: &GenPlan, target: usize) -> String {
    format!("crate::models::{}", plan.entities[target].model_mod())
}

fn short_view_path(plan: &GenPlan, target: usize) -> String {
    let t = &plan.entities[target];
    format!("crate::views::{}::{}_short_view", t.html_mod(), t.stem)
}

const CONTROLLER: &str = r#"//! Controllers of `@Name@`. Each one checks the access policy first.

use spicey as sp;
use sp::auth::{check_authorization, AccessResult, AccessType};
use sp::persistence::Reader;
use sp::runtime::{display_error, Controller, RequestContext};

use crate::config::authorization::@stem@_operation_allowed;
use crate::models::@model@::{self as model, @ty@};
use crate::views::@view@::{self as view, @form_ty@};

fn policy(at: AccessType<@ty@>) -> impl Fn(&RequestContext) -> AccessResult + Send + Sync + 'static {
    move |ctx| @stem@_operation_allowed(ctx, &at)
}

/// Texts of the instances referenced by or linked to `c`, in label order.
fn related(db_: &impl Reader, c: &@ty@) -> Vec<String> {
    @related@
}

/// Lists all instances.
pub fn list_@stem@_controller() -> Controller {
    check_authorization(
        policy(AccessType::ListEntities),
        Controller::new(|ctx| {
            let db_ = ctx.db().snapshot();
            let rows = model::query_all_@stem@(&db_)
                .into_iter()
                .map(|c| {
                    let r = related(&db_, &c);
                    (c, r)
                })
                .collect();
            view::list_@stem@_view(
                ctx,
                rows,
                show_@stem@_controller,
                edit_@stem@_controller,
                delete_@stem@_controller,
            )
        }),
    )
}

/// Shows the form for a new instance.
pub fn new_@stem@_controller() -> Controller {
    check_authorization(
        policy(AccessType::NewEntity),
        Controller::new(|ctx| {
@new_loads@@require_choices@            let initial = @form_ty@ {
@initial@            };
            view::create_@stem@_view(ctx, initial, @choice_args@create_@stem@_controller)
        }),
    )
}

/// Stores a new instance, then continues the active process or lists all
/// instances.
pub fn create_@stem@_controller(form: @form_ty@) -> Controller {
    check_authorization(
        policy(AccessType::NewEntity),
        Controller::new(move |ctx| {
            let f_ = &form;
            let t = model::@new_fn@(@new_args@);
            match ctx.db().run(t) {
                Ok(_) => {
                    ctx.set_page_message("@Name@ created");
                    sp::process::next_in_process_or(ctx, list_@stem@_controller(), None).run(ctx)
                }
                Err(e) => display_error(&e.to_string()).run(ctx),
            }
        }),
    )
}

pub fn show_@stem@_controller(c: @ty@) -> Controller {
    let key = c.key;
    check_authorization(
        policy(AccessType::ShowEntity(c)),
        Controller::new(move |ctx| {
            let db_ = ctx.db().snapshot();
            match model::get_@stem@(&db_, key) {
                Some(c) => view::show_@stem@_view(&c, &related(&db_, &c)),
                None => crate::system::gone_page("@Name@"),
            }
        }),
    )
}

/// Shows the form to change an instance.
pub fn edit_@stem@_controller(c: @ty@) -> Controller {
    let key = c.key;
    check_authorization(
        policy(AccessType::UpdateEntity(c)),
        Controller::new(move |ctx| {
            let db_ = ctx.db().snapshot();
            let Some(c) = model::get_@stem@(&db_, key) else {
                return crate::system::gone_page("@Name@");
            };
@load_choices@@current_selection@            let current = @form_ty@ {
@current@            };
            view::edit_@stem@_view(ctx, current, @choice_args@move |f| update_@stem@_controller(c.clone(), f))
        }),
    )
}

/// Stores the changed instance and lists all instances.
pub fn update_@stem@_controller(c: @ty@, form: @form_ty@) -> Controller {
    check_authorization(
        policy(AccessType::UpdateEntity(c.clone())),
        Controller::new(move |ctx| {
            let f_ = &form;
            let updated = @ty@ {
                key: c.key,
@updated@            };
            let t = model::update_@stem@(&updated)@set_links@;
            match ctx.db().run(t) {
                Ok(()) => {
                    ctx.set_page_message("@Name@ updated");
                    list_@stem@_controller().run(ctx)
                }
                Err(e) => display_error(&e.to_string()).run(ctx),
            }
        }),
    )
}

/// Asks for confirmation before deleting.
pub fn delete_@stem@_controller(c: @ty@) -> Controller {
    check_authorization(
        policy(AccessType::DeleteEntity(c.clone())),
        Controller::new(move |ctx| {
            view::confirm_delete_@stem@_view(
                ctx,
                &c,
                destroy_@stem@_controller(c.clone()),
                list_@stem@_controller(),
            )
        }),
    )
}

/// Deletes the instance if it still exists and reports the outcome on the
/// list page.
pub fn destroy_@stem@_controller(c: @ty@) -> Controller {
    let key = c.key;
    check_authorization(
        policy(AccessType::DeleteEntity(c)),
        Controller::new(move |ctx| {
            match ctx.db().run(model::delete_@stem@(key)) {
                Ok(()) => ctx.set_page_message("@Name@ deleted"),
                Err(e) => ctx.set_page_message(&e.to_string()),
            }
            list_@stem@_controller().run(ctx)
        }),
    )
}
"#;

pub fn controller_unit(plan: &GenPlan, e: &EntityPlan) -> String {
    let mut related = vec![];
    for fk in &e.fks {
        let m = model_path(plan, fk.target);
        let stem = &plan.entities[fk.target].stem;
        let show = short_view_path(plan, fk.target);
        let lookup = if fk.required {
            format!("{m}::get_{stem}(db_, c.{})", fk.key_field)
        } else {
            format!("c.{}.and_then(|k| {m}::get_{stem}(db_, k))", fk.key_field)
        };
        related.push(format!("{lookup}.map(|t| {show}(&t)).unwrap_or_default()"));
    }
    for l in &e.links {
        let m = model_path(plan, l.target);
        let stem = &plan.entities[l.target].stem;
        let show = short_view_path(plan, l.target);
        related.push(format!(
            "model::{}_targets(db_, c.key)\n            .into_iter()\n            .filter_map(|k| {m}::get_{stem}(db_, k))\n            .map(|t| {show}(&t))\n            .collect::<Vec<_>>()\n            .join(\", \")",
            l.stem
        ));
    }
    let related = if related.is_empty() {
        "let _ = (db_, c);\n    vec![]".to_string()
    } else {
        format!("vec![\n        {},\n    ]", related.join(",\n        "))
    };

    let mut load_choices = String::new();
    for ((name, _), target) in choice_params(plan, e)
        .iter()
        .zip(e.fks.iter().map(|f| f.target).chain(e.links.iter().map(|l| l.target)))
    {
        let m = model_path(plan, target);
        let stem = &plan.entities[target].stem;
        load_choices.push_str(&format!(
            "            let mut {name} = {m}::query_all_{stem}(&db_);\n            {name}.sort_by({m}::cmp_{stem});\n"
        ));
    }
    let mut require_choices = String::new();
    let mut initial = String::new();
    let mut current_selection = String::new();
    let mut current = String::new();
    let mut updated = String::new();
    let mut new_args = vec![];
    for a in &e.attrs {
        initial.push_str(&format!("                {}: {},\n", a.field, initial_expr(a)));
        current.push_str(&format!("                {}: c.{}.clone(),\n", a.field, a.field));
        updated.push_str(&format!("                {}: f_.{}.clone(),\n", a.field, a.field));
        new_args.push(format!("f_.{}.clone()", a.field));
    }
    for fk in &e.fks {
        let ff = &fk.form_field;
        let target = &plan.entities[fk.target];
        if fk.required {
            require_choices.push_str(&format!(
                "            let Some({ff}) = {ff}_choices.first().cloned() else {{\n                return crate::system::missing_choice_page(\"{}\", \"{}\");\n            }};\n",
                e.name, target.name
            ));
            initial.push_str(&format!("                {ff},\n"));
            current_selection.push_str(&format!(
                "            let Some({ff}) = {ff}_choices.iter().find(|t| t.key == c.{}).cloned() else {{\n                return crate::system::gone_page(\"{}\");\n            }};\n",
                fk.key_field, target.name
            ));
            current.push_str(&format!("                {ff},\n"));
            updated.push_str(&format!("                {}: f_.{ff}.key,\n", fk.key_field));
            new_args.push(format!("f_.{ff}.key"));
        } else {
            initial.push_str(&format!("                {ff}: None,\n"));
            current_selection.push_str(&format!(
                "            let {ff} = c.{}.and_then(|k| {ff}_choices.iter().find(|t| t.key == k).cloned());\n",
                fk.key_field
            ));
            current.push_str(&format!("                {ff},\n"));
            updated.push_str(&format!(
                "                {}: f_.{ff}.as_ref().map(|t| t.key),\n",
                fk.key_field
            ));
            new_args.push(format!("f_.{ff}.as_ref().map(|t| t.key)"));
        }
    }
    let mut set_links = String::new();
    for l in &e.links {
        let ff = &l.form_field;
        initial.push_str(&format!("                {ff}: vec![],\n"));
        current_selection.push_str(&format!(
            "            let linked = model::{}_targets(&db_, c.key);\n            let {ff} = {ff}_choices.iter().filter(|t| linked.contains(&t.key)).cloned().collect();\n",
            l.stem
        ));
        current.push_str(&format!("                {ff},\n"));
        let keys = format!("f_.{ff}.iter().map(|t| t.key).collect()");
        set_links.push_str(&format!(
            "\n                .then(model::set_{}_links(c.key, {keys}))",
            l.stem
        ));
        new_args.push(keys);
    }
    let new_loads = if load_choices.is_empty() {
        String::new()
    } else {
        format!("            let db_ = ctx.db().snapshot();\n{load_choices}")
    };
    let choice_args: String = choice_params(plan, e).iter().map(|(n, _)| format!("{n}, ")).collect();
    fill_entity(
        CONTROLLER,
        e,
        &[
            ("related", related),
            ("new_loads", new_loads),
            ("load_choices", load_choices),
            ("require_choices", require_choices),
            ("initial", initial),
            ("current_selection", current_selection),
            ("current", current),
            ("updated", updated),
            ("new_fn", new_fn(e)),
            ("new_args", new_args.join(", ")),
            ("set_links", set_links),
            ("choice_args", choice_args),
        ],
    )
}
