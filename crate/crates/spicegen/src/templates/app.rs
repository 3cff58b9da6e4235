use crate::names::lit;
use crate::plan::GenPlan;

use super::fill;

pub fn cargo_toml(plan: &GenPlan, runtime: &str) -> String {
    fill(
        r#"[package]
name = "@crate@"
version = "0.1.0"
edition = "2021"
publish = false

[dependencies]
spicey = { path = @runtime@ }

# Standalone project, not part of an enclosing workspace.
[workspace]
"#,
        &[("crate", &plan.crate_name), ("runtime", &toml_string(runtime))],
    )
}

fn toml_string(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// `mod` declarations of a directory module.
pub fn mod_rs(doc: &str, mods: &[String]) -> String {
    let mut out = format!("//! {doc}\n\n");
    for m in mods {
        out.push_str(&format!("pub mod {m};\n"));
    }
    out
}

fn variants(plan: &GenPlan) -> Vec<(String, String)> {
    let mut v = vec![];
    for e in &plan.entities {
        v.push((
            format!("New{}Controller", e.name),
            format!(
                "crate::controllers::{}::new_{}_controller()",
                e.controller_mod(),
                e.stem
            ),
        ));
        v.push((
            format!("List{}Controller", e.name),
            format!(
                "crate::controllers::{}::list_{}_controller()",
                e.controller_mod(),
                e.stem
            ),
        ));
    }
    v.push(("LoginController".into(), "sp::auth::login_controller()".into()));
    v.push((
        "ProcessListController".into(),
        "sp::process::process_list_controller()".into(),
    ));
    v.push((
        "ErrorController".into(),
        "sp::runtime::display_error(\"no such page\")".into(),
    ));
    v
}

pub fn controller_reference(plan: &GenPlan) -> String {
    let mut out = String::from(
        "//! Names of the controllers reachable through the route table.\n\n#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]\npub enum ControllerReference {\n",
    );
    for (v, _) in variants(plan) {
        out.push_str(&format!("    {v},\n"));
    }
    out.push_str("}\n");
    out
}

pub fn routes(plan: &GenPlan) -> String {
    let mut rows = vec![];
    for e in &plan.entities {
        rows.push(format!(
            "Route::new({}, RouteMatcher::exact({}), ControllerReference::New{}Controller)",
            lit(&format!("new {}", e.name)),
            lit(&format!("new{}", e.name)),
            e.name
        ));
        rows.push(format!(
            "Route::new({}, RouteMatcher::exact({}), ControllerReference::List{}Controller)",
            lit(&format!("list {}", e.name)),
            lit(&format!("list{}", e.name)),
            e.name
        ));
    }
    rows.push(
        "Route::new(\"Processes\", RouteMatcher::exact(\"processes\"), ControllerReference::ProcessListController)"
            .into(),
    );
    rows.push("Route::new(\"Login\", RouteMatcher::exact(\"login\"), ControllerReference::LoginController)".into());
    rows.push(format!(
        "Route::new(\"default\", RouteMatcher::Always, ControllerReference::List{}Controller)",
        plan.entities[0].name
    ));
    fill(
        r#"//! Route table: the first route matching the first path segment wins.

use spicey as sp;
use sp::routing::{Route, RouteMatcher};
use sp::runtime::RequestContext;

use super::controller_reference::ControllerReference;

pub fn get_routes(_ctx: &RequestContext) -> Vec<Route<ControllerReference>> {
    vec![
        @rows@,
    ]
}
"#,
        &[("rows", &rows.join(",\n        "))],
    )
}

pub fn authorization(plan: &GenPlan) -> String {
    let mut out = String::from(
        "//! Access policies, one per entity. Everything is allowed until a policy\n//! says otherwise; `sp::auth::disallow_delete` is a ready-made alternative.\n\nuse spicey as sp;\nuse sp::auth::{AccessResult, AccessType};\nuse sp::runtime::RequestContext;\n",
    );
    for e in &plan.entities {
        out.push_str(&format!(
            "\npub fn {}_operation_allowed(_ctx: &RequestContext, _at: &AccessType<crate::models::{}::{}>) -> AccessResult {{\n    AccessResult::Granted\n}}\n",
            e.stem,
            e.model_mod(),
            e.ty
        ));
    }
    out
}

pub fn user_processes(plan: &GenPlan) -> String {
    if plan.tag_and_entry {
        return r#"//! Multi-step processes offered at /processes.

use spicey as sp;
use sp::process::Processes;

use super::controller_reference::ControllerReference;

/// Creates a tag, then an entry, then shows all tags.
pub fn user_processes() -> Processes<i64, ControllerReference> {
    Processes::new(
        vec![("Insert new tag and entry", 0)],
        |state| match state {
            0 => Some(ControllerReference::NewTagController),
            1 => Some(ControllerReference::NewEntryController),
            2 => Some(ControllerReference::ListTagController),
            _ => None,
        },
        |state, _result| match state {
            0 => Some(1),
            1 => Some(2),
            _ => None,
        },
    )
}
"#
        .to_string();
    }
    r#"//! Multi-step processes offered at /processes.
//!
//! A process maps integer states to controllers; the transition function
//! gives the state following each one. Controllers that finish a step call
//! `sp::process::next_in_process_or`.

use spicey as sp;
use sp::process::Processes;

use super::controller_reference::ControllerReference;

pub fn user_processes() -> Processes<i64, ControllerReference> {
    Processes::empty()
}
"#
    .to_string()
}

pub fn system() -> String {
    r#"//! Pages and session helpers shared by the generated controllers.

use spicey as sp;
use sp::html::{h1, href, htxt, par, HtmlExp};
use sp::runtime::RequestContext;

/// Login name of the current session, absent when anonymous.
pub fn current_login(ctx: &RequestContext) -> Option<String> {
    sp::auth::get_session_login(ctx)
}

/// State of the process the current session is running, if any.
pub fn current_process_state(ctx: &RequestContext) -> Option<String> {
    sp::process::active_process(ctx)
}

/// Shown when an instance disappeared between two requests.
pub fn gone_page(entity: &str) -> Vec<HtmlExp> {
    vec![
        h1(vec![htxt("Error")]),
        par(vec![htxt(&format!("This {entity} no longer exists."))]).with_attr("class", "error"),
    ]
}

/// Shown instead of a form whose required selection has no choices.
pub fn missing_choice_page(entity: &str, target: &str) -> Vec<HtmlExp> {
    vec![
        h1(vec![htxt(&format!("new {entity}"))]),
        par(vec![htxt(&format!("A new {entity} needs a {target}, but there is none yet."))]),
        par(vec![href(&format!("/new{target}"), vec![htxt(&format!("new {target}"))])]),
    ]
}
"#
    .to_string()
}

pub fn main_rs(plan: &GenPlan) -> String {
    let arms: Vec<String> = variants(plan)
        .iter()
        .map(|(v, ctrl)| format!("ControllerReference::{v} => {ctrl},"))
        .collect();
    fill(
        r#"//! @erd@ web application.

// Scaffolding: not every generated operation is used by the initial system.
#![allow(dead_code)]

mod config;
mod controllers;
mod models;
mod system;
mod views;

use std::process::ExitCode;

use spicey as sp;
use sp::runtime::{App, Controller};

use config::controller_reference::ControllerReference;

const ERD_SOURCE: &str = include_str!("../@erd_file@");

fn controller_of(r: &ControllerReference) -> Controller {
    match r {
        @arms@
    }
}

fn main() -> ExitCode {
    sp::runtime::run_main(ERD_SOURCE, |db, credentials| {
        App::new(
            @erd_lit@,
            db,
            config::routes::get_routes,
            controller_of,
            ControllerReference::ErrorController,
        )
        .with_credentials(credentials)
        .with_processes(config::user_processes::user_processes())
    })
}
"#,
        &[
            ("erd", &plan.erd_name),
            ("erd_file", &plan.erd_file()),
            ("erd_lit", &lit(&plan.erd_name)),
            ("arms", &arms.join("\n        ")),
        ],
    )
}

pub fn build_script() -> String {
    r#"#!/bin/sh
# Builds the application in release mode.
set -e
cd "$(dirname "$0")/.."
cargo build --release "$@"
"#
    .to_string()
}

pub fn run_script() -> String {
    r#"#!/bin/sh
# Runs the application; arguments go to the server, e.g. --port 8080.
set -e
cd "$(dirname "$0")/.."
mkdir -p data
exec cargo run --release -- "$@"
"#
    .to_string()
}

pub fn style_css() -> String {
    r#"body { font-family: sans-serif; margin: 0; }
#spicey-layout .menu { background: #dde; padding: 0.5em 1em; }
#spicey-layout .content { padding: 1em; }
ul.nav { list-style: none; margin: 0; padding: 0; }
ul.nav li { display: inline; margin-right: 1em; }
.message { color: #060; font-weight: bold; padding: 0 1em; }
.error, .wuierror { color: #a00; }
table { border-collapse: collapse; }
td, th { border: 1px solid #999; padding: 0.2em 0.5em; text-align: left; }
"#
    .to_string()
}

pub fn readme(plan: &GenPlan) -> String {
    fill(
        r#"# @erd@

Web application generated from `@erd_file@`.

## Layout

- `src/models/`: typed access to the stored entities
- `src/views/`: forms, list and detail pages, HTML renderings of entities
- `src/controllers/`: controllers per entity, each behind an access policy
- `src/config/`: controller names, route table, access policies, processes
- `src/system/`: pages and session helpers shared by controllers
- `scripts/`: build and run scripts
- `public/`: static files served under `/public/`

## Running

    scripts/build.sh
    scripts/run.sh --port 8080

The database lives in `data/@erd@.db` unless `--db <path>` is given. The port
can also be set through `SPICEY_PORT`.

## Logins

Credentials are kept in a file next to the database (`data/@erd@.auth`),
one salted hash per login. Add a login with

    cargo run --release -- add-user <login> [<password>]

To manage users inside the application instead, add a `User` entity to the
model, regenerate, and make the login check in `src/system/` consult it.
"#,
        &[("erd", &plan.erd_name), ("erd_file", &plan.erd_file())],
    )
}
