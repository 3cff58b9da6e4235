use spicey::erd::DomainKind;

use crate::names::lit;
use crate::plan::{AttrPlan, EntityPlan, GenPlan};

use super::{base_type, default_expr, fill_entity};

/// Largest tuple combinator offered by the runtime.
const MAX_TUPLE: usize = 6;

fn entity_path(plan: &GenPlan, target: usize) -> String {
    let t = &plan.entities[target];
    format!("crate::models::{}::{}", t.model_mod(), t.ty)
}

fn short_view_path(plan: &GenPlan, target: usize) -> String {
    let t = &plan.entities[target];
    format!("crate::views::{}::{}_short_view", t.html_mod(), t.stem)
}

/// Text shown for an attribute of `c`.
fn attr_text(a: &AttrPlan) -> String {
    let f = &a.field;
    match (a.kind(), a.nullable) {
        (DomainKind::String, false) => format!("c.{f}.clone()"),
        (DomainKind::String, true) => format!("c.{f}.clone().unwrap_or_default()"),
        (DomainKind::Date, false) => format!("sp::calendar::format_iso(&c.{f})"),
        (DomainKind::Date, true) => format!("c.{f}.as_ref().map(sp::calendar::format_iso).unwrap_or_default()"),
        (_, false) => format!("c.{f}.to_string()"),
        (_, true) => format!("c.{f}.map(|x| x.to_string()).unwrap_or_default()"),
    }
}

const HTML: &str = r#"//! HTML renderings of `@Name@` instances.

use spicey as sp;
use sp::html::{htxt, HtmlExp};

use crate::models::@model@::@ty@;

/// Form and table labels: attributes, then referenced and linked roles.
pub const @labels_const@: [&str; @label_count@] = [@labels@];

/// Text identifying an instance where it is referenced.
pub fn @stem@_short_view(c: &@ty@) -> String {
    @short@
}

/// Attribute texts followed by `related`, the texts of referenced and
/// linked instances.
pub fn @stem@_columns(c: &@ty@, related: &[String]) -> Vec<String> {
    let mut cols = vec![@attr_texts@];
    cols.extend(related.iter().cloned());
    cols
}

/// Table cells of one list row, aligned with the first labels.
pub fn @stem@_to_list_view(c: &@ty@, related: &[String]) -> Vec<Vec<HtmlExp>> {
    @stem@_columns(c, related)
        .iter()
        .take(@list_cols@)
        .map(|s| vec![htxt(s)])
        .collect()
}

/// Label/value table of all columns.
pub fn @stem@_details(c: &@ty@, related: &[String]) -> HtmlExp {
    let rows = @labels_const@
        .iter()
        .zip(@stem@_columns(c, related))
        .map(|(label, value)| vec![vec![sp::html::bold(vec![htxt(label)])], vec![htxt(&value)]])
        .collect();
    sp::html::table(rows).with_attr("class", "details")
}
"#;

pub fn html_unit(e: &EntityPlan) -> String {
    let labels = e.labels();
    let short = match e.short_attr() {
        Some(i) => attr_text(&e.attrs[i]),
        None => "c.key.to_string()".to_string(),
    };
    fill_entity(
        HTML,
        e,
        &[
            ("label_count", labels.len().to_string()),
            ("labels", labels.iter().map(|l| lit(l)).collect::<Vec<_>>().join(", ")),
            ("short", short),
            (
                "attr_texts",
                e.attrs.iter().map(attr_text).collect::<Vec<_>>().join(", "),
            ),
            ("list_cols", labels.len().min(3).to_string()),
        ],
    )
}

/// A form component or a group of them.
struct Comp {
    expr: String,
    /// Binding pattern of the decoded value.
    pattern: String,
    /// Expression rebuilding the value from the form struct `f_`.
    rebuild: String,
    label: Option<String>,
}

fn tuple_fn(n: usize) -> &'static str {
    match n {
        2 => "sp::wui::w_pair",
        3 => "sp::wui::w_triple",
        4 => "sp::wui::w4_tuple",
        5 => "sp::wui::w5_tuple",
        6 => "sp::wui::w6_tuple",
        _ => unreachable!("tuples have 2 to {MAX_TUPLE} components"),
    }
}

fn indent(s: &str, by: usize) -> String {
    let pad = " ".repeat(by);
    s.lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 0 || l.is_empty() {
                l.to_string()
            } else {
                format!("{pad}{l}")
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Combines components into nested tuples of at most six, labelling each
/// tuple whose components all carry labels.
fn group(mut comps: Vec<Comp>) -> Comp {
    if comps.len() == 1 {
        return comps.pop().expect("one component");
    }
    if comps.len() > MAX_TUPLE {
        let chunks = comps.len().div_ceil(MAX_TUPLE);
        let mut groups = vec![];
        let mut rest = comps.into_iter();
        let total = rest.len();
        for i in 0..chunks {
            let size = total / chunks + usize::from(i < total % chunks);
            groups.push(group(rest.by_ref().take(size).collect()));
        }
        return group(groups);
    }
    let args: Vec<String> = comps.iter().map(|c| indent(&c.expr, 4)).collect();
    let mut expr = format!("{}(\n    {},\n)", tuple_fn(comps.len()), args.join(",\n    "));
    if comps.iter().all(|c| c.label.is_some()) {
        let labels: Vec<String> = comps
            .iter()
            .map(|c| lit(c.label.as_deref().unwrap_or_default()))
            .collect();
        expr.push_str(&format!(
            "\n.with_rendering(sp::wui::render_labels(&[{}]))\n.expect(\"one label per component\")",
            labels.join(", ")
        ));
    }
    Comp {
        expr,
        pattern: format!(
            "({})",
            comps.iter().map(|c| c.pattern.as_str()).collect::<Vec<_>>().join(", ")
        ),
        rebuild: format!(
            "({})",
            comps.iter().map(|c| c.rebuild.as_str()).collect::<Vec<_>>().join(", ")
        ),
        label: None,
    }
}

fn base_widget(kind: DomainKind) -> &'static str {
    match kind {
        DomainKind::Int => "sp::wui::w_int()",
        DomainKind::Float => "sp::wui::w_float()",
        DomainKind::Bool => "sp::wui::w_bool()",
        DomainKind::String => "sp::wui::w_required_string()",
        DomainKind::Date => "sp::wui::w_date()",
    }
}

fn attr_widget(a: &AttrPlan) -> String {
    match (a.kind(), a.nullable) {
        (DomainKind::String, true) => "sp::wui::w_string().transform(\n    |s: String| if s.is_empty() { None } else { Some(s) },\n    |o: &Option<String>| o.clone().unwrap_or_default(),\n)".to_string(),
        (k, true) => format!("sp::wui::w_maybe({}, {})", base_widget(k), default_expr(&a.domain)),
        (k, false) => base_widget(k).to_string(),
    }
}

/// Form components in label order: attributes, foreign keys, links.
fn components(plan: &GenPlan, e: &EntityPlan) -> Vec<Comp> {
    let mut comps = vec![];
    for a in &e.attrs {
        comps.push(Comp {
            expr: attr_widget(a),
            pattern: a.field.clone(),
            rebuild: format!("f_.{}.clone()", a.field),
            label: Some(a.name.clone()),
        });
    }
    for fk in &e.fks {
        let show = short_view_path(plan, fk.target);
        let choices = format!("{}_choices", fk.form_field);
        let expr = if fk.required {
            format!("sp::wui::w_select({show}, {choices})")
        } else {
            format!(
                "sp::wui::w_select(\n    |o: &Option<{}>| o.as_ref().map_or_else(|| \"(none)\".to_string(), {show}),\n    std::iter::once(None).chain({choices}.into_iter().map(Some)).collect(),\n)",
                entity_path(plan, fk.target)
            )
        };
        comps.push(Comp {
            expr,
            pattern: fk.form_field.clone(),
            rebuild: format!("f_.{}.clone()", fk.form_field),
            label: Some(fk.role.clone()),
        });
    }
    for l in &e.links {
        comps.push(Comp {
            expr: format!(
                "sp::wui::w_multi_select({}, {}_choices)",
                short_view_path(plan, l.target),
                l.form_field
            ),
            pattern: l.form_field.clone(),
            rebuild: format!("f_.{}.clone()", l.form_field),
            label: Some(l.role.clone()),
        });
    }
    comps
}

/// Parameters holding the selectable instances, one per selector.
pub fn choice_params(plan: &GenPlan, e: &EntityPlan) -> Vec<(String, String)> {
    e.fks
        .iter()
        .map(|fk| (format!("{}_choices", fk.form_field), entity_path(plan, fk.target)))
        .chain(
            e.links
                .iter()
                .map(|l| (format!("{}_choices", l.form_field), entity_path(plan, l.target))),
        )
        .collect()
}

const VIEW: &str = r#"//! Forms and pages of `@Name@`.

use spicey as sp;
use sp::html::{h1, href, htxt, par, HtmlExp};
use sp::runtime::{button_to, Controller, RequestContext};
use sp::wui::WuiSpec;

use super::@html@::{@stem@_details, @stem@_short_view, @stem@_to_list_view, @labels_const@};
use crate::models::@model@::{cmp_@stem@, @ty@};

/// Contents of the create and edit forms.
#[derive(Clone, Debug, PartialEq)]
pub struct @form_ty@ {
@form_fields@}

/// Form of a `@Name@`; selectors offer the given choices.
pub fn w_@stem@(@choice_params@) -> WuiSpec<@form_ty@> {
    @spec@
    .transform(
        |@pattern@| @form_ty@ { @field_list@ },
        |f_: &@form_ty@| @rebuild@,
    )
}

/// Form for a new `@Name@`; `store` receives the submitted data.
pub fn create_@stem@_view(
    ctx: &RequestContext,
    initial: @form_ty@,
@choice_param_lines@    store: impl Fn(@form_ty@) -> Controller + Send + Sync + 'static,
) -> Vec<HtmlExp> {
    let mut page = vec![h1(vec![htxt("new @Name@")])];
    page.extend(sp::wui::run_form(ctx, w_@stem@(@choice_args@), &initial, "create", store));
    page
}

/// Form to change a `@Name@`; `update` receives the submitted data.
pub fn edit_@stem@_view(
    ctx: &RequestContext,
    current: @form_ty@,
@choice_param_lines@    update: impl Fn(@form_ty@) -> Controller + Send + Sync + 'static,
) -> Vec<HtmlExp> {
    let mut page = vec![h1(vec![htxt("edit @Name@")])];
    page.extend(sp::wui::run_form(ctx, w_@stem@(@choice_args@), &current, "change", update));
    page
}

pub fn show_@stem@_view(c: &@ty@, related: &[String]) -> Vec<HtmlExp> {
    vec![
        h1(vec![htxt("@Name@")]),
        @stem@_details(c, related),
        par(vec![href("/list@Name@", vec![htxt("back to @Name@ list")])]),
    ]
}

/// Table of all instances, sorted, with buttons for the given controllers.
pub fn list_@stem@_view(
    ctx: &RequestContext,
    mut rows: Vec<(@ty@, Vec<String>)>,
    show: impl Fn(@ty@) -> Controller,
    edit: impl Fn(@ty@) -> Controller,
    delete: impl Fn(@ty@) -> Controller,
) -> Vec<HtmlExp> {
    rows.sort_by(|a, b| cmp_@stem@(&a.0, &b.0));
    let header = @labels_const@.iter().take(3).map(|l| vec![htxt(l)]).collect();
    let body = rows
        .into_iter()
        .map(|(c, related)| {
            let mut cells = @stem@_to_list_view(&c, &related);
            cells.push(vec![button_to(ctx, "show", show(c.clone()))]);
            cells.push(vec![button_to(ctx, "edit", edit(c.clone()))]);
            cells.push(vec![button_to(ctx, "delete", delete(c))]);
            cells
        })
        .collect();
    vec![
        h1(vec![htxt("List @Name@")]),
        sp::html::header_table(header, body).with_attr("class", "list"),
    ]
}

pub fn confirm_delete_@stem@_view(ctx: &RequestContext, c: &@ty@, yes: Controller, no: Controller) -> Vec<HtmlExp> {
    vec![
        h1(vec![htxt("delete @Name@")]),
        par(vec![htxt(&format!("Really delete @Name@ {}?", @stem@_short_view(c)))]),
        par(vec![button_to(ctx, "yes", yes), button_to(ctx, "no", no)]),
    ]
}
"#;

pub fn view_unit(plan: &GenPlan, e: &EntityPlan) -> String {
    let comps = components(plan, e);
    let fields: Vec<String> = comps.iter().map(|c| c.pattern.clone()).collect();
    let mut form_fields = String::new();
    for a in &e.attrs {
        let ty = base_type(a.kind());
        let ty = if a.nullable {
            format!("Option<{ty}>")
        } else {
            ty.to_string()
        };
        form_fields.push_str(&format!("    pub {}: {ty},\n", a.field));
    }
    for fk in &e.fks {
        let ty = entity_path(plan, fk.target);
        let ty = if fk.required { ty } else { format!("Option<{ty}>") };
        form_fields.push_str(&format!("    pub {}: {ty},\n", fk.form_field));
    }
    for l in &e.links {
        form_fields.push_str(&format!(
            "    pub {}: Vec<{}>,\n",
            l.form_field,
            entity_path(plan, l.target)
        ));
    }
    let params = choice_params(plan, e);
    let label_count = comps.len();
    let mut top = group(comps);
    if label_count == 1 {
        top.expr.push_str(&format!(
            "\n.with_rendering(sp::wui::render_labels(&[{}]))\n.expect(\"one label per component\")",
            lit(top.label.as_deref().unwrap_or_default())
        ));
    }
    fill_entity(
        VIEW,
        e,
        &[
            ("form_fields", form_fields),
            (
                "choice_params",
                params
                    .iter()
                    .map(|(n, t)| format!("{n}: Vec<{t}>"))
                    .collect::<Vec<_>>()
                    .join(", "),
            ),
            (
                "choice_param_lines",
                params
                    .iter()
                    .map(|(n, t)| format!("    {n}: Vec<{t}>,\n"))
                    .collect::<String>(),
            ),
            (
                "choice_args",
                params.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join(", "),
            ),
            ("spec", indent(&top.expr, 4)),
            ("pattern", top.pattern),
            ("field_list", fields.join(", ")),
            ("rebuild", top.rebuild),
        ],
    )
}
