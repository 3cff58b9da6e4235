//! HTML documents as value trees.
//!
//! Pages are built from [`HtmlExp`] values and only turned into markup when a
//! response is written. Text nodes hold already-escaped content; [`htxt`] is
//! the escaping constructor.

use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Field name carrying the per-page form token.
pub const FORM_TOKEN_FIELD: &str = "__form";
/// Prefix of submit-button names; the rest of the name is the handler token.
pub const HANDLER_PREFIX: &str = "__h_";
/// `id` of the element wrapping every rendered page.
pub const LAYOUT_MARKER: &str = "spicey-layout";

const VOID_ELEMENTS: &[&str] = &["input", "br", "img", "hr", "link", "meta"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HtmlExp {
    /// Raw markup text, already escaped.
    Text(String),
    Struct {
        tag: String,
        attrs: Vec<(String, String)>,
        children: Vec<HtmlExp>,
    },
}

impl HtmlExp {
    pub fn element(tag: &str, attrs: &[(&str, &str)], children: Vec<HtmlExp>) -> HtmlExp {
        HtmlExp::Struct {
            tag: tag.to_string(),
            attrs: attrs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            children,
        }
    }

    /// Sets an attribute of a structure, replacing an earlier value; text
    /// nodes are returned unchanged.
    pub fn with_attr(mut self, name: &str, value: &str) -> HtmlExp {
        if let HtmlExp::Struct { attrs, .. } = &mut self {
            match attrs.iter_mut().find(|(k, _)| k == name) {
                Some(slot) => slot.1 = value.to_string(),
                None => attrs.push((name.to_string(), value.to_string())),
            }
        }
        self
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        match self {
            HtmlExp::Struct { attrs, .. } => attrs.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str()),
            HtmlExp::Text(_) => None,
        }
    }

    pub fn tag(&self) -> Option<&str> {
        match self {
            HtmlExp::Struct { tag, .. } => Some(tag),
            HtmlExp::Text(_) => None,
        }
    }

    pub fn children(&self) -> &[HtmlExp] {
        match self {
            HtmlExp::Struct { children, .. } => children,
            HtmlExp::Text(_) => &[],
        }
    }

    /// Pre-order traversal over this node and all descendants.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a HtmlExp)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }
}

/// Replaces `&`, `<`, `>` and `"` with entity references.
pub fn html_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

/// Inverse of [`html_quote`] for the four entities it produces.
pub fn html_unquote(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(i) = rest.find('&') {
        out.push_str(&rest[..i]);
        rest = &rest[i..];
        let mut matched = false;
        for (ent, c) in [("&amp;", '&'), ("&lt;", '<'), ("&gt;", '>'), ("&quot;", '"')] {
            if let Some(after) = rest.strip_prefix(ent) {
                out.push(c);
                rest = after;
                matched = true;
                break;
            }
        }
        if !matched {
            out.push('&');
            rest = &rest[1..];
        }
    }
    out.push_str(rest);
    out
}

/// Text node with `s` escaped.
pub fn htxt(s: &str) -> HtmlExp {
    HtmlExp::Text(html_quote(s))
}

fn plain(tag: &str, children: Vec<HtmlExp>) -> HtmlExp {
    HtmlExp::element(tag, &[], children)
}

pub fn par(children: Vec<HtmlExp>) -> HtmlExp {
    plain("p", children)
}

pub fn italic(children: Vec<HtmlExp>) -> HtmlExp {
    plain("i", children)
}

pub fn bold(children: Vec<HtmlExp>) -> HtmlExp {
    plain("b", children)
}

pub fn h1(children: Vec<HtmlExp>) -> HtmlExp {
    plain("h1", children)
}

pub fn h2(children: Vec<HtmlExp>) -> HtmlExp {
    plain("h2", children)
}

pub fn block(children: Vec<HtmlExp>) -> HtmlExp {
    plain("div", children)
}

pub fn span(children: Vec<HtmlExp>) -> HtmlExp {
    plain("span", children)
}

pub fn breakline() -> HtmlExp {
    plain("br", vec![])
}

pub fn href(url: &str, children: Vec<HtmlExp>) -> HtmlExp {
    HtmlExp::element("a", &[("href", url)], children)
}

pub fn ulist(items: Vec<Vec<HtmlExp>>) -> HtmlExp {
    plain("ul", items.into_iter().map(|i| plain("li", i)).collect())
}

/// Table from rows of cells, each cell a list of expressions.
pub fn table(rows: Vec<Vec<Vec<HtmlExp>>>) -> HtmlExp {
    plain(
        "table",
        rows.into_iter()
            .map(|row| plain("tr", row.into_iter().map(|cell| plain("td", cell)).collect()))
            .collect(),
    )
}

/// Like [`table`] but the first row uses header cells.
pub fn header_table(header: Vec<Vec<HtmlExp>>, rows: Vec<Vec<Vec<HtmlExp>>>) -> HtmlExp {
    let head = plain("tr", header.into_iter().map(|c| plain("th", c)).collect());
    let mut t = table(rows);
    if let HtmlExp::Struct { children, .. } = &mut t {
        children.insert(0, head);
    }
    t
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HandlerKind {
    SubmitButton,
    HiddenForm,
}

/// Reference to an event handler registered for the current session.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HandlerRef {
    pub token: String,
    pub kind: HandlerKind,
}

impl HandlerRef {
    pub fn field_name(&self) -> String {
        format!("{HANDLER_PREFIX}{}", self.token)
    }
}

/// Submit button invoking the handler `h`.
pub fn button(label: &str, h: &HandlerRef) -> HtmlExp {
    HtmlExp::element(
        "input",
        &[("type", "submit"), ("name", &h.field_name()), ("value", label)],
        vec![],
    )
}

pub fn text_field(name: &str, value: &str) -> HtmlExp {
    HtmlExp::element("input", &[("type", "text"), ("name", name), ("value", value)], vec![])
}

pub fn password_field(name: &str) -> HtmlExp {
    HtmlExp::element("input", &[("type", "password"), ("name", name), ("value", "")], vec![])
}

pub fn hidden_field(name: &str, value: &str) -> HtmlExp {
    HtmlExp::element("input", &[("type", "hidden"), ("name", name), ("value", value)], vec![])
}

pub fn checkbox(name: &str, value: &str, checked: bool) -> HtmlExp {
    let mut attrs = vec![("type", "checkbox"), ("name", name), ("value", value)];
    if checked {
        attrs.push(("checked", "checked"));
    }
    HtmlExp::element("input", &attrs, vec![])
}

fn options(labels: &[String], selected: &dyn Fn(usize) -> bool) -> Vec<HtmlExp> {
    labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let value = i.to_string();
            let mut attrs = vec![("value", value.as_str())];
            if selected(i) {
                attrs.push(("selected", "selected"));
            }
            HtmlExp::element("option", &attrs, vec![htxt(l)])
        })
        .collect()
}

/// Selection box whose options submit their index.
pub fn select_field(name: &str, labels: &[String], selected: Option<usize>) -> HtmlExp {
    HtmlExp::element("select", &[("name", name)], options(labels, &|i| Some(i) == selected))
}

pub fn multi_select_field(name: &str, labels: &[String], selected: &[usize]) -> HtmlExp {
    HtmlExp::element(
        "select",
        &[("name", name), ("multiple", "multiple")],
        options(labels, &|i| selected.contains(&i)),
    )
}

/// Concatenated text leaves in document order.
///
/// The result is the text as it appears in the markup, i.e. still escaped.
pub fn text_of(h: &HtmlExp) -> String {
    let mut out = String::new();
    h.walk(&mut |n| {
        if let HtmlExp::Text(t) = n {
            out.push_str(t);
        }
    });
    out
}

/// [`text_of`] over a list, with entities decoded.
pub fn plain_text_of(hs: &[HtmlExp]) -> String {
    html_unquote(&hs.iter().map(text_of).collect::<String>())
}

/// Serializes to HTML markup.
pub fn show_html(h: &HtmlExp) -> String {
    let mut out = String::new();
    write_html(&mut out, h);
    out
}

pub fn show_html_list(hs: &[HtmlExp]) -> String {
    let mut out = String::new();
    for h in hs {
        write_html(&mut out, h);
    }
    out
}

fn write_html(out: &mut String, h: &HtmlExp) {
    match h {
        HtmlExp::Text(t) => out.push_str(t),
        HtmlExp::Struct { tag, attrs, children } => {
            out.push('<');
            out.push_str(tag);
            for (k, v) in attrs {
                let _ = write!(out, " {k}=\"{}\"", html_quote(v));
            }
            if VOID_ELEMENTS.contains(&tag.as_str()) {
                out.push_str(" />");
                return;
            }
            out.push('>');
            for c in children {
                write_html(out, c);
            }
            let _ = write!(out, "</{tag}>");
        }
    }
}

/// Fixed parts of every page.
#[derive(Clone, Debug, PartialEq)]
pub struct PageLayout {
    pub title: String,
    pub menu: HtmlExp,
    pub message: String,
    pub stylesheet: String,
}

impl PageLayout {
    pub fn new(title: &str, menu: HtmlExp, message: &str) -> Self {
        PageLayout {
            title: title.to_string(),
            menu,
            message: message.to_string(),
            stylesheet: "/public/style.css".to_string(),
        }
    }
}

/// Full HTML page with head, menu, message and content regions.
pub fn render_document(layout: &PageLayout, body: &[HtmlExp]) -> String {
    let message = if layout.message.is_empty() {
        vec![]
    } else {
        vec![htxt(&layout.message)]
    };
    let page = HtmlExp::element(
        "div",
        &[("id", LAYOUT_MARKER)],
        vec![
            HtmlExp::element("div", &[("class", "menu")], vec![layout.menu.clone()]),
            HtmlExp::element("div", &[("class", "message")], message),
            HtmlExp::element("div", &[("class", "content")], body.to_vec()),
        ],
    );
    format!(
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\" />\n<title>{}</title>\n\
         <link rel=\"stylesheet\" type=\"text/css\" href=\"{}\" />\n</head>\n<body>\n{}\n</body>\n</html>\n",
        html_quote(&layout.title),
        html_quote(&layout.stylesheet),
        show_html(&page)
    )
}

/// Submitted form data: field name to list of values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FormEnv {
    fields: BTreeMap<String, Vec<String>>,
}

impl FormEnv {
    pub fn new() -> Self {
        Self::default()
    }

    /// Decodes an `application/x-www-form-urlencoded` body.
    pub fn from_urlencoded(body: &[u8]) -> Self {
        let mut env = FormEnv::new();
        for (k, v) in form_urlencoded::parse(body) {
            env.push(&k, &v);
        }
        env
    }

    pub fn to_urlencoded(&self) -> String {
        let mut ser = form_urlencoded::Serializer::new(String::new());
        for (k, vs) in &self.fields {
            for v in vs {
                ser.append_pair(k, v);
            }
        }
        ser.finish()
    }

    pub fn push(&mut self, name: &str, value: &str) {
        self.fields.entry(name.to_string()).or_default().push(value.to_string());
    }

    pub fn set(&mut self, name: &str, value: &str) {
        self.fields.insert(name.to_string(), vec![value.to_string()]);
    }

    pub fn remove(&mut self, name: &str) {
        self.fields.remove(name);
    }

    /// All values of `name`; empty when absent.
    pub fn get(&self, name: &str) -> &[String] {
        self.fields.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn first(&self, name: &str) -> Option<&str> {
        self.get(name).first().map(String::as_str)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.fields.keys().map(String::as_str)
    }

    /// Token of the first handler button present, in field-name order.
    pub fn handler_token(&self) -> Option<&str> {
        self.names().find_map(|n| n.strip_prefix(HANDLER_PREFIX))
    }
}

/// The form data a browser would submit for `page` without user edits.
///
/// Text, hidden and password inputs contribute their value, checked
/// checkboxes their value, selects their selected options (the first option
/// for a single select with nothing selected). Buttons are not included.
pub fn default_submission(page: &[HtmlExp]) -> FormEnv {
    let mut env = FormEnv::new();
    for h in page {
        h.walk(&mut |n| match n.tag() {
            Some("input") => {
                let (Some(name), value) = (n.attr("name"), n.attr("value").unwrap_or("")) else {
                    return;
                };
                match n.attr("type").unwrap_or("text") {
                    "text" | "hidden" | "password" => env.push(name, value),
                    "checkbox" if n.attr("checked").is_some() => env.push(name, value),
                    _ => {}
                }
            }
            Some("textarea") => {
                if let Some(name) = n.attr("name") {
                    env.push(name, &html_unquote(&text_of(n)));
                }
            }
            Some("select") => {
                let Some(name) = n.attr("name") else { return };
                let opts: Vec<&HtmlExp> = n.children().iter().filter(|c| c.tag() == Some("option")).collect();
                let chosen: Vec<&&HtmlExp> = opts.iter().filter(|o| o.attr("selected").is_some()).collect();
                if chosen.is_empty() {
                    if n.attr("multiple").is_none() {
                        if let Some(first) = opts.first() {
                            env.push(name, first.attr("value").unwrap_or(""));
                        }
                    }
                } else {
                    for o in chosen {
                        env.push(name, o.attr("value").unwrap_or(""));
                    }
                }
            }
            _ => {}
        });
    }
    env
}

/// `(label, field name)` of every submit button in `page`, in document order.
pub fn buttons(page: &[HtmlExp]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for h in page {
        h.walk(&mut |n| {
            if n.tag() == Some("input") && n.attr("type") == Some("submit") {
                if let Some(name) = n.attr("name") {
                    out.push((n.attr("value").unwrap_or("").to_string(), name.to_string()));
                }
            }
        });
    }
    out
}
