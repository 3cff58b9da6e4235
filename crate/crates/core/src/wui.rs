//! Typed form specifications.
//!
//! A [`WuiSpec<T>`] renders a value of type `T` as form fields and decodes
//! submitted form data back into a `T`, reporting errors inline next to the
//! offending widget. Field names are paths of child indices from the form
//! root such as `f0_2_1`.

use std::fmt;
use std::sync::Arc;

use crate::calendar::{self, CalendarTime};
use crate::html::{self, checkbox, htxt, multi_select_field, select_field, text_field, FormEnv, HtmlExp};
use crate::runtime::{next_controller, Controller, RequestContext};
use chrono::{Datelike, Timelike};

/// Field path of the top-level widget of a form.
pub const ROOT_PATH: &str = "f0";

/// Class of the inline error message elements.
pub const ERROR_CLASS: &str = "wuierror";

pub fn child_path(path: &str, index: usize) -> String {
    format!("{path}_{index}")
}

/// Outcome of decoding submitted form data.
#[derive(Clone, Debug, PartialEq)]
pub enum Decoded<T> {
    Ok(T),
    /// The form re-rendered from the submitted data with inline errors.
    Invalid(HtmlExp),
}

impl<T> Decoded<T> {
    pub fn ok(self) -> Option<T> {
        match self {
            Decoded::Ok(v) => Some(v),
            Decoded::Invalid(_) => None,
        }
    }
}

/// Decoding result of one node: the value if valid, the re-rendered parts,
/// and the number of inline errors among them.
pub struct Step<T> {
    pub value: Option<T>,
    pub parts: Vec<HtmlExp>,
    pub errors: usize,
}

/// The structural part of a spec: how a value maps to its top-level parts.
pub trait Node<T>: Send + Sync {
    fn render_parts(&self, path: &str, value: &T) -> Vec<HtmlExp>;
    fn decode_parts(&self, path: &str, env: &FormEnv) -> Step<T>;
    /// Number of top-level parts.
    fn arity(&self) -> usize;
}

type Pred<T> = Arc<dyn Fn(&T) -> bool + Send + Sync>;

/// Arrangement of the top-level parts of a spec into one element.
#[derive(Clone)]
pub struct Rendering {
    arrange: Arc<dyn Fn(Vec<HtmlExp>) -> HtmlExp + Send + Sync>,
    expected: Option<usize>,
}

impl Rendering {
    pub fn new(arrange: impl Fn(Vec<HtmlExp>) -> HtmlExp + Send + Sync + 'static) -> Self {
        Rendering {
            arrange: Arc::new(arrange),
            expected: None,
        }
    }

    /// The default arrangement: a single part as is, several parts stacked.
    pub fn vertical() -> Self {
        Rendering::new(|mut parts| {
            if parts.len() == 1 {
                parts.pop().expect("one part")
            } else {
                HtmlExp::element(
                    "div",
                    &[("class", "wui")],
                    parts.into_iter().map(|p| html::block(vec![p])).collect(),
                )
            }
        })
    }
}

impl fmt::Debug for Rendering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rendering(expected: {:?})", self.expected)
    }
}

/// Two-column table pairing each label with the corresponding part.
pub fn render_labels(labels: &[&str]) -> Rendering {
    let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
    let expected = labels.len();
    Rendering {
        arrange: Arc::new(move |parts| {
            let rows = labels
                .iter()
                .zip(parts)
                .map(|(l, p)| vec![vec![HtmlExp::element("label", &[], vec![htxt(l)])], vec![p]])
                .collect();
            html::table(rows).with_attr("class", "wui-labels")
        }),
        expected: Some(expected),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WuiError {
    /// A rendering expecting `expected` parts was applied to a spec with
    /// `actual` top-level parts.
    ArityMismatch { expected: usize, actual: usize },
}

impl fmt::Display for WuiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WuiError::ArityMismatch { expected, actual } => {
                write!(f, "rendering expects {expected} widgets but the form has {actual}")
            }
        }
    }
}

impl std::error::Error for WuiError {}

pub struct WuiSpec<T> {
    node: Arc<dyn Node<T>>,
    condition: Option<Pred<T>>,
    error_message: String,
    rendering: Rendering,
}

impl<T> Clone for WuiSpec<T> {
    fn clone(&self) -> Self {
        WuiSpec {
            node: self.node.clone(),
            condition: self.condition.clone(),
            error_message: self.error_message.clone(),
            rendering: self.rendering.clone(),
        }
    }
}

fn error_span(msg: &str) -> HtmlExp {
    HtmlExp::element("span", &[("class", ERROR_CLASS)], vec![htxt(msg)])
}

fn with_error(msg: &str, h: HtmlExp) -> HtmlExp {
    html::span(vec![error_span(msg), h])
}

impl<T: 'static> WuiSpec<T> {
    pub fn from_node(node: impl Node<T> + 'static) -> Self {
        WuiSpec {
            node: Arc::new(node),
            condition: None,
            error_message: "invalid input".to_string(),
            rendering: Rendering::vertical(),
        }
    }

    pub fn arity(&self) -> usize {
        self.node.arity()
    }

    pub fn render(&self, path: &str, value: &T) -> HtmlExp {
        (self.rendering.arrange)(self.node.render_parts(path, value))
    }

    /// Decodes into the value plus the re-rendered form and error count.
    pub fn decode_step(&self, path: &str, env: &FormEnv) -> (Option<T>, HtmlExp, usize) {
        let step = self.node.decode_parts(path, env);
        let html = (self.rendering.arrange)(step.parts);
        match step.value {
            Some(v) => match &self.condition {
                Some(c) if !c(&v) => (None, with_error(&self.error_message, html), step.errors + 1),
                _ => (Some(v), html, step.errors),
            },
            None => (None, html, step.errors),
        }
    }

    pub fn decode(&self, path: &str, env: &FormEnv) -> Decoded<T> {
        match self.decode_step(path, env) {
            (Some(v), _, _) => Decoded::Ok(v),
            (None, html, _) => Decoded::Invalid(html),
        }
    }

    /// Accepts only values satisfying `pred` in addition to any existing
    /// condition.
    pub fn with_condition(mut self, pred: impl Fn(&T) -> bool + Send + Sync + 'static) -> Self {
        self.condition = Some(match self.condition.take() {
            Some(old) => Arc::new(move |v: &T| old(v) && pred(v)),
            None => Arc::new(pred),
        });
        self
    }

    /// Message shown when the condition fails.
    pub fn with_error_message(mut self, msg: &str) -> Self {
        self.error_message = msg.to_string();
        self
    }

    pub fn with_rendering(mut self, rendering: Rendering) -> Result<Self, WuiError> {
        if let Some(expected) = rendering.expected {
            let actual = self.arity();
            if expected != actual {
                return Err(WuiError::ArityMismatch { expected, actual });
            }
        }
        self.rendering = rendering;
        Ok(self)
    }

    /// Spec over `U` reusing this spec's fields through a bijection.
    pub fn transform<U: 'static>(
        self,
        to: impl Fn(T) -> U + Send + Sync + 'static,
        from: impl Fn(&U) -> T + Send + Sync + 'static,
    ) -> WuiSpec<U>
    where
        T: Send + Sync,
    {
        WuiSpec::from_node(Adapt {
            inner: self,
            to: Box::new(to),
            from: Box::new(from),
        })
    }
}

struct Adapt<T, U> {
    inner: WuiSpec<T>,
    to: Box<dyn Fn(T) -> U + Send + Sync>,
    from: Box<dyn Fn(&U) -> T + Send + Sync>,
}

impl<T: Send + Sync + 'static, U> Node<U> for Adapt<T, U> {
    fn render_parts(&self, path: &str, value: &U) -> Vec<HtmlExp> {
        vec![self.inner.render(path, &(self.from)(value))]
    }

    fn decode_parts(&self, path: &str, env: &FormEnv) -> Step<U> {
        let (v, html, errors) = self.inner.decode_step(path, env);
        Step {
            value: v.map(&self.to),
            parts: vec![html],
            errors,
        }
    }

    fn arity(&self) -> usize {
        1
    }
}

/// Single-field widget parsed from one text input.
struct TextLeaf<T> {
    show: fn(&T) -> String,
    parse: fn(&str) -> Option<T>,
    message: &'static str,
    input_type: &'static str,
}

impl<T> Node<T> for TextLeaf<T> {
    fn render_parts(&self, path: &str, value: &T) -> Vec<HtmlExp> {
        vec![self.input(path, &(self.show)(value))]
    }

    fn decode_parts(&self, path: &str, env: &FormEnv) -> Step<T> {
        let raw = env.first(path);
        match raw.and_then(self.parse) {
            Some(v) => Step {
                value: Some(v),
                parts: vec![self.input(path, raw.unwrap_or(""))],
                errors: 0,
            },
            None => Step {
                value: None,
                parts: vec![with_error(self.message, self.input(path, raw.unwrap_or("")))],
                errors: 1,
            },
        }
    }

    fn arity(&self) -> usize {
        1
    }
}

impl<T> TextLeaf<T> {
    fn input(&self, path: &str, value: &str) -> HtmlExp {
        text_field(path, value).with_attr("type", self.input_type)
    }
}

pub fn w_string() -> WuiSpec<String> {
    WuiSpec::from_node(TextLeaf {
        show: |s: &String| s.clone(),
        parse: |s| Some(s.to_string()),
        message: "missing field",
        input_type: "text",
    })
}

/// Like [`w_string`] but rendered as a password input.
pub fn w_password() -> WuiSpec<String> {
    WuiSpec::from_node(TextLeaf {
        show: |s: &String| s.clone(),
        parse: |s| Some(s.to_string()),
        message: "missing field",
        input_type: "password",
    })
}

/// Non-empty strings.
pub fn w_required_string() -> WuiSpec<String> {
    w_string()
        .with_condition(|s| !s.is_empty())
        .with_error_message("missing value")
}

pub fn w_int() -> WuiSpec<i64> {
    WuiSpec::from_node(TextLeaf {
        show: |v: &i64| v.to_string(),
        parse: |s| s.trim().parse().ok(),
        message: "not an integer",
        input_type: "text",
    })
}

pub fn w_float() -> WuiSpec<f64> {
    WuiSpec::from_node(TextLeaf {
        show: |v: &f64| v.to_string(),
        parse: |s| s.trim().parse::<f64>().ok().filter(|f| f.is_finite()),
        message: "not a number",
        input_type: "text",
    })
}

struct BoolLeaf;

impl Node<bool> for BoolLeaf {
    fn render_parts(&self, path: &str, value: &bool) -> Vec<HtmlExp> {
        vec![checkbox(path, "on", *value)]
    }

    fn decode_parts(&self, path: &str, env: &FormEnv) -> Step<bool> {
        let v = !env.get(path).is_empty();
        Step {
            value: Some(v),
            parts: vec![checkbox(path, "on", v)],
            errors: 0,
        }
    }

    fn arity(&self) -> usize {
        1
    }
}

/// Checkbox; absent from the submission means `false`.
pub fn w_bool() -> WuiSpec<bool> {
    WuiSpec::from_node(BoolLeaf)
}

struct DateLeaf;

const DATE_PARTS: [&str; 6] = ["year", "month", "day", "hour", "minute", "second"];

impl DateLeaf {
    fn fields(path: &str, raw: &[String]) -> HtmlExp {
        let mut children = vec![];
        for (i, label) in DATE_PARTS.iter().enumerate() {
            let size = if i == 0 { "4" } else { "2" };
            children.push(
                text_field(&child_path(path, i), &raw[i])
                    .with_attr("size", size)
                    .with_attr("title", label),
            );
            if i < 5 {
                let sep = match i {
                    0 | 1 => "-",
                    2 => " ",
                    _ => ":",
                };
                children.push(htxt(sep));
            }
        }
        HtmlExp::element("span", &[("class", "wui-date")], children)
    }
}

impl Node<CalendarTime> for DateLeaf {
    fn render_parts(&self, path: &str, value: &CalendarTime) -> Vec<HtmlExp> {
        let raw = [
            value.year() as i64,
            value.month() as i64,
            value.day() as i64,
            value.hour() as i64,
            value.minute() as i64,
            value.second() as i64,
        ]
        .map(|n| n.to_string());
        vec![DateLeaf::fields(path, &raw)]
    }

    fn decode_parts(&self, path: &str, env: &FormEnv) -> Step<CalendarTime> {
        let raw: Vec<String> = (0..6)
            .map(|i| env.first(&child_path(path, i)).unwrap_or("").to_string())
            .collect();
        let nums: Option<Vec<i64>> = raw.iter().map(|s| s.trim().parse().ok()).collect();
        let value = nums.and_then(|n| {
            let u = |x: i64| u32::try_from(x).ok();
            calendar::from_ymd_hms(
                i32::try_from(n[0]).ok()?,
                u(n[1])?,
                u(n[2])?,
                u(n[3])?,
                u(n[4])?,
                u(n[5])?,
            )
        });
        let html = DateLeaf::fields(path, &raw);
        match value {
            Some(t) => Step {
                value: Some(t),
                parts: vec![html],
                errors: 0,
            },
            None => Step {
                value: None,
                parts: vec![with_error("invalid date", html)],
                errors: 1,
            },
        }
    }

    fn arity(&self) -> usize {
        1
    }
}

/// Six numeric fields for year, month, day, hour, minute and second.
pub fn w_date() -> WuiSpec<CalendarTime> {
    WuiSpec::from_node(DateLeaf)
}

struct Select<T> {
    labels: Vec<String>,
    choices: Vec<T>,
}

impl<T: Clone + PartialEq + Send + Sync> Node<T> for Select<T> {
    fn render_parts(&self, path: &str, value: &T) -> Vec<HtmlExp> {
        let sel = self.choices.iter().position(|c| c == value);
        vec![select_field(path, &self.labels, sel)]
    }

    fn decode_parts(&self, path: &str, env: &FormEnv) -> Step<T> {
        let idx = env
            .first(path)
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|i| *i < self.choices.len());
        let html = select_field(path, &self.labels, idx);
        match idx {
            Some(i) => Step {
                value: Some(self.choices[i].clone()),
                parts: vec![html],
                errors: 0,
            },
            None => Step {
                value: None,
                parts: vec![with_error("invalid selection", html)],
                errors: 1,
            },
        }
    }

    fn arity(&self) -> usize {
        1
    }
}

/// Selection of one of `choices`, shown through `show`.
pub fn w_select<T: Clone + PartialEq + Send + Sync + 'static>(
    show: impl Fn(&T) -> String,
    choices: Vec<T>,
) -> WuiSpec<T> {
    WuiSpec::from_node(Select {
        labels: choices.iter().map(show).collect(),
        choices,
    })
}

struct MultiSelect<T> {
    labels: Vec<String>,
    choices: Vec<T>,
}

impl<T: Clone + PartialEq + Send + Sync> Node<Vec<T>> for MultiSelect<T> {
    fn render_parts(&self, path: &str, value: &Vec<T>) -> Vec<HtmlExp> {
        let sel: Vec<usize> = (0..self.choices.len())
            .filter(|i| value.contains(&self.choices[*i]))
            .collect();
        vec![multi_select_field(path, &self.labels, &sel)]
    }

    fn decode_parts(&self, path: &str, env: &FormEnv) -> Step<Vec<T>> {
        let mut idx = vec![];
        let mut bad = false;
        for raw in env.get(path) {
            match raw.parse::<usize>() {
                Ok(i) if i < self.choices.len() => idx.push(i),
                _ => bad = true,
            }
        }
        idx.sort_unstable();
        idx.dedup();
        let html = multi_select_field(path, &self.labels, &idx);
        if bad {
            Step {
                value: None,
                parts: vec![with_error("invalid selection", html)],
                errors: 1,
            }
        } else {
            Step {
                value: Some(idx.iter().map(|i| self.choices[*i].clone()).collect()),
                parts: vec![html],
                errors: 0,
            }
        }
    }

    fn arity(&self) -> usize {
        1
    }
}

/// Selection of any subset of `choices`, decoded in choice order.
pub fn w_multi_select<T: Clone + PartialEq + Send + Sync + 'static>(
    show: impl Fn(&T) -> String,
    choices: Vec<T>,
) -> WuiSpec<Vec<T>> {
    WuiSpec::from_node(MultiSelect {
        labels: choices.iter().map(show).collect(),
        choices,
    })
}

struct Maybe<T> {
    inner: WuiSpec<T>,
    default: T,
}

impl<T: Clone + Send + Sync + 'static> Node<Option<T>> for Maybe<T> {
    fn render_parts(&self, path: &str, value: &Option<T>) -> Vec<HtmlExp> {
        let shown = value.as_ref().unwrap_or(&self.default);
        vec![html::span(vec![
            checkbox(&child_path(path, 0), "on", value.is_some()),
            self.inner.render(&child_path(path, 1), shown),
        ])]
    }

    fn decode_parts(&self, path: &str, env: &FormEnv) -> Step<Option<T>> {
        let present = !env.get(&child_path(path, 0)).is_empty();
        let (v, html, errors) = self.inner.decode_step(&child_path(path, 1), env);
        let part = html::span(vec![checkbox(&child_path(path, 0), "on", present), html]);
        if !present {
            // Inner errors are irrelevant when the value is absent; show the
            // fields without them.
            let shown = v.unwrap_or_else(|| self.default.clone());
            return Step {
                value: Some(None),
                parts: vec![html::span(vec![
                    checkbox(&child_path(path, 0), "on", false),
                    self.inner.render(&child_path(path, 1), &shown),
                ])],
                errors: 0,
            };
        }
        Step {
            value: v.map(Some),
            parts: vec![part],
            errors,
        }
    }

    fn arity(&self) -> usize {
        1
    }
}

/// Optional value: a checkbox marking presence next to the inner widget,
/// which shows `default` while the value is absent.
pub fn w_maybe<T: Clone + Send + Sync + 'static>(inner: WuiSpec<T>, default: T) -> WuiSpec<Option<T>> {
    WuiSpec::from_node(Maybe { inner, default })
}

macro_rules! tuple_spec {
    ($node:ident, $func:ident, $n:expr, $($T:ident $v:ident $i:tt),+) => {
        struct $node<$($T),+>($(WuiSpec<$T>),+);

        impl<$($T: Send + Sync + 'static),+> Node<($($T,)+)> for $node<$($T),+> {
            fn render_parts(&self, path: &str, value: &($($T,)+)) -> Vec<HtmlExp> {
                vec![$(self.$i.render(&child_path(path, $i), &value.$i)),+]
            }

            fn decode_parts(&self, path: &str, env: &FormEnv) -> Step<($($T,)+)> {
                let mut parts = Vec::with_capacity($n);
                let mut errors = 0;
                $(
                    let $v = self.$i.decode_step(&child_path(path, $i), env);
                    parts.push($v.1);
                    errors += $v.2;
                    let $v = $v.0;
                )+
                let value = match ($($v,)+) {
                    ($(Some($v),)+) => Some(($($v,)+)),
                    _ => None,
                };
                Step { value, parts, errors }
            }

            fn arity(&self) -> usize {
                $n
            }
        }

        pub fn $func<$($T: Send + Sync + 'static),+>($($v: WuiSpec<$T>),+) -> WuiSpec<($($T,)+)> {
            WuiSpec::from_node($node($($v),+))
        }
    };
}

tuple_spec!(Pair, w_pair, 2, A a 0, B b 1);
tuple_spec!(Triple, w_triple, 3, A a 0, B b 1, C c 2);
tuple_spec!(Tuple4, w4_tuple, 4, A a 0, B b 1, C c 2, D d 3);
tuple_spec!(Tuple5, w5_tuple, 5, A a 0, B b 1, C c 2, D d 3, E e 4);
tuple_spec!(Tuple6, w6_tuple, 6, A a 0, B b 1, C c 2, D d 3, E e 4, F f 5);

type Submit<T> = Arc<dyn Fn(T) -> Controller + Send + Sync>;

/// Renders `spec` for `initial` with a submit button.
///
/// Submitting decodes the form; a valid value is passed to `on_submit` and
/// the resulting controller runs, otherwise the form is shown again with the
/// submitted input and inline errors.
pub fn run_form<T: Send + Sync + 'static>(
    ctx: &RequestContext,
    spec: WuiSpec<T>,
    initial: &T,
    label: &str,
    on_submit: impl Fn(T) -> Controller + Send + Sync + 'static,
) -> Vec<HtmlExp> {
    let form = spec.render(ROOT_PATH, initial);
    form_page(ctx, Arc::new(spec), form, label.to_string(), Arc::new(on_submit))
}

fn form_page<T: Send + Sync + 'static>(
    ctx: &RequestContext,
    spec: Arc<WuiSpec<T>>,
    form: HtmlExp,
    label: String,
    on_submit: Submit<T>,
) -> Vec<HtmlExp> {
    let handler = {
        let (spec, label) = (spec.clone(), label.clone());
        Controller::new(move |ctx| match spec.decode(ROOT_PATH, ctx.form()) {
            Decoded::Ok(v) => on_submit(v).run(ctx),
            Decoded::Invalid(html) => form_page(ctx, spec.clone(), html, label.clone(), on_submit.clone()),
        })
    };
    let button = html::button(&label, &next_controller(ctx, handler));
    vec![form, html::par(vec![button])]
}
