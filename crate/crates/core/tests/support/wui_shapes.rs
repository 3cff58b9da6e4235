//! Random form specs over a dynamic value type, for round-trip checks.

use proptest::prelude::*;
use spicey::calendar;
use spicey::html::{default_submission, FormEnv, HtmlExp};
use spicey::wui::*;

#[derive(Clone, Debug, PartialEq)]
pub enum V {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    Date(i64),
    Sel(u8),
    Multi(Vec<u8>),
    Opt(Option<Box<V>>),
    Tup(Vec<V>),
}

#[derive(Clone, Debug)]
pub enum Shape {
    Str,
    ReqStr,
    Int,
    Float,
    Bool,
    Date,
    Select(u8),
    Multi(u8),
    Maybe(Box<Shape>),
    Tuple(Vec<Shape>),
    Labelled(Vec<Shape>),
    /// Condition satisfied by every generated value.
    Checked(Box<Shape>),
}

fn leaf() -> impl Strategy<Value = Shape> {
    prop_oneof![
        Just(Shape::Str),
        Just(Shape::ReqStr),
        Just(Shape::Int),
        Just(Shape::Float),
        Just(Shape::Bool),
        Just(Shape::Date),
        (1u8..8).prop_map(Shape::Select),
        (0u8..8).prop_map(Shape::Multi),
    ]
}

/// Specs with at most three levels of combinators above the leaves.
pub fn shape() -> impl Strategy<Value = Shape> {
    leaf().prop_recursive(3, 48, 6, |inner| {
        prop_oneof![
            inner.clone().prop_map(|s| Shape::Maybe(Box::new(s))),
            prop::collection::vec(inner.clone(), 2..=6).prop_map(Shape::Tuple),
            prop::collection::vec(inner.clone(), 2..=6).prop_map(Shape::Labelled),
            inner.prop_map(|s| Shape::Checked(Box::new(s))),
        ]
    })
}

pub fn depth(s: &Shape) -> usize {
    match s {
        Shape::Maybe(i) | Shape::Checked(i) => 1 + depth(i),
        Shape::Tuple(cs) | Shape::Labelled(cs) => 1 + cs.iter().map(depth).max().unwrap_or(0),
        _ => 0,
    }
}

fn text() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9 &<>\"'%+=;/\\\\äß€✓-]{0,12}"
}

const DATE_MIN: i64 = -2_208_988_800; // 1900-01-01
const DATE_MAX: i64 = 253_402_300_799; // 9999-12-31T23:59:59

pub fn value(s: &Shape) -> BoxedStrategy<V> {
    match s {
        Shape::Str => text().prop_map(V::Str).boxed(),
        Shape::ReqStr => text()
            .prop_filter("nonempty", |s| !s.is_empty())
            .prop_map(V::Str)
            .boxed(),
        Shape::Int => any::<i64>().prop_map(V::Int).boxed(),
        Shape::Float => prop_oneof![
            prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO,
            (-1e6f64..1e6),
        ]
        .prop_map(V::Float)
        .boxed(),
        Shape::Bool => any::<bool>().prop_map(V::Bool).boxed(),
        Shape::Date => (DATE_MIN..=DATE_MAX).prop_map(V::Date).boxed(),
        Shape::Select(n) => (0..*n).prop_map(V::Sel).boxed(),
        Shape::Multi(0) => Just(V::Multi(vec![])).boxed(),
        Shape::Multi(n) => prop::collection::btree_set(0..*n, 0..=(*n as usize))
            .prop_map(|set| V::Multi(set.into_iter().collect()))
            .boxed(),
        Shape::Maybe(inner) => prop::option::of(value(inner))
            .prop_map(|o| V::Opt(o.map(Box::new)))
            .boxed(),
        Shape::Tuple(cs) | Shape::Labelled(cs) => cs.iter().map(value).collect::<Vec<_>>().prop_map(V::Tup).boxed(),
        Shape::Checked(inner) => value(inner),
    }
}

pub fn default_value(s: &Shape) -> V {
    match s {
        Shape::Str => V::Str(String::new()),
        Shape::ReqStr => V::Str("x".into()),
        Shape::Int => V::Int(0),
        Shape::Float => V::Float(0.0),
        Shape::Bool => V::Bool(false),
        Shape::Date => V::Date(0),
        Shape::Select(_) => V::Sel(0),
        Shape::Multi(_) => V::Multi(vec![]),
        Shape::Maybe(_) => V::Opt(None),
        Shape::Tuple(cs) | Shape::Labelled(cs) => V::Tup(cs.iter().map(default_value).collect()),
        Shape::Checked(inner) => default_value(inner),
    }
}

fn wrong(v: &V) -> ! {
    panic!("value {v:?} does not fit the spec")
}

fn leaf_spec<T: Send + Sync + 'static>(w: WuiSpec<T>, to: fn(T) -> V, from: fn(&V) -> Option<T>) -> WuiSpec<V> {
    w.transform(to, move |v| from(v).unwrap_or_else(|| wrong(v)))
}

fn tup(v: &V, i: usize) -> V {
    match v {
        V::Tup(cs) => cs[i].clone(),
        other => wrong(other),
    }
}

/// Tuple over the component specs, optionally with one label per component.
fn tuple_spec(cs: &[Shape], labelled: bool) -> WuiSpec<V> {
    let mut s: Vec<WuiSpec<V>> = cs.iter().map(build).collect();
    let labels: Vec<String> = (0..cs.len()).map(|i| format!("Label {i}")).collect();
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    let rendering = if labelled {
        render_labels(&refs)
    } else {
        Rendering::vertical()
    };
    macro_rules! pack {
        ($f:ident, $($i:tt),+) => {{
            let mut it = s.drain(..);
            $f($({ let _ = $i; it.next().unwrap() }),+)
                .with_rendering(rendering)
                .expect("one label per component")
                .transform(|t| V::Tup(vec![$(t.$i),+]), |v| ($(tup(v, $i),)+))
        }};
    }
    match cs.len() {
        2 => pack!(w_pair, 0, 1),
        3 => pack!(w_triple, 0, 1, 2),
        4 => pack!(w4_tuple, 0, 1, 2, 3),
        5 => pack!(w5_tuple, 0, 1, 2, 3, 4),
        6 => pack!(w6_tuple, 0, 1, 2, 3, 4, 5),
        n => panic!("no tuple of arity {n}"),
    }
}

pub fn build(s: &Shape) -> WuiSpec<V> {
    match s {
        Shape::Str => leaf_spec(w_string(), V::Str, |v| match v {
            V::Str(s) => Some(s.clone()),
            _ => None,
        }),
        Shape::ReqStr => leaf_spec(w_required_string(), V::Str, |v| match v {
            V::Str(s) => Some(s.clone()),
            _ => None,
        }),
        Shape::Int => leaf_spec(w_int(), V::Int, |v| match v {
            V::Int(i) => Some(*i),
            _ => None,
        }),
        Shape::Float => leaf_spec(w_float(), V::Float, |v| match v {
            V::Float(f) => Some(*f),
            _ => None,
        }),
        Shape::Bool => leaf_spec(w_bool(), V::Bool, |v| match v {
            V::Bool(b) => Some(*b),
            _ => None,
        }),
        Shape::Date => leaf_spec(
            w_date(),
            |t| V::Date(calendar::to_epoch_seconds(&t)),
            |v| match v {
                V::Date(s) => calendar::from_epoch_seconds(*s),
                _ => None,
            },
        ),
        Shape::Select(n) => {
            w_select(|i: &u8| format!("choice {i}"), (0..*n).collect()).transform(V::Sel, |v| match v {
                V::Sel(i) => *i,
                other => wrong(other),
            })
        }
        Shape::Multi(n) => {
            w_multi_select(|i: &u8| format!("item {i}"), (0..*n).collect()).transform(V::Multi, |v| match v {
                V::Multi(is) => is.clone(),
                other => wrong(other),
            })
        }
        Shape::Maybe(inner) => w_maybe(build(inner), default_value(inner)).transform(
            |o| V::Opt(o.map(Box::new)),
            |v| match v {
                V::Opt(o) => o.as_deref().cloned(),
                other => wrong(other),
            },
        ),
        Shape::Tuple(cs) => tuple_spec(cs, false),
        Shape::Labelled(cs) => tuple_spec(cs, true),
        Shape::Checked(inner) => build(inner).with_condition(|_| true),
    }
}

/// Browser submission of the rendered form, sent through URL encoding.
pub fn submission(spec: &WuiSpec<V>, v: &V) -> FormEnv {
    let env = default_submission(&[spec.render(ROOT_PATH, v)]);
    FormEnv::from_urlencoded(env.to_urlencoded().as_bytes())
}

/// Checks decode(render(v)) == Ok(v).
pub fn round_trip(s: &Shape, v: &V) -> Result<(), String> {
    let spec = build(s);
    match spec.decode(ROOT_PATH, &submission(&spec, v)) {
        Decoded::Ok(got) if &got == v => Ok(()),
        Decoded::Ok(got) => Err(format!("decoded {got:?}, expected {v:?}")),
        Decoded::Invalid(_) => Err(format!("{v:?} did not decode")),
    }
}

/// Names of all input fields in a rendering.
pub fn field_names(h: &HtmlExp) -> Vec<String> {
    let mut names = vec![];
    h.walk(&mut |n| {
        if matches!(n.tag(), Some("input") | Some("select") | Some("textarea")) {
            if let Some(name) = n.attr("name") {
                names.push(name.to_string());
            }
        }
    });
    names
}

/// Leaves whose input can be made undecodable, with the field to corrupt
/// and the value to put there. Leaves below an absent optional are skipped.
pub fn corruptible(s: &Shape, v: &V, path: &str, out: &mut Vec<(String, String)>) {
    match (s, v) {
        (Shape::Int, _) => out.push((path.to_string(), "12x".into())),
        (Shape::Float, _) => out.push((path.to_string(), "one".into())),
        (Shape::Date, _) => out.push((child_path(path, 1), "13".into())),
        (Shape::Select(_), _) => out.push((path.to_string(), "99".into())),
        (Shape::Maybe(inner), V::Opt(Some(iv))) => corruptible(inner, iv, &child_path(path, 1), out),
        (Shape::Tuple(cs) | Shape::Labelled(cs), V::Tup(vs)) => {
            for (i, (c, cv)) in cs.iter().zip(vs).enumerate() {
                corruptible(c, cv, &child_path(path, i), out);
            }
        }
        (Shape::Checked(inner), _) => corruptible(inner, v, path, out),
        _ => {}
    }
}

pub fn error_count(h: &HtmlExp) -> usize {
    let mut n = 0;
    h.walk(&mut |e| {
        if e.attr("class") == Some(ERROR_CLASS) {
            n += 1;
        }
    });
    n
}
