//! Route tables mapping URL paths to controller references.

use std::fmt;
use std::sync::Arc;

use percent_encoding::percent_decode_str;

use crate::html::{href, htxt, ulist, HtmlExp};

/// How a route selects the first path segment.
#[derive(Clone)]
pub enum RouteMatcher {
    Exact(String),
    Prefix(String),
    Always,
    Custom(Arc<dyn Fn(&str) -> bool + Send + Sync>),
}

impl RouteMatcher {
    pub fn exact(name: &str) -> Self {
        RouteMatcher::Exact(name.to_string())
    }

    pub fn prefix(name: &str) -> Self {
        RouteMatcher::Prefix(name.to_string())
    }

    pub fn custom(pred: impl Fn(&str) -> bool + Send + Sync + 'static) -> Self {
        RouteMatcher::Custom(Arc::new(pred))
    }

    pub fn matches(&self, segment: &str) -> bool {
        match self {
            RouteMatcher::Exact(s) => s == segment,
            RouteMatcher::Prefix(s) => segment.starts_with(s.as_str()),
            RouteMatcher::Always => true,
            RouteMatcher::Custom(p) => p(segment),
        }
    }
}

impl fmt::Debug for RouteMatcher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RouteMatcher::Exact(s) => write!(f, "Exact({s:?})"),
            RouteMatcher::Prefix(s) => write!(f, "Prefix({s:?})"),
            RouteMatcher::Always => f.write_str("Always"),
            RouteMatcher::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Route<R> {
    pub label: String,
    pub matcher: RouteMatcher,
    pub target: R,
}

impl<R> Route<R> {
    pub fn new(label: &str, matcher: RouteMatcher, target: R) -> Self {
        Route {
            label: label.to_string(),
            matcher,
            target,
        }
    }
}

/// Target of the first route accepting `segment`, or `fallback`.
pub fn dispatch<R: Clone>(segment: &str, routes: &[Route<R>], fallback: &R) -> R {
    routes
        .iter()
        .find(|r| r.matcher.matches(segment))
        .map(|r| r.target.clone())
        .unwrap_or_else(|| fallback.clone())
}

/// Splits a request path into its first segment and the remaining
/// percent-decoded segments. Any query string is dropped.
pub fn split_path(path: &str) -> (String, Vec<String>) {
    let path = path.split(['?', '#']).next().unwrap_or("");
    let mut segs = path
        .split('/')
        .filter(|s| !s.is_empty())
        .map(|s| percent_decode_str(s).decode_utf8_lossy().into_owned());
    let first = segs.next().unwrap_or_default();
    (first, segs.collect())
}

/// Navigation list with one link per `Exact` route, in route order.
pub fn menu_from_routes<R>(routes: &[Route<R>]) -> HtmlExp {
    let items = routes
        .iter()
        .filter_map(|r| match &r.matcher {
            RouteMatcher::Exact(name) => Some(vec![href(&format!("/{name}"), vec![htxt(&r.label)])]),
            _ => None,
        })
        .collect();
    ulist(items).with_attr("class", "nav")
}
