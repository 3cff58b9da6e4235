use std::collections::HashMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use percent_encoding::percent_decode_str;

use super::{Controller, RequestContext, Services};
use crate::auth::CredentialStore;
use crate::html::{h1, hidden_field, htxt, par, render_document, FormEnv, HtmlExp, PageLayout, FORM_TOKEN_FIELD};
use crate::persistence::Database;
use crate::process::{Bound, Processes};
use crate::routing::{dispatch, menu_from_routes, Route};
use crate::session::{SessionId, SessionStore, SESSION_COOKIE};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HttpRequest {
    pub method: String,
    /// Request target, i.e. path plus optional query.
    pub url: String,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
}

impl HttpRequest {
    pub fn get(url: &str) -> Self {
        HttpRequest {
            method: "GET".into(),
            url: url.into(),
            ..Default::default()
        }
    }

    pub fn post(url: &str, form: &FormEnv) -> Self {
        HttpRequest {
            method: "POST".into(),
            url: url.into(),
            headers: vec![("Content-Type".into(), "application/x-www-form-urlencoded".into())],
            body: form.to_urlencoded().into_bytes(),
        }
    }

    pub fn with_header(mut self, name: &str, value: &str) -> Self {
        self.headers.push((name.into(), value.into()));
        self
    }

    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
}

impl HttpResponse {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.body).into_owned()
    }
}

type RoutesFn<R> = Arc<dyn Fn(&RequestContext) -> Vec<Route<R>> + Send + Sync>;
type ControllerOf<R> = Arc<dyn Fn(&R) -> Controller + Send + Sync>;

/// Purge expired sessions once per this many requests.
const PURGE_EVERY: u64 = 256;

/// An assembled application: services, route table and the mapping from
/// controller references to controllers.
pub struct App<R> {
    title: String,
    services: Services,
    routes: RoutesFn<R>,
    controller_of: ControllerOf<R>,
    fallback: R,
    public_dir: Option<PathBuf>,
    requests: AtomicU64,
}

impl<R: Clone + Send + Sync + 'static> App<R> {
    /// `fallback` is dispatched to when no route matches.
    pub fn new(
        title: &str,
        db: Arc<Database>,
        routes: impl Fn(&RequestContext) -> Vec<Route<R>> + Send + Sync + 'static,
        controller_of: impl Fn(&R) -> Controller + Send + Sync + 'static,
        fallback: R,
    ) -> Self {
        App {
            title: title.to_string(),
            services: Services {
                db,
                sessions: Arc::new(SessionStore::default()),
                credentials: Arc::new(CredentialStore::in_memory()),
                processes: None,
            },
            routes: Arc::new(routes),
            controller_of: Arc::new(controller_of),
            fallback,
            public_dir: None,
            requests: AtomicU64::new(0),
        }
    }

    pub fn with_sessions(mut self, sessions: Arc<SessionStore>) -> Self {
        self.services.sessions = sessions;
        self
    }

    pub fn with_credentials(mut self, credentials: Arc<CredentialStore>) -> Self {
        self.services.credentials = credentials;
        self
    }

    /// Serve files below `dir` under `/public/`.
    pub fn with_public_dir(mut self, dir: &Path) -> Self {
        self.public_dir = Some(dir.to_path_buf());
        self
    }

    pub fn with_processes<ST: Send + Sync + 'static>(mut self, processes: Processes<ST, R>) -> Self {
        self.services.processes = Some(Arc::new(Bound {
            processes,
            controller: self.controller_of.clone(),
        }));
        self
    }

    pub fn services(&self) -> &Services {
        &self.services
    }

    pub fn controller(&self, r: &R) -> Controller {
        (self.controller_of)(r)
    }

    pub fn handle(&self, req: &HttpRequest) -> HttpResponse {
        let path = req.url.split(['?', '#']).next().unwrap_or("/");
        let path = if path.is_empty() { "/" } else { path };
        if let Some(rest) = path.strip_prefix("/public/") {
            return self.static_file(rest);
        }

        let cookies = parse_cookies(req.header("Cookie").unwrap_or(""));
        let existing = cookies.get(SESSION_COOKIE).and_then(|v| SessionId::parse(v));
        let new_session = existing.is_none();
        let sid = existing.unwrap_or_else(SessionId::fresh);
        let sessions = &self.services.sessions;
        sessions.touch(&sid);
        if self.requests.fetch_add(1, Ordering::Relaxed) % PURGE_EVERY == PURGE_EVERY - 1 {
            sessions.purge_expired(sessions.now());
        }

        let method = req.method.to_ascii_uppercase();
        let form = if method == "POST" {
            FormEnv::from_urlencoded(&req.body)
        } else {
            FormEnv::new()
        };
        let ctx = RequestContext::new(
            self.services.clone(),
            &method,
            path,
            form,
            cookies,
            sid.clone(),
            new_session,
        );

        let page = catch_unwind(AssertUnwindSafe(|| {
            let body = self.body(&ctx);
            let menu = menu_from_routes(&(self.routes)(&ctx));
            let message = ctx.get_page_message();
            (body, menu, message)
        }));
        let (status, document) = match page {
            Ok((body, menu, message)) => {
                let mut content = vec![hidden_field(FORM_TOKEN_FIELD, ctx.form_token())];
                content.extend(body);
                let form = HtmlExp::element("form", &[("method", "post"), ("action", path)], content);
                let layout = PageLayout::new(&self.title, menu, &message);
                (200, render_document(&layout, &[form]))
            }
            Err(_) => {
                log::error!("request {method} {path} failed in a controller");
                let layout = PageLayout::new(&self.title, htxt(""), "");
                let body = vec![
                    h1(vec![htxt("Internal server error")]),
                    par(vec![htxt("The request could not be completed.")]),
                ];
                (500, render_document(&layout, &body))
            }
        };

        let mut headers = vec![
            ("Content-Type".to_string(), "text/html; charset=utf-8".to_string()),
            ("Cache-Control".to_string(), "no-store".to_string()),
        ];
        if ctx.is_new_session() {
            headers.push(("Set-Cookie".to_string(), sid.set_cookie_header()));
        }
        headers.extend(ctx.take_headers());
        HttpResponse {
            status,
            headers,
            body: document.into_bytes(),
        }
    }

    fn body(&self, ctx: &RequestContext) -> Vec<HtmlExp> {
        if ctx.method() == "POST" {
            if let Some(token) = ctx.form().handler_token() {
                return match ctx.resolve_handler(token) {
                    Some((ctrl, form_token)) if ctx.form().first(FORM_TOKEN_FIELD) == Some(form_token.as_str()) => {
                        ctrl.run(ctx)
                    }
                    _ => expired_page(),
                };
            }
        }
        let routes = (self.routes)(ctx);
        let target = dispatch(ctx.route(), &routes, &self.fallback);
        (self.controller_of)(&target).run(ctx)
    }

    fn static_file(&self, rest: &str) -> HttpResponse {
        let not_found = || HttpResponse {
            status: 404,
            headers: vec![("Content-Type".into(), "text/plain; charset=utf-8".into())],
            body: b"not found".to_vec(),
        };
        let Some(dir) = &self.public_dir else {
            return not_found();
        };
        let mut file = dir.clone();
        for seg in rest.split('/') {
            let seg = percent_decode_str(seg).decode_utf8_lossy();
            if seg.is_empty() || seg == "." || seg == ".." || seg.contains(['\\', '\0']) {
                return not_found();
            }
            file.push(seg.as_ref());
        }
        match fs::read(&file) {
            Ok(body) => HttpResponse {
                status: 200,
                headers: vec![("Content-Type".into(), content_type(&file).into())],
                body,
            },
            Err(_) => not_found(),
        }
    }
}

fn expired_page() -> Vec<HtmlExp> {
    vec![
        h1(vec![htxt("Form expired")]),
        par(vec![htxt(
            "This form has expired or is no longer valid. Please reload the page and try again.",
        )])
        .with_attr("class", "error"),
    ]
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()).unwrap_or("") {
        "css" => "text/css; charset=utf-8",
        "js" => "text/javascript; charset=utf-8",
        "html" | "htm" => "text/html; charset=utf-8",
        "txt" => "text/plain; charset=utf-8",
        "png" => "image/png",
        "jpg" | "jpeg" => "image/jpeg",
        "gif" => "image/gif",
        "svg" => "image/svg+xml",
        "ico" => "image/x-icon",
        _ => "application/octet-stream",
    }
}

fn parse_cookies(header: &str) -> HashMap<String, String> {
    header
        .split(';')
        .filter_map(|c| {
            let (k, v) = c.split_once('=')?;
            Some((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}
