//! Request handling for generated applications.
//!
//! A [`Controller`] computes the body of a page within a [`RequestContext`].
//! The [`App`] maps requests to controllers, either through the route table
//! or through a handler registered by an earlier page, and wraps the result
//! in the standard layout.

mod app;
mod server;

use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

pub use app::{App, HttpRequest, HttpResponse};
pub use server::{run_main, serve, CliArgs};

use crate::auth::CredentialStore;
use crate::html::{self, h1, htxt, par, FormEnv, HandlerKind, HandlerRef, HtmlExp};
use crate::persistence::Database;
use crate::process::ProcessEngine;
use crate::session::{HandlerRegistry, SessionId, SessionSlot, SessionStore};

type Body = Arc<dyn Fn(&RequestContext) -> Vec<HtmlExp> + Send + Sync>;

/// Computation producing a page body.
#[derive(Clone)]
pub struct Controller(Body);

impl Controller {
    pub fn new(f: impl Fn(&RequestContext) -> Vec<HtmlExp> + Send + Sync + 'static) -> Self {
        Controller(Arc::new(f))
    }

    pub fn run(&self, ctx: &RequestContext) -> Vec<HtmlExp> {
        (self.0)(ctx)
    }
}

impl fmt::Debug for Controller {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Controller")
    }
}

/// Registered handler together with the form token of the page it was
/// rendered into.
pub(crate) type HandlerEntry = (Controller, String);

pub(crate) const HANDLERS: SessionSlot<HandlerRegistry<HandlerEntry>> = SessionSlot::new("__handlers");

/// Shared services of a running application.
#[derive(Clone)]
pub struct Services {
    pub db: Arc<Database>,
    pub sessions: Arc<SessionStore>,
    pub credentials: Arc<CredentialStore>,
    pub processes: Option<Arc<dyn ProcessEngine>>,
}

/// Everything a controller may consult during one request.
pub struct RequestContext {
    services: Services,
    method: String,
    path: String,
    route: String,
    params: Vec<String>,
    form: FormEnv,
    session: SessionId,
    new_session: Cell<bool>,
    form_token: String,
    handlers_registered: Cell<usize>,
    extra_headers: RefCell<Vec<(String, String)>>,
    cookies: HashMap<String, String>,
}

impl RequestContext {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        services: Services,
        method: &str,
        path: &str,
        form: FormEnv,
        cookies: HashMap<String, String>,
        session: SessionId,
        new_session: bool,
    ) -> Self {
        let (route, params) = crate::routing::split_path(path);
        RequestContext {
            services,
            method: method.to_string(),
            path: path.to_string(),
            route,
            params,
            form,
            session,
            new_session: Cell::new(new_session),
            form_token: crate::session::random_token(),
            handlers_registered: Cell::new(0),
            extra_headers: RefCell::new(vec![]),
            cookies,
        }
    }

    /// Context for running controllers outside an HTTP server, e.g. in tests.
    pub fn detached(services: Services, method: &str, path: &str, form: FormEnv, session: SessionId) -> Self {
        Self::new(services, method, path, form, HashMap::new(), session, false)
    }

    pub fn services(&self) -> &Services {
        &self.services
    }

    pub fn db(&self) -> &Database {
        &self.services.db
    }

    pub fn sessions(&self) -> &SessionStore {
        &self.services.sessions
    }

    pub fn credentials(&self) -> &CredentialStore {
        &self.services.credentials
    }

    pub fn processes(&self) -> Option<&Arc<dyn ProcessEngine>> {
        self.services.processes.as_ref()
    }

    pub fn method(&self) -> &str {
        &self.method
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    /// First path segment, used for route selection.
    pub fn route(&self) -> &str {
        &self.route
    }

    /// Remaining path segments, percent-decoded.
    pub fn params(&self) -> &[String] {
        &self.params
    }

    /// Submitted form data; empty for GET requests.
    pub fn form(&self) -> &FormEnv {
        &self.form
    }

    pub fn cookie(&self, name: &str) -> Option<&str> {
        self.cookies.get(name).map(String::as_str)
    }

    pub fn session_id(&self) -> &SessionId {
        &self.session
    }

    pub(crate) fn is_new_session(&self) -> bool {
        self.new_session.get()
    }

    pub fn form_token(&self) -> &str {
        &self.form_token
    }

    pub fn get_session_data<T: Clone + 'static>(&self, slot: SessionSlot<T>) -> Option<T> {
        self.sessions().get(slot, &self.session)
    }

    pub fn put_session_data<T: Send + 'static>(&self, slot: SessionSlot<T>, value: T) {
        self.sessions().put(slot, &self.session, value)
    }

    pub fn remove_session_data<T>(&self, slot: SessionSlot<T>) {
        self.sessions().remove(slot, &self.session)
    }

    pub fn set_page_message(&self, msg: &str) {
        self.sessions().set_page_message(&self.session, msg)
    }

    pub fn get_page_message(&self) -> String {
        self.sessions().get_page_message(&self.session)
    }

    pub fn add_header(&self, name: &str, value: &str) {
        self.extra_headers
            .borrow_mut()
            .push((name.to_string(), value.to_string()));
    }

    pub(crate) fn take_headers(&self) -> Vec<(String, String)> {
        std::mem::take(&mut self.extra_headers.borrow_mut())
    }

    /// Number of handlers registered while serving this request.
    pub fn handlers_registered(&self) -> usize {
        self.handlers_registered.get()
    }

    pub(crate) fn resolve_handler(&self, token: &str) -> Option<HandlerEntry> {
        self.sessions()
            .update(HANDLERS, &self.session, HandlerRegistry::default, |r| r.resolve(token))
    }
}

/// Registers `ctrl` as the continuation of a button on the current page.
pub fn next_controller(ctx: &RequestContext, ctrl: Controller) -> HandlerRef {
    let entry = (ctrl, ctx.form_token.clone());
    let token = ctx
        .sessions()
        .update(HANDLERS, &ctx.session, HandlerRegistry::default, |r| r.register(entry));
    ctx.handlers_registered.set(ctx.handlers_registered.get() + 1);
    HandlerRef {
        token,
        kind: HandlerKind::SubmitButton,
    }
}

/// Submit button running `ctrl` when pressed.
pub fn button_to(ctx: &RequestContext, label: &str, ctrl: Controller) -> HtmlExp {
    html::button(label, &next_controller(ctx, ctrl))
}

/// Page body showing `msg`; never touches the database.
pub fn display_error(msg: &str) -> Controller {
    let msg = if msg.trim().is_empty() {
        "operation failed".to_string()
    } else {
        msg.to_string()
    };
    Controller::new(move |_| error_body(&msg))
}

pub(crate) fn error_body(msg: &str) -> Vec<HtmlExp> {
    vec![
        h1(vec![htxt("Error")]),
        par(vec![htxt(msg)]).with_attr("class", "error"),
    ]
}
