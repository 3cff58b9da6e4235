//! Multi-step user processes.
//!
//! A process is a state machine whose states map to controllers. While a
//! process is active, controllers that finish a step call
//! [`next_in_process_or`] to move on instead of showing their usual
//! follow-up page.

use std::sync::Arc;

use crate::html::{h1, href, htxt, par, ulist, HtmlExp};
use crate::runtime::{error_body, Controller, RequestContext};
use crate::session::SessionSlot;

/// Value a controller may pass to the transition function.
pub type ControllerResult = String;

/// Encoded state of the running process; absent when none is active.
pub const ACTIVE_PROCESS: SessionSlot<String> = SessionSlot::new("activeProcess");

type Next<ST> = Arc<dyn Fn(&ST, Option<&str>) -> Option<ST> + Send + Sync>;
type ControllerOf<ST, R> = Arc<dyn Fn(&ST) -> Option<R> + Send + Sync>;
type Decode<ST> = Arc<dyn Fn(&str) -> Option<ST> + Send + Sync>;

/// Specification of the processes of an application.
pub struct Processes<ST, R> {
    start_states: Vec<(String, ST)>,
    controller_of: ControllerOf<ST, R>,
    next: Next<ST>,
    encode: Arc<dyn Fn(&ST) -> String + Send + Sync>,
    decode: Decode<ST>,
}

impl<R> Processes<i64, R> {
    /// Processes over integer states.
    pub fn new(
        start_states: Vec<(&str, i64)>,
        controller_of: impl Fn(&i64) -> Option<R> + Send + Sync + 'static,
        next: impl Fn(&i64, Option<&str>) -> Option<i64> + Send + Sync + 'static,
    ) -> Self {
        Processes::with_codec(start_states, controller_of, next, |s| s.to_string(), |s| s.parse().ok())
    }
}

impl<ST, R> Processes<ST, R> {
    pub fn with_codec(
        start_states: Vec<(&str, ST)>,
        controller_of: impl Fn(&ST) -> Option<R> + Send + Sync + 'static,
        next: impl Fn(&ST, Option<&str>) -> Option<ST> + Send + Sync + 'static,
        encode: impl Fn(&ST) -> String + Send + Sync + 'static,
        decode: impl Fn(&str) -> Option<ST> + Send + Sync + 'static,
    ) -> Self {
        Processes {
            start_states: start_states.into_iter().map(|(d, s)| (d.to_string(), s)).collect(),
            controller_of: Arc::new(controller_of),
            next: Arc::new(next),
            encode: Arc::new(encode),
            decode: Arc::new(decode),
        }
    }

    /// No processes at all.
    pub fn empty() -> Self
    where
        ST: 'static,
    {
        Processes {
            start_states: vec![],
            controller_of: Arc::new(|_| None),
            next: Arc::new(|_, _| None),
            encode: Arc::new(|_| String::new()),
            decode: Arc::new(|_| None),
        }
    }

    pub fn start_states(&self) -> &[(String, ST)] {
        &self.start_states
    }
}

/// Type-erased process specification bound to the controllers of an app.
pub trait ProcessEngine: Send + Sync {
    fn descriptions(&self) -> Vec<String>;

    /// Activates start state `index` and returns its controller.
    fn start(&self, ctx: &RequestContext, index: usize) -> Option<Controller>;

    /// Advances the active process, if any; see [`next_in_process_or`].
    fn advance(&self, ctx: &RequestContext, default: Controller, result: Option<&str>) -> Controller;
}

pub(crate) struct Bound<ST, R> {
    pub processes: Processes<ST, R>,
    pub controller: Arc<dyn Fn(&R) -> Controller + Send + Sync>,
}

impl<ST: Send + Sync, R: Send + Sync> Bound<ST, R> {
    /// Stores `state` as the active one, or clears the slot when `state` has
    /// no successor, and returns its controller.
    fn enter(&self, ctx: &RequestContext, state: &ST) -> Controller {
        let Some(r) = (self.processes.controller_of)(state) else {
            ctx.remove_session_data(ACTIVE_PROCESS);
            return Controller::new(|_| error_body("process state without controller"));
        };
        if (self.processes.next)(state, None).is_some() {
            ctx.put_session_data(ACTIVE_PROCESS, (self.processes.encode)(state));
        } else {
            ctx.remove_session_data(ACTIVE_PROCESS);
        }
        (self.controller)(&r)
    }
}

impl<ST: Send + Sync, R: Send + Sync> ProcessEngine for Bound<ST, R> {
    fn descriptions(&self) -> Vec<String> {
        self.processes.start_states.iter().map(|(d, _)| d.clone()).collect()
    }

    fn start(&self, ctx: &RequestContext, index: usize) -> Option<Controller> {
        let (_, state) = self.processes.start_states.get(index)?;
        Some(self.enter(ctx, state))
    }

    fn advance(&self, ctx: &RequestContext, default: Controller, result: Option<&str>) -> Controller {
        let Some(encoded) = ctx.get_session_data(ACTIVE_PROCESS) else {
            return default;
        };
        let Some(state) = (self.processes.decode)(&encoded) else {
            ctx.remove_session_data(ACTIVE_PROCESS);
            return default;
        };
        match (self.processes.next)(&state, result) {
            Some(next) => self.enter(ctx, &next),
            None => {
                ctx.remove_session_data(ACTIVE_PROCESS);
                default
            }
        }
    }
}

/// `default` when no process is active; otherwise the controller of the
/// next process state, ending the process when there is none.
///
/// A state without successor for an absent result ends the process as soon
/// as it is entered.
pub fn next_in_process_or(ctx: &RequestContext, default: Controller, result: Option<&str>) -> Controller {
    match ctx.processes() {
        Some(engine) => engine.advance(ctx, default, result),
        None => default,
    }
}

/// Encoded state of the active process of the current session.
pub fn active_process(ctx: &RequestContext) -> Option<String> {
    ctx.get_session_data(ACTIVE_PROCESS)
}

/// Process menu at `/processes`, and process start at
/// `/processes/start/<index>`.
pub fn process_list_controller() -> Controller {
    Controller::new(|ctx| {
        if let [cmd, index] = ctx.params() {
            if cmd == "start" {
                return start_process(ctx, index);
            }
        }
        process_menu(ctx)
    })
}

fn start_process(ctx: &RequestContext, index: &str) -> Vec<HtmlExp> {
    let started = index
        .parse::<usize>()
        .ok()
        .and_then(|i| ctx.processes().and_then(|e| e.start(ctx, i)));
    match started {
        Some(ctrl) => ctrl.run(ctx),
        None => error_body(&format!("no process with index {index}")),
    }
}

fn process_menu(ctx: &RequestContext) -> Vec<HtmlExp> {
    let descriptions = ctx.processes().map(|e| e.descriptions()).unwrap_or_default();
    let mut page = vec![h1(vec![htxt("Processes")])];
    if descriptions.is_empty() {
        page.push(par(vec![htxt("No processes are defined.")]));
    } else {
        page.push(ulist(
            descriptions
                .iter()
                .enumerate()
                .map(|(i, d)| vec![href(&format!("/processes/start/{i}"), vec![htxt(d)])])
                .collect(),
        ));
    }
    let status = match active_process(ctx) {
        Some(state) => format!("Active process state: {state}"),
        None => "No active process".to_string(),
    };
    page.push(par(vec![htxt(&status)]).with_attr("class", "process-status"));
    page
}
