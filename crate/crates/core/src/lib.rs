//! Runtime support for generated web applications backed by an
//! entity-relationship model.

pub mod auth;
pub mod calendar;
pub mod erd;
pub mod html;
pub mod persistence;
pub mod process;
pub mod routing;
pub mod runtime;
pub mod session;
pub mod wui;
