//! HTTP service, file-backed session store and command line for document
//! assembly sessions.

pub mod api;
pub mod catalog;
pub mod cli;
pub mod store;
