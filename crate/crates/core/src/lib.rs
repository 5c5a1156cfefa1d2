//! Knowledge-based legal document assembly.
//!
//! The analysis phase binds a LegalRuleML rule-base ([`rulebase`]), a
//! ToXgene-style template ([`template`]) and an interview ([`config`]). The
//! synthesis phase ([`session`]) collects answers, reasons over them with
//! defeasible logic ([`logic`]), renders an Akoma Ntoso document and builds an
//! argument graph ([`graph`]) explaining the derived claims.

pub mod config;
pub mod facts;
pub mod graph;
pub mod logic;
pub mod rulebase;
pub mod session;
pub mod template;
mod xml;
