//! Ground defeasible theories and their proof theory.
//!
//! Rules are grounded against the facts ([`ground_theory`]), then
//! [`prove`] tags every literal of the ground theory with definite (`±Δ`) and
//! defeasible (`±∂`) provability. Conflicts are resolved with the superiority
//! relation; unresolved conflicts block both sides.

mod decimal;
mod ground;
pub mod notation;
mod reasoner;
mod term;
mod theory;

pub use decimal::{Decimal, DecimalError, MAX_SCALE};
pub use ground::{
    ground_theory, ground_theory_with, GroundError, GroundRule, GroundTheory, GroundingOptions, DEFAULT_INSTANCE_CAP,
};
pub use reasoner::{
    conflict_set, proof_trace, prove, Conclusion, ConclusionSet, DefeatReason, DefeatedAttacker, ProofRecord, Reasoner,
    RuleRef, Tag, TraceError,
};
pub use term::{evaluate_guard, Atom, Comparator, Guard, GuardError, Literal, Term, Variable};
pub use theory::{BodyItem, ConflictDeclaration, Rule, Strength, Superiority, Theory, TheoryError};

#[cfg(test)]
mod tests;
