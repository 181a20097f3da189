//! Proof kernel for the deep-inference systems SBVr and BVr, together with
//! a linear lambda calculus with explicit substitutions that compiles into
//! them.
//!
//! The crate is organized around a small trusted core:
//!
//! * [`structure`] / [`canonical`] — the structure algebra and a decision
//!   procedure for its congruence;
//! * [`rules`] — the seven inference rules as deep rewrites, derivations,
//!   and an independent derivation checker;
//! * [`derived`] — combinators building checker-valid derivations for the
//!   derivable rules (general interaction, def, mix);
//! * [`lambda`] — linear lambda terms with explicit substitutions and their
//!   small-step reduction;
//! * [`translate`] — the output-channel map from terms to structures and
//!   its partial inverse;
//! * [`simulate`] — compilation of reduction traces into derivations;
//! * [`prover`] — bounded bottom-up proof search in the down fragment;
//! * [`imll`] — the intuitionistic multiplicative fragment and its
//!   internalization into structures.

pub mod atom;
pub mod canonical;
pub mod cert;
pub mod context;
pub mod derived;
pub mod imll;
pub mod lambda;
pub mod parse;
pub mod prover;
pub mod rules;
pub mod simulate;
pub mod structure;
pub mod translate;

#[cfg(feature = "corpus")]
pub mod corpus;

pub use atom::{Atom, AtomName, Namespace, Polarity};
pub use canonical::{canonicalize, equiv};
pub use context::Context;
pub use parse::{parse_structure, print_structure, ParseError};
pub use rules::{Derivation, RuleInstance, RuleName};
pub use structure::Structure;
