//! The tracker λ-calculus: syntax, parser and denotation.

mod interp;
mod parser;
mod syntax;

pub use interp::{beta_soundness_check, combinator, graph, interp, interp_str, BetaCase, BetaReport, Env};
pub use parser::parse;
pub use syntax::{app, lam, meet, quote, var, Binder, Combinator, Term};
