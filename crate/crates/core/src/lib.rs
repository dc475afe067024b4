//! Executable realizability over finite implicative algebras.
//!
//! The modules build on each other: [`order`] supplies lattices and
//! implication tables, [`lambda`] interprets tracker terms into them,
//! [`algebra`] adds separators and the encoded connectives, and the
//! remaining modules construct assemblies, completions and the functor
//! into the category of implicative sets.

pub mod algebra;
pub mod assembly;
pub mod corpus;
pub mod error;
pub mod excomp;
pub mod lambda;
pub mod order;
pub mod regcomp;
pub mod seta;

pub use error::{Error, Result};
pub use order::{Elem, ElemSet, ImplicativeStructure, Lattice};
