//! Satisfiability and model checking for anchored distributed temporal logic.

pub mod error;
pub mod exec;
pub mod export;
pub mod automata;
pub mod corpus;
pub mod bridge;
pub mod dalpha;
pub mod formula;
pub mod parse;
pub mod product;
pub mod semantics;
pub mod signature;
pub mod tableau;
pub mod word;

pub use error::{DtlError, Result};
