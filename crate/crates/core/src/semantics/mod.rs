//! Interpretation structures and the satisfaction relations.

mod eval;
mod structure;

pub use eval::{always_fixpoint_check, sat_global, sat_global_at, sat_local, GlobalProgram, Program, Table};
pub use structure::LassoStructure;

/// `μ^w`, the structure induced by a fair lasso word.
pub fn derive_structure(w: &crate::word::LassoWord, n_agents: usize) -> crate::error::Result<LassoStructure> {
    LassoStructure::from_word(w, n_agents)
}
