//! Brute-force ground truth for small instances.
//!
//! Goods are enumerated outright. The cake is discretized by a
//! [`GridCakeModel`]; atoms that every agent values identically are grouped
//! and only the number of atoms each agent receives from a group is
//! searched over. Results are exact for the discretized space.

mod efm_set;
mod enumerate;
mod frontier;
mod grid;

pub use efm_set::{efm_exhaustive_check, efm_exhaustive_check_with, OUTPUT_CAP, STATE_BUDGET};
pub use enumerate::{efx_brute_force, efx_brute_force_with, enumerate_good_allocations, GOODS_BUDGET};
pub use frontier::{mnw_search, pareto_dominance_search, FRONTIER_BUDGET};
pub use grid::GridCakeModel;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{what}: {needed} exceeds the budget of {limit}")]
    Budget { what: &'static str, needed: String, limit: u64 },
}

pub(crate) fn budget(what: &'static str, needed: impl ToString, limit: u64) -> OracleError {
    OracleError::Budget {
        what,
        needed: needed.to_string(),
        limit,
    }
}
