//! Allocations, fairness notions and envy graphs.

mod allocation;
mod checks;
mod graph;
mod interval;

pub use allocation::{Allocation, AllocationError, Bundle, PairValues, ValueTable};
pub use checks::{
    ef1_witnesses, is_ef, is_ef1, is_efm, is_efx, is_efx_mixed, is_eps_efm, is_weak_efm, CakePresent, EpsVerdict,
    FairnessReport, Notions, Verdict, Witness,
};
pub use graph::{eliminate_envy_cycle, EdgeKind, EnvyGraph};
pub use interval::IntervalSet;
