//! Round robin, the EFM algorithm, the two-agent cut-and-choose variant and
//! the ε-EFM algorithm. Every solver returns its allocation with a round by
//! round trace; in checked mode the per-round invariants are asserted and a
//! violation aborts the run with [`SolveError::Invariant`].

mod efm;
mod eps_efm;
mod round_robin;
mod trace;
mod two_agents;

pub use efm::solve_efm;
pub use eps_efm::solve_eps_efm;
pub use round_robin::round_robin_ef1;
pub use trace::{Cap, Phase, RoundRecord, SolverTrace};
pub use two_agents::{solve_two_agents, GoodsBase};

use crate::fairness::{Allocation, EnvyGraph, IntervalSet, ValueTable};
use crate::model::{Instance, QueryCounter, RwOracle};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    /// Assert the per-round invariants.
    pub checked: bool,
    /// Keep per-round records in the trace.
    pub keep_trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            checked: true,
            keep_trace: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invariant violated in round {round}: {message}")]
    Invariant { round: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub allocation: Allocation,
    pub trace: SolverTrace,
}

/// Values, envy graph and maximal addable set for the current allocation.
/// The table is kept up to date piece by piece rather than rebuilt.
struct Snapshot {
    table: ValueTable,
    graph: EnvyGraph,
    addable: Vec<usize>,
}

impl Snapshot {
    fn take(inst: &Instance, alloc: &Allocation, counter: &QueryCounter, eps: &Scalar) -> Self {
        let table = ValueTable::counted(inst, alloc, counter);
        let graph = EnvyGraph::from_table(&table, eps);
        let addable = graph.maximal_addable_set();
        Self { table, graph, addable }
    }

    /// Hands `piece` to `agent`, paying one eval per interval per agent.
    fn give(&mut self, alloc: &mut Allocation, rw: &RwOracle, agent: usize, piece: &IntervalSet) {
        let gained: Vec<Scalar> = (0..self.table.n()).map(|i| rw.value_of_set(i, piece)).collect();
        alloc.give_cake(agent, piece);
        self.table.add_cake(agent, &gained, !piece.is_empty());
    }

    fn rotate(&mut self, alloc: &mut Allocation, cycle: &[usize]) {
        alloc.rotate(cycle);
        self.table.rotate(cycle);
    }

    fn refresh(&mut self, eps: &Scalar) {
        self.graph = EnvyGraph::from_table(&self.table, eps);
        self.addable = self.graph.maximal_addable_set();
    }

    /// The running table against a from-scratch rebuild.
    fn audit(&self, inst: &Instance, alloc: &Allocation, round: usize) -> Result<(), SolveError> {
        ensure(self.table == ValueTable::new(inst, alloc), round, || {
            "incrementally maintained values disagree with a full recomputation".into()
        })
    }

    fn welfare(&self) -> Scalar {
        (0..self.table.n()).map(|i| self.table.own(i)).sum()
    }
}

fn ensure(ok: bool, round: usize, message: impl FnOnce() -> String) -> Result<(), SolveError> {
    if ok {
        Ok(())
    } else {
        Err(SolveError::Invariant {
            round,
            message: message(),
        })
    }
}

fn agents_outside(n: usize, inside: &[usize]) -> Vec<usize> {
    (0..n).filter(|i| !inside.contains(i)).collect()
}
