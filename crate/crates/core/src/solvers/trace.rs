use serde::Serialize;

use crate::fairness::IntervalSet;
use crate::model::QueryCounts;
use crate::scalar::{serde_opt_scalar, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Phase {
    Init,
    CakeAdd,
    CycleElim,
    FinalEf,
}

/// Per-agent cap on the next cake piece (`|S| δ_i` or `ε̂`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cap {
    pub agent: usize,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub target: Scalar,
}

/// One round of a solver. Agents are 0-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub phase: Phase,
    pub envy_edges_before: usize,
    pub envy_edges_after: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub addable_set: Option<Vec<usize>>,
    /// Size of the maximal addable set once the round is done.
    pub addable_size_after: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub caps: Vec<Cap>,
    /// `i*`: the agent whose cap bounded the piece.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub binding_agent: Option<usize>,
    /// The piece handed out this round was all of the remaining cake.
    pub whole_remaining: bool,
    pub piece_allocated: IntervalSet,
    #[serde(with = "serde_opt_scalar", skip_serializing_if = "Option::is_none")]
    pub eps_hat: Option<Scalar>,
    /// Slack the cake subroutine was run with (`ε/4` or `ε'`).
    #[serde(with = "serde_opt_scalar", skip_serializing_if = "Option::is_none")]
    pub subroutine_eps: Option<Scalar>,
    /// Largest envy among the receiving agents over their new pieces.
    #[serde(with = "serde_opt_scalar", skip_serializing_if = "Option::is_none")]
    pub subroutine_envy: Option<Scalar>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atoms: Option<usize>,
    /// `Σ_i u_i(remaining cake)` before and after the round.
    #[serde(with = "serde_opt_scalar", skip_serializing_if = "Option::is_none")]
    pub remaining_value_before: Option<Scalar>,
    #[serde(with = "serde_opt_scalar", skip_serializing_if = "Option::is_none")]
    pub remaining_value_after: Option<Scalar>,
    #[serde(with = "serde_opt_scalar", skip_serializing_if = "Option::is_none")]
    pub welfare_before: Option<Scalar>,
    #[serde(with = "serde_opt_scalar", skip_serializing_if = "Option::is_none")]
    pub welfare_after: Option<Scalar>,
    /// Cumulative counters after the round.
    pub queries: QueryCounts,
}

impl RoundRecord {
    pub(crate) fn new(round: usize, phase: Phase) -> Self {
        Self {
            round,
            phase,
            envy_edges_before: 0,
            envy_edges_after: 0,
            addable_set: None,
            addable_size_after: 0,
            cycle: None,
            caps: Vec::new(),
            binding_agent: None,
            whole_remaining: false,
            piece_allocated: IntervalSet::empty(),
            eps_hat: None,
            subroutine_eps: None,
            subroutine_envy: None,
            atoms: None,
            remaining_value_before: None,
            remaining_value_after: None,
            welfare_before: None,
            welfare_after: None,
            queries: QueryCounts::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolverTrace {
    pub algorithm: String,
    pub n: usize,
    pub m: usize,
    #[serde(with = "serde_opt_scalar", skip_serializing_if = "Option::is_none")]
    pub eps: Option<Scalar>,
    /// Number of rounds run, including `INIT`, even when records are dropped.
    pub round_count: usize,
    pub cake_rounds: usize,
    pub cycle_rounds: usize,
    pub rounds: Vec<RoundRecord>,
    pub totals: QueryCounts,
    #[serde(with = "serde_opt_scalar", skip_serializing_if = "Option::is_none")]
    pub final_eps_hat: Option<Scalar>,
}

impl SolverTrace {
    pub(crate) fn new(algorithm: &str, n: usize, m: usize, eps: Option<Scalar>) -> Self {
        Self {
            algorithm: algorithm.to_string(),
            n,
            m,
            eps,
            round_count: 0,
            cake_rounds: 0,
            cycle_rounds: 0,
            rounds: Vec::new(),
            totals: QueryCounts::default(),
            final_eps_hat: None,
        }
    }

    pub(crate) fn push(&mut self, rec: RoundRecord, keep: bool) {
        self.round_count += 1;
        match rec.phase {
            Phase::CakeAdd | Phase::FinalEf => self.cake_rounds += 1,
            Phase::CycleElim => self.cycle_rounds += 1,
            Phase::Init => {}
        }
        self.totals = rec.queries;
        if keep {
            self.rounds.push(rec);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("traces always serialize")
    }
}
