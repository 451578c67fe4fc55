//! Problem instances, valuation arithmetic and the Robertson–Webb query
//! interface.

mod density;
mod json;
mod query;

use std::collections::BTreeSet;

use num_traits::{One, Zero};

pub use density::{Density, DensityError, DensitySegment};
pub use json::{load_instance, load_instance_str, InstanceDoc, LoadError};
pub use query::{cut_in_segment, QueryCounter, QueryCounts, QueryError, RwOracle};

use crate::fairness::IntervalSet;
use crate::scalar::{cut_tolerance, int, Scalar};

/// One agent's utilities for the indivisible goods plus a cake density.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentValuation {
    pub goods: Vec<Scalar>,
    pub density: Density,
}

impl AgentValuation {
    pub fn total(&self) -> Scalar {
        self.goods.iter().sum::<Scalar>() + self.density.total()
    }

    fn scaled(&self, factor: &Scalar) -> Self {
        Self {
            goods: self.goods.iter().map(|g| g * factor).collect(),
            density: self.density.scaled(factor),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("an instance needs at least one agent")]
    NoAgents,
    #[error("agent {agent}: expected {expected} good utilities, got {got}")]
    GoodCount { agent: usize, expected: usize, got: usize },
    #[error("agent {agent}: negative utility for good {good}")]
    NegativeGood { agent: usize, good: usize },
    #[error("expected {expected} valuations, got {got}")]
    ValuationCount { expected: usize, got: usize },
    #[error("agent {agent}: total utility is zero, cannot normalize")]
    ZeroTotal { agent: usize },
}

/// Agents, indivisible goods and one concatenated cake on `[0, 1]`.
///
/// Agents and goods are addressed by index; names are kept for I/O only.
/// Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    agents: Vec<String>,
    goods: Vec<String>,
    valuations: Vec<AgentValuation>,
    has_cake: bool,
    cake_offsets: Vec<Scalar>,
}

impl Instance {
    /// Builds an instance. With `has_cake == false` the densities are ignored
    /// and replaced by zero: there is no divisible resource at all.
    pub fn new(
        agents: Vec<String>,
        goods: Vec<String>,
        valuations: Vec<AgentValuation>,
        has_cake: bool,
    ) -> Result<Self, InstanceError> {
        if agents.is_empty() {
            return Err(InstanceError::NoAgents);
        }
        if valuations.len() != agents.len() {
            return Err(InstanceError::ValuationCount {
                expected: agents.len(),
                got: valuations.len(),
            });
        }
        let mut valuations = valuations;
        for (agent, v) in valuations.iter_mut().enumerate() {
            if v.goods.len() != goods.len() {
                return Err(InstanceError::GoodCount {
                    agent,
                    expected: goods.len(),
                    got: v.goods.len(),
                });
            }
            if let Some(good) = v.goods.iter().position(|u| u < &Scalar::zero()) {
                return Err(InstanceError::NegativeGood { agent, good });
            }
            if !has_cake {
                v.density = Density::zero();
            }
        }
        Ok(Self {
            agents,
            goods,
            valuations,
            has_cake,
            cake_offsets: vec![Scalar::zero(), int(1)],
        })
    }

    /// Convenience constructor with generated names `a1..an`, `g1..gm`.
    pub fn anonymous(goods: Vec<Vec<Scalar>>, densities: Option<Vec<Density>>) -> Result<Self, InstanceError> {
        let n = goods.len();
        let m = goods.first().map_or(0, Vec::len);
        let has_cake = densities.is_some();
        let densities = densities.unwrap_or_else(|| vec![Density::zero(); n]);
        if densities.len() != n {
            return Err(InstanceError::ValuationCount {
                expected: n,
                got: densities.len(),
            });
        }
        let valuations = goods
            .into_iter()
            .zip(densities)
            .map(|(goods, density)| AgentValuation { goods, density })
            .collect();
        Self::new(
            (1..=n).map(|i| format!("a{i}")).collect(),
            (1..=m).map(|g| format!("g{g}")).collect(),
            valuations,
            has_cake,
        )
    }

    pub(crate) fn with_cake_offsets(mut self, offsets: Vec<Scalar>) -> Self {
        self.cake_offsets = offsets;
        self
    }

    /// Rescales every agent so that `u_i(M ∪ C) = 1`.
    pub fn normalized(&self) -> Result<Self, InstanceError> {
        let mut out = self.clone();
        for (agent, v) in out.valuations.iter_mut().enumerate() {
            let total = v.total();
            if total.is_zero() {
                return Err(InstanceError::ZeroTotal { agent });
            }
            *v = v.scaled(&(Scalar::one() / total));
        }
        Ok(out)
    }

    pub fn is_normalized(&self) -> bool {
        self.valuations.iter().all(|v| v.total().is_one())
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn m(&self) -> usize {
        self.goods.len()
    }

    pub fn agent_names(&self) -> &[String] {
        &self.agents
    }

    pub fn good_names(&self) -> &[String] {
        &self.goods
    }

    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.agents.iter().position(|a| a == name)
    }

    pub fn good_index(&self, name: &str) -> Option<usize> {
        self.goods.iter().position(|g| g == name)
    }

    pub fn valuation(&self, agent: usize) -> &AgentValuation {
        &self.valuations[agent]
    }

    pub fn density(&self, agent: usize) -> &Density {
        &self.valuations[agent].density
    }

    pub fn good_value(&self, agent: usize, good: usize) -> &Scalar {
        &self.valuations[agent].goods[good]
    }

    pub fn goods_value<'a>(&self, agent: usize, goods: impl IntoIterator<Item = &'a usize>) -> Scalar {
        goods.into_iter().map(|&g| self.good_value(agent, g)).sum()
    }

    pub fn has_cake(&self) -> bool {
        self.has_cake
    }

    /// The whole divisible resource: `[0, 1)` or empty.
    pub fn cake(&self) -> IntervalSet {
        if self.has_cake {
            IntervalSet::unit()
        } else {
            IntervalSet::empty()
        }
    }

    pub fn cake_offsets(&self) -> &[Scalar] {
        &self.cake_offsets
    }

    /// Uncounted `u_i(S)` for a cake subset; used by verifiers.
    pub fn cake_value(&self, agent: usize, set: &IntervalSet) -> Scalar {
        let d = self.density(agent);
        set.iter().map(|(a, b)| d.integral(a, b)).sum()
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.valuations.iter().all(|v| v.density.is_piecewise_constant())
    }

    /// Verifier slack: `n · 2^-64` when some density has a sloped segment,
    /// zero otherwise.
    pub fn verify_slack(&self) -> Scalar {
        if self.is_piecewise_constant() {
            Scalar::zero()
        } else {
            cut_tolerance() * int(self.n() as i64)
        }
    }

    /// Union of all agents' interior density breakpoints, sorted.
    pub fn breakpoints(&self) -> Vec<Scalar> {
        self.breakpoints_of(0..self.n())
    }

    pub fn breakpoints_of(&self, agents: impl IntoIterator<Item = usize>) -> Vec<Scalar> {
        let set: BTreeSet<&Scalar> = agents
            .into_iter()
            .flat_map(|i| self.density(i).breakpoints())
            .collect();
        set.into_iter().cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn normalization_rescales_goods_and_density() {
        let inst = Instance::anonymous(
            vec![vec![int(1), int(1)]],
            Some(vec![Density::uniform(int(0))]),
        )
        .unwrap();
        let norm = inst.normalized().unwrap();
        assert_eq!(norm.good_value(0, 0), &ratio(1, 2));
        assert!(norm.is_normalized());
    }

    #[test]
    fn zero_total_cannot_normalize() {
        let inst = Instance::anonymous(vec![vec![int(0)]], None).unwrap();
        assert_eq!(inst.normalized(), Err(InstanceError::ZeroTotal { agent: 0 }));
    }

    #[test]
    fn cakeless_instance_ignores_density() {
        let inst = Instance::anonymous(vec![vec![int(1)]], None).unwrap();
        assert!(inst.cake().is_empty());
        assert_eq!(inst.density(0).total(), &int(0));
    }
}
