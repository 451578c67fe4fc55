use std::collections::BTreeSet;

use num_traits::Zero;

use super::IntervalSet;
use crate::model::{Instance, QueryCounter};
use crate::scalar::Scalar;

/// `A_i = M_i ∪ C_i`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Bundle {
    pub goods: BTreeSet<usize>,
    pub cake: IntervalSet,
}

impl Bundle {
    pub fn goods(goods: impl IntoIterator<Item = usize>) -> Self {
        Self {
            goods: goods.into_iter().collect(),
            cake: IntervalSet::empty(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.goods.is_empty() && self.cake.is_empty()
    }

    pub fn value(&self, inst: &Instance, agent: usize) -> Scalar {
        inst.goods_value(agent, &self.goods) + inst.cake_value(agent, &self.cake)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AllocationError {
    #[error("allocation has {got} bundles for {expected} agents")]
    BundleCount { expected: usize, got: usize },
    #[error("good {0} does not exist")]
    UnknownGood(usize),
    #[error("good {good} is assigned to both agent {first} and agent {second}")]
    DuplicateGood { good: usize, first: usize, second: usize },
    #[error("good {0} is not assigned")]
    MissingGood(usize),
    #[error("cake of agents {0} and {1} overlaps")]
    CakeOverlap(usize, usize),
    #[error("cake of agent {0} lies outside the instance's cake")]
    CakeOutside(usize),
    #[error("cake {0} is left unallocated")]
    CakeUnallocated(IntervalSet),
}

/// Per-agent bundles plus the cake not yet handed out.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Allocation {
    pub bundles: Vec<Bundle>,
    pub unallocated: IntervalSet,
}

impl Allocation {
    pub fn empty(inst: &Instance) -> Self {
        Self {
            bundles: vec![Bundle::default(); inst.n()],
            unallocated: inst.cake(),
        }
    }

    /// Goods-only allocation from an assignment vector `good -> agent`;
    /// the whole cake stays unallocated.
    pub fn from_assignment(inst: &Instance, owner: &[usize]) -> Self {
        let mut a = Self::empty(inst);
        for (g, &i) in owner.iter().enumerate() {
            a.bundles[i].goods.insert(g);
        }
        a
    }

    pub fn n(&self) -> usize {
        self.bundles.len()
    }

    pub fn bundle(&self, agent: usize) -> &Bundle {
        &self.bundles[agent]
    }

    pub fn utility(&self, inst: &Instance, agent: usize) -> Scalar {
        self.bundles[agent].value(inst, agent)
    }

    pub fn utilities(&self, inst: &Instance) -> Vec<Scalar> {
        (0..self.n()).map(|i| self.utility(inst, i)).collect()
    }

    pub fn has_any_cake(&self) -> bool {
        self.bundles.iter().any(|b| !b.cake.is_empty())
    }

    /// Moves `piece` from the unallocated cake into `agent`'s bundle.
    pub fn give_cake(&mut self, agent: usize, piece: &IntervalSet) {
        debug_assert!(self.unallocated.contains_set(piece), "piece not available");
        self.unallocated = self.unallocated.difference(piece);
        self.bundles[agent].cake.absorb(piece);
    }

    /// Every agent on `cycle` receives the bundle of the agent it points to
    /// (`cycle[t] -> cycle[t + 1]`, wrapping around).
    pub fn rotate(&mut self, cycle: &[usize]) {
        if cycle.len() < 2 {
            return;
        }
        let first = std::mem::take(&mut self.bundles[cycle[0]]);
        for t in 0..cycle.len() - 1 {
            self.bundles[cycle[t]] = std::mem::take(&mut self.bundles[cycle[t + 1]]);
        }
        self.bundles[cycle[cycle.len() - 1]] = first;
    }

    pub fn social_welfare(&self, inst: &Instance) -> Scalar {
        self.utilities(inst).into_iter().sum()
    }

    /// Structural checks against the instance. With `complete`, every good
    /// and the whole cake must be handed out.
    pub fn validate(&self, inst: &Instance, complete: bool) -> Result<(), AllocationError> {
        if self.bundles.len() != inst.n() {
            return Err(AllocationError::BundleCount {
                expected: inst.n(),
                got: self.bundles.len(),
            });
        }
        let mut owner: Vec<Option<usize>> = vec![None; inst.m()];
        let cake = inst.cake();
        for (i, b) in self.bundles.iter().enumerate() {
            for &g in &b.goods {
                match owner.get(g) {
                    None => return Err(AllocationError::UnknownGood(g)),
                    Some(Some(first)) => {
                        return Err(AllocationError::DuplicateGood {
                            good: g,
                            first: *first,
                            second: i,
                        })
                    }
                    Some(None) => owner[g] = Some(i),
                }
            }
            if !cake.contains_set(&b.cake) {
                return Err(AllocationError::CakeOutside(i));
            }
            for (j, other) in self.bundles.iter().enumerate().skip(i + 1) {
                if !b.cake.is_disjoint(&other.cake) {
                    return Err(AllocationError::CakeOverlap(i, j));
                }
            }
        }
        if complete {
            if let Some(g) = owner.iter().position(Option::is_none) {
                return Err(AllocationError::MissingGood(g));
            }
            let held = self
                .bundles
                .iter()
                .fold(IntervalSet::empty(), |acc, b| acc.union(&b.cake));
            let rest = cake.difference(&held);
            if !rest.is_empty() {
                return Err(AllocationError::CakeUnallocated(rest));
            }
        }
        Ok(())
    }

    /// Recomputes the unallocated cake from the bundles.
    pub fn with_derived_unallocated(mut self, inst: &Instance) -> Self {
        let held = self
            .bundles
            .iter()
            .fold(IntervalSet::empty(), |acc, b| acc.union(&b.cake));
        self.unallocated = inst.cake().difference(&held);
        self
    }
}

/// Pair-level numbers every fairness notion is decided from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairValues {
    /// `u_i(A_j)`
    pub total: Scalar,
    /// `u_i(C_j)`
    pub cake: Scalar,
    /// `max_{g ∈ M_j} u_i(g)`, zero for no goods.
    pub max_good: Scalar,
    /// `min_{g ∈ M_j} u_i(g)`, zero for no goods.
    pub min_good: Scalar,
}

/// `values[i][j]` as seen by agent `i` about bundle `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueTable {
    pub values: Vec<Vec<PairValues>>,
    /// `C_j = ∅`
    pub cake_free: Vec<bool>,
    pub goods_free: Vec<bool>,
}

impl ValueTable {
    pub fn new(inst: &Instance, alloc: &Allocation) -> Self {
        Self::build(inst, alloc, None)
    }

    /// Same as [`new`](Self::new) but charges one eval query per interval to `counter`.
    pub fn counted(inst: &Instance, alloc: &Allocation, counter: &QueryCounter) -> Self {
        Self::build(inst, alloc, Some(counter))
    }

    fn build(inst: &Instance, alloc: &Allocation, counter: Option<&QueryCounter>) -> Self {
        let n = alloc.n();
        let values = (0..n)
            .map(|i| {
                alloc
                    .bundles
                    .iter()
                    .map(|b| {
                        if let Some(c) = counter {
                            c.add_eval(b.cake.len() as u64);
                        }
                        let cake = inst.cake_value(i, &b.cake);
                        let goods: Vec<&Scalar> = b.goods.iter().map(|&g| inst.good_value(i, g)).collect();
                        let max_good = goods.iter().copied().max().cloned().unwrap_or_else(Scalar::zero);
                        let min_good = goods.iter().copied().min().cloned().unwrap_or_else(Scalar::zero);
                        let total = goods.into_iter().sum::<Scalar>() + &cake;
                        PairValues {
                            total,
                            cake,
                            max_good,
                            min_good,
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            values,
            cake_free: alloc.bundles.iter().map(|b| b.cake.is_empty()).collect(),
            goods_free: alloc.bundles.iter().map(|b| b.goods.is_empty()).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &PairValues {
        &self.values[i][j]
    }

    pub fn own(&self, i: usize) -> &Scalar {
        &self.values[i][i].total
    }

    /// Bundle `j` gained a cake piece worth `gained[i]` to agent `i`.
    pub fn add_cake(&mut self, j: usize, gained: &[Scalar], nonempty: bool) {
        for (row, g) in self.values.iter_mut().zip(gained) {
            row[j].cake += g;
            row[j].total += g;
        }
        self.cake_free[j] &= !nonempty;
    }

    /// Mirrors [`Allocation::rotate`].
    pub fn rotate(&mut self, cycle: &[usize]) {
        if cycle.len() < 2 {
            return;
        }
        fn shift<T: Clone>(v: &mut [T], cycle: &[usize]) {
            let first = v[cycle[0]].clone();
            for t in 0..cycle.len() - 1 {
                v[cycle[t]] = v[cycle[t + 1]].clone();
            }
            v[cycle[cycle.len() - 1]] = first;
        }
        for row in &mut self.values {
            shift(row, cycle);
        }
        shift(&mut self.cake_free, cycle);
        shift(&mut self.goods_free, cycle);
    }

    /// `u_i(A_j)` matrix.
    pub fn totals(&self) -> Vec<Vec<Scalar>> {
        self.values
            .iter()
            .map(|row| row.iter().map(|p| p.total.clone()).collect())
            .collect()
    }
}
