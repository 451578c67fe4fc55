use std::collections::VecDeque;

use num_traits::Zero;

use super::{Allocation, ValueTable};
use crate::model::Instance;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Envy,
    Eq,
}

/// Envy graph with slack `ε`: `i -ENVY-> j` iff `u_i(A_i) < u_i(A_j) - ε`,
/// `i -EQ-> j` iff `u_i(A_j) - ε <= u_i(A_i) <= u_i(A_j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvyGraph {
    slack: Scalar,
    adj: Vec<Vec<Option<EdgeKind>>>,
}

impl EnvyGraph {
    /// From a value matrix `values[i][j] = u_i(A_j)`.
    pub fn build(values: &[Vec<Scalar>], eps: &Scalar) -> Self {
        let n = values.len();
        let adj = (0..n)
            .map(|i| {
                let own = &values[i][i];
                (0..n)
                    .map(|j| {
                        if i == j {
                            return None;
                        }
                        let other = &values[i][j];
                        if own < &(other - eps) {
                            Some(EdgeKind::Envy)
                        } else if own <= other {
                            Some(EdgeKind::Eq)
                        } else {
                            None
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            slack: eps.clone(),
            adj,
        }
    }

    pub fn from_table(t: &ValueTable, eps: &Scalar) -> Self {
        Self::build(&t.totals(), eps)
    }

    pub fn from_allocation(inst: &Instance, alloc: &Allocation, eps: &Scalar) -> Self {
        Self::from_table(&ValueTable::new(inst, alloc), eps)
    }

    /// Arbitrary graph for testing graph algorithms in isolation.
    pub fn from_edges(n: usize, edges: &[(usize, usize, EdgeKind)]) -> Self {
        let mut adj = vec![vec![None; n]; n];
        for &(i, j, k) in edges {
            assert!(i != j, "self loops are not part of an envy graph");
            adj[i][j] = Some(k);
        }
        Self {
            slack: Scalar::zero(),
            adj,
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn slack(&self) -> &Scalar {
        &self.slack
    }

    pub fn edge(&self, i: usize, j: usize) -> Option<EdgeKind> {
        self.adj[i][j]
    }

    /// ENVY edges in lexicographic order.
    pub fn envy_edges(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.adj[i][j] == Some(EdgeKind::Envy))
            .collect()
    }

    pub fn envy_edge_count(&self) -> usize {
        self.adj
            .iter()
            .flatten()
            .filter(|e| **e == Some(EdgeKind::Envy))
            .count()
    }

    /// Vertices reachable from `start` (inclusive) along edges of any kind.
    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(u) = stack.pop() {
            for (v, e) in self.adj[u].iter().enumerate() {
                if e.is_some() && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// `N \ ∪ R_j` over all ENVY edges `i -> j`, where `R_j` is everything
    /// reachable from `j`. Empty when no addable set exists.
    pub fn maximal_addable_set(&self) -> Vec<usize> {
        let mut removed = vec![false; self.n()];
        for (_, j) in self.envy_edges() {
            if removed[j] {
                continue;
            }
            for (v, r) in self.reachable_from(j).into_iter().enumerate() {
                removed[v] |= r;
            }
        }
        (0..self.n()).filter(|&v| !removed[v]).collect()
    }

    /// Direct check of the addable-set definition.
    pub fn is_addable(&self, member: &[bool]) -> bool {
        if !member.iter().any(|&b| b) {
            return false;
        }
        let n = self.n();
        (0..n).all(|i| {
            (0..n).all(|j| {
                !matches!(
                    (member[i], member[j], self.adj[i][j]),
                    (true, true, Some(EdgeKind::Envy)) | (false, true, Some(_))
                )
            })
        })
    }

    /// Shortest cycle through the lexicographically first ENVY edge `i -> j`
    /// that lies on a cycle. Returned as `[i, j, ..]` so that each agent
    /// points to the next one.
    pub fn find_envy_cycle(&self) -> Option<Vec<usize>> {
        self.envy_edges()
            .into_iter()
            .find_map(|(i, j)| {
                let mut back = self.shortest_path(j, i)?;
                back.pop();
                Some(std::iter::once(i).chain(back).collect())
            })
    }

    /// BFS path `from .. to` inclusive, lowest-index neighbours first.
    fn shortest_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let n = self.n();
        let mut parent = vec![usize::MAX; n];
        parent[from] = from;
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            if u == to {
                let mut path = vec![to];
                let mut v = to;
                while v != from {
                    v = parent[v];
                    path.push(v);
                }
                path.reverse();
                return Some(path);
            }
            for (v, e) in self.adj[u].iter().enumerate() {
                if e.is_some() && parent[v] == usize::MAX {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        None
    }
}

/// Gives every agent on `cycle` the bundle of the agent it points to.
pub fn eliminate_envy_cycle(alloc: &Allocation, cycle: &[usize]) -> Allocation {
    let mut out = alloc.clone();
    out.rotate(cycle);
    out
}
