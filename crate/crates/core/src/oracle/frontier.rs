use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};

use super::grid::{assemble, compositions, group_atoms, GridCakeModel};
use super::{budget, OracleError};
use crate::fairness::Allocation;
use crate::model::Instance;
use crate::scalar::Scalar;

/// Cap on the number of candidate utility vectors in one DP layer.
pub const FRONTIER_BUDGET: u64 = 5_000_000;

struct Node {
    utils: Vec<Scalar>,
    prev: usize,
    choice: usize,
}

enum Item {
    Good(usize),
    Group { atoms: Vec<usize>, splits: Vec<Vec<usize>>, values: Vec<Scalar> },
}

impl Item {
    fn choices(&self, n: usize) -> usize {
        match self {
            Item::Good(_) => n,
            Item::Group { splits, .. } => splits.len(),
        }
    }

    fn gain(&self, inst: &Instance, choice: usize, utils: &[Scalar]) -> Vec<Scalar> {
        let mut out = utils.to_vec();
        match self {
            Item::Good(g) => out[choice] += inst.good_value(choice, *g),
            Item::Group { splits, values, .. } => {
                for (i, &c) in splits[choice].iter().enumerate() {
                    if c > 0 {
                        out[i] += &values[i] * Scalar::from_integer((c as i64).into());
                    }
                }
            }
        }
        out
    }
}

/// Pareto frontier of achievable own-utility vectors over goods and grid
/// atoms, with back pointers for rebuilding a witness allocation.
struct Frontier {
    items: Vec<Item>,
    layers: Vec<Vec<Node>>,
    atoms: Vec<(Scalar, Scalar)>,
}

impl Frontier {
    fn build(inst: &Instance, grid: &GridCakeModel) -> Result<Self, OracleError> {
        let n = inst.n();
        let atoms = grid.atoms_for(inst);
        let mut items: Vec<Item> = (0..inst.m()).map(Item::Good).collect();
        for g in group_atoms(inst, &atoms) {
            let splits = compositions(g.atoms.len(), n);
            items.push(Item::Group { atoms: g.atoms, splits, values: g.values });
        }
        let root = Node { utils: vec![Scalar::zero(); n], prev: 0, choice: 0 };
        let mut layers = vec![vec![root]];
        for item in &items {
            let last = layers.last().expect("root layer");
            let k = item.choices(n);
            let needed = last.len() as u64 * k as u64;
            if needed > FRONTIER_BUDGET {
                return Err(budget("frontier candidates", needed, FRONTIER_BUDGET));
            }
            let mut next = Vec::with_capacity(needed as usize);
            for (p, node) in last.iter().enumerate() {
                for c in 0..k {
                    next.push(Node { utils: item.gain(inst, c, &node.utils), prev: p, choice: c });
                }
            }
            layers.push(prune(next));
        }
        Ok(Self { items, layers, atoms })
    }

    fn last(&self) -> &[Node] {
        self.layers.last().expect("root layer")
    }

    fn allocation(&self, inst: &Instance, index: usize) -> Allocation {
        let mut goods = vec![0; inst.m()];
        let mut owner = vec![0; self.atoms.len()];
        let mut at = index;
        for (item, layer) in self.items.iter().zip(&self.layers[1..]).rev() {
            let node = &layer[at];
            match item {
                Item::Good(g) => goods[*g] = node.choice,
                Item::Group { atoms, splits, .. } => {
                    let mut slots = atoms.iter();
                    for (i, &c) in splits[node.choice].iter().enumerate() {
                        for &t in slots.by_ref().take(c) {
                            owner[t] = i;
                        }
                    }
                }
            }
            at = node.prev;
        }
        assemble(inst, &goods, &self.atoms, &owner)
    }
}

/// Drops every vector weakly dominated by an earlier kept one.
fn prune(mut nodes: Vec<Node>) -> Vec<Node> {
    if nodes.first().is_some_and(|x| x.utils.len() == 2) {
        nodes.sort_by(|a, b| b.utils[0].cmp(&a.utils[0]).then_with(|| b.utils[1].cmp(&a.utils[1])));
        let mut kept: Vec<Node> = Vec::new();
        for x in nodes {
            if kept.last().is_none_or(|k| x.utils[1] > k.utils[1]) {
                kept.push(x);
            }
        }
        return kept;
    }
    let mut keyed: Vec<(Scalar, Node)> = nodes.into_iter().map(|x| (x.utils.iter().sum(), x)).collect();
    keyed.sort_by(|a, b| b.0.cmp(&a.0));
    let mut kept: Vec<Node> = Vec::new();
    for (_, x) in keyed {
        if !kept.iter().any(|k| weakly_dominates(&k.utils, &x.utils)) {
            kept.push(x);
        }
    }
    kept
}

fn weakly_dominates(a: &[Scalar], b: &[Scalar]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

/// Nash welfare order: more agents with positive utility first, then the
/// product over those agents.
fn nash_cmp(a: &[Scalar], b: &[Scalar]) -> Ordering {
    let key = |u: &[Scalar]| {
        let pos: Vec<&Scalar> = u.iter().filter(|x| x.is_positive()).collect();
        let prod = pos.iter().fold(Scalar::one(), |acc, x| acc * *x);
        (pos.len(), prod)
    };
    key(a).cmp(&key(b))
}

/// Max Nash welfare allocation over goods partitions and grid atom
/// assignments. Ties go to the first vector on the frontier.
pub fn mnw_search(inst: &Instance, grid: &GridCakeModel) -> Result<Allocation, OracleError> {
    let f = Frontier::build(inst, grid)?;
    let mut best = 0;
    for (k, node) in f.last().iter().enumerate().skip(1) {
        if nash_cmp(&node.utils, &f.last()[best].utils) == Ordering::Greater {
            best = k;
        }
    }
    Ok(f.allocation(inst, best))
}

/// A grid allocation that Pareto-dominates `alloc`, if one exists. Among
/// dominators the one with the largest social welfare is returned.
///
/// `None` only rules out dominators on this grid, not on the continuum.
pub fn pareto_dominance_search(
    inst: &Instance,
    alloc: &Allocation,
    grid: &GridCakeModel,
) -> Result<Option<Allocation>, OracleError> {
    let base = alloc.utilities(inst);
    let f = Frontier::build(inst, grid)?;
    let mut best: Option<(Scalar, usize)> = None;
    for (k, node) in f.last().iter().enumerate() {
        if weakly_dominates(&node.utils, &base) && node.utils != base {
            let w: Scalar = node.utils.iter().sum();
            if best.as_ref().is_none_or(|(bw, _)| &w > bw) {
                best = Some((w, k));
            }
        }
    }
    Ok(best.map(|(_, k)| f.allocation(inst, k)))
}
