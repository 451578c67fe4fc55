use std::collections::HashMap;

use num_traits::Zero;

use super::enumerate::{decode, goods_space};
use super::grid::{assemble, compositions, group_atoms, GridCakeModel};
use super::{budget, OracleError};
use crate::exec::Exec;
use crate::fairness::{is_efm, Allocation, PairValues, ValueTable};
use crate::model::Instance;
use crate::scalar::Scalar;

/// Cap on distinct cake states per goods assignment.
pub const STATE_BUDGET: u64 = 2_000_000;
/// Cap on the number of allocations returned.
pub const OUTPUT_CAP: u64 = 200_000;

/// `cake[i * n + j] = u_i(C_j)` and whether `C_j` is nonempty.
#[derive(Clone, PartialEq, Eq, Hash)]
struct CakeState {
    cake: Vec<Scalar>,
    held: Vec<bool>,
}

struct Layer {
    states: Vec<CakeState>,
    /// `(state in previous layer, split index)`
    preds: Vec<Vec<(usize, usize)>>,
    ways: Vec<u128>,
}

struct Group {
    atoms: Vec<usize>,
    values: Vec<Scalar>,
    splits: Vec<Vec<usize>>,
    /// number of placements of the group's atoms for each split
    ways: Vec<u128>,
}

/// Every grid allocation that passes the EFM check with zero slack, in
/// enumeration order: goods assignments lexicographically, then cake
/// states, then atom placements.
pub fn efm_exhaustive_check(inst: &Instance, grid: &GridCakeModel) -> Result<Vec<Allocation>, OracleError> {
    efm_exhaustive_check_with(inst, grid, Exec::default())
}

pub fn efm_exhaustive_check_with(
    inst: &Instance,
    grid: &GridCakeModel,
    exec: Exec,
) -> Result<Vec<Allocation>, OracleError> {
    let n = inst.n();
    let atoms = grid.atoms_for(inst);
    let groups: Vec<Group> = group_atoms(inst, &atoms)
        .into_iter()
        .map(|g| {
            let splits = compositions(g.atoms.len(), n);
            let ways = splits.iter().map(|s| multinomial(s)).collect();
            Group { atoms: g.atoms, values: g.values, splits, ways }
        })
        .collect();
    let layers = cake_layers(n, &groups)?;
    let total = goods_space(inst)?;
    let per_goods = exec.map_range(total, |k| {
        let goods = decode(k, n, inst.m());
        let base = Allocation::from_assignment(inst, &goods);
        let table = ValueTable::new(inst, &base);
        let last = layers.last().expect("root layer");
        let passing: Vec<usize> = (0..last.states.len())
            .filter(|&s| is_efm(&with_cake(&table, &last.states[s]), &Scalar::zero()).pass)
            .collect();
        (goods, passing)
    });
    let last = layers.last().expect("root layer");
    let count = per_goods
        .iter()
        .flat_map(|(_, p)| p.iter().map(|&s| last.ways[s]))
        .fold(0u128, u128::saturating_add);
    if count > OUTPUT_CAP as u128 {
        return Err(budget("EFM allocations", count, OUTPUT_CAP));
    }
    let mut out = Vec::with_capacity(count as usize);
    for (goods, passing) in per_goods {
        for s in passing {
            let mut owner = vec![0; atoms.len()];
            expand(inst, &goods, &atoms, &groups, &layers, layers.len() - 1, s, &mut owner, &mut out);
        }
    }
    Ok(out)
}

fn cake_layers(n: usize, groups: &[Group]) -> Result<Vec<Layer>, OracleError> {
    let root = CakeState { cake: vec![Scalar::zero(); n * n], held: vec![false; n] };
    let mut layers = vec![Layer { states: vec![root], preds: vec![Vec::new()], ways: vec![1] }];
    for g in groups {
        let prev = layers.last().expect("root layer");
        let mut index: HashMap<CakeState, usize> = HashMap::new();
        let mut layer = Layer { states: Vec::new(), preds: Vec::new(), ways: Vec::new() };
        for (p, state) in prev.states.iter().enumerate() {
            for (c, split) in g.splits.iter().enumerate() {
                let mut next = state.clone();
                for (j, &cnt) in split.iter().enumerate() {
                    if cnt == 0 {
                        continue;
                    }
                    next.held[j] = true;
                    let cnt = Scalar::from_integer((cnt as i64).into());
                    for i in 0..n {
                        next.cake[i * n + j] += &g.values[i] * &cnt;
                    }
                }
                let w = prev.ways[p].saturating_mul(g.ways[c]);
                let s = *index.entry(next).or_insert_with_key(|key| {
                    layer.states.push(key.clone());
                    layer.preds.push(Vec::new());
                    layer.ways.push(0);
                    layer.states.len() - 1
                });
                layer.preds[s].push((p, c));
                layer.ways[s] = layer.ways[s].saturating_add(w);
            }
            if layer.states.len() as u64 > STATE_BUDGET {
                return Err(budget("cake states", format!("more than {}", layer.states.len()), STATE_BUDGET));
            }
        }
        layers.push(layer);
    }
    Ok(layers)
}

fn with_cake(goods: &ValueTable, state: &CakeState) -> ValueTable {
    let n = goods.n();
    let values = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let g = goods.get(i, j);
                    let cake = state.cake[i * n + j].clone();
                    PairValues {
                        total: &g.total + &cake,
                        cake,
                        max_good: g.max_good.clone(),
                        min_good: g.min_good.clone(),
                    }
                })
                .collect()
        })
        .collect();
    ValueTable {
        values,
        cake_free: state.held.iter().map(|h| !h).collect(),
        goods_free: goods.goods_free.clone(),
    }
}

#[allow(clippy::too_many_arguments)]
fn expand(
    inst: &Instance,
    goods: &[usize],
    atoms: &[(Scalar, Scalar)],
    groups: &[Group],
    layers: &[Layer],
    depth: usize,
    state: usize,
    owner: &mut Vec<usize>,
    out: &mut Vec<Allocation>,
) {
    if depth == 0 {
        out.push(assemble(inst, goods, atoms, owner));
        return;
    }
    let g = &groups[depth - 1];
    for &(p, c) in &layers[depth].preds[state] {
        let mut seq: Vec<usize> = g.splits[c].iter().enumerate().flat_map(|(i, &k)| std::iter::repeat_n(i, k)).collect();
        loop {
            for (&t, &i) in g.atoms.iter().zip(&seq) {
                owner[t] = i;
            }
            expand(inst, goods, atoms, groups, layers, depth - 1, p, owner, out);
            if !next_permutation(&mut seq) {
                break;
            }
        }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("pivot has a successor");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn multinomial(counts: &[usize]) -> u128 {
    let mut total: u128 = 1;
    let mut seen: u128 = 0;
    for &c in counts {
        for k in 1..=c as u128 {
            seen += 1;
            // C(seen, k) built incrementally stays integral
            total = total.saturating_mul(seen) / k;
        }
    }
    total
}
