use crate::fairness::{Allocation, IntervalSet};
use crate::model::Instance;
use crate::scalar::{int, Scalar};

/// The cake `[0, 1)` cut into atoms at fixed points; a grid allocation
/// hands out whole atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridCakeModel {
    points: Vec<Scalar>,
}

impl GridCakeModel {
    /// `r` equal atoms.
    pub fn uniform(r: usize) -> Self {
        assert!(r >= 1, "a grid needs at least one atom");
        Self {
            points: (0..=r).map(|k| Scalar::new((k as i64).into(), (r as i64).into())).collect(),
        }
    }

    /// Atoms between the given points (0 and 1 are added).
    pub fn from_points(points: impl IntoIterator<Item = Scalar>) -> Self {
        let mut pts: Vec<Scalar> = points
            .into_iter()
            .filter(|p| p > &int(0) && p < &int(1))
            .chain([int(0), int(1)])
            .collect();
        pts.sort();
        pts.dedup();
        Self { points: pts }
    }

    /// This grid refined by every interval endpoint of `alloc`'s cake, so
    /// that the allocation becomes a grid allocation.
    pub fn snapped_to(&self, alloc: &Allocation) -> Self {
        let extra = alloc.bundles.iter().flat_map(|b| b.cake.endpoints().cloned());
        Self::from_points(self.points.iter().cloned().chain(extra))
    }

    pub fn resolution(&self) -> usize {
        self.points.len() - 1
    }

    pub fn atoms(&self) -> Vec<(Scalar, Scalar)> {
        self.points.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect()
    }

    /// Atoms of this grid for `inst`: none when the instance has no cake.
    pub(crate) fn atoms_for(&self, inst: &Instance) -> Vec<(Scalar, Scalar)> {
        if inst.has_cake() {
            self.atoms()
        } else {
            Vec::new()
        }
    }

    /// Which agent holds each atom, if `alloc` is a complete grid allocation.
    pub fn owners_of(&self, inst: &Instance, alloc: &Allocation) -> Option<Vec<usize>> {
        self.atoms_for(inst)
            .into_iter()
            .map(|(a, b)| {
                let atom = IntervalSet::interval(a, b);
                alloc.bundles.iter().position(|bundle| bundle.cake.contains_set(&atom))
            })
            .collect()
    }
}

/// Atoms with identical per-agent values, in order of first appearance.
pub(crate) struct AtomGroup {
    pub values: Vec<Scalar>,
    pub atoms: Vec<usize>,
}

pub(crate) fn group_atoms(inst: &Instance, atoms: &[(Scalar, Scalar)]) -> Vec<AtomGroup> {
    let mut groups: Vec<AtomGroup> = Vec::new();
    let mut index: std::collections::HashMap<Vec<Scalar>, usize> = Default::default();
    for (t, (a, b)) in atoms.iter().enumerate() {
        let values: Vec<Scalar> = (0..inst.n()).map(|i| inst.density(i).integral(a, b)).collect();
        match index.get(&values) {
            Some(&g) => groups[g].atoms.push(t),
            None => {
                index.insert(values.clone(), groups.len());
                groups.push(AtomGroup { values, atoms: vec![t] });
            }
        }
    }
    groups
}

/// All ways to write `total` as an ordered sum of `parts` nonnegative
/// integers, lexicographically (first part largest first).
pub(crate) fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=total).rev() {
            prefix.push(first);
            rec(total - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

/// Builds the allocation from a goods assignment and a per-atom owner list.
pub(crate) fn assemble(inst: &Instance, goods: &[usize], atoms: &[(Scalar, Scalar)], owner: &[usize]) -> Allocation {
    let mut a = Allocation::from_assignment(inst, goods);
    let mut parts: Vec<Vec<(Scalar, Scalar)>> = vec![Vec::new(); inst.n()];
    for (atom, &i) in atoms.iter().zip(owner) {
        parts[i].push(atom.clone());
    }
    for (i, p) in parts.into_iter().enumerate() {
        a.bundles[i].cake = IntervalSet::from_intervals(p);
    }
    a.with_derived_unallocated(inst)
}
