use crate::fairness::Allocation;
use crate::model::Instance;

/// Agents take turns in index order, each picking their most valued
/// remaining good (lowest index on ties). The result is EF1.
pub fn round_robin_ef1(inst: &Instance) -> Allocation {
    let (n, m) = (inst.n(), inst.m());
    let mut free: Vec<bool> = vec![true; m];
    let mut owner = vec![0; m];
    for turn in 0..m {
        let i = turn % n;
        let g = (0..m)
            .filter(|&g| free[g])
            .reduce(|best, g| if inst.good_value(i, g) > inst.good_value(i, best) { g } else { best })
            .expect("a good is left on every turn");
        free[g] = false;
        owner[g] = i;
    }
    Allocation::from_assignment(inst, &owner)
}
