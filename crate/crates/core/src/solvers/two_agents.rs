use std::collections::BTreeSet;

use num_traits::Zero;

use super::{ensure, round_robin_ef1, Cap, Phase, RoundRecord, Solution, SolveError, SolveOptions, SolverTrace};
use crate::cake_ops::capped_piece;
use crate::fairness::{is_efm, is_efx_mixed, Allocation, Bundle, EnvyGraph, ValueTable};
use crate::model::{Instance, RwOracle};
use crate::oracle::efx_brute_force;
use crate::scalar::{int, Scalar};

/// How the goods are split before the cake is added.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoodsBase {
    Ef1,
    /// Exhaustive search; limited to small `m`.
    Efx,
}

/// Cut and choose for two agents.
///
/// Agent 1 (index 0) splits the goods so the split is EF1 (or EFX) in their
/// own view in both directions; a split that is merely EF1 for the two actual
/// agents can leave agent 1 more than one good behind once agent 2 picks the
/// bundle agent 1 wanted. Agent 1 then labels the goods bundles so that `u_1(M_1) >= u_1(M_2)`
/// and adds the cake to make the two bundles as equal as possible in their
/// own view: a piece worth `(u_1(M_2) + u_1(C) - u_1(M_1)) / 2` joins `M_1`
/// and the rest joins `M_2`, or all of the cake joins `M_2` when even that is
/// not enough. Agent 2 then takes the bundle they prefer, `A_2` on ties.
pub fn solve_two_agents(inst: &Instance, base: GoodsBase, opts: SolveOptions) -> Result<Solution, SolveError> {
    if inst.n() != 2 {
        return Err(SolveError::Precondition(format!(
            "the two-agent algorithm needs exactly 2 agents, got {}",
            inst.n()
        )));
    }
    let rw = RwOracle::new(inst);
    let algorithm = match base {
        GoodsBase::Ef1 => "two-ef1",
        GoodsBase::Efx => "two-efx",
    };
    let mut trace = SolverTrace::new(algorithm, 2, inst.m(), None);
    let twin = Instance::anonymous(vec![(0..inst.m()).map(|g| inst.good_value(0, g).clone()).collect(); 2], None)
        .map_err(|e| SolveError::Precondition(e.to_string()))?;
    let goods = match base {
        GoodsBase::Ef1 => round_robin_ef1(&twin),
        GoodsBase::Efx => efx_brute_force(&twin)
            .map_err(|e| SolveError::Precondition(e.to_string()))?
            .ok_or_else(|| SolveError::Invariant {
                round: 0,
                message: "no EFX allocation of the goods".into(),
            })?,
    };
    let mut init = RoundRecord::new(0, Phase::Init);
    let goods = Allocation::from_assignment(inst, &owners(&goods, inst.m()));
    init.envy_edges_after = EnvyGraph::from_allocation(inst, &goods, &Scalar::zero()).envy_edge_count();
    init.queries = rw.counts();
    trace.push(init, opts.keep_trace);

    let (x, y) = (goods.bundles[0].goods.clone(), goods.bundles[1].goods.clone());
    let (m1, m2): (BTreeSet<usize>, BTreeSet<usize>) =
        if inst.goods_value(0, &x) >= inst.goods_value(0, &y) { (x, y) } else { (y, x) };
    let cake = inst.cake();
    let u1_m1 = inst.goods_value(0, &m1);
    let u1_m2 = inst.goods_value(0, &m2);
    let u1_c = rw.value_of_set(0, &cake);

    let mut rec = RoundRecord::new(1, Phase::CakeAdd);
    let (c1, c2) = if u1_m1 <= &u1_m2 + &u1_c {
        let target = (&u1_m2 + &u1_c - &u1_m1) / int(2);
        let capped = capped_piece(&rw, &cake, &[(0, target.clone())]);
        rec.caps = vec![Cap { agent: 0, target }];
        rec.binding_agent = capped.binding;
        let rest = cake.difference(&capped.piece);
        (capped.piece, rest)
    } else {
        rec.whole_remaining = true;
        (Default::default(), cake.clone())
    };
    rec.piece_allocated = c1.clone();

    let first = Bundle { goods: m1, cake: c1 };
    let second = Bundle { goods: m2, cake: c2 };
    let chooser_takes_first = first.value(inst, 1) > second.value(inst, 1);
    let bundles = if chooser_takes_first { vec![second, first] } else { vec![first, second] };
    let alloc = Allocation {
        bundles,
        unallocated: Default::default(),
    };
    let t = ValueTable::counted(inst, &alloc, rw.counter());
    rec.envy_edges_after = EnvyGraph::from_table(&t, &Scalar::zero()).envy_edge_count();
    rec.queries = rw.counts();

    if opts.checked {
        let slack = inst.verify_slack();
        ensure(is_efm(&t, &slack).pass, 1, || "two-agent output is not EFM".into())?;
        ensure(t.own(1) >= &t.get(1, 0).total, 1, || "the chooser envies".into())?;
        if base == GoodsBase::Efx {
            ensure(is_efx_mixed(&t, &slack).pass, 1, || "EFX-based output fails EFX toward cake-free bundles".into())?;
        }
    }
    trace.push(rec, opts.keep_trace);
    Ok(Solution { allocation: alloc, trace })
}

fn owners(alloc: &Allocation, m: usize) -> Vec<usize> {
    let mut owner = vec![0; m];
    for (i, b) in alloc.bundles.iter().enumerate() {
        for &g in &b.goods {
            owner[g] = i;
        }
    }
    owner
}
