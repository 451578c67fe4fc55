use num_traits::Zero;

use super::{agents_outside, ensure, round_robin_ef1, Cap, Phase, RoundRecord, Snapshot, Solution, SolveError, SolveOptions, SolverTrace};
use crate::cake_ops::{capped_piece, perfect_allocation, perfect_residual};
use crate::fairness::{is_efm, IntervalSet};
use crate::model::{Instance, RwOracle};
use crate::scalar::{int, Scalar};

/// EFM allocation for piecewise-linear densities.
///
/// Starts from round robin and repeatedly either adds cake to the maximal
/// addable set `S` or rotates an envy cycle. When `S = N` the rest of the
/// cake is split perfectly among all agents. Otherwise every outsider `i`
/// gets the cap `|S| δ_i` with `δ_i = min_{j ∈ S} u_i(A_i) - u_i(A_j)`; the
/// next piece is the whole remaining cake if it is under every cap, and the
/// leftmost piece meeting the tightest cap exactly otherwise. That piece is
/// split perfectly among `S`, agents in index order.
pub fn solve_efm(inst: &Instance, opts: SolveOptions) -> Result<Solution, SolveError> {
    let n = inst.n();
    let rw = RwOracle::new(inst);
    let zero = Scalar::zero();
    let slack = inst.verify_slack();
    let mut trace = SolverTrace::new("efm", n, inst.m(), None);
    let mut alloc = round_robin_ef1(inst);

    let mut snap = Snapshot::take(inst, &alloc, rw.counter(), &zero);
    let mut init = RoundRecord::new(0, Phase::Init);
    init.envy_edges_after = snap.graph.envy_edge_count();
    init.addable_size_after = snap.addable.len();
    init.queries = rw.counts();
    trace.push(init, opts.keep_trace);

    let mut round = 0;
    while !alloc.unallocated.is_empty() {
        round += 1;
        let edges_before = snap.graph.envy_edge_count();
        let addable_before = snap.addable.len();
        let remaining = alloc.unallocated.clone();
        let mut rec;

        if opts.checked {
            ensure(!snap.addable.is_empty() || snap.graph.find_envy_cycle().is_some(), round, || {
                "neither an addable set nor an envy cycle exists".into()
            })?;
        }

        if snap.addable.len() == n {
            rec = RoundRecord::new(round, Phase::FinalEf);
            let parts = perfect_allocation(&rw, &remaining, n);
            check_perfect(inst, &remaining, &parts, opts, round)?;
            for (i, p) in parts.iter().enumerate() {
                snap.give(&mut alloc, &rw, i, p);
            }
            rec.piece_allocated = remaining;
            rec.whole_remaining = true;
            rec.addable_set = Some(snap.addable.clone());
        } else if !snap.addable.is_empty() {
            rec = RoundRecord::new(round, Phase::CakeAdd);
            let s = snap.addable.clone();
            let k = int(s.len() as i64);
            let caps: Vec<(usize, Scalar)> = agents_outside(n, &s)
                .into_iter()
                .map(|i| {
                    let delta = s
                        .iter()
                        .map(|&j| snap.table.own(i) - &snap.table.get(i, j).total)
                        .min()
                        .expect("S is not empty");
                    (i, &k * delta)
                })
                .collect();
            let all_under = caps.iter().all(|(i, cap)| &rw.value_of_set(*i, &remaining) < cap);
            let piece = if all_under {
                rec.whole_remaining = true;
                remaining.clone()
            } else {
                let capped = capped_piece(&rw, &remaining, &caps);
                rec.binding_agent = capped.binding;
                rec.whole_remaining = capped.piece == remaining;
                capped.piece
            };
            let parts = perfect_allocation(&rw, &piece, s.len());
            check_perfect(inst, &piece, &parts, opts, round)?;
            for (&i, p) in s.iter().zip(&parts) {
                snap.give(&mut alloc, &rw, i, p);
            }
            rec.caps = caps.into_iter().map(|(agent, target)| Cap { agent, target }).collect();
            rec.piece_allocated = piece;
            rec.addable_set = Some(s);
        } else {
            rec = RoundRecord::new(round, Phase::CycleElim);
            let cycle = snap.graph.find_envy_cycle().ok_or_else(|| SolveError::Invariant {
                round,
                message: "no addable set and no envy cycle".into(),
            })?;
            snap.rotate(&mut alloc, &cycle);
            rec.cycle = Some(cycle);
        }

        snap.refresh(&zero);
        rec.envy_edges_before = edges_before;
        rec.envy_edges_after = snap.graph.envy_edge_count();
        rec.addable_size_after = snap.addable.len();
        rec.queries = rw.counts();

        if opts.checked {
            let verdict = is_efm(&snap.table, &slack);
            ensure(verdict.pass, round, || format!("partial allocation is not EFM: {:?}", verdict.violations))?;
            match rec.phase {
                Phase::CakeAdd => {
                    ensure(rec.envy_edges_after <= edges_before, round, || {
                        format!("envy edges rose from {edges_before} to {}", rec.envy_edges_after)
                    })?;
                    if !rec.whole_remaining {
                        ensure(
                            rec.envy_edges_after < edges_before || rec.addable_size_after < addable_before,
                            round,
                            || "partial piece reduced neither envy edges nor the addable set".into(),
                        )?;
                    }
                }
                Phase::CycleElim => ensure(rec.envy_edges_after < edges_before, round, || {
                    format!("cycle elimination left {} of {edges_before} envy edges", rec.envy_edges_after)
                })?,
                _ => {}
            }
        }
        trace.push(rec, opts.keep_trace);
    }

    if opts.checked {
        snap.audit(inst, &alloc, round)?;
        let calls = rw.counts().perfect_oracle_calls;
        let bound = (n as u64).pow(3) + 1;
        ensure(calls <= bound, round, || format!("{calls} perfect allocation calls exceed n^3 + 1 = {bound}"))?;
    }
    Ok(Solution { allocation: alloc, trace })
}

fn check_perfect(
    inst: &Instance,
    whole: &IntervalSet,
    parts: &[IntervalSet],
    opts: SolveOptions,
    round: usize,
) -> Result<(), SolveError> {
    if !opts.checked {
        return Ok(());
    }
    let residual = perfect_residual(inst, whole, parts);
    ensure(residual.is_zero(), round, || format!("perfect allocation is off by {residual}"))
}
