use num_traits::{One, Signed};

use super::{agents_outside, ensure, round_robin_ef1, Cap, Phase, RoundRecord, Snapshot, Solution, SolveError, SolveOptions, SolverTrace};
use crate::cake_ops::{capped_piece, eps_ef_allocation, max_envy_within, EpsEfSplit};
use crate::fairness::{is_eps_efm, IntervalSet};
use crate::model::{Instance, RwOracle};
use crate::scalar::{int, Scalar};

/// ε-EFM allocation through eval and cut queries.
///
/// Same skeleton as [`solve_efm`](super::solve_efm) on the `ε̂`-envy graph,
/// starting from `ε̂ = ε/4` with `ε' = ε² / (8n)`. When every agent is
/// addable the rest of the cake is split `ε/4`-EF and `ε̂` grows by `ε/4`.
/// Otherwise the next piece is the whole remaining cake if every outsider
/// values it below `ε̂`, and else the leftmost piece worth exactly `ε̂` to the
/// tightest outsider; it is split `ε'`-EF among `S` and `ε̂` grows by `ε'`.
///
/// Every agent must value the whole cake at most 1 (true for normalized
/// instances); the `ε̂ <= ε` accounting depends on it.
pub fn solve_eps_efm(inst: &Instance, eps: &Scalar, opts: SolveOptions) -> Result<Solution, SolveError> {
    if !eps.is_positive() {
        return Err(SolveError::Precondition(format!("eps must be positive, got {eps}")));
    }
    let n = inst.n();
    let cake = inst.cake();
    if let Some(i) = (0..n).find(|&i| inst.cake_value(i, &cake) > Scalar::one()) {
        return Err(SolveError::Precondition(format!(
            "agent {i} values the cake above 1; normalize the instance first"
        )));
    }
    let rw = RwOracle::new(inst);
    let slack = inst.verify_slack();
    let quarter = eps / int(4);
    let eps_prime = eps * eps / int(8 * n as i64);
    let mut eps_hat = quarter.clone();
    let mut trace = SolverTrace::new("eps-efm", n, inst.m(), Some(eps.clone()));
    let mut alloc = round_robin_ef1(inst);

    let mut snap = Snapshot::take(inst, &alloc, rw.counter(), &eps_hat);
    let mut init = RoundRecord::new(0, Phase::Init);
    init.envy_edges_after = snap.graph.envy_edge_count();
    init.addable_size_after = snap.addable.len();
    init.eps_hat = Some(eps_hat.clone());
    init.queries = rw.counts();
    trace.push(init, opts.keep_trace);

    let remaining_value = |rest: &IntervalSet| -> Scalar { (0..n).map(|i| inst.cake_value(i, rest)).sum() };

    let mut round = 0;
    while !alloc.unallocated.is_empty() {
        round += 1;
        let edges_before = snap.graph.envy_edge_count();
        let remaining = alloc.unallocated.clone();
        let hat_before = eps_hat.clone();
        let welfare_before = snap.welfare();
        let mut rec;

        if opts.checked {
            ensure(!snap.addable.is_empty() || snap.graph.find_envy_cycle().is_some(), round, || {
                "neither an addable set nor an eps-envy cycle exists".into()
            })?;
        }

        if !snap.addable.is_empty() {
            let s = snap.addable.clone();
            let (piece, sub_eps) = if s.len() == n {
                rec = RoundRecord::new(round, Phase::FinalEf);
                rec.whole_remaining = true;
                (remaining.clone(), quarter.clone())
            } else {
                rec = RoundRecord::new(round, Phase::CakeAdd);
                let outside = agents_outside(n, &s);
                let most = outside
                    .iter()
                    .map(|&i| rw.value_of_set(i, &remaining))
                    .max()
                    .expect("S is not N");
                let piece = if most < eps_hat {
                    rec.whole_remaining = true;
                    remaining.clone()
                } else {
                    let caps: Vec<(usize, Scalar)> = outside.iter().map(|&i| (i, eps_hat.clone())).collect();
                    let capped = capped_piece(&rw, &remaining, &caps);
                    rec.binding_agent = capped.binding;
                    rec.whole_remaining = capped.piece == remaining;
                    rec.caps = caps.into_iter().map(|(agent, target)| Cap { agent, target }).collect();
                    capped.piece
                };
                (piece, eps_prime.clone())
            };
            if opts.checked {
                rec.remaining_value_before = Some(remaining_value(&remaining));
            }
            let split: EpsEfSplit = eps_ef_allocation(&rw, &piece, &s, &sub_eps);
            if opts.checked {
                let envy = max_envy_within(inst, &s, &split.pieces);
                ensure(envy <= sub_eps, round, || format!("eps-EF split has envy {envy} > {sub_eps}"))?;
                // a lone agent takes the piece whole; there is nobody to envy
                ensure(s.len() < 2 || split.max_atom_value <= sub_eps, round, || {
                    format!("atom worth {} exceeds {sub_eps}", split.max_atom_value)
                })?;
                rec.subroutine_envy = Some(envy);
            }
            for (&i, p) in s.iter().zip(&split.pieces) {
                snap.give(&mut alloc, &rw, i, p);
            }
            eps_hat += &sub_eps;
            rec.atoms = Some(split.atoms);
            rec.subroutine_eps = Some(sub_eps);
            rec.piece_allocated = piece;
            rec.addable_set = Some(s);
            if opts.checked {
                rec.remaining_value_after = Some(remaining_value(&alloc.unallocated));
            }
        } else {
            rec = RoundRecord::new(round, Phase::CycleElim);
            let cycle = snap.graph.find_envy_cycle().ok_or_else(|| SolveError::Invariant {
                round,
                message: "no addable set and no eps-envy cycle".into(),
            })?;
            snap.rotate(&mut alloc, &cycle);
            rec.cycle = Some(cycle);
        }

        snap.refresh(&eps_hat);
        rec.envy_edges_before = edges_before;
        rec.envy_edges_after = snap.graph.envy_edge_count();
        rec.addable_size_after = snap.addable.len();
        rec.eps_hat = Some(eps_hat.clone());
        rec.queries = rw.counts();
        if rec.phase == Phase::CycleElim {
            rec.welfare_before = Some(welfare_before);
            rec.welfare_after = Some(snap.welfare());
        }

        if opts.checked {
            ensure(&eps_hat <= eps, round, || format!("eps_hat {eps_hat} exceeds eps {eps}"))?;
            let verdict = is_eps_efm(&snap.table, &eps_hat, &slack);
            ensure(verdict.pass, round, || {
                format!("partial allocation is not {eps_hat}-EFM: {:?}", verdict.violations)
            })?;
            match rec.phase {
                Phase::CakeAdd if !rec.whole_remaining => {
                    let before = rec.remaining_value_before.as_ref().expect("recorded in checked mode");
                    let after = rec.remaining_value_after.as_ref().expect("recorded in checked mode");
                    ensure(before - after >= hat_before, round, || {
                        format!("remaining value dropped by {} < {hat_before}", before - after)
                    })?;
                }
                Phase::CycleElim => {
                    let gain = rec.welfare_after.as_ref().unwrap() - rec.welfare_before.as_ref().unwrap();
                    ensure(gain >= hat_before, round, || format!("welfare rose by {gain} < {hat_before}"))?;
                    ensure(rec.envy_edges_after < edges_before, round, || {
                        format!("cycle elimination left {} of {edges_before} eps-envy edges", rec.envy_edges_after)
                    })?;
                }
                _ => {}
            }
        }
        trace.push(rec, opts.keep_trace);
    }
    if opts.checked {
        snap.audit(inst, &alloc, round)?;
    }
    trace.final_eps_hat = Some(eps_hat);
    Ok(Solution { allocation: alloc, trace })
}
