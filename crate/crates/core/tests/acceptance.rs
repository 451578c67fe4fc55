//! The ten acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) so the lines are always shown:
//! `cargo test -p mixdiv --test acceptance`.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use mixdiv::cake_ops::{perfect_allocation, perfect_residual};
use mixdiv::fairness::{is_ef, is_ef1, is_efm, is_efx_mixed, is_eps_efm, is_weak_efm, EdgeKind, ValueTable};
use mixdiv::gen::{random_instance, DensityKind, GenParams};
use mixdiv::io::allocation_to_json;
use mixdiv::model::RwOracle;
use mixdiv::oracle::{efm_exhaustive_check, mnw_search, pareto_dominance_search, GridCakeModel};
use mixdiv::samples::{efm_po_conflict, mnw_not_efm};
use mixdiv::scalar::{int, ratio};
use mixdiv::solvers::{
    round_robin_ef1, solve_efm, solve_eps_efm, solve_two_agents, GoodsBase, Phase, SolveOptions, SolverTrace,
};
use mixdiv::{Allocation, EnvyGraph, FairnessReport, Instance, IntervalSet, Scalar};
use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn params(n: usize, m: usize, segments: usize, kind: DensityKind) -> GenParams {
    GenParams { n, m, segments, kind }
}

fn constant_efm_instances() -> Vec<Instance> {
    (0..200u64)
        .map(|s| random_instance(&params(2 + (s % 4) as usize, (s % 9) as usize, 1 + (s % 6) as usize, DensityKind::Constant), s))
        .collect()
}

fn linear_efm_instances() -> Vec<Instance> {
    (0..100u64)
        .map(|s| {
            let seed = 1_000 + s;
            random_instance(&params(2 + (s % 4) as usize, (s % 6) as usize, 1 + (s % 4) as usize, DensityKind::Linear), seed)
        })
        .collect()
}

fn criterion_1(traces: &mut Vec<SolverTrace>) -> Outcome {
    let instances = constant_efm_instances();
    let start = Instant::now();
    let mut solutions = Vec::with_capacity(instances.len());
    for (s, inst) in instances.iter().enumerate() {
        let sol = solve_efm(inst, SolveOptions::default()).map_err(|e| format!("seed {s}: {e}"))?;
        solutions.push(sol);
    }
    let elapsed = start.elapsed();
    let zero = Scalar::zero();
    for (s, (inst, sol)) in instances.iter().zip(&solutions).enumerate() {
        let a = &sol.allocation;
        check(a.validate(inst, true).is_ok(), || format!("seed {s}: incomplete allocation"))?;
        check(is_efm(&ValueTable::new(inst, a), &zero).pass, || format!("seed {s}: is_EFM fails"))?;
        check(common::efm(inst, a, &zero), || format!("seed {s}: direct EFM check fails"))?;
    }
    check(elapsed < Duration::from_secs(5), || format!("solving took {elapsed:?}"))?;
    traces.extend(solutions.into_iter().map(|s| s.trace));
    Ok(format!("200/200 EFM with zero slack, solved in {:.2}s", elapsed.as_secs_f64()))
}

fn criterion_2(traces: &mut Vec<SolverTrace>) -> Outcome {
    let mut perfect_calls = 0;
    for (s, inst) in linear_efm_instances().iter().enumerate() {
        let sol = solve_efm(inst, SolveOptions::default()).map_err(|e| format!("instance {s}: {e}"))?;
        let a = &sol.allocation;
        let slack = inst.verify_slack();
        let expected = Scalar::new(BigInt::from(inst.n()), BigInt::from(1u128 << 64));
        check(slack == expected || inst.is_piecewise_constant(), || format!("instance {s}: verifier slack {slack}"))?;
        check(a.validate(inst, true).is_ok(), || format!("instance {s}: incomplete allocation"))?;
        check(is_efm(&ValueTable::new(inst, a), &slack).pass, || format!("instance {s}: is_EFM fails"))?;
        check(common::efm(inst, a, &slack), || format!("instance {s}: direct EFM check fails"))?;

        // perfect divisions of the whole cake and of a scattered piece
        let rw = RwOracle::new(inst);
        let scattered = IntervalSet::from_intervals(vec![(ratio(1, 7), ratio(2, 5)), (ratio(3, 5), ratio(11, 12))]);
        for piece in [inst.cake(), scattered] {
            for k in 1..=inst.n() {
                let parts = perfect_allocation(&rw, &piece, k);
                perfect_calls += 1;
                let residual = perfect_residual(inst, &piece, &parts);
                check(residual.is_zero(), || format!("instance {s}: perfect split into {k} off by {residual}"))?;
            }
        }
        traces.push(sol.trace);
    }
    Ok(format!("100/100 EFM within n*2^-64; {perfect_calls} direct perfect splits exact"))
}

fn criterion_3(traces: &[SolverTrace]) -> Outcome {
    let mut rounds = 0;
    for (t, trace) in traces.iter().enumerate() {
        let n = trace.n;
        let bound = (n as u64).pow(3) + 1;
        check(trace.totals.perfect_oracle_calls <= bound, || {
            format!("run {t}: {} perfect calls > {bound}", trace.totals.perfect_oracle_calls)
        })?;
        check(trace.rounds.len() == trace.round_count, || format!("run {t}: trace was truncated"))?;
        for r in trace.rounds.iter().filter(|r| r.phase != Phase::Init) {
            rounds += 1;
            let at = || format!("run {t} round {}", r.round);
            match r.phase {
                Phase::CakeAdd | Phase::FinalEf => {
                    let s = r.addable_set.as_ref().ok_or_else(|| format!("{}: no addable set recorded", at()))?;
                    check(!s.is_empty(), || format!("{}: empty addable set", at()))?;
                    check((r.phase == Phase::FinalEf) == (s.len() == n), || format!("{}: phase does not match |S|", at()))?;
                }
                Phase::CycleElim => {
                    let c = r.cycle.as_ref().ok_or_else(|| format!("{}: no cycle recorded", at()))?;
                    check(c.len() >= 2, || format!("{}: degenerate cycle", at()))?;
                }
                Phase::Init => unreachable!(),
            }
            match r.phase {
                Phase::CakeAdd => {
                    check(r.envy_edges_after <= r.envy_edges_before, || format!("{}: envy edges rose", at()))?;
                    if !r.whole_remaining {
                        let before = r.addable_set.as_ref().map_or(0, Vec::len);
                        check(
                            r.envy_edges_after < r.envy_edges_before || r.addable_size_after < before,
                            || format!("{}: partial piece changed neither edges nor |S|", at()),
                        )?;
                    }
                }
                Phase::CycleElim => {
                    check(r.envy_edges_after < r.envy_edges_before, || format!("{}: cycle kept all envy edges", at()))?;
                }
                _ => {}
            }
        }
    }
    Ok(format!("{} runs, {rounds} rounds, zero violations", traces.len()))
}

fn criterion_4() -> Outcome {
    let zero = Scalar::zero();
    for s in 0..200u64 {
        let inst = random_instance(&params(2, (s % 11) as usize, 1 + (s % 6) as usize, DensityKind::Constant), 2_000 + s);
        for base in [GoodsBase::Ef1, GoodsBase::Efx] {
            let sol = solve_two_agents(&inst, base, SolveOptions::default()).map_err(|e| format!("seed {s} {base:?}: {e}"))?;
            let a = &sol.allocation;
            check(a.validate(&inst, true).is_ok(), || format!("seed {s} {base:?}: incomplete allocation"))?;
            check(is_efm(&ValueTable::new(&inst, a), &zero).pass, || format!("seed {s} {base:?}: is_EFM fails"))?;
            check(common::efm(&inst, a, &zero), || format!("seed {s} {base:?}: direct EFM check fails"))?;
            check(common::envy_free_agent(&inst, a, 1), || format!("seed {s} {base:?}: the chooser envies"))?;
            if base == GoodsBase::Efx {
                check(is_efx_mixed(&ValueTable::new(&inst, a), &zero).pass, || format!("seed {s}: is_EFXM fails"))?;
                check(common::efxm(&inst, a), || format!("seed {s}: direct EFXM check fails"))?;
            }
        }
    }
    Ok("200/200 EFM with an envy-free chooser; EFX base passes the stronger notion".into())
}

fn eps_instances() -> Vec<Instance> {
    (0..100u64)
        .map(|s| {
            let n = if s % 4 == 3 { 3 } else { 2 };
            let kind = if s % 10 == 4 { DensityKind::Linear } else { DensityKind::Constant };
            random_instance(&params(n, (s % 5) as usize, 1 + (s % 3) as usize, kind), s)
        })
        .collect()
}

fn criterion_5() -> Outcome {
    let instances = eps_instances();
    let mut runs = 0;
    for eps in [ratio(1, 10), ratio(1, 100)] {
        for (s, inst) in instances.iter().enumerate() {
            let at = |msg: String| format!("eps {eps} seed {s}: {msg}");
            let sol = solve_eps_efm(inst, &eps, SolveOptions::default()).map_err(|e| at(e.to_string()))?;
            let a = &sol.allocation;
            let slack = inst.verify_slack();
            check(a.validate(inst, true).is_ok(), || at("incomplete allocation".into()))?;
            check(is_eps_efm(&ValueTable::new(inst, a), &eps, &slack).pass, || at("is_eps_EFM fails".into()))?;
            check(common::eps_efm(inst, a, &eps, &slack), || at("direct eps-EFM check fails".into()))?;

            let n = int(inst.n() as i64);
            let quarter = &eps / int(4);
            let eps_prime = &eps * &eps / (int(8) * &n);
            let trace = &sol.trace;
            let mut hat = quarter.clone();
            let (mut partial, mut full) = (0, 0);
            for r in &trace.rounds {
                let recorded = r.eps_hat.clone().ok_or_else(|| at(format!("round {} has no eps_hat", r.round)))?;
                match r.phase {
                    Phase::Init => {}
                    Phase::CakeAdd | Phase::FinalEf => {
                        let sub = r.subroutine_eps.clone().unwrap_or_default();
                        let envy = r.subroutine_envy.clone().unwrap_or_default();
                        check(envy <= sub, || at(format!("round {}: split envy {envy} > {sub}", r.round)))?;
                        if r.phase == Phase::FinalEf {
                            full += 1;
                            check(sub == quarter, || at("final split not run at eps/4".into()))?;
                        } else {
                            partial += 1;
                            check(sub == eps_prime, || at("partial split not run at eps'".into()))?;
                            if !r.whole_remaining {
                                let before = r.remaining_value_before.clone().unwrap_or_default();
                                let after = r.remaining_value_after.clone().unwrap_or_default();
                                check(&before - &after >= hat, || at(format!("round {}: remaining value fell by less than {hat}", r.round)))?;
                            }
                        }
                        hat += &sub;
                    }
                    Phase::CycleElim => {
                        let gain = r.welfare_after.clone().unwrap_or_default() - r.welfare_before.clone().unwrap_or_default();
                        check(gain >= hat, || at(format!("round {}: welfare rose by {gain} < {hat}", r.round)))?;
                    }
                }
                check(recorded == hat, || at(format!("round {}: eps_hat {recorded} != {hat}", r.round)))?;
                check(hat <= eps, || at(format!("round {}: eps_hat {hat} > eps", r.round)))?;
            }
            let accounted = &quarter + int(partial) * &eps_prime + int(full) * &quarter;
            check(trace.final_eps_hat.as_ref() == Some(&accounted), || at("final eps_hat does not match the accounting".into()))?;
            check(accounted <= eps, || at("accounting exceeds eps".into()))?;
            runs += 1;
        }
    }
    Ok(format!("{runs}/200 runs eps-EFM with exact eps-hat accounting"))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let inst = efm_po_conflict();
    let mut total = 0;
    for r in [10, 100] {
        let grid = GridCakeModel::uniform(r);
        let set = efm_exhaustive_check(&inst, &grid).map_err(|e| e.to_string())?;
        check(!set.is_empty(), || format!("r={r}: no EFM allocation"))?;
        for a in &set {
            let goodless = (0..2).find(|&i| a.bundles[i].goods.is_empty()).ok_or("both agents hold goods")?;
            check(a.bundles[goodless].cake == inst.cake(), || format!("r={r}: cake split {a:?}"))?;
            let holder = 1 - goodless;
            let d = pareto_dominance_search(&inst, a, &grid)
                .map_err(|e| e.to_string())?
                .ok_or_else(|| format!("r={r}: no dominator"))?;
            let u = (a.utilities(&inst), d.utilities(&inst));
            check((0..2).all(|i| u.1[i] >= u.0[i]) && u.1 != u.0, || format!("r={r}: not a dominator"))?;
            // the half worthless to the cake holder changes hands
            let worthless: IntervalSet = if goodless == 1 {
                IntervalSet::interval(int(0), ratio(1, 2))
            } else {
                IntervalSet::interval(ratio(1, 2), int(1))
            };
            check(inst.cake_value(goodless, &worthless).is_zero(), || "wrong half".into())?;
            check(d.bundles[holder].cake.contains_set(&worthless), || format!("r={r}: dominator {d:?}"))?;
            total += 1;
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("{total} EFM grid allocations, all whole-cake and all dominated, {:.2}s", elapsed.as_secs_f64()))
}

fn criterion_7() -> Outcome {
    let inst = mnw_not_efm();
    let zero = Scalar::zero();
    for r in [10, 100, 1000] {
        let a = mnw_search(&inst, &GridCakeModel::uniform(r)).map_err(|e| e.to_string())?;
        check(a.bundles[0].goods.len() == 1 && a.bundles[0].cake == inst.cake(), || format!("r={r}: {a:?}"))?;
        let t = ValueTable::new(&inst, &a);
        check(!is_weak_efm(&t, &zero).pass, || format!("r={r}: weak EFM passes"))?;
        check(!is_efm(&t, &zero).pass, || format!("r={r}: EFM passes"))?;
        check(!common::efm(&inst, &a, &zero), || format!("r={r}: direct EFM passes"))?;
    }
    Ok("agent 1 gets one good and all cake at r=10,100,1000; weak EFM fails".into())
}

fn random_goods_assignment(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<usize> {
    (0..m).map(|_| rng.gen_range(0..n)).collect()
}

fn random_cake_split(rng: &mut ChaCha8Rng, inst: &Instance) -> Allocation {
    let mut cuts: BTreeSet<i64> = (0..rng.gen_range(0..6)).map(|_| rng.gen_range(1..60)).collect();
    cuts.insert(0);
    cuts.insert(60);
    let cuts: Vec<i64> = cuts.into_iter().collect();
    let mut a = Allocation::empty(inst);
    for w in cuts.windows(2) {
        let i = rng.gen_range(0..inst.n());
        a.give_cake(i, &IntervalSet::interval(ratio(w[0], 60), ratio(w[1], 60)));
    }
    a
}

fn criterion_8() -> Outcome {
    let zero = Scalar::zero();
    let (mut agree, mut ef1_true) = (0, 0);
    for s in 0..100u64 {
        let (n, m) = (2 + (s % 4) as usize, 1 + (s % 7) as usize);
        let inst = random_instance(&params(n, m, 0, DensityKind::Constant), 3_000 + s);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let mut allocs = vec![round_robin_ef1(&inst)];
        allocs.extend((0..30).map(|_| Allocation::from_assignment(&inst, &random_goods_assignment(&mut rng, n, m))));
        for a in &allocs {
            let t = ValueTable::new(&inst, a);
            let efm = is_efm(&t, &zero).pass;
            let ef1 = is_ef1(&t, &zero).map_err(|e| e.to_string())?.pass;
            check(efm == ef1 && ef1 == common::ef1(&inst, a), || format!("seed {s}: EFM {efm} vs EF1 {ef1}"))?;
            agree += 1;
            ef1_true += usize::from(ef1);
        }
        let sol = solve_efm(&inst, SolveOptions::default()).map_err(|e| e.to_string())?;
        check(sol.allocation == round_robin_ef1(&inst), || format!("seed {s}: solver differs from round robin"))?;
    }
    let (mut cake_agree, mut ef_true) = (0, 0);
    for s in 0..100u64 {
        let n = 2 + (s % 4) as usize;
        let inst = random_instance(&params(n, 0, 1 + (s % 5) as usize, DensityKind::Constant), 4_000 + s);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let mut allocs = vec![solve_efm(&inst, SolveOptions::default()).map_err(|e| e.to_string())?.allocation];
        allocs.extend((0..30).map(|_| random_cake_split(&mut rng, &inst)));
        for a in &allocs {
            let t = ValueTable::new(&inst, a);
            let efm = is_efm(&t, &zero).pass;
            let ef = is_ef(&t, &zero).pass;
            check(efm == ef && ef == common::ef(&inst, a, &zero), || format!("cake seed {s}: EFM {efm} vs EF {ef}"))?;
            cake_agree += 1;
            ef_true += usize::from(ef);
        }
    }
    Ok(format!(
        "EFM=EF1 on {agree} goods allocations ({ef1_true} EF1), EFM=EF on {cake_agree} cake splits ({ef_true} EF), solver = round robin"
    ))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut nonempty = 0;
    for k in 0..500 {
        let n = rng.gen_range(1..=8);
        let density = rng.gen_range(0.0..0.6);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && rng.gen_bool(density) {
                    let kind = if rng.gen_bool(0.5) { EdgeKind::Envy } else { EdgeKind::Eq };
                    edges.push((i, j, kind));
                }
            }
        }
        let g = EnvyGraph::from_edges(n, &edges);
        let addable = |mask: u32| -> bool {
            mask != 0
                && edges.iter().all(|&(i, j, kind)| {
                    let (inside_i, inside_j) = (mask >> i & 1 == 1, mask >> j & 1 == 1);
                    !(inside_j && (!inside_i || kind == EdgeKind::Envy))
                })
        };
        let all: Vec<u32> = (1..1u32 << n).filter(|&m| addable(m)).collect();
        let union = all.iter().fold(0u32, |acc, &m| acc | m);
        let got: u32 = g.maximal_addable_set().iter().fold(0, |acc, &v| acc | 1 << v);
        check(got == union, || format!("graph {k}: got {got:b}, brute force {union:b}"))?;
        if union != 0 {
            check(addable(union), || format!("graph {k}: union of addable sets is not addable"))?;
            check(all.iter().all(|&m| m & !got == 0), || format!("graph {k}: misses an addable subset"))?;
            check(all.iter().filter(|&&m| all.iter().all(|&o| o & !m == 0)).count() == 1, || {
                format!("graph {k}: maximal addable set not unique")
            })?;
            nonempty += 1;
        }
    }
    Ok(format!("500 graphs agree with 2^n enumeration ({nonempty} with an addable set)"))
}

fn outputs(inst: &Instance, alg: &str) -> Result<(String, String, String), String> {
    let opts = SolveOptions::default();
    let eps = ratio(1, 10);
    let sol = match alg {
        "efm" => solve_efm(inst, opts),
        "two" => solve_two_agents(inst, GoodsBase::Efx, opts),
        _ => solve_eps_efm(inst, &eps, opts),
    }
    .map_err(|e| e.to_string())?;
    let claim = (alg == "eps-efm").then_some(&eps);
    let report = FairnessReport::compute(inst, &sol.allocation, claim, &inst.verify_slack());
    Ok((allocation_to_json(inst, &sol.allocation, true), sol.trace.to_json(), report.to_json()))
}

fn criterion_10() -> Outcome {
    let cases = [
        ("efm", params(4, 5, 4, DensityKind::Constant), 11u64),
        ("efm", params(3, 3, 3, DensityKind::Linear), 12),
        ("two", params(2, 6, 3, DensityKind::Constant), 13),
        ("eps-efm", params(3, 3, 2, DensityKind::Constant), 14),
    ];
    for (alg, p, seed) in cases {
        let runs: Vec<(String, (String, String, String))> = (0..3)
            .map(|_| {
                let inst = random_instance(&p, seed);
                outputs(&inst, alg).map(|o| (inst.to_json(), o))
            })
            .collect::<Result<_, _>>()?;
        check(runs.iter().all(|r| r == &runs[0]), || format!("{alg} seed {seed}: outputs differ between runs"))?;
    }
    Ok("instance, allocation, trace and report JSON byte-identical over 3 runs".into())
}

fn main() {
    let mut traces = Vec::new();
    let mut results: Vec<(&str, Outcome, Duration)> = Vec::new();
    let mut run = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let out = f();
        results.push((name, out, t.elapsed()));
        let (name, out, took) = results.last().unwrap();
        match out {
            Ok(msg) => println!("PASS  {name}: {msg} [{:.1}s]", took.as_secs_f64()),
            Err(msg) => println!("FAIL  {name}: {msg} [{:.1}s]", took.as_secs_f64()),
        }
    };
    run("1 EFM existence and correctness", &mut || criterion_1(&mut traces));
    run("2 piecewise-linear path", &mut || criterion_2(&mut traces));
    run("3 round-level trace invariants", &mut || criterion_3(&traces));
    run("4 two-agent algorithm", &mut criterion_4);
    run("5 eps-EFM", &mut criterion_5);
    run("6 first example (EFM vs PO)", &mut criterion_6);
    run("7 second example (MNW vs EFM)", &mut criterion_7);
    run("8 reduction identities", &mut criterion_8);
    run("9 addable set vs brute force", &mut criterion_9);
    run("10 determinism", &mut criterion_10);
    let failed = results.iter().filter(|r| r.1.is_err()).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
