use std::fmt::Write as _;
use std::io::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, Context};
use mixdiv::exec::Exec;
use mixdiv::fairness::{FairnessReport, ValueTable};
use mixdiv::gen::{random_instance, GenParams};
use mixdiv::io::{allocation_to_json, read_allocation};
use mixdiv::model::{load_instance, QueryCounter, QueryCounts};
use mixdiv::oracle::{
    efm_exhaustive_check_with, efx_brute_force_with, mnw_search, pareto_dominance_search, GridCakeModel, OracleError,
};
use mixdiv::scalar::Scalar;
use mixdiv::solvers::{solve_efm, solve_eps_efm, solve_two_agents, GoodsBase, SolveError, SolveOptions, Solution};
use mixdiv::{Allocation, Instance};
use serde_json::{json, Value};

use crate::{Algorithm, Base, BenchArgs, GenArgs, Notion, OracleArgs, Query, SolveArgs, VerifyArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Unfair = 1,
    Data = 2,
    Precondition = 3,
    Invariant = 4,
}

#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub error: anyhow::Error,
}

impl Failure {
    fn new(status: Status, error: impl Into<anyhow::Error>) -> Self {
        Self {
            status,
            error: error.into(),
        }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        let status = match e {
            SolveError::Precondition(_) => Status::Precondition,
            SolveError::Invariant { .. } => Status::Invariant,
        };
        Failure::new(status, e)
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        Failure::new(Status::Precondition, e)
    }
}

type Outcome = Result<Status, Failure>;

fn data_error(e: impl Into<anyhow::Error>) -> Failure {
    Failure::new(Status::Data, e)
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::new(Status::Precondition, anyhow!(msg.into()))
}

fn load(path: &Path, normalize: bool) -> Result<Instance, Failure> {
    let inst = load_instance(path).map_err(data_error)?;
    if normalize && !inst.is_normalized() {
        return inst
            .normalized()
            .with_context(|| format!("{}: cannot normalize", path.display()))
            .map_err(data_error);
    }
    Ok(inst)
}

fn parse(text: &str) -> Value {
    serde_json::from_str(text).expect("library output is valid JSON")
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(data_error)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            say(text);
            Ok(())
        }
    }
}

/// Prints to stdout; a reader that went away early (`| head`) is not an error.
fn say(text: &str) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = writeln!(out, "{text}").and_then(|_| out.flush()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("error: cannot write to stdout: {e}");
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize")
}

fn verdict_status(pass: bool) -> Status {
    if pass {
        Status::Ok
    } else {
        Status::Unfair
    }
}

pub fn validate(path: &Path, normalize: bool) -> Outcome {
    let inst = load(path, normalize)?;
    let summary = json!({
        "agents": inst.n(),
        "goods": inst.m(),
        "cakes": inst.cake_offsets().len().saturating_sub(1),
        "has_cake": inst.has_cake(),
        "piecewise_constant": inst.is_piecewise_constant(),
        "normalized": inst.is_normalized(),
    });
    say(&pretty(&summary));
    Ok(Status::Ok)
}

/// Report with optional counting of the verifier's value queries.
fn report(inst: &Instance, alloc: &Allocation, eps: Option<&Scalar>, count: bool) -> (FairnessReport, ValueTable, Option<QueryCounts>) {
    let slack = inst.verify_slack();
    let counter = QueryCounter::default();
    let table = if count {
        ValueTable::counted(inst, alloc, &counter)
    } else {
        ValueTable::new(inst, alloc)
    };
    let r = FairnessReport::from_table(inst, alloc, &table, eps, &slack);
    (r, table, count.then(|| counter.snapshot()))
}

fn run_solver(inst: &Instance, alg: Algorithm, eps: Option<&Scalar>, base: Base, opts: SolveOptions) -> Result<Solution, SolveError> {
    match alg {
        Algorithm::Efm => solve_efm(inst, opts),
        Algorithm::Two => {
            let base = match base {
                Base::Ef1 => GoodsBase::Ef1,
                Base::Efx => GoodsBase::Efx,
            };
            solve_two_agents(inst, base, opts)
        }
        Algorithm::EpsEfm => solve_eps_efm(inst, eps.expect("checked by the caller"), opts),
    }
}

pub fn solve(a: &SolveArgs) -> Outcome {
    if a.eps.is_some() != (a.alg == Algorithm::EpsEfm) {
        return Err(usage("--eps goes with --alg eps-efm and only with it"));
    }
    if a.base.is_some() && a.alg != Algorithm::Two {
        return Err(usage("--base only applies to --alg two"));
    }
    let inst = load(&a.instance, a.load.normalize)?;
    let opts = SolveOptions {
        checked: !a.unchecked,
        keep_trace: !a.no_trace,
    };
    let base = a.base.unwrap_or(Base::Ef1);
    let sol = run_solver(&inst, a.alg, a.eps.as_ref(), base, opts)?;
    let alloc = &sol.allocation;
    let (rep, table, verifier) = report(&inst, alloc, a.eps.as_ref(), a.count_verifier_queries);

    let (notion, pass) = match a.alg {
        Algorithm::Efm => ("EFM", rep.notions.efm),
        Algorithm::EpsEfm => ("epsEFM", rep.notions.eps_efm.as_ref().is_some_and(|v| v.pass)),
        Algorithm::Two => {
            let chooser_ef = table.own(1) >= &table.get(1, 0).total;
            match base {
                Base::Ef1 => ("EFM + chooser EF", rep.notions.efm && chooser_ef),
                Base::Efx => ("EFXM + chooser EF", rep.notions.efx_mixed && chooser_ef),
            }
        }
    };
    let claim = json!({ "notion": notion, "pass": pass });
    let allocation = parse(&allocation_to_json(&inst, alloc, a.decimal));
    let mut report_doc = parse(&rep.to_json());
    report_doc["claim"] = claim;
    if let Some(q) = verifier {
        report_doc["verifier_queries"] = json!(q);
    }
    let trace = parse(&sol.trace.to_json());

    match &a.out {
        Some(dir) => {
            fs::create_dir_all(dir)
                .with_context(|| format!("cannot create {}", dir.display()))
                .map_err(data_error)?;
            write_text(&dir.join("allocation.json"), &pretty(&allocation))?;
            write_text(&dir.join("report.json"), &pretty(&report_doc))?;
            write_text(&dir.join("trace.json"), &pretty(&trace))?;
        }
        None => {
            let doc = json!({ "allocation": allocation, "report": report_doc, "trace": trace });
            say(&pretty(&doc));
        }
    }
    eprintln!("{notion}: {}", if pass { "pass" } else { "FAIL" });
    Ok(verdict_status(pass))
}

pub fn verify(a: &VerifyArgs) -> Outcome {
    if a.eps.is_some() != (a.notion == Notion::EpsEfm) {
        return Err(usage("--eps goes with --notion eps-efm and only with it"));
    }
    let inst = load(&a.instance, a.load.normalize)?;
    let alloc = read_allocation(&inst, &a.allocation).map_err(data_error)?;
    let (rep, _, verifier) = report(&inst, &alloc, a.eps.as_ref(), a.count_verifier_queries);
    let n = &rep.notions;
    let (key, pass) = match a.notion {
        Notion::Ef => ("EF", n.ef),
        Notion::Ef1 => (
            "EF1",
            n.ef1.ok_or_else(|| usage("EF1 is undefined when a bundle holds cake; use --notion efm"))?,
        ),
        Notion::Efm => ("EFM", n.efm),
        Notion::WeakEfm => ("weakEFM", n.weak_efm),
        Notion::Efxm => ("EFXM", n.efx_mixed),
        Notion::EpsEfm => ("epsEFM", n.eps_efm.as_ref().is_some_and(|v| v.pass)),
    };
    let mut doc = parse(&rep.to_json());
    if let Some(q) = verifier {
        doc["verifier_queries"] = json!(q);
    }
    say(&pretty(&doc));
    if pass {
        eprintln!("{key}: pass");
    } else {
        let pairs: Vec<String> = rep.violations[key].iter().map(|(i, j)| format!("{i} envies {j}")).collect();
        eprintln!("{key}: FAIL ({})", pairs.join("; "));
    }
    Ok(verdict_status(pass))
}

pub fn gen(a: &GenArgs) -> Outcome {
    if a.n == 0 {
        return Err(usage("-n must be at least 1"));
    }
    let p = GenParams {
        n: a.n,
        m: a.m,
        segments: a.segments,
        kind: a.kind.into(),
    };
    emit(a.out.as_deref(), &random_instance(&p, a.seed).to_json())?;
    Ok(Status::Ok)
}

fn alloc_entry(inst: &Instance, alloc: &Allocation) -> Value {
    let rep = FairnessReport::compute(inst, alloc, None, &inst.verify_slack());
    json!({
        "allocation": parse(&allocation_to_json(inst, alloc, false)),
        "notions": parse(&serde_json::to_string(&rep.notions).expect("notions serialize")),
    })
}

pub fn oracle(a: &OracleArgs) -> Outcome {
    if a.grid == 0 {
        return Err(usage("--grid must be at least 1"));
    }
    let inst = load(&a.instance, a.load.normalize)?;
    let exec = if a.sequential { Exec::Sequential } else { Exec::Parallel };
    let grid = GridCakeModel::uniform(a.grid);
    let doc = match a.query {
        Query::EfmSet => {
            let set = efm_exhaustive_check_with(&inst, &grid, exec)?;
            json!({
                "query": "efm-set",
                "grid": a.grid,
                "count": set.len(),
                "allocations": set.iter().map(|x| alloc_entry(&inst, x)).collect::<Vec<_>>(),
            })
        }
        Query::Mnw => {
            let best = mnw_search(&inst, &grid)?;
            json!({ "query": "mnw", "grid": a.grid, "result": alloc_entry(&inst, &best) })
        }
        Query::Dominate => {
            let path = a.allocation.as_ref().expect("required by clap");
            let alloc = read_allocation(&inst, path).map_err(data_error)?;
            let grid = grid.snapped_to(&alloc);
            let found = pareto_dominance_search(&inst, &alloc, &grid)?;
            json!({
                "query": "dominate",
                "grid": a.grid,
                "grid_points": grid.resolution() + 1,
                "result": found.map(|d| alloc_entry(&inst, &d)),
            })
        }
        Query::Efx => {
            let found = efx_brute_force_with(&inst, exec)?;
            json!({ "query": "efx", "result": found.map(|d| alloc_entry(&inst, &d)) })
        }
    };
    say(&pretty(&doc));
    Ok(Status::Ok)
}

pub const CSV_HEADER: &str = "n,m,algorithm,eps,eval_queries,cut_queries,perfect_calls,rounds,wall_ms";

struct Job {
    alg: Algorithm,
    n: usize,
    m: usize,
    eps: Option<Scalar>,
    seed: u64,
}

fn alg_name(alg: Algorithm) -> &'static str {
    match alg {
        Algorithm::Efm => "efm",
        Algorithm::Two => "two",
        Algorithm::EpsEfm => "eps-efm",
    }
}

pub fn bench(a: &BenchArgs) -> Outcome {
    let mut jobs = Vec::new();
    for &alg in &a.alg {
        for &n in &a.n.0 {
            if n == 0 || (alg == Algorithm::Two && n != 2) {
                continue;
            }
            for &m in &a.m.0 {
                let eps_values: Vec<Option<Scalar>> = if alg == Algorithm::EpsEfm {
                    a.eps.iter().cloned().map(Some).collect()
                } else {
                    vec![None]
                };
                for eps in eps_values {
                    for seed in a.first_seed..a.first_seed + a.seeds {
                        jobs.push(Job {
                            alg,
                            n,
                            m,
                            eps: eps.clone(),
                            seed,
                        });
                    }
                }
            }
        }
    }
    let opts = SolveOptions {
        checked: !a.unchecked,
        keep_trace: false,
    };
    let exec = if a.sequential { Exec::Sequential } else { Exec::Parallel };
    let kind = a.kind.into();
    let rows = exec.map(&jobs, |job| -> Result<String, SolveError> {
        let p = GenParams {
            n: job.n,
            m: job.m,
            segments: a.segments,
            kind,
        };
        let inst = random_instance(&p, job.seed);
        let start = Instant::now();
        let sol = run_solver(&inst, job.alg, job.eps.as_ref(), Base::Ef1, opts)?;
        let wall = start.elapsed().as_secs_f64() * 1e3;
        let t = &sol.trace;
        Ok(format!(
            "{},{},{},{},{},{},{},{},{:.3}",
            job.n,
            job.m,
            alg_name(job.alg),
            job.eps.as_ref().map(|e| e.to_string()).unwrap_or_default(),
            t.totals.eval_queries,
            t.totals.cut_queries,
            t.totals.perfect_oracle_calls,
            t.cake_rounds + t.cycle_rounds,
            wall
        ))
    });
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for row in rows {
        writeln!(csv, "{}", row?).expect("writing to a String");
    }
    match &a.out {
        Some(p) => write_text(p, &csv)?,
        None => say(csv.trim_end()),
    }
    Ok(Status::Ok)
}
