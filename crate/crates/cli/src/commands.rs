//! The four experiments. Each writes its tables and a `summary.json` into
//! the output directory and returns whether every check it ran passed.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use stheat::checks::{
    energy_stability, forward_spectral, gradient_correctness, heat_sink_design, operator_suite,
    optimum_crossvalidation, solver_comparison, two_domain, CheckOutcome, ComparisonResult, CrossValidationPlan,
};
use stheat::heat::uniform_breakpoints;
use stheat::optimizer::{run_topology_optimization, OptimizationTrace, Tolerances};
use stheat::verification::{
    attach_level_changes, be_convergence, crossvalidate_point, declared_convergence, forward_convergence,
    heat_sink_problem, reference_optimum, run_level, SolverKind, SweepLevel,
};

use crate::config::RunConfig;

pub type CmdResult<T> = Result<T, Box<dyn std::error::Error + Send + Sync>>;

/// Options shared by every command.
pub struct Context {
    pub config: RunConfig,
    pub seed: u64,
    pub jobs: usize,
    pub out: PathBuf,
}

impl Context {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            tau_rho: self.config.optimizer.tau_rho,
            tau_j: self.config.optimizer.tau_j,
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_summary(&self, command: &str, results: Value) -> CmdResult<()> {
        let summary = json!({
            "command": command,
            "config": &self.config,
            "seed": self.seed,
            "environment": {
                "version": env!("CARGO_PKG_VERSION"),
                "os": std::env::consts::OS,
                "arch": std::env::consts::ARCH,
                "jobs": self.jobs,
            },
            "results": results,
        });
        fs::write(
            self.path("summary.json"),
            serde_json::to_string_pretty(&summary)? + "\n",
        )?;
        Ok(())
    }
}

fn csv_writer(path: &Path, header: &[&str]) -> CmdResult<csv::Writer<fs::File>> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    Ok(w)
}

fn num(v: f64) -> String {
    format!("{v:.12e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn run_criterion(ctx: &Context, id: u32, comparison: &mut Option<CmdResult<ComparisonResult>>) -> CheckOutcome {
    let seed = ctx.seed;
    let cfg = &ctx.config;
    let compare = |c: &mut Option<CmdResult<ComparisonResult>>| -> Result<ComparisonResult, String> {
        c.get_or_insert_with(|| compare_sweeps(ctx).map(|(r, _)| r))
            .as_ref()
            .map(|r| r.clone())
            .map_err(|e| e.to_string())
    };
    let failed = |title: &str, e: String| CheckOutcome {
        id,
        title: title.into(),
        subchecks: vec![stheat::checks::SubCheck {
            name: "run".into(),
            passed: false,
            detail: e,
        }],
        wall_s: 0.0,
    };
    match id {
        1 => operator_suite(seed),
        2 => forward_spectral(),
        3 => two_domain(),
        4 => energy_stability(seed),
        5 => gradient_correctness(seed),
        6 => optimum_crossvalidation(&cfg.two_domain, &CrossValidationPlan::default()),
        7 => match compare(comparison) {
            Ok(r) => solver_comparison(&cfg.heat_sink, &r, seed),
            Err(e) => failed("solver comparison", e),
        },
        _ => match compare(comparison) {
            Ok(r) => heat_sink_design(&r),
            Err(e) => failed("heat-sink design", e),
        },
    }
}

/// Runs the configured acceptance criteria. Criteria 7 and 8 share one
/// comparison sweep.
pub fn verify(ctx: &Context) -> CmdResult<bool> {
    let mut comparison = None;
    let mut outcomes = Vec::new();
    for &id in &ctx.config.verify.criteria {
        let o = run_criterion(ctx, id, &mut comparison);
        println!("{}", o.summary_line());
        outcomes.push(o);
    }
    let mut w = csv_writer(&ctx.path("checks.csv"), &["criterion", "check", "passed", "detail"])?;
    for o in &outcomes {
        for s in &o.subchecks {
            w.write_record([o.id.to_string(), s.name.clone(), s.passed.to_string(), s.detail.clone()])?;
        }
    }
    w.flush()?;
    let all = outcomes.iter().all(CheckOutcome::passed);
    let results: Vec<Value> = outcomes
        .iter()
        .map(|o| {
            json!({
                "criterion": o.id,
                "title": o.title,
                "passed": o.passed(),
                "wall_s": o.wall_s,
                "failed": o.failures().map(|s| s.name.clone()).collect::<Vec<_>>(),
            })
        })
        .collect();
    ctx.write_summary("verify", json!({ "passed": all, "criteria": results }))?;
    Ok(all)
}

/// Forward and backward Euler error tables on the manufactured problem and
/// the two-subdomain optimum against the reference minimizer.
pub fn converge(ctx: &Context) -> CmdResult<bool> {
    let cfg = &ctx.config;
    let setup = &cfg.manufactured;
    let forward = cfg
        .converge
        .degrees
        .par_iter()
        .map(|&n| forward_convergence(setup, &[n]).map(|mut r| r.remove(0)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut w = csv_writer(&ctx.path("forward.csv"), &["n", "l2_error", "j_error"])?;
    for r in &forward {
        w.write_record([r.n.to_string(), num(r.l2_error), num(r.j_error)])?;
    }
    w.flush()?;

    let be = cfg
        .converge
        .be_runs
        .par_iter()
        .map(|&[m, steps]| be_convergence(setup, &[(m, steps)]).map(|mut r| r.remove(0)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut w = csv_writer(&ctx.path("be.csv"), &["elements", "steps", "l2_error", "j_error"])?;
    for r in &be {
        w.write_record([
            r.elements.to_string(),
            r.steps.to_string(),
            num(r.l2_error),
            num(r.j_error),
        ])?;
    }
    w.flush()?;

    let reference = reference_optimum(&cfg.two_domain, cfg.converge.n_modes, 1e-10)?;
    let cross = cfg
        .converge
        .crossvalidation
        .par_iter()
        .map(|&[nx, nt]| {
            crossvalidate_point(
                &cfg.two_domain,
                &reference,
                (nx, nt),
                ctx.tolerances(),
                cfg.optimizer.max_iters,
                cfg.mma,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut w = csv_writer(
        &ctx.path("crossvalidation.csv"),
        &[
            "degree_x",
            "degree_t",
            "kappa1",
            "kappa2",
            "J",
            "design_error",
            "objective_error",
            "iterations",
            "converged",
        ],
    )?;
    for r in &cross {
        w.write_record([
            r.degree_x.to_string(),
            r.degree_t.to_string(),
            num(r.kappa1),
            num(r.kappa2),
            num(r.objective),
            num(r.design_error),
            num(r.objective_error),
            r.iterations.to_string(),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;
    ctx.write_summary(
        "converge",
        json!({
            "forward": forward,
            "backward_euler": be,
            "reference_optimum": reference,
            "crossvalidation": cross,
        }),
    )?;
    Ok(true)
}

fn write_design(path: &Path, breakpoints: &[f64], rho: &[f64]) -> CmdResult<()> {
    let mut w = csv_writer(path, &["element", "x_left", "x_right", "rho"])?;
    for (k, r) in rho.iter().enumerate() {
        w.write_record([k.to_string(), num(breakpoints[k]), num(breakpoints[k + 1]), num(*r)])?;
    }
    w.flush()?;
    Ok(())
}

fn write_trace(path: &Path, trace: &OptimizationTrace) -> CmdResult<()> {
    let mut w = csv_writer(path, &["iter", "J", "delta_rho_inf", "j_rel", "wall_s"])?;
    for r in &trace.records {
        w.write_record([
            r.iter.to_string(),
            num(r.objective),
            num(r.delta_rho_inf),
            opt(r.j_rel),
            format!("{:.6}", r.wall_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One heat-sink optimization with the configured solver and resolution.
pub fn optimize(ctx: &Context) -> CmdResult<bool> {
    let cfg = &ctx.config;
    let sel = &cfg.optimize;
    let (problem, dof) = heat_sink_problem(&cfg.heat_sink, sel.solver, sel.nt, &cfg.sat)?;
    let initial = problem.uniform_design();
    let trace = run_topology_optimization(
        problem.as_ref(),
        &initial,
        ctx.tolerances(),
        cfg.optimizer.max_iters,
        cfg.mma,
    )?;
    let breakpoints = uniform_breakpoints(0.0, 1.0, cfg.heat_sink.elements);
    write_design(&ctx.path("design.csv"), &breakpoints, &trace.final_rho)?;
    write_trace(&ctx.path("trace.csv"), &trace)?;
    println!(
        "{} Nt={} dof={dof}: J={:.8} after {} iterations ({:?})",
        sel.solver.label(),
        sel.nt,
        trace.final_objective,
        trace.iterations(),
        trace.stop
    );
    ctx.write_summary(
        "optimize",
        json!({
            "solver": sel.solver,
            "Nt": sel.nt,
            "dof": dof,
            "wall_s": trace.total_wall_s(),
            "iterations": trace.iterations(),
            "stop": trace.stop,
            "objective_converged": trace.objective_converged,
            "J": trace.final_objective,
            "rho": trace.final_rho,
            "delta_rho_history": trace.records.iter().map(|r| r.delta_rho_inf).collect::<Vec<_>>(),
        }),
    )?;
    Ok(true)
}

#[derive(Serialize)]
struct LevelError {
    solver: SolverKind,
    nt: usize,
    error: String,
}

/// Every (solver, resolution) point of the comparison, run on the worker
/// pool; failed points are returned separately.
fn compare_sweeps(ctx: &Context) -> CmdResult<(ComparisonResult, Vec<LevelError>)> {
    let cfg = &ctx.config;
    let points: Vec<(SolverKind, usize)> = cfg
        .compare
        .solvers
        .iter()
        .flat_map(|&s| {
            let levels = if s == SolverKind::StSe {
                &cfg.compare.st_degrees
            } else {
                &cfg.compare.be_steps
            };
            levels.iter().map(move |&n| (s, n))
        })
        .collect();
    let results: Vec<_> = points
        .par_iter()
        .map(|&(s, nt)| {
            let r = run_level(
                &cfg.heat_sink,
                s,
                nt,
                &cfg.sat,
                ctx.tolerances(),
                cfg.optimizer.max_iters,
                cfg.mma,
                cfg.compare.repetitions,
            );
            (s, nt, r)
        })
        .collect();
    let mut out = ComparisonResult {
        be_fe: Vec::new(),
        be_fe_aao: Vec::new(),
        st_se: Vec::new(),
    };
    let mut errors = Vec::new();
    for (solver, nt, r) in results {
        match r {
            Ok(level) => match solver {
                SolverKind::BeFe => out.be_fe.push(level),
                SolverKind::BeFeAao => out.be_fe_aao.push(level),
                SolverKind::StSe => out.st_se.push(level),
            },
            Err(e) => errors.push(LevelError {
                solver,
                nt,
                error: e.to_string(),
            }),
        }
    }
    for levels in [&mut out.be_fe, &mut out.be_fe_aao, &mut out.st_se] {
        levels.sort_by_key(|l| l.nt);
        attach_level_changes(levels);
    }
    Ok((out, errors))
}

fn solver_summary(levels: &[SweepLevel], tau: f64) -> Value {
    json!({
        "declared_converged_at": declared_convergence(levels, tau),
        "levels": levels,
    })
}

/// Temporal refinement sweeps of every solver on the heat-sink problem.
/// Failed levels are recorded in the summary and the remaining rows are
/// still written.
pub fn compare(ctx: &Context) -> CmdResult<bool> {
    let (r, errors) = compare_sweeps(ctx)?;
    let mut w = csv_writer(
        &ctx.path("compare.csv"),
        &["solver", "Nt", "dof", "wall_s", "delta_rho_inf", "J"],
    )?;
    let mut d = csv_writer(&ctx.path("designs.csv"), &["solver", "Nt", "element", "rho"])?;
    for l in r.be_fe.iter().chain(&r.be_fe_aao).chain(&r.st_se) {
        w.write_record([
            l.solver.label().to_string(),
            l.nt.to_string(),
            l.dof.to_string(),
            format!("{:.6}", l.wall_s),
            opt(l.delta_rho_inf),
            num(l.objective),
        ])?;
        for (k, rho) in l.rho.iter().enumerate() {
            d.write_record([l.solver.label().to_string(), l.nt.to_string(), k.to_string(), num(*rho)])?;
        }
    }
    w.flush()?;
    d.flush()?;
    if let Some(best) = r.st_se.last().or(r.be_fe.last()).or(r.be_fe_aao.last()) {
        let breakpoints = uniform_breakpoints(0.0, 1.0, ctx.config.heat_sink.elements);
        write_design(&ctx.path("design.csv"), &breakpoints, &best.rho)?;
    }
    let tau = ctx.config.optimizer.tau_rho;
    for e in &errors {
        eprintln!("{} Nt={}: {}", e.solver.label(), e.nt, e.error);
    }
    ctx.write_summary(
        "compare",
        json!({
            "tau_rho": tau,
            "be-fe": solver_summary(&r.be_fe, tau),
            "be-fe-aao": solver_summary(&r.be_fe_aao, tau),
            "st-se": solver_summary(&r.st_se, tau),
            "errors": errors,
        }),
    )?;
    Ok(errors.is_empty())
}
