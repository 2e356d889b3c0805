use std::fs::File;
use std::io::BufWriter;

use degenpop::export::{write_csv, write_fields, write_slab};
use degenpop::hum::{synthesize_control, two_phase_control};
use degenpop::jobs::parallel_map;
use degenpop::model::{validate_hypotheses, ControlRegion, Problem, Regime};
use degenpop::pde::solve_forward;
use degenpop::selftest::{run_suite, summary_line, write_suite};
use degenpop::verify::{
    check_caccioppoli, check_carleman_global, check_carleman_local, check_duality, check_energy_decay, check_hardy,
    check_observability, CarlemanVariant, InequalityReport,
};
use serde::Serialize;

use crate::config::{region, Config, FAMILIES};
use crate::error::CliError;
use crate::output::OutDir;

pub struct Context {
    pub config: Config,
    pub jobs: usize,
    pub strict: bool,
    pub out: OutDir,
}

impl Context {
    fn problem(&self) -> Result<Problem, CliError> {
        let p = self.config.problem.build()?;
        self.check(&p)?;
        Ok(p)
    }

    fn check(&self, p: &Problem) -> Result<(), CliError> {
        validate_hypotheses(p.k(), p.lattice()).enforce(self.strict)?;
        Ok(())
    }
}

#[derive(Serialize)]
struct SolveSummary {
    grid: String,
    norms: Vec<f64>,
    max_abs: f64,
}

pub fn solve(mut ctx: Context) -> Result<(), CliError> {
    let problem = ctx.problem()?;
    let y0 = ctx.config.initial.build(&problem)?;
    let s = &ctx.config.solve;
    let nt = problem.lattice().nt();
    let traj = solve_forward(&problem, &y0, None, 0, nt, s.renewal, s.scheme)?;
    let max_abs = traj.max_abs();
    if !max_abs.is_finite() {
        return Err(CliError::Numerical("forward solution is not finite".into()));
    }
    write_slab(&problem, &traj, &ctx.out.path("state"))?;
    ctx.out.record("state.f64");
    ctx.out.record("state.json");
    if s.csv {
        write_csv(&problem, &traj, BufWriter::new(File::create(ctx.out.path("state.csv"))?))?;
        ctx.out.record("state.csv");
    }
    let norms: Vec<f64> = traj.slices().iter().map(|u| problem.norm(u)).collect();
    println!("solved {} levels on {}; |y(T)| = {:.6e}", traj.len(), problem.lattice().tag(), norms[norms.len() - 1]);
    ctx.out.json("solve.json", &SolveSummary { grid: problem.lattice().tag(), norms, max_abs })?;
    ctx.out.finish("solve", &ctx.config)
}

pub fn control(mut ctx: Context) -> Result<(), CliError> {
    let problem = ctx.problem()?;
    let y0 = ctx.config.initial.build(&problem)?;
    let hum = ctx.config.control.hum();
    let result = if ctx.config.control.two_phase { two_phase_control(&problem, &y0, &hum)? } else { synthesize_control(&problem, &y0, &hum)? };
    let summary = result.summary(&problem);
    ctx.out.json("control.json", &summary)?;
    write_fields(&problem, &result.control, 0, "control", &ctx.out.path("control_field"))?;
    ctx.out.record("control_field.f64");
    ctx.out.record("control_field.json");
    write_slab(&problem, &result.trajectory, &ctx.out.path("state"))?;
    ctx.out.record("state.f64");
    ctx.out.record("state.json");
    println!(
        "control: |y(T)|/|y0| on target = {:.3e}, |f| = {:.3e}, {} CG iterations",
        summary.relative_residual, summary.control_norm, summary.cg_iters
    );
    ctx.out.finish("control", &ctx.config)?;
    if !result.converged {
        return Err(CliError::Numerical(format!("CG stopped after {} iterations at relative residual {:e}", result.cg_iters, result.cg_relative_residual)));
    }
    Ok(())
}

/// One verification family on one problem with the given base `s` values.
fn run_family(ctx: &Context, family: &str, problem: &Problem, s_base: &[f64]) -> Result<InequalityReport, CliError> {
    let v = &ctx.config.verify;
    let variant = CarlemanVariant::for_regime(problem.k().regime());
    let report = match family {
        "duality" => check_duality(problem, v.trials, v.seed, v.scheme)?,
        "carleman_global" => check_carleman_global(variant, problem, v.source, s_base)?,
        "carleman_local" => check_carleman_local(variant, problem, v.source, s_base)?,
        "observability" => check_observability(problem, v.ensemble, v.seed, v.scheme)?,
        "caccioppoli" => {
            let (inner, outer) = caccioppoli_sets(ctx, problem)?;
            check_caccioppoli(problem, &inner, &outer, s_base)?
        }
        "hardy" => {
            let k = (problem.k().regime() == Regime::Boundary0).then(|| problem.k());
            check_hardy(k, v.hardy_nodes)?
        }
        "energy" => {
            let y0 = ctx.config.initial.build(problem)?;
            check_energy_decay(problem, &y0, v.scheme)?
        }
        other => return Err(CliError::Config(format!("unknown family {other:?}; expected one of {}", FAMILIES.join(", ")))),
    };
    Ok(report)
}

fn caccioppoli_sets(ctx: &Context, problem: &Problem) -> Result<(ControlRegion, ControlRegion), CliError> {
    let v = &ctx.config.verify;
    let outer = match v.caccioppoli_outer {
        Some(o) => o,
        None => {
            let i = problem.omega().intervals()[0];
            [i.lo, i.hi]
        }
    };
    let inner = v.caccioppoli_inner.unwrap_or_else(|| {
        let q = 0.25 * (outer[1] - outer[0]);
        [outer[0] + q, outer[1] - q]
    });
    Ok((region(&[inner])?, region(&[outer])?))
}

fn check_families(families: &[String]) -> Result<(), CliError> {
    match families.iter().find(|f| !FAMILIES.contains(&f.as_str())) {
        Some(f) => Err(CliError::Config(format!("unknown family {f:?}; expected one of {}", FAMILIES.join(", ")))),
        None if families.is_empty() => Err(CliError::Config("no verification family selected".into())),
        None => Ok(()),
    }
}

pub fn verify(mut ctx: Context, only: Option<String>) -> Result<(), CliError> {
    let families = match only {
        Some(f) => vec![f],
        None => ctx.config.verify.families.clone(),
    };
    check_families(&families)?;
    let problem = ctx.problem()?;
    let s_base = ctx.config.verify.s_base.clone();
    let reports = parallel_map(&families, ctx.jobs, |f| run_family(&ctx, f, &problem, &s_base));
    let mut failed = Vec::new();
    for (family, report) in families.iter().zip(reports) {
        let report = report?;
        println!("{family}: {} (C = {:.6e})", if report.pass { "pass" } else { "FAIL" }, report.effective_constant);
        ctx.out.json(&format!("reports/{family}.json"), &report)?;
        ctx.out.text(&format!("reports/{family}.txt"), &report.to_table())?;
        ctx.out.text(&format!("reports/{family}.csv"), &report.to_csv())?;
        if !report.pass {
            failed.push(family.clone());
        }
    }
    ctx.out.finish("verify", &ctx.config)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Acceptance(format!("failed families: {}", failed.join(", "))))
    }
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    nx: usize,
    nt: usize,
    family: String,
    /// Base `s` for inequality rows, `ε` for control rows.
    parameter: f64,
    value: f64,
    pass: bool,
}

enum SweepItem {
    Family { grid: [usize; 2], family: String, s: f64 },
    Control { grid: [usize; 2], epsilon: f64 },
}

fn sweep_item(ctx: &Context, item: &SweepItem) -> Result<SweepRow, CliError> {
    match item {
        SweepItem::Family { grid, family, s } => {
            let problem = ctx.config.problem.build_on(grid[0], grid[1])?;
            let r = run_family(ctx, family, &problem, &[*s])?;
            Ok(SweepRow { nx: grid[0], nt: grid[1], family: family.clone(), parameter: *s, value: r.effective_constant, pass: r.pass })
        }
        SweepItem::Control { grid, epsilon } => {
            let problem = ctx.config.problem.build_on(grid[0], grid[1])?;
            let y0 = ctx.config.initial.build(&problem)?;
            let mut hum = ctx.config.control.hum();
            hum.epsilon = *epsilon;
            let r = if ctx.config.control.two_phase { two_phase_control(&problem, &y0, &hum)? } else { synthesize_control(&problem, &y0, &hum)? };
            let summary = r.summary(&problem);
            Ok(SweepRow { nx: grid[0], nt: grid[1], family: "control".into(), parameter: *epsilon, value: summary.relative_residual, pass: r.converged })
        }
    }
}

pub fn sweep(mut ctx: Context) -> Result<(), CliError> {
    let sw = ctx.config.sweep.clone();
    check_families(&sw.families)?;
    if sw.grids.is_empty() {
        return Err(CliError::Config("sweep needs at least one grid".into()));
    }
    let mut items = Vec::new();
    for &grid in &sw.grids {
        let problem = ctx.config.problem.build_on(grid[0], grid[1])?;
        ctx.check(&problem)?;
        for family in &sw.families {
            for &s in &sw.s {
                items.push(SweepItem::Family { grid, family: family.clone(), s });
            }
        }
        for &epsilon in &sw.epsilon {
            items.push(SweepItem::Control { grid, epsilon });
        }
    }
    let rows = parallel_map(&items, ctx.jobs, |item| sweep_item(&ctx, item)).into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut csv = String::from("nx,nt,family,parameter,value,pass\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{},{:e},{:.12e},{}\n", r.nx, r.nt, r.family, r.parameter, r.value, r.pass));
    }
    print!("{csv}");
    ctx.out.text("sweep.csv", &csv)?;
    ctx.out.json("sweep.json", &rows)?;
    ctx.out.finish("sweep", &ctx.config)?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(CliError::Acceptance(format!("{failed} of {} sweep points failed", rows.len())));
    }
    Ok(())
}

pub fn selftest(mut ctx: Context) -> Result<(), CliError> {
    let suite = run_suite(ctx.jobs);
    for o in &suite.outcomes {
        println!("{}", summary_line(o));
    }
    write_suite(&suite, ctx.out.path("").as_path())?;
    for a in &suite.artifacts {
        ctx.out.record(a.name.clone());
    }
    ctx.out.record("acceptance.json");
    ctx.out.finish("selftest", &ctx.config)?;
    if suite.passed() {
        Ok(())
    } else {
        let failed: Vec<String> = suite.outcomes.iter().filter(|o| !o.pass).map(|o| o.id.to_string()).collect();
        Err(CliError::Acceptance(format!("criteria {} failed", failed.join(", "))))
    }
}
