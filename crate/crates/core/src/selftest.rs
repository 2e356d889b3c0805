//! The acceptance suite behind the `selftest` command. Every criterion
//! produces an outcome with its measured quantities plus text artifacts;
//! wall-clock timings are kept apart so the artifacts are reproducible.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::export::to_json;
use crate::jobs::parallel_map;
use crate::hum::{evaluate_j, free_terminal, gramian_apply, restrict_to_target, synthesize_control, two_phase_control, HumConfig};
use crate::model::{DispersionCoefficient, Problem};
use crate::pde::{characteristics_adjoint, solve_adjoint_transpose, solve_forward, Renewal, Scheme};
use crate::scenarios;
use crate::verify::{
    check_carleman_global, check_carleman_local, check_duality, check_energy_decay, check_hardy, check_observability, random_field,
    refinement_drift, CarlemanSource, CarlemanVariant, InequalityReport,
};

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "exact duality"),
    (2, "null control"),
    (3, "two-phase control"),
    (4, "gramian structure"),
    (5, "hardy-poincare"),
    (6, "energy decay"),
    (7, "carleman ratio stability"),
    (8, "observability constant"),
    (9, "solver convergence"),
    (10, "determinism"),
];

/// Geometric `s` sweep before scaling.
pub const S_BASE: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub metrics: BTreeMap<String, f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct CriterionRun {
    pub outcome: CriterionOutcome,
    pub artifacts: Vec<Artifact>,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct Suite {
    pub outcomes: Vec<CriterionOutcome>,
    pub artifacts: Vec<Artifact>,
    pub timings: BTreeMap<String, f64>,
}

impl Suite {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass)
    }
}

type Failure = Box<dyn std::error::Error + Send + Sync>;

struct Builder {
    metrics: BTreeMap<String, f64>,
    artifacts: Vec<Artifact>,
    pass: bool,
    notes: Vec<String>,
}

impl Builder {
    fn new() -> Self {
        Self { metrics: BTreeMap::new(), artifacts: Vec::new(), pass: true, notes: Vec::new() }
    }

    fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    fn require(&mut self, ok: bool, note: impl Into<String>) {
        if !ok {
            self.pass = false;
            self.notes.push(note.into());
        }
    }

    fn report(&mut self, name: &str, report: &InequalityReport) {
        self.artifacts.push(Artifact { name: format!("reports/{name}.csv"), contents: report.to_csv() });
        self.artifacts.push(Artifact { name: format!("reports/{name}.txt"), contents: report.to_table() });
    }

    fn finish(self, id: u8) -> (CriterionOutcome, Vec<Artifact>) {
        let name = CRITERIA[id as usize - 1].1;
        let detail = if self.notes.is_empty() {
            self.metrics.iter().map(|(k, v)| format!("{k}={v:.3e}")).collect::<Vec<_>>().join(" ")
        } else {
            self.notes.join("; ")
        };
        (CriterionOutcome { id, name, pass: self.pass, metrics: self.metrics, detail }, self.artifacts)
    }
}

fn duality(b: &mut Builder) -> Result<(), Failure> {
    let p = scenarios::reference_boundary(17, 16)?;
    let mut worst: f64 = 0.0;
    for (scheme, seed) in [(Scheme::ImplicitEuler, 11), (Scheme::CrankNicolson, 12)] {
        let r = check_duality(&p, 20, seed, scheme)?;
        worst = worst.max(r.effective_constant);
        b.report(&format!("duality_{scheme:?}").to_lowercase(), &r);
    }
    b.metric("max_relative_residual", worst);
    b.require(worst <= 1e-10, format!("duality residual {worst:e} > 1e-10"));
    Ok(())
}

fn control_scenarios() -> Result<Vec<(&'static str, Problem)>, Failure> {
    Ok(vec![("boundary", scenarios::reference_boundary(65, 64)?), ("interior", scenarios::reference_interior(65, 64)?)])
}

fn null_control(b: &mut Builder) -> Result<(), Failure> {
    let config = HumConfig::default();
    for (name, p) in control_scenarios()? {
        let r = synthesize_control(&p, &scenarios::reference_datum(&p), &config)?;
        let summary = r.summary(&p);
        b.metric(format!("{name}_relative_residual"), summary.relative_residual);
        b.metric(format!("{name}_cg_iters"), r.cg_iters as f64);
        b.require(r.terminal_residual <= 1e-2 * r.y0_norm, format!("{name}: residual {:e} above 1e-2·‖y0‖", r.terminal_residual));
        b.require(r.cg_iters <= 300, format!("{name}: {} CG iterations", r.cg_iters));
        b.artifacts.push(Artifact { name: format!("control_{name}.json"), contents: to_json(&summary) });
    }
    Ok(())
}

fn two_phase(b: &mut Builder) -> Result<(), Failure> {
    let config = HumConfig::default();
    for (name, p) in control_scenarios()? {
        let r = two_phase_control(&p, &scenarios::reference_datum(&p), &config)?;
        let phase1 = r.phase1.expect("two-phase result carries phase-1 energies");
        b.metric(format!("{name}_initial_norm"), phase1.initial_norm);
        b.metric(format!("{name}_handover_norm"), phase1.handover_norm);
        b.metric(format!("{name}_relative_residual"), r.terminal_residual / r.y0_norm);
        b.require(phase1.handover_norm <= phase1.initial_norm, format!("{name}: phase-1 energy grew"));
        b.require(r.terminal_residual <= 1e-2 * r.y0_norm, format!("{name}: residual {:e} above 1e-2·‖y0‖", r.terminal_residual));
        b.artifacts.push(Artifact { name: format!("two_phase_{name}.json"), contents: to_json(&r.summary(&p)) });
    }
    Ok(())
}

fn gramian(b: &mut Builder) -> Result<(), Failure> {
    let p = scenarios::reference_boundary(33, 32)?;
    let scheme = Scheme::ImplicitEuler;
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let na = p.lattice().na();
    let target = |rng: &mut ChaCha8Rng| {
        let mut g = random_field(&p, rng, 0..na);
        restrict_to_target(&p, &mut g);
        g
    };
    let norm = |u: &crate::model::Field| p.target_inner(u, u).sqrt();
    let (mut sym, mut psd, mut grad): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let y0 = scenarios::reference_datum(&p);
    let b_free = free_terminal(&p, &y0, scheme)?;
    for _ in 0..3 {
        let (g1, g2) = (target(&mut rng), target(&mut rng));
        let (l1, l2) = (gramian_apply(&p, &g1, scheme)?, gramian_apply(&p, &g2, scheme)?);
        let defect = (p.target_inner(&l1, &g2) - p.target_inner(&g1, &l2)).abs() / (norm(&l1) * norm(&g2)).max(norm(&g1) * norm(&l2));
        sym = sym.max(defect);
        psd = psd.max(-p.target_inner(&l1, &g1) / (norm(&l1) * norm(&g1)));

        let step = 1e-4;
        let mut plus = g1.clone();
        plus.scaled_add(step, &g2);
        let mut minus = g1.clone();
        minus.scaled_add(-step, &g2);
        let fd = (evaluate_j(&p, &plus, &y0, scheme)? - evaluate_j(&p, &minus, &y0, scheme)?) / (2.0 * step);
        let mut gradient = l1.clone();
        gradient += &b_free;
        let exact = p.target_inner(&gradient, &g2);
        grad = grad.max((fd - exact).abs() / exact.abs());
    }
    b.metric("symmetry_defect", sym);
    b.metric("psd_defect", psd.max(0.0));
    b.metric("gradient_error", grad);
    b.require(sym <= 1e-12, format!("symmetry defect {sym:e}"));
    b.require(psd <= 1e-12, format!("psd defect {psd:e}"));
    b.require(grad <= 1e-6, format!("gradient error {grad:e}"));
    Ok(())
}

fn hardy(b: &mut Builder) -> Result<(), Failure> {
    let k = DispersionCoefficient::boundary0(0.5)?;
    let (mut sup, mut unit): (f64, f64) = (0.0, 0.0);
    for n in [256, 1024, 4096] {
        let r = check_hardy(Some(&k), n)?;
        sup = sup.max(r.effective_constant);
        unit = unit.max((r.ratios[0] - 1.0).abs());
        b.require(r.pass, format!("n = {n}: {}", r.detail));
        b.report(&format!("hardy_{n}"), &r);
    }
    b.metric("sup_ratio", sup);
    b.metric("unit_exponent_deviation", unit);
    b.require(sup <= 4.0 * 1.05, format!("sup ratio {sup}"));
    b.require(unit <= 0.01, format!("x(1-x) ratio off by {unit}"));
    Ok(())
}

fn energy(b: &mut Builder) -> Result<(), Failure> {
    let p = scenarios::reference_boundary(33, 32)?;
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut worst: f64 = 0.0;
    for run in 0..10 {
        let y0 = random_field(&p, &mut rng, 0..p.lattice().na() + 1);
        let r = check_energy_decay(&p, &y0, Scheme::ImplicitEuler)?;
        let n0 = r.rhs[0];
        let inc = r.lhs.iter().zip(&r.rhs).map(|(l, r)| l - r).fold(0.0, f64::max);
        worst = worst.max(inc / n0);
        b.require(r.pass, format!("run {run}: {}", r.detail));
        if run == 0 {
            b.report("energy_decay", &r);
        }
    }
    b.metric("max_relative_increment", worst);
    b.require(worst <= 1e-12, format!("energy increment {worst:e}"));
    Ok(())
}

type MakeProblem = fn(usize, usize) -> Result<Problem, crate::model::ModelError>;

fn carleman(b: &mut Builder) -> Result<(), Failure> {
    let cases: [(&str, MakeProblem, CarlemanVariant, bool); 5] = [
        ("boundary0", scenarios::reference_boundary, CarlemanVariant::Boundary0, false),
        ("boundary1", scenarios::reference_boundary1, CarlemanVariant::Boundary1, false),
        ("interior", scenarios::reference_interior, CarlemanVariant::Interior, false),
        ("nondegenerate", scenarios::reference_nondegenerate, CarlemanVariant::NonDegenerate, false),
        ("local_boundary0", scenarios::reference_boundary, CarlemanVariant::Boundary0, true),
    ];
    for (name, make, variant, local) in cases {
        let start = Instant::now();
        let check = if local { check_carleman_local } else { check_carleman_global };
        let coarse = check(variant, &make(33, 32)?, CarlemanSource::Manufactured, &S_BASE)?;
        let fine = check(variant, &make(65, 64)?, CarlemanSource::Manufactured, &S_BASE)?;
        let drift = refinement_drift(&coarse, &fine);
        b.metric(format!("{name}_constant_33"), coarse.effective_constant);
        b.metric(format!("{name}_constant_65"), fine.effective_constant);
        b.metric(format!("{name}_drift"), drift);
        b.require(coarse.pass && fine.pass, format!("{name}: non-finite ratio"));
        b.require(coarse.effective_constant > 0.0, format!("{name}: vanishing constant"));
        b.require(drift <= 2.0, format!("{name}: drift {drift}"));
        b.require(start.elapsed().as_secs_f64() < 120.0, format!("{name}: over two minutes"));
        b.report(&format!("carleman_{name}_33"), &coarse);
        b.report(&format!("carleman_{name}_65"), &fine);
    }
    Ok(())
}

fn observability(b: &mut Builder) -> Result<(), Failure> {
    let cases: [(&str, MakeProblem); 2] = [("boundary", scenarios::reference_boundary), ("interior", scenarios::reference_interior)];
    for (name, make) in cases {
        let coarse = check_observability(&make(33, 32)?, 32, 7, Scheme::ImplicitEuler)?;
        let fine = check_observability(&make(65, 64)?, 32, 7, Scheme::ImplicitEuler)?;
        let drift = refinement_drift(&coarse, &fine);
        b.metric(format!("{name}_constant_33"), coarse.effective_constant);
        b.metric(format!("{name}_constant_65"), fine.effective_constant);
        b.metric(format!("{name}_drift"), drift);
        b.require(coarse.pass && fine.pass && coarse.effective_constant > 0.0, format!("{name}: constant not finite"));
        b.require(drift <= 2.0, format!("{name}: drift {drift}"));
        b.report(&format!("observability_{name}_33"), &coarse);
        b.report(&format!("observability_{name}_65"), &fine);
    }
    Ok(())
}

/// Max nodal error of the separable benchmark at `T`.
pub fn separable_error(nx: usize, nt: usize, scheme: Scheme) -> Result<f64, Failure> {
    let p = scenarios::separable_problem(nx, nt)?;
    let y0 = scenarios::separable_field(&p, 0.0);
    let traj = solve_forward(&p, &y0, None, 0, nt, Renewal::Integral, scheme)?;
    let exact = scenarios::separable_field(&p, p.t_final());
    Ok((traj.terminal() - &exact).iter().fold(0.0, |m: f64, v| m.max(v.abs())))
}

/// Sup difference between the characteristics and transpose adjoints.
pub fn adjoint_gap(nx: usize, nt: usize) -> Result<f64, Failure> {
    let p = scenarios::reference_boundary(nx, nt)?;
    let mut v_t = scenarios::gaussian_datum(&p, 0.6, 0.2);
    v_t.row_mut(p.lattice().na()).fill(0.0);
    let a = solve_adjoint_transpose(&p, &v_t, 0, Renewal::Integral, Scheme::ImplicitEuler)?;
    let (c, _) = characteristics_adjoint(&p, &v_t, 0, Scheme::ImplicitEuler)?;
    let mut gap: f64 = 0.0;
    for n in 0..=nt {
        gap = a.at(n).iter().zip(c.at(n).iter()).fold(gap, |m, (x, y)| m.max((x - y).abs()));
    }
    Ok(gap)
}

fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn convergence(b: &mut Builder) -> Result<(), Failure> {
    let time: Vec<f64> = [16, 32, 64, 128].iter().map(|&nt| separable_error(65, nt, Scheme::CrankNicolson)).collect::<Result<_, _>>()?;
    let space: Vec<f64> = [9, 17, 33].iter().map(|&nx| separable_error(nx, 1024, Scheme::CrankNicolson)).collect::<Result<_, _>>()?;
    let gaps: Vec<f64> = [(17, 16), (33, 32), (65, 64)].iter().map(|&(nx, nt)| adjoint_gap(nx, nt)).collect::<Result<_, _>>()?;
    let min = |v: Vec<f64>| v.into_iter().fold(f64::INFINITY, f64::min);
    let (ot, os, oc) = (min(orders(&time)), min(orders(&space)), min(orders(&gaps)));
    b.metric("time_order_min", ot);
    b.metric("space_order_min", os);
    b.metric("characteristics_order_min", oc);
    b.metric("characteristics_gap_finest", gaps[gaps.len() - 1]);
    b.require(ot >= 1.9, format!("time order {ot}"));
    b.require(os >= 1.9, format!("space order {os}"));
    b.require(oc >= 1.0, format!("characteristics order {oc}"));
    let mut table = String::from("kind,level,error\n");
    for (kind, errs) in [("time", &time), ("space", &space), ("characteristics", &gaps)] {
        for (i, e) in errs.iter().enumerate() {
            table.push_str(&format!("{kind},{i},{e:e}\n"));
        }
    }
    b.artifacts.push(Artifact { name: "convergence.csv".into(), contents: table });
    Ok(())
}

/// Runs one of criteria 1-9.
pub fn run_criterion(id: u8) -> CriterionRun {
    let start = Instant::now();
    let mut b = Builder::new();
    let result = match id {
        1 => duality(&mut b),
        2 => null_control(&mut b),
        3 => two_phase(&mut b),
        4 => gramian(&mut b),
        5 => hardy(&mut b),
        6 => energy(&mut b),
        7 => carleman(&mut b),
        8 => observability(&mut b),
        9 => convergence(&mut b),
        _ => Err(format!("criterion {id} has no standalone run").into()),
    };
    if let Err(e) = result {
        b.require(false, format!("error: {e}"));
    }
    if id == 1 && start.elapsed().as_secs_f64() >= 5.0 {
        b.require(false, "over five seconds");
    }
    if id == 2 && start.elapsed().as_secs_f64() >= 300.0 {
        b.require(false, "over five minutes");
    }
    let (outcome, artifacts) = b.finish(id);
    CriterionRun { outcome, artifacts, seconds: start.elapsed().as_secs_f64() }
}

/// Runs the given criteria on up to `jobs` threads; results come back in
/// the order of `ids`.
pub fn run_criteria(ids: &[u8], jobs: usize) -> Vec<CriterionRun> {
    parallel_map(ids, jobs, |&id| run_criterion(id))
}

fn collect(runs: Vec<CriterionRun>, timings: &mut BTreeMap<String, f64>, prefix: &str) -> (Vec<CriterionOutcome>, Vec<Artifact>) {
    let mut outcomes = Vec::new();
    let mut artifacts = Vec::new();
    for run in runs {
        timings.insert(format!("{prefix}criterion_{:02}", run.outcome.id), run.seconds);
        outcomes.push(run.outcome);
        artifacts.extend(run.artifacts);
    }
    (outcomes, artifacts)
}

/// Criteria 1-9, then a second pass whose artifacts must match the first
/// byte for byte (criterion 10).
pub fn run_suite(jobs: usize) -> Suite {
    let ids: Vec<u8> = (1..=9).collect();
    let mut timings = BTreeMap::new();
    let (mut outcomes, artifacts) = collect(run_criteria(&ids, jobs), &mut timings, "");
    let start = Instant::now();
    let (again, repeat) = collect(run_criteria(&ids, jobs), &mut timings, "repeat_");
    let mismatched = artifacts.iter().zip(&repeat).filter(|(a, b)| a != b).count() + artifacts.len().abs_diff(repeat.len());
    let same_outcomes = outcomes == again;
    let mut b = Builder::new();
    b.metric("artifacts", artifacts.len() as f64);
    b.metric("mismatched_artifacts", mismatched as f64);
    b.require(mismatched == 0, format!("{mismatched} artifacts differ between runs"));
    b.require(same_outcomes, "outcomes differ between runs");
    let (outcome, _) = b.finish(10);
    timings.insert("criterion_10".into(), start.elapsed().as_secs_f64());
    outcomes.push(outcome);
    Suite { outcomes, artifacts, timings }
}

/// Writes the artifacts, `acceptance.json` and the separate `timing.json`.
pub fn write_suite(suite: &Suite, dir: &Path) -> io::Result<()> {
    for a in &suite.artifacts {
        let path = dir.join(&a.name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, &a.contents)?;
    }
    fs::write(dir.join("acceptance.json"), to_json(&suite.outcomes))?;
    fs::write(dir.join("timing.json"), to_json(&suite.timings))
}

/// One line per criterion.
pub fn summary_line(o: &CriterionOutcome) -> String {
    format!("criterion {:>2} {:<26} {}  {}", o.id, o.name, if o.pass { "PASS" } else { "FAIL" }, o.detail)
}
