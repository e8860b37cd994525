//! Execute an experiment config and write its artifacts.

use std::path::{Path, PathBuf};

use phidim_core::covering::GeomSet;
use phidim_core::dimfunc::{check_axioms_with, constant_df, describe, doubling_bound_check, DimensionFunction};
use phidim_core::estimator::{
    equivalence_gap_check, phi_lower_estimate, quasi_phi_lower_estimate, rate_window_scan, variational_scan,
    variational_scan_estimate, windowed_lower_estimate, EstimateReport, GapVerdict, GeomCounter, LocalCounter,
    MoranCounter, ScaleGrid,
};
use phidim_core::moran::{
    example1_spec, example2_spec, formula_dimension, ExampleParams, FormulaReport, LevelSelection, MoranSpec,
};
use phidim_core::popcorn::{modified_dimension_witness, sample_graph, DEFAULT_POINT_BUDGET};
use phidim_core::Scale;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::catalog::Kind;
use crate::config::{
    Candidate, EstimatorName, ExperimentConfig, GridSpec, LevelsSpec, PhiSpec, RadiiSpec, SetSpec, DEFAULT_DEPTH_BUDGET,
};
use crate::io::{self, Header, ScaleCell};
use crate::RunError;

/// Command-line overrides.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub depth_budget: Option<u64>,
    pub threads: usize,
    pub seed: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { depth_budget: None, threads: 1, seed: None }
    }
}

/// `lower ≤ observed ≤ upper`, with open ends omitted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn within(name: impl Into<String>, observed: f64, lower: Option<f64>, upper: Option<f64>) -> Check {
        let pass = observed.is_finite() && lower.is_none_or(|l| observed >= l) && upper.is_none_or(|u| observed <= u);
        Check { name: name.into(), observed, lower, upper, pass }
    }

    pub fn near(name: impl Into<String>, observed: f64, target: f64, tol: f64) -> Check {
        Check::within(name, observed, Some(target - tol), Some(target + tol))
    }
}

/// A named output file body, without its provenance header.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub body: String,
}

/// Everything a run produces, before it touches the file system.
#[derive(Clone, Debug)]
pub struct Artifacts {
    pub kind: Kind,
    pub seed: u64,
    pub results: Value,
    pub tables: Vec<Table>,
    /// JSON side documents, e.g. the generated schedule.
    pub documents: Vec<Table>,
    pub checks: Vec<Check>,
    /// A failure that stops the run whatever `--assert` says.
    pub failure: Option<RunError>,
}

impl Artifacts {
    pub fn pass(&self) -> bool {
        self.failure.is_none() && self.checks.iter().all(|c| c.pass)
    }

    pub fn failed_checks(&self) -> Vec<String> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect()
    }

    pub fn table(&self, name: &str) -> Option<&str> {
        self.tables.iter().find(|t| t.name == name).map(|t| t.body.as_str())
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Summary document: provenance, results, checks.
    pub fn summary(&self, header: &Header) -> Value {
        json!({
            "header": header,
            "results": self.results,
            "checks": self.checks,
            "pass": self.pass(),
            "tables": self.tables.iter().map(|t| format!("{}.csv", t.name)).collect::<Vec<_>>(),
        })
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    budget: u64,
    threads: usize,
    seed: u64,
}

/// Run a validated config.
pub fn execute(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Artifacts, RunError> {
    cfg.validate()?;
    let budget = opts.depth_budget.or(cfg.depth_budget).unwrap_or(DEFAULT_DEPTH_BUDGET);
    if budget == 0 {
        return Err(RunError::Validation("depth budget must be positive".into()));
    }
    let ctx = Ctx { cfg, budget, threads: opts.threads.max(1), seed: opts.seed.unwrap_or(cfg.seed) };
    let mut out = Artifacts {
        kind: cfg.kind,
        seed: ctx.seed,
        results: json!({}),
        tables: Vec::new(),
        documents: Vec::new(),
        checks: Vec::new(),
        failure: None,
    };
    match cfg.kind {
        Kind::MoranFormula => moran_formula(&ctx, &mut out)?,
        Kind::MoranEstimate => moran_estimate(&ctx, &mut out)?,
        Kind::DimfuncCheck => dimfunc_check(&ctx, &mut out)?,
        Kind::Variational => variational(&ctx, &mut out)?,
        Kind::RateWindow => rate_window(&ctx, &mut out)?,
        Kind::EquivalenceGap => equivalence_gap(&ctx, &mut out)?,
        Kind::Popcorn => popcorn(&ctx, &mut out)?,
        Kind::ReproduceExample1 => example1(&ctx, &mut out)?,
        Kind::ReproduceExample2 => example2(&ctx, &mut out)?,
    }
    Ok(out)
}

/// Write tables, side documents and `summary.json` into `dir`.
pub fn write_artifacts(art: &Artifacts, config_sha256: &str, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let io_err = |p: &Path, e: std::io::Error| RunError::Io(format!("{}: {e}", p.display()));
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let header = Header::new(art.kind.name(), config_sha256, art.seed);
    let mut written = Vec::new();
    for t in &art.tables {
        let p = dir.join(format!("{}.csv", t.name));
        std::fs::write(&p, header.lines() + &t.body).map_err(|e| io_err(&p, e))?;
        written.push(p);
    }
    for d in &art.documents {
        let p = dir.join(format!("{}.json", d.name));
        std::fs::write(&p, &d.body).map_err(|e| io_err(&p, e))?;
        written.push(p);
    }
    let p = dir.join("summary.json");
    let text = serde_json::to_string_pretty(&art.summary(&header)).expect("summary serializes") + "\n";
    std::fs::write(&p, text).map_err(|e| io_err(&p, e))?;
    written.push(p);
    Ok(written)
}

fn table<T: Serialize>(out: &mut Artifacts, name: &str, rows: &[T]) -> Result<(), RunError> {
    let body = io::csv_body(rows).map_err(|e| RunError::Io(e.to_string()))?;
    out.tables.push(Table { name: name.into(), body });
    Ok(())
}

fn phi_or(spec: &Option<PhiSpec>, theta: f64) -> Result<DimensionFunction, RunError> {
    match spec {
        Some(s) => s.function(),
        None => Ok(constant_df(theta)?),
    }
}

/// Results JSON for an estimate.
fn estimate_json(rep: &EstimateReport) -> Value {
    json!({
        "kind": rep.kind.name(),
        "value": rep.value,
        "raw_value": rep.raw_value,
        "value_lo": rep.value_lo,
        "value_hi": rep.value_hi,
        "tolerance": rep.tolerance(),
        "scales": rep.records.len(),
    })
}

/// Apply `f` to every item on up to `threads` workers, keeping order.
fn par_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    if threads <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

fn check_levels(spec: &MoranSpec, budget: u64) -> Result<(), RunError> {
    if spec.block_levels() > budget {
        return Err(RunError::Budget(format!("schedule has {} levels, depth budget is {budget}", spec.block_levels())));
    }
    Ok(())
}

fn example_params(ctx: &Ctx, alpha: Option<f64>, checkpoints: Option<usize>) -> ExampleParams {
    ExampleParams {
        alpha: alpha.unwrap_or(2.0),
        checkpoints: checkpoints.unwrap_or(6),
        max_levels: ctx.budget,
        ..ExampleParams::default()
    }
}

/// The schedule named by `params.spec`, generated when it is an example
/// without listed ratios; the second example with `alpha` (default 2) when
/// absent.
fn schedule(ctx: &Ctx, phi: &DimensionFunction) -> Result<MoranSpec, RunError> {
    let p = &ctx.cfg.params;
    let spec = match &p.spec {
        Some(doc) if doc.is_materialized() => doc.to_spec().map_err(|e| RunError::Validation(e.to_string()))?,
        Some(doc) => {
            let sp = &doc.schedule.params;
            let params = example_params(ctx, sp.alpha.or(p.alpha), sp.checkpoints.or(p.checkpoints));
            match doc.schedule.kind {
                io::ScheduleName::Example1 => {
                    let psi = p
                        .psi
                        .as_ref()
                        .ok_or_else(|| RunError::Validation("the first example schedule needs `psi`".into()))?;
                    example1_spec(&params, phi, &psi.function()?)?
                }
                io::ScheduleName::Example2 => example2_spec(&params, phi)?,
                _ => return Err(RunError::Validation("schedule lists no ratios".into())),
            }
        }
        None => example2_spec(&example_params(ctx, p.alpha, p.checkpoints), phi)?,
    };
    check_levels(&spec, ctx.budget)?;
    if spec.dim() != 1 {
        return Err(RunError::Validation("experiments on Moran schedules need d = 1".into()));
    }
    Ok(spec)
}

fn selection(ctx: &Ctx, spec: &MoranSpec, default_skip: usize) -> Result<LevelSelection, RunError> {
    let sel = match &ctx.cfg.params.levels {
        Some(l) => l.selection(),
        None if !spec.checkpoints().is_empty() => LevelsSpec::Checkpoints { skip: default_skip }.selection(),
        None => return Err(RunError::Validation("schedule has no checkpoints; give `levels`".into())),
    };
    if let LevelSelection::Range { to, .. } = sel {
        if to > ctx.budget {
            return Err(RunError::Budget(format!("level {to} exceeds the depth budget {}", ctx.budget)));
        }
    }
    Ok(sel)
}

fn checkpoint_scales(spec: &MoranSpec) -> Vec<Scale> {
    spec.checkpoints().iter().map(|c| c.scale).collect()
}

fn formula_rows(rep: &FormulaReport) -> Vec<io::FormulaRow> {
    rep.terms
        .iter()
        .zip(&rep.running_min)
        .map(|(t, m)| io::FormulaRow {
            level: t.level,
            checkpoint: t.checkpoint.map(|c| c + 1),
            big: ScaleCell(t.scale),
            phi: t.phi,
            l_phi: t.l_phi,
            window_depth: t.window_depth,
            quotient: t.quotient,
            running_min: *m,
        })
        .collect()
}

fn formula_json(rep: &FormulaReport) -> Value {
    json!({
        "value": rep.value,
        "argmin_level": rep.argmin.map(|i| rep.terms[i].level),
        "discretization": rep.discretization,
        "terms": rep.terms.len(),
        "r_star": rep.r_star,
    })
}

fn schedule_doc(out: &mut Artifacts, spec: &MoranSpec) {
    out.documents.push(Table { name: "schedule".into(), body: io::moran_to_json(spec) + "\n" });
}

fn moran_formula(ctx: &Ctx, out: &mut Artifacts) -> Result<(), RunError> {
    let p = &ctx.cfg.params;
    let phi = phi_or(&p.phi, 1.0)?;
    let spec = schedule(ctx, &phi)?;
    let rep = formula_dimension(&spec, &phi, selection(ctx, &spec, 0)?)?;
    table(out, "formula", &formula_rows(&rep))?;
    schedule_doc(out, &spec);
    out.results = json!({ "phi": describe(&phi), "schedule": spec.kind().name(), "formula": formula_json(&rep) });
    if let Some(e) = p.expect {
        out.checks.push(Check::near("value", rep.value.unwrap_or(f64::NAN), e, ctx.cfg.tolerances.value));
    }
    Ok(())
}

/// Run the named estimators, one per worker.
fn estimates<C: LocalCounter + Sync>(
    ctx: &Ctx,
    counter: &C,
    phi: &DimensionFunction,
    grid: &ScaleGrid,
    which: &[EstimatorName],
) -> Result<Vec<(EstimatorName, EstimateReport)>, RunError>
where
    C::Center: Send,
{
    let p = &ctx.cfg.params;
    let quasi = p.quasi_fractions.clone().unwrap_or_else(|| vec![1.0, 1.5, 2.0]);
    let windowed = p.windowed_fractions.clone().unwrap_or_else(|| vec![0.5, 1.0]);
    let reps = par_map(which, ctx.threads, |&e| match e {
        EstimatorName::PhiLower => phi_lower_estimate(counter, phi, grid),
        EstimatorName::Quasi => quasi_phi_lower_estimate(counter, phi, grid, &quasi),
        EstimatorName::Windowed => windowed_lower_estimate(counter, phi, grid, &windowed),
    });
    which.iter().zip(reps).map(|(&e, r)| Ok((e, r?))).collect()
}

fn moran_estimate(ctx: &Ctx, out: &mut Artifacts) -> Result<(), RunError> {
    let p = &ctx.cfg.params;
    let phi = phi_or(&p.phi, 1.0)?;
    let spec = schedule(ctx, &phi)?;
    let grid = p.grid.as_ref().expect("validated").grid(Some(&checkpoint_scales(&spec)))?;
    let which = p
        .estimators
        .clone()
        .unwrap_or_else(|| vec![EstimatorName::PhiLower, EstimatorName::Quasi, EstimatorName::Windowed]);
    let counter = MoranCounter::new(&spec)?;
    let reps = estimates(ctx, &counter, &phi, &grid, &which)?;
    let mut res = serde_json::Map::new();
    for (e, rep) in &reps {
        table(out, &format!("estimate-{}", e.name()), &io::estimate_rows(rep))?;
        res.insert(e.name().into(), estimate_json(rep));
    }
    if let (Some(x), Some((_, first))) = (p.expect, reps.first()) {
        out.checks.push(Check::near("value", first.value, x, ctx.cfg.tolerances.value));
    }
    schedule_doc(out, &spec);
    out.results = json!({ "phi": describe(&phi), "schedule": spec.kind().name(), "estimates": res });
    Ok(())
}

fn dimfunc_check(ctx: &Ctx, out: &mut Artifacts) -> Result<(), RunError> {
    let p = &ctx.cfg.params;
    let cand = p.phi.as_ref().expect("validated").candidate()?;
    let base = p.grid.clone().unwrap_or(GridSpec::Dyadic { from: 1.0, count: 40, step: 1.0 }).grid(None)?;
    let mut scales = base.scales().to_vec();
    if let Some(n) = p.random_scales.filter(|&n| n > 0) {
        let (lo, hi) = (scales[0].depth(), scales[scales.len() - 1].depth());
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        scales.extend((0..n).map(|_| Scale::from_depth(rng.random_range(lo..=hi))));
        scales.sort_by(|a, b| a.depth().total_cmp(&b.depth()));
        scales.dedup_by(|a, b| a.depth() == b.depth());
    }
    let eval = |s: Scale| -> Result<f64, phidim_core::Error> {
        match &cand {
            Candidate::Function(f) => f.eval(s),
            Candidate::Identity => Ok(s.radius()),
        }
    };
    let rep = check_axioms_with(eval, &scales)?;
    let mut rows = Vec::with_capacity(scales.len());
    for s in &scales {
        let (mono, growth) = rep.pairs.iter().find(|q| q.lower == *s).map_or((true, true), |q| (q.monotone, q.growth));
        rows.push(io::AxiomRow { big: ScaleCell(*s), value: eval(*s)?, monotone: mono, growth });
    }
    table(out, "axioms", &rows)?;
    out.checks.push(Check::within(
        "monotone-decrease axiom",
        rep.pairs.iter().filter(|q| !q.monotone).count() as f64,
        None,
        Some(0.0),
    ));
    out.checks.push(Check::within(
        "growth axiom",
        rep.pairs.iter().filter(|q| !q.growth).count() as f64,
        None,
        Some(0.0),
    ));
    let mut doubling = Vec::new();
    if let Candidate::Function(f) = &cand {
        let mut drows = Vec::new();
        for &c in p.doubling_c.as_deref().unwrap_or(&[0.5, 0.25]) {
            let d = doubling_bound_check(f, c, &scales)?;
            drows.extend(d.rows.iter().map(|r| io::DoublingCsvRow {
                c,
                big: ScaleCell(r.scale),
                left: r.left,
                middle: r.middle,
                right: r.right,
                pass: r.pass,
            }));
            let fails = d.rows.iter().filter(|r| !r.pass).count();
            out.checks.push(Check::within(format!("doubling sandwich C={c}"), fails as f64, None, Some(0.0)));
            doubling.push(json!({ "c": c, "m": d.m, "pass": d.pass }));
        }
        table(out, "doubling", &drows)?;
        out.documents.push(Table { name: "function".into(), body: io::dimfunc_to_json(f) + "\n" });
    }
    out.results = json!({
        "candidate": match &cand { Candidate::Function(f) => describe(f), Candidate::Identity => "R ↦ R".into() },
        "scales": scales.len(),
        "monotone": rep.monotone,
        "growth": rep.growth,
        "failure": rep.failure(),
        "doubling": doubling,
    });
    if let Some(axiom) = rep.failure() {
        let at = rep
            .pairs
            .iter()
            .find(|q| if axiom == "growth axiom" { !q.growth } else { !q.monotone })
            .expect("a failing pair");
        out.failure = Some(RunError::Axiom {
            axiom: axiom.into(),
            detail: format!("between R = {} and R = {}", at.upper, at.lower),
        });
    }
    Ok(())
}

fn alphas_or(ctx: &Ctx, default: &[f64]) -> Vec<f64> {
    ctx.cfg.params.alphas.clone().unwrap_or_else(|| default.to_vec())
}

fn scan_rows(entries: &[phidim_core::estimator::ScanEntry]) -> Vec<io::ScanRow> {
    entries.iter().map(|e| io::ScanRow { alpha: e.alpha, value: e.value, tolerance: e.tolerance }).collect()
}

fn variational(ctx: &Ctx, out: &mut Artifacts) -> Result<(), RunError> {
    let p = &ctx.cfg.params;
    let tol = &ctx.cfg.tolerances;
    let phi = phi_or(&p.phi, 1.0)?;
    let spec = schedule(ctx, &phi)?;
    let default: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let alphas = alphas_or(ctx, &default);
    let sel = selection(ctx, &spec, 1)?;
    let grid = p.grid.clone().unwrap_or(GridSpec::Checkpoints { skip: 1 }).grid(Some(&checkpoint_scales(&spec)))?;
    let counter = MoranCounter::new(&spec)?;

    let formula = variational_scan(&spec, &phi, &alphas, sel)?;
    let est = variational_scan_estimate(&counter, &phi, &alphas, &grid)?;
    let quasi = est.quasi.clone().expect("estimate scans carry the quasi estimate");
    let windowed_fr = p.windowed_fractions.clone().unwrap_or_else(|| alphas.clone());
    let pw = par_map(&[0u8, 1], ctx.threads, |&i| {
        if i == 0 {
            phi_lower_estimate(&counter, &phi, &grid)
        } else {
            windowed_lower_estimate(&counter, &phi, &grid, &windowed_fr)
        }
    });
    let mut pw = pw.into_iter();
    let lower = pw.next().expect("two results")?;
    let windowed = pw.next().expect("two results")?;

    table(out, "scan", &scan_rows(&formula.entries))?;
    table(out, "scan-estimate", &scan_rows(&est.entries))?;
    table(out, "estimate-phi-lower", &io::estimate_rows(&lower))?;
    table(out, "estimate-quasi", &io::estimate_rows(&quasi))?;
    table(out, "estimate-windowed", &io::estimate_rows(&windowed))?;
    schedule_doc(out, &spec);

    let inf = formula.infimum.unwrap_or(f64::NAN);
    out.checks.push(Check::within("infimum ≥ quasi", inf, Some(quasi.value - tol.variational), None));
    out.checks.push(Check::within("windowed ≤ quasi", windowed.value, None, Some(quasi.value + tol.ordering)));
    out.checks.push(Check::within("quasi ≤ phi-lower", quasi.value, None, Some(lower.value + tol.ordering)));
    out.results = json!({
        "phi": describe(&phi),
        "schedule": spec.kind().name(),
        "infimum": formula.infimum,
        "argmin": formula.argmin,
        "estimate_infimum": est.infimum,
        "phi_lower": estimate_json(&lower),
        "quasi": estimate_json(&quasi),
        "windowed": estimate_json(&windowed),
    });
    Ok(())
}

fn rate_window(ctx: &Ctx, out: &mut Artifacts) -> Result<(), RunError> {
    let p = &ctx.cfg.params;
    let extra = ctx.cfg.tolerances.rate_window;
    let phi = phi_or(&p.phi, 1.0)?;
    let spec = schedule(ctx, &phi)?;
    let alphas = alphas_or(ctx, &[0.5, 1.0, 2.0, 4.0]);
    let rep = rate_window_scan(&spec, &phi, &alphas, selection(ctx, &spec, 1)?)?;
    let ratios: Vec<io::RatioRow> = rep
        .ratios
        .iter()
        .map(|r| io::RatioRow {
            alpha: r.alpha,
            beta: r.beta,
            left: r.left,
            right: r.right,
            tolerance: r.tolerance + extra,
            pass: r.right <= r.left + r.tolerance + extra,
        })
        .collect();
    let pairs: Vec<io::PairRow> = rep
        .pairs
        .iter()
        .map(|c| io::PairRow {
            alpha: c.alpha,
            beta: c.beta,
            gamma: c.gamma,
            value_gamma: c.value_gamma,
            lhs: c.lhs,
            rhs: c.rhs,
            tolerance: c.tolerance + extra,
            pass: c.lhs <= c.rhs + c.tolerance + extra,
        })
        .collect();
    for r in &ratios {
        out.checks.push(Check::within(
            format!("ratio {}→{}", r.alpha, r.beta),
            r.right - r.left,
            None,
            Some(r.tolerance),
        ));
    }
    for c in &pairs {
        out.checks.push(Check::within(format!("pair {}/{}", c.alpha, c.beta), c.lhs - c.rhs, None, Some(c.tolerance)));
    }
    table(out, "scan", &scan_rows(&rep.entries))?;
    table(out, "ratios", &ratios)?;
    table(out, "pairs", &pairs)?;
    schedule_doc(out, &spec);
    out.results = json!({
        "phi": describe(&phi),
        "schedule": spec.kind().name(),
        "values": rep.entries.iter().map(|e| json!({ "alpha": e.alpha, "value": e.value })).collect::<Vec<_>>(),
        "pass": ratios.iter().all(|r| r.pass) && pairs.iter().all(|c| c.pass),
    });
    Ok(())
}

fn gap_with<C: LocalCounter>(
    ctx: &Ctx,
    counter: &C,
    phi: &DimensionFunction,
    psi: &DimensionFunction,
    grid: &ScaleGrid,
    out: &mut Artifacts,
) -> Result<(), RunError> {
    let tol = &ctx.cfg.tolerances;
    let rep = equivalence_gap_check(counter, phi, psi, grid, ctx.cfg.params.doubling, tol.gap, tol.gap_max_epsilon)?;
    table(out, "estimate-phi", &io::estimate_rows(&rep.phi))?;
    table(out, "estimate-psi", &io::estimate_rows(&rep.psi))?;
    let verdict = match rep.verdict {
        GapVerdict::Holds => "holds",
        GapVerdict::Violated => "violated",
        GapVerdict::Inapplicable => "inapplicable",
    };
    out.checks.push(Check::within("epsilon applicable", rep.epsilon, None, Some(tol.gap_max_epsilon)));
    out.checks.push(Check::within("gap bound", rep.gap, None, Some(rep.bound + rep.tolerance)));
    out.results = json!({
        "phi": describe(phi),
        "psi": describe(psi),
        "epsilon": rep.epsilon,
        "doubling": rep.doubling,
        "doubling_measured": ctx.cfg.params.doubling.is_none(),
        "bound": rep.bound,
        "gap": rep.gap,
        "tolerance": rep.tolerance,
        "verdict": verdict,
        "phi_estimate": estimate_json(&rep.phi),
        "psi_estimate": estimate_json(&rep.psi),
    });
    Ok(())
}

fn equivalence_gap(ctx: &Ctx, out: &mut Artifacts) -> Result<(), RunError> {
    let p = &ctx.cfg.params;
    let phi = phi_or(&p.phi, 1.0)?;
    let psi = match &p.psi {
        Some(s) => s.function()?,
        None => phi.rate_window(p.gap_alpha.unwrap_or(1.0 / 1.01))?,
    };
    let set = p.set.clone().unwrap_or(SetSpec::Interval { a: 0.0, b: 1.0 });
    match &set {
        SetSpec::Moran { spec } => {
            let spec = spec.to_spec().map_err(|e| RunError::Validation(e.to_string()))?;
            check_levels(&spec, ctx.budget)?;
            let grid =
                p.grid.clone().unwrap_or(GridSpec::Checkpoints { skip: 1 }).grid(Some(&checkpoint_scales(&spec)))?;
            gap_with(ctx, &MoranCounter::new(&spec)?, &phi, &psi, &grid, out)
        }
        _ => {
            let geom: GeomSet = set.geom()?.expect("geometric set");
            let grid = p.grid.clone().unwrap_or(GridSpec::Dyadic { from: 24.0, count: 8, step: 1.0 }).grid(None)?;
            gap_with(ctx, &GeomCounter::new(&geom), &phi, &psi, &grid, out)
        }
    }
}

fn popcorn(ctx: &Ctx, out: &mut Artifacts) -> Result<(), RunError> {
    let p = &ctx.cfg.params;
    let tol = &ctx.cfg.tolerances;
    let (t, q) = (p.t.expect("validated"), p.q_max.expect("validated"));
    let phi = phi_or(&p.phi, 1.0)?;
    let grid = p.grid.clone().unwrap_or(GridSpec::Dyadic { from: 24.0, count: 8, step: 1.0 }).grid(None)?;
    let radii = p.radii.unwrap_or(RadiiSpec { from: 9, to: 13 }).radii()?;
    let sample = sample_graph(t, q, p.point_budget.unwrap_or(DEFAULT_POINT_BUDGET))?;
    let w = modified_dimension_witness(&sample, &phi, &grid, &radii, tol.baseline)?;

    let trace: Vec<io::BoxRow> = w
        .box_trace
        .records
        .iter()
        .map(|r| io::BoxRow { r: r.r, count_lo: r.count.lower, count_hi: r.count.upper, value: r.value })
        .collect();
    table(out, "trace", &trace)?;
    table(out, "baseline", &io::estimate_rows(&w.baseline))?;
    if p.write_points.unwrap_or(false) {
        let pts: Vec<io::PopcornRow> =
            sample.points().iter().map(|p| io::PopcornRow { p: p.p, q: p.q, x: p.x, height: p.height }).collect();
        table(out, "points", &pts)?;
    }
    let last = w.box_trace.last().unwrap_or(f64::NAN);
    let c = &w.collapse;
    out.checks.push(Check::within("collapse quotient", c.quotient, Some(0.0), Some(0.0)));
    out.checks.push(Check::near("baseline", w.baseline.value, 1.0, tol.baseline));
    out.checks.push(Check::within(
        "box trace increasing tail",
        w.box_trace.increasing_tail as f64,
        Some(tol.box_increasing as f64),
        None,
    ));
    out.checks.push(Check::within("box final", last, Some(tol.box_floor), Some(w.target + tol.box_slack)));
    out.results = json!({
        "t": t,
        "q_max": q,
        "points": sample.points().len(),
        "target": w.target,
        "collapse": {
            "witness": c.witness,
            "nearest": c.nearest,
            "R": c.big.to_string(),
            "r": c.small.to_string(),
            "count": c.count,
            "quotient": c.quotient,
        },
        "baseline": estimate_json(&w.baseline),
        "box_final": last,
        "increasing_tail": w.box_trace.increasing_tail,
        "resolution_floor": sample.resolution_floor(),
        "chain_holds": w.chain_holds,
        "near_degenerate": w.near_degenerate,
    });
    Ok(())
}

/// Per-checkpoint rows for both traces of an example schedule.
fn example_rows(spec: &MoranSpec, a: &FormulaReport, b: &FormulaReport) -> Vec<io::ExampleRow> {
    a.terms
        .iter()
        .zip(&b.terms)
        .enumerate()
        .map(|(i, (x, y))| {
            let cp = x.checkpoint.expect("checkpoint selection");
            io::ExampleRow {
                checkpoint: cp + 1,
                level: x.level,
                big: ScaleCell(x.scale),
                exact: spec.checkpoints()[cp].exact,
                l_phi: x.l_phi,
                quotient_phi: x.quotient,
                running_min_phi: a.running_min[i],
                l_psi: y.l_phi,
                quotient_psi: y.quotient,
                running_min_psi: b.running_min[i],
            }
        })
        .collect()
}

fn example1(ctx: &Ctx, out: &mut Artifacts) -> Result<(), RunError> {
    let p = &ctx.cfg.params;
    let tol = &ctx.cfg.tolerances;
    let phi = phi_or(&p.phi, 0.5)?;
    let psi = phi_or(&p.psi, 1.0)?;
    let params = example_params(ctx, p.alpha, p.checkpoints);
    let spec = example1_spec(&params, &phi, &psi)?;
    check_levels(&spec, ctx.budget)?;
    let sel = LevelSelection::Checkpoints { skip: 0 };
    let a = formula_dimension(&spec, &phi, sel)?;
    let b = formula_dimension(&spec, &psi, sel)?;
    let rows = example_rows(&spec, &a, &b);
    let from = p.from_checkpoint.unwrap_or(3);
    let late = |f: fn(&io::ExampleRow) -> Option<f64>| {
        rows.iter().filter(|r| r.checkpoint >= from).filter_map(f).fold(f64::INFINITY, f64::min)
    };
    let phi_late = late(|r| r.quotient_phi);
    let psi_late = late(|r| r.quotient_psi);
    let target = 1.0 / params.alpha;
    out.checks.push(Check::near("phi value", phi_late, target, tol.example1_phi));
    out.checks.push(Check::within("psi floor", psi_late, Some(tol.example1_psi_floor), None));
    table(out, "trace", &rows)?;
    schedule_doc(out, &spec);
    out.results = json!({
        "alpha": params.alpha,
        "checkpoints": spec.checkpoints().len(),
        "from_checkpoint": from,
        "phi": describe(&phi),
        "psi": describe(&psi),
        "target_phi": target,
        "value_phi": phi_late,
        "value_psi": psi_late,
        "formula_phi": formula_json(&a),
        "formula_psi": formula_json(&b),
    });
    Ok(())
}

fn example2(ctx: &Ctx, out: &mut Artifacts) -> Result<(), RunError> {
    let p = &ctx.cfg.params;
    let tol = ctx.cfg.tolerances.example;
    let phi = phi_or(&p.phi, 1.0)?;
    let params = example_params(ctx, p.alpha, p.checkpoints);
    let spec = example2_spec(&params, &phi)?;
    check_levels(&spec, ctx.budget)?;
    let psi = phi.rate_window(2.0 / 3.0)?;
    let sel = LevelSelection::Checkpoints { skip: p.skip.unwrap_or(1) };
    let a = formula_dimension(&spec, &phi, sel)?;
    let b = formula_dimension(&spec, &psi, sel)?;
    let al = params.alpha;
    let (tp, tq) = ((al + 1.0) / (2.0 * al), (al + 2.0) / (3.0 * al));
    out.checks.push(Check::near("phi value", a.value.unwrap_or(f64::NAN), tp, tol));
    out.checks.push(Check::near("psi value", b.value.unwrap_or(f64::NAN), tq, tol));
    table(out, "trace", &example_rows(&spec, &a, &b))?;
    schedule_doc(out, &spec);
    out.results = json!({
        "alpha": al,
        "checkpoints": spec.checkpoints().len(),
        "skip": p.skip.unwrap_or(1),
        "phi": describe(&phi),
        "psi": describe(&psi),
        "target_phi": tp,
        "target_psi": tq,
        "value_phi": a.value,
        "value_psi": b.value,
        "formula_phi": formula_json(&a),
        "formula_psi": formula_json(&b),
        "levels": spec.block_levels(),
    });
    Ok(())
}
