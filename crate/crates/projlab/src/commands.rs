//! Command implementations behind the `projlab` binary: angle tables,
//! criteria reports and schedule runs. Every emitted file is
//! deterministic byte for byte given the scenario and seed.

use std::fs;
use std::path::{Path, PathBuf};

use crate::angle::{angle_table, friedrichs_cos, AngleTable};
use crate::criteria::{
    averaged_rate, cyclic_envelope, gamma_for_quality, quasi_periodic_envelope, random_block_factor,
    random_params, solve_gamma, CriteriaReport, Hypothesis, WeightVector,
};
use crate::engine::{run_averaged, run_product, IterationTrace, LimitMode, Schedule, ScheduleKind};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::projector::ProjectorFamily;
use crate::scenario::Scenario;
use crate::space::norm_in;

/// Shortest round-trip scientific notation; empty cells stay empty.
fn fmt(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:e}")
    }
}

/// Output directory resolution: explicit flag, then the scenario's own
/// output block, then the current directory.
pub fn resolve_out_dir(scenario: &Scenario, flag: Option<&Path>) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    if let Some(out) = &scenario.output {
        if let Some(dir) = &out.dir {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from(".")
}

/// Writes `angles.csv`: one row per unordered pair with the cosine
/// certificate, plus a Friedrichs cross-check column when the family is
/// orthogonal in a Euclidean space.
pub fn cmd_angles(scenario: &Scenario, out_dir: &Path) -> Result<PathBuf> {
    let family = scenario.build_family()?;
    let table = angle_table(&family)?;
    let with_friedrichs = family.space().is_euclidean()
        && family.projectors().iter().all(|p| {
            let m = p.matrix();
            m.sub(&m.transpose()).max_abs() <= 1e-10 * (1.0 + m.max_abs())
        });
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join("angles.csv");
    let mut text = String::from("j1,j2,cos_lower,cos_upper,exact");
    if with_friedrichs {
        text.push_str(",friedrichs");
    }
    text.push('\n');
    for j in 0..family.len() {
        for k in j + 1..family.len() {
            let c = table.get(j, k);
            text.push_str(&format!(
                "{},{},{},{},{}",
                j + 1,
                k + 1,
                fmt(c.lower),
                fmt(c.upper),
                c.exact
            ));
            if with_friedrichs {
                let f = friedrichs_cos(
                    &family.projector(j).range_basis,
                    &family.projector(k).range_basis,
                    family.space(),
                )?;
                text.push_str(&format!(",{}", fmt(f)));
            }
            text.push('\n');
        }
    }
    fs::write(&path, text)?;
    Ok(path)
}

/// One summary row of `criteria.csv`.
#[derive(Clone, Debug)]
pub struct CriterionRow {
    pub name: String,
    pub pass: bool,
    pub r_or_q: Option<f64>,
    pub big_c: Option<f64>,
    pub gamma: Option<f64>,
    /// Informational rows are reported but do not gate the exit code:
    /// the uniform angle budget can fail while the direct rate still
    /// certifies.
    pub informational: bool,
}

pub struct CriteriaOutcome {
    pub report: CriteriaReport,
    pub rows: Vec<CriterionRow>,
    pub json_path: PathBuf,
    pub csv_path: PathBuf,
}

impl CriteriaOutcome {
    /// True when every requested (non-informational) criterion passed.
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass || r.informational)
    }
}

struct CriteriaContext<'a> {
    family: &'a ProjectorFamily,
    table: &'a AngleTable,
    beta: f64,
    n: usize,
    consistent: bool,
}

fn eval_averaged(
    ctx: &CriteriaContext,
    alphas: &WeightVector,
    report: &mut CriteriaReport,
) -> CriterionRow {
    if ctx.n == 1 {
        report.r = Some(0.0);
        return pass_row("averaged", Some(0.0), None, None, report, "single projector family");
    }
    match averaged_rate(ctx.table, alphas, ctx.beta) {
        Ok(rate) => {
            report.r = Some(rate.r);
            report.r_min = Some(rate.r_min);
            if rate.big_c.is_finite() {
                report.big_c = Some(rate.big_c);
            }
            let min_limit = 1.0
                / (1.0
                    - alphas
                        .alphas()
                        .iter()
                        .fold(f64::INFINITY, |m, a| m.min(*a)));
            let reason = if rate.pass {
                format!("r = {:.6} < 1, C = {:.4}", rate.r, rate.big_c)
            } else if ctx.beta >= min_limit {
                format!(
                    "beta = {:.4} is not below 1/(1 - min alpha) = {:.4}; r = {:.6} >= 1",
                    ctx.beta, min_limit, rate.r
                )
            } else {
                format!("r = {:.6} >= 1", rate.r)
            };
            report.hypotheses.insert(
                "averaged".into(),
                Hypothesis {
                    pass: rate.pass,
                    reason,
                },
            );
            CriterionRow {
                name: "averaged".into(),
                pass: rate.pass,
                r_or_q: Some(rate.r),
                big_c: rate.big_c.is_finite().then_some(rate.big_c),
                gamma: None,
                informational: false,
            }
        }
        Err(e) => fail_row("averaged", report, format!("not evaluable: {e}")),
    }
}

fn eval_averaged_gamma(ctx: &CriteriaContext, report: &mut CriteriaReport) -> CriterionRow {
    if ctx.n == 1 {
        return pass_row("averaged_gamma", None, None, None, report, "single projector family");
    }
    match solve_gamma(ctx.beta, ctx.n) {
        Ok(budget) => {
            report.gamma = Some(budget.gamma);
            report.gamma_prime = Some(budget.gamma_prime);
            let max_cos = ctx.table.max_upper();
            let pass = max_cos <= budget.gamma;
            let reason = format!(
                "max cos = {:.6e} {} gamma = {:.6e} (gamma' = {:.6e}, r = {:.6}, C = {:.4})",
                max_cos,
                if pass { "<=" } else { ">" },
                budget.gamma,
                budget.gamma_prime,
                budget.r,
                budget.big_c
            );
            report
                .hypotheses
                .insert("averaged_gamma".into(), Hypothesis { pass, reason });
            CriterionRow {
                name: "averaged_gamma".into(),
                pass,
                r_or_q: Some(budget.r),
                big_c: Some(budget.big_c),
                gamma: Some(budget.gamma),
                informational: true,
            }
        }
        Err(e) => {
            let mut row = fail_row("averaged_gamma", report, format!("{e}"));
            row.informational = true;
            row
        }
    }
}

/// Shared evaluation for the per-window criteria (cyclic and
/// quasi-periodic): an angle budget from the quality target plus weak
/// consistency.
fn eval_window(
    ctx: &CriteriaContext,
    name: &str,
    m: usize,
    q: f64,
    report: &mut CriteriaReport,
) -> CriterionRow {
    if ctx.n == 1 {
        return pass_row(name, Some(q), None, None, report, "single projector family");
    }
    match gamma_for_quality(ctx.beta, ctx.n, m, q) {
        Ok(budget) => {
            let max_cos = ctx.table.max_upper();
            let angle_ok = max_cos <= budget.gamma;
            let pass = angle_ok && ctx.consistent;
            report.q = Some(q);
            report.m = Some(m);
            report.i0 = Some(budget.i0);
            let mut reason = format!(
                "q = {q}, m = {m}: max cos = {:.6e} {} gamma = {:.6e} (i0 = {})",
                max_cos,
                if angle_ok { "<=" } else { ">" },
                budget.gamma,
                budget.i0
            );
            if !ctx.consistent {
                reason.push_str("; family not certified weakly consistent");
            }
            report
                .hypotheses
                .insert(name.into(), Hypothesis { pass, reason });
            CriterionRow {
                name: name.into(),
                pass,
                r_or_q: Some(q),
                big_c: None,
                gamma: Some(budget.gamma),
                informational: false,
            }
        }
        Err(e) => fail_row(name, report, format!("{e}")),
    }
}

fn eval_random(
    ctx: &CriteriaContext,
    mu: &[f64],
    report: &mut CriteriaReport,
) -> CriterionRow {
    if ctx.n == 1 {
        return pass_row("random", None, None, None, report, "single projector family");
    }
    let params = match random_params(ctx.beta, ctx.n, mu) {
        Ok(p) => p,
        Err(e) => return fail_row("random", report, format!("{e}")),
    };
    report.freq = Some(params.freq);
    report.lambda = Some(params.lambda);
    let factor = random_block_factor(ctx.beta, params.q, ctx.n, params.lambda);
    match gamma_for_quality(ctx.beta, ctx.n, ctx.n, params.q) {
        Ok(budget) => {
            let max_cos = ctx.table.max_upper();
            let angle_ok = max_cos <= budget.gamma;
            let contractive = factor < 1.0;
            let pass = angle_ok && contractive && ctx.consistent;
            report.q = Some(params.q);
            report.i0 = Some(budget.i0);
            let mut reason = format!(
                "freq = {:.4}, lambda = {:.4}, q = {:.4}, per-block factor = {:.6}: max cos = {:.6e} {} gamma = {:.6e}",
                params.freq,
                params.lambda,
                params.q,
                factor,
                max_cos,
                if angle_ok { "<=" } else { ">" },
                budget.gamma
            );
            if !contractive {
                reason.push_str("; envelope not contractive");
            }
            if !ctx.consistent {
                reason.push_str("; family not certified weakly consistent");
            }
            report
                .hypotheses
                .insert("random".into(), Hypothesis { pass, reason });
            CriterionRow {
                name: "random".into(),
                pass,
                r_or_q: Some(params.q),
                big_c: None,
                gamma: Some(budget.gamma),
                informational: false,
            }
        }
        Err(e) => fail_row("random", report, format!("{e}")),
    }
}

fn pass_row(
    name: &str,
    r_or_q: Option<f64>,
    big_c: Option<f64>,
    gamma: Option<f64>,
    report: &mut CriteriaReport,
    reason: &str,
) -> CriterionRow {
    report.hypotheses.insert(
        name.into(),
        Hypothesis {
            pass: true,
            reason: reason.into(),
        },
    );
    CriterionRow {
        name: name.into(),
        pass: true,
        r_or_q,
        big_c,
        gamma,
        informational: false,
    }
}

fn fail_row(name: &str, report: &mut CriteriaReport, reason: String) -> CriterionRow {
    report
        .hypotheses
        .insert(name.into(), Hypothesis { pass: false, reason });
    CriterionRow {
        name: name.into(),
        pass: false,
        r_or_q: None,
        big_c: None,
        gamma: None,
        informational: false,
    }
}

/// Evaluates every requested criterion for the scenario's family.
pub fn evaluate_criteria(scenario: &Scenario) -> Result<(CriteriaReport, Vec<CriterionRow>)> {
    let family = scenario.build_family()?;
    let table = angle_table(&family)?;
    let beta = family.beta_upper();
    let n = family.len();
    let ctx = CriteriaContext {
        consistent: family.consistency.is_some(),
        family: &family,
        table: &table,
        beta,
        n,
    };
    let _ = ctx.family; // context keeps the family alive for the table
    let mut report = CriteriaReport::new(beta, n, table.rows());
    let q = scenario.q_target_or_default();
    let mut rows = Vec::new();
    for name in scenario.requested_criteria() {
        match name.as_str() {
            "averaged" => {
                let alphas = match &scenario.alphas {
                    Some(a) => WeightVector::new(a.clone())?,
                    None => WeightVector::uniform(n),
                };
                rows.push(eval_averaged(&ctx, &alphas, &mut report));
                rows.push(eval_averaged_gamma(&ctx, &mut report));
            }
            "cyclic" => {
                rows.push(eval_window(&ctx, "cyclic", n.max(2), q, &mut report));
            }
            "quasi_periodic" => {
                let m = scenario
                    .schedule
                    .as_ref()
                    .and_then(|s| s.m)
                    .unwrap_or(n.max(2));
                rows.push(eval_window(&ctx, "quasi_periodic", m, q, &mut report));
            }
            "random" => {
                let uniform = vec![1.0 / n as f64; n];
                let mu = scenario
                    .schedule
                    .as_ref()
                    .and_then(|s| s.mu.clone())
                    .unwrap_or(uniform);
                rows.push(eval_random(&ctx, &mu, &mut report));
            }
            other => {
                return Err(Error::ScenarioValidation {
                    field: "criteria".into(),
                    message: format!("unknown criterion \"{other}\""),
                });
            }
        }
    }
    Ok((report, rows))
}

/// Writes `criteria.json` (full report) and `criteria.csv` (one row per
/// criterion).
pub fn cmd_criteria(scenario: &Scenario, out_dir: &Path) -> Result<CriteriaOutcome> {
    let (report, rows) = evaluate_criteria(scenario)?;
    fs::create_dir_all(out_dir)?;
    let json_path = out_dir.join("criteria.json");
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::ScenarioParse(e.to_string()))?;
    fs::write(&json_path, json + "\n")?;
    let csv_path = out_dir.join("criteria.csv");
    let mut text = String::from("name,pass,r_or_q,C,gamma\n");
    for row in &rows {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            row.name,
            if row.pass { "pass" } else { "fail" },
            row.r_or_q.map(fmt).unwrap_or_default(),
            row.big_c.map(fmt).unwrap_or_default(),
            row.gamma.map(fmt).unwrap_or_default(),
        ));
    }
    fs::write(&csv_path, text)?;
    Ok(CriteriaOutcome {
        report,
        rows,
        json_path,
        csv_path,
    })
}

/// Outcome of one schedule run.
pub struct RunSummary {
    pub trace_path: PathBuf,
    pub svg_path: Option<PathBuf>,
    pub steps: usize,
    pub final_deviation: f64,
    pub violations: usize,
    pub k_tau: Option<usize>,
    /// Human-readable description of the envelope in force (or why none).
    pub envelope_note: String,
}

fn write_trace_csv(trace: &IterationTrace, path: &Path) -> Result<()> {
    let mut text = String::from("step,deviation,envelope,violated\n");
    for s in &trace.steps {
        text.push_str(&format!(
            "{},{},{},{}\n",
            s.step,
            fmt(s.deviation),
            s.envelope.map(fmt).unwrap_or_default(),
            s.violated
        ));
    }
    fs::write(path, text)?;
    Ok(())
}

fn run_with_schedule(
    scenario: &Scenario,
    family: &ProjectorFamily,
    schedule: &Schedule,
) -> Result<(IterationTrace, String)> {
    let n = family.len();
    let beta = family.beta_upper();
    let q = scenario.q_target_or_default();
    let consistent = family.consistency.is_some();
    let max_cos = angle_table(family).map(|t| t.max_upper()).ok();
    match &schedule.spec.kind {
        ScheduleKind::Averaged { alphas } => {
            let w = match alphas.clone().or_else(|| scenario.alphas.clone()) {
                Some(a) => WeightVector::new(a)?,
                None => WeightVector::uniform(n),
            };
            let trace = run_averaged(family, &w, schedule.steps(), LimitMode::Certified)?;
            let note = if trace.steps.iter().any(|s| s.envelope.is_some()) {
                "C*r^i from the averaged rate".to_string()
            } else {
                "none (averaged rate did not certify r < 1)".to_string()
            };
            Ok((trace, note))
        }
        ScheduleKind::Cyclic => {
            let budget = if n >= 2 {
                gamma_for_quality(beta, n, n, q).ok()
            } else {
                None
            };
            let active = match (&budget, max_cos) {
                (Some(b), Some(c)) => c <= b.gamma && consistent,
                _ => false,
            };
            let note = if active {
                format!("q^(i/n) at sweep boundaries, q = {q}")
            } else {
                format!("none (angle budget or consistency not met for q = {q})")
            };
            let env = |i: usize| -> Option<f64> {
                if i % n == 0 {
                    Some(cyclic_envelope(q, i / n))
                } else {
                    None
                }
            };
            let trace = if active {
                run_product(family, schedule, Some(&env))?
            } else {
                run_product(family, schedule, None)?
            };
            Ok((trace, note))
        }
        ScheduleKind::QuasiPeriodic { m, .. } => {
            let m = *m;
            let budget = if n >= 2 {
                gamma_for_quality(beta, n, m, q).ok()
            } else {
                None
            };
            let active = match (&budget, max_cos) {
                (Some(b), Some(c)) => c <= b.gamma && consistent,
                _ => false,
            };
            let note = if active {
                format!("beta^(m-1)*q^(i/m), q = {q}, m = {m}")
            } else {
                format!("none (angle budget or consistency not met for q = {q})")
            };
            let env = move |i: usize| -> Option<f64> { Some(quasi_periodic_envelope(beta, q, m, i)) };
            let trace = if active {
                run_product(family, schedule, Some(&env))?
            } else {
                run_product(family, schedule, None)?
            };
            Ok((trace, note))
        }
        ScheduleKind::Random { mu, .. } => {
            let lambda = schedule.lambda.expect("random schedules carry lambda");
            let setup = || -> Option<(f64, f64, f64)> {
                if n < 2 {
                    return None;
                }
                let params = random_params(beta, n, mu).ok()?;
                let qr = params.q;
                let factor = random_block_factor(beta, qr, n, lambda);
                if factor >= 1.0 {
                    return None;
                }
                let budget = gamma_for_quality(beta, n, n, qr).ok()?;
                if max_cos? > budget.gamma || !consistent {
                    return None;
                }
                let global = &family.consistency.as_ref()?.global_op;
                let eye = Mat::identity(family.space().dim());
                let nimp = norm_in(&eye.sub(&global.matrix), family.space()).upper;
                Some((qr, factor, nimp))
            };
            match setup() {
                Some((qr, factor, nimp)) => {
                    let env = move |i: usize| -> Option<f64> {
                        Some(nimp * beta.powi(n as i32 - 1) * factor.powi((i / n) as i32))
                    };
                    let trace = run_product(family, schedule, Some(&env))?;
                    let note = format!(
                        "||I-P||*beta^(n-1)*factor^(i/n) beyond n*k_tau, q = {qr:.4}, factor = {factor:.6}, lambda = {lambda:.4}"
                    );
                    Ok((trace, note))
                }
                None => {
                    let trace = run_product(family, schedule, None)?;
                    Ok((
                        trace,
                        "none (random-product hypotheses not met)".to_string(),
                    ))
                }
            }
        }
    }
}

/// Executes the scenario's schedule and writes `trace.csv` (and the SVG
/// chart when asked). The trace file name carries the seed when one is
/// supplied explicitly, so sweeps do not collide.
pub fn cmd_run(
    scenario: &Scenario,
    out_dir: &Path,
    svg: bool,
    seed_override: Option<u64>,
) -> Result<RunSummary> {
    let mut scenario = scenario.clone();
    if let (Some(seed), Some(s)) = (seed_override, scenario.schedule.as_mut()) {
        s.seed = Some(seed);
    }
    let family = scenario.build_family()?;
    let schedule = scenario.build_schedule()?.ok_or(Error::MissingSchedule)?;
    let (trace, envelope_note) = run_with_schedule(&scenario, &family, &schedule)?;
    fs::create_dir_all(out_dir)?;
    let stem = match seed_override {
        Some(seed) => format!("trace_seed{seed}"),
        None => "trace".to_string(),
    };
    let trace_path = out_dir.join(format!("{stem}.csv"));
    write_trace_csv(&trace, &trace_path)?;
    let svg_requested = svg || scenario.output.as_ref().and_then(|o| o.svg).unwrap_or(false);
    let svg_path = if svg_requested {
        let p = out_dir.join(format!("{stem}.svg"));
        fs::write(&p, crate::svg::render_trace_svg(&trace))?;
        Some(p)
    } else {
        None
    };
    Ok(RunSummary {
        trace_path,
        svg_path,
        steps: trace.steps.len(),
        final_deviation: trace.final_deviation(),
        violations: trace.violations(),
        k_tau: trace.k_tau,
        envelope_note,
    })
}

/// Runs the same random scenario once per seed, `jobs` runs in parallel,
/// reporting in seed order.
pub fn cmd_run_sweep(
    scenario: &Scenario,
    out_dir: &Path,
    svg: bool,
    seeds: &[u64],
    jobs: usize,
) -> Result<Vec<(u64, RunSummary)>> {
    match &scenario.schedule {
        Some(s) if s.kind == "random" => {}
        _ => {
            return Err(Error::InvalidParameter(
                "--seeds needs a random schedule".into(),
            ))
        }
    }
    let jobs = jobs.max(1);
    let mut results: Vec<Option<Result<RunSummary>>> = Vec::new();
    results.resize_with(seeds.len(), || None);
    for chunk_start in (0..seeds.len()).step_by(jobs) {
        let chunk_end = (chunk_start + jobs).min(seeds.len());
        let handles: Vec<_> = std::thread::scope(|scope| {
            let mut hs = Vec::new();
            for idx in chunk_start..chunk_end {
                let seed = seeds[idx];
                let scenario = &scenario;
                let out_dir = out_dir.to_path_buf();
                hs.push(scope.spawn(move || cmd_run(scenario, &out_dir, svg, Some(seed))));
            }
            hs.into_iter()
                .map(|h| h.join().expect("run thread panicked"))
                .collect()
        });
        for (offset, res) in handles.into_iter().enumerate() {
            results[chunk_start + offset] = Some(res);
        }
    }
    let mut out = Vec::with_capacity(seeds.len());
    for (seed, res) in seeds.iter().zip(results) {
        out.push((*seed, res.expect("all chunks ran")?));
    }
    Ok(out)
}
