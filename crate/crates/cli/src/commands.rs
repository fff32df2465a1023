use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use rgg_paradox::experiment::{
    oracle_check, run_convergence, simulate, verify_moments, ExperimentGrid, RadiusRule, Verdict,
    DEFAULT_N_VALUES, DEFAULT_REPLICATIONS, DEFAULT_TREND_SLACK,
};
use rgg_paradox::rgg::ORACLE_MAX_N;
use rgg_paradox::rng::hash64;
use rgg_paradox::theory::{tau_grid, RegimeThresholds, REFERENCE_KAPPAS, REFERENCE_MUS};
use rgg_paradox::{Error, MotifKind, Regime};
use serde::Serialize;

use crate::output;
use crate::{
    Cli, CliError, Command, ConvergeArgs, Format, GlobalArgs, OracleCheckArgs, Outcome, RuleChoice,
    SimulateArgs, TauArgs, VerifyMomentsArgs,
};

/// Runs one parsed invocation, writing its main output to `--out` or stdout.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let g = &cli.global;
    if g.workers == Some(0) {
        return Err(CliError::Usage("--workers must be positive".into()));
    }
    match &cli.command {
        Command::Tau(a) => tau(g, a),
        Command::Simulate(a) => simulate_cmd(g, a),
        Command::Converge(a) => converge(g, a),
        Command::VerifyMoments(a) => moments(g, a),
        Command::OracleCheck(a) => oracle(g, a),
    }
}

fn seed(g: &GlobalArgs) -> u64 {
    g.seed.unwrap_or(0)
}

fn pool(g: &GlobalArgs) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(g.workers.unwrap_or(1))
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn tau(g: &GlobalArgs, a: &TauArgs) -> Result<Outcome, CliError> {
    let kappas = if a.kappa.is_empty() {
        REFERENCE_KAPPAS.to_vec()
    } else {
        a.kappa.clone()
    };
    let mus = if a.mu.is_empty() {
        REFERENCE_MUS.to_vec()
    } else {
        a.mu.clone()
    };
    if let Some(k) = kappas.iter().find(|k| !(k.is_finite() && **k >= 0.0)) {
        return Err(
            Error::InvalidParameter(format!("kappa must be finite and >= 0, got {k}")).into(),
        );
    }
    let rows = tau_grid(&kappas, &mus);
    let w = output::open(g.out.as_deref())?;
    match g.format.unwrap_or(Format::Csv) {
        Format::Csv => output::csv_rows(w, &rows)?,
        Format::Json => output::json(w, &rows)?,
    }
    Ok(Outcome::Pass)
}

#[derive(Serialize)]
struct Summary {
    n: usize,
    r: f64,
    f_n: f64,
    prediction: f64,
    regime: Regime,
    seed: u64,
}

fn simulate_cmd(g: &GlobalArgs, a: &SimulateArgs) -> Result<Outcome, CliError> {
    let d = a.density.spec_or_uniform()?.build()?;
    let s = simulate(&d, a.n, a.r, seed(g))?;
    let summary = Summary {
        n: a.n,
        r: a.r,
        f_n: s.paradox.f_n,
        prediction: s.prediction.mean_fn,
        regime: s.prediction.regime,
        seed: s.seed,
    };
    if let Some(p) = &a.nodes {
        write_nodes(p, &s)?;
    }
    if let Some(p) = &a.edges {
        s.graph.write_edges_csv(BufWriter::new(File::create(p)?))?;
    }
    let w = output::open(g.out.as_deref())?;
    match g.format.unwrap_or(Format::Json) {
        Format::Csv => output::csv_rows(w, &[summary])?,
        Format::Json => output::json(w, &summary)?,
    }
    Ok(Outcome::Pass)
}

fn write_nodes(path: &Path, s: &rgg_paradox::experiment::Simulation) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    wtr.write_record(["node", "position", "degree", "delta"])?;
    let x = s.graph.positions().x();
    for (i, (&d, &delta)) in s.graph.degrees().iter().zip(&s.paradox.delta).enumerate() {
        wtr.write_record([
            i.to_string(),
            x[i].to_string(),
            d.to_string(),
            delta.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

fn radius_rule(a: &ConvergeArgs) -> Result<Option<RadiusRule>, CliError> {
    let choice = match a.rule {
        Some(c) => c,
        None if a.lambda.is_some() => RuleChoice::Lambda,
        None if a.alpha.is_some() || a.c.is_some() => RuleChoice::PowerLaw,
        None if a.r.is_some() => RuleChoice::Fixed,
        None => return Ok(None),
    };
    let need = |v: Option<f64>, flag: &str| {
        v.ok_or_else(|| CliError::Usage(format!("this radius rule needs --{flag}")))
    };
    Ok(Some(match choice {
        RuleChoice::Fixed => RadiusRule::Fixed { r: need(a.r, "r")? },
        RuleChoice::PowerLaw => RadiusRule::PowerLaw {
            c: a.c.unwrap_or(1.0),
            alpha: need(a.alpha, "alpha")?,
        },
        RuleChoice::Lambda => RadiusRule::Lambda {
            lambda: need(a.lambda, "lambda")?,
        },
    }))
}

/// Config file first, then flags on top.
pub(crate) fn build_grid(g: &GlobalArgs, a: &ConvergeArgs) -> Result<ExperimentGrid, CliError> {
    let base: Option<ExperimentGrid> = match &a.config {
        Some(p) => Some(
            serde_json::from_reader(BufReader::new(File::open(p)?)).map_err(|source| {
                CliError::Config {
                    path: p.clone(),
                    source,
                }
            })?,
        ),
        None => None,
    };
    let rule = radius_rule(a)?;
    let mut grid = match base {
        Some(grid) => grid,
        None => ExperimentGrid {
            density: a.density.spec_or_uniform()?,
            n_values: DEFAULT_N_VALUES.to_vec(),
            radius_rule: rule.ok_or_else(|| {
                CliError::Usage(
                    "converge needs --config or a radius rule (--r, --alpha or --lambda)".into(),
                )
            })?,
            replications: DEFAULT_REPLICATIONS,
            master_seed: 0,
            workers: 1,
            thresholds: RegimeThresholds::default(),
            trend_slack: DEFAULT_TREND_SLACK,
        },
    };
    if let Some(spec) = a.density.spec()? {
        grid.density = spec;
    }
    if let Some(rule) = rule {
        grid.radius_rule = rule;
    }
    if !a.n.is_empty() {
        grid.n_values = a.n.clone();
    }
    if let Some(k) = a.replications {
        grid.replications = k;
    }
    if let Some(s) = a.slack {
        grid.trend_slack = s;
    }
    if let Some(s) = g.seed {
        grid.master_seed = s;
    }
    if let Some(w) = g.workers {
        grid.workers = w;
    }
    Ok(grid)
}

fn converge(g: &GlobalArgs, a: &ConvergeArgs) -> Result<Outcome, CliError> {
    let grid = build_grid(g, a)?;
    let mut ns = grid.n_values.clone();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 2 {
        return Err(CliError::Usage(
            "converge needs at least two distinct n values".into(),
        ));
    }
    let report = run_convergence(&grid, a.timing)?;
    let w = output::open(g.out.as_deref())?;
    match g.format.unwrap_or(Format::Csv) {
        Format::Csv => output::csv_rows(w, &report.rows)?,
        Format::Json => output::json(w, &report)?,
    }
    let verdict = serde_json::to_value(report.verdict)?;
    eprintln!("verdict: {}", verdict.as_str().unwrap_or_default());
    Ok(match report.verdict {
        Verdict::Pass => Outcome::Pass,
        Verdict::Fail => Outcome::Fail,
    })
}

fn moments(g: &GlobalArgs, a: &VerifyMomentsArgs) -> Result<Outcome, CliError> {
    let mut radii = a.radii.clone();
    radii.sort_by(|x, y| y.total_cmp(x));
    radii.dedup();
    if radii.len() < 2 {
        return Err(CliError::Usage(
            "verify-moments needs at least two radii".into(),
        ));
    }
    let motifs = a
        .motifs
        .iter()
        .map(|m| {
            m.parse::<MotifKind>()
                .map_err(|e| CliError::Usage(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let d = a.density.spec_or_uniform()?.build()?;
    let v =
        pool(g)?.install(|| verify_moments(&d, &motifs, &a.anchors, &radii, a.samples, seed(g)))?;
    for o in &v.orders {
        log::info!(
            "{} at x = {}: r {} -> {}, observed order {:.3}",
            o.motif,
            o.anchor_x,
            o.r_coarse,
            o.r_fine,
            o.observed_order
        );
    }
    if let Some(p) = &a.orders {
        output::csv_rows(BufWriter::new(File::create(p)?), &v.orders)?;
    }
    let w = output::open(g.out.as_deref())?;
    match g.format.unwrap_or(Format::Csv) {
        Format::Csv => output::csv_rows(w, &v.rows)?,
        Format::Json => output::json(w, &v)?,
    }
    Ok(Outcome::Pass)
}

#[derive(Serialize)]
struct OracleRow {
    n: usize,
    r: f64,
    seed: u64,
    edges: usize,
    degrees_equal: bool,
    edges_equal: bool,
    fn_sweep: f64,
    fn_naive: f64,
    passed: bool,
}

fn oracle(g: &GlobalArgs, a: &OracleCheckArgs) -> Result<Outcome, CliError> {
    if let Some(&n) = a.n.iter().find(|&&n| n > ORACLE_MAX_N) {
        return Err(Error::TooLargeForOracle {
            n,
            limit: ORACLE_MAX_N,
        }
        .into());
    }
    let d = a.density.spec_or_uniform()?.build()?;
    let mut cells = Vec::new();
    for &n in &a.n {
        for &r in &a.radii {
            for k in 0..a.instances {
                cells.push((n, r, hash64(&[seed(g), n as u64, r.to_bits(), k as u64])));
            }
        }
    }
    let rows = pool(g)?.install(|| {
        cells
            .par_iter()
            .map(|&(n, r, s)| {
                let c = oracle_check(&d, n, r, s)?;
                Ok(OracleRow {
                    passed: c.passed(),
                    n: c.n,
                    r: c.r,
                    seed: c.seed,
                    edges: c.edges,
                    degrees_equal: c.degrees_equal,
                    edges_equal: c.edges_equal,
                    fn_sweep: c.fn_sweep,
                    fn_naive: c.fn_naive,
                })
            })
            .collect::<Result<Vec<_>, Error>>()
    })?;
    let failed = rows.iter().filter(|r| !r.passed).count();
    let mut w = output::open(g.out.as_deref())?;
    match g.format.unwrap_or(Format::Csv) {
        Format::Csv => output::csv_rows(&mut w, &rows)?,
        Format::Json => output::json(&mut w, &rows)?,
    }
    w.flush()?;
    eprintln!("{} of {} instances match", rows.len() - failed, rows.len());
    Ok(if failed == 0 {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}
