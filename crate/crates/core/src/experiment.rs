//! Seeded, parallel experiment drivers: single simulations, convergence
//! sweeps over `n`, sweep-versus-oracle checks and moment verification.
//!
//! Replicate `i` at size `n` always uses seed `hash64(master, n, i)` and
//! replicate results are reduced in index order, so every report is
//! identical for any worker count.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{DensitySpec, PeriodicDensity};
use crate::error::{Error, Result};
use crate::moments::{estimate_motif_radii, MomentEstimate};
use crate::paradox::{friendship_paradox, ParadoxResult};
use crate::rgg::{build_graph, naive_adjacency, AdjacencyGraph, CircularRGG, ORACLE_MAX_N};
use crate::rng::{replicate_seed, StreamRng};
use crate::theory::{
    expected_fn_with, motif_prob_asymptotic, motif_prob_exact, MotifKind, Prediction, Regime,
    RegimeThresholds,
};

use rand::SeedableRng;

/// Consecutive-`n` trend checks allow this factor of Monte Carlo noise.
pub const DEFAULT_TREND_SLACK: f64 = 1.15;
pub const DEFAULT_REPLICATIONS: usize = 20;
pub const DEFAULT_N_VALUES: [usize; 3] = [2000, 8000, 32000];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RadiusRule {
    Fixed {
        r: f64,
    },
    /// `r = c n^-alpha`
    PowerLaw {
        c: f64,
        alpha: f64,
    },
    /// `r = (lambda / n)^(1/3)`, holding `n r^3 = lambda`.
    Lambda {
        lambda: f64,
    },
}

impl RadiusRule {
    pub fn radius(&self, n: usize) -> f64 {
        let nf = n as f64;
        match *self {
            RadiusRule::Fixed { r } => r,
            RadiusRule::PowerLaw { c, alpha } => c * nf.powf(-alpha),
            RadiusRule::Lambda { lambda } => (lambda / nf).cbrt(),
        }
    }
}

fn default_workers() -> usize {
    1
}

fn default_slack() -> f64 {
    DEFAULT_TREND_SLACK
}

fn default_replications() -> usize {
    DEFAULT_REPLICATIONS
}

fn default_n_values() -> Vec<usize> {
    DEFAULT_N_VALUES.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub density: DensitySpec,
    #[serde(default = "default_n_values")]
    pub n_values: Vec<usize>,
    pub radius_rule: RadiusRule,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub thresholds: RegimeThresholds,
    #[serde(default = "default_slack")]
    pub trend_slack: f64,
}

impl ExperimentGrid {
    /// Checks every implied radius and returns human-readable warnings for
    /// cells where `n r < 1`.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.n_values.is_empty() {
            return Err(Error::InvalidParameter("n_values is empty".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidParameter(
                "replications must be positive".into(),
            ));
        }
        if self.workers == 0 {
            return Err(Error::InvalidParameter("workers must be positive".into()));
        }
        let mut warnings = Vec::new();
        for &n in &self.n_values {
            if n == 0 {
                return Err(Error::InvalidParameter("n must be positive".into()));
            }
            let r = self.radius_rule.radius(n);
            if !(r > 0.0 && r <= 0.5) {
                return Err(Error::InfeasibleRadius { n, r });
            }
            if (n as f64) * r < 1.0 {
                warnings.push(format!(
                    "n = {n}, r = {r}: n r = {} < 1, expected degree is below one",
                    n as f64 * r
                ));
            }
        }
        Ok(warnings)
    }
}

/// One sampled graph and its statistics.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub graph: CircularRGG,
    pub paradox: ParadoxResult,
    pub prediction: Prediction,
    pub seed: u64,
}

pub fn simulate(d: &PeriodicDensity, n: usize, r: f64, seed: u64) -> Result<Simulation> {
    simulate_with(d, n, r, seed, &RegimeThresholds::default())
}

pub fn simulate_with(
    d: &PeriodicDensity,
    n: usize,
    r: f64,
    seed: u64,
    thresholds: &RegimeThresholds,
) -> Result<Simulation> {
    if !(r > 0.0 && r <= 0.5) {
        return Err(Error::RadiusOutOfRange {
            r,
            min: 0.0,
            max: 0.5,
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let mut rng = StreamRng::seed_from_u64(seed);
    let graph = build_graph(d.sample(n, &mut rng), r)?;
    let paradox = friendship_paradox(&graph);
    let prediction = expected_fn_with(d, n, r, thresholds)?;
    Ok(Simulation {
        graph,
        paradox,
        prediction,
        seed,
    })
}

/// `F_n` of replicate `rep` in the size-`n` cell.
pub fn replicate_fn(
    d: &PeriodicDensity,
    n: usize,
    r: f64,
    master_seed: u64,
    rep: usize,
) -> Result<f64> {
    let seed = replicate_seed(master_seed, n as u64, rep as u64);
    let mut rng = StreamRng::seed_from_u64(seed);
    let g = build_graph(d.sample(n, &mut rng), r)?;
    Ok(friendship_paradox(&g).f_n)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub r: f64,
    pub nr3: f64,
    pub regime: Regime,
    pub fn_mean: f64,
    pub fn_std: f64,
    pub prediction: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub replications: usize,
    /// Only filled when timing is requested; timings are not reproducible.
    pub wall_time_ms: Option<u64>,
}

impl ConvergenceRow {
    /// Coefficient of variation `fn_std / fn_mean`.
    pub fn spread(&self) -> f64 {
        if self.fn_mean > 0.0 {
            self.fn_std / self.fn_mean
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub verdict: Verdict,
    pub trend_slack: f64,
}

/// `Pass` when both `rel_err` and `fn_std / fn_mean` are nonincreasing in
/// `n` up to the multiplicative slack. Fewer than two rows always fail.
pub fn trend_verdict(rows: &[ConvergenceRow], slack: f64) -> Verdict {
    if rows.len() < 2 {
        return Verdict::Fail;
    }
    let ok = rows
        .windows(2)
        .all(|w| w[1].rel_err <= slack * w[0].rel_err && w[1].spread() <= slack * w[0].spread());
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Runs `replications` graphs per `n`, in a pool of `grid.workers` threads.
pub fn run_convergence(grid: &ExperimentGrid, timing: bool) -> Result<ConvergenceReport> {
    for w in grid.validate()? {
        log::warn!("{w}");
    }
    let d = grid.density.build()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(grid.workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;

    let mut ns = grid.n_values.clone();
    ns.sort_unstable();
    ns.dedup();
    let mut rows = Vec::with_capacity(ns.len());
    for n in ns {
        let r = grid.radius_rule.radius(n);
        let start = Instant::now();
        let values: Vec<f64> = pool.install(|| {
            (0..grid.replications)
                .into_par_iter()
                .map(|rep| replicate_fn(&d, n, r, grid.master_seed, rep))
                .collect::<Result<Vec<f64>>>()
        })?;
        let elapsed = start.elapsed().as_millis() as u64;
        let (mean, std) = mean_std(&values);
        let pred = expected_fn_with(&d, n, r, &grid.thresholds)?;
        let abs_err = (mean - pred.mean_fn).abs();
        rows.push(ConvergenceRow {
            n,
            r,
            nr3: pred.nr3,
            regime: pred.regime,
            fn_mean: mean,
            fn_std: std,
            prediction: pred.mean_fn,
            abs_err,
            rel_err: abs_err / pred.mean_fn,
            replications: grid.replications,
            wall_time_ms: timing.then_some(elapsed),
        });
    }
    let verdict = trend_verdict(&rows, grid.trend_slack);
    Ok(ConvergenceReport {
        rows,
        verdict,
        trend_slack: grid.trend_slack,
    })
}

/// Mean and sample standard deviation, accumulated in slice order.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

/// Sweep and oracle results for one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleComparison {
    pub n: usize,
    pub r: f64,
    pub seed: u64,
    pub edges: usize,
    pub degrees_equal: bool,
    pub edges_equal: bool,
    pub fn_sweep: f64,
    pub fn_naive: f64,
}

impl OracleComparison {
    pub fn passed(&self) -> bool {
        self.degrees_equal && self.edges_equal && self.fn_sweep.to_bits() == self.fn_naive.to_bits()
    }
}

/// Builds both graphs for the given positions and compares degrees, edge
/// sets and `F_n`. The oracle path accumulates `F_n` in the same rank order
/// so the comparison can be bitwise.
pub fn compare_with_oracle(
    positions: crate::rgg::NodePositions,
    r: f64,
    seed: u64,
) -> Result<OracleComparison> {
    let n = positions.len();
    if n > ORACLE_MAX_N {
        return Err(Error::TooLargeForOracle {
            n,
            limit: ORACLE_MAX_N,
        });
    }
    let naive = naive_adjacency(&positions, r)?;
    let order = positions.sorted_order().to_vec();
    let g = build_graph(positions, r)?;
    let adj = AdjacencyGraph::from(&naive).with_visit_order(order)?;
    let edges = g.edge_list();
    Ok(OracleComparison {
        n,
        r,
        seed,
        edges: naive.edges.len(),
        degrees_equal: g.degrees() == naive.degrees.as_slice(),
        edges_equal: edges == naive.edges,
        fn_sweep: friendship_paradox(&g).f_n,
        fn_naive: friendship_paradox(&adj).f_n,
    })
}

pub fn oracle_check(d: &PeriodicDensity, n: usize, r: f64, seed: u64) -> Result<OracleComparison> {
    if n > ORACLE_MAX_N {
        return Err(Error::TooLargeForOracle {
            n,
            limit: ORACLE_MAX_N,
        });
    }
    let mut rng = StreamRng::seed_from_u64(seed);
    compare_with_oracle(d.sample(n, &mut rng), r, seed)
}

/// One `(motif, anchor, r)` cell of a moment verification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub motif: MotifKind,
    pub anchor_x: f64,
    pub r: f64,
    pub samples: u64,
    pub mean: f64,
    pub stderr: f64,
    pub exact: f64,
    pub asymptotic: f64,
    pub abs_err_exact: f64,
    pub abs_err_asymptotic: f64,
}

impl MomentRow {
    fn new(est: &MomentEstimate, exact: f64, asymptotic: f64) -> Self {
        Self {
            motif: est.motif,
            anchor_x: est.anchor_x,
            r: est.r,
            samples: est.samples,
            mean: est.mean,
            stderr: est.stderr,
            exact,
            asymptotic,
            abs_err_exact: (est.mean - exact).abs(),
            abs_err_asymptotic: (exact - asymptotic).abs(),
        }
    }

    /// `|MC - exact| <= k * stderr`.
    pub fn within(&self, k: f64) -> bool {
        self.abs_err_exact <= k * self.stderr
    }
}

/// Observed order of `|exact - asymptotic|` between consecutive radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderRow {
    pub motif: MotifKind,
    pub anchor_x: f64,
    pub r_coarse: f64,
    pub r_fine: f64,
    pub err_coarse: f64,
    pub err_fine: f64,
    pub observed_order: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentVerification {
    pub rows: Vec<MomentRow>,
    pub orders: Vec<OrderRow>,
}

impl MomentVerification {
    pub fn fraction_within(&self, k: f64) -> f64 {
        if self.rows.is_empty() {
            return 1.0;
        }
        self.rows.iter().filter(|r| r.within(k)).count() as f64 / self.rows.len() as f64
    }

    pub fn min_order(&self, motif: MotifKind) -> Option<f64> {
        self.orders
            .iter()
            .filter(|o| o.motif == motif)
            .map(|o| o.observed_order)
            .reduce(f64::min)
    }
}

/// Runs Monte Carlo, exact quadrature and the asymptotic formula for every
/// `(motif, anchor, r)`. Radii share draws per `(motif, anchor)`; each such
/// pair gets seed `hash64(seed, motif index, anchor index)`.
pub fn verify_moments(
    d: &PeriodicDensity,
    motifs: &[MotifKind],
    anchors: &[f64],
    radii: &[f64],
    samples: u64,
    seed: u64,
) -> Result<MomentVerification> {
    let mut radii = radii.to_vec();
    radii.sort_by(|a, b| b.total_cmp(a));
    radii.dedup();
    let mut rows = Vec::new();
    let mut orders = Vec::new();
    for (mi, &motif) in motifs.iter().enumerate() {
        for (ai, &x) in anchors.iter().enumerate() {
            let s = crate::rng::hash64(&[seed, mi as u64, ai as u64]);
            let est = estimate_motif_radii(d, x, &radii, motif, samples, s)?;
            let mut cells = Vec::with_capacity(est.len());
            for e in &est {
                let exact = motif_prob_exact(d, x, e.r, motif)?;
                let asy = motif_prob_asymptotic(d, x, e.r, motif);
                cells.push(MomentRow::new(e, exact, asy));
            }
            for w in cells.windows(2) {
                orders.push(OrderRow {
                    motif,
                    anchor_x: x,
                    r_coarse: w[0].r,
                    r_fine: w[1].r,
                    err_coarse: w[0].abs_err_asymptotic,
                    err_fine: w[1].abs_err_asymptotic,
                    observed_order: (w[0].abs_err_asymptotic / w[1].abs_err_asymptotic).ln()
                        / (w[0].r / w[1].r).ln(),
                });
            }
            rows.extend(cells);
        }
    }
    Ok(MomentVerification { rows, orders })
}
