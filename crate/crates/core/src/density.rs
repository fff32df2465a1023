//! Periodic probability densities on the unit circle `[0, 1)`.
//!
//! A [`PeriodicDensity`] is a fixed *shape* on the circle plus a rotation
//! offset. Evaluation, derivatives and sampling all go through the periodic
//! extension, so no caller ever needs to special-case the seam at 0 ≡ 1.
//! Non-uniform densities are sampled by inverse-CDF lookup into a cumulative
//! table of the unrotated shape; the rotation is added afterwards, which
//! makes the sampler exactly rotation-equivariant for a fixed stream of
//! uniforms.

use std::f64::consts::{PI, TAU};
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bessel::bessel_i0;
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, simpson, SimpsonControl};
use crate::rgg::NodePositions;

/// Knot count of the cumulative table is `CDF_CELLS + 1`.
pub const CDF_CELLS: usize = 1 << 14;
/// Lower bound a density must respect at every probe point.
pub const POSITIVITY_FLOOR: f64 = 1e-6;
pub const POSITIVITY_PROBES: usize = 4096;
const NORMALIZATION_TOL: f64 = 1e-10;
const PERIODIC_VALUE_TOL: f64 = 1e-10;
const PERIODIC_DERIV_TOL: f64 = 1e-8;
/// Grid spacing tolerance for tabulated CSV input.
pub const GRID_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum DensityKind {
    Uniform,
    /// `exp(kappa * cos(2 pi x - phase)) / I0(kappa)`; `phase` is in radians.
    VonMises {
        kappa: f64,
        phase: f64,
    },
    /// Values on the equispaced grid `k / m`, `k = 0..m`, periodic.
    Tabulated {
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
struct CdfTable {
    /// Cumulative mass of the unrotated shape at `k / CDF_CELLS`.
    knots: Vec<f64>,
}

impl CdfTable {
    fn build(shape: impl Fn(f64) -> f64) -> Self {
        let h = 1.0 / CDF_CELLS as f64;
        let mut knots = Vec::with_capacity(CDF_CELLS + 1);
        knots.push(0.0);
        let mut acc = 0.0;
        let mut left = shape(0.0);
        for k in 0..CDF_CELLS {
            let a = k as f64 * h;
            let right = shape(a + h);
            acc += h / 6.0 * (left + 4.0 * shape(a + 0.5 * h) + right);
            knots.push(acc);
            left = right;
        }
        let total = acc;
        for v in &mut knots {
            *v /= total;
        }
        knots[CDF_CELLS] = 1.0;
        Self { knots }
    }

    /// Mass of `[0, t]` for `t` in `[0, 1]`.
    fn cdf(&self, t: f64) -> f64 {
        let s = t * CDF_CELLS as f64;
        let k = (s.floor() as usize).min(CDF_CELLS - 1);
        let w = s - k as f64;
        self.knots[k] + w * (self.knots[k + 1] - self.knots[k])
    }

    fn quantile(&self, u: f64) -> f64 {
        // first knot strictly above u, so knots[k] <= u < knots[k + 1]
        let hi = self.knots.partition_point(|&c| c <= u).clamp(1, CDF_CELLS);
        let k = hi - 1;
        let lo_c = self.knots[k];
        let span = self.knots[k + 1] - lo_c;
        let w = if span > 0.0 { (u - lo_c) / span } else { 0.0 };
        (k as f64 + w) / CDF_CELLS as f64
    }
}

/// A probability density on the circle with value, derivative and sampling
/// access. Immutable once built.
#[derive(Debug, Clone)]
pub struct PeriodicDensity {
    kind: DensityKind,
    normalizer: f64,
    offset: f64,
    cdf: Option<Arc<CdfTable>>,
}

impl PeriodicDensity {
    pub fn uniform() -> Self {
        Self {
            kind: DensityKind::Uniform,
            normalizer: 1.0,
            offset: 0.0,
            cdf: None,
        }
    }

    /// Von Mises density `exp(kappa cos(2 pi x - mu)) / I0(kappa)` with `mu`
    /// used literally as a phase in radians.
    pub fn von_mises(kappa: f64, mu: f64) -> Result<Self> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidDensity(format!(
                "von Mises concentration must be finite and >= 0, got {kappa}"
            )));
        }
        if !mu.is_finite() {
            return Err(Error::InvalidDensity(format!("non-finite location {mu}")));
        }
        let normalizer = bessel_i0(kappa);
        let shape = move |t: f64| (kappa * (TAU * t).cos()).exp() / normalizer;
        let d = Self {
            kind: DensityKind::VonMises { kappa, phase: mu },
            normalizer,
            offset: (mu / TAU).rem_euclid(1.0),
            cdf: Some(Arc::new(CdfTable::build(shape))),
        };
        d.validate()?;
        Ok(d)
    }

    /// Density tabulated on the equispaced periodic grid `k / m`. Values are
    /// rescaled so the piecewise-linear interpolant integrates to one.
    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        Self::tabulated_with_offset(values, 0.0)
    }

    fn tabulated_with_offset(mut values: Vec<f64>, offset: f64) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::InvalidDensity(format!(
                "tabulated density needs at least 3 grid points, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidDensity(format!(
                "tabulated values must be finite and nonnegative, found {bad}"
            )));
        }
        // periodic trapezoid = exact integral of the linear interpolant
        let mass = values.iter().sum::<f64>() / values.len() as f64;
        if mass <= 0.0 {
            return Err(Error::InvalidDensity(
                "tabulated density has zero mass".into(),
            ));
        }
        for v in &mut values {
            *v /= mass;
        }
        let table_values = values.clone();
        let shape = move |t: f64| interp_periodic(&table_values, t);
        let d = Self {
            kind: DensityKind::Tabulated { values },
            normalizer: mass,
            offset: offset.rem_euclid(1.0),
            cdf: Some(Arc::new(CdfTable::build(shape))),
        };
        d.validate()?;
        Ok(d)
    }

    /// Loads a two-column CSV `(x, f(x))` on an equispaced grid covering the
    /// circle once. A header row is optional.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows: Vec<(f64, f64)> = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(Error::InvalidDensity(format!(
                    "line {}: expected two columns",
                    line + 1
                )));
            }
            let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
            match parsed {
                (Ok(x), Ok(y)) => rows.push((x, y)),
                _ if line == 0 => continue, // header
                _ => {
                    return Err(Error::InvalidDensity(format!(
                        "line {}: could not parse {:?}",
                        line + 1,
                        rec
                    )))
                }
            }
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let m = rows.len();
        if m < 3 {
            return Err(Error::InvalidDensity(format!("only {m} grid rows")));
        }
        let x0 = rows[0].0;
        if !(0.0..1.0).contains(&x0) || !(0.0..1.0).contains(&rows[m - 1].0) {
            return Err(Error::InvalidDensity(
                "grid points must lie in [0, 1)".into(),
            ));
        }
        let h = 1.0 / m as f64;
        for (k, &(x, _)) in rows.iter().enumerate() {
            if (x - x0 - k as f64 * h).abs() > GRID_TOL {
                return Err(Error::InvalidDensity(format!(
                    "grid is not equispaced with spacing 1/{m}: row {k} has x = {x}"
                )));
            }
        }
        Self::tabulated_with_offset(rows.into_iter().map(|r| r.1).collect(), x0)
    }

    fn validate(&self) -> Result<()> {
        let mass = match &self.kind {
            DensityKind::Uniform => 1.0,
            DensityKind::Tabulated { values } => {
                // two Simpson panels per grid cell integrate the interpolant exactly
                simpson(|x| self.eval(x), 0.0, 1.0, 2 * values.len())?
            }
            DensityKind::VonMises { .. } => adaptive_simpson(
                |x| self.eval(x),
                0.0,
                1.0,
                SimpsonControl::with_rel_tol(1e-13),
            )?,
        };
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDensity(format!(
                "density integrates to {mass}, not 1"
            )));
        }

        let just_below_one = 1.0 - f64::EPSILON;
        if (self.eval(0.0) - self.eval(just_below_one)).abs() > PERIODIC_VALUE_TOL
            || (self.deriv(0.0, 1) - self.deriv(just_below_one, 1)).abs() > PERIODIC_DERIV_TOL
        {
            return Err(Error::InvalidDensity(
                "density is not periodic across the seam".into(),
            ));
        }

        for j in 0..POSITIVITY_PROBES {
            let x = j as f64 / POSITIVITY_PROBES as f64;
            let v = self.eval(x);
            if v < POSITIVITY_FLOOR {
                return Err(Error::InvalidDensity(format!(
                    "density {v:e} at x = {x} is below the floor {POSITIVITY_FLOOR:e}"
                )));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    /// `I0(kappa)` for von Mises, the pre-rescaling mass for tabulated input,
    /// and 1 for the uniform density.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// Rotation applied on top of the shape, as a fraction of the circle.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, DensityKind::Uniform)
    }

    /// The same shape rotated by `delta` (fraction of the circle).
    pub fn rotated(&self, delta: f64) -> Self {
        let mut out = self.clone();
        out.offset = (self.offset + delta).rem_euclid(1.0);
        if out.offset >= 1.0 {
            out.offset = 0.0;
        }
        if let DensityKind::VonMises { kappa, phase } = self.kind {
            out.kind = DensityKind::VonMises {
                kappa,
                phase: phase + TAU * delta,
            };
        }
        out
    }

    /// `f(x mod 1)`.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            DensityKind::Uniform => 1.0,
            DensityKind::VonMises { kappa, phase } => {
                (kappa * (TAU * x - phase).cos()).exp() / self.normalizer
            }
            DensityKind::Tabulated { values } => interp_periodic(values, x - self.offset),
        }
    }

    /// First or second derivative. Analytic except for tabulated densities,
    /// which use central differences on the grid.
    ///
    /// # Panics
    /// If `order` is not 1 or 2.
    pub fn deriv(&self, x: f64, order: u8) -> f64 {
        assert!(order == 1 || order == 2, "derivative order must be 1 or 2");
        match &self.kind {
            DensityKind::Uniform => 0.0,
            DensityKind::VonMises { kappa, phase } => {
                let theta = TAU * x - phase;
                let f = (kappa * theta.cos()).exp() / self.normalizer;
                let s = TAU * kappa * theta.sin();
                if order == 1 {
                    -s * f
                } else {
                    f * (s * s - 4.0 * PI * PI * kappa * theta.cos())
                }
            }
            DensityKind::Tabulated { values } => {
                let m = values.len();
                let h = 1.0 / m as f64;
                let at = |k: usize| -> f64 {
                    let prev = values[(k + m - 1) % m];
                    let next = values[(k + 1) % m];
                    if order == 1 {
                        (next - prev) / (2.0 * h)
                    } else {
                        (next - 2.0 * values[k] + prev) / (h * h)
                    }
                };
                let s = (x - self.offset).rem_euclid(1.0) * m as f64;
                let k = (s.floor() as usize) % m;
                let w = s - s.floor();
                (1.0 - w) * at(k) + w * at((k + 1) % m)
            }
        }
    }

    /// `P(X <= x)` for `x` in `[0, 1]`, read off the cumulative table.
    pub fn cdf(&self, x: f64) -> f64 {
        match &self.cdf {
            None => x,
            Some(table) => {
                let unwrapped = |t: f64| {
                    let fl = t.floor();
                    fl + table.cdf(t - fl)
                };
                unwrapped(x - self.offset) - unwrapped(-self.offset)
            }
        }
        .clamp(0.0, 1.0)
    }

    /// Maps a uniform variate in `[0, 1)` to a draw from the density.
    pub fn quantile(&self, u: f64) -> f64 {
        let t = match &self.cdf {
            None => u,
            Some(table) => table.quantile(u),
        };
        wrap_unit(t + self.offset)
    }

    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }

    /// `n` i.i.d. draws.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> NodePositions {
        let xs = (0..n).map(|_| self.sample_point(rng)).collect();
        NodePositions::new(xs).expect("sampler produces finite positions")
    }
}

/// Reduces to `[0, 1)`, mapping an exact 1.0 (from rounding) to 0.0.
pub fn wrap_unit(x: f64) -> f64 {
    let y = x.rem_euclid(1.0);
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

fn interp_periodic(values: &[f64], x: f64) -> f64 {
    let m = values.len();
    let s = x.rem_euclid(1.0) * m as f64;
    let k = (s.floor() as usize) % m;
    let w = s - s.floor();
    (1.0 - w) * values[k] + w * values[(k + 1) % m]
}

/// Serializable description of a density, as used by configs and the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DensitySpec {
    Uniform,
    #[serde(rename = "vonmises")]
    VonMises {
        kappa: f64,
        #[serde(default)]
        mu: f64,
    },
    Csv {
        path: String,
    },
}

impl DensitySpec {
    pub fn build(&self) -> Result<PeriodicDensity> {
        match self {
            DensitySpec::Uniform => Ok(PeriodicDensity::uniform()),
            DensitySpec::VonMises { kappa, mu } => PeriodicDensity::von_mises(*kappa, *mu),
            DensitySpec::Csv { path } => PeriodicDensity::from_csv_path(path),
        }
    }
}
