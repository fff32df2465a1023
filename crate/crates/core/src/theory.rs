//! Closed-form and quadrature predictions for the friendship paradox.
//!
//! Everything here is deterministic: the asymptotic mean of `F_n`, the
//! von Mises constant `tau_f`, and the conditional motif probabilities given
//! the anchor position, both exactly (nested quadrature over arcs) and via
//! their leading small-radius expansions.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bessel::bessel_i0;
use crate::density::PeriodicDensity;
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, GaussLegendre, SimpsonControl};

/// `n r^3` buckets. The limits are asymptotic, so the cut points are a
/// convention and can be overridden.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    pub sparse_below: f64,
    pub dense_above: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            sparse_below: 0.01,
            dense_above: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    RelativelySparse,
    Intermediate { lambda: f64 },
    RelativelyDense,
}

impl Regime {
    pub fn classify(nr3: f64, t: &RegimeThresholds) -> Self {
        if nr3 < t.sparse_below {
            Regime::RelativelySparse
        } else if nr3 > t.dense_above {
            Regime::RelativelyDense
        } else {
            Regime::Intermediate { lambda: nr3 }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Regime::RelativelySparse => "relatively_sparse",
            Regime::Intermediate { .. } => "intermediate",
            Regime::RelativelyDense => "relatively_dense",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl Serialize for Regime {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

/// Points in the mean-degree table carried by a [`Prediction`].
const DEGREE_TABLE_POINTS: usize = 256;

/// Asymptotic prediction for one `(density, n, r)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub n: usize,
    pub r: f64,
    pub nr3: f64,
    pub regime: Regime,
    #[serde(rename = "integral_fprime_sq")]
    pub fprime_sq_integral: f64,
    pub mean_fn: f64,
    #[serde(skip)]
    degree_table: Vec<f64>,
}

impl Prediction {
    /// Leading-order expected degree `2 (n - 1) r f(x)`, interpolated from a
    /// periodic table.
    pub fn mean_degree_at(&self, x: f64) -> f64 {
        let m = self.degree_table.len();
        let s = x.rem_euclid(1.0) * m as f64;
        let k = (s.floor() as usize) % m;
        let w = s - s.floor();
        (1.0 - w) * self.degree_table[k] + w * self.degree_table[(k + 1) % m]
    }
}

/// `∫_0^1 f'(x)^2 dx`.
pub fn fprime_sq_integral(d: &PeriodicDensity) -> Result<f64> {
    if d.is_uniform() {
        return Ok(0.0);
    }
    adaptive_simpson(
        |x| d.deriv(x, 1).powi(2),
        0.0,
        1.0,
        SimpsonControl::default(),
    )
}

/// `E[F_n] ≈ (n r^3 / 3) ∫ f'^2 + 1/4`, with the `o(1)` term dropped.
pub fn expected_fn(d: &PeriodicDensity, n: usize, r: f64) -> Result<Prediction> {
    expected_fn_with(d, n, r, &RegimeThresholds::default())
}

pub fn expected_fn_with(
    d: &PeriodicDensity,
    n: usize,
    r: f64,
    thresholds: &RegimeThresholds,
) -> Result<Prediction> {
    if !(r > 0.0 && r <= 0.5) {
        return Err(Error::RadiusOutOfRange {
            r,
            min: 0.0,
            max: 0.5,
        });
    }
    let integral = fprime_sq_integral(d)?;
    let nr3 = n as f64 * r.powi(3);
    let scale = 2.0 * (n.saturating_sub(1)) as f64 * r;
    let degree_table = (0..DEGREE_TABLE_POINTS)
        .map(|k| scale * d.eval(k as f64 / DEGREE_TABLE_POINTS as f64))
        .collect();
    Ok(Prediction {
        n,
        r,
        nr3,
        regime: Regime::classify(nr3, thresholds),
        fprime_sq_integral: integral,
        mean_fn: nr3 / 3.0 * integral + 0.25,
        degree_table,
    })
}

/// `tau_f = (4 pi^2 kappa^2 / (3 I0^2)) ∫_0^1 e^{2 kappa cos(2 pi x - mu)} sin^2(2 pi x - mu) dx`.
pub fn tau_f(kappa: f64, mu: f64) -> f64 {
    if kappa == 0.0 {
        return 0.0;
    }
    // e^{2 kappa cos} / I0^2 = e^{2 kappa (cos - 1)} * (e^kappa / I0)^2
    let peak = (kappa.exp() / bessel_i0(kappa)).powi(2);
    let integral = adaptive_simpson(
        |x| {
            let t = 2.0 * PI * x - mu;
            (2.0 * kappa * (t.cos() - 1.0)).exp() * t.sin().powi(2)
        },
        0.0,
        1.0,
        SimpsonControl::with_rel_tol(1e-13),
    )
    .expect("tau_f integrand is finite");
    4.0 * PI * PI * kappa * kappa / 3.0 * peak * integral
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauRow {
    pub kappa: f64,
    pub mu: f64,
    pub tau_f: f64,
}

pub const REFERENCE_KAPPAS: [f64; 5] = [0.1, 0.5, 1.0, 5.0, 10.0];
pub const REFERENCE_MUS: [f64; 3] = [0.1, 0.3, 0.5];

/// `tau_f` over a `mu × kappa` grid, `mu` outermost.
pub fn tau_grid(kappas: &[f64], mus: &[f64]) -> Vec<TauRow> {
    mus.iter()
        .flat_map(|&mu| {
            kappas.iter().map(move |&kappa| TauRow {
                kappa,
                mu,
                tau_f: tau_f(kappa, mu),
            })
        })
        .collect()
}

/// The fifteen published `(kappa, mu)` cells.
pub fn reference_table() -> Vec<TauRow> {
    tau_grid(&REFERENCE_KAPPAS, &REFERENCE_MUS)
}

/// Small subgraph patterns anchored at node 1, whose conditional
/// probabilities given `X_1` have known small-`r` expansions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotifKind {
    /// `A12`
    Edge,
    /// `A12 A13`
    Cherry,
    /// `A12 A23`
    Path,
    /// `A12 A13 A23`
    Triangle,
    /// `A12 A23 A24`
    ThreeEdgePath,
    /// `A12 A13 A23 A34`
    TrianglePlusEdge,
}

impl MotifKind {
    pub const ALL: [MotifKind; 6] = [
        MotifKind::Edge,
        MotifKind::Cherry,
        MotifKind::Path,
        MotifKind::Triangle,
        MotifKind::ThreeEdgePath,
        MotifKind::TrianglePlusEdge,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MotifKind::Edge => "edge",
            MotifKind::Cherry => "cherry",
            MotifKind::Path => "path",
            MotifKind::Triangle => "triangle",
            MotifKind::ThreeEdgePath => "three_edge_path",
            MotifKind::TrianglePlusEdge => "triangle_plus_edge",
        }
    }

    /// Power of `r` in the remainder of the asymptotic expansion.
    pub fn remainder_order(&self) -> u32 {
        match self {
            MotifKind::Edge | MotifKind::ThreeEdgePath | MotifKind::TrianglePlusEdge => 5,
            MotifKind::Cherry | MotifKind::Path | MotifKind::Triangle => 6,
        }
    }
}

impl fmt::Display for MotifKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MotifKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        MotifKind::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown motif '{s}'")))
    }
}

/// Largest radius accepted by [`motif_prob_exact`].
pub const EXACT_MOTIF_MAX_R: f64 = 0.1;

/// Exact `E[motif | X_1 = x]` by nested quadrature over arcs of the periodic
/// extension. Inner arc masses use a 20-point Gauss-Legendre rule, which is
/// far below double precision error for arcs of length `<= 0.2`; the
/// triangle's lens is split at `X_2 = x` where the inner limits have a kink.
pub fn motif_prob_exact(d: &PeriodicDensity, x: f64, r: f64, motif: MotifKind) -> Result<f64> {
    if !(r > 0.0 && r <= EXACT_MOTIF_MAX_R) {
        return Err(Error::RadiusOutOfRange {
            r,
            min: 0.0,
            max: EXACT_MOTIF_MAX_R,
        });
    }
    let q = ArcQuadrature::new(d, r);
    let v = match motif {
        MotifKind::Edge => q.edge(x),
        MotifKind::Cherry => q.edge(x).powi(2),
        MotifKind::Path => q.integrate(x - r, x + r, |y| d.eval(y) * q.edge(y)),
        MotifKind::Triangle => q.lens(x, |_| 1.0),
        MotifKind::ThreeEdgePath => q.integrate(x - r, x + r, |y| d.eval(y) * q.edge(y).powi(2)),
        MotifKind::TrianglePlusEdge => q.lens(x, |v| q.edge(v)),
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteIntegrand { x, value: v })
    }
}

struct ArcQuadrature<'a> {
    d: &'a PeriodicDensity,
    r: f64,
    rule: GaussLegendre,
}

impl<'a> ArcQuadrature<'a> {
    const PANELS: usize = 2;

    fn new(d: &'a PeriodicDensity, r: f64) -> Self {
        Self {
            d,
            r,
            rule: GaussLegendre::new(20),
        }
    }

    fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        self.rule.integrate(f, a, b, Self::PANELS)
    }

    fn mass(&self, a: f64, b: f64) -> f64 {
        self.integrate(a, b, |y| self.d.eval(y))
    }

    /// `P(d(y, X) <= r)`.
    fn edge(&self, y: f64) -> f64 {
        self.mass(y - self.r, y + self.r)
    }

    /// `∫∫ f(u) f(v) w(v)` over `{u, v : |u - x|, |v - x|, |u - v| <= r}`.
    fn lens(&self, x: f64, w: impl Fn(f64) -> f64) -> f64 {
        let r = self.r;
        let inner = |lo: f64, hi: f64| self.integrate(lo, hi, |v| self.d.eval(v) * w(v));
        // X_2 below the anchor: X_3 in [x - r, X_2 + r]
        let below = self.integrate(x - r, x, |u| self.d.eval(u) * inner(x - r, u + r));
        // X_2 above the anchor: X_3 in [X_2 - r, x + r]
        let above = self.integrate(x, x + r, |u| self.d.eval(u) * inner(u - r, x + r));
        below + above
    }
}

/// Leading small-`r` expansion of `E[motif | X_1 = x]`.
pub fn motif_prob_asymptotic(d: &PeriodicDensity, x: f64, r: f64, motif: MotifKind) -> f64 {
    let f = d.eval(x);
    let f1 = d.deriv(x, 1);
    let f2 = d.deriv(x, 2);
    let r2 = r * r;
    let r3 = r2 * r;
    let r4 = r2 * r2;
    match motif {
        MotifKind::Edge => 2.0 * r * f + f2 * r3 / 3.0,
        MotifKind::Cherry => 4.0 * r2 * f * f + 4.0 / 3.0 * r4 * f * f2,
        MotifKind::Path => 4.0 * r2 * f * f + r4 / 3.0 * (4.0 * f1 * f1 + 6.0 * f * f2),
        MotifKind::Triangle => 3.0 * r2 * f * f + 5.0 * r4 / 12.0 * (f1 * f1 + 2.0 * f * f2),
        MotifKind::ThreeEdgePath => 8.0 * r3 * f.powi(3),
        MotifKind::TrianglePlusEdge => 6.0 * r3 * f.powi(3),
    }
}
