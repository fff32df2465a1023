//! Composite Simpson quadrature with panel doubling.

use crate::error::{Error, Result};

/// Convergence control for [`adaptive_simpson`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpsonControl {
    pub initial_panels: usize,
    pub max_panels: usize,
    /// Successive estimates must agree within this relative tolerance.
    pub rel_tol: f64,
    /// Absolute floor used when the integral itself is (near) zero.
    pub abs_tol: f64,
}

impl Default for SimpsonControl {
    fn default() -> Self {
        Self {
            initial_panels: 64,
            max_panels: 1 << 20,
            rel_tol: 1e-11,
            abs_tol: 1e-300,
        }
    }
}

impl SimpsonControl {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

/// Composite Simpson rule on `[a, b]` with an even number of panels.
pub fn simpson<F>(f: F, a: f64, b: f64, panels: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if panels < 2 || !panels.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "Simpson needs an even panel count >= 2, got {panels}"
        )));
    }
    let h = (b - a) / panels as f64;
    let eval = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteIntegrand { x, value: v })
        }
    };

    let mut odd = 0.0;
    let mut even = 0.0;
    for j in 1..panels {
        let v = eval(a + j as f64 * h)?;
        if j % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    let ends = eval(a)? + eval(b)?;
    Ok(h / 3.0 * (ends + 4.0 * odd + 2.0 * even))
}

/// Simpson over one period `[0, 1]`.
pub fn integrate_periodic<F>(f: F, panels: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    simpson(f, 0.0, 1.0, panels)
}

/// Doubles the panel count from `ctl.initial_panels` until two successive
/// estimates agree, returning the finer one. If the cap is reached the last
/// estimate is returned as is.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, ctl: SimpsonControl) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut panels = ctl.initial_panels.max(2);
    if panels % 2 == 1 {
        panels += 1;
    }
    let mut prev = simpson(&f, a, b, panels)?;
    while panels < ctl.max_panels {
        panels *= 2;
        let next = simpson(&f, a, b, panels)?;
        if (next - prev).abs() <= ctl.rel_tol * next.abs() || (next - prev).abs() <= ctl.abs_tol {
            return Ok(next);
        }
        prev = next;
    }
    log::debug!("adaptive_simpson hit the panel cap on [{a}, {b}]");
    Ok(prev)
}

/// Gauss-Legendre rule on `[-1, 1]`, nodes found by Newton iteration on
/// the Legendre recurrence.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let m = order as f64;
        for i in 0..order.div_ceil(2) {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=order {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                let p = if order == 1 { z } else { p1 };
                let pm1 = if order == 1 { 1.0 } else { p0 };
                dp = m * (z * p - pm1) / (z * z - 1.0);
                let dz = p / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[order - 1 - i] = z;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Composite rule with `panels` equal sub-intervals of `[a, b]`.
    pub fn integrate<F>(&self, f: F, a: f64, b: f64, panels: usize) -> f64
    where
        F: Fn(f64) -> f64,
    {
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let mid = lo + 0.5 * h;
            let mut s = 0.0;
            for (z, w) in self.nodes.iter().zip(&self.weights) {
                s += w * f(mid + 0.5 * h * z);
            }
            total += 0.5 * h * s;
        }
        total
    }
}
