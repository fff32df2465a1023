//! Monte Carlo estimates of conditional motif probabilities given the
//! anchor position `X_1 = x`.
//!
//! Replicates are split into fixed-size chunks; chunk `c` draws from
//! substream `(seed, c)` and reports an integer hit count. The reduction is
//! a plain integer sum, so estimates are bit-identical for any number of
//! worker threads. Every replicate draws all of its auxiliary points before
//! any indicator is evaluated, so estimates at different radii share the
//! same points and are monotone in `r`.

use rayon::prelude::*;
use serde::Serialize;

use crate::density::PeriodicDensity;
use crate::error::{Error, Result};
use crate::rgg::circ_dist;
use crate::rng::{hash64, stream};
use crate::theory::MotifKind;

pub const MIN_SAMPLES: u64 = 10_000;
const CHUNK: u64 = 1 << 16;

/// Indicator product over vertices `0..=aux`, vertex 0 being the anchor.
/// Labels use the 1-based `A_ij` notation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MotifPattern {
    pub label: &'static str,
    pub aux: usize,
    pub edges: &'static [(usize, usize)],
}

impl MotifPattern {
    fn holds(&self, pts: &[f64; 4], r: f64) -> bool {
        self.edges
            .iter()
            .all(|&(a, b)| circ_dist(pts[a], pts[b]) <= r)
    }
}

const A12: MotifPattern = MotifPattern {
    label: "A12",
    aux: 1,
    edges: &[(0, 1)],
};
const A12_A13: MotifPattern = MotifPattern {
    label: "A12A13",
    aux: 2,
    edges: &[(0, 1), (0, 2)],
};
const A12_A23: MotifPattern = MotifPattern {
    label: "A12A23",
    aux: 2,
    edges: &[(0, 1), (1, 2)],
};
const A12_A13_A23: MotifPattern = MotifPattern {
    label: "A12A13A23",
    aux: 2,
    edges: &[(0, 1), (0, 2), (1, 2)],
};
const A12_A23_A24: MotifPattern = MotifPattern {
    label: "A12A23A24",
    aux: 3,
    edges: &[(0, 1), (1, 2), (1, 3)],
};
const A12_A13_A34: MotifPattern = MotifPattern {
    label: "A12A13A34",
    aux: 3,
    edges: &[(0, 1), (0, 2), (2, 3)],
};
const A12_A13_A14: MotifPattern = MotifPattern {
    label: "A12A13A14",
    aux: 3,
    edges: &[(0, 1), (0, 2), (0, 3)],
};
const A12_A13_A23_A34: MotifPattern = MotifPattern {
    label: "A12A13A23A34",
    aux: 3,
    edges: &[(0, 1), (0, 2), (1, 2), (2, 3)],
};
const A12_A13_A23_A14: MotifPattern = MotifPattern {
    label: "A12A13A23A14",
    aux: 3,
    edges: &[(0, 1), (0, 2), (1, 2), (0, 3)],
};

impl MotifKind {
    /// The indicator product estimated for this motif.
    pub fn representative(&self) -> MotifPattern {
        match self {
            MotifKind::Edge => A12,
            MotifKind::Cherry => A12_A13,
            MotifKind::Path => A12_A23,
            MotifKind::Triangle => A12_A13_A23,
            MotifKind::ThreeEdgePath => A12_A23_A24,
            MotifKind::TrianglePlusEdge => A12_A13_A23_A34,
        }
    }

    /// All indicator products sharing this motif's conditional expectation
    /// (to leading order); the representative comes first.
    pub fn family(&self) -> Vec<MotifPattern> {
        match self {
            MotifKind::ThreeEdgePath => vec![A12_A23_A24, A12_A13_A34, A12_A13_A14],
            MotifKind::TrianglePlusEdge => vec![A12_A13_A23_A34, A12_A13_A23_A14],
            other => vec![other.representative()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub motif: MotifKind,
    pub pattern: &'static str,
    pub anchor_x: f64,
    pub r: f64,
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
    #[serde(skip)]
    pub hits: u64,
}

impl MomentEstimate {
    fn from_hits(
        motif: MotifKind,
        pattern: &MotifPattern,
        anchor_x: f64,
        r: f64,
        hits: u64,
        samples: u64,
        seed: u64,
    ) -> Self {
        let n = samples as f64;
        let p = hits as f64 / n;
        // plug-in sample variance of a 0/1 variable
        let var = if samples > 1 {
            p * (1.0 - p) * n / (n - 1.0)
        } else {
            0.0
        };
        Self {
            motif,
            pattern: pattern.label,
            anchor_x,
            r,
            mean: p,
            stderr: (var / n).sqrt(),
            samples,
            seed,
            hits,
        }
    }

    /// `sqrt(se_a^2 + se_b^2)`.
    pub fn combined_stderr(&self, other: &MomentEstimate) -> f64 {
        self.stderr.hypot(other.stderr)
    }
}

fn check_inputs(r: f64, samples: u64) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::SampleBudgetTooSmall {
            samples,
            min: MIN_SAMPLES,
        });
    }
    if !(r > 0.0 && r <= 0.5) {
        return Err(Error::RadiusOutOfRange {
            r,
            min: 0.0,
            max: 0.5,
        });
    }
    Ok(())
}

/// Counts replicates in which `pattern` holds, for each radius in `radii`,
/// using one shared set of draws.
pub fn count_pattern_hits(
    d: &PeriodicDensity,
    x: f64,
    radii: &[f64],
    pattern: &MotifPattern,
    samples: u64,
    seed: u64,
) -> Vec<u64> {
    let chunks = samples.div_ceil(CHUNK);
    let zero = || vec![0u64; radii.len()];
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, c);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut hits = zero();
            let mut pts = [x, 0.0, 0.0, 0.0];
            for _ in 0..count {
                for p in pts.iter_mut().skip(1).take(pattern.aux) {
                    *p = d.sample_point(&mut rng);
                }
                for (h, &r) in hits.iter_mut().zip(radii) {
                    *h += u64::from(pattern.holds(&pts, r));
                }
            }
            hits
        })
        .reduce(zero, |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        })
}

/// Estimates `E[motif | X_1 = x]` with the motif's representative pattern.
pub fn estimate_motif(
    d: &PeriodicDensity,
    x: f64,
    r: f64,
    motif: MotifKind,
    samples: u64,
    seed: u64,
) -> Result<MomentEstimate> {
    Ok(estimate_motif_radii(d, x, &[r], motif, samples, seed)?.remove(0))
}

/// Coupled estimates at several radii from one set of draws.
pub fn estimate_motif_radii(
    d: &PeriodicDensity,
    x: f64,
    radii: &[f64],
    motif: MotifKind,
    samples: u64,
    seed: u64,
) -> Result<Vec<MomentEstimate>> {
    for &r in radii {
        check_inputs(r, samples)?;
    }
    let pattern = motif.representative();
    let hits = count_pattern_hits(d, x, radii, &pattern, samples, seed);
    Ok(radii
        .iter()
        .zip(hits)
        .map(|(&r, h)| MomentEstimate::from_hits(motif, &pattern, x, r, h, samples, seed))
        .collect())
}

/// One estimate per family member, each from its own independent seed
/// `hash64(seed, member index)` at the same sample budget.
pub fn estimate_family(
    d: &PeriodicDensity,
    x: f64,
    r: f64,
    motif: MotifKind,
    samples: u64,
    seed: u64,
) -> Result<Vec<MomentEstimate>> {
    check_inputs(r, samples)?;
    Ok(motif
        .family()
        .iter()
        .enumerate()
        .map(|(j, pattern)| {
            let s = hash64(&[seed, j as u64]);
            let h = count_pattern_hits(d, x, &[r], pattern, samples, s)[0];
            MomentEstimate::from_hits(motif, pattern, x, r, h, samples, s)
        })
        .collect())
}

/// Estimates at each anchor with common random numbers. Anchors are meant
/// to straddle the seam: some in `[0, r)`, some in `[r, 1 - r]`, some in
/// `(1 - r, 1)`.
pub fn boundary_sweep(
    d: &PeriodicDensity,
    r: f64,
    motif: MotifKind,
    anchors: &[f64],
    samples: u64,
    seed: u64,
) -> Result<Vec<MomentEstimate>> {
    let covers = |pred: &dyn Fn(f64) -> bool| anchors.iter().any(|&a| pred(a));
    if !(covers(&|a| a < r) && covers(&|a| (r..=1.0 - r).contains(&a)) && covers(&|a| a > 1.0 - r))
    {
        log::warn!("boundary sweep anchors do not cover both sides of the seam");
    }
    anchors
        .iter()
        .map(|&x| estimate_motif(d, x, r, motif, samples, seed))
        .collect()
}
