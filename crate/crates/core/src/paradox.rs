//! Friendship index per node and the friendship paradox of a graph.

use serde::Serialize;

use crate::rgg::DegreeGraph;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParadoxResult {
    /// Friendship index per node id.
    pub delta: Vec<f64>,
    /// Mean of `delta`.
    pub f_n: f64,
    pub n_isolated: usize,
}

/// `Δ_i = (Σ_{j~i} d_j) / d_i − d_i`, and 0 for an isolated node.
///
/// The numerator and `d_i` are exact integers; the division is the only
/// rounding step.
pub fn friendship_index<G: DegreeGraph + ?Sized>(g: &G, i: usize) -> f64 {
    let d = g.degree(i);
    if d == 0 {
        return 0.0;
    }
    g.neighbor_degree_sum(i) as f64 / d as f64 - d as f64
}

/// `F_n = (1/n) Σ Δ_i`, accumulated with Neumaier compensation in the
/// graph's visit order (sorted rank for circular RGGs).
pub fn friendship_paradox<G: DegreeGraph + ?Sized>(g: &G) -> ParadoxResult {
    let n = g.node_count();
    let mut delta = vec![0.0; n];
    let mut sum = NeumaierSum::default();
    let mut n_isolated = 0;
    for i in g.visit_order() {
        if g.degree(i) == 0 {
            n_isolated += 1;
        }
        let v = friendship_index(g, i);
        delta[i] = v;
        sum.add(v);
    }
    let f_n = if n == 0 { 0.0 } else { sum.value() / n as f64 };
    ParadoxResult {
        delta,
        f_n,
        n_isolated,
    }
}

/// Compensated summation (Kahan-Babuška-Neumaier).
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        for v in iter {
            s.add(v);
        }
        s
    }
}
