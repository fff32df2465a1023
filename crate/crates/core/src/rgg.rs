//! Circular random geometric graphs.
//!
//! Nodes live on the circle `[0, 1)` and are joined when their arc distance
//! is at most the radius. Every metric ball on the circle is an arc, so in
//! sorted order each neighbourhood is a contiguous run of ranks (possibly
//! wrapping past the seam). [`build_graph`] finds these runs with two
//! monotone pointers after one sort and never materialises the edge list;
//! [`naive_adjacency`] is the quadratic reference it is checked against.
//!
//! Both paths evaluate the same floating-point predicate
//! `min(|x - y|, 1 - |x - y|) <= r`, so ties resolve identically.

use std::io::Write;

use crate::error::{Error, Result};

/// Largest `n` the quadratic oracle accepts.
pub const ORACLE_MAX_N: usize = 20_000;

/// Arc distance on the unit circle.
#[inline]
pub fn circ_dist(x: f64, y: f64) -> f64 {
    let d = (x - y).abs();
    d.min(1.0 - d)
}

/// Node coordinates on the circle together with their sorted order.
#[derive(Debug, Clone, PartialEq)]
pub struct NodePositions {
    x: Vec<f64>,
    sorted_order: Vec<usize>,
}

impl NodePositions {
    /// Accepts values in `[0, 1]`; an exact 1.0 is the same point as 0.0.
    pub fn new(mut x: Vec<f64>) -> Result<Self> {
        for v in &mut x {
            if !(0.0..=1.0).contains(v) {
                return Err(Error::InvalidParameter(format!(
                    "position {v} is outside [0, 1]"
                )));
            }
            if *v == 1.0 {
                *v = 0.0;
            }
        }
        let mut sorted_order: Vec<usize> = (0..x.len()).collect();
        sorted_order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
        Ok(Self { x, sorted_order })
    }

    /// Positions `k / n` for `k = 0..n`.
    pub fn equispaced(n: usize) -> Self {
        Self::new((0..n).map(|k| k as f64 / n as f64).collect())
            .expect("equispaced points lie in [0, 1)")
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn sorted_order(&self) -> &[usize] {
        &self.sorted_order
    }

    /// All positions shifted by `delta` around the circle.
    pub fn rotated(&self, delta: f64) -> Self {
        Self::new(
            self.x
                .iter()
                .map(|&v| crate::density::wrap_unit(v + delta))
                .collect(),
        )
        .expect("rotation stays on the circle")
    }
}

/// Anything that can report degrees and neighbour-degree sums.
pub trait DegreeGraph {
    fn node_count(&self) -> usize;
    fn degree(&self, i: usize) -> usize;
    /// `sum_{j ~ i} d_j`.
    fn neighbor_degree_sum(&self, i: usize) -> u64;
    /// Order in which per-node statistics are accumulated.
    fn visit_order(&self) -> Box<dyn Iterator<Item = usize> + '_> {
        Box::new(0..self.node_count())
    }
}

/// Immutable circular RGG stored as per-rank neighbour windows.
#[derive(Debug, Clone)]
pub struct CircularRGG {
    positions: NodePositions,
    radius: f64,
    /// Degree per node id.
    degrees: Vec<usize>,
    /// Rank of each node id in sorted order.
    rank: Vec<usize>,
    /// Start of each rank's window in the doubled rank array.
    window_lo: Vec<usize>,
    /// Window length, self included.
    window_len: Vec<usize>,
    /// Prefix sums of sorted-order degrees over the doubled array, length 2n + 1.
    degree_prefix: Vec<u64>,
}

/// Builds the graph with the sorted sweep in `O(n log n)` time and `O(n)`
/// extra memory.
pub fn build_graph(positions: NodePositions, r: f64) -> Result<CircularRGG> {
    if !(0.0..=0.5).contains(&r) {
        return Err(Error::RadiusOutOfRange {
            r,
            min: 0.0,
            max: 0.5,
        });
    }
    let n = positions.len();
    let order = positions.sorted_order();
    let s: Vec<f64> = order.iter().map(|&i| positions.x()[i]).collect();
    let mut rank = vec![0usize; n];
    for (k, &i) in order.iter().enumerate() {
        rank[i] = k;
    }

    // Arc lengths along the sorted circle for unrolled rank j (may be
    // negative or >= n). Computed with exactly the same operations as
    // circ_dist so threshold ties match the oracle.
    let forward_arc = |k: usize, j: isize| -> f64 {
        if (j as usize) < n {
            (s[j as usize] - s[k]).abs()
        } else {
            1.0 - (s[k] - s[j as usize - n]).abs()
        }
    };
    let backward_arc = |k: usize, j: isize| -> f64 {
        if j >= 0 {
            (s[k] - s[j as usize]).abs()
        } else {
            1.0 - (s[(j + n as isize) as usize] - s[k]).abs()
        }
    };

    let mut window_lo = vec![0usize; n];
    let mut window_len = vec![0usize; n];
    let mut deg_sorted = vec![0usize; n];
    let ni = n as isize;
    let mut fwd: isize = 0;
    let mut bwd: isize = 1 - ni;
    for k in 0..n {
        let ki = k as isize;
        fwd = fwd.max(ki);
        while fwd + 1 < ki + ni && forward_arc(k, fwd + 1) <= r {
            fwd += 1;
        }
        bwd = bwd.max(ki - (ni - 1));
        while bwd < ki && backward_arc(k, bwd) > r {
            bwd += 1;
        }
        // a window reaching all the way round counts each node once, which
        // also folds an antipodal pair at r = 0.5 into a single edge
        let span = ((fwd - ki) + (ki - bwd)).min(ni - 1) as usize;
        window_lo[k] = if bwd < 0 {
            (bwd + ni) as usize
        } else {
            bwd as usize
        };
        window_len[k] = span + 1;
        deg_sorted[k] = span;
    }

    let mut degree_prefix = Vec::with_capacity(2 * n + 1);
    degree_prefix.push(0u64);
    let mut acc = 0u64;
    for t in 0..2 * n {
        acc += deg_sorted[t % n] as u64;
        degree_prefix.push(acc);
    }

    let degrees = (0..n).map(|i| deg_sorted[rank[i]]).collect();
    Ok(CircularRGG {
        positions,
        radius: r,
        degrees,
        rank,
        window_lo,
        window_len,
        degree_prefix,
    })
}

impl CircularRGG {
    pub fn positions(&self) -> &NodePositions {
        &self.positions
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn rank(&self, i: usize) -> usize {
        self.rank[i]
    }

    /// `(lo, hi)` inclusive bounds of the rank window of node `i` in the
    /// doubled rank array; the window contains `i` itself.
    pub fn window(&self, i: usize) -> (usize, usize) {
        let k = self.rank[i];
        (
            self.window_lo[k],
            self.window_lo[k] + self.window_len[k] - 1,
        )
    }

    pub fn degree_prefix(&self) -> &[u64] {
        &self.degree_prefix
    }

    pub fn edge_count(&self) -> usize {
        self.degrees.iter().sum::<usize>() / 2
    }

    /// Neighbours of node `i` in circular sorted order, self excluded.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let n = self.len();
        let (lo, hi) = self.window(i);
        let order = self.positions.sorted_order();
        (lo..=hi)
            .map(move |t| order[t % n])
            .filter(move |&j| j != i)
    }

    /// Edges `(u, v)` with `rank(u) < rank(v)`, ordered by `(rank(u), rank(v))`.
    pub fn edges_by_rank(&self) -> Vec<(usize, usize)> {
        let order = self.positions.sorted_order();
        let n = self.len();
        let mut out = Vec::with_capacity(self.edge_count());
        for k in 0..n {
            let lo = self.window_lo[k];
            for t in lo..lo + self.window_len[k] {
                let m = t % n;
                if m > k {
                    out.push((m, k));
                }
            }
        }
        out.sort_unstable_by_key(|&(m, k)| (k, m));
        out.into_iter().map(|(m, k)| (order[k], order[m])).collect()
    }

    /// Edges as `(min id, max id)` pairs, sorted lexicographically.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .edges_by_rank()
            .into_iter()
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        e.sort_unstable();
        e
    }

    /// Node table with columns `node,position,degree`.
    pub fn write_nodes_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["node", "position", "degree"])?;
        for (i, (&x, &d)) in self.positions.x().iter().zip(&self.degrees).enumerate() {
            wtr.write_record([i.to_string(), x.to_string(), d.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Edge table with columns `u,v`, oriented and ordered by sorted rank.
    pub fn write_edges_csv<W: Write>(&self, w: W) -> Result<()> {
        if self.len() > ORACLE_MAX_N {
            return Err(Error::TooLargeForOracle {
                n: self.len(),
                limit: ORACLE_MAX_N,
            });
        }
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["u", "v"])?;
        for (u, v) in self.edges_by_rank() {
            wtr.write_record([u.to_string(), v.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

impl DegreeGraph for CircularRGG {
    fn node_count(&self) -> usize {
        self.len()
    }

    fn degree(&self, i: usize) -> usize {
        self.degrees[i]
    }

    /// `O(1)` via the doubled prefix sums; the window includes `i` itself,
    /// whose own degree is removed.
    fn neighbor_degree_sum(&self, i: usize) -> u64 {
        let k = self.rank[i];
        let lo = self.window_lo[k];
        let hi = lo + self.window_len[k];
        self.degree_prefix[hi] - self.degree_prefix[lo] - self.degrees[i] as u64
    }

    fn visit_order(&self) -> Box<dyn Iterator<Item = usize> + '_> {
        Box::new(self.positions.sorted_order().iter().copied())
    }
}

/// Output of the quadratic oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaiveGraph {
    pub degrees: Vec<usize>,
    /// `(u, v)` with `u < v`, sorted lexicographically.
    pub edges: Vec<(usize, usize)>,
}

/// Brute-force pairwise construction, for testing only.
pub fn naive_adjacency(p: &NodePositions, r: f64) -> Result<NaiveGraph> {
    let n = p.len();
    if n > ORACLE_MAX_N {
        return Err(Error::TooLargeForOracle {
            n,
            limit: ORACLE_MAX_N,
        });
    }
    if !(0.0..=0.5).contains(&r) {
        return Err(Error::RadiusOutOfRange {
            r,
            min: 0.0,
            max: 0.5,
        });
    }
    let x = p.x();
    let mut degrees = vec![0usize; n];
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if circ_dist(x[u], x[v]) <= r {
                degrees[u] += 1;
                degrees[v] += 1;
                edges.push((u, v));
            }
        }
    }
    Ok(NaiveGraph { degrees, edges })
}

/// General undirected simple graph held as adjacency lists.
#[derive(Debug, Clone)]
pub struct AdjacencyGraph {
    adj: Vec<Vec<usize>>,
    order: Option<Vec<usize>>,
}

impl AdjacencyGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self loop at node {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { adj, order: None })
    }

    /// Accumulate per-node statistics in `order` instead of id order.
    pub fn with_visit_order(mut self, order: Vec<usize>) -> Result<Self> {
        let n = self.adj.len();
        let mut seen = vec![false; n];
        for &i in &order {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidParameter(
                    "visit order is not a permutation".into(),
                ));
            }
        }
        if order.len() != n {
            return Err(Error::InvalidParameter(
                "visit order is not a permutation".into(),
            ));
        }
        self.order = Some(order);
        Ok(self)
    }

    /// `K_{1,m}`: node 0 is the centre.
    pub fn star(m: usize) -> Self {
        let edges: Vec<_> = (1..=m).map(|j| (0, j)).collect();
        Self::from_edges(m + 1, &edges).expect("star edges are valid")
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }
}

impl From<&NaiveGraph> for AdjacencyGraph {
    fn from(g: &NaiveGraph) -> Self {
        Self::from_edges(g.degrees.len(), &g.edges).expect("oracle edges are valid")
    }
}

impl DegreeGraph for AdjacencyGraph {
    fn node_count(&self) -> usize {
        self.adj.len()
    }

    fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    fn neighbor_degree_sum(&self, i: usize) -> u64 {
        self.adj[i].iter().map(|&j| self.adj[j].len() as u64).sum()
    }

    fn visit_order(&self) -> Box<dyn Iterator<Item = usize> + '_> {
        match &self.order {
            Some(o) => Box::new(o.iter().copied()),
            None => Box::new(0..self.adj.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::PeriodicDensity;
    use crate::rng::stream;

    fn pos(x: &[f64]) -> NodePositions {
        NodePositions::new(x.to_vec()).unwrap()
    }

    #[test]
    fn circular_distance() {
        assert!((circ_dist(0.1, 0.9) - 0.2).abs() < 1e-15);
        assert_eq!(circ_dist(0.4, 0.4), 0.0);
        assert_eq!(circ_dist(0.25, 0.75), 0.5);
    }

    #[test]
    fn exact_one_reduces_to_zero() {
        let p = pos(&[1.0, 0.5]);
        assert_eq!(p.x(), &[0.0, 0.5]);
        assert!(NodePositions::new(vec![1.5]).is_err());
        assert!(NodePositions::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn small_hand_built_graphs() {
        let g = build_graph(pos(&[0.0, 0.1, 0.5]), 0.15).unwrap();
        assert_eq!(g.degrees(), &[1, 1, 0]);

        let g = build_graph(pos(&[0.0, 0.25, 0.5, 0.75]), 0.25).unwrap();
        assert_eq!(g.degrees(), &[2, 2, 2, 2]);

        let g = build_graph(pos(&[0.1, 0.2]), 0.1).unwrap();
        assert_eq!(g.edge_list(), vec![(0, 1)]);
        assert_eq!(
            naive_adjacency(g.positions(), 0.1).unwrap().edges,
            vec![(0, 1)]
        );
    }

    #[test]
    fn three_close_points_form_a_triangle() {
        let p = pos(&[0.30, 0.31, 0.32]);
        let naive = naive_adjacency(&p, 0.05).unwrap();
        assert_eq!(naive.degrees, vec![2, 2, 2]);
        assert_eq!(naive.edges, vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(build_graph(p, 0.05).unwrap().degrees(), &[2, 2, 2]);
    }

    #[test]
    fn radius_is_validated() {
        assert!(matches!(
            build_graph(pos(&[0.1]), 0.6),
            Err(Error::RadiusOutOfRange { .. })
        ));
        assert!(build_graph(pos(&[0.1]), -0.1).is_err());
        assert!(build_graph(pos(&[0.1]), f64::NAN).is_err());
    }

    #[test]
    fn oracle_guard() {
        let p = NodePositions::new(vec![0.5; ORACLE_MAX_N + 1]).unwrap();
        assert!(matches!(
            naive_adjacency(&p, 0.1),
            Err(Error::TooLargeForOracle { .. })
        ));
    }

    #[test]
    fn antipodal_pair_at_half_is_one_edge() {
        let g = build_graph(pos(&[0.1, 0.6]), 0.5).unwrap();
        assert_eq!(g.degrees(), &[1, 1]);
        assert_eq!(g.edge_list(), vec![(0, 1)]);
        let g = build_graph(pos(&[0.0, 0.25, 0.5, 0.75]), 0.5).unwrap();
        assert_eq!(g.degrees(), &[3, 3, 3, 3]);
        assert_eq!(g.edge_count(), 6);
    }

    #[test]
    fn hand_built_ties_agree_with_oracle() {
        let p = pos(&[0.0, 0.5]);
        assert_eq!(naive_adjacency(&p, 0.5).unwrap().edges, vec![(0, 1)]);
        assert_eq!(build_graph(p, 0.5).unwrap().edge_list(), vec![(0, 1)]);

        // 1 - 2/3 rounds to just above 1/3, so the wrap-around pair misses
        // r = 1/3 by one ulp; the next float up closes the triangle
        for (r, edges) in [(1.0 / 3.0, 2), ((1.0f64 / 3.0).next_up(), 3)] {
            let p = NodePositions::equispaced(3);
            let naive = naive_adjacency(&p, r).unwrap();
            let g = build_graph(p, r).unwrap();
            assert_eq!(naive.edges.len(), edges);
            assert_eq!(g.edge_list(), naive.edges);
            assert_eq!(g.degrees(), naive.degrees.as_slice());
        }
    }

    #[test]
    fn full_radius_connects_everything_once() {
        let p = PeriodicDensity::uniform().sample(301, &mut stream(3, 0));
        let g = build_graph(p, 0.5).unwrap();
        assert!(g.degrees().iter().all(|&d| d == 300));
    }

    #[test]
    fn duplicates_are_mutual_neighbours() {
        let g = build_graph(pos(&[0.3, 0.3, 0.3, 0.9]), 0.0).unwrap();
        assert_eq!(g.degrees(), &[2, 2, 2, 0]);
    }

    #[test]
    fn isolated_and_single_nodes() {
        let g = build_graph(pos(&[0.42]), 0.3).unwrap();
        assert_eq!(g.degrees(), &[0]);
        assert_eq!(g.neighbor_degree_sum(0), 0);
        let g = build_graph(pos(&[0.0, 0.5]), 0.1).unwrap();
        assert_eq!(g.neighbor_degree_sum(1), 0);
    }

    #[test]
    fn star_neighbour_sum_on_adjacency_graph() {
        let s = AdjacencyGraph::star(3);
        assert_eq!(s.neighbor_degree_sum(0), 3);
        assert_eq!(s.neighbor_degree_sum(1), 3);
    }

    #[test]
    fn sweep_matches_oracle_on_von_mises_sample() {
        let d = PeriodicDensity::von_mises(2.0, 0.0).unwrap();
        let p = d.sample(500, &mut stream(8, 0));
        let naive = naive_adjacency(&p, 0.05).unwrap();
        let g = build_graph(p, 0.05).unwrap();
        assert_eq!(g.degrees(), naive.degrees.as_slice());
        assert_eq!(g.edge_list(), naive.edges);
    }

    #[test]
    fn windows_are_contiguous_neighbourhoods() {
        let mut rng = stream(77, 0);
        for inst in 0..100u64 {
            use rand::Rng;
            let n = rng.random_range(1..=2000usize);
            let r = rng.random_range(0.0..0.5f64).powi(2) * 2.0;
            let d = if inst % 2 == 0 {
                PeriodicDensity::uniform()
            } else {
                PeriodicDensity::von_mises(1.5, 1.0).unwrap()
            };
            let p = d.sample(n, &mut stream(1000 + inst, 0));
            let naive = naive_adjacency(&p, r).unwrap();
            let g = build_graph(p, r).unwrap();
            assert_eq!(g.degrees(), naive.degrees.as_slice(), "instance {inst}");
            let adj = AdjacencyGraph::from(&naive);
            for i in (0..n).step_by(37) {
                let mut from_window: Vec<usize> = g.neighbors(i).collect();
                from_window.sort_unstable();
                assert_eq!(from_window, adj.neighbors(i), "instance {inst} node {i}");
                assert_eq!(g.neighbor_degree_sum(i), adj.neighbor_degree_sum(i));
            }
        }
    }

    #[test]
    fn degree_sum_is_even_and_prefix_consistent() {
        let p = PeriodicDensity::uniform().sample(1000, &mut stream(4, 0));
        let g = build_graph(p, 0.02).unwrap();
        assert_eq!(g.degrees().iter().sum::<usize>() % 2, 0);
        let prefix = g.degree_prefix();
        assert_eq!(prefix.len(), 2 * g.len() + 1);
        assert_eq!(prefix[2 * g.len()], 2 * prefix[g.len()]);
    }

    #[test]
    fn csv_dumps() {
        let g = build_graph(pos(&[0.0, 0.1, 0.5]), 0.15).unwrap();
        let mut nodes = Vec::new();
        g.write_nodes_csv(&mut nodes).unwrap();
        assert_eq!(
            String::from_utf8(nodes).unwrap(),
            "node,position,degree\n0,0,1\n1,0.1,1\n2,0.5,0\n"
        );
        let mut edges = Vec::new();
        g.write_edges_csv(&mut edges).unwrap();
        assert_eq!(String::from_utf8(edges).unwrap(), "u,v\n0,1\n");
    }
}
