//! Maximum flow with real capacities (Dinic's algorithm).
//!
//! Used for transport-type feasibility questions: the largest partial
//! coupling supported on a set of allowed cells, and Strassen-type
//! comparisons of measures.

use std::collections::VecDeque;

const EPS: f64 = 1e-15;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: f64,
}

/// A flow network; edges are stored in forward/backward pairs.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    adj: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    original: Vec<f64>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork { adj: vec![Vec::new(); nodes], edges: Vec::new(), original: Vec::new() }
    }

    /// Adds `from -> to` with capacity `cap`; returns the edge id.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: f64) -> usize {
        let id = self.edges.len();
        self.adj[from].push(id);
        self.edges.push(Edge { to, cap });
        self.original.push(cap);
        self.adj[to].push(id + 1);
        self.edges.push(Edge { to: from, cap: 0.0 });
        self.original.push(0.0);
        id
    }

    /// Flow currently carried by edge `id`.
    pub fn flow(&self, id: usize) -> f64 {
        (self.edges[id ^ 1].cap - self.original[id ^ 1]).max(0.0)
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let n = self.adj.len();
        let mut total = 0.0;
        loop {
            let mut level = vec![usize::MAX; n];
            level[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &e in &self.adj[u] {
                    let Edge { to, cap } = self.edges[e];
                    if cap > EPS && level[to] == usize::MAX {
                        level[to] = level[u] + 1;
                        q.push_back(to);
                    }
                }
            }
            if level[t] == usize::MAX {
                return total;
            }
            let mut it = vec![0usize; n];
            loop {
                let pushed = self.augment(s, t, f64::INFINITY, &level, &mut it);
                if pushed <= EPS {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn augment(&mut self, u: usize, t: usize, limit: f64, level: &[usize], it: &mut [usize]) -> f64 {
        if u == t {
            return limit;
        }
        while it[u] < self.adj[u].len() {
            let e = self.adj[u][it[u]];
            let Edge { to, cap } = self.edges[e];
            if cap > EPS && level[to] == level[u] + 1 {
                let got = self.augment(to, t, limit.min(cap), level, it);
                if got > EPS {
                    self.edges[e].cap -= got;
                    self.edges[e ^ 1].cap += got;
                    return got;
                }
            }
            it[u] += 1;
        }
        0.0
    }
}

/// Largest partial transport between `a` (rows) and `b` (columns) using only
/// cells where `allowed(i, j)`. Returns the value and the cell masses.
pub fn max_partial_coupling(
    a: &[f64],
    b: &[f64],
    allowed: impl Fn(usize, usize) -> bool,
) -> (f64, Vec<Vec<f64>>) {
    let (n, m) = (a.len(), b.len());
    let (s, t) = (n + m, n + m + 1);
    let mut g = FlowNetwork::new(n + m + 2);
    for (i, &ai) in a.iter().enumerate() {
        g.add_edge(s, i, ai);
    }
    for (j, &bj) in b.iter().enumerate() {
        g.add_edge(n + j, t, bj);
    }
    let mut cells = Vec::new();
    for i in 0..n {
        for j in 0..m {
            if allowed(i, j) {
                cells.push((i, j, g.add_edge(i, n + j, f64::INFINITY)));
            }
        }
    }
    let value = g.max_flow(s, t);
    let mut plan = vec![vec![0.0; m]; n];
    for (i, j, e) in cells {
        plan[i][j] = g.flow(e);
    }
    (value, plan)
}
