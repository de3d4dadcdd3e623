//! Box distance between finite pm-spaces.
//!
//! A pair of parameters of two finite spaces splits `[0, 1]` into cells
//! `(x, y)` whose lengths form a coupling `pi`. A non-exceptional set is then
//! a union of cells that are pairwise compatible, i.e. a clique `S` of
//!
//! ```text
//! (x, y) ~ (x', y')  iff  |d_X(x, x') - d_Y(y, y')| <= eps
//! ```
//!
//! and for a fixed clique the best coupling is a maximum flow from `m_X` to
//! `m_Y` through the cells of `S`. Writing `f(eps)` for the best value over
//! cliques, the box distance is `min_k max(e_k, 1 - f(e_k))` over the
//! distinct discrepancies `e_k`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::max_partial_coupling;
use crate::space::{Coupling, FinitePmSpace};
use crate::Certificate;

/// Largest `|X| * |Y|` accepted by [`box_exact_small`].
pub const BOX_EXACT_LIMIT: usize = 12;

const RESTARTS: usize = 32;
const MAX_THRESHOLDS: usize = 64;
const SEED: u64 = 0x00b0_7d15;

#[derive(Debug, Clone, Serialize)]
pub struct BoxEstimate {
    pub lower: f64,
    pub upper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_coupling: Option<Coupling>,
    pub certificate: Certificate,
}

struct Cells<'a> {
    x: &'a FinitePmSpace,
    y: &'a FinitePmSpace,
}

impl Cells<'_> {
    fn count(&self) -> usize {
        self.x.len() * self.y.len()
    }

    fn split(&self, c: usize) -> (usize, usize) {
        (c / self.y.len(), c % self.y.len())
    }

    #[inline]
    fn disc(&self, a: usize, b: usize) -> f64 {
        let (i, j) = self.split(a);
        let (k, l) = self.split(b);
        (self.x.dist(i, k) - self.y.dist(j, l)).abs()
    }

    /// Largest coupled mass through `cells`, with the plan.
    fn flow(&self, cells: &[usize]) -> (f64, Vec<Vec<f64>>) {
        let m = self.y.len();
        let mut allowed = vec![false; self.count()];
        for &c in cells {
            allowed[c] = true;
        }
        max_partial_coupling(self.x.masses(), self.y.masses(), |i, j| allowed[i * m + j])
    }
}

/// Completes a partial transport plan to a coupling (north-west corner on
/// the residual masses).
fn complete_plan(x: &FinitePmSpace, y: &FinitePmSpace, mut plan: Vec<Vec<f64>>) -> Coupling {
    let mut row: Vec<f64> = (0..x.len()).map(|i| (x.mass(i) - plan[i].iter().sum::<f64>()).max(0.0)).collect();
    let mut col: Vec<f64> =
        (0..y.len()).map(|j| (y.mass(j) - plan.iter().map(|r| r[j]).sum::<f64>()).max(0.0)).collect();
    let (mut i, mut j) = (0, 0);
    while i < x.len() && j < y.len() {
        let t = row[i].min(col[j]);
        plan[i][j] += t;
        row[i] -= t;
        col[j] -= t;
        if row[i] <= col[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    Coupling::from_raw(plan)
}

/// Exact box distance for `|X| * |Y| <= 12`, by enumerating cliques of the
/// compatibility graph at every distinct discrepancy.
pub fn box_exact_small(x: &FinitePmSpace, y: &FinitePmSpace) -> Result<BoxEstimate> {
    let cells = Cells { x, y };
    let nc = cells.count();
    if nc > BOX_EXACT_LIMIT {
        return Err(Error::size("|X|*|Y|", nc, BOX_EXACT_LIMIT));
    }
    let mut thresholds = vec![0.0];
    for a in 0..nc {
        for b in (a + 1)..nc {
            thresholds.push(cells.disc(a, b));
        }
    }
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    let full = 1usize << nc;
    let mut clique = vec![false; full];
    let mut best = (1.0_f64, None);
    for &e in &thresholds {
        if e >= best.0 {
            break;
        }
        let adj: Vec<usize> = (0..nc)
            .map(|a| (0..nc).filter(|&b| cells.disc(a, b) <= e).fold(0, |m, b| m | (1 << b)))
            .collect();
        clique[0] = true;
        let mut f = (0.0_f64, Vec::new());
        for s in 1..full {
            let low = s.trailing_zeros() as usize;
            let rest = s & (s - 1);
            clique[s] = clique[rest] && adj[low] & rest == rest;
            if !clique[s] || (0..nc).any(|c| s & (1 << c) == 0 && adj[c] & s == s) {
                continue;
            }
            let members: Vec<usize> = (0..nc).filter(|&c| s & (1 << c) != 0).collect();
            let (v, plan) = cells.flow(&members);
            if v > f.0 {
                f = (v, plan);
            }
        }
        let value = e.max(1.0 - f.0);
        if value < best.0 {
            best = (value, Some(f.1));
        }
    }
    let value = best.0.max(0.0);
    Ok(BoxEstimate {
        lower: value,
        upper: value,
        witness_coupling: best.1.map(|p| complete_plan(x, y, p)),
        certificate: Certificate::Exact,
    })
}

/// Distance distribution `d_#(m (x) m)` as sorted `(value, mass)` atoms.
pub fn distance_distribution(x: &FinitePmSpace) -> Vec<(f64, f64)> {
    let n = x.len();
    let mut v: Vec<(f64, f64)> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            v.push((x.dist(i, j), x.mass(i) * x.mass(j)));
        }
    }
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (d, m) in v {
        match out.last_mut() {
            Some(last) if last.0 == d => last.1 += m,
            _ => out.push((d, m)),
        }
    }
    out
}

/// Largest mass of a partial coupling of two line measures moving no atom
/// by more than `e`. Greedy matching in sorted order is optimal here because
/// the compatible windows have nondecreasing endpoints.
fn coupled_within(a: &[(f64, f64)], b: &[(f64, f64)], e: f64) -> f64 {
    let mut rest: Vec<f64> = b.iter().map(|p| p.1).collect();
    let mut start = 0;
    let mut total = 0.0;
    for &(s, mut need) in a {
        while start < b.len() && b[start].0 < s - e {
            start += 1;
        }
        let mut j = start;
        while need > 0.0 && j < b.len() && b[j].0 <= s + e {
            let t = need.min(rest[j]);
            rest[j] -= t;
            need -= t;
            total += t;
            j += 1;
        }
    }
    total
}

/// Lower bound from distance distributions.
///
/// If `box(X, Y) < eps`, the parameter pair couples the two distance
/// distributions so that mass at least `(1 - eps)^2` moves by at most `eps`.
/// The bound is the least `eps` compatible with that.
pub fn box_lower(x: &FinitePmSpace, y: &FinitePmSpace) -> f64 {
    let a = distance_distribution(x);
    let b = distance_distribution(y);
    let mut es: Vec<f64> = a.iter().flat_map(|p| b.iter().map(move |q| (p.0 - q.0).abs())).collect();
    es.push(0.0);
    es.sort_by(f64::total_cmp);
    es.dedup();
    // g(k) = 1 - sqrt(F(e_k)) is nonincreasing, e_k increasing: find the crossing.
    let g = |k: usize| 1.0 - coupled_within(&a, &b, es[k]).min(1.0).sqrt();
    let (mut lo, mut hi) = (0usize, es.len() - 1);
    if es[0] >= g(0) {
        return es[0].min(1.0);
    }
    if es[hi] < g(hi) {
        return g(hi).min(1.0);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if es[mid] >= g(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    es[hi].min(g(lo)).clamp(0.0, 1.0)
}

fn nw_support(x: &FinitePmSpace, y: &FinitePmSpace, ox: &[usize], oy: &[usize]) -> Vec<usize> {
    let mut row: Vec<f64> = ox.iter().map(|&i| x.mass(i)).collect();
    let mut col: Vec<f64> = oy.iter().map(|&j| y.mass(j)).collect();
    let (mut a, mut b) = (0, 0);
    let mut out = Vec::new();
    while a < ox.len() && b < oy.len() {
        out.push(ox[a] * y.len() + oy[b]);
        let t = row[a].min(col[b]);
        row[a] -= t;
        col[b] -= t;
        if row[a] <= col[b] {
            a += 1;
        } else {
            b += 1;
        }
    }
    out
}

fn eccentricity_order(x: &FinitePmSpace) -> Vec<usize> {
    let ecc: Vec<f64> = (0..x.len()).map(|i| (0..x.len()).map(|j| x.mass(j) * x.dist(i, j)).sum()).collect();
    let mut o: Vec<usize> = (0..x.len()).collect();
    o.sort_by(|&a, &b| ecc[a].total_cmp(&ecc[b]).then(a.cmp(&b)));
    o
}

fn mass_order(x: &FinitePmSpace) -> Vec<usize> {
    let mut o: Vec<usize> = (0..x.len()).collect();
    o.sort_by(|&a, &b| x.mass(b).total_cmp(&x.mass(a)).then(a.cmp(&b)));
    o
}

/// Turns a starting support into a clique at threshold `e` and improves it.
fn improve_clique(cells: &Cells, start: &[usize], e: f64) -> (f64, Vec<Vec<f64>>) {
    let nc = cells.count();
    let mut s: Vec<usize> = start.to_vec();
    s.sort_unstable();
    s.dedup();
    // greedy removal by number of conflicts
    loop {
        let conflicts: Vec<usize> =
            s.iter().map(|&a| s.iter().filter(|&&b| cells.disc(a, b) > e).count()).collect();
        let (worst, &most) = conflicts.iter().enumerate().max_by_key(|p| (*p.1, std::cmp::Reverse(p.0))).unwrap_or((0, &0));
        if most == 0 {
            break;
        }
        s.remove(worst);
    }
    let cap = |c: usize| {
        let (i, j) = cells.split(c);
        cells.x.mass(i).min(cells.y.mass(j))
    };
    let augment = |s: &mut Vec<usize>| {
        let mut rest: Vec<usize> = (0..nc).filter(|c| !s.contains(c)).collect();
        rest.sort_by(|&a, &b| cap(b).total_cmp(&cap(a)).then(a.cmp(&b)));
        for c in rest {
            if s.iter().all(|&b| cells.disc(c, b) <= e) {
                s.push(c);
            }
        }
    };
    augment(&mut s);
    let mut best = cells.flow(&s);
    // 1-swap local search: add a cell with one conflict, drop the conflict.
    let mut improved = true;
    let mut rounds = 0;
    while improved && rounds < 4 && best.0 < 1.0 - 1e-12 {
        improved = false;
        rounds += 1;
        for c in 0..nc {
            if s.contains(&c) {
                continue;
            }
            let clash: Vec<usize> = s.iter().copied().filter(|&b| cells.disc(c, b) > e).collect();
            if clash.len() != 1 {
                continue;
            }
            let mut t: Vec<usize> = s.iter().copied().filter(|&b| b != clash[0]).collect();
            t.push(c);
            augment(&mut t);
            let cand = cells.flow(&t);
            if cand.0 > best.0 + 1e-12 {
                s = t;
                best = cand;
                improved = true;
            }
        }
    }
    best
}

/// Upper bound by heuristic clique search over sampled thresholds.
///
/// Every reported value is realized by an explicit coupling and clique, so it
/// never falls below the true box distance.
pub fn box_upper(x: &FinitePmSpace, y: &FinitePmSpace) -> BoxEstimate {
    let cells = Cells { x, y };
    let nc = cells.count();
    let mut starts: Vec<Vec<usize>> = Vec::new();
    if x.len() == y.len() {
        starts.push((0..x.len()).map(|i| i * y.len() + i).collect());
    }
    starts.push(nw_support(x, y, &mass_order(x), &mass_order(y)));
    starts.push(nw_support(x, y, &eccentricity_order(x), &eccentricity_order(y)));
    if nc <= 100 {
        starts.push((0..nc).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut ox: Vec<usize> = (0..x.len()).collect();
    let mut oy: Vec<usize> = (0..y.len()).collect();
    while starts.len() < RESTARTS {
        ox.shuffle(&mut rng);
        oy.shuffle(&mut rng);
        starts.push(nw_support(x, y, &ox, &oy));
    }

    let dx: Vec<f64> = std::iter::once(0.0).chain(x.distinct_distances()).collect();
    let dy: Vec<f64> = std::iter::once(0.0).chain(y.distinct_distances()).collect();
    let mut es: Vec<f64> = dx.iter().flat_map(|a| dy.iter().map(move |b| (a - b).abs())).collect();
    es.sort_by(f64::total_cmp);
    es.dedup();
    if es.len() > MAX_THRESHOLDS {
        let k = es.len() - 1;
        es = (0..MAX_THRESHOLDS).map(|t| es[t * k / (MAX_THRESHOLDS - 1)]).collect();
    }
    // each start is a full clique at its own widest discrepancy
    for st in &starts[..starts.len().min(4)] {
        let own = st.iter().flat_map(|&a| st.iter().map(move |&b| (a, b))).map(|(a, b)| cells.disc(a, b)).fold(0.0, f64::max);
        es.push(own);
    }
    es.sort_by(f64::total_cmp);
    es.dedup();

    let mut best = (1.0_f64, None);
    for &e in &es {
        if e >= best.0 {
            break;
        }
        for st in &starts {
            let (v, plan) = improve_clique(&cells, st, e);
            let value = e.max(1.0 - v);
            if value < best.0 {
                best = (value, Some(plan));
            }
            if v >= 1.0 - 1e-15 {
                break;
            }
        }
    }
    let upper = best.0.max(0.0);
    BoxEstimate {
        lower: box_lower(x, y).min(upper),
        upper,
        witness_coupling: best.1.map(|p| complete_plan(x, y, p)),
        certificate: Certificate::Bound,
    }
}

/// Whether `box_upper(X_n, limit)` ends below `tol` with a nonincreasing
/// trend (least-squares slope) over the last third of the sequence.
pub fn box_converges(seq: &[FinitePmSpace], limit: &FinitePmSpace, tol: f64) -> Result<bool> {
    if seq.is_empty() {
        return Err(Error::arg("box_converges needs a nonempty sequence"));
    }
    let vals: Vec<f64> = seq.iter().map(|x| box_upper(x, limit).upper).collect();
    let tail_len = (vals.len() / 3).max(2).min(vals.len());
    let tail = &vals[vals.len() - tail_len..];
    Ok(*vals.last().unwrap() < tol && slope(tail) <= 1e-12)
}

/// Least-squares slope of `v` against its index.
pub fn slope(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    if v.len() < 2 {
        return 0.0;
    }
    let mx = (n - 1.0) / 2.0;
    let my = v.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (i, &y) in v.iter().enumerate() {
        let dx = i as f64 - mx;
        num += dx * (y - my);
        den += dx * dx;
    }
    num / den
}
