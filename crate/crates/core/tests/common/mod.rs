//! Shared corpora and brute-force oracles for the integration tests.
//!
//! Every oracle here is written from the definitions and shares no code
//! with the library beyond the space type itself.

#![allow(dead_code)]

use std::collections::VecDeque;

use mmslab_core::FinitePmSpace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MASS_TOL: f64 = 1e-12;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random metric: random edge weights in `[0.5, 2]` closed under shortest paths.
pub fn random_metric(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w: f64 = rng.gen_range(0.5..2.0);
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

pub fn random_masses(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

pub fn random_space(rng: &mut ChaCha8Rng, n: usize) -> FinitePmSpace {
    FinitePmSpace::from_matrix(random_metric(rng, n), random_masses(rng, n)).unwrap()
}

/// `count` random spaces with between `lo` and `hi` points.
pub fn corpus(seed: u64, count: usize, lo: usize, hi: usize) -> Vec<FinitePmSpace> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let n = r.gen_range(lo..=hi);
            random_space(&mut r, n)
        })
        .collect()
}

/// Points `xs` on the line with masses `mass`.
pub fn line(xs: &[f64], mass: &[f64]) -> FinitePmSpace {
    let d = xs.iter().map(|a| xs.iter().map(|b| (a - b).abs()).collect()).collect();
    FinitePmSpace::from_matrix(d, mass.to_vec()).unwrap()
}

/// Separation distance by enumerating every assignment of points to one of
/// `kappa.len()` sets or to none.
pub fn separation_oracle(x: &FinitePmSpace, kappa: &[f64]) -> f64 {
    let k: Vec<f64> = kappa.iter().copied().filter(|&v| v > 0.0).collect();
    if k.len() <= 1 {
        return if k.first().map_or(true, |&v| v <= 1.0 + MASS_TOL) { f64::INFINITY } else { 0.0 };
    }
    let n = x.len();
    let slots = k.len() + 1;
    let total = slots.pow(n as u32);
    let mut best = 0.0_f64;
    let mut label = vec![0usize; n];
    for code in 0..total {
        let mut c = code;
        for l in label.iter_mut() {
            *l = c % slots;
            c /= slots;
        }
        let mut mass = vec![0.0; k.len()];
        for (i, &l) in label.iter().enumerate() {
            if l > 0 {
                mass[l - 1] += x.mass(i);
            }
        }
        if mass.iter().zip(&k).any(|(m, want)| *m < want - MASS_TOL) {
            continue;
        }
        let mut sep = f64::INFINITY;
        for i in 0..n {
            for j in 0..n {
                if label[i] > 0 && label[j] > 0 && label[i] != label[j] {
                    sep = sep.min(x.dist(i, j));
                }
            }
        }
        best = best.max(sep);
    }
    best
}

/// Sup of the variance of 1-Lipschitz functions on points of a line, given
/// in increasing order: a convex function over the polytope of increments
/// `|f_{i+1} - f_i| <= x_{i+1} - x_i`, maximized at a sign pattern.
pub fn line_variance_oracle(xs: &[f64], mass: &[f64]) -> f64 {
    let n = xs.len();
    let mut best = 0.0_f64;
    for signs in 0..1u64 << (n - 1) {
        let mut f = vec![0.0; n];
        for i in 1..n {
            let step = xs[i] - xs[i - 1];
            f[i] = f[i - 1] + if signs >> (i - 1) & 1 == 1 { step } else { -step };
        }
        let mean: f64 = f.iter().zip(mass).map(|(v, m)| v * m).sum();
        let var: f64 = f.iter().zip(mass).map(|(v, m)| m * (v - mean).powi(2)).sum();
        best = best.max(var);
    }
    best
}

/// Edmonds-Karp on a dense capacity matrix.
pub fn max_flow(cap: &mut [Vec<f64>], s: usize, t: usize) -> f64 {
    let n = cap.len();
    let mut total = 0.0;
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[s] = s;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for v in 0..n {
                if prev[v] == usize::MAX && cap[u][v] > 1e-15 {
                    prev[v] = u;
                    q.push_back(v);
                }
            }
        }
        if prev[t] == usize::MAX {
            return total;
        }
        let mut push = f64::INFINITY;
        let mut v = t;
        while v != s {
            push = push.min(cap[prev[v]][v]);
            v = prev[v];
        }
        let mut v = t;
        while v != s {
            cap[prev[v]][v] -= push;
            cap[v][prev[v]] += push;
            v = prev[v];
        }
        total += push;
    }
}

/// Prokhorov distance through Strassen's theorem: the smallest `eps` for
/// which a coupling puts mass at most `eps` on pairs further than `eps`.
pub fn prokhorov_oracle(x: &FinitePmSpace, a: &[f64], b: &[f64]) -> f64 {
    let n = x.len();
    let mut radii = vec![0.0];
    for i in 0..n {
        for j in 0..n {
            radii.push(x.dist(i, j));
        }
    }
    let mut best = 1.0_f64;
    for r in radii {
        let (s, t) = (2 * n, 2 * n + 1);
        let mut cap = vec![vec![0.0; 2 * n + 2]; 2 * n + 2];
        for i in 0..n {
            cap[s][i] = a[i];
            cap[n + i][t] = b[i];
            for j in 0..n {
                if x.dist(i, j) <= r {
                    cap[i][n + j] = 2.0;
                }
            }
        }
        let moved = max_flow(&mut cap, s, t);
        best = best.min(r.max(1.0 - moved));
    }
    best.clamp(0.0, 1.0)
}

/// Box distance restricted to parameters that are constant on the `n` cells
/// `[k/n, (k+1)/n)`. Both mass vectors must be multiples of `1/n`. This is an
/// upper bound on the box distance.
pub fn lattice_box_oracle(x: &FinitePmSpace, y: &FinitePmSpace, n: usize) -> f64 {
    let cells = |s: &FinitePmSpace| -> Vec<usize> {
        let mut out = Vec::new();
        for i in 0..s.len() {
            let k = (s.mass(i) * n as f64).round() as usize;
            assert!((k as f64 / n as f64 - s.mass(i)).abs() < 1e-12, "mass not on the lattice");
            out.extend(std::iter::repeat(i).take(k));
        }
        assert_eq!(out.len(), n);
        out
    };
    let cx = cells(x);
    let mut cy = cells(y);
    cy.sort_unstable();
    let mut best = 1.0_f64;
    loop {
        best = best.min(lattice_value(x, y, &cx, &cy));
        if !next_permutation(&mut cy) {
            return best;
        }
    }
}

fn lattice_value(x: &FinitePmSpace, y: &FinitePmSpace, cx: &[usize], cy: &[usize]) -> f64 {
    let n = cx.len();
    let disc = |a: usize, b: usize| (x.dist(cx[a], cx[b]) - y.dist(cy[a], cy[b])).abs();
    let mut best = 1.0_f64;
    for set in 1..1u32 << n {
        let size = set.count_ones() as f64;
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                if set >> a & 1 == 1 && set >> b & 1 == 1 {
                    worst = worst.max(disc(a, b));
                }
            }
        }
        best = best.min(worst.max(1.0 - size / n as f64));
    }
    best
}

pub fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Every 1-Lipschitz map `x -> y` pushing `m_X` to `m_Y`, by brute force.
pub fn domination_oracle(x: &FinitePmSpace, y: &FinitePmSpace) -> bool {
    let (n, m) = (x.len(), y.len());
    let mut map = vec![0usize; n];
    let total = m.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        for v in map.iter_mut() {
            *v = c % m;
            c /= m;
        }
        let lip = (0..n).all(|i| (0..n).all(|j| y.dist(map[i], map[j]) <= x.dist(i, j) + 1e-12));
        if !lip {
            continue;
        }
        let mut push = vec![0.0; m];
        for (i, &j) in map.iter().enumerate() {
            push[j] += x.mass(i);
        }
        if push.iter().enumerate().all(|(j, p)| (p - y.mass(j)).abs() <= 1e-9) {
            return true;
        }
    }
    false
}

/// Nonincreasing multisets of `len` values from `{0.1, ..., 1.0}`.
pub fn kappa_grid(len: usize) -> Vec<Vec<f64>> {
    fn rec(len: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() == len {
            out.push(cur.iter().map(|&k| k as f64 / 10.0).collect());
            return;
        }
        for k in (1..=max).rev() {
            cur.push(k);
            rec(len, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(len, 10, &mut Vec::new(), &mut out);
    out
}

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting; `None` when singular.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-12 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Vertices of `{x : a x <= b}`: every feasible solution of a square
/// subsystem of tight constraints.
pub fn vertices(a: &[Vec<f64>], b: &[f64], nvars: usize) -> Vec<Vec<f64>> {
    let m = a.len();
    let mut out = Vec::new();
    let mut pick: Vec<usize> = (0..nvars).collect();
    if nvars == 0 || nvars > m {
        return out;
    }
    loop {
        let sub_a = pick.iter().map(|&i| a[i].clone()).collect();
        let sub_b = pick.iter().map(|&i| b[i]).collect();
        if let Some(x) = solve(sub_a, sub_b) {
            let feasible = a.iter().zip(b).all(|(row, &bi)| {
                row.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>() <= bi + 1e-9
            });
            if feasible {
                out.push(x);
            }
        }
        // next combination
        let mut i = nvars;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if pick[i] < m - nvars + i {
                break;
            }
        }
        pick[i] += 1;
        for k in i + 1..nvars {
            pick[k] = pick[k - 1] + 1;
        }
    }
}

/// Rows `f_i - f_j <= d_ij` over the variables `f_1..f_{n-1}` (`f_0 = 0`),
/// padded with `extra` zero columns.
fn lipschitz_rows(x: &FinitePmSpace, extra: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = x.len();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let mut row = vec![0.0; n - 1 + extra];
                if i > 0 {
                    row[i - 1] += 1.0;
                }
                if j > 0 {
                    row[j - 1] -= 1.0;
                }
                a.push(row);
                b.push(x.dist(i, j));
            }
        }
    }
    (a, b)
}

fn with_origin(v: &[f64], n: usize) -> Vec<f64> {
    std::iter::once(0.0).chain(v[..n - 1].iter().copied()).collect()
}

/// Exact variance: the variance is convex, so its maximum over the
/// Lipschitz polytope is attained at a vertex.
pub fn variance_oracle(x: &FinitePmSpace) -> f64 {
    let n = x.len();
    if n == 1 {
        return 0.0;
    }
    let (a, b) = lipschitz_rows(x, 0);
    vertices(&a, &b, n - 1)
        .iter()
        .map(|v| {
            let f = with_origin(v, n);
            let mean: f64 = (0..n).map(|i| x.mass(i) * f[i]).sum();
            (0..n).map(|i| x.mass(i) * (f[i] - mean).powi(2)).sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Exact observable diameter: for each order of the values of `f`, maximize
/// `t` subject to the Lipschitz and order constraints and `t` at most the
/// width of every window of mass `>= 1 - kappa`, by vertex enumeration.
pub fn obs_diam_oracle(x: &FinitePmSpace, kappa: f64) -> f64 {
    let n = x.len();
    if n == 1 || kappa >= 1.0 {
        return 0.0;
    }
    let target = 1.0 - kappa;
    let col = |i: usize| if i == 0 { None } else { Some(i - 1) };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = 0.0_f64;
    loop {
        let (mut a, mut b) = lipschitz_rows(x, 1);
        for k in 0..n - 1 {
            let mut row = vec![0.0; n];
            if let Some(c) = col(perm[k]) {
                row[c] += 1.0;
            }
            if let Some(c) = col(perm[k + 1]) {
                row[c] -= 1.0;
            }
            a.push(row);
            b.push(0.0);
        }
        for lo in 0..n {
            let mut mass = 0.0;
            for hi in lo..n {
                mass += x.mass(perm[hi]);
                if mass >= target - 1e-12 {
                    let mut row = vec![0.0; n];
                    row[n - 1] = 1.0;
                    if let Some(c) = col(perm[hi]) {
                        row[c] -= 1.0;
                    }
                    if let Some(c) = col(perm[lo]) {
                        row[c] += 1.0;
                    }
                    a.push(row);
                    b.push(0.0);
                }
            }
        }
        for v in vertices(&a, &b, n) {
            best = best.max(v[n - 1]);
        }
        if !next_permutation(&mut perm) {
            return best;
        }
    }
}
