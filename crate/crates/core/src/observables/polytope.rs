//! The 1-Lipschitz polytope `{f : |f_i - f_j| <= d_ij, f_0 = 0}`.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{EXACT_LIMIT, HEURISTIC_STARTS};
use crate::error::{Error, Result};
use crate::space::FinitePmSpace;

const SLACK: f64 = 1e-12;
const START_SEED: u64 = 0x0b5d_1a4e;

fn key(v: &[Option<f64>]) -> Vec<i64> {
    v.iter().map(|x| x.map_or(i64::MIN, |x| (x * 1e9).round() as i64)).collect()
}

/// All vertices of the normalized 1-Lipschitz polytope.
///
/// A vertex is pinned down by a spanning set of tight constraints
/// `f_j = f_i +- d_ij`, so vertices are grown one tight edge at a time from
/// `f_0 = 0`, pruning partial assignments that already break the Lipschitz
/// condition.
pub fn lipschitz_vertices(space: &FinitePmSpace) -> Result<Vec<Vec<f64>>> {
    let n = space.len();
    if n > EXACT_LIMIT {
        return Err(Error::size("points", n, EXACT_LIMIT));
    }
    let mut f: Vec<Option<f64>> = vec![None; n];
    f[0] = Some(0.0);
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut out: Vec<Vec<f64>> = Vec::new();
    grow(space, &mut f, 1, &mut seen, &mut out);
    Ok(out)
}

fn grow(
    space: &FinitePmSpace,
    f: &mut Vec<Option<f64>>,
    assigned: usize,
    seen: &mut HashSet<Vec<i64>>,
    out: &mut Vec<Vec<f64>>,
) {
    if !seen.insert(key(f)) {
        return;
    }
    let n = space.len();
    if assigned == n {
        out.push(f.iter().map(|v| v.unwrap()).collect());
        return;
    }
    for j in 0..n {
        if f[j].is_some() {
            continue;
        }
        for i in 0..n {
            let Some(fi) = f[i] else { continue };
            for sign in [1.0, -1.0] {
                let v = fi + sign * space.dist(i, j);
                let ok = (0..n).all(|k| match f[k] {
                    Some(fk) => (v - fk).abs() <= space.dist(j, k) + SLACK * space.dist(j, k).max(1.0),
                    None => true,
                });
                if ok {
                    f[j] = Some(v);
                    grow(space, f, assigned + 1, seen, out);
                    f[j] = None;
                }
            }
        }
    }
}

/// Range of values point `i` may take with all other values fixed.
pub(crate) fn feasible_interval(space: &FinitePmSpace, f: &[f64], i: usize) -> (f64, f64) {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (j, &fj) in f.iter().enumerate() {
        if j != i {
            let d = space.dist(i, j);
            lo = lo.max(fj - d);
            hi = hi.min(fj + d);
        }
    }
    if lo > hi {
        (f[i], f[i])
    } else {
        (lo, hi)
    }
}

/// Anchor points for heuristic starts: all points when few, otherwise a
/// fixed pseudo-random sample.
pub(crate) fn start_points(n: usize) -> Vec<usize> {
    if n <= HEURISTIC_STARTS {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut v = sample(&mut rng, n, HEURISTIC_STARTS).into_vec();
    v.sort_unstable();
    v
}

/// Coordinate ascent that only moves a value to an end of its feasible
/// interval, accepting strict improvements of `objective`.
pub(crate) fn endpoint_ascent(
    space: &FinitePmSpace,
    mut f: Vec<f64>,
    objective: impl Fn(&[f64]) -> f64,
    max_sweeps: usize,
) -> (f64, Vec<f64>) {
    let mut best = objective(&f);
    for _ in 0..max_sweeps {
        let mut moved = false;
        for i in 0..f.len() {
            let (lo, hi) = feasible_interval(space, &f, i);
            let old = f[i];
            let mut keep = old;
            for cand in [lo, hi] {
                if cand == old {
                    continue;
                }
                f[i] = cand;
                let v = objective(&f);
                if v > best * (1.0 + 1e-14) + 1e-300 {
                    best = v;
                    keep = cand;
                    moved = true;
                }
            }
            f[i] = keep;
        }
        if !moved {
            break;
        }
    }
    (best, f)
}
