use serde::Serialize;

use super::KappaSequence;
use crate::error::{Error, Result};
use crate::space::FinitePmSpace;

/// Mass slack when comparing a set's mass to a required `kappa_i`.
pub const MASS_TOL: f64 = 1e-12;

/// Largest number of positive `kappa` entries accepted.
pub const SEP_BIN_LIMIT: usize = 12;

/// Largest space for which the point-level search runs.
pub const POINT_SEARCH_LIMIT: usize = 20;

/// A separated family: `groups[i]` are the point indices of `A_i`, one group
/// per positive `kappa` entry in stored order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationConfig {
    pub threshold: f64,
    pub groups: Vec<Vec<usize>>,
}

/// Connected components of the graph joining points at distance `< delta`.
pub fn components(space: &FinitePmSpace, delta: f64) -> Vec<Vec<usize>> {
    let n = space.len();
    let mut comp = vec![usize::MAX; n];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        comp[s] = id;
        let mut members = vec![s];
        let mut k = 0;
        while k < members.len() {
            let u = members[k];
            for v in 0..n {
                if comp[v] == usize::MAX && space.dist(u, v) < delta {
                    comp[v] = id;
                    members.push(v);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Covering search: put items into bins until every bin reaches its demand.
///
/// Items may stay unused; only bins still short of their demand accept
/// items, and equal consecutive items take nondecreasing choices, which
/// removes symmetric branches without losing solutions.
struct Cover<'a> {
    items: &'a [f64],
    choice: Vec<usize>,
    deficit: Vec<f64>,
    suffix: Vec<f64>,
    conflict: Option<&'a dyn Fn(usize, usize) -> bool>,
}

impl Cover<'_> {
    fn run(&mut self, k: usize) -> bool {
        let need: f64 = self.deficit.iter().filter(|&&d| d > MASS_TOL).sum();
        if need <= MASS_TOL {
            return true;
        }
        if k == self.items.len() || self.suffix[k] < need - MASS_TOL {
            return false;
        }
        let skip = self.deficit.len();
        let floor = match (self.conflict, k) {
            (None, k) if k > 0 && self.items[k] == self.items[k - 1] => self.choice[k - 1],
            _ => 0,
        };
        for b in floor..=skip {
            if b < skip {
                if self.deficit[b] <= MASS_TOL {
                    continue;
                }
                if let Some(conflict) = self.conflict {
                    if (0..k).any(|j| self.choice[j] < skip && self.choice[j] != b && conflict(j, k)) {
                        continue;
                    }
                }
                self.deficit[b] -= self.items[k];
            }
            self.choice[k] = b;
            if self.run(k + 1) {
                return true;
            }
            if b < skip {
                self.deficit[b] += self.items[k];
            }
        }
        self.choice[k] = skip;
        false
    }
}

fn cover(
    items: &[f64],
    demands: &[f64],
    conflict: Option<&dyn Fn(usize, usize) -> bool>,
) -> Option<Vec<usize>> {
    let mut suffix = vec![0.0; items.len() + 1];
    for k in (0..items.len()).rev() {
        suffix[k] = suffix[k + 1] + items[k];
    }
    let mut c = Cover {
        items,
        choice: vec![demands.len(); items.len()],
        deficit: demands.to_vec(),
        suffix,
        conflict,
    };
    c.run(0).then_some(c.choice)
}

/// Separated family at threshold `delta` for the given positive demands, or
/// `None` when none exists.
fn feasible(space: &FinitePmSpace, demands: &[f64], delta: f64) -> Result<Option<Vec<Vec<usize>>>> {
    let comps = components(space, delta);
    let cmass: Vec<f64> = comps.iter().map(|c| c.iter().map(|&i| space.mass(i)).sum()).collect();
    let mut order: Vec<usize> = (0..comps.len()).collect();
    order.sort_by(|&a, &b| cmass[b].total_cmp(&cmass[a]).then(a.cmp(&b)));
    let items: Vec<f64> = order.iter().map(|&c| cmass[c]).collect();
    if let Some(choice) = cover(&items, demands, None) {
        let mut groups = vec![Vec::new(); demands.len()];
        for (k, &b) in choice.iter().enumerate() {
            if b < demands.len() {
                groups[b].extend_from_slice(&comps[order[k]]);
            }
        }
        groups.iter_mut().for_each(|g| g.sort_unstable());
        return Ok(Some(groups));
    }
    if comps.len() == space.len() {
        return Ok(None);
    }
    let n = space.len();
    if n > POINT_SEARCH_LIMIT {
        return Err(Error::size("points", n, POINT_SEARCH_LIMIT));
    }
    let mut pts: Vec<usize> = (0..n).collect();
    pts.sort_by(|&a, &b| space.mass(b).total_cmp(&space.mass(a)).then(a.cmp(&b)));
    let items: Vec<f64> = pts.iter().map(|&p| space.mass(p)).collect();
    let conflict = |a: usize, b: usize| space.dist(pts[a], pts[b]) < delta;
    Ok(cover(&items, demands, Some(&conflict)).map(|choice| {
        let mut groups = vec![Vec::new(); demands.len()];
        for (k, &b) in choice.iter().enumerate() {
            if b < demands.len() {
                groups[b].push(pts[k]);
            }
        }
        groups.iter_mut().for_each(|g| g.sort_unstable());
        groups
    }))
}

/// Separation distance `Sep(X; kappa)` with its optimal family.
///
/// Nonpositive entries are dropped (the empty set is at infinite distance
/// from everything). With at most one positive entry the value is `+inf`,
/// unless that entry exceeds 1 and no set qualifies, giving 0. Otherwise the
/// answer is the largest pairwise distance at which a separated family
/// exists, or 0.
pub fn separation_config(space: &FinitePmSpace, kappa: &KappaSequence) -> Result<(f64, Option<SeparationConfig>)> {
    let demands = kappa.positive();
    if demands.len() > SEP_BIN_LIMIT {
        return Err(Error::size("positive kappa entries", demands.len(), SEP_BIN_LIMIT));
    }
    match demands.len() {
        0 => return Ok((f64::INFINITY, None)),
        1 if demands[0] <= 1.0 + MASS_TOL => {
            let all = SeparationConfig { threshold: f64::INFINITY, groups: vec![(0..space.len()).collect()] };
            return Ok((f64::INFINITY, Some(all)));
        }
        1 => return Ok((0.0, None)),
        _ => {}
    }
    if demands.iter().sum::<f64>() > 1.0 + MASS_TOL * demands.len() as f64 {
        return Ok((0.0, None));
    }
    let cands = space.distinct_distances();
    if cands.is_empty() {
        return Ok((0.0, None));
    }
    // feasibility is monotone: find the last feasible candidate
    let Some(first) = feasible(space, &demands, cands[0])? else {
        return Ok((0.0, None));
    };
    let (mut lo, mut hi) = (0usize, cands.len());
    let mut best = first;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        match feasible(space, &demands, cands[mid])? {
            Some(g) => {
                lo = mid;
                best = g;
            }
            None => hi = mid,
        }
    }
    Ok((cands[lo], Some(SeparationConfig { threshold: cands[lo], groups: best })))
}

/// Separation distance `Sep(X; kappa)`; `+inf` is a distinguished value.
pub fn separation(space: &FinitePmSpace, kappa: &KappaSequence) -> Result<f64> {
    Ok(separation_config(space, kappa)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_separation() {
        let x = FinitePmSpace::two_point(2.5, 0.3).unwrap();
        assert_eq!(separation(&x, &vec![0.3, 0.7].into()).unwrap(), 2.5);
        assert_eq!(separation(&x, &vec![0.31, 0.7].into()).unwrap(), 0.0);
        assert_eq!(separation(&x, &vec![0.5, -1.0].into()).unwrap(), f64::INFINITY);
        assert_eq!(separation(&x, &vec![1.5].into()).unwrap(), 0.0);
    }

    #[test]
    fn line_points_need_point_search() {
        let x = FinitePmSpace::from_matrix(
            vec![vec![0.0, 0.5, 1.0], vec![0.5, 0.0, 0.5], vec![1.0, 0.5, 0.0]],
            vec![0.4, 0.2, 0.4],
        )
        .unwrap();
        let (v, cfg) = separation_config(&x, &vec![0.4, 0.4].into()).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(cfg.unwrap().groups, vec![vec![0], vec![2]]);
    }
}
