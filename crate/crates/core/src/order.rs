//! Lipschitz order on finite pm-spaces.
//!
//! `X` dominates `Y` when some 1-Lipschitz map `f: X -> Y` pushes `m_X`
//! onto `m_Y`. With support-only storage `f` must be onto, so the search is
//! a constrained assignment problem solved by depth-first search.

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::{accurate_sum, ExactMass, FinitePmSpace};
use crate::VALIDATION_TOL;

/// Search limits for [`dominates`].
#[derive(Debug, Clone, Copy)]
pub struct SearchLimits {
    pub max_source: usize,
    pub max_target: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_source: 12, max_target: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationWitness {
    /// `map[i]` is the image of point `i` of the dominating space.
    pub map: Vec<usize>,
    pub pushforward: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Domination {
    pub witness: Option<DominationWitness>,
    pub nodes: u64,
}

impl Domination {
    pub fn holds(&self) -> bool {
        self.witness.is_some()
    }
}

/// Exact masses when both spaces carry them, floats otherwise.
#[derive(Clone)]
enum Masses {
    Float(Vec<f64>),
    Exact(Vec<ExactMass>, Vec<ExactMass>),
}

struct Search<'a> {
    x: &'a FinitePmSpace,
    y: &'a FinitePmSpace,
    order: Vec<usize>,
    cands: Vec<usize>,
    masses: Masses,
    map: Vec<usize>,
    nodes: u64,
}

const ASSIGN_TOL: f64 = 1e-12;

impl Search<'_> {
    fn lipschitz_ok(&self, xi: usize, yj: usize, depth: usize) -> bool {
        self.order[..depth].iter().all(|&xk| {
            let yk = self.map[xk];
            self.y.dist(yj, yk) <= self.x.dist(xi, xk) + VALIDATION_TOL * self.x.dist(xi, xk).max(1.0)
        })
    }

    /// Every target point still short of mass must be reachable by the
    /// unassigned source mass that could legally map onto it.
    fn deficits_coverable(&self, depth: usize, rem_f: &[f64], rem_e: &[ExactMass]) -> bool {
        let rest = &self.order[depth..];
        for y in 0..self.y.len() {
            let reach = |x: usize| self.lipschitz_ok(x, y, depth);
            match &self.masses {
                Masses::Float(mx) => {
                    if rem_f[y] > ASSIGN_TOL {
                        let avail = accurate_sum(rest.iter().filter(|&&x| reach(x)).map(|&x| mx[x]));
                        if avail < rem_f[y] - ASSIGN_TOL {
                            return false;
                        }
                    }
                }
                Masses::Exact(mx, _) => {
                    if rem_e[y] > Ratio::from_integer(0) {
                        let avail: ExactMass = rest.iter().filter(|&&x| reach(x)).map(|&x| mx[x]).sum();
                        if avail < rem_e[y] {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    fn dfs(&mut self, depth: usize, rem_f: &mut Vec<f64>, rem_e: &mut Vec<ExactMass>) -> bool {
        self.nodes += 1;
        if depth == self.order.len() {
            return match &self.masses {
                Masses::Float(..) => rem_f.iter().all(|r| r.abs() <= ASSIGN_TOL),
                Masses::Exact(..) => rem_e.iter().all(|r| *r == Ratio::from_integer(0)),
            };
        }
        if !self.deficits_coverable(depth, rem_f, rem_e) {
            return false;
        }
        let xi = self.order[depth];
        for idx in 0..self.cands.len() {
            let yj = self.cands[idx];
            let fits = match &self.masses {
                Masses::Float(mx) => rem_f[yj] >= mx[xi] - ASSIGN_TOL,
                Masses::Exact(mx, _) => rem_e[yj] >= mx[xi],
            };
            if !fits || !self.lipschitz_ok(xi, yj, depth) {
                continue;
            }
            self.map[xi] = yj;
            match &self.masses {
                Masses::Float(mx) => rem_f[yj] -= mx[xi],
                Masses::Exact(mx, _) => rem_e[yj] -= mx[xi],
            }
            if self.dfs(depth + 1, rem_f, rem_e) {
                return true;
            }
            match &self.masses {
                Masses::Float(mx) => rem_f[yj] += mx[xi],
                Masses::Exact(mx, _) => rem_e[yj] += mx[xi],
            }
        }
        self.map[xi] = usize::MAX;
        false
    }
}

fn desc_by_mass(s: &FinitePmSpace) -> Vec<usize> {
    let mut o: Vec<usize> = (0..s.len()).collect();
    o.sort_by(|&a, &b| s.mass(b).total_cmp(&s.mass(a)).then(a.cmp(&b)));
    o
}

/// Decides whether `x` dominates `y` with the default limits.
pub fn dominates(x: &FinitePmSpace, y: &FinitePmSpace) -> Result<Domination> {
    dominates_with(x, y, SearchLimits::default())
}

/// Decides whether `x` dominates `y`; returns the first witness in a fixed
/// search order (sources and targets both by mass, descending).
pub fn dominates_with(x: &FinitePmSpace, y: &FinitePmSpace, limits: SearchLimits) -> Result<Domination> {
    if x.len() > limits.max_source {
        return Err(Error::size("|X|", x.len(), limits.max_source));
    }
    if y.len() > limits.max_target {
        return Err(Error::size("|Y|", y.len(), limits.max_target));
    }
    if y.len() > x.len() || y.diam() > x.diam() * (1.0 + VALIDATION_TOL) + VALIDATION_TOL {
        return Ok(Domination { witness: None, nodes: 0 });
    }
    let masses = match (x.exact_masses(), y.exact_masses()) {
        (Some(a), Some(b)) => Masses::Exact(a.to_vec(), b.to_vec()),
        _ => Masses::Float(x.masses().to_vec()),
    };
    let mut rem_f = y.masses().to_vec();
    let mut rem_e = match &masses {
        Masses::Exact(_, b) => b.clone(),
        Masses::Float(..) => Vec::new(),
    };
    let mut s = Search {
        x,
        y,
        order: desc_by_mass(x),
        cands: desc_by_mass(y),
        masses,
        map: vec![usize::MAX; x.len()],
        nodes: 0,
    };
    let found = s.dfs(0, &mut rem_f, &mut rem_e);
    let witness = found.then(|| {
        let map = s.map.clone();
        DominationWitness { pushforward: pushforward(x, y.len(), &map), map }
    });
    Ok(Domination { witness, nodes: s.nodes })
}

/// `f_# m_X` as a vector over the target's points.
pub fn pushforward(x: &FinitePmSpace, target_len: usize, map: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; target_len];
    for (i, &j) in map.iter().enumerate() {
        out[j] += x.mass(i);
    }
    out
}

/// Checks that `map` is 1-Lipschitz from `x` to `y` and pushes `m_X` to `m_Y`.
pub fn verify_witness(x: &FinitePmSpace, y: &FinitePmSpace, map: &[usize]) -> Result<DominationWitness> {
    if map.len() != x.len() {
        return Err(Error::LengthMismatch(map.len(), x.len()));
    }
    if let Some(&bad) = map.iter().find(|&&j| j >= y.len()) {
        return Err(Error::arg(format!("map target {bad} out of range")));
    }
    for i in 0..x.len() {
        for k in (i + 1)..x.len() {
            let dx = x.dist(i, k);
            if y.dist(map[i], map[k]) > dx + VALIDATION_TOL * dx.max(1.0) {
                return Err(Error::arg(format!("map expands the distance between {i} and {k}")));
            }
        }
    }
    let push = pushforward(x, y.len(), map);
    if let (Some(a), Some(b)) = (x.exact_masses(), y.exact_masses()) {
        let mut acc = vec![ExactMass::from_integer(0); y.len()];
        for (i, &j) in map.iter().enumerate() {
            acc[j] += a[i];
        }
        if acc != b {
            return Err(Error::arg("pushforward differs from the target measure"));
        }
    } else if push.iter().zip(y.masses()).any(|(p, m)| (p - m).abs() > ASSIGN_TOL) {
        return Err(Error::arg("pushforward differs from the target measure"));
    }
    Ok(DominationWitness { map: map.to_vec(), pushforward: push })
}

/// For mutually dominating spaces, whether they are mm-isomorphic (which
/// must hold). `None` when domination fails in either direction.
pub fn antisymmetry_check(x: &FinitePmSpace, y: &FinitePmSpace) -> Result<Option<bool>> {
    if !dominates(x, y)?.holds() || !dominates(y, x)?.holds() {
        return Ok(None);
    }
    Ok(Some(x.mm_isomorphic(y)?))
}

/// Whether every pairwise l_p product of generators is dominated by some
/// generator. Pairs whose product has more than `max_points` points are
/// beyond the tested rank and skipped.
pub fn generator_idempotent(gens: &[FinitePmSpace], p: f64, max_points: Option<usize>) -> Result<bool> {
    let source_limit = gens.iter().map(FinitePmSpace::len).max().unwrap_or(0);
    for a in gens {
        for b in gens {
            if max_points.is_some_and(|m| a.len() * b.len() > m) {
                continue;
            }
            let prod = a.product(b, p)?;
            let limits = SearchLimits {
                max_source: source_limit.max(SearchLimits::default().max_source),
                max_target: prod.len().max(SearchLimits::default().max_target),
            };
            let mut covered = false;
            for g in gens {
                if dominates_with(g, &prod, limits)?.holds() {
                    covered = true;
                    break;
                }
            }
            if !covered {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn onto_a_point() {
        let x = FinitePmSpace::two_point(1.0, 0.3).unwrap();
        let d = dominates(&x, &FinitePmSpace::one_point()).unwrap();
        assert_eq!(d.witness.unwrap().map, vec![0, 0]);
    }

    #[test]
    fn scaled_up_dominates() {
        let x = FinitePmSpace::from_matrix(
            vec![vec![0.0, 1.0, 1.5], vec![1.0, 0.0, 1.0], vec![1.5, 1.0, 0.0]],
            vec![0.2, 0.3, 0.5],
        )
        .unwrap();
        let w = dominates(&x.scale(2.0).unwrap(), &x).unwrap().witness.unwrap();
        assert_eq!(w.map, vec![0, 1, 2]);
    }

    #[test]
    fn expansion_is_refused() {
        let a = FinitePmSpace::two_point(1.0, 0.5).unwrap();
        let b = FinitePmSpace::two_point(2.0, 0.5).unwrap();
        assert!(!dominates(&a, &b).unwrap().holds());
    }

    #[test]
    fn exact_masses_are_used() {
        let third = |k| ExactMass::new(k, 3);
        let x = FinitePmSpace::with_exact_masses(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]],
            &[third(1), third(1), third(1)],
        )
        .unwrap();
        let y = FinitePmSpace::with_exact_masses(
            vec!["p".into(), "q".into()],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            &[third(2), third(1)],
        )
        .unwrap();
        let w = dominates(&x, &y).unwrap().witness.unwrap();
        assert!(verify_witness(&x, &y, &w.map).is_ok());
    }

    #[test]
    fn idempotence_of_generators() {
        assert!(generator_idempotent(&[FinitePmSpace::one_point()], 2.0, None).unwrap());
        let x = FinitePmSpace::two_point(1.0, 0.5).unwrap();
        assert!(!generator_idempotent(&[x.clone()], 2.0, None).unwrap());
        let x2 = x.product(&x, 2.0).unwrap();
        let x3 = x2.product(&x, 2.0).unwrap();
        assert!(generator_idempotent(&[x, x2, x3], 2.0, Some(8)).unwrap());
    }
}
