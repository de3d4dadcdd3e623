use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::Serialize;

use super::polytope::{endpoint_ascent, start_points};
use super::{Mode, EXACT_LIMIT};
use crate::error::{Error, Result};
use crate::space::{FinitePmSpace, LipschitzFunction};
use crate::special::{normal_pdf, psi, psi_inv};

const MASS_SLACK: f64 = 1e-12;

/// Smallest width of a set of values carrying mass at least `1 - kappa`.
///
/// Returns 0 when `1 - kappa <= 0` (the empty set qualifies).
pub fn partial_diameter(values: &[f64], masses: &[f64], kappa: f64) -> f64 {
    let target = 1.0 - kappa;
    if target <= 0.0 || values.is_empty() {
        return 0.0;
    }
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut best = f64::INFINITY;
    let mut r = 0;
    let mut mass = 0.0;
    for l in 0..idx.len() {
        while r < idx.len() && mass < target - MASS_SLACK {
            mass += masses[idx[r]];
            r += 1;
        }
        if mass < target - MASS_SLACK {
            break;
        }
        best = best.min(values[idx[r - 1]] - values[idx[l]]);
        mass -= masses[idx[l]];
    }
    if best.is_finite() {
        best
    } else {
        0.0
    }
}

/// Observable diameter `ObsDiam(X; -kappa)`.
///
/// Exact mode fixes the order of the values of `f` and solves a linear
/// program in the consecutive gaps: every ordered pair bounds the sum of the
/// gaps between them by its distance, and every window of mass at least
/// `1 - kappa` must be at least `t` wide. The maximum of `t` over orders is
/// the observable diameter. Heuristic mode returns the best partial diameter
/// of functions reached by coordinate ascent from distance functions.
pub fn obs_diam(space: &FinitePmSpace, kappa: f64, mode: Mode) -> Result<f64> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::arg(format!("kappa must lie in [0, 1], got {kappa}")));
    }
    let n = space.len();
    if n == 1 || kappa >= 1.0 {
        return Ok(0.0);
    }
    match mode {
        Mode::Exact => {
            if n > EXACT_LIMIT {
                return Err(Error::size("points", n, EXACT_LIMIT));
            }
            let mut best = 0.0_f64;
            let mut perm: Vec<usize> = (0..n).collect();
            permutations(&mut perm, 0, &mut |p| {
                // f and -f give the same partial diameter
                if p[0] < p[n - 1] {
                    best = best.max(ordered_lp(space, p, kappa));
                }
            });
            Ok(best)
        }
        Mode::Heuristic => {
            let objective = |f: &[f64]| partial_diameter(f, space.masses(), kappa);
            let mut best = 0.0_f64;
            for x0 in start_points(n) {
                let f0 = LipschitzFunction::distance_from(space, x0).values().to_vec();
                best = best.max(endpoint_ascent(space, f0, objective, 20).0);
            }
            Ok(best)
        }
    }
}

fn permutations(p: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, visit);
        p.swap(k, i);
    }
}

fn ordered_lp(space: &FinitePmSpace, order: &[usize], kappa: f64) -> f64 {
    let n = order.len();
    let target = 1.0 - kappa;
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    let gaps: Vec<_> = (0..n - 1).map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    for a in 0..n {
        for b in (a + 1)..n {
            let expr: Vec<_> = gaps[a..b].iter().map(|&g| (g, 1.0)).collect();
            lp.add_constraint(expr, ComparisonOp::Le, space.dist(order[a], order[b]));
        }
    }
    for a in 0..n {
        let mut mass = 0.0;
        for b in a..n {
            mass += space.mass(order[b]);
            if mass >= target - MASS_SLACK {
                // only the shortest qualifying window starting at a matters
                let mut expr: Vec<_> = gaps[a..b].iter().map(|&g| (g, 1.0)).collect();
                expr.push((t, -1.0));
                lp.add_constraint(expr, ComparisonOp::Ge, 0.0);
                break;
            }
        }
    }
    match lp.solve() {
        Ok(sol) => sol.objective().max(0.0),
        Err(_) => 0.0,
    }
}

/// Observable diameter of the 1-D Gaussian of variance `sigma^2`,
/// `2 sigma Psi^{-1}((1 - kappa) / 2)`.
pub fn obs_diam_gaussian_formula(sigma: f64, kappa: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::arg(format!("sigma must be positive, got {sigma}")));
    }
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::arg(format!("kappa must lie in (0, 1), got {kappa}")));
    }
    Ok(2.0 * sigma * psi_inv((1.0 - kappa) / 2.0))
}

/// A `kappa` at which the Gaussian observable diameter falls below that of
/// the unit interval, `1 - kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonWitness {
    pub kappa: f64,
    pub gaussian: f64,
    pub interval: f64,
    pub slack: f64,
}

/// Maximizes `(1 - kappa) - 2 sigma Psi^{-1}((1 - kappa) / 2)` over
/// `kappa in (0, 1)`. The function is concave in `s = 1 - kappa` and its
/// derivative vanishes where the normal density equals `sigma`, which is
/// located by bisection. Returns `None` when no `kappa` gives positive slack
/// (exactly when `sigma >= 1/sqrt(2 pi)`).
pub fn gaussian_comparison_witness(sigma: f64) -> Result<Option<ComparisonWitness>> {
    if !(sigma > 0.0) {
        return Err(Error::arg(format!("sigma must be positive, got {sigma}")));
    }
    if sigma >= normal_pdf(0.0) {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0_f64, 40.0_f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if normal_pdf(mid) > sigma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let s = 2.0 * psi(t);
    let kappa = 1.0 - s;
    let gaussian = obs_diam_gaussian_formula(sigma, kappa)?;
    let slack = s - gaussian;
    Ok((slack > 0.0).then_some(ComparisonWitness { kappa, gaussian, interval: s, slack }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_diameter_examples() {
        assert_eq!(partial_diameter(&[3.0], &[1.0], 0.2), 0.0);
        assert_eq!(partial_diameter(&[0.0, 1.0], &[0.5, 0.5], 0.4), 1.0);
        let third = 1.0 / 3.0;
        assert_eq!(partial_diameter(&[0.0, 1.0, 2.0], &[third; 3], third), 1.0);
        assert_eq!(partial_diameter(&[0.0, 1.0], &[0.5, 0.5], 1.0), 0.0);
    }

    #[test]
    fn two_point_observable_diameter() {
        let x = FinitePmSpace::two_point(1.7, 0.5).unwrap();
        for mode in [Mode::Exact, Mode::Heuristic] {
            assert!((obs_diam(&x, 0.3, mode).unwrap() - 1.7).abs() < 1e-9);
            assert_eq!(obs_diam(&x, 0.6, mode).unwrap(), 0.0);
        }
        assert_eq!(obs_diam(&FinitePmSpace::one_point(), 0.1, Mode::Exact).unwrap(), 0.0);
    }

    #[test]
    fn equilateral_triangle_beats_vertices() {
        let x = FinitePmSpace::from_matrix(
            vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]],
            vec![1.0 / 3.0; 3],
        )
        .unwrap();
        assert!((obs_diam(&x, 0.4, Mode::Exact).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn gaussian_formula() {
        assert!(obs_diam_gaussian_formula(1.0, 1.0).is_err());
        let k = 1.0 - 2.0 * psi(1.0);
        assert!((obs_diam_gaussian_formula(1.0, k).unwrap() - 2.0).abs() < 1e-9);
        let a = obs_diam_gaussian_formula(1.0, 0.3).unwrap();
        let b = obs_diam_gaussian_formula(2.0, 0.3).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12);
        assert!(obs_diam_gaussian_formula(1.0, 1.0 - 1e-12).unwrap() < 1e-10);
    }

    #[test]
    fn comparison_witness() {
        let w = gaussian_comparison_witness(0.35).unwrap().unwrap();
        assert!(w.kappa > 0.0 && w.kappa < 1.0);
        assert!(w.slack > 1e-3);
        assert!(gaussian_comparison_witness(0.4).unwrap().is_none());
    }
}
