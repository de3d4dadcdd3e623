use super::polytope::{endpoint_ascent, lipschitz_vertices, start_points};
use super::{Mode, EXACT_LIMIT};
use crate::error::{Error, Result};
use crate::space::{accurate_sum, FinitePmSpace, LipschitzFunction};

/// `E|f - Ef|^p` under the space's measure; `p = inf` gives `max |f - Ef|`.
pub fn p_variance(space: &FinitePmSpace, f: &[f64], p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::arg(format!("p must be >= 1, got {p}")));
    }
    if f.len() != space.len() {
        return Err(Error::LengthMismatch(f.len(), space.len()));
    }
    Ok(p_moment(space.masses(), f, p))
}

fn p_moment(mass: &[f64], f: &[f64], p: f64) -> f64 {
    let mean = accurate_sum(f.iter().zip(mass).map(|(v, m)| v * m));
    if p.is_infinite() {
        return f.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    }
    accurate_sum(f.iter().zip(mass).map(|(v, m)| m * (v - mean).abs().powf(p)))
}

/// Variance of one function, `(1/2) E|f(x) - f(y)|^2`.
pub fn variance_of(space: &FinitePmSpace, f: &[f64]) -> Result<f64> {
    p_variance(space, f, 2.0)
}

/// `sup_f E|f - Ef|^p` over 1-Lipschitz `f`.
///
/// The objective is convex, so exact mode takes the maximum over the
/// vertices of the Lipschitz polytope. Heuristic mode pushes coordinates of
/// distance functions to the ends of their feasible intervals.
fn sup_moment(space: &FinitePmSpace, p: f64, mode: Mode) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::arg(format!("p must be >= 1, got {p}")));
    }
    let mass = space.masses();
    if space.len() == 1 {
        return Ok(0.0);
    }
    match mode {
        Mode::Exact => {
            if space.len() > EXACT_LIMIT {
                return Err(Error::size("points", space.len(), EXACT_LIMIT));
            }
            Ok(lipschitz_vertices(space)?.iter().map(|f| p_moment(mass, f, p)).fold(0.0, f64::max))
        }
        Mode::Heuristic => {
            let mut best = 0.0_f64;
            for x0 in start_points(space.len()) {
                let f0 = LipschitzFunction::distance_from(space, x0).values().to_vec();
                let (v, _) = endpoint_ascent(space, f0, |f| p_moment(mass, f, p), 50);
                best = best.max(v);
            }
            Ok(best)
        }
    }
}

/// Observable variance `V(X)`.
pub fn variance(space: &FinitePmSpace, mode: Mode) -> Result<f64> {
    sup_moment(space, 2.0, mode)
}

/// `p`-deviation: `(sup_f E|f - Ef|^p)^{1/p}`; for `p = inf`, `sup_f max |f - Ef|`.
pub fn p_deviation(space: &FinitePmSpace, p: f64, mode: Mode) -> Result<f64> {
    let v = sup_moment(space, p, mode)?;
    Ok(if p.is_infinite() { v } else { v.powf(1.0 / p) })
}
