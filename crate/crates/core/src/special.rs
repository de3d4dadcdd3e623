//! Standard normal helpers.
//!
//! `psi(t)` is the Gaussian mass of `[0, t]`, so `psi(t) = Phi(t) - 1/2`.

use libm::{erf, erfc};
use std::f64::consts::{PI, SQRT_2};

/// Bisection stopping width for inverse functions.
pub const INVERSE_TOL: f64 = 1e-12;

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn normal_cdf(x: f64) -> f64 {
    if x < 0.0 {
        0.5 * erfc(-x / SQRT_2)
    } else {
        1.0 - 0.5 * erfc(x / SQRT_2)
    }
}

/// Gaussian measure of `[0, t]` for `t >= 0` (odd extension for `t < 0`).
pub fn psi(t: f64) -> f64 {
    0.5 * erf(t / SQRT_2)
}

/// Inverse of [`psi`] on `[0, 1/2)`, by bisection to [`INVERSE_TOL`].
///
/// Returns `+inf` for `y >= 1/2`.
pub fn psi_inv(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 0.5 {
        return f64::INFINITY;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while psi(hi) < y {
        lo = hi;
        hi *= 2.0;
        if hi > 64.0 {
            return hi;
        }
    }
    while hi - lo > INVERSE_TOL {
        let mid = 0.5 * (lo + hi);
        if psi(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Standard normal quantile.
pub fn normal_quantile(u: f64) -> f64 {
    if u <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if u >= 1.0 {
        return f64::INFINITY;
    }
    if u < 0.5 {
        -psi_inv(0.5 - u)
    } else {
        psi_inv(u - 0.5)
    }
}

/// Simpson quadrature of `f` on `[a, b]` with `n` (rounded up to even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 1 { n + 1 } else { n.max(2) };
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_one_matches_quadrature() {
        let quad = simpson(normal_pdf, 0.0, 1.0, 2000);
        assert!((psi(1.0) - quad).abs() < 1e-12, "{} vs {quad}", psi(1.0));
        assert!((psi(1.0) - 0.341_344_746_068_542_9).abs() < 1e-12);
    }

    #[test]
    fn psi_inverse_round_trip() {
        for &t in &[0.0, 0.1, 0.5, 1.0, 2.5, 5.0] {
            assert!((psi_inv(psi(t)) - t).abs() < 1e-9, "t = {t}");
        }
        assert_eq!(psi_inv(0.5), f64::INFINITY);
    }

    #[test]
    fn quantile_is_odd() {
        for &u in &[0.01, 0.2, 0.45] {
            assert!((normal_quantile(u) + normal_quantile(1.0 - u)).abs() < 1e-9);
            assert!((normal_cdf(normal_quantile(u)) - u).abs() < 1e-11);
        }
    }
}
