//! Poincare and log-Sobolev constants of one-dimensional weighted spaces.
//!
//! A [`GridSpace1D`] is a uniform grid carrying a density `w`. Masses are the
//! trapezoid weights `mu_i` (half weight at the two ends), and the Dirichlet
//! energy of a grid function is the edge sum
//!
//! ```text
//! E(f) = sum_e c_e (f_{i+1} - f_i)^2 / h,   c_e = (w_i + w_{i+1}) / 2,
//! ```
//!
//! so `E(f) / Var(f)` is the Rayleigh quotient of the generalized eigenproblem
//! `L f = lambda diag(mu) f` and every constant below uses the same energy.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::observables::{p_variance, variance_of};
use crate::space::{accurate_sum, FinitePmSpace, LipschitzFunction};
use crate::special::{normal_pdf, normal_quantile};

/// Minimum number of grid intervals for spectral computations.
pub const MIN_INTERVALS: usize = 64;

/// Truncation of Gaussian grids, in standard deviations.
pub const GAUSSIAN_CUTOFF: f64 = 8.0;

const TRIAL_SEED: u64 = 0x15_0b01;
const MAX_INVERSE_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Interval,
    Gaussian,
    Custom,
}

/// Uniform grid `x_0 < ... < x_M` with a positive density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpace1D {
    nodes: Vec<f64>,
    h: f64,
    weight: Vec<f64>,
    kind: GridKind,
}

impl GridSpace1D {
    /// Samples `density` on `M + 1` nodes of `[a, b]` and normalizes it so
    /// the trapezoid masses sum to one.
    pub fn from_density(a: f64, b: f64, intervals: usize, density: impl Fn(f64) -> f64) -> Result<Self> {
        if intervals < 2 {
            return Err(Error::arg("a grid needs at least two intervals"));
        }
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::arg(format!("bad grid interval [{a}, {b}]")));
        }
        let h = (b - a) / intervals as f64;
        let nodes: Vec<f64> = (0..=intervals).map(|i| a + i as f64 * h).collect();
        let mut weight: Vec<f64> = nodes.iter().map(|&x| density(x)).collect();
        if weight.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::arg("grid density must be positive and finite"));
        }
        let total = accurate_sum(trapezoid(&weight, h));
        weight.iter_mut().for_each(|w| *w /= total);
        Ok(GridSpace1D { nodes, h, weight, kind: GridKind::Custom })
    }

    /// `[0, r]` with the uniform density.
    pub fn interval(intervals: usize, r: f64) -> Result<Self> {
        let mut g = Self::from_density(0.0, r, intervals, |_| 1.0)?;
        g.kind = GridKind::Interval;
        Ok(g)
    }

    /// Gaussian of standard deviation `sigma` truncated to `+-8 sigma`.
    pub fn gaussian(intervals: usize, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::arg("sigma must be positive"));
        }
        let c = GAUSSIAN_CUTOFF * sigma;
        let mut g = Self::from_density(-c, c, intervals, |x| normal_pdf(x / sigma))?;
        g.kind = GridKind::Gaussian;
        Ok(g)
    }

    /// The grid of `r X`: nodes times `r`, density divided by `r`.
    pub fn scale(&self, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::arg("scale factor must be positive"));
        }
        Ok(GridSpace1D {
            nodes: self.nodes.iter().map(|x| x * r).collect(),
            h: self.h * r,
            weight: self.weight.iter().map(|w| w / r).collect(),
            kind: self.kind,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Trapezoid masses; they sum to one.
    pub fn masses(&self) -> Vec<f64> {
        trapezoid(&self.weight, self.h).collect()
    }

    fn edge_weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.weight.windows(2).map(|w| 0.5 * (w[0] + w[1]))
    }

    /// `lip_a f = |f'|`, by central differences (one-sided at the ends).
    pub fn lip_a(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        (0..n)
            .map(|i| {
                let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
                ((f[b] - f[a]) / ((b - a) as f64 * self.h)).abs()
            })
            .collect()
    }

    /// Energy `int |f'|^q dm` with edge differences and midpoint weights.
    pub fn energy(&self, f: &[f64], q: f64) -> f64 {
        accurate_sum(
            self.edge_weights()
                .zip(f.windows(2))
                .map(|(c, w)| c * ((w[1] - w[0]) / self.h).abs().powf(q) * self.h),
        )
    }

    pub fn mean(&self, f: &[f64]) -> f64 {
        accurate_sum(self.masses().iter().zip(f).map(|(m, v)| m * v))
    }

    pub fn second_moment(&self, f: &[f64]) -> f64 {
        accurate_sum(self.masses().iter().zip(f).map(|(m, v)| m * v * v))
    }

    /// `Ent(g) = int g log g - (int g) log(int g)` for `g >= 0`.
    pub fn entropy(&self, g: &[f64]) -> f64 {
        let xlogx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
        let mu = self.masses();
        let mean = accurate_sum(mu.iter().zip(g).map(|(m, v)| m * v));
        (accurate_sum(mu.iter().zip(g).map(|(m, &v)| m * xlogx(v))) - xlogx(mean)).max(0.0)
    }

    /// `(E|f - Ef|^p)^{1/p}`.
    pub fn p_deviation_of(&self, f: &[f64], p: f64) -> f64 {
        let mu = self.masses();
        let mean = accurate_sum(mu.iter().zip(f).map(|(m, v)| m * v));
        accurate_sum(mu.iter().zip(f).map(|(m, v)| m * (v - mean).abs().powf(p))).powf(1.0 / p)
    }
}

fn trapezoid(w: &[f64], h: f64) -> impl Iterator<Item = f64> + '_ {
    let last = w.len() - 1;
    w.iter().enumerate().map(move |(i, &x)| if i == 0 || i == last { 0.5 * x * h } else { x * h })
}

/// First nonzero eigenpair of the weighted Neumann operator.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralGap {
    pub lambda1: f64,
    pub c22: f64,
    /// Eigenfunction with mean zero and unit second moment.
    pub eigenfunction: Vec<f64>,
    pub iterations: usize,
}

struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl Tridiagonal {
    /// Number of eigenvalues below `x` (Sturm sequence via `LDL^T`).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0_f64;
        for i in 0..self.diag.len() {
            let prev = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] / q };
            q = self.diag[i] - x - prev;
            if q == 0.0 {
                q = -1e-300;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Solves `(T - s I) y = r` by LU with partial pivoting.
    fn solve_shifted(&self, s: f64, r: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut d: Vec<f64> = self.diag.iter().map(|x| x - s).collect();
        let mut dl = self.off.clone();
        let mut du = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(1)];
        let mut b = r.to_vec();
        let nonzero = |x: f64| if x == 0.0 { 1e-300 } else { x };
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                let fact = dl[i] / nonzero(d[i]);
                d[i + 1] -= fact * du[i];
                b[i + 1] -= fact * b[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                let temp = d[i + 1];
                d[i + 1] = du[i] - fact * temp;
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du2[i];
                }
                du[i] = temp;
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - fact * b[i + 1];
            }
            dl[i] = 0.0;
        }
        let mut y = vec![0.0; n];
        for i in (0..n).rev() {
            let mut v = b[i];
            if i + 1 < n {
                v -= du[i] * y[i + 1];
            }
            if i + 2 < n {
                v -= du2[i] * y[i + 2];
            }
            y[i] = v / nonzero(d[i]);
        }
        y
    }
}

fn symmetrized(grid: &GridSpace1D) -> (Tridiagonal, Vec<f64>) {
    let mu = grid.masses();
    let n = mu.len();
    let c: Vec<f64> = grid.edge_weights().map(|c| c / grid.h).collect();
    let diag = (0..n)
        .map(|i| {
            let left = if i > 0 { c[i - 1] } else { 0.0 };
            let right = if i + 1 < n { c[i] } else { 0.0 };
            (left + right) / mu[i]
        })
        .collect();
    let off = (0..n - 1).map(|i| -c[i] / (mu[i] * mu[i + 1]).sqrt()).collect();
    (Tridiagonal { diag, off }, mu)
}

/// Smallest nonzero eigenvalue (Sturm bisection) and its eigenfunction
/// (inverse iteration with constants deflated).
pub fn spectral_gap(grid: &GridSpace1D) -> Result<SpectralGap> {
    if grid.intervals() < MIN_INTERVALS {
        return Err(Error::size("grid intervals (minimum)", grid.intervals(), MIN_INTERVALS));
    }
    let (t, mu) = symmetrized(grid);
    let n = mu.len();
    let upper = (0..n)
        .map(|i| {
            t.diag[i].abs()
                + if i > 0 { t.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { t.off[i].abs() } else { 0.0 }
        })
        .fold(0.0, f64::max);
    let (mut lo, mut hi) = (0.0_f64, upper);
    // lambda_0 = 0 is simple; lambda_1 is where the count first reaches 2.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if t.count_below(mid) >= 2 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let lambda1 = 0.5 * (lo + hi);

    let sq: Vec<f64> = mu.iter().map(|m| m.sqrt()).collect();
    let deflate = |v: &mut Vec<f64>| {
        let dot: f64 = v.iter().zip(&sq).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(&sq).for_each(|(a, b)| *a -= dot * b);
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
    };
    let shift = lambda1 * (1.0 - 1e-9);
    let mut v: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64 - 0.5).collect();
    deflate(&mut v);
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut w = t.solve_shifted(shift, &v);
        deflate(&mut w);
        let sign = if w.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        w.iter_mut().for_each(|a| *a *= sign);
        let change = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if change < 1e-10 {
            break;
        }
        if iterations >= MAX_INVERSE_ITERATIONS {
            return Err(Error::NoConvergence(iterations));
        }
    }
    let mut f: Vec<f64> = v.iter().zip(&sq).map(|(a, s)| a / s).collect();
    if f[n - 1] < f[0] {
        f.iter_mut().for_each(|x| *x = -*x);
    }
    let mean = grid.mean(&f);
    f.iter_mut().for_each(|x| *x -= mean);
    let norm = grid.second_moment(&f).sqrt();
    f.iter_mut().for_each(|x| *x /= norm);
    Ok(SpectralGap { lambda1, c22: 1.0 / lambda1.sqrt(), eigenfunction: f, iterations })
}

/// `(2,2)`-Poincare constant `1 / sqrt(lambda_1)`.
pub fn poincare_c22(grid: &GridSpace1D) -> Result<f64> {
    Ok(spectral_gap(grid)?.c22)
}

/// Deterministic family of smooth trial functions: the eigenfunction and
/// its perturbations of the constant, monomials, trigonometric and
/// exponential functions, then seeded random Fourier sums up to `count`.
pub fn trial_family(grid: &GridSpace1D, count: usize) -> Result<Vec<Vec<f64>>> {
    let eig = spectral_gap(grid)?.eigenfunction;
    let (a, b) = (grid.nodes[0], *grid.nodes.last().unwrap());
    let u: Vec<f64> = grid.nodes.iter().map(|x| (x - a) / (b - a)).collect();
    let std = grid.p_deviation_of(&grid.nodes, 2.0);
    let centre = grid.mean(&grid.nodes);
    let z: Vec<f64> = grid.nodes.iter().map(|x| (x - centre) / std).collect();
    let mut out: Vec<Vec<f64>> = vec![eig.clone()];
    for &e in &[1e-3, 1e-2, 0.05, 0.1, 0.3, 0.5, 0.9] {
        for s in [1.0, -1.0] {
            out.push(eig.iter().map(|g| 1.0 + s * e * g).collect());
        }
    }
    for k in 1..=8 {
        out.push(u.iter().map(|x| x.powi(k)).collect());
        out.push(z.iter().map(|x| x.powi(k)).collect());
    }
    for k in 1..=8 {
        let w = k as f64 * PI;
        out.push(u.iter().map(|x| (w * x).cos()).collect());
        out.push(u.iter().map(|x| (w * x).sin()).collect());
    }
    for k in -8..=8 {
        if k != 0 {
            let c = k as f64 / 4.0;
            out.push(z.iter().map(|x| (c * x).exp()).collect());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(TRIAL_SEED);
    while out.len() < count {
        let terms = rng.gen_range(1..=6);
        let coeffs: Vec<(f64, f64)> = (1..=terms)
            .map(|k| (rng.gen_range(-1.0..1.0) / k as f64, rng.gen_range(-1.0..1.0) / k as f64))
            .collect();
        let g: Vec<f64> = u
            .iter()
            .map(|x| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, (c, s))| {
                        let w = (k + 1) as f64 * PI;
                        c * (w * x).cos() + s * (w * x).sin()
                    })
                    .sum()
            })
            .collect();
        if rng.gen_bool(0.5) {
            let e = 10f64.powf(rng.gen_range(-3.0..0.0));
            out.push(g.iter().map(|v| 1.0 + e * v).collect());
        } else {
            out.push(g);
        }
    }
    Ok(out)
}

/// Lower bound on `C_{p,q}`: the best ratio `V^{(p)}(f)^{1/p} / ||f'||_q`
/// over the trial family.
pub fn poincare_pq_lower(grid: &GridSpace1D, p: f64, q: f64, trials: usize) -> Result<f64> {
    if !(p >= 1.0 && q >= 1.0 && p.is_finite() && q.is_finite()) {
        return Err(Error::arg(format!("need 1 <= p, q < inf, got p = {p}, q = {q}")));
    }
    let mut best = 0.0_f64;
    for f in trial_family(grid, trials)? {
        let grad = grid.energy(&f, q).powf(1.0 / q);
        if grad > 1e-300 {
            best = best.max(grid.p_deviation_of(&f, p) / grad);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize)]
pub struct LogSobolevReport {
    pub constant: f64,
    pub trials: usize,
    /// Largest `Ent(f^2) - 2 C^2 int f'^2` with `int f^2 = 1`; positive
    /// values refute the constant.
    pub max_violation: f64,
    /// Largest `sqrt(Ent(f^2) / (2 int f'^2))` over the trials.
    pub lower_bound: f64,
    pub min_entropy: f64,
}

/// Evaluates the log-Sobolev inequality with constant `c` on the trial family.
pub fn log_sobolev_check(grid: &GridSpace1D, c: f64, trials: usize) -> Result<LogSobolevReport> {
    if !(c > 0.0) {
        return Err(Error::arg("log-Sobolev constant must be positive"));
    }
    let family = trial_family(grid, trials)?;
    let mut report = LogSobolevReport {
        constant: c,
        trials: family.len(),
        max_violation: f64::NEG_INFINITY,
        lower_bound: 0.0,
        min_entropy: f64::INFINITY,
    };
    for mut f in family {
        let norm = grid.second_moment(&f).sqrt();
        if !(norm > 0.0) {
            continue;
        }
        f.iter_mut().for_each(|v| *v /= norm);
        let sq: Vec<f64> = f.iter().map(|v| v * v).collect();
        let ent = grid.entropy(&sq);
        let energy = grid.energy(&f, 2.0);
        report.min_entropy = report.min_entropy.min(ent);
        report.max_violation = report.max_violation.max(ent - 2.0 * c * c * energy);
        if energy > 1e-300 {
            report.lower_bound = report.lower_bound.max((ent / (2.0 * energy)).sqrt());
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct DisconnectionReport {
    /// `C_{p,q} = inf` for all `p, q in (1, inf)`.
    pub infinite: bool,
    /// `d(x0, .)`: its `lip_a` vanishes on a finite space while its variance
    /// is positive.
    pub witness: Option<Vec<f64>>,
    pub witness_variance: f64,
}

/// Finite spaces with two or more points are mm-disconnected, so their
/// Poincare constants are infinite; the one-point space reports 0.
pub fn mm_disconnected_infinite_constant(space: &FinitePmSpace) -> Result<DisconnectionReport> {
    if space.len() < 2 {
        return Ok(DisconnectionReport { infinite: false, witness: None, witness_variance: 0.0 });
    }
    let f = LipschitzFunction::distance_from(space, 0).values().to_vec();
    let v = variance_of(space, &f)?;
    debug_assert!(p_variance(space, &f, 2.0)? == v);
    Ok(DisconnectionReport { infinite: v > 0.0, witness: Some(f), witness_variance: v })
}

/// A one-dimensional probability density.
pub trait Density1D {
    fn pdf(&self, x: f64) -> f64;
    fn quantile(&self, u: f64) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub struct Uniform {
    pub a: f64,
    pub b: f64,
}

impl Density1D for Uniform {
    fn pdf(&self, x: f64) -> f64 {
        if x >= self.a && x <= self.b {
            1.0 / (self.b - self.a)
        } else {
            0.0
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        self.a + u * (self.b - self.a)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Gaussian {
    pub sigma: f64,
}

impl Density1D for Gaussian {
    fn pdf(&self, x: f64) -> f64 {
        normal_pdf(x / self.sigma) / self.sigma
    }

    fn quantile(&self, u: f64) -> f64 {
        self.sigma * normal_quantile(u)
    }
}

/// Piecewise-linear interpolation of a grid density.
impl Density1D for GridSpace1D {
    fn pdf(&self, x: f64) -> f64 {
        let (a, b) = (self.nodes[0], *self.nodes.last().unwrap());
        if x < a || x > b {
            return 0.0;
        }
        let t = ((x - a) / self.h).min(self.intervals() as f64 - 1e-12);
        let i = t.floor() as usize;
        let s = t - i as f64;
        self.weight[i] * (1.0 - s) + self.weight[i + 1] * s
    }

    fn quantile(&self, u: f64) -> f64 {
        // cumulative mass of exact integrals of the linear interpolant
        let mut acc = 0.0;
        for i in 0..self.intervals() {
            let (w0, w1) = (self.weight[i], self.weight[i + 1]);
            let cell = 0.5 * (w0 + w1) * self.h;
            if acc + cell >= u || i + 1 == self.intervals() {
                let need = (u - acc).max(0.0);
                // solve w0 s + (w1 - w0) s^2 / (2h) = need for s in [0, h]
                let qa = (w1 - w0) / (2.0 * self.h);
                let s = if qa.abs() < 1e-300 {
                    need / w0
                } else {
                    (-w0 + (w0 * w0 + 4.0 * qa * need).max(0.0).sqrt()) / (2.0 * qa)
                };
                return self.nodes[i] + s.clamp(0.0, self.h);
            }
            acc += cell;
        }
        *self.nodes.last().unwrap()
    }
}

/// Smallest `sigma` such that the monotone map from the centred Gaussian of
/// variance `sigma^2` onto `target` is 1-Lipschitz:
/// `sigma* = sup_u phi(Phi^{-1}(u)) / rho(Q(u))`.
pub fn gaussian_domination_scale(target: &dyn Density1D) -> Result<f64> {
    const K: usize = 20_000;
    let ratio = |u: f64| -> Result<f64> {
        let rho = target.pdf(target.quantile(u));
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::arg(format!("target density vanishes or is unbounded at u = {u}")));
        }
        Ok(normal_pdf(normal_quantile(u)) / rho)
    };
    let mut best = (0.0_f64, 0usize);
    for k in 1..K {
        let v = ratio(k as f64 / K as f64)?;
        if v > best.0 {
            best = (v, k);
        }
    }
    // golden-section refinement around the best grid point
    let (mut a, mut b) = ((best.1 - 1) as f64 / K as f64, (best.1 + 1) as f64 / K as f64);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (ratio(c.max(1e-15))?, ratio(d.min(1.0 - 1e-15))?);
    for _ in 0..100 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = ratio(c.max(1e-15))?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = ratio(d.min(1.0 - 1e-15))?;
        }
    }
    Ok(best.0.max(fc).max(fd))
}
