//! Example spaces and approximation sequences.
//!
//! Sampled generators take an explicit seed and are bit-reproducible
//! (ChaCha8). Large samples are kept as a [`PointCloud`], which evaluates
//! coordinate projections without a distance matrix.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::atoms::AtomVector;
use crate::error::{Error, Result};
use crate::observables::partial_diameter;
use crate::space::FinitePmSpace;
use crate::special::normal_quantile;

/// Largest point count materialized as a distance matrix.
pub const SPACE_POINT_LIMIT: usize = 4096;

/// Largest `n` in [`dissipation_family`] (`2^n` diffuse points).
pub const DISSIPATION_LIMIT: u32 = 12;

/// Points sampled in `R^dim`, all with mass `1 / len`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Values of the 1-Lipschitz projection onto coordinate `k`.
    pub fn coordinate(&self, k: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.coords[i * self.dim + k]).collect()
    }

    /// Partial diameter of the projection onto coordinate `k`.
    pub fn projection_partial_diameter(&self, k: usize, kappa: f64) -> f64 {
        let mass = vec![1.0 / self.len() as f64; self.len()];
        partial_diameter(&self.coordinate(k), &mass, kappa)
    }

    /// Mean over the coordinate axes of the projection partial diameters;
    /// each term is a lower bound on the observable diameter of the sample.
    pub fn projection_obs_diam(&self, kappa: f64) -> f64 {
        (0..self.dim).map(|k| self.projection_partial_diameter(k, kappa)).sum::<f64>() / self.dim as f64
    }

    /// The empirical space with Euclidean distances.
    pub fn to_space(&self) -> Result<FinitePmSpace> {
        let n = self.len();
        if n > SPACE_POINT_LIMIT {
            return Err(Error::size("points", n, SPACE_POINT_LIMIT));
        }
        let mut flat = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.point(i).iter().zip(self.point(j)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                flat[i * n + j] = d;
                flat[j * n + i] = d;
            }
        }
        FinitePmSpace::from_trusted_metric(labels("p", n), flat, vec![1.0 / n as f64; n])
    }
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn line_space(values: &[f64], mass: Vec<f64>) -> Result<FinitePmSpace> {
    let n = values.len();
    let flat = (0..n * n).map(|k| (values[k / n] - values[k % n]).abs()).collect();
    FinitePmSpace::from_trusted_metric(labels("", n), flat, mass)
}

/// `m` equally spaced points on `[0, r]` with masses `1/m`.
pub fn interval_grid(m: usize, r: f64) -> Result<FinitePmSpace> {
    if m < 2 {
        return Err(Error::arg("interval_grid needs m >= 2"));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::arg("interval_grid needs r > 0"));
    }
    let xs: Vec<f64> = (0..m).map(|i| r * i as f64 / (m - 1) as f64).collect();
    line_space(&xs, vec![1.0 / m as f64; m])
}

/// Gaussian quantiles `sigma Phi^{-1}((i + 1/2) / m)` with masses `1/m`.
pub fn gaussian_grid(m: usize, sigma: f64) -> Result<FinitePmSpace> {
    if m < 1 {
        return Err(Error::arg("gaussian_grid needs m >= 1"));
    }
    if !(sigma > 0.0) {
        return Err(Error::arg("sigma must be positive"));
    }
    let xs: Vec<f64> = (0..m).map(|i| sigma * normal_quantile((i as f64 + 0.5) / m as f64)).collect();
    line_space(&xs, vec![1.0 / m as f64; m])
}

/// `n_points` i.i.d. samples of the centred Gaussian of covariance `sigma^2 I_dim`.
pub fn gaussian_cloud(n_points: usize, dim: usize, sigma: f64, seed: u64) -> Result<PointCloud> {
    if n_points == 0 || dim == 0 {
        return Err(Error::arg("need at least one point and one dimension"));
    }
    if !(sigma > 0.0) {
        return Err(Error::arg("sigma must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..n_points * dim).map(|_| {
        let z: f64 = StandardNormal.sample(&mut rng);
        sigma * z
    })
    .collect();
    Ok(PointCloud { dim, coords })
}

/// [`gaussian_cloud`] as a space.
pub fn gaussian_sample(n_points: usize, dim: usize, sigma: f64, seed: u64) -> Result<FinitePmSpace> {
    gaussian_cloud(n_points, dim, sigma, seed)?.to_space()
}

/// Uniform samples on the sphere `S^{n_dim}(radius)` in `R^{n_dim + 1}`
/// (normalized Gaussian vectors).
pub fn sphere_cloud(n_dim: usize, radius: f64, n_points: usize, seed: u64) -> Result<PointCloud> {
    if n_dim == 0 || n_points == 0 {
        return Err(Error::arg("need n_dim >= 1 and at least one point"));
    }
    if !(radius > 0.0) {
        return Err(Error::arg("radius must be positive"));
    }
    let dim = n_dim + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(n_points * dim);
    while coords.len() < n_points * dim {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect::<Vec<f64>>();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            coords.extend(v.iter().map(|x| radius * x / norm));
        }
    }
    Ok(PointCloud { dim, coords })
}

/// [`sphere_cloud`] as a space with chordal distances.
pub fn sphere_sample(n_dim: usize, radius: f64, n_points: usize, seed: u64) -> Result<FinitePmSpace> {
    sphere_cloud(n_dim, radius, n_points, seed)?.to_space()
}

/// Discretized `X_alpha`: `m_diffuse` grid points on `[-1, 0]` sharing mass
/// `1 - ||alpha||_1`, and atoms of mass `alpha_i` at the integers `i`.
/// The diffuse part is omitted when `||alpha||_1 = 1`.
pub fn atom_space(alpha: &AtomVector, m_diffuse: usize) -> Result<FinitePmSpace> {
    let rest = 1.0 - alpha.norm();
    let diffuse = rest > 1e-12;
    if diffuse && m_diffuse == 0 {
        return Err(Error::arg("atom_space needs m_diffuse >= 1 when ||alpha|| < 1"));
    }
    let mut xs = Vec::new();
    let mut mass = Vec::new();
    let mut names = Vec::new();
    if diffuse {
        for k in 0..m_diffuse {
            xs.push(if m_diffuse == 1 { -0.5 } else { -1.0 + k as f64 / (m_diffuse - 1) as f64 });
            mass.push(rest / m_diffuse as f64);
            names.push(format!("d{k}"));
        }
    }
    for (i, &a) in alpha.entries().iter().enumerate() {
        xs.push((i + 1) as f64);
        mass.push(a);
        names.push(format!("{}", i + 1));
    }
    let n = xs.len();
    let flat = (0..n * n).map(|k| (xs[k / n] - xs[k % n]).abs()).collect();
    FinitePmSpace::from_trusted_metric(names, flat, mass)
}

/// Equidistant space: atoms `x_1..x_N` of mass `alpha_i`, then `2^n` points
/// `y_k` sharing mass `1 - ||alpha||_1`; distinct points are `delta` apart.
pub fn dissipation_family(alpha: &AtomVector, delta: f64, n: u32) -> Result<FinitePmSpace> {
    if n > DISSIPATION_LIMIT {
        return Err(Error::size("dissipation level", n as usize, DISSIPATION_LIMIT as usize));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::arg("delta must be positive and finite"));
    }
    let rest = 1.0 - alpha.norm();
    let ys = if rest > 1e-12 { 1usize << n } else { 0 };
    let mut names: Vec<String> = (1..=alpha.support_len()).map(|i| format!("x{i}")).collect();
    names.extend((0..ys).map(|k| format!("y{k}")));
    let mut mass = alpha.entries().to_vec();
    mass.extend(std::iter::repeat(rest / ys.max(1) as f64).take(ys));
    let len = mass.len();
    let flat = (0..len * len).map(|k| if k / len == k % len { 0.0 } else { delta }).collect();
    FinitePmSpace::from_trusted_metric(names, flat, mass)
}

/// Map from `dissipation_family(alpha, _, n + 1)` onto level `n`: atoms are
/// fixed and `y_k` goes to `y_{k mod 2^n}`.
pub fn dissipation_projection(alpha: &AtomVector, n: u32) -> Vec<usize> {
    let na = alpha.support_len();
    let ys = if alpha.norm() < 1.0 - 1e-12 { 1usize << (n + 1) } else { 0 };
    (0..na).chain((0..ys).map(|k| na + k % (1usize << n))).collect()
}

/// Spaces `X_n = {x_i} + {y_1..y_n}` with all distinct points `n` apart,
/// atoms `alpha_i` at the `x_i` and mass `(1 - ||alpha||_1) / n` at each `y_k`.
pub fn spreading_family(alpha: &AtomVector, n: usize) -> Result<FinitePmSpace> {
    if n == 0 {
        return Err(Error::arg("spreading_family needs n >= 1"));
    }
    let rest = 1.0 - alpha.norm();
    let ys = if rest > 1e-12 { n } else { 0 };
    let mut names: Vec<String> = (1..=alpha.support_len()).map(|i| format!("x{i}")).collect();
    names.extend((1..=ys).map(|k| format!("y{k}")));
    let mut mass = alpha.entries().to_vec();
    mass.extend(std::iter::repeat(rest / n as f64).take(ys));
    let len = mass.len();
    if len > SPACE_POINT_LIMIT {
        return Err(Error::size("points", len, SPACE_POINT_LIMIT));
    }
    let flat = (0..len * len).map(|k| if k / len == k % len { 0.0 } else { n as f64 }).collect();
    FinitePmSpace::from_trusted_metric(names, flat, mass)
}

/// `X, X^2, ..., X^levels` under the l_p product, with `witnesses[k]` the
/// projection from level `k + 2` onto level `k + 1` (dropping the last factor).
#[derive(Debug, Clone)]
pub struct ProductTower {
    pub levels: Vec<FinitePmSpace>,
    pub witnesses: Vec<Vec<usize>>,
}

pub fn product_tower(base: &FinitePmSpace, p: f64, levels: u32) -> Result<ProductTower> {
    if levels == 0 {
        return Err(Error::arg("product_tower needs at least one level"));
    }
    let top = (base.len() as u128).checked_pow(levels).unwrap_or(u128::MAX);
    if top > SPACE_POINT_LIMIT as u128 {
        return Err(Error::size("tower points", top.min(usize::MAX as u128) as usize, SPACE_POINT_LIMIT));
    }
    let mut out = vec![base.clone()];
    let mut witnesses = Vec::new();
    for _ in 1..levels {
        let prev = out.last().unwrap();
        let next = prev.product(base, p)?;
        witnesses.push((0..next.len()).map(|k| k / base.len()).collect());
        out.push(next);
    }
    Ok(ProductTower { levels: out, witnesses })
}

fn default_p() -> f64 {
    2.0
}

/// A serializable generator call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    IntervalGrid {
        m: usize,
        #[serde(default = "one")]
        r: f64,
    },
    GaussianSample {
        n_points: usize,
        dim: usize,
        #[serde(default = "one")]
        sigma: f64,
        seed: u64,
    },
    GaussianGrid {
        m: usize,
        #[serde(default = "one")]
        sigma: f64,
    },
    SphereSample {
        n_dim: usize,
        radius: f64,
        n_points: usize,
        seed: u64,
    },
    TwoPoint {
        d: f64,
        p: f64,
    },
    AtomSpace {
        alpha: AtomVector,
        m_diffuse: usize,
    },
    DissipationFamily {
        alpha: AtomVector,
        delta: f64,
        n: u32,
    },
    ProductTower {
        base: Box<GeneratorSpec>,
        #[serde(with = "crate::real", default = "default_p")]
        p: f64,
        levels: u32,
    },
}

fn one() -> f64 {
    1.0
}

impl GeneratorSpec {
    /// Short name of the generator kind.
    pub fn kind(&self) -> &'static str {
        match self {
            GeneratorSpec::IntervalGrid { .. } => "interval_grid",
            GeneratorSpec::GaussianSample { .. } => "gaussian_sample",
            GeneratorSpec::GaussianGrid { .. } => "gaussian_grid",
            GeneratorSpec::SphereSample { .. } => "sphere_sample",
            GeneratorSpec::TwoPoint { .. } => "two_point",
            GeneratorSpec::AtomSpace { .. } => "atom_space",
            GeneratorSpec::DissipationFamily { .. } => "dissipation_family",
            GeneratorSpec::ProductTower { .. } => "product_tower",
        }
    }

    /// Whether the result is a random sample (its invariants are estimates).
    pub fn is_sampled(&self) -> bool {
        match self {
            GeneratorSpec::GaussianSample { .. } | GeneratorSpec::SphereSample { .. } => true,
            GeneratorSpec::ProductTower { base, .. } => base.is_sampled(),
            _ => false,
        }
    }

    /// Builds the space; a product tower yields its top level.
    pub fn generate(&self) -> Result<FinitePmSpace> {
        match self {
            GeneratorSpec::IntervalGrid { m, r } => interval_grid(*m, *r),
            GeneratorSpec::GaussianSample { n_points, dim, sigma, seed } => {
                gaussian_sample(*n_points, *dim, *sigma, *seed)
            }
            GeneratorSpec::GaussianGrid { m, sigma } => gaussian_grid(*m, *sigma),
            GeneratorSpec::SphereSample { n_dim, radius, n_points, seed } => {
                sphere_sample(*n_dim, *radius, *n_points, *seed)
            }
            GeneratorSpec::TwoPoint { d, p } => FinitePmSpace::two_point(*d, *p),
            GeneratorSpec::AtomSpace { alpha, m_diffuse } => atom_space(alpha, *m_diffuse),
            GeneratorSpec::DissipationFamily { alpha, delta, n } => dissipation_family(alpha, *delta, *n),
            GeneratorSpec::ProductTower { base, p, levels } => {
                Ok(product_tower(&base.generate()?, *p, *levels)?.levels.pop().unwrap())
            }
        }
    }
}
