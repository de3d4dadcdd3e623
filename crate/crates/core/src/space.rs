//! Finite pm-spaces and the measure-level distances defined on them.
//!
//! A [`FinitePmSpace`] stores only support points: every mass is strictly
//! positive and distinct points are at positive distance, so `diam` and the
//! isomorphism test never have to reason about null sets.


use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::{EQ_TOL, VALIDATION_TOL};

/// Exact rational mass, used when a space is given with `mass_rational`.
pub type ExactMass = Ratio<i128>;

/// Largest space handled by [`FinitePmSpace::mm_isomorphic`].
pub const MM_ISO_LIMIT: usize = 10;

/// Largest common space handled by [`prokhorov`] (subset enumeration).
pub const PROKHOROV_LIMIT: usize = 20;

/// Canonical JSON shape of a space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSpace {
    pub points: Vec<String>,
    pub dist: Vec<Vec<f64>>,
    pub mass: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_rational: Option<Vec<String>>,
}

impl RawSpace {
    /// Returns the first violated invariant, scanning in a fixed order.
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        let n = self.dist.len();
        if n == 0 {
            return Err(Violation::Empty);
        }
        if self.points.len() != n {
            return Err(Violation::LabelCount { labels: self.points.len(), points: n });
        }
        for (row, r) in self.dist.iter().enumerate() {
            if r.len() != n {
                return Err(Violation::NotSquare { row, len: r.len(), expected: n });
            }
        }
        if self.mass.len() != n {
            return Err(Violation::MassLength { len: self.mass.len(), expected: n });
        }
        let flat: Vec<f64> = self.dist.iter().flatten().copied().collect();
        check_metric(n, &flat, true)?;
        check_mass(&self.mass)?;
        if let Some(exact) = &self.mass_rational {
            parse_exact(exact, &self.mass)?;
        }
        Ok(())
    }
}

fn check_metric(n: usize, d: &[f64], triangle: bool) -> std::result::Result<(), Violation> {
    for i in 0..n {
        for j in 0..n {
            let v = d[i * n + j];
            if !v.is_finite() {
                return Err(Violation::NonFiniteDistance { i, j });
            }
            if v < 0.0 {
                return Err(Violation::NegativeDistance { i, j });
            }
        }
    }
    for i in 0..n {
        if d[i * n + i] != 0.0 {
            return Err(Violation::NonzeroDiagonal { i });
        }
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (d[i * n + j], d[j * n + i]);
            if (a - b).abs() > VALIDATION_TOL * a.max(b).max(1.0) {
                return Err(Violation::Asymmetric { i, j });
            }
            if a == 0.0 || b == 0.0 {
                return Err(Violation::Coincident { i, j });
            }
            lo = lo.min(a);
            hi = hi.max(a);
        }
    }
    // Any three distances in [lo, 2 lo] satisfy the triangle inequality.
    if !triangle || hi <= 2.0 * lo {
        return Ok(());
    }
    for i in 0..n {
        for j in 0..n {
            let dij = d[i * n + j];
            for k in 0..n {
                let dik = d[i * n + k];
                let bound = dij + d[j * n + k];
                if dik > bound + VALIDATION_TOL * bound.max(1.0) {
                    return Err(Violation::Triangle { i, j, k });
                }
            }
        }
    }
    Ok(())
}

fn check_mass(mass: &[f64]) -> std::result::Result<(), Violation> {
    for (i, &m) in mass.iter().enumerate() {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Violation::NonPositiveMass { i });
        }
    }
    let sum = accurate_sum(mass.iter().copied());
    if (sum - 1.0).abs() > VALIDATION_TOL {
        return Err(Violation::MassSum { sum });
    }
    Ok(())
}

fn parse_ratio(s: &str) -> Option<ExactMass> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i128 = p.trim().parse().ok()?;
            let q: i128 = q.trim().parse().ok()?;
            (q > 0).then(|| Ratio::new(p, q))
        }
        None => s.parse::<i128>().ok().map(Ratio::from_integer),
    }
}

fn ratio_to_f64(r: &ExactMass) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn parse_exact(strs: &[String], mass: &[f64]) -> std::result::Result<Vec<ExactMass>, Violation> {
    if strs.len() != mass.len() {
        return Err(Violation::MassLength { len: strs.len(), expected: mass.len() });
    }
    let mut out = Vec::with_capacity(strs.len());
    let mut total = ExactMass::from_integer(0);
    for (i, s) in strs.iter().enumerate() {
        let r = parse_ratio(s).ok_or(Violation::ExactMass { i })?;
        if r <= ExactMass::from_integer(0) || (ratio_to_f64(&r) - mass[i]).abs() > VALIDATION_TOL {
            return Err(Violation::ExactMass { i });
        }
        total += r;
        out.push(r);
    }
    if total != ExactMass::from_integer(1) {
        return Err(Violation::MassSum { sum: ratio_to_f64(&total) });
    }
    Ok(out)
}

/// Neumaier-compensated sum.
pub fn accurate_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = 0.0_f64;
    let mut c = 0.0_f64;
    for x in xs {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

/// Relative-or-absolute comparison at [`EQ_TOL`].
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= EQ_TOL * a.abs().max(b.abs()).max(1.0)
}

/// A finite metric space with a fully supported probability measure.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawSpace", into = "RawSpace")]
pub struct FinitePmSpace {
    points: Vec<String>,
    base: Vec<f64>,
    scale: f64,
    mass: Vec<f64>,
    exact: Option<Vec<ExactMass>>,
}

impl TryFrom<RawSpace> for FinitePmSpace {
    type Error = Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        raw.validate()?;
        let exact = match &raw.mass_rational {
            Some(s) => Some(parse_exact(s, &raw.mass)?),
            None => None,
        };
        Ok(FinitePmSpace {
            points: raw.points,
            base: raw.dist.into_iter().flatten().collect(),
            scale: 1.0,
            mass: raw.mass,
            exact,
        })
    }
}

impl From<FinitePmSpace> for RawSpace {
    fn from(x: FinitePmSpace) -> RawSpace {
        RawSpace {
            dist: x.dist_matrix(),
            mass_rational: x
                .exact
                .as_ref()
                .map(|e| e.iter().map(|r| format!("{}/{}", r.numer(), r.denom())).collect()),
            points: x.points,
            mass: x.mass,
        }
    }
}

impl PartialEq for FinitePmSpace {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points
            && self.mass == other.mass
            && (0..self.len()).all(|i| (0..self.len()).all(|j| self.dist(i, j) == other.dist(i, j)))
    }
}

impl FinitePmSpace {
    /// Builds and validates a space from labels, a distance matrix and masses.
    pub fn new(points: Vec<String>, dist: Vec<Vec<f64>>, mass: Vec<f64>) -> Result<Self> {
        RawSpace { points, dist, mass, mass_rational: None }.try_into()
    }

    /// Like [`FinitePmSpace::new`] with labels `"0"`, `"1"`, ...
    pub fn from_matrix(dist: Vec<Vec<f64>>, mass: Vec<f64>) -> Result<Self> {
        let points = (0..dist.len()).map(|i| i.to_string()).collect();
        Self::new(points, dist, mass)
    }

    /// Builds a space whose masses are exact rationals.
    pub fn with_exact_masses(
        points: Vec<String>,
        dist: Vec<Vec<f64>>,
        exact: &[ExactMass],
    ) -> Result<Self> {
        let mass = exact.iter().map(ratio_to_f64).collect();
        let strs = exact.iter().map(|r| format!("{}/{}", r.numer(), r.denom())).collect();
        RawSpace { points, dist, mass, mass_rational: Some(strs) }.try_into()
    }

    /// Builds a space from a flat row-major matrix whose triangle inequality
    /// is guaranteed by construction (Euclidean data, products, ultrametrics).
    ///
    /// All other invariants are still checked.
    pub(crate) fn from_trusted_metric(
        points: Vec<String>,
        flat: Vec<f64>,
        mass: Vec<f64>,
    ) -> Result<Self> {
        let n = mass.len();
        if n == 0 {
            return Err(Violation::Empty.into());
        }
        if points.len() != n {
            return Err(Violation::LabelCount { labels: points.len(), points: n }.into());
        }
        if flat.len() != n * n {
            return Err(Violation::NotSquare { row: 0, len: flat.len() / n.max(1), expected: n }.into());
        }
        check_metric(n, &flat, false)?;
        check_mass(&mass)?;
        Ok(FinitePmSpace { points, base: flat, scale: 1.0, mass, exact: None })
    }

    /// The one-point space.
    pub fn one_point() -> Self {
        FinitePmSpace {
            points: vec!["*".into()],
            base: vec![0.0],
            scale: 1.0,
            mass: vec![1.0],
            exact: Some(vec![ExactMass::from_integer(1)]),
        }
    }

    /// Two points at distance `d` with masses `(p, 1 - p)`.
    pub fn two_point(d: f64, p: f64) -> Result<Self> {
        Self::from_matrix(vec![vec![0.0, d], vec![d, 0.0]], vec![p, 1.0 - p])
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spaces always serialize")
    }

    pub fn read(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// Re-checks every invariant. Always `Ok` for values built by this crate.
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        RawSpace::from(self.clone()).validate()
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.points
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.base[i * self.len() + j] * self.scale
    }

    pub fn dist_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n).map(|i| (0..n).map(|j| self.dist(i, j)).collect()).collect()
    }

    #[inline]
    pub fn mass(&self, i: usize) -> f64 {
        self.mass[i]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn exact_masses(&self) -> Option<&[ExactMass]> {
        self.exact.as_deref()
    }

    pub fn diam(&self) -> f64 {
        let n = self.len();
        let mut d = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                d = d.max(self.dist(i, j));
            }
        }
        d
    }

    /// Sorted distinct off-diagonal distances.
    pub fn distinct_distances(&self) -> Vec<f64> {
        let n = self.len();
        let mut v = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                v.push(self.dist(i, j));
            }
        }
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// `tX`: distances multiplied by `t`, masses unchanged.
    ///
    /// The factor is kept separately, so `scale(scale(X, s), t)` and
    /// `scale(X, s * t)` are bitwise equal.
    pub fn scale(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::arg(format!("scale factor must be positive, got {t}")));
        }
        let mut out = self.clone();
        out.scale = self.scale * t;
        Ok(out)
    }

    /// Reorders points: point `k` of the result is point `perm[k]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let n = self.len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::arg("not a permutation"));
        }
        let mut base = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                base[a * n + b] = self.base[perm[a] * n + perm[b]];
            }
        }
        Ok(FinitePmSpace {
            points: perm.iter().map(|&p| self.points[p].clone()).collect(),
            base,
            scale: self.scale,
            mass: perm.iter().map(|&p| self.mass[p]).collect(),
            exact: self.exact.as_ref().map(|e| perm.iter().map(|&p| e[p]).collect()),
        })
    }

    /// The l_p product `X x_p Y` for `p` in `[1, inf]` (`f64::INFINITY` for the max metric).
    ///
    /// Point `(i, j)` has index `i * |Y| + j`.
    pub fn product(&self, other: &Self, p: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::arg(format!("product exponent must be >= 1, got {p}")));
        }
        let (n, m) = (self.len(), other.len());
        let nm = n * m;
        let mut flat = vec![0.0; nm * nm];
        for i in 0..n {
            for j in 0..m {
                for k in 0..n {
                    for l in 0..m {
                        flat[(i * m + j) * nm + k * m + l] = lp_norm(self.dist(i, k), other.dist(j, l), p);
                    }
                }
            }
        }
        let mut points = Vec::with_capacity(nm);
        let mut mass = Vec::with_capacity(nm);
        for i in 0..n {
            for j in 0..m {
                points.push(format!("({},{})", self.points[i], other.points[j]));
                mass.push(self.mass[i] * other.mass[j]);
            }
        }
        let renorm = accurate_sum(mass.iter().copied());
        if (renorm - 1.0).abs() > VALIDATION_TOL / 2.0 {
            mass.iter_mut().for_each(|x| *x /= renorm);
        }
        let mut out = Self::from_trusted_metric(points, flat, mass)?;
        if let (Some(a), Some(b)) = (&self.exact, &other.exact) {
            out.exact = Some(a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect());
        }
        Ok(out)
    }

    /// Whether a bijection preserves distances and masses (to [`EQ_TOL`]).
    pub fn mm_isomorphic(&self, other: &Self) -> Result<bool> {
        let n = self.len();
        if n > MM_ISO_LIMIT {
            return Err(Error::size("points", n, MM_ISO_LIMIT));
        }
        if other.len() != n {
            return Ok(false);
        }
        let mut a: Vec<f64> = self.mass.clone();
        let mut b: Vec<f64> = other.mass.clone();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        if a.iter().zip(&b).any(|(x, y)| !approx_eq(*x, *y)) {
            return Ok(false);
        }
        let profile = |s: &Self, i: usize| {
            let mut r: Vec<f64> = (0..n).map(|j| s.dist(i, j)).collect();
            r.sort_by(f64::total_cmp);
            r
        };
        let pa: Vec<Vec<f64>> = (0..n).map(|i| profile(self, i)).collect();
        let pb: Vec<Vec<f64>> = (0..n).map(|i| profile(other, i)).collect();
        let mut map = vec![usize::MAX; n];
        let mut used = vec![false; n];
        Ok(iso_dfs(self, other, &pa, &pb, 0, &mut map, &mut used))
    }

    /// The space's own mass as a measure on itself.
    pub fn uniform_on_support(&self) -> Vec<f64> {
        vec![1.0 / self.len() as f64; self.len()]
    }

    /// `Ent(f) = sum f log f dm - (sum f dm) log(sum f dm)` with `0 log 0 = 0`.
    pub fn entropy(&self, f: &[f64]) -> Result<f64> {
        if f.len() != self.len() {
            return Err(Error::LengthMismatch(f.len(), self.len()));
        }
        if let Some(x) = f.iter().find(|&&x| !(x >= 0.0)) {
            return Err(Error::arg(format!("entropy needs nonnegative values, got {x}")));
        }
        let xlogx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
        let mean = accurate_sum(f.iter().zip(&self.mass).map(|(x, m)| x * m));
        let first = accurate_sum(f.iter().zip(&self.mass).map(|(&x, m)| xlogx(x) * m));
        Ok((first - xlogx(mean)).max(0.0))
    }

    /// McShane extension `x -> min_{y in subset} f(y) + L d(x, y)`.
    pub fn mcshane_extend(&self, subset: &[usize], values: &[f64], lip: f64) -> Result<LipschitzFunction> {
        if subset.len() != values.len() {
            return Err(Error::LengthMismatch(subset.len(), values.len()));
        }
        if subset.is_empty() {
            return Err(Error::arg("McShane extension needs a nonempty subset"));
        }
        if !(lip >= 0.0) {
            return Err(Error::arg("Lipschitz constant must be nonnegative"));
        }
        if let Some(&bad) = subset.iter().find(|&&i| i >= self.len()) {
            return Err(Error::arg(format!("subset index {bad} out of range")));
        }
        for a in 0..subset.len() {
            for b in 0..subset.len() {
                let gap = (values[a] - values[b]).abs();
                let allowed = lip * self.dist(subset[a], subset[b]);
                if gap > allowed + EQ_TOL * allowed.max(1.0) {
                    return Err(Error::arg(format!(
                        "values are not {lip}-Lipschitz on the subset (points {} and {})",
                        subset[a], subset[b]
                    )));
                }
            }
        }
        let vals = (0..self.len())
            .map(|x| {
                subset
                    .iter()
                    .zip(values)
                    .map(|(&y, &fy)| fy + lip * self.dist(x, y))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        Ok(LipschitzFunction { values: vals, lip_bound: lip })
    }

    /// Ky Fan distance between two functions on this space.
    pub fn ky_fan(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        if f.len() != self.len() || g.len() != self.len() {
            return Err(Error::LengthMismatch(f.len().max(g.len()), self.len()));
        }
        let gaps: Vec<f64> = f.iter().zip(g).map(|(a, b)| (a - b).abs()).collect();
        Ok(ky_fan_gaps(&gaps, &self.mass))
    }

    /// Prokhorov distance between two probability vectors on this space.
    pub fn prokhorov(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        prokhorov(self, a, b)
    }
}

fn lp_norm(a: f64, b: f64, p: f64) -> f64 {
    if p.is_infinite() {
        a.max(b)
    } else if p == 1.0 {
        a + b
    } else if p == 2.0 {
        a.hypot(b)
    } else {
        (a.powf(p) + b.powf(p)).powf(1.0 / p)
    }
}

fn iso_dfs(
    x: &FinitePmSpace,
    y: &FinitePmSpace,
    pa: &[Vec<f64>],
    pb: &[Vec<f64>],
    i: usize,
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    let n = x.len();
    if i == n {
        return true;
    }
    for j in 0..n {
        if used[j] || !approx_eq(x.mass(i), y.mass(j)) {
            continue;
        }
        if pa[i].iter().zip(&pb[j]).any(|(s, t)| !approx_eq(*s, *t)) {
            continue;
        }
        if (0..i).any(|k| !approx_eq(x.dist(i, k), y.dist(j, map[k]))) {
            continue;
        }
        used[j] = true;
        map[i] = j;
        if iso_dfs(x, y, pa, pb, i + 1, map, used) {
            return true;
        }
        used[j] = false;
    }
    map[i] = usize::MAX;
    false
}

fn check_probability(v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::LengthMismatch(v.len(), n));
    }
    if v.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::arg("probability vector has a negative or non-finite entry"));
    }
    let s = accurate_sum(v.iter().copied());
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::arg(format!("probability vector sums to {s}")));
    }
    Ok(())
}

/// Half the l_1 distance between two probability vectors.
///
/// This is the normalization under which distinct point masses are at
/// distance 1 and the Prokhorov distance never exceeds it.
pub fn total_variation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(0.5 * accurate_sum(a.iter().zip(b).map(|(x, y)| (x - y).abs())))
}

/// Smallest `eps` with `mass{gap > eps} <= eps`.
pub fn ky_fan_gaps(gaps: &[f64], mass: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..gaps.len()).collect();
    order.sort_by(|&a, &b| gaps[b].total_cmp(&gaps[a]));
    // tail[k] = mass of the k largest gaps
    let mut cands = vec![0.0, 1.0];
    let mut tail = 0.0;
    for &i in &order {
        cands.push(gaps[i]);
        tail += mass[i];
        cands.push(tail.min(1.0));
    }
    let over = |e: f64| accurate_sum(gaps.iter().zip(mass).filter(|(g, _)| **g > e).map(|(_, m)| *m));
    cands
        .into_iter()
        .filter(|&e| e >= 0.0 && over(e) <= e + 1e-15)
        .fold(1.0, f64::min)
}

/// Prokhorov distance, exact by enumeration of all subsets.
///
/// For each candidate radius `r` (zero or a pairwise distance) the largest
/// defect `max_A b(A) - a(U_r(A))` is computed; the distance is the minimum
/// over radii of `max(r, defect)`, capped at 1.
pub fn prokhorov(space: &FinitePmSpace, a: &[f64], b: &[f64]) -> Result<f64> {
    let n = space.len();
    check_probability(a, n)?;
    check_probability(b, n)?;
    if n > PROKHOROV_LIMIT {
        return Err(Error::size("points", n, PROKHOROV_LIMIT));
    }
    let mut radii = vec![0.0];
    radii.extend(space.distinct_distances());
    let full = 1usize << n;
    let mut bsum = vec![0.0; full];
    for s in 1..full {
        let low = s.trailing_zeros() as usize;
        bsum[s] = bsum[s & (s - 1)] + b[low];
    }
    let mut nb = vec![0u32; full];
    let mut best = 1.0_f64;
    for &r in &radii {
        if r >= best {
            break;
        }
        let ball: Vec<u32> = (0..n)
            .map(|i| (0..n).filter(|&j| space.dist(i, j) <= r).fold(0u32, |m, j| m | (1 << j)))
            .collect();
        let mut defect = 0.0_f64;
        for s in 1..full {
            let low = s.trailing_zeros() as usize;
            nb[s] = nb[s & (s - 1)] | ball[low];
            defect = defect.max(bsum[s] - mask_mass(nb[s], a));
        }
        best = best.min(r.max(defect));
    }
    Ok(best.clamp(0.0, 1.0))
}

fn mask_mass(mut m: u32, a: &[f64]) -> f64 {
    let mut s = 0.0;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        s += a[i];
        m &= m - 1;
    }
    s
}

/// Values of a function on a space together with a certified Lipschitz bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzFunction {
    values: Vec<f64>,
    lip_bound: f64,
}

impl LipschitzFunction {
    /// Checks `|f_i - f_j| <= L d_ij` for all pairs.
    pub fn new(space: &FinitePmSpace, values: Vec<f64>, lip_bound: f64) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::LengthMismatch(values.len(), space.len()));
        }
        let actual = lipschitz_constant(space, &values);
        if actual > lip_bound + EQ_TOL * lip_bound.max(1.0) {
            return Err(Error::arg(format!(
                "function has Lipschitz constant {actual} > {lip_bound}"
            )));
        }
        Ok(LipschitzFunction { values, lip_bound })
    }

    /// Wraps values with their exact (smallest) Lipschitz constant.
    pub fn certify(space: &FinitePmSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::LengthMismatch(values.len(), space.len()));
        }
        let lip_bound = lipschitz_constant(space, &values);
        Ok(LipschitzFunction { values, lip_bound })
    }

    /// `d(x0, .)`, which is 1-Lipschitz.
    pub fn distance_from(space: &FinitePmSpace, x0: usize) -> Self {
        LipschitzFunction { values: (0..space.len()).map(|j| space.dist(x0, j)).collect(), lip_bound: 1.0 }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lip_bound(&self) -> f64 {
        self.lip_bound
    }
}

impl std::ops::Deref for LipschitzFunction {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// Smallest `L` with `|f_i - f_j| <= L d_ij`.
pub fn lipschitz_constant(space: &FinitePmSpace, f: &[f64]) -> f64 {
    let n = space.len();
    let mut l = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            l = l.max((f[i] - f[j]).abs() / space.dist(i, j));
        }
    }
    l
}

/// A joint mass matrix whose marginals are the masses of two spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    joint: Vec<Vec<f64>>,
}

impl Coupling {
    pub fn new(x: &FinitePmSpace, y: &FinitePmSpace, joint: Vec<Vec<f64>>) -> Result<Self> {
        if joint.len() != x.len() {
            return Err(Error::LengthMismatch(joint.len(), x.len()));
        }
        for row in &joint {
            if row.len() != y.len() {
                return Err(Error::LengthMismatch(row.len(), y.len()));
            }
            if row.iter().any(|&v| !(v >= 0.0)) {
                return Err(Error::arg("coupling has a negative entry"));
            }
        }
        for i in 0..x.len() {
            let s = accurate_sum(joint[i].iter().copied());
            if (s - x.mass(i)).abs() > VALIDATION_TOL {
                return Err(Error::arg(format!("coupling row {i} sums to {s}, expected {}", x.mass(i))));
            }
        }
        for j in 0..y.len() {
            let s = accurate_sum(joint.iter().map(|r| r[j]));
            if (s - y.mass(j)).abs() > VALIDATION_TOL {
                return Err(Error::arg(format!("coupling column {j} sums to {s}, expected {}", y.mass(j))));
            }
        }
        Ok(Coupling { joint })
    }

    /// The independent coupling `m_X (x) m_Y`.
    pub fn independent(x: &FinitePmSpace, y: &FinitePmSpace) -> Self {
        Coupling {
            joint: (0..x.len()).map(|i| (0..y.len()).map(|j| x.mass(i) * y.mass(j)).collect()).collect(),
        }
    }

    /// The diagonal coupling of a space with itself.
    pub fn identity(x: &FinitePmSpace) -> Self {
        let n = x.len();
        Coupling {
            joint: (0..n).map(|i| (0..n).map(|j| if i == j { x.mass(i) } else { 0.0 }).collect()).collect(),
        }
    }

    pub(crate) fn from_raw(joint: Vec<Vec<f64>>) -> Self {
        Coupling { joint }
    }

    pub fn joint(&self) -> &[Vec<f64>] {
        &self.joint
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.joint[i][j]
    }
}
