//! Atom vectors and the pyramids `X_alpha` they parameterize.
//!
//! An [`AtomVector`] is a finite nonincreasing prefix of positive reals with
//! sum at most one; the implicit tail is zero. A space belongs to `X_alpha`
//! when its measure contains point masses that absorb the atoms
//! ([`member_x_alpha`]), and to `X_alpha^delta` when in addition its diameter
//! is at most `delta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{atom_space, dissipation_family};
use crate::observables::{components, separation, KappaSequence, SuiteReport};
use crate::order::verify_witness;
use crate::space::{accurate_sum, FinitePmSpace};
use crate::boxmetric::slope;

/// Slack on `||alpha||_1 <= 1` and on point capacities.
pub const ATOM_TOL: f64 = 1e-12;

/// Group-sum tolerance in contraction searches.
pub const CONTRACTION_TOL: f64 = 1e-10;

/// Largest support handled by [`is_contraction`].
pub const CONTRACTION_LIMIT: usize = 16;

/// Largest number of atoms, and of candidate points, in [`member_x_alpha`].
pub const MEMBER_LIMIT: usize = 20;

/// Mass shortfall allowed per entry in the dissipation separation check.
pub const DISSIPATION_EPS: f64 = 0.02;

#[derive(Debug, Deserialize)]
struct RawAtoms {
    entries: Vec<f64>,
}

/// Nonincreasing positive entries with `sum <= 1`; zeros are not stored.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawAtoms")]
pub struct AtomVector {
    entries: Vec<f64>,
}

impl TryFrom<RawAtoms> for AtomVector {
    type Error = Error;

    fn try_from(raw: RawAtoms) -> Result<Self> {
        sort_atoms(&raw.entries)
    }
}

impl AtomVector {
    /// Same as [`sort_atoms`].
    pub fn new(raw: &[f64]) -> Result<Self> {
        sort_atoms(raw)
    }

    /// `0 = (0, 0, ...)`.
    pub fn zero() -> Self {
        AtomVector { entries: Vec::new() }
    }

    /// `1 = (1, 0, ...)`.
    pub fn one() -> Self {
        AtomVector { entries: vec![1.0] }
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `alpha_i` (0-based); zero beyond the support.
    pub fn get(&self, i: usize) -> f64 {
        self.entries.get(i).copied().unwrap_or(0.0)
    }

    /// `N(alpha)`, the number of nonzero entries.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn norm(&self) -> f64 {
        accurate_sum(self.entries.iter().copied())
    }

    pub fn product(&self, other: &Self) -> Self {
        atom_product(self, other)
    }

    pub fn truncate(&self, n: usize, kind: Truncation) -> Result<Self> {
        truncate(self, n, kind)
    }

    pub fn l1(&self, other: &Self) -> f64 {
        let len = self.entries.len().max(other.entries.len());
        accurate_sum((0..len).map(|i| (self.get(i) - other.get(i)).abs()))
    }

    pub fn linf(&self, other: &Self) -> f64 {
        let len = self.entries.len().max(other.entries.len());
        (0..len).map(|i| (self.get(i) - other.get(i)).abs()).fold(0.0, f64::max)
    }
}

/// The sorting map: nonincreasing rearrangement with zeros dropped.
pub fn sort_atoms(raw: &[f64]) -> Result<AtomVector> {
    if let Some(bad) = raw.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
        return Err(Error::arg(format!("atom entries must be finite and nonnegative, got {bad}")));
    }
    let sum = accurate_sum(raw.iter().copied());
    if sum > 1.0 + ATOM_TOL {
        return Err(Error::arg(format!("atom entries sum to {sum} > 1")));
    }
    let mut entries: Vec<f64> = raw.iter().copied().filter(|&x| x > 0.0).collect();
    entries.sort_by(|a, b| b.total_cmp(a));
    Ok(AtomVector { entries })
}

/// `alpha beta`: all products `alpha_i beta_j`, sorted.
pub fn atom_product(alpha: &AtomVector, beta: &AtomVector) -> AtomVector {
    let mut entries: Vec<f64> =
        alpha.entries.iter().flat_map(|a| beta.entries.iter().map(move |b| a * b)).filter(|&x| x > 0.0).collect();
    entries.sort_by(|a, b| b.total_cmp(a));
    AtomVector { entries }
}

/// Index pairs `(i, j)` ordered like the entries of `atom_product(alpha, beta)`.
pub fn product_pairs(alpha: &AtomVector, beta: &AtomVector) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> =
        (0..alpha.entries.len()).flat_map(|i| (0..beta.entries.len()).map(move |j| (i, j))).collect();
    pairs.retain(|&(i, j)| alpha.entries[i] * beta.entries[j] > 0.0);
    pairs.sort_by(|&(a, b), &(c, d)| (alpha.entries[c] * beta.entries[d]).total_cmp(&(alpha.entries[a] * beta.entries[b])));
    pairs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Truncation {
    /// `alpha[N] = (alpha_1, ..., alpha_N, 0, ...)`.
    Zero,
    /// `alpha_c[N] = (alpha_1, ..., alpha_{N-1}, sum_{i >= N} alpha_i)`, re-sorted.
    Collapse,
}

pub fn truncate(alpha: &AtomVector, n: usize, kind: Truncation) -> Result<AtomVector> {
    if n == 0 {
        return Err(Error::arg("truncation level must be at least 1"));
    }
    if alpha.entries.len() <= n {
        return Ok(alpha.clone());
    }
    match kind {
        Truncation::Zero => Ok(AtomVector { entries: alpha.entries[..n].to_vec() }),
        Truncation::Collapse => {
            let mut raw = alpha.entries[..n - 1].to_vec();
            raw.push(accurate_sum(alpha.entries[n - 1..].iter().copied()));
            let mut entries = raw;
            entries.sort_by(|a, b| b.total_cmp(a));
            Ok(AtomVector { entries })
        }
    }
}

/// `||alpha - beta||_1`, an upper bound on `rho(X_alpha, X_beta)`.
pub fn rho_upper_atoms(alpha: &AtomVector, beta: &AtomVector) -> f64 {
    alpha.l1(beta)
}

struct Contraction<'a> {
    alpha: &'a [f64],
    rem: Vec<f64>,
    map: Vec<usize>,
}

impl Contraction<'_> {
    fn run(&mut self, k: usize) -> bool {
        if k == self.alpha.len() {
            return self.rem.iter().all(|r| r.abs() <= CONTRACTION_TOL);
        }
        let a = self.alpha[k];
        let smallest = *self.alpha.last().unwrap();
        let mut tried: Vec<f64> = Vec::new();
        for b in 0..self.rem.len() {
            let r = self.rem[b];
            if r < a - CONTRACTION_TOL || tried.iter().any(|t| (t - r).abs() <= CONTRACTION_TOL * 0.5) {
                continue;
            }
            tried.push(r);
            let left = r - a;
            // a partly filled bin must still be fillable
            if left > CONTRACTION_TOL && left < smallest - CONTRACTION_TOL {
                continue;
            }
            self.rem[b] = left;
            self.map[k] = b;
            if self.run(k + 1) {
                return true;
            }
            self.rem[b] = r;
        }
        false
    }
}

/// Whether `beta` is a contraction of `alpha`: a map `pi` on indices with
/// `beta_j = sum_{pi(i) = j} alpha_i`. Returns `pi` as `map[i] = j`.
pub fn is_contraction(alpha: &AtomVector, beta: &AtomVector) -> Result<Option<Vec<usize>>> {
    let (n, m) = (alpha.support_len(), beta.support_len());
    if n > CONTRACTION_LIMIT || m > CONTRACTION_LIMIT {
        return Err(Error::size("atom support", n.max(m), CONTRACTION_LIMIT));
    }
    if m > n || (alpha.norm() - beta.norm()).abs() > CONTRACTION_TOL * n.max(1) as f64 {
        return Ok(None);
    }
    let mut search = Contraction { alpha: &alpha.entries, rem: beta.entries.clone(), map: vec![0; n] };
    Ok(search.run(0).then_some(search.map))
}

/// `map[i]` is the support point absorbing atom `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AtomAssignment {
    pub map: Vec<usize>,
}

struct Packing<'a> {
    atoms: &'a [f64],
    points: &'a [usize],
    cap: Vec<f64>,
    suffix: Vec<f64>,
    map: Vec<usize>,
}

impl Packing<'_> {
    fn run(&mut self, k: usize) -> bool {
        if k == self.atoms.len() {
            return true;
        }
        let free: f64 = self.cap.iter().filter(|&&c| c >= self.atoms[self.atoms.len() - 1] - ATOM_TOL).sum();
        if free < self.suffix[k] - ATOM_TOL * self.atoms.len() as f64 {
            return false;
        }
        let a = self.atoms[k];
        let start = if k > 0 && self.atoms[k] == self.atoms[k - 1] { self.map[k - 1] } else { 0 };
        let mut tried: Vec<f64> = Vec::new();
        for p in start..self.points.len() {
            let c = self.cap[p];
            if c < a - ATOM_TOL || tried.contains(&c) {
                continue;
            }
            tried.push(c);
            self.cap[p] = c - a;
            self.map[k] = p;
            if self.run(k + 1) {
                return true;
            }
            self.cap[p] = c;
        }
        false
    }
}

/// Decides `X in X_alpha^delta` (`delta = inf` for `X_alpha`): `diam X <=
/// delta` and the atoms pack into the point masses. Returns the
/// lexicographically smallest assignment, atoms taken largest first and
/// points by index.
pub fn member_x_alpha(space: &FinitePmSpace, alpha: &AtomVector, delta: f64) -> Result<Option<AtomAssignment>> {
    if alpha.support_len() > MEMBER_LIMIT {
        return Err(Error::size("atoms", alpha.support_len(), MEMBER_LIMIT));
    }
    if space.diam() > delta * (1.0 + ATOM_TOL) + ATOM_TOL {
        return Ok(None);
    }
    if alpha.support_len() == 0 {
        return Ok(Some(AtomAssignment { map: Vec::new() }));
    }
    let smallest = alpha.entries[alpha.support_len() - 1];
    let points: Vec<usize> = (0..space.len()).filter(|&i| space.mass(i) >= smallest - ATOM_TOL).collect();
    if points.len() > MEMBER_LIMIT {
        return Err(Error::size("candidate points", points.len(), MEMBER_LIMIT));
    }
    let mut suffix = vec![0.0; alpha.support_len() + 1];
    for k in (0..alpha.support_len()).rev() {
        suffix[k] = suffix[k + 1] + alpha.entries[k];
    }
    let mut pack = Packing {
        atoms: &alpha.entries,
        points: &points,
        cap: points.iter().map(|&i| space.mass(i)).collect(),
        suffix,
        map: vec![0; alpha.support_len()],
    };
    Ok(pack.run(0).then(|| AtomAssignment { map: pack.map.iter().map(|&p| points[p]).collect() }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntersectionReport {
    pub member: bool,
    /// `(N, member(X, alpha[N]))` in the order given.
    pub truncated: Vec<(usize, bool)>,
    pub consistent: bool,
}

/// Compares membership in `X_alpha` with membership in the `X_{alpha[N]}`:
/// equal for `N >= N(alpha)`, implied by it for smaller `N`, and monotone
/// in `N`.
pub fn membership_intersection_check(space: &FinitePmSpace, alpha: &AtomVector, ns: &[usize]) -> Result<IntersectionReport> {
    let member = member_x_alpha(space, alpha, f64::INFINITY)?.is_some();
    let mut truncated = Vec::with_capacity(ns.len());
    for &n in ns {
        let t = truncate(alpha, n, Truncation::Zero)?;
        truncated.push((n, member_x_alpha(space, &t, f64::INFINITY)?.is_some()));
    }
    let mut consistent = truncated.iter().all(|&(n, m)| if n >= alpha.support_len() { m == member } else { m || !member });
    for &(n, m) in &truncated {
        for &(n2, m2) in &truncated {
            if n2 < n && m && !m2 {
                consistent = false;
            }
        }
    }
    Ok(IntersectionReport { member, truncated, consistent })
}

/// Candidate families for one space of a dissipation sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DissipationStep {
    pub a_sets: Vec<Vec<usize>>,
    pub a_masses: Vec<f64>,
    pub b_sets: Vec<Vec<usize>>,
    pub b_masses: Vec<f64>,
    /// Number of nonempty sets in both families.
    pub k: usize,
    pub covered: f64,
    pub min_distance: f64,
    /// `sum_i |m(A_i) - alpha_i|`.
    pub atom_error: f64,
    /// `sup_i m(B_i)`, 0 without B sets.
    pub sup_b: f64,
    /// Smallest separation over the sampled `kappa`.
    pub separation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DissipationEvidence {
    pub accepted: bool,
    pub delta: f64,
    pub steps: Vec<DissipationStep>,
    /// Why the sequence was refused; empty when accepted.
    pub failures: Vec<String>,
}

/// Tail masses used to probe `Sep(X_n; (alpha, kappa) - eps)`.
fn kappa_samples(alpha: &AtomVector) -> Vec<Vec<f64>> {
    let r = (1.0 - alpha.norm()).max(0.0);
    if r <= DISSIPATION_EPS {
        return vec![Vec::new()];
    }
    vec![vec![r], vec![r / 2.0; 2], vec![r / 4.0; 4], vec![0.6 * r, 0.4 * r]]
}

fn sampled_separation(space: &FinitePmSpace, alpha: &AtomVector) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for kappa in kappa_samples(alpha) {
        let seq = KappaSequence::new(alpha.entries.clone()).concat(&kappa.into()).minus(DISSIPATION_EPS);
        worst = worst.min(separation(space, &seq)?);
    }
    Ok(worst)
}

fn dissipation_step(space: &FinitePmSpace, alpha: &AtomVector, delta: f64) -> Result<DissipationStep> {
    let threshold = delta * (1.0 - 1e-9);
    let comps = components(space, threshold);
    let mass: Vec<f64> = comps.iter().map(|c| accurate_sum(c.iter().map(|&i| space.mass(i)))).collect();
    let mut used = vec![false; comps.len()];
    let mut a_idx = Vec::new();
    for &a in alpha.entries() {
        let best = (0..comps.len())
            .filter(|&c| !used[c])
            .min_by(|&x, &y| (mass[x] - a).abs().total_cmp(&(mass[y] - a).abs()).then(x.cmp(&y)));
        if let Some(c) = best {
            used[c] = true;
        }
        a_idx.push(best);
    }
    let a_sets: Vec<Vec<usize>> = a_idx.iter().map(|c| c.map(|c| comps[c].clone()).unwrap_or_default()).collect();
    let a_masses: Vec<f64> = a_idx.iter().map(|c| c.map(|c| mass[c]).unwrap_or(0.0)).collect();
    let rest: Vec<usize> = (0..comps.len()).filter(|&c| !used[c]).collect();
    let b_sets: Vec<Vec<usize>> = rest.iter().map(|&c| comps[c].clone()).collect();
    let b_masses: Vec<f64> = rest.iter().map(|&c| mass[c]).collect();
    let chosen: Vec<usize> = a_idx.iter().flatten().copied().chain(rest.iter().copied()).collect();
    let mut min_distance = f64::INFINITY;
    for (x, &c) in chosen.iter().enumerate() {
        for &d in &chosen[x + 1..] {
            for &i in &comps[c] {
                for &j in &comps[d] {
                    min_distance = min_distance.min(space.dist(i, j));
                }
            }
        }
    }
    Ok(DissipationStep {
        k: a_sets.iter().filter(|s| !s.is_empty()).count() + b_sets.len(),
        covered: accurate_sum(a_masses.iter().chain(&b_masses).copied()),
        atom_error: accurate_sum(a_masses.iter().zip(alpha.entries()).map(|(m, a)| (m - a).abs())),
        sup_b: b_masses.iter().copied().fold(0.0, f64::max),
        separation: sampled_separation(space, alpha)?,
        a_sets,
        a_masses,
        b_sets,
        b_masses,
        min_distance,
    })
}

/// Finite-sequence test of `delta`-dissipation with atoms `alpha`.
///
/// Each space is split into the components of the graph joining points at
/// distance below `delta` (minus a relative 1e-9); `A_i` is the unused
/// component whose mass is closest to `alpha_i` and the remaining components
/// form the `B` family. The sequence is accepted when, over its last half,
/// the number of sets does not decrease, the atom error and `sup m(B)` do
/// not increase, the families stay `delta`-separated and the sampled
/// separation `Sep(X_n; (alpha, kappa) - 0.02)` reaches `delta`; and at the
/// final space the covered mass is at least 0.95 and the atom error at most
/// 0.05.
pub fn detect_dissipation(seq: &[FinitePmSpace], alpha: &AtomVector, delta: f64) -> Result<DissipationEvidence> {
    if seq.len() < 4 {
        return Err(Error::arg(format!("need at least 4 spaces, got {}", seq.len())));
    }
    if !(delta > 0.0) {
        return Err(Error::arg("delta must be positive"));
    }
    if alpha.norm() >= 1.0 - ATOM_TOL && alpha.support_len() == 1 {
        return Err(Error::arg("dissipation is not defined for alpha = 1"));
    }
    let steps = seq.iter().map(|x| dissipation_step(x, alpha, delta)).collect::<Result<Vec<_>>>()?;
    let tail = &steps[seq.len() / 2..];
    let last = steps.last().unwrap();
    let mut failures = Vec::new();
    let series = |f: fn(&DissipationStep) -> f64| tail.iter().map(f).collect::<Vec<f64>>();
    if slope(&series(|s| s.k as f64)) < -1e-12 {
        failures.push("number of sets decreases".to_string());
    }
    if slope(&series(|s| s.atom_error)) > 1e-12 {
        failures.push("atom error increases".to_string());
    }
    if slope(&series(|s| s.sup_b)) > 1e-12 {
        failures.push("sup m(B) increases".to_string());
    }
    let floor = delta * (1.0 - 1e-9);
    if tail.iter().any(|s| s.min_distance < floor) {
        failures.push("families closer than delta".to_string());
    }
    if tail.iter().any(|s| s.separation < floor) {
        failures.push("sampled separation below delta".to_string());
    }
    if last.covered < 0.95 {
        failures.push(format!("covered mass {} < 0.95", last.covered));
    }
    if last.atom_error > 0.05 {
        failures.push(format!("atom error {} > 0.05", last.atom_error));
    }
    Ok(DissipationEvidence { accepted: failures.is_empty(), delta, steps, failures })
}

/// Infinite dissipation on a finite sequence: the sampled separation is
/// strictly increasing over the last half of the sequence.
pub fn detect_infinite_dissipation(seq: &[FinitePmSpace], alpha: &AtomVector) -> Result<(bool, Vec<f64>)> {
    if seq.len() < 4 {
        return Err(Error::arg(format!("need at least 4 spaces, got {}", seq.len())));
    }
    let profile = seq.iter().map(|x| sampled_separation(x, alpha)).collect::<Result<Vec<_>>>()?;
    let tail = &profile[seq.len() / 2..];
    let ok = tail[0] > 0.0 && tail.windows(2).all(|w| w[1] > w[0]);
    Ok((ok, profile))
}

/// Checks the product identity `X_alpha (x)_p X_beta = X_{alpha beta}` at
/// truncation level.
///
/// Discretized `X_alpha` and `X_beta` (with `m_diffuse` grid points) must
/// have a product in `X_{alpha beta}`; and for each `n` in `sizes` the
/// natural map from `X_n^{alpha,1} x_p X_n^{beta,1}` onto `X_n^{alpha beta,1}`
/// must be a domination witness.
pub fn algebra_consistency_check(
    alpha: &AtomVector,
    beta: &AtomVector,
    p: f64,
    m_diffuse: usize,
    sizes: &[u32],
) -> Result<SuiteReport> {
    let mut report = SuiteReport::default();
    let ab = atom_product(alpha, beta);
    let norm = (ab.norm() - alpha.norm() * beta.norm()).abs();
    report.checks += 1;
    if norm > 1e-12 {
        report.violations.push(format!("norm not multiplicative: {norm}"));
    }
    let a = atom_space(alpha, m_diffuse)?;
    let b = atom_space(beta, m_diffuse)?;
    for (name, space, v) in [("alpha", &a, alpha), ("beta", &b, beta)] {
        report.checks += 1;
        if member_x_alpha(space, v, f64::INFINITY)?.is_none() {
            report.violations.push(format!("atom space not in X_{name}"));
        }
    }
    report.checks += 1;
    if member_x_alpha(&a.product(&b, p)?, &ab, f64::INFINITY)?.is_none() {
        report.violations.push("product of atom spaces not in X_(alpha beta)".into());
    }
    for &n in sizes {
        let x = dissipation_family(alpha, 1.0, n)?;
        let y = dissipation_family(beta, 1.0, n)?;
        let target = dissipation_family(&ab, 1.0, n)?;
        let prod = x.product(&y, p)?;
        let map = natural_product_map(alpha, beta, n);
        report.checks += 1;
        if let Err(e) = verify_witness(&prod, &target, &map) {
            report.violations.push(format!("n = {n}: natural map rejected: {e}"));
        }
    }
    Ok(report)
}

/// Map from `X_n^{alpha} x X_n^{beta}` (index `i * |Y| + j`) to
/// `X_n^{alpha beta}`: atom pairs go to the matching product atom, a pair
/// with diffuse second factor `y_l` goes to `y_l`, and a pair `(y_k, atom)`
/// goes to `y_k`.
fn natural_product_map(alpha: &AtomVector, beta: &AtomVector, n: u32) -> Vec<usize> {
    let (na, nb) = (alpha.support_len(), beta.support_len());
    let diffuse = |v: &AtomVector| if v.norm() < 1.0 - ATOM_TOL { 1usize << n } else { 0 };
    let (da, db) = (diffuse(alpha), diffuse(beta));
    let pairs = product_pairs(alpha, beta);
    let nab = pairs.len();
    let mut slot = vec![vec![0usize; nb]; na];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        slot[i][j] = k;
    }
    let ylen = nb + db;
    let mut map = Vec::with_capacity((na + da) * ylen);
    for i in 0..na + da {
        for j in 0..ylen {
            map.push(match (i < na, j < nb) {
                (true, true) => slot[i][j],
                (_, false) => nab + (j - nb),
                (false, true) => nab + (i - na),
            });
        }
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> AtomVector {
        sort_atoms(x).unwrap()
    }

    #[test]
    fn sorting() {
        assert_eq!(v(&[0.2, 0.5, 0.1]).entries(), &[0.5, 0.2, 0.1]);
        assert_eq!(v(&[0.5, 0.0, 0.2]).support_len(), 2);
        assert!(sort_atoms(&[0.6, 0.5]).is_err());
        assert!(sort_atoms(&[-0.1]).is_err());
    }

    #[test]
    fn products() {
        let h = v(&[0.5, 0.5]);
        assert_eq!(atom_product(&h, &h).entries(), &[0.25; 4]);
        assert_eq!(atom_product(&h, &AtomVector::one()), h);
        assert_eq!(atom_product(&h, &AtomVector::zero()), AtomVector::zero());
    }

    #[test]
    fn contraction_witness() {
        let a = v(&[0.5, 0.25, 0.25]);
        assert_eq!(is_contraction(&a, &v(&[0.5, 0.5])).unwrap(), Some(vec![0, 1, 1]));
        assert_eq!(is_contraction(&a, &v(&[1.0])).unwrap(), Some(vec![0, 0, 0]));
        assert_eq!(is_contraction(&v(&[0.5, 0.5]), &a).unwrap(), None);
        assert_eq!(is_contraction(&v(&[0.6, 0.4]), &v(&[0.5, 0.5])).unwrap(), None);
    }

    #[test]
    fn truncations() {
        let geo: Vec<f64> = (1..=30).map(|i| 0.5f64.powi(i)).collect();
        let a = v(&geo);
        let c = truncate(&a, 2, Truncation::Collapse).unwrap();
        assert!((c.get(0) - 0.5).abs() < 1e-8 && (c.get(1) - 0.5).abs() < 1e-8);
        assert_eq!(truncate(&a, 2, Truncation::Zero).unwrap().entries(), &[0.5, 0.25]);
        let s = v(&[0.5, 0.3]);
        assert_eq!(truncate(&s, 3, Truncation::Collapse).unwrap(), s);
    }

    #[test]
    fn membership() {
        let x = FinitePmSpace::from_matrix(
            vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]],
            vec![0.5, 0.3, 0.2],
        )
        .unwrap();
        assert_eq!(member_x_alpha(&x, &AtomVector::zero(), f64::INFINITY).unwrap().unwrap().map, Vec::<usize>::new());
        assert_eq!(member_x_alpha(&x, &v(&[0.4, 0.3]), f64::INFINITY).unwrap().unwrap().map, vec![0, 1]);
        assert!(member_x_alpha(&x, &v(&[0.6]), f64::INFINITY).unwrap().is_none());
        assert!(member_x_alpha(&x, &v(&[0.4]), 0.5).unwrap().is_none());
    }

    #[test]
    fn intersection() {
        let x = FinitePmSpace::two_point(1.0, 0.5).unwrap();
        let r = membership_intersection_check(&x, &v(&[0.4, 0.4, 0.2]), &[1, 2, 3, 4]).unwrap();
        assert!(!r.member);
        assert_eq!(r.truncated, vec![(1, true), (2, true), (3, false), (4, false)]);
        assert!(r.consistent);
    }

    #[test]
    fn rho_bound() {
        assert_eq!(rho_upper_atoms(&v(&[0.5, 0.5]), &v(&[0.5, 0.5])), 0.0);
        assert!((rho_upper_atoms(&v(&[0.5, 0.5]), &v(&[0.5, 0.4])) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn one_point_sequence_refused() {
        let seq = vec![FinitePmSpace::one_point(); 5];
        let e = detect_dissipation(&seq, &v(&[0.25, 0.125, 0.125]), 1.0).unwrap();
        assert!(!e.accepted);
    }

    #[test]
    fn half_half_algebra() {
        let h = v(&[0.5, 0.5]);
        let r = algebra_consistency_check(&h, &h, f64::INFINITY, 2, &[1, 2]).unwrap();
        assert!(r.ok(), "{:?}", r.violations);
    }
}
