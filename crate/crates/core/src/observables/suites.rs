use serde::Serialize;

use super::{obs_diam, separation, variance, KappaSequence, Mode};
use crate::error::Result;
use crate::space::FinitePmSpace;

const TOL: f64 = 1e-9;

fn le(a: f64, b: f64) -> bool {
    a <= b || (a.is_finite() && b.is_finite() && a <= b + TOL * b.abs().max(1.0))
}

fn same(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= TOL * a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SuiteReport {
    pub checks: usize,
    pub violations: Vec<String>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn check(&mut self, pass: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !pass {
            self.violations.push(what());
        }
    }
}

fn permutations_of(v: &[f64]) -> Vec<Vec<f64>> {
    if v.len() <= 1 {
        return vec![v.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..v.len() {
        let mut rest = v.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations_of(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Shuffle invariance, dropping of negative parts, monotonicity in `kappa`,
/// and `Sep(X; (kappa, lambda)) <= Sep(X; kappa + lambda)`.
pub fn separation_properties_suite(
    space: &FinitePmSpace,
    kappa: &KappaSequence,
    lambda: &KappaSequence,
) -> Result<SuiteReport> {
    let mut r = SuiteReport::default();
    let base = separation(space, kappa)?;
    let shuffles = if kappa.entries.len() <= 5 {
        permutations_of(&kappa.entries)
    } else {
        (0..kappa.entries.len())
            .map(|s| {
                let mut v = kappa.entries.clone();
                v.rotate_left(s);
                v
            })
            .collect()
    };
    for p in shuffles {
        let v = separation(space, &p.clone().into())?;
        r.check(same(v, base), || format!("shuffle {p:?}: {v} != {base}"));
    }
    let plus: Vec<f64> = kappa.entries.iter().map(|&k| k.max(0.0)).collect();
    let v = separation(space, &plus.into())?;
    r.check(same(v, base), || format!("positive part: {v} != {base}"));
    for i in 0..=kappa.entries.len() {
        let mut bumped = kappa.entries.clone();
        if i < bumped.len() {
            bumped[i] += 0.05;
        } else {
            bumped.iter_mut().for_each(|k| *k += 0.05);
        }
        let v = separation(space, &bumped.clone().into())?;
        r.check(le(v, base), || format!("monotonicity {bumped:?}: {v} > {base}"));
    }
    let joined = separation(space, &kappa.interleave(lambda))?;
    let summed = separation(space, &kappa.plus(lambda))?;
    r.check(le(joined, summed), || format!("interleaving: {joined} > {summed}"));
    Ok(r)
}

/// `V(X) <= diam(X)^2 / 4` with the exact variance.
pub fn variance_diam_bound_check(space: &FinitePmSpace) -> Result<bool> {
    let v = variance(space, Mode::Exact)?;
    Ok(v <= space.diam().powi(2) / 4.0 + TOL)
}

/// Invariants of a dominating space `x` and a dominated space `y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub variance: (f64, f64),
    pub obs_diam: (f64, f64),
    pub separation: (f64, f64),
    pub diam: (f64, f64),
}

impl MonotonicityReport {
    /// Whether every invariant of the dominated space is at most that of the
    /// dominating one.
    pub fn ok(&self) -> bool {
        [self.variance, self.obs_diam, self.separation, self.diam].iter().all(|&(a, b)| le(b, a))
    }
}

/// Computes the monotone invariants on both sides of a domination pair, in
/// exact mode.
pub fn monotone_along(
    x: &FinitePmSpace,
    y: &FinitePmSpace,
    kappa: f64,
    sep_kappa: &KappaSequence,
) -> Result<MonotonicityReport> {
    Ok(MonotonicityReport {
        variance: (variance(x, Mode::Exact)?, variance(y, Mode::Exact)?),
        obs_diam: (obs_diam(x, kappa, Mode::Exact)?, obs_diam(y, kappa, Mode::Exact)?),
        separation: (separation(x, sep_kappa)?, separation(y, sep_kappa)?),
        diam: (x.diam(), y.diam()),
    })
}
