//! Acceptance criteria 1-10 at their pinned tolerances and time budgets.
//!
//! Each test writes one `criterion N: PASS|FAIL ...` line to stderr (bypassing
//! the test harness capture) before asserting.

mod common;

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use mmslab_core::atoms::{atom_product, detect_dissipation, is_contraction, sort_atoms, AtomVector};
use mmslab_core::boxmetric::{box_exact_small, box_lower, box_upper};
use mmslab_core::functional::{gaussian_domination_scale, log_sobolev_check, poincare_c22, GridSpace1D, Uniform};
use mmslab_core::generators::{dissipation_family, gaussian_cloud, interval_grid};
use mmslab_core::observables::{
    gaussian_comparison_witness, monotone_along, obs_diam, obs_diam_gaussian_formula, separation, variance,
    variance_diam_bound_check, KappaSequence, Mode,
};
use mmslab_core::order::{dominates, verify_witness};
use mmslab_core::FinitePmSpace;
use rand::Rng;

use common::*;

fn report(n: u32, pass: bool, detail: &str, elapsed: Duration, budget: Duration) -> bool {
    let ok = pass && elapsed <= budget;
    let line = format!(
        "criterion {n}: {} {detail} [{:.2}s / {}s]\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    ok
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

#[test]
fn criterion_01_interval_variance() {
    let t = Instant::now();
    let v = variance(&interval_grid(256, 1.0).unwrap(), Mode::Heuristic).unwrap();
    let mut worst_exact = 0.0_f64;
    for m in 2..=6 {
        let xs: Vec<f64> = (0..m).map(|i| i as f64 / (m - 1) as f64).collect();
        let oracle = line_variance_oracle(&xs, &vec![1.0 / m as f64; m]);
        let exact = variance(&interval_grid(m, 1.0).unwrap(), Mode::Exact).unwrap();
        worst_exact = worst_exact.max((exact - oracle).abs());
    }
    let pass = (v - 1.0 / 12.0).abs() <= 1e-3 && worst_exact <= 1e-6;
    let detail = format!("V(I_256) = {v:.6} (1/12 = {:.6}); exact vs oracle, m <= 6: {worst_exact:.1e}", 1.0 / 12.0);
    assert!(report(1, pass, &detail, t.elapsed(), secs(10)));
}

#[test]
fn criterion_02_poincare_constants() {
    let t = Instant::now();
    let ci = poincare_c22(&GridSpace1D::interval(512, 1.0).unwrap()).unwrap();
    let cg = poincare_c22(&GridSpace1D::gaussian(512, 1.0).unwrap()).unwrap();
    let pass = (ci - 1.0 / PI).abs() <= 1e-3 && (cg - 1.0).abs() <= 1e-3;
    let detail = format!("C22(I) = {ci:.6} (1/pi = {:.6}), C22(Gamma) = {cg:.6}", 1.0 / PI);
    assert!(report(2, pass, &detail, t.elapsed(), secs(5)));
}

#[test]
fn criterion_03_log_sobolev() {
    let t = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, grid, c) in [
        ("I", GridSpace1D::interval(512, 1.0).unwrap(), 1.0 / PI),
        ("Gamma", GridSpace1D::gaussian(512, 1.0).unwrap(), 1.0),
    ] {
        let c22 = poincare_c22(&grid).unwrap();
        let r = log_sobolev_check(&grid, c, 1000).unwrap();
        pass &= r.trials >= 1000 && r.max_violation <= 1e-4 && r.lower_bound >= c22 - 1e-3;
        parts.push(format!(
            "{name}: C = {c:.6}, trials {}, max violation {:.2e}, lower bound {:.6} (C22 {c22:.6})",
            r.trials, r.max_violation, r.lower_bound
        ));
    }
    assert!(report(3, pass, &parts.join("; "), t.elapsed(), secs(30)));
}

#[test]
fn criterion_04_gaussian_observable_diameter() {
    const SEED: u64 = 1;
    let t = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for dim in [1usize, 5] {
        let cloud = gaussian_cloud(5000, dim, 1.0, SEED).unwrap();
        for kappa in [0.1, 0.3, 0.5] {
            let est = cloud.projection_obs_diam(kappa);
            let exact = obs_diam_gaussian_formula(1.0, kappa).unwrap();
            let rel = (est - exact).abs() / exact;
            pass &= rel <= 0.02;
            parts.push(format!("dim {dim} kappa {kappa}: {est:.4} vs {exact:.4} ({:.2}%)", 100.0 * rel));
        }
    }
    assert!(report(4, pass, &parts.join("; "), t.elapsed(), secs(60)));
}

#[test]
fn criterion_05_gaussian_domination_scale() {
    let t = Instant::now();
    let f = gaussian_domination_scale(&Uniform { a: 0.0, b: 1.0 }).unwrap();
    let target = 1.0 / (2.0 * PI).sqrt();
    let c22 = 1.0 / PI;
    let pass = (f - target).abs() <= 1e-4 && (f - c22).abs() > 0.08;
    let detail = format!("F(I) = {f:.6} (1/sqrt(2 pi) = {target:.6}); margin to 1/pi {:.5}", f - c22);
    assert!(report(5, pass, &detail, t.elapsed(), secs(5)));
}

#[test]
fn criterion_06_observable_diameter_comparison() {
    let t = Instant::now();
    let w = gaussian_comparison_witness(0.35).unwrap();
    let (pass, detail) = match w {
        Some(w) => {
            let recomputed = (1.0 - w.kappa) - obs_diam_gaussian_formula(0.35, w.kappa).unwrap();
            (
                w.kappa > 0.0 && w.kappa < 1.0 && w.slack >= 1e-3 && (recomputed - w.slack).abs() < 1e-12,
                format!("kappa = {:.6}, 2 sigma Psi^-1 = {:.6} < 1 - kappa = {:.6}, slack {:.6}", w.kappa, w.gaussian, w.interval, w.slack),
            )
        }
        None => (false, "no kappa found".to_string()),
    };
    assert!(report(6, pass, &detail, t.elapsed(), secs(1)));
}

#[test]
fn criterion_07_separation_exactness() {
    let t = Instant::now();
    let spaces = corpus(0x5e9, 100, 1, 4);
    let kappas: Vec<Vec<f64>> = (1..=3).flat_map(kappa_grid).collect();
    let mut checked = 0usize;
    let mut mismatches = Vec::new();
    for (s, x) in spaces.iter().enumerate() {
        for k in &kappas {
            let got = separation(x, &KappaSequence::new(k.clone())).unwrap();
            let want = separation_oracle(x, k);
            checked += 1;
            if got != want {
                mismatches.push(format!("space {s} kappa {k:?}: {got} vs {want}"));
            }
        }
    }
    let detail = format!(
        "{checked} (space, kappa) pairs, {} mismatches{}",
        mismatches.len(),
        mismatches.first().map(|m| format!(", first: {m}")).unwrap_or_default()
    );
    assert!(report(7, mismatches.is_empty(), &detail, t.elapsed(), secs(120)));
}

#[test]
fn criterion_08_dissipation() {
    let t = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [0.5, 1.0] {
        let alpha = AtomVector::new(&[0.5 * s, 0.25 * s, 0.25 * s]).unwrap();
        for delta in [1.0, 3.0] {
            let seq: Vec<FinitePmSpace> = (1..=6).map(|n| dissipation_family(&alpha, delta, n).unwrap()).collect();
            let e = detect_dissipation(&seq, &alpha, delta).unwrap();
            pass &= e.accepted;
            parts.push(format!("s {s} delta {delta}: {}", if e.accepted { "accepted" } else { "refused" }));
        }
    }
    let alpha = AtomVector::new(&[0.25, 0.125, 0.125]).unwrap();
    let one = vec![FinitePmSpace::one_point(); 6];
    let refused = !detect_dissipation(&one, &alpha, 1.0).unwrap().accepted;
    pass &= refused;
    parts.push(format!("one-point sequence {}", if refused { "refused" } else { "accepted" }));
    assert!(report(8, pass, &parts.join("; "), t.elapsed(), secs(60)));
}

fn random_atoms(r: &mut rand_chacha::ChaCha8Rng, max_len: usize) -> AtomVector {
    let n = r.gen_range(1..=max_len);
    let total: f64 = r.gen_range(0.1..=1.0);
    let w: Vec<f64> = (0..n).map(|_| r.gen_range(0.01..1.0)).collect();
    let s: f64 = w.iter().sum();
    sort_atoms(&w.iter().map(|x| x / s * total).collect::<Vec<_>>()).unwrap()
}

/// A random grouping of `alpha` into sums.
fn random_contraction(r: &mut rand_chacha::ChaCha8Rng, alpha: &AtomVector) -> AtomVector {
    let groups = r.gen_range(1..=alpha.support_len());
    let mut sums = vec![0.0; groups];
    for &a in alpha.entries() {
        sums[r.gen_range(0..groups)] += a;
    }
    sort_atoms(&sums).unwrap()
}

#[test]
fn criterion_09_atom_algebra() {
    let t = Instant::now();
    let mut r = rng(0xa7);
    let mut violations = Vec::new();

    let mut worst_norm = 0.0_f64;
    for _ in 0..1000 {
        let (a, b) = (random_atoms(&mut r, 8), random_atoms(&mut r, 8));
        worst_norm = worst_norm.max((atom_product(&a, &b).norm() - a.norm() * b.norm()).abs());
    }
    if worst_norm > 1e-12 {
        violations.push(format!("norm multiplicativity error {worst_norm:e}"));
    }

    let mut mutual = 0usize;
    for i in 0..1000 {
        let a = random_atoms(&mut r, 6);
        let b = match i % 3 {
            0 => a.clone(),
            1 => random_contraction(&mut r, &a),
            _ => random_atoms(&mut r, 6),
        };
        let ab = is_contraction(&a, &b).unwrap().is_some();
        let ba = is_contraction(&b, &a).unwrap().is_some();
        if ab && ba {
            mutual += 1;
            if a.linf(&b) > 1e-9 {
                violations.push(format!("mutual contraction of distinct {a:?} and {b:?}"));
            }
        }
        if i % 3 == 1 && !ab {
            violations.push(format!("grouping of {a:?} not recognised as a contraction"));
        }
    }

    for _ in 0..1000 {
        let n = r.gen_range(1..10);
        let raw: Vec<f64> = (0..n).map(|_| if r.gen_bool(0.2) { 0.0 } else { r.gen_range(0.0..0.1) }).collect();
        let once = sort_atoms(&raw).unwrap();
        if sort_atoms(once.entries()).unwrap() != once {
            violations.push(format!("sorting not idempotent on {raw:?}"));
        }
    }

    // entries of an atom vector satisfy alpha_i <= 1/i, so agreement on the
    // first K coordinates controls the sup distance up to 1/(K+1)
    for _ in 0..200 {
        let limit = random_atoms(&mut r, 12);
        for n in 1..=40 {
            let eps = 1.0 / n as f64;
            let raw: Vec<f64> = limit
                .entries()
                .iter()
                .map(|&a| a * (1.0 - eps * r.gen_range(0.5..1.0)))
                .chain((0..n).map(|_| eps * limit.norm() / (4.0 * n as f64)))
                .collect();
            let x = sort_atoms(&raw).unwrap();
            let sup = x.linf(&limit);
            for k in 1..=12 {
                let head = (0..k).map(|i| (x.get(i) - limit.get(i)).abs()).fold(0.0, f64::max);
                if sup > head.max(1.0 / (k + 1) as f64) + 1e-15 {
                    violations.push(format!("sup {sup} exceeds head bound at K = {k}"));
                }
            }
            if n == 40 && sup > 0.05 {
                violations.push(format!("pointwise convergent sequence has sup distance {sup} at n = 40"));
            }
        }
    }

    let detail = format!(
        "norm error {worst_norm:.1e}, {mutual} mutual contractions, {} violations{}",
        violations.len(),
        violations.first().map(|v| format!(", first: {v}")).unwrap_or_default()
    );
    assert!(report(9, violations.is_empty(), &detail, t.elapsed(), secs(30)));
}

/// The image of `x` under the 1-Lipschitz function `d(x0, .)`, as a space on
/// the line.
fn distance_image(x: &FinitePmSpace, x0: usize) -> FinitePmSpace {
    let mut vals: Vec<(f64, f64)> = Vec::new();
    for i in 0..x.len() {
        let v = x.dist(x0, i);
        match vals.iter_mut().find(|(w, _)| (w - v).abs() < 1e-12) {
            Some(e) => e.1 += x.mass(i),
            None => vals.push((v, x.mass(i))),
        }
    }
    let xs: Vec<f64> = vals.iter().map(|v| v.0).collect();
    let ms: Vec<f64> = vals.iter().map(|v| v.1).collect();
    line(&xs, &ms)
}

#[test]
fn criterion_10_property_suites() {
    let t = Instant::now();
    let mut violations: Vec<String> = Vec::new();
    let mut witnesses = 0usize;
    let sep_kappa = KappaSequence::new(vec![0.2, 0.2]);

    let spaces = corpus(0x10, 40, 2, 5);
    for (s, x) in spaces.iter().enumerate() {
        let mut targets: Vec<FinitePmSpace> = (0..x.len()).map(|i| distance_image(x, i)).collect();
        targets.push(FinitePmSpace::one_point());
        targets.extend(spaces.iter().filter(|y| y.len() <= x.len()).take(6).cloned());
        for y in &targets {
            let d = dominates(x, y).unwrap();
            let Some(w) = d.witness else { continue };
            witnesses += 1;
            if verify_witness(x, y, &w.map).is_err() {
                violations.push(format!("space {s}: witness does not verify"));
            }
            let m = monotone_along(x, y, 0.2, &sep_kappa).unwrap();
            if !m.ok() {
                violations.push(format!("space {s}: monotonicity {m:?}"));
            }
        }

        for tfac in [0.5, 2.0, 3.7] {
            let tx = x.scale(tfac).unwrap();
            let pairs = [
                (variance(&tx, Mode::Exact).unwrap(), tfac * tfac * variance(x, Mode::Exact).unwrap(), "V"),
                (obs_diam(&tx, 0.2, Mode::Exact).unwrap(), tfac * obs_diam(x, 0.2, Mode::Exact).unwrap(), "ObsDiam"),
                (separation(&tx, &sep_kappa).unwrap(), tfac * separation(x, &sep_kappa).unwrap(), "Sep"),
            ];
            for (a, b, name) in pairs {
                if !(a == b || (a - b).abs() <= 1e-9 * a.abs().max(1.0)) {
                    violations.push(format!("space {s}: {name} not homogeneous at t = {tfac}: {a} vs {b}"));
                }
            }
        }
        if !variance_diam_bound_check(x).unwrap() {
            violations.push(format!("space {s}: V > diam^2 / 4"));
        }
    }
    for d in [0.3, 1.0, 4.0] {
        let x = FinitePmSpace::two_point(d, 0.5).unwrap();
        let v = variance(&x, Mode::Exact).unwrap();
        if (v - d * d / 4.0).abs() > 1e-12 {
            violations.push(format!("two-point equality fails at d = {d}: {v}"));
        }
    }

    let tiny: Vec<FinitePmSpace> = corpus(0xb0, 12, 1, 3);
    let pairs_ok = |a: &FinitePmSpace, b: &FinitePmSpace| a.len() * b.len() <= 12;
    for (i, x) in tiny.iter().enumerate() {
        let self_d = box_exact_small(x, x).unwrap().upper;
        if self_d > 1e-12 {
            violations.push(format!("box(X, X) = {self_d} for tiny {i}"));
        }
        for (j, y) in tiny.iter().enumerate() {
            if !pairs_ok(x, y) {
                continue;
            }
            let e = box_exact_small(x, y).unwrap().upper;
            let e_rev = box_exact_small(y, x).unwrap().upper;
            if (e - e_rev).abs() > 1e-12 {
                violations.push(format!("box not symmetric for tiny {i}, {j}: {e} vs {e_rev}"));
            }
            let lo = box_lower(x, y);
            let up = box_upper(x, y).upper;
            if lo > e + 1e-12 || e > up + 1e-12 {
                violations.push(format!("box bounds out of order for tiny {i}, {j}: {lo} <= {e} <= {up}"));
            }
            for (k, z) in tiny.iter().enumerate() {
                if pairs_ok(x, z) && pairs_ok(y, z) {
                    let xz = box_exact_small(x, z).unwrap().upper;
                    let yz = box_exact_small(y, z).unwrap().upper;
                    if xz > e + yz + 1e-12 {
                        violations.push(format!("box triangle fails for tiny {i}, {j}, {k}"));
                    }
                }
            }
        }
    }

    let detail = format!(
        "{witnesses} domination witnesses, {} violations{}",
        violations.len(),
        violations.first().map(|v| format!(", first: {v}")).unwrap_or_default()
    );
    assert!(report(10, violations.is_empty() && witnesses > 0, &detail, t.elapsed(), secs(300)));
}
