//! Self-checks of the closed-form identities and of the right-inverse
//! invariants, collected into one machine-readable report.

use crate::mesh::generators::{crisscross, single_triangle, tent};
use crate::mesh::topology::{classify_critical, CriticalKind};
use crate::orthopoly::{
    harmonic, legendre_h12_recursion, legendre_h12_seminorm_sq, weighted_h1_integral, weighted_l2_integral,
    weighted_seminorm_left_sq, Poly1D,
};
use crate::rightinverse::{build_extended_bubble_edge, fan_t_det_closed_form, fan_t_matrix, pi_cr, CrSpace};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::f64::consts::PI;
use std::time::Instant;

/// Wall-clock budget of a full run.
pub const BUDGET_SECONDS: f64 = 60.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub max_error: f64,
    pub tolerance: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub kmax: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub seconds: f64,
    pub budget_seconds: f64,
    pub within_budget: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

fn timed(name: &str, tolerance: f64, f: impl FnOnce() -> Option<f64>) -> Check {
    let start = Instant::now();
    let err = f();
    let max_error = err.unwrap_or(f64::INFINITY);
    Check { name: name.to_string(), passed: max_error <= tolerance, max_error, tolerance, seconds: start.elapsed().as_secs_f64() }
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Largest relative deviation of `computed(k)` from `expected(k)` over `ks`.
pub fn check_identity(
    name: &str,
    ks: impl IntoIterator<Item = usize>,
    computed: impl Fn(usize) -> f64,
    expected: impl Fn(usize) -> f64,
    tolerance: f64,
) -> Check {
    timed(name, tolerance, || Some(ks.into_iter().map(|k| relative(computed(k), expected(k))).fold(0.0, f64::max)))
}

fn edge_identity(k: usize) -> f64 {
    let mut c = vec![0.0; k + 1];
    c[k] = 1.0;
    c[k - 1] = 1.0;
    weighted_seminorm_left_sq(&Poly1D::from_legendre(c)).unwrap_or(f64::NAN)
}

/// Random admissible fan: `n + 1` apex angles of at least `pi / 12` with
/// total below `pi`.
pub fn random_fan_angles(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let m = n + 1;
    let lo = PI / 12.0;
    let total = rng.random_range(m as f64 * lo + 0.05..PI - 0.05);
    let w: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
    let ws: f64 = w.iter().sum();
    let free = total - m as f64 * lo;
    w.iter().map(|x| lo + free * x / ws).collect()
}

fn det_check(seed: u64) -> Check {
    timed("fan_determinant_closed_form", 1e-10, || {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for i in 0..100 {
            let a = random_fan_angles(&mut rng, 1 + i % 5);
            let det = fan_t_matrix(&a).ok()?.determinant();
            worst = worst.max(relative(det, fan_t_det_closed_form(&a).ok()?));
        }
        Some(worst)
    })
}

fn bubble_check(kmax: usize) -> Check {
    timed("extended_bubble_properties", 1e-8, || {
        let m = crisscross(1).ok()?;
        let mut worst: f64 = 0.0;
        for k in (5..=kmax.min(11)).step_by(2) {
            let s = CrSpace::new(&m, k).ok()?;
            for e in m.interior_edges() {
                let c = build_extended_bubble_edge(&s, e).ok()?.check(&s, 50);
                worst = worst.max(c.trace).max(c.vertex_gradient).max(c.mean_div).max(c.jump);
            }
        }
        Some(worst)
    })
}

fn pi_cr_check(seed: u64) -> Check {
    timed("pi_cr_contract", 1e-9, || {
        let mut rng = StdRng::seed_from_u64(seed);
        let cc = crisscross(1).ok()?;
        let te = tent().ok()?;
        let mut worst: f64 = 0.0;
        for (m, k) in [(&cc, 5), (&cc, 7), (&te, 4), (&te, 6)] {
            let s = CrSpace::new(m, k).ok()?;
            for _ in 0..5 {
                let mut q: Vec<f64> = (0..s.dim_p()).map(|_| rng.random_range(-1.0..1.0)).collect();
                s.remove_mean(&mut q);
                let p = pi_cr(&s, &q, 0.01).ok()?;
                worst = worst.max(p.div_means_max).max(p.sv.max_scaled);
            }
        }
        Some(worst)
    })
}

fn topology_check() -> Check {
    timed("topology_examples", 0.0, || {
        let cc = classify_critical(&crisscross(1).ok()?, 0.01).ok()?;
        let st = classify_critical(&single_triangle().ok()?, 0.01).ok()?;
        let ok = cc.kind[4] == Some(CriticalKind::Inner) && st.kind.iter().all(|k| *k == Some(CriticalKind::Acute));
        Some(if ok { 0.0 } else { 1.0 })
    })
}

/// Runs every check with degrees up to `kmax`.
pub fn run_verify(kmax: usize, seed: u64) -> VerifyReport {
    let start = Instant::now();
    let kmax = kmax.max(2);
    let checks = vec![
        check_identity("weighted_l2_identity", 0..=kmax, weighted_l2_integral, |k| 2.0 / (2 * k + 1) as f64, 1e-12),
        check_identity("weighted_h1_identity", 1..=kmax, weighted_h1_integral, |k| (k * (k + 1)) as f64, 1e-12),
        check_identity("h12_seminorm_harmonic", 1..=kmax, legendre_h12_seminorm_sq, |k| 4.0 * harmonic(k), 1e-10),
        check_identity("h12_seminorm_recursion", 1..=kmax, legendre_h12_recursion, |k| 4.0 * harmonic(k), 1e-10),
        check_identity("weighted_edge_identity", 1..=kmax, edge_identity, |k| 2.0 / k as f64, 1e-10),
        det_check(seed),
        bubble_check(kmax),
        pi_cr_check(seed),
        topology_check(),
    ];
    let seconds = start.elapsed().as_secs_f64();
    let passed = checks.iter().all(|c| c.passed);
    VerifyReport { kmax, seed, checks, passed, seconds, budget_seconds: BUDGET_SECONDS, within_budget: seconds <= BUDGET_SECONDS }
}
