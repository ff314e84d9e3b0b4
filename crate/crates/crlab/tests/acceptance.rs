//! Acceptance suite: one line per criterion, nonzero exit on any failure.

mod common;

use common::{collinearity_oracle, det_closed_form, det_gauss, random_angles, random_mesh};
use crlab::femspace::{build_dofmap, jump_moment_residual, Space};
use crlab::infsup::{friedrichs_constant, infsup_constant, StokesSystem};
use crlab::mesh::generators::*;
use crlab::mesh::topology::{classify_critical, fan_decomposition, CriticalKind};
use crlab::mesh::Triangulation;
use crlab::orthopoly::{
    legendre_h12_recursion, legendre_h12_seminorm_sq, weighted_h1_integral, weighted_l2_integral, weighted_seminorm_left_sq,
    Poly1D,
};
use crlab::rightinverse::{build_extended_bubble_edge, build_extended_bubble_triangle, fan_t_matrix, pi_cr, CrSpace};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::time::Instant;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn harmonic4(k: usize) -> f64 {
    4.0 * (1..=k).map(|l| 1.0 / l as f64).sum::<f64>()
}

fn c1_weighted_integrals() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for k in 0..=30 {
        worst = worst.max(rel(weighted_l2_integral(k), 2.0 / (2 * k + 1) as f64));
        if k > 0 {
            worst = worst.max(rel(weighted_h1_integral(k), (k * (k + 1)) as f64));
        }
    }
    let s = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-12 && s < 1.0, format!("max rel {worst:.1e}, {s:.3}s"))
}

fn c2_h12_seminorm() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    // three-term recursion written out with I_1 = 4, I_2 = 6
    let mut rec = vec![0.0, 4.0, 6.0];
    for k in 3..=30 {
        rec.push(rec[k - 1] + 4.0 / k as f64);
    }
    for k in 1..=30 {
        worst = worst.max(rel(legendre_h12_seminorm_sq(k), harmonic4(k)));
        worst = worst.max(rel(legendre_h12_recursion(k), rec[k]));
    }
    let s = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-10 && s < 2.0, format!("max rel {worst:.1e}, {s:.3}s"))
}

fn c3_edge_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 1..=30 {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        c[k - 1] = 1.0;
        match weighted_seminorm_left_sq(&Poly1D::from_legendre(c)) {
            Ok(v) => worst = worst.max(rel(v, 2.0 / k as f64)),
            Err(e) => return outcome(false, format!("k={k}: {e}")),
        }
    }
    outcome(worst <= 1e-10, format!("max rel {worst:.1e}"))
}

fn c4_fan_determinant() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    while count < 100 {
        let n = rng.random_range(1..=5);
        let a = random_angles(&mut rng, n);
        if a.iter().sum::<f64>().sin().abs() < 1e-3 {
            continue;
        }
        let t = match fan_t_matrix(&a) {
            Ok(t) => t,
            Err(e) => return outcome(false, format!("{e}")),
        };
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| t[(i, j)]).collect()).collect();
        worst = worst.max(rel(det_gauss(rows), det_closed_form(&a)));
        count += 1;
    }
    outcome(worst <= 1e-10, format!("100 fans, max rel {worst:.1e}"))
}

fn c5_jump_moments() -> Outcome {
    let start = Instant::now();
    let meshes: Vec<(&str, Triangulation)> = vec![
        ("crisscross(1)", crisscross(1).unwrap()),
        ("crisscross(2)", crisscross(2).unwrap()),
        ("diagonal(4)", diagonal_square(4).unwrap()),
        ("perturbed", perturb(&crisscross(2).unwrap(), 4, [0.03, -0.02]).unwrap()),
    ];
    let mut worst: f64 = 0.0;
    let mut tested = 0;
    for (_, m) in &meshes {
        assert!(m.n_triangles() <= 32);
        for k in 1..=8 {
            let d = match build_dofmap(m, k, Space::CrouzeixRaviart, false) {
                Ok(d) => d,
                Err(e) => return outcome(false, format!("{e}")),
            };
            for i in 0..d.n_scalar() {
                let mut u = vec![0.0; d.n_scalar()];
                u[i] = 1.0;
                worst = worst.max(jump_moment_residual(m, &d, &u));
                tested += 1;
            }
        }
    }
    let s = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-11 && s < 30.0, format!("{tested} basis functions, max {worst:.1e}, {s:.1}s"))
}

fn c6_pi_cr() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let (cc, te) = (crisscross(1).unwrap(), tent().unwrap());
    let mut means: f64 = 0.0;
    let mut sv: f64 = 0.0;
    for (m, k) in [(&cc, 5), (&cc, 7), (&te, 4), (&te, 6)] {
        let s = CrSpace::new(m, k).unwrap();
        for _ in 0..20 {
            let mut q: Vec<f64> = (0..s.dim_p()).map(|_| rng.random_range(-1.0..1.0)).collect();
            s.remove_mean(&mut q);
            match pi_cr(&s, &q, 0.01) {
                Ok(p) => {
                    means = means.max(p.div_means_max);
                    sv = sv.max(p.sv.max_scaled);
                }
                Err(e) => return outcome(false, format!("k={k}: {e}")),
            }
        }
    }
    outcome(means <= 1e-10 && sv <= 1e-9, format!("80 pressures, max |int div| {means:.1e}, max SV residual {sv:.1e}"))
}

fn c7_bubbles() -> Outcome {
    let start = Instant::now();
    let m = crisscross(1).unwrap();
    let (mut trace, mut grad, mut mean): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut growth = Vec::new();
    for k in (5..=19).step_by(2) {
        let s = CrSpace::new(&m, k).unwrap();
        let mut energies = Vec::new();
        for e in m.interior_edges() {
            let b = match build_extended_bubble_edge(&s, e) {
                Ok(b) => b,
                Err(err) => return outcome(false, format!("k={k}: {err}")),
            };
            let c = b.check(&s, 50);
            trace = trace.max(c.trace).max(c.jump);
            grad = grad.max(c.vertex_gradient);
            mean = mean.max(c.mean_div);
            energies.push(b.energy);
        }
        growth.push(energies[0] / ((k + 1) as f64).ln().sqrt());
    }
    let te = tent().unwrap();
    for k in [4, 6] {
        let s = CrSpace::new(&te, k).unwrap();
        for t in 0..te.n_triangles() {
            let c = build_extended_bubble_triangle(&s, t).unwrap().check(&s, 50);
            trace = trace.max(c.trace);
            grad = grad.max(c.vertex_gradient);
            mean = mean.max(c.mean_div);
        }
    }
    let spread = growth.iter().cloned().fold(0.0, f64::max) / growth.iter().cloned().fold(f64::INFINITY, f64::min);
    let s = start.elapsed().as_secs_f64();
    outcome(
        trace <= 1e-9 && grad <= 1e-8 && mean <= 1e-10 && spread <= 5.0 && s < 60.0,
        format!("trace {trace:.1e}, vertex grad {grad:.1e}, div means {mean:.1e}, log-growth max/min {spread:.3}, {s:.1}s"),
    )
}

fn c8_infsup() -> Outcome {
    let start = Instant::now();
    let (m2, m4) = (crisscross(2).unwrap(), crisscross(4).unwrap());
    let mut cmin = f64::INFINITY;
    let (mut rlo, mut rhi) = (f64::INFINITY, 0.0f64);
    let mut spread: f64 = 0.0;
    let mut scaled = [Vec::new(), Vec::new()];
    for k in 1..=8 {
        let (a, b) = match (infsup_constant(&m2, k), infsup_constant(&m4, k)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return outcome(false, format!("k={k}: {e}")),
        };
        cmin = cmin.min(a.c).min(b.c);
        rlo = rlo.min(b.c / a.c);
        rhi = rhi.max(b.c / a.c);
        let l = ((k + 1) as f64).ln().sqrt();
        scaled[0].push(a.c * l);
        scaled[1].push(b.c * l);
    }
    for s in &scaled {
        spread = spread.max(s.iter().cloned().fold(0.0, f64::max) / s.iter().cloned().fold(f64::INFINITY, f64::min));
    }
    let d = diagonal_square(1).unwrap();
    let sys = StokesSystem::new(&d, 1).unwrap();
    let r = sys.infsup().unwrap();
    let duality = match sys.right_inverse(&r.mode) {
        Ok((_, ratio)) => (r.c * ratio - 1.0).abs(),
        Err(e) => return outcome(false, format!("duality: {e}")),
    };
    let s = start.elapsed().as_secs_f64();
    outcome(
        cmin > 1e-3 && rlo >= 0.5 && rhi <= 2.0 && spread <= 3.0 && duality <= 1e-6 && s < 300.0,
        format!("min c {cmin:.4}, ratio [{rlo:.3}, {rhi:.3}], scaled max/min {spread:.3}, duality {duality:.1e}, {s:.1}s"),
    )
}

fn c9_friedrichs() -> Outcome {
    let (m2, m4) = (crisscross(2).unwrap(), crisscross(4).unwrap());
    let c2: Vec<f64> = (1..=6).map(|k| friedrichs_constant(&m2, k).unwrap()).collect();
    let max = c2.iter().cloned().fold(0.0, f64::max);
    let min = c2.iter().cloned().fold(f64::INFINITY, f64::min);
    let kvar = (max - min) / min;
    let hvar = (1..=6).map(|k| rel(friedrichs_constant(&m4, k).unwrap(), c2[k - 1])).fold(0.0, f64::max);
    outcome(kvar <= 0.5 && hvar <= 0.25, format!("variation over k {kvar:.3}, over refinement {hvar:.3}"))
}

fn c10_topology() -> Outcome {
    let mut rng = StdRng::seed_from_u64(10);
    let mut mismatches = 0;
    let mut critical = 0;
    for _ in 0..20 {
        let m = random_mesh(&mut rng);
        let c = classify_critical(&m, 0.0).unwrap();
        let oracle = collinearity_oracle(&m);
        critical += oracle.iter().filter(|k| k.is_some()).count();
        mismatches += c.kind.iter().zip(&oracle).filter(|(a, b)| a != b).count();
    }
    let cc = classify_critical(&crisscross(1).unwrap(), 0.01).unwrap();
    let centre = cc.kind[4] == Some(CriticalKind::Inner);
    let st = classify_critical(&single_triangle().unwrap(), 0.01).unwrap();
    let corners = st.kind.iter().all(|k| *k == Some(CriticalKind::Acute));
    let meshes = [
        crisscross(1).unwrap(),
        crisscross(2).unwrap(),
        crisscross(4).unwrap(),
        diagonal_square(3).unwrap(),
        glued_crisscross().unwrap(),
        tent().unwrap(),
        perturb(&crisscross(2).unwrap(), 4, [0.02, 0.0]).unwrap(),
    ];
    let disjoint = meshes.iter().all(|m| {
        let c = classify_critical(m, 0.01).unwrap();
        fan_decomposition(m, &c).map(|d| d.supports_disjoint(m)).unwrap_or(false)
    });
    outcome(
        mismatches == 0 && centre && corners && disjoint,
        format!("{mismatches} oracle mismatches ({critical} critical vertices), centre inner {centre}, corners acute {corners}, supports disjoint {disjoint}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("weighted Legendre integrals", c1_weighted_integrals),
        ("H^1/2 seminorm closed form and recursion", c2_h12_seminorm),
        ("weighted edge identity", c3_edge_identity),
        ("fan determinant closed form", c4_fan_determinant),
        ("CR jump moments", c5_jump_moments),
        ("projection contract", c6_pi_cr),
        ("modified bubble properties", c7_bubbles),
        ("inf-sup positivity and robustness", c8_infsup),
        ("discrete Friedrichs constants", c9_friedrichs),
        ("topology classifier", c10_topology),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        println!("criterion {:>2} {}: {} ({})", i + 1, if o.passed { "PASS" } else { "FAIL" }, name, o.detail);
        if !o.passed {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
