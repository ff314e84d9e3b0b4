mod common;

use common::{collinearity_oracle, det_closed_form, det_gauss, random_mesh};
use crlab::femspace::{build_dofmap, jump_moment_residual, Space};
use crlab::mesh::generators::{crisscross, perturb};
use crlab::mesh::topology::classify_critical;
use crlab::rightinverse::{fan_t_matrix, pi_cr, CrSpace};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use std::f64::consts::PI;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn classifier_matches_collinearity(seed in any::<u64>()) {
        let m = random_mesh(&mut StdRng::seed_from_u64(seed));
        let c = classify_critical(&m, 0.0).unwrap();
        prop_assert_eq!(c.kind, collinearity_oracle(&m));
    }

    #[test]
    fn fan_determinant(angles in prop::collection::vec(PI / 12.0..PI / 2.0, 2..=6)) {
        prop_assume!(angles.iter().sum::<f64>().sin().abs() > 1e-3);
        let t = fan_t_matrix(&angles).unwrap();
        let n = t.nrows();
        let rows = (0..n).map(|i| (0..n).map(|j| t[(i, j)]).collect()).collect();
        let (a, b) = (det_gauss(rows), det_closed_form(&angles));
        prop_assert!((a - b).abs() <= 1e-10 * b.abs());
    }

    #[test]
    fn perturbed_centre_keeps_jump_law(dx in -0.2..0.2f64, dy in -0.2..0.2f64, k in 1usize..=5) {
        let m = perturb(&crisscross(1).unwrap(), 4, [dx, dy]).unwrap();
        let d = build_dofmap(&m, k, Space::CrouzeixRaviart, false).unwrap();
        for i in 0..d.n_scalar() {
            let mut u = vec![0.0; d.n_scalar()];
            u[i] = 1.0;
            prop_assert!(jump_moment_residual(&m, &d, &u) < 1e-11);
        }
    }

    #[test]
    fn partition_of_unity(l1 in 0.0..1.0f64, l2 in 0.0..1.0f64, k in 1usize..=8) {
        prop_assume!(l1 + l2 <= 1.0);
        let el = crlab::femspace::lagrange::LagrangeElement::new(k);
        let s: f64 = el.values([1.0 - l1 - l2, l1, l2]).iter().sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_removes_vertex_functionals(values in prop::collection::vec(-1.0..1.0f64, 4), k in prop::sample::select(vec![5usize, 7])) {
        let m = crisscross(1).unwrap();
        let s = CrSpace::new(&m, k).unwrap();
        let mut q = s.piecewise_constant(&values);
        s.remove_mean(&mut q);
        let p = pi_cr(&s, &q, 0.01).unwrap();
        prop_assert!(p.div_means_max < 1e-10);
        prop_assert!(p.sv.member);
    }
}
