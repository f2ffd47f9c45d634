//! Randomized invariants.

use nlev_core::cutoff::test_profile;
use nlev_core::kr_solver::PowerOptions;
use nlev_core::{
    apply_A, cone_membership, convolve, power_method, quadrature, rayleigh, resolvent_check, solve_sigma,
    transform_kernel, BilinearNonlinearity, Cutoff, CutoffOperator, Grid, GridFn, Kernel, OddProfile, SolveOptions,
};
use proptest::prelude::*;

fn kernel(i: usize) -> Kernel {
    match i % 3 {
        0 => Kernel::gaussian(),
        1 => Kernel::tent(),
        _ => Kernel::indicator(),
    }
}

/// Even (`sign = 1`) or odd (`sign = -1`) extension of `half` onto a grid with `half.len()` positive nodes.
fn extend(half: &[f64], h: f64, sign: f64) -> GridFn {
    let n = half.len();
    let grid = Grid::with_half_points(n, h).unwrap();
    let center = if sign > 0.0 { half[0] } else { 0.0 };
    let mut values: Vec<f64> = half.iter().rev().map(|x| sign * x).collect();
    values.push(center);
    values.extend_from_slice(half);
    GridFn::new(grid, values).unwrap()
}

fn full_dot(a: &[f64], b: &[f64], h: f64) -> f64 {
    2.0 * h * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn convolution_preserves_parity(half in prop::collection::vec(-1.0f64..1.0, 40), k in 0usize..3) {
        let h = 0.05;
        for sign in [1.0, -1.0] {
            let f = extend(&half, h, sign);
            let a = kernel(k).sample_on(f.grid());
            let out = convolve(&a, &f).unwrap();
            let v = out.values();
            let c = out.grid().center();
            let scale = out.norm_inf().max(1e-300);
            for j in 1..=c {
                prop_assert!((v[c + j] - sign * v[c - j]).abs() <= 1e-13 * scale);
            }
            if sign < 0.0 {
                prop_assert!(v[c].abs() <= 1e-13 * scale);
            }
        }
    }

    #[test]
    fn young_bound(values in prop::collection::vec(-1.0f64..1.0, 81), k in 0usize..3) {
        let grid = Grid::new(2.0, 0.05).unwrap();
        let f = GridFn::new(grid, values).unwrap();
        let a = kernel(k).sample_on(&grid);
        let l1 = quadrature(&a.map(f64::abs));
        let out = convolve(&a, &f).unwrap();
        prop_assert!(out.norm_l2() <= l1 * f.norm_l2() * (1.0 + 1e-6));
    }

    #[test]
    fn quadrature_of_odd_product_vanishes(
        even in prop::collection::vec(-1.0f64..1.0, 30),
        odd in prop::collection::vec(-1.0f64..1.0, 30),
    ) {
        let h = 0.1;
        let e = extend(&even, h, 1.0);
        let o = extend(&odd, h, -1.0);
        let product: Vec<f64> = e.values().iter().zip(o.values()).map(|(x, y)| x * y).collect();
        let q = quadrature(&GridFn::new(*e.grid(), product).unwrap());
        prop_assert!(q.abs() <= 1e-14 * (e.norm_inf() * o.norm_inf()).max(1e-300));
    }

    #[test]
    fn operator_keeps_the_negative_cone(
        xi in 0.2f64..3.0,
        raw in prop::collection::vec(0.0f64..1.0, 16..120),
        k in 0usize..3,
    ) {
        let cutoff = Cutoff::with_cells(xi, raw.len()).unwrap();
        let v: Vec<f64> = raw.iter().map(|x| -x).collect();
        let out = CutoffOperator::new(&kernel(k), cutoff).apply(&v);
        let sup = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(out.iter().all(|&y| y <= 1e-12 * sup.max(1e-300)));
    }

    #[test]
    fn operator_is_symmetric(
        xi in 0.2f64..3.0,
        pair in (16usize..150).prop_flat_map(|m| (
            prop::collection::vec(-1.0f64..1.0, m),
            prop::collection::vec(-1.0f64..1.0, m),
        )),
        k in 0usize..3,
    ) {
        let (v, w) = pair;
        let cutoff = Cutoff::with_cells(xi, v.len()).unwrap();
        let op = CutoffOperator::new(&kernel(k), cutoff);
        let h = cutoff.spacing();
        let (av, aw) = (op.apply(&v), op.apply(&w));
        let lhs = full_dot(&w, &av, h);
        let rhs = full_dot(&v, &aw, h);
        let scale = full_dot(&w, &w, h).sqrt() * full_dot(&v, &v, h).sqrt();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale.max(1e-300));
    }

    #[test]
    fn operator_output_vanishes_beyond_cutoff(
        cells in 16usize..80,
        extra in 1usize..40,
        seed in prop::collection::vec(-1.0f64..1.0, 120),
        k in 0usize..3,
    ) {
        let h = 0.02;
        let cutoff = Cutoff::with_cells(cells as f64 * h, cells).unwrap();
        let v = OddProfile::new(h, seed[..cells + extra].to_vec()).unwrap();
        let out = apply_A(&kernel(k), cutoff, &v).unwrap();
        prop_assert!(out.values()[cells..].iter().all(|&y| y == 0.0));
    }

    #[test]
    fn gaussian_operator_is_strictly_negative(
        xi in 0.2f64..2.0,
        raw in prop::collection::vec(0.0f64..1.0, 16..60),
        spike in 0usize..16,
    ) {
        let mut v: Vec<f64> = raw.iter().map(|x| -x).collect();
        v[spike] = -1.0;
        let cutoff = Cutoff::with_cells(xi, v.len()).unwrap();
        let out = CutoffOperator::new(&Kernel::gaussian(), cutoff).apply(&v);
        prop_assert!(out.iter().all(|&y| y < 0.0));
    }

    #[test]
    fn eigenvalue_lies_in_unit_interval(xi in 0.05f64..6.0, k in 0usize..3) {
        let pair = power_method(&kernel(k), Cutoff::resolved(xi, 0.02).unwrap(), PowerOptions::default()).unwrap();
        prop_assert!((0.0..1.0).contains(&pair.lambda));
    }

    #[test]
    fn eigenvalue_dominates_test_profile_energy(xi in 0.1f64..6.0, k in 0usize..3) {
        let cutoff = Cutoff::resolved(xi, 0.01).unwrap();
        let pair = power_method(&kernel(k), cutoff, PowerOptions::default()).unwrap();
        let bound = rayleigh(&kernel(k), cutoff, &test_profile(cutoff, cutoff.cells())).unwrap();
        prop_assert!(pair.lambda >= bound - 1e-9, "{} < {bound}", pair.lambda);
    }

    #[test]
    fn gaussian_eigenfunction_is_in_refined_cone(xi in 0.1f64..6.0) {
        let cutoff = Cutoff::resolved(xi, 0.01).unwrap();
        let pair = power_method(&Kernel::gaussian(), cutoff, PowerOptions::default()).unwrap();
        let padded = OddProfile::new(cutoff.spacing(), {
            let mut v = pair.v.values().to_vec();
            v.resize(cutoff.cells() + 10, 0.0);
            v
        }).unwrap();
        let report = cone_membership(&padded, cutoff);
        prop_assert!(report.in_refined_cone, "{report:?}");
    }

    #[test]
    fn indicator_second_regime_eigenfunction_support(xi in 0.3f64..0.45) {
        let cutoff = Cutoff::resolved(xi, 5e-3).unwrap();
        let h = cutoff.spacing();
        let pair = power_method(&Kernel::indicator(), cutoff, PowerOptions::default()).unwrap();
        let v = &pair.v;
        let gap = 0.5 - xi;
        let tol = 1e-10 * v.norm_inf();
        for j in 0..v.cells() {
            let y = v.midpoint(j);
            if y + 0.5 * h < gap {
                prop_assert!(v.values()[j].abs() <= tol, "v({y}) = {}", v.values()[j]);
            } else if y - 0.5 * h > gap {
                prop_assert!(v.values()[j] < -tol, "v({y}) = {}", v.values()[j]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn eigenvalue_increases_with_cutoff_on_a_fixed_grid(a in 0.05f64..3.9, b in 0.05f64..3.9) {
        let grid = Grid::new(4.0, 0.02).unwrap();
        let (c1, c2) = (Cutoff::snapped(a.min(b), &grid).unwrap(), Cutoff::snapped(a.max(b), &grid).unwrap());
        prop_assume!(c1.cells() < c2.cells());
        let l1 = power_method(&Kernel::gaussian(), c1, PowerOptions::default()).unwrap().lambda;
        let l2 = power_method(&Kernel::gaussian(), c2, PowerOptions::default()).unwrap().lambda;
        prop_assert!(l1 < l2 - 1e-12, "{l1} vs {l2}");
    }

    #[test]
    fn transformed_kernel_is_strictly_unimodal(mu in 0.05f64..0.9, k in 0usize..3) {
        let base = kernel(k);
        let tol = 1e-8;
        let grid = Grid::new(nlev_core::transform::transform_half_width(&base, mu, tol), 0.01).unwrap();
        let tk = transform_kernel(&base, mu, &grid, tol).unwrap();
        let v = tk.samples.values();
        let c = tk.grid().center();
        for i in c..v.len() - 1 {
            if v[i + 1] > 1e-10 {
                prop_assert!(v[i + 1] < v[i], "not strictly decreasing at {}", tk.grid().point(i));
            }
        }
        prop_assert!((tk.mass() - 1.0).abs() <= 1e-6);
        prop_assert!(tk.second_moment() > base.meta().second_moment);
    }

    #[test]
    fn resolvent_routes_agree(
        values in prop::collection::vec(-1.0f64..1.0, 151),
        mu_index in 0usize..3,
    ) {
        let mu = [0.1, 0.5, 0.9][mu_index];
        let grid = Grid::new(3.0, 0.04).unwrap();
        let g = GridFn::new(grid, values).unwrap();
        let check = resolvent_check(&Kernel::gaussian(), mu, &g, 1e-8).unwrap();
        prop_assert!(check.relative_difference() <= 1e-6, "{}", check.relative_difference());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn solutions_satisfy_structural_identities(sigma in 0.3f64..2.3) {
        let params = BilinearNonlinearity::new(0.0, 0.6, 2.5).unwrap();
        let opts = SolveOptions { spacing: 5e-3, ..SolveOptions::default() };
        let s = solve_sigma(&Kernel::gaussian(), &params, sigma, &opts).unwrap();
        prop_assert!(s.shape().holds(s.u.norm_inf()), "{:?}", s.shape());
        prop_assert!((s.lambda - sigma / 2.5).abs() <= opts.tol_bisect);
        prop_assert!(s.mass_identity_error() <= 1e-6);
        prop_assert!(s.derivative_cosine() >= 1.0 - 1e-4);
        prop_assert!(s.residual_rel <= 1e-6);
    }
}
