//! Comparisons against independently computed reference values.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use nlev_core::kr_solver::{power_iterate, PowerOptions};
use nlev_core::transform::{transform_half_width, truncation_depth};
use nlev_core::{
    convolve, power_method, rayleigh, transform_kernel, Cutoff, CutoffOperator, Grid, GridFn, Kernel, OddProfile,
};

fn dense_top(kernel: &Kernel, cutoff: Cutoff) -> (f64, Vec<f64>) {
    let m = cutoff.cells();
    let h = cutoff.spacing();
    let a = DMatrix::from_fn(m, m, |k, j| h * (kernel.eval((k as f64 - j as f64) * h) - kernel.eval((k + j + 1) as f64 * h)));
    let eig = a.symmetric_eigen();
    let (i, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .unwrap();
    (lambda, eig.eigenvectors.column(i).iter().copied().collect())
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

#[test]
fn power_method_matches_dense_eigensolve_on_smooth_kernels() {
    for kernel in [Kernel::gaussian(), Kernel::tent()] {
        for (xi, cells) in [(0.5, 120), (1.0, 200), (2.0, 400)] {
            let cutoff = Cutoff::with_cells(xi, cells).unwrap();
            let (lambda, vec) = dense_top(&kernel, cutoff);
            let op = CutoffOperator::new(&kernel, cutoff);
            let pair = power_iterate(&op, None, PowerOptions::default()).unwrap();
            assert!((pair.lambda - lambda).abs() <= 1e-8, "{} xi {xi}: {} vs {lambda}", kernel.label(), pair.lambda);
            let overlap: f64 = unit(pair.v.values()).iter().zip(unit(&vec)).map(|(a, b)| a * b).sum();
            assert!((overlap.abs() - 1.0).abs() <= 1e-6, "overlap {overlap}");
        }
    }
}

#[test]
fn gaussian_unit_cutoff_eigenvalue() {
    let cutoff = Cutoff::resolved(1.0, 5e-3).unwrap();
    let (lambda, _) = dense_top(&Kernel::gaussian(), cutoff);
    let pair = power_method(&Kernel::gaussian(), cutoff, PowerOptions::default()).unwrap();
    assert!((pair.lambda - lambda).abs() <= 1e-8);
    assert!(pair.residual <= 1e-10);
    assert!((pair.v.norm_l2() - 1.0).abs() <= 1e-12);
    assert!(pair.v.values().iter().all(|&x| x <= 0.0));
}

#[test]
fn tent_has_no_trivial_regime() {
    let cutoff = Cutoff::resolved(0.05, 1e-3).unwrap();
    let (lambda, _) = dense_top(&Kernel::tent(), cutoff);
    let pair = power_method(&Kernel::tent(), cutoff, PowerOptions::default()).unwrap();
    assert!(lambda > 0.0 && pair.lambda > 0.0);
    assert!((pair.lambda - lambda).abs() <= 1e-8);
}

#[test]
fn gaussian_tail_eigenvalue() {
    let pair = power_method(&Kernel::gaussian(), Cutoff::resolved(20.0, 5e-3).unwrap(), PowerOptions::default()).unwrap();
    let expected = 1.0 - PI * PI * 0.25 / 400.0;
    assert!((pair.lambda - expected).abs() <= 5e-4, "{} vs {expected}", pair.lambda);
}

#[test]
fn indicator_test_profile_energy() {
    // 2F(v) = int int a(x - y) v(x) v(y) over [-1, 1]^2 with v = -(2)^{-1/2} sgn(x)
    let n = 2000;
    let d = 2.0 / n as f64;
    let xs: Vec<f64> = (0..n).map(|i| -1.0 + (i as f64 + 0.5) * d).collect();
    let v = |x: f64| -(0.5f64).sqrt() * x.signum();
    let mut reference = 0.0;
    for &x in &xs {
        for &y in &xs {
            if (x - y).abs() <= 0.5 {
                reference += v(x) * v(y);
            }
        }
    }
    reference *= d * d;
    let cutoff = Cutoff::resolved(1.0, 1e-3).unwrap();
    let profile = OddProfile::from_fn(cutoff.spacing(), cutoff.cells(), |_| -(0.5f64).sqrt());
    let r = rayleigh(&Kernel::indicator(), cutoff, &profile).unwrap();
    assert!((r - reference).abs() <= 2e-3, "{r} vs {reference}");
    assert!((reference - 0.625).abs() <= 2e-3);
}

#[test]
fn transformed_gaussian_peak_matches_closed_form() {
    let kernel = Kernel::gaussian();
    let (mu, tol) = (0.5, 1e-8);
    let grid = Grid::new(transform_half_width(&kernel, mu, tol), 1e-3).unwrap();
    let tk = transform_kernel(&kernel, mu, &grid, tol).unwrap();
    let k = truncation_depth(mu, tol);
    assert_eq!(tk.truncation_depth, k);
    let series: f64 = (0..=k).map(|j| mu.powi(j as i32) / ((j + 1) as f64 * PI).sqrt()).sum();
    let expected = (1.0 - mu) * series / (1.0 - mu.powi(k as i32 + 1));
    assert!((tk.peak() - expected).abs() <= 1e-8 * expected, "{} vs {expected}", tk.peak());
    assert!(tk.peak() < kernel.eval(0.0));
}

#[test]
fn grid_convolution_reference_values() {
    let grid = Grid::new(10.0, 1e-3).unwrap();
    let a = Kernel::gaussian().sample_on(&grid);
    let aa = convolve(&a, &a).unwrap();
    let c = grid.center();
    assert!((aa.at_index(c) - 1.0 / (2.0 * PI).sqrt()).abs() <= 1e-5);

    let grid = Grid::new(2.0, 5e-4).unwrap();
    let ind = GridFn::from_fn(grid, |x| if x.abs() <= 0.5 { 1.0 } else { 0.0 });
    let chi = GridFn::from_fn(grid, |x| if x.abs() <= 0.5 { 1.0 } else { 0.0 });
    let out = convolve(&ind, &chi).unwrap();
    assert!((out.at_index(grid.center()) - 1.0).abs() <= 1e-3);
}
