use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{dmatrix, dvector, Complex, DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rkbs::properties::reproducing_residual;
use rkbs::random::{random_matrix, random_vector};
use rkbs::zoo::{QuadratureGrid, ScalarKernel, SensingMatrixSpace, TensorProductSpace, TranslationInvariantSpace};
use rkbs::{Exponent, RkbsFunction};

fn e(v: f64) -> Exponent {
    Exponent::new(v).unwrap()
}

// Sensing matrices.

#[test]
fn sensing_pairing_with_dual_is_squared_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = SensingMatrixSpace::new(4, 3, e(3.0), e(4.0)).unwrap();
    for _ in 0..20 {
        let a: DMatrix<f64> = random_matrix(&mut rng, 3, 4);
        let norm = s.norm(&a).unwrap();
        let pairing = s.pairing(&a, &s.dual(&a).unwrap()).unwrap();
        assert!((pairing - norm * norm).abs() < 1e-12 * norm * norm);
    }
}

#[test]
fn sensing_norm_by_hand() {
    // Columns (1, 2) and (−3, 0); p = 3 column norms, r = 1.5 across.
    let s = SensingMatrixSpace::new(2, 2, e(3.0), e(1.5)).unwrap();
    let a = dmatrix![1.0, -3.0; 2.0, 0.0];
    let c1 = 9.0_f64.powf(1.0 / 3.0);
    let c2 = 3.0_f64;
    let expected = (c1.powf(1.5) + c2.powf(1.5)).powf(1.0 / 1.5);
    assert!((s.norm(&a).unwrap() - expected).abs() < 1e-14);
}

#[test]
fn sensing_dual_section_reproduces() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for gamma in [1.5, 2.0, 3.0] {
        let s = SensingMatrixSpace::new(3, 2, e(2.5), e(4.0))
            .unwrap()
            .with_output_exponent(e(gamma));
        for _ in 0..20 {
            let a: DMatrix<f64> = random_matrix(&mut rng, 2, 3);
            let x: DVector<f64> = random_vector(&mut rng, 3);
            let xi: DVector<f64> = random_vector(&mut rng, 2);
            let section = s.dual_section(&x, &xi).unwrap();
            let lhs = s.pairing(&a, &section).unwrap();
            let rhs = s.output_space().sip(&(&a * &x), &xi).unwrap();
            assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
        }
    }
}

#[test]
fn sensing_matches_generic_feature_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for row_wise in [false, true] {
        let s = SensingMatrixSpace::new(3, 2, e(3.0), e(1.5))
            .unwrap()
            .with_output_exponent(e(4.0))
            .row_wise(row_wise);
        let fm = s.feature_map();
        for _ in 0..10 {
            let x: DVector<f64> = random_vector(&mut rng, 3);
            let y: DVector<f64> = random_vector(&mut rng, 3);
            let xi: DVector<f64> = random_vector(&mut rng, 2);
            let closed = s.kernel_apply(&x, &y, &xi).unwrap();
            let generic = fm.kernel_apply(x.as_slice(), y.as_slice(), &xi).unwrap();
            assert!((closed - generic).norm() < 1e-12);
            let dual = s.to_coefficient(&s.dual_section(&x, &xi).unwrap()).unwrap();
            assert!((dual - fm.dual_section(x.as_slice(), &xi).unwrap()).norm() < 1e-12);
        }
    }
}

#[test]
fn sensing_reproducing_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = SensingMatrixSpace::new(3, 3, e(4.0), e(1.5))
        .unwrap()
        .with_output_exponent(e(3.0));
    let fm = Arc::new(s.feature_map());
    for _ in 0..50 {
        let f = RkbsFunction::new(&fm, random_vector(&mut rng, 9)).unwrap();
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let xi = random_vector(&mut rng, 3);
        assert!(reproducing_residual(&f, &x, &xi).unwrap() < 1e-9);
    }
}

#[test]
fn sensing_strict_convexity_witness() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s = SensingMatrixSpace::new(3, 2, e(1.5), e(3.0)).unwrap();
    for _ in 0..20 {
        let a: DMatrix<f64> = random_matrix(&mut rng, 2, 3);
        let b: DMatrix<f64> = random_matrix(&mut rng, 2, 3);
        let lhs = s.norm(&(&a + &b)).unwrap();
        let rhs = s.norm(&a).unwrap() + s.norm(&b).unwrap();
        assert!(lhs < rhs - 1e-12);
    }
}

// Tensor products.

fn tensor_kernels() -> Vec<ScalarKernel> {
    vec![
        ScalarKernel::Linear,
        ScalarKernel::polynomial2(0.5).unwrap(),
        ScalarKernel::gaussian(
            0.8,
            vec![vec![0.0, 0.0], vec![1.0, 0.5], vec![-0.5, 1.0], vec![0.3, -1.2]],
        )
        .unwrap(),
    ]
}

#[test]
fn tensor_hilbert_collapse() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let s = TensorProductSpace::new(2, tensor_kernels(), Exponent::TWO, Exponent::TWO).unwrap();
    for _ in 0..20 {
        let x: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0) + 1.5).collect();
        let y: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
        let xi: DVector<f64> = random_vector(&mut rng, 3);
        let k = s.kernel_apply(&x, &y, &xi).unwrap();
        for j in 0..3 {
            let expected = xi[j] * s.kernels()[j].evaluate(&x, &y);
            assert!((k[j] - expected).abs() < 1e-12 * (1.0 + expected.abs()));
        }
        let norm = s.kernel_norm(&x, &xi).unwrap();
        let direct: f64 = (0..3)
            .map(|j| xi[j] * xi[j] * s.kernels()[j].evaluate(&x, &x))
            .sum::<f64>()
            .sqrt();
        assert!((norm - direct).abs() < 1e-12 * direct);
    }
}

#[test]
fn tensor_closed_forms_match_feature_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (p, r) in [(3.0, 1.5), (1.5, 4.0), (2.5, 2.0), (4.0, 3.0)] {
        let s = TensorProductSpace::new(2, tensor_kernels(), e(p), e(r)).unwrap();
        let fm = s.feature_map::<f64>();
        for _ in 0..20 {
            let x: Vec<f64> = (0..2).map(|_| rng.random_range(0.2..1.5)).collect();
            let y: Vec<f64> = (0..2).map(|_| rng.random_range(-1.5..1.5)).collect();
            let xi: DVector<f64> = random_vector(&mut rng, 3);
            let coefficient = fm.generalized_adjoint_apply(&x, &xi).unwrap();
            let via = fm.feature_space().norm(&coefficient).unwrap();
            let closed = s.kernel_norm(&x, &xi).unwrap();
            assert!((via - closed).abs() < 1e-9, "p={p} r={r}: {via} vs {closed}");
            let k = s.kernel_apply(&x, &y, &xi).unwrap();
            let kg = fm.kernel_apply(&x, &y, &xi).unwrap();
            assert!((k - &kg).norm() < 1e-9 * (1.0 + kg.norm()));
            let d = s.dual_section(&x, &xi).unwrap();
            assert!((d - fm.dual_section(&x, &xi).unwrap()).norm() < 1e-12);
        }
    }
}

#[test]
fn tensor_complex_directions() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let s = TensorProductSpace::new(2, tensor_kernels(), e(3.0), e(1.5)).unwrap();
    let fm = s.feature_map::<Complex<f64>>();
    for _ in 0..10 {
        let x = [0.7, 0.9];
        let y = [-0.2, 0.4];
        let xi: DVector<Complex<f64>> = random_vector(&mut rng, 3);
        let k = s.kernel_apply(&x, &y, &xi).unwrap();
        let kg = fm.kernel_apply(&x, &y, &xi).unwrap();
        assert!((k - &kg).norm() < 1e-9 * (1.0 + kg.norm()));
    }
}

#[test]
fn tensor_zero_direction() {
    let s = TensorProductSpace::new(2, tensor_kernels(), e(1.5), e(3.0)).unwrap();
    let k = s
        .kernel_apply(&[1.0, 1.0], &[0.0, 0.5], &DVector::<f64>::zeros(3))
        .unwrap();
    assert_eq!(k, DVector::zeros(3));
}

#[test]
fn tensor_reproducing_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let s = TensorProductSpace::new(2, tensor_kernels(), e(4.0), e(1.5)).unwrap();
    let fm = Arc::new(s.feature_map::<f64>());
    for _ in 0..50 {
        let f = RkbsFunction::new(&fm, random_vector(&mut rng, fm.feature_dim())).unwrap();
        let x: Vec<f64> = (0..2).map(|_| rng.random_range(-1.5..1.5)).collect();
        let xi = random_vector(&mut rng, 3);
        assert!(reproducing_residual(&f, &x, &xi).unwrap() < 1e-9);
    }
}

// Translation-invariant spaces.

fn well_conditioned(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    loop {
        let s: DMatrix<f64> = random_matrix(rng, n, n);
        if rkbs::linalg::condition_number(&s) < 100.0 {
            return s;
        }
    }
}

#[test]
fn ti_gaussian_reduction() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let s = well_conditioned(&mut rng, 3);
    let space = TranslationInvariantSpace::new(2, s.clone(), Exponent::TWO).unwrap();
    let xi: DVector<f64> = random_vector(&mut rng, 3);
    let gram = &s * s.transpose();
    for i in 0..5 {
        for j in 0..5 {
            let x = [i as f64 * 0.5 - 1.0, 0.3];
            let y = [j as f64 * 0.4 - 0.8, -0.2];
            let d2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
            let expected = &gram * &xi * (-d2 / 2.0).exp();
            let k = space.kernel_apply(&x, &y, &xi).unwrap();
            assert!((k - expected).norm() < 1e-12);
        }
    }
}

#[test]
fn ti_unit_mass_diagonal() {
    let s = dmatrix![2.0, 1.0; 0.0, 1.0];
    let d = 1;
    let space = TranslationInvariantSpace::new(d, s.clone(), Exponent::TWO)
        .unwrap()
        .with_density_mass(1.0)
        .unwrap();
    let xi = dvector![0.5, -1.0];
    let k = space.kernel_apply(&[0.4], &[0.4], &xi).unwrap();
    let expected = &s * s.transpose() * &xi / (2.0 * PI);
    assert!((k - expected).norm() < 1e-14);
}

#[test]
fn ti_homogeneity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = well_conditioned(&mut rng, 2);
    let space = TranslationInvariantSpace::new(1, s, e(3.0)).unwrap();
    let xi: DVector<f64> = random_vector(&mut rng, 2);
    let k = space.kernel_apply(&[0.3], &[-0.6], &xi).unwrap();
    for alpha in [-2.5, 0.1, 7.0] {
        let ka = space.kernel_apply(&[0.3], &[-0.6], &(&xi * alpha)).unwrap();
        assert!((ka - &k * alpha).norm() < 1e-12 * (1.0 + k.norm()));
    }
}

#[test]
fn ti_zero_direction() {
    let space = TranslationInvariantSpace::new(1, DMatrix::identity(2, 2), e(1.5)).unwrap();
    let k = space.kernel_apply(&[0.0], &[1.0], &DVector::<f64>::zeros(2)).unwrap();
    assert_eq!(k, DVector::zeros(2));
}

fn max_discretization_error(space: &TranslationInvariantSpace, grid: &QuadratureGrid, xi: &DVector<f64>) -> f64 {
    let fm = space.discretized_feature_map(grid).unwrap();
    let xi_c = xi.map(|v| Complex::new(v, 0.0));
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            let x = [-3.0 + 6.0 * i as f64 / 9.0];
            let y = [-3.0 + 6.0 * j as f64 / 9.0];
            let closed = space.kernel_apply(&x, &y, xi).unwrap();
            let disc = fm.kernel_apply(&x, &y, &xi_c).unwrap();
            let imag = disc.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
            assert!(imag < 1e-10, "imaginary residue {imag:e}");
            let err = (disc.map(|c| c.re) - closed).amax();
            worst = worst.max(err);
        }
    }
    worst
}

#[test]
fn ti_discretization_matches_closed_form() {
    let s = dmatrix![1.2, 0.3; -0.4, 0.9];
    let xi = dvector![0.8, -0.5];
    for p in [2.0, 3.0, 1.5] {
        let space = TranslationInvariantSpace::new(1, s.clone(), e(p)).unwrap();
        let err = max_discretization_error(&space, &QuadratureGrid::standard(1).unwrap(), &xi);
        assert!(err < 1e-3, "p={p}: {err:e}");
    }
}

#[test]
fn ti_real_map_matches_complex_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let s = well_conditioned(&mut rng, 2);
    for (p, per_axis) in [(2.0, 60), (3.0, 61), (1.5, 40)] {
        let space = TranslationInvariantSpace::new(1, s.clone(), e(p)).unwrap();
        let grid = QuadratureGrid::uniform(1, per_axis, -8.0, 8.0).unwrap();
        let complex = space.discretized_feature_map(&grid).unwrap();
        let real = space.real_feature_map(&grid).unwrap();
        for _ in 0..10 {
            let x = [rng.random_range(-2.0..2.0)];
            let y = [rng.random_range(-2.0..2.0)];
            let xi: DVector<f64> = random_vector(&mut rng, 2);
            let kr = real.kernel_apply(&x, &y, &xi).unwrap();
            let kc = complex.kernel_apply(&x, &y, &xi.map(|v| Complex::new(v, 0.0))).unwrap();
            assert!((kr - kc.map(|c| c.re)).norm() < 1e-11 * (1.0 + kc.norm()));
        }
    }
}

#[test]
fn ti_real_map_two_dimensional_input() {
    let s = dmatrix![1.0, 0.2; 0.1, 0.8];
    let space = TranslationInvariantSpace::new(2, s, e(2.5)).unwrap();
    let grid = QuadratureGrid::uniform(2, 41, -7.0, 7.0).unwrap();
    let real = space.real_feature_map(&grid).unwrap();
    let xi = dvector![0.6, 1.1];
    let (x, y) = ([0.2, -0.3], [0.5, 0.4]);
    let closed = space.kernel_apply(&x, &y, &xi).unwrap();
    let disc = real.kernel_apply(&x, &y, &xi).unwrap();
    assert!((closed - disc).amax() < 1e-3);
}

#[test]
fn ti_feature_at_origin_is_real_quadrature() {
    let s = dmatrix![1.0, 2.0; 0.0, 1.0];
    let space = TranslationInvariantSpace::new(1, s.clone(), e(3.0)).unwrap();
    let grid = QuadratureGrid::uniform(1, 101, -8.0, 8.0).unwrap();
    let fm = space.discretized_feature_map(&grid).unwrap();
    let g = grid.len();
    // Constant u_j(t) = c_j.
    let c = [0.5, -1.5];
    let u = DVector::from_fn(2 * g, |k, _| Complex::new(c[k / g], 0.0));
    let out = fm.feature_matrix(&[0.0]).unwrap() * u;
    let mass: f64 = space.quadrature_weights(&grid).iter().sum::<f64>() / (2.0 * PI).sqrt();
    let expected = &s * dvector![c[0], c[1]] * mass;
    for i in 0..2 {
        assert_eq!(out[i].im, 0.0);
        assert!((out[i].re - expected[i]).abs() < 1e-12);
    }
}

#[test]
fn ti_dual_section_closed_form() {
    // At p = 2, Euclidean output, the dual section at y is S Sᵀ ξ e^{−|x−y|²/2}.
    let s = dmatrix![1.0, 0.5; 0.0, 2.0];
    let space = TranslationInvariantSpace::new(1, s.clone(), Exponent::TWO).unwrap();
    let xi = dvector![0.3, 0.7];
    let v = space.dual_section_value(&[0.5], &[-0.25], &xi).unwrap();
    let expected = &s * s.transpose() * &xi * (-(0.75f64).powi(2) / 2.0).exp();
    assert!((v - expected).norm() < 1e-13);
}

#[test]
fn ti_reproducing_in_discretization() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let space = TranslationInvariantSpace::new(1, dmatrix![1.0, 0.4; 0.2, 1.0], e(3.0)).unwrap();
    let grid = QuadratureGrid::uniform(1, 80, -8.0, 8.0).unwrap();
    let fm = Arc::new(space.real_feature_map(&grid).unwrap());
    for _ in 0..20 {
        let f = RkbsFunction::new(&fm, random_vector(&mut rng, fm.feature_dim())).unwrap();
        let xi = random_vector(&mut rng, 2);
        let r = reproducing_residual(&f, &[rng.random_range(-2.0..2.0)], &xi).unwrap();
        assert!(r < 1e-3, "{r}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ti_translation_is_isometric(seed in any::<u64>(), shift in -3.0f64..3.0, p in 1.5f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = TranslationInvariantSpace::new(1, dmatrix![1.0, 0.3; -0.2, 0.7], e(p)).unwrap();
        let grid = QuadratureGrid::uniform(1, 64, -8.0, 8.0).unwrap();
        let fm = Arc::new(space.discretized_feature_map(&grid).unwrap());
        let u: DVector<Complex<f64>> = random_vector(&mut rng, fm.feature_dim());
        let shifted = space.shift_coefficient(&grid, &u, &[shift]).unwrap();
        let f = RkbsFunction::new(&fm, u).unwrap();
        let g = RkbsFunction::new(&fm, shifted).unwrap();
        prop_assert!((f.norm() - g.norm()).abs() < 1e-6 * f.norm());
        let x = [rng.random_range(-2.0..2.0)];
        let lhs = g.evaluate(&x).unwrap();
        let rhs = f.evaluate(&[x[0] + shift]).unwrap();
        prop_assert!((lhs - &rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
    }

    #[test]
    fn tensor_homogeneous(seed in any::<u64>(), alpha in -5.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = TensorProductSpace::new(2, tensor_kernels(), e(3.0), e(1.5)).unwrap();
        let xi: DVector<f64> = random_vector(&mut rng, 3);
        let k = s.kernel_apply(&[0.5, 1.0], &[0.1, -0.4], &xi).unwrap();
        let ka = s.kernel_apply(&[0.5, 1.0], &[0.1, -0.4], &(&xi * alpha)).unwrap();
        prop_assert!((ka - k * alpha).norm() < 1e-10);
    }
}
