use hofmat_core::assembly::peierls_phase;
use hofmat_core::geometry::{FluxGeometry, MagneticField};
use hofmat_core::spectral::{eigenvalues_hermitian, hausdorff, operator_norm, DEFAULT_RESIDUAL_TOL};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn brute_hausdorff(x: &[f64], y: &[f64]) -> f64 {
    let directed = |a: &[f64], b: &[f64]| {
        a.iter()
            .map(|p| b.iter().map(|q| (p - q).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(x, y).max(directed(y, x))
}

fn hermitian(n: usize, entries: &[(f64, f64)]) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(n, n, |i, j| {
        let (re, im) = entries[i * n + j];
        Complex64::new(re, im)
    });
    (&a + a.adjoint()).map(|z| z * 0.5)
}

fn set() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, 1..30).prop_map(sorted)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hausdorff_matches_brute_force(x in set(), y in set()) {
        prop_assert_eq!(hausdorff(&x, &y).unwrap(), brute_hausdorff(&x, &y));
    }

    #[test]
    fn hausdorff_is_a_metric(x in set(), y in set(), z in set()) {
        let dxy = hausdorff(&x, &y).unwrap();
        prop_assert_eq!(dxy, hausdorff(&y, &x).unwrap());
        prop_assert_eq!(hausdorff(&x, &x).unwrap(), 0.0);
        let bound = dxy + hausdorff(&y, &z).unwrap();
        prop_assert!(hausdorff(&x, &z).unwrap() <= bound * (1.0 + 1e-15));
    }

    #[test]
    fn peierls_phases_are_unimodular(
        b in -3.0..3.0f64,
        g in prop::collection::vec(-20i64..20, 2),
        h in prop::collection::vec(-20i64..20, 2),
    ) {
        let geom = FluxGeometry::with_default_quadrature(MagneticField::unit_planar());
        let p = peierls_phase(&geom, b, &g, &h).unwrap();
        let q = peierls_phase(&geom, b, &h, &g).unwrap();
        prop_assert!((p.norm() - 1.0).abs() < 1e-14);
        prop_assert!((p * q - 1.0).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hausdorff_distance_of_spectra_is_at_most_the_norm_difference(
        a in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 144),
        c in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 144),
        scale in 0.0..1.0f64,
    ) {
        let s = hermitian(12, &a);
        let t = &s + hermitian(12, &c).map(|z| z * scale);
        let ss = eigenvalues_hermitian(&s, DEFAULT_RESIDUAL_TOL).unwrap().eigenvalues;
        let st = eigenvalues_hermitian(&t, DEFAULT_RESIDUAL_TOL).unwrap().eigenvalues;
        let d = hausdorff(&ss, &st).unwrap();
        prop_assert!(d <= operator_norm(&(&s - &t)) + 1e-10);
    }

    #[test]
    fn spectra_are_unitarily_invariant(
        a in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 64),
        angles in prop::collection::vec(-3.2..3.2f64, 8),
    ) {
        let s = hermitian(8, &a);
        // Diagonal phases followed by a fixed Givens rotation mixing every pair.
        let mut u = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(8, |i, _| Complex64::from_polar(1.0, angles[i])));
        let (c, sn) = (0.6, 0.8);
        for k in (0..8).step_by(2) {
            let mut g = DMatrix::<Complex64>::identity(8, 8);
            g[(k, k)] = Complex64::new(c, 0.0);
            g[(k + 1, k + 1)] = Complex64::new(c, 0.0);
            g[(k, k + 1)] = Complex64::new(-sn, 0.0);
            g[(k + 1, k)] = Complex64::new(sn, 0.0);
            u = g * u;
        }
        let t = &u * &s * u.adjoint();
        let t = (&t + t.adjoint()).map(|z| z * 0.5);
        let x = eigenvalues_hermitian(&s, DEFAULT_RESIDUAL_TOL).unwrap().eigenvalues;
        let y = eigenvalues_hermitian(&t, DEFAULT_RESIDUAL_TOL).unwrap().eigenvalues;
        for (p, q) in x.iter().zip(&y) {
            prop_assert!((p - q).abs() < 1e-12);
        }
    }
}
