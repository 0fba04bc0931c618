use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;

use brake_index::flow::{self, CoefficientPath};
use brake_index::galerkin::GalerkinSpace;
use brake_index::index::{self, IndexOptions};
use brake_index::linalg::{self, Mat};
use brake_index::symplectic::{self, LagrangianFrame, SymplecticMatrix};

fn symmetric(n: usize) -> impl Strategy<Value = Mat> {
    prop::collection::vec(-1.5..1.5f64, 4 * n * n).prop_map(move |v| {
        let d = 2 * n;
        linalg::symmetrize(&Mat::from_fn(d, d, |a, b| v[a * d + b]))
    })
}

/// `exp(JS)` via the flow of the constant system `S`.
fn random_symplectic(s: &Mat) -> Mat {
    let b = CoefficientPath::constant(s.clone()).unwrap();
    flow::fundamental_solution(&b, 1.0, 256).unwrap().endpoint().clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reflection_anticommutes_with_j(n in 1usize..5) {
        let j = symplectic::standard_j(n).unwrap();
        let nn = symplectic::brake_n(n).unwrap();
        prop_assert!(linalg::max_abs(&(&nn * &j + &j * &nn)) == 0.0);
        prop_assert!(linalg::max_abs(&(&nn * &nn - Mat::identity(2 * n, 2 * n))) == 0.0);
    }

    #[test]
    fn flows_stay_symplectic(s in symmetric(2)) {
        let m = random_symplectic(&s);
        prop_assert!(symplectic::symplectic_defect(&m).unwrap() < 1e-9 * linalg::max_abs(&m).powi(2).max(1.0));
        let inv = symplectic::symplectic_inverse(&m);
        let err = linalg::max_abs(&(&m * inv - Mat::identity(4, 4)));
        prop_assert!(err < 1e-9 * linalg::max_abs(&m).powi(2).max(1.0));
    }

    #[test]
    fn unipotent_factors_reconstruct(s in symmetric(1)) {
        let m = random_symplectic(&s);
        let v = linalg::v_block(&m);
        prop_assume!(v.determinant().abs() > 1e-3);
        let sm = SymplecticMatrix::new(m.clone()).unwrap();
        let f = symplectic::unipotent_factorization(&sm).unwrap();
        prop_assert!(linalg::max_abs(&(f.reconstruct().unwrap() - &m)) < 1e-8 * linalg::max_abs(&m).max(1.0));
        prop_assert!(linalg::symmetry_defect(&f.w) < 1e-8 * linalg::max_abs(&f.w).max(1.0));
        prop_assert!(linalg::symmetry_defect(&f.w_prime) < 1e-8 * linalg::max_abs(&f.w_prime).max(1.0));
    }

    #[test]
    fn frame_conjugation_preserves_symplecticity(s in symmetric(1)) {
        let m = random_symplectic(&s);
        let c = LagrangianFrame::l1(1).unwrap().conjugate(&m);
        prop_assert!(symplectic::symplectic_defect(&c).unwrap() < 1e-9 * linalg::max_abs(&m).powi(2).max(1.0));
    }

    #[test]
    fn scalar_index_matches_floor(c in -8.0..8.0f64) {
        // away from the resonances c ∈ πℤ the index is ⌊c/π⌋
        prop_assume!(((c / PI) - (c / PI).round()).abs() > 1e-3);
        let b = CoefficientPath::scalar(1, c).unwrap();
        let pair = index::l0_index(&b, 1.0).unwrap();
        prop_assert_eq!(pair.index, (c / PI).floor() as i64);
        prop_assert_eq!(pair.nullity, 0);
    }

    #[test]
    fn index_is_monotone_in_scalar_shift(c in -6.0..6.0f64, d in 0.0..3.0f64) {
        let opts = IndexOptions::default();
        let lo = index::l0_index_with(&CoefficientPath::scalar(1, c).unwrap(), 1.0, &opts).unwrap();
        let hi = index::l0_index_with(&CoefficientPath::scalar(1, c + d).unwrap(), 1.0, &opts).unwrap();
        prop_assert!(lo.index <= hi.index);
    }

    #[test]
    fn iterate_endpoint_matches_integration(s in symmetric(1), k in 1usize..5) {
        // a diagonal constant commutes with N
        let b0 = Mat::from_diagonal(&s.diagonal());
        let b = CoefficientPath::constant(b0).unwrap();
        let g1 = flow::fundamental_solution(&b, 1.0, 512).unwrap();
        let it = flow::iterate_path(&g1, k).unwrap();
        let direct = flow::fundamental_solution(&b, k as f64, 512 * k).unwrap();
        let scale = linalg::max_abs(direct.endpoint()).max(1.0);
        prop_assert!(linalg::max_abs(&(it.endpoint() - direct.endpoint())) / scale < 1e-9);
    }

    #[test]
    fn fourier_round_trip(coeffs in prop::collection::vec(-1.0..1.0f64, 9)) {
        let space = GalerkinSpace::new(1, 4, 1).unwrap();
        let v = linalg::Vector::from_vec(coeffs);
        let z = space.vector(&v).unwrap();
        let back = space.project_trajectory(|s| z.eval(s)).unwrap();
        for (a, b) in v.iter().zip(back.coeffs.iter()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-10);
        }
    }
}
