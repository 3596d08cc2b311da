mod common;

use proptest::prelude::*;
use switchcons::linalg::{
    care_residual, care_scale, determinant, eigenvalues, expm, is_positive_definite,
    lyapunov_residual, max_generalized_eigenvalue, solve_care, solve_lyapunov,
    symmetric_eigenvalues, Matrix,
};

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(64)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn lyapunov_matches_kronecker_oracle(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = common::rng(seed);
        let a = common::random_stable(&mut rng, n);
        let c = common::random_symmetric(&mut rng, n);
        let x = solve_lyapunov(&a, &c).unwrap();
        let oracle = common::kronecker_lyapunov(&a, &c).unwrap();
        prop_assert!(x.max_diff(&oracle) < 1e-8);
        prop_assert!(lyapunov_residual(&a, &x, &c).max_abs() <= 1e-8 * (1.0 + c.max_abs()));
        prop_assert!(x.asymmetry() == 0.0);
    }

    #[test]
    fn antistable_lyapunov_is_spd(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = common::rng(seed);
        // −(stable) is antistable
        let anti = common::random_stable(&mut rng, n).scale(-1.0);
        let x = solve_lyapunov(&anti.scale(-1.0), &Matrix::identity(n).scale(-1.0)).unwrap();
        prop_assert!(is_positive_definite(&x).unwrap().positive_definite);
    }

    #[test]
    fn care_residual_and_stability(seed in any::<u64>(), n in 1usize..=5, m in 1usize..=3) {
        let mut rng = common::rng(seed);
        let a = common::random_matrix(&mut rng, n, n);
        let b = common::random_matrix(&mut rng, n, m.min(n));
        let w = common::random_spd(&mut rng, n);
        let x = solve_care(&a, &b, &w).unwrap();
        prop_assert!(care_residual(&a, &b, &w, &x).max_abs() <= 1e-9 * care_scale(&a, &b, &w, &x));
        prop_assert!(is_positive_definite(&x).unwrap().positive_definite);
        let closed = &a - &(&(&b * &b.transpose()) * &x);
        prop_assert!(eigenvalues(&closed).unwrap().max_real() < 0.0);
    }

    #[test]
    fn eigenvalue_sum_is_trace(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = common::rng(seed);
        let a = common::random_matrix(&mut rng, n, n).scale(3.0);
        let s = eigenvalues(&a).unwrap();
        prop_assert_eq!(s.len(), n);
        let sum = s.sum();
        prop_assert!((sum.re - a.trace()).abs() <= 1e-8 * (1.0 + a.trace().abs()));
        prop_assert!(sum.im.abs() <= 1e-8);
    }

    #[test]
    fn eigenvalue_product_is_cofactor_determinant(seed in any::<u64>(), n in 1usize..=5) {
        let mut rng = common::rng(seed);
        let a = common::random_matrix(&mut rng, n, n).scale(2.0);
        let det = common::cofactor_det(&a.to_rows());
        let prod = eigenvalues(&a).unwrap().product();
        prop_assert!((prod.re - det).abs() <= 1e-8 * (1.0 + det.abs()));
        prop_assert!((determinant(&a).unwrap() - det).abs() <= 1e-10 * (1.0 + det.abs()));
    }

    #[test]
    fn spectrum_closed_under_conjugation(seed in any::<u64>(), n in 2usize..=8) {
        let mut rng = common::rng(seed);
        let a = common::random_matrix(&mut rng, n, n);
        let s = eigenvalues(&a).unwrap();
        for z in &s.eigenvalues {
            let partner = s
                .eigenvalues
                .iter()
                .map(|w| (w.re - z.re).hypot(w.im + z.im))
                .fold(f64::INFINITY, f64::min);
            prop_assert!(partner < 1e-9);
        }
    }

    #[test]
    fn expm_inverse_and_semigroup(seed in any::<u64>(), n in 1usize..=6, scale in 0.1f64..10.0) {
        let mut rng = common::rng(seed);
        let m = common::random_matrix(&mut rng, n, n);
        let m = m.scale(scale / m.norm1().max(1e-12));
        let fwd = expm(&m).unwrap();
        let back = expm(&m.scale(-1.0)).unwrap();
        let id = &fwd * &back;
        prop_assert!(id.max_diff(&Matrix::identity(n)) < 1e-9 * fwd.max_abs().max(1.0) * back.max_abs().max(1.0));
        let (s, t) = (0.3, 0.45);
        let whole = expm(&m.scale(s + t)).unwrap();
        let split = &expm(&m.scale(s)).unwrap() * &expm(&m.scale(t)).unwrap();
        prop_assert!(whole.max_diff(&split) <= 1e-11 * (1.0 + whole.max_abs()));
    }

    #[test]
    fn generalized_eigenvalue_oracles(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = common::rng(seed);
        let q1 = common::random_spd(&mut rng, n);
        let q2 = common::random_spd(&mut rng, n);
        let lam = max_generalized_eigenvalue(&q1, &q2).unwrap();
        let lam_back = max_generalized_eigenvalue(&q2, &q1).unwrap();
        prop_assert!(lam > 0.0);
        prop_assert!(lam * lam_back >= 1.0 - 1e-12);
        // direct product with an independently solved inverse
        let inv = common::gauss_solve_matrix(&q1, &q2);
        let direct = eigenvalues(&inv).unwrap().eigenvalues.iter().map(|z| z.abs()).fold(0.0, f64::max);
        prop_assert!((lam - direct).abs() <= 1e-9 * (1.0 + direct));
        let scaled = max_generalized_eigenvalue(&q1.scale(2.5), &q2.scale(2.5)).unwrap();
        prop_assert!((scaled - lam).abs() <= 1e-12 * lam);
    }
}

#[test]
fn lyapunov_examples() {
    let x = solve_lyapunov(
        &Matrix::identity(2).scale(-0.5),
        &Matrix::identity(2).scale(-1.0),
    )
    .unwrap();
    assert!(x.max_diff(&Matrix::identity(2)) < 1e-15);
    let x = solve_lyapunov(
        &Matrix::from_rows(&[[-1.0]]).unwrap(),
        &Matrix::from_rows(&[[-2.0]]).unwrap(),
    )
    .unwrap();
    assert!((x[(0, 0)] - 1.0).abs() < 1e-15);
    // λ = 1 and −1 pair to zero; the solution is not unique
    assert!(solve_lyapunov(&Matrix::from_diag(&[1.0, -1.0]), &Matrix::identity(2)).is_err());
}

#[test]
fn definiteness_examples() {
    let d = is_positive_definite(&Matrix::identity(2).scale(2.0)).unwrap();
    assert!(d.positive_definite && d.min_pivot == 2.0);
    assert!(
        !is_positive_definite(&Matrix::from_diag(&[1.0, -1.0]))
            .unwrap()
            .positive_definite
    );
    let asym = Matrix::from_rows(&[[1.0, 0.5], [0.0, 1.0]]).unwrap();
    assert!(is_positive_definite(&asym).is_err());
}

#[test]
fn expm_examples() {
    assert_eq!(expm(&Matrix::zeros(3, 3)).unwrap(), Matrix::identity(3));
    let d = expm(&Matrix::from_diag(&[1.0, 2.0])).unwrap();
    assert!((d[(0, 0)] - 1f64.exp()).abs() < 1e-14 && (d[(1, 1)] - 2f64.exp()).abs() < 1e-13);
    let n = expm(&Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap()).unwrap();
    assert!(n.max_diff(&Matrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap()) < 1e-15);
    assert!(expm(&Matrix::from_rows(&[[1e6]]).unwrap()).is_err());
}

#[test]
fn symmetric_eigenvalues_match_general_solver() {
    let mut rng = common::rng(11);
    for n in 1..=7 {
        let s = common::random_symmetric(&mut rng, n);
        let sym = symmetric_eigenvalues(&s).unwrap();
        let mut gen = eigenvalues(&s).unwrap().sorted_real_parts();
        gen.sort_by(f64::total_cmp);
        for (a, b) in sym.iter().zip(&gen) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
