use proptest::prelude::*;
use smom::linalg::{inverse, norm2, solve, spectral_norm, sym_eig2, Matrix};
use smom::SmomError;

fn m(rows: &[&[f64]]) -> Matrix {
    Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn max_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn solve_examples() {
    assert_eq!(
        solve(&Matrix::identity(2), &[1.0, 2.0]).unwrap(),
        vec![1.0, 2.0]
    );
    assert_eq!(
        solve(&Matrix::diag(&[2.0, 4.0]), &[2.0, 4.0]).unwrap(),
        vec![1.0, 1.0]
    );
    let x = solve(&m(&[&[1.0, 1.0], &[1.0, -1.0]]), &[3.0, 1.0]).unwrap();
    assert!((x[0] - 2.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
}

#[test]
fn singular_systems_are_reported() {
    let a = m(&[&[1.0, 2.0], &[2.0, 4.0]]);
    assert!(matches!(solve(&a, &[1.0, 1.0]), Err(SmomError::Singular)));
    assert!(matches!(inverse(&a), Err(SmomError::Singular)));
    assert!(matches!(
        solve(&Matrix::zeros(2, 2), &[0.0, 0.0]),
        Err(SmomError::Singular)
    ));
}

#[test]
fn non_finite_entries_are_rejected() {
    assert!(Matrix::from_row_major(1, 1, vec![f64::NAN]).is_err());
    assert!(Matrix::from_row_major(1, 2, vec![1.0]).is_err());
}

#[test]
fn inverse_examples() {
    assert_eq!(inverse(&Matrix::identity(3)).unwrap(), Matrix::identity(3));
    assert!(
        max_diff(
            &inverse(&Matrix::diag(&[2.0, 4.0])).unwrap(),
            &Matrix::diag(&[0.5, 0.25])
        ) < 1e-16
    );
    let inv = inverse(&m(&[&[4.0, 2.0], &[2.0, 3.0]])).unwrap();
    let oracle = m(&[&[3.0, -2.0], &[-2.0, 4.0]]).scale(1.0 / 8.0);
    assert!(max_diff(&inv, &oracle) < 1e-15);
}

#[test]
fn eig_examples() {
    let e = sym_eig2(&Matrix::identity(2)).unwrap();
    assert_eq!(e.values, [1.0, 1.0]);
    let dot = e.vectors[0][0] * e.vectors[1][0] + e.vectors[0][1] * e.vectors[1][1];
    assert!(dot.abs() < 1e-15);

    let e = sym_eig2(&Matrix::diag(&[4.0, 1.0])).unwrap();
    assert_eq!(e.values, [4.0, 1.0]);
    assert!((e.vectors[0][0].abs() - 1.0).abs() < 1e-15);
    assert!((e.vectors[1][1].abs() - 1.0).abs() < 1e-15);

    let e = sym_eig2(&Matrix::diag(&[1.0, 4.0])).unwrap();
    assert_eq!(e.values, [4.0, 1.0]);
    assert!((e.vectors[0][1].abs() - 1.0).abs() < 1e-15);

    let e = sym_eig2(&m(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
    assert!((e.values[0] - 3.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
    assert!((e.vectors[0][0] - e.vectors[0][1]).abs() < 1e-15);

    assert!(sym_eig2(&m(&[&[1.0, 2.0], &[0.0, 1.0]])).is_err());
}

#[test]
fn spectral_norm_examples() {
    assert_eq!(spectral_norm(&Matrix::zeros(2, 3)), 0.0);
    assert!((spectral_norm(&Matrix::diag(&[3.0, -5.0])) - 5.0).abs() < 1e-14);
    assert!((spectral_norm(&m(&[&[0.0, 1.0], &[0.0, 0.0]])) - 1.0).abs() < 1e-14);
}

fn well_conditioned(p: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-1.0f64..1.0, p * p).prop_map(move |v| {
        let mut a = Matrix::from_row_major(p, p, v).unwrap();
        for i in 0..p {
            a[(i, i)] += p as f64 + 1.0;
        }
        a
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn solve_residual_is_small((a, b) in (1usize..=8).prop_flat_map(|p| (well_conditioned(p), prop::collection::vec(-10.0f64..10.0, p)))) {
        let x = solve(&a, &b).unwrap();
        let ax = a.matvec(&x).unwrap();
        let r: Vec<f64> = ax.iter().zip(&b).map(|(u, v)| u - v).collect();
        prop_assert!(norm2(&r) <= 1e-10 * (1.0 + norm2(&b)));
    }

    #[test]
    fn inverse_is_an_involution(a in (1usize..=8).prop_flat_map(well_conditioned)) {
        let inv = inverse(&a).unwrap();
        let id = a.matmul(&inv).unwrap();
        prop_assert!(max_diff(&id, &Matrix::identity(a.rows())) <= 1e-9);
        let back = inverse(&inv).unwrap();
        prop_assert!(max_diff(&back, &a) <= 1e-8 * (1.0 + a.max_abs()));
    }

    #[test]
    fn eig_pairs_are_orthonormal(a in -10.0f64..10.0, b in -10.0f64..10.0, d in -10.0f64..10.0) {
        let s = m(&[&[a, b], &[b, d]]);
        let e = sym_eig2(&s).unwrap();
        prop_assert!(e.values[0] >= e.values[1]);
        for k in 0..2 {
            let v = e.vectors[k];
            prop_assert!((norm2(&v) - 1.0).abs() < 1e-12);
            let sv = s.matvec(&v).unwrap();
            prop_assert!((sv[0] - e.values[k] * v[0]).abs() < 1e-10 * (1.0 + s.max_abs()));
            prop_assert!((sv[1] - e.values[k] * v[1]).abs() < 1e-10 * (1.0 + s.max_abs()));
        }
        let dot = e.vectors[0][0] * e.vectors[1][0] + e.vectors[0][1] * e.vectors[1][1];
        prop_assert!(dot.abs() < 1e-12);
    }

    #[test]
    fn spectral_norm_bounds(v in prop::collection::vec(-5.0f64..5.0, 6)) {
        let a = Matrix::from_row_major(2, 3, v).unwrap();
        let s = spectral_norm(&a);
        let cols = a.transpose().to_rows();
        let max_col = cols.iter().map(|c| norm2(c)).fold(0.0, f64::max);
        prop_assert!(s + 1e-12 >= max_col / 3f64.sqrt());
        prop_assert!(s <= a.frobenius() + 1e-12);
    }

    #[test]
    fn spectral_norm_exact_for_diagonal(d in prop::collection::vec(-5.0f64..5.0, 1..6)) {
        let expected = d.iter().map(|x| x.abs()).fold(0.0, f64::max);
        prop_assert!((spectral_norm(&Matrix::diag(&d)) - expected).abs() <= 1e-12 * (1.0 + expected));
    }
}
