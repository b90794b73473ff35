use nalgebra::DMatrix;
use proptest::prelude::*;
use restore_core::graph::{build_graph, gen_synthetic, SyntheticKind};
use restore_core::linalg::{katz_similarity, solve, sym_eig_smallest, truncated_svd};
use restore_core::DenseMatrix;

fn symmetric(n: usize, vals: &[f64]) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(n, n);
    let mut it = vals.iter().cycle();
    for i in 0..n {
        for j in i..n {
            let x = *it.next().unwrap();
            a[(i, j)] = x;
            a[(j, i)] = x;
        }
    }
    a
}

fn to_na(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.data())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigenpairs_match_an_independent_solver(
        n in 1usize..40,
        vals in prop::collection::vec(-5.0f64..5.0, 64),
    ) {
        let a = symmetric(n, &vals);
        let r = sym_eig_smallest(&a, n).unwrap();
        let mut want: Vec<f64> = nalgebra::SymmetricEigen::new(to_na(&a)).eigenvalues.iter().copied().collect();
        want.sort_by(f64::total_cmp);
        let norm = a.frobenius_norm().max(1.0);
        for (got, want) in r.values.iter().zip(&want) {
            prop_assert!((got - want).abs() <= 1e-9 * norm, "{got} vs {want}");
        }
        let v = r.vectors;
        let av = a.matmul(&v).unwrap();
        for c in 0..n {
            for i in 0..n {
                prop_assert!((av[(i, c)] - r.values[c] * v[(i, c)]).abs() <= 1e-8 * norm);
            }
        }
        let vtv = v.transpose().matmul(&v).unwrap();
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((vtv[(i, j)] - want).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn full_rank_svd_reconstructs(
        rows in 1usize..20,
        cols in 1usize..20,
        vals in prop::collection::vec(-3.0f64..3.0, 400),
    ) {
        let a = DenseMatrix::from_vec(rows, cols, vals[..rows * cols].to_vec()).unwrap();
        let k = rows.min(cols);
        let s = truncated_svd(&a, k).unwrap();
        let mut us = s.u.clone();
        for c in 0..k {
            for r in 0..rows {
                us[(r, c)] *= s.sigma[c];
            }
        }
        let back = us.matmul(&s.v.transpose()).unwrap();
        let err = back.sub(&a).unwrap().frobenius_norm();
        prop_assert!(err <= 1e-8 * a.frobenius_norm().max(1e-300), "{err}");
        let want = to_na(&a).singular_values();
        let mut want: Vec<f64> = want.iter().copied().collect();
        want.sort_by(|x, y| y.total_cmp(x));
        for (g, w) in s.sigma.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-9 * want[0].max(1.0));
        }
    }

    #[test]
    fn lu_solve_matches(n in 1usize..12, vals in prop::collection::vec(-1.0f64..1.0, 144)) {
        let mut a = DenseMatrix::from_vec(n, n, vals[..n * n].to_vec()).unwrap();
        for i in 0..n {
            a[(i, i)] += n as f64; // diagonally dominant, so well conditioned
        }
        let b = DenseMatrix::from_vec(n, 1, (0..n).map(|i| i as f64 - 1.5).collect()).unwrap();
        let x = solve(&a, &b).unwrap();
        let r = a.matmul(&x).unwrap().sub(&b).unwrap();
        prop_assert!(r.frobenius_norm() <= 1e-12 * n as f64);
    }

    #[test]
    fn katz_matches_the_power_series(seed in 0u64..1000, n in 2usize..15) {
        let g = gen_synthetic(SyntheticKind::Erdos { p: 0.3 }, n, seed).unwrap();
        let beta = 0.05;
        let s = katz_similarity(&g, beta).unwrap();
        let a = DenseMatrix::adjacency(&g);
        // Σ_{k≥1} (βA)^k
        let ba = a.scale(beta);
        let mut term = ba.clone();
        let mut sum = ba.clone();
        for _ in 0..200 {
            term = term.matmul(&ba).unwrap();
            let t = term.frobenius_norm();
            sum = DenseMatrix::from_vec(n, n, sum.data().iter().zip(term.data()).map(|(x, y)| x + y).collect()).unwrap();
            if t < 1e-18 {
                break;
            }
        }
        for (x, y) in s.data().iter().zip(sum.data()) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }
}

#[test]
fn katz_on_a_two_cycle() {
    // (I - βA)^-1 βA for A = [[0,1],[1,0]] is [[β², β], [β, β²]] / (1 - β²)
    let g = build_graph([("a", "b"), ("b", "a")]).unwrap();
    let beta = 0.2;
    let s = katz_similarity(&g, beta).unwrap();
    let d = 1.0 - beta * beta;
    assert!((s[(0, 0)] - beta * beta / d).abs() < 1e-14);
    assert!((s[(0, 1)] - beta / d).abs() < 1e-14);
    assert!(katz_similarity(&g, 1.0).is_err());
}

#[test]
fn large_eigenproblem_against_independent_solver() {
    let n = 130;
    let vals: Vec<f64> = (0..n * n).map(|i| ((i * 7919) % 1013) as f64 / 1013.0 - 0.5).collect();
    let a = symmetric(n, &vals);
    let r = sym_eig_smallest(&a, n).unwrap();
    let mut want: Vec<f64> = nalgebra::SymmetricEigen::new(to_na(&a)).eigenvalues.iter().copied().collect();
    want.sort_by(f64::total_cmp);
    for (g, w) in r.values.iter().zip(&want) {
        assert!((g - w).abs() < 1e-9, "{g} vs {w}");
    }
    let vtv = r.vectors.transpose().matmul(&r.vectors).unwrap();
    for i in 0..n {
        assert!((vtv[(i, i)] - 1.0).abs() < 1e-10);
    }
}
