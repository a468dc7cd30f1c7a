use proptest::prelude::*;
use wlasso::ensemble::seeded_rng;
use wlasso::linalg::{dot, max_abs_diff, norm_inf, pseudoinverse_apply, residual_projection, solve_spd};
use wlasso::DenseMatrix;

fn gaussian(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = seeded_rng(seed);
    let data = (0..rows * cols).map(|_| rng.standard_normal()).collect();
    DenseMatrix::new(rows, cols, data).unwrap()
}

fn gaussian_vec(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed);
    (0..len).map(|_| rng.standard_normal()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spd_solve_residual_is_small(n in 1usize..=64, seed in any::<u64>()) {
        let b_mat = gaussian(n + 4, n, seed);
        let mut g = b_mat.gram();
        let mut data = g.as_slice().to_vec();
        for i in 0..n {
            data[i * n + i] += 1.0;
        }
        g = DenseMatrix::new(n, n, data).unwrap();
        let b = gaussian_vec(n, seed ^ 0xabcd);
        let x = solve_spd(&g, &b).unwrap();
        let r: Vec<f64> = g.matvec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
        prop_assert!(norm_inf(&r) <= 1e-10 * (1.0 + norm_inf(&b)), "residual {}", norm_inf(&r));
    }

    #[test]
    fn pseudoinverse_is_a_left_inverse(k in 1usize..=16, extra in 0usize..=16, seed in any::<u64>()) {
        let m = 2 * k + extra;
        let a_s = gaussian(m, k, seed);
        let v = gaussian_vec(k, seed.wrapping_add(1));
        let back = pseudoinverse_apply(&a_s, &a_s.matvec(&v)).unwrap();
        prop_assert!(max_abs_diff(&back, &v) <= 1e-10);
    }

    #[test]
    fn residual_projection_is_idempotent_and_orthogonal(k in 1usize..=12, extra in 1usize..=20, seed in any::<u64>()) {
        let m = k + extra;
        let a_s = gaussian(m, k, seed);
        let v = gaussian_vec(m, seed.wrapping_mul(3));
        let p = residual_projection(&a_s, &v).unwrap();
        let pp = residual_projection(&a_s, &p).unwrap();
        prop_assert!(max_abs_diff(&p, &pp) <= 1e-10);
        for j in 0..k {
            let c = dot(&a_s.column(j), &p);
            prop_assert!(c.abs() <= 1e-9, "column {} correlation {}", j, c);
        }
    }

    #[test]
    fn transpose_products_agree(rows in 1usize..=20, cols in 1usize..=20, seed in any::<u64>()) {
        let a = gaussian(rows, cols, seed);
        let r = gaussian_vec(rows, seed ^ 7);
        prop_assert!(max_abs_diff(&a.matvec_t(&r), &a.transpose().matvec(&r)) <= 1e-12);
    }
}

#[test]
fn singular_gram_is_rejected() {
    let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]).unwrap();
    assert!(pseudoinverse_apply(&a, &[1.0, 1.0, 1.0]).is_err());
}
