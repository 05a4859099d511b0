//! Dense complex linear algebra used throughout the crate.

mod hermitian;
mod matrix;
mod stats;
mod svd;

pub use hermitian::{determinant, hermitian_pd_inverse, logdet_hermitian_pd, Cholesky};
pub use matrix::ComplexMatrix;
pub use stats::{mean, median, pearson};
pub use svd::{svd, SvdResult};

/// Frobenius norm `sqrt(Σ |a_ij|²)`.
pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    a.frobenius_norm_sqr().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn frobenius_examples() {
        assert_eq!(frobenius_norm(&ComplexMatrix::zeros(3, 2)), 0.0);
        assert!((frobenius_norm(&ComplexMatrix::identity(5)) - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(frobenius_norm(&ComplexMatrix::from_real_rows(&[&[3.0, 4.0]])), 5.0);
    }

    fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
        prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), rows * cols).prop_map(move |v| {
            ComplexMatrix::new(rows, cols, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
                .unwrap()
        })
    }

    proptest! {
        #[test]
        fn frobenius_is_unitarily_invariant(a in matrix(4, 3), p in matrix(4, 4), q in matrix(3, 3)) {
            let u = svd(&p).unwrap().u;
            let v = svd(&q).unwrap().vh;
            let n = frobenius_norm(&a);
            let m = frobenius_norm(&u.matmul(&a).matmul(&v));
            prop_assert!((n - m).abs() <= 1e-9 * n.max(1e-300));
        }

        #[test]
        fn svd_invariants_hold(a in matrix(3, 5)) {
            let r = svd(&a).unwrap();
            let resid = frobenius_norm(&(&r.reconstruct() - &a));
            prop_assert!(resid <= 1e-8 * frobenius_norm(&a).max(1e-300));
            prop_assert!(r.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
