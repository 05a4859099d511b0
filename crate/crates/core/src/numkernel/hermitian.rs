//! Cholesky-based routines for Hermitian positive definite matrices, plus a
//! general LU determinant.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-9;

/// Lower-triangular Cholesky factor `L` with `A = L L†`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: ComplexMatrix,
}

impl Cholesky {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Domain("square"));
        }
        if !a.is_finite() {
            return Err(Error::Domain("finite"));
        }
        let scale = a.max_abs().max(1.0);
        if a.hermitian_defect() > HERMITIAN_TOL * scale {
            return Err(Error::Domain("Hermitian"));
        }
        let n = a.rows();
        let mut l = ComplexMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if d.is_nan() || d <= 0.0 {
                return Err(Error::Domain("positive definite"));
            }
            let djj = d.sqrt();
            l[(j, j)] = Complex64::new(djj, 0.0);
            for i in j + 1..n {
                let mut z = a[(i, j)];
                for k in 0..j {
                    z -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = z / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn factor(&self) -> &ComplexMatrix {
        &self.l
    }

    /// `log2 det(A) = 2 Σ log2 L_ii`.
    pub fn log2_det(&self) -> f64 {
        2.0 * (0..self.l.rows()).map(|i| self.l[(i, i)].re.log2()).sum::<f64>()
    }

    /// Solves `A X = B`.
    pub fn solve(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let n = self.l.rows();
        assert_eq!(b.rows(), n, "solve: rhs has {} rows, expected {n}", b.rows());
        let mut x = b.clone();
        for c in 0..b.cols() {
            // L y = b
            for i in 0..n {
                let mut z = x[(i, c)];
                for k in 0..i {
                    z -= self.l[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = z / self.l[(i, i)].re;
            }
            // L† x = y
            for i in (0..n).rev() {
                let mut z = x[(i, c)];
                for k in i + 1..n {
                    z -= self.l[(k, i)].conj() * x[(k, c)];
                }
                x[(i, c)] = z / self.l[(i, i)].re;
            }
        }
        x
    }

    pub fn inverse(&self) -> ComplexMatrix {
        let inv = self.solve(&ComplexMatrix::identity(self.l.rows()));
        // Restore exact Hermitian symmetry lost to rounding.
        let n = inv.rows();
        ComplexMatrix::from_fn(n, n, |i, j| 0.5 * (inv[(i, j)] + inv[(j, i)].conj()))
    }
}

/// Base-2 log-determinant of a Hermitian positive definite matrix.
pub fn logdet_hermitian_pd(a: &ComplexMatrix) -> Result<f64> {
    Ok(Cholesky::new(a)?.log2_det())
}

/// Inverse of a Hermitian positive definite matrix.
pub fn hermitian_pd_inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(Cholesky::new(a)?.inverse())
}

/// Determinant of a general square matrix by partially pivoted LU.
pub fn determinant(a: &ComplexMatrix) -> Result<Complex64> {
    if !a.is_square() {
        return Err(Error::Domain("square"));
    }
    let n = a.rows();
    let mut lu = a.clone();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| lu[(i, col)].norm().total_cmp(&lu[(j, col)].norm()))
            .unwrap();
        if lu[(pivot, col)].norm() == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if pivot != col {
            for j in 0..n {
                let t = lu[(col, j)];
                lu[(col, j)] = lu[(pivot, j)];
                lu[(pivot, j)] = t;
            }
            det = -det;
        }
        let p = lu[(col, col)];
        det *= p;
        for i in col + 1..n {
            let f = lu[(i, col)] / p;
            for j in col + 1..n {
                let t = lu[(col, j)];
                lu[(i, j)] -= f * t;
            }
        }
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::svd::svd;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_pd(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = ComplexMatrix::from_fn(n, n, |_, _| {
            Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        });
        &b.adjoint_mul(&b) + &ComplexMatrix::identity(n)
    }

    #[test]
    fn logdet_trivial_cases() {
        assert_eq!(logdet_hermitian_pd(&ComplexMatrix::identity(4)).unwrap(), 0.0);
        let d = ComplexMatrix::from_real_diag(2, 2, &[2.0, 2.0]);
        assert!((logdet_hermitian_pd(&d).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn logdet_matches_eigenvalue_product() {
        for seed in 0..10 {
            let a = random_pd(6, seed);
            // Hermitian PD: eigenvalues are the singular values.
            let oracle: f64 = svd(&a).unwrap().singular_values.iter().map(|s| s.log2()).sum();
            let got = logdet_hermitian_pd(&a).unwrap();
            assert!((got - oracle).abs() <= 1e-9 * oracle.abs().max(1.0), "{got} vs {oracle}");
        }
    }

    #[test]
    fn logdet_of_inverse_cancels() {
        for seed in 20..30 {
            let a = random_pd(5, seed);
            let inv = hermitian_pd_inverse(&a).unwrap();
            let sum = logdet_hermitian_pd(&a).unwrap() + logdet_hermitian_pd(&inv).unwrap();
            assert!(sum.abs() <= 1e-8, "{sum}");
        }
    }

    #[test]
    fn inverse_cases() {
        assert_eq!(
            hermitian_pd_inverse(&ComplexMatrix::identity(3)).unwrap(),
            ComplexMatrix::identity(3)
        );
        let inv = hermitian_pd_inverse(&ComplexMatrix::from_real_diag(2, 2, &[2.0, 4.0])).unwrap();
        let expected = ComplexMatrix::from_real_diag(2, 2, &[0.5, 0.25]);
        assert!((&inv - &expected).max_abs() < 1e-15);
        for seed in 40..45 {
            let a = random_pd(7, seed);
            let inv = hermitian_pd_inverse(&a).unwrap();
            let resid = (&a.matmul(&inv) - &ComplexMatrix::identity(7)).frobenius_norm_sqr().sqrt();
            assert!(resid <= 1e-8 * 7.0, "{resid}");
        }
    }

    #[test]
    fn rejects_non_hermitian_and_indefinite() {
        let mut a = ComplexMatrix::identity(2);
        a[(0, 1)] = Complex64::new(0.5, 0.0);
        assert!(matches!(logdet_hermitian_pd(&a), Err(Error::Domain("Hermitian"))));
        let b = ComplexMatrix::from_real_diag(2, 2, &[1.0, -1.0]);
        assert!(matches!(logdet_hermitian_pd(&b), Err(Error::Domain("positive definite"))));
        assert!(matches!(
            hermitian_pd_inverse(&ComplexMatrix::zeros(2, 3)),
            Err(Error::Domain("square"))
        ));
    }

    #[test]
    fn lu_determinant_matches_cholesky() {
        let a = random_pd(5, 99);
        let det = determinant(&a).unwrap();
        assert!(det.im.abs() <= 1e-9 * det.norm());
        assert!((det.re.log2() - logdet_hermitian_pd(&a).unwrap()).abs() < 1e-10);
        let p = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(determinant(&p).unwrap(), Complex64::new(-1.0, 0.0));
    }
}
