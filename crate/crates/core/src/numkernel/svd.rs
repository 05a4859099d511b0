//! Full complex SVD by one-sided (Hestenes) Jacobi rotations.
//!
//! The Jacobi sweep runs on the tall orientation of the input (`A` itself
//! when `rows >= cols`, `A†` otherwise), orthogonalizing column pairs until
//! every pair satisfies `|b_p† b_q| <= tol * ‖b_p‖ ‖b_q‖`. The orthogonalized
//! columns give one set of singular vectors, the accumulated rotations the
//! other. The short factor is then completed to a full unitary basis.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// `A = U · diag(s) · Vh` with both `U` and `Vh` square and unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct SvdResult {
    pub u: ComplexMatrix,
    /// Nonnegative, descending; length `min(rows, cols)`.
    pub singular_values: Vec<f64>,
    /// Conjugate-transposed right factor.
    pub vh: ComplexMatrix,
}

impl SvdResult {
    /// Right singular vectors as columns (`Vh†`).
    pub fn v(&self) -> ComplexMatrix {
        self.vh.adjoint()
    }

    /// `U · diag(s) · Vh`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let s = ComplexMatrix::from_real_diag(self.u.cols(), self.vh.rows(), &self.singular_values);
        self.u.matmul(&s).matmul(&self.vh)
    }
}

/// Full singular value decomposition of a nonempty finite matrix.
pub fn svd(a: &ComplexMatrix) -> Result<SvdResult> {
    if !a.is_finite() {
        return Err(Error::Domain("finite"));
    }
    let (m, n) = a.shape();
    if m >= n {
        let (q, s, w) = jacobi_tall(a)?;
        let u = complete_basis(&q, &s);
        Ok(SvdResult {
            u,
            singular_values: s,
            vh: w.adjoint(),
        })
    } else {
        // A† = Q Σ W†  =>  A = W Σ Q†
        let (q, s, w) = jacobi_tall(&a.adjoint())?;
        let vh = complete_basis(&q, &s).adjoint();
        Ok(SvdResult {
            u: w,
            singular_values: s,
            vh,
        })
    }
}

/// For tall `b` (m x n, m >= n) returns `(Q, s, W)` with `b·W = Q·diag(s)`,
/// `W` n x n unitary, `Q` m x n with unit (or zero) columns, `s` descending.
fn jacobi_tall(b: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
    let (m, n) = b.shape();
    // Column-major working copies.
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| b.column(j)).collect();
    let mut rot: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[j] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();

    let tol = f64::EPSILON * (m as f64);
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let sp = phase.conj() * s;
                let sq = phase * s;
                rotate(&mut cols, p, q, c, sp, sq);
                rotate(&mut rot, p, q, c, sp, sq);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "Jacobi SVD of a {m}x{n} matrix did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let s: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let q_cols: Vec<Vec<Complex64>> = order
        .iter()
        .map(|&i| {
            if norms[i] > 0.0 {
                cols[i].iter().map(|z| z / norms[i]).collect()
            } else {
                vec![Complex64::new(0.0, 0.0); m]
            }
        })
        .collect();
    let w_cols: Vec<Vec<Complex64>> = order.iter().map(|&i| rot[i].clone()).collect();
    Ok((
        ComplexMatrix::from_columns(&q_cols),
        s,
        ComplexMatrix::from_columns(&w_cols),
    ))
}

/// Applies the unitary column rotation
/// `b_p <- c b_p - sp b_q`, `b_q <- sq b_p + c b_q`.
fn rotate(cols: &mut [Vec<Complex64>], p: usize, q: usize, c: f64, sp: Complex64, sq: Complex64) {
    let (lo, hi) = cols.split_at_mut(q);
    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let xp = *x;
        let yq = *y;
        *x = xp * c - sp * yq;
        *y = sq * xp + yq * c;
    }
}

/// Extends the m x n (m >= n) column set `q` to an m x m unitary matrix.
/// Columns with zero singular value are replaced by the orthogonal
/// complement, obtained from a Householder QR of the retained columns.
fn complete_basis(q: &ComplexMatrix, s: &[f64]) -> ComplexMatrix {
    let (m, n) = q.shape();
    let kept: Vec<usize> = (0..n).filter(|&j| s[j] > 0.0).collect();
    if kept.len() == m {
        return q.clone();
    }
    let r = kept.len();

    // Householder vectors for the retained columns, column-major.
    let mut a: Vec<Vec<Complex64>> = kept.iter().map(|&j| q.column(j)).collect();
    let mut reflectors: Vec<Vec<Complex64>> = Vec::with_capacity(r);
    for j in 0..r {
        let x = &a[j][j..];
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let x0 = x[0];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = x.to_vec();
        v[0] -= alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vn > 0.0 {
            v.iter_mut().for_each(|z| *z /= vn);
        }
        for col in a.iter_mut().skip(j) {
            apply_reflector(&v, &mut col[j..]);
        }
        reflectors.push(v);
    }

    // Q = H_0 H_1 ... H_{r-1}; only columns r..m are needed.
    let mut complement: Vec<Vec<Complex64>> = (r..m)
        .map(|i| {
            let mut e = vec![Complex64::new(0.0, 0.0); m];
            e[i] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();
    for (j, v) in reflectors.iter().enumerate().rev() {
        for col in &mut complement {
            apply_reflector(v, &mut col[j..]);
        }
    }

    let mut fill = complement.into_iter();
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| if s[j] > 0.0 { q.column(j) } else { fill.next().unwrap() })
        .collect();
    cols.extend(fill);
    ComplexMatrix::from_columns(&cols)
}

/// `x <- (I - 2 v v†) x` for unit `v`.
fn apply_reflector(v: &[Complex64], x: &mut [Complex64]) {
    let dot: Complex64 = v.iter().zip(x.iter()).map(|(a, b)| a.conj() * b).sum();
    let f = dot * 2.0;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= f * vi;
    }
}
