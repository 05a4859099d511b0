use num_complex::Complex64;

use super::selection::IndexSelection;
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::numkernel::{frobenius_norm, svd, ComplexMatrix, SvdResult};

/// Per-user truncated SVD factors and the concatenated candidate precoders.
#[derive(Clone, Debug)]
pub struct CandidateSet {
    svds: Vec<SvdResult>,
    v: Vec<ComplexMatrix>,
    ftilde_k: Vec<ComplexMatrix>,
    ftilde: ComplexMatrix,
    sigma: Vec<f64>,
    n_c: usize,
    n_s: usize,
}

impl CandidateSet {
    pub fn num_users(&self) -> usize {
        self.svds.len()
    }

    pub fn n_c(&self) -> usize {
        self.n_c
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn svd(&self, k: usize) -> &SvdResult {
        &self.svds[k]
    }

    /// Full right singular factor `V_k` of user `k`.
    pub fn v(&self, k: usize) -> &ComplexMatrix {
        &self.v[k]
    }

    /// `F̃_k`: the leading `N_c` right singular vectors of user `k`.
    pub fn ftilde_k(&self, k: usize) -> &ComplexMatrix {
        &self.ftilde_k[k]
    }

    /// `F̃ = [F̃_1 ... F̃_K]`, `N_t x K·N_c`.
    pub fn ftilde(&self) -> &ComplexMatrix {
        &self.ftilde
    }

    /// Diagonal of `S`: each user's top `N_c` singular values, concatenated.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Selection of the `N_s` strongest candidates of every user.
    pub fn top_selection(&self) -> IndexSelection {
        IndexSelection::top(self.num_users(), self.n_s, self.n_c)
    }
}

fn check_dims(n_s: usize, n_c: usize, n_t: usize, n_r: usize) -> Result<()> {
    if n_s == 0 || n_s > n_c || n_c > n_t.min(n_r) {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= N_s <= N_c <= min(N_t, N_r); got N_s={n_s} N_c={n_c} N_t={n_t} N_r={n_r}"
        )));
    }
    Ok(())
}

/// Decomposes every user channel and keeps the `N_c` strongest right
/// singular vectors as beam candidates.
pub fn build_candidates(ch: &ChannelRealization, n_c: usize, n_s: usize) -> Result<CandidateSet> {
    check_dims(n_s, n_c, ch.n_t(), ch.n_r())?;
    let svds = ch.users().iter().map(svd).collect::<Result<Vec<_>>>()?;
    Ok(assemble(svds, n_c, n_s))
}

/// Rebuilds a candidate set for another `N_c`/`N_s` without repeating the SVDs.
pub fn rebuild_candidates(cs: &CandidateSet, n_c: usize, n_s: usize) -> Result<CandidateSet> {
    let (n_r, n_t) = (cs.svds[0].u.rows(), cs.svds[0].vh.rows());
    check_dims(n_s, n_c, n_t, n_r)?;
    Ok(assemble(cs.svds.clone(), n_c, n_s))
}

fn assemble(svds: Vec<SvdResult>, n_c: usize, n_s: usize) -> CandidateSet {
    let v: Vec<ComplexMatrix> = svds.iter().map(SvdResult::v).collect();
    let ftilde_k: Vec<ComplexMatrix> = v.iter().map(|v| v.leading_columns(n_c)).collect();
    let ftilde = ComplexMatrix::hstack(&ftilde_k);
    let sigma = svds
        .iter()
        .flat_map(|s| s.singular_values[..n_c].iter().copied())
        .collect();
    CandidateSet {
        svds,
        v,
        ftilde_k,
        ftilde,
        sigma,
        n_c,
        n_s,
    }
}

/// `Λ_c = S · F̃† · F̃` (K·N_c square). Row `i` of the Gram matrix is scaled
/// by `σ_i`.
pub fn correlation_matrix(cs: &CandidateSet) -> ComplexMatrix {
    let mut gram = cs.ftilde.adjoint_mul(&cs.ftilde);
    let n = gram.cols();
    for (i, &s) in cs.sigma.iter().enumerate() {
        for j in 0..n {
            gram[(i, j)] *= Complex64::new(s, 0.0);
        }
    }
    gram
}

/// `Λ = Λ_c[I, I]` for the global index set of `sel`.
pub fn submatrix(lambda_c: &ComplexMatrix, sel: &IndexSelection) -> Result<ComplexMatrix> {
    let global = sel.global();
    if let Some(&bad) = global.iter().find(|&&g| g >= lambda_c.rows()) {
        return Err(Error::InvalidParameter(format!(
            "global index {bad} outside a {}x{} correlation matrix",
            lambda_c.rows(),
            lambda_c.cols()
        )));
    }
    Ok(lambda_c.select(&global, &global))
}

/// `f = ‖Λ − diag(Λ)‖`.
pub fn objective(lambda: &ComplexMatrix) -> f64 {
    frobenius_norm(&lambda.without_diagonal())
}

/// `‖Λ − diag(Λ)‖²`, the bound on total inter-user interference.
pub fn interference_upper_bound(lambda: &ComplexMatrix) -> f64 {
    let f = objective(lambda);
    f * f
}

/// `(σ_sel, σ_max)`: selected gain sum and the best achievable gain sum.
pub fn sigma_sums(cs: &CandidateSet, sel: &IndexSelection) -> (f64, f64) {
    let sigma_sel = selected_gain(&cs.sigma, cs.n_c, sel.per_user());
    let sigma_max = selected_gain(&cs.sigma, cs.n_c, cs.top_selection().per_user());
    (sigma_sel, sigma_max)
}

#[inline]
pub(crate) fn selected_gain(sigma: &[f64], n_c: usize, per_user: &[Vec<usize>]) -> f64 {
    let mut total = 0.0;
    for (k, set) in per_user.iter().enumerate() {
        for &i in set {
            total += sigma[k * n_c + i];
        }
    }
    total
}

/// Precoders `F_k = V_k[I_k]` and combiners `W_k = U_k[I_k]`.
pub fn extract_beamformers(cs: &CandidateSet, sel: &IndexSelection) -> super::Beamformers {
    let precoders = (0..cs.num_users())
        .map(|k| cs.v[k].select_columns(sel.user(k)))
        .collect();
    let combiners = (0..cs.num_users())
        .map(|k| cs.svds[k].u.select_columns(sel.user(k)))
        .collect();
    super::Beamformers {
        precoders,
        combiners,
    }
}
