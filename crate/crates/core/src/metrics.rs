//! Spectral efficiency and inter-user interference of a set of beamformers,
//! plus numerical checks of the identities behind the interference bound.
//!
//! Conventions: precoder columns carry unit power, noise enters every
//! receive antenna with power `N_0²`, so SNR = `1/N_0²`.

use serde::{Deserialize, Serialize};

use crate::beamcore::{Beamformers, CandidateSet, IndexSelection};
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::numkernel::{frobenius_norm, logdet_hermitian_pd, ComplexMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// `N_0` (linear); the noise power per antenna is `N_0²`.
    pub noise_power_n0: f64,
}

impl LinkBudget {
    pub fn new(noise_power_n0: f64) -> Result<Self> {
        if !(noise_power_n0 > 0.0 && noise_power_n0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise power N_0 must be positive, got {noise_power_n0}"
            )));
        }
        Ok(Self { noise_power_n0 })
    }

    /// `SNR = 1/N_0²`, given in dB.
    pub fn from_snr_db(snr_db: f64) -> Self {
        Self {
            noise_power_n0: 10f64.powf(-snr_db / 20.0),
        }
    }

    pub fn snr_db(&self) -> f64 {
        -20.0 * self.noise_power_n0.log10()
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_power_n0 * self.noise_power_n0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    /// bits/s/Hz per user.
    pub per_user_rate: Vec<f64>,
    pub sum_rate: f64,
    /// `‖Δ_k‖` per user.
    pub per_user_interference_norm: Vec<f64>,
    /// `Δ = Σ_k ‖Δ_k‖`.
    pub total_interference: f64,
}

fn check_users(ch: &ChannelRealization, beams: &Beamformers) {
    assert_eq!(
        ch.num_users(),
        beams.num_users(),
        "channel has {} users, beamformers {}",
        ch.num_users(),
        beams.num_users()
    );
}

/// `Δ_k = W_k† H_k (Σ_{j≠k} F_j F_j†) H_k† W_k`, evaluated as written.
pub fn interference_matrix(k: usize, ch: &ChannelRealization, beams: &Beamformers) -> ComplexMatrix {
    check_users(ch, beams);
    let n_t = ch.n_t();
    let mut sum = ComplexMatrix::zeros(n_t, n_t);
    for (j, f) in beams.precoders.iter().enumerate() {
        if j != k {
            sum = &sum + &f.gram_outer();
        }
    }
    let w = &beams.combiners[k];
    let wh = w.adjoint_mul(ch.user(k));
    wh.matmul(&sum).matmul(&wh.adjoint())
}

/// `Δ = Σ_k ‖Δ_k‖`.
pub fn total_interference(ch: &ChannelRealization, beams: &Beamformers) -> f64 {
    (0..ch.num_users())
        .map(|k| frobenius_norm(&interference_matrix(k, ch, beams)))
        .sum()
}

/// Effective stream-domain channels `T_j = W_k† H_k F_j` for every `j`.
fn effective_channels(k: usize, ch: &ChannelRealization, beams: &Beamformers) -> Vec<ComplexMatrix> {
    let wh = beams.combiners[k].adjoint_mul(ch.user(k));
    beams.precoders.iter().map(|f| wh.matmul(f)).collect()
}

/// `R_k = log2 det(I + C_k⁻¹ W_k† H_k F_k F_k† H_k† W_k)` with
/// `C_k = Δ_k + N_0² W_k† W_k`, computed as `log2 det(C_k + S_k) − log2 det(C_k)`.
pub fn user_rate(k: usize, ch: &ChannelRealization, beams: &Beamformers, lb: &LinkBudget) -> Result<f64> {
    check_users(ch, beams);
    let t = effective_channels(k, ch, beams);
    let w = &beams.combiners[k];
    rate_from_blocks(k, &t, &w.adjoint_mul(w), lb)
}

/// Rate of user `k` from its stream-domain channels `t[j] = W_k† H_k F_j`
/// and `W_k† W_k`.
pub(crate) fn rate_from_blocks(k: usize, t: &[ComplexMatrix], w_gram: &ComplexMatrix, lb: &LinkBudget) -> Result<f64> {
    let mut c = w_gram.scale_real(lb.noise_variance());
    for (j, tj) in t.iter().enumerate() {
        if j != k {
            c = &c + &tj.gram_outer();
        }
    }
    let signal = t[k].gram_outer();
    let rate = logdet_hermitian_pd(&(&c + &signal))? - logdet_hermitian_pd(&c)?;
    Ok(rate.max(0.0))
}

/// Sum of per-user rates only.
pub fn sum_rate_value(ch: &ChannelRealization, beams: &Beamformers, lb: &LinkBudget) -> Result<f64> {
    (0..ch.num_users()).map(|k| user_rate(k, ch, beams, lb)).sum()
}

pub fn sum_rate(ch: &ChannelRealization, beams: &Beamformers, lb: &LinkBudget) -> Result<RateReport> {
    let per_user_rate = (0..ch.num_users())
        .map(|k| user_rate(k, ch, beams, lb))
        .collect::<Result<Vec<_>>>()?;
    let per_user_interference_norm: Vec<f64> = (0..ch.num_users())
        .map(|k| frobenius_norm(&interference_matrix(k, ch, beams)))
        .collect();
    Ok(RateReport {
        sum_rate: per_user_rate.iter().sum(),
        total_interference: per_user_interference_norm.iter().sum(),
        per_user_rate,
        per_user_interference_norm,
    })
}

/// `‖U[I_k]† U − E‖` where `E` holds the identity rows indexed by `I_k`.
/// Zero (to rounding) for unitary `U`.
pub fn verify_corollary1(u: &ComplexMatrix, idx: &[usize]) -> f64 {
    let lhs = u.select_columns(idx).adjoint_mul(u);
    let e = ComplexMatrix::identity(u.cols()).select_rows(idx);
    frobenius_norm(&(&lhs - &e))
}

/// `| ‖W†H(Σ_{j≠k} F_j F_j†)H†W‖ − ‖Σ_{j≠k} (W†H F_j)(W†H F_j)†‖ |`.
pub fn verify_lemma1(w: &ComplexMatrix, h: &ComplexMatrix, precoders: &[ComplexMatrix], k: usize) -> f64 {
    let n_t = h.cols();
    let mut outer = ComplexMatrix::zeros(n_t, n_t);
    let n_s = w.cols();
    let mut stream = ComplexMatrix::zeros(n_s, n_s);
    let wh = w.adjoint_mul(h);
    for (j, f) in precoders.iter().enumerate() {
        if j == k {
            continue;
        }
        outer = &outer + &f.matmul(&f.adjoint());
        let a = wh.matmul(f);
        stream = &stream + &a.matmul(&a.adjoint());
    }
    let lhs = frobenius_norm(&wh.matmul(&outer).matmul(&wh.adjoint()));
    let rhs = frobenius_norm(&stream);
    (lhs - rhs).abs()
}

/// `| ‖W_k† H_k F_j‖² − ‖S_k[I_k,I_k] V_k[I_k]† V_j[I_j]‖² |` for `j ≠ k`.
pub fn verify_lemma2(
    ch: &ChannelRealization,
    cs: &CandidateSet,
    sel: &IndexSelection,
    k: usize,
    j: usize,
) -> Result<f64> {
    if j == k {
        return Err(Error::InvalidParameter("cross-user bound needs distinct users j != k".into()));
    }
    let ik = sel.user(k);
    let w = cs.svd(k).u.select_columns(ik);
    let f = cs.v(j).select_columns(sel.user(j));
    let lhs = frobenius_norm(&w.adjoint_mul(ch.user(k)).matmul(&f)).powi(2);

    let s: Vec<f64> = ik.iter().map(|&i| cs.svd(k).singular_values[i]).collect();
    let s_kk = ComplexMatrix::from_real_diag(s.len(), s.len(), &s);
    let vk = cs.v(k).select_columns(ik);
    let rhs = frobenius_norm(&s_kk.matmul(&vk.adjoint_mul(&f))).powi(2);
    Ok((lhs - rhs).abs())
}
