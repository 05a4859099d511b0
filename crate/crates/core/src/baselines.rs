//! Reference beamformers: rate-maximizing exhaustive search over the same
//! selection space as IOSVB, maximum ratio transmission, block
//! diagonalization and WMMSE.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::beamcore::{
    build_candidates, extract_beamformers, iosvb_with_candidates, selection_count, Beamformers, IndexSelection,
    SelectionCursor,
};
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::metrics::{rate_from_blocks, sum_rate_value, LinkBudget};
use crate::numkernel::{hermitian_pd_inverse, svd, ComplexMatrix};
use num_complex::Complex64;

/// Wall-clock timer; reads zero on targets without a monotonic clock.
pub(crate) struct Stopwatch(#[cfg(not(target_arch = "wasm32"))] std::time::Instant);

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Self(
            #[cfg(not(target_arch = "wasm32"))]
            std::time::Instant::now(),
        )
    }

    pub(crate) fn seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.0.elapsed().as_secs_f64();
        #[cfg(target_arch = "wasm32")]
        return 0.0;
    }
}

/// Largest selection space the exhaustive search accepts by default.
pub const DEFAULT_EXHAUSTIVE_BUDGET: u64 = 2_000_000;
pub const DEFAULT_WMMSE_MAX_ITERS: usize = 100;
pub const DEFAULT_WMMSE_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Exhaustive,
    Iosvb,
    Mrt,
    Bd,
    Wmmse,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Exhaustive,
        Algorithm::Iosvb,
        Algorithm::Mrt,
        Algorithm::Bd,
        Algorithm::Wmmse,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Exhaustive => "exhaustive",
            Algorithm::Iosvb => "iosvb",
            Algorithm::Mrt => "mrt",
            Algorithm::Bd => "bd",
            Algorithm::Wmmse => "wmmse",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.tag() == s.trim())
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown algorithm {s:?}; expected one of exhaustive, iosvb, mrt, bd, wmmse"
                ))
            })
    }
}

#[derive(Clone, Debug)]
pub struct BaselineResult {
    pub algorithm: Algorithm,
    pub beams: Beamformers,
    /// Present for the selection-based methods (exhaustive, iosvb).
    pub selection: Option<IndexSelection>,
    /// Seconds.
    pub wall_time: f64,
    /// WMMSE outer iterations, or objective evaluations for IOSVB.
    pub iterations: u64,
    /// Set when the method ran outside its nominal regime: BD without a
    /// null space, WMMSE without convergence, IOSVB with no feasible
    /// selection.
    pub flagged: bool,
}

/// Knobs shared by every algorithm in a comparison run.
#[derive(Clone, Copy, Debug)]
pub struct AlgoParams {
    pub n_s: usize,
    pub n_c: usize,
    pub gamma: f64,
    pub link: LinkBudget,
    pub exhaustive_budget: u64,
    pub wmmse_max_iters: usize,
    pub wmmse_tol: f64,
}

impl AlgoParams {
    pub fn new(n_s: usize, n_c: usize, gamma: f64, link: LinkBudget) -> Self {
        Self {
            n_s,
            n_c,
            gamma,
            link,
            exhaustive_budget: DEFAULT_EXHAUSTIVE_BUDGET,
            wmmse_max_iters: DEFAULT_WMMSE_MAX_ITERS,
            wmmse_tol: DEFAULT_WMMSE_TOL,
        }
    }
}

pub fn run(algo: Algorithm, ch: &ChannelRealization, p: &AlgoParams) -> Result<BaselineResult> {
    match algo {
        Algorithm::Exhaustive => exhaustive_search_with_budget(ch, p.n_s, p.n_c, &p.link, p.exhaustive_budget),
        Algorithm::Iosvb => iosvb_timed(ch, p.n_s, p.n_c, p.gamma),
        Algorithm::Mrt => mrt(ch, p.n_s, &p.link),
        Algorithm::Bd => bd(ch, p.n_s, &p.link),
        Algorithm::Wmmse => wmmse(ch, p.n_s, &p.link, p.wmmse_max_iters, p.wmmse_tol),
    }
}

/// IOSVB wrapped in the common result type; the timer covers the SVDs and
/// the search.
pub fn iosvb_timed(ch: &ChannelRealization, n_s: usize, n_c: usize, gamma: f64) -> Result<BaselineResult> {
    let start = Stopwatch::start();
    let cs = build_candidates(ch, n_c, n_s)?;
    let sol = iosvb_with_candidates(&cs, gamma)?;
    let wall_time = start.seconds();
    Ok(BaselineResult {
        algorithm: Algorithm::Iosvb,
        beams: sol.beams,
        selection: Some(sol.selection),
        wall_time,
        iterations: sol.iterations_used,
        flagged: !sol.constraint_satisfied,
    })
}

pub fn exhaustive_search(ch: &ChannelRealization, n_s: usize, n_c: usize, lb: &LinkBudget) -> Result<BaselineResult> {
    exhaustive_search_with_budget(ch, n_s, n_c, lb, DEFAULT_EXHAUSTIVE_BUDGET)
}

/// Sum-rate maximizer over all `C(N_c, N_s)^K` selections; first maximum in
/// enumeration order wins. The per-selection rate is bit-identical to
/// `sum_rate` on the extracted beamformers.
pub fn exhaustive_search_with_budget(
    ch: &ChannelRealization,
    n_s: usize,
    n_c: usize,
    lb: &LinkBudget,
    budget: u64,
) -> Result<BaselineResult> {
    let k_users = ch.num_users();
    let count = selection_count(n_c, n_s, k_users)?;
    if count > budget {
        return Err(Error::Capacity {
            count: format!("{count} (C({n_c},{n_s})^{k_users})"),
            budget,
        });
    }
    let start = Stopwatch::start();
    let cs = build_candidates(ch, n_c, n_s)?;

    // blocks[k][j] = U_k[:, :N_c]† H_k F̃_j, grams[k] = U_k[:, :N_c]† U_k[:, :N_c].
    let mut blocks = Vec::with_capacity(k_users);
    let mut grams = Vec::with_capacity(k_users);
    for k in 0..k_users {
        let u = cs.svd(k).u.leading_columns(n_c);
        let uh = u.adjoint_mul(ch.user(k));
        blocks.push((0..k_users).map(|j| uh.matmul(cs.ftilde_k(j))).collect::<Vec<_>>());
        grams.push(u.adjoint_mul(&u));
    }

    let mut cursor = SelectionCursor::new(n_c, n_s, k_users)?;
    let mut best: Option<(Vec<Vec<usize>>, f64)> = None;
    let mut t = Vec::with_capacity(k_users);
    while let Some(per_user) = cursor.current() {
        let mut total = 0.0;
        for k in 0..k_users {
            t.clear();
            t.extend((0..k_users).map(|j| blocks[k][j].select(&per_user[k], &per_user[j])));
            let g = grams[k].select(&per_user[k], &per_user[k]);
            total += rate_from_blocks(k, &t, &g, lb)?;
        }
        if best.as_ref().is_none_or(|(_, b)| total > *b) {
            best = Some((per_user.to_vec(), total));
        }
        cursor.advance();
    }
    let (per_user, _) = best.expect("selection space is nonempty");
    let selection = IndexSelection::new(per_user, n_c)?;
    let beams = extract_beamformers(&cs, &selection);
    Ok(BaselineResult {
        algorithm: Algorithm::Exhaustive,
        beams,
        selection: Some(selection),
        wall_time: start.seconds(),
        iterations: count,
        flagged: false,
    })
}

fn check_streams(ch: &ChannelRealization, n_s: usize) -> Result<()> {
    if n_s == 0 || n_s > ch.n_r() || n_s > ch.n_t() {
        return Err(Error::InvalidParameter(format!(
            "N_s = {n_s} streams need 1 <= N_s <= min(N_r, N_t) = {}",
            ch.n_r().min(ch.n_t())
        )));
    }
    Ok(())
}

fn normalize_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let norms: Vec<f64> = (0..m.cols())
        .map(|j| m.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| {
        if norms[j] > 0.0 {
            m[(i, j)] / norms[j]
        } else {
            m[(i, j)]
        }
    })
}

/// Matched filter: `W_k` = top `N_s` left singular vectors of `H_k`,
/// `F_k` = column-normalized `H_k† W_k`.
pub fn mrt(ch: &ChannelRealization, n_s: usize, _lb: &LinkBudget) -> Result<BaselineResult> {
    check_streams(ch, n_s)?;
    let start = Stopwatch::start();
    let mut precoders = Vec::with_capacity(ch.num_users());
    let mut combiners = Vec::with_capacity(ch.num_users());
    for h in ch.users() {
        let w = svd(h)?.u.leading_columns(n_s);
        precoders.push(normalize_columns(&h.adjoint().matmul(&w)));
        combiners.push(w);
    }
    Ok(BaselineResult {
        algorithm: Algorithm::Mrt,
        beams: Beamformers { precoders, combiners },
        selection: None,
        wall_time: start.seconds(),
        iterations: 0,
        flagged: false,
    })
}

fn numerical_rank(s: &[f64], rows: usize, cols: usize) -> usize {
    let tol = s.first().copied().unwrap_or(0.0) * rows.max(cols) as f64 * f64::EPSILON;
    s.iter().filter(|&&x| x > tol).count()
}

/// Block diagonalization. User `k`'s precoder lives in the null space of
/// the stacked interferer channels; within it, the top `N_s` singular
/// directions of the projected channel are used. When the null space has
/// fewer than `N_s` dimensions the weakest `N_s` right singular directions
/// of the interferers stand in, and the result is flagged.
pub fn bd(ch: &ChannelRealization, n_s: usize, _lb: &LinkBudget) -> Result<BaselineResult> {
    check_streams(ch, n_s)?;
    let start = Stopwatch::start();
    let k_users = ch.num_users();
    let n_t = ch.n_t();
    let mut flagged = false;
    let mut precoders = Vec::with_capacity(k_users);
    let mut combiners = Vec::with_capacity(k_users);
    for k in 0..k_users {
        let basis = if k_users == 1 {
            ComplexMatrix::identity(n_t)
        } else {
            let others: Vec<ComplexMatrix> = (0..k_users).filter(|&j| j != k).map(|j| ch.user(j).clone()).collect();
            let stacked = ComplexMatrix::vstack(&others);
            let dec = svd(&stacked)?;
            let rank = numerical_rank(&dec.singular_values, stacked.rows(), n_t);
            let v = dec.v();
            let keep = if n_t - rank >= n_s {
                n_t - rank
            } else {
                flagged = true;
                n_s
            };
            let cols: Vec<usize> = (n_t - keep..n_t).collect();
            v.select_columns(&cols)
        };
        let projected = ch.user(k).matmul(&basis);
        let dec = svd(&projected)?;
        precoders.push(basis.matmul(&dec.v().leading_columns(n_s)));
        combiners.push(dec.u.leading_columns(n_s));
    }
    Ok(BaselineResult {
        algorithm: Algorithm::Bd,
        beams: Beamformers { precoders, combiners },
        selection: None,
        wall_time: start.seconds(),
        iterations: 0,
        flagged,
    })
}

/// Output of the WMMSE iteration, including the per-iteration sum rate.
#[derive(Clone, Debug)]
pub struct WmmseTrace {
    pub result: BaselineResult,
    /// Sum rate of the initial point followed by one entry per iteration.
    pub rates: Vec<f64>,
}

pub fn wmmse(
    ch: &ChannelRealization,
    n_s: usize,
    lb: &LinkBudget,
    max_iters: usize,
    tol: f64,
) -> Result<BaselineResult> {
    wmmse_traced(ch, n_s, lb, max_iters, tol).map(|t| t.result)
}

/// MMSE receive filters `(Σ_j H_k F_j F_j† H_k† + N_0² I)⁻¹ H_k F_k`.
fn mmse_combiners(ch: &ChannelRealization, f: &[ComplexMatrix], noise: f64) -> Result<Vec<ComplexMatrix>> {
    let n_r = ch.n_r();
    (0..ch.num_users())
        .map(|k| {
            let h = ch.user(k);
            let mut cov = ComplexMatrix::identity(n_r).scale_real(noise);
            for fj in f {
                cov = &cov + &h.matmul(fj).gram_outer();
            }
            Ok(hermitian_pd_inverse(&cov)?.matmul(&h.matmul(&f[k])))
        })
        .collect()
}

/// Orthonormal basis of an MMSE filter's column space, completed to `N_s`
/// columns when streams have been switched off. Combining within a space
/// that contains the MMSE filter loses no rate.
fn orthonormal_span(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(svd(u)?.u.leading_columns(u.cols()))
}

/// Weighted MMSE sum-rate maximization under the sum power budget
/// `K·N_s`, started from per-user SVD beamforming. The returned combiners
/// are orthonormalized MMSE filters of the returned precoders.
pub fn wmmse_traced(
    ch: &ChannelRealization,
    n_s: usize,
    lb: &LinkBudget,
    max_iters: usize,
    tol: f64,
) -> Result<WmmseTrace> {
    check_streams(ch, n_s)?;
    if max_iters == 0 {
        return Err(Error::InvalidParameter("WMMSE needs max_iters >= 1".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("WMMSE tolerance must be positive, got {tol}")));
    }
    let start = Stopwatch::start();
    let k_users = ch.num_users();
    let n_t = ch.n_t();
    let noise = lb.noise_variance();
    let budget = (k_users * n_s) as f64;

    let mut f: Vec<ComplexMatrix> = ch
        .users()
        .iter()
        .map(|h| Ok(svd(h)?.v().leading_columns(n_s)))
        .collect::<Result<_>>()?;
    let mut u = mmse_combiners(ch, &f, noise)?;
    let rate_of = |f: &[ComplexMatrix], u: &[ComplexMatrix]| -> Result<(f64, Beamformers)> {
        let beams = Beamformers {
            precoders: f.to_vec(),
            combiners: u.iter().map(orthonormal_span).collect::<Result<_>>()?,
        };
        Ok((sum_rate_value(ch, &beams, lb)?, beams))
    };
    let (r0, mut beams) = rate_of(&f, &u)?;
    let mut rates = vec![r0];
    let mut converged = false;
    let mut iterations = 0u64;

    for _ in 0..max_iters {
        // Weights W_k = (I - U_k† H_k F_k)⁻¹; E_k is Hermitian PD at the MMSE filter.
        let mut weights = Vec::with_capacity(k_users);
        for k in 0..k_users {
            let e = &ComplexMatrix::identity(n_s) - &u[k].adjoint_mul(&ch.user(k).matmul(&f[k]));
            let e = ComplexMatrix::from_fn(n_s, n_s, |i, j| 0.5 * (e[(i, j)] + e[(j, i)].conj()));
            weights.push(hermitian_pd_inverse(&e)?);
        }
        // A = Σ_k H_k† U_k W_k U_k† H_k, B_k = H_k† U_k W_k.
        let mut a = ComplexMatrix::zeros(n_t, n_t);
        let mut b = Vec::with_capacity(k_users);
        for k in 0..k_users {
            let hu = ch.user(k).adjoint_mul(&u[k]);
            let huw = hu.matmul(&weights[k]);
            a = &a + &huw.matmul(&hu.adjoint());
            b.push(huw);
        }
        let a = ComplexMatrix::from_fn(n_t, n_t, |i, j| 0.5 * (a[(i, j)] + a[(j, i)].conj()));
        f = power_constrained_update(&a, &b, budget)?;
        u = mmse_combiners(ch, &f, noise)?;
        iterations += 1;
        let (r, b) = rate_of(&f, &u)?;
        beams = b;
        let prev = *rates.last().expect("nonempty");
        rates.push(r);
        if (r - prev).abs() <= tol * prev.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }

    Ok(WmmseTrace {
        result: BaselineResult {
            algorithm: Algorithm::Wmmse,
            beams,
            selection: None,
            wall_time: start.seconds(),
            iterations,
            flagged: !converged,
        },
        rates,
    })
}

/// `F_k = (A + μI)⁺ B_k` with the smallest `μ ≥ 0` meeting
/// `Σ_k ‖F_k‖² ≤ budget`. `A` must be Hermitian PSD.
fn power_constrained_update(a: &ComplexMatrix, b: &[ComplexMatrix], budget: f64) -> Result<Vec<ComplexMatrix>> {
    let n = a.rows();
    let dec = svd(a)?;
    let q = &dec.u;
    let d = &dec.singular_values;
    let floor = d[0].max(f64::MIN_POSITIVE) * n as f64 * 1e-12;
    let qb: Vec<ComplexMatrix> = b.iter().map(|bk| q.adjoint_mul(bk)).collect();
    // Energy of Q†B along each eigen-direction.
    let energy: Vec<f64> = (0..n)
        .map(|i| qb.iter().map(|m| m.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>()).sum())
        .collect();
    let inv = |mu: f64, i: usize| -> f64 {
        if mu == 0.0 {
            if d[i] > floor {
                1.0 / d[i]
            } else {
                0.0
            }
        } else {
            1.0 / (d[i] + mu)
        }
    };
    let power = |mu: f64| -> f64 { (0..n).map(|i| energy[i] * inv(mu, i).powi(2)).sum() };

    let mu = if power(0.0) <= budget {
        0.0
    } else {
        let mut hi = (energy.iter().sum::<f64>() / budget).sqrt().max(f64::MIN_POSITIVE);
        while power(hi) > budget {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if power(mid) > budget {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        hi
    };
    let scale: Vec<Complex64> = (0..n).map(|i| Complex64::new(inv(mu, i), 0.0)).collect();
    Ok(qb
        .iter()
        .map(|m| {
            let scaled = ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| scale[i] * m[(i, j)]);
            q.matmul(&scaled)
        })
        .collect())
}
