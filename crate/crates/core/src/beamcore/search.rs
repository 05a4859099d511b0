//! Gain-constrained minimization of the interference bound over all beam
//! selections.

use super::candidates::{build_candidates, correlation_matrix, extract_beamformers, selected_gain, CandidateSet};
use super::selection::{write_global, IndexSelection, SelectionCursor};
use super::BeamformerSolution;
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};

/// Runs the interference-optimized singular vector search on one channel.
pub fn iosvb(ch: &ChannelRealization, n_s: usize, n_c: usize, gamma: f64) -> Result<BeamformerSolution> {
    check_gamma(gamma)?;
    let cs = build_candidates(ch, n_c, n_s)?;
    iosvb_with_candidates(&cs, gamma)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "gain threshold gamma must lie in (0, 1), got {gamma}"
        )));
    }
    Ok(())
}

/// Search state precomputed from a candidate set; reusable across gammas.
pub struct IosvbSearch<'a> {
    cs: &'a CandidateSet,
    /// `|Λ_c[a, b]|²`, row-major.
    weight: Vec<f64>,
    dim: usize,
    sigma_max: f64,
}

struct Best {
    per_user: Vec<Vec<usize>>,
    f: f64,
    evaluations: u64,
}

impl<'a> IosvbSearch<'a> {
    pub fn new(cs: &'a CandidateSet) -> Self {
        let lambda_c = correlation_matrix(cs);
        let weight = lambda_c.as_slice().iter().map(|z| z.norm_sqr()).collect();
        let sigma_max = selected_gain(cs.sigma(), cs.n_c(), cs.top_selection().per_user());
        Self {
            cs,
            weight,
            dim: lambda_c.rows(),
            sigma_max,
        }
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    /// `f` for a global index set. Sums `|Λ_c[a,b]|²` row-major over the
    /// off-diagonal of the gathered submatrix, so the value is bit-identical
    /// to `objective(submatrix(Λ_c, sel))`.
    #[inline]
    fn objective_of(&self, global: &[usize]) -> f64 {
        let mut acc = 0.0;
        for (p, &a) in global.iter().enumerate() {
            let row = &self.weight[a * self.dim..(a + 1) * self.dim];
            for (q, &b) in global.iter().enumerate() {
                acc += if p == q { 0.0 } else { row[b] };
            }
        }
        acc.sqrt()
    }

    fn scan(&self, threshold: Option<f64>) -> Best {
        let n_c = self.cs.n_c();
        let mut cursor =
            SelectionCursor::new(n_c, self.cs.n_s(), self.cs.num_users()).expect("validated dimensions");
        let mut global = Vec::with_capacity(self.cs.num_users() * self.cs.n_s());
        let mut best = Best {
            per_user: Vec::new(),
            f: f64::INFINITY,
            evaluations: 0,
        };
        while let Some(per_user) = cursor.current() {
            let admissible = match threshold {
                Some(t) => selected_gain(self.cs.sigma(), n_c, per_user) > t,
                None => true,
            };
            if admissible {
                write_global(per_user, n_c, &mut global);
                let f = self.objective_of(&global);
                best.evaluations += 1;
                // Strict improvement: the first minimizer in enumeration order wins.
                if f < best.f || best.per_user.is_empty() {
                    best.f = f;
                    best.per_user = per_user.to_vec();
                }
            }
            cursor.advance();
        }
        best
    }

    /// Minimizes `f` over selections with `σ_sel > γ·σ_max`. When no
    /// selection qualifies, falls back to the unconstrained minimizer and
    /// clears `constraint_satisfied`; `iterations_used` is then 0.
    pub fn run(&self, gamma: f64) -> Result<BeamformerSolution> {
        check_gamma(gamma)?;
        let constrained = self.scan(Some(gamma * self.sigma_max));
        let (best, satisfied) = if constrained.evaluations > 0 {
            (constrained, true)
        } else {
            let mut fallback = self.scan(None);
            fallback.evaluations = 0;
            (fallback, false)
        };
        let selection = IndexSelection::new(best.per_user, self.cs.n_c())?;
        Ok(BeamformerSolution {
            beams: extract_beamformers(self.cs, &selection),
            selection,
            objective_f: best.f,
            iterations_used: best.evaluations,
            constraint_satisfied: satisfied,
        })
    }
}

pub fn iosvb_with_candidates(cs: &CandidateSet, gamma: f64) -> Result<BeamformerSolution> {
    IosvbSearch::new(cs).run(gamma)
}
