//! Candidate beams from per-user SVDs, the gain-weighted correlation
//! matrix `Λ_c = S F̃† F̃`, the interference bound `‖Λ − diag(Λ)‖²`, and the
//! interference-optimized singular vector (IOSVB) search.
//!
//! A selection picks `N_s` of each user's `N_c` strongest right singular
//! vectors. Among selections whose summed singular values exceed
//! `γ·σ_max`, the search returns the one with the smallest off-diagonal
//! energy of `Λ`, which upper-bounds the total inter-user interference.

mod candidates;
mod search;
mod selection;

pub use candidates::{
    build_candidates, correlation_matrix, extract_beamformers, interference_upper_bound, objective,
    rebuild_candidates, sigma_sums, submatrix, CandidateSet,
};
pub use search::{iosvb, iosvb_with_candidates, IosvbSearch};
pub use selection::{enumerate_selections, selection_count, IndexSelection, SelectionCursor, Selections};

use crate::numkernel::ComplexMatrix;

/// Per-user precoders `F_k` (N_t x N_s) and combiners `W_k` (N_r x N_s).
#[derive(Clone, Debug, PartialEq)]
pub struct Beamformers {
    pub precoders: Vec<ComplexMatrix>,
    pub combiners: Vec<ComplexMatrix>,
}

impl Beamformers {
    pub fn num_users(&self) -> usize {
        self.precoders.len()
    }
}

#[derive(Clone, Debug)]
pub struct BeamformerSolution {
    pub beams: Beamformers,
    pub selection: IndexSelection,
    /// `‖Λ − diag(Λ)‖` at the chosen selection.
    pub objective_f: f64,
    /// Number of objective evaluations (constraint-passing selections).
    pub iterations_used: u64,
    pub constraint_satisfied: bool,
}
