use crate::error::{Error, Result};

/// Per-user beam index sets `I_k`, each a strictly increasing list of `N_s`
/// indices into that user's `N_c` candidates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexSelection {
    per_user: Vec<Vec<usize>>,
    n_c: usize,
}

impl IndexSelection {
    pub fn new(per_user: Vec<Vec<usize>>, n_c: usize) -> Result<Self> {
        let n_s = per_user
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidParameter("selection needs at least one user".into()))?;
        if n_s == 0 {
            return Err(Error::InvalidParameter("selection needs N_s >= 1".into()));
        }
        for (k, set) in per_user.iter().enumerate() {
            if set.len() != n_s {
                return Err(Error::InvalidParameter(format!(
                    "user {k} selects {} beams, expected {n_s}",
                    set.len()
                )));
            }
            if !set.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::InvalidParameter(format!(
                    "user {k} indices {set:?} are not strictly increasing"
                )));
            }
            if set.last().is_some_and(|&i| i >= n_c) {
                return Err(Error::InvalidParameter(format!(
                    "user {k} indices {set:?} out of range for N_c = {n_c}"
                )));
            }
        }
        Ok(Self { per_user, n_c })
    }

    /// The strongest `N_s` candidates for every user, `{0, ..., N_s-1}`.
    pub fn top(num_users: usize, n_s: usize, n_c: usize) -> Self {
        assert!(n_s >= 1 && n_s <= n_c && num_users >= 1);
        Self {
            per_user: vec![(0..n_s).collect(); num_users],
            n_c,
        }
    }

    pub fn user(&self, k: usize) -> &[usize] {
        &self.per_user[k]
    }

    pub fn per_user(&self) -> &[Vec<usize>] {
        &self.per_user
    }

    pub fn num_users(&self) -> usize {
        self.per_user.len()
    }

    pub fn n_s(&self) -> usize {
        self.per_user[0].len()
    }

    pub fn n_c(&self) -> usize {
        self.n_c
    }

    /// Global index set `I`: user `k`'s indices offset by `k·N_c`.
    pub fn global(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.num_users() * self.n_s());
        write_global(&self.per_user, self.n_c, &mut out);
        out
    }
}

pub(crate) fn write_global(per_user: &[Vec<usize>], n_c: usize, out: &mut Vec<usize>) {
    out.clear();
    for (k, set) in per_user.iter().enumerate() {
        out.extend(set.iter().map(|&i| k * n_c + i));
    }
}

fn binomial(n: u64, r: u64) -> Option<u64> {
    let r = r.min(n - r);
    let mut acc: u64 = 1;
    for i in 0..r {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// `C(N_c, N_s)^K`, or a capacity error if it does not fit in 64 bits.
pub fn selection_count(n_c: usize, n_s: usize, k: usize) -> Result<u64> {
    if n_s == 0 || n_s > n_c || k == 0 {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= N_s <= N_c and K >= 1, got N_s={n_s} N_c={n_c} K={k}"
        )));
    }
    let overflow = || Error::Capacity {
        count: format!("C({n_c},{n_s})^{k}"),
        budget: u64::MAX,
    };
    let per_user = binomial(n_c as u64, n_s as u64).ok_or_else(overflow)?;
    let k = u32::try_from(k).map_err(|_| overflow())?;
    per_user.checked_pow(k).ok_or_else(overflow)
}

/// In-place walker over all selections in lexicographic order: user 0 is
/// the most significant digit, each user's subsets advance lexicographically.
#[derive(Clone, Debug)]
pub struct SelectionCursor {
    per_user: Vec<Vec<usize>>,
    n_c: usize,
    done: bool,
}

impl SelectionCursor {
    pub fn new(n_c: usize, n_s: usize, k: usize) -> Result<Self> {
        selection_count(n_c, n_s, k)?;
        Ok(Self {
            per_user: vec![(0..n_s).collect(); k],
            n_c,
            done: false,
        })
    }

    /// Current selection, or `None` once exhausted.
    pub fn current(&self) -> Option<&[Vec<usize>]> {
        (!self.done).then_some(self.per_user.as_slice())
    }

    pub fn n_c(&self) -> usize {
        self.n_c
    }

    /// Steps to the next selection; returns `false` when exhausted.
    pub fn advance(&mut self) -> bool {
        if self.done {
            return false;
        }
        for set in self.per_user.iter_mut().rev() {
            if next_subset(set, self.n_c) {
                return true;
            }
            for (slot, v) in set.iter_mut().zip(0..) {
                *slot = v;
            }
        }
        self.done = true;
        false
    }
}

/// Lexicographic successor of a strictly increasing subset of `0..n`.
fn next_subset(set: &mut [usize], n: usize) -> bool {
    let s = set.len();
    for i in (0..s).rev() {
        if set[i] < n - s + i {
            set[i] += 1;
            for j in i + 1..s {
                set[j] = set[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Lazy stream of every selection, in the cursor's order.
#[derive(Clone, Debug)]
pub struct Selections {
    cursor: SelectionCursor,
    remaining: u64,
}

impl Iterator for Selections {
    type Item = IndexSelection;

    fn next(&mut self) -> Option<IndexSelection> {
        let sel = IndexSelection {
            per_user: self.cursor.current()?.to_vec(),
            n_c: self.cursor.n_c,
        };
        self.cursor.advance();
        self.remaining -= 1;
        Some(sel)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        match usize::try_from(self.remaining) {
            Ok(n) => (n, Some(n)),
            Err(_) => (usize::MAX, None),
        }
    }
}

/// All `C(N_c, N_s)^K` selections, produced lazily.
pub fn enumerate_selections(n_c: usize, n_s: usize, k: usize) -> Result<Selections> {
    let remaining = selection_count(n_c, n_s, k)?;
    Ok(Selections {
        cursor: SelectionCursor::new(n_c, n_s, k)?,
        remaining,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn counts_match_formula() {
        assert_eq!(selection_count(4, 2, 3).unwrap(), 216);
        assert_eq!(selection_count(5, 3, 5).unwrap(), 100_000);
        assert_eq!(selection_count(3, 3, 7).unwrap(), 1);
        assert_eq!(enumerate_selections(4, 2, 3).unwrap().count(), 216);
        assert_eq!(enumerate_selections(4, 4, 2).unwrap().count(), 1);
    }

    #[test]
    fn overflow_is_a_capacity_error() {
        assert!(matches!(selection_count(64, 32, 4), Err(Error::Capacity { .. })));
        assert!(selection_count(3, 4, 1).is_err());
        assert!(selection_count(3, 0, 1).is_err());
    }

    #[test]
    fn order_is_lexicographic_and_distinct() {
        let all: Vec<IndexSelection> = enumerate_selections(4, 2, 2).unwrap().collect();
        assert_eq!(all[0].per_user(), &[vec![0, 1], vec![0, 1]]);
        assert_eq!(all[1].per_user(), &[vec![0, 1], vec![0, 2]]);
        assert_eq!(all[6].per_user(), &[vec![0, 2], vec![0, 1]]);
        assert_eq!(all[35].per_user(), &[vec![2, 3], vec![2, 3]]);
        let keys: Vec<&[Vec<usize>]> = all.iter().map(|s| s.per_user()).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        let uniq: HashSet<_> = all.iter().cloned().collect();
        assert_eq!(uniq.len(), 36);
    }

    #[test]
    fn global_indices_use_block_offsets() {
        let s = IndexSelection::new(vec![vec![0, 2], vec![1, 3], vec![0, 1]], 4).unwrap();
        assert_eq!(s.global(), vec![0, 2, 5, 7, 8, 9]);
        assert_eq!(s.n_s(), 2);
    }

    #[test]
    fn invalid_selections_are_rejected() {
        assert!(IndexSelection::new(vec![vec![1, 0]], 3).is_err());
        assert!(IndexSelection::new(vec![vec![0, 3]], 3).is_err());
        assert!(IndexSelection::new(vec![vec![0], vec![0, 1]], 3).is_err());
        assert!(IndexSelection::new(vec![], 3).is_err());
    }
}
