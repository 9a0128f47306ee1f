//! Attribute-level preference and k-dominance.
//!
//! Lower values are preferred on every position. `u` k-dominates `v` when
//! `u` is better-or-equal on at least `k` positions and strictly better on at
//! least one. Any strict position is also a better-or-equal position, so a
//! qualifying `k`-subset containing a strict position exists exactly when
//! both counts clear their thresholds; [`DominanceCount`] is the whole test.
//!
//! k-dominance is neither transitive nor acyclic, so the skyline here never
//! drops a tuple from the comparand pool once it has been dominated.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Positionwise comparison counts of `u` against `v`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DominanceCount {
    /// Positions where `u <= v`.
    pub leq: usize,
    /// Positions where `u < v`.
    pub lt: usize,
}

impl DominanceCount {
    #[inline]
    pub fn of(u: &[f64], v: &[f64]) -> Self {
        debug_assert_eq!(u.len(), v.len());
        let mut leq = 0;
        let mut lt = 0;
        for (a, b) in u.iter().zip(v) {
            leq += (a <= b) as usize;
            lt += (a < b) as usize;
        }
        DominanceCount { leq, lt }
    }

    #[inline]
    pub fn k_dominates(self, k: usize) -> bool {
        self.leq >= k && self.lt >= 1
    }

    /// Positions where the two vectors are exactly equal.
    #[inline]
    pub fn ties(self) -> usize {
        self.leq - self.lt
    }
}

impl std::ops::Add for DominanceCount {
    type Output = Self;

    #[inline]
    fn add(self, rhs: Self) -> Self {
        DominanceCount {
            leq: self.leq + rhs.leq,
            lt: self.lt + rhs.lt,
        }
    }
}

/// Checked k-dominance test.
pub fn k_dominates(u: &[f64], v: &[f64], k: usize) -> Result<bool> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    check_k(k, u.len())?;
    Ok(DominanceCount::of(u, v).k_dominates(k))
}

#[inline]
pub(crate) fn k_dominates_unchecked(u: &[f64], v: &[f64], k: usize) -> bool {
    DominanceCount::of(u, v).k_dominates(k)
}

pub(crate) fn check_k(k: usize, d: usize) -> Result<()> {
    if k == 0 || k > d {
        return Err(Error::KOutOfRange { k, min: 1, max: d });
    }
    Ok(())
}

/// Indices of the vectors not k-dominated by any other vector, ascending.
///
/// Pairwise check, O(n²·d) in the worst case. A short run of comparands
/// in ascending coordinate sum catches most dominated vectors early; the
/// rest are compared against every vector that could k-dominate them,
/// found from per-position sorted orders. Nothing is ever dropped from the
/// comparand pool.
pub fn k_dominant_skyline<V: AsRef<[f64]> + Sync>(vectors: &[V], k: usize) -> Result<Vec<usize>> {
    let Some(first) = vectors.first() else {
        return Ok(Vec::new());
    };
    let d = first.as_ref().len();
    check_k(k, d)?;
    for (index, v) in vectors.iter().enumerate() {
        let v = v.as_ref();
        if v.len() != d {
            return Err(Error::LengthMismatch {
                left: d,
                right: v.len(),
            });
        }
        if let Some(position) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteVector { index, position });
        }
    }
    let views: Vec<&[f64]> = vectors.iter().map(|v| v.as_ref()).collect();
    Ok(skyline_of_views(&views, k))
}

pub(crate) fn skyline_of_views(views: &[&[f64]], k: usize) -> Vec<usize> {
    let n = views.len();
    let Some(d) = views.first().map(|v| v.len()) else {
        return Vec::new();
    };
    let order = sum_order(views);
    let (by_dim, upto) = dimension_orders(views, d);
    // A k-dominator of t is worse than t on at most d - k positions, so it
    // is better-or-equal on at least one of any d - k + 1 positions. Only
    // the union of those prefixes can hold a dominator.
    let m = d - k + 1;
    let keep: Vec<bool> = (0..n)
        .into_par_iter()
        .map(|i| {
            let target = views[i];
            let beats = |j: usize| j != i && k_dominates_unchecked(views[j], target, k);
            let head = order.len().min(SUM_ORDER_HEAD);
            if order[..head].iter().any(|&j| beats(j)) {
                return false;
            }
            let mut prefix: Vec<(usize, usize)> =
                (0..d).map(|p| (upto[p][i] as usize, p)).collect();
            prefix.sort_unstable();
            let chosen = &prefix[..m];
            if chosen.iter().map(|&(len, _)| len).sum::<usize>() >= n {
                return !order[head..].iter().any(|&j| beats(j));
            }
            for (c, &(len, p)) in chosen.iter().enumerate() {
                let seen = &chosen[..c];
                for &j in &by_dim[p][..len] {
                    let j = j as usize;
                    let s = views[j];
                    if seen.iter().any(|&(_, q)| s[q] <= target[q]) {
                        continue;
                    }
                    if beats(j) {
                        return false;
                    }
                }
            }
            true
        })
        .collect();
    keep.iter()
        .enumerate()
        .filter_map(|(i, &k)| k.then_some(i))
        .collect()
}

/// Comparands tried in sum order before the per-position prefixes.
const SUM_ORDER_HEAD: usize = 2048;

/// For every position, indices sorted by that coordinate, and for every
/// index the length of the sorted prefix holding values `<=` its own.
fn dimension_orders(views: &[&[f64]], d: usize) -> (Vec<Vec<u32>>, Vec<Vec<u32>>) {
    (0..d)
        .into_par_iter()
        .map(|p| {
            let value = |j: u32| views[j as usize][p];
            let mut col: Vec<u32> = (0..views.len() as u32).collect();
            col.sort_unstable_by(|&a, &b| value(a).total_cmp(&value(b)));
            let mut upto = vec![0u32; views.len()];
            let mut end = col.len();
            for r in (0..col.len()).rev() {
                if r + 1 < col.len() && value(col[r]) != value(col[r + 1]) {
                    end = r + 1;
                }
                upto[col[r] as usize] = end as u32;
            }
            (col, upto)
        })
        .unzip()
}

/// Indices ordered by ascending coordinate sum, ties broken by index.
pub(crate) fn sum_order(views: &[&[f64]]) -> Vec<usize> {
    let sums: Vec<f64> = views.iter().map(|v| v.iter().sum()).collect();
    let mut order: Vec<usize> = (0..views.len()).collect();
    order.sort_by(|&a, &b| sums[a].total_cmp(&sums[b]).then(a.cmp(&b)));
    order
}
