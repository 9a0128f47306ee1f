//! Joined-vector layout and join enumeration.

use crate::dominance::DominanceCount;
use crate::error::{Error, Result};
use crate::partition::single_numeric_key;
use crate::relation::{AggFn, JoinCondition, Relation};

/// Shape of a joined skyline vector: left locals, right locals, then one
/// aggregated position per aggregate component.
///
/// In plain mode every base position counts as local and `a` is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Layout {
    pub aggregate: bool,
    pub l1: usize,
    pub l2: usize,
    pub a: usize,
    pub d1: usize,
    pub d2: usize,
    pub agg_fns: Vec<AggFn>,
}

impl Layout {
    pub fn new(r1: &Relation, r2: &Relation, aggregate: bool) -> Result<Self> {
        let (s1, s2) = (r1.schema(), r2.schema());
        if !aggregate {
            return Ok(Layout {
                aggregate,
                l1: s1.d(),
                l2: s2.d(),
                a: 0,
                d1: s1.d(),
                d2: s2.d(),
                agg_fns: Vec::new(),
            });
        }
        if s1.a() != s2.a() {
            return Err(Error::SchemaMismatch(format!(
                "aggregate components differ: {} on the left, {} on the right",
                s1.a(),
                s2.a()
            )));
        }
        if s1.agg_fns() != s2.agg_fns() {
            return Err(Error::SchemaMismatch(
                "aggregate functions differ between the relations".into(),
            ));
        }
        Ok(Layout {
            aggregate,
            l1: s1.l(),
            l2: s2.l(),
            a: s1.a(),
            d1: s1.d(),
            d2: s2.d(),
            agg_fns: s1.agg_fns(),
        })
    }

    /// Dimensionality of the joined relation.
    pub fn d(&self) -> usize {
        self.l1 + self.l2 + self.a
    }

    /// Smallest admissible k: one more than either base dimensionality.
    pub fn k_min(&self) -> usize {
        self.d1.max(self.d2) + 1
    }

    pub fn combine_into(&self, u: &[f64], v: &[f64], out: &mut Vec<f64>) {
        out.extend_from_slice(&u[..self.l1]);
        out.extend_from_slice(&v[..self.l2]);
        for (j, f) in self.agg_fns.iter().enumerate() {
            out.push(f.apply(u[self.l1 + j], v[self.l2 + j]));
        }
    }

    pub fn combine(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.d());
        self.combine_into(u, v, &mut out);
        out
    }

    /// Counts of the joined `(u, v)` against the joined `(u2, v2)`, without
    /// materialising either.
    #[inline]
    pub fn count(&self, u: &[f64], v: &[f64], u2: &[f64], v2: &[f64]) -> DominanceCount {
        let mut c = DominanceCount::of(&u[..self.l1], &u2[..self.l1])
            + DominanceCount::of(&v[..self.l2], &v2[..self.l2]);
        for (j, f) in self.agg_fns.iter().enumerate() {
            let x = f.apply(u[self.l1 + j], v[self.l2 + j]);
            let y = f.apply(u2[self.l1 + j], v2[self.l2 + j]);
            c.leq += (x <= y) as usize;
            c.lt += (x < y) as usize;
        }
        c
    }

    /// Positions of one base relation whose strict improvement always
    /// carries over to the joined vector.
    pub fn strict_mask(&self, side_locals: usize) -> Vec<bool> {
        let mut mask = vec![true; side_locals];
        mask.extend(self.agg_fns.iter().map(|f| f.strictly_monotone()));
        mask
    }
}

/// Join-partner index: the right relation in join order, and for each left
/// tuple the contiguous slice of that order it joins with.
#[derive(Debug, Clone)]
pub(crate) struct JoinPlan {
    order2: Vec<usize>,
    rank2: Vec<usize>,
    ranges1: Vec<(usize, usize)>,
}

impl JoinPlan {
    pub fn new(r1: &Relation, r2: &Relation, cond: JoinCondition) -> Result<Self> {
        let (order2, ranges1) = match cond {
            JoinCondition::Equality => equality_plan(r1, r2)?,
            _ => sweep_plan(r1, r2, cond)?,
        };
        let mut rank2 = vec![0; order2.len()];
        for (i, &q) in order2.iter().enumerate() {
            rank2[q] = i;
        }
        Ok(JoinPlan {
            order2,
            rank2,
            ranges1,
        })
    }

    /// Right positions joining with left position `p`.
    #[inline]
    pub fn partners(&self, p: usize) -> &[usize] {
        let (s, e) = self.ranges1[p];
        &self.order2[s..e]
    }

    #[inline]
    /// Right positions in join order.
    pub fn order(&self) -> &[usize] {
        &self.order2
    }

    pub fn range(&self, p: usize) -> (usize, usize) {
        self.ranges1[p]
    }

    /// Index of right position `q` in join order.
    #[inline]
    pub fn rank(&self, q: usize) -> usize {
        self.rank2[q]
    }

    #[inline]
    pub fn joinable(&self, p: usize, q: usize) -> bool {
        let (s, e) = self.ranges1[p];
        (s..e).contains(&self.rank2[q])
    }

    #[cfg(test)]
    pub fn joined_len(&self) -> usize {
        self.ranges1.iter().map(|(s, e)| e - s).sum()
    }

    /// Whether every left tuple joins with every right tuple.
    pub fn is_cartesian(&self) -> bool {
        let n2 = self.order2.len();
        self.ranges1.iter().all(|&r| r == (0, n2))
    }

    /// Sizes of the nine label cross sets among joinable pairs, indexed
    /// `[left label][right label]`.
    pub fn cross_counts(&self, left: &[usize], right: &[usize]) -> [[usize; 3]; 3] {
        // prefix[c][i]: right tuples of class c among the first i in join order
        let mut prefix = [vec![0usize], vec![0usize], vec![0usize]];
        for &q in &self.order2 {
            for (c, col) in prefix.iter_mut().enumerate() {
                let last = *col.last().unwrap();
                col.push(last + (right[q] == c) as usize);
            }
        }
        let mut out = [[0; 3]; 3];
        for (p, &lc) in left.iter().enumerate() {
            let (s, e) = self.ranges1[p];
            for (c, col) in prefix.iter().enumerate() {
                out[lc][c] += col[e] - col[s];
            }
        }
        out
    }
}

/// Right positions in join order, and each left tuple's slice of it.
type PlanParts = (Vec<usize>, Vec<(usize, usize)>);

fn equality_plan(r1: &Relation, r2: &Relation) -> Result<PlanParts> {
    let (m1, m2) = (r1.schema().m(), r2.schema().m());
    if m1 != m2 {
        return Err(Error::SchemaMismatch(format!(
            "equality join needs the same number of join attributes ({m1} vs {m2})"
        )));
    }
    let mut order2 = Vec::with_capacity(r2.len());
    let mut spans = Vec::with_capacity(r2.groups().len());
    for g in r2.groups() {
        let s = order2.len();
        order2.extend_from_slice(&g.members);
        spans.push((s, order2.len()));
    }
    let matched: Vec<(usize, usize)> = r1
        .groups()
        .iter()
        .map(|g| {
            r2.groups()
                .binary_search_by(|h| h.key.cmp(&g.key))
                .map(|i| spans[i])
                .unwrap_or((0, 0))
        })
        .collect();
    let ranges1 = (0..r1.len()).map(|p| matched[r1.group_of(p)]).collect();
    Ok((order2, ranges1))
}

fn sweep_plan(r1: &Relation, r2: &Relation, cond: JoinCondition) -> Result<PlanParts> {
    let k1 = single_numeric_key(r1)?;
    let k2 = single_numeric_key(r2)?;
    let mut order2: Vec<usize> = (0..r2.len()).collect();
    order2.sort_by(|&a, &b| k2[a].total_cmp(&k2[b]).then(a.cmp(&b)));
    let sorted: Vec<f64> = order2.iter().map(|&q| k2[q]).collect();
    let n2 = sorted.len();
    let ranges1 = k1
        .iter()
        .map(|&x| {
            let below = sorted.partition_point(|&v| v < x);
            let upto = sorted.partition_point(|&v| v <= x);
            // x OP v, with v ranging over the sorted right values
            match cond {
                JoinCondition::Lt => (upto, n2),
                JoinCondition::Leq => (below, n2),
                JoinCondition::Gt => (0, below),
                JoinCondition::Geq => (0, upto),
                JoinCondition::Equality => (below, upto),
            }
        })
        .collect();
    Ok((order2, ranges1))
}
