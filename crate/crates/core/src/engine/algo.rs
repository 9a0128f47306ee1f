use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;

use super::{lap, Classified, Prepared, QueryConfig, SkylineAnswer, Timings};
use crate::dominance::{skyline_of_views, DominanceCount};
use crate::error::{Error, Result};
use crate::partition::{augment_mask, dominator_positions, Label};
use crate::relation::{Relation, TupleId};

pub(super) fn naive(prep: &Prepared, k: usize) -> SkylineAnswer {
    let mut t = Instant::now();
    let (r1, r2, layout) = (prep.r1, prep.r2, &prep.layout);
    let d = layout.d();
    let pairs: Vec<(usize, usize)> = (0..r1.len())
        .flat_map(|p| prep.plan.partners(p).iter().map(move |&q| (p, q)))
        .collect();
    let mut flat = Vec::with_capacity(pairs.len() * d);
    for &(p, q) in &pairs {
        layout.combine_into(r1.sky(p), r2.sky(q), &mut flat);
    }
    let join_ms = lap(&mut t);

    let views: Vec<&[f64]> = flat.chunks_exact(d).collect();
    let keep = skyline_of_views(&views, k);
    let result = prep.pair_ids(keep.into_iter().map(|i| pairs[i]));
    SkylineAnswer {
        k,
        k_primes: None,
        pairs: result,
        category_counts: None,
        timings: Timings {
            join_ms,
            rest_ms: lap(&mut t),
            ..Timings::default()
        },
    }
}

/// Non-NN pairs: SS⋈SS pairs, and the remaining ones grouped by left tuple.
struct Candidates {
    yes: Vec<(usize, usize)>,
    check: Vec<(usize, Vec<usize>)>,
}

fn candidates(prep: &Prepared, cls: &Classified) -> Candidates {
    let [l1, l2] = &cls.labels;
    let per_left: Vec<(usize, Vec<usize>, Vec<usize>)> = (0..prep.r1.len())
        .into_par_iter()
        .filter(|&p| l1.label(p) != Label::Nn)
        .map(|p| {
            let mut yes = Vec::new();
            let mut check = Vec::new();
            for &q in prep.plan.partners(p) {
                match (l1.label(p), l2.label(q)) {
                    (_, Label::Nn) => {}
                    (Label::Ss, Label::Ss) => yes.push(q),
                    _ => check.push(q),
                }
            }
            (p, yes, check)
        })
        .collect();
    let mut out = Candidates {
        yes: Vec::new(),
        check: Vec::new(),
    };
    for (p, yes, check) in per_left {
        out.yes.extend(yes.into_iter().map(|q| (p, q)));
        if !check.is_empty() {
            out.check.push((p, check));
        }
    }
    out
}

fn classified_or<'c>(
    prep: &Prepared,
    k: usize,
    given: Option<&'c Classified>,
    slot: &'c mut Option<Classified>,
) -> Result<&'c Classified> {
    match given {
        Some(c) => Ok(c),
        None => Ok(slot.insert(prep.classify(k)?)),
    }
}

/// Left tuples that can contribute to a joined dominator of `(p, _)`: those
/// in the target set better-or-equal on at least `k'1` positions. Each
/// comes with its counts against `p` on the local positions.
fn near_left(
    prep: &Prepared,
    p: usize,
    k1: usize,
    targets: Option<&[usize]>,
) -> Vec<(usize, DominanceCount)> {
    let (r1, l1) = (prep.r1, prep.layout.l1);
    let target = r1.sky(p);
    let near = |u: usize| {
        let su = r1.sky(u);
        (DominanceCount::of(su, target).leq >= k1)
            .then(|| (u, DominanceCount::of(&su[..l1], &target[..l1])))
    };
    match targets {
        Some(t) => t.iter().filter_map(|&u| near(u)).collect(),
        None => (0..r1.len()).filter_map(near).collect(),
    }
}

/// Whether some joinable `(u, v)` with `u` in `us` and `v` in the right
/// target set k-dominates `(p, q)`.
///
/// The aggregate positions add at most `a` to the better-or-equal count, so
/// `u` only needs partners whose local count against `q` reaches
/// `k - a - local(u)`. Right tuples are bucketed by that count, each bucket
/// kept in join order so a partner range is a slice of it.
fn dominated_by_targets(
    prep: &Prepared,
    k: usize,
    (p, q): (usize, usize),
    us: &[(usize, DominanceCount)],
    right: Option<&[bool]>,
) -> bool {
    let (r1, r2, lay) = (prep.r1, prep.r2, &prep.layout);
    let (l1, l2, a) = (lay.l1, lay.l2, lay.a);
    let (tp, tq) = (r1.sky(p), r2.sky(q));
    let Some(best) = us.iter().map(|(_, c)| c.leq).max() else {
        return false;
    };
    if best + l2 + a < k {
        return false;
    }
    let floor = k.saturating_sub(a + best);
    // buckets[t - floor]: (rank, v, counts) with local count >= t
    let mut buckets: Vec<Vec<(usize, usize, DominanceCount)>> = vec![Vec::new(); l2 + 1 - floor];
    for (rank, &v) in prep.plan.order().iter().enumerate() {
        if right.is_some_and(|m| !m[v]) {
            continue;
        }
        let c = DominanceCount::of(&r2.sky(v)[..l2], &tq[..l2]);
        for b in buckets.iter_mut().take((c.leq + 1).saturating_sub(floor)) {
            b.push((rank, v, c));
        }
    }
    us.iter().any(|&(u, cu)| {
        let need = k.saturating_sub(a + cu.leq).max(floor);
        if need > l2 {
            return false;
        }
        let bucket = &buckets[need - floor];
        let (s, e) = prep.plan.range(u);
        let lo = bucket.partition_point(|x| x.0 < s);
        let hi = bucket.partition_point(|x| x.0 < e);
        let su = r1.sky(u);
        bucket[lo..hi].iter().any(|&(_, v, cv)| {
            if (u, v) == (p, q) {
                return false;
            }
            let sv = r2.sky(v);
            let mut c = cu + cv;
            for (j, f) in lay.agg_fns.iter().enumerate() {
                let x = f.apply(su[l1 + j], sv[l2 + j]);
                let y = f.apply(tp[l1 + j], tq[l2 + j]);
                c.leq += (x <= y) as usize;
                c.lt += (x < y) as usize;
            }
            c.k_dominates(k)
        })
    })
}

fn positions_of(mask: &[bool]) -> Vec<usize> {
    mask.iter()
        .enumerate()
        .filter_map(|(i, &m)| m.then_some(i))
        .collect()
}

pub(super) fn grouping(
    prep: &Prepared,
    k: usize,
    classified: Option<&Classified>,
) -> Result<SkylineAnswer> {
    let mut t = Instant::now();
    let mut slot = None;
    let cls = classified_or(prep, k, classified, &mut slot)?;
    let group_ms = lap(&mut t);

    let cand = candidates(prep, cls);
    let join_ms = lap(&mut t);

    let [k1, k2] = cls.k_primes;
    let [l1, l2] = &cls.labels;
    let a1 = augment_mask(prep.r1, &l1.positions(Label::Ss), k1);
    let a2 = augment_mask(prep.r2, &l2.positions(Label::Ss), k2);
    let a1_positions = positions_of(&a1);
    // SS⋈SN against A1⋈R2, SN⋈SS against R1⋈A2, SN⋈SN against R1⋈R2
    let survivors: Vec<(usize, usize)> = cand
        .check
        .par_iter()
        .flat_map_iter(|(p, qs)| {
            let p = *p;
            let left_ss = l1.label(p) == Label::Ss;
            let us = near_left(prep, p, k1, left_ss.then_some(a1_positions.as_slice()));
            qs.iter()
                .filter(|&&q| {
                    let right = (l2.label(q) == Label::Ss).then_some(a2.as_slice());
                    !dominated_by_targets(prep, k, (p, q), &us, right)
                })
                .map(|&q| (p, q))
                .collect::<Vec<_>>()
        })
        .collect();
    let pairs = prep.pair_ids(cand.yes.into_iter().chain(survivors));
    Ok(SkylineAnswer {
        k,
        k_primes: Some(cls.k_primes),
        pairs,
        category_counts: Some(cls.counts),
        timings: Timings {
            group_ms,
            join_ms,
            dominator_ms: 0.0,
            rest_ms: lap(&mut t),
        },
    })
}

pub(super) fn dominator(
    prep: &Prepared,
    k: usize,
    classified: Option<&Classified>,
) -> Result<SkylineAnswer> {
    let mut t = Instant::now();
    let mut slot = None;
    let cls = classified_or(prep, k, classified, &mut slot)?;
    let group_ms = lap(&mut t);

    let cand = candidates(prep, cls);
    let join_ms = lap(&mut t);

    let [k1, k2] = cls.k_primes;
    let [l1, l2] = &cls.labels;
    let dom1: Vec<Vec<usize>> = (0..prep.r1.len())
        .into_par_iter()
        .map(|p| {
            if l1.label(p) == Label::Nn {
                Vec::new()
            } else {
                dominator_positions(prep.r1, p, k1)
            }
        })
        .collect();
    // right dominator sets as (join rank, position), sorted by rank
    let dom2: Vec<Vec<(usize, usize)>> = (0..prep.r2.len())
        .into_par_iter()
        .map(|q| {
            if l2.label(q) == Label::Nn {
                return Vec::new();
            }
            let mut v: Vec<(usize, usize)> = dominator_positions(prep.r2, q, k2)
                .into_iter()
                .map(|v| (prep.plan.rank(v), v))
                .collect();
            v.sort_unstable();
            v
        })
        .collect();
    let dominator_ms = lap(&mut t);

    let (r1, r2) = (prep.r1, prep.r2);
    let survivors: Vec<(usize, usize)> = cand
        .check
        .par_iter()
        .flat_map_iter(|(p, qs)| {
            let p = *p;
            let dp = &dom1[p];
            qs.iter()
                .filter(|&&q| {
                    let dq = &dom2[q];
                    let (tp, tq) = (r1.sky(p), r2.sky(q));
                    !dp.iter().any(|&u| {
                        let (s, e) = prep.plan.range(u);
                        let lo = dq.partition_point(|&(r, _)| r < s);
                        let hi = dq.partition_point(|&(r, _)| r < e);
                        let su = r1.sky(u);
                        dq[lo..hi].iter().any(|&(_, v)| {
                            (u, v) != (p, q)
                                && prep.layout.count(su, r2.sky(v), tp, tq).k_dominates(k)
                        })
                    })
                })
                .map(|&q| (p, q))
                .collect::<Vec<_>>()
        })
        .collect();
    let pairs = prep.pair_ids(cand.yes.into_iter().chain(survivors));
    Ok(SkylineAnswer {
        k,
        k_primes: Some(cls.k_primes),
        pairs,
        category_counts: Some(cls.counts),
        timings: Timings {
            group_ms,
            join_ms,
            dominator_ms,
            rest_ms: lap(&mut t),
        },
    })
}

/// Every pair joins, so each relation is one group and a dominated base
/// tuple is NN. Aggregation can leave SN tuples behind (the NN threshold is
/// stricter than the SS one); those are checked as in the grouping
/// algorithm.
pub(super) fn cartesian(prep: &Prepared, k: usize) -> Result<SkylineAnswer> {
    if !prep.plan.is_cartesian() {
        return Err(Error::UnsupportedCondition(
            "the Cartesian algorithm needs every left tuple to join with every right tuple".into(),
        ));
    }
    let mut t = Instant::now();
    let cls = prep.classify_as(k, true)?;
    let group_ms = lap(&mut t);
    let [l1, l2] = &cls.labels;
    if l1.counts()[Label::Sn.index()] + l2.counts()[Label::Sn.index()] > 0 {
        let mut ans = grouping(prep, k, Some(&cls))?;
        ans.timings.group_ms = group_ms;
        return Ok(ans);
    }
    let ss2 = l2.positions(Label::Ss);
    let pairs = prep.pair_ids(
        l1.positions(Label::Ss)
            .into_iter()
            .flat_map(|p| ss2.iter().map(move |&q| (p, q))),
    );
    Ok(SkylineAnswer {
        k,
        k_primes: Some(cls.k_primes),
        pairs,
        category_counts: Some(cls.counts),
        timings: Timings {
            group_ms,
            join_ms: lap(&mut t),
            ..Timings::default()
        },
    })
}

/// Candidates not k-dominated by any joinable pair of `targets` other than
/// themselves, in canonical order.
pub fn check_target(
    r1: &Relation,
    r2: &Relation,
    config: &QueryConfig,
    candidates: &[(TupleId, TupleId)],
    targets: (&BTreeSet<TupleId>, &BTreeSet<TupleId>),
) -> Result<Vec<(TupleId, TupleId)>> {
    let prep = Prepared::new(r1, r2, config)?;
    let k = config.k;
    let k1 = prep.thresholds(k)[0].skyline;
    let left = targets
        .0
        .iter()
        .map(|&id| r1.position(id))
        .collect::<Result<Vec<_>>>()?;
    let mut right = vec![false; r2.len()];
    for &id in targets.1 {
        right[r2.position(id)?] = true;
    }
    let mut out = Vec::new();
    for &(l, r) in candidates {
        let (p, q) = (r1.position(l)?, r2.position(r)?);
        if !prep.plan.joinable(p, q) {
            return Err(Error::Incompatible { left: l, right: r });
        }
        let us = near_left(&prep, p, k1, Some(&left));
        if !dominated_by_targets(&prep, k, (p, q), &us, Some(&right)) {
            out.push((l, r));
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}
