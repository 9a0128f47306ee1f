//! Brute-force reference implementations.
//!
//! Policy: this module stays dumb. It joins every pair, materialises every
//! vector and tests domination literally, sharing nothing with the engine
//! beyond the domain types. Do not optimise it; a faster oracle is a less
//! trustworthy one.

use std::collections::BTreeSet;

use crate::engine::QueryConfig;
use crate::kfinder::SearchMode;
use crate::relation::{AggFn, JoinCondition, Relation, Tuple, TupleId};

fn compatible(u: &Tuple, v: &Tuple, cond: JoinCondition) -> bool {
    match cond {
        JoinCondition::Equality => u.join_key == v.join_key,
        _ => {
            let a = u.join_key[0].as_number().expect("numeric join value");
            let b = v.join_key[0].as_number().expect("numeric join value");
            match cond {
                JoinCondition::Lt => a < b,
                JoinCondition::Leq => a <= b,
                JoinCondition::Gt => a > b,
                JoinCondition::Geq => a >= b,
                JoinCondition::Equality => unreachable!(),
            }
        }
    }
}

fn joined(r1: &Relation, r2: &Relation, u: &Tuple, v: &Tuple, aggregate: bool) -> Vec<f64> {
    if !aggregate {
        return u.sky.iter().chain(&v.sky).copied().collect();
    }
    let (l1, l2) = (r1.schema().l(), r2.schema().l());
    let mut out: Vec<f64> = u.sky[..l1].iter().chain(&v.sky[..l2]).copied().collect();
    for (j, (_, f)) in r1.schema().agg_attrs.iter().enumerate() {
        let (x, y) = (u.sky[l1 + j], v.sky[l2 + j]);
        out.push(match f {
            AggFn::Sum => x + y,
            AggFn::Min => {
                if x < y {
                    x
                } else {
                    y
                }
            }
        });
    }
    out
}

/// `a` is at least as good as `b` on at least `k` positions and strictly
/// better on at least one.
pub fn oracle_dominates(a: &[f64], b: &[f64], k: usize) -> bool {
    let mut better_or_equal = 0;
    let mut strictly_better = 0;
    for i in 0..a.len() {
        if a[i] <= b[i] {
            better_or_equal += 1;
        }
        if a[i] < b[i] {
            strictly_better += 1;
        }
    }
    better_or_equal >= k && strictly_better >= 1
}

/// Every compatible pair with its joined vector.
pub fn oracle_join(
    r1: &Relation,
    r2: &Relation,
    config: &QueryConfig,
) -> Vec<((TupleId, TupleId), Vec<f64>)> {
    let mut rows = Vec::new();
    for u in r1.tuples() {
        for v in r2.tuples() {
            if compatible(u, v, config.condition) {
                rows.push(((u.id, v.id), joined(r1, r2, u, v, config.aggregate)));
            }
        }
    }
    rows
}

/// The k-dominant skyline of the joined relation.
pub fn oracle_ksjq(
    r1: &Relation,
    r2: &Relation,
    config: &QueryConfig,
) -> BTreeSet<(TupleId, TupleId)> {
    let rows = oracle_join(r1, r2, config);
    let mut out = BTreeSet::new();
    for (i, (pair, t)) in rows.iter().enumerate() {
        let mut dominated = false;
        for (j, (_, s)) in rows.iter().enumerate() {
            if i != j && oracle_dominates(s, t, config.k) {
                dominated = true;
                break;
            }
        }
        if !dominated {
            out.insert(*pair);
        }
    }
    out
}

/// Indices of the classical (Pareto) skyline.
pub fn oracle_pareto_skyline(vectors: &[Vec<f64>]) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for (i, t) in vectors.iter().enumerate() {
        let dominated = vectors.iter().enumerate().any(|(j, s)| {
            j != i && s.iter().zip(t).all(|(a, b)| a <= b) && s.iter().zip(t).any(|(a, b)| a < b)
        });
        if !dominated {
            out.insert(i);
        }
    }
    out
}

/// Admissible k of the joined relation.
pub fn oracle_k_range(r1: &Relation, r2: &Relation, aggregate: bool) -> (usize, usize) {
    let (s1, s2) = (r1.schema(), r2.schema());
    let k_min = s1.d().max(s2.d()) + 1;
    let d = if aggregate {
        s1.l() + s2.l() + s1.a()
    } else {
        s1.d() + s2.d()
    };
    (k_min, d)
}

/// `(k, |answer(k)|)` for every admissible k.
pub fn oracle_counts(r1: &Relation, r2: &Relation, config: &QueryConfig) -> Vec<(usize, usize)> {
    let (k_min, d) = oracle_k_range(r1, r2, config.aggregate);
    (k_min..=d)
        .map(|k| (k, oracle_ksjq(r1, r2, &config.with_k(k)).len()))
        .collect()
}

/// The k selected for `delta` from the full count table.
///
/// At least: the smallest k with `count >= delta`, else the maximum k.
/// At most: the largest k with `count <= delta`, else the smallest k.
pub fn oracle_find_k_from(counts: &[(usize, usize)], delta: usize, mode: SearchMode) -> usize {
    let (first, last) = (counts[0].0, counts[counts.len() - 1].0);
    match mode {
        SearchMode::AtLeast => counts
            .iter()
            .find(|&&(_, n)| n >= delta)
            .map_or(last, |&(k, _)| k),
        SearchMode::AtMost => counts
            .iter()
            .rev()
            .find(|&&(_, n)| n <= delta)
            .map_or(first, |&(k, _)| k),
    }
}

pub fn oracle_find_k(
    r1: &Relation,
    r2: &Relation,
    delta: usize,
    mode: SearchMode,
    config: &QueryConfig,
) -> usize {
    oracle_find_k_from(&oracle_counts(r1, r2, config), delta, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{fixture, generate, DatasetSpec, Distribution};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pairs(v: &[(u64, u64)]) -> BTreeSet<(TupleId, TupleId)> {
        v.iter().map(|&(a, b)| (TupleId(a), TupleId(b))).collect()
    }

    #[test]
    fn flight_tables() {
        let expected = pairs(&[(11, 23), (13, 21), (15, 25), (16, 26)]);
        let (r1, r2) = (fixture::flights_from_a(), fixture::flights_to_b());
        assert_eq!(oracle_ksjq(&r1, &r2, &QueryConfig::new(7)), expected);
        let (a1, a2) = (fixture::flights_from_a_agg(), fixture::flights_to_b_agg());
        let cfg = QueryConfig::new(6).with_aggregate(true);
        assert_eq!(oracle_ksjq(&a1, &a2, &cfg), expected);
    }

    #[test]
    fn empty_inputs() {
        let r1 = fixture::flights_from_a();
        let e = Relation::empty(r1.schema().clone());
        assert!(oracle_ksjq(&r1, &e, &QueryConfig::new(5)).is_empty());
        assert!(oracle_ksjq(&e, &r1, &QueryConfig::new(5)).is_empty());
    }

    #[test]
    fn counts_are_monotone() {
        for seed in 0..4 {
            let r1 = generate(&DatasetSpec::new(
                30,
                3,
                0,
                3,
                Distribution::Independent,
                seed,
            ))
            .unwrap();
            let r2 = generate(&DatasetSpec::new(
                30,
                3,
                0,
                3,
                Distribution::Independent,
                seed + 100,
            ))
            .unwrap();
            let c = oracle_counts(&r1, &r2, &QueryConfig::new(4));
            assert!(c.windows(2).all(|w| w[0].1 <= w[1].1), "{c:?}");
        }
    }

    #[test]
    fn find_k_corner_cases() {
        let counts = [(5, 2), (6, 4), (7, 4), (8, 9)];
        assert_eq!(oracle_find_k_from(&counts, 1, SearchMode::AtLeast), 5);
        assert_eq!(oracle_find_k_from(&counts, 4, SearchMode::AtLeast), 6);
        assert_eq!(oracle_find_k_from(&counts, 10, SearchMode::AtLeast), 8);
        assert_eq!(oracle_find_k_from(&counts, 4, SearchMode::AtMost), 7);
        assert_eq!(oracle_find_k_from(&counts, 1, SearchMode::AtMost), 5);
        assert_eq!(oracle_find_k_from(&counts, 3, SearchMode::AtMost), 5);
        assert_eq!(oracle_find_k_from(&counts, 100, SearchMode::AtMost), 8);
    }

    #[test]
    fn independent_of_input_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for dist in Distribution::ALL {
            let r1 = generate(&DatasetSpec::new(40, 3, 1, 4, dist, 1)).unwrap();
            let r2 = generate(&DatasetSpec::new(40, 3, 1, 4, dist, 2)).unwrap();
            let cfg = QueryConfig::new(4).with_aggregate(true);
            let before = oracle_ksjq(&r1, &r2, &cfg);
            let shuffle = |r: &Relation, rng: &mut ChaCha8Rng| {
                let mut t = r.tuples().to_vec();
                t.shuffle(rng);
                Relation::new(r.schema().clone(), t).unwrap()
            };
            let (s1, s2) = (shuffle(&r1, &mut rng), shuffle(&r2, &mut rng));
            assert_eq!(oracle_ksjq(&s1, &s2, &cfg), before);
        }
    }

    #[test]
    fn pareto_skyline() {
        let v = vec![
            vec![1.0, 2.0],
            vec![2.0, 1.0],
            vec![2.0, 2.0],
            vec![1.0, 2.0],
        ];
        assert_eq!(oracle_pareto_skyline(&v), [0, 1, 3].into_iter().collect());
    }
}
