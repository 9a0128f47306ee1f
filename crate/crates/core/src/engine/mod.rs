//! k-dominant skyline join queries.
//!
//! Four algorithms compute the same answer:
//!
//! * [`ksjq_naive`] joins everything and runs the baseline skyline.
//! * [`ksjq_grouping`] labels both relations SS/SN/NN, emits SS⋈SS
//!   directly, drops every pair with an NN side and checks the rest against
//!   the join of their target sets.
//! * [`ksjq_dominator`] does the same pruning but checks each remaining pair
//!   only against the join of the two base tuples' dominator sets.
//! * [`ksjq_cartesian`] handles joins where every pair qualifies.
//!
//! With aggregate attributes the joined vector holds `l1 + l2` local values
//! and `a` aggregated ones. A base tuple is then labelled with two
//! thresholds: SS and the dominator sets use `k - d_other`, while NN needs
//! a compatible tuple dominating on `k - l_other` positions and strictly
//! better on a position whose improvement survives aggregation.

mod algo;
mod join;

use std::collections::BTreeSet;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::partition::{classify_with, Label, PartitionLabels, Side, Thresholds};
use crate::relation::{JoinCondition, Relation, TupleId};

pub use algo::check_target;
pub(crate) use join::{JoinPlan, Layout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Algorithm {
    Naive,
    #[default]
    Grouping,
    Dominator,
    Cartesian,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Naive,
        Algorithm::Grouping,
        Algorithm::Dominator,
        Algorithm::Cartesian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Naive => "naive",
            Algorithm::Grouping => "grouping",
            Algorithm::Dominator => "dominator",
            Algorithm::Cartesian => "cartesian",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "naive" => Ok(Algorithm::Naive),
            "grouping" => Ok(Algorithm::Grouping),
            "dominator" => Ok(Algorithm::Dominator),
            "cartesian" => Ok(Algorithm::Cartesian),
            other => Err(Error::InvalidConfig(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryConfig {
    pub k: usize,
    /// Aggregate the trailing components of both relations instead of
    /// concatenating them.
    pub aggregate: bool,
    pub condition: JoinCondition,
    pub algorithm: Algorithm,
}

impl QueryConfig {
    pub fn new(k: usize) -> Self {
        QueryConfig {
            k,
            aggregate: false,
            condition: JoinCondition::Equality,
            algorithm: Algorithm::Grouping,
        }
    }

    pub fn with_k(self, k: usize) -> Self {
        QueryConfig { k, ..self }
    }

    pub fn with_aggregate(self, aggregate: bool) -> Self {
        QueryConfig { aggregate, ..self }
    }

    pub fn with_condition(self, condition: JoinCondition) -> Self {
        QueryConfig { condition, ..self }
    }

    pub fn with_algorithm(self, algorithm: Algorithm) -> Self {
        QueryConfig { algorithm, ..self }
    }

    /// Admissible values of k: above both base dimensionalities, up to the
    /// joined dimensionality. The range is empty when no k qualifies.
    pub fn k_range(&self, r1: &Relation, r2: &Relation) -> Result<RangeInclusive<usize>> {
        let layout = Layout::new(r1, r2, self.aggregate)?;
        Ok(layout.k_min()..=layout.d())
    }

    pub fn validate(&self, r1: &Relation, r2: &Relation) -> Result<()> {
        Prepared::new(r1, r2, self).map(|_| ())
    }
}

/// Wall-clock breakdown of one query, in milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timings {
    /// Labelling the base relations.
    pub group_ms: f64,
    /// Enumerating joined pairs.
    pub join_ms: f64,
    /// Computing dominator sets.
    pub dominator_ms: f64,
    /// Everything else: skyline or target checks.
    pub rest_ms: f64,
}

impl Timings {
    pub fn total_ms(&self) -> f64 {
        self.group_ms + self.join_ms + self.dominator_ms + self.rest_ms
    }
}

/// Elapsed milliseconds since `t`, restarting `t`.
pub(crate) fn lap(t: &mut Instant) -> f64 {
    let now = Instant::now();
    let ms = now.duration_since(*t).as_secs_f64() * 1e3;
    *t = now;
    ms
}

/// A pair of base tuples and its joined skyline vector.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinedTuple {
    pub left_id: TupleId,
    pub right_id: TupleId,
    pub sky: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkylineAnswer {
    pub k: usize,
    /// `[k'1, k'2]` for the algorithms that label base tuples.
    pub k_primes: Option<[usize; 2]>,
    /// Result pairs ordered by `(left_id, right_id)`.
    pub pairs: Vec<(TupleId, TupleId)>,
    /// Joinable pairs per label cross set, `[left][right]` indexed by
    /// [`Label::index`].
    pub category_counts: Option<[[usize; 3]; 3]>,
    pub timings: Timings,
}

impl SkylineAnswer {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pair_set(&self) -> BTreeSet<(TupleId, TupleId)> {
        self.pairs.iter().copied().collect()
    }

    /// `|SS1⋈SS2|` and that plus the other three non-NN cross sets.
    pub fn bounds(&self) -> Option<(usize, usize)> {
        self.category_counts.map(|c| bounds_of(&c))
    }
}

pub(crate) fn bounds_of(c: &[[usize; 3]; 3]) -> (usize, usize) {
    let (ss, sn) = (Label::Ss.index(), Label::Sn.index());
    let lb = c[ss][ss];
    (lb, lb + c[ss][sn] + c[sn][ss] + c[sn][sn])
}

/// Validated inputs of one query, independent of k.
pub(crate) struct Prepared<'a> {
    pub r1: &'a Relation,
    pub r2: &'a Relation,
    pub condition: JoinCondition,
    pub layout: Layout,
    pub plan: JoinPlan,
}

impl<'a> Prepared<'a> {
    pub fn new(r1: &'a Relation, r2: &'a Relation, config: &QueryConfig) -> Result<Self> {
        let prep = Prepared::without_k(r1, r2, config)?;
        prep.check_k(config.k)?;
        Ok(prep)
    }

    pub fn without_k(r1: &'a Relation, r2: &'a Relation, config: &QueryConfig) -> Result<Self> {
        let layout = Layout::new(r1, r2, config.aggregate)?;
        let plan = JoinPlan::new(r1, r2, config.condition)?;
        Ok(Prepared {
            r1,
            r2,
            condition: config.condition,
            layout,
            plan,
        })
    }

    pub fn k_min(&self) -> usize {
        self.layout.k_min()
    }

    pub fn d(&self) -> usize {
        self.layout.d()
    }

    pub fn check_k(&self, k: usize) -> Result<()> {
        let (min, max) = (self.k_min(), self.d());
        if k < min || k > max {
            return Err(Error::KOutOfRange { k, min, max });
        }
        Ok(())
    }

    /// Labelling thresholds of both relations for `k`.
    pub fn thresholds(&self, k: usize) -> [Thresholds; 2] {
        let l = &self.layout;
        let side = |d_other: usize, l_other: usize, locals: usize| Thresholds {
            skyline: k - d_other,
            group: k - l_other,
            strict_positions: l.aggregate.then(|| l.strict_mask(locals)),
        };
        [side(l.d2, l.l2, l.l1), side(l.d1, l.l1, l.l2)]
    }

    /// Labels both relations for `k`.
    pub fn classify(&self, k: usize) -> Result<Classified> {
        self.classify_as(k, false)
    }

    /// Labels both relations for `k`; with `whole`, every tuple of a
    /// relation is compatible with every other.
    pub fn classify_as(&self, k: usize, whole: bool) -> Result<Classified> {
        self.check_k(k)?;
        let th = self.thresholds(k);
        let label = |r: &Relation, th: &Thresholds, side| {
            if whole {
                classify_with(&r.without_join_attrs(), th, JoinCondition::Equality, side)
            } else {
                classify_with(r, th, self.condition, side)
            }
        };
        let (l1, l2) = rayon::join(
            || label(self.r1, &th[0], Side::First),
            || label(self.r2, &th[1], Side::Second),
        );
        let labels = [l1?, l2?];
        let counts = self
            .plan
            .cross_counts(&indices(&labels[0]), &indices(&labels[1]));
        Ok(Classified {
            k,
            k_primes: [th[0].skyline, th[1].skyline],
            labels,
            counts,
        })
    }

    pub fn pair_ids(
        &self,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Vec<(TupleId, TupleId)> {
        let mut out: Vec<_> = pairs
            .into_iter()
            .map(|(p, q)| (self.r1.id(p), self.r2.id(q)))
            .collect();
        out.sort_unstable();
        out
    }
}

fn indices(labels: &PartitionLabels) -> Vec<usize> {
    labels.labels().iter().map(|l| l.index()).collect()
}

/// Both relations labelled for one k.
#[derive(Debug, Clone)]
pub(crate) struct Classified {
    pub k: usize,
    pub k_primes: [usize; 2],
    pub labels: [PartitionLabels; 2],
    pub counts: [[usize; 3]; 3],
}

impl Classified {
    pub fn bounds(&self) -> (usize, usize) {
        bounds_of(&self.counts)
    }
}

/// Joins two base tuples by id.
pub fn join_pair(
    r1: &Relation,
    r2: &Relation,
    left: TupleId,
    right: TupleId,
    config: &QueryConfig,
) -> Result<JoinedTuple> {
    let prep = Prepared::without_k(r1, r2, config)?;
    let (p, q) = (r1.position(left)?, r2.position(right)?);
    if !prep.plan.joinable(p, q) {
        return Err(Error::Incompatible { left, right });
    }
    Ok(JoinedTuple {
        left_id: left,
        right_id: right,
        sky: prep.layout.combine(r1.sky(p), r2.sky(q)),
    })
}

/// Joined tuples of `pairs`, in the given order.
pub fn materialize(
    r1: &Relation,
    r2: &Relation,
    pairs: &[(TupleId, TupleId)],
    config: &QueryConfig,
) -> Result<Vec<JoinedTuple>> {
    pairs
        .iter()
        .map(|&(l, r)| join_pair(r1, r2, l, r, config))
        .collect()
}

/// Column names of the joined skyline vector.
pub fn joined_names(r1: &Relation, r2: &Relation, aggregate: bool) -> Result<Vec<String>> {
    let layout = Layout::new(r1, r2, aggregate)?;
    let (s1, s2) = (r1.schema(), r2.schema());
    let mut names: Vec<String> = s1
        .sky_names()
        .take(layout.l1)
        .map(|n| format!("l.{n}"))
        .collect();
    names.extend(s2.sky_names().take(layout.l2).map(|n| format!("r.{n}")));
    names.extend(s1.agg_attrs.iter().take(layout.a).map(|(n, _)| n.clone()));
    Ok(names)
}

pub fn ksjq_naive(r1: &Relation, r2: &Relation, config: &QueryConfig) -> Result<SkylineAnswer> {
    let prep = Prepared::new(r1, r2, config)?;
    Ok(algo::naive(&prep, config.k))
}

pub fn ksjq_grouping(r1: &Relation, r2: &Relation, config: &QueryConfig) -> Result<SkylineAnswer> {
    let prep = Prepared::new(r1, r2, config)?;
    algo::grouping(&prep, config.k, None)
}

pub fn ksjq_dominator(r1: &Relation, r2: &Relation, config: &QueryConfig) -> Result<SkylineAnswer> {
    let prep = Prepared::new(r1, r2, config)?;
    algo::dominator(&prep, config.k, None)
}

/// Requires every left tuple to join with every right tuple.
pub fn ksjq_cartesian(r1: &Relation, r2: &Relation, config: &QueryConfig) -> Result<SkylineAnswer> {
    let prep = Prepared::new(r1, r2, config)?;
    algo::cartesian(&prep, config.k)
}

/// Runs `config.algorithm`.
pub fn ksjq(r1: &Relation, r2: &Relation, config: &QueryConfig) -> Result<SkylineAnswer> {
    let prep = Prepared::new(r1, r2, config)?;
    run(&prep, config.k, config.algorithm, None)
}

/// Runs `algorithm`, reusing `classified` when it is for the same k.
pub(crate) fn run(
    prep: &Prepared,
    k: usize,
    algorithm: Algorithm,
    classified: Option<&Classified>,
) -> Result<SkylineAnswer> {
    prep.check_k(k)?;
    let classified = classified.filter(|c| c.k == k);
    match algorithm {
        Algorithm::Naive => Ok(algo::naive(prep, k)),
        Algorithm::Grouping => algo::grouping(prep, k, classified),
        Algorithm::Dominator => algo::dominator(prep, k, classified),
        Algorithm::Cartesian => algo::cartesian(prep, k),
    }
}
