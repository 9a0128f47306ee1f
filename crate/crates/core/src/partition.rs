//! SS / SN / NN classification of base tuples.
//!
//! * SS: not k'-dominated by any tuple of the relation.
//! * SN: k'-dominated somewhere, but by nothing in its compatibility set.
//! * NN: k'-dominated by a tuple of its compatibility set.
//!
//! The compatibility set of a tuple is its join group under an equality
//! join. Under a non-equality condition it is the set of tuples guaranteed
//! to join with every partner the tuple joins with, which is all that can
//! be decided without looking at the other relation.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::dominance::{check_k, sum_order, DominanceCount};
use crate::error::{Error, Result};
use crate::relation::{JoinCondition, Relation, TupleId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Ss,
    Sn,
    Nn,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Ss, Label::Sn, Label::Nn];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Ss => "SS",
            Label::Sn => "SN",
            Label::Nn => "NN",
        }
    }
}

/// Which operand of the join condition a relation is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    First,
    Second,
}

/// Thresholds used to label one relation.
///
/// For plain joins both thresholds are `k - d_other`. With aggregate
/// attributes they differ: SS must hold for the smaller `k - d_other` and NN
/// needs the larger `k - l_other` (see [`crate::engine`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thresholds {
    /// SS when no tuple of the relation k'-dominates at this k'. Also the
    /// threshold for augmentation and dominator sets.
    pub skyline: usize,
    /// NN when a compatible tuple dominates at this k'.
    pub group: usize,
    /// Positions whose strict improvement is guaranteed to survive the
    /// join. An NN witness must be strictly better on one of them. `None`
    /// means every position.
    pub strict_positions: Option<Vec<bool>>,
}

impl Thresholds {
    pub fn uniform(k_prime: usize) -> Self {
        Thresholds {
            skyline: k_prime,
            group: k_prime,
            strict_positions: None,
        }
    }

    #[inline]
    fn nn_witness(&self, witness: &[f64], target: &[f64]) -> bool {
        let c = DominanceCount::of(witness, target);
        if c.leq < self.group || c.lt == 0 {
            return false;
        }
        match &self.strict_positions {
            None => true,
            Some(mask) => witness
                .iter()
                .zip(target)
                .zip(mask)
                .any(|((a, b), &m)| m && a < b),
        }
    }
}

/// Per-tuple labels of one relation, indexed by tuple position.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionLabels {
    pub k_prime: usize,
    pub nn_k_prime: usize,
    pub compat: JoinCondition,
    labels: Vec<Label>,
}

impl PartitionLabels {
    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, pos: usize) -> Label {
        self.labels[pos]
    }

    pub fn label_of(&self, relation: &Relation, id: TupleId) -> Result<Label> {
        Ok(self.labels[relation.position(id)?])
    }

    pub fn positions(&self, label: Label) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(p, &l)| (l == label).then_some(p))
            .collect()
    }

    pub fn ids(&self, relation: &Relation, label: Label) -> BTreeSet<TupleId> {
        self.positions(label)
            .into_iter()
            .map(|p| relation.id(p))
            .collect()
    }

    pub fn counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for l in &self.labels {
            c[l.index()] += 1;
        }
        c
    }
}

/// Equality-join classification with a single k'.
pub fn classify(relation: &Relation, k_prime: usize) -> Result<PartitionLabels> {
    classify_with(
        relation,
        &Thresholds::uniform(k_prime),
        JoinCondition::Equality,
        Side::First,
    )
}

/// Classification whose compatibility sets follow a non-equality condition
/// on the relation's single join attribute.
pub fn classify_nonequality(
    relation: &Relation,
    k_prime: usize,
    cond: JoinCondition,
    side: Side,
) -> Result<PartitionLabels> {
    if cond == JoinCondition::Equality {
        return Err(Error::UnsupportedCondition(
            "equality is not a non-equality condition".into(),
        ));
    }
    classify_with(relation, &Thresholds::uniform(k_prime), cond, side)
}

pub fn classify_with(
    relation: &Relation,
    thresholds: &Thresholds,
    cond: JoinCondition,
    side: Side,
) -> Result<PartitionLabels> {
    let d = relation.schema().d();
    check_k(thresholds.skyline, d)?;
    check_k(thresholds.group, d)?;
    if thresholds.skyline > thresholds.group {
        return Err(Error::KOutOfRange {
            k: thresholds.skyline,
            min: 1,
            max: thresholds.group,
        });
    }
    let compat = Compatibility::new(relation, cond, side)?;
    let views: Vec<&[f64]> = relation.tuples().iter().map(|t| t.sky.as_slice()).collect();
    let order = sum_order(&views);

    let labels = (0..relation.len())
        .into_par_iter()
        .map(|i| {
            let target = views[i];
            let in_group = compat
                .members(i)
                .iter()
                .any(|&j| j != i && thresholds.nn_witness(views[j], target));
            if in_group {
                return Label::Nn;
            }
            let anywhere = order.iter().any(|&j| {
                j != i && DominanceCount::of(views[j], target).k_dominates(thresholds.skyline)
            });
            if anywhere {
                Label::Sn
            } else {
                Label::Ss
            }
        })
        .collect();

    Ok(PartitionLabels {
        k_prime: thresholds.skyline,
        nn_k_prime: thresholds.group,
        compat: cond,
        labels,
    })
}

/// Compatibility sets, as slices of tuple positions.
pub(crate) enum Compatibility<'a> {
    Groups(&'a Relation),
    Sorted {
        order: Vec<usize>,
        values: Vec<f64>,
        own: Vec<f64>,
        cond: JoinCondition,
    },
}

impl<'a> Compatibility<'a> {
    pub(crate) fn new(relation: &'a Relation, cond: JoinCondition, side: Side) -> Result<Self> {
        if cond == JoinCondition::Equality {
            return Ok(Compatibility::Groups(relation));
        }
        let own = single_numeric_key(relation)?;
        // the second operand's set is the first operand's with the
        // comparison mirrored
        let cond = match side {
            Side::First => cond,
            Side::Second => mirror(cond),
        };
        let mut order: Vec<usize> = (0..relation.len()).collect();
        order.sort_by(|&a, &b| own[a].total_cmp(&own[b]).then(a.cmp(&b)));
        let values = order.iter().map(|&p| own[p]).collect();
        Ok(Compatibility::Sorted {
            order,
            values,
            own,
            cond,
        })
    }

    /// Positions compatible with `pos` (may include `pos` itself).
    pub(crate) fn members(&self, pos: usize) -> &[usize] {
        match self {
            Compatibility::Groups(r) => &r.groups()[r.group_of(pos)].members,
            Compatibility::Sorted {
                order,
                values,
                own,
                cond,
            } => {
                let x = own[pos];
                let below = values.partition_point(|&v| v < x);
                let upto = values.partition_point(|&v| v <= x);
                match cond {
                    JoinCondition::Lt => &order[..below],
                    JoinCondition::Leq => &order[..upto],
                    JoinCondition::Gt => &order[upto..],
                    JoinCondition::Geq => &order[below..],
                    JoinCondition::Equality => &order[below..upto],
                }
            }
        }
    }
}

pub(crate) fn mirror(cond: JoinCondition) -> JoinCondition {
    match cond {
        JoinCondition::Lt => JoinCondition::Gt,
        JoinCondition::Leq => JoinCondition::Geq,
        JoinCondition::Gt => JoinCondition::Lt,
        JoinCondition::Geq => JoinCondition::Leq,
        JoinCondition::Equality => JoinCondition::Equality,
    }
}

/// The numeric value of the single join attribute of every tuple.
pub(crate) fn single_numeric_key(relation: &Relation) -> Result<Vec<f64>> {
    if relation.schema().m() != 1 {
        return Err(Error::UnsupportedCondition(format!(
            "non-equality joins need exactly one join attribute, found {}",
            relation.schema().m()
        )));
    }
    relation
        .tuples()
        .iter()
        .map(|t| {
            t.join_key[0].as_number().ok_or_else(|| {
                Error::UnsupportedCondition(format!(
                    "tuple {}: join value {:?} is not numeric",
                    t.id, t.join_key[0]
                ))
            })
        })
        .collect()
}

/// Seeds plus every tuple agreeing with some seed on at least `k_prime`
/// skyline values, as a membership mask over positions.
pub(crate) fn augment_mask(relation: &Relation, seeds: &[usize], k_prime: usize) -> Vec<bool> {
    (0..relation.len())
        .into_par_iter()
        .map(|p| {
            let sky = relation.sky(p);
            seeds
                .iter()
                .any(|&s| s == p || DominanceCount::of(relation.sky(s), sky).ties() >= k_prime)
        })
        .collect()
}

/// `ss_ids` extended with every tuple sharing at least `k_prime` exactly
/// equal skyline values with one of them.
pub fn augment(
    relation: &Relation,
    ss_ids: &BTreeSet<TupleId>,
    k_prime: usize,
) -> Result<BTreeSet<TupleId>> {
    let seeds = ss_ids
        .iter()
        .map(|&id| relation.position(id))
        .collect::<Result<Vec<_>>>()?;
    Ok(augment_mask(relation, &seeds, k_prime)
        .into_iter()
        .enumerate()
        .filter(|&(_, m)| m)
        .map(|(p, _)| relation.id(p))
        .collect())
}

/// Dominators of `pos` at `k_prime` together with the tuples sharing at
/// least `k_prime` values with it, `pos` included.
///
/// A tuple that is better-or-equal on `k_prime` positions either has a
/// strict position (a dominator) or is exactly equal on all of them (an
/// augmentation), so the union is one counting test.
pub(crate) fn dominator_positions(relation: &Relation, pos: usize, k_prime: usize) -> Vec<usize> {
    let target = relation.sky(pos);
    (0..relation.len())
        .filter(|&v| DominanceCount::of(relation.sky(v), target).leq >= k_prime)
        .collect()
}

/// dom(u) for one SS or SN tuple.
pub fn dominator_set(
    relation: &Relation,
    labels: &PartitionLabels,
    id: TupleId,
    k_prime: usize,
) -> Result<BTreeSet<TupleId>> {
    check_k(k_prime, relation.schema().d())?;
    let pos = relation.position(id)?;
    if labels.label(pos) == Label::Nn {
        return Err(Error::NotACandidate(id));
    }
    Ok(dominator_positions(relation, pos, k_prime)
        .into_iter()
        .map(|p| relation.id(p))
        .collect())
}

/// dom(u) for every SS and SN tuple.
pub fn dominator_sets(
    relation: &Relation,
    labels: &PartitionLabels,
    k_prime: usize,
) -> Result<BTreeMap<TupleId, BTreeSet<TupleId>>> {
    check_k(k_prime, relation.schema().d())?;
    Ok((0..relation.len())
        .filter(|&p| labels.label(p) != Label::Nn)
        .map(|p| {
            let dom = dominator_positions(relation, p, k_prime)
                .into_iter()
                .map(|q| relation.id(q))
                .collect();
            (relation.id(p), dom)
        })
        .collect())
}

/// Unique value property with respect to `i`: no two tuples agree on all
/// positions of any `i`-sized subset of skyline attributes.
pub fn check_uvp(relation: &Relation, i: usize) -> bool {
    let n = relation.len();
    (0..n).all(|a| {
        (a + 1..n).all(|b| DominanceCount::of(relation.sky(a), relation.sky(b)).ties() < i)
    })
}
