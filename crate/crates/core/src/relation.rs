//! Schemas, tuples and relations.
//!
//! A tuple's skyline vector stores the local attributes first and the
//! aggregate components after them, in schema order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TupleId(pub u64);

impl fmt::Display for TupleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A join attribute value. Text that parses as a finite number is stored as
/// a number, so `"3"` and `" 3.0 "` are the same key.
#[derive(Debug, Clone)]
pub enum JoinValue {
    Number(f64),
    Text(String),
}

impl JoinValue {
    pub fn number(x: f64) -> Self {
        // -0.0 and 0.0 are the same key
        JoinValue::Number(if x == 0.0 { 0.0 } else { x })
    }

    pub fn parse(raw: &str) -> Self {
        let s = raw.trim();
        match s.parse::<f64>() {
            Ok(x) if x.is_finite() => JoinValue::number(x),
            _ => JoinValue::Text(s.to_string()),
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            JoinValue::Number(x) => Some(*x),
            JoinValue::Text(_) => None,
        }
    }
}

impl From<&str> for JoinValue {
    fn from(s: &str) -> Self {
        JoinValue::parse(s)
    }
}

impl From<f64> for JoinValue {
    fn from(x: f64) -> Self {
        JoinValue::number(x)
    }
}

impl PartialEq for JoinValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for JoinValue {}

impl Hash for JoinValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            JoinValue::Number(x) => {
                0u8.hash(state);
                x.to_bits().hash(state);
            }
            JoinValue::Text(s) => {
                1u8.hash(state);
                s.hash(state);
            }
        }
    }
}

impl PartialOrd for JoinValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for JoinValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (JoinValue::Number(a), JoinValue::Number(b)) => a.total_cmp(b),
            (JoinValue::Number(_), JoinValue::Text(_)) => Ordering::Less,
            (JoinValue::Text(_), JoinValue::Number(_)) => Ordering::Greater,
            (JoinValue::Text(a), JoinValue::Text(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for JoinValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JoinValue::Number(x) => x.fmt(f),
            JoinValue::Text(s) => f.write_str(s),
        }
    }
}

/// Monotone aggregation of one component from each base tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AggFn {
    Sum,
    Min,
}

impl AggFn {
    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            AggFn::Sum => a + b,
            AggFn::Min => a.min(b),
        }
    }

    /// Whether a strict improvement of one input always yields a strict
    /// improvement of the output, whatever the other input is.
    pub fn strictly_monotone(self) -> bool {
        matches!(self, AggFn::Sum)
    }

    pub fn name(self) -> &'static str {
        match self {
            AggFn::Sum => "SUM",
            AggFn::Min => "MIN",
        }
    }
}

impl FromStr for AggFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SUM" => Ok(AggFn::Sum),
            "MIN" => Ok(AggFn::Min),
            other => Err(Error::InvalidSchema(format!(
                "unknown aggregate function {other:?}"
            ))),
        }
    }
}

/// Join predicate between the single join attribute of the left and right
/// relation (`left OP right`), or equality over every join attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum JoinCondition {
    #[default]
    Equality,
    Lt,
    Leq,
    Gt,
    Geq,
}

impl JoinCondition {
    /// `a OP b` for the non-equality conditions.
    #[inline]
    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            JoinCondition::Equality => a == b,
            JoinCondition::Lt => a < b,
            JoinCondition::Leq => a <= b,
            JoinCondition::Gt => a > b,
            JoinCondition::Geq => a >= b,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            JoinCondition::Equality => "eq",
            JoinCondition::Lt => "lt",
            JoinCondition::Leq => "leq",
            JoinCondition::Gt => "gt",
            JoinCondition::Geq => "geq",
        }
    }
}

impl FromStr for JoinCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "eq" | "=" | "equality" => Ok(JoinCondition::Equality),
            "lt" | "<" => Ok(JoinCondition::Lt),
            "leq" | "<=" => Ok(JoinCondition::Leq),
            "gt" | ">" => Ok(JoinCondition::Gt),
            "geq" | ">=" => Ok(JoinCondition::Geq),
            other => Err(Error::UnsupportedCondition(other.to_string())),
        }
    }
}

/// Column roles of a relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub join_attrs: Vec<String>,
    pub local_attrs: Vec<String>,
    pub agg_attrs: Vec<(String, AggFn)>,
}

impl Schema {
    pub fn new(
        join_attrs: Vec<String>,
        local_attrs: Vec<String>,
        agg_attrs: Vec<(String, AggFn)>,
    ) -> Result<Self> {
        let schema = Schema {
            join_attrs,
            local_attrs,
            agg_attrs,
        };
        if schema.d() == 0 {
            return Err(Error::InvalidSchema(
                "at least one skyline attribute is required".into(),
            ));
        }
        let mut seen = HashSet::new();
        let names = schema
            .join_attrs
            .iter()
            .chain(&schema.local_attrs)
            .chain(schema.agg_attrs.iter().map(|(n, _)| n));
        for name in names {
            if name.trim().is_empty() {
                return Err(Error::InvalidSchema("empty attribute name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidSchema(format!(
                    "duplicate attribute name {name:?}"
                )));
            }
        }
        Ok(schema)
    }

    /// Schema with generated attribute names: `key1..`, `s1..`, `g1..`.
    pub fn anonymous(m: usize, l: usize, agg_fns: &[AggFn]) -> Result<Self> {
        Schema::new(
            (1..=m).map(|i| format!("key{i}")).collect(),
            (1..=l).map(|i| format!("s{i}")).collect(),
            agg_fns
                .iter()
                .enumerate()
                .map(|(i, &f)| (format!("g{}", i + 1), f))
                .collect(),
        )
    }

    pub fn m(&self) -> usize {
        self.join_attrs.len()
    }

    pub fn l(&self) -> usize {
        self.local_attrs.len()
    }

    pub fn a(&self) -> usize {
        self.agg_attrs.len()
    }

    pub fn d(&self) -> usize {
        self.l() + self.a()
    }

    pub fn agg_fns(&self) -> Vec<AggFn> {
        self.agg_attrs.iter().map(|&(_, f)| f).collect()
    }

    /// Names of the skyline positions in storage order.
    pub fn sky_names(&self) -> impl Iterator<Item = &str> {
        self.local_attrs
            .iter()
            .map(String::as_str)
            .chain(self.agg_attrs.iter().map(|(n, _)| n.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tuple {
    pub id: TupleId,
    pub join_key: Vec<JoinValue>,
    pub sky: Vec<f64>,
}

impl Tuple {
    pub fn new(id: u64, join_key: Vec<JoinValue>, sky: Vec<f64>) -> Self {
        Tuple {
            id: TupleId(id),
            join_key,
            sky,
        }
    }
}

/// Tuples sharing one join-key value.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub key: Vec<JoinValue>,
    /// Tuple positions, ascending.
    pub members: Vec<usize>,
}

/// A validated, schema-tagged collection of tuples with its group index.
///
/// Groups are ordered by key; every tuple belongs to exactly one group.
#[derive(Debug, Clone)]
pub struct Relation {
    schema: Schema,
    tuples: Vec<Tuple>,
    groups: Vec<Group>,
    group_of: Vec<usize>,
    positions: HashMap<TupleId, usize>,
}

impl PartialEq for Relation {
    fn eq(&self, other: &Self) -> bool {
        self.schema == other.schema && self.tuples == other.tuples
    }
}

impl Relation {
    pub fn new(schema: Schema, tuples: Vec<Tuple>) -> Result<Self> {
        let d = schema.d();
        let m = schema.m();
        let mut positions = HashMap::with_capacity(tuples.len());
        for (pos, t) in tuples.iter().enumerate() {
            if t.sky.len() != d {
                return Err(Error::InvalidTuple {
                    id: t.id,
                    msg: format!("expected {d} skyline values, found {}", t.sky.len()),
                });
            }
            if t.join_key.len() != m {
                return Err(Error::InvalidTuple {
                    id: t.id,
                    msg: format!("expected {m} join values, found {}", t.join_key.len()),
                });
            }
            if let Some(position) = t.sky.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { id: t.id, position });
            }
            if positions.insert(t.id, pos).is_some() {
                return Err(Error::DuplicateId(t.id));
            }
        }
        let (groups, group_of) = build_groups(&tuples);
        Ok(Relation {
            schema,
            tuples,
            groups,
            group_of,
            positions,
        })
    }

    pub fn empty(schema: Schema) -> Self {
        Relation::new(schema, Vec::new()).expect("empty relation is valid")
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn into_tuples(self) -> Vec<Tuple> {
        self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    #[inline]
    pub fn tuple(&self, pos: usize) -> &Tuple {
        &self.tuples[pos]
    }

    #[inline]
    pub fn sky(&self, pos: usize) -> &[f64] {
        &self.tuples[pos].sky
    }

    #[inline]
    pub fn id(&self, pos: usize) -> TupleId {
        self.tuples[pos].id
    }

    pub fn position(&self, id: TupleId) -> Result<usize> {
        self.positions.get(&id).copied().ok_or(Error::UnknownId(id))
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    /// Index into [`Relation::groups`] of the tuple at `pos`.
    #[inline]
    pub fn group_of(&self, pos: usize) -> usize {
        self.group_of[pos]
    }

    /// Same relation with the join attributes dropped, so that every tuple
    /// falls into a single group.
    pub fn without_join_attrs(&self) -> Relation {
        let schema = Schema {
            join_attrs: Vec::new(),
            ..self.schema.clone()
        };
        let tuples = self
            .tuples
            .iter()
            .map(|t| Tuple {
                join_key: Vec::new(),
                ..t.clone()
            })
            .collect();
        Relation::new(schema, tuples).expect("dropping join attributes keeps validity")
    }
}

fn build_groups(tuples: &[Tuple]) -> (Vec<Group>, Vec<usize>) {
    let mut by_key: BTreeMap<&[JoinValue], Vec<usize>> = BTreeMap::new();
    for (pos, t) in tuples.iter().enumerate() {
        by_key.entry(&t.join_key).or_default().push(pos);
    }
    let mut group_of = vec![0; tuples.len()];
    let groups = by_key
        .into_iter()
        .enumerate()
        .map(|(g, (key, members))| {
            for &pos in &members {
                group_of[pos] = g;
            }
            Group {
                key: key.to_vec(),
                members,
            }
        })
        .collect();
    (groups, group_of)
}

/// The group index by tuple id: each distinct join key mapped to the ids
/// holding it.
pub fn group_by_join_key(relation: &Relation) -> BTreeMap<Vec<JoinValue>, Vec<TupleId>> {
    relation
        .groups()
        .iter()
        .map(|g| {
            (
                g.key.clone(),
                g.members.iter().map(|&p| relation.id(p)).collect(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Schema {
        Schema::anonymous(1, 2, &[]).unwrap()
    }

    #[test]
    fn join_values_canonicalise() {
        assert_eq!(JoinValue::parse(" 3 "), JoinValue::parse("3.0"));
        assert_eq!(JoinValue::parse("-0"), JoinValue::parse("0"));
        assert_eq!(JoinValue::parse(" C "), JoinValue::Text("C".into()));
        assert_ne!(JoinValue::parse("C"), JoinValue::parse("c"));
        assert!(JoinValue::parse("2") < JoinValue::parse("10"));
        assert!(JoinValue::parse("NaN").as_number().is_none());
    }

    #[test]
    fn rejects_invalid_tuples() {
        let dup = vec![
            Tuple::new(1, vec!["a".into()], vec![1.0, 2.0]),
            Tuple::new(1, vec!["b".into()], vec![1.0, 2.0]),
        ];
        assert!(matches!(
            Relation::new(schema(), dup),
            Err(Error::DuplicateId(TupleId(1)))
        ));
        let short = vec![Tuple::new(1, vec!["a".into()], vec![1.0])];
        assert!(Relation::new(schema(), short).is_err());
        let nan = vec![Tuple::new(1, vec!["a".into()], vec![1.0, f64::NAN])];
        assert!(matches!(
            Relation::new(schema(), nan),
            Err(Error::NonFinite { position: 1, .. })
        ));
    }

    #[test]
    fn schema_validation() {
        assert!(Schema::anonymous(1, 0, &[]).is_err());
        assert!(Schema::new(vec!["x".into()], vec!["x".into()], vec![]).is_err());
        let s = Schema::anonymous(0, 2, &[AggFn::Sum, AggFn::Min]).unwrap();
        assert_eq!((s.m(), s.l(), s.a(), s.d()), (0, 2, 2, 4));
    }

    #[test]
    fn grouping_partitions_tuples() {
        let tuples = vec![
            Tuple::new(5, vec!["b".into()], vec![1.0, 2.0]),
            Tuple::new(6, vec!["a".into()], vec![1.0, 2.0]),
            Tuple::new(7, vec!["b".into()], vec![1.0, 2.0]),
        ];
        let r = Relation::new(schema(), tuples).unwrap();
        let idx = group_by_join_key(&r);
        assert_eq!(idx.len(), 2);
        assert_eq!(idx[&vec![JoinValue::from("a")]], vec![TupleId(6)]);
        assert_eq!(
            idx[&vec![JoinValue::from("b")]],
            vec![TupleId(5), TupleId(7)]
        );
        assert_eq!(r.group_of(0), r.group_of(2));
        assert!(group_by_join_key(&Relation::empty(schema())).is_empty());
        assert_eq!(r.without_join_attrs().groups().len(), 1);
    }
}
