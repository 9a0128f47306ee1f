//! Two-legged flight fixture: flights from city A to a stop-over city and
//! flights from the stop-over city to city B, joined on the stop-over.
//!
//! Attributes are cost, duration, rating and amenities, all lower-preferred.
//! The `_agg` variants carry cost as a SUM aggregate component.

use crate::data::read_csv_from;
use crate::relation::Relation;

pub const FLIGHTS_A_CSV: &str = include_str!("../../fixtures/flights_a.csv");
pub const FLIGHTS_B_CSV: &str = include_str!("../../fixtures/flights_b.csv");
pub const FLIGHTS_A_AGG_CSV: &str = include_str!("../../fixtures/flights_a_agg.csv");
pub const FLIGHTS_B_AGG_CSV: &str = include_str!("../../fixtures/flights_b_agg.csv");

fn load(text: &str, name: &str) -> Relation {
    read_csv_from(text.as_bytes(), name).expect("bundled fixture parses")
}

/// Flights 11..=19.
pub fn flights_from_a() -> Relation {
    load(FLIGHTS_A_CSV, "flights_a.csv")
}

/// Flights 21..=28.
pub fn flights_to_b() -> Relation {
    load(FLIGHTS_B_CSV, "flights_b.csv")
}

pub fn flights_from_a_agg() -> Relation {
    load(FLIGHTS_A_AGG_CSV, "flights_a_agg.csv")
}

pub fn flights_to_b_agg() -> Relation {
    load(FLIGHTS_B_AGG_CSV, "flights_b_agg.csv")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::{group_by_join_key, JoinValue, TupleId};

    #[test]
    fn groups_by_destination() {
        let idx = group_by_join_key(&flights_from_a());
        let ids = |k: &str| {
            idx[&vec![JoinValue::from(k)]]
                .iter()
                .map(|t| t.0)
                .collect::<Vec<_>>()
        };
        assert_eq!(idx.len(), 6);
        assert_eq!(ids("C"), vec![11, 12]);
        assert_eq!(ids("D"), vec![13, 14]);
        assert_eq!(ids("E"), vec![15, 19]);
        assert_eq!(ids("F"), vec![16]);
        assert_eq!(ids("G"), vec![17]);
        assert_eq!(ids("H"), vec![18]);
    }

    #[test]
    fn flight_28_amenities() {
        let r = flights_to_b();
        let t = r.tuple(r.position(TupleId(28)).unwrap());
        assert_eq!(t.sky, vec![350.0, 2.4, 35.0, 39.0]);
    }

    #[test]
    fn aggregate_variant_moves_cost_last() {
        let r = flights_from_a_agg();
        assert_eq!(r.schema().a(), 1);
        assert_eq!(r.tuple(0).sky, vec![3.2, 40.0, 40.0, 448.0]);
    }
}
