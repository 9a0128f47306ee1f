use ksjq::data::{fixture, generate, DatasetSpec, Distribution};
use ksjq::kfinder::{find_k, SearchMode};
use ksjq::oracle::{oracle_counts, oracle_find_k_from};
use ksjq::{count_bounds, find_k_at_most, JoinCondition, QueryConfig, SearchMethod};

#[test]
fn methods_match_oracle_on_random_instances() {
    for seed in 0..24u64 {
        let dist = Distribution::ALL[seed as usize % 3];
        let a = (seed % 3) as usize;
        let spec = |s| DatasetSpec::new(25, 4, a, 1 + (seed % 4) as usize, dist, s);
        let (r1, r2) = (
            generate(&spec(seed)).unwrap(),
            generate(&spec(seed + 500)).unwrap(),
        );
        let cfg = QueryConfig::new(0).with_aggregate(a > 0);
        let counts = oracle_counts(&r1, &r2, &cfg);
        let full = counts.last().unwrap().1;
        for delta in [1, 10, full / 2, full, full + 1] {
            let want = oracle_find_k_from(&counts, delta, SearchMode::AtLeast);
            for m in [
                SearchMethod::Naive,
                SearchMethod::Range,
                SearchMethod::Binary,
            ] {
                let got = find_k(&r1, &r2, delta, m, &cfg).unwrap();
                assert_eq!(got.k, want, "seed={seed} delta={delta} {m:?}");
            }
            let most = find_k_at_most(&r1, &r2, delta, &cfg).unwrap();
            assert_eq!(
                most.k,
                oracle_find_k_from(&counts, delta, SearchMode::AtMost),
                "seed={seed} delta={delta}"
            );
        }
        for &(k, n) in &counts {
            let (lb, ub) = count_bounds(&r1, &r2, &cfg.with_k(k)).unwrap();
            assert!(lb <= n && n <= ub, "seed={seed} k={k}: {lb} <= {n} <= {ub}");
        }
    }
}

#[test]
fn lt_condition_agrees() {
    for seed in 0..8u64 {
        let spec = |s| DatasetSpec::new(20, 3, 0, 4, Distribution::Independent, s);
        let (r1, r2) = (
            generate(&spec(seed)).unwrap(),
            generate(&spec(seed + 50)).unwrap(),
        );
        let cfg = QueryConfig::new(0).with_condition(JoinCondition::Lt);
        let counts = oracle_counts(&r1, &r2, &cfg);
        for delta in [1, 5, 50] {
            let got = find_k(&r1, &r2, delta, SearchMethod::Binary, &cfg).unwrap();
            assert_eq!(
                got.k,
                oracle_find_k_from(&counts, delta, SearchMode::AtLeast)
            );
        }
    }
}

#[test]
fn flight_fixture_counts() {
    let (r1, r2) = (fixture::flights_from_a(), fixture::flights_to_b());
    let cfg = QueryConfig::new(0);
    let counts = oracle_counts(&r1, &r2, &cfg);
    for delta in 0..=14 {
        let got = find_k(&r1, &r2, delta, SearchMethod::Binary, &cfg).unwrap();
        assert_eq!(
            got.k,
            oracle_find_k_from(&counts, delta, SearchMode::AtLeast),
            "delta={delta}"
        );
    }
}
