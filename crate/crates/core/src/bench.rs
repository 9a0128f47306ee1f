//! Parameter sweeps with per-phase timings.
//!
//! A sweep file holds `key = value` or `key = v1,v2,...` lines; `#` starts
//! a comment. The grid is the Cartesian product of all lists. Keys and
//! their defaults:
//!
//! ```text
//! n = 3300
//! d = 7
//! k = 11
//! a = 2
//! g = 10
//! dist = independent
//! algo = grouping          # naive, grouping, dominator, cartesian,
//!                          # k-naive, k-range, k-binary
//! reps = 1
//! seed = 1
//! delta = 10               # thresholds for the k-* algorithms
//! cond = eq
//! ```
//!
//! Each grid point generates the left relation from `seed` and the right
//! one from `seed + 1`. Rows whose k is outside the admissible range of
//! their point are skipped. The k-* algorithms ignore `k` and report the
//! selected k; their `algo` column carries the threshold as `k-binary:10`.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::data::{generate, DatasetSpec, Distribution};
use crate::engine::{ksjq, Algorithm, QueryConfig, Timings};
use crate::error::{Error, Result};
use crate::kfinder::{count_bounds, find_k, SearchMethod};
use crate::relation::{JoinCondition, Relation};

pub const HEADER: &str =
    "n,d,k,a,g,dist,algo,rep,total_ms,group_ms,join_ms,dominator_ms,rest_ms,count,lb,ub";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchAlgo {
    Query(Algorithm),
    FindK(SearchMethod),
}

impl fmt::Display for BenchAlgo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchAlgo::Query(a) => write!(f, "{a}"),
            BenchAlgo::FindK(m) => write!(f, "k-{m}"),
        }
    }
}

impl FromStr for BenchAlgo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().strip_prefix("k-") {
            Some(m) => Ok(BenchAlgo::FindK(m.parse()?)),
            None => Ok(BenchAlgo::Query(s.parse()?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n: Vec<usize>,
    pub d: Vec<usize>,
    pub k: Vec<usize>,
    pub a: Vec<usize>,
    pub g: Vec<usize>,
    pub dist: Vec<Distribution>,
    pub algo: Vec<BenchAlgo>,
    pub reps: usize,
    pub seed: u64,
    pub delta: Vec<usize>,
    pub cond: JoinCondition,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n: vec![3300],
            d: vec![7],
            k: vec![11],
            a: vec![2],
            g: vec![10],
            dist: vec![Distribution::Independent],
            algo: vec![BenchAlgo::Query(Algorithm::Grouping)],
            reps: 1,
            seed: 1,
            delta: vec![10],
            cond: JoinCondition::Equality,
        }
    }
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|e| Error::InvalidConfig(format!("{key}: bad value {s:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::InvalidConfig(format!("{key}: empty list")));
    }
    Ok(items)
}

fn single<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    let mut v = list(key, value)?;
    if v.len() != 1 {
        return Err(Error::InvalidConfig(format!("{key} takes a single value")));
    }
    Ok(v.remove(0))
}

impl FromStr for SweepConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected `key = value`", i + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let at = |e: Error| Error::InvalidConfig(format!("line {}: {e}", i + 1));
            match key {
                "n" => cfg.n = list(key, value).map_err(at)?,
                "d" => cfg.d = list(key, value).map_err(at)?,
                "k" => cfg.k = list(key, value).map_err(at)?,
                "a" => cfg.a = list(key, value).map_err(at)?,
                "g" => cfg.g = list(key, value).map_err(at)?,
                "dist" => cfg.dist = list(key, value).map_err(at)?,
                "algo" => cfg.algo = list(key, value).map_err(at)?,
                "reps" | "repetitions" => cfg.reps = single(key, value).map_err(at)?,
                "seed" => cfg.seed = single(key, value).map_err(at)?,
                "delta" => cfg.delta = list(key, value).map_err(at)?,
                "cond" => cfg.cond = single(key, value).map_err(at)?,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "line {}: unknown key {other:?}",
                        i + 1
                    )))
                }
            }
        }
        Ok(cfg)
    }
}

/// One dataset pair of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DataPoint {
    pub n: usize,
    pub d: usize,
    pub a: usize,
    pub g: usize,
    pub dist: Distribution,
}

/// One row-producing run: a dataset pair, an algorithm, a k or a δ, and a
/// repetition index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub data: DataPoint,
    pub algo: BenchAlgo,
    pub k: Option<usize>,
    pub delta: Option<usize>,
    pub rep: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub data: DataPoint,
    pub k: usize,
    pub algo: String,
    pub rep: usize,
    pub total_ms: f64,
    pub timings: Timings,
    pub count: Option<usize>,
    pub lb: usize,
    pub ub: usize,
}

impl BenchRow {
    pub fn csv(&self) -> String {
        let p = &self.data;
        let t = &self.timings;
        format!(
            "{},{},{},{},{},{},{},{},{:.3},{:.3},{:.3},{:.3},{:.3},{},{},{}",
            p.n,
            p.d,
            self.k,
            p.a,
            p.g,
            p.dist,
            self.algo,
            self.rep,
            self.total_ms,
            t.group_ms,
            t.join_ms,
            t.dominator_ms,
            t.rest_ms,
            self.count.map_or(String::new(), |c| c.to_string()),
            self.lb,
            self.ub
        )
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        for &d in &self.d {
            for &a in &self.a {
                if d == 0 || a > d {
                    return Err(Error::InvalidConfig(format!("a = {a} with d = {d}")));
                }
            }
        }
        if self.g.contains(&0) {
            return Err(Error::InvalidConfig("g must be at least 1".into()));
        }
        Ok(())
    }

    pub fn data_points(&self) -> Vec<DataPoint> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &d in &self.d {
                for &a in &self.a {
                    for &g in &self.g {
                        for &dist in &self.dist {
                            out.push(DataPoint { n, d, a, g, dist });
                        }
                    }
                }
            }
        }
        out
    }

    /// Admissible k of a data point, as `(k_min, k_max)`.
    pub fn k_bounds(p: &DataPoint) -> (usize, usize) {
        (p.d + 1, 2 * (p.d - p.a) + p.a)
    }

    /// Every run in output order; out-of-range k values are dropped.
    pub fn runs(&self) -> Vec<Run> {
        let mut out = Vec::new();
        for data in self.data_points() {
            let (k_min, k_max) = Self::k_bounds(&data);
            for &algo in &self.algo {
                let params: Vec<(Option<usize>, Option<usize>)> = match algo {
                    BenchAlgo::Query(_) => self
                        .k
                        .iter()
                        .filter(|&&k| (k_min..=k_max).contains(&k))
                        .map(|&k| (Some(k), None))
                        .collect(),
                    BenchAlgo::FindK(_) if k_min <= k_max => {
                        self.delta.iter().map(|&d| (None, Some(d))).collect()
                    }
                    BenchAlgo::FindK(_) => Vec::new(),
                };
                for (k, delta) in params {
                    for rep in 0..self.reps {
                        out.push(Run {
                            data,
                            algo,
                            k,
                            delta,
                            rep,
                        });
                    }
                }
            }
        }
        out
    }
}

fn relations(p: &DataPoint, seed: u64) -> Result<(Relation, Relation)> {
    let spec = DatasetSpec::new(p.n, p.d, p.a, p.g, p.dist, seed);
    let right = DatasetSpec {
        seed: seed.wrapping_add(1),
        ..spec.clone()
    };
    Ok((generate(&spec)?, generate(&right)?))
}

fn execute(run: &Run, r1: &Relation, r2: &Relation, cond: JoinCondition) -> Result<BenchRow> {
    let base = QueryConfig::new(run.k.unwrap_or(0))
        .with_aggregate(run.data.a > 0)
        .with_condition(cond);
    match run.algo {
        BenchAlgo::Query(algorithm) => {
            let cfg = base.with_algorithm(algorithm);
            let start = Instant::now();
            let ans = ksjq(r1, r2, &cfg)?;
            let total_ms = start.elapsed().as_secs_f64() * 1e3;
            let (lb, ub) = match ans.bounds() {
                Some(b) => b,
                None => count_bounds(r1, r2, &cfg)?,
            };
            Ok(BenchRow {
                data: run.data,
                k: cfg.k,
                algo: run.algo.to_string(),
                rep: run.rep,
                total_ms,
                timings: ans.timings,
                count: Some(ans.len()),
                lb,
                ub,
            })
        }
        BenchAlgo::FindK(method) => {
            let delta = run.delta.unwrap_or(1);
            let start = Instant::now();
            let res = find_k(r1, r2, delta, method, &base)?;
            let total_ms = start.elapsed().as_secs_f64() * 1e3;
            let (lb, ub) = count_bounds(r1, r2, &base.with_k(res.k))?;
            Ok(BenchRow {
                data: run.data,
                k: res.k,
                algo: format!("{}:{delta}", run.algo),
                rep: run.rep,
                total_ms,
                timings: Timings {
                    rest_ms: total_ms,
                    ..Timings::default()
                },
                count: res.skyline_count,
                lb,
                ub,
            })
        }
    }
}

/// Runs the sweep, writing the header and one row per run. With
/// `parallel`, runs execute concurrently; rows keep the sequential order.
pub fn run_sweep<W: Write>(cfg: &SweepConfig, mut out: W, parallel: bool) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    writeln!(out, "{HEADER}")?;
    let runs = cfg.runs();
    let mut data: HashMap<DataPoint, (Relation, Relation)> = HashMap::new();
    for r in &runs {
        if let std::collections::hash_map::Entry::Vacant(e) = data.entry(r.data) {
            e.insert(relations(&r.data, cfg.seed)?);
        }
    }
    let exec = |r: &Run| {
        let (r1, r2) = &data[&r.data];
        execute(r, r1, r2, cfg.cond)
    };
    let rows: Vec<BenchRow> = if parallel {
        runs.par_iter().map(exec).collect::<Result<_>>()?
    } else {
        runs.iter().map(exec).collect::<Result<_>>()?
    };
    for row in &rows {
        writeln!(out, "{}", row.csv())?;
    }
    out.flush()?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_grid() {
        let cfg: SweepConfig = "# effect of k\nn = 50, 60\nd = 3\nk = 4,5,6,9\na = 0\ng = 5\n\
                                dist = i, c\nalgo = naive, grouping, k-binary\nreps = 2\ndelta = 3\n"
            .parse()
            .unwrap();
        assert_eq!(cfg.n, vec![50, 60]);
        assert_eq!(cfg.data_points().len(), 4);
        // k = 9 is out of range for d = 3
        let runs = cfg.runs();
        assert_eq!(runs.len(), 4 * (2 * 3 + 1) * 2);
    }

    #[test]
    fn rejects_bad_config() {
        assert!("n 5".parse::<SweepConfig>().is_err());
        assert!("n = x".parse::<SweepConfig>().is_err());
        assert!("zz = 1".parse::<SweepConfig>().is_err());
        assert!("algo = fast".parse::<SweepConfig>().is_err());
        assert!("reps = 1,2".parse::<SweepConfig>().is_err());
        let cfg: SweepConfig = "d = 2\na = 3".parse().unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn zero_reps_is_header_only() {
        let cfg: SweepConfig = "n = 20\nd = 3\nk = 5\na = 0\nreps = 0".parse().unwrap();
        let mut buf = Vec::new();
        let rows = run_sweep(&cfg, &mut buf, false).unwrap();
        assert!(rows.is_empty());
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{HEADER}\n"));
    }

    #[test]
    fn rows_are_consistent() {
        let cfg: SweepConfig = "n = 40\nd = 3\nk = 4,5\na = 0,1\ng = 4\n\
                                algo = naive, grouping, dominator, k-range\nreps = 1\ndelta = 2"
            .parse()
            .unwrap();
        let mut buf = Vec::new();
        let rows = run_sweep(&cfg, &mut buf, false).unwrap();
        let mut par = Vec::new();
        let prows = run_sweep(&cfg, &mut par, true).unwrap();
        let key = |r: &BenchRow| (r.data, r.k, r.algo.clone(), r.count, r.lb, r.ub);
        assert_eq!(
            rows.iter().map(key).collect::<Vec<_>>(),
            prows.iter().map(key).collect::<Vec<_>>()
        );
        for r in &rows {
            let c = r.count.unwrap_or(r.lb);
            assert!(r.lb <= c && c <= r.ub, "{r:?}");
        }
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), rows.len() + 1);
        assert!(text.lines().skip(1).all(|l| l.split(',').count() == 16));
    }
}
