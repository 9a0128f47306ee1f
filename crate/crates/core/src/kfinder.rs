//! Choosing k from a cardinality threshold δ.
//!
//! The answer size never shrinks as k grows, so the smallest k with at
//! least δ answers can be found by a linear scan or by bisection. The
//! cross-set sizes of the SS/SN labels bound the answer size from both
//! sides and often settle a probe without running the query.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::engine::{bounds_of, run, Algorithm, Classified, Prepared, QueryConfig};
use crate::error::{Error, Result};
use crate::relation::Relation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SearchMethod {
    Naive,
    Range,
    Binary,
}

impl SearchMethod {
    pub const ALL: [SearchMethod; 3] = [
        SearchMethod::Naive,
        SearchMethod::Range,
        SearchMethod::Binary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SearchMethod::Naive => "naive",
            SearchMethod::Range => "range",
            SearchMethod::Binary => "binary",
        }
    }
}

impl fmt::Display for SearchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SearchMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "naive" => Ok(SearchMethod::Naive),
            "range" => Ok(SearchMethod::Range),
            "binary" => Ok(SearchMethod::Binary),
            other => Err(Error::InvalidConfig(format!(
                "unknown search method {other:?}"
            ))),
        }
    }
}

/// Whether δ is a floor or a ceiling on the answer size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SearchMode {
    /// Smallest k with at least δ answers.
    AtLeast,
    /// Largest k with at most δ answers.
    AtMost,
}

impl FromStr for SearchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "at-least" | "atleast" | "at_least" => Ok(SearchMode::AtLeast),
            "at-most" | "atmost" | "at_most" => Ok(SearchMode::AtMost),
            other => Err(Error::InvalidConfig(format!(
                "unknown search mode {other:?}"
            ))),
        }
    }
}

/// One probed k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Probe {
    pub k: usize,
    /// `(lb, ub)` when the bounds were consulted.
    pub bounds: Option<(usize, usize)>,
    /// Exact answer size, unless the bounds settled the probe.
    pub exact: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSearchResult {
    pub k: usize,
    pub delta: usize,
    /// `|answer(k)|` when the search computed it.
    pub skyline_count: Option<usize>,
    pub trace: Vec<Probe>,
    pub method: SearchMethod,
    pub mode: SearchMode,
    /// The maximum k was returned because no probe reached δ.
    pub defaulted: bool,
}

/// `(|SS1⋈SS2|, |SS1⋈SS2| + |SS1⋈SN2| + |SN1⋈SS2| + |SN1⋈SN2|)` for
/// `config.k`, from the labels alone.
pub fn count_bounds(r1: &Relation, r2: &Relation, config: &QueryConfig) -> Result<(usize, usize)> {
    let prep = Prepared::new(r1, r2, config)?;
    Ok(bounds_of(&prep.classify(config.k)?.counts))
}

/// Probing state of one search; labels are cached per k.
struct Search<'a> {
    prep: Prepared<'a>,
    algorithm: Algorithm,
    delta: usize,
    labels: HashMap<usize, Classified>,
    exact: HashMap<usize, usize>,
    trace: Vec<Probe>,
}

impl<'a> Search<'a> {
    fn new(r1: &'a Relation, r2: &'a Relation, delta: usize, config: &QueryConfig) -> Result<Self> {
        let prep = Prepared::without_k(r1, r2, config)?;
        let (min, max) = (prep.k_min(), prep.d());
        if min > max {
            return Err(Error::KOutOfRange { k: min, min, max });
        }
        Ok(Search {
            prep,
            algorithm: config.algorithm,
            delta,
            labels: HashMap::new(),
            exact: HashMap::new(),
            trace: Vec::new(),
        })
    }

    fn classified(&mut self, k: usize) -> Result<&Classified> {
        if !self.labels.contains_key(&k) {
            let c = self.prep.classify(k)?;
            self.labels.insert(k, c);
        }
        Ok(&self.labels[&k])
    }

    fn bounds(&mut self, k: usize) -> Result<(usize, usize)> {
        Ok(self.classified(k)?.bounds())
    }

    fn count(&mut self, k: usize) -> Result<usize> {
        if let Some(&c) = self.exact.get(&k) {
            return Ok(c);
        }
        if self.algorithm != Algorithm::Naive {
            self.classified(k)?;
        }
        let n = run(&self.prep, k, self.algorithm, self.labels.get(&k))?.len();
        self.exact.insert(k, n);
        Ok(n)
    }

    /// Whether `|answer(k)| >= delta`, consulting the bounds first when
    /// `use_bounds` is set.
    fn reaches(&mut self, k: usize, use_bounds: bool) -> Result<bool> {
        let mut probe = Probe {
            k,
            bounds: None,
            exact: None,
        };
        let ok = if use_bounds {
            let (lb, ub) = self.bounds(k)?;
            probe.bounds = Some((lb, ub));
            if lb >= self.delta {
                true
            } else if ub < self.delta {
                false
            } else {
                let n = self.count(k)?;
                probe.exact = Some(n);
                n >= self.delta
            }
        } else {
            let n = self.count(k)?;
            probe.exact = Some(n);
            n >= self.delta
        };
        self.trace.push(probe);
        Ok(ok)
    }

    fn finish(
        self,
        k: usize,
        method: SearchMethod,
        mode: SearchMode,
        defaulted: bool,
    ) -> KSearchResult {
        KSearchResult {
            k,
            delta: self.delta,
            skyline_count: self.exact.get(&k).copied(),
            trace: self.trace,
            method,
            mode,
            defaulted,
        }
    }

    /// Linear scan from the smallest k; the maximum is returned unprobed.
    fn linear(&mut self, use_bounds: bool) -> Result<(usize, bool)> {
        let (min, max) = (self.prep.k_min(), self.prep.d());
        for k in min..max {
            if self.reaches(k, use_bounds)? {
                return Ok((k, false));
            }
        }
        Ok((max, true))
    }

    fn binary(&mut self) -> Result<(usize, bool)> {
        let (mut lo, mut hi) = (self.prep.k_min(), self.prep.d());
        let mut best = hi;
        let mut found = false;
        while lo <= hi && lo < best {
            let mid = lo + (hi - lo) / 2;
            if self.reaches(mid, true)? {
                best = mid;
                found = true;
                hi = mid - 1;
            } else {
                lo = mid + 1;
            }
        }
        Ok((best, !found))
    }
}

/// Smallest k with at least `delta` answers, computing every probe exactly.
pub fn find_k_naive(
    r1: &Relation,
    r2: &Relation,
    delta: usize,
    config: &QueryConfig,
) -> Result<KSearchResult> {
    let mut s = Search::new(r1, r2, delta, config)?;
    let (k, defaulted) = s.linear(false)?;
    Ok(s.finish(k, SearchMethod::Naive, SearchMode::AtLeast, defaulted))
}

/// As [`find_k_naive`], settling probes from the bounds where possible.
pub fn find_k_range(
    r1: &Relation,
    r2: &Relation,
    delta: usize,
    config: &QueryConfig,
) -> Result<KSearchResult> {
    let mut s = Search::new(r1, r2, delta, config)?;
    let (k, defaulted) = s.linear(true)?;
    Ok(s.finish(k, SearchMethod::Range, SearchMode::AtLeast, defaulted))
}

/// As [`find_k_naive`], bisecting the admissible range.
pub fn find_k_binary(
    r1: &Relation,
    r2: &Relation,
    delta: usize,
    config: &QueryConfig,
) -> Result<KSearchResult> {
    let mut s = Search::new(r1, r2, delta, config)?;
    let (k, defaulted) = s.binary()?;
    Ok(s.finish(k, SearchMethod::Binary, SearchMode::AtLeast, defaulted))
}

pub fn find_k(
    r1: &Relation,
    r2: &Relation,
    delta: usize,
    method: SearchMethod,
    config: &QueryConfig,
) -> Result<KSearchResult> {
    match method {
        SearchMethod::Naive => find_k_naive(r1, r2, delta, config),
        SearchMethod::Range => find_k_range(r1, r2, delta, config),
        SearchMethod::Binary => find_k_binary(r1, r2, delta, config),
    }
}

/// Largest k with at most `delta` answers, or the smallest admissible k
/// when even that yields more.
///
/// Starts from `k*`, the binary-search answer for at least `delta`. Below
/// `k*` every count is under `delta`, so `k* - 1` is the answer whenever
/// `|answer(k*)| > delta`. Otherwise the counts from `k*` upward are
/// scanned while they stay at most `delta`.
pub fn find_k_at_most(
    r1: &Relation,
    r2: &Relation,
    delta: usize,
    config: &QueryConfig,
) -> Result<KSearchResult> {
    let mut s = Search::new(r1, r2, delta, config)?;
    let (k_star, _) = s.binary()?;
    let (min, max) = (s.prep.k_min(), s.prep.d());
    let at_star = s.count(k_star)?;
    s.trace.push(Probe {
        k: k_star,
        bounds: None,
        exact: Some(at_star),
    });
    let k = if at_star > delta {
        k_star.saturating_sub(1).max(min)
    } else {
        let mut k = k_star;
        while k < max {
            let n = s.count(k + 1)?;
            s.trace.push(Probe {
                k: k + 1,
                bounds: None,
                exact: Some(n),
            });
            if n > delta {
                break;
            }
            k += 1;
        }
        k
    };
    let defaulted = k == min && at_star > delta;
    Ok(s.finish(k, SearchMethod::Binary, SearchMode::AtMost, defaulted))
}
