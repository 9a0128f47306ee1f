//! Synthetic relations, CSV persistence and the flight fixture.

mod csv_io;
pub mod fixture;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};

use crate::error::{Error, Result};
use crate::relation::{AggFn, JoinValue, Relation, Schema, Tuple};

pub use csv_io::{read_csv, read_csv_from, write_csv, write_csv_to};

/// Name recorded in the `# gen=` metadata line of generated files.
pub const GENERATOR: &str = "chacha8";

/// Constants of the correlated and anti-correlated constructions.
///
/// Correlated: a per-tuple level is the mean of `CORRELATED_PEAK_SAMPLES`
/// uniforms; each coordinate is the level plus `N(0, CORRELATED_SPREAD)`,
/// redrawn until it lies in `[0, 1)`.
///
/// Anti-correlated: a per-tuple level is drawn from
/// `N(0.5, ANTICORRELATED_LEVEL_SD)` (redrawn until in `[0, 1)`); the
/// coordinates are the level plus zero-mean offsets, uniform in `±w` with
/// `w = min(level, 1 - level)` and re-centred so the coordinates sum to
/// `d * level`. Vectors leaving `[0, 1)` are redrawn with a fresh level.
pub mod constants {
    pub const CORRELATED_PEAK_SAMPLES: usize = 4;
    pub const CORRELATED_SPREAD: f64 = 0.05;
    pub const ANTICORRELATED_LEVEL_SD: f64 = 0.05;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Distribution {
    Independent,
    Correlated,
    Anticorrelated,
}

impl Distribution {
    pub const ALL: [Distribution; 3] = [
        Distribution::Independent,
        Distribution::Correlated,
        Distribution::Anticorrelated,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Distribution::Independent => "independent",
            Distribution::Correlated => "correlated",
            Distribution::Anticorrelated => "anticorrelated",
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "independent" | "i" | "indep" => Ok(Distribution::Independent),
            "correlated" | "c" | "corr" => Ok(Distribution::Correlated),
            "anticorrelated" | "anti-correlated" | "a" | "anti" => Ok(Distribution::Anticorrelated),
            other => Err(Error::InvalidSpec(format!(
                "unknown distribution {other:?}"
            ))),
        }
    }
}

/// Parameters of one synthetic base relation.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub n: usize,
    /// Skyline attributes, aggregate components included.
    pub d: usize,
    /// Aggregate components among the `d` attributes.
    pub a: usize,
    /// Number of distinct join-key values.
    pub g: usize,
    pub dist: Distribution,
    pub seed: u64,
    pub agg_fn: AggFn,
}

impl DatasetSpec {
    pub fn new(n: usize, d: usize, a: usize, g: usize, dist: Distribution, seed: u64) -> Self {
        DatasetSpec {
            n,
            d,
            a,
            g,
            dist,
            seed,
            agg_fn: AggFn::Sum,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidSpec("d must be at least 1".into()));
        }
        if self.a > self.d {
            return Err(Error::InvalidSpec(format!(
                "a = {} exceeds d = {}",
                self.a, self.d
            )));
        }
        if self.g == 0 {
            return Err(Error::InvalidSpec("g must be at least 1".into()));
        }
        Ok(())
    }

    pub fn schema(&self) -> Result<Schema> {
        Schema::new(
            vec!["key".into()],
            (1..=self.d - self.a).map(|i| format!("s{i}")).collect(),
            (1..=self.a)
                .map(|i| (format!("g{i}"), self.agg_fn))
                .collect(),
        )
    }

    /// `# ...` lines identifying the generator, written ahead of the header.
    pub fn metadata(&self) -> Vec<String> {
        vec![
            format!("gen={GENERATOR} seed={}", self.seed),
            format!(
                "n={} d={} a={} g={} dist={} agg={}",
                self.n,
                self.d,
                self.a,
                self.g,
                self.dist,
                self.agg_fn.name()
            ),
        ]
    }
}

/// Deterministic synthetic relation: values in `[0, 1)`, join key uniform
/// over `0..g`, ids `0..n`.
pub fn generate(spec: &DatasetSpec) -> Result<Relation> {
    spec.validate()?;
    let schema = spec.schema()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let tuples = (0..spec.n)
        .map(|i| {
            let key = rng.random_range(0..spec.g) as f64;
            let sky = match spec.dist {
                Distribution::Independent => independent(&mut rng, spec.d),
                Distribution::Correlated => correlated(&mut rng, spec.d),
                Distribution::Anticorrelated => anticorrelated(&mut rng, spec.d),
            };
            Tuple::new(i as u64, vec![JoinValue::number(key)], sky)
        })
        .collect();
    Relation::new(schema, tuples)
}

fn independent(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random::<f64>()).collect()
}

fn correlated(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    use constants::*;
    let level = (0..CORRELATED_PEAK_SAMPLES)
        .map(|_| rng.random::<f64>())
        .sum::<f64>()
        / CORRELATED_PEAK_SAMPLES as f64;
    let noise = Normal::new(0.0, CORRELATED_SPREAD).expect("valid normal");
    (0..d)
        .map(|_| loop {
            let x = level + noise.sample(rng);
            if (0.0..1.0).contains(&x) {
                break x;
            }
        })
        .collect()
}

fn anticorrelated(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    use constants::*;
    let level_dist = Normal::new(0.5, ANTICORRELATED_LEVEL_SD).expect("valid normal");
    loop {
        let level = level_dist.sample(rng);
        if !(0.0..1.0).contains(&level) {
            continue;
        }
        let w = level.min(1.0 - level);
        let offsets: Vec<f64> = (0..d).map(|_| rng.random_range(-w..=w)).collect();
        let mean = offsets.iter().sum::<f64>() / d as f64;
        let v: Vec<f64> = offsets.iter().map(|o| level + o - mean).collect();
        if v.iter().all(|x| (0.0..1.0).contains(x)) {
            return v;
        }
    }
}
