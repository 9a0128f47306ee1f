use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ksjq::bench::{run_sweep, SweepConfig};
use ksjq::data::{generate, read_csv, write_csv, DatasetSpec, Distribution};
use ksjq::engine::{joined_names, materialize};
use ksjq::kfinder::{find_k, SearchMode};
use ksjq::{
    find_k_at_most, ksjq as run_query, AggFn, Algorithm, JoinCondition, Label, QueryConfig,
    SearchMethod,
};

#[derive(Parser)]
#[command(name = "ksjq", version, about = "k-dominant skyline join queries")]
struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic relation as CSV.
    Generate(GenerateArgs),
    /// Run a k-dominant skyline join query.
    Run(RunArgs),
    /// Choose k for a cardinality threshold.
    FindK(FindKArgs),
    /// Run a benchmark sweep.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DistArg {
    Independent,
    Correlated,
    Anticorrelated,
}

impl From<DistArg> for Distribution {
    fn from(d: DistArg) -> Self {
        match d {
            DistArg::Independent => Distribution::Independent,
            DistArg::Correlated => Distribution::Correlated,
            DistArg::Anticorrelated => Distribution::Anticorrelated,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AggArg {
    Sum,
    Min,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Naive,
    Grouping,
    Dominator,
    Cartesian,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Naive => Algorithm::Naive,
            AlgoArg::Grouping => Algorithm::Grouping,
            AlgoArg::Dominator => Algorithm::Dominator,
            AlgoArg::Cartesian => Algorithm::Cartesian,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CondArg {
    Eq,
    Lt,
    Leq,
    Gt,
    Geq,
}

impl From<CondArg> for JoinCondition {
    fn from(c: CondArg) -> Self {
        match c {
            CondArg::Eq => JoinCondition::Equality,
            CondArg::Lt => JoinCondition::Lt,
            CondArg::Leq => JoinCondition::Leq,
            CondArg::Gt => JoinCondition::Gt,
            CondArg::Geq => JoinCondition::Geq,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Naive,
    Range,
    Binary,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    AtLeast,
    AtMost,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    /// Skyline attributes, aggregate components included.
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    a: usize,
    #[arg(long, default_value_t = 10)]
    g: usize,
    #[arg(long, value_enum, default_value = "independent")]
    dist: DistArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "sum")]
    agg: AggArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    left: PathBuf,
    right: PathBuf,
    /// Aggregate the trailing components instead of concatenating them.
    #[arg(long)]
    aggregate: bool,
    #[arg(long, value_enum, default_value = "eq")]
    cond: CondArg,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    query: QueryArgs,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value = "grouping")]
    algo: AlgoArg,
    /// Result CSV; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FindKArgs {
    #[command(flatten)]
    query: QueryArgs,
    #[arg(long)]
    delta: usize,
    #[arg(long, value_enum, default_value = "binary")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "at-least")]
    mode: ModeArg,
    /// Algorithm for exact counts.
    #[arg(long, value_enum, default_value = "grouping")]
    algo: AlgoArg,
}

#[derive(Args)]
struct BenchArgs {
    /// Sweep file of `key = v1,v2,...` lines.
    config: PathBuf,
    /// Output directory; rows go to `bench.csv` inside it.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Run grid points concurrently.
    #[arg(long)]
    parallel: bool,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = real_main(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn real_main(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Run(a) => cmd_run(a),
        Command::FindK(a) => cmd_find_k(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let spec = DatasetSpec {
        agg_fn: match a.agg {
            AggArg::Sum => AggFn::Sum,
            AggArg::Min => AggFn::Min,
        },
        ..DatasetSpec::new(a.n, a.d, a.a, a.g, a.dist.into(), a.seed)
    };
    let rel = generate(&spec)?;
    write_csv(&rel, &a.out, &spec.metadata())
        .with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}

fn load(q: &QueryArgs) -> Result<(ksjq::Relation, ksjq::Relation)> {
    let r1 = read_csv(&q.left).with_context(|| format!("reading {}", q.left.display()))?;
    let r2 = read_csv(&q.right).with_context(|| format!("reading {}", q.right.display()))?;
    Ok((r1, r2))
}

fn fmt_ms(x: f64) -> String {
    format!("{x:.3}")
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let (r1, r2) = load(&a.query)?;
    let cfg = QueryConfig::new(a.k)
        .with_aggregate(a.query.aggregate)
        .with_condition(a.query.cond.into())
        .with_algorithm(a.algo.into());
    let ans = run_query(&r1, &r2, &cfg)?;
    let rows = materialize(&r1, &r2, &ans.pairs, &cfg)?;
    let names = joined_names(&r1, &r2, cfg.aggregate)?;

    let mut results: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    writeln!(results, "left_id,right_id,{}", names.join(","))?;
    for t in &rows {
        let vals: Vec<String> = t.sky.iter().map(|x| x.to_string()).collect();
        writeln!(results, "{},{},{}", t.left_id, t.right_id, vals.join(","))?;
    }
    results.flush()?;
    drop(results);

    let mut stats: Box<dyn Write> = if a.out.is_some() {
        Box::new(io::stdout().lock())
    } else {
        Box::new(io::stderr().lock())
    };
    writeln!(stats, "algorithm     {}", cfg.algorithm)?;
    writeln!(stats, "k             {}", ans.k)?;
    if let Some([k1, k2]) = ans.k_primes {
        writeln!(stats, "k'1 k'2       {k1} {k2}")?;
    }
    writeln!(stats, "results       {}", ans.len())?;
    if let Some(c) = ans.category_counts {
        let (lb, ub) = ans.bounds().expect("counts present");
        writeln!(stats, "bounds        {lb} {ub}")?;
        writeln!(stats, "categories    {:>8} {:>8} {:>8}", "SS", "SN", "NN")?;
        for l in Label::ALL {
            let row = &c[l.index()];
            writeln!(
                stats,
                "  {:<11} {:>8} {:>8} {:>8}",
                l.name(),
                row[0],
                row[1],
                row[2]
            )?;
        }
    }
    let t = ans.timings;
    writeln!(stats, "group_ms      {}", fmt_ms(t.group_ms))?;
    writeln!(stats, "join_ms       {}", fmt_ms(t.join_ms))?;
    writeln!(stats, "dominator_ms  {}", fmt_ms(t.dominator_ms))?;
    writeln!(stats, "rest_ms       {}", fmt_ms(t.rest_ms))?;
    writeln!(stats, "total_ms      {}", fmt_ms(t.total_ms()))?;
    Ok(())
}

fn cmd_find_k(a: FindKArgs) -> Result<()> {
    let (r1, r2) = load(&a.query)?;
    let cfg = QueryConfig::new(0)
        .with_aggregate(a.query.aggregate)
        .with_condition(a.query.cond.into())
        .with_algorithm(a.algo.into());
    let method = match a.method {
        MethodArg::Naive => SearchMethod::Naive,
        MethodArg::Range => SearchMethod::Range,
        MethodArg::Binary => SearchMethod::Binary,
    };
    let res = match a.mode {
        ModeArg::AtLeast => find_k(&r1, &r2, a.delta, method, &cfg)?,
        ModeArg::AtMost => {
            if !matches!(a.method, MethodArg::Binary) {
                bail!("--mode at-most always uses the binary method");
            }
            find_k_at_most(&r1, &r2, a.delta, &cfg)?
        }
    };
    let count = match res.skyline_count {
        Some(c) => c,
        None => run_query(&r1, &r2, &cfg.with_k(res.k))?.len(),
    };
    let mode = match res.mode {
        SearchMode::AtLeast => "at-least",
        SearchMode::AtMost => "at-most",
    };
    println!("method     {}", res.method);
    println!("mode       {mode}");
    println!("delta      {}", res.delta);
    println!("k          {}", res.k);
    println!("count      {count}");
    println!("defaulted  {}", res.defaulted);
    println!("probes     {}", res.trace.len());
    println!("{:>4} {:>10} {:>10} {:>10}", "k", "lb", "ub", "exact");
    for p in &res.trace {
        let (lb, ub) = p
            .bounds
            .map_or(("-".to_string(), "-".to_string()), |(l, u)| {
                (l.to_string(), u.to_string())
            });
        let exact = p.exact.map_or("skipped".to_string(), |e| e.to_string());
        println!("{:>4} {:>10} {:>10} {:>10}", p.k, lb, ub, exact);
    }
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let text =
        fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let cfg: SweepConfig = text.parse()?;
    cfg.validate()?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let path = a.out.join("bench.csv");
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    let rows = run_sweep(&cfg, BufWriter::new(file), a.parallel)?;
    println!("{} rows written to {}", rows.len(), path.display());
    Ok(())
}
