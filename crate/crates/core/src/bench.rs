//! Monte-Carlo MISE harness.
//!
//! For every `(chain, family, n)` cell, replication `r` simulates a trajectory
//! with seed `seed_base + r`, runs the three-step procedure and integrates the
//! squared error against the chain's closed-form densities with a midpoint
//! rule. Replications run in parallel on the ambient rayon pool; aggregation
//! happens afterwards in replication order, so results do not depend on the
//! number of threads.

use std::fmt::Write as _;

use log::info;
use rayon::prelude::*;

use crate::basis::{BasisFamily, Interval};
use crate::chains::{simulate, ChainSpec};
use crate::estimator::{fit_transition, PenaltyConfig, TransitionFit, DEFAULT_TRUNCATION_EXPONENT};
use crate::quad::midpoint_nodes;
use crate::{Error, Result};

pub const MIN_GRID: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub chains: Vec<ChainSpec>,
    pub families: Vec<BasisFamily>,
    pub sizes: Vec<usize>,
    pub replications: usize,
    pub grid_1d: usize,
    pub grid_2d: usize,
    pub seed_base: u64,
    pub penalty: PenaltyConfig,
    pub truncation_exponent: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            chains: ChainSpec::presets(),
            families: vec![BasisFamily::Histogram, BasisFamily::Trigonometric],
            sizes: vec![50, 100, 250, 500, 1000],
            replications: 200,
            grid_1d: 256,
            grid_2d: 128,
            seed_base: 0,
            penalty: PenaltyConfig::default(),
            truncation_exponent: DEFAULT_TRUNCATION_EXPONENT,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.replications < 1 {
            return bad("replications must be at least 1".into());
        }
        if self.grid_1d < MIN_GRID || self.grid_2d < MIN_GRID {
            return bad(format!(
                "quadrature grids need at least {MIN_GRID} points per axis (got {} and {})",
                self.grid_1d, self.grid_2d
            ));
        }
        if self.chains.is_empty() || self.families.is_empty() || self.sizes.is_empty() {
            return bad("chains, families and sizes must all be non-empty".into());
        }
        if let Some(n) = self.sizes.iter().find(|&&n| n < 4) {
            return bad(format!("sample sizes must be at least 4, got {n}"));
        }
        if !(self.truncation_exponent > 0.0) {
            return bad(format!(
                "truncation exponent must be positive, got {}",
                self.truncation_exponent
            ));
        }
        self.penalty.validate()?;
        for c in &self.chains {
            c.validate()?;
        }
        Ok(())
    }
}

/// What the estimates are compared against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reference {
    /// The chain's closed-form densities.
    ClosedForm,
    /// The estimates themselves; every MISE is zero. Exercises the harness
    /// plumbing without depending on estimator quality.
    Estimate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub chain: String,
    pub basis: String,
    pub n: usize,
    pub replications: usize,
    /// `None` for chains without a closed-form stationary density.
    pub mise_f: Option<f64>,
    pub se_f: Option<f64>,
    pub mise_pi: f64,
    pub se_pi: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct BenchResult {
    pub rows: Vec<BenchRow>,
}

pub const BENCH_CSV_HEADER: &str = "chain,basis,n,N,mise_f,se_f,mise_pi,se_pi";

impl BenchResult {
    pub fn row(&self, chain: &str, basis: &str, n: usize) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.chain == chain && r.basis == basis && r.n == n)
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = format!("{BENCH_CSV_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.chain,
                r.basis,
                r.n,
                r.replications,
                opt(r.mise_f),
                opt(r.se_f),
                r.mise_pi,
                r.se_pi
            );
        }
        out
    }
}

/// `int (est - truth)^2` over `domain` by the midpoint rule on `grid` cells.
pub fn mise_1d<E, T>(est: E, truth: T, domain: Interval, grid: usize) -> Result<f64>
where
    E: Fn(f64) -> f64,
    T: Fn(f64) -> f64,
{
    check_grid(grid)?;
    let h = domain.width() / grid as f64;
    Ok(midpoint_nodes(domain, grid)
        .into_iter()
        .map(|x| (est(x) - truth(x)).powi(2))
        .sum::<f64>()
        * h)
}

/// `int int (est - truth)^2` over `domain x domain`, midpoint rule with
/// `grid` cells per axis.
pub fn mise_2d<E, T>(est: E, truth: T, domain: Interval, grid: usize) -> Result<f64>
where
    E: Fn(f64, f64) -> f64,
    T: Fn(f64, f64) -> f64,
{
    check_grid(grid)?;
    let h = domain.width() / grid as f64;
    let nodes = midpoint_nodes(domain, grid);
    let mut sum = 0.0;
    for &x in &nodes {
        for &y in &nodes {
            sum += (est(x, y) - truth(x, y)).powi(2);
        }
    }
    Ok(sum * h * h)
}

fn check_grid(grid: usize) -> Result<()> {
    if grid < MIN_GRID {
        return Err(Error::InvalidInput(format!(
            "quadrature grid needs at least {MIN_GRID} points, got {grid}"
        )));
    }
    Ok(())
}

/// Closed-form densities tabulated once per chain on the midpoint grids.
struct TruthTable {
    nodes_1d: Vec<f64>,
    nodes_2d: Vec<f64>,
    f: Option<Vec<f64>>,
    pi: Vec<f64>,
}

impl TruthTable {
    fn new(chain: &ChainSpec, cfg: &BenchConfig) -> Result<Self> {
        let nodes_1d = midpoint_nodes(chain.domain, cfg.grid_1d);
        let nodes_2d = midpoint_nodes(chain.domain, cfg.grid_2d);
        let f = if chain.has_stationary_density() {
            Some(
                nodes_1d
                    .iter()
                    .map(|&x| chain.stationary_density(x))
                    .collect::<Result<Vec<_>>>()?,
            )
        } else {
            None
        };
        let pi = nodes_2d
            .par_iter()
            .flat_map_iter(|&x| nodes_2d.iter().map(move |&y| chain.transition_density(x, y)))
            .collect();
        Ok(Self {
            nodes_1d,
            nodes_2d,
            f,
            pi,
        })
    }
}

/// Squared errors of one replication.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReplicationOutcome {
    pub mise_f: Option<f64>,
    pub mise_pi: f64,
    pub dim_f: usize,
    pub dim_g: usize,
}

fn replicate(
    chain: &ChainSpec,
    family: BasisFamily,
    n: usize,
    seed: u64,
    cfg: &BenchConfig,
    truth: &TruthTable,
    reference: Reference,
) -> Result<ReplicationOutcome> {
    let sample = simulate(chain, n, seed)?;
    let fit = fit_transition(
        sample.values(),
        family,
        chain.domain,
        &cfg.penalty,
        cfg.truncation_exponent,
    )?;
    Ok(score(&fit, chain, cfg, truth, reference))
}

fn score(
    fit: &TransitionFit,
    chain: &ChainSpec,
    cfg: &BenchConfig,
    truth: &TruthTable,
    reference: Reference,
) -> ReplicationOutcome {
    let h1 = chain.domain.width() / cfg.grid_1d as f64;
    let h2 = chain.domain.width() / cfg.grid_2d as f64;
    let pi_hat = fit.pi.eval_grid(&truth.nodes_2d, &truth.nodes_2d);
    let pi_ref = match reference {
        Reference::ClosedForm => &truth.pi,
        Reference::Estimate => &pi_hat,
    };
    let mise_pi = squared_distance(&pi_hat, pi_ref) * h2 * h2;
    let mise_f = truth.f.as_ref().map(|f_true| {
        let f_hat = fit.f.estimate.eval_many(&truth.nodes_1d);
        let f_ref = match reference {
            Reference::ClosedForm => f_true,
            Reference::Estimate => &f_hat,
        };
        squared_distance(&f_hat, f_ref) * h1
    });
    ReplicationOutcome {
        mise_f,
        mise_pi,
        dim_f: fit.f.estimate.dim(),
        dim_g: fit.g.estimate.dim(),
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum()
}

/// Mean and standard error of the mean, summed in slice order.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs the benchmark against the closed-form densities.
pub fn run_bench(config: &BenchConfig) -> Result<BenchResult> {
    run_bench_with(config, Reference::ClosedForm)
}

pub fn run_bench_with(config: &BenchConfig, reference: Reference) -> Result<BenchResult> {
    config.validate()?;
    let mut rows = Vec::new();
    for chain in &config.chains {
        let truth = TruthTable::new(chain, config)?;
        for &family in &config.families {
            for &n in &config.sizes {
                let outcomes = replications(chain, family, n, config, &truth, reference)?;
                let row = aggregate(chain, family, n, &outcomes);
                info!(
                    "{} {} n={} N={}: mise_f={} mise_pi={:.6}",
                    row.chain,
                    row.basis,
                    n,
                    row.replications,
                    row.mise_f.map_or("-".to_string(), |v| format!("{v:.6}")),
                    row.mise_pi
                );
                rows.push(row);
            }
        }
    }
    Ok(BenchResult { rows })
}

fn replications(
    chain: &ChainSpec,
    family: BasisFamily,
    n: usize,
    cfg: &BenchConfig,
    truth: &TruthTable,
    reference: Reference,
) -> Result<Vec<ReplicationOutcome>> {
    (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| replicate(chain, family, n, cfg.seed_base.wrapping_add(r), cfg, truth, reference))
        .collect()
}

fn aggregate(chain: &ChainSpec, family: BasisFamily, n: usize, outcomes: &[ReplicationOutcome]) -> BenchRow {
    let pis: Vec<f64> = outcomes.iter().map(|o| o.mise_pi).collect();
    let fs: Option<Vec<f64>> = outcomes.iter().map(|o| o.mise_f).collect();
    let (mise_pi, se_pi) = mean_and_se(&pis);
    let (mise_f, se_f) = match fs {
        Some(fs) => {
            let (m, s) = mean_and_se(&fs);
            (Some(m), Some(s))
        }
        None => (None, None),
    };
    BenchRow {
        chain: chain.id.clone(),
        basis: family.id(),
        n,
        replications: outcomes.len(),
        mise_f,
        se_f,
        mise_pi,
        se_pi,
    }
}

/// Which estimate a rate experiment tracks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateTarget {
    Stationary,
    Transition,
}

impl std::str::FromStr for RateTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f" | "stationary" => Ok(RateTarget::Stationary),
            "pi" | "transition" => Ok(RateTarget::Transition),
            other => Err(Error::Config(format!("unknown rate target '{other}' (f|pi)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    pub sizes: Vec<usize>,
    pub means: Vec<f64>,
    pub ses: Vec<f64>,
    /// Least-squares slope of `log(mean MISE)` against `log n`.
    pub slope: f64,
}

impl RateReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,mise,se\n");
        for ((n, m), s) in self.sizes.iter().zip(&self.means).zip(&self.ses) {
            let _ = writeln!(out, "{n},{m},{s}");
        }
        out
    }
}

/// Least-squares slope of `log y` on `log n`. Needs at least four distinct
/// sizes spanning a decade, and positive values.
pub fn log_log_slope(sizes: &[usize], values: &[f64]) -> Result<f64> {
    if sizes.len() != values.len() {
        return Err(Error::InvalidInput("sizes and values differ in length".into()));
    }
    let mut distinct: Vec<usize> = sizes.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "a rate fit needs at least 4 distinct sizes, got {}",
            distinct.len()
        )));
    }
    if (distinct[distinct.len() - 1] as f64) < 10.0 * distinct[0] as f64 {
        return Err(Error::InvalidInput(
            "sizes must span at least one decade".into(),
        ));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "log-log fit needs positive values, got {v}"
        )));
    }
    let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Mean MISE per size for the single chain and family of `config`, with the
/// fitted log-log slope.
pub fn rate_from_config(config: &BenchConfig, target: RateTarget) -> Result<RateReport> {
    if config.chains.len() != 1 || config.families.len() != 1 {
        return Err(Error::Config(
            "a rate experiment runs exactly one chain and one family".into(),
        ));
    }
    if target == RateTarget::Stationary && !config.chains[0].has_stationary_density() {
        return Err(Error::Unsupported(format!(
            "chain '{}' has no closed-form stationary density",
            config.chains[0].id
        )));
    }
    let result = run_bench(config)?;
    let (means, ses): (Vec<f64>, Vec<f64>) = result
        .rows
        .iter()
        .map(|r| match target {
            RateTarget::Stationary => (r.mise_f.unwrap_or(f64::NAN), r.se_f.unwrap_or(f64::NAN)),
            RateTarget::Transition => (r.mise_pi, r.se_pi),
        })
        .unzip();
    let slope = log_log_slope(&config.sizes, &means)?;
    Ok(RateReport {
        sizes: config.sizes.clone(),
        means,
        ses,
        slope,
    })
}

/// Rate experiment with default grids and `seed_base = 0`.
pub fn rate_experiment(
    chain: &ChainSpec,
    family: BasisFamily,
    sizes: &[usize],
    replications: usize,
    penalty: &PenaltyConfig,
    target: RateTarget,
) -> Result<RateReport> {
    let config = BenchConfig {
        chains: vec![chain.clone()],
        families: vec![family],
        sizes: sizes.to_vec(),
        replications,
        penalty: *penalty,
        ..BenchConfig::default()
    };
    rate_from_config(&config, target)
}
