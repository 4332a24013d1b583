//! Command-line front end: `simulate`, `fit`, `bench` and `rate`.
//!
//! Every subcommand resolves its settings from an optional `--config` file
//! (flat `key = value`, see [`crate::config`]) overridden by flags, and writes
//! the resolved settings next to its outputs as a run manifest. Passing that
//! manifest back through `--config` reproduces the run.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;

use crate::basis::{make_collection, BasisFamily, CapRule, Interval};
use crate::bench::{rate_from_config, run_bench, BenchConfig, RateTarget};
use crate::chains::{simulate, ChainKind, ChainSpec, PRESET_IDS};
use crate::config::{KvConfig, Section};
use crate::estimator::{
    quotient_transition_with_exponent, select_model_1d, select_model_2d, PenaltyConfig,
    DEFAULT_TRUNCATION_EXPONENT,
};
use crate::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Points of the one-dimensional evaluation grid written by `fit`.
pub const FIT_GRID_1D: usize = 200;
/// Points per axis of the two-dimensional evaluation grid written by `fit`.
pub const FIT_GRID_2D: usize = 100;

const META_KEYS: [&str; 3] = ["command", "version", "outputs"];
const CHAIN_PARAM_KEYS: [&str; 9] = ["preset", "a", "b", "sigma2", "beta", "delta", "c", "d", "burn_in"];

#[derive(Parser, Debug)]
#[command(name = "markov-density", version, about = "Adaptive projection estimation of Markov chain densities")]
pub struct Cli {
    #[command(flatten)]
    pub shared: SharedArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SharedArgs {
    /// Random seed (base seed for benchmark replications). Default 0.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (simulate) or directory (fit, bench, rate).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// key = value configuration file or a previous run manifest.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate one of the benchmark chains and write a one-column CSV.
    Simulate(SimulateArgs),
    /// Fit f, g or pi to a sample CSV.
    Fit(FitArgs),
    /// Monte-Carlo MISE table over chains, bases and sample sizes.
    Bench(BenchArgs),
    /// Empirical convergence rate: log-log slope of mean MISE against n.
    Rate(RateArgs),
}

#[derive(Args, Debug, Default)]
pub struct ChainParamArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub delta: Option<u32>,
    /// Lower end of the estimation interval.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Upper end of the estimation interval.
    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<f64>,
    #[arg(long)]
    pub burn_in: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// ar1 | ar2 | sqrtcir | cir3 | cir4 | arch
    #[arg(long)]
    pub chain: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub params: ChainParamArgs,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Sample CSV (header `x`, one value per line).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// hist | trig | haar | pp<r>
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<f64>,
    /// One-dimensional penalty constant.
    #[arg(long)]
    pub k: Option<f64>,
    /// Two-dimensional penalty constant.
    #[arg(long)]
    pub k2: Option<f64>,
    /// f | g | pi
    #[arg(long)]
    pub mode: Option<String>,
    /// Truncation exponent of a_n = n^exponent (pi mode).
    #[arg(long)]
    pub exponent: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct GridPenaltyArgs {
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub grid_1d: Option<usize>,
    #[arg(long)]
    pub grid_2d: Option<usize>,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub k2: Option<f64>,
    #[arg(long)]
    pub exponent: Option<f64>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',')]
    pub chains: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub families: Option<Vec<String>>,
    #[command(flatten)]
    pub common: GridPenaltyArgs,
}

#[derive(Args, Debug)]
pub struct RateArgs {
    #[arg(long)]
    pub chain: Option<String>,
    #[arg(long)]
    pub family: Option<String>,
    /// f | pi
    #[arg(long)]
    pub target: Option<String>,
    #[command(flatten)]
    pub common: GridPenaltyArgs,
}

/// Parses arguments and runs the selected subcommand on a pool of
/// `--jobs` threads.
pub fn run(cli: Cli) -> Result<()> {
    if cli.shared.jobs == 0 {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.shared.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Simulate(a) => cmd_simulate(&cli.shared, a),
        Command::Fit(a) => cmd_fit(&cli.shared, a),
        Command::Bench(a) => cmd_bench(&cli.shared, a),
        Command::Rate(a) => cmd_rate(&cli.shared, a),
    })
}

/// Loads `--config` (if any) and checks it belongs to `command`.
fn base_config(shared: &SharedArgs, command: &str) -> Result<KvConfig> {
    let cfg = match &shared.config {
        Some(path) => KvConfig::load(path).map_err(|e| match e {
            Error::Io(io) => Error::Config(format!("cannot read config {}: {io}", path.display())),
            other => other,
        })?,
        None => KvConfig::default(),
    };
    if let Some(c) = cfg.global.get("command") {
        if c != command {
            return Err(Error::Config(format!(
                "config was written for '{c}', not '{command}'"
            )));
        }
    }
    Ok(cfg)
}

fn set_opt<T: ToString>(section: &mut Section, key: &str, value: &Option<T>) {
    if let Some(v) = value {
        section.set(key, v.to_string());
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn require<T: std::str::FromStr>(section: &Section, key: &str, what: &str) -> Result<T> {
    section
        .parse::<T>(key)?
        .ok_or_else(|| Error::Config(format!("missing required setting '{key}' ({what})")))
}

fn apply_chain_flags(section: &mut Section, p: &ChainParamArgs) {
    set_opt(section, "a", &p.a);
    set_opt(section, "b", &p.b);
    set_opt(section, "sigma2", &p.sigma2);
    set_opt(section, "beta", &p.beta);
    set_opt(section, "delta", &p.delta);
    set_opt(section, "c", &p.c);
    set_opt(section, "d", &p.d);
    set_opt(section, "burn_in", &p.burn_in);
}

/// A preset chain with overrides from `section` (keys `a`, `b`, `sigma2`,
/// `beta`, `delta`, `c`, `d`, `burn_in`; `preset` picks the base chain when
/// the id is not itself a preset).
pub fn chain_from_section(id: &str, section: &Section) -> Result<ChainSpec> {
    let base = section.get("preset").unwrap_or(id);
    let mut spec = ChainSpec::preset(base)?;
    spec.id = id.to_string();
    let bad = |key: &str| {
        Error::Config(format!("parameter '{key}' does not apply to chain '{id}'"))
    };
    match &mut spec.kind {
        ChainKind::Ar { a, b, sigma2 } => {
            for key in ["beta", "delta"] {
                if section.get(key).is_some() {
                    return Err(bad(key));
                }
            }
            if let Some(v) = section.parse("a")? {
                *a = v;
            }
            if let Some(v) = section.parse("b")? {
                *b = v;
            }
            if let Some(v) = section.parse("sigma2")? {
                *sigma2 = v;
            }
        }
        ChainKind::SqrtCir { a, beta, delta } | ChainKind::Cir { a, beta, delta } => {
            for key in ["b", "sigma2"] {
                if section.get(key).is_some() {
                    return Err(bad(key));
                }
            }
            if let Some(v) = section.parse("a")? {
                *a = v;
            }
            if let Some(v) = section.parse("beta")? {
                *beta = v;
            }
            if let Some(v) = section.parse("delta")? {
                *delta = v;
            }
        }
        ChainKind::Arch => {
            for key in ["a", "b", "sigma2", "beta", "delta"] {
                if section.get(key).is_some() {
                    return Err(bad(key));
                }
            }
        }
    }
    let c = section.parse("c")?.unwrap_or(spec.domain.lo());
    let d = section.parse("d")?.unwrap_or(spec.domain.hi());
    spec.domain = Interval::new(c, d)?;
    if let Some(b) = section.parse("burn_in")? {
        spec.burn_in = b;
    }
    spec.validate()?;
    Ok(spec)
}

/// Every parameter of `spec` as config entries.
fn chain_entries(spec: &ChainSpec, section: &mut Section) {
    match spec.kind {
        ChainKind::Ar { a, b, sigma2 } => {
            section.set("a", a);
            section.set("b", b);
            section.set("sigma2", sigma2);
        }
        ChainKind::SqrtCir { a, beta, delta } | ChainKind::Cir { a, beta, delta } => {
            section.set("a", a);
            section.set("beta", beta);
            section.set("delta", delta);
        }
        ChainKind::Arch => {}
    }
    section.set("c", spec.domain.lo());
    section.set("d", spec.domain.hi());
    section.set("burn_in", spec.burn_in);
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, contents).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("cannot write {}: {e}", path.display()),
        ))
    })
}

fn write_manifest(path: &Path, command: &str, mut resolved: KvConfig, outputs: &[PathBuf]) -> Result<()> {
    let mut global = Section::new("");
    global.set("command", command);
    global.set("version", VERSION);
    global.set(
        "outputs",
        outputs
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    for (k, v) in resolved.global.entries() {
        if !META_KEYS.contains(&k.as_str()) {
            global.set(k.clone(), v);
        }
    }
    resolved.global = global;
    let text = format!("# markov-density run manifest\n{}", resolved.render());
    write_file(path, &text)
}

pub fn cmd_simulate(shared: &SharedArgs, args: &SimulateArgs) -> Result<()> {
    let mut cfg = base_config(shared, "simulate")?;
    let g = &mut cfg.global;
    set_opt(g, "chain", &args.chain);
    set_opt(g, "n", &args.n);
    set_opt(g, "seed", &shared.seed);
    set_opt(g, "out", &shared.out.as_ref().map(|p| p.display().to_string()));
    apply_chain_flags(g, &args.params);
    let mut allowed = vec!["chain", "n", "seed", "out"];
    allowed.extend(CHAIN_PARAM_KEYS);
    allowed.extend(META_KEYS);
    g.reject_unknown(&allowed)?;

    let chain_id: String = require(g, "chain", PRESET_IDS.join("|").as_str())?;
    let n: usize = require(g, "n", "sample length")?;
    let seed: u64 = g.parse("seed")?.unwrap_or(0);
    let out = PathBuf::from(g.get("out").unwrap_or("sample.csv"));
    let spec = chain_from_section(&chain_id, g)?;

    let mut resolved = KvConfig::default();
    let r = &mut resolved.global;
    r.set("chain", &chain_id);
    r.set("n", n);
    r.set("seed", seed);
    r.set("out", out.display());
    if let Some(p) = g.get("preset") {
        r.set("preset", p);
    }
    chain_entries(&spec, r);

    let sample = simulate(&spec, n, seed)?;
    write_file(&out, &sample.to_csv())?;
    let manifest = manifest_path_for_file(&out);
    write_manifest(&manifest, "simulate", resolved, &[out.clone()])?;
    println!("wrote {} values of {} to {}", sample.len(), chain_id, out.display());
    Ok(())
}

/// `<file>.manifest` next to a single-file output.
pub fn manifest_path_for_file(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

/// Reads a one-column sample CSV; a non-numeric first line is a header.
pub fn read_sample_csv(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.trim();
        if field.is_empty() {
            continue;
        }
        let first = field.split(',').next().unwrap_or("").trim();
        match first.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ if i == 0 => continue,
            _ => {
                return Err(Error::Parse {
                    location: format!("sample line {}", i + 1),
                    message: format!("not a finite number: '{field}'"),
                })
            }
        }
    }
    if values.is_empty() {
        return Err(Error::InvalidInput("sample file contains no values".into()));
    }
    Ok(values)
}

fn linspace(domain: Interval, points: usize) -> Vec<f64> {
    let step = domain.width() / (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i + 1 == points {
                domain.hi()
            } else {
                domain.lo() + i as f64 * step
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum FitMode {
    F,
    G,
    Pi,
}

pub fn cmd_fit(shared: &SharedArgs, args: &FitArgs) -> Result<()> {
    let mut cfg = base_config(shared, "fit")?;
    let g = &mut cfg.global;
    set_opt(g, "input", &args.input.as_ref().map(|p| p.display().to_string()));
    set_opt(g, "family", &args.family);
    set_opt(g, "c", &args.c);
    set_opt(g, "d", &args.d);
    set_opt(g, "k", &args.k);
    set_opt(g, "k2", &args.k2);
    set_opt(g, "mode", &args.mode);
    set_opt(g, "exponent", &args.exponent);
    set_opt(g, "seed", &shared.seed);
    set_opt(g, "out", &shared.out.as_ref().map(|p| p.display().to_string()));
    let mut allowed = vec!["input", "family", "c", "d", "k", "k2", "mode", "exponent", "seed", "out"];
    allowed.extend(META_KEYS);
    g.reject_unknown(&allowed)?;

    let input = PathBuf::from(require::<String>(g, "input", "sample CSV path")?);
    let family: BasisFamily = g.get("family").unwrap_or("trig").parse()?;
    let c: f64 = require(g, "c", "interval lower end")?;
    let d: f64 = require(g, "d", "interval upper end")?;
    let domain = Interval::new(c, d)?;
    let defaults = PenaltyConfig::default();
    let pen = PenaltyConfig::new(
        g.parse("k")?.unwrap_or(defaults.k_1d),
        g.parse("k2")?.unwrap_or(defaults.k_2d),
    )?;
    let mode = match g.get("mode").unwrap_or("f") {
        "f" => FitMode::F,
        "g" => FitMode::G,
        "pi" => FitMode::Pi,
        other => return Err(Error::Config(format!("unknown fit mode '{other}' (f|g|pi)"))),
    };
    let exponent: f64 = g.parse("exponent")?.unwrap_or(DEFAULT_TRUNCATION_EXPONENT);
    let seed: u64 = g.parse("seed")?.unwrap_or(0);
    let out = PathBuf::from(g.get("out").unwrap_or("."));

    let text = fs::read_to_string(&input).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("cannot read {}: {e}", input.display()),
        ))
    })?;
    let sample = read_sample_csv(&text)?;
    let n = sample.len();

    let mut resolved = KvConfig::default();
    let r = &mut resolved.global;
    r.set("input", input.display());
    r.set("family", family.id());
    r.set("c", c);
    r.set("d", d);
    r.set("k", pen.k_1d);
    r.set("k2", pen.k_2d);
    r.set("mode", g.get("mode").unwrap_or("f"));
    r.set("exponent", exponent);
    r.set("seed", seed);
    r.set("out", out.display());

    let mut outputs = Vec::new();
    let grid_path = out.join("grid.csv");
    let select_f = || -> Result<_> {
        let coll = make_collection(family, n, CapRule::OneD, domain)?;
        select_model_1d(&sample, &coll, &pen)
    };
    let select_g = || -> Result<_> {
        let coll = make_collection(family, n, CapRule::TwoD, domain)?;
        select_model_2d(&sample, &coll, &pen)
    };
    match mode {
        FitMode::F => {
            let sel = select_f()?;
            let path = out.join("estimate.csv");
            write_file(&path, &sel.estimate.to_csv())?;
            let xs = linspace(domain, FIT_GRID_1D);
            let mut grid = String::from("x,f\n");
            for (x, v) in xs.iter().zip(sel.estimate.eval_many(&xs)) {
                grid.push_str(&format!("{x},{v}\n"));
            }
            write_file(&grid_path, &grid)?;
            outputs.push(path);
            println!("selected D = {} (criterion {})", sel.estimate.dim(), sel.criterion);
        }
        FitMode::G => {
            let sel = select_g()?;
            let path = out.join("estimate.csv");
            write_file(&path, &sel.estimate.to_csv())?;
            let xs = linspace(domain, FIT_GRID_2D);
            write_file(&grid_path, &grid_2d_csv("g", &xs, &sel.estimate.eval_grid(&xs, &xs)))?;
            outputs.push(path);
            println!("selected D = {} (criterion {})", sel.estimate.dim(), sel.criterion);
        }
        FitMode::Pi => {
            let fsel = select_f()?;
            let gsel = select_g()?;
            let pf = out.join("estimate_f.csv");
            let pg = out.join("estimate_g.csv");
            write_file(&pf, &fsel.estimate.to_csv())?;
            write_file(&pg, &gsel.estimate.to_csv())?;
            let pi = quotient_transition_with_exponent(
                fsel.estimate.clone(),
                gsel.estimate.clone(),
                n,
                exponent,
            )?;
            let xs = linspace(domain, FIT_GRID_2D);
            write_file(&grid_path, &grid_2d_csv("pi", &xs, &pi.eval_grid(&xs, &xs)))?;
            outputs.push(pf);
            outputs.push(pg);
            println!(
                "selected D = {} for f (criterion {}), D = {} for g (criterion {}), a_n = {}",
                fsel.estimate.dim(),
                fsel.criterion,
                gsel.estimate.dim(),
                gsel.criterion,
                pi.truncation_level()
            );
        }
    }
    outputs.push(grid_path);
    write_manifest(&out.join("manifest.txt"), "fit", resolved, &outputs)
}

fn grid_2d_csv(name: &str, xs: &[f64], values: &[f64]) -> String {
    let mut s = format!("x,y,{name}\n");
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in xs.iter().enumerate() {
            s.push_str(&format!("{x},{y},{}\n", values[i * xs.len() + j]));
        }
    }
    s
}

fn apply_common_flags(g: &mut Section, shared: &SharedArgs, c: &GridPenaltyArgs) {
    set_opt(g, "replications", &c.replications);
    set_opt(g, "sizes", &c.sizes.as_ref().map(|v| join(v)));
    set_opt(g, "grid_1d", &c.grid_1d);
    set_opt(g, "grid_2d", &c.grid_2d);
    set_opt(g, "k", &c.k);
    set_opt(g, "k2", &c.k2);
    set_opt(g, "exponent", &c.exponent);
    set_opt(g, "seed", &shared.seed);
    set_opt(g, "out", &shared.out.as_ref().map(|p| p.display().to_string()));
}

const COMMON_KEYS: [&str; 9] = [
    "replications",
    "sizes",
    "grid_1d",
    "grid_2d",
    "k",
    "k2",
    "exponent",
    "seed",
    "out",
];

/// Builds a benchmark configuration from resolved settings; the chain list
/// comes from `chains`, else the section names, else every preset.
pub fn bench_config_from(cfg: &KvConfig) -> Result<BenchConfig> {
    let g = &cfg.global;
    let d = BenchConfig::default();
    let chain_ids: Vec<String> = match g.parse_list::<String>("chains")? {
        Some(ids) => ids,
        None if !cfg.sections.is_empty() => cfg.sections.iter().map(|s| s.name.clone()).collect(),
        None => PRESET_IDS.iter().map(|s| s.to_string()).collect(),
    };
    let empty = Section::default();
    let chains = chain_ids
        .iter()
        .map(|id| {
            let section = cfg.sections.iter().find(|s| &s.name == id).unwrap_or(&empty);
            section.reject_unknown(&CHAIN_PARAM_KEYS)?;
            chain_from_section(id, section)
        })
        .collect::<Result<Vec<_>>>()?;
    let families = match g.parse_list::<BasisFamily>("families")? {
        Some(f) => f,
        None => d.families.clone(),
    };
    let pen = PenaltyConfig::new(
        g.parse("k")?.unwrap_or(d.penalty.k_1d),
        g.parse("k2")?.unwrap_or(d.penalty.k_2d),
    )?;
    let config = BenchConfig {
        chains,
        families,
        sizes: g.parse_list("sizes")?.unwrap_or(d.sizes.clone()),
        replications: g.parse("replications")?.unwrap_or(d.replications),
        grid_1d: g.parse("grid_1d")?.unwrap_or(d.grid_1d),
        grid_2d: g.parse("grid_2d")?.unwrap_or(d.grid_2d),
        seed_base: g.parse("seed")?.unwrap_or(d.seed_base),
        penalty: pen,
        truncation_exponent: g.parse("exponent")?.unwrap_or(d.truncation_exponent),
    };
    config.validate()?;
    Ok(config)
}

/// The settings that reproduce `config`, in config-file form.
pub fn bench_config_entries(config: &BenchConfig, out: &Path) -> KvConfig {
    let mut kv = KvConfig::default();
    let g = &mut kv.global;
    g.set("chains", join(&config.chains.iter().map(|c| c.id.clone()).collect::<Vec<_>>()));
    g.set("families", join(&config.families.iter().map(BasisFamily::id).collect::<Vec<_>>()));
    g.set("sizes", join(&config.sizes));
    g.set("replications", config.replications);
    g.set("grid_1d", config.grid_1d);
    g.set("grid_2d", config.grid_2d);
    g.set("k", config.penalty.k_1d);
    g.set("k2", config.penalty.k_2d);
    g.set("exponent", config.truncation_exponent);
    g.set("seed", config.seed_base);
    g.set("out", out.display());
    for chain in &config.chains {
        let mut s = Section::new(chain.id.clone());
        if !PRESET_IDS.contains(&chain.id.as_str()) {
            // custom ids only come from sections carrying a preset key
            if let Some(base) = PRESET_IDS
                .iter()
                .find(|p| std::mem::discriminant(&ChainSpec::preset(p).unwrap().kind) == std::mem::discriminant(&chain.kind))
            {
                s.set("preset", base);
            }
        }
        chain_entries(chain, &mut s);
        kv.sections.push(s);
    }
    kv
}

pub fn cmd_bench(shared: &SharedArgs, args: &BenchArgs) -> Result<()> {
    let mut cfg = base_config(shared, "bench")?;
    {
        let g = &mut cfg.global;
        set_opt(g, "chains", &args.chains.as_ref().map(|v| join(v)));
        set_opt(g, "families", &args.families.as_ref().map(|v| join(v)));
        apply_common_flags(g, shared, &args.common);
        let mut allowed = vec!["chains", "families"];
        allowed.extend(COMMON_KEYS);
        allowed.extend(META_KEYS);
        g.reject_unknown(&allowed)?;
    }
    let config = bench_config_from(&cfg)?;
    let out = PathBuf::from(cfg.global.get("out").unwrap_or("."));
    info!(
        "bench: {} chains x {} families x {} sizes, N = {}",
        config.chains.len(),
        config.families.len(),
        config.sizes.len(),
        config.replications
    );
    let result = run_bench(&config)?;
    let csv_path = out.join("bench.csv");
    write_file(&csv_path, &result.to_csv())?;
    write_manifest(
        &out.join("manifest.txt"),
        "bench",
        bench_config_entries(&config, &out),
        &[csv_path.clone()],
    )?;
    println!("wrote {} rows to {}", result.rows.len(), csv_path.display());
    Ok(())
}

pub fn cmd_rate(shared: &SharedArgs, args: &RateArgs) -> Result<()> {
    let mut cfg = base_config(shared, "rate")?;
    {
        let g = &mut cfg.global;
        set_opt(g, "chains", &args.chain);
        set_opt(g, "families", &args.family);
        set_opt(g, "target", &args.target);
        apply_common_flags(g, shared, &args.common);
        let mut allowed = vec!["chains", "families", "target"];
        allowed.extend(COMMON_KEYS);
        allowed.extend(META_KEYS);
        g.reject_unknown(&allowed)?;
        if g.get("chains").is_none() {
            return Err(Error::Config("missing required setting 'chain'".into()));
        }
        if g.get("families").is_none() {
            return Err(Error::Config("missing required setting 'family'".into()));
        }
        let sizes: Vec<usize> = g
            .parse_list("sizes")?
            .ok_or_else(|| Error::Config("missing required setting 'sizes'".into()))?;
        let mut distinct = sizes.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() < 4 {
            return Err(Error::Config(format!(
                "a rate experiment needs at least 4 distinct sizes, got {}",
                distinct.len()
            )));
        }
    }
    let target: RateTarget = cfg.global.get("target").unwrap_or("f").parse()?;
    let config = bench_config_from(&cfg)?;
    let out = PathBuf::from(cfg.global.get("out").unwrap_or("."));
    let report = rate_from_config(&config, target)?;
    for ((n, m), s) in report.sizes.iter().zip(&report.means).zip(&report.ses) {
        println!("n = {n:>6}  mean MISE = {m:.6e}  (se {s:.2e})");
    }
    println!("log-log slope = {}", report.slope);
    let csv_path = out.join("rate.csv");
    let slope_path = out.join("slope.txt");
    write_file(&csv_path, &report.to_csv())?;
    write_file(&slope_path, &format!("slope = {}\n", report.slope))?;
    let mut entries = bench_config_entries(&config, &out);
    entries.global.set("target", cfg.global.get("target").unwrap_or("f"));
    write_manifest(&out.join("manifest.txt"), "rate", entries, &[csv_path, slope_path])
}
