use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use surmod_core::harness::{self, Campaign, ConfigOverrides};
use surmod_core::surrogate::evolve;
use surmod_core::{BenchmarkFunction, Execution, FunctionKind};

/// Evolve smooth surrogates of rugged benchmark landscapes.
#[derive(Parser, Debug)]
#[command(name = "surmod", version)]
struct Cli {
    /// key=value file supplying defaults for any flag
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a seeded multi-run campaign and write CSV results
    Run(RunArgs),
    /// Evolve one 2-D surrogate and export original vs surrogate on a grid
    Surface(SurfaceArgs),
    /// Write the benchmark catalog as CSV
    Catalog(CatalogArgs),
}

#[derive(Args, Debug, Default)]
struct Evolution {
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    pop: Option<usize>,
    #[arg(long)]
    pso_iters: Option<usize>,
    #[arg(long)]
    rmse_samples: Option<usize>,
    #[arg(long)]
    mutation_rate: Option<f64>,
    #[arg(long)]
    tournament_size: Option<usize>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// function name, comma list, or "all" [default: all]
    #[arg(long)]
    function: Option<String>,
    /// 2, 3, 4, comma list, or "all" [default: all]
    #[arg(long)]
    dim: Option<String>,
    /// [default: 30]
    #[arg(long)]
    runs: Option<usize>,
    /// base seed; run i uses seed + i [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// output directory [default: results]
    #[arg(long)]
    out: Option<PathBuf>,
    /// concurrent runs, 0 for one per core [default: 0]
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    evolution: Evolution,
}

#[derive(Args, Debug)]
struct SurfaceArgs {
    #[arg(long)]
    function: Option<String>,
    /// [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// grid points per axis [default: 100]
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    evolution: Evolution,
}

#[derive(Args, Debug)]
struct CatalogArgs {
    /// write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

const KNOWN_KEYS: [&str; 13] = [
    "function",
    "dim",
    "runs",
    "seed",
    "out",
    "workers",
    "resolution",
    "generations",
    "pop",
    "pso_iters",
    "rmse_samples",
    "mutation_rate",
    "tournament_size",
];

/// Flag values layered over a config file.
struct Layered {
    file: BTreeMap<String, String>,
}

impl Layered {
    fn load(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            Some(p) => harness::load_config(p)?,
            None => BTreeMap::new(),
        };
        if let Some(k) = file.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            bail!("configuration error: unknown key '{k}' in config file");
        }
        Ok(Layered { file })
    }

    fn get<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| anyhow!("configuration error: bad value '{v}' for '{key}'"))
            })
            .transpose()
    }

    fn overrides(&self, e: &Evolution) -> Result<ConfigOverrides> {
        Ok(ConfigOverrides {
            population_size: self.get(e.pop, "pop")?,
            generations: self.get(e.generations, "generations")?,
            mutation_rate: self.get(e.mutation_rate, "mutation_rate")?,
            tournament_size: self.get(e.tournament_size, "tournament_size")?,
            rmse_samples: self.get(e.rmse_samples, "rmse_samples")?,
            pso_iterations: self.get(e.pso_iters, "pso_iters")?,
            ..ConfigOverrides::default()
        })
    }
}

fn run(args: RunArgs, cfg: &Layered) -> Result<()> {
    let functions = harness::parse_functions(
        &cfg.get(args.function, "function")?
            .unwrap_or_else(|| "all".into()),
    )?;
    let dimensions =
        harness::parse_dimensions(&cfg.get(args.dim, "dim")?.unwrap_or_else(|| "all".into()))?;
    let out: PathBuf = cfg
        .get(args.out, "out")?
        .unwrap_or_else(|| "results".into());
    let mut c = Campaign::new(functions, dimensions, &out);
    c.runs = cfg.get(args.runs, "runs")?.unwrap_or(30);
    c.base_seed = cfg.get(args.seed, "seed")?.unwrap_or(0);
    c.workers = cfg.get(args.workers, "workers")?.unwrap_or(0);
    c.overrides = cfg.overrides(&args.evolution)?;
    c.execution = Execution::Parallel;

    let result =
        harness::run_campaign_with(&c, |f, d, r| eprintln!("done {} d={d} run {r}", f.name()))?;
    println!("function,dimension,runs,median_f_at_argmin,mean_f_at_argmin");
    for p in &result.pairs {
        println!(
            "{},{},{},{:e},{:e}",
            p.function.name(),
            p.dimension,
            p.runs.len(),
            p.median_fitness,
            p.mean_fitness
        );
    }
    eprintln!("{} new runs, results in {}", result.executed, out.display());
    Ok(())
}

fn surface(args: SurfaceArgs, cfg: &Layered) -> Result<()> {
    let name = cfg
        .get(args.function, "function")?
        .ok_or_else(|| anyhow!("configuration error: --function is required"))?;
    let kind: FunctionKind = name.parse()?;
    let out: PathBuf = cfg
        .get(args.out, "out")?
        .ok_or_else(|| anyhow!("configuration error: --out is required"))?;
    let resolution = cfg.get(args.resolution, "resolution")?.unwrap_or(100);
    let seed = cfg.get(args.seed, "seed")?.unwrap_or(0);

    let f = BenchmarkFunction::new(kind, 2)?;
    let config = cfg
        .overrides(&args.evolution)?
        .apply(2, seed, Execution::Parallel);
    let record = evolve(&f, &config)?;
    harness::export_surface_grid(&f, &record.best.program, resolution, &out)
        .with_context(|| format!("writing {}", out.display()))?;
    println!("program: {}", record.best.program);
    println!("argmin: {:?}", record.best.argmin);
    println!(
        "f(argmin): {:e}  loss: {:e}",
        record.best.f_at_argmin, record.best.fitness
    );
    Ok(())
}

fn catalog(args: CatalogArgs, cfg: &Layered) -> Result<()> {
    match cfg.get(args.out, "out")? {
        Some(path) => harness::dump_catalog(&path)?,
        None => print!("{}", harness::catalog_csv()),
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = Layered::load(cli.config.as_deref())?;
    match cli.command {
        Command::Run(a) => run(a, &cfg),
        Command::Surface(a) => surface(a, &cfg),
        Command::Catalog(a) => catalog(a, &cfg),
    }
}
