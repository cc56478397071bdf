//! Seeded multi-run campaigns, summary statistics and CSV artifacts.
//!
//! A campaign directory holds, per (function, dimension) pair:
//!
//! * `<name>_d<D>.csv`: one row per run,
//! * `<name>_d<D>_programs.csv`: the best program of each run in postfix form,
//! * `<name>_d<D>_trace.csv`: best loss after every generation,
//!
//! plus a `summary.csv` with one row per pair. Every file is rewritten sorted
//! by run index, so the bytes on disk never depend on scheduling.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::benchmarks::{BenchmarkFunction, FunctionKind, Landscape};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::stackgp::Program;
use crate::surrogate::{evolve, EvolutionConfig, RunRecord};

pub const CAMPAIGN_DIMENSIONS: [usize; 3] = [2, 3, 4];
pub const SUMMARY_FILE: &str = "summary.csv";
pub const SUMMARY_HEADER: &str =
    "function,dimension,runs,median_f_at_argmin,mean_f_at_argmin,median_full_L,mean_full_L";
pub const CATALOG_HEADER: &str = "name,dimension,lo,hi,known_minimum,known_argmin,verified";
pub const SURFACE_HEADER: &str = "x0,x1,f_original,f_surrogate";

/// Per-field overrides of the dimension defaults. `None` keeps the default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub population_size: Option<usize>,
    pub generations: Option<usize>,
    pub mutation_rate: Option<f64>,
    pub tournament_size: Option<usize>,
    pub initial_max_length: Option<usize>,
    pub rmse_samples: Option<usize>,
    pub pso_iterations: Option<usize>,
}

impl ConfigOverrides {
    pub fn apply(&self, dimension: usize, seed: u64, execution: Execution) -> EvolutionConfig {
        let mut c = EvolutionConfig::for_dimension(dimension);
        c.population_size = self.population_size.unwrap_or(c.population_size);
        c.generations = self.generations.unwrap_or(c.generations);
        c.mutation_rate = self.mutation_rate.unwrap_or(c.mutation_rate);
        c.tournament_size = self.tournament_size.unwrap_or(c.tournament_size);
        c.initial_max_length = self.initial_max_length.unwrap_or(c.initial_max_length);
        c.rmse_samples = self.rmse_samples.unwrap_or(c.rmse_samples);
        c.pso_iterations = self.pso_iterations.unwrap_or(c.pso_iterations);
        c.seed = seed;
        c.execution = execution;
        c
    }
}

#[derive(Debug, Clone)]
pub struct Campaign {
    pub functions: Vec<FunctionKind>,
    pub dimensions: Vec<usize>,
    pub runs: usize,
    pub base_seed: u64,
    pub overrides: ConfigOverrides,
    pub output_dir: PathBuf,
    /// Upper bound on concurrently executing runs. 0 means the rayon default.
    pub workers: usize,
    pub execution: Execution,
}

impl Campaign {
    pub fn new(
        functions: Vec<FunctionKind>,
        dimensions: Vec<usize>,
        output_dir: impl Into<PathBuf>,
    ) -> Self {
        Campaign {
            functions,
            dimensions,
            runs: 30,
            base_seed: 0,
            overrides: ConfigOverrides::default(),
            output_dir: output_dir.into(),
            workers: 0,
            execution: Execution::default(),
        }
    }

    pub fn seed_for(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }

    /// Resolves every pair and its config, failing before any work starts.
    fn plan(&self) -> Result<Vec<(BenchmarkFunction, EvolutionConfig)>> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.functions.is_empty() || self.dimensions.is_empty() {
            return Err(Error::Config(
                "campaign needs at least one function and one dimension".into(),
            ));
        }
        let mut plan = Vec::new();
        for &kind in &self.functions {
            for &d in &self.dimensions {
                if !CAMPAIGN_DIMENSIONS.contains(&d) {
                    return Err(Error::Config(format!(
                        "dimension {d} is not one of 2, 3, 4"
                    )));
                }
                let f =
                    BenchmarkFunction::new(kind, d).map_err(|e| Error::Config(e.to_string()))?;
                let config = self.overrides.apply(d, self.base_seed, self.execution);
                config.validate()?;
                plan.push((f, config));
            }
        }
        Ok(plan)
    }
}

/// What the CSVs keep about one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub run: usize,
    pub seed: u64,
    pub f_at_argmin: f64,
    pub fitness: f64,
    pub rmse: f64,
    pub argmin: Vec<f64>,
    /// Postfix text of the best program, when known.
    pub program: Option<String>,
    pub trace: Vec<f64>,
}

impl RunSummary {
    pub fn from_record(run: usize, seed: u64, record: &RunRecord) -> Self {
        RunSummary {
            run,
            seed,
            f_at_argmin: record.best.f_at_argmin,
            fitness: record.best.fitness,
            rmse: record.best.rmse,
            argmin: record.best.argmin.clone(),
            program: Some(record.best.program.to_string()),
            trace: record.best_fitness_per_generation.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairResult {
    pub function: FunctionKind,
    pub dimension: usize,
    /// Sorted by run index, one entry per requested run.
    pub runs: Vec<RunSummary>,
    pub median_fitness: f64,
    pub mean_fitness: f64,
    pub median_full_loss: f64,
    pub mean_full_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignResult {
    pub pairs: Vec<PairResult>,
    /// Runs actually executed by this call; the rest were found on disk.
    pub executed: usize,
}

impl CampaignResult {
    pub fn pair(&self, function: FunctionKind, dimension: usize) -> Option<&PairResult> {
        self.pairs
            .iter()
            .find(|p| p.function == function && p.dimension == dimension)
    }
}

/// Median of `values`, taking the lower middle element for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(v[(v.len() - 1) / 2])
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

pub fn results_header(dimension: usize) -> String {
    let mut h = String::from("function,dimension,run,seed,fitness_f_at_argmin,fitness_full_L,rmse");
    for d in 0..dimension {
        h.push_str(&format!(",argmin{d}"));
    }
    h
}

fn pair_stem(kind: FunctionKind, dimension: usize) -> String {
    format!("{}_d{dimension}", kind.name())
}

pub fn results_path(dir: &Path, kind: FunctionKind, dimension: usize) -> PathBuf {
    dir.join(format!("{}.csv", pair_stem(kind, dimension)))
}

fn programs_path(dir: &Path, kind: FunctionKind, dimension: usize) -> PathBuf {
    dir.join(format!("{}_programs.csv", pair_stem(kind, dimension)))
}

fn trace_path(dir: &Path, kind: FunctionKind, dimension: usize) -> PathBuf {
    dir.join(format!("{}_trace.csv", pair_stem(kind, dimension)))
}

/// Writes `contents` next to `path` and renames it into place.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("csv.tmp");
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes())
}

fn read_optional(path: &Path) -> Result<Option<String>> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(Some(s)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::io(path, e)),
    }
}

fn parse_field<T: std::str::FromStr>(path: &Path, field: Option<&str>, what: &str) -> Result<T> {
    field
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse(format!("{}: bad or missing {what}", path.display())))
}

/// Loads previously written runs of one pair, keyed by run index.
fn load_existing(
    dir: &Path,
    kind: FunctionKind,
    dimension: usize,
) -> Result<BTreeMap<usize, RunSummary>> {
    let path = results_path(dir, kind, dimension);
    let Some(text) = read_optional(&path)? else {
        return Ok(BTreeMap::new());
    };
    let first = text.lines().next().unwrap_or("");
    if first != results_header(dimension) {
        return Err(Error::Parse(format!(
            "{}: unexpected header '{first}'",
            path.display()
        )));
    }
    let mut out = BTreeMap::new();
    for row in reader(&text).records() {
        let row = row.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if row.get(0) != Some(kind.name()) || row.len() != 7 + dimension {
            return Err(Error::Parse(format!(
                "{}: malformed row {:?}",
                path.display(),
                row
            )));
        }
        let run: usize = parse_field(&path, row.get(2), "run")?;
        let argmin = (0..dimension)
            .map(|d| parse_field(&path, row.get(7 + d), "argmin"))
            .collect::<Result<Vec<f64>>>()?;
        out.insert(
            run,
            RunSummary {
                run,
                seed: parse_field(&path, row.get(3), "seed")?,
                f_at_argmin: parse_field(&path, row.get(4), "fitness_f_at_argmin")?,
                fitness: parse_field(&path, row.get(5), "fitness_full_L")?,
                rmse: parse_field(&path, row.get(6), "rmse")?,
                argmin,
                program: None,
                trace: Vec::new(),
            },
        );
    }

    let programs = programs_path(dir, kind, dimension);
    if let Some(text) = read_optional(&programs)? {
        for row in reader(&text).records() {
            let row = row.map_err(|e| Error::Parse(format!("{}: {e}", programs.display())))?;
            let run: usize = parse_field(&programs, row.get(0), "run")?;
            if let Some(s) = out.get_mut(&run) {
                s.program = row.get(1).map(str::to_owned);
            }
        }
    }
    let traces = trace_path(dir, kind, dimension);
    if let Some(text) = read_optional(&traces)? {
        for row in reader(&text).records() {
            let row = row.map_err(|e| Error::Parse(format!("{}: {e}", traces.display())))?;
            let run: usize = parse_field(&traces, row.get(0), "run")?;
            let value: f64 = parse_field(&traces, row.get(2), "best_fitness")?;
            if let Some(s) = out.get_mut(&run) {
                s.trace.push(value);
            }
        }
    }
    Ok(out)
}

fn write_pair_files(
    dir: &Path,
    kind: FunctionKind,
    dimension: usize,
    runs: &BTreeMap<usize, RunSummary>,
) -> Result<()> {
    let mut results = results_header(dimension);
    results.push('\n');
    let mut programs = String::from("run,program\n");
    let mut traces = String::from("run,generation,best_fitness\n");
    for s in runs.values() {
        results.push_str(&format!(
            "{},{dimension},{},{},{},{},{}",
            kind.name(),
            s.run,
            s.seed,
            s.f_at_argmin,
            s.fitness,
            s.rmse
        ));
        for x in &s.argmin {
            results.push_str(&format!(",{x}"));
        }
        results.push('\n');
        if let Some(p) = &s.program {
            programs.push_str(&format!("{},{p}\n", s.run));
        }
        for (g, v) in s.trace.iter().enumerate() {
            traces.push_str(&format!("{},{},{v}\n", s.run, g + 1));
        }
    }
    write_atomic(&results_path(dir, kind, dimension), &results)?;
    write_atomic(&programs_path(dir, kind, dimension), &programs)?;
    write_atomic(&trace_path(dir, kind, dimension), &traces)
}

fn summarise(kind: FunctionKind, dimension: usize, runs: Vec<RunSummary>) -> PairResult {
    let f: Vec<f64> = runs.iter().map(|r| r.f_at_argmin).collect();
    let l: Vec<f64> = runs.iter().map(|r| r.fitness).collect();
    PairResult {
        function: kind,
        dimension,
        median_fitness: median(&f).unwrap_or(f64::NAN),
        mean_fitness: mean(&f).unwrap_or(f64::NAN),
        median_full_loss: median(&l).unwrap_or(f64::NAN),
        mean_full_loss: mean(&l).unwrap_or(f64::NAN),
        runs,
    }
}

/// Runs (or resumes) a campaign. Runs already present in the output directory
/// are not repeated; their seeds must match this campaign.
pub fn run_campaign(c: &Campaign) -> Result<CampaignResult> {
    run_campaign_with(c, |_, _, _| {})
}

/// Like [`run_campaign`], calling `progress(function, dimension, run)` after
/// each newly finished run has been written.
pub fn run_campaign_with<P>(c: &Campaign, mut progress: P) -> Result<CampaignResult>
where
    P: FnMut(FunctionKind, usize, usize),
{
    let plan = c.plan()?;
    let dir = &c.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let chunk = if c.workers == 0 { 8 } else { c.workers };
    let mut pairs = Vec::with_capacity(plan.len());
    let mut executed = 0;
    for (function, template) in &plan {
        let (kind, dim) = (function.kind(), function.dimension());
        let mut done = load_existing(dir, kind, dim)?;
        for s in done.values() {
            if s.run < c.runs && s.seed != c.seed_for(s.run) {
                return Err(Error::Config(format!(
                    "{}: run {} was recorded with seed {}, this campaign uses {}",
                    results_path(dir, kind, dim).display(),
                    s.run,
                    s.seed,
                    c.seed_for(s.run)
                )));
            }
        }
        let todo: Vec<usize> = (0..c.runs).filter(|r| !done.contains_key(r)).collect();
        for batch in todo.chunks(chunk) {
            let records = par::with_workers(c.execution, c.workers, || {
                par::map_slice(c.execution, batch, |&run| {
                    let mut config = template.clone();
                    config.seed = c.seed_for(run);
                    evolve(function, &config).map(|r| RunSummary::from_record(run, config.seed, &r))
                })
            });
            for s in records {
                let s = s?;
                done.insert(s.run, s);
            }
            write_pair_files(dir, kind, dim, &done)?;
            executed += batch.len();
            for &run in batch {
                progress(kind, dim, run);
            }
        }
        if todo.is_empty() && !results_path(dir, kind, dim).exists() {
            write_pair_files(dir, kind, dim, &done)?;
        }
        let requested: BTreeSet<usize> = (0..c.runs).collect();
        let runs = done
            .into_iter()
            .filter(|(r, _)| requested.contains(r))
            .map(|(_, s)| s)
            .collect();
        pairs.push(summarise(kind, dim, runs));
    }

    let mut summary = format!("{SUMMARY_HEADER}\n");
    for p in &pairs {
        summary.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.function.name(),
            p.dimension,
            p.runs.len(),
            p.median_fitness,
            p.mean_fitness,
            p.median_full_loss,
            p.mean_full_loss
        ));
    }
    write_atomic(&dir.join(SUMMARY_FILE), &summary)?;
    Ok(CampaignResult { pairs, executed })
}

/// `n` evenly spaced points from `lo` to `hi`, both ends included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            let mut v: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
            v[n - 1] = hi;
            v
        }
    }
}

/// Rows `(x0, x1, f_original, f_surrogate)` over the bounds box, `x0` in the
/// outer loop.
pub fn surface_grid<L: Landscape + ?Sized>(
    landscape: &L,
    program: &Program,
    resolution: usize,
) -> Result<Vec<[f64; 4]>> {
    if landscape.dimension() != 2 || program.dimension() != 2 {
        return Err(Error::invalid(
            "surface export needs a 2-D landscape and program",
        ));
    }
    if resolution == 0 {
        return Err(Error::invalid("resolution must be positive"));
    }
    let b = landscape.bounds();
    let xs = linspace(b.lo(0), b.hi(0), resolution);
    let ys = linspace(b.lo(1), b.hi(1), resolution);
    let mut rows = Vec::with_capacity(resolution * resolution);
    for &x0 in &xs {
        for &x1 in &ys {
            let p = [x0, x1];
            rows.push([x0, x1, landscape.evaluate(&p)?, program.eval(&p)]);
        }
    }
    Ok(rows)
}

pub fn export_surface_grid<L: Landscape + ?Sized>(
    landscape: &L,
    program: &Program,
    resolution: usize,
    path: &Path,
) -> Result<()> {
    let rows = surface_grid(landscape, program, resolution)?;
    let mut out = format!("{SURFACE_HEADER}\n");
    for [a, b, c, d] in rows {
        out.push_str(&format!("{a},{b},{c},{d}\n"));
    }
    write_file(path, &out)
}

pub fn catalog_csv() -> String {
    let mut out = format!("{CATALOG_HEADER}\n");
    for kind in FunctionKind::ALL {
        for d in CAMPAIGN_DIMENSIONS {
            let f = BenchmarkFunction::new(kind, d).expect("catalog dimensions are valid");
            let (lo, hi) = kind.domain();
            let min = f.known_minimum().map(|m| m.to_string()).unwrap_or_default();
            let arg = f
                .known_argmin()
                .map(|x| x.iter().map(f64::to_string).collect::<Vec<_>>().join(" "))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{d},{lo},{hi},{min},{arg},{}\n",
                kind.name(),
                f.verified()
            ));
        }
    }
    out
}

pub fn dump_catalog(path: &Path) -> Result<()> {
    write_file(path, &catalog_csv())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| Error::io(path, e))
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// keys are lower-cased with `-` folded to `_`.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key=value, got '{raw}'", n + 1))
        })?;
        let key = k.trim().to_ascii_lowercase().replace('-', "_");
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", n + 1)));
        }
        out.insert(key, v.trim().to_owned());
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

/// Expands a function selector: a name, or `all`.
pub fn parse_functions(s: &str) -> Result<Vec<FunctionKind>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(FunctionKind::ALL.to_vec());
    }
    s.split(',').map(|p| p.trim().parse()).collect()
}

/// Expands a dimension selector: `2`, `3`, `4`, a comma list, or `all`.
pub fn parse_dimensions(s: &str) -> Result<Vec<usize>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(CAMPAIGN_DIMENSIONS.to_vec());
    }
    s.split(',')
        .map(|p| {
            let d: usize = p
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad dimension '{p}'")))?;
            if CAMPAIGN_DIMENSIONS.contains(&d) {
                Ok(d)
            } else {
                Err(Error::Config(format!(
                    "dimension {d} is not one of 2, 3, 4"
                )))
            }
        })
        .collect()
}
