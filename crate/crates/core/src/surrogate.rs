//! The surrogate-evolution loop.
//!
//! Loss of a candidate program `p` against landscape `f`:
//! `L = f(argmin_pso(p)) + RMSE(f, p)`, with the RMSE taken over one uniform
//! sample drawn at the start of the run and shared by every individual.

use std::time::{Duration, Instant};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::benchmarks::{sample_uniform, Landscape, SamplePoint};
use crate::error::{Error, Result};
use crate::fstpso::{optimize, swarm_size};
use crate::par::{self, Execution};
use crate::stackgp::{mutate, random_program, two_point_crossover, ConstRange, Program};

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub tournament_size: usize,
    pub initial_max_length: usize,
    pub rmse_samples: usize,
    /// PSO iterations per fitness call; the evaluation budget is this times
    /// the swarm size.
    pub pso_iterations: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl EvolutionConfig {
    /// Defaults for a `dimension`-dimensional landscape: population 50 below
    /// four dimensions and 100 from four up, 100 generations, mutation rate
    /// 0.2, tournaments of 4, initial programs of at most 10 instructions,
    /// `100 * D` RMSE samples and 100 PSO iterations.
    pub fn for_dimension(dimension: usize) -> Self {
        EvolutionConfig {
            population_size: default_population(dimension),
            generations: 100,
            mutation_rate: 0.2,
            tournament_size: 4,
            initial_max_length: 10,
            rmse_samples: 100 * dimension.max(1),
            pso_iterations: 100,
            seed: 0,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("population_size", self.population_size),
            ("generations", self.generations),
            ("rmse_samples", self.rmse_samples),
            ("pso_iterations", self.pso_iterations),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if self.tournament_size < 2 {
            return Err(Error::Config("tournament_size must be at least 2".into()));
        }
        if self.tournament_size > self.population_size {
            return Err(Error::Config(format!(
                "tournament_size {} exceeds population_size {}",
                self.tournament_size, self.population_size
            )));
        }
        if self.initial_max_length < 2 {
            return Err(Error::Config(
                "initial_max_length must be at least 2".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::Config(format!(
                "mutation_rate {} is not a probability",
                self.mutation_rate
            )));
        }
        Ok(())
    }
}

pub fn default_population(dimension: usize) -> usize {
    if dimension >= 4 {
        100
    } else {
        50
    }
}

/// A program together with every part of its loss.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredIndividual {
    pub program: Program,
    /// Argminimum of the surrogate as located by the swarm.
    pub argmin: Vec<f64>,
    /// Original landscape at `argmin`.
    pub f_at_argmin: f64,
    /// Surrogate value at `argmin`.
    pub pso_min_value: f64,
    pub rmse: f64,
    /// `f_at_argmin + rmse`.
    pub fitness: f64,
}

/// RMSE computed with a max-magnitude rescale so large but finite errors do
/// not overflow when squared.
fn rmse(program: &Program, sampled: &[SamplePoint]) -> f64 {
    let errors: Vec<f64> = sampled
        .iter()
        .map(|s| s.value - program.eval(&s.point))
        .collect();
    let scale = errors.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let mean = errors.iter().map(|e| (e / scale).powi(2)).sum::<f64>() / errors.len() as f64;
    scale * mean.sqrt()
}

/// Scores one program: minimise it with the swarm, evaluate the landscape at
/// the argminimum and add the RMSE over `sampled`.
pub fn fitness<L, R>(
    program: &Program,
    landscape: &L,
    sampled: &[SamplePoint],
    pso_iterations: usize,
    rng: &mut R,
) -> Result<ScoredIndividual>
where
    L: Landscape + ?Sized,
    R: Rng + ?Sized,
{
    if sampled.is_empty() {
        return Err(Error::invalid("fitness needs at least one sampled point"));
    }
    if program.dimension() != landscape.dimension() {
        return Err(Error::invalid(format!(
            "program dimension {} differs from landscape dimension {}",
            program.dimension(),
            landscape.dimension()
        )));
    }
    let bounds = landscape.bounds();
    let budget = pso_iterations.max(1) * swarm_size(bounds.dimension());
    let objective = |x: &[f64]| program.eval(x);
    let found = optimize(&objective, bounds, budget, rng)?;
    assert!(
        bounds.contains(&found.argmin),
        "swarm returned an out-of-bounds point"
    );
    let f_at_argmin = landscape.evaluate(&found.argmin)?;
    let rmse = rmse(program, sampled);
    Ok(ScoredIndividual {
        program: program.clone(),
        argmin: found.argmin,
        f_at_argmin,
        pso_min_value: found.min_value,
        rmse,
        fitness: f_at_argmin + rmse,
    })
}

/// Draws `k` distinct individuals and returns the indices of the best two,
/// ties going to the lower population index.
pub fn tournament_select<R: Rng + ?Sized>(
    population: &[ScoredIndividual],
    k: usize,
    rng: &mut R,
) -> Result<(usize, usize)> {
    if k < 2 {
        return Err(Error::invalid("tournament size must be at least 2"));
    }
    if population.len() < k {
        return Err(Error::invalid(format!(
            "population of {} is smaller than tournament size {k}",
            population.len()
        )));
    }
    let mut drawn = index::sample(rng, population.len(), k).into_vec();
    drawn.sort_by(|&a, &b| {
        population[a]
            .fitness
            .total_cmp(&population[b].fitness)
            .then(a.cmp(&b))
    });
    Ok((drawn[0], drawn[1]))
}

/// Outcome of one evolutionary run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub best: ScoredIndividual,
    /// Best loss in the population after each generation.
    pub best_fitness_per_generation: Vec<f64>,
    pub total_benchmark_evaluations: usize,
    pub wall_time: Duration,
}

impl RunRecord {
    /// Whether the per-generation best never increases.
    pub fn is_elitist(&self) -> bool {
        self.best_fitness_per_generation
            .windows(2)
            .all(|w| w[1] <= w[0])
    }
}

/// Independent random stream `stream` derived from a run seed. Stream 0
/// drives sampling, initialisation, selection and variation; stream `n + 1`
/// drives the swarm of the n-th scored individual.
pub fn run_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn index_of_best(pop: &[ScoredIndividual]) -> usize {
    pop.iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.fitness.total_cmp(&b.fitness).then(i.cmp(j)))
        .map(|(i, _)| i)
        .expect("population is never empty")
}

struct Scorer<'a, L: ?Sized> {
    landscape: &'a L,
    sampled: &'a [SamplePoint],
    config: &'a EvolutionConfig,
    scored: u64,
}

impl<L: Landscape + ?Sized> Scorer<'_, L> {
    /// Scores a batch, possibly in parallel. Each program gets its own stream
    /// keyed by a running counter, so results do not depend on scheduling.
    fn score(&mut self, programs: Vec<Program>) -> Result<Vec<ScoredIndividual>> {
        let first = self.scored;
        self.scored += programs.len() as u64;
        let (landscape, sampled, config) = (self.landscape, self.sampled, self.config);
        par::map_indexed(config.execution, programs.len(), |i| {
            let mut rng = run_stream(config.seed, first + i as u64 + 1);
            fitness(
                &programs[i],
                landscape,
                sampled,
                config.pso_iterations,
                &mut rng,
            )
        })
        .into_iter()
        .collect()
    }
}

/// Runs the full loop: sample once, score a random population, then per
/// generation breed `ceil(N/2)` offspring pairs via tournament, two-point
/// crossover and mutation, keep the best `N - 1` offspring and re-inject the
/// incumbent best.
pub fn evolve<L: Landscape + ?Sized>(landscape: &L, config: &EvolutionConfig) -> Result<RunRecord> {
    config.validate()?;
    let started = Instant::now();
    let dim = landscape.dimension();
    let mut rng = run_stream(config.seed, 0);

    let sampled = sample_uniform(landscape, config.rmse_samples, &mut rng)?;
    let (lo, hi) = landscape.bounds().intervals()[0];
    let const_range = ConstRange::for_domain(lo, hi)?;

    let mut scorer = Scorer {
        landscape,
        sampled: &sampled,
        config,
        scored: 0,
    };

    let initial = (0..config.population_size)
        .map(|_| random_program(dim, config.initial_max_length, const_range, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let mut population = scorer.score(initial)?;

    let mut trace = Vec::with_capacity(config.generations);
    for _ in 0..config.generations {
        let elite = population[index_of_best(&population)].clone();

        let pairs = config.population_size.div_ceil(2);
        let mut offspring = Vec::with_capacity(2 * pairs);
        for _ in 0..pairs {
            let (a, b) = tournament_select(&population, config.tournament_size, &mut rng)?;
            let (c1, c2) =
                two_point_crossover(&population[a].program, &population[b].program, &mut rng)?;
            offspring.push(mutate(&c1, config.mutation_rate, const_range, &mut rng));
            offspring.push(mutate(&c2, config.mutation_rate, const_range, &mut rng));
        }
        let scored = scorer.score(offspring)?;

        // Keep the best N - 1 offspring in their original order, then the elite.
        let mut order: Vec<usize> = (0..scored.len()).collect();
        order.sort_by(|&i, &j| {
            scored[i]
                .fitness
                .total_cmp(&scored[j].fitness)
                .then(i.cmp(&j))
        });
        order.truncate(config.population_size - 1);
        order.sort_unstable();
        let mut next: Vec<ScoredIndividual> =
            order.into_iter().map(|i| scored[i].clone()).collect();
        next.push(elite);
        debug_assert_eq!(next.len(), config.population_size);
        population = next;

        trace.push(population[index_of_best(&population)].fitness);
    }

    let best = population[index_of_best(&population)].clone();
    let record = RunRecord {
        best,
        best_fitness_per_generation: trace,
        total_benchmark_evaluations: config.rmse_samples + scorer.scored as usize,
        wall_time: started.elapsed(),
    };
    assert!(
        record.is_elitist(),
        "elitism violated: {:?}",
        record.best_fitness_per_generation
    );
    Ok(record)
}
