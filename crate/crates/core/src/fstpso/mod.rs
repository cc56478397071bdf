//! Fuzzy self-tuning particle swarm optimisation over a box.
//!
//! Every iteration each particle runs a Sugeno inference on how its value
//! changed and how far it is from the swarm best, and gets its own inertia,
//! acceleration coefficients and speed limits. No swarm hyperparameters are
//! exposed besides the evaluation budget.

mod fuzzy;

use rand::Rng;

use crate::benchmarks::Bounds;
use crate::error::{Error, Result};

pub use fuzzy::{
    delta_memberships, fuzzy_update, phi_memberships, FuzzyInputs, Tuning, OUTPUT_RANGES, RULES,
};

/// Minimum speed is this fraction of the axis width times `vmin_scale`.
const VMIN_FRACTION: f64 = 0.01;

/// Swarm size heuristic: `floor(10 + 2 sqrt(D))`.
pub fn swarm_size(dimension: usize) -> usize {
    (10.0 + 2.0 * (dimension as f64).sqrt()).floor() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub value: f64,
    pub previous_value: f64,
    pub best_position: Vec<f64>,
    pub best_value: f64,
    pub tuning: Tuning,
    pub vmax: Vec<f64>,
    pub vmin: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    pub particles: Vec<Particle>,
    pub global_best_position: Vec<f64>,
    pub global_best_value: f64,
    pub iteration: usize,
    pub evaluations: usize,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn clamp_speed(v: f64, vmin: f64, vmax: f64) -> f64 {
    let s = v.abs();
    if s > vmax {
        vmax.copysign(v)
    } else if s > 0.0 && s < vmin {
        vmin.copysign(v)
    } else {
        v
    }
}

impl SwarmState {
    /// Places `size` particles uniformly in the box with zero velocity and
    /// evaluates each once.
    pub fn init<F, R>(objective: &F, bounds: &Bounds, size: usize, rng: &mut R) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + ?Sized,
        R: Rng + ?Sized,
    {
        if size == 0 {
            return Err(Error::invalid("swarm needs at least one particle"));
        }
        let dim = bounds.dimension();
        let neutral = fuzzy_update(&FuzzyInputs::from_observation(0.0, 0.0, 0.0, 1.0));
        let particles: Vec<Particle> = (0..size)
            .map(|_| {
                let position = bounds.sample(rng);
                let value = sanitize(objective(&position));
                Particle {
                    velocity: vec![0.0; dim],
                    best_position: position.clone(),
                    position,
                    value,
                    previous_value: value,
                    best_value: value,
                    tuning: neutral,
                    vmax: (0..dim)
                        .map(|d| neutral.vmax_scale * bounds.width(d))
                        .collect(),
                    vmin: vec![0.0; dim],
                }
            })
            .collect();
        let mut state = SwarmState {
            global_best_position: particles[0].best_position.clone(),
            global_best_value: particles[0].best_value,
            particles,
            iteration: 0,
            evaluations: size,
        };
        state.refresh_global_best();
        Ok(state)
    }

    fn refresh_global_best(&mut self) {
        for p in &self.particles {
            if p.best_value < self.global_best_value {
                self.global_best_value = p.best_value;
                self.global_best_position.clone_from(&p.best_position);
            }
        }
    }

    /// One synchronous iteration: tune, move, clamp, evaluate, update bests.
    pub fn step<F, R>(&mut self, objective: &F, bounds: &Bounds, rng: &mut R)
    where
        F: Fn(&[f64]) -> f64 + ?Sized,
        R: Rng + ?Sized,
    {
        let diagonal = bounds.diagonal();
        let gbest = &self.global_best_position;
        for p in &mut self.particles {
            let distance = p
                .position
                .iter()
                .zip(gbest)
                .map(|(x, g)| (x - g) * (x - g))
                .sum::<f64>()
                .sqrt();
            let inputs =
                FuzzyInputs::from_observation(p.value, p.previous_value, distance, diagonal);
            let t = fuzzy_update(&inputs);
            p.tuning = t;
            #[allow(clippy::needless_range_loop)]
            for d in 0..p.position.len() {
                let width = bounds.width(d);
                let vmax = t.vmax_scale * width;
                let vmin = (t.vmin_scale * VMIN_FRACTION * width).min(vmax);
                p.vmax[d] = vmax;
                p.vmin[d] = vmin;

                let r1: f64 = rng.gen();
                let r2: f64 = rng.gen();
                let x = p.position[d];
                let v = t.inertia * p.velocity[d]
                    + t.cognitive * r1 * (p.best_position[d] - x)
                    + t.social * r2 * (gbest[d] - x);
                let v = clamp_speed(v, vmin, vmax);
                let moved = x + v;
                let (lo, hi) = (bounds.lo(d), bounds.hi(d));
                if moved < lo || moved > hi {
                    p.position[d] = moved.clamp(lo, hi);
                    p.velocity[d] = 0.0;
                } else {
                    p.position[d] = moved;
                    p.velocity[d] = v;
                }
            }
            p.previous_value = p.value;
            p.value = sanitize(objective(&p.position));
            if p.value < p.best_value {
                p.best_value = p.value;
                p.best_position.clone_from(&p.position);
            }
        }
        self.evaluations += self.particles.len();
        self.iteration += 1;
        self.refresh_global_best();
    }
}

/// Outcome of [`optimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub argmin: Vec<f64>,
    pub min_value: f64,
    pub evaluations: usize,
    pub iterations: usize,
    /// Global best after initialisation and after every iteration.
    pub best_history: Vec<f64>,
}

/// Minimises `objective` over `bounds` using at most `budget` evaluations.
pub fn optimize<F, R>(
    objective: &F,
    bounds: &Bounds,
    budget: usize,
    rng: &mut R,
) -> Result<OptimizeResult>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
    R: Rng + ?Sized,
{
    let size = swarm_size(bounds.dimension());
    if budget < size {
        return Err(Error::invalid(format!(
            "budget {budget} is smaller than the swarm size {size}"
        )));
    }
    let mut state = SwarmState::init(objective, bounds, size, rng)?;
    let mut best_history = vec![state.global_best_value];
    while state.evaluations + size <= budget {
        state.step(objective, bounds, rng);
        best_history.push(state.global_best_value);
    }
    Ok(OptimizeResult {
        argmin: state.global_best_position,
        min_value: state.global_best_value,
        evaluations: state.evaluations,
        iterations: state.iteration,
        best_history,
    })
}
