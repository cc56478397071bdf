//! The nine rugged benchmark landscapes, their search boxes and known optima.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

/// Absolute tolerance used when checking a catalogued optimum.
pub const OPTIMUM_TOLERANCE: f64 = 1e-3;

const SCHWEFEL_OFFSET: f64 = 418.9829;
const SCHWEFEL_ARGMIN: f64 = 420.9687;
const MICHALEWICZ_K: i32 = 10;

/// Axis-aligned search box, one closed interval per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    intervals: Vec<(f64, f64)>,
}

impl Bounds {
    /// Builds a box from explicit intervals. Zero-width intervals are allowed
    /// here; benchmark functions additionally require `lo < hi`.
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::invalid("bounds need at least one dimension"));
        }
        for (d, &(lo, hi)) in intervals.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::invalid(format!(
                    "bad interval [{lo}, {hi}] in dimension {d}"
                )));
            }
        }
        Ok(Bounds { intervals })
    }

    /// The same interval repeated over `dimension` axes.
    pub fn uniform(lo: f64, hi: f64, dimension: usize) -> Result<Self> {
        Self::new(vec![(lo, hi); dimension])
    }

    pub fn dimension(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn lo(&self, d: usize) -> f64 {
        self.intervals[d].0
    }

    pub fn hi(&self, d: usize) -> f64 {
        self.intervals[d].1
    }

    pub fn width(&self, d: usize) -> f64 {
        self.intervals[d].1 - self.intervals[d].0
    }

    /// Euclidean length of the box diagonal.
    pub fn diagonal(&self) -> f64 {
        self.intervals
            .iter()
            .map(|(lo, hi)| (hi - lo) * (hi - lo))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dimension()
            && x.iter()
                .zip(&self.intervals)
                .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }

    /// Clamps `x` into the box in place.
    pub fn clamp(&self, x: &mut [f64]) {
        for (v, &(lo, hi)) in x.iter_mut().zip(&self.intervals) {
            *v = v.clamp(lo, hi);
        }
    }

    /// Draws one point uniformly from the box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.intervals
            .iter()
            .map(|&(lo, hi)| if lo == hi { lo } else { rng.gen_range(lo..=hi) })
            .collect()
    }
}

/// Anything that can be sampled as a target landscape: a dimension, a box,
/// and a fallible evaluator.
pub trait Landscape: Sync {
    fn dimension(&self) -> usize;
    fn bounds(&self) -> &Bounds;
    fn evaluate(&self, x: &[f64]) -> Result<f64>;
}

/// The catalogued benchmark families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionKind {
    Ackley,
    Alpine,
    Griewank,
    Michalewicz,
    Rastrigin,
    Rosenbrock,
    Schwefel,
    Vincent,
    XinSheYang2,
}

impl FunctionKind {
    pub const ALL: [FunctionKind; 9] = [
        FunctionKind::Ackley,
        FunctionKind::Alpine,
        FunctionKind::Griewank,
        FunctionKind::Michalewicz,
        FunctionKind::Rastrigin,
        FunctionKind::Rosenbrock,
        FunctionKind::Schwefel,
        FunctionKind::Vincent,
        FunctionKind::XinSheYang2,
    ];

    /// Lowercase identifier used on the command line and in CSV output.
    pub fn name(self) -> &'static str {
        match self {
            FunctionKind::Ackley => "ackley",
            FunctionKind::Alpine => "alpine",
            FunctionKind::Griewank => "griewank",
            FunctionKind::Michalewicz => "michalewicz",
            FunctionKind::Rastrigin => "rastrigin",
            FunctionKind::Rosenbrock => "rosenbrock",
            FunctionKind::Schwefel => "schwefel",
            FunctionKind::Vincent => "vincent",
            FunctionKind::XinSheYang2 => "xinsheyang2",
        }
    }

    /// Per-axis search interval; identical on every axis.
    pub fn domain(self) -> (f64, f64) {
        match self {
            FunctionKind::Ackley => (-30.0, 30.0),
            FunctionKind::Alpine => (-10.0, 10.0),
            FunctionKind::Griewank => (-600.0, 600.0),
            FunctionKind::Michalewicz => (0.0, PI),
            FunctionKind::Rastrigin => (-5.12, 5.12),
            FunctionKind::Rosenbrock => (-5.0, 10.0),
            FunctionKind::Schwefel => (-500.0, 500.0),
            FunctionKind::Vincent => (0.25, 10.0),
            FunctionKind::XinSheYang2 => (-2.0 * PI, 2.0 * PI),
        }
    }

    /// Closed form, without any domain or dimension checks.
    pub fn eval_raw(self, x: &[f64]) -> f64 {
        let dim = x.len() as f64;
        match self {
            FunctionKind::Ackley => {
                let sq = x.iter().map(|v| v * v).sum::<f64>() / dim;
                let cos = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / dim;
                20.0 + E - 20.0 * (-0.2 * sq.sqrt()).exp() - cos.exp()
            }
            FunctionKind::Alpine => x.iter().map(|v| (v * v.sin() + 0.1 * v).abs()).sum(),
            FunctionKind::Griewank => {
                let sum = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
                let prod = x
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
                    .product::<f64>();
                sum - prod + 1.0
            }
            FunctionKind::Michalewicz => -x
                .iter()
                .enumerate()
                .map(|(i, v)| v.sin() * ((i + 1) as f64 * v * v / PI).sin().powi(2 * MICHALEWICZ_K))
                .sum::<f64>(),
            FunctionKind::Rastrigin => {
                10.0 * dim
                    + x.iter()
                        .map(|v| v * v - 10.0 * (2.0 * PI * v).cos())
                        .sum::<f64>()
            }
            FunctionKind::Rosenbrock => x
                .windows(2)
                .map(|w| 10.0 * (w[0] * w[0] - w[1]).powi(2) + (w[0] - 1.0).powi(2))
                .sum(),
            FunctionKind::Schwefel => {
                SCHWEFEL_OFFSET * dim - x.iter().map(|v| v * v.abs().sqrt().sin()).sum::<f64>()
            }
            FunctionKind::Vincent => x.iter().map(|v| (10.0 * v.ln()).sin()).sum(),
            FunctionKind::XinSheYang2 => {
                let abs = x.iter().map(|v| v.abs()).sum::<f64>();
                let sines = x.iter().map(|v| (v * v).sin()).sum::<f64>();
                abs * (-sines).exp()
            }
        }
    }

    /// Catalogued optimum for this family at `dimension`, if one is known.
    fn optimum(self, dimension: usize) -> Option<(f64, Vec<f64>)> {
        let d = dimension as f64;
        match self {
            FunctionKind::Ackley
            | FunctionKind::Alpine
            | FunctionKind::Griewank
            | FunctionKind::Rastrigin
            | FunctionKind::XinSheYang2 => Some((0.0, vec![0.0; dimension])),
            FunctionKind::Rosenbrock => Some((0.0, vec![1.0; dimension])),
            FunctionKind::Schwefel => Some((0.0, vec![SCHWEFEL_ARGMIN; dimension])),
            FunctionKind::Michalewicz if dimension == 2 => Some((-1.801, vec![2.2044, 1.5692])),
            FunctionKind::Michalewicz => None,
            // Stored as tabulated; sin(10 ln 0.25) is not -1, hence unverified.
            FunctionKind::Vincent => Some((-d, vec![0.25; dimension])),
        }
    }
}

impl fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' ' | '.'))
            .flat_map(char::to_lowercase)
            .collect();
        FunctionKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown benchmark function '{s}'")))
    }
}

/// A benchmark family instantiated at a concrete dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkFunction {
    kind: FunctionKind,
    bounds: Bounds,
    known_minimum: Option<f64>,
    known_argmin: Option<Vec<f64>>,
    verified: bool,
}

impl BenchmarkFunction {
    pub fn new(kind: FunctionKind, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if kind == FunctionKind::Rosenbrock && dimension < 2 {
            return Err(Error::invalid("rosenbrock needs at least two dimensions"));
        }
        let (lo, hi) = kind.domain();
        let bounds = Bounds::uniform(lo, hi, dimension)?;
        let (known_minimum, known_argmin) = match kind.optimum(dimension) {
            Some((m, x)) => (Some(m), Some(x)),
            None => (None, None),
        };
        let verified = known_minimum.is_some() && kind != FunctionKind::Vincent;
        Ok(BenchmarkFunction {
            kind,
            bounds,
            known_minimum,
            known_argmin,
            verified,
        })
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn known_minimum(&self) -> Option<f64> {
        self.known_minimum
    }

    pub fn known_argmin(&self) -> Option<&[f64]> {
        self.known_argmin.as_deref()
    }

    /// Whether the catalogued optimum is consistent with the closed form.
    pub fn verified(&self) -> bool {
        self.verified
    }

    /// Tolerance for `|f(argmin) - minimum|`. Schwefel's argmin is tabulated
    /// to four decimals, so its residual grows with the dimension.
    pub fn optimum_tolerance(&self) -> f64 {
        match self.kind {
            FunctionKind::Schwefel => OPTIMUM_TOLERANCE * self.dimension() as f64,
            _ => OPTIMUM_TOLERANCE,
        }
    }
}

impl Landscape for BenchmarkFunction {
    fn dimension(&self) -> usize {
        self.bounds.dimension()
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension() {
            return Err(Error::invalid(format!(
                "{} expects {} coordinates, got {}",
                self.name(),
                self.dimension(),
                x.len()
            )));
        }
        if !self.bounds.contains(x) {
            return Err(Error::invalid(format!(
                "point {x:?} is outside the {} domain",
                self.name()
            )));
        }
        Ok(self.kind.eval_raw(x))
    }
}

/// A sampled point together with the landscape value there.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePoint {
    pub point: Vec<f64>,
    pub value: f64,
}

/// Draws `n` i.i.d. uniform points from the landscape's box and evaluates them.
pub fn sample_uniform<L, R>(landscape: &L, n: usize, rng: &mut R) -> Result<Vec<SamplePoint>>
where
    L: Landscape + ?Sized,
    R: Rng + ?Sized,
{
    if n == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    (0..n)
        .map(|_| {
            let point = landscape.bounds().sample(rng);
            let value = landscape.evaluate(&point)?;
            Ok(SamplePoint { point, value })
        })
        .collect()
}
