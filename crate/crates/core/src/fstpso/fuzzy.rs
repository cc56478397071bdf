//! Zero-order Sugeno rule base that re-tunes each particle every iteration.
//!
//! Two inputs, three triangular terms each, nine rules. The terms of each
//! input form a partition of unity and rules fire with the product of their
//! antecedent memberships, so the firing strengths always sum to 1 and every
//! output is a convex combination of the consequent table.

use crate::error::{Error, Result};

/// Per-particle settings produced by one inference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tuning {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Fraction of the axis width used as maximum speed.
    pub vmax_scale: f64,
    /// Fraction of 1% of the axis width used as minimum speed.
    pub vmin_scale: f64,
}

impl Tuning {
    const fn new(
        inertia: f64,
        cognitive: f64,
        social: f64,
        vmax_scale: f64,
        vmin_scale: f64,
    ) -> Self {
        Tuning {
            inertia,
            cognitive,
            social,
            vmax_scale,
            vmin_scale,
        }
    }

    fn as_array(&self) -> [f64; 5] {
        [
            self.inertia,
            self.cognitive,
            self.social,
            self.vmax_scale,
            self.vmin_scale,
        ]
    }

    fn from_array(a: [f64; 5]) -> Self {
        Tuning::new(a[0], a[1], a[2], a[3], a[4])
    }
}

/// Documented output ranges, as `(min, max)` for each [`Tuning`] field in order.
pub const OUTPUT_RANGES: [(f64, f64); 5] =
    [(0.3, 1.0), (0.1, 3.0), (0.1, 3.0), (0.0, 1.0), (0.0, 1.0)];

/// Consequents indexed `[phi term][delta term]`.
/// phi terms: Better, Same, Worse. delta terms: Near, Same, Far.
pub const RULES: [[Tuning; 3]; 3] = [
    [
        Tuning::new(0.4, 2.2, 1.0, 0.2, 0.0),
        Tuning::new(0.5, 2.0, 1.5, 0.4, 0.0),
        Tuning::new(0.6, 1.8, 2.0, 0.6, 0.1),
    ],
    [
        Tuning::new(0.5, 1.8, 1.5, 0.3, 0.0),
        Tuning::new(0.65, 1.5, 1.8, 0.5, 0.1),
        Tuning::new(0.8, 1.2, 2.2, 0.8, 0.5),
    ],
    [
        Tuning::new(0.6, 1.5, 1.8, 0.4, 0.1),
        Tuning::new(0.8, 1.2, 2.0, 0.7, 0.5),
        Tuning::new(0.9, 1.0, 2.5, 1.0, 1.0),
    ],
];

/// Inputs to the rule base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzyInputs {
    phi: f64,
    delta: f64,
}

impl FuzzyInputs {
    /// `phi` is the normalised change in the particle's value since the last
    /// iteration (positive when it got worse), in `[-1, 1]`. `delta` is the
    /// normalised distance to the global best, in `[0, 1]`.
    pub fn new(phi: f64, delta: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&phi) {
            return Err(Error::invalid(format!("phi {phi} outside [-1, 1]")));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::invalid(format!("delta {delta} outside [0, 1]")));
        }
        Ok(FuzzyInputs { phi, delta })
    }

    /// Builds inputs from raw quantities, clamping into range.
    pub fn from_observation(current: f64, previous: f64, distance: f64, diagonal: f64) -> Self {
        let mut phi = (current - previous) / (previous.abs() + 1.0);
        if !phi.is_finite() {
            phi = 0.0;
        }
        let mut delta = if diagonal > 0.0 {
            distance / diagonal
        } else {
            0.0
        };
        if !delta.is_finite() {
            delta = 0.0;
        }
        FuzzyInputs {
            phi: phi.clamp(-1.0, 1.0),
            delta: delta.clamp(0.0, 1.0),
        }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Memberships of `phi` in Better / Same / Worse (peaks at -1, 0, 1).
pub fn phi_memberships(phi: f64) -> [f64; 3] {
    [(-phi).max(0.0), 1.0 - phi.abs(), phi.max(0.0)]
}

/// Memberships of `delta` in Near / Same / Far (peaks at 0, 0.5, 1).
pub fn delta_memberships(delta: f64) -> [f64; 3] {
    let t = 2.0 * delta;
    [
        (1.0 - t).max(0.0),
        1.0 - (t - 1.0).abs(),
        (t - 1.0).max(0.0),
    ]
}

/// Sugeno inference: firing-strength weighted mean of the rule consequents.
pub fn fuzzy_update(inputs: &FuzzyInputs) -> Tuning {
    let mu = phi_memberships(inputs.phi);
    let nu = delta_memberships(inputs.delta);
    let mut num = [0.0; 5];
    let mut den = 0.0;
    for (i, m) in mu.iter().enumerate() {
        for (j, n) in nu.iter().enumerate() {
            let w = m * n;
            if w == 0.0 {
                continue;
            }
            den += w;
            for (acc, c) in num.iter_mut().zip(RULES[i][j].as_array()) {
                *acc += w * c;
            }
        }
    }
    Tuning::from_array(num.map(|v| v / den))
}
