//! Lay-down model types and the Euler-Maruyama path simulator.
//!
//! The process starts at the origin and solves
//!
//! ```text
//! dY1 = -lambda (Y1 - kappa t) dt + sigma1 dW1
//! dY2 = -lambda  Y2            dt + sigma2 dW2
//! ```
//!
//! i.e. an isotropic Ornstein-Uhlenbeck process whose attractor moves with
//! the conveyor belt at speed `kappa` along the first axis.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Default Euler-Maruyama step when a grid is built from a horizon alone.
pub const DEFAULT_STEP: f64 = 0.005;

/// Stiffness and diffusion coefficients `(lambda, sigma1, sigma2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    lambda: f64,
    sigma1: f64,
    sigma2: f64,
}

impl ModelParams {
    pub fn new(lambda: f64, sigma1: f64, sigma2: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParams(format!(
                "lambda must be finite and > 0, got {lambda}"
            )));
        }
        for (name, s) in [("sigma1", sigma1), ("sigma2", sigma2)] {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and >= 0, got {s}"
                )));
            }
        }
        Ok(Self {
            lambda,
            sigma1,
            sigma2,
        })
    }

    /// Like [`ModelParams::new`] but folds negative diffusion coefficients
    /// onto their absolute value; the law of the process only sees `|sigma|`.
    pub fn canonical(lambda: f64, sigma1: f64, sigma2: f64) -> Result<Self> {
        Self::new(lambda, sigma1.abs(), sigma2.abs())
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sigma1(&self) -> f64 {
        self.sigma1
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.lambda, self.sigma1, self.sigma2]
    }
}

/// Conveyor belt speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeltConfig {
    kappa: f64,
}

impl BeltConfig {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "belt speed must be finite and >= 0, got {kappa}"
            )));
        }
        Ok(Self { kappa })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// Uniform time grid `tau_i = i * horizon / num_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    num_steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, num_steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "horizon must be finite and > 0, got {horizon}"
            )));
        }
        if num_steps == 0 {
            return Err(Error::InvalidGrid("num_steps must be >= 1".into()));
        }
        Ok(Self { horizon, num_steps })
    }

    /// Smallest uniform grid whose step does not exceed `max_step`.
    pub fn with_max_step(horizon: f64, max_step: f64) -> Result<Self> {
        if !(max_step.is_finite() && max_step > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "step must be finite and > 0, got {max_step}"
            )));
        }
        let steps = (horizon / max_step).ceil();
        if !(steps.is_finite() && steps >= 1.0) {
            return Self::new(horizon, 1);
        }
        Self::new(horizon, steps as usize)
    }

    /// Grid with `ceil(horizon * steps_per_unit)` steps.
    pub fn with_rate(horizon: f64, steps_per_unit: f64) -> Result<Self> {
        Self::with_max_step(horizon, 1.0 / steps_per_unit)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.num_steps as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        self.horizon * i as f64 / self.num_steps as f64
    }
}

/// Axis-aligned rectangle `[a1, b1] x [a2, b2]`. Infinite bounds are allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

impl Rect {
    pub fn new(a1: f64, b1: f64, a2: f64, b2: f64) -> Result<Self> {
        if [a1, b1, a2, b2].iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidRegion("bounds must not be NaN".into()));
        }
        if a1 > b1 || a2 > b2 {
            return Err(Error::InvalidRegion(format!(
                "need a1 <= b1 and a2 <= b2, got [{a1}, {b1}] x [{a2}, {b2}]"
            )));
        }
        Ok(Self { a1, b1, a2, b2 })
    }

    /// Closed-rectangle membership.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.a1 <= p[0] && p[0] <= self.b1 && self.a2 <= p[1] && p[1] <= self.b2
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.a1 <= other.a1 && other.b1 <= self.b1 && self.a2 <= other.a2 && other.b2 <= self.b2
    }

    /// Reflection across the central axis `y2 = 0`.
    pub fn mirrored(&self) -> Rect {
        Rect {
            a1: self.a1,
            b1: self.b1,
            a2: -self.b2,
            b2: -self.a2,
        }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Rect {
        Rect {
            a1: self.a1 + dx,
            b1: self.b1 + dx,
            a2: self.a2 + dy,
            b2: self.b2 + dy,
        }
    }
}

/// A time-stamped planar polyline starting at time 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberPath {
    times: Vec<f64>,
    points: Vec<[f64; 2]>,
}

impl FiberPath {
    pub fn new(times: Vec<f64>, points: Vec<[f64; 2]>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidPath("path has no samples".into()));
        }
        if times.len() != points.len() {
            return Err(Error::InvalidPath(format!(
                "{} time stamps but {} points",
                times.len(),
                points.len()
            )));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidPath(format!(
                "first time stamp must be 0, got {}",
                times[0]
            )));
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPath(format!(
                "time stamps not strictly increasing at index {}",
                i + 1
            )));
        }
        if times.iter().any(|t| !t.is_finite()) || points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPath("non-finite value".into()));
        }
        Ok(Self { times, points })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Total duration `T` (the last time stamp).
    pub fn duration(&self) -> f64 {
        *self.times.last().expect("nonempty by construction")
    }

    /// The path restricted to `[0, end]`, linearly interpolating the final
    /// point when `end` falls between samples.
    pub fn truncated(&self, end: f64) -> FiberPath {
        let keep = self.times.partition_point(|t| *t <= end);
        if keep == self.times.len() {
            return self.clone();
        }
        let mut times = self.times[..keep].to_vec();
        let mut points = self.points[..keep].to_vec();
        if end > times[keep - 1] {
            let (t0, t1) = (self.times[keep - 1], self.times[keep]);
            let (p0, p1) = (self.points[keep - 1], self.points[keep]);
            let s = (end - t0) / (t1 - t0);
            times.push(end);
            points.push([p0[0] + s * (p1[0] - p0[0]), p0[1] + s * (p1[1] - p0[1])]);
        }
        FiberPath { times, points }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> FiberPath {
        FiberPath {
            times: self.times.clone(),
            points: self.points.iter().map(|p| [p[0] + dx, p[1] + dy]).collect(),
        }
    }
}

/// Marginal means and standard deviations of `Y_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuMoments {
    pub mean1: f64,
    pub sd1: f64,
    pub mean2: f64,
    pub sd2: f64,
}

/// `x - 1 + exp(-x)`, accurate for small `x`.
fn drift_lag(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        // x^2/2 - x^3/6 + x^4/24 - x^5/120
        x * x * (0.5 - x * (1.0 / 6.0 - x * (1.0 / 24.0 - x / 120.0)))
    } else {
        x + (-x).exp_m1()
    }
}

/// Closed-form moments of the lay-down process started at the origin.
pub fn ou_mean_sd(params: &ModelParams, belt: &BeltConfig, t: f64) -> OuMoments {
    let lambda = params.lambda;
    let t = t.max(0.0);
    let mean1 = belt.kappa / lambda * drift_lag(lambda * t);
    // (1 - e^{-2 lambda t}) / (2 lambda), also fine as t -> infinity
    let var_unit = -(-2.0 * lambda * t).exp_m1() / (2.0 * lambda);
    let sd_unit = var_unit.sqrt();
    OuMoments {
        mean1,
        sd1: params.sigma1 * sd_unit,
        mean2: 0.0,
        sd2: params.sigma2 * sd_unit,
    }
}

/// Checks the explicit-scheme stability bound `step < 2 / lambda`.
pub fn check_stability(params: &ModelParams, grid: &TimeGrid) -> Result<()> {
    let limit = 2.0 / params.lambda;
    let step = grid.step();
    if step >= limit {
        return Err(Error::UnstableStep { step, limit });
    }
    Ok(())
}

/// Simulates one path by explicit Euler-Maruyama from `(0, 0)`.
///
/// The normal increments come from a ChaCha8 stream seeded by `seed`, two
/// draws per step (first coordinate, then second), so the path is a pure
/// function of its arguments.
pub fn simulate_path(
    params: &ModelParams,
    belt: &BeltConfig,
    grid: &TimeGrid,
    seed: u64,
) -> Result<FiberPath> {
    check_stability(params, grid)?;
    let k = grid.num_steps();
    let dt = grid.step();
    let sqrt_dt = dt.sqrt();
    let (lambda, kappa) = (params.lambda, belt.kappa);
    let (s1, s2) = (params.sigma1 * sqrt_dt, params.sigma2 * sqrt_dt);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut times = Vec::with_capacity(k + 1);
    let mut points = Vec::with_capacity(k + 1);
    let (mut y1, mut y2) = (0.0_f64, 0.0_f64);
    times.push(0.0);
    points.push([y1, y2]);
    for i in 0..k {
        let tau = grid.time(i);
        let xi1: f64 = StandardNormal.sample(&mut rng);
        let xi2: f64 = StandardNormal.sample(&mut rng);
        y1 = y1 - lambda * (y1 - kappa * tau) * dt + s1 * xi1;
        y2 = y2 - lambda * y2 * dt + s2 * xi2;
        times.push(grid.time(i + 1));
        points.push([y1, y2]);
    }
    Ok(FiberPath { times, points })
}
