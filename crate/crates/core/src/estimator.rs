//! Least-squares recovery of `(lambda, sigma1, sigma2)` from observed
//! occupation times.
//!
//! The cost is `R = sum_ij (E(D_i, kappa_j, T; lambda, sigma1, sigma2) - E_ij)^2`
//! with `E` the exact expected occupation time. It is minimized by
//! Nelder-Mead over the logarithms of the three parameters, which keeps
//! them positive without penalty terms.

use rayon::prelude::*;

use crate::analytic::expected_occupation;
use crate::error::{Error, Result};
use crate::model::{BeltConfig, ModelParams, Rect};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::quadrature::QuadratureConfig;

/// Occupation times `E[i][j]` of region `i` at belt speed `j`, all over `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    regions: Vec<Rect>,
    belt_speeds: Vec<f64>,
    horizon: f64,
    values: Vec<Vec<f64>>,
}

impl ObservationSet {
    pub fn new(
        regions: Vec<Rect>,
        belt_speeds: Vec<f64>,
        horizon: f64,
        values: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidObservations(m));
        if !(horizon.is_finite() && horizon > 0.0) {
            return bad(format!("horizon must be finite and > 0, got {horizon}"));
        }
        let (n, m) = (regions.len(), belt_speeds.len());
        if n == 0 || m == 0 {
            return bad("need at least one region and one belt speed".into());
        }
        if let Some(k) = belt_speeds.iter().find(|k| !(k.is_finite() && **k >= 0.0)) {
            return bad(format!("belt speed must be finite and >= 0, got {k}"));
        }
        if values.len() != n {
            return bad(format!("{} value rows for {n} regions", values.len()));
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != m {
                return bad(format!(
                    "row {i} has {} values for {m} belt speeds",
                    row.len()
                ));
            }
            if let Some(v) = row.iter().find(|v| !(**v >= 0.0 && **v <= horizon)) {
                return bad(format!("value {v} in row {i} outside [0, {horizon}]"));
            }
        }
        Ok(Self {
            regions,
            belt_speeds,
            horizon,
            values,
        })
    }

    pub fn regions(&self) -> &[Rect] {
        &self.regions
    }

    pub fn belt_speeds(&self) -> &[f64] {
        &self.belt_speeds
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn value(&self, region: usize, belt: usize) -> f64 {
        self.values[region][belt]
    }

    pub fn num_regions(&self) -> usize {
        self.regions.len()
    }

    pub fn num_belts(&self) -> usize {
        self.belt_speeds.len()
    }

    fn is_degenerate(&self) -> bool {
        let all = |pred: &dyn Fn(f64) -> bool| self.values.iter().flatten().all(|v| pred(*v));
        all(&|v| v == 0.0) || all(&|v| v == self.horizon)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub initial_guess: ModelParams,
    pub simplex: NelderMeadOptions,
    /// Restart exponents: each entry `e` adds a start with both diffusion
    /// coefficients scaled by `10^e`. The lowest final cost wins.
    pub sigma_ladder: Vec<i32>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            initial_guess: ModelParams::new(1.0, 1.0, 1.0).expect("valid"),
            simplex: NelderMeadOptions::default(),
            sigma_ladder: vec![0],
        }
    }
}

impl OptimizerConfig {
    /// Default settings with starts at `sigma` scaled by `1, 0.1, 0.01, 0.001`.
    pub fn multi_start() -> Self {
        Self {
            sigma_ladder: vec![0, -1, -2, -3],
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub params: ModelParams,
    pub final_cost: f64,
    /// Simplex iterations of the winning start.
    pub iterations: usize,
    /// Cost evaluations over all starts.
    pub evaluations: usize,
    pub converged: bool,
    /// Diagnostics such as poorly identified parameters.
    pub warnings: Vec<String>,
}

/// Least-squares deviation between predicted and observed occupation times.
pub fn cost(params: &ModelParams, obs: &ObservationSet, quad: &QuadratureConfig) -> Result<f64> {
    let m = obs.num_belts();
    let residuals = (0..obs.num_regions() * m)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / m, idx % m);
            let belt = BeltConfig::new(obs.belt_speeds[j])?;
            let predicted = expected_occupation(params, &belt, &obs.regions[i], obs.horizon, quad)?;
            Ok(predicted - obs.values[i][j])
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(residuals.iter().map(|r| r * r).sum())
}

fn params_from_log(x: &[f64]) -> Result<ModelParams> {
    ModelParams::new(x[0].exp(), x[1].exp(), x[2].exp())
}

/// Fits `(lambda, sigma1, sigma2)` to the observations.
pub fn estimate_params(
    obs: &ObservationSet,
    config: &OptimizerConfig,
    quad: &QuadratureConfig,
) -> Result<EstimationResult> {
    quad.validate()?;
    config.simplex.validate()?;
    let count = obs.num_regions() * obs.num_belts();
    if count < 3 {
        return Err(Error::InvalidObservations(format!(
            "{count} observations cannot determine three parameters"
        )));
    }
    if obs.is_degenerate() {
        return Err(Error::DegenerateData(
            "all observations are 0 or all equal the horizon; the cost is flat".into(),
        ));
    }
    let ladder: &[i32] = if config.sigma_ladder.is_empty() {
        &[0]
    } else {
        &config.sigma_ladder
    };

    let mut first_error: Option<Error> = None;
    let mut objective = |x: &[f64]| match params_from_log(x).and_then(|p| cost(&p, obs, quad)) {
        Ok(v) => v,
        Err(e) => {
            first_error.get_or_insert(e);
            f64::INFINITY
        }
    };

    let g = config.initial_guess;
    let mut best: Option<crate::optimize::NelderMeadResult> = None;
    let mut evaluations = 0;
    for &e in ladder {
        let scale = 10f64.powi(e);
        let start = [
            g.lambda().ln(),
            (g.sigma1() * scale).ln(),
            (g.sigma2() * scale).ln(),
        ];
        let run = nelder_mead(&mut objective, &start, &config.simplex)?;
        evaluations += run.evaluations;
        if best.as_ref().is_none_or(|b| run.value < b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("ladder is nonempty");
    if !best.value.is_finite() {
        return Err(first_error.unwrap_or_else(|| {
            Error::InvalidObservations("cost is not finite anywhere on the search path".into())
        }));
    }
    let params = params_from_log(&best.x)?;
    let warnings = flat_directions(&best.x, best.value, obs, quad, &config.simplex);
    Ok(EstimationResult {
        params,
        final_cost: best.value,
        iterations: best.iterations,
        evaluations,
        converged: best.converged,
        warnings,
    })
}

/// Names the parameters along which a 10% relative change moves the cost by
/// less than the optimizer's value tolerance.
fn flat_directions(
    x: &[f64],
    at_min: f64,
    obs: &ObservationSet,
    quad: &QuadratureConfig,
    opts: &NelderMeadOptions,
) -> Vec<String> {
    const NAMES: [&str; 3] = ["lambda", "sigma1", "sigma2"];
    let step = 1.1_f64.ln();
    let mut out = Vec::new();
    for (k, name) in NAMES.iter().enumerate() {
        let rise = [-step, step]
            .iter()
            .map(|d| {
                let mut y = x.to_vec();
                y[k] += d;
                params_from_log(&y)
                    .and_then(|p| cost(&p, obs, quad))
                    .map(|c| c - at_min)
                    .unwrap_or(f64::INFINITY)
            })
            .fold(f64::INFINITY, f64::min);
        if rise < opts.f_tol {
            out.push(format!(
                "cost is flat in {name} (10% change raises it by {rise:.3e}); the estimate is not identifiable from these observations"
            ));
        }
    }
    out
}
