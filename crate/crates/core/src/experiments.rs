//! Reference settings and reproduction harnesses: the analytic vs
//! Monte-Carlo benchmark, the reference observation matrix, the recovery
//! study and the FYDIST observation row.

use crate::analytic::expected_occupation;
use crate::error::Result;
use crate::estimator::{estimate_params, EstimationResult, ObservationSet, OptimizerConfig};
use crate::model::{BeltConfig, ModelParams, Rect, TimeGrid};
use crate::montecarlo::{mc_expected_occupation, mc_observation_matrix, McConfig, McEstimate};
use crate::quadrature::QuadratureConfig;

fn rect(a1: f64, b1: f64, a2: f64, b2: f64) -> Rect {
    Rect { a1, b1, a2, b2 }
}

fn params(l: f64, s1: f64, s2: f64) -> ModelParams {
    ModelParams::new(l, s1, s2).expect("reference parameters are valid")
}

/// Region of the analytic vs Monte-Carlo benchmark.
pub fn benchmark_region() -> Rect {
    rect(3.0, 15.0, -1.0, 1.0)
}

pub const BENCHMARK_HORIZONS: [f64; 3] = [7.0, 30.0, 50.0];

/// Benchmark settings `(lambda = sigma1 = sigma2, kappa)`, in column order.
pub const BENCHMARK_SETTINGS: [(f64, f64); 4] = [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0), (2.0, 2.0)];

/// Regions D1..D4 of the recovery experiments.
pub fn recovery_regions() -> Vec<Rect> {
    vec![
        rect(0.0, 1.0, -3.5, 3.5),
        rect(0.5, 1.5, -2.5, 2.5),
        rect(1.0, 2.5, -2.0, 2.0),
        rect(1.5, 3.5, -1.25, 1.25),
    ]
}

pub const RECOVERY_SPEEDS: [f64; 2] = [1.0, 2.0];
pub const RECOVERY_HORIZON: f64 = 10.0;

/// Reference observations, `[region][speed]`.
pub const REFERENCE_VALUES: [[f64; 2]; 4] = [
    [1.23698, 0.81322],
    [1.16451, 0.70939],
    [1.63478, 0.93958],
    [1.92876, 1.06620],
];

pub fn reference_observations() -> ObservationSet {
    ObservationSet::new(
        recovery_regions(),
        RECOVERY_SPEEDS.to_vec(),
        RECOVERY_HORIZON,
        REFERENCE_VALUES.iter().map(|r| r.to_vec()).collect(),
    )
    .expect("reference data is consistent")
}

/// True parameters of the ten recovery-study rows.
pub const RECOVERY_TRUTHS: [[f64; 3]; 10] = [
    [0.50, 1.00, 1.50],
    [0.60, 0.90, 1.40],
    [0.70, 2.00, 1.75],
    [1.00, 1.50, 1.30],
    [1.25, 1.25, 2.50],
    [1.40, 2.25, 0.80],
    [1.50, 0.80, 1.75],
    [2.00, 2.50, 2.50],
    [2.25, 2.50, 1.50],
    [2.50, 3.00, 3.00],
];

pub fn fydist_regions() -> Vec<Rect> {
    vec![
        rect(0.05, 0.15, -0.039, 0.039),
        rect(0.05, 0.25, -0.025, 0.025),
        rect(0.10, 0.20, -0.018, 0.018),
        rect(0.20, 0.25, -0.01, 0.01),
        rect(0.25, 0.29, -0.02, 0.02),
    ]
}

pub const FYDIST_SPEED: f64 = 0.0283;
pub const FYDIST_HORIZON: f64 = 15.93;
pub const FYDIST_VALUES: [f64; 5] = [5.08290, 7.27732, 3.19642, 1.13889, 1.31337];

pub fn fydist_observations() -> ObservationSet {
    ObservationSet::new(
        fydist_regions(),
        vec![FYDIST_SPEED],
        FYDIST_HORIZON,
        FYDIST_VALUES.iter().map(|v| vec![*v]).collect(),
    )
    .expect("reference data is consistent")
}

/// One benchmark cell: analytic value and Monte-Carlo estimate.
#[derive(Debug, Clone, Copy)]
pub struct BenchmarkCell {
    pub horizon: f64,
    pub lambda_sigma: f64,
    pub kappa: f64,
    pub analytic: f64,
    pub mc: McEstimate,
}

/// Runs the benchmark over all horizons and settings. The same master seed is used for every cell, so the
/// `T = 30` and `T = 50` runs share their per-path noise.
pub fn benchmark(
    num_paths: usize,
    master_seed: u64,
    steps_per_unit: f64,
    quad: &QuadratureConfig,
) -> Result<Vec<BenchmarkCell>> {
    let region = benchmark_region();
    let mut out = Vec::new();
    for &horizon in &BENCHMARK_HORIZONS {
        for &(ls, kappa) in &BENCHMARK_SETTINGS {
            let p = params(ls, ls, ls);
            let belt = BeltConfig::new(kappa)?;
            let analytic = expected_occupation(&p, &belt, &region, horizon, quad)?;
            let mc = McConfig::new(
                num_paths,
                master_seed,
                TimeGrid::with_rate(horizon, steps_per_unit)?,
            )?;
            let mc = mc_expected_occupation(&p, &belt, &region, &mc)?;
            out.push(BenchmarkCell {
                horizon,
                lambda_sigma: ls,
                kappa,
                analytic,
                mc,
            });
        }
    }
    Ok(out)
}

/// Monte-Carlo observations for the recovery regions and speeds.
pub fn recovery_observations(
    truth: &ModelParams,
    num_paths: usize,
    master_seed: u64,
    steps_per_unit: f64,
) -> Result<ObservationSet> {
    let belts = RECOVERY_SPEEDS
        .iter()
        .map(|k| BeltConfig::new(*k))
        .collect::<Result<Vec<_>>>()?;
    let mc = McConfig::new(
        num_paths,
        master_seed,
        TimeGrid::with_rate(RECOVERY_HORIZON, steps_per_unit)?,
    )?;
    mc_observation_matrix(truth, &belts, &recovery_regions(), &mc)
}

#[derive(Debug, Clone)]
pub struct RecoveryRow {
    pub truth: ModelParams,
    pub observations: ObservationSet,
    pub estimate: EstimationResult,
}

impl RecoveryRow {
    /// Relative error of each recovered parameter.
    pub fn relative_errors(&self) -> [f64; 3] {
        let t = self.truth.to_array();
        let e = self.estimate.params.to_array();
        [0, 1, 2].map(|k| ((e[k] - t[k]) / t[k]).abs())
    }
}

/// Recovery study: simulate observations at each true parameter row and re-estimate.
pub fn recovery_study(
    num_paths: usize,
    master_seed: u64,
    steps_per_unit: f64,
    config: &OptimizerConfig,
    quad: &QuadratureConfig,
) -> Result<Vec<RecoveryRow>> {
    RECOVERY_TRUTHS
        .iter()
        .map(|t| {
            let truth = params(t[0], t[1], t[2]);
            let observations =
                recovery_observations(&truth, num_paths, master_seed, steps_per_unit)?;
            let estimate = estimate_params(&observations, config, quad)?;
            Ok(RecoveryRow {
                truth,
                observations,
                estimate,
            })
        })
        .collect()
}
