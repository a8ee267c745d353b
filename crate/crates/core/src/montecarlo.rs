//! Monte-Carlo estimates of expected occupation times.
//!
//! Path `j` is driven by the seed [`path_seed`]`(master_seed, j)`, so every
//! estimate is a pure function of its inputs and independent of the rayon
//! schedule: per-path results are collected in index order and reduced
//! sequentially.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::ObservationSet;
use crate::model::{check_stability, simulate_path, BeltConfig, ModelParams, Rect, TimeGrid};
use crate::occupation::occupation_time_sampled;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub num_paths: usize,
    pub master_seed: u64,
    pub grid: TimeGrid,
}

impl McConfig {
    pub fn new(num_paths: usize, master_seed: u64, grid: TimeGrid) -> Result<Self> {
        if num_paths == 0 {
            return Err(Error::InvalidConfig("num_paths must be >= 1".into()));
        }
        Ok(Self {
            num_paths,
            master_seed,
            grid,
        })
    }
}

/// Sample mean of the per-path occupation times and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub num_paths: usize,
}

impl McEstimate {
    fn from_samples(samples: impl Iterator<Item = f64> + Clone) -> Self {
        let n = samples.clone().count();
        let mean = samples.clone().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let ss: f64 = samples.map(|x| (x - mean) * (x - mean)).sum();
            (ss / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std_error,
            num_paths: n,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of path `index` under `master_seed`.
pub fn path_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index))
}

/// Estimates for several regions from one shared set of paths.
///
/// Reusing the paths (common random numbers) makes nested regions give
/// exactly ordered estimates.
pub fn mc_expected_occupations(
    params: &ModelParams,
    belt: &BeltConfig,
    regions: &[Rect],
    mc: &McConfig,
) -> Result<Vec<McEstimate>> {
    if mc.num_paths == 0 {
        return Err(Error::InvalidConfig("num_paths must be >= 1".into()));
    }
    check_stability(params, &mc.grid)?;
    let per_path: Vec<Vec<f64>> = (0..mc.num_paths as u64)
        .into_par_iter()
        .map(|j| {
            let path = simulate_path(params, belt, &mc.grid, path_seed(mc.master_seed, j))?;
            Ok(regions
                .iter()
                .map(|r| occupation_time_sampled(&path, r))
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok((0..regions.len())
        .map(|i| McEstimate::from_samples(per_path.iter().map(move |v| v[i])))
        .collect())
}

pub fn mc_expected_occupation(
    params: &ModelParams,
    belt: &BeltConfig,
    region: &Rect,
    mc: &McConfig,
) -> Result<McEstimate> {
    Ok(mc_expected_occupations(params, belt, std::slice::from_ref(region), mc)?[0])
}

/// Observation matrix `E[i][j]` for region `i` and belt speed `j`.
///
/// For each belt speed the same `num_paths` seeds are used and every region
/// is evaluated on the same paths.
pub fn mc_observation_matrix(
    params: &ModelParams,
    belts: &[BeltConfig],
    regions: &[Rect],
    mc: &McConfig,
) -> Result<ObservationSet> {
    if belts.is_empty() || regions.is_empty() {
        return Err(Error::InvalidObservations(
            "need at least one region and one belt speed".into(),
        ));
    }
    let mut values = vec![vec![0.0; belts.len()]; regions.len()];
    for (j, belt) in belts.iter().enumerate() {
        let est = mc_expected_occupations(params, belt, regions, mc)?;
        for (i, e) in est.iter().enumerate() {
            values[i][j] = e.mean;
        }
    }
    ObservationSet::new(
        regions.to_vec(),
        belts.iter().map(|b| b.kappa()).collect(),
        mc.grid.horizon(),
        values,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(sigma: f64, kappa: f64) -> (ModelParams, BeltConfig) {
        (
            ModelParams::new(1.0, sigma, sigma).unwrap(),
            BeltConfig::new(kappa).unwrap(),
        )
    }

    #[test]
    fn seeds_are_distinct() {
        let mut s: Vec<u64> = (0..10_000).map(|j| path_seed(0, j)).collect();
        s.sort_unstable();
        s.dedup();
        assert_eq!(s.len(), 10_000);
        assert_ne!(path_seed(0, 1), path_seed(1, 1));
    }

    #[test]
    fn deterministic_path_gives_exact_mean() {
        let (p, b) = setup(0.0, 0.0);
        let mc = McConfig::new(50, 3, TimeGrid::new(5.0, 1000).unwrap()).unwrap();
        let r = Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let e = mc_expected_occupation(&p, &b, &r, &mc).unwrap();
        assert!((e.mean - 5.0).abs() < 1e-12, "{}", e.mean);
        assert_eq!(e.std_error, 0.0);
        assert_eq!(e.num_paths, 50);
    }

    #[test]
    fn reproducible_and_schedule_independent() {
        let (p, b) = setup(1.0, 1.0);
        let mc = McConfig::new(200, 11, TimeGrid::new(4.0, 800).unwrap()).unwrap();
        let r = Rect::new(0.0, 2.0, -1.0, 1.0).unwrap();
        let a = mc_expected_occupation(&p, &b, &r, &mc).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = pool.install(|| mc_expected_occupation(&p, &b, &r, &mc).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn single_cell_matrix() {
        let (p, b) = setup(1.0, 1.0);
        let mc = McConfig::new(100, 5, TimeGrid::new(3.0, 600).unwrap()).unwrap();
        let r = Rect::new(0.0, 1.0, -1.0, 1.0).unwrap();
        let obs = mc_observation_matrix(&p, &[b], &[r], &mc).unwrap();
        let e = mc_expected_occupation(&p, &b, &r, &mc).unwrap();
        assert_eq!(obs.value(0, 0), e.mean);
    }

    #[test]
    fn propagates_unstable_grid() {
        let (p, b) = setup(1.0, 1.0);
        let mc = McConfig::new(10, 0, TimeGrid::new(10.0, 4).unwrap()).unwrap();
        let r = Rect::new(0.0, 1.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            mc_expected_occupation(&p, &b, &r, &mc),
            Err(Error::UnstableStep { .. })
        ));
        assert!(McConfig::new(0, 0, TimeGrid::new(1.0, 1).unwrap()).is_err());
    }
}
