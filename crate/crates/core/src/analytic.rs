//! Exact expected occupation time of the lay-down process.
//!
//! Since the two coordinates of `Y_t` are independent Gaussians, the
//! probability of being inside a rectangle factorizes into two interval
//! probabilities, and the expected occupation time is its time integral:
//!
//! ```text
//! E = 1/4 int_0^T [erf(z(b1)) - erf(z(a1))] [erf(w(b2)) - erf(w(a2))] dt
//! ```
//!
//! with `z(x) = (x - m(t)) / (sqrt(2) sd1(t))` and `w(x) = x / (sqrt(2) sd2(t))`.

use crate::error::{Error, Result};
use crate::model::{ou_mean_sd, BeltConfig, ModelParams, Rect};
use crate::occupation::OccupationGrid;
use crate::quadrature::{integrate, QuadratureConfig};
use crate::special::gaussian_interval_prob;

/// `P(Y_t in region)`, including the `t = 0` and zero-diffusion limits.
pub fn occupancy_integrand(params: &ModelParams, belt: &BeltConfig, region: &Rect, t: f64) -> f64 {
    let m = ou_mean_sd(params, belt, t);
    let across = gaussian_interval_prob(region.a2, region.b2, m.mean2, m.sd2);
    if across == 0.0 {
        return 0.0;
    }
    across * gaussian_interval_prob(region.a1, region.b1, m.mean1, m.sd1)
}

/// Expected occupation time of `region` over `[0, horizon]`.
///
/// Integrates in `u = sqrt(t)`: the standard deviations grow like `sqrt(t)`
/// near the origin, which the substitution turns into a smooth integrand.
pub fn expected_occupation(
    params: &ModelParams,
    belt: &BeltConfig,
    region: &Rect,
    horizon: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidGrid(format!(
            "horizon must be finite and > 0, got {horizon}"
        )));
    }
    if region.a1 >= region.b1 || region.a2 >= region.b2 {
        return Ok(0.0);
    }
    let value = integrate(
        |u| 2.0 * u * occupancy_integrand(params, belt, region, u * u),
        0.0,
        horizon.sqrt(),
        quad,
    )?;
    Ok(value.clamp(0.0, horizon))
}

/// [`expected_occupation`] for each cell of an `nx x ny` partition of `bounds`.
pub fn grid_expected_occupation(
    params: &ModelParams,
    belt: &BeltConfig,
    bounds: &Rect,
    nx: usize,
    ny: usize,
    horizon: f64,
    quad: &QuadratureConfig,
) -> Result<OccupationGrid> {
    OccupationGrid::from_fn(*bounds, nx, ny, |p, q, cell| {
        expected_occupation(params, belt, &cell.rect(), horizon, quad).map_err(|e| {
            Error::GridCell {
                col: p,
                row: q,
                source: Box::new(e),
            }
        })
    })
}
