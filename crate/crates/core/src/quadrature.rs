//! Globally adaptive 15-point Gauss-Kronrod integration.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

/// Tolerance and refinement budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureConfig {
    pub fn new(abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let cfg = Self {
            abs_tol,
            max_subdivisions,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol.is_finite() && self.abs_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "abs_tol must be > 0, got {}",
                self.abs_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidConfig("max_subdivisions must be >= 1".into()));
        }
        Ok(())
    }
}

// Kronrod abscissae (descending, last is the centre); odd indices are Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// 7-point Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut res_abs = kronrod.abs();
    let mut fv = [0.0_f64; 14];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let abs_half = half.abs();
    res_abs *= abs_half;
    res_asc *= abs_half;

    // QUADPACK-style error scaling
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let round_off = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(round_off);
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: err,
    }
}

/// Integrates `f` over `[a, b]` by bisecting the panel with the largest
/// error estimate until the summed estimate drops below `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    if a == b {
        return Ok(0.0);
    }
    let mut panels = vec![gauss_kronrod(&f, a, b)];
    let mut subdivisions = 0;
    loop {
        let total_err: f64 = panels.iter().map(|p| p.error).sum();
        if total_err <= cfg.abs_tol {
            break;
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::QuadratureNonConvergence {
                subdivisions,
                error_estimate: total_err,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if !(p.a < mid && mid < p.b) {
            // panel cannot be split further in floating point
            return Err(Error::QuadratureNonConvergence {
                subdivisions,
                error_estimate: total_err,
            });
        }
        panels.push(gauss_kronrod(&f, p.a, mid));
        panels.push(gauss_kronrod(&f, mid, p.b));
        subdivisions += 1;
    }
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(panels.iter().map(|p| p.value).sum())
}
