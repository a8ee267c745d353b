//! Derivative-free Nelder-Mead simplex minimization.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Stop once every vertex is within `x_tol` (max-norm) of the best one...
    pub x_tol: f64,
    /// ...and the vertex values span less than `f_tol`.
    pub f_tol: f64,
    pub max_evals: usize,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Offset of the initial simplex vertices from the start, per coordinate.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            x_tol: 1e-6,
            f_tol: 1e-10,
            max_evals: 5000,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            initial_step: 0.1,
        }
    }
}

impl NelderMeadOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.x_tol > 0.0 && self.f_tol > 0.0) {
            return bad("tolerances must be > 0");
        }
        if self.max_evals == 0 {
            return bad("max_evals must be >= 1");
        }
        if !(self.reflection > 0.0) {
            return bad("reflection coefficient must be > 0");
        }
        if !(self.expansion > 1.0 && self.expansion > self.reflection) {
            return bad("expansion coefficient must exceed 1 and the reflection coefficient");
        }
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return bad("contraction coefficient must lie in (0, 1)");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("shrink coefficient must lie in (0, 1)");
        }
        if !(self.initial_step.is_finite() && self.initial_step != 0.0) {
            return bad("initial_step must be finite and nonzero");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// `false` when `max_evals` ran out before the tolerances were met.
    pub converged: bool,
}

/// Minimizes `objective` starting from `start`. NaN values are treated as
/// `+inf`, so the objective may signal an infeasible point that way.
pub fn nelder_mead<F>(
    mut objective: F,
    start: &[f64],
    opts: &NelderMeadOptions,
) -> Result<NelderMeadResult>
where
    F: FnMut(&[f64]) -> f64,
{
    opts.validate()?;
    let n = start.len();
    if n == 0 {
        return Err(Error::InvalidConfig("empty starting point".into()));
    }
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = objective(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += opts.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();

    let mut iterations = 0;
    let mut converged = false;
    loop {
        // order vertices best -> worst; stable sort keeps ties deterministic
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let diameter = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0_f64, f64::max);
        if diameter <= opts.x_tol && spread <= opts.f_tol {
            converged = true;
            break;
        }
        if evals >= opts.max_evals {
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |coef: f64, from: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(from)
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let worst = simplex[n].clone();
        let reflected = along(opts.reflection, &worst);
        let f_reflected = eval(&reflected, &mut evals);

        if f_reflected < values[0] {
            let expanded = along(opts.expansion, &worst);
            let f_expanded = eval(&expanded, &mut evals);
            if f_expanded < f_reflected {
                simplex[n] = expanded;
                values[n] = f_expanded;
            } else {
                simplex[n] = reflected;
                values[n] = f_reflected;
            }
            continue;
        }
        if f_reflected < values[n - 1] {
            simplex[n] = reflected;
            values[n] = f_reflected;
            continue;
        }

        let (candidate, f_candidate) = if f_reflected < values[n] {
            // outside contraction
            let c = along(opts.reflection * opts.contraction, &worst);
            let fc = eval(&c, &mut evals);
            (c, if fc <= f_reflected { fc } else { f64::INFINITY })
        } else {
            // inside contraction
            let c = along(-opts.contraction, &worst);
            let fc = eval(&c, &mut evals);
            (c, if fc < values[n] { fc } else { f64::INFINITY })
        };
        if f_candidate.is_finite() {
            simplex[n] = candidate;
            values[n] = f_candidate;
            continue;
        }

        // shrink towards the best vertex
        let best = simplex[0].clone();
        for i in 1..=n {
            for (x, b) in simplex[i].iter_mut().zip(&best) {
                *x = b + opts.shrink * (*x - b);
            }
            values[i] = eval(&simplex[i], &mut evals);
        }
    }

    Ok(NelderMeadResult {
        x: simplex.swap_remove(0),
        value: values[0],
        iterations,
        evaluations: evals,
        converged,
    })
}
