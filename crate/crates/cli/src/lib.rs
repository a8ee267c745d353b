//! `fiberlay` command-line front end.
//!
//! [`run`] takes the argument vector and output sinks and returns the exit
//! status, so the binary is a thin wrapper and tests drive it in-process.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fiberlay::experiments;
use fiberlay::io::{
    format_sig, load_fiber_path, load_observations, write_fiber_path, write_grid_csv,
    write_observations, write_strip_csv,
};
use fiberlay::{
    estimate_params, expected_occupation, grid_occupation, mc_expected_occupation, occupation_time,
    simulate_path, strip_profile, BeltConfig, EstimationResult, McConfig, ModelParams,
    ObservationSet, OccupationRule, OptimizerConfig, QuadratureConfig, Rect, TimeGrid,
};

/// Exit status for any failure other than non-convergence.
pub const EXIT_ERROR: i32 = 1;
/// Exit status for command-line usage errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit status when the estimator stops without meeting its tolerances.
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "fiberlay",
    version,
    about = "Fiber lay-down occupation times and parameter estimation"
)]
struct Cli {
    /// Significant digits for terminal output.
    #[arg(long, global = true, default_value_t = 6)]
    digits: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one path and write it as CSV (t,y1,y2).
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "T")]
        horizon: f64,
        #[command(flatten)]
        sim: SimArgs,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact expected occupation time of a rectangle.
    Expected {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_rect, allow_hyphen_values = true)]
        rect: Rect,
        #[arg(long = "T")]
        horizon: f64,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Monte-Carlo estimate of the expected occupation time.
    Mc {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_rect, allow_hyphen_values = true)]
        rect: Rect,
        #[arg(long = "T")]
        horizon: f64,
        /// Number of sample paths.
        #[arg(long = "paths", default_value_t = 10_000)]
        num_paths: usize,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Occupation times of a recorded path: one region, a grid, or strips.
    Occupancy {
        /// Path CSV (t,y1,y2).
        #[arg(long)]
        path: PathBuf,
        #[arg(long, value_parser = parse_rect, allow_hyphen_values = true,
              conflicts_with_all = ["grid", "strips"], required_unless_present_any = ["grid", "strips"])]
        rect: Option<Rect>,
        /// Bounds of an nx x ny grid; writes grid CSV.
        #[arg(long, value_parser = parse_rect, allow_hyphen_values = true, conflicts_with = "strips")]
        grid: Option<Rect>,
        #[arg(long, default_value_t = 25)]
        nx: usize,
        #[arg(long, default_value_t = 15)]
        ny: usize,
        /// Bounds divided into vertical strips; writes strip CSV.
        #[arg(long, value_parser = parse_rect, allow_hyphen_values = true)]
        strips: Option<Rect>,
        #[arg(long = "n-strips", default_value_t = 20)]
        n_strips: usize,
        /// Rule for single-region occupation times.
        #[arg(long, value_enum, default_value_t = Rule::Polyline)]
        rule: Rule,
        /// Output file for grid/strip CSV (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate (lambda, sigma1, sigma2) from occupation-time observations.
    Estimate {
        /// Observation file.
        #[arg(long, conflicts_with = "path", required_unless_present = "path")]
        obs: Option<PathBuf>,
        /// Path CSV(s), one per belt speed, from which observations are computed.
        #[arg(long, requires_all = ["region", "kappa"])]
        path: Vec<PathBuf>,
        /// Region `a1,b1,a2,b2` (repeat for several).
        #[arg(long, value_parser = parse_rect, allow_hyphen_values = true)]
        region: Vec<Rect>,
        /// Belt speed of each path, in the same order.
        #[arg(long)]
        kappa: Vec<f64>,
        /// Horizon for path-based observations (default: shortest path duration).
        #[arg(long = "T")]
        horizon: Option<f64>,
        /// Also write the computed observations to this file.
        #[arg(long)]
        obs_out: Option<PathBuf>,
        #[command(flatten)]
        opt: OptArgs,
        #[command(flatten)]
        quad: QuadArgs,
        /// Write the result as `key value` lines.
        #[arg(long)]
        result: Option<PathBuf>,
    },
    /// Analytic vs Monte-Carlo expected occupation times as CSV.
    Table1 {
        #[arg(long = "paths", default_value_t = 10_000)]
        num_paths: usize,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Monte-Carlo observation matrix of the recovery experiment as CSV.
    Table3 {
        #[arg(long = "paths", default_value_t = 5_000)]
        num_paths: usize,
        #[command(flatten)]
        sim: SimArgs,
        /// Also write the matrix as an observation file.
        #[arg(long)]
        obs_out: Option<PathBuf>,
    },
    /// Parameter recovery from Monte-Carlo observations as CSV.
    Table4 {
        #[arg(long = "paths", default_value_t = 5_000)]
        num_paths: usize,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        opt: OptArgs,
        #[command(flatten)]
        quad: QuadArgs,
    },
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long)]
    lambda: f64,
    #[arg(long, allow_hyphen_values = true)]
    sigma1: f64,
    #[arg(long, allow_hyphen_values = true)]
    sigma2: f64,
    #[arg(long)]
    kappa: f64,
}

impl ModelArgs {
    fn build(&self) -> fiberlay::Result<(ModelParams, BeltConfig)> {
        Ok((
            ModelParams::canonical(self.lambda, self.sigma1, self.sigma2)?,
            BeltConfig::new(self.kappa)?,
        ))
    }
}

#[derive(Debug, Args)]
struct SimArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "steps-per-unit-time", default_value_t = 200.0)]
    steps_per_unit: f64,
}

#[derive(Debug, Args)]
struct QuadArgs {
    #[arg(long = "quad-tol", default_value_t = 1e-8)]
    quad_tol: f64,
    #[arg(long = "quad-max-subdivisions", default_value_t = 2000)]
    max_subdivisions: usize,
}

impl QuadArgs {
    fn build(&self) -> fiberlay::Result<QuadratureConfig> {
        QuadratureConfig::new(self.quad_tol, self.max_subdivisions)
    }
}

#[derive(Debug, Args)]
struct OptArgs {
    /// Initial guess `lambda,sigma1,sigma2`.
    #[arg(long, value_parser = parse_triple, default_value = "1,1,1")]
    initial: [f64; 3],
    /// Restart with the diffusion guesses scaled by 1, 0.1, 0.01 and 0.001.
    #[arg(long)]
    multi_start: bool,
    #[arg(long = "max-evals", default_value_t = 5000)]
    max_evals: usize,
    #[arg(long = "x-tol", default_value_t = 1e-6)]
    x_tol: f64,
    #[arg(long = "f-tol", default_value_t = 1e-10)]
    f_tol: f64,
}

impl OptArgs {
    fn build(&self) -> fiberlay::Result<OptimizerConfig> {
        let mut cfg = if self.multi_start {
            OptimizerConfig::multi_start()
        } else {
            OptimizerConfig::default()
        };
        cfg.initial_guess =
            ModelParams::canonical(self.initial[0], self.initial[1], self.initial[2])?;
        if cfg.initial_guess.sigma1() == 0.0 || cfg.initial_guess.sigma2() == 0.0 {
            return Err(fiberlay::Error::InvalidConfig(
                "initial diffusion guesses must be nonzero".into(),
            ));
        }
        cfg.simplex.max_evals = self.max_evals;
        cfg.simplex.x_tol = self.x_tol;
        cfg.simplex.f_tol = self.f_tol;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Rule {
    Sampled,
    Polyline,
}

impl From<Rule> for OccupationRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Sampled => OccupationRule::Sampled,
            Rule::Polyline => OccupationRule::Polyline,
        }
    }
}

fn parse_numbers(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v = s
        .split(',')
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|_| format!("not a number: {f:?}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if v.len() != n {
        return Err(format!(
            "expected {n} comma-separated numbers, got {}",
            v.len()
        ));
    }
    Ok(v)
}

fn parse_rect(s: &str) -> Result<Rect, String> {
    let v = parse_numbers(s, 4)?;
    Rect::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let v = parse_numbers(s, 3)?;
    Ok([v[0], v[1], v[2]])
}

#[derive(Debug)]
enum Failure {
    Error(String),
    NotConverged,
}

impl From<fiberlay::Error> for Failure {
    fn from(e: fiberlay::Error) -> Self {
        Failure::Error(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Error(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                // keep the one-line diagnostic
                let first = text.lines().next().unwrap_or("invalid arguments");
                let _ = writeln!(err, "{first}");
            }
            return code;
        }
    };
    // buffer stdout so that nothing is emitted when a command fails midway
    let mut buf = Vec::new();
    let res = dispatch(&cli, &mut buf, err);
    match res {
        Ok(()) => {
            let _ = out.write_all(&buf);
            0
        }
        Err(Failure::NotConverged) => {
            let _ = out.write_all(&buf);
            let _ = writeln!(
                err,
                "error: estimator did not converge within the evaluation budget"
            );
            EXIT_NOT_CONVERGED
        }
        Err(Failure::Error(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

fn with_output(
    out_file: &Option<PathBuf>,
    stdout: &mut Vec<u8>,
    f: impl FnOnce(&mut dyn Write) -> fiberlay::Result<()>,
) -> CmdResult {
    match out_file {
        Some(p) => {
            // write to memory first so a failing command leaves no partial file
            let mut data = Vec::new();
            f(&mut data)?;
            let mut w = BufWriter::new(File::create(p)?);
            w.write_all(&data)?;
            w.flush()?;
        }
        None => f(stdout)?,
    }
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut Vec<u8>, err: &mut dyn Write) -> CmdResult {
    let sig = |x: f64| format_sig(x, cli.digits);
    match &cli.command {
        Command::Simulate {
            model,
            horizon,
            sim,
            out: file,
        } => {
            let (p, b) = model.build()?;
            let grid = TimeGrid::with_rate(*horizon, sim.steps_per_unit)?;
            let path = simulate_path(&p, &b, &grid, sim.seed)?;
            with_output(file, out, |w| write_fiber_path(w, &path))
        }
        Command::Expected {
            model,
            rect,
            horizon,
            quad,
        } => {
            let (p, b) = model.build()?;
            let v = expected_occupation(&p, &b, rect, *horizon, &quad.build()?)?;
            writeln!(out, "{}", sig(v))?;
            Ok(())
        }
        Command::Mc {
            model,
            rect,
            horizon,
            num_paths,
            sim,
        } => {
            let (p, b) = model.build()?;
            let mc = McConfig::new(
                *num_paths,
                sim.seed,
                TimeGrid::with_rate(*horizon, sim.steps_per_unit)?,
            )?;
            let e = mc_expected_occupation(&p, &b, rect, &mc)?;
            writeln!(out, "{} ± {}", sig(e.mean), sig(e.std_error))?;
            Ok(())
        }
        Command::Occupancy {
            path,
            rect,
            grid,
            nx,
            ny,
            strips,
            n_strips,
            rule,
            out: file,
        } => {
            let fiber = load_fiber_path(path)?;
            if let Some(bounds) = grid {
                let g = grid_occupation(&fiber, bounds, *nx, *ny)?;
                with_output(file, out, |w| write_grid_csv(w, &g))
            } else if let Some(bounds) = strips {
                let s = strip_profile(&fiber, bounds, *n_strips)?;
                with_output(file, out, |w| write_strip_csv(w, bounds, &s))
            } else {
                let region = rect.expect("clap enforces one of rect/grid/strips");
                writeln!(
                    out,
                    "{}",
                    sig(occupation_time(&fiber, &region, (*rule).into()))
                )?;
                Ok(())
            }
        }
        Command::Estimate {
            obs,
            path,
            region,
            kappa,
            horizon,
            obs_out,
            opt,
            quad,
            result,
        } => {
            let observations = match obs {
                Some(file) => load_observations(file)?,
                None => observations_from_paths(path, region, kappa, *horizon)?,
            };
            if let Some(file) = obs_out {
                with_output(&Some(file.clone()), out, |w| {
                    write_observations(w, &observations)
                })?;
            }
            let res = estimate_params(&observations, &opt.build()?, &quad.build()?)?;
            for w in &res.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            print_estimate(out, &res, &sig)?;
            if let Some(file) = result {
                let text = format!(
                    "lambda {}\nsigma1 {}\nsigma2 {}\ncost {}\niterations {}\nevaluations {}\nconverged {}\n",
                    res.params.lambda(),
                    res.params.sigma1(),
                    res.params.sigma2(),
                    res.final_cost,
                    res.iterations,
                    res.evaluations,
                    res.converged
                );
                std::fs::write(file, text)?;
            }
            if res.converged {
                Ok(())
            } else {
                Err(Failure::NotConverged)
            }
        }
        Command::Table1 {
            num_paths,
            sim,
            quad,
        } => {
            let cells =
                experiments::benchmark(*num_paths, sim.seed, sim.steps_per_unit, &quad.build()?)?;
            writeln!(out, "T,method,lambda_sigma=1 kappa=1,lambda_sigma=1 kappa=2,lambda_sigma=2 kappa=1,lambda_sigma=2 kappa=2")?;
            for chunk in cells.chunks(experiments::BENCHMARK_SETTINGS.len()) {
                let t = chunk[0].horizon;
                let row = |f: &dyn Fn(&experiments::BenchmarkCell) -> f64| {
                    chunk
                        .iter()
                        .map(|c| sig(f(c)))
                        .collect::<Vec<_>>()
                        .join(",")
                };
                writeln!(out, "{},mc,{}", sig(t), row(&|c| c.mc.mean))?;
                writeln!(out, "{},mc_std_error,{}", sig(t), row(&|c| c.mc.std_error))?;
                writeln!(out, "{},formula,{}", sig(t), row(&|c| c.analytic))?;
            }
            Ok(())
        }
        Command::Table3 {
            num_paths,
            sim,
            obs_out,
        } => {
            let truth = ModelParams::new(1.0, 1.0, 1.0)?;
            let o = experiments::recovery_observations(
                &truth,
                *num_paths,
                sim.seed,
                sim.steps_per_unit,
            )?;
            let names: Vec<String> = (1..=o.num_regions()).map(|i| format!("D{i}")).collect();
            writeln!(out, "kappa,{}", names.join(","))?;
            for (j, k) in o.belt_speeds().iter().enumerate() {
                let vals: Vec<String> = (0..o.num_regions()).map(|i| sig(o.value(i, j))).collect();
                writeln!(out, "{},{}", sig(*k), vals.join(","))?;
            }
            if let Some(file) = obs_out {
                with_output(&Some(file.clone()), out, |w| write_observations(w, &o))?;
            }
            Ok(())
        }
        Command::Table4 {
            num_paths,
            sim,
            opt,
            quad,
        } => {
            let rows = experiments::recovery_study(
                *num_paths,
                sim.seed,
                sim.steps_per_unit,
                &opt.build()?,
                &quad.build()?,
            )?;
            writeln!(
                out,
                "lambda,sigma1,sigma2,lambda_est,sigma1_est,sigma2_est,max_rel_error,converged"
            )?;
            for r in rows {
                let t = r.truth.to_array();
                let e = r.estimate.params.to_array();
                let worst = r.relative_errors().into_iter().fold(0.0, f64::max);
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    sig(t[0]),
                    sig(t[1]),
                    sig(t[2]),
                    sig(e[0]),
                    sig(e[1]),
                    sig(e[2]),
                    sig(worst),
                    r.estimate.converged
                )?;
            }
            Ok(())
        }
    }
}

fn print_estimate(
    out: &mut Vec<u8>,
    res: &EstimationResult,
    sig: &dyn Fn(f64) -> String,
) -> std::io::Result<()> {
    writeln!(out, "lambda {}", sig(res.params.lambda()))?;
    writeln!(out, "sigma1 {}", sig(res.params.sigma1()))?;
    writeln!(out, "sigma2 {}", sig(res.params.sigma2()))?;
    writeln!(out, "cost {}", sig(res.final_cost))?;
    Ok(())
}

/// Observations `E[i][j]` = polyline occupation time of region `i` by path `j`.
fn observations_from_paths(
    paths: &[PathBuf],
    regions: &[Rect],
    speeds: &[f64],
    horizon: Option<f64>,
) -> Result<ObservationSet, Failure> {
    if paths.len() != speeds.len() {
        return Err(Failure::Error(format!(
            "{} path files but {} belt speeds",
            paths.len(),
            speeds.len()
        )));
    }
    let fibers = paths
        .iter()
        .map(load_fiber_path)
        .collect::<fiberlay::Result<Vec<_>>>()?;
    let shortest = fibers
        .iter()
        .map(|f| f.duration())
        .fold(f64::INFINITY, f64::min);
    let horizon = horizon.unwrap_or(shortest);
    if horizon > shortest {
        return Err(Failure::Error(format!(
            "horizon {horizon} exceeds the shortest path duration {shortest}"
        )));
    }
    let fibers: Vec<_> = fibers.iter().map(|f| f.truncated(horizon)).collect();
    let values = regions
        .iter()
        .map(|r| {
            fibers
                .iter()
                .map(|f| occupation_time(f, r, OccupationRule::Polyline))
                .collect()
        })
        .collect();
    Ok(ObservationSet::new(
        regions.to_vec(),
        speeds.to_vec(),
        horizon,
        values,
    )?)
}
