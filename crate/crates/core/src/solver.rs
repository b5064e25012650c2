//! Damped explicit (Euler) iteration for `Fʰ[U] = 0`.
//!
//! Starting from the quadratic super-solution `w = −|x|²/2 + M₁`, each sweep
//! applies `U ← U − dt·Fʰ[U]` to all points simultaneously. The step is
//! bounded by the derivative of each row in its centre value, which keeps the
//! update map non-decreasing in every argument.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::operator::{check_compatibility, GridFunction, ProblemSpec, RowEval, Scheme};
use crate::stencil::StencilTable;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Stop once the residual sup-norm drops to this value.
    pub tol: f64,
    pub max_iters: usize,
    /// Fraction of the monotone step limit actually taken, in (0, 1).
    pub dt_safety: f64,
    pub dt_floor: f64,
    /// Iterations between history records.
    pub log_every: usize,
    /// Iterations between step-size refreshes.
    pub dt_refresh: usize,
    /// Per-point steps `dt_safety / K_i` instead of one global `dt_safety / max K_i`.
    pub local_steps: bool,
    /// Skip the compatibility gate.
    pub force: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: 2_000_000,
            dt_safety: 0.9,
            dt_floor: 1e-14,
            log_every: 1000,
            dt_refresh: 1,
            local_steps: true,
            force: false,
        }
    }
}

impl SolverConfig {
    /// Default configuration with `tol = 1e-8 / h²`.
    pub fn for_spacing(h: f64) -> Self {
        Self {
            tol: 1e-8 / (h * h),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.dt_safety > 0.0 && self.dt_safety < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "dt_safety must lie in (0, 1), got {}",
                self.dt_safety
            )));
        }
        if self.log_every == 0 || self.dt_refresh == 0 {
            return Err(Error::InvalidParameter("log_every and dt_refresh must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub residual_sup: f64,
    pub dt: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Termination {
    Converged,
    MaxIterations,
}

/// Comparison of the returned iterate with the initializer envelope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityCheck {
    /// `max |w|` over the cloud for the initializer `w`.
    pub bound: f64,
    pub sup_norm: f64,
    /// `max (U − w)`; non-positive when the iterate stays below the initializer.
    pub max_above_initializer: f64,
    pub within_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
    pub termination: Termination,
    pub dt_min: f64,
    pub dt_max: f64,
    pub wall_time: f64,
    pub stability: StabilityCheck,
    pub history: Vec<IterationRecord>,
}

impl SolveReport {
    /// Line-oriented log: `iter residual_sup dt`.
    pub fn write_log<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# iter residual_sup dt")?;
        for r in &self.history {
            writeln!(w, "{} {:.6e} {:.6e}", r.iter, r.residual_sup, r.dt)?;
        }
        Ok(())
    }
}

/// `M₁ = max over boundary samples of (|g| + |x|²/2) + 1`.
pub fn initializer_height(cloud: &PointCloud, spec: &ProblemSpec) -> f64 {
    cloud
        .boundary_ids()
        .map(|i| {
            let p = cloud.point(i);
            spec.g_at(p).abs() + p.norm_sq() / 2.0
        })
        .fold(0.0, f64::max)
        + 1.0
}

/// The strict super-solution `w(x) = −|x|²/2 + M₁`.
pub fn initialize(cloud: &PointCloud, spec: &ProblemSpec) -> GridFunction {
    let m1 = initializer_height(cloud, spec);
    GridFunction::from_fn(cloud, |p| -p.norm_sq() / 2.0 + m1)
}

/// Step sizes per point.
#[derive(Clone, Debug, PartialEq)]
pub struct StepField {
    pub dt: Vec<f64>,
    pub min: f64,
    pub max: f64,
}

impl StepField {
    pub fn uniform(n: usize, dt: f64) -> Self {
        Self {
            dt: vec![dt; n],
            min: dt,
            max: dt,
        }
    }

    fn from_rows(rows: &[RowEval], config: &SolverConfig) -> Self {
        if config.local_steps {
            let dt: Vec<f64> = rows.iter().map(|r| config.dt_safety / r.diagonal.max(1.0)).collect();
            let (min, max) = dt.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
            Self { dt, min, max }
        } else {
            let k = rows.iter().fold(1.0f64, |m, r| m.max(r.diagonal));
            Self::uniform(rows.len(), config.dt_safety / k)
        }
    }

    /// Pointwise minimum of two fields.
    pub fn min_with(&self, other: &StepField) -> StepField {
        let dt: Vec<f64> = self.dt.iter().zip(&other.dt).map(|(a, b)| a.min(*b)).collect();
        StepField {
            min: self.min.min(other.min),
            max: dt.iter().fold(0.0, |m: f64, d| m.max(*d)),
            dt,
        }
    }
}

/// Monotone step sizes at the iterate `u`: `dt_safety / K`, with `K` the
/// centre-derivative bound of each row (at least 1, the boundary-row value).
pub fn step_bound(scheme: &Scheme<'_>, u: &[f64], config: &SolverConfig) -> Result<StepField> {
    let rows = scheme.evaluate(u)?;
    Ok(StepField::from_rows(&rows, config))
}

/// One Jacobi sweep `u'(x) = u(x) − dt(x)·Fʰ[u](x)`.
pub fn explicit_step(scheme: &Scheme<'_>, u: &[f64], dt: &StepField) -> Result<GridFunction> {
    let rows = scheme.evaluate(u)?;
    apply_step(u, &rows, &dt.dt, 0)
}

fn apply_step(u: &[f64], rows: &[RowEval], dt: &[f64], iteration: usize) -> Result<GridFunction> {
    let next: Vec<f64> = u
        .par_iter()
        .zip(rows.par_iter())
        .zip(dt.par_iter())
        .map(|((u, r), dt)| u - dt * r.value)
        .collect();
    if let Some(point) = next.iter().position(|v| !v.is_finite()) {
        return Err(Error::Divergence { iteration, point });
    }
    Ok(GridFunction(next))
}

fn sup(rows: &[RowEval]) -> f64 {
    rows.iter().fold(0.0, |m, r| m.max(r.value.abs()))
}

/// Iterates from the super-solution initializer until the residual sup-norm
/// reaches `config.tol` or `config.max_iters` sweeps have run.
pub fn solve(
    spec: &ProblemSpec,
    cloud: &PointCloud,
    table: &StencilTable,
    config: &SolverConfig,
) -> Result<(GridFunction, SolveReport)> {
    config.validate()?;
    if !config.force {
        let compat = check_compatibility(spec, 512);
        if !compat.ok {
            return Err(Error::Incompatible {
                lhs: compat.lhs,
                rhs: compat.rhs,
            });
        }
    }
    let start = Instant::now();
    let scheme = Scheme::new(spec, cloud, table)?;
    let init = initialize(cloud, spec);
    let mut u = init.clone();
    let mut history = Vec::new();
    let mut dt_min = f64::INFINITY;
    let mut dt_max: f64 = 0.0;
    let mut steps: Option<StepField> = None;
    let mut iterations = 0;
    let mut rows = scheme.evaluate(&u)?;
    let mut residual = sup(&rows);

    while residual > config.tol && iterations < config.max_iters {
        if steps.is_none() || iterations % config.dt_refresh == 0 {
            let field = StepField::from_rows(&rows, config);
            if field.min < config.dt_floor {
                return Err(Error::StalledStep {
                    iteration: iterations,
                    dt: field.min,
                    floor: config.dt_floor,
                });
            }
            dt_min = dt_min.min(field.min);
            dt_max = dt_max.max(field.max);
            steps = Some(field);
        }
        let field = steps.as_ref().expect("step field initialised above");
        if iterations % config.log_every == 0 {
            history.push(IterationRecord {
                iter: iterations,
                residual_sup: residual,
                dt: field.min,
            });
            log::debug!("iter {iterations} residual {residual:.3e} dt {:.3e}", field.min);
        }
        u = apply_step(&u, &rows, &field.dt, iterations)?;
        iterations += 1;
        rows = scheme.evaluate(&u)?;
        residual = sup(&rows);
    }

    let converged = residual <= config.tol;
    history.push(IterationRecord {
        iter: iterations,
        residual_sup: residual,
        dt: steps.as_ref().map_or(f64::NAN, |s| s.min),
    });
    let bound = init.sup_norm();
    let max_above_initializer = u.iter().zip(init.iter()).fold(f64::NEG_INFINITY, |m, (a, b)| m.max(a - b));
    let sup_norm = u.sup_norm();
    let report = SolveReport {
        iterations,
        final_residual: residual,
        converged,
        termination: if converged {
            Termination::Converged
        } else {
            Termination::MaxIterations
        },
        dt_min: if dt_min.is_finite() { dt_min } else { 0.0 },
        dt_max,
        wall_time: start.elapsed().as_secs_f64(),
        stability: StabilityCheck {
            bound,
            sup_norm,
            max_above_initializer,
            within_bound: sup_norm <= bound * (1.0 + 1e-12) && max_above_initializer <= config.tol.max(1e-12),
        },
        history,
    };
    if !converged {
        log::warn!("stopped after {iterations} iterations with residual {residual:.3e}");
    }
    Ok((u, report))
}

/// Verifies the ordering `u ≤ v` for a strictly ordered residual pair
/// `Fʰ[u] < Fʰ[v]`.
pub fn check_discrete_comparison(scheme: &Scheme<'_>, u: &[f64], v: &[f64]) -> Result<bool> {
    let fu = scheme.residual(u)?;
    let fv = scheme.residual(v)?;
    if let Some(point) = fu.iter().zip(fv.iter()).position(|(a, b)| !(a < b)) {
        return Err(Error::NotStrictPair { point });
    }
    Ok(u.iter().zip(v).all(|(a, b)| a <= b))
}
