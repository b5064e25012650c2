//! Error measurement against exact solutions and convergence studies.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point, PointCloud};
use crate::operator::{ProblemSpec, ScalarField};
use crate::solver::{solve, SolverConfig};
use crate::stencil::{build_stencil_table, make_direction_set, DirectionSet};

/// A test problem with a known solution.
#[derive(Clone)]
pub struct ExactSolution {
    pub name: String,
    pub domain: Domain,
    pub u_exact: ScalarField,
    pub kappa: ScalarField,
    pub g: ScalarField,
    /// Short note on smoothness and on how the boundary data is attained.
    pub regularity: String,
}

impl fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExactSolution")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("regularity", &self.regularity)
            .finish_non_exhaustive()
    }
}

impl ExactSolution {
    pub fn problem(&self) -> ProblemSpec {
        ProblemSpec {
            domain: self.domain.clone(),
            kappa: self.kappa.clone(),
            g: self.g.clone(),
        }
    }

    pub fn u_at(&self, p: Point) -> f64 {
        (self.u_exact)(p)
    }
}

/// Lower unit hemisphere `−√(1 − |x|²)`, clamped to 0 outside the disc.
pub fn lower_hemisphere(p: Point) -> f64 {
    -(1.0 - p.x * p.x - p.y * p.y).max(0.0).sqrt()
}

/// The three half-disc problems: a Lipschitz cone with κ = 0, the unit
/// sphere with κ = 1, and the sphere with boundary data raised by `x/4`.
pub fn builtin_examples() -> Vec<ExactSolution> {
    let (s, c) = (PI / 10.0).sin_cos();
    let wedge: ScalarField = Arc::new(move |p: Point| (-p.x * s + p.y * c).abs());
    let ball: ScalarField = Arc::new(lower_hemisphere);
    let zero: ScalarField = Arc::new(|_| 0.0);
    let one: ScalarField = Arc::new(|_| 1.0);
    vec![
        ExactSolution {
            name: "lipschitz".into(),
            domain: Domain::HalfDisc,
            u_exact: wedge.clone(),
            kappa: zero,
            g: wedge,
            regularity: "Lipschitz, not differentiable along a line through the origin".into(),
        },
        ExactSolution {
            name: "ball".into(),
            domain: Domain::HalfDisc,
            u_exact: ball.clone(),
            kappa: one.clone(),
            g: ball.clone(),
            regularity: "smooth inside, unbounded gradient on the arc".into(),
        },
        ExactSolution {
            name: "noncts".into(),
            domain: Domain::HalfDisc,
            u_exact: ball,
            kappa: one,
            g: Arc::new(|p: Point| lower_hemisphere(p) + p.x / 4.0),
            regularity: "as `ball`; the data exceeds the solution by x/4, so the solution \
                         is discontinuous at the boundary"
                .into(),
        },
    ]
}

pub fn example(name: &str) -> Option<ExactSolution> {
    builtin_examples().into_iter().find(|e| e.name == name)
}

/// Piecewise-constant extension: the largest value among the cloud points
/// nearest to `x`.
pub fn extend_nearest(cloud: &PointCloud, u: &[f64], x: Point) -> f64 {
    let (_, ties) = cloud.nearest(x);
    ties.iter().map(|&id| u[id]).fold(f64::NEG_INFINITY, f64::max)
}

/// `max |U − u|` over every cloud point, boundary included.
pub fn error_sup(cloud: &PointCloud, u: &[f64], exact: &ExactSolution) -> f64 {
    (0..cloud.len())
        .map(|id| (u[id] - exact.u_at(cloud.point(id))).abs())
        .fold(0.0, f64::max)
}

/// `max |U − u|` over interior points farther than `band` from the boundary.
/// Zero when no such point exists.
pub fn error_sup_interior(cloud: &PointCloud, u: &[f64], exact: &ExactSolution, band: f64) -> f64 {
    let domain = cloud.domain();
    cloud
        .interior_ids()
        .filter(|&id| domain.distance_to_boundary(cloud.point(id)) > band)
        .map(|id| (u[id] - exact.u_at(cloud.point(id))).abs())
        .fold(0.0, f64::max)
}

/// `Σ h²·|U − u|` over interior points.
pub fn error_l1(cloud: &PointCloud, u: &[f64], exact: &ExactSolution) -> f64 {
    let w = cloud.h() * cloud.h();
    cloud
        .interior_ids()
        .map(|id| w * (u[id] - exact.u_at(cloud.point(id))).abs())
        .sum()
}

/// CSV with columns `id,x,y,u,u_exact,error`.
pub fn write_solution_csv<W: Write>(
    cloud: &PointCloud,
    u: &[f64],
    exact: &ExactSolution,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "id,x,y,u,u_exact,error")?;
    for (id, p) in cloud.points().iter().enumerate() {
        let ue = exact.u_at(*p);
        writeln!(w, "{id},{},{},{},{ue},{}", p.x, p.y, u[id], u[id] - ue)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorRow {
    pub h: f64,
    pub sup_error: f64,
    pub interior_sup_error: f64,
    pub l1_error: f64,
    pub iterations: usize,
    pub wall_time: f64,
    pub converged: bool,
    /// Set when the row could not be computed; the error fields are NaN then.
    pub failure: Option<String>,
}

impl ErrorRow {
    fn failed(h: f64, err: &Error) -> Self {
        Self {
            h,
            sup_error: f64::NAN,
            interior_sup_error: f64::NAN,
            l1_error: f64::NAN,
            iterations: 0,
            wall_time: 0.0,
            converged: false,
            failure: Some(err.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorTable {
    pub example: String,
    pub interior_band: f64,
    pub rows: Vec<ErrorRow>,
}

impl ErrorTable {
    pub fn all_solved(&self) -> bool {
        self.rows.iter().all(|r| r.failure.is_none() && r.converged)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "example,h,sup_error,interior_sup_error,l1_error,iterations,wall_time,converged,failure")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{:e},{:e},{:e},{},{:.3},{},{}",
                self.example,
                r.h,
                r.sup_error,
                r.interior_sup_error,
                r.l1_error,
                r.iterations,
                r.wall_time,
                r.converged,
                r.failure.as_deref().unwrap_or("").replace(',', ";")
            )?;
        }
        Ok(())
    }
}

fn h_label(h: f64) -> String {
    let k = -h.log2();
    if (k - k.round()).abs() < 1e-12 && k > 0.0 {
        format!("2^-{}", k.round() as i64)
    } else {
        format!("{h}")
    }
}

impl fmt::Display for ErrorTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.example)?;
        writeln!(
            f,
            "{:>8}  {:>12}  {:>12}  {:>12}  {:>9}  {:>9}",
            "h",
            "sup",
            format!("sup(d>{})", self.interior_band),
            "L1",
            "iters",
            "time[s]"
        )?;
        for r in &self.rows {
            match &r.failure {
                Some(msg) => writeln!(f, "{:>8}  failed: {msg}", h_label(r.h))?,
                None => writeln!(
                    f,
                    "{:>8}  {:>12.3e}  {:>12.3e}  {:>12.3e}  {:>9}  {:>9.2}{}",
                    h_label(r.h),
                    r.sup_error,
                    r.interior_sup_error,
                    r.l1_error,
                    r.iterations,
                    r.wall_time,
                    if r.converged { "" } else { "  (not converged)" }
                )?,
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyConfig {
    /// Solver settings; `tol` is replaced per row unless `tol` below is set.
    pub solver: SolverConfig,
    /// Fixed residual tolerance; `None` uses `1e-8 / h²`.
    pub tol: Option<f64>,
    pub interior_band: f64,
    /// Fixed number of direction pairs instead of the default rule.
    pub direction_pairs: Option<usize>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            tol: None,
            interior_band: 0.2,
            direction_pairs: None,
        }
    }
}

impl StudyConfig {
    pub fn directions(&self, h: f64) -> Result<DirectionSet> {
        match self.direction_pairs {
            Some(n) => DirectionSet::with_pairs(h, n),
            None => make_direction_set(h),
        }
    }

    pub fn solver_for(&self, h: f64) -> SolverConfig {
        SolverConfig {
            tol: self.tol.unwrap_or(1e-8 / (h * h)),
            ..self.solver.clone()
        }
    }
}

fn study_row(example: &ExactSolution, h: f64, config: &StudyConfig) -> Result<ErrorRow> {
    let start = Instant::now();
    let cloud = PointCloud::build(&example.domain, h)?;
    let table = build_stencil_table(&cloud, &config.directions(h)?)?;
    let (u, report) = solve(&example.problem(), &cloud, &table, &config.solver_for(h))?;
    Ok(ErrorRow {
        h,
        sup_error: error_sup(&cloud, &u, example),
        interior_sup_error: error_sup_interior(&cloud, &u, example, config.interior_band),
        l1_error: error_l1(&cloud, &u, example),
        iterations: report.iterations,
        wall_time: start.elapsed().as_secs_f64(),
        converged: report.converged,
        failure: None,
    })
}

/// Solves `example` at each spacing of `h_list` (strictly decreasing) and
/// tabulates the errors. A failing row is recorded and the study continues.
pub fn convergence_study(example: &ExactSolution, h_list: &[f64], config: &StudyConfig) -> Result<ErrorTable> {
    if let Some(h) = h_list.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
        return Err(Error::InvalidParameter(format!("spacing h must be positive, got {h}")));
    }
    if h_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("h values must be strictly decreasing".into()));
    }
    let rows = h_list
        .iter()
        .map(|&h| {
            study_row(example, h, config).unwrap_or_else(|err| {
                log::warn!("{} at h = {h}: {err}", example.name);
                ErrorRow::failed(h, &err)
            })
        })
        .collect();
    Ok(ErrorTable {
        example: example.name.clone(),
        interior_band: config.interior_band,
        rows,
    })
}
