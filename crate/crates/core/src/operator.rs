//! The discrete convexified Monge–Ampère operator.
//!
//! Interior rows evaluate
//!
//! ```text
//! F(x₀) = max{ −det⁺ʰ[u] + κ(x₀)·(1 + |∇ʰu|²)², −λ₁ʰ[u] }
//! ```
//!
//! and boundary rows enforce the Dirichlet data strongly, `F(x₀) = u(x₀) − g(x₀)`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::ops::{Deref, DerefMut};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point, PointCloud};
use crate::stencil::StencilTable;

pub type ScalarField = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// Dirichlet problem for prescribed Gaussian curvature on a convex domain.
#[derive(Clone)]
pub struct ProblemSpec {
    pub domain: Domain,
    /// Curvature κ ≥ 0.
    pub kappa: ScalarField,
    /// Boundary heights.
    pub g: ScalarField,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec").field("domain", &self.domain).finish_non_exhaustive()
    }
}

impl ProblemSpec {
    pub fn new(
        domain: Domain,
        kappa: impl Fn(Point) -> f64 + Send + Sync + 'static,
        g: impl Fn(Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            domain,
            kappa: Arc::new(kappa),
            g: Arc::new(g),
        }
    }

    pub fn kappa_at(&self, p: Point) -> f64 {
        (self.kappa)(p)
    }

    pub fn g_at(&self, p: Point) -> f64 {
        (self.g)(p)
    }
}

/// Grid values indexed by cloud point id.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridFunction(pub Vec<f64>);

impl GridFunction {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn from_fn(cloud: &PointCloud, f: impl Fn(Point) -> f64) -> Self {
        Self(cloud.points().iter().map(|&p| f(p)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// CSV with columns `id,x,y,value`.
    pub fn write_csv<W: Write>(&self, cloud: &PointCloud, mut w: W) -> std::io::Result<()> {
        writeln!(w, "id,x,y,value")?;
        for (id, (p, v)) in cloud.points().iter().zip(&self.0).enumerate() {
            writeln!(w, "{id},{:.17e},{:.17e},{:.17e}", p.x, p.y, v)?;
        }
        Ok(())
    }
}

impl Deref for GridFunction {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for GridFunction {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// `R(p) = (1 + |p|²)^{(n+2)/2}` for `n = 2`, as a function of `|p|²`.
#[inline]
pub fn r_factor(p_sq: f64) -> f64 {
    let t = 1.0 + p_sq;
    t * t
}

/// Derivative of [`r_factor`] with respect to `|p|²`.
#[inline]
pub fn r_factor_derivative(p_sq: f64) -> f64 {
    2.0 * (1.0 + p_sq)
}

/// Value of one row together with a bound on its derivative in the centre value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RowEval {
    pub value: f64,
    /// Upper bound on `∂F/∂u(x₀)` at the current iterate.
    pub diagonal: f64,
}

/// Discrete operator on a fixed cloud: stencils plus κ and g sampled at the nodes.
#[derive(Clone, Debug)]
pub struct Scheme<'a> {
    cloud: &'a PointCloud,
    table: &'a StencilTable,
    kappa: Vec<f64>,
    g: Vec<f64>,
}

impl<'a> Scheme<'a> {
    pub fn new(spec: &ProblemSpec, cloud: &'a PointCloud, table: &'a StencilTable) -> Result<Self> {
        if table.n_interior() != cloud.n_interior() {
            return Err(Error::ShapeMismatch {
                expected: cloud.n_interior(),
                actual: table.n_interior(),
            });
        }
        let kappa: Vec<f64> = cloud.interior_ids().map(|i| spec.kappa_at(cloud.point(i))).collect();
        if let Some(k) = kappa.iter().find(|k| !(k.is_finite() && **k >= 0.0)) {
            return Err(Error::InvalidParameter(format!("curvature must be finite and non-negative, got {k}")));
        }
        let g: Vec<f64> = cloud.boundary_ids().map(|i| spec.g_at(cloud.point(i))).collect();
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("boundary data must be finite".into()));
        }
        Ok(Self { cloud, table, kappa, g })
    }

    pub fn cloud(&self) -> &'a PointCloud {
        self.cloud
    }

    pub fn table(&self) -> &'a StencilTable {
        self.table
    }

    pub fn kappa(&self, x0: usize) -> f64 {
        self.kappa[x0]
    }

    pub fn g(&self, x0: usize) -> f64 {
        self.g[x0 - self.cloud.n_interior()]
    }

    pub fn boundary_data(&self) -> &[f64] {
        &self.g
    }

    fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.cloud.len() {
            return Err(Error::ShapeMismatch {
                expected: self.cloud.len(),
                actual: u.len(),
            });
        }
        Ok(())
    }

    /// `Δʰ_νν u(x₀)` for direction index `k` of the direction set.
    pub fn second_diff(&self, u: &[f64], x0: usize, k: usize) -> f64 {
        self.table.at(x0)[k].second_diff(u, u[x0])
    }

    /// `min` over orthogonal pairs of `max{Δʰ_νν u, 0} · max{Δʰ_ν⊥ν⊥ u, 0}`.
    pub fn det_plus_h(&self, u: &[f64], x0: usize) -> f64 {
        let st = self.table.at(x0);
        let u0 = u[x0];
        self.table
            .directions()
            .pairs()
            .map(|(j, k)| st[j].second_diff(u, u0).max(0.0) * st[k].second_diff(u, u0).max(0.0))
            .fold(f64::INFINITY, f64::min)
    }

    /// Upwind squared gradient magnitude from the two axis stencils.
    pub fn grad_mag_sq_h(&self, u: &[f64], x0: usize) -> f64 {
        let u0 = u[x0];
        self.table
            .gradient_at(x0)
            .iter()
            .map(|s| {
                let m = s.forward_pair(u, u0).max(s.backward_pair(u, u0)).max(0.0);
                m * m
            })
            .sum()
    }

    /// Smallest directional second difference over the direction set.
    pub fn lambda1_h(&self, u: &[f64], x0: usize) -> f64 {
        let u0 = u[x0];
        self.table
            .at(x0)
            .iter()
            .map(|s| s.second_diff(u, u0))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn f_interior(&self, u: &[f64], x0: usize) -> f64 {
        self.eval_interior(u, x0).value
    }

    pub fn f_boundary(&self, u: &[f64], x0: usize) -> f64 {
        u[x0] - self.g(x0)
    }

    /// Interior row value and its centre-derivative bound in one pass.
    pub fn eval_interior(&self, u: &[f64], x0: usize) -> RowEval {
        let st = self.table.at(x0);
        let u0 = u[x0];
        let mut det = f64::INFINITY;
        let mut det_diag: f64 = 0.0;
        let mut lambda1 = f64::INFINITY;
        let mut lambda_diag: f64 = 0.0;
        for (j, k) in self.table.directions().pairs() {
            let (dj, dk) = (st[j].second_diff(u, u0), st[k].second_diff(u, u0));
            let (aj, ak) = (st[j].a_sum(), st[k].a_sum());
            det = det.min(dj.max(0.0) * dk.max(0.0));
            det_diag = det_diag.max(aj * dk.max(0.0) + ak * dj.max(0.0));
            lambda1 = lambda1.min(dj).min(dk);
            lambda_diag = lambda_diag.max(aj).max(ak);
        }

        let mut grad_sq = 0.0;
        let mut grad_diag = 0.0;
        for s in self.table.gradient_at(x0) {
            let m = s.forward_pair(u, u0).max(s.backward_pair(u, u0)).max(0.0);
            grad_sq += m * m;
            let (bf, bb) = s.b_sums();
            grad_diag += 2.0 * m * bf.abs().max(bb.abs());
        }
        let kappa = self.kappa[x0];
        let curvature_branch = -det + kappa * r_factor(grad_sq);
        let convexity_branch = -lambda1;
        RowEval {
            value: curvature_branch.max(convexity_branch),
            diagonal: (det_diag + kappa * r_factor_derivative(grad_sq) * grad_diag).max(lambda_diag),
        }
    }

    /// Row value and derivative bound at any cloud point.
    pub fn eval(&self, u: &[f64], x0: usize) -> RowEval {
        if self.cloud.is_boundary(x0) {
            RowEval {
                value: self.f_boundary(u, x0),
                diagonal: 1.0,
            }
        } else {
            self.eval_interior(u, x0)
        }
    }

    /// `Fʰ[u]` at every cloud point.
    pub fn residual(&self, u: &[f64]) -> Result<GridFunction> {
        self.check_len(u)?;
        Ok(GridFunction(
            (0..self.cloud.len()).into_par_iter().map(|i| self.eval(u, i).value).collect(),
        ))
    }

    /// Row values and derivative bounds at every point.
    pub fn evaluate(&self, u: &[f64]) -> Result<Vec<RowEval>> {
        self.check_len(u)?;
        Ok((0..self.cloud.len()).into_par_iter().map(|i| self.eval(u, i)).collect())
    }
}

/// Total curvature against the total Gauss measure `∫(1+|p|²)⁻² dp = π`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Compatibility {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Relative margin below π that the quadrature must clear; quadrature error
/// keeps a borderline total curvature from being certified.
pub const COMPATIBILITY_MARGIN: f64 = 1e-2;

/// Midpoint-rule `∫_Ω κ` on an `n × n` cell lattice over the bounding box.
pub fn check_compatibility(spec: &ProblemSpec, n: usize) -> Compatibility {
    let bbox = spec.domain.bbox();
    let span = bbox.max - bbox.min;
    let (dx, dy) = (span.x / n as f64, span.y / n as f64);
    let lhs: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = bbox.min.x + (i as f64 + 0.5) * dx;
            (0..n)
                .map(|j| Point::new(x, bbox.min.y + (j as f64 + 0.5) * dy))
                .filter(|&p| spec.domain.contains(p))
                .map(|p| spec.kappa_at(p))
                .sum::<f64>()
        })
        .sum::<f64>()
        * dx
        * dy;
    let rhs = PI;
    Compatibility {
        lhs,
        rhs,
        ok: lhs < rhs * (1.0 - COMPATIBILITY_MARGIN),
    }
}

/// Outcome of checking the data hypotheses on samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisReport {
    /// Domain convex and bounded (H1).
    pub domain_ok: bool,
    /// Boundary data finite at the samples (H2).
    pub boundary_data_ok: bool,
    /// Curvature finite and non-negative at the samples (H3).
    pub curvature_ok: bool,
    pub min_kappa: f64,
    /// Strict compatibility (H4).
    pub compatibility: Compatibility,
}

impl HypothesisReport {
    pub fn all_ok(&self) -> bool {
        self.domain_ok && self.boundary_data_ok && self.curvature_ok && self.compatibility.ok
    }
}

/// Samples κ and g on an `n × n` lattice and along the boundary.
pub fn check_hypotheses(spec: &ProblemSpec, n: usize) -> HypothesisReport {
    let domain = &spec.domain;
    let bbox = domain.bbox();
    let boundary: Vec<Point> = (0..4 * n).map(|k| domain.boundary_point(k as f64 / (4 * n) as f64)).collect();
    let domain_ok = boundary.iter().all(|p| bbox.contains(*p) && p.x.is_finite() && p.y.is_finite());
    let boundary_data_ok = boundary.iter().all(|&p| spec.g_at(p).is_finite());
    let span = bbox.max - bbox.min;
    let min_kappa = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            bbox.min + Point::new(span.x * (i as f64 + 0.5) / n as f64, span.y * (j as f64 + 0.5) / n as f64)
        })
        .filter(|&p| domain.contains(p))
        .chain(boundary.iter().copied())
        .map(|p| spec.kappa_at(p))
        .fold(f64::INFINITY, |m, k| if k.is_nan() { f64::NEG_INFINITY } else { m.min(k) });
    let curvature_ok = min_kappa.is_finite() && min_kappa >= 0.0;
    HypothesisReport {
        domain_ok,
        boundary_data_ok,
        curvature_ok,
        min_kappa,
        compatibility: check_compatibility(spec, (8 * n).max(256)),
    }
}
