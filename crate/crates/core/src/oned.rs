//! Reference solver for the one-dimensional curvature equation
//! `−u'' + κ(x)(1 + u'²)^{3/2} = 0` on an interval with pinned end values.
//!
//! The exact solution may not attain the data at an end point; the discrete
//! solution then develops a boundary layer in the last few cells.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::solver::SolverConfig;

type Coefficient = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct Problem1D {
    pub x_lo: f64,
    pub x_hi: f64,
    pub kappa: Coefficient,
    pub g_lo: f64,
    pub g_hi: f64,
    pub h: f64,
}

impl fmt::Debug for Problem1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem1D")
            .field("x_lo", &self.x_lo)
            .field("x_hi", &self.x_hi)
            .field("g_lo", &self.g_lo)
            .field("g_hi", &self.g_hi)
            .field("h", &self.h)
            .finish_non_exhaustive()
    }
}

impl Problem1D {
    pub fn new(
        (x_lo, x_hi): (f64, f64),
        kappa: impl Fn(f64) -> f64 + Send + Sync + 'static,
        (g_lo, g_hi): (f64, f64),
        h: f64,
    ) -> Result<Self> {
        let p = Self {
            x_lo,
            x_hi,
            kappa: Arc::new(kappa),
            g_lo,
            g_hi,
            h,
        };
        p.cells()?;
        Ok(p)
    }

    /// Number of cells; errors unless `h` divides the interval.
    pub fn cells(&self) -> Result<usize> {
        if !(self.x_lo < self.x_hi) || !self.x_lo.is_finite() || !self.x_hi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need a finite interval with x_lo < x_hi, got [{}, {}]",
                self.x_lo, self.x_hi
            )));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidParameter(format!("spacing h must be positive, got {}", self.h)));
        }
        if !(self.g_lo.is_finite() && self.g_hi.is_finite()) {
            return Err(Error::InvalidParameter("boundary values must be finite".into()));
        }
        let len = self.x_hi - self.x_lo;
        let n = (len / self.h).round();
        if n < 2.0 || (n * self.h - len).abs() > 1e-9 * len {
            return Err(Error::InvalidParameter(format!(
                "h = {} does not divide [{}, {}] into at least two cells",
                self.h, self.x_lo, self.x_hi
            )));
        }
        Ok(n as usize)
    }

    pub fn nodes(&self) -> Vec<f64> {
        let n = self.cells().unwrap_or(0);
        (0..=n).map(|i| self.x_lo + i as f64 * self.h).collect()
    }

    /// Upwind gradient magnitude `max{(u_i − u_{i+1})/h, (u_i − u_{i−1})/h, 0}`.
    pub fn upwind_gradient(&self, u: &[f64], i: usize) -> f64 {
        ((u[i] - u[i + 1]) / self.h).max((u[i] - u[i - 1]) / self.h).max(0.0)
    }

    /// Residual of interior node `i`.
    pub fn f_interior(&self, u: &[f64], i: usize) -> f64 {
        let h = self.h;
        let g = self.upwind_gradient(u, i);
        let k = (self.kappa)(self.x_lo + i as f64 * h);
        -(u[i + 1] + u[i - 1] - 2.0 * u[i]) / (h * h) + k * (1.0 + g * g).powf(1.5)
    }

    /// Upper bound on `∂F_i/∂u_i` at the current iterate.
    fn diagonal(&self, u: &[f64], i: usize) -> f64 {
        let h = self.h;
        let g = self.upwind_gradient(u, i);
        let k = (self.kappa)(self.x_lo + i as f64 * h);
        2.0 / (h * h) + k * 3.0 * g * (1.0 + g * g).sqrt() / h
    }

    /// Residuals with the end rows `u − g`.
    pub fn residual(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len() - 1;
        let mut r = Vec::with_capacity(u.len());
        r.push(u[0] - self.g_lo);
        r.extend((1..n).map(|i| self.f_interior(u, i)));
        r.push(u[n] - self.g_hi);
        r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Solution1D {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
}

impl Solution1D {
    /// CSV with columns `x,u`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,u")?;
        for (x, u) in self.x.iter().zip(&self.u) {
            writeln!(w, "{x},{u}")?;
        }
        Ok(())
    }
}

/// Explicit iteration from the concave initializer `−x²/2 + M` with end values
/// pinned to the data at every iterate.
pub fn solve_1d(p: &Problem1D, config: &SolverConfig) -> Result<Solution1D> {
    config.validate()?;
    let n = p.cells()?;
    let x = p.nodes();
    let m = (p.g_lo.abs() + p.x_lo * p.x_lo / 2.0).max(p.g_hi.abs() + p.x_hi * p.x_hi / 2.0) + 1.0;
    let mut u: Vec<f64> = x.iter().map(|x| -x * x / 2.0 + m).collect();
    u[0] = p.g_lo;
    u[n] = p.g_hi;

    let mut next = u.clone();
    let mut iterations = 0;
    let mut residual;
    loop {
        residual = 0.0f64;
        for i in 1..n {
            let f = p.f_interior(&u, i);
            residual = residual.max(f.abs());
            let dt = config.dt_safety / p.diagonal(&u, i);
            if dt < config.dt_floor {
                return Err(Error::StalledStep {
                    iteration: iterations,
                    dt,
                    floor: config.dt_floor,
                });
            }
            next[i] = u[i] - dt * f;
            if !next[i].is_finite() {
                return Err(Error::Divergence { iteration: iterations, point: i });
            }
        }
        if residual <= config.tol || iterations >= config.max_iters {
            break;
        }
        std::mem::swap(&mut u, &mut next);
        iterations += 1;
    }
    Ok(Solution1D {
        x,
        u,
        iterations,
        final_residual: residual,
        converged: residual <= config.tol,
    })
}
