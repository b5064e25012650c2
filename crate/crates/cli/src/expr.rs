//! Curvature and boundary data given as expression strings.

use std::sync::Arc;

use gausscurve::operator::ScalarField;
use gausscurve::Point;
use meval::{Context, Expr};

use crate::error::{CliError, CliResult};

thread_local! {
    static BUILTINS: Context<'static> = Context::new();
}

fn parse(name: &str, src: &str, vars: &[&str]) -> CliResult<Expr> {
    let err = |e: meval::Error| CliError::Expression {
        name: name.to_string(),
        message: format!("`{src}`: {e}"),
    };
    let expr: Expr = src.parse().map_err(err)?;
    // binding checks that every variable and function is known
    expr.clone().bindn(vars).map(drop).map_err(err)?;
    Ok(expr)
}

/// Field of `x` and `y`.
pub fn field_2d(name: &str, src: &str) -> CliResult<ScalarField> {
    let expr = parse(name, src, &["x", "y"])?;
    Ok(Arc::new(move |p: Point| {
        BUILTINS.with(|ctx| expr.eval_with_context(([("x", p.x), ("y", p.y)], ctx)).unwrap_or(f64::NAN))
    }))
}

/// Function of `x` alone.
pub fn field_1d(name: &str, src: &str) -> CliResult<Arc<dyn Fn(f64) -> f64 + Send + Sync>> {
    let expr = parse(name, src, &["x"])?;
    Ok(Arc::new(move |x: f64| {
        BUILTINS.with(|ctx| expr.eval_with_context(([("x", x)], ctx)).unwrap_or(f64::NAN))
    }))
}
