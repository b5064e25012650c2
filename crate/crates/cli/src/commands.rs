use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use gausscurve::analysis::{self, error_l1, error_sup, error_sup_interior, ExactSolution};
use gausscurve::operator::{check_compatibility, check_hypotheses, COMPATIBILITY_MARGIN};
use gausscurve::{
    build_stencil_table, convergence_study, make_direction_set, solve, solve_1d, DirectionSet, PointCloud, Problem1D,
    ProblemSpec, Scheme, SolverConfig, StudyConfig,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{DomainChoice, RunConfig};
use crate::error::{CliError, CliResult};
use crate::expr;

const COMPATIBILITY_SAMPLES: usize = 512;

pub struct Problem {
    pub label: String,
    pub spec: ProblemSpec,
    pub exact: Option<ExactSolution>,
}

pub fn resolve_problem(cfg: &RunConfig) -> CliResult<Problem> {
    cfg.validate()?;
    if let Some(name) = &cfg.example {
        let ex = analysis::example(name).ok_or_else(|| CliError::Config(format!("unknown example `{name}`")))?;
        return Ok(Problem {
            label: name.clone(),
            spec: ex.problem(),
            exact: Some(ex),
        });
    }
    let (k, g) = (cfg.kappa.as_deref().unwrap_or_default(), cfg.g.as_deref().unwrap_or_default());
    let domain = cfg.domain.unwrap_or(DomainChoice::HalfDisc).domain();
    Ok(Problem {
        label: format!("kappa = {k}, g = {g} on {}", domain.name()),
        spec: ProblemSpec {
            domain,
            kappa: expr::field_2d("kappa", k)?,
            g: expr::field_2d("g", g)?,
        },
        exact: None,
    })
}

fn base_solver(cfg: &RunConfig) -> SolverConfig {
    let d = SolverConfig::default();
    SolverConfig {
        max_iters: cfg.max_iters.unwrap_or(d.max_iters),
        dt_safety: cfg.dt_safety.unwrap_or(d.dt_safety),
        force: cfg.force,
        ..d
    }
}

fn solver_for(cfg: &RunConfig, h: f64) -> SolverConfig {
    SolverConfig {
        tol: cfg.tol.unwrap_or(1e-8 / (h * h)),
        ..base_solver(cfg)
    }
}

fn directions(cfg: &RunConfig, h: f64) -> gausscurve::Result<DirectionSet> {
    match cfg.pairs {
        Some(n) => DirectionSet::with_pairs(h, n),
        None => make_direction_set(h),
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> CliResult<()> {
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

fn prepare_out(cfg: &RunConfig) -> CliResult<PathBuf> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

fn write_manifest(dir: &Path, command: &str, cfg: &RunConfig, extra: serde_json::Value) -> CliResult<()> {
    let mut manifest = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "threads": rayon::current_num_threads(),
        "config": cfg,
    });
    if let (Some(m), serde_json::Value::Object(e)) = (manifest.as_object_mut(), extra) {
        m.extend(e);
    }
    let path = dir.join("manifest.json");
    write_with(&path, |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest)?;
        writeln!(w)
    })
}

/// Refuses data that fails the compatibility test unless forced.
fn gate(spec: &ProblemSpec, force: bool) -> CliResult<()> {
    let c = check_compatibility(spec, COMPATIBILITY_SAMPLES);
    if c.ok {
        return Ok(());
    }
    if force {
        eprintln!(
            "warning: compatibility not strict (total curvature {:.6} vs {:.6}, margin {:.0}%); continuing because of --force",
            c.lhs,
            c.rhs,
            100.0 * COMPATIBILITY_MARGIN
        );
        Ok(())
    } else {
        eprintln!("hint: rerun with --force to solve anyway");
        Err(gausscurve::Error::Incompatible { lhs: c.lhs, rhs: c.rhs }.into())
    }
}

#[derive(Serialize)]
struct Timings {
    cloud: f64,
    stencils: f64,
    solve: f64,
}

pub fn cmd_solve(cfg: &RunConfig) -> CliResult<()> {
    let problem = resolve_problem(cfg)?;
    let h = match cfg.h.as_slice() {
        [h] => *h,
        [] => return Err(CliError::Config("solve needs a spacing --h".into())),
        _ => return Err(CliError::Config("solve takes a single spacing; use `study` for a list".into())),
    };
    gate(&problem.spec, cfg.force)?;

    let t = Instant::now();
    let cloud = PointCloud::build(&problem.spec.domain, h)?;
    let t_cloud = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let dirs = directions(cfg, h)?;
    let table = build_stencil_table(&cloud, &dirs)?;
    let t_stencils = t.elapsed().as_secs_f64();
    let solver = solver_for(cfg, h);
    let t = Instant::now();
    // the compatibility gate above already ran
    let unchecked = SolverConfig {
        force: true,
        ..solver.clone()
    };
    let (u, report) = solve(&problem.spec, &cloud, &table, &unchecked)?;
    let t_solve = t.elapsed().as_secs_f64();

    let dir = prepare_out(cfg)?;
    write_with(&dir.join("solution.csv"), |w| {
        writeln!(w, "id,x,y,u,is_boundary")?;
        for (id, p) in cloud.points().iter().enumerate() {
            writeln!(w, "{id},{},{},{},{}", p.x, p.y, u[id], u8::from(cloud.is_boundary(id)))?;
        }
        Ok(())
    })?;
    let residual = Scheme::new(&problem.spec, &cloud, &table)?.residual(&u)?;
    write_with(&dir.join("residual.csv"), |w| {
        writeln!(w, "id,x,y,residual")?;
        for (id, p) in cloud.points().iter().enumerate() {
            writeln!(w, "{id},{},{},{}", p.x, p.y, residual[id])?;
        }
        Ok(())
    })?;
    write_with(&dir.join("iterations.log"), |w| report.write_log(w))?;

    let errors = problem.exact.as_ref().map(|ex| {
        json!({
            "sup": error_sup(&cloud, &u, ex),
            "interior_sup": error_sup_interior(&cloud, &u, ex, cfg.interior_band()),
            "interior_band": cfg.interior_band(),
            "l1": error_l1(&cloud, &u, ex),
        })
    });
    if let Some(ex) = &problem.exact {
        write_with(&dir.join("errors.csv"), |w| analysis::write_solution_csv(&cloud, &u, ex, w))?;
    }
    write_manifest(
        &dir,
        "solve",
        cfg,
        json!({
            "problem": problem.label,
            "cloud": {
                "n_interior": cloud.n_interior(),
                "n_boundary": cloud.n_boundary(),
                "h_boundary": cloud.h_boundary(),
            },
            "directions": { "pairs": dirs.n_pairs, "d_theta": dirs.d_theta, "delta": dirs.delta },
            "solver": solver,
            "result": {
                "iterations": report.iterations,
                "final_residual": report.final_residual,
                "converged": report.converged,
                "dt_min": report.dt_min,
                "dt_max": report.dt_max,
                "stability": report.stability,
            },
            "errors": errors,
            "timings": Timings { cloud: t_cloud, stencils: t_stencils, solve: t_solve },
        }),
    )?;

    println!("problem     {}", problem.label);
    println!("h           {h}  ({} interior, {} boundary points)", cloud.n_interior(), cloud.n_boundary());
    println!("iterations  {}", report.iterations);
    println!("residual    {:.3e} (tol {:.3e})", report.final_residual, solver.tol);
    if let Some(e) = &errors {
        println!("sup error   {:.4e}", e["sup"].as_f64().unwrap_or(f64::NAN));
        println!("L1 error    {:.4e}", e["l1"].as_f64().unwrap_or(f64::NAN));
    }
    println!("output      {}", dir.display());
    if report.converged {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "no convergence after {} iterations (residual {:.3e})",
            report.iterations, report.final_residual
        )))
    }
}

pub fn cmd_study(cfg: &RunConfig) -> CliResult<()> {
    let problem = resolve_problem(cfg)?;
    let exact = problem
        .exact
        .ok_or_else(|| CliError::Config("study needs a built-in example with a known solution".into()))?;
    if cfg.h.is_empty() {
        return Err(CliError::Config("study needs at least one spacing in --h".into()));
    }
    let study = StudyConfig {
        solver: base_solver(cfg),
        tol: cfg.tol,
        interior_band: cfg.interior_band(),
        direction_pairs: cfg.pairs,
    };
    let table = convergence_study(&exact, &cfg.h, &study)?;
    let dir = prepare_out(cfg)?;
    write_with(&dir.join("error_table.csv"), |w| table.write_csv(w))?;
    write_with(&dir.join("error_table.txt"), |w| write!(w, "{table}"))?;
    write_manifest(&dir, "study", cfg, json!({ "table": table }))?;
    print!("{table}");
    if table.all_solved() {
        Ok(())
    } else {
        Err(CliError::Failed("some rows did not solve".into()))
    }
}

pub fn cmd_validate(cfg: &RunConfig) -> CliResult<()> {
    let problem = resolve_problem(cfg)?;
    let report = check_hypotheses(&problem.spec, 256);
    let mut all = true;
    let mut line = |ok: bool, text: String| {
        all &= ok;
        println!("[{}] {text}", if ok { "PASS" } else { "FAIL" });
    };
    println!("problem: {}", problem.label);
    line(report.domain_ok, format!("H1 domain {} is convex and bounded", problem.spec.domain.name()));
    line(report.boundary_data_ok, "H2 boundary data finite on boundary samples".into());
    line(report.curvature_ok, format!("H3 curvature non-negative (min sampled {:.4})", report.min_kappa));
    let c = report.compatibility;
    line(
        c.ok,
        format!(
            "H4 strict compatibility: total curvature {:.6} < {:.6} with {:.0}% margin",
            c.lhs,
            c.rhs,
            100.0 * COMPATIBILITY_MARGIN
        ),
    );
    for &h in &cfg.h {
        let built = PointCloud::build(&problem.spec.domain, h).and_then(|cloud| {
            let table = build_stencil_table(&cloud, &directions(cfg, h)?)?;
            Ok((cloud, table))
        });
        match built {
            Ok((cloud, table)) => line(
                true,
                format!(
                    "cloud and stencils at h = {h}: {} interior, {} boundary points, {} directions",
                    cloud.n_interior(),
                    cloud.n_boundary(),
                    table.directions().len()
                ),
            ),
            Err(e) => line(false, format!("cloud and stencils at h = {h}: {e}")),
        }
    }
    if all {
        Ok(())
    } else {
        Err(CliError::Failed("validation failed".into()))
    }
}

pub struct OneDArgs {
    pub h: f64,
    pub interval: (f64, f64),
    pub kappa: String,
    pub g: (f64, f64),
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub out: Option<PathBuf>,
}

pub fn cmd_solve1d(args: &OneDArgs) -> CliResult<()> {
    let kappa = expr::field_1d("kappa", &args.kappa)?;
    let p = Problem1D::new(args.interval, move |x| kappa(x), args.g, args.h)?;
    let d = SolverConfig::default();
    let cfg = SolverConfig {
        tol: args.tol.unwrap_or(1e-8 / (args.h * args.h)),
        max_iters: args.max_iters.unwrap_or(d.max_iters),
        ..d
    };
    let s = solve_1d(&p, &cfg)?;
    let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    write_with(&dir.join("solution1d.csv"), |w| s.write_csv(w))?;
    println!("iterations  {}", s.iterations);
    println!("residual    {:.3e} (tol {:.3e})", s.final_residual, cfg.tol);
    println!("output      {}", dir.display());
    if s.converged {
        Ok(())
    } else {
        Err(CliError::Failed(format!("no convergence after {} iterations", s.iterations)))
    }
}
