use gausscurve::analysis::{error_l1, error_sup, error_sup_interior, example, extend_nearest, write_solution_csv};
use gausscurve::{
    build_stencil_table, convergence_study, make_direction_set, solve, Domain, Point, PointCloud, ProblemSpec, SolverConfig,
    StudyConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn run(name: &str, h: f64) -> (PointCloud, Vec<f64>, gausscurve::SolveReport) {
    let ex = example(name).unwrap();
    let cloud = PointCloud::build(&ex.domain, h).unwrap();
    let table = build_stencil_table(&cloud, &make_direction_set(h).unwrap()).unwrap();
    let (u, report) = solve(&ex.problem(), &cloud, &table, &SolverConfig::for_spacing(h)).unwrap();
    (cloud, u.0, report)
}

#[test]
fn zero_curvature_with_convex_data_converges() {
    let h = 0.125;
    let spec = ProblemSpec::new(Domain::HalfDisc, |_| 0.0, |p| p.x * p.x + 0.5 * p.y * p.y);
    let cloud = PointCloud::build(&spec.domain, h).unwrap();
    let table = build_stencil_table(&cloud, &make_direction_set(h).unwrap()).unwrap();
    let cfg = SolverConfig::for_spacing(h);
    let (u, report) = solve(&spec, &cloud, &table, &cfg).unwrap();
    assert!(report.converged);
    assert!(report.final_residual <= cfg.tol);
    assert!(report.stability.within_bound);
    // the solution lies above the convex data's interior values and below the data's max
    for id in cloud.interior_ids() {
        let p = cloud.point(id);
        assert!(u[id] >= p.x * p.x + 0.5 * p.y * p.y - 1e-6);
        assert!(u[id] <= 1.0 + 1e-6);
    }
}

#[test]
fn ball_and_lipschitz_match_table_values_at_coarsest_spacing() {
    let (cloud, u, report) = run("ball", 0.125);
    assert!(report.converged);
    let sup = error_sup(&cloud, &u, &example("ball").unwrap());
    assert!((sup / 1.94e-1 - 1.0).abs() < 0.1, "ball sup {sup}");

    let (cloud, u, _) = run("lipschitz", 0.125);
    let sup = error_sup(&cloud, &u, &example("lipschitz").unwrap());
    assert!((sup / 9.45e-2 - 1.0).abs() < 0.1, "lipschitz sup {sup}");
}

#[test]
fn noncts_keeps_its_boundary_layer_while_l1_shrinks() {
    let ex = example("noncts").unwrap();
    let table = convergence_study(&ex, &[0.125, 0.0625, 0.03125], &StudyConfig::default()).unwrap();
    assert!(table.all_solved());
    for r in &table.rows {
        assert!(r.sup_error >= 0.2, "{r:?}");
    }
    assert!(table.rows.windows(2).all(|w| w[1].l1_error < w[0].l1_error));
    assert!(table.rows.windows(2).all(|w| w[1].interior_sup_error < w[0].interior_sup_error));
}

#[test]
fn converged_iterate_stays_below_initializer() {
    let (_, _, report) = run("noncts", 0.0625);
    assert!(report.converged);
    assert!(report.stability.max_above_initializer <= 0.0);
    assert!(report.stability.within_bound);
}

#[test]
fn infinite_tolerance_returns_initializer() {
    let h = 0.125;
    let ex = example("ball").unwrap();
    let cloud = PointCloud::build(&ex.domain, h).unwrap();
    let table = build_stencil_table(&cloud, &make_direction_set(h).unwrap()).unwrap();
    let cfg = SolverConfig {
        tol: f64::INFINITY,
        ..SolverConfig::default()
    };
    let (u, report) = solve(&ex.problem(), &cloud, &table, &cfg).unwrap();
    assert_eq!(report.iterations, 0);
    assert!(report.converged);
    assert_eq!(u, gausscurve::solver::initialize(&cloud, &ex.problem()));
}

#[test]
fn max_iterations_returns_last_iterate_unconverged() {
    let h = 0.125;
    let ex = example("ball").unwrap();
    let cloud = PointCloud::build(&ex.domain, h).unwrap();
    let table = build_stencil_table(&cloud, &make_direction_set(h).unwrap()).unwrap();
    let cfg = SolverConfig {
        max_iters: 5,
        ..SolverConfig::for_spacing(h)
    };
    let (_, report) = solve(&ex.problem(), &cloud, &table, &cfg).unwrap();
    assert_eq!(report.iterations, 5);
    assert!(!report.converged);
}

#[test]
fn extension_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (cloud, u, _) = run("ball", 0.125);
    for id in 0..cloud.len() {
        assert_eq!(extend_nearest(&cloud, &u, cloud.point(id)), u[id]);
    }
    for _ in 0..500 {
        let p = Point::new(rng.gen_range(0.0..1.0), rng.gen_range(-1.0..1.0));
        let best = (0..cloud.len()).map(|i| cloud.point(i).dist(p)).fold(f64::INFINITY, f64::min);
        let want = (0..cloud.len())
            .filter(|&i| cloud.point(i).dist(p) <= best * (1.0 + 1e-12))
            .map(|i| u[i])
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(extend_nearest(&cloud, &u, p), want);
    }
}

#[test]
fn error_norms_relate_as_expected() {
    let ex = example("ball").unwrap();
    let (cloud, u, _) = run("ball", 0.0625);
    let sup = error_sup(&cloud, &u, &ex);
    let inner = error_sup_interior(&cloud, &u, &ex, 0.2);
    let l1 = error_l1(&cloud, &u, &ex);
    assert!(inner <= sup);
    // |Ω| = π/2 bounds the L1 norm by the sup norm times the area (up to quadrature)
    assert!(l1 <= sup * std::f64::consts::FRAC_PI_2 * 1.05);
    let mut csv = Vec::new();
    write_solution_csv(&cloud, &u, &ex, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("id,x,y,u,u_exact,error\n"));
    assert_eq!(text.lines().count(), cloud.len() + 1);
}
