use gausscurve::operator::GridFunction;
use gausscurve::solver::{check_discrete_comparison, explicit_step, initialize, step_bound};
use gausscurve::{build_stencil_table, make_direction_set, Domain, Point, PointCloud, ProblemSpec, Scheme, SolverConfig, StencilTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(h: f64) -> (PointCloud, StencilTable) {
    let cloud = PointCloud::build(&Domain::HalfDisc, h).unwrap();
    let table = build_stencil_table(&cloud, &make_direction_set(h).unwrap()).unwrap();
    (cloud, table)
}

/// Random quadratic plus grid-scale noise, so that every branch of the
/// operator gets exercised.
fn random_field(cloud: &PointCloud, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (a, b, c) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0));
    let (d, e) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let noise = rng.gen_range(0.0..0.05);
    cloud
        .points()
        .iter()
        .map(|p| a * p.x * p.x + b * p.y * p.y + c * p.x * p.y + d * p.x + e * p.y + noise * rng.gen_range(-1.0..1.0))
        .collect()
}

#[test]
fn raising_neighbours_never_raises_a_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (cloud, table) = setup(0.125);
    let spec = ProblemSpec::new(Domain::HalfDisc, |p| 1.0 + p.x, |_| 0.0);
    let scheme = Scheme::new(&spec, &cloud, &table).unwrap();
    for _ in 0..1000 {
        let u = random_field(&cloud, &mut rng);
        let x0 = rng.gen_range(0..cloud.n_interior());
        let mut v = u.clone();
        let scale = 10f64.powf(rng.gen_range(-6.0..0.0));
        for (id, vi) in v.iter_mut().enumerate() {
            if id != x0 && rng.gen_bool(0.5) {
                *vi += scale * rng.gen_range(0.0..1.0);
            }
        }
        let (fu, fv) = (scheme.f_interior(&u, x0), scheme.f_interior(&v, x0));
        assert!(fv <= fu + 1e-12 * fu.abs().max(1.0), "{fv} > {fu} at {x0}");
    }
}

#[test]
fn explicit_step_preserves_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (cloud, table) = setup(0.125);
    let spec = ProblemSpec::new(Domain::HalfDisc, |_| 1.0, |p| p.y * 0.3);
    let scheme = Scheme::new(&spec, &cloud, &table).unwrap();
    let cfg = SolverConfig::default();
    for _ in 0..1000 {
        let u = random_field(&cloud, &mut rng);
        let bump = rng.gen_range(0.0..0.1);
        let v: Vec<f64> = u.iter().map(|x| x + bump * rng.gen_range(0.0..1.0)).collect();
        let dt = step_bound(&scheme, &u, &cfg).unwrap().min_with(&step_bound(&scheme, &v, &cfg).unwrap());
        let su = explicit_step(&scheme, &u, &dt).unwrap();
        let sv = explicit_step(&scheme, &v, &dt).unwrap();
        for (a, b) in su.iter().zip(sv.iter()) {
            assert!(*a <= *b + 1e-12 * a.abs().max(1.0), "{a} > {b}");
        }
    }
}

#[test]
fn strict_pairs_are_ordered() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (cloud, table) = setup(0.125);
    let (mut trials, mut attempts) = (0, 0);
    while trials < 100 {
        attempts += 1;
        assert!(attempts < 1000, "could not construct strict pairs");
        let kappa = rng.gen_range(0.0..0.2);
        let spec = ProblemSpec::new(Domain::HalfDisc, move |_| kappa, |p| p.x * 0.5 - p.y * 0.2);
        let scheme = Scheme::new(&spec, &cloud, &table).unwrap();
        let w = initialize(&cloud, &spec);
        // v: super-solution with a small wobble; u: flatter concave profile lowered
        // just enough to be a strict sub-solution of the rows
        let eps = 1e-4 * rng.gen_range(0.0..1.0);
        let v: Vec<f64> = w.iter().map(|x| x + eps * rng.gen_range(-1.0..1.0)).collect();
        let beta = rng.gen_range(0.1..0.9);
        let shift = rng.gen_range(0.0..1.5);
        let u: Vec<f64> = cloud
            .points()
            .iter()
            .zip(&v)
            .map(|(p, vi)| vi + beta * p.norm_sq() / 2.0 - shift + eps * rng.gen_range(-1.0..1.0))
            .collect();
        match check_discrete_comparison(&scheme, &u, &v) {
            Ok(ordered) => {
                assert!(ordered);
                trials += 1;
            }
            Err(gausscurve::Error::NotStrictPair { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn equal_pair_is_rejected() {
    let (cloud, table) = setup(0.125);
    let spec = ProblemSpec::new(Domain::HalfDisc, |_| 1.0, |_| 0.0);
    let scheme = Scheme::new(&spec, &cloud, &table).unwrap();
    let w = initialize(&cloud, &spec);
    assert!(check_discrete_comparison(&scheme, &w, &w).is_err());
}

#[test]
fn initializer_residual_at_least_one() {
    for k in 3..=5 {
        let (cloud, table) = setup(0.5f64.powi(k));
        for ex in gausscurve::builtin_examples() {
            let spec = ex.problem();
            let scheme = Scheme::new(&spec, &cloud, &table).unwrap();
            let r = scheme.residual(&initialize(&cloud, &spec)).unwrap();
            let min = r.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min >= 1.0 - 1e-9, "{} h=2^-{k}: {min}", ex.name);
        }
    }
}

#[test]
fn residual_ignores_constant_shifts_in_the_interior() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (cloud, table) = setup(0.0625);
    let spec = ProblemSpec::new(Domain::HalfDisc, |_| 1.0, |_| 0.0);
    let scheme = Scheme::new(&spec, &cloud, &table).unwrap();
    for _ in 0..20 {
        let u = random_field(&cloud, &mut rng);
        let c = rng.gen_range(-5.0..5.0);
        let v: Vec<f64> = u.iter().map(|x| x + c).collect();
        for x0 in cloud.interior_ids() {
            let (a, b) = (scheme.f_interior(&u, x0), scheme.f_interior(&v, x0));
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }
}

/// Probes common to every lattice `2^-k ℤ²`, k ≥ 3, all at distance > 0.2 from the boundary.
const PROBES: [(f64, f64); 10] = [
    (0.25, 0.0),
    (0.25, 0.25),
    (0.25, -0.25),
    (0.5, 0.0),
    (0.5, 0.25),
    (0.5, -0.25),
    (0.25, 0.5),
    (0.25, -0.5),
    (0.375, 0.125),
    (0.375, -0.375),
];

/// Worst consistency error for `φ = |x|²/2`, κ = 1, where
/// `F[φ] = max{(1 + |x|²)² − 1, −1}`.
fn consistency_error(h: f64) -> f64 {
    let (cloud, table) = setup(h);
    let spec = ProblemSpec::new(Domain::HalfDisc, |_| 1.0, |p| p.norm_sq() / 2.0);
    let scheme = Scheme::new(&spec, &cloud, &table).unwrap();
    let phi = GridFunction::from_fn(&cloud, |p| p.norm_sq() / 2.0);
    PROBES
        .iter()
        .map(|&(x, y)| {
            let p = Point::new(x, y);
            let id = cloud.interior_ids().find(|&i| cloud.point(i).dist(p) < 1e-12).expect("probe on lattice");
            let exact = ((1.0 + p.norm_sq()).powi(2) - 1.0).max(-1.0);
            (scheme.f_interior(&phi, id) - exact).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn consistency_error_decreases_under_refinement() {
    let errs: Vec<f64> = (3..=5).map(|k| consistency_error(0.5f64.powi(k))).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    let rate = (errs[0] / errs[2]).log2() / 2.0;
    assert!(rate > 0.5, "rate {rate}");
}

#[test]
fn solve_is_deterministic() {
    let (cloud, table) = setup(0.125);
    let ex = gausscurve::analysis::example("ball").unwrap();
    let cfg = SolverConfig::for_spacing(0.125);
    let (u1, r1) = gausscurve::solve(&ex.problem(), &cloud, &table, &cfg).unwrap();
    let (u2, r2) = gausscurve::solve(&ex.problem(), &cloud, &table, &cfg).unwrap();
    assert_eq!(r1.iterations, r2.iterations);
    assert!(u1.iter().zip(u2.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
}
