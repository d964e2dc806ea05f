//! Structure checks on data beyond the zoo: the round 3-sphere in Hopf
//! coordinates with its quaternionic-frame almost contact structure, a
//! broken-metric witness, the codifferential against the Hodge route, and
//! the (1,1) Lie derivative.

use dualgeo::chart::Chart;
use dualgeo::connection::Connection;
use dualgeo::expr::parse;
use dualgeo::exterior::{exterior_derivative, hodge_star, lie_derivative};
use dualgeo::field::{EvalCtx, ScalarField};
use dualgeo::structures::{verify_adapted_metric, verify_almost_contact, AlmostContactData};
use dualgeo::tensor::{Metric, TensorField};

/// Round `S^3` in Hopf coordinates `(a, b, g)`:
/// `ds^2 = da^2 + cos^2(a) db^2 + sin^2(a) dg^2`, Reeb field `d/db + d/dg`,
/// and the endomorphism built from the orthonormal quaternionic frame.
#[test]
fn hopf_sphere_standard_structure_passes() {
    let chart = Chart::new(
        vec!["a", "b", "g"],
        vec![(0.2, 1.2), (0.0, std::f64::consts::TAU), (0.0, std::f64::consts::TAU)],
        vec![false, true, true],
        1,
    )
    .unwrap();
    let e = |s: &str| parse(s, chart.coords()).unwrap();
    let f = |s: &str| ScalarField::from(e(s));

    let metric = Metric::new(
        chart.clone(),
        vec![
            e("1"),
            e("0"),
            e("0"),
            e("0"),
            e("cos(a)^2"),
            e("0"),
            e("0"),
            e("0"),
            e("sin(a)^2"),
        ],
    )
    .unwrap();

    let xi = TensorField::vector(
        chart.clone(),
        vec![f("0"), f("1"), f("1")],
    )
    .unwrap();
    let eta = TensorField::one_form(
        chart.clone(),
        vec![f("0"), f("cos(a)^2"), f("sin(a)^2")],
    )
    .unwrap();

    // the two unit frame fields orthogonal to the Reeb direction
    let jx = TensorField::vector(
        chart.clone(),
        vec![
            f("cos(b+g)"),
            f("sin(b+g)*sin(a)/cos(a)"),
            f("-sin(b+g)*cos(a)/sin(a)"),
        ],
    )
    .unwrap();
    let kx = TensorField::vector(
        chart.clone(),
        vec![
            f("sin(b+g)"),
            f("-cos(b+g)*sin(a)/cos(a)"),
            f("cos(b+g)*cos(a)/sin(a)"),
        ],
    )
    .unwrap();

    // phi = kx (x) flat(jx) - jx (x) flat(kx): rotates the frame plane,
    // kills the Reeb field
    let jx_flat = metric.flat(&jx).unwrap();
    let kx_flat = metric.flat(&kx).unwrap();
    let n = 3;
    let mut comps = vec![ScalarField::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            comps[i * n + j] = ScalarField::sub(
                ScalarField::mul(kx.comps()[i].clone(), jx_flat.comps()[j].clone()),
                ScalarField::mul(jx.comps()[i].clone(), kx_flat.comps()[j].clone()),
            );
        }
    }
    let phi = TensorField::new(chart.clone(), 1, 1, comps).unwrap();

    let d = AlmostContactData {
        phi,
        xi,
        eta,
        metric: Some(metric),
    };
    let points = chart.grid(4);
    let reports = verify_almost_contact(&d, "contact", &points, 1e-8).unwrap();
    for r in &reports {
        assert!(r.passed(), "{}", r.text_line());
    }
    let (reports, _omega) = verify_adapted_metric(&d, "contact", &points, 1e-8).unwrap();
    for r in &reports {
        assert!(r.passed(), "{}", r.text_line());
    }
}

/// Scaling only part of the horizontal metric breaks the compatibility
/// identity by an order-one residual.
#[test]
fn unevenly_scaled_metric_fails_compatibility() {
    let chart = Chart::euclidean(vec!["t", "q", "p"]);
    let e = |s: &str| parse(s, chart.coords()).unwrap();
    let metric = Metric::new(
        chart.clone(),
        vec![
            e("1"),
            e("0"),
            e("0"),
            e("0"),
            e("2"),
            e("0"),
            e("0"),
            e("0"),
            e("1"),
        ],
    )
    .unwrap();
    let mut pc = vec![ScalarField::zero(); 9];
    pc[2 * 3 + 1] = ScalarField::constant(1.0);
    pc[1 * 3 + 2] = ScalarField::constant(-1.0);
    let phi = TensorField::new(chart.clone(), 1, 1, pc).unwrap();
    let xi = TensorField::vector(
        chart.clone(),
        vec![ScalarField::constant(1.0), ScalarField::zero(), ScalarField::zero()],
    )
    .unwrap();
    let eta = TensorField::one_form(
        chart.clone(),
        vec![ScalarField::constant(1.0), ScalarField::zero(), ScalarField::zero()],
    )
    .unwrap();
    let d = AlmostContactData {
        phi,
        xi,
        eta,
        metric: Some(metric),
    };
    let points = chart.grid(3);
    let (reports, _) = verify_adapted_metric(&d, "contact", &points, 1e-8).unwrap();
    let compat = reports.iter().find(|r| r.check == "adapted-compat").unwrap();
    assert!(!compat.passed());
    assert!(compat.max_residual >= 1.0 - 1e-12);
}

/// On flat `R^3` the connection codifferential on one-forms agrees with
/// `-*d*`.
#[test]
fn codifferential_matches_hodge_route_on_flat_space() {
    let chart = Chart::euclidean(vec!["t", "q", "p"]);
    let g = Metric::identity(chart.clone());
    let lc = Connection::levi_civita(&g).unwrap();
    let e = |s: &str| parse(s, chart.coords()).unwrap();
    let samples = [
        vec!["q", "t*p", "sin(q)"],
        vec!["t^2", "q*p + 1", "exp(t/2)"],
    ];
    let points = chart.grid(4);
    for comps in samples {
        let alpha = TensorField::one_form(
            chart.clone(),
            comps.iter().map(|s| ScalarField::from(e(s))).collect(),
        )
        .unwrap();
        let via_connection = lc.codifferential(&alpha, &g).unwrap();
        let via_star = hodge_star(
            &exterior_derivative(&hodge_star(&alpha, &g).unwrap()).unwrap(),
            &g,
        )
        .unwrap()
        .scale(-1.0);
        for pt in &points {
            let ctx = EvalCtx::new(&chart, pt);
            let a = via_connection.comps()[0].eval(&ctx).unwrap();
            let b = via_star.comps()[0].eval(&ctx).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
}

/// Lie derivative of a (1,1)-field: for `theta = f * Id`,
/// `L_v theta = v(f) * Id`.
#[test]
fn lie_derivative_of_endomorphism_field() {
    let chart = Chart::euclidean(vec!["x", "y"]);
    let e = |s: &str| parse(s, chart.coords()).unwrap();
    let mut comps = vec![ScalarField::zero(); 4];
    comps[0] = ScalarField::from(e("x^2*y"));
    comps[3] = ScalarField::from(e("x^2*y"));
    let theta = TensorField::new(chart.clone(), 1, 1, comps).unwrap();
    let v = TensorField::vector(
        chart.clone(),
        vec![ScalarField::from(e("y")), ScalarField::from(e("x"))],
    )
    .unwrap();
    let lie = lie_derivative(&v, &theta).unwrap();
    for pt in chart.grid(4) {
        let ctx = EvalCtx::new(&chart, &pt);
        let (x, y) = (pt[0], pt[1]);
        let vf = y * 2.0 * x * y + x * x * x; // v(f)
        let m = lie.eval_matrix(&ctx).unwrap();
        assert!((m[(0, 0)] - vf).abs() < 1e-12);
        assert!((m[(1, 1)] - vf).abs() < 1e-12);
        assert!(m[(0, 1)].abs() < 1e-12 && m[(1, 0)].abs() < 1e-12);
    }
}

/// A position-dependent conformal factor breaks Levi-Civita parallelism of
/// the symplectic form on flat `R^2`.
#[test]
fn flat_plane_with_growing_form_is_not_pseudo_kahler() {
    let chart = Chart::euclidean(vec!["x", "y"]);
    let e = |s: &str| parse(s, chart.coords()).unwrap();
    let g = Metric::identity(chart.clone());
    let mut comps = vec![ScalarField::zero(); 4];
    comps[1] = ScalarField::from(e("1 + x^2"));
    comps[2] = ScalarField::from(e("-(1 + x^2)"));
    let omega = TensorField::form(chart.clone(), 2, comps).unwrap();
    let points = chart.grid(4);
    let reports =
        dualgeo::structures::pseudo_kahler_checks(&g, &omega, "pseudo-kahler", &points, 1e-8)
            .unwrap();
    let parallel = reports.iter().find(|r| r.check == "pk-parallel-form").unwrap();
    assert!(!parallel.passed());
    assert!(parallel.max_residual > 1e-1);
    // both formulations of the check fail together
    let equiv = reports.iter().find(|r| r.check == "pk-theta-equivalence").unwrap();
    assert!(equiv.passed());

    // the constant form on the same chart is pseudo-Kaehler
    let mut comps = vec![ScalarField::zero(); 4];
    comps[1] = ScalarField::constant(1.0);
    comps[2] = ScalarField::constant(-1.0);
    let flat = TensorField::form(chart.clone(), 2, comps).unwrap();
    let reports =
        dualgeo::structures::pseudo_kahler_checks(&g, &flat, "pseudo-kahler", &points, 1e-8)
            .unwrap();
    assert!(reports.iter().all(|r| r.passed()));
}

/// Field types are shared freely across threads; evaluation is pure.
#[test]
fn evaluation_is_thread_safe() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<dualgeo::expr::Expr>();
    assert_send_sync::<ScalarField>();
    assert_send_sync::<TensorField>();
    assert_send_sync::<Metric>();
    assert_send_sync::<dualgeo::connection::Connection>();
    assert_send_sync::<dualgeo::manifold::Manifold>();

    let m = std::sync::Arc::new(dualgeo::zoo::by_name("warped").unwrap());
    let lc = Connection::levi_civita(m.metric.as_ref().unwrap()).unwrap();
    let r = std::sync::Arc::new(lc.curvature().clone());
    let mut handles = Vec::new();
    for worker in 0..4 {
        let m = m.clone();
        let r = r.clone();
        handles.push(std::thread::spawn(move || {
            let pts = m.chart.seeded_points(25, worker);
            let mut acc = 0.0;
            for pt in &pts {
                let ctx = EvalCtx::new(&m.chart, pt);
                for v in r.eval_all(&ctx).unwrap() {
                    acc += v.abs();
                }
            }
            acc
        }));
    }
    let totals: Vec<f64> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert!(totals.iter().all(|v| v.is_finite()));
}
