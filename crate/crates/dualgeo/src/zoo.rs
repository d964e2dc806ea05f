//! Built-in fully-specified example manifolds: flat Darboux models, the
//! Gaussian statistical manifold with its exponential/mixture connection
//! pair, a warped non-flat 3-manifold serving as a negative witness, the
//! flat torus `T^2 x S^1`, and the `R^4` symplectization of the Darboux
//! 3-model. Each entry carries a golden outcome matrix: the suites it must
//! pass and the suites it must fail at default tolerances.

use crate::chart::{Chart, ChartRef};
use crate::connection::Connection;
use crate::error::GeomError;
use crate::expr::{parse, Expr};
use crate::field::ScalarField;
use crate::manifold::{Expectation, Manifold};
use crate::products;
use crate::structures::AlmostContactData;
use crate::tensor::{Metric, TensorField};

pub const ZOO_NAMES: &[&str] = &[
    "darboux-3",
    "darboux-5",
    "gaussian",
    "warped",
    "torus",
    "symplectization-r4",
];

/// Look up a zoo entry by its CLI name.
pub fn by_name(name: &str) -> Result<Manifold, GeomError> {
    match name {
        "darboux-3" => darboux_model(1),
        "darboux-5" => darboux_model(2),
        "gaussian" => gaussian_family(),
        "warped" => warped_three_manifold(),
        "torus" => torus_product(),
        "symplectization-r4" => symplectization_r4(),
        other => Err(GeomError::Precondition(format!(
            "a known zoo entry (got `{other}`, expected one of {ZOO_NAMES:?})"
        ))),
    }
}

fn ex(chart: &ChartRef, s: &str) -> Expr {
    parse(s, chart.coords()).expect("zoo expression parses")
}

/// Standard Darboux tensors on a chart ordered `(t, q_1.., p_1..)`:
/// rotation `theta`, `eta = dt`, `xi = d/dt`, `omega = sum dq_a ^ dp_a`.
fn darboux_tensors(
    chart: &ChartRef,
    pairs: usize,
) -> (TensorField, TensorField, TensorField, TensorField) {
    let dim = chart.dim();
    let q = |a: usize| 1 + a;
    let p = |a: usize| 1 + pairs + a;

    let mut theta = vec![ScalarField::zero(); dim * dim];
    for a in 0..pairs {
        theta[p(a) * dim + q(a)] = ScalarField::constant(1.0); // theta^p_q = 1
        theta[q(a) * dim + p(a)] = ScalarField::constant(-1.0); // theta^q_p = -1
    }
    let theta = TensorField::new(chart.clone(), 1, 1, theta).unwrap();

    let mut eta = vec![ScalarField::zero(); dim];
    eta[0] = ScalarField::constant(1.0);
    let eta = TensorField::one_form(chart.clone(), eta).unwrap();

    let mut xi = vec![ScalarField::zero(); dim];
    xi[0] = ScalarField::constant(1.0);
    let xi = TensorField::vector(chart.clone(), xi).unwrap();

    let mut omega = vec![ScalarField::zero(); dim * dim];
    for a in 0..pairs {
        omega[q(a) * dim + p(a)] = ScalarField::constant(1.0);
        omega[p(a) * dim + q(a)] = ScalarField::constant(-1.0);
    }
    let omega = TensorField::form(chart.clone(), 2, omega).unwrap();

    (theta, eta, xi, omega)
}

/// Flat `R^{2n+1}` with the identity metric and the standard structure.
pub fn darboux_model(n: usize) -> Result<Manifold, GeomError> {
    if n == 0 {
        return Err(GeomError::Precondition("n >= 1".into()));
    }
    let mut coords: Vec<String> = vec!["t".into()];
    if n == 1 {
        coords.push("q".into());
        coords.push("p".into());
    } else {
        for a in 1..=n {
            coords.push(format!("q{a}"));
        }
        for a in 1..=n {
            coords.push(format!("p{a}"));
        }
    }
    let chart = Chart::euclidean(coords.iter().map(|s| s.as_str()).collect());
    let mut m = Manifold::new(format!("darboux-{}", 2 * n + 1), chart.clone());
    m.metric = Some(Metric::identity(chart.clone()));
    let (theta, eta, xi, omega) = darboux_tensors(&chart, n);
    m.tensors.insert("theta".into(), theta);
    m.tensors.insert("eta".into(), eta);
    m.tensors.insert("xi".into(), xi);
    m.tensors.insert("omega".into(), omega);
    for suite in [
        "expr-oracle",
        "duality",
        "gauge",
        "p-form",
        "spectral",
        "curvature",
        "contact",
        "cosymplectic",
        "coKahler",
        "products",
        "killing",
    ] {
        m.expect(suite, Expectation::Pass);
    }
    Ok(m)
}

/// The Gaussian statistical manifold in `(mu, sigma)` coordinates with the
/// Fisher metric `diag(1/sigma^2, 2/sigma^2)` and the exponential/mixture
/// connection pair; `theta` is a skew gauge solution of the pair and
/// `omega = p_theta` its 2-form.
pub fn gaussian_family() -> Result<Manifold, GeomError> {
    let chart = Chart::new(
        vec!["mu", "sigma"],
        vec![(-1.0, 1.0), (0.5, 2.0)],
        vec![false, false],
        1,
    )?;
    let mut m = Manifold::new("gaussian", chart.clone());
    m.metric = Some(Metric::new(
        chart.clone(),
        vec![
            ex(&chart, "1/sigma^2"),
            Expr::zero(),
            Expr::zero(),
            ex(&chart, "2/sigma^2"),
        ],
    )?);

    let z = ScalarField::zero;
    let f = |s: &str| ScalarField::from(ex(&chart, s));
    let n = 2;
    let at = |k: usize, i: usize, j: usize| (k * n + i) * n + j;

    // exponential connection
    let mut gamma_e = vec![z(); n * n * n];
    gamma_e[at(0, 0, 1)] = f("-2/sigma");
    gamma_e[at(0, 1, 0)] = f("-2/sigma");
    gamma_e[at(1, 1, 1)] = f("-3/sigma");
    let nabla_e = Connection::new(chart.clone(), gamma_e, true)?;

    // mixture connection
    let mut gamma_m = vec![z(); n * n * n];
    gamma_m[at(1, 0, 0)] = f("1/sigma");
    gamma_m[at(1, 1, 1)] = f("1/sigma");
    let nabla_m = Connection::new(chart.clone(), gamma_m, true)?;

    m.connections.insert("nabla".into(), nabla_e);
    m.connections.insert("nabla_star".into(), nabla_m);

    // skew gauge solution of the (e, m) pair
    let mut theta = vec![z(); n * n];
    theta[1] = f("-2/sigma^3"); // theta^mu_sigma
    theta[n] = f("1/sigma^3"); // theta^sigma_mu
    m.tensors
        .insert("theta".into(), TensorField::new(chart.clone(), 1, 1, theta)?);

    // omega = p_theta, kept as data so the even-dimensional suites see it
    let mut omega = vec![z(); n * n];
    omega[1] = f("2/sigma^5");
    omega[n] = f("-2/sigma^5");
    m.tensors
        .insert("omega".into(), TensorField::form(chart.clone(), 2, omega)?);

    for suite in ["expr-oracle", "duality", "gauge", "p-form", "spectral"] {
        m.expect(suite, Expectation::Pass);
    }
    // the Fisher Levi-Civita connection does not make p_theta parallel
    m.expect("pseudo-kahler", Expectation::Fail);
    Ok(m)
}

/// `g = dt^2 + dq^2 + e^{2t} dp^2` with the constant Darboux tensors: a
/// negative witness. The t-domain is placed so the worst Killing residual
/// sits at t = 0 with magnitude exactly 2.
pub fn warped_three_manifold() -> Result<Manifold, GeomError> {
    let chart = Chart::new(
        vec!["t", "q", "p"],
        vec![(-1.9, 0.1), (-1.0, 1.0), (-1.0, 1.0)],
        vec![false, false, false],
        1,
    )?;
    let mut m = Manifold::new("warped", chart.clone());
    let mut g = vec![Expr::zero(); 9];
    g[0] = ex(&chart, "1");
    g[4] = ex(&chart, "1");
    g[8] = ex(&chart, "exp(2*t)");
    m.metric = Some(Metric::new(chart.clone(), g)?);
    let (theta, eta, xi, omega) = darboux_tensors(&chart, 1);
    m.tensors.insert("theta".into(), theta);
    m.tensors.insert("eta".into(), eta);
    m.tensors.insert("xi".into(), xi);
    m.tensors.insert("omega".into(), omega);
    for suite in ["expr-oracle", "duality", "cosymplectic", "products"] {
        m.expect(suite, Expectation::Pass);
    }
    for suite in ["gauge", "killing", "contact", "coKahler"] {
        m.expect(suite, Expectation::Fail);
    }
    Ok(m)
}

/// Flat `T^2 x S^1`: all coordinates periodic, identity metric, constant
/// structure tensors; passes the full coKaehler and K-cosymplectic suites.
pub fn torus_product() -> Result<Manifold, GeomError> {
    let tau = std::f64::consts::TAU;
    let chart = Chart::new(
        vec!["x", "y", "z"],
        vec![(0.0, tau), (0.0, tau), (0.0, tau)],
        vec![true, true, true],
        1,
    )?;
    let mut m = Manifold::new("torus", chart.clone());
    m.metric = Some(Metric::identity(chart.clone()));
    let dim = 3;
    let mut theta = vec![ScalarField::zero(); 9];
    theta[dim] = ScalarField::constant(1.0); // theta^y_x
    theta[1] = ScalarField::constant(-1.0); // theta^x_y
    m.tensors
        .insert("theta".into(), TensorField::new(chart.clone(), 1, 1, theta)?);
    let mut eta = vec![ScalarField::zero(); 3];
    eta[2] = ScalarField::constant(1.0);
    m.tensors
        .insert("eta".into(), TensorField::one_form(chart.clone(), eta)?);
    let mut xi = vec![ScalarField::zero(); 3];
    xi[2] = ScalarField::constant(1.0);
    m.tensors
        .insert("xi".into(), TensorField::vector(chart.clone(), xi)?);
    let mut omega = vec![ScalarField::zero(); 9];
    omega[1] = ScalarField::constant(1.0); // omega_xy
    omega[dim] = ScalarField::constant(-1.0);
    m.tensors
        .insert("omega".into(), TensorField::form(chart.clone(), 2, omega)?);
    for suite in [
        "expr-oracle",
        "duality",
        "gauge",
        "p-form",
        "spectral",
        "curvature",
        "contact",
        "cosymplectic",
        "coKahler",
        "products",
        "killing",
    ] {
        m.expect(suite, Expectation::Pass);
    }
    Ok(m)
}

/// The symplectization of the Darboux 3-model: flat `R^4` with
/// `Omega = dq ^ dp + dt ^ ds`, the product metric, and the complex
/// structure lift as `theta`.
pub fn symplectization_r4() -> Result<Manifold, GeomError> {
    let base = darboux_model(1)?;
    let base_metric = base.metric.as_ref().unwrap();
    let (ext, _) = products::extended_chart(&base.chart, false)?;
    let eta = base.eta().unwrap();
    let omega = base.omega().unwrap();

    let mut m = Manifold::new("symplectization-r4", ext.clone());
    m.metric = Some(products::hermitian_lift(base_metric, &ext)?);
    let big_omega = products::symplectization(eta, omega, &ext)?;
    let contact = AlmostContactData {
        phi: base.theta().unwrap().clone(),
        xi: base.xi().unwrap().clone(),
        eta: eta.clone(),
        metric: Some(base_metric.clone()),
    };
    let j = products::almost_complex_lift(&contact, &ext)?;
    m.tensors.insert("omega".into(), big_omega);
    m.tensors.insert("theta".into(), j);
    for suite in [
        "expr-oracle",
        "duality",
        "gauge",
        "p-form",
        "spectral",
        "curvature",
        "pseudo-kahler",
    ] {
        m.expect(suite, Expectation::Pass);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::{duality_residual, Connection};
    use crate::field::EvalCtx;

    #[test]
    fn all_entries_construct() {
        for name in ZOO_NAMES {
            let m = by_name(name).unwrap();
            assert_eq!(&m.name, name);
            assert!(m.metric.is_some());
        }
    }

    #[test]
    fn darboux_dimensions_and_rank() {
        assert_eq!(darboux_model(1).unwrap().dim(), 3);
        let m5 = darboux_model(2).unwrap();
        assert_eq!(m5.dim(), 5);
        let theta = m5.theta().unwrap();
        let rank = crate::exterior::pointwise_rank(theta, &[0.0; 5], 1e-8).unwrap();
        assert_eq!(rank, 4);
    }

    #[test]
    fn gaussian_dual_pair_is_certified() {
        let m = gaussian_family().unwrap();
        let g = m.metric.as_ref().unwrap();
        let e = m.nabla().unwrap();
        let mm = m.nabla_star().unwrap();
        let pts = m.chart.seeded_points(30, 17);
        // declared mixture connection equals the computed dual of e
        let computed = e.dual(g).unwrap();
        assert!(computed.max_gamma_difference(mm, &pts).unwrap() < 1e-10);
        assert!(duality_residual(e, mm, g, &pts).unwrap() < 1e-10);
        // e + m = 2 lc
        let lc = Connection::levi_civita(g).unwrap();
        for pt in &pts {
            let ctx = EvalCtx::new(&m.chart, pt);
            for k in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        let sum = e.gamma(k, i, j).eval(&ctx).unwrap()
                            + mm.gamma(k, i, j).eval(&ctx).unwrap();
                        let twice = 2.0 * lc.gamma(k, i, j).eval(&ctx).unwrap();
                        assert!((sum - twice).abs() < 1e-10);
                    }
                }
            }
        }
    }

    /// Independent oracle for the Gaussian connection pair: scores by
    /// finite differences of the log-density, moments by Simpson
    /// quadrature, alpha-connections assembled as `Gamma_lc -/+ T/2`,
    /// indices raised with the quadrature Fisher matrix. Guards the
    /// hand-entered Christoffel expressions against transcription errors.
    #[test]
    fn gaussian_connections_match_quadrature_oracle() {
        let m = gaussian_family().unwrap();
        let e_conn = m.nabla().unwrap();
        let m_conn = m.nabla_star().unwrap();

        let log_p = |x: f64, mu: f64, sigma: f64| {
            -(x - mu) * (x - mu) / (2.0 * sigma * sigma)
                - sigma.ln()
                - 0.5 * (2.0 * std::f64::consts::PI).ln()
        };
        let h = 1e-4;
        let score = move |x: f64, mu: f64, sigma: f64, i: usize| {
            if i == 0 {
                (log_p(x, mu + h, sigma) - log_p(x, mu - h, sigma)) / (2.0 * h)
            } else {
                (log_p(x, mu, sigma + h) - log_p(x, mu, sigma - h)) / (2.0 * h)
            }
        };
        let expect = move |mu: f64, sigma: f64, f: &dyn Fn(f64) -> f64| {
            let (a, b) = (mu - 10.0 * sigma, mu + 10.0 * sigma);
            let n = 4000; // even: Simpson weights 1,4,2,...,4,1
            let dx = (b - a) / n as f64;
            let mut acc = 0.0;
            for k in 0..=n {
                let x = a + k as f64 * dx;
                let w = if k == 0 || k == n {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                acc += w * log_p(x, mu, sigma).exp() * f(x);
            }
            acc * dx / 3.0
        };
        let fisher = move |mu: f64, sigma: f64| {
            let mut g = [[0.0f64; 2]; 2];
            for (i, row) in g.iter_mut().enumerate() {
                for (j, cell) in row.iter_mut().enumerate() {
                    *cell = expect(mu, sigma, &|x| {
                        score(x, mu, sigma, i) * score(x, mu, sigma, j)
                    });
                }
            }
            g
        };

        for &(mu, sigma) in &[(0.0, 1.0), (0.3, 0.8), (-0.5, 1.6)] {
            let g = fisher(mu, sigma);
            let mut skew = [[[0.0f64; 2]; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        skew[i][j][k] = expect(mu, sigma, &|x| {
                            score(x, mu, sigma, i)
                                * score(x, mu, sigma, j)
                                * score(x, mu, sigma, k)
                        });
                    }
                }
            }
            let dg = |i: usize, j: usize, k: usize| {
                // d_k g_{ij} by finite differences of the quadrature metric
                let (ma, sa, mb, sb) = if k == 0 {
                    (mu + h, sigma, mu - h, sigma)
                } else {
                    (mu, sigma + h, mu, sigma - h)
                };
                (fisher(ma, sa)[i][j] - fisher(mb, sb)[i][j]) / (2.0 * h)
            };
            let lc_low =
                |i: usize, j: usize, k: usize| 0.5 * (dg(j, k, i) + dg(i, k, j) - dg(i, j, k));
            let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            let ginv = [
                [g[1][1] / det, -g[0][1] / det],
                [-g[1][0] / det, g[0][0] / det],
            ];

            let pt = [mu, sigma];
            let ctx = EvalCtx::new(&m.chart, &pt);
            for c in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        let mut e_up = 0.0;
                        let mut m_up = 0.0;
                        for l in 0..2 {
                            e_up += ginv[c][l] * (lc_low(i, j, l) - 0.5 * skew[i][j][l]);
                            m_up += ginv[c][l] * (lc_low(i, j, l) + 0.5 * skew[i][j][l]);
                        }
                        let e_have = e_conn.gamma(c, i, j).eval(&ctx).unwrap();
                        let m_have = m_conn.gamma(c, i, j).eval(&ctx).unwrap();
                        assert!(
                            (e_up - e_have).abs() < 1e-4,
                            "e-connection Gamma^{c}_{i}{j}: oracle {e_up} vs {e_have}"
                        );
                        assert!(
                            (m_up - m_have).abs() < 1e-4,
                            "m-connection Gamma^{c}_{i}{j}: oracle {m_up} vs {m_have}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn gaussian_theta_solves_gauge_equation() {
        let m = gaussian_family().unwrap();
        let g = m.metric.clone().unwrap();
        let problem = crate::gauge::GaugeProblem::new(
            g,
            m.nabla().unwrap().clone(),
            Some(m.nabla_star().unwrap().clone()),
            m.theta().unwrap().clone(),
        )
        .unwrap();
        let pts = m.chart.grid(4);
        assert!(problem.max_residual_on(&pts).unwrap() < 1e-12);
    }

    #[test]
    fn warped_killing_magnitude_at_origin() {
        let m = warped_three_manifold().unwrap();
        let g = m.metric.as_ref().unwrap();
        let xi = m.xi().unwrap();
        let lie = crate::exterior::lie_derivative(xi, g.as_tensor()).unwrap();
        let pt = [0.0, 0.0, 0.0];
        let ctx = EvalCtx::new(&m.chart, &pt);
        let vals = lie.eval_all(&ctx).unwrap();
        let max = vals.iter().cloned().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!((max - 2.0).abs() < 1e-12);
        // grid includes t = 0 exactly
        assert!(m.chart.grid(4).iter().any(|p| p[0] == 0.0));
    }

    #[test]
    fn r4_power_identity_coefficient() {
        let m = symplectization_r4().unwrap();
        let omega = m.omega().unwrap();
        let sq = crate::exterior::wedge(omega, omega).unwrap();
        // Omega^2 = 2 dq ^ dp ^ dt ^ ds = 2 dt ^ dq ^ dp ^ ds
        let pt = [0.0; 4];
        let ctx = EvalCtx::new(&m.chart, &pt);
        let coeff = sq.comp(&[0, 1, 2, 3]).eval(&ctx).unwrap();
        assert!((coeff - 2.0).abs() < 1e-12);
        let d = crate::exterior::exterior_derivative(omega).unwrap();
        assert!(d.max_abs_on(&m.chart.grid(3)).unwrap() < 1e-14);
    }
}
