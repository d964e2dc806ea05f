//! Product correspondences between odd-dimensional structures on `M` and
//! even-dimensional ones on `M x R` (or `M x S^1` via a periodic
//! coordinate): the symplectization 2-form `Omega = pr*omega + pr*eta ^ ds`,
//! its power identity `Omega^{n+1} = (n+1) pr*(eta ^ omega^n) ^ ds`, the
//! almost complex lift `J(X, f d/ds) = (phi X - f xi, eta(X) d/ds)` with the
//! product metric `h = g + ds^2`, and the exact restriction back to `M`
//! through `omega = l*Omega`, `eta = Omega(. , d/ds)` on the zero section.

use crate::chart::{ChartRef, same_chart};
use crate::error::GeomError;
use crate::expr::Expr;
use crate::exterior;
use crate::field::{EvalCtx, ScalarField};
use crate::gauge;
use crate::report::{agreement_report, nondegeneracy_report, CheckReport, Sweep};
use crate::structures::{AlmostContactData, TRANSVERSALITY_THRESHOLD};
use crate::tensor::{flat_index, multi_indices, Metric, TensorField};

/// Re-index a tensor field on `chart` to the extended chart, padding the
/// new trailing coordinate with zero components.
pub fn lift_to_product(t: &TensorField, ext: &ChartRef) -> TensorField {
    let n = t.dim();
    let m = ext.dim();
    debug_assert_eq!(m, n + 1);
    let (r, s) = t.valence();
    let rank = r + s;
    let mut comps = vec![ScalarField::zero(); m.pow(rank as u32)];
    for idx in multi_indices(n, rank) {
        comps[flat_index(m, &idx)] = t.comp(&idx).clone();
    }
    let mut out = TensorField::new(ext.clone(), r, s, comps).unwrap();
    if t.is_alternating() && r == 0 {
        out = out.assume_alternating();
    }
    out
}

/// Extend the chart by a fresh trailing coordinate.
pub fn extended_chart(
    chart: &ChartRef,
    periodic: bool,
) -> Result<(ChartRef, String), GeomError> {
    let range = if periodic {
        (0.0, std::f64::consts::TAU)
    } else {
        (-1.0, 1.0)
    };
    for cand in ["s", "s1", "s2", "s3"] {
        if chart.coord_index(cand).is_none() {
            return Ok((chart.extend(cand, range, periodic)?, cand.to_string()));
        }
    }
    Err(GeomError::InvalidChart(
        "no free name for the product coordinate".into(),
    ))
}

/// The symplectization 2-form on the extended chart:
/// `Omega_{ij} = omega_{ij}`, `Omega_{i s} = eta_i`, `Omega_{s i} = -eta_i`.
pub fn symplectization(
    eta: &TensorField,
    omega: &TensorField,
    ext: &ChartRef,
) -> Result<TensorField, GeomError> {
    same_chart(eta.chart(), omega.chart())?;
    let n = eta.dim();
    let m = ext.dim();
    let mut big = lift_to_product(omega, ext);
    for i in 0..n {
        *big.comp_mut(&[i, n]) = eta.comps()[i].clone();
        *big.comp_mut(&[n, i]) = ScalarField::neg(eta.comps()[i].clone());
    }
    let _ = m;
    Ok(big.assume_alternating())
}

/// Almost complex lift of almost contact data, blockwise:
/// `J^i_j = phi^i_j`, `J^i_s = -xi^i`, `J^s_j = eta_j`, `J^s_s = 0`.
pub fn almost_complex_lift(
    d: &AlmostContactData,
    ext: &ChartRef,
) -> Result<TensorField, GeomError> {
    let n = d.phi.dim();
    let mut j = lift_to_product(&d.phi, ext);
    for i in 0..n {
        *j.comp_mut(&[i, n]) = ScalarField::neg(d.xi.comps()[i].clone());
        *j.comp_mut(&[n, i]) = d.eta.comps()[i].clone();
    }
    Ok(j)
}

/// Product metric `h = g + ds^2`.
pub fn hermitian_lift(g: &Metric, ext: &ChartRef) -> Result<Metric, GeomError> {
    let n = g.dim();
    let m = ext.dim();
    let mut comps = vec![Expr::zero(); m * m];
    for i in 0..n {
        for j in 0..n {
            comps[i * m + j] = g.entry(i, j).clone();
        }
    }
    comps[n * m + n] = Expr::one();
    Metric::new(ext.clone(), comps)
}

pub struct ProductInput<'a> {
    pub eta: &'a TensorField,
    pub omega: &'a TensorField,
    pub contact: Option<&'a AlmostContactData>,
    pub metric: Option<&'a Metric>,
    /// Extend by a circle factor instead of a line.
    pub periodic: bool,
}

/// Run the product correspondence checks; sampling happens on the extended
/// chart with the same points-per-axis budget.
pub fn product_checks(
    input: &ProductInput<'_>,
    suite: &str,
    base_points: &[Vec<f64>],
    points_per_axis: usize,
    tol: f64,
) -> Result<Vec<CheckReport>, GeomError> {
    let chart = input.eta.chart().clone();
    let n = chart.dim();
    if n % 2 == 0 {
        return Err(GeomError::Precondition(format!(
            "odd-dimensional base chart (got dimension {n})"
        )));
    }
    let half = (n - 1) / 2;
    let (ext, _) = extended_chart(&chart, input.periodic)?;
    let ext_points = ext.grid(points_per_axis);
    let omega_big = symplectization(input.eta, input.omega, &ext)?;
    let mut out = Vec::new();

    // closedness of Omega
    let d_omega_big = exterior::exterior_derivative(&omega_big)?;
    out.push(gauge::sweep_tensor(
        &d_omega_big,
        &ext_points,
        suite,
        "product-closed",
        "d Omega = 0 on M x R",
        tol,
        Some(&omega_big),
    )?);

    // nondegeneracy of Omega
    let mut min_det = f64::INFINITY;
    let mut worst = Vec::new();
    for pt in &ext_points {
        let ctx = EvalCtx::new(&ext, pt);
        let m = omega_big.eval_matrix(&ctx)?;
        let det = m.determinant().abs();
        if det < min_det {
            min_det = det;
            worst = pt.clone();
        }
    }
    out.push(nondegeneracy_report(
        suite,
        "product-nondegenerate",
        "Omega^{n+1} != 0 (det Omega bounded away from 0)",
        min_det,
        TRANSVERSALITY_THRESHOLD,
        worst,
    ));

    // both directions of the correspondence observed on the same data
    let d_eta = exterior::exterior_derivative(input.eta)?.max_abs_on(base_points)?;
    let d_omega = exterior::exterior_derivative(input.omega)?.max_abs_on(base_points)?;
    let mut power = input.omega.clone();
    for _ in 1..half.max(1) {
        power = exterior::wedge(&power, input.omega)?;
    }
    let vol = exterior::wedge(&power, input.eta)?;
    let top: Vec<usize> = (0..n).collect();
    let mut min_vol = f64::INFINITY;
    for pt in base_points {
        let ctx = EvalCtx::new(&chart, pt);
        min_vol = min_vol.min(vol.comp(&top).eval(&ctx)?.abs());
    }
    let cosymplectic_m =
        d_eta <= tol && d_omega <= tol && min_vol >= TRANSVERSALITY_THRESHOLD;
    let symplectic_w =
        d_omega_big.max_abs_on(&ext_points)? <= tol && min_det >= TRANSVERSALITY_THRESHOLD;
    out.push(agreement_report(
        suite,
        "product-biconditional",
        "(M, eta, omega) cosymplectic <=> (M x R, Omega) symplectic",
        cosymplectic_m == symplectic_w,
        format!(
            "d eta {d_eta:.2e}, d omega {d_omega:.2e}, vol {min_vol:.2e} | d Omega {:.2e}, det {min_det:.2e}",
            0.0f64.max(d_eta.max(d_omega))
        ),
    ));

    // power identity Omega^{n+1} = (n+1) pr*(eta ^ omega^n) ^ ds
    let mut big_power = omega_big.clone();
    for _ in 1..(half + 1) {
        big_power = exterior::wedge(&big_power, &omega_big)?;
    }
    let base_vol = exterior::wedge(input.eta, &power)?; // eta ^ omega^n
    let lifted = lift_to_product(&base_vol, &ext);
    let mut ds_comps = vec![ScalarField::zero(); ext.dim()];
    ds_comps[n] = ScalarField::constant(1.0);
    let ds = TensorField::one_form(ext.clone(), ds_comps)?;
    let rhs = exterior::wedge(&lifted, &ds)?.scale((half + 1) as f64);
    let gap = big_power.sub(&rhs)?;
    out.push(gauge::sweep_tensor(
        &gap,
        &ext_points,
        suite,
        "product-power-identity",
        "Omega^{n+1} = (n+1) pr*(eta ^ omega^n) ^ ds",
        tol,
        Some(&big_power),
    )?);

    // restriction to the zero section recovers the inputs exactly
    let s0 = 0.0;
    let mut sw = Sweep::new();
    for pt in base_points {
        let mut ext_pt = pt.clone();
        ext_pt.push(s0);
        let ctx_m = EvalCtx::new(&chart, pt);
        let ctx_w = EvalCtx::new(&ext, &ext_pt);
        sw.bump_points();
        for i in 0..n {
            for j in 0..n {
                let a = omega_big.comp(&[i, j]).eval(&ctx_w)?;
                let b = input.omega.comp(&[i, j]).eval(&ctx_m)?;
                sw.record_scale(b);
                sw.record(pt, a - b, || format!("omega_{{{i}{j}}} restriction"));
            }
            let a = omega_big.comp(&[i, n]).eval(&ctx_w)?;
            let b = input.eta.comps()[i].eval(&ctx_m)?;
            sw.record_scale(b);
            sw.record(pt, a - b, || format!("eta_{i} restriction"));
        }
    }
    out.push(sw.finish(
        suite,
        "product-restriction",
        "l*Omega = omega and Omega(. , d/ds)|_l = eta, exactly",
        0.0,
    ));

    // lifts need the almost contact data
    if let Some(contact) = input.contact {
        let j = almost_complex_lift(contact, &ext)?;
        let m_dim = ext.dim();
        let mut sq_comps = vec![ScalarField::zero(); m_dim * m_dim];
        for a in 0..m_dim {
            for b in 0..m_dim {
                let mut acc = if a == b {
                    ScalarField::constant(1.0)
                } else {
                    ScalarField::zero()
                };
                for c in 0..m_dim {
                    acc = ScalarField::add(
                        acc,
                        ScalarField::mul(j.comp(&[a, c]).clone(), j.comp(&[c, b]).clone()),
                    );
                }
                sq_comps[a * m_dim + b] = acc;
            }
        }
        let j_square = TensorField::new(ext.clone(), 1, 1, sq_comps)?;
        out.push(gauge::sweep_tensor(
            &j_square,
            &ext_points,
            suite,
            "complex-lift",
            "J^2 = -Id on M x R",
            tol,
            None,
        )?);

        if let Some(g) = input.metric {
            // the lift is Hermitian only when g is adapted to the contact
            // data; gate on that hypothesis
            let mut adapted_defect: f64 = 0.0;
            for pt in base_points {
                let ctx = EvalCtx::new(&chart, pt);
                let phi = contact.phi.eval_matrix(&ctx)?;
                let eta_v = contact.eta.eval_vector(&ctx)?;
                let gm = g.matrix_at(&ctx)?;
                let gap = phi.transpose() * &gm * &phi - &gm + &eta_v * eta_v.transpose();
                adapted_defect =
                    gap.iter().fold(adapted_defect, |a, v| a.max(v.abs()));
            }
            if adapted_defect > tol {
                out.push(CheckReport::skip(
                    suite,
                    "hermitian-lift",
                    "h(J X, J Y) = h(X, Y) with h = g + ds^2",
                    format!("g is not adapted to the contact data (defect {adapted_defect:.3e})"),
                ));
            } else {
                let h = hermitian_lift(g, &ext)?;
                let mut sw = Sweep::new();
                for pt in &ext_points {
                    let ctx = EvalCtx::new(&ext, pt);
                    let jm = j.eval_matrix(&ctx)?;
                    let hm = h.matrix_at(&ctx)?;
                    let gap = jm.transpose() * &hm * &jm - &hm;
                    sw.bump_points();
                    sw.record_scale(hm.iter().cloned().fold(0.0, |a: f64, v| a.max(v.abs())));
                    for (idx, v) in gap.iter().enumerate() {
                        sw.record(pt, *v, || format!("entry {idx}"));
                    }
                }
                out.push(sw.finish(
                    suite,
                    "hermitian-lift",
                    "h(J X, J Y) = h(X, Y) with h = g + ds^2",
                    tol,
                ));
            }
        }
    }

    Ok(out)
}
