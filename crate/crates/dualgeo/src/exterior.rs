//! Exterior calculus on dense forms: wedge product, exterior derivative,
//! interior product, Lie derivative, Hodge star and pointwise rank.
//!
//! Conventions: components are values on coordinate fields, so
//! `(dq ^ dp)(d/dq, d/dp) = 1`; the volume form is
//! `orientation * sqrt(det g) dx^1 ^ ... ^ dx^n` and the star satisfies
//! `a ^ *b = <a,b>_g vol_g`.

use crate::chart::same_chart;
use crate::error::GeomError;
use crate::expr::{Expr, Func};
use crate::field::{EvalCtx, ScalarField};
use crate::linalg;
use crate::tensor::{multi_indices, permutation_sign, Metric, TensorField};

/// Antisymmetrized product with the shuffle convention above.
pub fn wedge(alpha: &TensorField, beta: &TensorField) -> Result<TensorField, GeomError> {
    same_chart(alpha.chart(), beta.chart())?;
    let (k, l) = (alpha.degree(), beta.degree());
    let n = alpha.dim();
    if k + l > n {
        return Err(GeomError::DegreeOverflow {
            degree: k + l,
            dim: n,
        });
    }
    let shuffles = shuffle_splits(k + l, k);
    Ok(TensorField::alternating_from_increasing(
        alpha.chart().clone(),
        0,
        k + l,
        |idx| {
            let mut acc = ScalarField::zero();
            for (positions, sign) in &shuffles {
                let a_idx: Vec<usize> = positions.0.iter().map(|&p| idx[p]).collect();
                let b_idx: Vec<usize> = positions.1.iter().map(|&p| idx[p]).collect();
                let term = ScalarField::mul(alpha.comp(&a_idx).clone(), beta.comp(&b_idx).clone());
                acc = ScalarField::add(acc, ScalarField::scale(*sign as f64, term));
            }
            acc
        },
    ))
}

type Split = ((Vec<usize>, Vec<usize>), i32);

/// All ways to pick `k` ordered positions out of `0..total`, with the sign
/// of the corresponding (k, total-k) shuffle.
fn shuffle_splits(total: usize, k: usize) -> Vec<Split> {
    let mut out = Vec::new();
    let mut pick = Vec::with_capacity(k);
    fn rec(start: usize, total: usize, k: usize, pick: &mut Vec<usize>, out: &mut Vec<Split>) {
        if pick.len() == k {
            let complement: Vec<usize> = (0..total).filter(|p| !pick.contains(p)).collect();
            let mut arrangement: Vec<usize> = pick.clone();
            arrangement.extend(&complement);
            let sign = permutation_sign(&arrangement);
            out.push(((pick.clone(), complement), sign));
            return;
        }
        for p in start..total {
            pick.push(p);
            rec(p + 1, total, k, pick, out);
            pick.pop();
        }
    }
    rec(0, total, k, &mut pick, &mut out);
    out
}

/// Coordinate exterior derivative
/// `(d a)_{i0..ik} = sum_j (-1)^j d_{i_j} a_{i0..^i_j..ik}`.
pub fn exterior_derivative(alpha: &TensorField) -> Result<TensorField, GeomError> {
    let k = alpha.degree();
    let n = alpha.dim();
    if k >= n {
        return Err(GeomError::DegreeOverflow {
            degree: k + 1,
            dim: n,
        });
    }
    let chart = alpha.chart().clone();
    Ok(TensorField::alternating_from_increasing(
        chart.clone(),
        0,
        k + 1,
        |idx| {
            let mut acc = ScalarField::zero();
            for j in 0..=k {
                let mut rest = idx.to_vec();
                let dir = rest.remove(j);
                let term = alpha.comp(&rest).diff(&chart, dir);
                let signed = if j % 2 == 0 {
                    term
                } else {
                    ScalarField::neg(term)
                };
                acc = ScalarField::add(acc, signed);
            }
            acc
        },
    ))
}

/// `(i_v a)(X_2,..) = a(v, X_2,..)`.
pub fn interior_product(v: &TensorField, alpha: &TensorField) -> Result<TensorField, GeomError> {
    same_chart(v.chart(), alpha.chart())?;
    let k = alpha.degree();
    if k == 0 {
        return Err(GeomError::DegreeOverflow { degree: 0, dim: alpha.dim() });
    }
    let n = alpha.dim();
    Ok(TensorField::alternating_from_increasing(
        alpha.chart().clone(),
        0,
        k - 1,
        |idx| {
            let mut acc = ScalarField::zero();
            for a in 0..n {
                let mut full = Vec::with_capacity(k);
                full.push(a);
                full.extend(idx);
                acc = ScalarField::add(
                    acc,
                    ScalarField::mul(v.comps()[a].clone(), alpha.comp(&full).clone()),
                );
            }
            acc
        },
    ))
}

/// Cartan/Leibniz coordinate formula for valences up to (0,2) and (1,1).
pub fn lie_derivative(v: &TensorField, t: &TensorField) -> Result<TensorField, GeomError> {
    same_chart(v.chart(), t.chart())?;
    let chart = t.chart().clone();
    let n = t.dim();
    let dv = |a: usize, i: usize| v.comps()[a].diff(&chart, i);
    match t.valence() {
        (0, 0) => {
            let mut acc = ScalarField::zero();
            for a in 0..n {
                acc = ScalarField::add(
                    acc,
                    ScalarField::mul(v.comps()[a].clone(), t.comps()[0].diff(&chart, a)),
                );
            }
            Ok(TensorField::scalar(chart, acc))
        }
        (1, 0) => {
            // [v, w]
            let mut comps = Vec::with_capacity(n);
            for i in 0..n {
                let mut acc = ScalarField::zero();
                for a in 0..n {
                    acc = ScalarField::add(
                        acc,
                        ScalarField::sub(
                            ScalarField::mul(v.comps()[a].clone(), t.comps()[i].diff(&chart, a)),
                            ScalarField::mul(t.comps()[a].clone(), dv(i, a)),
                        ),
                    );
                }
                comps.push(acc);
            }
            TensorField::vector(chart, comps)
        }
        (0, 1) => {
            let mut comps = Vec::with_capacity(n);
            for i in 0..n {
                let mut acc = ScalarField::zero();
                for a in 0..n {
                    acc = ScalarField::add(
                        acc,
                        ScalarField::add(
                            ScalarField::mul(v.comps()[a].clone(), t.comps()[i].diff(&chart, a)),
                            ScalarField::mul(t.comps()[a].clone(), dv(a, i)),
                        ),
                    );
                }
                comps.push(acc);
            }
            TensorField::one_form(chart, comps)
        }
        (0, 2) => {
            let mut comps = vec![ScalarField::zero(); n * n];
            for i in 0..n {
                for j in 0..n {
                    let mut acc = ScalarField::zero();
                    for a in 0..n {
                        acc = ScalarField::add(
                            acc,
                            ScalarField::mul(v.comps()[a].clone(), t.comp(&[i, j]).diff(&chart, a)),
                        );
                        acc = ScalarField::add(
                            acc,
                            ScalarField::mul(t.comp(&[a, j]).clone(), dv(a, i)),
                        );
                        acc = ScalarField::add(
                            acc,
                            ScalarField::mul(t.comp(&[i, a]).clone(), dv(a, j)),
                        );
                    }
                    comps[i * n + j] = acc;
                }
            }
            TensorField::new(chart, 0, 2, comps)
        }
        (1, 1) => {
            let mut comps = vec![ScalarField::zero(); n * n];
            for i in 0..n {
                for j in 0..n {
                    let mut acc = ScalarField::zero();
                    for a in 0..n {
                        acc = ScalarField::add(
                            acc,
                            ScalarField::mul(v.comps()[a].clone(), t.comp(&[i, j]).diff(&chart, a)),
                        );
                        acc = ScalarField::sub(
                            acc,
                            ScalarField::mul(t.comp(&[a, j]).clone(), dv(i, a)),
                        );
                        acc = ScalarField::add(
                            acc,
                            ScalarField::mul(t.comp(&[i, a]).clone(), dv(a, j)),
                        );
                    }
                    comps[i * n + j] = acc;
                }
            }
            TensorField::new(chart, 1, 1, comps)
        }
        (r, s) => Err(GeomError::UnsupportedValence { r, s }),
    }
}

/// Raise all indices of a k-form: `a^{i1..ik} = g^{i1 a1} .. g^{ik ak} a_{a1..ak}`.
fn raise_all(alpha: &TensorField, g: &Metric) -> Result<TensorField, GeomError> {
    let k = alpha.degree();
    let n = alpha.dim();
    let sources = multi_indices(n, k);
    Ok(TensorField::alternating_from_increasing(
        alpha.chart().clone(),
        k,
        0,
        |idx| {
            let mut acc = ScalarField::zero();
            for src in &sources {
                let mut factor = alpha.comp(src).clone();
                if factor.is_zero() {
                    continue;
                }
                for m in 0..k {
                    factor = ScalarField::mul(factor.clone(), g.inv_entry(idx[m], src[m]));
                }
                acc = ScalarField::add(acc, factor);
            }
            acc
        },
    ))
}

/// Hodge star: `(*a)_{j1..j_{n-k}} = s sqrt(det g) / k! a^{i1..ik} eps_{i..j..}`.
pub fn hodge_star(alpha: &TensorField, g: &Metric) -> Result<TensorField, GeomError> {
    same_chart(alpha.chart(), g.chart())?;
    let k = alpha.degree();
    let n = alpha.dim();
    let chart = alpha.chart().clone();
    let raised = raise_all(alpha, g)?;
    let sqrt_det = ScalarField::Closed(Expr::call(Func::Sqrt, g.det_expr().clone()));
    let orient = chart.orientation() as f64;
    let inv_kfact = 1.0 / (1..=k).product::<usize>().max(1) as f64;

    let out_rank = n - k;
    Ok(TensorField::alternating_from_increasing(
        chart.clone(),
        0,
        out_rank,
        |jdx| {
            // only permutations of the complement of the output index set
            // survive the Levi-Civita contraction
            let free: Vec<usize> = (0..n).filter(|i| !jdx.contains(i)).collect();
            if free.len() != k {
                return ScalarField::zero();
            }
            let mut acc = ScalarField::zero();
            for perm in permutations(&free) {
                let mut eps_arg = perm.clone();
                eps_arg.extend(jdx);
                let sign = permutation_sign(&eps_arg);
                if sign == 0 {
                    continue;
                }
                let term = ScalarField::scale(sign as f64, raised.comp(&perm).clone());
                acc = ScalarField::add(acc, term);
            }
            ScalarField::mul(
                ScalarField::scale(orient * inv_kfact, sqrt_det.clone()),
                acc,
            )
        },
    ))
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest: Vec<usize> = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, x);
            out.push(tail);
        }
    }
    out
}

/// Numerical rank of a valence-2 field at a point.
pub fn pointwise_rank(
    t: &TensorField,
    point: &[f64],
    rel_tol: f64,
) -> Result<usize, GeomError> {
    if t.rank() != 2 {
        let (r, s) = t.valence();
        return Err(GeomError::UnsupportedValence { r, s });
    }
    let ctx = EvalCtx::new(t.chart(), point);
    let m = t.eval_matrix(&ctx)?;
    Ok(linalg::numerical_rank(&m, rel_tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::expr::parse;

    fn tqp() -> (crate::chart::ChartRef, Metric) {
        let chart = Chart::euclidean(vec!["t", "q", "p"]);
        let g = Metric::identity(chart.clone());
        (chart, g)
    }

    fn basis_form(chart: &crate::chart::ChartRef, i: usize) -> TensorField {
        let n = chart.dim();
        let mut comps = vec![ScalarField::zero(); n];
        comps[i] = ScalarField::constant(1.0);
        TensorField::one_form(chart.clone(), comps).unwrap()
    }

    fn basis_vector(chart: &crate::chart::ChartRef, i: usize) -> TensorField {
        let n = chart.dim();
        let mut comps = vec![ScalarField::zero(); n];
        comps[i] = ScalarField::constant(1.0);
        TensorField::vector(chart.clone(), comps).unwrap()
    }

    #[test]
    fn wedge_convention() {
        let (chart, _) = tqp();
        let dq = basis_form(&chart, 1);
        let dp = basis_form(&chart, 2);
        let w = wedge(&dq, &dp).unwrap();
        let pt = [0.0, 0.0, 0.0];
        let ctx = EvalCtx::new(&chart, &pt);
        assert_eq!(w.comp(&[1, 2]).eval(&ctx).unwrap(), 1.0);
        assert_eq!(w.comp(&[2, 1]).eval(&ctx).unwrap(), -1.0);
        // dt ^ (dq ^ dp) has unit coefficient on (t,q,p)
        let vol = wedge(&basis_form(&chart, 0), &w).unwrap();
        assert_eq!(vol.comp(&[0, 1, 2]).eval(&ctx).unwrap(), 1.0);
    }

    #[test]
    fn exterior_derivative_basics() {
        let (chart, _) = tqp();
        let e = |s: &str| parse(s, chart.coords()).unwrap();
        // d(dt) = 0
        let ddt = exterior_derivative(&basis_form(&chart, 0)).unwrap();
        let pt = [0.3, -0.2, 0.7];
        let ctx = EvalCtx::new(&chart, &pt);
        assert!(ddt.eval_all(&ctx).unwrap().iter().all(|v| *v == 0.0));
        // d(q dp) = dq ^ dp
        let qdp = TensorField::one_form(
            chart.clone(),
            vec![ScalarField::zero(), ScalarField::zero(), ScalarField::from(e("q"))],
        )
        .unwrap();
        let d = exterior_derivative(&qdp).unwrap();
        assert_eq!(d.comp(&[1, 2]).eval(&ctx).unwrap(), 1.0);
        assert_eq!(d.comp(&[2, 1]).eval(&ctx).unwrap(), -1.0);
        assert_eq!(d.comp(&[0, 2]).eval(&ctx).unwrap(), 0.0);
    }

    #[test]
    fn interior_product_basics() {
        let (chart, _) = tqp();
        let dt = basis_form(&chart, 0);
        let dq = basis_form(&chart, 1);
        let dp = basis_form(&chart, 2);
        let et = basis_vector(&chart, 0);
        let pt = [0.0, 0.0, 0.0];
        let ctx = EvalCtx::new(&chart, &pt);

        let a = interior_product(&et, &wedge(&dt, &dq).unwrap()).unwrap();
        assert_eq!(a.eval_all(&ctx).unwrap(), vec![0.0, 1.0, 0.0]);
        let b = interior_product(&et, &wedge(&dq, &dp).unwrap()).unwrap();
        assert!(b.eval_all(&ctx).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn lie_derivative_of_warped_component() {
        let chart = Chart::euclidean(vec!["t", "q", "p"]);
        let e = |s: &str| parse(s, chart.coords()).unwrap();
        let mut comps = vec![ScalarField::zero(); 9];
        comps[8] = ScalarField::from(e("exp(2*t)"));
        let t = TensorField::new(chart.clone(), 0, 2, comps).unwrap();
        let et = basis_vector(&chart, 0);
        let lt = lie_derivative(&et, &t).unwrap();
        let pt = [0.0, 0.0, 0.0];
        let ctx = EvalCtx::new(&chart, &pt);
        assert!((lt.comp(&[2, 2]).eval(&ctx).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn hodge_star_in_flat_three_space() {
        let (chart, g) = tqp();
        let dq = basis_form(&chart, 1);
        let dp = basis_form(&chart, 2);
        let star = hodge_star(&wedge(&dq, &dp).unwrap(), &g).unwrap();
        let pt = [0.1, 0.2, 0.3];
        let ctx = EvalCtx::new(&chart, &pt);
        assert_eq!(star.eval_all(&ctx).unwrap(), vec![1.0, 0.0, 0.0]); // = dt

        let one = TensorField::scalar(chart.clone(), ScalarField::constant(1.0));
        let vol = hodge_star(&one, &g).unwrap();
        assert_eq!(vol.comp(&[0, 1, 2]).eval(&ctx).unwrap(), 1.0);
        assert_eq!(vol.comp(&[1, 0, 2]).eval(&ctx).unwrap(), -1.0);
    }

    #[test]
    fn rank_of_darboux_theta() {
        let (chart, _) = tqp();
        let mut comps = vec![ScalarField::zero(); 9];
        comps[2 * 3 + 1] = ScalarField::constant(1.0); // theta^p_q = 1
        comps[1 * 3 + 2] = ScalarField::constant(-1.0); // theta^q_p = -1
        let theta = TensorField::new(chart.clone(), 1, 1, comps).unwrap();
        assert_eq!(pointwise_rank(&theta, &[0.0, 0.0, 0.0], 1e-8).unwrap(), 2);
    }
}
