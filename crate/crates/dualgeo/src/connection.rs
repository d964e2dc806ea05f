//! Affine connections: Levi-Civita from a metric, the metric dual of a
//! connection, difference tensors, torsion, curvature, Ricci, covariant
//! derivatives and the connection codifferential.
//!
//! Index convention, used everywhere: `nabla_{d_i} d_j = Gamma^k_{ij} d_k`
//! (lower-left index is the direction). The Ricci contraction is
//! `Ric_{kj} = R^l_{klj}`; conventions differ across texts, so both are
//! pinned here once.

use std::sync::{Arc, OnceLock};

use crate::chart::{same_chart, ChartRef};
use crate::error::GeomError;
use crate::expr::Expr;
use crate::field::{EvalCtx, ScalarField};
use crate::tensor::{flat_index, multi_indices, Metric, TensorField};

pub const CONNECTION_CERT_POINTS: usize = 20;
pub const CONNECTION_CERT_SEED: u64 = 0x7047_51A1;
pub const TORSION_CERT_TOL: f64 = 1e-12;
pub const DUALITY_CERT_TOL: f64 = 1e-9;

#[derive(Debug)]
pub struct Connection {
    chart: ChartRef,
    /// n^3 Christoffel fields, layout `[k][i][j]` for `Gamma^k_{ij}`.
    gamma: Vec<ScalarField>,
    torsion_free: bool,
    curvature: OnceLock<TensorField>,
    ricci: OnceLock<TensorField>,
}

pub type ConnectionRef = Arc<Connection>;

impl Connection {
    /// Build from Christoffel fields; when `claim_torsion_free` is set the
    /// claim is certified at seeded points.
    pub fn new(
        chart: ChartRef,
        gamma: Vec<ScalarField>,
        claim_torsion_free: bool,
    ) -> Result<ConnectionRef, GeomError> {
        let n = chart.dim();
        if gamma.len() != n * n * n {
            return Err(GeomError::BadShape {
                expected: n * n * n,
                got: gamma.len(),
            });
        }
        let conn = Connection {
            chart,
            gamma,
            torsion_free: claim_torsion_free,
            curvature: OnceLock::new(),
            ricci: OnceLock::new(),
        };
        if claim_torsion_free {
            conn.certify_torsion_free()?;
        }
        Ok(Arc::new(conn))
    }

    /// All-zero Christoffels (flat coordinate connection).
    pub fn flat(chart: ChartRef) -> ConnectionRef {
        let n = chart.dim();
        Connection::new(chart, vec![ScalarField::zero(); n * n * n], true).unwrap()
    }

    fn certify_torsion_free(&self) -> Result<(), GeomError> {
        let n = self.chart.dim();
        for pt in self
            .chart
            .seeded_points(CONNECTION_CERT_POINTS, CONNECTION_CERT_SEED)
        {
            let ctx = EvalCtx::new(&self.chart, &pt);
            for k in 0..n {
                for i in 0..n {
                    for j in (i + 1)..n {
                        let a = self.gamma(k, i, j).eval(&ctx)?;
                        let b = self.gamma(k, j, i).eval(&ctx)?;
                        if (a - b).abs() > TORSION_CERT_TOL {
                            return Err(GeomError::SymmetryViolation {
                                tag: "torsion-free",
                                residual: (a - b).abs(),
                                point: pt,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn is_torsion_free(&self) -> bool {
        self.torsion_free
    }

    pub fn gamma(&self, k: usize, i: usize, j: usize) -> &ScalarField {
        let n = self.chart.dim();
        &self.gamma[(k * n + i) * n + j]
    }

    /// Levi-Civita connection of `g`: symbolic derivatives of the metric,
    /// inverse metric served pointwise.
    pub fn levi_civita(g: &Metric) -> Result<ConnectionRef, GeomError> {
        let chart = g.chart().clone();
        let n = chart.dim();
        let coord = |i: usize| chart.coord_name(i);
        // K_{lij} = (d_i g_{jl} + d_j g_{il} - d_l g_{ij}) / 2, closed form
        let mut k_lower = vec![Expr::zero(); n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let term = Expr::mul(
                        Expr::num(0.5),
                        Expr::sub(
                            Expr::add(
                                g.entry(j, l).diff(coord(i)),
                                g.entry(i, l).diff(coord(j)),
                            ),
                            g.entry(i, j).diff(coord(l)),
                        ),
                    );
                    k_lower[(l * n + i) * n + j] = term;
                }
            }
        }
        let mut gamma = vec![ScalarField::zero(); n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = ScalarField::zero();
                    for l in 0..n {
                        acc = ScalarField::add(
                            acc,
                            ScalarField::mul(
                                g.inv_entry(k, l),
                                ScalarField::from(k_lower[(l * n + i) * n + j].clone()),
                            ),
                        );
                    }
                    gamma[(k * n + i) * n + j] = acc;
                }
            }
        }
        Connection::new(chart, gamma, true)
    }

    /// Metric dual: `Gamma*^c_{jk} = g^{ci} (d_j g_{ik} - Gamma^m_{ji} g_{mk})`,
    /// so that `Z<X,Y> = <nabla_Z X, Y> + <X, nabla*_Z Y>` on coordinate fields.
    pub fn dual(&self, g: &Metric) -> Result<ConnectionRef, GeomError> {
        same_chart(&self.chart, g.chart())?;
        let chart = self.chart.clone();
        let n = chart.dim();
        let mut gamma = vec![ScalarField::zero(); n * n * n];
        for c in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = ScalarField::zero();
                    for i in 0..n {
                        let mut inner = ScalarField::from(
                            g.entry(i, k).diff(chart.coord_name(j)),
                        );
                        for m in 0..n {
                            inner = ScalarField::sub(
                                inner,
                                ScalarField::mul(
                                    self.gamma(m, j, i).clone(),
                                    g.entry_field(m, k),
                                ),
                            );
                        }
                        acc = ScalarField::add(acc, ScalarField::mul(g.inv_entry(c, i), inner));
                    }
                    gamma[(c * n + j) * n + k] = acc;
                }
            }
        }
        // duality preserves vanishing torsion; certify rather than assume
        let claim = self.torsion_free;
        Connection::new(chart, gamma, claim)
    }

    /// Difference tensor `D(X,Y) = nabla*_X Y - nabla_X Y` as a (1,2) field,
    /// layout `[k][i][j] = D^k_{ij}`.
    pub fn difference_tensor(&self, dual: &Connection) -> Result<TensorField, GeomError> {
        same_chart(&self.chart, &dual.chart)?;
        let n = self.dim();
        let mut comps = vec![ScalarField::zero(); n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    comps[(k * n + i) * n + j] = ScalarField::sub(
                        dual.gamma(k, i, j).clone(),
                        self.gamma(k, i, j).clone(),
                    );
                }
            }
        }
        TensorField::new(self.chart.clone(), 1, 2, comps)
    }

    /// Torsion `T^k_{ij} = Gamma^k_{ij} - Gamma^k_{ji}` as a (1,2) field.
    pub fn torsion(&self) -> TensorField {
        let n = self.dim();
        let mut comps = vec![ScalarField::zero(); n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    comps[(k * n + i) * n + j] = ScalarField::sub(
                        self.gamma(k, i, j).clone(),
                        self.gamma(k, j, i).clone(),
                    );
                }
            }
        }
        TensorField::new(self.chart.clone(), 1, 2, comps).unwrap()
    }

    /// Curvature `R(d_i, d_j) d_k = R^l_{kij} d_l`, layout `[l][k][i][j]`:
    /// `R^l_{kij} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
    ///  + Gamma^l_{im} Gamma^m_{jk} - Gamma^l_{jm} Gamma^m_{ik}`.
    pub fn curvature(&self) -> &TensorField {
        self.curvature.get_or_init(|| {
            let n = self.dim();
            let chart = &self.chart;
            let mut comps = vec![ScalarField::zero(); n * n * n * n];
            for l in 0..n {
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            let mut acc = ScalarField::sub(
                                self.gamma(l, j, k).diff(chart, i),
                                self.gamma(l, i, k).diff(chart, j),
                            );
                            for m in 0..n {
                                acc = ScalarField::add(
                                    acc,
                                    ScalarField::sub(
                                        ScalarField::mul(
                                            self.gamma(l, i, m).clone(),
                                            self.gamma(m, j, k).clone(),
                                        ),
                                        ScalarField::mul(
                                            self.gamma(l, j, m).clone(),
                                            self.gamma(m, i, k).clone(),
                                        ),
                                    ),
                                );
                            }
                            comps[((l * n + k) * n + i) * n + j] = acc;
                        }
                    }
                }
            }
            TensorField::new(self.chart.clone(), 1, 3, comps).unwrap()
        })
    }

    /// Ricci tensor `Ric_{kj} = R^l_{klj}`.
    pub fn ricci(&self) -> &TensorField {
        self.ricci.get_or_init(|| {
            let n = self.dim();
            let r = self.curvature();
            let mut comps = vec![ScalarField::zero(); n * n];
            for k in 0..n {
                for j in 0..n {
                    let mut acc = ScalarField::zero();
                    for l in 0..n {
                        acc = ScalarField::add(acc, r.comp(&[l, k, l, j]).clone());
                    }
                    comps[k * n + j] = acc;
                }
            }
            TensorField::new(self.chart.clone(), 0, 2, comps).unwrap()
        })
    }

    /// Covariant derivative of a field of valence up to three. The
    /// direction index becomes the first covariant slot of the result.
    pub fn covariant_derivative(&self, t: &TensorField) -> Result<TensorField, GeomError> {
        same_chart(&self.chart, t.chart())?;
        let (r, s) = t.valence();
        if r + s > 3 {
            return Err(GeomError::UnsupportedValence { r, s });
        }
        let n = self.dim();
        let chart = &self.chart;
        let out_rank = r + s + 1;
        let mut comps = vec![ScalarField::zero(); n.pow(out_rank as u32)];
        for out_idx in multi_indices(n, out_rank) {
            // out_idx = [contravariant.., direction, covariant..]
            let upper = &out_idx[..r];
            let dir = out_idx[r];
            let lower = &out_idx[r + 1..];

            let mut src = Vec::with_capacity(r + s);
            src.extend_from_slice(upper);
            src.extend_from_slice(lower);

            let mut acc = t.comp(&src).diff(chart, dir);
            // contravariant slots gain +Gamma contractions
            for slot in 0..r {
                for c in 0..n {
                    let mut idx = src.clone();
                    idx[slot] = c;
                    acc = ScalarField::add(
                        acc,
                        ScalarField::mul(
                            self.gamma(upper[slot], dir, c).clone(),
                            t.comp(&idx).clone(),
                        ),
                    );
                }
            }
            // covariant slots lose -Gamma contractions
            for slot in 0..s {
                for c in 0..n {
                    let mut idx = src.clone();
                    idx[r + slot] = c;
                    acc = ScalarField::sub(
                        acc,
                        ScalarField::mul(
                            self.gamma(c, dir, lower[slot]).clone(),
                            t.comp(&idx).clone(),
                        ),
                    );
                }
            }
            comps[flat_index(n, &out_idx)] = acc;
        }
        TensorField::new(self.chart.clone(), r, s + 1, comps)
    }

    /// `nabla_v w` for vector fields.
    pub fn directional_derivative(
        &self,
        v: &TensorField,
        w: &TensorField,
    ) -> Result<TensorField, GeomError> {
        let dw = self.covariant_derivative(w)?; // (1,1): [k][dir]
        let n = self.dim();
        let mut comps = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = ScalarField::zero();
            for i in 0..n {
                acc = ScalarField::add(
                    acc,
                    ScalarField::mul(v.comps()[i].clone(), dw.comp(&[k, i]).clone()),
                );
            }
            comps.push(acc);
        }
        TensorField::vector(self.chart.clone(), comps)
    }

    /// Connection codifferential on k-forms: `delta a = -tr_g nabla a`.
    pub fn codifferential(
        &self,
        alpha: &TensorField,
        g: &Metric,
    ) -> Result<TensorField, GeomError> {
        same_chart(&self.chart, g.chart())?;
        let k = alpha.degree();
        if k == 0 {
            return Err(GeomError::DegreeOverflow { degree: 0, dim: self.dim() });
        }
        let grad = self.covariant_derivative(alpha)?; // covariant slots: [dir, i1..ik]
        let n = self.dim();
        let mut comps = vec![ScalarField::zero(); n.pow((k - 1) as u32)];
        for rest in multi_indices(n, k - 1) {
            let mut acc = ScalarField::zero();
            for i in 0..n {
                for j in 0..n {
                    let mut idx = Vec::with_capacity(k + 1);
                    idx.push(i);
                    idx.push(j);
                    idx.extend(&rest);
                    acc = ScalarField::add(
                        acc,
                        ScalarField::mul(g.inv_entry(i, j), grad.comp(&idx).clone()),
                    );
                }
            }
            comps[flat_index(n, &rest)] = ScalarField::neg(acc);
        }
        Ok(TensorField::new(self.chart.clone(), 0, k.saturating_sub(1), comps)?
            .assume_alternating())
    }

    /// Max |Gamma - other.Gamma| over the given points.
    pub fn max_gamma_difference(
        &self,
        other: &Connection,
        points: &[Vec<f64>],
    ) -> Result<f64, GeomError> {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for pt in points {
            let ctx = EvalCtx::new(&self.chart, pt);
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let a = self.gamma(k, i, j).eval(&ctx)?;
                        let b = other.gamma(k, i, j).eval(&ctx)?;
                        worst = worst.max((a - b).abs());
                    }
                }
            }
        }
        Ok(worst)
    }
}

/// Sweep the defining duality relation over the points, recording
/// `d_j g_{ik} - <nabla_{d_j} d_i, d_k> - <d_i, nabla*_{d_j} d_k>`.
pub fn duality_sweep(
    nabla: &Connection,
    nabla_star: &Connection,
    g: &Metric,
    points: &[Vec<f64>],
    sweep: &mut crate::report::Sweep,
) -> Result<(), GeomError> {
    let chart = g.chart();
    let n = chart.dim();
    let mut dg = vec![Expr::zero(); n * n * n];
    for j in 0..n {
        for i in 0..n {
            for k in 0..n {
                dg[(j * n + i) * n + k] = g.entry(i, k).diff(chart.coord_name(j));
            }
        }
    }
    for pt in points {
        let ctx = EvalCtx::new(chart, pt);
        let gm = g.matrix_at(&ctx)?;
        sweep.bump_points();
        for j in 0..n {
            for i in 0..n {
                for k in 0..n {
                    let lead = dg[(j * n + i) * n + k].eval(ctx.env())?;
                    let mut res = lead;
                    for m in 0..n {
                        res -= nabla.gamma(m, j, i).eval(&ctx)? * gm[(m, k)];
                        res -= nabla_star.gamma(m, j, k).eval(&ctx)? * gm[(i, m)];
                    }
                    sweep.record_scale(lead);
                    sweep.record(pt, res, || format!("Z=d{j}, X=d{i}, Y=d{k}"));
                }
            }
        }
    }
    Ok(())
}

/// Max absolute residual of the duality relation at the given points.
pub fn duality_residual(
    nabla: &Connection,
    nabla_star: &Connection,
    g: &Metric,
    points: &[Vec<f64>],
) -> Result<f64, GeomError> {
    let mut sweep = crate::report::Sweep::new();
    duality_sweep(nabla, nabla_star, g, points, &mut sweep)?;
    Ok(sweep.max())
}

/// Cubic skewness tensor of a dual pair: `T(X,Y,Z) = <D(Z,X), Y>`, layout `[x][y][z]`.
pub fn skewness_tensor(d: &TensorField, g: &Metric) -> Result<TensorField, GeomError> {
    same_chart(d.chart(), g.chart())?;
    let n = d.dim();
    let mut comps = vec![ScalarField::zero(); n * n * n];
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let mut acc = ScalarField::zero();
                for a in 0..n {
                    acc = ScalarField::add(
                        acc,
                        ScalarField::mul(d.comp(&[a, z, x]).clone(), g.entry_field(a, y)),
                    );
                }
                comps[(x * n + y) * n + z] = acc;
            }
        }
    }
    TensorField::new(d.chart().clone(), 0, 3, comps)
}
