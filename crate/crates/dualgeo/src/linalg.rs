//! Pointwise numerical linear algebra: g-orthonormal frames, numerical
//! rank, the real normal form of skew matrices, principal angles and polar
//! rotations. Everything here is deterministic for a fixed input so check
//! reports are byte-stable across runs.

use nalgebra::{DMatrix, DVector};

use crate::error::GeomError;

pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Count of singular values above `rel_tol` times the largest.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let svd = m.clone().svd(false, false);
    let max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    svd.singular_values.iter().filter(|&&s| s > rel_tol * max).count()
}

pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let svd = m.clone().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().cloned().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Columns form a g-orthonormal frame obtained from the coordinate basis in
/// coordinate order (equivalently `L^{-T}` for the Cholesky factor `g = L L^T`).
pub fn frame_from_metric(g: &DMatrix<f64>, point: &[f64]) -> Result<DMatrix<f64>, GeomError> {
    let chol = nalgebra::Cholesky::new(g.clone()).ok_or_else(|| GeomError::DegenerateMetric {
        point: point.to_vec(),
    })?;
    let l = chol.l();
    let inv_l = l
        .clone()
        .try_inverse()
        .ok_or_else(|| GeomError::DegenerateMetric {
            point: point.to_vec(),
        })?;
    Ok(inv_l.transpose())
}

/// Real normal form of a skew matrix expressed in an orthonormal frame:
/// an orthonormal basis `Z_1..Z_n` (columns) with
/// `T Z_{2k-1} = l_k Z_{2k}`, `T Z_{2k} = -l_k Z_{2k-1}` and `T Z = 0` on the
/// kernel block, eigen-pairs sorted by descending `l`.
#[derive(Debug, Clone)]
pub struct SkewNormalForm {
    pub lambdas: Vec<f64>,
    /// n x n orthonormal basis, block pairs first then kernel vectors.
    pub basis: DMatrix<f64>,
    pub kernel_dim: usize,
}

pub fn skew_normal_form(theta: &DMatrix<f64>, tol: f64) -> Result<SkewNormalForm, GeomError> {
    let n = theta.nrows();
    let scale = theta.iter().cloned().fold(0.0f64, |m, v| m.max(v.abs()));
    let sym_part = (theta + theta.transpose()) * 0.5;
    let sym_norm = sym_part.iter().cloned().fold(0.0f64, |m, v| m.max(v.abs()));
    if sym_norm > tol * (1.0 + scale) {
        return Err(GeomError::Precondition(format!(
            "skew matrix (symmetric part {sym_norm:.3e})"
        )));
    }
    let skew = (theta - theta.transpose()) * 0.5;

    // T^t T = -T^2 is symmetric PSD with eigenvalues l^2, each of even
    // multiplicity away from the kernel.
    let s = skew.transpose() * &skew;
    let eig = nalgebra::SymmetricEigen::new(s);
    let mut pairs: Vec<(f64, usize)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &v)| (v.max(0.0), i))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));

    let lam_scale = pairs.first().map(|p| p.0).unwrap_or(0.0);
    let rank_cut = (DEFAULT_RANK_TOL * lam_scale).max(1e-300);
    let cluster_cut = 1e-8 * (1.0 + lam_scale);

    let mut basis_cols: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut lambdas = Vec::new();

    let mut idx = 0;
    while idx < pairs.len() {
        if pairs[idx].0 <= rank_cut {
            break; // kernel handled below
        }
        // gather the eigenvalue cluster
        let mut end = idx + 1;
        while end < pairs.len() && (pairs[idx].0 - pairs[end].0).abs() <= cluster_cut {
            end += 1;
        }
        let members: Vec<usize> = pairs[idx..end].iter().map(|p| p.1).collect();
        // projector onto the cluster subspace; independent of the solver's
        // internal basis choice, so the output is deterministic
        let mut proj = DMatrix::zeros(n, n);
        for &m in &members {
            let v = eig.eigenvectors.column(m);
            proj += &v * v.transpose();
        }
        let mut taken: Vec<DVector<f64>> = Vec::new();
        // lexicographic pivoting: walk coordinate axes in order
        for axis in 0..n {
            if taken.len() == members.len() {
                break;
            }
            let mut cand: DVector<f64> = proj.column(axis).into();
            for u in &taken {
                let c = u.dot(&cand);
                cand -= u * c;
            }
            let norm = cand.norm();
            if norm < 1e-6 {
                continue;
            }
            let u = &cand / norm;
            // pair u with T u / |T u|
            let mut v = &skew * &u;
            let lam = v.norm();
            if lam <= rank_cut.sqrt() {
                continue;
            }
            v /= lam;
            sign_stabilize(&mut v.clone()); // no-op on pair partner; kept for clarity
            taken.push(u.clone());
            taken.push(v.clone());
            lambdas.push(lam);
            basis_cols.push(u);
            basis_cols.push(v);
        }
        idx = end;
    }

    // kernel block: everything orthogonal to the collected columns
    let mut kernel_dim = 0;
    if basis_cols.len() < n {
        let mut proj = DMatrix::identity(n, n);
        for u in &basis_cols {
            proj -= u * u.transpose();
        }
        for axis in 0..n {
            if basis_cols.len() == n {
                break;
            }
            let mut cand: DVector<f64> = proj.column(axis).into();
            for u in &basis_cols {
                let c = u.dot(&cand);
                cand -= u * c;
            }
            let norm = cand.norm();
            if norm < 1e-6 {
                continue;
            }
            let mut u = cand / norm;
            sign_stabilize(&mut u);
            basis_cols.push(u);
            kernel_dim += 1;
        }
    }

    if basis_cols.len() != n {
        return Err(GeomError::Precondition(
            "skew normal form basis completion failed".into(),
        ));
    }

    let basis = DMatrix::from_columns(&basis_cols);
    Ok(SkewNormalForm {
        lambdas,
        basis,
        kernel_dim,
    })
}

impl SkewNormalForm {
    /// Worst deviation from the block relations and from orthonormality.
    pub fn reconstruction_residual(&self, theta: &DMatrix<f64>) -> f64 {
        let n = theta.nrows();
        let m = self.lambdas.len();
        let mut worst: f64 = 0.0;
        for k in 0..m {
            let z1 = self.basis.column(2 * k);
            let z2 = self.basis.column(2 * k + 1);
            let lam = self.lambdas[k];
            worst = worst.max((theta * z1 - lam * z2).norm());
            worst = worst.max((theta * z2 + lam * z1).norm());
        }
        for k in 0..self.kernel_dim {
            let z = self.basis.column(2 * m + k);
            worst = worst.max((theta * z).norm());
        }
        let gram = self.basis.transpose() * &self.basis - DMatrix::identity(n, n);
        worst.max(gram.iter().cloned().fold(0.0f64, |a, v| a.max(v.abs())))
    }

    /// Worst deviation of `T^2 Z_i = -l_{k(i)}^2 Z_i`.
    pub fn square_residual(&self, theta: &DMatrix<f64>) -> f64 {
        let sq = theta * theta;
        let m = self.lambdas.len();
        let mut worst: f64 = 0.0;
        for i in 0..self.basis.ncols() {
            let lam = if i < 2 * m { self.lambdas[i / 2] } else { 0.0 };
            let z = self.basis.column(i);
            worst = worst.max((&sq * z + lam * lam * z).norm());
        }
        worst
    }
}

fn sign_stabilize(v: &mut DVector<f64>) {
    let mut best = 0usize;
    let mut mag = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > mag {
            mag = x.abs();
            best = i;
        }
    }
    if v[best] < 0.0 {
        *v = -&*v;
    }
}

/// Orthonormal basis of the (right) null space, sign-stabilized. Uses the
/// symmetric eigenproblem of `m^T m`, which always yields a full basis.
pub fn nullspace(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    let gram = m.transpose() * m;
    let eig = nalgebra::SymmetricEigen::new(gram);
    let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let cut = rel_tol * rel_tol * max;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for i in order {
        if max == 0.0 || eig.eigenvalues[i] <= cut {
            let mut v: DVector<f64> = eig.eigenvectors.column(i).into();
            sign_stabilize(&mut v);
            cols.push(v);
        }
    }
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis of the column space, via `m m^T`.
pub fn column_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let rows = m.nrows();
    let gram = m * m.transpose();
    let eig = nalgebra::SymmetricEigen::new(gram);
    let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let cut = rel_tol * rel_tol * max;
    let mut order: Vec<usize> = (0..rows).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for i in order {
        if max > 0.0 && eig.eigenvalues[i] > cut {
            let mut v: DVector<f64> = eig.eigenvectors.column(i).into();
            sign_stabilize(&mut v);
            cols.push(v);
        }
    }
    if cols.is_empty() {
        DMatrix::zeros(rows, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Largest principal angle (radians) between two subspaces given by
/// orthonormal column bases of equal dimension.
pub fn max_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() != b.ncols() || a.ncols() == 0 {
        return std::f64::consts::FRAC_PI_2;
    }
    let m = a.transpose() * b;
    let svd = m.svd(false, false);
    let smin = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
        .clamp(-1.0, 1.0);
    smin.acos()
}

/// Rotation factor of the polar decomposition `A = Q P`, `Q = U V^T`.
/// For an invertible skew input this returns the orthogonal complex
/// structure with `Q^2 = -I`.
pub fn polar_rotation(a: &DMatrix<f64>) -> Result<DMatrix<f64>, GeomError> {
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd requested u");
    let vt = svd.v_t.as_ref().expect("svd requested v_t");
    let min_s = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let max_s = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if max_s == 0.0 || min_s < 1e-12 * max_s {
        return Err(GeomError::SingularMap {
            point: vec![],
            cond: if min_s > 0.0 { max_s / min_s } else { f64::INFINITY },
        });
    }
    Ok(u * vt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_explicit_skew_matrix() {
        let m = DMatrix::from_row_slice(3, 3, &[0.0, -2.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(numerical_rank(&m, DEFAULT_RANK_TOL), 2);
        let s = singular_values(&m);
        assert!((s[0] - 2.0).abs() < 1e-14 && (s[1] - 2.0).abs() < 1e-14 && s[2] < 1e-14);
        assert_eq!(numerical_rank(&DMatrix::zeros(3, 3), DEFAULT_RANK_TOL), 0);
    }

    #[test]
    fn normal_form_of_explicit_block() {
        let m = DMatrix::from_row_slice(3, 3, &[0.0, -2.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let nf = skew_normal_form(&m, 1e-10).unwrap();
        assert_eq!(nf.lambdas.len(), 1);
        assert!((nf.lambdas[0] - 2.0).abs() < 1e-12);
        assert_eq!(nf.kernel_dim, 1);
        assert!(nf.reconstruction_residual(&m) < 1e-12);
        assert!(nf.square_residual(&m) < 1e-12);
        // kernel is the third axis
        assert!((nf.basis.column(2)[2].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normal_form_rejects_non_skew() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert!(skew_normal_form(&m, 1e-10).is_err());
    }

    #[test]
    fn polar_rotation_of_skew_is_complex_structure() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -3.0, 3.0, 0.0]);
        let q = polar_rotation(&a).unwrap();
        let q2 = &q * &q;
        let id = DMatrix::identity(2, 2);
        assert!((q2 + id).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn principal_angle_of_shared_plane_is_zero() {
        let a = DMatrix::from_columns(&[
            DVector::from_vec(vec![1.0, 0.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0, 0.0]),
        ]);
        let rot = DMatrix::from_columns(&[
            DVector::from_vec(vec![0.6, 0.8, 0.0]),
            DVector::from_vec(vec![-0.8, 0.6, 0.0]),
        ]);
        assert!(max_principal_angle(&a, &rot) < 1e-12);
    }
}
