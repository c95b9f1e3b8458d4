//! Dense generalized symmetric-definite eigensolver.
//!
//! This is the oracle path: below a few hundred DOFs every spectral
//! quantity is checked against it, and full-spectrum operations (Weyl
//! counts, Wegner trials) use it directly.

use super::sparse::CsrMatrix;
use crate::error::SolveError;
use nalgebra::{DMatrix, DVector};

/// All eigenpairs of A x = λ B x with A symmetric and B symmetric positive
/// definite. Returns eigenvalues ascending and B-orthonormal eigenvectors
/// as matrix columns.
pub fn dense_generalized_eigs(
    a: &CsrMatrix,
    b: &CsrMatrix,
) -> Result<(Vec<f64>, DMatrix<f64>), SolveError> {
    let n = a.dim();
    if b.dim() != n {
        return Err(SolveError::Dimension(format!(
            "A is {}x{} but B is {}x{}",
            n,
            n,
            b.dim(),
            b.dim()
        )));
    }
    let ad = a.to_dense();
    let bd = b.to_dense();
    dense_generalized_eigs_from(&ad, &bd)
}

pub fn dense_generalized_eigs_from(
    ad: &DMatrix<f64>,
    bd: &DMatrix<f64>,
) -> Result<(Vec<f64>, DMatrix<f64>), SolveError> {
    let n = ad.nrows();
    let chol = bd
        .clone()
        .cholesky()
        .ok_or_else(|| SolveError::Factorization("mass matrix not positive definite".into()))?;
    let l = chol.l();
    // C = L^{-1} A L^{-T}, symmetric standard problem.
    let mut c = ad.clone();
    let _ = l.solve_lower_triangular_mut(&mut c);
    c.transpose_mut();
    let _ = l.solve_lower_triangular_mut(&mut c);
    // Symmetrize away roundoff before the QR iteration.
    let c = (&c + c.transpose()) * 0.5;
    let se = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let eigs: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    // Back-transform x = L^{-T} y, giving B-orthonormal columns.
    let mut vecs = DMatrix::zeros(n, n);
    let lt = l.transpose();
    for (k, &i) in order.iter().enumerate() {
        let mut y: DVector<f64> = se.eigenvectors.column(i).into_owned();
        let _ = lt.solve_upper_triangular_mut(&mut y);
        vecs.set_column(k, &y);
    }
    Ok((eigs, vecs))
}

/// Eigenvalues only, ascending.
pub fn dense_generalized_eigenvalues(
    a: &CsrMatrix,
    b: &CsrMatrix,
) -> Result<Vec<f64>, SolveError> {
    let n = a.dim();
    let ad = a.to_dense();
    let bd = b.to_dense();
    let chol = bd
        .cholesky()
        .ok_or_else(|| SolveError::Factorization("mass matrix not positive definite".into()))?;
    let l = chol.l();
    let mut c = ad;
    let _ = l.solve_lower_triangular_mut(&mut c);
    c.transpose_mut();
    let _ = l.solve_lower_triangular_mut(&mut c);
    let c = (&c + c.transpose()) * 0.5;
    let mut ev: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    debug_assert_eq!(ev.len(), n);
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sparse::CooBuilder;

    #[test]
    fn generalized_pairs_satisfy_residual_and_b_orthonormality() {
        // A = tridiag(-1, 2, -1), B = tridiag(1, 4, 1)/6 (scaled mass-like).
        let n = 12;
        let mut a = CooBuilder::new(n);
        let mut b = CooBuilder::new(n);
        for i in 0..n {
            a.push(i, i, 2.0);
            b.push(i, i, 4.0 / 6.0);
            if i + 1 < n {
                a.push_sym(i, i + 1, -1.0);
                b.push_sym(i, i + 1, 1.0 / 6.0);
            }
        }
        let (a, b) = (a.build(), b.build());
        let (eigs, vecs) = dense_generalized_eigs(&a, &b).unwrap();
        assert_eq!(eigs.len(), n);
        for k in 0..n {
            let x: Vec<f64> = vecs.column(k).iter().copied().collect();
            let ax = a.matvec_alloc(&x);
            let bx = b.matvec_alloc(&x);
            let mut res = 0.0f64;
            for i in 0..n {
                res += (ax[i] - eigs[k] * bx[i]).powi(2);
            }
            assert!(res.sqrt() < 1e-10, "k={k} res={res}");
            let bnorm = b.bilinear(&x, &x);
            assert!((bnorm - 1.0).abs() < 1e-10);
        }
        for k in 1..n {
            assert!(eigs[k] >= eigs[k - 1]);
        }
    }
}
