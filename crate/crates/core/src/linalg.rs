//! Small dense helpers shared by the state, reduction and oracle paths.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Symmetric eigendecomposition with eigenvalues sorted ascending.
///
/// Returns `(values, vectors)` with eigenvectors stored as columns, so that
/// `m = V diag(values) V^T`, together with the solver's original column index
/// of every sorted entry.
pub fn sym_eigen(
    m: &DMatrix<f64>,
    context: &'static str,
) -> Result<(DVector<f64>, DMatrix<f64>, Vec<usize>)> {
    let n = m.nrows();
    let sym = symmetrize(m);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 10_000 * n.max(1))
        .ok_or(Error::EigenSolver(context))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors, order))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn antisymmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m - m.transpose()) * 0.5
}

/// Applies `f` to the spectrum of a symmetric matrix.
pub fn sym_apply(
    m: &DMatrix<f64>,
    context: &'static str,
    f: impl Fn(f64) -> f64,
) -> Result<DMatrix<f64>> {
    let (values, vectors, _) = sym_eigen(m, context)?;
    let scaled = DMatrix::from_diagonal(&values.map(f));
    Ok(symmetrize(&(&vectors * scaled * vectors.transpose())))
}

/// Inverse of a symmetric positive-definite matrix through its Cholesky factor.
pub fn spd_inverse(m: &DMatrix<f64>, context: &'static str) -> Result<DMatrix<f64>> {
    let chol = Cholesky::new(symmetrize(m)).ok_or(Error::NotPositiveDefinite(context))?;
    Ok(symmetrize(&chol.inverse()))
}

/// Standard symplectic form for the `(x_1..x_m, p_1..p_m)` ordering.
pub fn symplectic_form(m: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        j[(i, m + i)] = 1.0;
        j[(m + i, i)] = -1.0;
    }
    j
}

/// Symplectic eigenvalues of a `2m x 2m` positive-definite matrix, ascending.
///
/// With `g = L L^T` the antisymmetric matrix `L^T J L` has eigenvalues
/// `+-i nu_j`; its Gram matrix carries every `nu_j^2` twice.
pub fn symplectic_eigenvalues(g: &DMatrix<f64>, context: &'static str) -> Result<Vec<f64>> {
    let dim = g.nrows();
    debug_assert!(dim.is_multiple_of(2) && g.ncols() == dim);
    let chol = Cholesky::new(symmetrize(g)).ok_or(Error::NotPositiveDefinite(context))?;
    let l = chol.l();
    let a = l.transpose() * symplectic_form(dim / 2) * &l;
    let gram = a.transpose() * &a;
    let (values, _, _) = sym_eigen(&gram, context)?;
    Ok(values
        .as_slice()
        .chunks(2)
        .map(|pair| (0.5 * (pair[0] + pair[1])).max(0.0).sqrt())
        .collect())
}

/// Extracts the principal submatrix on `rows` x `cols`.
pub fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sorted_ascending() {
        let m = DMatrix::from_row_slice(3, 3, &[3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        let (vals, vecs, order) = sym_eigen(&m, "test").unwrap();
        assert_eq!(vals.as_slice(), &[1.0, 2.0, 3.0]);
        let recon = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        assert!((recon - m).norm() < 1e-14);
        assert_eq!(order.len(), 3);
    }

    #[test]
    fn vacuum_symplectic_spectrum() {
        let sigma = DMatrix::identity(6, 6) * 0.5;
        for nu in symplectic_eigenvalues(&sigma, "test").unwrap() {
            assert!((nu - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn squeezed_thermal_mode() {
        // diag(a * r, a / r) has symplectic eigenvalue a for any squeezing r
        let sigma = DMatrix::from_diagonal(&DVector::from_vec(vec![1.7 * 40.0, 1.7 / 40.0]));
        let nu = symplectic_eigenvalues(&sigma, "test").unwrap();
        assert!((nu[0] - 1.7).abs() < 1e-13);
    }

    #[test]
    fn spd_inverse_rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(spd_inverse(&m, "m").is_err());
    }
}
