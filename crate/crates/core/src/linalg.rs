//! Dense linear-algebra kernels shared by the rest of the crate.
//!
//! Eigen- and singular-value problems are delegated to `nalgebra`; this
//! module only adds sorting, symmetrization and the real coordinate system
//! on Hermitian matrices used to turn automorphisms into real linear maps.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type RMat = DMatrix<f64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Eigenpairs of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: CMat,
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Eigendecomposition of the Hermitian part of `m`.
pub fn eigh(m: &CMat) -> Eigh {
    let n = m.nrows();
    if n == 0 {
        return Eigh {
            values: Vec::new(),
            vectors: CMat::zeros(0, 0),
        };
    }
    let h = hermitian_part(m);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Eigh { values, vectors }
}

/// `SVD::new` iterates without bound on rare inputs; cap the sweeps and
/// retry with a looser threshold.
pub fn real_svd(m: &RMat, compute_u: bool, compute_v: bool) -> SVD<f64, nalgebra::Dyn, nalgebra::Dyn> {
    SVD::try_new(m.clone(), compute_u, compute_v, f64::EPSILON, 20_000)
        .or_else(|| SVD::try_new(m.clone(), compute_u, compute_v, 1e3 * f64::EPSILON, 200_000))
        .expect("SVD did not converge")
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    SVD::try_new(m.clone(), false, false, f64::EPSILON, 20_000)
        .map(|svd| svd.singular_values.iter().fold(0.0_f64, |acc, &s| acc.max(s)))
        .unwrap_or_else(|| eigh(&(m.adjoint() * m)).values[0].max(0.0).sqrt())
}

pub fn real_spectral_norm(m: &RMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    real_svd(m, false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}

/// Operator-norm distance of `m` from being Hermitian.
pub fn hermitian_deviation(m: &CMat) -> f64 {
    spectral_norm(&(m - m.adjoint()))
}

pub fn unitary_deviation(u: &CMat) -> f64 {
    let n = u.nrows();
    spectral_norm(&(u.adjoint() * u - CMat::identity(n, n)))
}

/// Projector onto the span of the selected eigenvector columns.
pub fn projector_from_columns(vectors: &CMat, cols: &[usize]) -> CMat {
    let n = vectors.nrows();
    let mut p = CMat::zeros(n, n);
    for &c in cols {
        let v = vectors.column(c);
        p += &v * v.adjoint();
    }
    p
}

/// Number of real coordinates of the Hermitian part of an `n x n` block.
pub fn hermitian_dim(n: usize) -> usize {
    n * n
}

/// Writes the orthonormal Hermitian coordinates of block `m` into `out`.
///
/// Ordering: the `n` diagonal entries, then for each `j < k` the pair
/// `(sqrt2 * Re m_jk, sqrt2 * Im m_jk)`. Coordinates are taken from the
/// Hermitian part of `m`.
pub fn write_hermitian_coords(m: &CMat, out: &mut [f64]) {
    let n = m.nrows();
    debug_assert_eq!(out.len(), n * n);
    let s2 = std::f64::consts::SQRT_2;
    for j in 0..n {
        out[j] = m[(j, j)].re;
    }
    let mut idx = n;
    for j in 0..n {
        for k in (j + 1)..n {
            let z = (m[(j, k)] + m[(k, j)].conj()) * 0.5;
            out[idx] = s2 * z.re;
            out[idx + 1] = s2 * z.im;
            idx += 2;
        }
    }
}

/// Inverse of [`write_hermitian_coords`].
pub fn hermitian_from_coords(n: usize, coords: &[f64]) -> CMat {
    debug_assert_eq!(coords.len(), n * n);
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = CMat::zeros(n, n);
    for j in 0..n {
        m[(j, j)] = C64::new(coords[j], 0.0);
    }
    let mut idx = n;
    for j in 0..n {
        for k in (j + 1)..n {
            let z = C64::new(coords[idx] * r2, coords[idx + 1] * r2);
            m[(j, k)] = z;
            m[(k, j)] = z.conj();
            idx += 2;
        }
    }
    m
}

/// Orthonormal basis (as columns) of the null space of `m`.
///
/// Singular values below `tol * max(1, sigma_max)` count as zero.
pub fn real_nullspace(m: &RMat, tol: f64) -> RMat {
    let cols = m.ncols();
    if cols == 0 {
        return RMat::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return RMat::identity(cols, cols);
    }
    // Pad to at least square so that V^T is complete.
    let padded = if m.nrows() < cols {
        let mut p = RMat::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = real_svd(&padded, false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    let cutoff = tol * smax.max(1.0);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&j| svd.singular_values[j] <= cutoff)
        .collect();
    let mut basis = RMat::zeros(cols, keep.len());
    for (dst, &j) in keep.iter().enumerate() {
        basis.set_column(dst, &v_t.row(j).transpose());
    }
    basis
}

/// Nearest orthogonal matrix (polar factor).
pub fn reorthogonalize(m: &RMat) -> RMat {
    let svd = real_svd(m, true, true);
    svd.u.expect("U") * svd.v_t.expect("V^T")
}

/// Least-squares solution of `a x = b` via SVD.
pub fn least_squares(a: &RMat, b: &DVector<f64>, tol: f64) -> DVector<f64> {
    let svd = real_svd(a, true, true);
    let smax = svd.singular_values.iter().fold(0.0_f64, |x, &s| x.max(s));
    svd.solve(b, tol * smax.max(1.0))
        .unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_x_spectrum_descends() {
        let x = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let e = eigh(&x);
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn hermitian_coords_round_trip_and_isometry() {
        let m = CMat::from_row_slice(
            2,
            2,
            &[C64::new(0.5, 0.0), C64::new(0.1, 0.3), C64::new(0.1, -0.3), C64::new(-0.2, 0.0)],
        );
        let mut c = vec![0.0; 4];
        write_hermitian_coords(&m, &mut c);
        let back = hermitian_from_coords(2, &c);
        assert!((back - &m).norm() < 1e-15);
        let norm2: f64 = c.iter().map(|v| v * v).sum();
        assert!((norm2 - m.norm_squared()).abs() < 1e-14);
    }

    #[test]
    fn nilpotent_norm_is_two() {
        let x = CMat::from_row_slice(2, 2, &[ZERO, C64::new(2.0, 0.0), ZERO, ZERO]);
        assert!((spectral_norm(&x) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn nullspace_of_rank_one() {
        let m = RMat::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let n = real_nullspace(&m, 1e-10);
        assert_eq!(n.ncols(), 2);
        assert!((&m * &n).norm() < 1e-12);
    }
}
