// Copyright 2026 vnerg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex matrix kernel.
//!
//! Everything downstream works with [`DenseMatrix`] (an `nalgebra` dynamic
//! complex matrix) and a single [`Tolerances`] record. Matrices on `M_n` are
//! vectorized row-major: `vec(x)[i * n + j] = x[(i, j)]`, so the standard
//! inner product on vectors is the Hilbert–Schmidt product `tr(a* b)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type DenseMatrix = DMatrix<C64>;
pub type DenseVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Numerical fuzz policy shared by every module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Eigenvalues down to `-psd_floor * max(1, ||A||)` still count as nonnegative.
    pub psd_floor: f64,
    /// Relative tolerance for equality and Hermiticity checks.
    pub eq_rtol: f64,
    /// Singular values below `nullspace_rel * sigma_max` count as zero.
    pub nullspace_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            psd_floor: 1e-9,
            eq_rtol: 1e-8,
            nullspace_rel: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all_positive = [self.psd_floor, self.eq_rtol, self.nullspace_rel]
            .iter()
            .all(|t| t.is_finite() && *t > 0.0);
        if !all_positive {
            return Err(Error::InvalidArgument(
                "tolerances must be finite and strictly positive".into(),
            ));
        }
        if self.psd_floor >= 1e-3 {
            return Err(Error::InvalidArgument("psd_floor must be below 1e-3".into()));
        }
        Ok(())
    }
}

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> DenseMatrix {
    DenseMatrix::identity(n, n)
}

/// Matrix unit `E_ij` (zero-based).
pub fn matrix_unit(n: usize, i: usize, j: usize) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n, n);
    m[(i, j)] = ONE;
    m
}

/// All matrix units of `M_n` in row-major order, paired with their indices.
pub fn matrix_units(n: usize) -> impl Iterator<Item = ((usize, usize), DenseMatrix)> {
    (0..n * n).map(move |k| ((k / n, k % n), matrix_unit(n, k / n, k % n)))
}

pub fn diag(entries: &[C64]) -> DenseMatrix {
    DenseMatrix::from_diagonal(&DenseVector::from_column_slice(entries))
}

pub fn diag_real(entries: &[f64]) -> DenseMatrix {
    let v: Vec<C64> = entries.iter().map(|&x| c(x, 0.0)).collect();
    diag(&v)
}

pub fn from_rows(rows: &[&[C64]]) -> DenseMatrix {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, |r| r.len());
    DenseMatrix::from_fn(n_rows, n_cols, |i, j| rows[i][j])
}

/// Pauli matrices `(sigma_x, sigma_y, sigma_z)`.
pub fn pauli() -> (DenseMatrix, DenseMatrix, DenseMatrix) {
    let sx = from_rows(&[&[ZERO, ONE], &[ONE, ZERO]]);
    let sy = from_rows(&[&[ZERO, -I], &[I, ZERO]]);
    let sz = from_rows(&[&[ONE, ZERO], &[ZERO, -ONE]]);
    (sx, sy, sz)
}

pub fn dagger(a: &DenseMatrix) -> DenseMatrix {
    a.adjoint()
}

/// Hilbert–Schmidt inner product `tr(a* b)`, conjugate linear in `a`.
pub fn hs_inner(a: &DenseMatrix, b: &DenseMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn hs_norm(a: &DenseMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(a: &DenseMatrix) -> C64 {
    a.trace()
}

/// Largest entry modulus.
pub fn max_abs(a: &DenseMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn vectorize(a: &DenseMatrix) -> DenseVector {
    let n = a.nrows();
    let m = a.ncols();
    DenseVector::from_fn(n * m, |k, _| a[(k / m, k % m)])
}

pub fn unvectorize(v: &DenseVector, n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |i, j| v[i * n + j])
}

pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DenseMatrix::from_fn(ar * br, ac * bc, |r, s| {
        a[(r / br, s / bc)] * b[(r % br, s % bc)]
    })
}

/// Superoperator of `x -> a x b` in row-major vectorization.
pub fn sandwich_superop(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    kron(a, &b.transpose())
}

/// Permutation matrix implementing `vec(x) -> vec(x^T)`.
pub fn transpose_permutation(n: usize) -> DenseMatrix {
    let mut p = DenseMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            p[(j * n + i, i * n + j)] = ONE;
        }
    }
    p
}

pub fn commutator(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    a * b - b * a
}

pub fn ensure_finite(a: &DenseMatrix) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn ensure_square(a: &DenseMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    if a.nrows() == 0 {
        return Err(Error::InvalidArgument("matrix dimension must be at least 1".into()));
    }
    Ok(a.nrows())
}

pub fn ensure_dim(a: &DenseMatrix, n: usize) -> Result<()> {
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if a.nrows() != n { a.nrows() } else { a.ncols() },
        });
    }
    Ok(())
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors matching `values`.
    pub vectors: DenseMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `U f(D) U*`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> DenseMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &d) in self.values.iter().enumerate() {
            let fd = f(d);
            for i in 0..n {
                scaled[(i, j)] *= fd;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

pub fn hermitian_part(a: &DenseMatrix) -> DenseMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// `||A - A*||_F`.
pub fn hermiticity_residual(a: &DenseMatrix) -> f64 {
    hs_norm(&(a - a.adjoint()))
}

pub fn hermitian_eigen(a: &DenseMatrix) -> Result<HermitianEigen> {
    ensure_square(a)?;
    ensure_finite(a)?;
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let n = a.nrows();
    let mut vectors = DenseMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let mut col = eig.eigenvectors.column(src).into_owned();
        fix_phase(&mut col);
        vectors.set_column(dst, &col);
    }
    Ok(HermitianEigen { values, vectors })
}

/// Rotate `v` so that its first non-negligible component is real positive.
pub fn fix_phase(v: &mut DenseVector) {
    let scale = v.norm();
    if scale == 0.0 {
        return;
    }
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-8 * scale).copied() {
        let phase = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

/// True iff `A` is Hermitian within `eq_rtol * max(1, ||A||_F)` and its
/// smallest eigenvalue is at least `-psd_floor * max(1, ||A||_op)`.
pub fn psd_check(a: &DenseMatrix, tol: &Tolerances) -> Result<bool> {
    ensure_square(a)?;
    ensure_finite(a)?;
    let scale = hs_norm(a).max(1.0);
    if hermiticity_residual(a) > tol.eq_rtol * scale {
        return Ok(false);
    }
    let eig = hermitian_eigen(a)?;
    let op = eig.max().abs().max(eig.min().abs()).max(1.0);
    Ok(eig.min() >= -tol.psd_floor * op)
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eigenvalue(a: &DenseMatrix) -> Result<f64> {
    Ok(hermitian_eigen(a)?.min())
}

/// Singular values, descending.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    ensure_finite(a)?;
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let mut s: Vec<f64> = a.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

pub fn trace_norm(a: &DenseMatrix) -> Result<f64> {
    ensure_square(a)?;
    Ok(singular_values(a)?.iter().sum())
}

pub fn op_norm(a: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// Unitary polar factor `W = U V*` from the SVD `A = U S V*`; it attains
/// `trace_norm(A) = |tr(A W*)|`.
pub fn polar_unitary(a: &DenseMatrix) -> Result<DenseMatrix> {
    ensure_square(a)?;
    ensure_finite(a)?;
    let svd = SVD::new(a.clone(), true, true);
    let u = svd.u.ok_or_else(|| Error::Consistency("SVD did not return U".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Consistency("SVD did not return V*".into()))?;
    Ok(u * v_t)
}

/// `A^s` for positive semidefinite `A` via its spectral decomposition.
///
/// `s` may be complex, so `frac_power(rho, i t)` gives the unitary `rho^{it}`.
/// Eigenvalues within the PSD floor of zero are clamped to zero; a negative
/// real part of `s` then requires strict positivity.
pub fn frac_power(a: &DenseMatrix, s: C64, tol: &Tolerances) -> Result<DenseMatrix> {
    if !psd_check(a, tol)? {
        return Err(Error::NotPsd {
            min_eigenvalue: min_eigenvalue(a)?,
        });
    }
    let eig = hermitian_eigen(a)?;
    let floor = tol.psd_floor * eig.max().abs().max(1.0);
    if s.re < 0.0 && eig.min() <= floor {
        return Err(Error::SingularMatrix {
            min_eigenvalue: eig.min(),
        });
    }
    Ok(eig.map(|d| {
        if s == ZERO {
            ONE
        } else if d <= floor && s.re >= 0.0 {
            if s.re > 0.0 {
                ZERO
            } else {
                // purely imaginary power of a null eigenvalue: keep the kernel fixed
                ONE
            }
        } else {
            c(d.max(0.0), 0.0).powc(s)
        }
    }))
}

/// Orthonormal basis of the right null space of `A` (any shape).
///
/// Right-singular vectors whose singular value is at most
/// `nullspace_rel * sigma_max` are returned, in SVD order, with their phase
/// normalized. A zero matrix yields the full standard basis.
pub fn null_space(a: &DenseMatrix, tol: &Tolerances) -> Result<Vec<DenseVector>> {
    null_space_scaled(a, tol, 0.0)
}

/// [`null_space`] with the threshold `nullspace_rel * max(sigma_max, scale)`.
///
/// Use `scale = 1` for `T - I` with `T` a contraction, so that rounding noise
/// in an exactly fixed `T` is not mistaken for structure.
pub fn null_space_scaled(a: &DenseMatrix, tol: &Tolerances, scale: f64) -> Result<Vec<DenseVector>> {
    ensure_finite(a)?;
    let (rows, cols) = a.shape();
    if cols == 0 {
        return Ok(Vec::new());
    }
    let padded = if rows < cols {
        let mut p = DenseMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let sigma_max_guess = max_abs(&padded);
    if sigma_max_guess == 0.0 {
        return Ok((0..cols)
            .map(|k| {
                let mut e = DenseVector::zeros(cols);
                e[k] = ONE;
                e
            })
            .collect());
    }
    let svd = SVD::new(padded, false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Consistency("SVD did not return V*".into()))?;
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    let threshold = tol.nullspace_rel * sigma_max.max(scale);
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&x, &y| sigma[y].total_cmp(&sigma[x]));
    let mut basis: Vec<DenseVector> = order
        .into_iter()
        .filter(|&k| sigma[k] <= threshold)
        .map(|k| {
            let mut v = v_t.row(k).adjoint();
            fix_phase(&mut v);
            v
        })
        .collect();
    orthonormalize(&mut basis, 1e-12);
    Ok(basis)
}

/// Modified Gram–Schmidt with one re-orthogonalization pass; vectors that
/// collapse below `drop_tol` are removed.
pub fn orthonormalize(vectors: &mut Vec<DenseVector>, drop_tol: f64) {
    let mut out: Vec<DenseVector> = Vec::with_capacity(vectors.len());
    for v in vectors.drain(..) {
        let mut w = v;
        let norm0 = w.norm();
        if norm0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &out {
                let proj = q.dotc(&w);
                w -= q * proj;
            }
        }
        let norm = w.norm();
        if norm > drop_tol * norm0.max(1.0) {
            out.push(w / c(norm, 0.0));
        }
    }
    *vectors = out;
}

/// Orthogonal projection onto the span of orthonormal columns.
pub fn projector_from_basis(basis: &[DenseVector], dim: usize) -> DenseMatrix {
    let mut p = DenseMatrix::zeros(dim, dim);
    for v in basis {
        p += v * v.adjoint();
    }
    p
}

/// Matrix exponential (Padé scaling and squaring).
pub fn matrix_exp(a: &DenseMatrix) -> Result<DenseMatrix> {
    ensure_square(a)?;
    ensure_finite(a)?;
    let e = a.clone().exp();
    ensure_finite(&e)?;
    Ok(e)
}

/// Solve `A X = B` by LU with partial pivoting.
pub fn solve(a: &DenseMatrix, b: &DenseMatrix) -> Option<DenseMatrix> {
    a.clone().lu().solve(b)
}

/// Stack matrices vertically (all must share the column count).
pub fn vstack(blocks: &[DenseMatrix]) -> DenseMatrix {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DenseMatrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(b);
        r += b.nrows();
    }
    out
}

/// Deterministic pairwise (tree) sum.
pub fn pairwise_sum(mut terms: Vec<DenseMatrix>, rows: usize, cols: usize) -> DenseMatrix {
    if terms.is_empty() {
        return DenseMatrix::zeros(rows, cols);
    }
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a + b),
                None => next.push(a),
            }
        }
        terms = next;
    }
    terms.pop().unwrap_or_else(|| DenseMatrix::zeros(rows, cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn psd_check_examples() {
        assert!(psd_check(&diag_real(&[1.0, 0.0]), &tol()).unwrap());
        let nilpotent = from_rows(&[&[ZERO, ONE], &[ZERO, ZERO]]);
        assert!(!psd_check(&nilpotent, &tol()).unwrap());
        assert!(!psd_check(&diag_real(&[1.0, -1e-3]), &tol()).unwrap());
        // just inside the floor
        assert!(psd_check(&diag_real(&[1.0, -1e-10]), &tol()).unwrap());
    }

    #[test]
    fn non_finite_rejected() {
        let bad = diag_real(&[1.0, f64::NAN]);
        assert_eq!(psd_check(&bad, &tol()), Err(Error::NonFinite));
        assert_eq!(trace_norm(&bad), Err(Error::NonFinite));
        assert_eq!(op_norm(&bad), Err(Error::NonFinite));
        assert_eq!(null_space(&bad, &tol()), Err(Error::NonFinite));
        assert_eq!(matrix_exp(&bad), Err(Error::NonFinite));
    }

    #[test]
    fn trace_norm_examples() {
        assert!((trace_norm(&diag_real(&[1.0, -2.0])).unwrap() - 3.0).abs() < 1e-14);
        assert_eq!(trace_norm(&DenseMatrix::zeros(3, 3)).unwrap(), 0.0);
        let a = from_rows(&[&[ZERO, c(2.0, 0.0)], &[ZERO, ZERO]]);
        assert!((trace_norm(&a).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn op_norm_examples() {
        assert!((op_norm(&identity(3)).unwrap() - 1.0).abs() < 1e-14);
        assert!((op_norm(&diag_real(&[0.5, -0.25])).unwrap() - 0.5).abs() < 1e-14);
        let a = from_rows(&[&[ONE, ONE], &[ZERO, ONE]]);
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((op_norm(&a).unwrap() - golden).abs() < 1e-13);
    }

    #[test]
    fn frac_power_examples() {
        let id = identity(3);
        assert!(max_abs(&(frac_power(&id, c(0.25, 0.0), &tol()).unwrap() - &id)) < 1e-14);
        let r = frac_power(&diag_real(&[4.0, 9.0]), c(0.5, 0.0), &tol()).unwrap();
        assert!(max_abs(&(r - diag_real(&[2.0, 3.0]))) < 1e-13);
        let inv = frac_power(&diag_real(&[2.0 / 3.0, 1.0 / 3.0]), c(-1.0, 0.0), &tol()).unwrap();
        assert!(max_abs(&(inv - diag_real(&[1.5, 3.0]))) < 1e-13);
    }

    #[test]
    fn frac_power_errors() {
        let singular = diag_real(&[1.0, 0.0]);
        assert!(matches!(
            frac_power(&singular, c(-0.5, 0.0), &tol()),
            Err(Error::SingularMatrix { .. })
        ));
        assert!(matches!(
            frac_power(&diag_real(&[1.0, -0.5]), c(0.5, 0.0), &tol()),
            Err(Error::NotPsd { .. })
        ));
        // positive powers of singular PSD matrices are fine
        let half = frac_power(&singular, c(0.5, 0.0), &tol()).unwrap();
        assert!(max_abs(&(half - &singular)) < 1e-14);
    }

    #[test]
    fn null_space_examples() {
        assert_eq!(null_space(&DenseMatrix::zeros(2, 2), &tol()).unwrap().len(), 2);
        assert!(null_space(&identity(3), &tol()).unwrap().is_empty());
        let ns = null_space(&diag_real(&[0.0, 1.0, 1.0]), &tol()).unwrap();
        assert_eq!(ns.len(), 1);
        assert!((ns[0][0] - ONE).norm() < 1e-12);
        assert!(ns[0][1].norm() < 1e-12 && ns[0][2].norm() < 1e-12);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        // one equation in three unknowns
        let a = DenseMatrix::from_row_slice(1, 3, &[ONE, ONE, ZERO]);
        let ns = null_space(&a, &tol()).unwrap();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!((a.clone() * v).norm() < 1e-12);
        }
    }

    #[test]
    fn matrix_exp_examples() {
        let z = DenseMatrix::zeros(3, 3);
        assert!(max_abs(&(matrix_exp(&z).unwrap() - identity(3))) < 1e-15);
        let e = matrix_exp(&diag_real(&[2f64.ln(), 0.0])).unwrap();
        assert!(max_abs(&(e - diag_real(&[2.0, 1.0]))) < 1e-14);
        let theta = std::f64::consts::FRAC_PI_2;
        let gen = from_rows(&[&[ZERO, c(-theta, 0.0)], &[c(theta, 0.0), ZERO]]);
        let rot = matrix_exp(&gen).unwrap();
        let expected = from_rows(&[&[ZERO, -ONE], &[ONE, ZERO]]);
        assert!(max_abs(&(rot - expected)) < 1e-14);
    }

    #[test]
    fn kron_matches_sandwich() {
        let a = from_rows(&[&[ONE, c(0.0, 2.0)], &[c(3.0, 0.0), ZERO]]);
        let b = from_rows(&[&[c(0.5, 0.0), ONE], &[c(0.0, -1.0), c(2.0, 1.0)]]);
        let x = from_rows(&[&[c(1.0, 1.0), c(-2.0, 0.0)], &[c(0.0, 3.0), c(4.0, 0.0)]]);
        let lhs = vectorize(&(&a * &x * &b));
        let rhs = sandwich_superop(&a, &b) * vectorize(&x);
        assert!((lhs - rhs).norm() < 1e-13);
        let t = transpose_permutation(2) * vectorize(&x);
        assert!((t - vectorize(&x.transpose())).norm() < 1e-15);
    }

    #[test]
    fn tolerances_validate() {
        assert!(Tolerances::default().validate().is_ok());
        let bad = Tolerances {
            psd_floor: 1e-2,
            ..Tolerances::default()
        };
        assert!(bad.validate().is_err());
        let neg = Tolerances {
            eq_rtol: -1.0,
            ..Tolerances::default()
        };
        assert!(neg.validate().is_err());
    }

    #[test]
    fn pairwise_sum_is_sum() {
        let terms: Vec<DenseMatrix> = (0..7).map(|k| identity(2).scale(k as f64)).collect();
        let s = pairwise_sum(terms, 2, 2);
        assert!(max_abs(&(s - identity(2).scale(21.0))) < 1e-14);
    }
}
