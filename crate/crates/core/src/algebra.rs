// Copyright 2026 vnerg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Subspaces of `M_n`: commutants, Hilbert–Schmidt projections and
//! *-algebra closure checks.

use crate::error::{Error, Result};
use crate::linalg::{
    ensure_dim, hs_inner, hs_norm, identity, null_space, orthonormalize, sandwich_superop,
    unvectorize, vectorize, vstack, DenseMatrix, DenseVector, Tolerances, C64,
};

/// Hilbert–Schmidt orthonormal basis of a subspace of `M_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    dim: usize,
    elements: Vec<DenseMatrix>,
}

impl SubspaceBasis {
    /// Orthonormalize an arbitrary spanning family.
    pub fn from_spanning(dim: usize, spanning: &[DenseMatrix]) -> Result<Self> {
        let mut vecs = Vec::with_capacity(spanning.len());
        for m in spanning {
            ensure_dim(m, dim)?;
            vecs.push(vectorize(m));
        }
        orthonormalize(&mut vecs, 1e-10);
        Ok(Self::from_orthonormal_vectors(dim, &vecs))
    }

    pub(crate) fn from_orthonormal_vectors(dim: usize, vecs: &[DenseVector]) -> Self {
        Self {
            dim,
            elements: vecs.iter().map(|v| unvectorize(v, dim)).collect(),
        }
    }

    /// All of `M_n`, spanned by the matrix units.
    pub fn full(dim: usize) -> Self {
        let elements = crate::linalg::matrix_units(dim).map(|(_, e)| e).collect();
        Self { dim, elements }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[DenseMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `max |<b_i, b_j> - delta_ij|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.elements.iter().enumerate() {
            for (j, b) in self.elements.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((hs_inner(a, b) - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// `||x - hs_project(x)||_HS`.
    pub fn membership_residual(&self, x: &DenseMatrix) -> Result<f64> {
        Ok(hs_norm(&(x - hs_project(x, self)?)))
    }

    pub fn contains(&self, x: &DenseMatrix, tol: &Tolerances) -> Result<bool> {
        Ok(self.membership_residual(x)? <= tol.eq_rtol * (1.0 + hs_norm(x)))
    }
}

/// `sum_b <b, x> b`, the Hilbert–Schmidt orthogonal projection onto the span.
pub fn hs_project(x: &DenseMatrix, basis: &SubspaceBasis) -> Result<DenseMatrix> {
    ensure_dim(x, basis.dim)?;
    let mut out = DenseMatrix::zeros(basis.dim, basis.dim);
    for b in &basis.elements {
        out += b * hs_inner(b, x);
    }
    Ok(out)
}

/// Orthonormal basis of `{x : x g = g x for every generator g}`.
///
/// Solved as the joint null space of the stacked superoperators of
/// `x -> x g - g x`.
pub fn commutant(dim: usize, generators: &[DenseMatrix], tol: &Tolerances) -> Result<SubspaceBasis> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if generators.is_empty() {
        return Ok(SubspaceBasis::full(dim));
    }
    let id = identity(dim);
    let mut blocks = Vec::with_capacity(generators.len());
    for g in generators {
        ensure_dim(g, dim)?;
        crate::linalg::ensure_finite(g)?;
        blocks.push(sandwich_superop(&id, g) - sandwich_superop(g, &id));
    }
    let stacked = vstack(&blocks);
    let vecs = null_space(&stacked, tol)?;
    Ok(SubspaceBasis::from_orthonormal_vectors(dim, &vecs))
}

/// True iff the span is closed under adjoints and under all pairwise products.
///
/// Membership is decided by the projection residual against
/// `eq_rtol * (1 + ||y||_HS)`.
pub fn is_star_algebra(basis: &SubspaceBasis, tol: &Tolerances) -> Result<bool> {
    for a in basis.elements() {
        if !basis.contains(&a.adjoint(), tol)? {
            return Ok(false);
        }
        for b in basis.elements() {
            if !basis.contains(&(a * b), tol)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
