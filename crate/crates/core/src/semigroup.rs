// Copyright 2026 vnerg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Lindblad generators in the Heisenberg picture, the semigroup
//! `tau_t = exp(t L)` and its Abel averages `s_lambda = lambda (lambda - L)^{-1}`.
//!
//! In finite dimension `t -> tau_t` is norm continuous, so no separate
//! continuity hypothesis is checked.

use rayon::prelude::*;

use crate::algebra::SubspaceBasis;
use crate::cp_maps::{choi, QuantumMap};
use crate::ergodic::{assemble, predual_distance, spectral_projector, ErgodicDecomposition};
use crate::error::{Error, Result};
use crate::linalg::{
    c, ensure_dim, ensure_finite, ensure_square, hermiticity_residual, identity, matrix_exp, max_abs,
    null_space_scaled, projector_from_basis, psd_check, sandwich_superop, solve, transpose_permutation,
    vectorize, DenseMatrix, DenseVector, Tolerances, I,
};
use crate::standard_form::{standard_form, Functional, Side, State};

/// Generator `L` with superoperator `vec(L(x)) = S vec(x)`.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    dim: usize,
    hamiltonian: Option<DenseMatrix>,
    jumps: Vec<DenseMatrix>,
    superop: DenseMatrix,
}

impl LindbladGenerator {
    /// `L(x) = i[H, x] + sum_j (L_j* x L_j - 1/2 {L_j* L_j, x})`.
    pub fn new(hamiltonian: DenseMatrix, jumps: Vec<DenseMatrix>, tol: &Tolerances) -> Result<Self> {
        let n = ensure_square(&hamiltonian)?;
        ensure_finite(&hamiltonian)?;
        let herm = hermiticity_residual(&hamiltonian);
        if herm > tol.eq_rtol * hamiltonian.norm().max(1.0) {
            return Err(Error::InvalidGenerator {
                reason: format!("Hamiltonian is not Hermitian (residual {herm:e})"),
            });
        }
        let id = identity(n);
        let mut superop = (sandwich_superop(&hamiltonian, &id) - sandwich_superop(&id, &hamiltonian)) * I;
        for l in &jumps {
            ensure_dim(l, n)?;
            ensure_finite(l)?;
            let ll = l.adjoint() * l;
            superop += sandwich_superop(&l.adjoint(), l);
            superop -= (sandwich_superop(&ll, &id) + sandwich_superop(&id, &ll)).scale(0.5);
        }
        Ok(Self {
            dim: n,
            hamiltonian: Some(hamiltonian),
            jumps,
            superop,
        })
    }

    /// Accept an arbitrary superoperator if it generates a unital CP semigroup.
    ///
    /// Checks `L(I) = 0`, `L(x*) = L(x)*`, and conditional complete positivity:
    /// the Choi matrix compressed to the complement of the maximally entangled
    /// vector is PSD.
    pub fn from_superop(superop: DenseMatrix, tol: &Tolerances) -> Result<Self> {
        let map = QuantumMap::from_superop(superop)?;
        let n = map.dim();
        let id = identity(n);
        let at_one = max_abs(&map.apply(&id)?);
        if at_one > tol.eq_rtol {
            return Err(Error::InvalidGenerator {
                reason: format!("L(I) != 0 (residual {at_one:e})"),
            });
        }
        let p = transpose_permutation(n);
        let conj = &p * map.superop().map(|z| z.conj()) * &p;
        let herm = max_abs(&(conj - map.superop()));
        if herm > tol.eq_rtol {
            return Err(Error::InvalidGenerator {
                reason: format!("generator does not preserve adjoints (residual {herm:e})"),
            });
        }
        let omega = vectorize(&id).map(|z| z / c((n as f64).sqrt(), 0.0));
        let q = identity(n * n) - &omega * omega.adjoint();
        let compressed = &q * choi(&map) * &q;
        if !psd_check(&crate::linalg::hermitian_part(&compressed), tol)? {
            return Err(Error::InvalidGenerator {
                reason: "not conditionally completely positive".into(),
            });
        }
        Ok(Self {
            dim: n,
            hamiltonian: None,
            jumps: Vec::new(),
            superop: map.superop().clone(),
        })
    }

    /// The zero generator.
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            hamiltonian: None,
            jumps: Vec::new(),
            superop: DenseMatrix::zeros(dim * dim, dim * dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn superop(&self) -> &DenseMatrix {
        &self.superop
    }

    pub fn hamiltonian(&self) -> Option<&DenseMatrix> {
        self.hamiltonian.as_ref()
    }

    pub fn jumps(&self) -> &[DenseMatrix] {
        &self.jumps
    }

    pub fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        ensure_dim(x, self.dim)?;
        Ok(crate::linalg::unvectorize(&(&self.superop * vectorize(x)), self.dim))
    }

    /// `tau_t = exp(t L)`.
    pub fn evolve(&self, t: f64) -> Result<QuantumMap> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidArgument(format!("time must be finite and nonnegative, got {t}")));
        }
        QuantumMap::from_superop(matrix_exp(&self.superop.scale(t))?)
    }

    /// `s_lambda = lambda (lambda - L)^{-1}`.
    pub fn abel_average(&self, lambda: f64) -> Result<QuantumMap> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
        }
        let d = self.dim * self.dim;
        let shifted = identity(d).scale(lambda) - &self.superop;
        let inv = solve(&shifted, &identity(d)).ok_or(Error::SingularResolvent { lambda })?;
        let s = inv.scale(lambda);
        ensure_finite(&s).map_err(|_| Error::SingularResolvent { lambda })?;
        QuantumMap::from_superop(s)
    }

    /// Entrywise maximum of `abel_average(lambda)` minus composite Simpson
    /// quadrature of `lambda e^{-lambda t} tau_t` on `[0, t_max]` with `steps` panels.
    pub fn abel_quadrature_residual(&self, lambda: f64, t_max: f64, steps: usize) -> Result<f64> {
        if steps == 0 || !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidArgument("need t_max > 0 and at least one panel".into()));
        }
        if lambda * t_max < 20.0 {
            return Err(Error::InvalidArgument(format!(
                "lambda * t_max = {} leaves a tail above e^-20",
                lambda * t_max
            )));
        }
        let abel = self.abel_average(lambda)?;
        let h = t_max / steps as f64;
        let half_step = matrix_exp(&self.superop.scale(h / 2.0))?;
        let d = self.dim * self.dim;
        let mut at = identity(d);
        let mut sum = DenseMatrix::zeros(d, d);
        let weight = |t: f64| lambda * (-lambda * t).exp();
        for k in 0..steps {
            let t0 = k as f64 * h;
            let mid = &half_step * &at;
            let end = &half_step * &mid;
            sum += at.scale(weight(t0)) + mid.scale(4.0 * weight(t0 + h / 2.0)) + end.scale(weight(t0 + h));
            at = end;
        }
        let quad = sum.scale(h / 6.0);
        Ok(max_abs(&(abel.superop() - quad)))
    }
}

/// One profile entry `||psi o s_lambda - psi o E||`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbelProfileRow {
    pub lambda: f64,
    pub psi_index: usize,
    pub value: f64,
}

/// Conditional expectation onto `{x : L(x) = 0}` and the Abel profile over
/// `lambda_list` for each functional in `psi_battery`.
pub fn semigroup_expectation(
    generator: &LindbladGenerator,
    state: &State,
    lambda_list: &[f64],
    psi_battery: &[Functional],
    tol: &Tolerances,
) -> Result<(ErgodicDecomposition, Vec<AbelProfileRow>)> {
    let n = generator.dim;
    if state.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: state.dim(),
        });
    }
    let sf = standard_form(state.clone(), tol)?;
    let as_map = QuantumMap::from_superop(generator.superop.clone())?;
    let drift = max_abs(&as_map.predual(state.rho())?);
    if drift > tol.eq_rtol {
        return Err(Error::NotInvariant { residual: drift });
    }
    // kernel of the GNS generator, checked against the kernel of its adjoint
    let g = sf.embed_superop(Side::Algebra) * &generator.superop * sf.unembed_superop(Side::Algebra);
    let scale = crate::linalg::op_norm(&g)?.max(1.0);
    let kernel = null_space_scaled(&g, tol, scale)?;
    let co_kernel = null_space_scaled(&g.adjoint(), tol, scale)?;
    let p = projector_from_basis(&kernel, n * n);
    let q = projector_from_basis(&co_kernel, n * n);
    let mismatch = max_abs(&(&p - &q));
    if kernel.len() != co_kernel.len() || mismatch > tol.eq_rtol * 1e2 {
        return Err(Error::FixedSpaceMismatch { residual: mismatch });
    }
    let fixed: Vec<DenseVector> = null_space_scaled(&generator.superop, tol, scale)?;
    let basis = SubspaceBasis::from_orthonormal_vectors(n, &fixed);
    let spectral = spectral_projector(&(&generator.superop + identity(n * n)), tol)?;
    let dec = assemble(Side::Algebra, &sf, p, basis, &spectral, tol)?;

    let jobs: Vec<(f64, usize)> = lambda_list
        .iter()
        .flat_map(|&l| (0..psi_battery.len()).map(move |i| (l, i)))
        .collect();
    let profile = jobs
        .par_iter()
        .map(|&(lambda, psi_index)| {
            let s = generator.abel_average(lambda)?;
            Ok(AbelProfileRow {
                lambda,
                psi_index,
                value: predual_distance(&s, &dec.e, &psi_battery[psi_index])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((dec, profile))
}
