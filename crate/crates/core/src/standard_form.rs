// Copyright 2026 vnerg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Standard form of `(M_n, phi)` for a faithful state `phi = tr(rho .)`.
//!
//! The GNS space is `M_n` itself with the Hilbert–Schmidt inner product.
//! Vectors stay `n x n` matrices:
//!
//! | object            | formula                     |
//! |-------------------|-----------------------------|
//! | cyclic vector     | `zeta = rho^{1/2}`          |
//! | `pi(x) a`         | `x a`                       |
//! | `x zeta`          | `x rho^{1/2}`               |
//! | `Delta^s a`       | `rho^s a rho^{-s}`          |
//! | `J a`             | `a*`                        |
//! | commutant element | `a -> a c` (right multiply) |
//!
//! The commutant is handled in right-multiplier coordinates: the element
//! `J y J` of `pi(M)'` acts as `a -> a y*`, so it has coordinate `c = y*`.
//! Products reverse in these coordinates and `y' zeta = rho^{1/2} c`.

use crate::error::{Error, Result};
use crate::linalg::{
    c, ensure_dim, ensure_square, hermitian_eigen, hs_inner, hs_norm, matrix_units, psd_check,
    sandwich_superop, trace_norm, DenseMatrix, HermitianEigen, Tolerances, C64, ONE,
};

/// Which algebra a map or vector coordinate lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `M` acting by left multiplication; `x zeta = x rho^{1/2}`.
    Algebra,
    /// `M'` in right-multiplier coordinates; `c zeta = rho^{1/2} c`.
    Commutant,
}

impl Side {
    pub fn flip(self) -> Self {
        match self {
            Side::Algebra => Side::Commutant,
            Side::Commutant => Side::Algebra,
        }
    }
}

/// Faithful density matrix with cached fractional powers.
#[derive(Debug, Clone)]
pub struct State {
    rho: DenseMatrix,
    eig: HermitianEigen,
    sqrt: DenseMatrix,
    inv_sqrt: DenseMatrix,
    quarter: DenseMatrix,
    inv_quarter: DenseMatrix,
}

impl State {
    /// Validate `rho` (PSD, unit trace, faithful) and cache its powers.
    pub fn new(rho: DenseMatrix, tol: &Tolerances) -> Result<Self> {
        let n = ensure_square(&rho)?;
        crate::linalg::ensure_finite(&rho)?;
        if !psd_check(&rho, tol)? {
            return Err(Error::NotPsd {
                min_eigenvalue: hermitian_eigen(&rho)?.min(),
            });
        }
        let tr = rho.trace();
        if (tr - ONE).norm() > tol.eq_rtol * n as f64 {
            return Err(Error::InvalidArgument(format!(
                "density matrix must have unit trace, got {tr}"
            )));
        }
        let eig = hermitian_eigen(&rho)?;
        if eig.min() <= tol.psd_floor {
            return Err(Error::NotFaithful {
                min_eigenvalue: eig.min(),
            });
        }
        let power = |s: f64| eig.map(|d| c(d.powf(s), 0.0));
        let sqrt = power(0.5);
        let inv_sqrt = power(-0.5);
        let quarter = power(0.25);
        let inv_quarter = power(-0.25);
        let rho = crate::linalg::hermitian_part(&rho);
        Ok(Self {
            rho,
            eig,
            sqrt,
            inv_sqrt,
            quarter,
            inv_quarter,
        })
    }

    /// Normalize a positive matrix to unit trace first.
    pub fn from_unnormalized(weight: DenseMatrix, tol: &Tolerances) -> Result<Self> {
        let tr = weight.trace().re;
        if !(tr.is_finite() && tr > 0.0) {
            return Err(Error::InvalidArgument("weight must have positive trace".into()));
        }
        Self::new(weight.scale(1.0 / tr), tol)
    }

    /// The tracial state `I / n`.
    pub fn tracial(n: usize) -> Self {
        Self::new(crate::linalg::identity(n).scale(1.0 / n as f64), &Tolerances::default())
            .expect("I/n is a faithful state")
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn rho(&self) -> &DenseMatrix {
        &self.rho
    }

    pub fn sqrt(&self) -> &DenseMatrix {
        &self.sqrt
    }

    pub fn inv_sqrt(&self) -> &DenseMatrix {
        &self.inv_sqrt
    }

    pub fn quarter(&self) -> &DenseMatrix {
        &self.quarter
    }

    pub fn inv_quarter(&self) -> &DenseMatrix {
        &self.inv_quarter
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig.min()
    }

    /// `rho^s` for complex `s` (faithfulness makes every power defined).
    pub fn power(&self, s: C64) -> DenseMatrix {
        self.eig.map(|d| c(d, 0.0).powc(s))
    }

    /// `phi(x) = tr(rho x)`.
    pub fn expectation(&self, x: &DenseMatrix) -> C64 {
        (&self.rho * x).trace()
    }
}

/// Trace-class representer `sigma` of the functional `x -> tr(sigma x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional {
    pub sigma: DenseMatrix,
}

impl Functional {
    pub fn new(sigma: DenseMatrix) -> Self {
        Self { sigma }
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn apply(&self, x: &DenseMatrix) -> C64 {
        (&self.sigma * x).trace()
    }

    /// Norm in the predual, the trace norm of `sigma`.
    pub fn norm(&self) -> Result<f64> {
        trace_norm(&self.sigma)
    }
}

/// Standard form data of a faithful state.
#[derive(Debug, Clone)]
pub struct StandardForm {
    state: State,
    tol: Tolerances,
}

impl StandardForm {
    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn dim(&self) -> usize {
        self.state.dim()
    }

    /// `n^2`.
    pub fn gns_dim(&self) -> usize {
        self.dim() * self.dim()
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    /// `zeta = rho^{1/2}`.
    pub fn cyclic_vector(&self) -> &DenseMatrix {
        self.state.sqrt()
    }

    /// `x zeta = x rho^{1/2}`.
    pub fn gns_embed(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        ensure_dim(x, self.dim())?;
        Ok(x * self.state.sqrt())
    }

    /// Inverse of [`gns_embed`](Self::gns_embed): `a rho^{-1/2}`.
    pub fn gns_unembed(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        ensure_dim(a, self.dim())?;
        Ok(a * self.state.inv_sqrt())
    }

    /// `x zeta` for `x` on the given side.
    pub fn embed(&self, side: Side, x: &DenseMatrix) -> Result<DenseMatrix> {
        ensure_dim(x, self.dim())?;
        Ok(match side {
            Side::Algebra => x * self.state.sqrt(),
            Side::Commutant => self.state.sqrt() * x,
        })
    }

    pub fn unembed(&self, side: Side, a: &DenseMatrix) -> Result<DenseMatrix> {
        ensure_dim(a, self.dim())?;
        Ok(match side {
            Side::Algebra => a * self.state.inv_sqrt(),
            Side::Commutant => self.state.inv_sqrt() * a,
        })
    }

    /// Superoperator of [`embed`](Self::embed) in row-major vectorization.
    pub fn embed_superop(&self, side: Side) -> DenseMatrix {
        let id = crate::linalg::identity(self.dim());
        match side {
            Side::Algebra => sandwich_superop(&id, self.state.sqrt()),
            Side::Commutant => sandwich_superop(self.state.sqrt(), &id),
        }
    }

    pub fn unembed_superop(&self, side: Side) -> DenseMatrix {
        let id = crate::linalg::identity(self.dim());
        match side {
            Side::Algebra => sandwich_superop(&id, self.state.inv_sqrt()),
            Side::Commutant => sandwich_superop(self.state.inv_sqrt(), &id),
        }
    }

    /// `Delta^s a = rho^s a rho^{-s}`; `s = i t` gives the unitary `Delta^{it}`.
    pub fn modular_apply(&self, a: &DenseMatrix, s: C64) -> Result<DenseMatrix> {
        ensure_dim(a, self.dim())?;
        let left = self.state.power(s);
        let right = self.state.power(-s);
        Ok(left * a * right)
    }

    /// Modular automorphism `sigma_t(x) = rho^{it} x rho^{-it}`.
    pub fn modular_group(&self, x: &DenseMatrix, t: f64) -> Result<DenseMatrix> {
        self.modular_apply(x, c(0.0, t))
    }

    /// `J a = a*`.
    pub fn modular_conj(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        ensure_dim(a, self.dim())?;
        Ok(a.adjoint())
    }

    /// Membership in the self-dual cone `rho^{1/4} PSD rho^{1/4}`.
    pub fn cone_member(&self, a: &DenseMatrix, tol: &Tolerances) -> Result<bool> {
        ensure_dim(a, self.dim())?;
        let h = self.state.inv_quarter() * a * self.state.inv_quarter();
        psd_check(&h, tol)
    }

    /// `psi(x) = <c1 zeta, x c2 zeta>` for commutant coordinates `c1, c2`;
    /// the representer is `rho^{1/2} c2 c1* rho^{1/2}`.
    pub fn vector_functional(&self, c1: &DenseMatrix, c2: &DenseMatrix) -> Result<Functional> {
        ensure_dim(c1, self.dim())?;
        ensure_dim(c2, self.dim())?;
        let s = self.state.sqrt();
        Ok(Functional::new(s * c2 * c1.adjoint() * s))
    }

    /// `max |<x zeta, y zeta> - phi(x* y)|` over matrix-unit pairs.
    pub fn gns_isometry_residual(&self) -> f64 {
        let n = self.dim();
        let embedded: Vec<DenseMatrix> = matrix_units(n).map(|(_, e)| &e * self.state.sqrt()).collect();
        let units: Vec<DenseMatrix> = matrix_units(n).map(|(_, e)| e).collect();
        let mut worst = 0.0f64;
        for (a, x) in embedded.iter().zip(&units) {
            for (b, y) in embedded.iter().zip(&units) {
                let lhs = hs_inner(a, b);
                let rhs = self.state.expectation(&(x.adjoint() * y));
                worst = worst.max((lhs - rhs).norm());
            }
        }
        worst
    }

    /// `max ||J Delta^{1/2} (x zeta) - x* zeta||_HS` over matrix units.
    pub fn tomita_residual(&self) -> f64 {
        let half = c(0.5, 0.0);
        let left = self.state.power(half);
        let right = self.state.power(-half);
        matrix_units(self.dim())
            .map(|(_, x)| {
                let v = &x * self.state.sqrt();
                let delta_half = &left * v * &right;
                let lhs = delta_half.adjoint();
                let rhs = x.adjoint() * self.state.sqrt();
                hs_norm(&(lhs - rhs))
            })
            .fold(0.0, f64::max)
    }
}

/// Build the standard form, verifying the GNS isometry and the Tomita relation.
pub fn standard_form(state: State, tol: &Tolerances) -> Result<StandardForm> {
    if state.min_eigenvalue() <= tol.psd_floor {
        return Err(Error::NotFaithful {
            min_eigenvalue: state.min_eigenvalue(),
        });
    }
    let sf = StandardForm { state, tol: *tol };
    let iso = sf.gns_isometry_residual();
    if iso > tol.eq_rtol {
        return Err(Error::Consistency(format!("GNS isometry residual {iso:e}")));
    }
    let tomita = sf.tomita_residual();
    if tomita > tol.eq_rtol {
        return Err(Error::Consistency(format!("Tomita relation residual {tomita:e}")));
    }
    Ok(sf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, identity, matrix_unit, max_abs};
    use crate::random::{ginibre, random_faithful_density, random_psd, rng};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn skewed() -> StandardForm {
        let st = State::new(diag_real(&[2.0 / 3.0, 1.0 / 3.0]), &tol()).unwrap();
        standard_form(st, &tol()).unwrap()
    }

    #[test]
    fn tracial_modular_operator_is_trivial() {
        let sf = standard_form(State::tracial(2), &tol()).unwrap();
        for (_, e) in matrix_units(2) {
            let d = sf.modular_apply(&e, c(1.0, 0.0)).unwrap();
            assert!(max_abs(&(d - &e)) < 1e-14);
            assert_eq!(sf.modular_conj(&e).unwrap(), e.adjoint());
        }
    }

    #[test]
    fn modular_operator_on_off_diagonal_unit() {
        let sf = skewed();
        let e12 = matrix_unit(2, 0, 1);
        let d = sf.modular_apply(&e12, c(1.0, 0.0)).unwrap();
        assert!(max_abs(&(d - e12.scale(2.0))) < 1e-13);
        let q = sf.modular_apply(&e12, c(0.25, 0.0)).unwrap();
        assert!(max_abs(&(q - e12.scale(2f64.powf(0.25)))) < 1e-13);
    }

    #[test]
    fn non_faithful_state_rejected() {
        let rho = diag_real(&[0.5, 0.5, 0.0]);
        assert!(matches!(State::new(rho, &tol()), Err(Error::NotFaithful { .. })));
    }

    #[test]
    fn non_normalized_state_rejected() {
        assert!(matches!(
            State::new(diag_real(&[1.0, 1.0]), &tol()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn gns_embed_examples() {
        let p = 0.3;
        let st = State::new(diag_real(&[p, 1.0 - p]), &tol()).unwrap();
        let sf = standard_form(st, &tol()).unwrap();
        assert!(max_abs(&(sf.gns_embed(&identity(2)).unwrap() - sf.cyclic_vector())) < 1e-15);
        let e11 = matrix_unit(2, 0, 0);
        let v = sf.gns_embed(&e11).unwrap();
        assert!(max_abs(&(v - e11.scale(p.sqrt()))) < 1e-14);
        assert!(sf.gns_embed(&identity(3)).is_err());
    }

    #[test]
    fn gns_norm_is_state_of_square() {
        let mut r = rng(1);
        let st = State::new(random_faithful_density(&mut r, 3, 0.2), &tol()).unwrap();
        let sf = standard_form(st, &tol()).unwrap();
        for _ in 0..10 {
            let x = ginibre(&mut r, 3, 3);
            let v = sf.gns_embed(&x).unwrap();
            let lhs = hs_norm(&v).powi(2);
            let rhs = sf.state().expectation(&(x.adjoint() * &x)).re;
            assert!((lhs - rhs).abs() < 1e-12 * rhs.max(1.0));
        }
    }

    #[test]
    fn modular_unitary_preserves_norm() {
        let mut r = rng(2);
        let sf = skewed();
        for t in [0.3, -1.7, 5.0] {
            let a = ginibre(&mut r, 2, 2);
            let b = sf.modular_apply(&a, c(0.0, t)).unwrap();
            assert!((hs_norm(&a) - hs_norm(&b)).abs() < 1e-12);
        }
    }

    #[test]
    fn modular_conjugation_examples() {
        let sf = skewed();
        let zeta = sf.cyclic_vector().clone();
        assert!(max_abs(&(sf.modular_conj(&zeta).unwrap() - &zeta)) < 1e-15);
        assert_eq!(sf.modular_conj(&matrix_unit(2, 0, 1)).unwrap(), matrix_unit(2, 1, 0));
        let mut r = rng(3);
        let a = ginibre(&mut r, 2, 2);
        let x = ginibre(&mut r, 2, 2);
        // J x J a = a x*
        let jxj = sf.modular_conj(&(&x * sf.modular_conj(&a).unwrap())).unwrap();
        assert!(max_abs(&(jxj - &a * x.adjoint())) < 1e-13);
        // J^2 = id
        let twice = sf.modular_conj(&sf.modular_conj(&a).unwrap()).unwrap();
        assert_eq!(twice, a);
    }

    #[test]
    fn cone_examples() {
        let sf = skewed();
        assert!(sf.cone_member(sf.cyclic_vector(), &tol()).unwrap());
        assert!(!sf.cone_member(&matrix_unit(2, 0, 1), &tol()).unwrap());
        let mut r = rng(4);
        let mut members = Vec::new();
        for _ in 0..8 {
            let x = ginibre(&mut r, 2, 2);
            // x J x J zeta = x rho^{1/2} x*
            let a = &x * sf.cyclic_vector() * x.adjoint();
            assert!(sf.cone_member(&a, &tol()).unwrap());
            assert!(sf.cone_member(&a.scale(3.5), &tol()).unwrap());
            members.push(a);
        }
        for a in &members {
            for b in &members {
                assert!(hs_inner(a, b).re >= -1e-8);
            }
        }
    }

    #[test]
    fn vector_functional_examples() {
        let p = 0.3;
        let st = State::new(diag_real(&[p, 1.0 - p]), &tol()).unwrap();
        let sf = standard_form(st, &tol()).unwrap();
        let id = identity(2);
        let f = sf.vector_functional(&id, &id).unwrap();
        assert!(max_abs(&(f.sigma - sf.state().rho())) < 1e-14);
        let e11 = matrix_unit(2, 0, 0);
        let f = sf.vector_functional(&e11, &e11).unwrap();
        assert!(max_abs(&(f.sigma - e11.scale(p))) < 1e-14);
    }

    #[test]
    fn vector_functional_defining_identity() {
        let mut r = rng(6);
        let st = State::new(random_faithful_density(&mut r, 3, 0.2), &tol()).unwrap();
        let sf = standard_form(st, &tol()).unwrap();
        let units: Vec<DenseMatrix> = matrix_units(3).map(|(_, e)| e).collect();
        for c1 in &units {
            for c2 in &units {
                let f = sf.vector_functional(c1, c2).unwrap();
                for x in &units {
                    let lhs = f.apply(x);
                    let rhs = hs_inner(
                        &sf.embed(Side::Commutant, c1).unwrap(),
                        &(x * sf.embed(Side::Commutant, c2).unwrap()),
                    );
                    assert!((lhs - rhs).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn vector_functionals_span_predual() {
        let mut r = rng(7);
        let st = State::new(random_faithful_density(&mut r, 3, 0.2), &tol()).unwrap();
        let sf = standard_form(st, &tol()).unwrap();
        let units: Vec<DenseMatrix> = matrix_units(3).map(|(_, e)| e).collect();
        let mut cols = Vec::new();
        for c1 in &units {
            for c2 in &units {
                cols.push(crate::linalg::vectorize(&sf.vector_functional(c1, c2).unwrap().sigma));
            }
        }
        let m = DenseMatrix::from_columns(&cols);
        let rank = crate::linalg::singular_values(&m)
            .unwrap()
            .iter()
            .filter(|&&s| s > 1e-10)
            .count();
        assert_eq!(rank, 9);
    }

    #[test]
    fn modular_group_preserves_state() {
        let mut r = rng(8);
        let st = State::new(random_faithful_density(&mut r, 3, 0.2), &tol()).unwrap();
        let sf = standard_form(st, &tol()).unwrap();
        for t in [0.3, -0.3, 1.7, -1.7] {
            let x = ginibre(&mut r, 3, 3);
            let y = sf.modular_group(&x, t).unwrap();
            let d = sf.state().expectation(&y) - sf.state().expectation(&x);
            assert!(d.norm() < 1e-12);
        }
    }

    #[test]
    fn invariants_hold_for_random_states() {
        let mut r = rng(9);
        for n in 2..=4 {
            let w = random_psd(&mut r, n, n);
            let st = State::from_unnormalized(w + identity(n).scale(0.05), &tol()).unwrap();
            let sf = standard_form(st, &tol()).unwrap();
            assert!(sf.gns_isometry_residual() < 1e-12);
            assert!(sf.tomita_residual() < 1e-10);
        }
    }
}
