// Copyright 2026 vnerg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Linear maps on `M_n` as superoperators.
//!
//! Kraus families act in the Heisenberg picture, `x -> sum_j K_j* x K_j`.
//! A map carries the [`Side`] it lives on: maps on `M` use ordinary
//! coordinates, maps on the commutant use right-multiplier coordinates
//! (see [`crate::standard_form`]). Dual maps flip the side.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    ensure_dim, ensure_finite, ensure_square, hermitian_part, hs_norm, identity, matrix_units,
    max_abs, min_eigenvalue, op_norm, psd_check, sandwich_superop, transpose_permutation,
    unvectorize, vectorize, DenseMatrix, Tolerances,
};
use crate::random::{ginibre, random_psd, random_unit_vector, rng};
use crate::standard_form::{Side, StandardForm, State};

/// A linear map on `M_n` with row-major superoperator `S`, `vec(tau(x)) = S vec(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumMap {
    dim: usize,
    superop: DenseMatrix,
    kraus: Option<Vec<DenseMatrix>>,
    side: Side,
}

impl QuantumMap {
    /// `x -> sum_j K_j* x K_j`.
    pub fn from_kraus(kraus: Vec<DenseMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty Kraus family".into()))?;
        let n = ensure_square(first)?;
        let mut superop = DenseMatrix::zeros(n * n, n * n);
        for k in &kraus {
            ensure_dim(k, n)?;
            ensure_finite(k)?;
            superop += sandwich_superop(&k.adjoint(), k);
        }
        Ok(Self {
            dim: n,
            superop,
            kraus: Some(kraus),
            side: Side::Algebra,
        })
    }

    pub fn from_superop(superop: DenseMatrix) -> Result<Self> {
        let nn = ensure_square(&superop)?;
        ensure_finite(&superop)?;
        let n = (nn as f64).sqrt().round() as usize;
        if n * n != nn || n == 0 {
            return Err(Error::InvalidArgument(format!(
                "superoperator side {nn} is not a positive perfect square"
            )));
        }
        Ok(Self {
            dim: n,
            superop,
            kraus: None,
            side: Side::Algebra,
        })
    }

    /// Tabulate a linear `f` on the matrix units.
    pub fn from_fn(dim: usize, f: impl Fn(&DenseMatrix) -> DenseMatrix) -> Result<Self> {
        let mut superop = DenseMatrix::zeros(dim * dim, dim * dim);
        for ((i, j), e) in matrix_units(dim) {
            let image = f(&e);
            ensure_dim(&image, dim)?;
            superop.set_column(i * dim + j, &vectorize(&image));
        }
        Self::from_superop(superop)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_kraus(vec![identity(dim)]).expect("identity Kraus operator is valid")
    }

    /// `x -> U x U*`.
    pub fn unitary_conjugation(u: &DenseMatrix) -> Result<Self> {
        Self::from_kraus(vec![u.adjoint()])
    }

    /// `x -> sum_j p_j U_j x U_j*`.
    pub fn mixed_unitary(weights: &[f64], unitaries: &[DenseMatrix]) -> Result<Self> {
        if weights.len() != unitaries.len() || weights.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidArgument("weights must be nonnegative, one per unitary".into()));
        }
        let kraus = weights
            .iter()
            .zip(unitaries)
            .map(|(&p, u)| u.adjoint().scale(p.sqrt()))
            .collect();
        Self::from_kraus(kraus)
    }

    /// `x -> x^T`; positive but not completely positive for `n >= 2`.
    pub fn transpose(dim: usize) -> Self {
        Self::from_superop(transpose_permutation(dim)).expect("permutation is square")
    }

    /// Reinterpret the same coordinates on another side.
    pub fn with_side(mut self, side: Side) -> Self {
        self.side = side;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn superop(&self) -> &DenseMatrix {
        &self.superop
    }

    pub fn kraus(&self) -> Option<&[DenseMatrix]> {
        self.kraus.as_deref()
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        ensure_dim(x, self.dim)?;
        Ok(unvectorize(&(&self.superop * vectorize(x)), self.dim))
    }

    /// Superoperator of the trace adjoint: `tr(sigma tau(x)) = tr(tau_*(sigma) x)`.
    pub fn predual_superop(&self) -> DenseMatrix {
        let p = transpose_permutation(self.dim);
        &p * self.superop.transpose() * &p
    }

    /// `tau_*(sigma)`.
    pub fn predual(&self, sigma: &DenseMatrix) -> Result<DenseMatrix> {
        ensure_dim(sigma, self.dim)?;
        Ok(unvectorize(&(self.predual_superop() * vectorize(sigma)), self.dim))
    }

    /// `self o other` (apply `other` first). Both maps must live on the same side.
    pub fn compose(&self, other: &QuantumMap) -> Result<QuantumMap> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.side != other.side {
            return Err(Error::InvalidArgument("cannot compose maps on different sides".into()));
        }
        let kraus = match (&self.kraus, &other.kraus) {
            (Some(a), Some(b)) => Some(
                b.iter()
                    .flat_map(|kb| a.iter().map(move |ka| kb * ka))
                    .collect(),
            ),
            _ => None,
        };
        Ok(QuantumMap {
            dim: self.dim,
            superop: &self.superop * &other.superop,
            kraus,
            side: self.side,
        })
    }

    /// `a * self + b * other` as superoperators (Kraus data dropped).
    pub fn linear_combination(&self, a: f64, other: &QuantumMap, b: f64) -> Result<QuantumMap> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(QuantumMap {
            dim: self.dim,
            superop: self.superop.scale(a) + other.superop.scale(b),
            kraus: None,
            side: self.side,
        })
    }

    /// Max HS deviation between the Kraus action and the superoperator on matrix units.
    pub fn kraus_consistency_residual(&self) -> f64 {
        let Some(kraus) = &self.kraus else { return 0.0 };
        matrix_units(self.dim)
            .map(|(_, e)| {
                let direct = kraus
                    .iter()
                    .fold(DenseMatrix::zeros(self.dim, self.dim), |acc, k| acc + k.adjoint() * &e * k);
                let via = self.apply(&e).expect("dimension checked");
                hs_norm(&(direct - via))
            })
            .fold(0.0, f64::max)
    }

    fn check_dims(&self, sf: &StandardForm) -> Result<()> {
        if self.dim != sf.dim() {
            return Err(Error::DimensionMismatch {
                expected: sf.dim(),
                found: self.dim,
            });
        }
        Ok(())
    }
}

/// `sum_{ij} E_ij (x) tau(E_ij)`.
///
/// Commutant-side maps are read through the linear *-isomorphism
/// `M^op -> M, c -> c^T`, so the result decides complete positivity on
/// the side the map lives on.
pub fn choi(map: &QuantumMap) -> DenseMatrix {
    let n = map.dim;
    let mut out = DenseMatrix::zeros(n * n, n * n);
    for ((i, j), e) in matrix_units(n) {
        let block = match map.side {
            Side::Algebra => map.apply(&e).expect("dimension checked"),
            Side::Commutant => map.apply(&e.transpose()).expect("dimension checked").transpose(),
        };
        out.view_mut((i * n, j * n), (n, n)).copy_from(&block);
    }
    out
}

pub fn is_completely_positive(map: &QuantumMap, tol: &Tolerances) -> Result<bool> {
    psd_check(&choi(map), tol)
}

/// Matrix of `T: x zeta -> tau(x) zeta` on GNS vectors (row-major vectorized).
pub fn gns_operator(map: &QuantumMap, sf: &StandardForm) -> Result<DenseMatrix> {
    map.check_dims(sf)?;
    Ok(sf.embed_superop(map.side) * &map.superop * sf.unembed_superop(map.side))
}

/// The dual map on the other side, characterized by
/// `<c zeta, tau(x) zeta> = <tau'(c) zeta, x zeta>`.
///
/// Its GNS operator is the Hilbert-space adjoint of `T`. The dual of the dual
/// is the original map.
pub fn dual_map(map: &QuantumMap, sf: &StandardForm) -> Result<QuantumMap> {
    let t = gns_operator(map, sf)?;
    let other = map.side.flip();
    let superop = sf.unembed_superop(other) * t.adjoint() * sf.embed_superop(other);
    let st = sf.state();
    let kraus = map.kraus.as_ref().map(|ks| {
        ks.iter()
            .map(|k| st.sqrt() * k.adjoint() * st.inv_sqrt())
            .collect()
    });
    Ok(QuantumMap {
        dim: map.dim,
        superop,
        kraus,
        side: other,
    })
}

/// Max over matrix-unit pairs `(x, c)` of
/// `|<c zeta, tau(x) zeta> - <tau'(c) zeta, x zeta>|`.
///
/// `dual` is read on the side opposite to `map`.
pub fn adjoint_residual(map: &QuantumMap, dual: &QuantumMap, sf: &StandardForm) -> Result<f64> {
    map.check_dims(sf)?;
    dual.check_dims(sf)?;
    let here = map.side;
    let there = here.flip();
    let units: Vec<DenseMatrix> = matrix_units(sf.dim()).map(|(_, e)| e).collect();
    let images: Vec<DenseMatrix> = units
        .iter()
        .map(|x| sf.embed(here, &map.apply(x)?))
        .collect::<Result<_>>()?;
    let dual_images: Vec<DenseMatrix> = units
        .iter()
        .map(|c| sf.embed(there, &dual.apply(c)?))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for (x, tx) in units.iter().zip(&images) {
        let x_vec = sf.embed(here, x)?;
        for (c, dc) in units.iter().zip(&dual_images) {
            let c_vec = sf.embed(there, c)?;
            let lhs = crate::linalg::hs_inner(&c_vec, tx);
            let rhs = crate::linalg::hs_inner(dc, &x_vec);
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

/// `x -> (tau'(x*))*`, the dual transported back to the side of `map`.
pub fn tilde_map(map: &QuantumMap, sf: &StandardForm) -> Result<QuantumMap> {
    let dual = dual_map(map, sf)?;
    let p = transpose_permutation(map.dim);
    let superop = &p * dual.superop.map(|z| z.conj()) * &p;
    Ok(QuantumMap {
        dim: map.dim,
        superop,
        kraus: dual.kraus,
        side: map.side,
    })
}

/// Max HS deviation of `tilde` from `J tau'(J x J) J` on matrix units.
pub fn tilde_residual(map: &QuantumMap, tilde: &QuantumMap, sf: &StandardForm) -> Result<f64> {
    let dual = dual_map(map, sf)?;
    let mut worst = 0.0f64;
    for (_, x) in matrix_units(map.dim) {
        let direct = sf.modular_conj(&dual.apply(&sf.modular_conj(&x)?)?)?;
        worst = worst.max(hs_norm(&(direct - tilde.apply(&x)?)));
    }
    Ok(worst)
}

/// `-lambda_min(tau(x* x) - tau(x*) tau(x))`; nonpositive (up to `psd_floor`)
/// when the Kadison–Schwarz inequality holds at `x`.
///
/// On the commutant side products are reversed, giving
/// `-lambda_min(tau(x x*) - tau(x) tau(x*))`.
pub fn ks_residual(map: &QuantumMap, x: &DenseMatrix) -> Result<f64> {
    ensure_dim(x, map.dim)?;
    let xs = x.adjoint();
    let gap = match map.side {
        Side::Algebra => map.apply(&(&xs * x))? - map.apply(&xs)? * map.apply(x)?,
        Side::Commutant => map.apply(&(x * &xs))? - map.apply(x)? * map.apply(&xs)?,
    };
    Ok(-min_eigenvalue(&hermitian_part(&gap))?)
}

/// `max ||sigma_t(tau(x)) - tau(sigma_t(x))||_HS` over `t` and matrix units `x`.
pub fn modular_commutation_residual(map: &QuantumMap, sf: &StandardForm, t_list: &[f64]) -> Result<f64> {
    map.check_dims(sf)?;
    let mut worst = 0.0f64;
    for &t in t_list {
        for (_, x) in matrix_units(map.dim) {
            let a = sf.modular_group(&map.apply(&x)?, t)?;
            let b = map.apply(&sf.modular_group(&x, t)?)?;
            worst = worst.max(hs_norm(&(a - b)));
        }
    }
    Ok(worst)
}

/// Evidence for membership in the classes of subunital, subinvariant maps.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    /// Choi matrix is PSD.
    pub cp: bool,
    /// `tau(I) = I`.
    pub unital: bool,
    /// `tau(I) <= I`.
    pub subunital: bool,
    /// `phi o tau = phi`.
    pub invariant: bool,
    /// `phi o tau <= phi`.
    pub subinvariant: bool,
    /// `||T|| <= 1 + psd_floor`.
    pub l2_contraction: bool,
    /// Operator norm of the GNS operator.
    pub l2_norm: f64,
    /// CP, or every probe mapped a PSD input to a PSD output.
    pub positive: bool,
    /// Number of random PSD probes evaluated (0 when CP settled positivity).
    pub positivity_probes: usize,
    pub in_p_half: bool,
    pub ks_samples_passed: usize,
    pub ks_trials: usize,
    /// Largest sampled Kadison–Schwarz residual.
    pub ks_max_residual: f64,
}

impl ClassReport {
    /// Kadison–Schwarz held on every sample.
    pub fn ks_sampled(&self) -> bool {
        self.ks_samples_passed == self.ks_trials
    }

    /// The first failing hypothesis for membership, if any.
    pub fn p_half_failure(&self) -> Option<&'static str> {
        if !self.positive {
            Some("no positivity evidence")
        } else if !self.subunital {
            Some("not subunital")
        } else if !self.subinvariant {
            Some("not subinvariant")
        } else if !self.l2_contraction {
            Some("GNS operator is not a contraction")
        } else {
            None
        }
    }
}

/// Classify `map` against `state`, drawing `trials` positivity probes and
/// Kadison–Schwarz samples from the seeded stream.
pub fn classify(map: &QuantumMap, state: &State, trials: usize, seed: u64, tol: &Tolerances) -> Result<ClassReport> {
    if map.dim != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            found: map.dim,
        });
    }
    if state.min_eigenvalue() <= tol.psd_floor {
        return Err(Error::NotFaithful {
            min_eigenvalue: state.min_eigenvalue(),
        });
    }
    let sf = crate::standard_form::standard_form(state.clone(), tol)?;
    let n = map.dim;
    let id = identity(n);
    let t_one = map.apply(&id)?;
    let unital = max_abs(&(&t_one - &id)) <= tol.eq_rtol;
    let subunital = psd_check(&(&id - &t_one), tol)?;

    let rho = state.rho();
    let moved = map.predual(rho)?;
    let invariant = max_abs(&(rho - &moved)) <= tol.eq_rtol;
    let subinvariant = psd_check(&(rho - &moved), tol)?;

    let l2_norm = op_norm(&gns_operator(map, &sf)?)?;
    let l2_contraction = l2_norm <= 1.0 + tol.psd_floor;

    let cp = is_completely_positive(map, tol)?;
    let mut r = rng(seed);
    let (positive, positivity_probes) = if cp {
        (true, 0)
    } else {
        let mut ok = true;
        for k in 0..trials {
            // alternate rank-one and full-rank probes
            let p = if k % 2 == 0 {
                let v = random_unit_vector(&mut r, n);
                &v * v.adjoint()
            } else {
                random_psd(&mut r, n, n)
            };
            if !psd_check(&map.apply(&p)?, tol)? {
                ok = false;
                break;
            }
        }
        (ok && trials > 0, trials)
    };

    let mut ks_samples_passed = 0;
    let mut ks_max_residual = f64::NEG_INFINITY;
    for _ in 0..trials {
        let mut x = ginibre(&mut r, n, n);
        let scale = hs_norm(&x);
        x /= crate::linalg::c(scale, 0.0);
        let res = ks_residual(map, &x)?;
        ks_max_residual = ks_max_residual.max(res);
        if res <= tol.psd_floor {
            ks_samples_passed += 1;
        }
    }
    if trials == 0 {
        ks_max_residual = 0.0;
    }

    let in_p_half = subunital && subinvariant && l2_contraction && positive;
    Ok(ClassReport {
        cp,
        unital,
        subunital,
        invariant,
        subinvariant,
        l2_contraction,
        l2_norm,
        positive,
        positivity_probes,
        in_p_half,
        ks_samples_passed,
        ks_trials: trials,
        ks_max_residual,
    })
}

/// Deterministic membership gate for the subunital, subinvariant, positive
/// L2-contraction class.
///
/// Positivity is settled by the Choi matrix when the map is CP, otherwise by
/// the fixed rank-one probes `e_i`, `(e_i +- e_j)/sqrt 2`, `(e_i +- i e_j)/sqrt 2`.
pub fn ensure_p_half(map: &QuantumMap, sf: &StandardForm, tol: &Tolerances) -> Result<()> {
    map.check_dims(sf)?;
    let n = map.dim;
    let fail = |reason: &str| Err(Error::NotInPHalf { reason: reason.into() });
    if !is_completely_positive(map, tol)? {
        for v in rank_one_probes(n) {
            let p = &v * v.adjoint();
            if !psd_check(&map.apply(&p)?, tol)? {
                return fail("maps a positive probe outside the positive cone");
            }
        }
    }
    let id = identity(n);
    if !psd_check(&(&id - map.apply(&id)?), tol)? {
        return fail("not subunital");
    }
    let rho = sf.state().rho();
    if !psd_check(&(rho - map.predual(rho)?), tol)? {
        return fail("not subinvariant");
    }
    let norm = op_norm(&gns_operator(map, sf)?)?;
    if norm > 1.0 + tol.psd_floor {
        return fail(&format!("GNS operator norm {norm} exceeds 1"));
    }
    Ok(())
}

fn rank_one_probes(n: usize) -> Vec<crate::linalg::DenseVector> {
    use crate::linalg::{c, DenseVector};
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for i in 0..n {
        out.push(DenseVector::from_fn(n, |k, _| if k == i { c(1.0, 0.0) } else { c(0.0, 0.0) }));
        for j in i + 1..n {
            for phase in [c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)] {
                let mut v = DenseVector::zeros(n);
                v[i] = c(h, 0.0);
                v[j] = phase * h;
                out.push(v);
            }
        }
    }
    out
}

/// Random seeded probe used by property tests: Ginibre matrix of unit HS norm.
pub fn unit_probe<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DenseMatrix {
    let x = ginibre(rng, n, n);
    let s = hs_norm(&x);
    x.map(|z| z / s)
}
