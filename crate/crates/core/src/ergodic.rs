// Copyright 2026 vnerg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Cesàro averages, the mean ergodic projection and the conditional
//! expectation onto the fixed-point algebra.

use rayon::prelude::*;

use crate::algebra::{is_star_algebra, SubspaceBasis};
use crate::cp_maps::{dual_map, ensure_p_half, gns_operator, tilde_map, QuantumMap};
use crate::error::{Error, Result};
use crate::linalg::{
    c, ensure_dim, hermitian_part, hs_norm, identity, matrix_units, max_abs, null_space_scaled,
    op_norm, projector_from_basis, psd_check, solve, trace_norm, unvectorize, vectorize,
    DenseMatrix, Tolerances,
};
use crate::standard_form::{standard_form, Functional, Side, StandardForm, State};

/// `(sum_{k<n} A^k, A^n)` by binary doubling, `O(log n)` products.
fn power_sum(a: &DenseMatrix, n: u64) -> (DenseMatrix, DenseMatrix) {
    let d = a.nrows();
    if n == 0 {
        return (DenseMatrix::zeros(d, d), identity(d));
    }
    if n % 2 == 1 {
        let (s, p) = power_sum(a, n - 1);
        (identity(d) + a * s, a * p)
    } else {
        let (s, p) = power_sum(a, n / 2);
        let shifted = &p * &s;
        (s + shifted, &p * &p)
    }
}

/// `s_n(A) = (1/n) sum_{k<n} A^k` for a square matrix.
pub fn cesaro_average(a: &DenseMatrix, n: u64) -> Result<DenseMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("Cesàro index must be at least 1".into()));
    }
    crate::linalg::ensure_square(a)?;
    let (s, _) = power_sum(a, n);
    Ok(s.scale(1.0 / n as f64))
}

/// The map `s_n = (1/n) sum_{k<n} tau^k`; `s_1 = tau^0 = id`.
pub fn cesaro_map(map: &QuantumMap, n: u64) -> Result<QuantumMap> {
    let s = cesaro_average(map.superop(), n)?;
    Ok(QuantumMap::from_superop(s)?.with_side(map.side()))
}

/// Spectral projector of `S` at eigenvalue 1 along the other eigenspaces,
/// `V (W* V)^{-1} W*` with `V`, `W` spanning the fixed spaces of `S` and `S*`.
pub fn spectral_projector(s: &DenseMatrix, tol: &Tolerances) -> Result<DenseMatrix> {
    let d = crate::linalg::ensure_square(s)?;
    let id = identity(d);
    let v = null_space_scaled(&(s - &id), tol, 1.0)?;
    let w = null_space_scaled(&(s.adjoint() - &id), tol, 1.0)?;
    if v.len() != w.len() {
        return Err(Error::FixedSpaceMismatch {
            residual: (v.len() as f64 - w.len() as f64).abs(),
        });
    }
    if v.is_empty() {
        return Ok(DenseMatrix::zeros(d, d));
    }
    let vm = DenseMatrix::from_columns(&v);
    let wm = DenseMatrix::from_columns(&w);
    let gram = wm.adjoint() * &vm;
    let inv = solve(&gram, &identity(v.len())).ok_or(Error::SingularMatrix { min_eigenvalue: 0.0 })?;
    Ok(vm * inv * wm.adjoint())
}

/// Orthogonal projection onto `{f : T f = f}` for a contraction `T`.
///
/// The fixed spaces of `T` and `T*` are computed separately and must agree.
pub fn mean_projection(t: &DenseMatrix, tol: &Tolerances) -> Result<DenseMatrix> {
    let d = crate::linalg::ensure_square(t)?;
    let norm = op_norm(t)?;
    if norm > 1.0 + tol.psd_floor {
        return Err(Error::NotContraction { norm });
    }
    let id = identity(d);
    let fixed = null_space_scaled(&(t - &id), tol, 1.0)?;
    let co_fixed = null_space_scaled(&(t.adjoint() - &id), tol, 1.0)?;
    let p = projector_from_basis(&fixed, d);
    let q = projector_from_basis(&co_fixed, d);
    let residual = max_abs(&(&p - &q));
    if fixed.len() != co_fixed.len() || residual > tol.eq_rtol * 1e2 {
        return Err(Error::FixedSpaceMismatch { residual });
    }
    Ok(p)
}

/// `P`, `E` and `N` for a map in the subunital, subinvariant contraction class.
#[derive(Debug, Clone)]
pub struct ErgodicDecomposition {
    /// Orthogonal projection on GNS vectors onto the fixed space of `T`.
    pub p: DenseMatrix,
    /// `E(x) = P(x zeta)` read back in algebra coordinates.
    pub e: QuantumMap,
    /// HS-orthonormal basis of `{x : tau(x) = x}`.
    pub n: SubspaceBasis,
    pub fixed_dim: usize,
    /// `E(I) = I`.
    pub unital: bool,
    /// `max |E - V (W*V)^{-1} W*|` against the superoperator eigenprojection.
    pub spectral_residual: f64,
}

impl ErgodicDecomposition {
    /// `max(|P^2 - P|, |P - P*|)`.
    pub fn projection_residual(&self) -> f64 {
        max_abs(&(&self.p * &self.p - &self.p)).max(max_abs(&(&self.p - self.p.adjoint())))
    }

    /// `|E o E - E|`.
    pub fn idempotence_residual(&self) -> f64 {
        let s = self.e.superop();
        max_abs(&(s * s - s))
    }

    /// `max(|E o tau - E|, |tau o E - E|)`.
    pub fn intertwining_residual(&self, map: &QuantumMap) -> f64 {
        let e = self.e.superop();
        let t = map.superop();
        max_abs(&(e * t - e)).max(max_abs(&(t * e - e)))
    }

    /// `|E_*(rho) - rho|`.
    pub fn state_residual(&self, state: &State) -> Result<f64> {
        Ok(max_abs(&(self.e.predual(state.rho())? - state.rho())))
    }

    /// `max ||y E(x) z - E(y x z)||_HS` over `y, z` in the basis of `N` and matrix units `x`.
    pub fn bimodule_residual(&self) -> Result<f64> {
        let units: Vec<DenseMatrix> = matrix_units(self.e.dim()).map(|(_, e)| e).collect();
        let images: Vec<DenseMatrix> = units.iter().map(|x| self.e.apply(x)).collect::<Result<_>>()?;
        let mut worst = 0.0f64;
        for y in self.n.elements() {
            for z in self.n.elements() {
                for (x, ex) in units.iter().zip(&images) {
                    let lhs = y * ex * z;
                    let rhs = self.e.apply(&(y * x * z))?;
                    worst = worst.max(hs_norm(&(lhs - rhs)));
                }
            }
        }
        Ok(worst)
    }

    pub fn is_star_algebra(&self, tol: &Tolerances) -> Result<bool> {
        is_star_algebra(&self.n, tol)
    }
}

/// Build `P`, `E`, `N` for `map` and verify their defining relations.
pub fn conditional_expectation(map: &QuantumMap, state: &State, tol: &Tolerances) -> Result<ErgodicDecomposition> {
    let sf = standard_form(state.clone(), tol)?;
    decompose(map, &sf, tol)
}

/// [`conditional_expectation`] against an existing standard form.
pub fn decompose(map: &QuantumMap, sf: &StandardForm, tol: &Tolerances) -> Result<ErgodicDecomposition> {
    ensure_p_half(map, sf, tol)?;
    let t = gns_operator(map, sf)?;
    let p = mean_projection(&t, tol)?;
    let d = map.dim() * map.dim();
    let fixed = null_space_scaled(&(map.superop() - identity(d)), tol, 1.0)?;
    let n = SubspaceBasis::from_orthonormal_vectors(map.dim(), &fixed);
    let spectral = spectral_projector(map.superop(), tol)?;
    assemble(map.side(), sf, p, n, &spectral, tol)
}

/// Assemble `E` from the GNS projection `P` and verify the relations
/// between `P`, `E`, the fixed-point basis `n` and the superoperator
/// eigenprojection `spectral`.
pub(crate) fn assemble(
    side: Side,
    sf: &StandardForm,
    p: DenseMatrix,
    n: SubspaceBasis,
    spectral: &DenseMatrix,
    tol: &Tolerances,
) -> Result<ErgodicDecomposition> {
    let dim = sf.dim();
    let e_superop = sf.unembed_superop(side) * &p * sf.embed_superop(side);
    let e = QuantumMap::from_superop(e_superop)?.with_side(side);
    let fixed_dim = n.len();
    let rank_p = p.trace().re.round() as usize;
    if rank_p != fixed_dim {
        return Err(Error::Consistency(format!(
            "rank of P is {rank_p} but the fixed-point space has dimension {fixed_dim}"
        )));
    }

    let check = |name: &str, value: f64| -> Result<()> {
        if value > tol.eq_rtol {
            Err(Error::Consistency(format!("{name} residual {value:e}")))
        } else {
            Ok(())
        }
    };
    let pp = max_abs(&(&p * &p - &p)).max(max_abs(&(&p - p.adjoint())));
    check("P idempotence", pp)?;
    let es = e.superop();
    check("E idempotence", max_abs(&(es * es - es)))?;
    for (_, x) in matrix_units(dim) {
        let lhs = sf.embed(side, &e.apply(&x)?)?;
        let rhs = unvectorize(&(&p * vectorize(&sf.embed(side, &x)?)), dim);
        check("P x zeta = E(x) zeta", max_abs(&(lhs - rhs)))?;
    }
    for y in n.elements() {
        let v = vectorize(&sf.embed(side, y)?);
        check("range of P", (&p * &v - &v).norm())?;
    }
    let spectral_residual = max_abs(&(spectral - es));
    check("spectral projector", spectral_residual)?;

    let id = identity(dim);
    let unital = max_abs(&(e.apply(&id)? - &id)) <= tol.eq_rtol;
    let out = ErgodicDecomposition {
        p,
        e,
        n,
        fixed_dim,
        unital,
        spectral_residual,
    };
    if unital {
        check("bimodule", out.bimodule_residual()?)?;
        if !out.is_star_algebra(tol)? {
            return Err(Error::Consistency("fixed points of a unital map do not form a *-algebra".into()));
        }
    }
    Ok(out)
}

/// `||psi o m1 - psi o m2||`, the trace norm of `m1_*(sigma) - m2_*(sigma)`.
pub fn predual_distance(m1: &QuantumMap, m2: &QuantumMap, psi: &Functional) -> Result<f64> {
    if m1.dim() != m2.dim() {
        return Err(Error::DimensionMismatch {
            expected: m1.dim(),
            found: m2.dim(),
        });
    }
    ensure_dim(&psi.sigma, m1.dim())?;
    trace_norm(&(m1.predual(&psi.sigma)? - m2.predual(&psi.sigma)?))
}

/// `(n, ||psi o s_n - psi o E||)` for each `n`, in input order.
pub fn convergence_profile(
    map: &QuantumMap,
    state: &State,
    psi: &Functional,
    n_list: &[u64],
    tol: &Tolerances,
) -> Result<Vec<(u64, f64)>> {
    let dec = conditional_expectation(map, state, tol)?;
    profile_against(map, &dec.e, psi, n_list)
}

pub(crate) fn profile_against(map: &QuantumMap, e: &QuantumMap, psi: &Functional, n_list: &[u64]) -> Result<Vec<(u64, f64)>> {
    n_list
        .par_iter()
        .map(|&n| Ok((n, predual_distance(&cesaro_map(map, n)?, e, psi)?)))
        .collect()
}

/// `||s_n(T) - P||_op`.
pub fn cesaro_operator_gap(t: &DenseMatrix, p: &DenseMatrix, n: u64) -> Result<f64> {
    op_norm(&(cesaro_average(t, n)? - p))
}

/// Invariant density obtained by projecting `seed` onto the fixed space of the predual.
pub fn invariant_state(map: &QuantumMap, seed: &DenseMatrix, tol: &Tolerances) -> Result<DenseMatrix> {
    ensure_dim(seed, map.dim())?;
    let q = spectral_projector(&map.predual_superop(), tol)?;
    let rho = hermitian_part(&unvectorize(&(q * vectorize(seed)), map.dim()));
    let tr = rho.trace().re;
    if !(tr.is_finite() && tr > 0.0) {
        return Err(Error::NotInvariant { residual: tr });
    }
    let rho = rho.scale(1.0 / tr);
    if !psd_check(&rho, tol)? {
        return Err(Error::NotPsd {
            min_eigenvalue: crate::linalg::min_eigenvalue(&rho)?,
        });
    }
    Ok(rho)
}

/// Quantities in the dual-map Cauchy criterion for a finite sequence of maps.
#[derive(Debug, Clone)]
pub struct CauchyCertificate {
    /// Largest excess of `|psi_{c1,c2}(tau_n(x) - tau_m(x))|` over
    /// `||(tau'_n - tau'_m)(c1 c2*) zeta|| ||x||`; nonpositive when the bound holds.
    pub bound_violation: f64,
    /// `predual[i][j] = max_psi ||psi o tau_i - psi o tau_j||` over the battery.
    pub predual: Vec<Vec<f64>>,
    /// `gns[i][j] = max_f ||(T'_i - T'_j) f||` over the standard basis of GNS vectors.
    pub gns: Vec<Vec<f64>>,
}

impl CauchyCertificate {
    fn modulus(table: &[Vec<f64>], from: usize) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in table.iter().enumerate().skip(from) {
            for &v in row.iter().skip(from.max(i)) {
                worst = worst.max(v);
            }
        }
        worst
    }

    /// `max_{i, j >= from}` of the predual gaps.
    pub fn predual_modulus(&self, from: usize) -> f64 {
        Self::modulus(&self.predual, from)
    }

    pub fn gns_modulus(&self, from: usize) -> f64 {
        Self::modulus(&self.gns, from)
    }
}

/// Evaluate the dual-map bound on matrix-unit batteries and the pairwise
/// predual and GNS gaps of a sequence of maps.
///
/// The bound is checked for every pair of maps, all matrix units `x`, and all
/// commutant coordinates `c1, c2` among the matrix units.
pub fn cauchy_certificate(maps: &[QuantumMap], sf: &StandardForm, psi_battery: &[Functional]) -> Result<CauchyCertificate> {
    let tol = sf.tolerances();
    for m in maps {
        ensure_p_half(m, sf, tol)?;
    }
    let n = sf.dim();
    let duals: Vec<QuantumMap> = maps.iter().map(|m| dual_map(m, sf)).collect::<Result<_>>()?;
    let t_duals: Vec<DenseMatrix> = duals.iter().map(|d| gns_operator(d, sf)).collect::<Result<_>>()?;
    let units: Vec<DenseMatrix> = matrix_units(n).map(|(_, e)| e).collect();
    let k = maps.len();

    let rows: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..k)
        .into_par_iter()
        .map(|i| -> Result<(Vec<f64>, Vec<f64>, f64)> {
            let mut pre = vec![0.0; k];
            let mut gns = vec![0.0; k];
            let mut violation = f64::NEG_INFINITY;
            for j in 0..k {
                if i == j {
                    continue;
                }
                for psi in psi_battery {
                    pre[j] = f64::max(pre[j], predual_distance(&maps[i], &maps[j], psi)?);
                }
                let diff = &t_duals[i] - &t_duals[j];
                gns[j] = diff.column_iter().map(|col| col.norm()).fold(0.0, f64::max);
                if j < i {
                    continue;
                }
                let dmap = duals[i].linear_combination(1.0, &duals[j], -1.0)?;
                for c1 in &units {
                    for c2 in &units {
                        let psi = sf.vector_functional(c1, c2)?;
                        let coord = c1 * c2.adjoint();
                        let rhs = hs_norm(&sf.embed(dmap.side(), &dmap.apply(&coord)?)?);
                        for x in &units {
                            let lhs = psi.apply(&(maps[i].apply(x)? - maps[j].apply(x)?)).norm();
                            violation = violation.max(lhs - rhs * op_norm(x)?);
                        }
                    }
                }
            }
            Ok((pre, gns, violation))
        })
        .collect::<Result<_>>()?;

    let mut predual = Vec::with_capacity(k);
    let mut gns = Vec::with_capacity(k);
    let mut bound_violation = if k < 2 { 0.0 } else { f64::NEG_INFINITY };
    for (p, g, v) in rows {
        predual.push(p);
        gns.push(g);
        bound_violation = bound_violation.max(v);
    }
    Ok(CauchyCertificate {
        bound_violation,
        predual,
        gns,
    })
}

/// Terms of the modular converse estimate for `D = tau1 - tau2` at `x`.
#[derive(Debug, Clone, Copy)]
pub struct ConverseTerms {
    /// `||Delta^{1/4} D(x) zeta||^2`.
    pub lhs: f64,
    /// `psi_x(D~(D(x*)))`, which equals `lhs` exactly.
    pub pairing: f64,
    /// `||psi_x o D~||` with `psi_x = tr(rho^{1/2} x rho^{1/2} .)`.
    pub functional_norm: f64,
    /// `||x||`.
    pub x_norm: f64,
}

impl ConverseTerms {
    /// `2 ||x||^2 ||psi_x o D~||`.
    pub fn quadratic_bound(&self) -> f64 {
        2.0 * self.x_norm * self.x_norm * self.functional_norm
    }

    /// `2 ||x|| ||psi_x o D~||`, the bound that is homogeneous in `x`.
    pub fn linear_bound(&self) -> f64 {
        2.0 * self.x_norm * self.functional_norm
    }
}

pub fn converse_terms(tau1: &QuantumMap, tau2: &QuantumMap, sf: &StandardForm, x: &DenseMatrix) -> Result<ConverseTerms> {
    let st = sf.state();
    let d = tau1.linear_combination(1.0, tau2, -1.0)?;
    let dt = tilde_map(tau1, sf)?.linear_combination(1.0, &tilde_map(tau2, sf)?, -1.0)?;
    let dx = d.apply(x)?;
    let lhs = hs_norm(&(st.quarter() * &dx * st.quarter())).powi(2);
    let psi_x = Functional::new(st.sqrt() * x * st.sqrt());
    let pairing = psi_x.apply(&dt.apply(&d.apply(&x.adjoint())?)?);
    if pairing.im.abs() > 1e-8 * (1.0 + pairing.re.abs()) {
        return Err(Error::Consistency(format!("converse pairing is not real: {pairing}")));
    }
    let functional_norm = trace_norm(&dt.predual(&psi_x.sigma)?)?;
    Ok(ConverseTerms {
        lhs,
        pairing: pairing.re,
        functional_norm,
        x_norm: op_norm(x)?,
    })
}

/// The map `s_n` preserves membership and complete positivity.
pub fn cesaro_preserves_class(map: &QuantumMap, sf: &StandardForm, n: u64, tol: &Tolerances) -> Result<bool> {
    let s = cesaro_map(map, n)?;
    let cp_in = crate::cp_maps::is_completely_positive(map, tol)?;
    let cp_out = crate::cp_maps::is_completely_positive(&s, tol)?;
    Ok(ensure_p_half(&s, sf, tol).is_ok() && (!cp_in || cp_out))
}

/// Scale a matrix to unit operator norm.
pub fn normalize_op(x: &DenseMatrix) -> Result<DenseMatrix> {
    let n = op_norm(x)?;
    if n == 0.0 {
        return Err(Error::InvalidArgument("cannot normalize the zero matrix".into()));
    }
    Ok(x.map(|z| z / c(n, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, diag_real, matrix_unit, pauli, trace};
    use crate::random::{ginibre, haar_unitary, random_faithful_density, random_probabilities, rng};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn tracial_sf(n: usize) -> StandardForm {
        standard_form(State::tracial(n), &tol()).unwrap()
    }

    fn pinching() -> QuantumMap {
        let (_, _, sz) = pauli();
        QuantumMap::mixed_unitary(&[0.5, 0.5], &[identity(2), sz]).unwrap()
    }

    fn phase(theta: f64) -> QuantumMap {
        QuantumMap::unitary_conjugation(&diag(&[c(1.0, 0.0), c(theta.cos(), theta.sin())])).unwrap()
    }

    #[test]
    fn cesaro_examples() {
        let id = QuantumMap::identity(2);
        for n in [1, 2, 7, 1000] {
            let s = cesaro_map(&id, n).unwrap();
            assert!(max_abs(&(s.superop() - identity(4))) < 1e-12);
        }
        let p = pinching();
        let s2 = cesaro_map(&p, 2).unwrap();
        let expected = (identity(4) + p.superop()).scale(0.5);
        assert!(max_abs(&(s2.superop() - expected)) < 1e-14);

        let s3 = cesaro_map(&phase(2.0 * std::f64::consts::PI / 3.0), 3).unwrap();
        assert!(max_abs(&(s3.superop() - diag_real(&[1.0, 0.0, 0.0, 1.0]))) < 1e-14);
        assert!(cesaro_map(&id, 0).is_err());
    }

    #[test]
    fn doubling_matches_running_average() {
        let mut r = rng(1);
        let us: Vec<_> = (0..2).map(|_| haar_unitary(&mut r, 3)).collect();
        let m = QuantumMap::mixed_unitary(&[0.3, 0.7], &us).unwrap();
        let mut acc = DenseMatrix::zeros(9, 9);
        let mut power = identity(9);
        for n in 1..=37u64 {
            acc += &power;
            power = m.superop() * power;
            let fast = cesaro_average(m.superop(), n).unwrap();
            assert!(max_abs(&(fast - acc.scale(1.0 / n as f64))) < 1e-13);
        }
    }

    #[test]
    fn mean_projection_examples() {
        assert!(max_abs(&(mean_projection(&identity(4), &tol()).unwrap() - identity(4))) < 1e-14);
        let sf = tracial_sf(2);
        let zeta = vectorize(sf.cyclic_vector());
        let rank_one = &zeta * zeta.adjoint();
        assert!(max_abs(&(mean_projection(&rank_one, &tol()).unwrap() - &rank_one)) < 1e-13);
        let ad = QuantumMap::unitary_conjugation(&diag(&[c(1.0, 0.0), c(0.0, 1.0)])).unwrap();
        let p = mean_projection(&gns_operator(&ad, &sf).unwrap(), &tol()).unwrap();
        assert!(max_abs(&(p - diag_real(&[1.0, 0.0, 0.0, 1.0]))) < 1e-13);
        assert!(matches!(
            mean_projection(&identity(4).scale(1.1), &tol()),
            Err(Error::NotContraction { .. })
        ));
    }

    #[test]
    fn conditional_expectation_examples() {
        let tr = State::tracial(2);
        let dec = conditional_expectation(&pinching(), &tr, &tol()).unwrap();
        assert_eq!(dec.fixed_dim, 2);
        assert!(max_abs(&(dec.e.superop() - pinching().superop())) < 1e-13);

        let cond = QuantumMap::from_fn(2, |x| identity(2) * trace(x) * c(0.5, 0.0)).unwrap();
        let dec = conditional_expectation(&cond, &tr, &tol()).unwrap();
        assert_eq!(dec.fixed_dim, 1);
        assert!(max_abs(&(dec.e.superop() - cond.superop())) < 1e-13);

        let (sx, _, _) = pauli();
        let ad = QuantumMap::unitary_conjugation(&sx).unwrap();
        let dec = conditional_expectation(&ad, &tr, &tol()).unwrap();
        assert_eq!(dec.fixed_dim, 2);
        assert!(dec.n.contains(&identity(2), &tol()).unwrap());
        assert!(dec.n.contains(&sx, &tol()).unwrap());
        let x = ginibre(&mut rng(2), 2, 2);
        let proj = crate::algebra::hs_project(&x, &dec.n).unwrap();
        assert!(max_abs(&(dec.e.apply(&x).unwrap() - proj)) < 1e-13);
    }

    #[test]
    fn conditional_expectation_rejects_outside_class() {
        let big = QuantumMap::identity(2).linear_combination(1.5, &QuantumMap::identity(2), 0.0).unwrap();
        assert!(matches!(
            conditional_expectation(&big, &State::tracial(2), &tol()),
            Err(Error::NotInPHalf { .. })
        ));
    }

    #[test]
    fn unit_preservation_iff_unital() {
        let tr = State::tracial(2);
        let dec = conditional_expectation(&pinching(), &tr, &tol()).unwrap();
        assert!(dec.unital);
        // compression to the first coordinate: strictly subunital with a fixed point
        let e11 = matrix_unit(2, 0, 0);
        let comp = QuantumMap::from_kraus(vec![e11.clone()]).unwrap();
        let dec = conditional_expectation(&comp, &tr, &tol()).unwrap();
        assert!(!dec.unital);
        assert_eq!(dec.fixed_dim, 1);
        assert!(max_abs(&(dec.e.apply(&identity(2)).unwrap() - e11)) < 1e-13);
    }

    #[test]
    fn non_tracial_decomposition() {
        let mut r = rng(3);
        // block-diagonal unitaries on C^2 (+) C^1 keep block states invariant
        let mut us = Vec::new();
        for _ in 0..3 {
            let mut u = DenseMatrix::zeros(3, 3);
            u.view_mut((0, 0), (2, 2)).copy_from(&haar_unitary(&mut r, 2));
            u[(2, 2)] = c(0.0, 1.0);
            us.push(u);
        }
        let p = random_probabilities(&mut r, 3);
        let m = QuantumMap::mixed_unitary(&p, &us).unwrap();
        let rho = invariant_state(&m, &random_faithful_density(&mut r, 3, 0.3), &tol()).unwrap();
        let st = State::new(rho, &tol()).unwrap();
        let dec = conditional_expectation(&m, &st, &tol()).unwrap();
        assert_eq!(dec.fixed_dim, 2);
        assert!(dec.state_residual(&st).unwrap() < 1e-10);
        assert!(dec.intertwining_residual(&m) < 1e-10);
        assert!(dec.bimodule_residual().unwrap() < 1e-10);
    }

    #[test]
    fn fixed_dimension_stable_under_threshold_changes() {
        let mut r = rng(4);
        let us: Vec<_> = (0..3).map(|_| haar_unitary(&mut r, 3)).collect();
        let m = QuantumMap::mixed_unitary(&random_probabilities(&mut r, 3), &us).unwrap();
        let st = State::tracial(3);
        let base = conditional_expectation(&m, &st, &tol()).unwrap().fixed_dim;
        for factor in [0.5, 2.0] {
            let t = Tolerances {
                nullspace_rel: tol().nullspace_rel * factor,
                ..tol()
            };
            assert_eq!(conditional_expectation(&m, &st, &t).unwrap().fixed_dim, base);
        }
    }

    #[test]
    fn predual_distance_examples() {
        let id = QuantumMap::identity(2);
        let psi = Functional::new(matrix_unit(2, 0, 0));
        assert_eq!(predual_distance(&id, &id, &psi).unwrap(), 0.0);
        let (sx, _, _) = pauli();
        let ad = QuantumMap::unitary_conjugation(&sx).unwrap();
        assert!((predual_distance(&id, &ad, &psi).unwrap() - 2.0).abs() < 1e-12);

        let mut r = rng(5);
        for _ in 0..10 {
            let us: Vec<_> = (0..2).map(|_| haar_unitary(&mut r, 3)).collect();
            let a = QuantumMap::mixed_unitary(&[0.5, 0.5], &us).unwrap();
            let b = QuantumMap::unitary_conjugation(&haar_unitary(&mut r, 3)).unwrap();
            let psi = Functional::new(ginibre(&mut r, 3, 3));
            let d = predual_distance(&a, &b, &psi).unwrap();
            assert!(d <= 2.0 * psi.norm().unwrap() + 1e-12);
            assert!((d - predual_distance(&b, &a, &psi).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn profile_examples() {
        let tr = State::tracial(2);
        let psi = Functional::new(matrix_unit(2, 1, 0));
        let dec = conditional_expectation(&pinching(), &tr, &tol()).unwrap();
        // tau = E after one step; s_n = (1/n) id + (1 - 1/n) E
        let prof = convergence_profile(&pinching(), &tr, &psi, &[1, 2, 10], &tol()).unwrap();
        for (n, v) in prof {
            let expected = predual_distance(&QuantumMap::identity(2), &dec.e, &psi).unwrap() / n as f64;
            assert!((v - expected).abs() < 1e-12);
        }
        let m = phase(2.0 * std::f64::consts::PI / 3.0);
        let prof = convergence_profile(&m, &tr, &psi, &[3, 6, 9, 300], &tol()).unwrap();
        assert!(prof.iter().all(|&(_, v)| v < 1e-12));
        // the sum starts at tau^0, so even tau = E only vanishes in the limit
        let idem = conditional_expectation(&pinching(), &tr, &tol()).unwrap().e;
        let prof = convergence_profile(&idem, &tr, &psi, &[1, 5], &tol()).unwrap();
        let d1 = prof[0].1;
        assert!(d1 > 0.5);
        assert!((prof[1].1 - d1 / 5.0).abs() < 1e-12);
    }

    #[test]
    fn cauchy_certificate_constant_sequence() {
        let sf = tracial_sf(2);
        let maps = vec![pinching(), pinching(), pinching()];
        let psi: Vec<Functional> = matrix_units(2).map(|(_, e)| Functional::new(e)).collect();
        let cert = cauchy_certificate(&maps, &sf, &psi).unwrap();
        assert_eq!(cert.predual_modulus(0), 0.0);
        assert_eq!(cert.gns_modulus(0), 0.0);
        assert!(cert.bound_violation <= 1e-12);
    }

    #[test]
    fn converse_pairing_identity() {
        let mut r = rng(6);
        let st = State::new(random_faithful_density(&mut r, 3, 0.2), &tol()).unwrap();
        let sf = standard_form(st, &tol()).unwrap();
        for _ in 0..5 {
            let us: Vec<_> = (0..2).map(|_| haar_unitary(&mut r, 3)).collect();
            let a = QuantumMap::mixed_unitary(&[0.4, 0.6], &us).unwrap();
            let b = QuantumMap::unitary_conjugation(&haar_unitary(&mut r, 3)).unwrap();
            let x = normalize_op(&ginibre(&mut r, 3, 3)).unwrap();
            let terms = converse_terms(&a, &b, &sf, &x).unwrap();
            assert!((terms.lhs - terms.pairing).abs() < 1e-10 * (1.0 + terms.lhs));
        }
    }

    #[test]
    fn cesaro_members_stay_in_class() {
        let mut r = rng(7);
        let sf = tracial_sf(3);
        let us: Vec<_> = (0..2).map(|_| haar_unitary(&mut r, 3)).collect();
        let m = QuantumMap::mixed_unitary(&[0.2, 0.8], &us).unwrap();
        for n in [1, 2, 5, 50] {
            assert!(cesaro_preserves_class(&m, &sf, n, &tol()).unwrap());
        }
    }
}
