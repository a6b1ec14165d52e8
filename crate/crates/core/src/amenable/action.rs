// Copyright 2026 vnerg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Unitary actions `alpha_g = Ad(u_g)` of discrete groups, Følner averages
//! and the conditional expectation onto the fixed-point algebra.

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use super::folner::{FolnerSequence, FolnerSet, SetLimits};
use super::group::{DiscreteGroup, Element};
use crate::algebra::commutant;
use crate::cp_maps::{gns_operator, QuantumMap};
use crate::ergodic::{assemble, predual_distance, spectral_projector, ErgodicDecomposition};
use crate::error::{Error, Result};
use crate::linalg::{
    commutator, ensure_dim, ensure_finite, identity, max_abs, null_space_scaled, pairwise_sum, projector_from_basis,
    sandwich_superop, vstack, DenseMatrix, Tolerances,
};
use crate::standard_form::{standard_form, Functional, Side, StandardForm, State};

/// Terms summed sequentially inside one parallel chunk of a group average.
const CHUNK: usize = 512;

/// Homomorphism `g -> u_g` into the unitaries of `M_n`, fixed by generator images.
#[derive(Debug, Clone)]
pub struct UnitaryAction {
    group: DiscreteGroup,
    dim: usize,
    generators: Vec<DenseMatrix>,
    /// `u_g` for every element of a table group, indexed by element.
    table_images: Vec<DenseMatrix>,
}

/// Validate generator unitaries against the group relations and the
/// invariance `[u_s, rho] = 0` of the state.
pub fn build_action(
    group: DiscreteGroup,
    generator_unitaries: Vec<DenseMatrix>,
    state: &State,
    tol: &Tolerances,
) -> Result<UnitaryAction> {
    let expected = group.generators().len();
    if generator_unitaries.len() != expected {
        return Err(Error::InvalidArgument(format!(
            "{} has {expected} generators but {} unitaries were given",
            group.name(),
            generator_unitaries.len()
        )));
    }
    let n = state.dim();
    let id = identity(n);
    for (i, u) in generator_unitaries.iter().enumerate() {
        ensure_dim(u, n)?;
        ensure_finite(u)?;
        let r = max_abs(&(u.adjoint() * u - &id)).max(max_abs(&(u * u.adjoint() - &id)));
        if r > tol.eq_rtol {
            return Err(Error::GroupRelationViolated {
                relation: format!("generator {i} is not unitary"),
                residual: r,
            });
        }
    }
    let relation = |name: String, residual: f64| -> Result<()> {
        if residual > tol.eq_rtol {
            Err(Error::GroupRelationViolated { relation: name, residual })
        } else {
            Ok(())
        }
    };
    let u = &generator_unitaries;
    let mut table_images = Vec::new();
    match &group {
        DiscreteGroup::Zd(d) => {
            for i in 0..*d {
                for j in i + 1..*d {
                    relation(format!("u_{i} u_{j} = u_{j} u_{i}"), max_abs(&commutator(&u[i], &u[j])))?;
                }
            }
        }
        DiscreteGroup::Heisenberg3 => {
            let (x, y, z) = (&u[0], &u[1], &u[2]);
            relation("xy = yxz".into(), max_abs(&(x * y - y * x * z)))?;
            relation("xz = zx".into(), max_abs(&commutator(x, z)))?;
            relation("yz = zy".into(), max_abs(&commutator(y, z)))?;
        }
        DiscreteGroup::Cyclic(m) => {
            relation(format!("u^{m} = 1"), max_abs(&(power(&u[0], *m as i64) - &id)))?;
        }
        DiscreteGroup::Table(t) => {
            table_images = table_unitaries(&group, u, n)?;
            for a in 0..t.table.len() {
                for b in 0..t.table.len() {
                    let ab = t.table[a][b];
                    let r = max_abs(&(&table_images[a] * &table_images[b] - &table_images[ab]));
                    relation(format!("u_{a} u_{b} = u_{ab}"), r)?;
                }
            }
        }
    }
    for s in u {
        let r = max_abs(&commutator(s, state.rho()));
        if r > tol.eq_rtol {
            return Err(Error::NotInvariant { residual: r });
        }
    }
    Ok(UnitaryAction {
        group,
        dim: n,
        generators: generator_unitaries,
        table_images,
    })
}

/// Images of all table elements along breadth-first words in the generators.
fn table_unitaries(group: &DiscreteGroup, gens: &[DenseMatrix], n: usize) -> Result<Vec<DenseMatrix>> {
    let DiscreteGroup::Table(t) = group else {
        unreachable!("only called for table groups")
    };
    let order = t.table.len();
    let mut images: Vec<Option<DenseMatrix>> = vec![None; order];
    images[t.identity] = Some(identity(n));
    let mut frontier = vec![t.identity];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &a in &frontier {
            for (s, us) in t.generators.iter().zip(gens) {
                let b = t.table[a][*s];
                if images[b].is_none() {
                    images[b] = Some(images[a].as_ref().expect("frontier has images") * us);
                    next.push(b);
                }
            }
        }
        frontier = next;
    }
    images
        .into_iter()
        .map(|m| m.ok_or_else(|| Error::UnsupportedGroup(format!("generators of {} do not generate the group", t.name))))
        .collect()
}

/// `u^k` by repeated squaring; negative `k` uses `u*`.
fn power(u: &DenseMatrix, k: i64) -> DenseMatrix {
    let mut base = if k < 0 { u.adjoint() } else { u.clone() };
    let mut e = k.unsigned_abs();
    let mut acc = identity(u.nrows());
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

impl UnitaryAction {
    pub fn group(&self) -> &DiscreteGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[DenseMatrix] {
        &self.generators
    }

    /// `u_g` from the canonical word: `u_1^{a_1} ... u_d^{a_d}` in `Z^d`,
    /// `x^a y^b z^c` in the Heisenberg group.
    pub fn unitary(&self, g: &Element) -> DenseMatrix {
        match &self.group {
            DiscreteGroup::Zd(d) => (0..*d).fold(identity(self.dim), |acc, i| acc * power(&self.generators[i], g[i])),
            DiscreteGroup::Heisenberg3 => {
                power(&self.generators[0], g[0]) * power(&self.generators[1], g[1]) * power(&self.generators[2], g[2])
            }
            DiscreteGroup::Cyclic(_) => power(&self.generators[0], g[0]),
            DiscreteGroup::Table(_) => self.table_images[g[0] as usize].clone(),
        }
    }

    /// `alpha_g = Ad(u_g)` as a map.
    pub fn automorphism(&self, g: &Element) -> Result<QuantumMap> {
        QuantumMap::unitary_conjugation(&self.unitary(g))
    }
}

/// Sum of `f(g)` over `F` in a fixed reduction order, parallel across chunks.
fn ordered_sum(f_set: &FolnerSet, rows: usize, cols: usize, f: impl Fn(&Element) -> DenseMatrix + Sync) -> DenseMatrix {
    let partial: Vec<DenseMatrix> = f_set
        .elements()
        .par_chunks(CHUNK)
        .map(|chunk| pairwise_sum(chunk.iter().map(&f).collect(), rows, cols))
        .collect();
    pairwise_sum(partial, rows, cols)
}

/// `(1/|F|) sum_{g in F} u_g x u_g*`.
pub fn group_average(action: &UnitaryAction, f_set: &FolnerSet, x: &DenseMatrix) -> Result<DenseMatrix> {
    ensure_dim(x, action.dim)?;
    let n = action.dim;
    let sum = ordered_sum(f_set, n, n, |g| {
        let u = action.unitary(g);
        &u * x * u.adjoint()
    });
    Ok(sum.scale(1.0 / f_set.len() as f64))
}

/// The mixed-unitary map `x -> group_average(action, F, x)`.
pub fn average_map(action: &UnitaryAction, f_set: &FolnerSet) -> Result<QuantumMap> {
    let d = action.dim * action.dim;
    let sum = ordered_sum(f_set, d, d, |g| {
        let u = action.unitary(g);
        sandwich_superop(&u, &u.adjoint())
    });
    QuantumMap::from_superop(sum.scale(1.0 / f_set.len() as f64))
}

/// Conditional expectation onto `N = {x : alpha_g(x) = x for all g}`.
///
/// `N` is the commutant of the generator unitaries and `P` the joint
/// null space of `U_s - I` over generators, where `U_s` is `Ad(u_s)` on GNS
/// vectors. Both are cross-checked against the eigenvalue-1 projection of the
/// mean of the generator automorphisms.
pub fn invariant_expectation(action: &UnitaryAction, state: &State, tol: &Tolerances) -> Result<ErgodicDecomposition> {
    if state.dim() != action.dim {
        return Err(Error::DimensionMismatch {
            expected: action.dim,
            found: state.dim(),
        });
    }
    for s in &action.generators {
        let r = max_abs(&commutator(s, state.rho()));
        if r > tol.eq_rtol {
            return Err(Error::NotInvariant { residual: r });
        }
    }
    let sf = standard_form(state.clone(), tol)?;
    let n = action.dim;
    let d = n * n;
    let n_basis = commutant(n, &action.generators, tol)?;
    let maps = action
        .generators
        .iter()
        .map(QuantumMap::unitary_conjugation)
        .collect::<Result<Vec<_>>>()?;
    let p = if maps.is_empty() {
        identity(d)
    } else {
        let blocks = maps
            .iter()
            .map(|m| Ok(gns_operator(m, &sf)? - identity(d)))
            .collect::<Result<Vec<_>>>()?;
        projector_from_basis(&null_space_scaled(&vstack(&blocks), tol, 1.0)?, d)
    };
    let mean = if maps.is_empty() {
        identity(d)
    } else {
        maps.iter()
            .fold(DenseMatrix::zeros(d, d), |acc, m| acc + m.superop())
            .scale(1.0 / maps.len() as f64)
    };
    let spectral = spectral_projector(&mean, tol)?;
    assemble(Side::Algebra, &sf, p, n_basis, &spectral, tol)
}

/// `(n, ||psi o s(F_n) - psi o E||)` for each `n` against a precomputed `E`.
pub fn folner_profile_against(
    action: &UnitaryAction,
    e: &QuantumMap,
    seq: &FolnerSequence,
    psi: &Functional,
    n_list: &[u64],
    limits: &SetLimits,
) -> Result<Vec<(u64, f64)>> {
    if seq.group != action.group {
        return Err(Error::InvalidArgument("Følner sequence and action live on different groups".into()));
    }
    n_list
        .par_iter()
        .map(|&n| {
            let f = seq.set(n, limits)?;
            Ok((n, predual_distance(&average_map(action, &f)?, e, psi)?))
        })
        .collect()
}

/// Følner-average convergence profile `||psi o s(F_n) - psi o E||`.
///
/// Temperedness of `seq` is not required here; audit it separately with
/// [`super::tempered_constant`].
pub fn folner_profile(
    action: &UnitaryAction,
    seq: &FolnerSequence,
    state: &State,
    psi: &Functional,
    n_list: &[u64],
    limits: &SetLimits,
    tol: &Tolerances,
) -> Result<Vec<(u64, f64)>> {
    let dec = invariant_expectation(action, state, tol)?;
    folner_profile_against(action, &dec.e, seq, psi, n_list, limits)
}

/// `max_f ||s(F) f - P f||` over the standard basis `f` of GNS vectors.
pub fn gns_average_gap(action: &UnitaryAction, sf: &StandardForm, f_set: &FolnerSet, p: &DenseMatrix) -> Result<f64> {
    let t = gns_operator(&average_map(action, f_set)?, sf)?;
    let diff = t - p;
    Ok(diff.column_iter().map(|c| c.norm()).fold(0.0, f64::max))
}

/// `u_g` for every element of `F`, keyed by element; for inspection and tests.
pub fn unitaries_on(action: &UnitaryAction, f_set: &FolnerSet) -> FxHashMap<Element, DenseMatrix> {
    f_set.elements().iter().map(|g| (*g, action.unitary(g))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amenable::folner::{folner_boxes, FolnerKind};
    use crate::amenable::group::CayleyTable;
    use crate::cp_maps::{classify, is_completely_positive};
    use crate::linalg::{c, diag, diag_real, matrix_unit, pauli, C64};
    use crate::random::{ginibre, rng};
    use std::f64::consts::PI;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn lim() -> SetLimits {
        SetLimits::default()
    }

    fn z2_diag() -> UnitaryAction {
        let u1 = diag_real(&[1.0, -1.0]);
        let u2 = diag(&[c(1.0, 0.0), c(0.0, 1.0)]);
        build_action(DiscreteGroup::Zd(2), vec![u1, u2], &State::tracial(2), &tol()).unwrap()
    }

    /// Shift `X e_j = e_{j+1}`, clock `Z e_j = w^j e_j`, centre `w^{-1} I` on `C^3`.
    fn clock_shift() -> Vec<DenseMatrix> {
        let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
        let mut x = DenseMatrix::zeros(3, 3);
        for j in 0..3 {
            x[((j + 1) % 3, j)] = c(1.0, 0.0);
        }
        let z = diag(&[w.powi(0), w.powi(1), w.powi(2)]);
        let centre = identity(3) * w.powi(-1);
        vec![x, z, centre]
    }

    #[test]
    fn build_action_examples() {
        let a = z2_diag();
        assert_eq!(a.generators().len(), 2);
        let (sx, _, _) = pauli();
        let rho = diag_real(&[2.0 / 3.0, 1.0 / 3.0]);
        let st = State::new(rho, &tol()).unwrap();
        assert!(matches!(
            build_action(DiscreteGroup::Zd(1), vec![sx.clone()], &st, &tol()),
            Err(Error::NotInvariant { .. })
        ));
        let h = build_action(DiscreteGroup::Heisenberg3, clock_shift(), &State::tracial(3), &tol()).unwrap();
        assert_eq!(h.dim(), 3);
        // swapping x and y breaks xy = yxz
        let mut bad = clock_shift();
        bad.swap(0, 1);
        assert!(matches!(
            build_action(DiscreteGroup::Heisenberg3, bad, &State::tracial(3), &tol()),
            Err(Error::GroupRelationViolated { .. })
        ));
        assert!(build_action(DiscreteGroup::Zd(2), vec![sx], &State::tracial(2), &tol()).is_err());
        let (_, sy, sz) = pauli();
        assert!(matches!(
            build_action(DiscreteGroup::Zd(2), vec![sy, sz], &State::tracial(2), &tol()),
            Err(Error::GroupRelationViolated { .. })
        ));
        let not_unitary = diag_real(&[1.0, 2.0]);
        assert!(build_action(DiscreteGroup::Zd(1), vec![not_unitary], &State::tracial(2), &tol()).is_err());
    }

    #[test]
    fn cyclic_and_table_actions() {
        let (_, _, sz) = pauli();
        assert!(build_action(DiscreteGroup::Cyclic(2), vec![sz.clone()], &State::tracial(2), &tol()).is_ok());
        assert!(matches!(
            build_action(DiscreteGroup::Cyclic(3), vec![sz.clone()], &State::tracial(2), &tol()),
            Err(Error::GroupRelationViolated { .. })
        ));
        let z2 = CayleyTable {
            name: "Z2".into(),
            table: vec![vec![0, 1], vec![1, 0]],
            identity: 0,
            generators: vec![1],
        };
        let g = DiscreteGroup::table(z2).unwrap();
        let a = build_action(g.clone(), vec![sz.clone()], &State::tracial(2), &tol()).unwrap();
        assert!(max_abs(&(a.unitary(&[1, 0, 0, 0]) - &sz)) < 1e-15);
        let i_diag = diag(&[c(1.0, 0.0), c(0.0, 1.0)]);
        assert!(build_action(g, vec![i_diag], &State::tracial(2), &tol()).is_err());
    }

    #[test]
    fn unitary_is_a_homomorphism() {
        let h = build_action(DiscreteGroup::Heisenberg3, clock_shift(), &State::tracial(3), &tol()).unwrap();
        let group = h.group().clone();
        let words = group.words(3);
        for g in words.iter().step_by(7) {
            for k in words.iter().step_by(5) {
                let lhs = h.unitary(&group.mul(g, k));
                let rhs = h.unitary(g) * h.unitary(k);
                assert!(max_abs(&(lhs - rhs)) < 1e-12);
            }
        }
    }

    #[test]
    fn group_average_examples() {
        let a = z2_diag();
        let f = folner_boxes(&DiscreteGroup::Zd(2), 2, &lim()).unwrap();
        let avg = group_average(&a, &f, &identity(2)).unwrap();
        assert!(max_abs(&(avg - identity(2))) < 1e-14);

        let trivial = build_action(DiscreteGroup::Zd(2), vec![identity(2), identity(2)], &State::tracial(2), &tol()).unwrap();
        let x = ginibre(&mut rng(4), 2, 2);
        assert!(max_abs(&(group_average(&trivial, &f, &x).unwrap() - &x)) < 1e-14);

        let one = build_action(DiscreteGroup::Zd(1), vec![diag_real(&[1.0, -1.0])], &State::tracial(2), &tol()).unwrap();
        let f01 = FolnerSet::new(vec![[0, 0, 0, 0], [1, 0, 0, 0]]).unwrap();
        let e12 = matrix_unit(2, 0, 1);
        assert!(max_abs(&group_average(&one, &f01, &e12).unwrap()) < 1e-15);

        let m = average_map(&a, &f).unwrap();
        assert!(max_abs(&(m.apply(&x).unwrap() - group_average(&a, &f, &x).unwrap())) < 1e-13);
        assert!(is_completely_positive(&m, &tol()).unwrap());
        let rep = classify(&m, &State::tracial(2), 10, 5, &tol()).unwrap();
        assert!(rep.unital && rep.invariant && rep.in_p_half);
    }

    #[test]
    fn expectation_examples() {
        let trivial = build_action(DiscreteGroup::Zd(1), vec![identity(2)], &State::tracial(2), &tol()).unwrap();
        let dec = invariant_expectation(&trivial, &State::tracial(2), &tol()).unwrap();
        assert!(max_abs(&(dec.e.superop() - identity(4))) < 1e-12);

        let dec = invariant_expectation(&z2_diag(), &State::tracial(2), &tol()).unwrap();
        assert_eq!(dec.fixed_dim, 2);
        let (_, _, sz) = pauli();
        let pinch = QuantumMap::mixed_unitary(&[0.5, 0.5], &[identity(2), sz]).unwrap();
        assert!(max_abs(&(dec.e.superop() - pinch.superop())) < 1e-12);

        let h = build_action(DiscreteGroup::Heisenberg3, clock_shift(), &State::tracial(3), &tol()).unwrap();
        let dec = invariant_expectation(&h, &State::tracial(3), &tol()).unwrap();
        assert_eq!(dec.fixed_dim, 1);
        let x = ginibre(&mut rng(5), 3, 3);
        let expected = identity(3) * State::tracial(3).expectation(&x);
        assert!(max_abs(&(dec.e.apply(&x).unwrap() - expected)) < 1e-12);
    }

    /// Dirichlet kernel `sum_{|k| <= n} e^{ik theta}`.
    fn dirichlet(n: u64, theta: f64) -> f64 {
        let n = n as f64;
        if (theta / 2.0).sin().abs() < 1e-15 {
            return 2.0 * n + 1.0;
        }
        ((n + 0.5) * theta).sin() / (theta / 2.0).sin()
    }

    #[test]
    fn profile_matches_dirichlet_kernel() {
        let theta = 2.0 * PI / 5.0;
        let u = diag(&[c(1.0, 0.0), C64::from_polar(1.0, theta)]);
        let a = build_action(DiscreteGroup::Zd(1), vec![u], &State::tracial(2), &tol()).unwrap();
        let seq = FolnerSequence::new(DiscreteGroup::Zd(1), FolnerKind::Boxes);
        let psi = Functional::new(matrix_unit(2, 0, 1));
        let ns: Vec<u64> = (1..=12).collect();
        let prof = folner_profile(&a, &seq, &State::tracial(2), &psi, &ns, &lim(), &tol()).unwrap();
        for (n, v) in prof {
            let expected = dirichlet(n, theta).abs() / (2 * n + 1) as f64;
            assert!((v - expected).abs() < 1e-12, "n={n}: {v} vs {expected}");
        }

        let seq2 = FolnerSequence::new(DiscreteGroup::Zd(2), FolnerKind::Boxes);
        let prof = folner_profile(&z2_diag(), &seq2, &State::tracial(2), &psi, &[1, 4, 9], &lim(), &tol()).unwrap();
        for (n, v) in prof {
            let m = (2 * n + 1) as f64;
            let expected = (dirichlet(n, PI) * dirichlet(n, PI / 2.0)).abs() / (m * m);
            assert!((v - expected).abs() < 1e-12);
        }

        let trivial = build_action(DiscreteGroup::Zd(1), vec![identity(2)], &State::tracial(2), &tol()).unwrap();
        let prof = folner_profile(&trivial, &seq, &State::tracial(2), &psi, &[1, 3], &lim(), &tol()).unwrap();
        assert!(prof.iter().all(|(_, v)| *v < 1e-14));
    }

    #[test]
    fn inversion_consistency() {
        let h = build_action(DiscreteGroup::Heisenberg3, clock_shift(), &State::tracial(3), &tol()).unwrap();
        let sf = standard_form(State::tracial(3), &tol()).unwrap();
        let f = folner_boxes(&DiscreteGroup::Heisenberg3, 1, &lim()).unwrap();
        let forward = gns_operator(&average_map(&h, &f).unwrap(), &sf).unwrap();
        let backward = gns_operator(&average_map(&h, &f.inverse(h.group())).unwrap(), &sf).unwrap();
        assert!(max_abs(&(forward.adjoint() - backward)) < 1e-12);
    }

    #[test]
    fn gns_gap_shrinks() {
        let a = z2_diag();
        let st = State::tracial(2);
        let sf = standard_form(st.clone(), &tol()).unwrap();
        let dec = invariant_expectation(&a, &st, &tol()).unwrap();
        let gap = |n| gns_average_gap(&a, &sf, &folner_boxes(a.group(), n, &lim()).unwrap(), &dec.p).unwrap();
        assert!(gap(10) < gap(1));
        assert!(gap(30) <= 1e-2);
        assert_eq!(unitaries_on(&a, &folner_boxes(a.group(), 1, &lim()).unwrap()).len(), 9);
    }
}
