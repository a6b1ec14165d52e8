// Copyright 2026 vnerg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Seeded random ensembles used by sampled checks and test batteries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, fix_phase, DenseMatrix, DenseVector, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DenseVector {
    DenseVector::from_fn(n, |_, _| complex_normal(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DenseMatrix {
    let g = ginibre(rng, n, n);
    (&g + g.adjoint()).scale(0.5)
}

/// Random positive semidefinite matrix `G G*`.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> DenseMatrix {
    let g = ginibre(rng, n, rank.max(1));
    &g * g.adjoint()
}

/// Haar-random unitary via QR of a Ginibre matrix with the R-diagonal phases removed.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DenseMatrix {
    isometry(rng, n, n)
}

/// Random isometry `V` (`rows x cols`, `rows >= cols`) with `V* V = I`.
pub fn isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DenseMatrix {
    let g = ginibre(rng, rows, cols);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..rows {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random density matrix with eigenvalues bounded below by `floor / n`.
///
/// Drawn as `(1 - floor) W / tr W + floor I / n` with `W` Wishart.
pub fn random_faithful_density<R: Rng + ?Sized>(rng: &mut R, n: usize, floor: f64) -> DenseMatrix {
    let w = random_psd(rng, n, n);
    let tr = w.trace().re;
    let mut rho = w.scale((1.0 - floor) / tr);
    for i in 0..n {
        rho[(i, i)] += c(floor / n as f64, 0.0);
    }
    rho
}

/// Random point on the probability simplex (flat Dirichlet).
pub fn random_probabilities<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Random unit vector.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DenseVector {
    let mut v = random_vector(rng, n);
    let norm = v.norm();
    v /= c(norm, 0.0);
    fix_phase(&mut v);
    v
}
