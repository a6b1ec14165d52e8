// Copyright 2026 vnerg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Countable discrete groups with canonical integer-tuple elements.

use rustc_hash::FxHashSet;

use crate::error::{Error, Result};

/// Group element as a canonical integer tuple; unused slots are zero.
pub type Element = [i64; 4];

/// Largest `d` supported for `Z^d`.
pub const MAX_RANK: usize = 4;

/// Finite group given by its multiplication table on `0..order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CayleyTable {
    pub name: String,
    /// `table[a][b] = a * b`.
    pub table: Vec<Vec<usize>>,
    pub identity: usize,
    pub generators: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiscreteGroup {
    /// `Z^d`, element `(a_1, ..., a_d)`.
    Zd(usize),
    /// Integer Heisenberg group on generators `x, y, z` with `xy = yxz` and `z` central.
    /// Element `(a, b, c)` stands for the word `x^a y^b z^c`.
    Heisenberg3,
    /// `Z / N`, element `(a)` with `0 <= a < N`.
    Cyclic(u64),
    Table(CayleyTable),
}

impl DiscreteGroup {
    pub fn zd(d: usize) -> Result<Self> {
        if d == 0 || d > MAX_RANK {
            return Err(Error::UnsupportedGroup(format!("Z^{d} (rank must be 1..={MAX_RANK})")));
        }
        Ok(DiscreteGroup::Zd(d))
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        if n == 0 || n > i64::MAX as u64 {
            return Err(Error::UnsupportedGroup(format!("Cyclic{n}")));
        }
        Ok(DiscreteGroup::Cyclic(n))
    }

    /// Validate a Cayley table: closure, identity, inverses and associativity.
    pub fn table(table: CayleyTable) -> Result<Self> {
        let n = table.table.len();
        let bad = |what: &str| Err(Error::GroupRelationViolated {
            relation: format!("table group {}: {what}", table.name),
            residual: 1.0,
        });
        if n == 0 || table.identity >= n || table.table.iter().any(|row| row.len() != n || row.iter().any(|&v| v >= n)) {
            return bad("table is not a closed square array");
        }
        if table.generators.iter().any(|&g| g >= n) {
            return bad("generator out of range");
        }
        let e = table.identity;
        for a in 0..n {
            if table.table[e][a] != a || table.table[a][e] != a {
                return bad("identity law fails");
            }
            if !(0..n).any(|b| table.table[a][b] == e && table.table[b][a] == e) {
                return bad("missing inverse");
            }
            for b in 0..n {
                for c in 0..n {
                    let t = &table.table;
                    if t[t[a][b]][c] != t[a][t[b][c]] {
                        return bad("associativity fails");
                    }
                }
            }
        }
        Ok(DiscreteGroup::Table(table))
    }

    pub fn name(&self) -> String {
        match self {
            DiscreteGroup::Zd(d) => format!("Z^{d}"),
            DiscreteGroup::Heisenberg3 => "Heisenberg3".into(),
            DiscreteGroup::Cyclic(n) => format!("Cyclic{n}"),
            DiscreteGroup::Table(t) => t.name.clone(),
        }
    }

    pub fn identity(&self) -> Element {
        match self {
            DiscreteGroup::Table(t) => [t.identity as i64, 0, 0, 0],
            _ => [0; 4],
        }
    }

    pub fn mul(&self, g: &Element, h: &Element) -> Element {
        match self {
            DiscreteGroup::Zd(d) => {
                let mut out = [0; 4];
                for i in 0..*d {
                    out[i] = g[i] + h[i];
                }
                out
            }
            // x^a y^b z^c x^a' y^b' z^c' = x^{a+a'} y^{b+b'} z^{c+c'-a'b}
            DiscreteGroup::Heisenberg3 => [g[0] + h[0], g[1] + h[1], g[2] + h[2] - h[0] * g[1], 0],
            DiscreteGroup::Cyclic(n) => [(g[0] + h[0]).rem_euclid(*n as i64), 0, 0, 0],
            DiscreteGroup::Table(t) => [t.table[g[0] as usize][h[0] as usize] as i64, 0, 0, 0],
        }
    }

    pub fn inv(&self, g: &Element) -> Element {
        match self {
            DiscreteGroup::Zd(d) => {
                let mut out = [0; 4];
                for i in 0..*d {
                    out[i] = -g[i];
                }
                out
            }
            DiscreteGroup::Heisenberg3 => [-g[0], -g[1], -g[2] - g[0] * g[1], 0],
            DiscreteGroup::Cyclic(n) => [(-g[0]).rem_euclid(*n as i64), 0, 0, 0],
            DiscreteGroup::Table(t) => {
                let a = g[0] as usize;
                let b = (0..t.table.len())
                    .find(|&b| t.table[a][b] == t.identity)
                    .expect("validated table has inverses");
                [b as i64, 0, 0, 0]
            }
        }
    }

    /// Generators in a fixed order: `e_1..e_d`; `x, y, z`; `1`; table generators.
    pub fn generators(&self) -> Vec<Element> {
        match self {
            DiscreteGroup::Zd(d) => (0..*d)
                .map(|i| {
                    let mut e = [0; 4];
                    e[i] = 1;
                    e
                })
                .collect(),
            DiscreteGroup::Heisenberg3 => vec![[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]],
            DiscreteGroup::Cyclic(n) => vec![[1 % *n as i64, 0, 0, 0]],
            DiscreteGroup::Table(t) => t.generators.iter().map(|&g| [g as i64, 0, 0, 0]).collect(),
        }
    }

    /// Generators followed by their inverses.
    pub fn symmetric_generators(&self) -> Vec<Element> {
        let gens = self.generators();
        let mut out = gens.clone();
        out.extend(gens.iter().map(|g| self.inv(g)));
        out
    }

    /// Audit identity, inverse and associativity laws on all words of length
    /// at most `max_len` in the symmetric generators (associativity on words
    /// of length at most `max_len / 2`).
    pub fn audit_axioms(&self, max_len: usize) -> Result<()> {
        let words = self.words(max_len);
        let e = self.identity();
        for g in &words {
            if self.mul(g, &e) != *g || self.mul(&e, g) != *g {
                return Err(self.violation("identity"));
            }
            let gi = self.inv(g);
            if self.mul(g, &gi) != e || self.mul(&gi, g) != e {
                return Err(self.violation("inverse"));
            }
        }
        let short = self.words(max_len / 2);
        for a in &short {
            for b in &short {
                let ab = self.mul(a, b);
                for c in &short {
                    if self.mul(&ab, c) != self.mul(a, &self.mul(b, c)) {
                        return Err(self.violation("associativity"));
                    }
                }
            }
        }
        Ok(())
    }

    fn violation(&self, law: &str) -> Error {
        Error::GroupRelationViolated {
            relation: format!("{} {law} law", self.name()),
            residual: 1.0,
        }
    }

    /// Distinct elements represented by words of length at most `len`.
    pub fn words(&self, len: usize) -> Vec<Element> {
        let gens = self.symmetric_generators();
        let mut seen: FxHashSet<Element> = FxHashSet::default();
        let mut frontier = vec![self.identity()];
        seen.insert(self.identity());
        let mut out = frontier.clone();
        for _ in 0..len {
            let mut next = Vec::new();
            for g in &frontier {
                for s in &gens {
                    let h = self.mul(g, s);
                    if seen.insert(h) {
                        next.push(h);
                        out.push(h);
                    }
                }
            }
            frontier = next;
        }
        out
    }

    /// Fibered coordinates: `(key, t)` with `g = (key, t)` and
    /// `(k1, t1)(k2, t2) = (k1 + k2, t1 + t2 + shift(k1, k2))`.
    ///
    /// Available for `Z^d` (last coordinate) and the Heisenberg group
    /// (central coordinate).
    pub(crate) fn fibered(&self) -> Option<Fibration> {
        match self {
            DiscreteGroup::Zd(d) => Some(Fibration::Abelian(*d)),
            DiscreteGroup::Heisenberg3 => Some(Fibration::Heisenberg),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Fibration {
    Abelian(usize),
    Heisenberg,
}

pub(crate) type FiberKey = [i64; 3];

impl Fibration {
    pub(crate) fn split(self, g: &Element) -> (FiberKey, i64) {
        match self {
            Fibration::Abelian(d) => {
                let mut key = [0; 3];
                key[..d - 1].copy_from_slice(&g[..d - 1]);
                (key, g[d - 1])
            }
            Fibration::Heisenberg => ([g[0], g[1], 0], g[2]),
        }
    }

    #[cfg(test)]
    pub(crate) fn join(self, key: &FiberKey, t: i64) -> Element {
        match self {
            Fibration::Abelian(d) => {
                let mut g = [0; 4];
                g[..d - 1].copy_from_slice(&key[..d - 1]);
                g[d - 1] = t;
                g
            }
            Fibration::Heisenberg => [key[0], key[1], t, 0],
        }
    }

    /// Product key and fiber shift.
    pub(crate) fn mul_keys(self, k1: &FiberKey, k2: &FiberKey) -> (FiberKey, i64) {
        let key = [k1[0] + k2[0], k1[1] + k2[1], k1[2] + k2[2]];
        match self {
            Fibration::Abelian(_) => (key, 0),
            Fibration::Heisenberg => (key, -k2[0] * k1[1]),
        }
    }
}
