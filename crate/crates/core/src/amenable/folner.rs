// Copyright 2026 vnerg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Følner sets, invariance defects and the tempered (Shulman) constant.
//!
//! All counts are exact. Products of sets in `Z^d` and the Heisenberg group
//! are computed fiberwise as Minkowski sums of integer intervals; other
//! groups fall back to hashing every product.

use std::fmt;

use rustc_hash::{FxHashMap, FxHashSet};

use super::group::{DiscreteGroup, Element, FiberKey, Fibration};
use crate::error::{Error, Result};

/// Cap on the number of elements (or stored intervals) a set operation may build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SetLimits {
    pub max_set_size: usize,
}

impl Default for SetLimits {
    fn default() -> Self {
        Self {
            max_set_size: 10_000_000,
        }
    }
}

impl SetLimits {
    fn check(&self, size: usize) -> Result<()> {
        if size > self.max_set_size {
            Err(Error::SetTooLarge {
                size,
                cap: self.max_set_size,
            })
        } else {
            Ok(())
        }
    }
}

/// Exact ratio of set cardinalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: u128,
    pub den: u128,
}

impl Ratio {
    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Nonempty finite subset of a group, stored sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolnerSet {
    elements: Vec<Element>,
}

impl FolnerSet {
    pub fn new(mut elements: Vec<Element>) -> Result<Self> {
        elements.sort_unstable();
        elements.dedup();
        if elements.is_empty() {
            return Err(Error::InvalidArgument("Følner set must be nonempty".into()));
        }
        Ok(Self { elements })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn contains(&self, g: &Element) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    /// `F^{-1}`.
    pub fn inverse(&self, group: &DiscreteGroup) -> FolnerSet {
        FolnerSet::new(self.elements.iter().map(|g| group.inv(g)).collect()).expect("inverse of a nonempty set")
    }
}

/// Symmetric boxes: `[-n, n]^d` in `Z^d`; `|a|, |b| <= n, |c| <= n^2` in the
/// Heisenberg group; the whole group for `Z/N`.
pub fn folner_boxes(group: &DiscreteGroup, n: u64, limits: &SetLimits) -> Result<FolnerSet> {
    let n = n as i64;
    match group {
        DiscreteGroup::Zd(d) => {
            let side = (2 * n + 1) as usize;
            limits.check(side.saturating_pow(*d as u32))?;
            Ok(grid(*d, -n, n))
        }
        DiscreteGroup::Heisenberg3 => {
            let side = (2 * n + 1) as usize;
            let depth = (2 * n * n + 1) as usize;
            limits.check(side.saturating_mul(side).saturating_mul(depth))?;
            let mut out = Vec::with_capacity(side * side * depth);
            for a in -n..=n {
                for b in -n..=n {
                    for c in -n * n..=n * n {
                        out.push([a, b, c, 0]);
                    }
                }
            }
            FolnerSet::new(out)
        }
        DiscreteGroup::Cyclic(m) => {
            limits.check(*m as usize)?;
            FolnerSet::new((0..*m as i64).map(|a| [a, 0, 0, 0]).collect())
        }
        DiscreteGroup::Table(t) => Err(Error::UnsupportedGroup(format!(
            "{} has no declared Følner sequence",
            t.name
        ))),
    }
}

/// Half-open boxes `[0, n)^d` in `Z^d`.
pub fn half_open_box(group: &DiscreteGroup, n: u64, limits: &SetLimits) -> Result<FolnerSet> {
    match group {
        DiscreteGroup::Zd(d) if n >= 1 => {
            limits.check((n as usize).saturating_pow(*d as u32))?;
            Ok(grid(*d, 0, n as i64 - 1))
        }
        DiscreteGroup::Zd(_) => Err(Error::InvalidArgument("half-open boxes start at n = 1".into())),
        other => Err(Error::UnsupportedGroup(format!("half-open boxes on {}", other.name()))),
    }
}

fn grid(d: usize, lo: i64, hi: i64) -> FolnerSet {
    let mut out: Vec<Element> = vec![[0; 4]];
    for axis in 0..d {
        let mut next = Vec::with_capacity(out.len() * (hi - lo + 1) as usize);
        for g in &out {
            for v in lo..=hi {
                let mut h = *g;
                h[axis] = v;
                next.push(h);
            }
        }
        out = next;
    }
    FolnerSet::new(out).expect("grid is nonempty")
}

/// How `F_n` is produced from `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FolnerKind {
    /// [`folner_boxes`].
    Boxes,
    /// [`half_open_box`].
    HalfOpen,
    /// `F_1, F_2, ...` listed explicitly.
    Explicit(Vec<FolnerSet>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolnerSequence {
    pub group: DiscreteGroup,
    pub kind: FolnerKind,
}

impl FolnerSequence {
    pub fn new(group: DiscreteGroup, kind: FolnerKind) -> Self {
        Self { group, kind }
    }

    /// `F_n` for `n >= 1`.
    pub fn set(&self, n: u64, limits: &SetLimits) -> Result<FolnerSet> {
        if n == 0 {
            return Err(Error::InvalidArgument("Følner sequences are indexed from 1".into()));
        }
        match &self.kind {
            FolnerKind::Boxes => folner_boxes(&self.group, n, limits),
            FolnerKind::HalfOpen => half_open_box(&self.group, n, limits),
            FolnerKind::Explicit(sets) => sets
                .get(n as usize - 1)
                .cloned()
                .ok_or_else(|| Error::InvalidArgument(format!("explicit sequence has no set {n}"))),
        }
    }
}

/// `|F Δ KF| / |F|` with `KF = {k f : k in K, f in F}`.
pub fn folner_defect(group: &DiscreteGroup, f: &FolnerSet, k: &[Element], limits: &SetLimits) -> Result<Ratio> {
    if k.is_empty() {
        return Err(Error::InvalidArgument("K must be nonempty".into()));
    }
    limits.check(f.len().saturating_mul(k.len()))?;
    let mut kf: FxHashSet<Element> = FxHashSet::default();
    kf.reserve(f.len() * k.len());
    for s in k {
        for g in f.elements() {
            kf.insert(group.mul(s, g));
        }
    }
    let common = kf.iter().filter(|g| f.contains(g)).count();
    let sym = f.len() + kf.len() - 2 * common;
    Ok(Ratio {
        num: sym as u128,
        den: f.len() as u128,
    })
}

/// Sorted disjoint inclusive intervals per fiber key.
#[derive(Debug, Clone, Default)]
struct FiberSet {
    fibers: FxHashMap<FiberKey, Vec<(i64, i64)>>,
}

impl FiberSet {
    fn from_set(fib: Fibration, set: &FolnerSet) -> Self {
        let mut raw: FxHashMap<FiberKey, Vec<(i64, i64)>> = FxHashMap::default();
        for g in set.elements() {
            let (k, t) = fib.split(g);
            raw.entry(k).or_default().push((t, t));
        }
        let mut out = FiberSet::default();
        for (k, v) in raw {
            out.fibers.insert(k, merge(v));
        }
        out
    }

    fn union_with(&mut self, other: &FiberSet) {
        for (k, v) in &other.fibers {
            let entry = self.fibers.entry(*k).or_default();
            entry.extend_from_slice(v);
            let merged = merge(std::mem::take(entry));
            *entry = merged;
        }
    }

    fn intervals(&self) -> usize {
        self.fibers.values().map(Vec::len).sum()
    }

    /// `|self * other|`.
    fn product_count(&self, other: &FiberSet, fib: Fibration, limits: &SetLimits) -> Result<u128> {
        limits.check(self.intervals().saturating_mul(other.intervals()))?;
        let mut raw: FxHashMap<FiberKey, Vec<(i64, i64)>> = FxHashMap::default();
        for (k1, v1) in &self.fibers {
            for (k2, v2) in &other.fibers {
                let (k, shift) = fib.mul_keys(k1, k2);
                let slot = raw.entry(k).or_default();
                for &(a, b) in v1 {
                    for &(c, d) in v2 {
                        slot.push((a + c + shift, b + d + shift));
                    }
                }
            }
        }
        Ok(raw
            .into_values()
            .map(|v| merge(v).iter().map(|&(lo, hi)| (hi - lo + 1) as u128).sum::<u128>())
            .sum())
    }
}

fn merge(mut v: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    v.sort_unstable();
    let mut out: Vec<(i64, i64)> = Vec::with_capacity(v.len());
    for (lo, hi) in v {
        match out.last_mut() {
            Some(last) if lo <= last.1 + 1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// Running union `U_n = F_1^{-1} ∪ ... ∪ F_{n-1}^{-1}` with exact `|U_n F_n|`.
enum Accumulator {
    Fibered(Fibration, FiberSet),
    Hashed(FxHashSet<Element>),
}

impl Accumulator {
    fn new(group: &DiscreteGroup) -> Self {
        match group.fibered() {
            Some(f) => Accumulator::Fibered(f, FiberSet::default()),
            None => Accumulator::Hashed(FxHashSet::default()),
        }
    }

    fn absorb_inverse(&mut self, group: &DiscreteGroup, f: &FolnerSet, limits: &SetLimits) -> Result<()> {
        let inv = f.inverse(group);
        match self {
            Accumulator::Fibered(fib, acc) => {
                acc.union_with(&FiberSet::from_set(*fib, &inv));
                limits.check(acc.intervals())
            }
            Accumulator::Hashed(acc) => {
                acc.extend(inv.elements().iter().copied());
                limits.check(acc.len())
            }
        }
    }

    fn product_count(&self, group: &DiscreteGroup, f: &FolnerSet, limits: &SetLimits) -> Result<u128> {
        match self {
            Accumulator::Fibered(fib, acc) => acc.product_count(&FiberSet::from_set(*fib, f), *fib, limits),
            Accumulator::Hashed(acc) => {
                let mut out: FxHashSet<Element> = FxHashSet::default();
                for u in acc {
                    for g in f.elements() {
                        out.insert(group.mul(u, g));
                    }
                    limits.check(out.len())?;
                }
                Ok(out.len() as u128)
            }
        }
    }
}

/// `|U_n F_n| / |F_n|` for `n = 2..=big_n`, where `U_n = ⋃_{k<n} F_k^{-1}`.
pub fn tempered_ratios(seq: &FolnerSequence, big_n: u64, limits: &SetLimits) -> Result<Vec<(u64, Ratio)>> {
    if big_n < 2 {
        return Err(Error::InvalidArgument("tempered constant needs N >= 2".into()));
    }
    let mut acc = Accumulator::new(&seq.group);
    let mut out = Vec::with_capacity(big_n as usize - 1);
    acc.absorb_inverse(&seq.group, &seq.set(1, limits)?, limits)?;
    for n in 2..=big_n {
        let f = seq.set(n, limits)?;
        let num = acc.product_count(&seq.group, &f, limits)?;
        out.push((
            n,
            Ratio {
                num,
                den: f.len() as u128,
            },
        ));
        acc.absorb_inverse(&seq.group, &f, limits)?;
    }
    Ok(out)
}

/// `max_{2 <= n <= N} |⋃_{k<n} F_k^{-1} F_n| / |F_n|`.
pub fn tempered_constant(seq: &FolnerSequence, big_n: u64, limits: &SetLimits) -> Result<f64> {
    Ok(tempered_ratios(seq, big_n, limits)?
        .iter()
        .map(|(_, r)| r.value())
        .fold(0.0, f64::max))
}

/// One row of a Følner audit.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub n: u64,
    pub size: usize,
    /// `|F Δ sF| / |F|` for each generator `s`.
    pub defect_per_generator: Vec<Ratio>,
    /// Running maximum of the tempered ratios up to `n`; 0 at `n = 1`.
    pub cumulative_tempered_ratio: f64,
}

pub fn folner_audit(seq: &FolnerSequence, max_n: u64, limits: &SetLimits) -> Result<Vec<AuditRow>> {
    if max_n == 0 {
        return Err(Error::InvalidArgument("max_n must be at least 1".into()));
    }
    let gens = seq.group.generators();
    let mut acc = Accumulator::new(&seq.group);
    let mut running = 0.0f64;
    let mut rows = Vec::with_capacity(max_n as usize);
    for n in 1..=max_n {
        let f = seq.set(n, limits)?;
        let defects = gens
            .iter()
            .map(|s| folner_defect(&seq.group, &f, std::slice::from_ref(s), limits))
            .collect::<Result<Vec<_>>>()?;
        if n >= 2 {
            let num = acc.product_count(&seq.group, &f, limits)?;
            running = running.max(num as f64 / f.len() as f64);
        }
        acc.absorb_inverse(&seq.group, &f, limits)?;
        rows.push(AuditRow {
            n,
            size: f.len(),
            defect_per_generator: defects,
            cumulative_tempered_ratio: running,
        });
    }
    Ok(rows)
}
