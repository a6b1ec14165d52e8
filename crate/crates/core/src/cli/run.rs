// Copyright 2026 vnerg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Kind dispatch and CSV rendering.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::config::{ExperimentConfig, Kind, Role};
use super::CliError;
use crate::amenable::{
    average_map, build_action, folner_audit, invariant_expectation, tempered_constant, DiscreteGroup, FolnerKind,
    FolnerSequence, SetLimits,
};
use crate::cp_maps::{classify, gns_operator, QuantumMap};
use crate::ergodic::{
    cauchy_certificate, cesaro_map, cesaro_operator_gap, conditional_expectation, predual_distance,
};
use crate::error::{Error, Result};
use crate::linalg::{matrix_units, op_norm, DenseMatrix, Tolerances};
use crate::semigroup::{semigroup_expectation, LindbladGenerator};
use crate::standard_form::{standard_form, Functional, State};

/// Header column set shared by every convergence profile.
const PROFILE_COLUMNS: &str = "n_or_lambda,psi_id,predual_distance,gns_distance";

/// Descriptive name written on the first CSV line.
pub fn theorem_label(kind: Kind) -> &'static str {
    match kind {
        Kind::Classify => "contraction-class membership of a positive map",
        Kind::Ergodic => "mean ergodic theorem for Cesaro averages",
        Kind::Semigroup => "mean ergodic theorem for Abel averages of a semigroup",
        Kind::Group => "mean ergodic theorem for Folner averages of a group action",
        Kind::FolnerAudit => "Folner and tempered conditions",
        Kind::Duality => "dual-map criterion for predual convergence",
    }
}

/// `Z`, `Z^d`, `Heisenberg3` or `CyclicN`.
pub fn parse_group(name: &str) -> Result<DiscreteGroup> {
    if name == "Z" {
        return DiscreteGroup::zd(1);
    }
    if name == "Heisenberg3" {
        return Ok(DiscreteGroup::Heisenberg3);
    }
    if let Some(d) = name.strip_prefix("Z^") {
        let d = d.parse().map_err(|_| Error::UnsupportedGroup(name.into()))?;
        return DiscreteGroup::zd(d);
    }
    if let Some(n) = name.strip_prefix("Cyclic") {
        let n = n.parse().map_err(|_| Error::UnsupportedGroup(name.into()))?;
        return DiscreteGroup::cyclic(n);
    }
    Err(Error::UnsupportedGroup(name.into()))
}

fn folner_kind(cfg: &ExperimentConfig) -> Result<FolnerKind> {
    match cfg.folner.as_deref() {
        None | Some("boxes") => Ok(FolnerKind::Boxes),
        Some("half-open") => Ok(FolnerKind::HalfOpen),
        Some(other) => Err(Error::InvalidArgument(format!("unknown Følner sequence {other:?}"))),
    }
}

fn state_of(cfg: &ExperimentConfig, tol: &Tolerances) -> Result<State> {
    match cfg.matrices(Role::State).next() {
        Some(b) => State::new(b.matrix.clone(), tol),
        None => Ok(State::tracial(cfg.dim.unwrap_or(1))),
    }
}

/// Functionals with ids: given blocks by index, else matrix units `E_ij` with id `i n + j`.
fn psi_battery(cfg: &ExperimentConfig) -> Vec<(usize, Functional)> {
    let given: Vec<(usize, Functional)> = cfg
        .matrices(Role::Psi)
        .map(|b| (b.index, Functional::new(b.matrix.clone())))
        .collect();
    if !given.is_empty() {
        return given;
    }
    let n = cfg.dim.unwrap_or(1);
    matrix_units(n).map(|((i, j), e)| (i * n + j, Functional::new(e))).collect()
}

fn map_at(cfg: &ExperimentConfig, index: usize) -> Result<QuantumMap> {
    let kraus: Vec<DenseMatrix> = cfg
        .matrices(Role::Kraus)
        .filter(|b| b.index == index)
        .map(|b| b.matrix.clone())
        .collect();
    if !kraus.is_empty() {
        return QuantumMap::from_kraus(kraus);
    }
    let superop = cfg
        .matrices(Role::Superop)
        .find(|b| b.index == index)
        .ok_or_else(|| Error::InvalidArgument(format!("no map with index {index}")))?;
    QuantumMap::from_superop(superop.matrix.clone())
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

/// Run one experiment and return the CSV text.
pub fn render(kind: Kind, cfg: &ExperimentConfig, limits: &SetLimits) -> std::result::Result<String, CliError> {
    cfg.validate(kind)?;
    let tol = cfg.tolerances();
    let mut out = String::new();
    let _ = writeln!(out, "# theorem: {}", theorem_label(kind));
    match kind {
        Kind::Classify => classify_csv(cfg, &tol, &mut out)?,
        Kind::Ergodic => ergodic_csv(cfg, &tol, &mut out)?,
        Kind::Semigroup => semigroup_csv(cfg, &tol, &mut out)?,
        Kind::Group => group_csv(cfg, &tol, limits, &mut out)?,
        Kind::FolnerAudit => audit_csv(cfg, limits, &mut out)?,
        Kind::Duality => duality_csv(cfg, &tol, &mut out)?,
    }
    Ok(out)
}

fn classify_csv(cfg: &ExperimentConfig, tol: &Tolerances, out: &mut String) -> Result<()> {
    let map = map_at(cfg, 0)?;
    let state = state_of(cfg, tol)?;
    let seed = cfg.seed.expect("validated");
    let r = classify(&map, &state, cfg.trials.unwrap_or(100), seed, tol)?;
    let _ = writeln!(
        out,
        "cp,unital,subunital,invariant,subinvariant,l2_contraction,l2_norm,positive,positivity_probes,in_p_half,ks_samples_passed,ks_trials,ks_max_residual"
    );
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.cp,
        r.unital,
        r.subunital,
        r.invariant,
        r.subinvariant,
        r.l2_contraction,
        num(r.l2_norm),
        r.positive,
        r.positivity_probes,
        r.in_p_half,
        r.ks_samples_passed,
        r.ks_trials,
        num(r.ks_max_residual)
    );
    Ok(())
}

fn profile_rows(out: &mut String, rows: &[(String, usize, f64, f64)]) {
    let _ = writeln!(out, "{PROFILE_COLUMNS}");
    for (x, id, p, g) in rows {
        let _ = writeln!(out, "{x},{id},{},{}", num(*p), num(*g));
    }
}

fn ergodic_csv(cfg: &ExperimentConfig, tol: &Tolerances, out: &mut String) -> Result<()> {
    let map = map_at(cfg, 0)?;
    let state = state_of(cfg, tol)?;
    let dec = conditional_expectation(&map, &state, tol)?;
    let sf = standard_form(state, tol)?;
    let t = gns_operator(&map, &sf)?;
    let psi = psi_battery(cfg);
    let per_n = cfg
        .n_list
        .par_iter()
        .map(|&n| {
            let s = cesaro_map(&map, n)?;
            let gap = cesaro_operator_gap(&t, &dec.p, n)?;
            psi.iter()
                .map(|(id, f)| Ok((n.to_string(), *id, predual_distance(&s, &dec.e, f)?, gap)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let _ = writeln!(out, "# fixed_dim: {}", dec.fixed_dim);
    profile_rows(out, &per_n.concat());
    Ok(())
}

fn semigroup_csv(cfg: &ExperimentConfig, tol: &Tolerances, out: &mut String) -> Result<()> {
    let n = cfg.dim.expect("validated");
    let generator = match cfg.matrices(Role::Superop).next() {
        Some(b) => LindbladGenerator::from_superop(b.matrix.clone(), tol)?,
        None => {
            let h = cfg
                .matrices(Role::Hamiltonian)
                .next()
                .map_or_else(|| DenseMatrix::zeros(n, n), |b| b.matrix.clone());
            let jumps = cfg.matrices(Role::Jump).map(|b| b.matrix.clone()).collect();
            LindbladGenerator::new(h, jumps, tol)?
        }
    };
    let state = state_of(cfg, tol)?;
    let psi = psi_battery(cfg);
    let functionals: Vec<Functional> = psi.iter().map(|(_, f)| f.clone()).collect();
    let (dec, profile) = semigroup_expectation(&generator, &state, &cfg.lambda_list, &functionals, tol)?;
    let sf = standard_form(state, tol)?;
    let gaps = cfg
        .lambda_list
        .par_iter()
        .map(|&l| op_norm(&(gns_operator(&generator.abel_average(l)?, &sf)? - &dec.p)))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<(String, usize, f64, f64)> = profile
        .iter()
        .map(|r| {
            let k = cfg.lambda_list.iter().position(|&l| l == r.lambda).expect("profile follows lambda_list");
            (num(r.lambda), psi[r.psi_index].0, r.value, gaps[k])
        })
        .collect();
    let _ = writeln!(out, "# fixed_dim: {}", dec.fixed_dim);
    profile_rows(out, &rows);
    Ok(())
}

fn group_csv(cfg: &ExperimentConfig, tol: &Tolerances, limits: &SetLimits, out: &mut String) -> Result<()> {
    let group = parse_group(cfg.group.as_deref().expect("validated"))?;
    let seq = FolnerSequence::new(group.clone(), folner_kind(cfg)?);
    let mut blocks: Vec<_> = cfg.matrices(Role::Unitary).collect();
    blocks.sort_by_key(|b| b.index);
    let unitaries = blocks.iter().map(|b| b.matrix.clone()).collect();
    let state = state_of(cfg, tol)?;
    let action = build_action(group, unitaries, &state, tol)?;
    let dec = invariant_expectation(&action, &state, tol)?;
    let sf = standard_form(state, tol)?;
    let psi = psi_battery(cfg);
    let per_n = cfg
        .n_list
        .par_iter()
        .map(|&n| {
            let f = seq.set(n, limits)?;
            let m = average_map(&action, &f)?;
            let gap = op_norm(&(gns_operator(&m, &sf)? - &dec.p))?;
            psi.iter()
                .map(|(id, f)| Ok((n.to_string(), *id, predual_distance(&m, &dec.e, f)?, gap)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let _ = writeln!(out, "# fixed_dim: {}", dec.fixed_dim);
    let big_n = cfg.n_list.iter().copied().max().unwrap_or(1);
    if big_n >= 2 {
        // reported, not enforced
        let c = tempered_constant(&seq, big_n, limits)?;
        let _ = writeln!(out, "# tempered_ratio_max: {}", num(c));
    }
    profile_rows(out, &per_n.concat());
    Ok(())
}

fn audit_csv(cfg: &ExperimentConfig, limits: &SetLimits, out: &mut String) -> Result<()> {
    let group = parse_group(cfg.group.as_deref().expect("validated"))?;
    let seq = FolnerSequence::new(group, folner_kind(cfg)?);
    let rows = folner_audit(&seq, cfg.max_n.expect("validated"), limits)?;
    let _ = writeln!(out, "n,size,defect_per_generator,cumulative_tempered_ratio");
    for r in rows {
        let defects: Vec<String> = r.defect_per_generator.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(out, "{},{},{},{}", r.n, r.size, defects.join(";"), num(r.cumulative_tempered_ratio));
    }
    Ok(())
}

fn duality_csv(cfg: &ExperimentConfig, tol: &Tolerances, out: &mut String) -> Result<()> {
    let indices = cfg.map_indices();
    let maps = indices.iter().map(|&i| map_at(cfg, i)).collect::<Result<Vec<_>>>()?;
    let sf = standard_form(state_of(cfg, tol)?, tol)?;
    let psi: Vec<Functional> = psi_battery(cfg).into_iter().map(|(_, f)| f).collect();
    let cert = cauchy_certificate(&maps, &sf, &psi)?;
    let _ = writeln!(out, "# bound_violation: {}", num(cert.bound_violation));
    let _ = writeln!(out, "map_i,map_j,predual_gap,gns_gap");
    for (a, &i) in indices.iter().enumerate() {
        for (b, &j) in indices.iter().enumerate().skip(a + 1) {
            let _ = writeln!(out, "{i},{j},{},{}", num(cert.predual[a][b]), num(cert.gns[a][b]));
        }
    }
    Ok(())
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(content.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
