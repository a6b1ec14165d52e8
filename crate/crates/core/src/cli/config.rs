// Copyright 2026 vnerg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Line-oriented experiment description.
//!
//! ```text
//! # comment
//! kind = ergodic
//! dim = 2
//! n_list = 1..30, 100
//! begin matrix kraus
//! 1 0
//! 0 1+0.5i
//! end matrix
//! ```
//!
//! Keys: `kind dim seed trials n_list lambda_list tol_psd tol_eq tol_null
//! group folner max_n`. Matrix roles: `kraus superop state hamiltonian jump
//! unitary psi`, each with an optional integer index (default 0). Entries
//! are `a`, `bi`, `a+bi` or `a-bi` with decimal `a`, `b`.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

use crate::linalg::{c, DenseMatrix, Tolerances, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    Validation(String),
}

fn parse_err<T>(line: usize, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Parse {
        line,
        message: message.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Classify,
    Ergodic,
    Semigroup,
    Group,
    FolnerAudit,
    Duality,
}

impl Kind {
    pub const ALL: [Kind; 6] = [
        Kind::Classify,
        Kind::Ergodic,
        Kind::Semigroup,
        Kind::Group,
        Kind::FolnerAudit,
        Kind::Duality,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Classify => "classify",
            Kind::Ergodic => "ergodic",
            Kind::Semigroup => "semigroup",
            Kind::Group => "group",
            Kind::FolnerAudit => "folner-audit",
            Kind::Duality => "duality",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Kind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown kind {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Kraus,
    Superop,
    State,
    Hamiltonian,
    Jump,
    Unitary,
    Psi,
}

impl Role {
    const ALL: [Role; 7] = [
        Role::Kraus,
        Role::Superop,
        Role::State,
        Role::Hamiltonian,
        Role::Jump,
        Role::Unitary,
        Role::Psi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Kraus => "kraus",
            Role::Superop => "superop",
            Role::State => "state",
            Role::Hamiltonian => "hamiltonian",
            Role::Jump => "jump",
            Role::Unitary => "unitary",
            Role::Psi => "psi",
        }
    }

    fn parse(s: &str) -> Option<Role> {
        Role::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixBlock {
    pub role: Role,
    pub index: usize,
    pub matrix: DenseMatrix,
}

/// Parsed experiment. Blocks keep their textual order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentConfig {
    pub kind: Option<Kind>,
    pub dim: Option<usize>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub n_list: Vec<u64>,
    pub lambda_list: Vec<f64>,
    pub tol_psd: Option<f64>,
    pub tol_eq: Option<f64>,
    pub tol_null: Option<f64>,
    pub group: Option<String>,
    pub folner: Option<String>,
    pub max_n: Option<u64>,
    pub blocks: Vec<MatrixBlock>,
}

const KEYS: [&str; 12] = [
    "kind",
    "dim",
    "seed",
    "trials",
    "n_list",
    "lambda_list",
    "tol_psd",
    "tol_eq",
    "tol_null",
    "group",
    "folner",
    "max_n",
];

/// Parse a complex entry `a`, `bi`, `a+bi`, `a-bi` (also `i`, `-i`).
pub fn parse_complex(tok: &str) -> Option<C64> {
    let finite = |v: f64| v.is_finite().then_some(v);
    let Some(body) = tok.strip_suffix('i') else {
        return decimal(tok).and_then(finite).map(|re| c(re, 0.0));
    };
    // split at the last sign that is not leading and not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (decimal(&body[..k])?, imag_coeff(&body[k..])?),
        None => (0.0, imag_coeff(body)?),
    };
    Some(c(finite(re)?, finite(im)?))
}

fn imag_coeff(s: &str) -> Option<f64> {
    match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => decimal(s),
    }
}

fn decimal(s: &str) -> Option<f64> {
    let ok = !s.is_empty()
        && s.bytes().all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'+' | b'e' | b'E'))
        && s.bytes().any(|b| b.is_ascii_digit());
    if ok {
        s.parse().ok()
    } else {
        None
    }
}

fn format_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{:?}", z.re)
    } else if z.im.is_sign_negative() {
        format!("{:?}{:?}i", z.re, z.im)
    } else {
        format!("{:?}+{:?}i", z.re, z.im)
    }
}

/// `1, 4, 10..20` with inclusive ranges.
fn parse_n_list(value: &str, line: usize) -> Result<Vec<u64>, ConfigError> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim) {
        if let Some((a, b)) = item.split_once("..") {
            let (Ok(a), Ok(b)) = (a.trim().parse::<u64>(), b.trim().parse::<u64>()) else {
                return parse_err(line, format!("bad range {item:?}"));
            };
            if a > b {
                return parse_err(line, format!("empty range {item:?}"));
            }
            out.extend(a..=b);
        } else {
            match item.parse::<u64>() {
                Ok(v) => out.push(v),
                Err(_) => return parse_err(line, format!("bad integer {item:?}")),
            }
        }
    }
    Ok(out)
}

fn parse_scalar<T: FromStr>(value: &str, line: usize, key: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .or_else(|_| parse_err(line, format!("bad value {value:?} for {key}")))
}

fn parse_real(value: &str, line: usize, key: &str) -> Result<f64, ConfigError> {
    match decimal(value) {
        Some(v) if v.is_finite() => Ok(v),
        _ => parse_err(line, format!("bad number {value:?} for {key}")),
    }
}

pub fn parse_problem(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut seen: Vec<&str> = Vec::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    while let Some((ln, raw)) = lines.next() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        if words[0] == "begin" {
            cfg.blocks.push(parse_block(&words, ln, &mut lines)?);
            continue;
        }
        if words[0] == "end" {
            return parse_err(ln, "end fence without an open matrix block");
        }
        let Some((key, value)) = line.split_once('=') else {
            return parse_err(ln, format!("expected `key = value`, got {line:?}"));
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(&key) = KEYS.iter().find(|k| **k == key) else {
            return parse_err(ln, format!("unknown key {key:?}"));
        };
        if seen.contains(&key) {
            return parse_err(ln, format!("duplicate key {key:?}"));
        }
        seen.push(key);
        match key {
            "kind" => cfg.kind = Some(value.parse().or_else(|e: String| parse_err(ln, e))?),
            "dim" => cfg.dim = Some(parse_scalar(value, ln, key)?),
            "seed" => cfg.seed = Some(parse_scalar(value, ln, key)?),
            "trials" => cfg.trials = Some(parse_scalar(value, ln, key)?),
            "n_list" => cfg.n_list = parse_n_list(value, ln)?,
            "lambda_list" => {
                cfg.lambda_list = value
                    .split(',')
                    .map(|v| parse_real(v.trim(), ln, key))
                    .collect::<Result<_, _>>()?
            }
            "tol_psd" => cfg.tol_psd = Some(parse_real(value, ln, key)?),
            "tol_eq" => cfg.tol_eq = Some(parse_real(value, ln, key)?),
            "tol_null" => cfg.tol_null = Some(parse_real(value, ln, key)?),
            "group" => cfg.group = Some(value.to_string()),
            "folner" => cfg.folner = Some(value.to_string()),
            "max_n" => cfg.max_n = Some(parse_scalar(value, ln, key)?),
            _ => unreachable!("key list is exhaustive"),
        }
    }
    Ok(cfg)
}

fn parse_block<'a>(
    words: &[&str],
    fence: usize,
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
) -> Result<MatrixBlock, ConfigError> {
    if words.len() < 3 || words.len() > 4 || words[1] != "matrix" {
        return parse_err(fence, "expected `begin matrix <role> [index]`");
    }
    let Some(role) = Role::parse(words[2]) else {
        return parse_err(fence, format!("unknown matrix role {:?}", words[2]));
    };
    let index = match words.get(3) {
        Some(w) => w.parse().or_else(|_| parse_err(fence, format!("bad block index {w:?}")))?,
        None => 0,
    };
    let mut rows: Vec<Vec<C64>> = Vec::new();
    loop {
        let Some((ln, raw)) = lines.next() else {
            return parse_err(fence, "matrix block is not closed by `end matrix`");
        };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with("begin") {
            return parse_err(fence, "matrix block is not closed by `end matrix`");
        }
        if line.starts_with("end") {
            if line.split_whitespace().collect::<Vec<_>>() != ["end", "matrix"] {
                return parse_err(ln, "expected `end matrix`");
            }
            break;
        }
        let row = line
            .split_whitespace()
            .map(|t| parse_complex(t).map_or_else(|| parse_err(ln, format!("bad matrix entry {t:?}")), Ok))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return parse_err(ln, format!("row has {} entries, expected {}", row.len(), first.len()));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() || rows.len() != rows[0].len() {
        return parse_err(fence, "matrix block must be square and nonempty");
    }
    let n = rows.len();
    let matrix = DenseMatrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok(MatrixBlock { role, index, matrix })
}

/// Canonical text; `parse_problem(&emit(cfg))` reproduces `cfg`.
pub fn emit(cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    if let Some(v) = cfg.kind {
        kv("kind", v.to_string());
    }
    if let Some(v) = cfg.dim {
        kv("dim", v.to_string());
    }
    if let Some(v) = cfg.seed {
        kv("seed", v.to_string());
    }
    if let Some(v) = cfg.trials {
        kv("trials", v.to_string());
    }
    if !cfg.n_list.is_empty() {
        kv("n_list", join(cfg.n_list.iter().map(u64::to_string)));
    }
    if !cfg.lambda_list.is_empty() {
        kv("lambda_list", join(cfg.lambda_list.iter().map(|v| format!("{v:?}"))));
    }
    for (k, v) in [("tol_psd", cfg.tol_psd), ("tol_eq", cfg.tol_eq), ("tol_null", cfg.tol_null)] {
        if let Some(v) = v {
            kv(k, format!("{v:?}"));
        }
    }
    if let Some(v) = &cfg.group {
        kv("group", v.clone());
    }
    if let Some(v) = &cfg.folner {
        kv("folner", v.clone());
    }
    if let Some(v) = cfg.max_n {
        kv("max_n", v.to_string());
    }
    for b in &cfg.blocks {
        let _ = writeln!(out, "begin matrix {} {}", b.role.as_str(), b.index);
        for row in b.matrix.row_iter() {
            let entries: Vec<String> = row.iter().map(|z| format_complex(*z)).collect();
            let _ = writeln!(out, "{}", entries.join(" "));
        }
        let _ = writeln!(out, "end matrix");
    }
    out
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(", ")
}

impl ExperimentConfig {
    /// Matrices of a role in textual order, with their indices.
    pub fn matrices(&self, role: Role) -> impl Iterator<Item = &MatrixBlock> {
        self.blocks.iter().filter(move |b| b.role == role)
    }

    /// Tolerances with config overrides applied.
    pub fn tolerances(&self) -> Tolerances {
        let mut t = Tolerances::default();
        if let Some(v) = self.tol_psd {
            t.psd_floor = v;
        }
        if let Some(v) = self.tol_eq {
            t.eq_rtol = v;
        }
        if let Some(v) = self.tol_null {
            t.nullspace_rel = v;
        }
        t
    }

    /// Check the fields the given kind needs and that all dimensions agree.
    pub fn validate(&self, kind: Kind) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Validation(m));
        if let Some(k) = self.kind {
            if k != kind {
                return bad(format!("config declares kind {k} but {kind} was requested"));
            }
        }
        self.tolerances()
            .validate()
            .or_else(|e| bad(e.to_string()))?;
        let allowed: &[Role] = match kind {
            Kind::Classify | Kind::Ergodic => &[Role::Kraus, Role::Superop, Role::State, Role::Psi],
            Kind::Duality => &[Role::Kraus, Role::Superop, Role::State, Role::Psi],
            Kind::Semigroup => &[Role::Hamiltonian, Role::Jump, Role::Superop, Role::State, Role::Psi],
            Kind::Group => &[Role::Unitary, Role::State, Role::Psi],
            Kind::FolnerAudit => &[],
        };
        if let Some(b) = self.blocks.iter().find(|b| !allowed.contains(&b.role)) {
            return bad(format!("matrix role {} is not used by kind {kind}", b.role.as_str()));
        }
        if kind == Kind::FolnerAudit {
            if self.group.is_none() {
                return bad("folner-audit needs `group`".into());
            }
            if self.max_n.is_none() {
                return bad("folner-audit needs `max_n`".into());
            }
            return Ok(());
        }
        let Some(n) = self.dim else {
            return bad(format!("kind {kind} needs `dim`"));
        };
        if n == 0 {
            return bad("dim must be at least 1".into());
        }
        for b in &self.blocks {
            let expected = if b.role == Role::Superop { n * n } else { n };
            if b.matrix.nrows() != expected {
                return bad(format!(
                    "{} block {} is {}x{}, expected {expected}x{expected}",
                    b.role.as_str(),
                    b.index,
                    b.matrix.nrows(),
                    b.matrix.ncols()
                ));
            }
        }
        if self.matrices(Role::State).count() > 1 {
            return bad("at most one state block".into());
        }
        let has = |r| self.matrices(r).next().is_some();
        match kind {
            Kind::Classify | Kind::Ergodic | Kind::Duality => {
                if has(Role::Kraus) == has(Role::Superop) {
                    return bad("give the map either as kraus blocks or as superop blocks".into());
                }
                if kind != Kind::Duality {
                    let single = self.blocks.iter().all(|b| b.role != Role::Superop || b.index == 0)
                        && self.matrices(Role::Kraus).all(|b| b.index == 0);
                    if !single || self.matrices(Role::Superop).count() > 1 {
                        return bad("a single map is expected (index 0)".into());
                    }
                }
                if kind == Kind::Classify && self.seed.is_none() {
                    return bad("classify samples probes and needs a seed".into());
                }
                if kind == Kind::Ergodic && self.n_list.is_empty() {
                    return bad("ergodic needs n_list".into());
                }
                if kind == Kind::Duality && self.map_indices().len() < 2 {
                    return bad("duality needs at least two maps".into());
                }
            }
            Kind::Semigroup => {
                if has(Role::Superop) && (has(Role::Hamiltonian) || has(Role::Jump)) {
                    return bad("give the generator either as a superop or as hamiltonian/jump blocks".into());
                }
                if self.matrices(Role::Hamiltonian).count() > 1 || self.matrices(Role::Superop).count() > 1 {
                    return bad("at most one hamiltonian or superop block".into());
                }
                if self.lambda_list.is_empty() || self.lambda_list.iter().any(|&l| l <= 0.0) {
                    return bad("semigroup needs a lambda_list of positive values".into());
                }
            }
            Kind::Group => {
                let Some(name) = &self.group else {
                    return bad("group needs `group`".into());
                };
                let group = super::run::parse_group(name).map_err(|e| ConfigError::Validation(e.to_string()))?;
                let gens = group.generators().len();
                let given = self.matrices(Role::Unitary).count();
                if given != gens {
                    return bad(format!("{name} has {gens} generators but {given} unitary blocks were given"));
                }
                let mut idx: Vec<usize> = self.matrices(Role::Unitary).map(|b| b.index).collect();
                idx.sort_unstable();
                if idx != (0..gens).collect::<Vec<_>>() {
                    return bad("unitary blocks must be indexed 0..number of generators".into());
                }
                if self.n_list.is_empty() || self.n_list.contains(&0) {
                    return bad("group needs an n_list of positive values".into());
                }
            }
            Kind::FolnerAudit => unreachable!("handled above"),
        }
        Ok(())
    }

    /// Distinct map indices among kraus/superop blocks, sorted.
    pub fn map_indices(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = self
            .blocks
            .iter()
            .filter(|b| matches!(b.role, Role::Kraus | Role::Superop))
            .map(|b| b.index)
            .collect();
        idx.sort_unstable();
        idx.dedup();
        idx
    }
}
