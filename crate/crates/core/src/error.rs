// Copyright 2026 vnerg Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the library.
///
/// The hypothesis variants (`NotFaithful`, `NotInvariant`, `NotInPHalf`) are the
/// ones the command line maps to exit code 2.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix is singular for the requested operation (min eigenvalue {min_eigenvalue:e})")]
    SingularMatrix { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not faithful (min eigenvalue {min_eigenvalue:e})")]
    NotFaithful { min_eigenvalue: f64 },

    #[error("state is not invariant (residual {residual:e})")]
    NotInvariant { residual: f64 },

    #[error("map is not in the class of subunital, subinvariant L2 contractions: {reason}")]
    NotInPHalf { reason: String },

    #[error("operator is not a contraction (norm {norm})")]
    NotContraction { norm: f64 },

    #[error("fixed spaces of T and its adjoint disagree (residual {residual:e})")]
    FixedSpaceMismatch { residual: f64 },

    #[error("resolvent is singular at lambda = {lambda}")]
    SingularResolvent { lambda: f64 },

    #[error("generator is not of Lindblad form: {reason}")]
    InvalidGenerator { reason: String },

    #[error("group relation violated (residual {residual:e}): {relation}")]
    GroupRelationViolated { relation: String, residual: f64 },

    #[error("unsupported group for this operation: {0}")]
    UnsupportedGroup(String),

    #[error("set size {size} exceeds the configured cap {cap}")]
    SetTooLarge { size: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

impl Error {
    /// Stable machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonFinite => "NonFinite",
            Error::NotPsd { .. } => "NotPSD",
            Error::SingularMatrix { .. } => "SingularMatrix",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotFaithful { .. } => "NotFaithful",
            Error::NotInvariant { .. } => "NotInvariant",
            Error::NotInPHalf { .. } => "NotInP_half",
            Error::NotContraction { .. } => "NotContraction",
            Error::FixedSpaceMismatch { .. } => "FixedSpaceMismatch",
            Error::SingularResolvent { .. } => "SingularResolvent",
            Error::InvalidGenerator { .. } => "InvalidGenerator",
            Error::GroupRelationViolated { .. } => "GroupRelationViolated",
            Error::UnsupportedGroup(_) => "UnsupportedGroup",
            Error::SetTooLarge { .. } => "SetTooLarge",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Consistency(_) => "Consistency",
        }
    }

    /// True for violated mathematical hypotheses (as opposed to bad input).
    pub fn is_hypothesis_failure(&self) -> bool {
        matches!(
            self,
            Error::NotFaithful { .. }
                | Error::NotInvariant { .. }
                | Error::NotInPHalf { .. }
                | Error::NotContraction { .. }
                | Error::GroupRelationViolated { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
