// Copyright 2026 vnerg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Mean ergodic theory for maps on finite-dimensional matrix algebras.

pub mod algebra;
pub mod amenable;
pub mod cli;
pub mod cp_maps;
pub mod ergodic;
pub mod error;
pub mod linalg;
pub mod random;
pub mod semigroup;
pub mod standard_form;

pub use error::{Error, Result};
