// Copyright 2026 vnerg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Discrete amenable groups acting by inner automorphisms.
//!
//! Haar measure is counting measure, so every Følner average is a finite
//! mixed-unitary map.

mod action;
mod folner;
mod group;

pub use action::{
    average_map, build_action, folner_profile, folner_profile_against, gns_average_gap, group_average,
    invariant_expectation, unitaries_on, UnitaryAction,
};
pub use folner::{
    folner_audit, folner_boxes, folner_defect, half_open_box, tempered_constant, tempered_ratios, AuditRow,
    FolnerKind, FolnerSequence, FolnerSet, Ratio, SetLimits,
};
pub use group::{CayleyTable, DiscreteGroup, Element, MAX_RANK};
