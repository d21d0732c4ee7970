//! Resource limits with predictive failure.
//!
//! Tower orders grow geometrically, so every expensive construction first
//! computes its predicted size from the inputs and refuses before allocating
//! anything when a cap would be exceeded. The caps are configurable per
//! invocation; the defaults are chosen for desk-scale runs.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Limits {
    /// Maximum number of cosets a Todd-Coxeter enumeration may define.
    pub max_cosets: u64,
    /// Maximum order of any finite group that gets materialized.
    pub max_group_order: u64,
    /// Maximum number of scalar entries in any single cohomology linear
    /// system (unknown count times constraint count).
    pub max_system_entries: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_cosets: 2_000_000,
            max_group_order: 100_000,
            max_system_entries: 2_000_000_000,
        }
    }
}

impl Limits {
    pub fn check_cosets(&self, predicted: u64, what: &str) -> Result<()> {
        if predicted > self.max_cosets {
            return Err(Error::resource(format!(
                "{what}: predicted {predicted} cosets exceeds max_cosets = {}",
                self.max_cosets
            )));
        }
        Ok(())
    }

    pub fn check_group_order(&self, predicted: u128, what: &str) -> Result<()> {
        if predicted > self.max_group_order as u128 {
            return Err(Error::resource(format!(
                "{what}: predicted group order {predicted} exceeds max_group_order = {}",
                self.max_group_order
            )));
        }
        Ok(())
    }

    pub fn check_system(&self, unknowns: u128, constraints: u128, what: &str) -> Result<()> {
        let entries = unknowns.saturating_mul(constraints);
        if entries > self.max_system_entries as u128 {
            return Err(Error::resource(format!(
                "{what}: predicted linear system of {unknowns} unknowns x {constraints} \
                 constraints ({entries} entries) exceeds max_system_entries = {}",
                self.max_system_entries
            )));
        }
        Ok(())
    }
}
