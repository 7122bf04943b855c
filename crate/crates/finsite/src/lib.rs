//! Finite sites built from finite groups.
//!
//! This crate constructs the one-object site of a group, transporter
//! categories over G-posets with an initial object, and their orbit-type
//! quotients; puts trivial, atomic or explicit Grothendieck topologies on
//! them; computes sheaves, sheafification and Kan extensions; and verifies,
//! at desk scale, that sheaves on the quotient sites are the same thing as
//! G-sets (and, with coefficients, RG-modules).

pub mod fincat;
pub mod group;
pub mod grpsites;
pub mod io;
pub mod linmod;
pub mod oracle;
pub mod sites;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A search or materialization exceeded its configured budget. Reported
/// distinctly from mathematical failures everywhere.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("budget exceeded in {context}: explored {nodes} nodes (limit {limit})")]
pub struct BudgetExceeded {
    pub context: &'static str,
    pub limit: u64,
    pub nodes: u64,
}

/// Resource limits for the enumeration-heavy operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    /// Node cap for natural-transformation / limit searches.
    pub nat_nodes: u64,
    /// Cap on the number of sieves materialized per object.
    pub sieve_limit: u64,
    /// Cap on the size of a materialized module value set.
    pub value_cap: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { nat_nodes: 1_000_000, sieve_limit: 100_000, value_cap: 10_000 }
    }
}

/// Crate-level error aggregation, mostly for the CLI layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Group(#[from] group::GroupError),
    #[error(transparent)]
    Cat(#[from] fincat::CatError),
    #[error(transparent)]
    Site(#[from] sites::SiteError),
    #[error(transparent)]
    Bundle(#[from] grpsites::BundleError),
    #[error(transparent)]
    Module(#[from] linmod::ModuleError),
    #[error(transparent)]
    Io(#[from] io::IoError),
}

impl Error {
    /// Whether the error is a resource-budget overrun (as opposed to invalid
    /// input or a structural failure).
    pub fn is_budget(&self) -> bool {
        match self {
            Error::Cat(fincat::CatError::Budget(_)) => true,
            Error::Site(e) => e.is_budget(),
            Error::Bundle(e) => e.is_budget(),
            Error::Module(e) => e.is_budget(),
            _ => false,
        }
    }
}
