//! Certificates for both answers, plus the tools that check the solver:
//! a brute-force oracle, a handcuff search and a random instance generator.

pub mod check;
pub mod fuzz;
pub mod handcuff;
pub mod oracle;

use crate::eliminate::EliminationRecord;
use crate::formula::Assignment;
use crate::residue::HandcuffRefutation;

pub use check::{check_refutation, check_witness, read_refutation, refutation_problem, write_refutation};
pub use fuzz::FuzzConfig;
pub use handcuff::{
    find_handcuff_refutation, find_handcuff_refutation_with, handcuff_consistency_violation,
    is_handcuff_consistent, ConsistencyViolation, SearchLimits,
};
pub use oracle::{brute_force_sample, brute_force_sat, brute_force_sat_with, OracleAnswer};

/// Evidence for an answer.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    Witness(Assignment),
    Refutation(HandcuffRefutation),
    /// The eliminations that ended in a contradiction, when no handcuff was found.
    Trace(Vec<EliminationRecord>),
}
