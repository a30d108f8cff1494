//! Exact satisfiability for conjunctions of bends over the rationals.
//!
//! A bend is a disjunction `x ∘ d₁ ∨ a·x + b·y ∘ c ∨ y ∘ d₂` whose bounds point
//! in the direction of the corresponding coefficient. Conjunctions of bends
//! are exactly the median-closed semilinear constraints, and [`solve`] decides
//! them in strongly polynomial time, returning a rational witness or a
//! refutation.

pub mod bend;
pub mod certify;
pub mod eliminate;
pub mod error;
pub mod formula;
pub mod frontend;
pub mod linear;
pub mod num;
pub mod propagate;
pub mod reason;
pub mod residue;

pub use bend::{normalize_bend, Bend, Bound, Literal, RawLiteral, Rel, Slot, TvpiIneq, VarId};
pub use eliminate::{solve, solve_with, SolveOptions, SolveResult};
pub use error::{Error, SourceLocation};
pub use formula::{eval_bend, median3, Assignment, BijunctiveFormula};
pub use num::{ExtendedRational, Rational};
pub use reason::{bound_implies, bounds_conflict, strongest_bound, Endpoint, Interval, Side};
pub use frontend::{parse, pretty_print};
