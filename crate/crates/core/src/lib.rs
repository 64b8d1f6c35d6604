//! Grammar-driven formal-syntax datasets, equivalence verifiers for
//! propositional logic, first-order logic and regular expressions, and an
//! evaluation harness that measures whether language models preserve
//! meaning across informalize/autoformalize round trips.

pub mod generator;
pub mod harness;
pub mod llm;
pub mod logic_verifier;
pub mod metrics;
pub mod parsing;
pub mod pipeline;
pub mod regex_verifier;
pub mod syntax;
pub mod vocabulary;

pub use metrics::Scalar;

/// Default floating scalar for reports and statistics.
pub type Real = f64;
/// Exact rational scalar, for closed-form values such as the
/// false-positive bound.
pub type Exact = num_rational::Ratio<i64>;
