//! Exact decision procedures for weighted bisimilarity and weighted language
//! equivalence of automata over semirings.

pub mod automata;
pub mod cli;
pub mod error;
pub mod language;
pub mod linalg;
pub mod linearpr;
pub mod linsolve;
pub mod partition;
pub mod semiring;
pub mod setbisim;

pub use automata::{AnyAutomaton, AutomatonBuilder, WeightedAutomaton};
pub use error::{Error, Result};
pub use language::{Word, FunctionalTable, OracleVerdict};
pub use linalg::{CongruencePresentation, Functional, LinearMap, StateId, Vector};
pub use partition::Partition;
pub use semiring::{Descriptor, Semiring};
