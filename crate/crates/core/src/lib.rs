//! Exact-arithmetic kernel for higher order differential operators on
//! superalgebras, generalized Batalin-Vilkovisky brackets, and the
//! verification suites built on them: polynomial/exterior algebras, Lie
//! algebra (co)homology complexes realized through Clifford-style operators,
//! Schouten multivector calculus, a truncated bc ghost system, and the
//! quantum master equation machinery.
//!
//! Everything is rational and exact; identities are always verified as
//! "LHS - RHS = 0" on explicit elements, so a failure is a re-checkable
//! counterexample, never a tolerance miss.

pub mod algebra;
pub mod bracket;
pub mod diffops;
pub mod element;
pub mod error;
pub mod lie;
pub mod linalg;
pub mod linop;
pub mod master;
pub mod poly;
pub mod random;
pub mod vosa;
pub mod report;
pub mod schouten;
pub mod scalar;
pub mod structconst;

pub use algebra::{multiply, AlgebraFlags, Superalgebra};
pub use element::{Element, Word};
pub use error::{KernelError, Result};
pub use linop::LinOp;
pub use report::{IdentityReport, OrderReport};
pub use scalar::Scalar;
