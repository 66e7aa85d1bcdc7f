//! Simulator and operator algebra for Type-2 machines with oracle access
//! through infinite queries.
//!
//! The crate is organized around a small set of layers:
//!
//! - [`seq`]: eventually periodic sequences and the pairing machinery;
//! - [`dsl`]: the `.t2m` textual machine format;
//! - [`machine`]: machine graphs, configurations and fuel-bounded runs;
//! - [`oracle`]: oracles and depth-budgeted query resolution;
//! - [`transform`]: layer separation, composition, query splitting;
//! - [`weihrauch`]: semantic problems, reduction checking, the operator
//!   algebra (products, coproducts, parallelizations);
//! - [`models`]: revising computation, the MAX/LPO loop, halting demo;
//! - [`circuits`]: arithmetic circuits over finite sets of naturals.

pub mod circuits;
pub mod corpus;
pub mod dsl;
pub mod machine;
pub mod oracle;
pub mod seq;
pub mod transform;
pub mod models;
pub mod weihrauch;

pub use seq::{EvSeq, SeqTuple, Symbol};
