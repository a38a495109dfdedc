//! PQF synthesis of single-qubit Z-rotations over Clifford+T, Clifford+V and
//! Clifford+pi/12.
//!
//! A protocol is a bounded list of probabilistic rounds, each built from an
//! exact unitary whose measured ancilla either applies the target rotation
//! or a known correctable one, closed off by a deterministic fallback
//! circuit.

pub mod angle;
pub mod bench;
pub mod error;
pub mod exactsynth;
pub mod fallback;
pub mod ival;
pub mod modifier;
pub mod normeq;
pub mod protocol;
pub mod relation;
pub mod rings;

pub use error::{PqfError, Result, Stage};
pub use rings::{CycInt, RealCycInt, Ring};
