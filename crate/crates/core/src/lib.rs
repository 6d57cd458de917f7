//! Simulation, verification and resource accounting for the distributed
//! (LOCC) implementation of standard quantum oracle operators
//! `U_f |x⟩|y⟩ = |x⟩|y ⊕ f(x)⟩`.
//!
//! The crate is layered bottom-up:
//!
//! * [`quantum`]: labelled state vectors, local operators, measurement,
//!   partial trace, entropy and operator Schmidt rank.
//! * [`oracle`]: function tables, their value partition, `U_f`, its operator
//!   Schmidt decomposition, phase operators and the minimal oracle.
//! * [`protocols`]: entanglement creation and classical communication using
//!   a single application of `U_f`.
//! * [`locc`]: the seven-step distributed implementation of `U_f` using
//!   `log₂ n_f` ebits and `log₂ n_f` bits each way.
//! * [`netsim`]: a referee-hosted two-party execution environment with an
//!   in-process and a TCP transport speaking a length-prefixed JSON wire
//!   format.

pub mod error;
pub mod locc;
pub mod netsim;
pub mod oracle;
pub mod protocols;
pub mod quantum;

pub use error::{Error, Result};
pub use locc::{run_locc, run_locc_all_branches, Branch, ResourceLedger, Transcript};
pub use oracle::{build_partition, FunctionTable, Partition};
pub use quantum::{Party, StateVector, Subsystem, C64};
