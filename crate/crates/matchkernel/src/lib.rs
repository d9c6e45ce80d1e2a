//! Polynomial-time classical simulation of nearest-neighbor matchgate
//! circuits, packaged as a quantum-kernel machine-learning toolkit.
//!
//! Matchgate circuits map exactly to free Majorana fermions: a circuit on
//! `N` qubits compiles to a real orthogonal `2N x 2N` transfer matrix, and
//! output probabilities reduce to Pfaffians of skew-symmetric contraction
//! matrices. That makes fidelity kernels between data-encoded circuits
//! computable in polynomial time at widths far beyond dense statevector
//! simulation.
//!
//! The crate provides:
//!
//! * [`gates`] — matchgate validation, unitaries, Jordan-Wigner strings;
//! * [`circuit`] — the ansatz family and data-to-angle encoding;
//! * [`transfer`] — compilation to transfer matrices;
//! * [`pfaffian`] — sign-correct Pfaffians via Parlett-Reid;
//! * [`contraction`] — probabilities and kernel values by Wick contraction;
//! * [`oracle`] — a dense statevector reference (`N <= 12`) and the
//!   backend for the unrestricted baselines;
//! * [`gram`] — parallel Gram-matrix evaluation with CSV/JSON output;
//! * [`svm`] — an SMO kernel SVM with one-vs-rest and stratified k-fold
//!   cross-validation;
//! * [`data`] — CSV loading and min-max scaling;
//! * [`verify`] — a randomized differential suite tying the fermionic path
//!   to the oracle.

pub mod circuit;
pub mod contraction;
pub mod data;
pub mod error;
pub mod gates;
pub mod gram;
pub mod oracle;
pub mod pfaffian;
pub mod svm;
pub mod transfer;
pub mod verify;

pub use circuit::{build_ansatz, encode_angles, AngleVector, AnsatzKind, CircuitSpec, EncodingParams};
pub use contraction::{kernel_value, marginal_probability, vacuum_probability};
pub use error::{Error, Result};
pub use gates::Matchgate;
pub use gram::{gram_matrix, GramHeader, GramMatrix};
pub use svm::{cross_validate, ExperimentResult, SvmParams};
pub use transfer::{compile_transfer, TransferMatrix};
