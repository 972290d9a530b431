//! Symmetric private information retrieval from MDS-coded storage.
//!
//! A database of `K` files is stored on `N` non-communicating nodes with a
//! systematic `(N, M)`-MDS code. The user retrieves one file while no node
//! learns which, and the user learns nothing about the other files. The
//! scheme downloads `N/(N-M)` symbols per file symbol and consumes
//! `M/(N-M)` symbols of node-side common randomness per file symbol.
//!
//! ```
//! use spir_core::{protocol::run_round, rates::measure, Database, StorageParams};
//!
//! let params = StorageParams::new(5, 4, 2, 3, 1)?;
//! let db = Database::zeros(&params);
//! let transcript = run_round(&params, &db, 2, 7, 11)?;
//! assert_eq!(transcript.download_count, 8);
//! assert!(measure(&transcript)?.at_capacity);
//! # Ok::<(), spir_core::Error>(())
//! ```

pub mod audit;
pub mod error;
pub mod field;
pub mod harness;
pub mod linalg;
pub mod network;
pub mod protocol;
pub mod rates;
pub mod rng;
pub mod storage;

pub use error::{Error, Result};
pub use field::{Field, FieldElement, PrimeField, RationalField};
pub use linalg::Matrix;
pub use storage::{Database, GeneratorMatrix, NodeData, StorageParams};

/// Matrices over a prime field.
pub type FpMatrix = Matrix<PrimeField>;
/// Matrices over the rationals.
pub type QMatrix = Matrix<RationalField>;
/// Exact rational with unbounded numerator and denominator.
pub type Rational = num_rational::BigRational;
