//! Operator-algebra quantum error correction for finite-dimensional channels.
//!
//! Given a quantum channel in Kraus form, this crate computes the von Neumann
//! algebras of observables the channel preserves or that can be recovered:
//!
//! - the **noiseless algebra**, the commutant of the channel elements, whose
//!   observables are fixed by the dual channel with no active correction;
//! - the **correctable algebra**, the commutant of the pairwise products
//!   `E_i† E_j`, whose observables can all be recovered by one explicit
//!   correction channel `R(rho) = E_lambda*(K rho K)` with
//!   `K = E_lambda(1)^{-1/2}`;
//! - the **block structure** of any such algebra, i.e. the decomposition
//!   into blocks `M_n ⊗ 1_m` exhibiting its hybrid classical/quantum content
//!   (the center is the classical part; a trivial center means a factor, a
//!   purely quantum code).
//!
//! On top of the solvers, [`qec`] provides condition checkers (Knill-Laflamme
//! and subsystem-code conditions), verifiers for the correction identities,
//! restricted codes on a subspace together with their operator systems, and
//! robustness checks under remixing of the Kraus elements. [`constructions`]
//! ships reference channel families with their analytically known answers,
//! and [`docs`] defines the JSON interchange formats consumed by the `oaqec`
//! command-line tool.
//!
//! All computations are dense, seeded where randomized, and pure: no global
//! state, safe to call concurrently.
//!
//! # Quick start
//!
//! ```
//! use oaqec::{constructions, qec, Tol};
//!
//! let tol = Tol::default();
//! let fixture = constructions::type1_code(2, 3, &[0.5, 0.3, 0.2], 8, 7).unwrap();
//! let alg = qec::correctable_algebra(&fixture.channel, tol).unwrap();
//! assert_eq!(alg.dim(), 4); // all of B(C^2) on the code space
//!
//! let correction = qec::correction_channel(&fixture.channel, tol).unwrap();
//! let residual = qec::verify_correction(&fixture.channel, &correction, &alg, tol).unwrap();
//! assert!(residual < 1e-9);
//! ```

pub mod algebra;
pub mod channel;
pub mod constructions;
pub mod docs;
pub mod linalg;
pub mod qec;

// pub use algebra::{AlgebraStructure, VnAlgebra};
pub use channel::{DilationModel, KrausChannel, ValidationReport};
pub use linalg::{CMat, CVec, OperatorBasis};

/// Numerical tolerance used for rank decisions and residual thresholds.
///
/// Singular values below `eps` times the largest singular value are treated
/// as zero; a system whose largest singular value is itself below `eps` is
/// treated as the zero map (all inputs here are assembled from Hilbert-Schmidt
/// normalized operators, so a legitimate nonzero system has norm of order 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tol {
    eps: f64,
}

impl Tol {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::Domain(format!(
                "tolerance must be a positive finite number, got {eps}"
            )));
        }
        Ok(Self { eps })
    }

    #[inline]
    pub fn eps(&self) -> f64 {
        self.eps
    }
}

impl Default for Tol {
    fn default() -> Self {
        Self { eps: 1e-9 }
    }
}

/// Errors reported by the solvers and the document layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate spectrum after {retries} retries: {context}")]
    Degenerate { context: String, retries: usize },
    #[error("numerical instability: {0}")]
    Unstable(String),
    #[error("invalid document: {0}")]
    Document(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
