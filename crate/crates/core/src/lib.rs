//! A workbench for coalgebraic bisimulation checking on finite set functors
//! and their Stone companions.
//!
//! The crate is organised around a small grammar of weak-pullback-preserving
//! set functors ([`functor::FunctorExpr`]). For these functors it provides:
//!
//! - the Barr relation lifting and lax-extension law checks ([`functor`]),
//! - relation algebra and the forward/backward arrow liftings between
//!   families of clopens ([`relation`]),
//! - the nabla modality and the clopen algebra it generates ([`nabla`]),
//! - finite coalgebras, Barr bisimulations and behavioural equivalence via
//!   the terminal sequence ([`coalgebra`]),
//! - finite Stone coalgebras, neighbourhood and Vietoris bisimulations and
//!   their lattice ([`stone`]),
//! - inverse towers of finite coalgebras presenting profinite systems, with
//!   depth-bounded closure and bisimulation checks ([`tower`]).
//!
//! Everything is exact: carriers are finite, values are canonical trees, and
//! every check either runs to completion or fails fast with
//! [`Error::SizeGuardExceeded`].

pub mod cli;
pub mod coalgebra;
pub mod functor;
pub mod nabla;
pub mod output;
pub mod parse;
pub mod relation;
pub mod stone;
pub mod tower;
pub mod value;

use thiserror::Error;

/// Errors shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    /// An enumeration (or a product of enumerations) would exceed the
    /// configured guard. The instance is beyond desk scale.
    #[error("size guard exceeded: {what} needs {needed} values, guard is {guard}")]
    SizeGuardExceeded {
        what: String,
        needed: u128,
        guard: u64,
    },
    /// A value does not fit the shape prescribed by a functor expression
    /// over a given carrier.
    #[error("malformed value: {0}")]
    MalformedValue(String),
    /// Two objects that must share a carrier do not.
    #[error("carrier mismatch: {0}")]
    CarrierMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A tower or thread was not tabulated deep enough.
    #[error("depth {requested} unavailable: tabulated up to {available}")]
    DepthUnavailable { requested: usize, available: usize },
    /// A post-validated fixpoint or construction failed its own check.
    #[error("internal invariant violated: {0}")]
    InvariantViolated(String),
    #[error("parse error (line {line}): {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Enumeration guard. Every operation that materialises functor values, or
/// scans a product of two enumerations, checks the relevant count against
/// `max_values` before doing any work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_values: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_values: 1 << 20,
        }
    }
}

impl Limits {
    pub fn new(max_values: u64) -> Self {
        Limits { max_values }
    }

    /// Checks `needed <= max_values` and reports `what` on failure.
    pub fn check(&self, needed: u128, what: impl FnOnce() -> String) -> Result<()> {
        if needed > self.max_values as u128 {
            Err(Error::SizeGuardExceeded {
                what: what(),
                needed,
                guard: self.max_values,
            })
        } else {
            Ok(())
        }
    }
}
