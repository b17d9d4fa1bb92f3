//! Workbench for first-order reasoning over finite algebras.
//!
//! The crate evaluates formulas as bit-vector subsets of the affine space
//! `H^X` of variable assignments, computes point kernels and the induced
//! type partitions (atomic, quantifier-refined, automorphism orbits), and
//! answers closure queries for equation systems and formula systems.
//! Everything is deterministic: identical inputs produce identical reports,
//! bit for bit.
//!
//! The crate is `no_std` (with `alloc`); file formats and the command-line
//! front end live in the companion `logeo-cli` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod algebra;
pub mod axioms;
pub mod formula;
pub mod geometry;
pub mod signature;
pub mod space;
pub mod typesys;
pub mod zline;

mod intern;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Resource limits enforced before any large allocation happens.
///
/// `max_points` bounds the size of one assignment space `|H|^n`;
/// `max_carrier` bounds the carrier size accepted by the automorphism and
/// isomorphism searches; `z_entry_bound` bounds integer tuple entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guards {
    pub max_points: u64,
    pub max_carrier: usize,
    pub z_entry_bound: i64,
}

impl Default for Guards {
    fn default() -> Self {
        Guards {
            max_points: 1 << 24,
            max_carrier: 64,
            z_entry_bound: 1_000_000,
        }
    }
}

/// Everything that can go wrong in the core crate.
///
/// Parse errors carry a byte offset into the input text. Guard errors are
/// distinct variants so the front end can map them to a dedicated exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed input text; `pos` is a byte offset.
    Syntax { pos: usize, msg: String },
    /// Identifier is neither a declared operation nor a sort variable.
    UnknownSymbol { name: String, pos: usize },
    /// Operation applied to the wrong number of arguments.
    ArityMismatch { op: String, expected: usize, found: usize, pos: usize },
    /// Variable used outside its sort.
    VarNotInSort { name: String, pos: usize },
    /// Two objects over different sorts were combined.
    SortMismatch { context: String },
    /// Two point sets over different algebras were combined.
    AlgebraMismatch { context: String },
    /// A theory-membership query needs a closed formula.
    NotClosed { free: Vec<String> },
    /// Declared signature is inconsistent (duplicate symbol, bad infix, ...).
    BadSignature { detail: String },
    /// Sort list is unusable (empty name, duplicate, not an identifier).
    BadSort { detail: String },
    /// Operation table has the wrong shape or an out-of-range entry.
    BadTable { op: String, detail: String },
    /// A law required by the declared variety fails; `witness` is an
    /// argument tuple violating it.
    IdentityViolation { law: String, witness: Vec<u8> },
    NotPrime { p: u32 },
    /// An operation-specific precondition does not hold.
    Precondition { detail: String },
    /// Assignment space would exceed `Guards::max_points`.
    PointsGuard { needed: u128, limit: u64 },
    /// Carrier exceeds `Guards::max_carrier`.
    CarrierGuard { carrier: usize, limit: usize },
    /// Carrier exceeds the fixed element-encoding cap of 256.
    CarrierTooLarge { carrier: usize },
    /// Integer tuple entry outside `Guards::z_entry_bound`.
    ZEntryBound { value: i64, bound: i64 },
    /// 64-bit signed overflow while evaluating an integer formula.
    ZOverflow,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Syntax { pos, msg } => write!(f, "syntax error at byte {pos}: {msg}"),
            Error::UnknownSymbol { name, pos } => {
                write!(f, "unknown symbol `{name}` at byte {pos}")
            }
            Error::ArityMismatch { op, expected, found, pos } => write!(
                f,
                "operation `{op}` expects {expected} argument(s), found {found} (byte {pos})"
            ),
            Error::VarNotInSort { name, pos } => {
                write!(f, "variable `{name}` is not in the sort (byte {pos})")
            }
            Error::SortMismatch { context } => write!(f, "sort mismatch: {context}"),
            Error::AlgebraMismatch { context } => write!(f, "algebra mismatch: {context}"),
            Error::NotClosed { free } => {
                write!(f, "formula is not closed; free variables: {}", free.join(", "))
            }
            Error::BadSignature { detail } => write!(f, "bad signature: {detail}"),
            Error::BadSort { detail } => write!(f, "bad sort: {detail}"),
            Error::BadTable { op, detail } => write!(f, "bad table for `{op}`: {detail}"),
            Error::IdentityViolation { law, witness } => {
                write!(f, "identity `{law}` fails at {witness:?}")
            }
            Error::NotPrime { p } => write!(f, "{p} is not prime"),
            Error::Precondition { detail } => write!(f, "precondition violated: {detail}"),
            Error::PointsGuard { needed, limit } => {
                write!(f, "assignment space needs {needed} points, guard allows {limit}")
            }
            Error::CarrierGuard { carrier, limit } => {
                write!(f, "carrier {carrier} exceeds guard {limit}")
            }
            Error::CarrierTooLarge { carrier } => {
                write!(f, "carrier {carrier} exceeds the encoding cap of 256")
            }
            Error::ZEntryBound { value, bound } => {
                write!(f, "entry {value} outside the configured bound {bound}")
            }
            Error::ZOverflow => write!(f, "64-bit overflow in integer evaluation"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
