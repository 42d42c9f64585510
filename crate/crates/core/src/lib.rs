//! Prime harmonic sums from a segmented sieve, with exact and numeric checks
//! of the identities and bounds that pin `∑_{p<=x} 1/p` to `ln ln x + O(1)`.
//!
//! * [`sieve`]: segmented odd-only sieve, prime streams and `π(x)` checkpoints
//! * [`sums`]: compensated accumulation of `∑ 1/p`, `∑ ln p/p`, `∑ 1/p²`, `∑ ln p/(p²−p)`
//! * [`identities`]: Abel summation, the Stieltjes step identity, Legendre, Euler product
//! * [`bounds`]: Chebyshev, Euler and Rosser–Schoenfeld bounds, B estimates, extrapolation
//! * [`cli`] and [`verify`]: the `mertens` command line

pub mod bounds;
pub mod cli;
pub mod identities;
pub mod sieve;
pub mod sums;
pub mod verify;

pub use bounds::{BoundReport, ExtrapolationQuery, MertensConstants};
pub use identities::{IdentityVerdict, SequencePair};
pub use sieve::{PiCheckpoint, PrimeStream, Sieve, SieveConfig, SieveError};
pub use sums::{CheckpointRow, CompensatedAccumulator};
