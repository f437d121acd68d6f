//! Absorption-set analysis for regular LDPC codes.
//!
//! The crate is organised bottom-up:
//!
//! * [`tanner`] holds the bipartite code representation, the alist reader and
//!   writer, and the quasi-cyclic block expander.
//! * [`synth`] builds small random or planted test codes.
//! * [`absorption`], [`topology`] and [`search`] decide, enumerate and count
//!   absorption sets, either exhaustively or guided by hidden-check topologies.
//! * [`dynamics`] linearises message passing inside a set and extracts the
//!   dominant eigenpair of its internal operator.
//! * [`de`] and [`qfunc`] provide Gaussian-approximation density evolution and
//!   tail probabilities.
//! * [`floor`] turns all of the above into per-set failure probabilities and
//!   union-bound BER/FER curves.
//! * [`sim`] is a belief-propagation simulator with plain and importance-sampled
//!   Monte Carlo used to cross-check the analytic floor.

pub mod absorption;
mod canon;
pub mod de;
pub mod dynamics;
mod error;
pub mod floor;
pub mod qfunc;
pub mod search;
pub mod sim;
pub mod synth;
pub mod tanner;
pub mod topology;

pub use error::{Error, Result};
pub use tanner::TannerGraph;
