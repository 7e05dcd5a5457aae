//! Position auctions for queue slots.
//!
//! Participants wait in a single queue; each has a service time `t` and a
//! value of time `w`. The crate computes the efficient order, runs the VCG
//! and GSP queue auctions, verifies Nash equilibria two ways, bounds the
//! organizer's equilibrium revenue and cross-checks all of it against a
//! brute-force oracle for small instances.

pub mod bounds;
pub mod cli;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod fixtures;
pub mod generate;
pub mod io;
pub mod mechanisms;
pub mod model;
pub mod numeric;
pub mod oracle;

pub use error::{Error, ErrorClass, Result};
pub use mechanisms::{BidProfile, MechanismKind, Outcome};
pub use model::{Instance, Participant, QueueOrder};
pub use numeric::{Exact, Scalar};
