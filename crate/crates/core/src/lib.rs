//! Global stability analysis for planar vector fields whose Jacobian has
//! positive determinant and non-positive trace everywhere.
//!
//! Under those hypotheses a critical point is either a global center, a
//! globally asymptotically stable point, or a center enclosed by a globally
//! attracting compact set. This crate decides which, numerically, and keeps
//! the evidence:
//!
//! - [`field`]: field definitions, dual-number jets and interval enclosures.
//! - [`verify`]: interval branch-and-bound certification of the hypotheses,
//!   the two pointwise trace criteria, critical points, injectivity probes.
//! - [`flow`]: Dormand–Prince 5(4) integration, events, polygon transport and
//!   the Liouville area identity.
//! - [`poincare`]: return maps on ray sections, cycle and period-annulus detection.
//! - [`hamiltonian`]: Hamiltonian reconstruction where the trace vanishes.
//! - [`classify`]: the trichotomy decision procedure.
//! - [`report`]: versioned JSON reports and CSV exports.
//! - [`cli`]: the `planar` command-line front end.

pub mod classify;
pub mod cli;
pub mod error;
pub mod field;
pub mod flow;
pub mod geom;
pub mod hamiltonian;
pub mod poincare;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
pub use field::{FieldDef, JetSample};
pub use geom::{Point, Region};
