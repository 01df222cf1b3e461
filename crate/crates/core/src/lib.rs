//! Click and coincidence statistics, CHSH correlations and Bell parameters for
//! polarization-entangled light sent through fluctuating-loss channels.
//!
//! The analytical models live in [`bellstate`] (ideal two-photon source) and
//! [`pdc`] (parametric down-conversion with multiphoton terms). Every closed
//! form is checked against [`oracle`], a truncated Fock-space computation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bellstate;
pub mod channel;
pub mod chsh;
pub mod detector;
pub mod error;
pub mod estimation;
pub mod figures;
pub mod oracle;
pub mod pdc;
pub mod quadrature;
pub mod rng;
pub mod validation;

pub use channel::{Pdtc, TransmissionSample};
pub use chsh::{AngleSettings, BellOptimum, CoincidenceTable};
pub use detector::{Arm, DetectionMode, DetectorBank, DetectorParams, Pair};
pub use error::{Error, Result};
