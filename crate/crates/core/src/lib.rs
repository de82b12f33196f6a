//! Regional small-gain verification for interconnected ISS systems.
//!
//! The crate is organised around five pieces:
//!
//! * [`scalar_fn`]: comparison functions (class K / K∞) with closed-form
//!   segments, inversion by bisection, composition, grid margin checks and
//!   the two bridge constructions (explicit K∞ bridge, smooth monotone bridge).
//! * [`certificates`]: ISS-Lyapunov certificates, regional gain bundles, the
//!   sampling-based assumption checkers and the merged max-type Lyapunov
//!   functions with their level constants.
//! * [`dynamics`]: numerical Dini derivatives, fixed-step RK4 integration of
//!   the interconnection, trajectory monitors and ensembles.
//! * [`gallery`]: a fully validated scalar example with a discontinuous
//!   optimal gain for which only the regional conditions can succeed, plus a
//!   small linear pair on which every assumption holds.
//! * [`cli`]: the `rsg` command-line front end (`check`, `simulate`,
//!   `reproduce`, `bridge`).
//!
//! Runnable walkthroughs live in `examples/`; see the README for the list.

pub mod certificates;
pub mod cli;
pub mod dynamics;
pub mod gallery;
pub mod scalar_fn;

pub use certificates::{CheckReport, IssCertificate, MergedLyapunov, RegionalGainBundle};
pub use dynamics::{InterconnectedSystem, Trajectory};
pub use scalar_fn::{ComparisonFunction, Gain, GainError, MarginReport, PiecewiseGain};
