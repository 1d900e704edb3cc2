//! Skew products of circle diffeomorphisms forced by expanding circle maps.
//!
//! A system `F(y, x) = (g(y), f_y(x))` pairs an [`ExpandingBase`] `g` with a
//! [`FiberFamily`] `f`. Backward orbits of `g` are handled as truncated
//! solenoid points ([`SolenoidSample`]) so that fiber measures can be pulled
//! back along them, and the [`analysis`] module turns the resulting clouds
//! into synchronization, invariant-graph and mixing diagnostics.

pub mod analysis;
pub mod base;
pub mod catalog;
pub mod circle;
pub mod error;
pub mod fiber;
pub mod measure;
pub mod skew;
pub mod solenoid;
pub mod stepifs;

pub use base::ExpandingBase;
pub use circle::{circle_dist, minimal_covering_arc, wasserstein_circle, CircleArc, CirclePoint};
pub use error::{Error, Result};
pub use fiber::{DerivBounds, FiberFamily};
pub use measure::{AtomEstimate, EmpiricalCircleMeasure};
pub use skew::SkewSystem;
pub use solenoid::{sample_rng, BranchWord, SolenoidRecord, SolenoidSample};
pub use stepifs::{MinimalityReport, StepIfs, StepIfsParams};
