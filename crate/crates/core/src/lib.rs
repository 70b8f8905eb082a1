//! Average-reward MDP and SMDP models, exact solvers, RVI Q-learning and
//! its option variants, the associated ODEs, and solution-set diagnostics.
//!
//! `no_std` with `alloc`. Q-vectors are indexed by state-action pairs in
//! the order given by [`model::Layout`].

#![no_std]

extern crate alloc;

pub mod chain;
pub mod error;
pub mod examples;
pub mod learning;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod options;
pub mod oracle;
pub mod reference;
pub mod schedule;
pub mod solvers;
pub mod structure;

pub use error::{Error, Result};
pub use model::{DeterministicPolicy, Layout, Model, ModelBuilder, StationaryPolicy, TabularQ, Transition};
pub use reference::FFunction;
pub use schedule::StepSchedule;
