//! Seeded Monte Carlo laboratory for an interacting multi-factorial
//! innovation process of Indian-buffet type.
//!
//! Customers arrive one at a time; each tries a Poisson number of new
//! dishes whose mean decays like `alpha/t^(1-beta)`, and retries old
//! dishes with a probability mixing self-reinforcement (weight
//! `(1-iota)`) with the mean popularity of all observed dishes (weight
//! `iota`), the whole damped by a factor `w`.
//!
//! The crate provides:
//!
//! * exact, reproducible simulation of the dynamics with a
//!   count-histogram fast path and a naive reference path
//!   ([`state`], [`trajectory`]);
//! * the closed-form observables and identities, regime classification
//!   over `(beta, w, iota)` and the matching scaling rules
//!   ([`observables`], [`regime`], [`scaling`]);
//! * a generic engine for the recursive dynamics underlying the model's
//!   dish-level process, with stochastic-approximation and CLT harnesses
//!   ([`recursion`]);
//! * ensemble orchestration, normality gates, law-of-iterated-logarithm
//!   band checks, CLT pipelines and log-log parameter recovery
//!   ([`ensemble`], [`cltpipe`], [`estimate`], [`stats`]);
//! * deterministic CSV / text serialization and a small CLI
//!   ([`config`], [`export`], [`report`]).
//!
//! See `examples/` for one runnable program per capability.

pub mod config;
pub mod error;
pub mod params;
pub mod rng;
pub mod sampling;
pub mod state;
pub mod observables;
pub mod trajectory;
pub mod regime;
pub mod scaling;
pub mod stats;
pub mod recursion;
pub mod ensemble;
pub mod cltpipe;
pub mod estimate;
pub mod export;
pub mod report;

mod fenwick;

pub use error::{Error, Result};
pub use params::Parameters;
pub use state::{ModelState, StepMode, StepRecord, TaggedDish};
pub use trajectory::{geometric_checkpoints, simulate, Trajectory};
