//! Exact arithmetic for n-party non-signaling boxes: construction and
//! validation, locality, wirings, distillation of correlated boxes, and the
//! communication cost of simulating full-correlation boxes.

pub mod boolfn;
pub mod boxes;
pub mod boxfile;
pub mod commcost;
pub mod distill;
pub mod error;
pub mod locality;
pub mod rational;
pub mod report;
mod simplex;
pub mod wiring;

pub use boolfn::{AnfFunction, Monomial, NonlocalSupport};
pub use boxes::BoxTable;
pub use error::{Error, Result};
pub use rational::Rational;
