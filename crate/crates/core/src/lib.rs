//! Co-simulation of a power grid and the datacenters it hosts.
//!
//! The crate walks one pipeline: build or load a grid and its day scenarios
//! ([`grid`]), dispatch it with a DC optimal power flow ([`dcopf`]), measure
//! how much load-shifting headroom each datacenter's day would need
//! ([`decoupling`]), split a storage energy budget across datacenters
//! ([`decoupling`] again), let each management approach reshape the
//! datacenter loads ([`management`]), and price the result in dollars and
//! carbon ([`economics`]). Everything optimizes through the shared [`lp`]
//! layer.

pub mod dcopf;
pub mod decoupling;
pub mod economics;
pub mod grid;
pub mod lp;
pub mod management;
