//! Link-level simulator for a full-duplex MIMO decode-and-forward relay with
//! residual self-interference (RSI).
//!
//! The crate covers achievable rates of the source-relay and
//! relay-destination links under slow and fast RSI, the relay precoders
//! that maximize each of them, and a fixed-rate buffered relaying model
//! with its throughput.

// `!(x > 0.0)` style checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod linalg;
pub mod montecarlo;
pub mod precoders;
pub mod queue;
pub mod randgen;
pub mod rates;

pub use error::{Error, Result};
