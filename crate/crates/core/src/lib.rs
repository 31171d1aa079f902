//! Constant function market makers and the reserve-reconstruction attack
//! against them.
//!
//! A pool quotes a marginal price and accepts trades that keep its trading
//! function constant. Those two public facts are enough to pin down the
//! hidden reserves, and the difference of reserves around a hidden trade is
//! the trade itself.
#![no_std]
// `!(x > 0.0)` style checks reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;

pub mod analysis;
pub mod attack;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod math;
pub mod mitigations;
pub mod newton;
pub mod oracle;
pub mod pool;
pub mod roots;
pub mod scenario;
pub mod trading;

pub use error::{Error, Result};
pub use oracle::{CfmmOracle, Metered, PoolOracle};
pub use pool::{PoolState, PriceVector, Trade};
pub use trading::{feasibility_tolerance, Family, TradingFunctionSpec};
