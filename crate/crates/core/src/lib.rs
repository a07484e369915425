//! Polar-code channel resolvability and strong coordination for two-node
//! networks with binary uniform actions and symmetric channels.

pub mod channel;
pub mod construction;
pub mod coordination;
pub mod error;
pub mod oracle;
pub mod polar;
pub mod regions;
pub mod resolvability;
pub mod rng;
pub mod synthesis;

pub use channel::{capacity, make_bec, make_bsc, parse_preset, ChannelSpec};
pub use construction::{build_code, ConstructionParams, CoordinationCode, SelectionMode};
pub use error::{Error, Result};
pub use polar::PolarParams;
pub use synthesis::{QuantizationBudget, SynthesizedBitChannel};
