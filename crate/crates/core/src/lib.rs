//! Discrete-time simulator for secondary-node handover in a 5G
//! dual-connectivity heterogeneous network.
//!
//! The macro gNB is the master node for the whole run; small sub-6 GHz and
//! mmWave gNBs compete to be the secondary node. Three decision strategies
//! are provided ([`hdma::HdmaKind`]), one of which reads the gNB tier from
//! the top two bits of the 22-bit gNB ID inside the NR cell identity
//! ([`nci`]).

pub mod cli;
pub mod config;
pub mod geometry;
pub mod hdma;
pub mod metrics;
pub mod nci;
pub mod radio;
pub mod sim;

pub use config::{ConfigError, ScenarioConfig};
pub use hdma::{Decision, HandoverStrategy, HdmaConfig, HdmaKind};
pub use metrics::RunMetrics;
pub use nci::{decode_nci, encode_nci, gnb_type_of, DecodedNci, GnbType, Ncgi};
pub use sim::{run, HandoverEvent, HandoverKind, SimOutput};
