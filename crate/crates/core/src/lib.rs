//! LTE downlink MAC scheduling on synthetic fading channels.
//!
//! The crate covers the full chain of a single-cell, full-buffer downlink:
//! fading traces ([`channel`]), SINR to rate mapping ([`linkadapt`]), the
//! per-TTI decision of the MTS, BETS, PFS and FTGS schedulers in time and
//! frequency domain ([`schedulers`]), the FTGS weight optimization
//! ([`ftgs`]), the simulation loop ([`sim`]) and the metrics computed from
//! its output ([`analytics`]).

pub mod analytics;
pub mod channel;
pub mod error;
pub mod ftgs;
pub mod linkadapt;
pub mod quadrature;
pub mod schedulers;
pub mod sim;
pub mod special;

pub use error::{Error, Result};
pub use ftgs::FtgsParameters;
pub use linkadapt::{RateModel, SnrGap};
pub use schedulers::{SchedulerConfig, SchedulerKind, SchedulingMode};
pub use sim::{run, Scenario, SimReport};
