//! Link-level co-simulation of a reconfigurable RF receive front-end.
//!
//! The crate models a complete wireless link around a bias-tunable receiver:
//!
//! ```text
//! framing -> modem (map + shape) -> channel -> rfchain (LNA, mixer, LPF)
//!         -> modem (sync + detect) -> metrics -> tuner
//! ```
//!
//! Signals are complex envelopes in volts across a 50 Ω reference, with the
//! passband convention `s(t) = Re{x(t) e^{j2πf_c t}}`. Mean power is therefore
//! `mean|x|² / (2R)` and the passband RMS voltage is `sqrt(mean|x|² / 2)`.
//!
//! Every stochastic stage takes an explicit RNG. Trial seeds are derived from
//! a master seed and the trial coordinates, so results do not depend on how
//! many worker threads run them.

// `!(x > 0.0)` is used on purpose so NaN lands in the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod framing;
pub mod io;
pub mod link;
pub mod metrics;
pub mod modem;
pub mod rfchain;
pub mod rng;
pub mod stats;
pub mod tuner;
pub mod units;

pub use channel::{ChannelError, ChannelProfile, Tap};
pub use framing::{BitStream, Frame, FrameError, ModulationCode};
pub use link::{LinkError, Stage};
pub use metrics::{MetricsError, MetricsReport};
pub use modem::{
    Detector, IqBlock, ModemError, Modulation, ModulationScheme, PulseShape, Shaper, SymbolRecord,
};
pub use rfchain::{LnaBiasTable, LpfSpec, RfBlockParams, RfError};
pub use tuner::{TargetMetric, TunerError, TunerPolicy, TunerResult};
