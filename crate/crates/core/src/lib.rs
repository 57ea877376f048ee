//! Simulation and analysis of wideband OFDM linear multihop networks.
//!
//! A route of `N` decode-and-forward hops with spatial reuse separation `K`
//! is evaluated through its end-to-end conditional mutual information under
//! two relaying strategies:
//!
//! * fixed-rate relaying, with equal time-sharing across the `K` reuse phases;
//! * rate-adaptive relaying, with time-sharing optimised per fading draw.
//!
//! The crate is organised bottom-up:
//!
//! * [`topology`] builds the reuse phases and intra-route interference sets;
//! * [`channel`] draws quasi-static tap realizations and OFDM tone responses;
//! * [`linkmath`] turns tones into SINRs, per-hop and end-to-end rates;
//! * [`wideband`] computes Eb/N0-min and the wideband slope, both in closed
//!   form and as numerical low-SNR limits;
//! * [`montecarlo`] runs seeded, schedule-independent trial ensembles;
//! * [`stats`] and [`evt`] hold the empirical-distribution and extreme-value
//!   machinery used by the ensembles.

pub mod channel;
pub mod error;
pub mod evt;
pub mod linkmath;
pub mod montecarlo;
pub mod stats;
pub mod topology;
pub mod wideband;

pub use channel::{ChannelRealization, FadingSpec, ToneGrid};
pub use error::{Error, Result};
pub use evt::{EvtFamily, EvtFit};
pub use linkmath::LinkRates;
pub use montecarlo::{McConfig, McSummary};
pub use topology::{NetworkConfig, ReusePlan};
pub use wideband::{Strategy, WidebandMetrics};

pub use num_complex::Complex64;
