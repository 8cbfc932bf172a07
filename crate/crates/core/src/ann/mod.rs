//! Seasonal `s × h × s` networks.
//!
//! Both kinds read a flat [`ParameterVector`] whose layout is fixed by
//! [`SannTopology`], so the backprop and swarm trainers share one currency.

mod bic;
mod forecast;
mod network;
mod patterns;
mod topology;

pub use bic::{bic, select_hidden_nodes, CandidateScore, HiddenSelection, SSE_FLOOR};
pub use forecast::{forecast_iterated, forecast_iterated_with, warm_context};
pub use network::{forward_seann, forward_sfann, logistic, sse, ElmanContext, CONTEXT_INIT};
pub use patterns::{build_patterns, build_patterns_with, PatternLayout, PatternSet};
pub use topology::{param_count, NetKind, ParameterVector, SannTopology};

pub(crate) use network::Sann;
