//! Trace clustering of event logs by entropic relevance against
//! directly-follows graphs.
//!
//! The pipeline is: read events ([`event_log`]) into a [`event_log::VariantLog`],
//! cluster its variants ([`clustering`]), score each cluster's graph
//! ([`relevance`], [`evaluation`]), and compare methods across logs with
//! rank statistics. [`commands`] bundles these steps into file-producing
//! commands.

pub mod clustering;
pub mod commands;
pub mod dfg;
pub mod evaluation;
pub mod event_log;
pub mod relevance;

pub use clustering::{Clustering, ExecOptions, InitStrategy, Method};
pub use dfg::Dfg;
pub use event_log::{Activity, Alphabet, Trace, VariantLog};
