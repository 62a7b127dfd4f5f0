//! Observability toolkit for system-level communication flows.
//!
//! Flows are modeled as labeled Petri nets ([`flow_model`]), loaded from a
//! small line-oriented format ([`spec_io`]), executed under a seeded random
//! workload with a bandwidth-limited tracing module ([`tracing_sim`]), scored
//! by flow-instance and complete-execution coverage ([`coverage`]), and tuned
//! by choosing which events to monitor ([`selection`]). [`experiment`] ties
//! these together into reproducible seed/capacity sweeps.

pub mod coverage;
pub mod experiment;
pub mod flow_model;
pub mod ids;
pub mod selection;
pub mod spec_io;
pub mod tracing_sim;
