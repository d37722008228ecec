//! File formats, the live chat endpoint, the batch runner and the
//! critique studies around [`backprompt_core`].

pub mod config;
pub mod critique_eval;
pub mod gateway;
pub mod instances;
pub mod runner;
pub mod store;

pub use backprompt_core as core;
