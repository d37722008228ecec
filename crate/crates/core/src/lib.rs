//! Sound domain verifiers and the iterative generate/verify/critique loop.
//!
//! Everything in this crate is pure: no file system, no network, no clock.
//! Three reasoning domains are supported:
//!
//! - [`game24`]: exact rational evaluation of arithmetic expressions over four numbers.
//! - [`coloring`]: planar graph instances with exact chromatic numbers.
//! - [`strips`]: a STRIPS subset of PDDL with a plan simulator.
//!
//! [`harness`] drives a chat model through the backprompting loop and
//! [`metrics`] turns the resulting transcripts into accuracy tables,
//! verifier confusion counts and per-iteration curves.

#![no_std]

extern crate alloc;

pub mod coloring;
pub mod game24;
pub mod harness;
pub mod metrics;
pub mod strips;
pub mod text;

pub use harness::{
    Candidate, Critique, FeedbackLevel, ProblemInstance, Round, StopReason, Strategy, Transcript, Verdict,
    VerdictSource,
};
