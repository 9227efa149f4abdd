//! Command-line driver for the event pipeline: `run` executes one JSON
//! config, `bench` sweeps worker counts and reports throughput and memory.

pub mod bench;
pub mod flags;
pub mod plot;
pub mod run;
