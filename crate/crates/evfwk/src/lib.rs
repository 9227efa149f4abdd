//! Concurrent event-processing framework with reproducible output.
//!
//! A pipeline is a set of [`Task`]s wired together by the collections they
//! declare as inputs and outputs. Wiring is validated up front (unique
//! producers, no missing inputs, matching type tags, no cycles); events then
//! flow through a shared per-event store where each collection is written
//! exactly once. A task runs only after all of its inputs exist, so reads
//! never block.
//!
//! The scheduler overlaps work on two axes: several events are in flight at
//! once (bounded by `n_workers`), and independent tasks of the same event
//! run in parallel. Reproducibility is preserved anyway:
//!
//! * random numbers come from counter-based streams seeded per
//!   `(global_seed, task, event_index)`, see [`task_event_seed`];
//! * sink writes (histograms, row stores) are staged per task and applied
//!   in strict event-index order, tasks in schedule order within an event.
//!
//! Output files are therefore byte-identical for any worker count, including
//! the single-threaded reference mode.
//!
//! ```
//! use evfwk::{
//!     EventCtx, EventData, Level, Logger, Pipeline, RunOptions, Task, TaskResult, TaskSpec,
//!     VecSource, Value,
//! };
//! use std::sync::Arc;
//!
//! struct Doubler {
//!     spec: TaskSpec,
//! }
//!
//! impl Task for Doubler {
//!     fn spec(&self) -> &TaskSpec {
//!         &self.spec
//!     }
//!     fn process(&self, ctx: &mut EventCtx) -> TaskResult {
//!         let x: Arc<f64> = ctx.get("x")?;
//!         ctx.put("y", *x * 2.0)?;
//!         Ok(())
//!     }
//! }
//!
//! let doubler = Doubler {
//!     spec: TaskSpec::new("double").input("x", "f64").output("y", "f64"),
//! };
//! let mut pipe = Pipeline::new(
//!     vec![Box::new(doubler)],
//!     &[String::from("x")],
//!     Logger::stderr(Level::Warning),
//! )
//! .unwrap();
//!
//! let events = (0..4u64)
//!     .map(|i| EventData {
//!         collections: vec![(String::from("x"), Arc::new(i as f64) as Value)],
//!     })
//!     .collect();
//! let stats = pipe
//!     .run(&mut VecSource::new(events), &RunOptions { n_workers: 2, global_seed: 1, sequential: false })
//!     .unwrap();
//! assert_eq!(stats.events_processed, 4);
//! ```

pub mod config;
mod error;
mod graph;
mod rng;
mod runner;
mod services;
mod store;
mod task;

pub use error::{Error, Result};
pub use graph::Graph;
pub use rng::{fnv1a64, mix64, task_event_seed, RngStream};
pub use runner::{
    CappedSource, EventData, EventSource, Pipeline, RunOptions, RunStats, VecSource,
};
pub use services::{H1Id, H2Id, HistSvc, Level, Logger, NtId, NtupleSvc, Services};
pub use task::{BoxError, EventCtx, Port, Task, TaskResult, TaskSpec, Value};
