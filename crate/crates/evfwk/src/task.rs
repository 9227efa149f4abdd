use std::any::Any;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{fnv1a64, RngStream};
use crate::services::{H1Id, H2Id, Level, NtId, Services};
use crate::store::EventStore;

use hbook::Cell;

pub type BoxError = Box<dyn std::error::Error + Send + Sync + 'static>;
pub type TaskResult = std::result::Result<(), BoxError>;

/// A value stored in the per-event collection map.
pub type Value = Arc<dyn Any + Send + Sync>;

/// One declared input or output: the collection key it binds to, plus an
/// opaque type tag checked at wiring time. Producer and consumer must agree
/// on the tag or the graph is rejected before any event runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Port {
    pub key: String,
    pub type_tag: String,
}

impl Port {
    pub fn new(key: impl Into<String>, type_tag: impl Into<String>) -> Port {
        Port {
            key: key.into(),
            type_tag: type_tag.into(),
        }
    }
}

/// Identity and wiring of a task, fixed before the run starts.
#[derive(Debug, Clone)]
pub struct TaskSpec {
    pub id: String,
    pub inputs: Vec<Port>,
    pub outputs: Vec<Port>,
    /// Mixed into every per-event seed so two tasks with identical
    /// configuration still draw distinct random streams. Defaults to a hash
    /// of the id.
    pub seed_salt: u64,
}

impl TaskSpec {
    pub fn new(id: impl Into<String>) -> TaskSpec {
        let id = id.into();
        let seed_salt = fnv1a64(id.as_bytes());
        TaskSpec {
            id,
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed_salt,
        }
    }

    pub fn input(mut self, key: impl Into<String>, type_tag: impl Into<String>) -> TaskSpec {
        self.inputs.push(Port::new(key, type_tag));
        self
    }

    pub fn output(mut self, key: impl Into<String>, type_tag: impl Into<String>) -> TaskSpec {
        self.outputs.push(Port::new(key, type_tag));
        self
    }
}

/// Unit of work scheduled per event.
///
/// Lifecycle: `configure` then `start` run once, single-threaded, before any
/// event. `process` runs once per event and may be called concurrently for
/// *different* events, hence `&self`; anything mutable it needs must go
/// through [`EventCtx`] or interior synchronization. `stop` runs once after
/// the last event, for every task whose `start` succeeded, even when the run
/// aborts on an error.
pub trait Task: Send + Sync {
    fn spec(&self) -> &TaskSpec;

    fn configure(&mut self, _svc: &Services) -> TaskResult {
        Ok(())
    }

    fn start(&mut self, _svc: &Services) -> TaskResult {
        Ok(())
    }

    fn process(&self, ctx: &mut EventCtx) -> TaskResult;

    fn stop(&mut self, _svc: &Services) -> TaskResult {
        Ok(())
    }
}

/// Sink writes and the skip flag a task accumulates while processing one
/// event. Nothing here touches shared state; the scheduler applies stages
/// in event order after the event completes, which is what makes output
/// files identical for any worker count.
#[derive(Debug, Default)]
pub(crate) struct TaskStage {
    pub h1: Vec<(H1Id, f64, f64)>,
    pub h2: Vec<(H2Id, f64, f64, f64)>,
    pub rows: Vec<(NtId, Vec<Cell>)>,
    pub skip: bool,
}

/// Per-(task, event) view handed to [`Task::process`].
pub struct EventCtx<'a> {
    pub(crate) graph: &'a Graph,
    pub(crate) task_idx: usize,
    pub(crate) event_index: u64,
    pub(crate) store: &'a EventStore,
    pub(crate) services: &'a Services,
    pub(crate) rng: RngStream,
    pub(crate) stage: TaskStage,
}

impl<'a> EventCtx<'a> {
    pub fn event_index(&self) -> u64 {
        self.event_index
    }

    /// Read a declared input. Never blocks: the scheduler only starts a task
    /// once all of its inputs are present.
    pub fn get<T: Any + Send + Sync>(&self, key: &str) -> Result<Arc<T>> {
        let task = &self.graph.tasks[self.task_idx];
        let slot = self
            .graph
            .task_io[self.task_idx]
            .inputs
            .iter()
            .find(|(k, _)| k == key)
            .map(|&(_, slot)| slot)
            .ok_or_else(|| Error::UndeclaredInput {
                task: task.id.clone(),
                key: key.to_string(),
            })?;
        let value = self.store.get(slot).ok_or_else(|| Error::InputMissing {
            task: task.id.clone(),
            key: key.to_string(),
            event_index: self.event_index,
        })?;
        Arc::clone(value)
            .downcast::<T>()
            .map_err(|_| Error::StoreType {
                key: key.to_string(),
            })
    }

    /// Publish a declared output. Each collection is single-assignment
    /// within an event; writing the same key twice is an error.
    pub fn put<T: Any + Send + Sync>(&mut self, key: &str, value: T) -> Result<()> {
        let task = &self.graph.tasks[self.task_idx];
        let slot = self
            .graph
            .task_io[self.task_idx]
            .outputs
            .iter()
            .find(|(k, _)| k == key)
            .map(|&(_, slot)| slot)
            .ok_or_else(|| Error::UndeclaredOutput {
                task: task.id.clone(),
                key: key.to_string(),
            })?;
        if !self.store.set(slot, Arc::new(value)) {
            return Err(Error::DoubleWrite {
                key: key.to_string(),
                event_index: self.event_index,
            });
        }
        Ok(())
    }

    /// Mark this event skipped: no downstream task starts for it and its
    /// staged sink writes are discarded, but it still occupies its slot in
    /// the output ordering bookkeeping.
    pub fn skip_event(&mut self) {
        self.stage.skip = true;
    }

    pub fn rng(&mut self) -> &mut RngStream {
        &mut self.rng
    }

    pub fn fill(&mut self, id: H1Id, x: f64) {
        self.stage.h1.push((id, x, 1.0));
    }

    pub fn fill_w(&mut self, id: H1Id, x: f64, w: f64) {
        self.stage.h1.push((id, x, w));
    }

    pub fn fill2(&mut self, id: H2Id, x: f64, y: f64) {
        self.stage.h2.push((id, x, y, 1.0));
    }

    pub fn fill2_w(&mut self, id: H2Id, x: f64, y: f64, w: f64) {
        self.stage.h2.push((id, x, y, w));
    }

    pub fn row(&mut self, id: NtId, cells: Vec<Cell>) {
        self.stage.rows.push((id, cells));
    }

    pub fn log(&self, level: Level, msg: &str) {
        let task = &self.graph.tasks[self.task_idx].id;
        self.services
            .log
            .log(level, task, Some(self.event_index), msg);
    }
}
