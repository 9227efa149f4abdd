use std::collections::{BTreeMap, VecDeque};
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::RngStream;
use crate::services::{Logger, Services};
use crate::store::EventStore;
use crate::task::{BoxError, EventCtx, Task, TaskStage, Value};

/// One event as delivered by a source: the collections it injects, keyed by
/// the names declared to [`Pipeline::new`].
pub struct EventData {
    pub collections: Vec<(String, Value)>,
}

/// Pull-based event supplier. Events are indexed in the order they are
/// pulled, so a deterministic source yields the same indexing for every
/// worker count.
pub trait EventSource: Send {
    fn next_event(&mut self) -> Option<std::result::Result<EventData, BoxError>>;
}

/// In-memory source, mostly for tests and synthetic inputs.
pub struct VecSource {
    events: std::vec::IntoIter<EventData>,
}

impl VecSource {
    pub fn new(events: Vec<EventData>) -> VecSource {
        VecSource {
            events: events.into_iter(),
        }
    }
}

impl EventSource for VecSource {
    fn next_event(&mut self) -> Option<std::result::Result<EventData, BoxError>> {
        self.events.next().map(Ok)
    }
}

/// Caps an underlying source at `max_events`.
pub struct CappedSource<S> {
    inner: S,
    left: u64,
}

impl<S: EventSource> CappedSource<S> {
    pub fn new(inner: S, max_events: u64) -> CappedSource<S> {
        CappedSource {
            inner,
            left: max_events,
        }
    }

    pub fn into_inner(self) -> S {
        self.inner
    }
}

impl<S: EventSource> EventSource for CappedSource<S> {
    fn next_event(&mut self) -> Option<std::result::Result<EventData, BoxError>> {
        if self.left == 0 {
            return None;
        }
        self.left -= 1;
        self.inner.next_event()
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub n_workers: usize,
    pub global_seed: u64,
    /// Run everything on the calling thread in schedule order. Useful as a
    /// reference: sinks must come out identical to any threaded run.
    pub sequential: bool,
}

impl Default for RunOptions {
    fn default() -> RunOptions {
        RunOptions {
            n_workers: 1,
            global_seed: 0,
            sequential: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunStats {
    pub events_processed: u64,
    pub events_skipped: u64,
    pub wall_seconds: f64,
    pub n_workers: usize,
    /// Highest number of events simultaneously admitted; never exceeds
    /// `n_workers`.
    pub max_in_flight: usize,
    /// Cumulative seconds spent in `process`, per task, in schedule order.
    pub per_task_seconds: Vec<(String, f64)>,
}

/// A validated task graph bound to shared services, ready to run over an
/// event stream.
pub struct Pipeline {
    tasks: Vec<Box<dyn Task>>,
    graph: Graph,
    services: Services,
}

impl Pipeline {
    /// Validates the wiring formed by the tasks' declared ports plus the
    /// source-provided keys. Fails before any lifecycle hook runs.
    pub fn new(
        tasks: Vec<Box<dyn Task>>,
        source_keys: &[String],
        log: Logger,
    ) -> Result<Pipeline> {
        let specs = tasks.iter().map(|t| t.spec().clone()).collect();
        let graph = Graph::build(specs, source_keys)?;
        Ok(Pipeline {
            tasks,
            graph,
            services: Services::new(log),
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn services(&self) -> &Services {
        &self.services
    }

    /// Drive the source to exhaustion (or first error).
    ///
    /// `configure` and `start` run single-threaded before the first event;
    /// `stop` runs afterwards for every task whose `start` succeeded, also
    /// when the run is aborting on an error. The first error wins and is
    /// returned after in-flight events drain.
    pub fn run(&mut self, source: &mut dyn EventSource, opts: &RunOptions) -> Result<RunStats> {
        if opts.n_workers == 0 {
            return Err(Error::Config(String::from("n_workers must be at least 1")));
        }
        let order: Vec<usize> = self.graph.schedule_order().collect();

        for &t in &order {
            self.tasks[t].configure(&self.services).map_err(|e| Error::HookFailed {
                task: self.graph.task_id(t).to_string(),
                hook: "configure",
                source: e,
            })?;
        }
        let mut started: Vec<usize> = Vec::with_capacity(order.len());
        for &t in &order {
            if let Err(e) = self.tasks[t].start(&self.services) {
                let err = Error::HookFailed {
                    task: self.graph.task_id(t).to_string(),
                    hook: "start",
                    source: e,
                };
                return Err(self.stop_started(&started, Some(err)).unwrap());
            }
            started.push(t);
        }

        let t0 = Instant::now();
        let outcome = if opts.sequential {
            self.run_sequential(source, opts)
        } else {
            self.run_threaded(source, opts)
        };
        let wall = t0.elapsed().as_secs_f64();

        let (processed, skipped, max_in_flight, per_task_nanos) = match outcome {
            Err(e) => return Err(self.stop_started(&started, Some(e)).unwrap()),
            Ok(s) => {
                if let Some(e) = self.stop_started(&started, None) {
                    return Err(e);
                }
                s
            }
        };
        let per_task_seconds = order
            .iter()
            .map(|&t| {
                (
                    self.graph.task_id(t).to_string(),
                    per_task_nanos[t] as f64 * 1e-9,
                )
            })
            .collect();
        Ok(RunStats {
            events_processed: processed,
            events_skipped: skipped,
            wall_seconds: wall,
            n_workers: if opts.sequential { 1 } else { opts.n_workers },
            max_in_flight,
            per_task_seconds,
        })
    }

    /// Stop every started task, in reverse start order. An error already in
    /// `held` takes precedence; later errors are only logged. Returns the
    /// error that should surface, if any.
    fn stop_started(&mut self, started: &[usize], mut held: Option<Error>) -> Option<Error> {
        for &t in started.iter().rev() {
            if let Err(e) = self.tasks[t].stop(&self.services) {
                let id = self.graph.task_id(t);
                if held.is_none() {
                    held = Some(Error::HookFailed {
                        task: id.to_string(),
                        hook: "stop",
                        source: e,
                    });
                } else {
                    self.services
                        .log
                        .log(crate::services::Level::Error, id, None, &format!("stop failed: {e}"));
                }
            }
        }
        held
    }

    fn run_sequential(
        &self,
        source: &mut dyn EventSource,
        opts: &RunOptions,
    ) -> std::result::Result<(u64, u64, usize, Vec<u64>), Error> {
        let graph = &self.graph;
        let n_tasks = graph.n_tasks();
        let mut per_task_nanos = vec![0u64; n_tasks];
        let mut processed = 0u64;
        let mut skipped_events = 0u64;
        let mut next_index = 0u64;

        loop {
            let data = match source.next_event() {
                None => break,
                Some(Err(e)) => {
                    return Err(Error::SourceFailed {
                        event_index: next_index,
                        source: e,
                    })
                }
                Some(Ok(d)) => d,
            };
            let index = next_index;
            next_index += 1;

            let store = EventStore::new(graph.n_keys());
            inject(graph, &store, data, index)?;

            let mut stages: Vec<Option<TaskStage>> = (0..n_tasks).map(|_| None).collect();
            let mut skipped = false;
            for t in graph.schedule_order() {
                if skipped {
                    break;
                }
                let mut ctx = EventCtx {
                    graph,
                    task_idx: t,
                    event_index: index,
                    store: &store,
                    services: &self.services,
                    rng: RngStream::for_task_event(
                        opts.global_seed,
                        graph.tasks[t].seed_salt,
                        index,
                    ),
                    stage: TaskStage::default(),
                };
                let t0 = Instant::now();
                let res = self.tasks[t].process(&mut ctx);
                per_task_nanos[t] += t0.elapsed().as_nanos() as u64;
                if let Err(e) = res {
                    return Err(Error::TaskFailed {
                        task: graph.task_id(t).to_string(),
                        event_index: index,
                        source: e,
                    });
                }
                if ctx.stage.skip {
                    skipped = true;
                } else {
                    check_outputs(graph, &store, t, index)?;
                }
                stages[t] = Some(ctx.stage);
            }

            if skipped {
                skipped_events += 1;
            } else {
                for t in graph.schedule_order() {
                    if let Some(stage) = stages[t].take() {
                        apply_stage(&self.services, graph, t, index, stage)?;
                    }
                }
                processed += 1;
            }
        }
        Ok((processed, skipped_events, 1, per_task_nanos))
    }

    fn run_threaded(
        &self,
        source: &mut dyn EventSource,
        opts: &RunOptions,
    ) -> std::result::Result<(u64, u64, usize, Vec<u64>), Error> {
        let n_tasks = self.graph.n_tasks();
        let engine = Engine {
            graph: &self.graph,
            tasks: &self.tasks,
            services: &self.services,
            global_seed: opts.global_seed,
            n_workers: opts.n_workers,
            source: Mutex::new(source),
            state: Mutex::new(SchedState {
                queue: VecDeque::new(),
                in_flight: 0,
                max_in_flight: 0,
                next_index: 0,
                next_commit: 0,
                source_busy: false,
                source_done: false,
                reorder: BTreeMap::new(),
                error: None,
                processed: 0,
                skipped: 0,
            }),
            cv: Condvar::new(),
            per_task_nanos: (0..n_tasks).map(|_| AtomicU64::new(0)).collect(),
        };

        std::thread::scope(|scope| {
            for _ in 0..opts.n_workers {
                scope.spawn(|| engine.worker());
            }
        });

        let st = engine.state.into_inner().unwrap();
        if let Some(e) = st.error {
            return Err(e);
        }
        let nanos = engine
            .per_task_nanos
            .iter()
            .map(|a| a.load(Ordering::Relaxed))
            .collect();
        Ok((st.processed, st.skipped, st.max_in_flight, nanos))
    }
}

fn inject(graph: &Graph, store: &EventStore, data: EventData, event_index: u64) -> Result<()> {
    for (name, value) in data.collections {
        let slot = graph
            .source_slots
            .iter()
            .copied()
            .find(|&s| graph.key_names[s] == name)
            .ok_or_else(|| Error::SourceKeyUnexpected(name.clone()))?;
        if !store.set(slot, value) {
            return Err(Error::DoubleWrite {
                key: name,
                event_index,
            });
        }
    }
    for &slot in &graph.source_slots {
        if !store.has(slot) {
            return Err(Error::SourceKeyMissing(graph.key_names[slot].clone()));
        }
    }
    Ok(())
}

fn check_outputs(graph: &Graph, store: &EventStore, task_idx: usize, event_index: u64) -> Result<()> {
    for (key, slot) in &graph.task_io[task_idx].outputs {
        if !store.has(*slot) {
            return Err(Error::MissingDeclaredOutput {
                task: graph.task_id(task_idx).to_string(),
                key: key.clone(),
                event_index,
            });
        }
    }
    Ok(())
}

fn apply_stage(
    services: &Services,
    graph: &Graph,
    task_idx: usize,
    event_index: u64,
    stage: TaskStage,
) -> Result<()> {
    for (id, x, w) in stage.h1 {
        services.hists.apply_h1(id, x, w);
    }
    for (id, x, y, w) in stage.h2 {
        services.hists.apply_h2(id, x, y, w);
    }
    for (id, cells) in stage.rows {
        services
            .ntuples
            .apply_row(id, event_index, cells)
            .map_err(|e| Error::TaskFailed {
                task: graph.task_id(task_idx).to_string(),
                event_index,
                source: Box::new(e),
            })?;
    }
    Ok(())
}

struct EventJob {
    index: u64,
    store: EventStore,
    unmet: Vec<AtomicUsize>,
    /// Tasks enqueued or running for this event. The event is complete when
    /// this drops to zero; completions are the only place new work for the
    /// event is enqueued, so it cannot resurrect.
    pending: AtomicUsize,
    skipped: AtomicBool,
    stages: Vec<Mutex<Option<TaskStage>>>,
}

struct SchedState {
    queue: VecDeque<(Arc<EventJob>, usize)>,
    /// Admitted events not yet committed or abandoned. Admission is gated on
    /// `in_flight < n_workers`, which bounds both memory and how far the
    /// commit order can run behind.
    in_flight: usize,
    max_in_flight: usize,
    next_index: u64,
    next_commit: u64,
    source_busy: bool,
    source_done: bool,
    /// Completed events waiting for their turn to commit, by index.
    reorder: BTreeMap<u64, Arc<EventJob>>,
    error: Option<Error>,
    processed: u64,
    skipped: u64,
}

struct Engine<'a> {
    graph: &'a Graph,
    tasks: &'a [Box<dyn Task>],
    services: &'a Services,
    global_seed: u64,
    n_workers: usize,
    source: Mutex<&'a mut dyn EventSource>,
    state: Mutex<SchedState>,
    cv: Condvar,
    per_task_nanos: Vec<AtomicU64>,
}

impl<'a> Engine<'a> {
    fn worker(&self) {
        let mut st = self.state.lock().unwrap();
        loop {
            if let Some((ev, t)) = st.queue.pop_front() {
                drop(st);
                self.run_task(ev, t);
                st = self.state.lock().unwrap();
                continue;
            }
            if !st.source_done
                && !st.source_busy
                && st.error.is_none()
                && st.in_flight < self.n_workers
            {
                st.source_busy = true;
                st.in_flight += 1;
                st.max_in_flight = st.max_in_flight.max(st.in_flight);
                let index = st.next_index;
                st.next_index += 1;
                drop(st);
                self.admit(index);
                st = self.state.lock().unwrap();
                continue;
            }
            if st.in_flight == 0 && (st.source_done || st.error.is_some()) {
                self.cv.notify_all();
                return;
            }
            st = self.cv.wait(st).unwrap();
        }
    }

    /// Pull one event from the source (exclusively; `source_busy` is held)
    /// and either seed its ready tasks or roll the admission back.
    fn admit(&self, index: u64) {
        let next = self.source.lock().unwrap().next_event();
        let mut st = self.state.lock().unwrap();
        st.source_busy = false;
        match next {
            None => {
                st.source_done = true;
                st.in_flight -= 1;
            }
            Some(Err(e)) => {
                st.source_done = true;
                st.in_flight -= 1;
                if st.error.is_none() {
                    st.error = Some(Error::SourceFailed {
                        event_index: index,
                        source: e,
                    });
                    cancel(&mut st);
                }
            }
            Some(Ok(data)) => {
                if st.error.is_some() {
                    st.in_flight -= 1;
                } else {
                    let store = EventStore::new(self.graph.n_keys());
                    match inject(self.graph, &store, data, index) {
                        Err(e) => {
                            st.in_flight -= 1;
                            if st.error.is_none() {
                                st.error = Some(e);
                                cancel(&mut st);
                            }
                        }
                        Ok(()) => {
                            let n_tasks = self.graph.n_tasks();
                            let unmet: Vec<AtomicUsize> = self
                                .graph
                                .unmet_init
                                .iter()
                                .map(|&n| AtomicUsize::new(n))
                                .collect();
                            for &slot in &self.graph.source_slots {
                                for &c in &self.graph.consumers[slot] {
                                    unmet[c].fetch_sub(1, Ordering::Relaxed);
                                }
                            }
                            let ready: Vec<usize> = (0..n_tasks)
                                .filter(|&t| unmet[t].load(Ordering::Relaxed) == 0)
                                .collect();
                            let ev = Arc::new(EventJob {
                                index,
                                store,
                                unmet,
                                pending: AtomicUsize::new(ready.len()),
                                skipped: AtomicBool::new(false),
                                stages: (0..n_tasks).map(|_| Mutex::new(None)).collect(),
                            });
                            if ready.is_empty() {
                                // no tasks at all: commit straight away
                                st.reorder.insert(index, ev);
                                self.flush_commits(&mut st);
                            } else {
                                for t in ready {
                                    st.queue.push_back((Arc::clone(&ev), t));
                                }
                            }
                        }
                    }
                }
            }
        }
        self.cv.notify_all();
    }

    fn run_task(&self, ev: Arc<EventJob>, task_idx: usize) {
        let graph = self.graph;
        let mut failure: Option<Error> = None;
        let mut ran = false;

        if !ev.skipped.load(Ordering::Relaxed) {
            ran = true;
            let mut ctx = EventCtx {
                graph,
                task_idx,
                event_index: ev.index,
                store: &ev.store,
                services: self.services,
                rng: RngStream::for_task_event(
                    self.global_seed,
                    graph.tasks[task_idx].seed_salt,
                    ev.index,
                ),
                stage: TaskStage::default(),
            };
            let t0 = Instant::now();
            let res = self.tasks[task_idx].process(&mut ctx);
            self.per_task_nanos[task_idx]
                .fetch_add(t0.elapsed().as_nanos() as u64, Ordering::Relaxed);
            match res {
                Ok(()) => {
                    if ctx.stage.skip {
                        ev.skipped.store(true, Ordering::Relaxed);
                    } else if let Err(e) = check_outputs(graph, &ev.store, task_idx, ev.index) {
                        failure = Some(e);
                    }
                    *ev.stages[task_idx].lock().unwrap() = Some(ctx.stage);
                }
                Err(e) => {
                    failure = Some(Error::TaskFailed {
                        task: graph.task_id(task_idx).to_string(),
                        event_index: ev.index,
                        source: e,
                    });
                }
            }
        }

        let mut st = self.state.lock().unwrap();
        if let Some(e) = failure {
            if st.error.is_none() {
                st.error = Some(e);
                cancel(&mut st);
            }
        }
        if st.error.is_none() && ran && !ev.skipped.load(Ordering::Relaxed) {
            // trigger consumers whose last missing input this task wrote
            for (_, slot) in &graph.task_io[task_idx].outputs {
                for &c in &graph.consumers[*slot] {
                    if ev.unmet[c].fetch_sub(1, Ordering::Relaxed) == 1 {
                        ev.pending.fetch_add(1, Ordering::Relaxed);
                        st.queue.push_back((Arc::clone(&ev), c));
                    }
                }
            }
        }
        if ev.pending.fetch_sub(1, Ordering::Relaxed) == 1 {
            if st.error.is_some() {
                st.in_flight -= 1;
            } else {
                st.reorder.insert(ev.index, Arc::clone(&ev));
                self.flush_commits(&mut st);
            }
        }
        drop(st);
        self.cv.notify_all();
    }

    /// Commit every completed event that is next in index order. Called with
    /// the scheduler lock held, which also serializes sink application.
    fn flush_commits(&self, st: &mut SchedState) {
        while let Some(ev) = st.reorder.remove(&st.next_commit) {
            st.next_commit += 1;
            st.in_flight -= 1;
            if ev.skipped.load(Ordering::Relaxed) {
                st.skipped += 1;
                continue;
            }
            let mut commit_err = None;
            for t in self.graph.schedule_order() {
                if let Some(stage) = ev.stages[t].lock().unwrap().take() {
                    if let Err(e) = apply_stage(self.services, self.graph, t, ev.index, stage) {
                        commit_err = Some(e);
                        break;
                    }
                }
            }
            match commit_err {
                None => st.processed += 1,
                Some(e) => {
                    if st.error.is_none() {
                        st.error = Some(e);
                        cancel(st);
                    }
                    break;
                }
            }
        }
    }
}

/// Abandon everything scheduled but not yet running, and every completed
/// event waiting to commit. Running tasks finish on their own and find
/// `error` set when they report back.
fn cancel(st: &mut SchedState) {
    let drained: Vec<(Arc<EventJob>, usize)> = st.queue.drain(..).collect();
    for (ev, _) in drained {
        if ev.pending.fetch_sub(1, Ordering::Relaxed) == 1 {
            st.in_flight -= 1;
        }
    }
    let reorder = std::mem::take(&mut st.reorder);
    st.in_flight -= reorder.len();
}
