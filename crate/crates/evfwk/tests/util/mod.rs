#![allow(dead_code)]

use std::io::Write;
use std::sync::{Arc, Mutex};

use evfwk::{EventCtx, EventData, Services, Task, TaskResult, TaskSpec, Value};

/// Small deterministic generator for test inputs.
pub struct TestRng(pub u64);

impl TestRng {
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }

    pub fn chance(&mut self, p_percent: u64) -> bool {
        self.below(100) < p_percent
    }
}

pub type HookFn = Box<dyn Fn(&Services) -> TaskResult + Send + Sync>;

/// Task driven by closures. The process body is required; configure and stop
/// bodies are optional, and a journal records hook order when attached.
pub struct FnTask {
    pub spec: TaskSpec,
    body: Box<dyn Fn(&mut EventCtx) -> TaskResult + Send + Sync>,
    on_configure: Option<HookFn>,
    on_stop: Option<HookFn>,
    journal: Option<Journal>,
}

impl FnTask {
    pub fn new(
        spec: TaskSpec,
        body: impl Fn(&mut EventCtx) -> TaskResult + Send + Sync + 'static,
    ) -> FnTask {
        FnTask {
            spec,
            body: Box::new(body),
            on_configure: None,
            on_stop: None,
            journal: None,
        }
    }

    pub fn with_configure(
        mut self,
        f: impl Fn(&Services) -> TaskResult + Send + Sync + 'static,
    ) -> FnTask {
        self.on_configure = Some(Box::new(f));
        self
    }

    pub fn with_stop(
        mut self,
        f: impl Fn(&Services) -> TaskResult + Send + Sync + 'static,
    ) -> FnTask {
        self.on_stop = Some(Box::new(f));
        self
    }

    pub fn with_journal(mut self, journal: Journal) -> FnTask {
        self.journal = Some(journal);
        self
    }

    pub fn boxed(self) -> Box<dyn Task> {
        Box::new(self)
    }

    fn record(&self, what: &str) {
        if let Some(j) = &self.journal {
            j.lock().unwrap().push(format!("{what} {}", self.spec.id));
        }
    }
}

impl Task for FnTask {
    fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    fn configure(&mut self, svc: &Services) -> TaskResult {
        self.record("configure");
        match &self.on_configure {
            Some(f) => f(svc),
            None => Ok(()),
        }
    }

    fn start(&mut self, _svc: &Services) -> TaskResult {
        self.record("start");
        Ok(())
    }

    fn process(&self, ctx: &mut EventCtx) -> TaskResult {
        self.record("process");
        (self.body)(ctx)
    }

    fn stop(&mut self, svc: &Services) -> TaskResult {
        self.record("stop");
        match &self.on_stop {
            Some(f) => f(svc),
            None => Ok(()),
        }
    }
}

pub type Journal = Arc<Mutex<Vec<String>>>;

pub fn new_journal() -> Journal {
    Arc::new(Mutex::new(Vec::new()))
}

pub fn count_entries(journal: &Journal, prefix: &str) -> usize {
    journal
        .lock()
        .unwrap()
        .iter()
        .filter(|e| e.starts_with(prefix))
        .count()
}

/// Log sink whose contents stay readable after the run.
#[derive(Clone, Default)]
pub struct SharedBuf(pub Arc<Mutex<Vec<u8>>>);

impl SharedBuf {
    pub fn contents(&self) -> String {
        String::from_utf8(self.0.lock().unwrap().clone()).unwrap()
    }
}

impl Write for SharedBuf {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.lock().unwrap().extend_from_slice(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

/// Events carrying a single `u64` collection named `seed`.
pub fn seed_events(n: u64) -> Vec<EventData> {
    (0..n)
        .map(|i| EventData {
            collections: vec![(String::from("seed"), Arc::new(i) as Value)],
        })
        .collect()
}
