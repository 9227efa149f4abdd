mod util;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use evfwk::{
    CappedSource, Error, EventData, H1Id, H2Id, Level, Logger, NtId, Pipeline, RunOptions,
    RunStats, TaskSpec, Value, VecSource,
};
use hbook::{Cell, ColType, Hist1D, Hist2D, NTuple};
use util::{count_entries, new_journal, seed_events, FnTask, SharedBuf};

fn quiet() -> Logger {
    Logger::to_writer(Level::Error, Box::new(std::io::sink()))
}

fn opts(n_workers: usize) -> RunOptions {
    RunOptions {
        n_workers,
        global_seed: 42,
        sequential: false,
    }
}

/// Generator -> smear -> bookkeeping diamond used by the determinism tests.
/// Every task draws randoms, fills sinks, or both.
fn make_noisy_pipeline() -> Pipeline {
    let pt_hist: Arc<Mutex<Option<H1Id>>> = Arc::new(Mutex::new(None));
    let grid: Arc<Mutex<Option<H2Id>>> = Arc::new(Mutex::new(None));
    let tup: Arc<Mutex<Option<NtId>>> = Arc::new(Mutex::new(None));

    let gen = FnTask::new(
        TaskSpec::new("gen")
            .input("seed", "u64")
            .output("pts", "Vec<f64>"),
        |ctx| {
            let seed = ctx.get::<u64>("seed")?;
            let n = (*seed % 5 + 1) as usize;
            let mut pts = Vec::with_capacity(n);
            for _ in 0..n {
                pts.push(ctx.rng().range(1.0, 100.0));
            }
            std::thread::yield_now();
            ctx.put("pts", pts)?;
            Ok(())
        },
    );

    let smear = {
        let pt_hist = Arc::clone(&pt_hist);
        let book = Arc::clone(&pt_hist);
        FnTask::new(
            TaskSpec::new("smear")
                .input("pts", "Vec<f64>")
                .output("pts_smeared", "Vec<f64>"),
            move |ctx| {
                let pts = ctx.get::<Vec<f64>>("pts")?;
                let mut out = Vec::with_capacity(pts.len());
                for &p in pts.iter() {
                    out.push(p * (1.0 + 0.1 * ctx.rng().next_normal()));
                }
                let id = pt_hist.lock().unwrap().unwrap();
                for &x in &out {
                    ctx.fill(id, x);
                }
                ctx.put("pts_smeared", out)?;
                Ok(())
            },
        )
        .with_configure(move |svc| {
            *book.lock().unwrap() = Some(svc.hists.book_h1("pt_smeared", 50, 0.0, 150.0)?);
            Ok(())
        })
    };

    let shape = {
        let grid = Arc::clone(&grid);
        let book = Arc::clone(&grid);
        FnTask::new(
            TaskSpec::new("shape")
                .input("pts", "Vec<f64>")
                .output("n", "u64"),
            move |ctx| {
                let pts = ctx.get::<Vec<f64>>("pts")?;
                let mean = pts.iter().sum::<f64>() / pts.len() as f64;
                let id = grid.lock().unwrap().unwrap();
                ctx.fill2(id, pts.len() as f64, mean);
                ctx.put("n", pts.len() as u64)?;
                Ok(())
            },
        )
        .with_configure(move |svc| {
            *book.lock().unwrap() = Some(svc.hists.book_h2("n_vs_mean", 8, 0.0, 8.0, 20, 0.0, 100.0)?);
            Ok(())
        })
    };

    let tuple = {
        let tup = Arc::clone(&tup);
        let book = Arc::clone(&tup);
        FnTask::new(
            TaskSpec::new("tuple")
                .input("pts_smeared", "Vec<f64>")
                .input("n", "u64"),
            move |ctx| {
                let pts = ctx.get::<Vec<f64>>("pts_smeared")?;
                let n = ctx.get::<u64>("n")?;
                let id = tup.lock().unwrap().unwrap();
                ctx.row(
                    id,
                    vec![
                        Cell::I64(ctx.event_index() as i64),
                        Cell::I64(*n as i64),
                        Cell::F64(pts.iter().sum()),
                    ],
                );
                Ok(())
            },
        )
        .with_configure(move |svc| {
            *book.lock().unwrap() = Some(svc.ntuples.book(
                "events",
                vec![
                    (String::from("evt"), ColType::I64),
                    (String::from("n"), ColType::I64),
                    (String::from("sum_pt"), ColType::F64),
                ],
            )?);
            Ok(())
        })
    };

    Pipeline::new(
        vec![gen.boxed(), smear.boxed(), shape.boxed(), tuple.boxed()],
        &[String::from("seed")],
        quiet(),
    )
    .unwrap()
}

type Sinks = (
    Vec<(String, Hist1D)>,
    Vec<(String, Hist2D)>,
    Vec<(String, NTuple)>,
);

fn run_noisy(n_events: u64, o: &RunOptions) -> (RunStats, Sinks) {
    let mut pipe = make_noisy_pipeline();
    let stats = pipe
        .run(&mut VecSource::new(seed_events(n_events)), o)
        .unwrap();
    let sinks = (
        pipe.services().hists.h1s(),
        pipe.services().hists.h2s(),
        pipe.services().ntuples.ntuples(),
    );
    (stats, sinks)
}

#[test]
fn sinks_are_identical_for_any_worker_count() {
    let n = 200;
    let (ref_stats, ref_sinks) = run_noisy(
        n,
        &RunOptions {
            n_workers: 1,
            global_seed: 42,
            sequential: true,
        },
    );
    assert_eq!(ref_stats.events_processed, n);
    let rows = &ref_sinks.2[0].1;
    assert_eq!(rows.n_rows(), n as usize);

    for workers in [1usize, 2, 8] {
        let (stats, sinks) = run_noisy(n, &opts(workers));
        assert_eq!(stats.events_processed, n);
        assert!(stats.max_in_flight <= workers);
        assert_eq!(sinks, ref_sinks, "sinks diverged at {workers} workers");
    }
}

#[test]
fn changing_the_seed_changes_the_output() {
    let a = run_noisy(50, &opts(2)).1;
    let mut o = opts(2);
    o.global_seed = 43;
    let b = run_noisy(50, &o).1;
    assert_ne!(a, b);
}

#[test]
fn ntuple_rows_commit_in_event_order() {
    let (_, sinks) = run_noisy(300, &opts(8));
    let rows = &sinks.2[0].1;
    for (i, (evt, cells)) in rows.rows().iter().enumerate() {
        assert_eq!(*evt, i as u64);
        assert_eq!(cells[0], Cell::I64(i as i64));
    }
}

#[test]
fn inputs_are_present_before_consumers_start() {
    // Logical clock: producers stamp after their last put, consumers stamp
    // before their first get. Any get at or before its producer's stamp is a
    // dependency violation.
    let clock = Arc::new(AtomicU64::new(0));
    let puts: Arc<Mutex<HashMap<(u64, &'static str), u64>>> = Arc::default();
    let violations = Arc::new(AtomicU64::new(0));

    let mk_producer = |id: &str, key: &'static str| {
        let clock = Arc::clone(&clock);
        let puts = Arc::clone(&puts);
        FnTask::new(
            TaskSpec::new(id).input("seed", "u64").output(key, "u64"),
            move |ctx| {
                let seed = ctx.get::<u64>("seed")?;
                ctx.put(key, *seed * 3)?;
                let stamp = clock.fetch_add(1, Ordering::SeqCst);
                puts.lock().unwrap().insert((ctx.event_index(), key), stamp);
                Ok(())
            },
        )
    };
    let mk_consumer = |id: &str, keys: &'static [&'static str], out: Option<&'static str>| {
        let clock = Arc::clone(&clock);
        let puts = Arc::clone(&puts);
        let violations = Arc::clone(&violations);
        let mut spec = TaskSpec::new(id);
        for k in keys {
            spec = spec.input(*k, "u64");
        }
        if let Some(o) = out {
            spec = spec.output(o, "u64");
        }
        FnTask::new(spec, move |ctx| {
            let stamp = clock.fetch_add(1, Ordering::SeqCst);
            let mut acc = 0u64;
            for k in keys {
                acc = acc.wrapping_add(*ctx.get::<u64>(k)?);
                match puts.lock().unwrap().get(&(ctx.event_index(), *k)) {
                    Some(&put_stamp) if put_stamp < stamp => {}
                    _ => {
                        violations.fetch_add(1, Ordering::SeqCst);
                    }
                }
            }
            if let Some(o) = out {
                ctx.put(o, acc)?;
                let s = clock.fetch_add(1, Ordering::SeqCst);
                puts.lock().unwrap().insert((ctx.event_index(), o), s);
            }
            Ok(())
        })
    };

    let tasks = vec![
        mk_producer("p_x", "x").boxed(),
        mk_producer("p_w", "w").boxed(),
        mk_consumer("c_y", &["x"], Some("y")).boxed(),
        mk_consumer("c_z", &["y", "w"], Some("z")).boxed(),
        mk_consumer("c_end", &["z", "x"], None).boxed(),
    ];
    let mut pipe = Pipeline::new(tasks, &[String::from("seed")], quiet()).unwrap();
    let n = 300;
    let stats = pipe
        .run(&mut VecSource::new(seed_events(n)), &opts(4))
        .unwrap();
    assert_eq!(stats.events_processed, n);
    assert_eq!(violations.load(Ordering::SeqCst), 0);
    assert_eq!(puts.lock().unwrap().len(), (n * 4) as usize);
}

#[test]
fn lifecycle_hooks_run_once_each_in_phase_order() {
    let journal = new_journal();
    let ids = ["alpha", "beta", "gamma"];
    let tasks: Vec<_> = ids
        .iter()
        .map(|id| {
            FnTask::new(TaskSpec::new(*id).input("seed", "u64"), |_| Ok(()))
                .with_journal(Arc::clone(&journal))
                .boxed()
        })
        .collect();
    let mut pipe = Pipeline::new(tasks, &[String::from("seed")], quiet()).unwrap();
    let n = 50;
    pipe.run(&mut VecSource::new(seed_events(n)), &opts(4))
        .unwrap();

    let entries = journal.lock().unwrap().clone();
    for id in ids {
        assert_eq!(count_entries(&journal, &format!("configure {id}")), 1);
        assert_eq!(count_entries(&journal, &format!("start {id}")), 1);
        assert_eq!(count_entries(&journal, &format!("process {id}")), n as usize);
        assert_eq!(count_entries(&journal, &format!("stop {id}")), 1);
    }
    let phase = |e: &str| match e.split_whitespace().next().unwrap() {
        "configure" => 0,
        "start" => 1,
        "process" => 2,
        "stop" => 3,
        other => panic!("unexpected journal entry {other}"),
    };
    let phases: Vec<i32> = entries.iter().map(|e| phase(e)).collect();
    let mut sorted = phases.clone();
    sorted.sort_unstable();
    assert_eq!(phases, sorted, "hooks ran out of phase: {entries:?}");
}

#[test]
fn first_failure_wins_and_everything_still_stops() {
    let journal = new_journal();
    let tup: Arc<Mutex<Option<NtId>>> = Arc::new(Mutex::new(None));

    let flaky = FnTask::new(
        TaskSpec::new("flaky").input("seed", "u64").output("v", "u64"),
        |ctx| {
            if ctx.event_index() == 7 {
                return Err("synthetic failure".into());
            }
            let seed = ctx.get::<u64>("seed")?;
            ctx.put("v", *seed)?;
            Ok(())
        },
    )
    .with_journal(Arc::clone(&journal));

    let sink = {
        let tup = Arc::clone(&tup);
        let book = Arc::clone(&tup);
        FnTask::new(TaskSpec::new("sink").input("v", "u64"), move |ctx| {
            let v = ctx.get::<u64>("v")?;
            let id = tup.lock().unwrap().unwrap();
            ctx.row(id, vec![Cell::I64(*v as i64)]);
            Ok(())
        })
        .with_configure(move |svc| {
            *book.lock().unwrap() =
                Some(svc.ntuples.book("vals", vec![(String::from("v"), ColType::I64)])?);
            Ok(())
        })
        .with_journal(Arc::clone(&journal))
    };

    let mut pipe = Pipeline::new(
        vec![flaky.boxed(), sink.boxed()],
        &[String::from("seed")],
        quiet(),
    )
    .unwrap();
    let err = pipe
        .run(&mut VecSource::new(seed_events(40)), &opts(4))
        .unwrap_err();
    match err {
        Error::TaskFailed { task, event_index, .. } => {
            assert_eq!(task, "flaky");
            assert_eq!(event_index, 7);
        }
        other => panic!("expected TaskFailed, got {other}"),
    }
    assert_eq!(count_entries(&journal, "stop flaky"), 1);
    assert_eq!(count_entries(&journal, "stop sink"), 1);

    // committed events form a strict prefix ending before the failure
    let nts = pipe.services().ntuples.ntuples();
    let rows = nts[0].1.rows();
    assert!(rows.len() <= 7);
    for (i, (evt, _)) in rows.iter().enumerate() {
        assert_eq!(*evt, i as u64);
    }
}

#[test]
fn skipped_events_leave_no_trace_in_sinks() {
    let journal = new_journal();
    let hist: Arc<Mutex<Option<H1Id>>> = Arc::new(Mutex::new(None));

    let filter = FnTask::new(
        TaskSpec::new("filter").input("seed", "u64").output("kept", "u64"),
        |ctx| {
            let seed = ctx.get::<u64>("seed")?;
            if *seed % 2 == 1 {
                ctx.skip_event();
                return Ok(());
            }
            ctx.put("kept", *seed)?;
            Ok(())
        },
    );
    let downstream = {
        let hist = Arc::clone(&hist);
        let book = Arc::clone(&hist);
        FnTask::new(TaskSpec::new("fill").input("kept", "u64"), move |ctx| {
            let kept = ctx.get::<u64>("kept")?;
            let id = hist.lock().unwrap().unwrap();
            ctx.fill(id, *kept as f64);
            Ok(())
        })
        .with_configure(move |svc| {
            *book.lock().unwrap() = Some(svc.hists.book_h1("kept", 50, 0.0, 50.0)?);
            Ok(())
        })
        .with_journal(Arc::clone(&journal))
    };

    let mut pipe = Pipeline::new(
        vec![filter.boxed(), downstream.boxed()],
        &[String::from("seed")],
        quiet(),
    )
    .unwrap();
    let stats = pipe
        .run(&mut VecSource::new(seed_events(50)), &opts(4))
        .unwrap();
    assert_eq!(stats.events_processed, 25);
    assert_eq!(stats.events_skipped, 25);
    assert_eq!(count_entries(&journal, "process fill"), 25);
    let h1s = pipe.services().hists.h1s();
    assert_eq!(h1s[0].1.entries(), 25);
}

#[test]
fn store_misuse_is_reported() {
    // writing the same key twice
    let double = FnTask::new(
        TaskSpec::new("dw").input("seed", "u64").output("k", "u64"),
        |ctx| {
            ctx.put("k", 1u64)?;
            ctx.put("k", 2u64)?;
            Ok(())
        },
    );
    let err = run_single(double.boxed());
    let Error::TaskFailed { source, .. } = err else {
        panic!("expected TaskFailed, got {err}");
    };
    assert!(matches!(
        source.downcast_ref::<Error>(),
        Some(Error::DoubleWrite { .. })
    ));

    // reading a key that was never declared
    let nosy = FnTask::new(TaskSpec::new("nosy").input("seed", "u64"), |ctx| {
        ctx.get::<u64>("private")?;
        Ok(())
    });
    let err = run_single(nosy.boxed());
    let Error::TaskFailed { source, .. } = err else {
        panic!("expected TaskFailed, got {err}");
    };
    assert!(matches!(
        source.downcast_ref::<Error>(),
        Some(Error::UndeclaredInput { .. })
    ));

    // writing a key that was never declared
    let rogue = FnTask::new(TaskSpec::new("rogue").input("seed", "u64"), |ctx| {
        ctx.put("surprise", 5u64)?;
        Ok(())
    });
    let err = run_single(rogue.boxed());
    let Error::TaskFailed { source, .. } = err else {
        panic!("expected TaskFailed, got {err}");
    };
    assert!(matches!(
        source.downcast_ref::<Error>(),
        Some(Error::UndeclaredOutput { .. })
    ));

    // declaring an output and not writing it
    let lazy = FnTask::new(
        TaskSpec::new("lazy").input("seed", "u64").output("never", "u64"),
        |_| Ok(()),
    );
    let err = run_single(lazy.boxed());
    assert!(matches!(err, Error::MissingDeclaredOutput { ref task, ref key, .. }
        if task == "lazy" && key == "never"));

    // requesting the wrong type
    let confused = FnTask::new(TaskSpec::new("confused").input("seed", "u64"), |ctx| {
        ctx.get::<String>("seed")?;
        Ok(())
    });
    let err = run_single(confused.boxed());
    let Error::TaskFailed { source, .. } = err else {
        panic!("expected TaskFailed, got {err}");
    };
    assert!(matches!(
        source.downcast_ref::<Error>(),
        Some(Error::StoreType { .. })
    ));
}

fn run_single(task: Box<dyn evfwk::Task>) -> Error {
    let mut pipe = Pipeline::new(vec![task], &[String::from("seed")], quiet()).unwrap();
    pipe.run(&mut VecSource::new(seed_events(4)), &opts(2))
        .unwrap_err()
}

#[test]
fn source_key_contract_is_enforced() {
    let consumer = FnTask::new(TaskSpec::new("c").input("seed", "u64"), |_| Ok(()));
    let mut pipe = Pipeline::new(vec![consumer.boxed()], &[String::from("seed")], quiet()).unwrap();

    let events = vec![EventData {
        collections: vec![(String::from("sneed"), Arc::new(0u64) as Value)],
    }];
    let err = pipe.run(&mut VecSource::new(events), &opts(2)).unwrap_err();
    assert!(matches!(err, Error::SourceKeyUnexpected(ref k) if k == "sneed"));

    let mut pipe = Pipeline::new(
        vec![FnTask::new(TaskSpec::new("c").input("seed", "u64"), |_| Ok(())).boxed()],
        &[String::from("seed")],
        quiet(),
    )
    .unwrap();
    let events = vec![EventData { collections: vec![] }];
    let err = pipe.run(&mut VecSource::new(events), &opts(2)).unwrap_err();
    assert!(matches!(err, Error::SourceKeyMissing(ref k) if k == "seed"));
}

#[test]
fn source_failure_aborts_but_tasks_stop() {
    struct FailingSource(u64);
    impl evfwk::EventSource for FailingSource {
        fn next_event(&mut self) -> Option<Result<EventData, evfwk::BoxError>> {
            if self.0 == 3 {
                return Some(Err("disk on fire".into()));
            }
            self.0 += 1;
            Some(Ok(EventData {
                collections: vec![(String::from("seed"), Arc::new(self.0) as Value)],
            }))
        }
    }

    let journal = new_journal();
    let t = FnTask::new(TaskSpec::new("t").input("seed", "u64"), |_| Ok(()))
        .with_journal(Arc::clone(&journal));
    let mut pipe = Pipeline::new(vec![t.boxed()], &[String::from("seed")], quiet()).unwrap();
    let err = pipe.run(&mut FailingSource(0), &opts(2)).unwrap_err();
    assert!(matches!(err, Error::SourceFailed { .. }));
    assert_eq!(count_entries(&journal, "stop t"), 1);
}

#[test]
fn hook_failures_are_attributed() {
    let bad = FnTask::new(TaskSpec::new("bad").input("seed", "u64"), |_| Ok(()))
        .with_configure(|_| Err("no detector geometry".into()));
    let mut pipe = Pipeline::new(vec![bad.boxed()], &[String::from("seed")], quiet()).unwrap();
    let err = pipe
        .run(&mut VecSource::new(seed_events(1)), &opts(1))
        .unwrap_err();
    assert!(matches!(err, Error::HookFailed { ref task, hook: "configure", .. } if task == "bad"));

    let sour = FnTask::new(TaskSpec::new("sour").input("seed", "u64"), |_| Ok(()))
        .with_stop(|_| Err("flush failed".into()));
    let mut pipe = Pipeline::new(vec![sour.boxed()], &[String::from("seed")], quiet()).unwrap();
    let err = pipe
        .run(&mut VecSource::new(seed_events(1)), &opts(1))
        .unwrap_err();
    assert!(matches!(err, Error::HookFailed { hook: "stop", .. }));
}

#[test]
fn duplicate_sink_names_fail_configuration() {
    let mk = |id: &str| {
        FnTask::new(TaskSpec::new(id).input("seed", "u64"), |_| Ok(())).with_configure(|svc| {
            svc.hists.book_h1("pt", 10, 0.0, 1.0)?;
            Ok(())
        })
    };
    let mut pipe = Pipeline::new(
        vec![mk("one").boxed(), mk("two").boxed()],
        &[String::from("seed")],
        quiet(),
    )
    .unwrap();
    let err = pipe
        .run(&mut VecSource::new(seed_events(1)), &opts(1))
        .unwrap_err();
    let Error::HookFailed { source, .. } = err else {
        panic!("expected HookFailed, got {err}");
    };
    assert!(matches!(
        source.downcast_ref::<Error>(),
        Some(Error::DuplicateSink(name)) if name == "pt"
    ));
}

#[test]
fn log_lines_stay_whole_under_concurrency() {
    let buf = SharedBuf::default();
    let logger = Logger::to_writer(Level::Info, Box::new(buf.clone()));
    let filler = "x".repeat(160);

    let tasks: Vec<_> = (0..4)
        .map(|i| {
            let filler = filler.clone();
            FnTask::new(TaskSpec::new(format!("chat{i}")).input("seed", "u64"), move |ctx| {
                ctx.log(Level::Info, &format!("{filler} tail"));
                ctx.log(Level::Debug, "should be filtered out");
                Ok(())
            })
            .boxed()
        })
        .collect();
    let mut pipe = Pipeline::new(tasks, &[String::from("seed")], logger).unwrap();
    pipe.run(&mut VecSource::new(seed_events(100)), &opts(4))
        .unwrap();

    let contents = buf.contents();
    let lines: Vec<&str> = contents.lines().collect();
    assert_eq!(lines.len(), 400);
    for line in lines {
        assert!(line.starts_with("[INFO] chat"), "mangled line: {line}");
        assert!(line.ends_with(" tail"), "mangled line: {line}");
    }
    assert!(!contents.contains("filtered"));
}

#[test]
fn empty_pipeline_still_counts_events() {
    let mut pipe = Pipeline::new(vec![], &[String::from("seed")], quiet()).unwrap();
    let stats = pipe
        .run(&mut VecSource::new(seed_events(17)), &opts(3))
        .unwrap();
    assert_eq!(stats.events_processed, 17);
    assert_eq!(stats.events_skipped, 0);
}

#[test]
fn capped_source_limits_the_run() {
    let mut pipe = Pipeline::new(vec![], &[String::from("seed")], quiet()).unwrap();
    let src = VecSource::new(seed_events(100));
    let stats = pipe
        .run(&mut CappedSource::new(src, 12), &opts(2))
        .unwrap();
    assert_eq!(stats.events_processed, 12);
}

#[test]
fn zero_workers_is_a_config_error() {
    let mut pipe = Pipeline::new(vec![], &[], quiet()).unwrap();
    let err = pipe
        .run(&mut VecSource::new(vec![]), &opts(0))
        .unwrap_err();
    assert!(matches!(err, Error::Config(_)));
}

#[test]
fn stats_cover_every_task() {
    let (stats, _) = run_noisy(20, &opts(2));
    let names: Vec<&str> = stats.per_task_seconds.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["gen", "shape", "smear", "tuple"]);
    assert_eq!(stats.n_workers, 2);
}
