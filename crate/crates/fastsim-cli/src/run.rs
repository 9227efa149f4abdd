//! `fastsim run`: execute one pipeline from a JSON config.

use evfwk::config::{build_tasks, PipelineConfig};
use evfwk::{
    CappedSource, EventSource, Level, Logger, Pipeline, RunOptions, RunStats, Services,
};
use fastsim::{HepMcSource, SimFactory, SyntheticSource};

use crate::flags::Flags;

pub const USAGE: &str = "\
usage: fastsim run CONFIG [flags]

  -input PATH       read events from a generator file (plain or gzip) instead
                    of the config's synthetic source
  -nevents N        stop after N events; 0 means all (default 0)
  -nworkers N       number of worker contexts (default 1)
  -output PATH      write the run's histograms and n-tuples to this file
  -seed U64         override the config's global seed
  -log-level LEVEL  debug, info, warning, or error (default info)
  -stats-json PATH  write run statistics as JSON
  --sequential      run the plain in-order event loop (ignores -nworkers)";

pub struct RunFlags {
    pub config: String,
    pub input: Option<String>,
    pub nevents: u64,
    pub nworkers: usize,
    pub output: Option<String>,
    pub seed: Option<u64>,
    pub log_level: Level,
    pub sequential: bool,
    pub stats_json: Option<String>,
}

impl RunFlags {
    pub fn parse(args: &[String]) -> Result<RunFlags, String> {
        let mut f = Flags::parse(args, &["sequential"])?;
        let flags = RunFlags {
            config: String::new(),
            input: f.take("input"),
            nevents: f.take_as("nevents", 0)?,
            nworkers: f.take_as("nworkers", 1)?,
            output: f.take("output"),
            seed: f
                .take("seed")
                .map(|v| {
                    v.parse()
                        .map_err(|e| format!("flag -seed: bad value `{v}`: {e}"))
                })
                .transpose()?,
            log_level: f.take_as("log-level", Level::Info)?,
            sequential: f.take("sequential").is_some(),
            stats_json: f.take("stats-json"),
        };
        if flags.nworkers == 0 {
            return Err("flag -nworkers: must be at least 1".into());
        }
        let mut positional = f.finish()?;
        if positional.len() != 1 {
            return Err(match positional.len() {
                0 => "expected a config file".into(),
                _ => format!("unexpected argument `{}`", positional[1]),
            });
        }
        Ok(RunFlags {
            config: positional.remove(0),
            ..flags
        })
    }
}

pub fn run(flags: &RunFlags) -> Result<RunStats, String> {
    let cfg = PipelineConfig::load(&flags.config).map_err(|e| e.to_string())?;
    let tasks = build_tasks(&cfg, &SimFactory).map_err(|e| e.to_string())?;
    let mut pipe = Pipeline::new(tasks, &cfg.sources, Logger::stderr(flags.log_level))
        .map_err(|e| e.to_string())?;

    let seed = flags.seed.unwrap_or(cfg.global_seed);
    let opts = RunOptions {
        n_workers: flags.nworkers,
        global_seed: seed,
        sequential: flags.sequential,
    };

    let stats = match &flags.input {
        Some(path) => {
            let source = HepMcSource::open(path).map_err(|e| format!("{path}: {e}"))?;
            let (stats, mut source) = run_capped(&mut pipe, source, flags.nevents, &opts)?;
            for w in source.take_warnings() {
                eprintln!("warning: {w}");
            }
            stats
        }
        None => {
            let scfg = cfg.synthetic_source.as_ref().ok_or_else(|| {
                "no -input given and the config has no synthetic_source section".to_string()
            })?;
            let source = SyntheticSource::new(scfg, seed);
            run_capped(&mut pipe, source, flags.nevents, &opts)?.0
        }
    };

    let rate = if stats.wall_seconds > 0.0 {
        stats.events_processed as f64 / stats.wall_seconds
    } else {
        0.0
    };
    println!(
        "processed {} events ({} skipped) in {:.3} s: {:.1} events/s, {} worker{}",
        stats.events_processed,
        stats.events_skipped,
        stats.wall_seconds,
        rate,
        stats.n_workers,
        if stats.n_workers == 1 { "" } else { "s" },
    );
    if flags.log_level == Level::Debug {
        for (task, secs) in &stats.per_task_seconds {
            println!("  {task}: {secs:.3} s in process()");
        }
    }

    if let Some(path) = &flags.output {
        write_sinks(path, pipe.services())?;
    }
    if let Some(path) = &flags.stats_json {
        let body = serde_json::to_vec_pretty(&stats).expect("stats always serialize");
        std::fs::write(path, body).map_err(|e| format!("{path}: {e}"))?;
    }
    Ok(stats)
}

fn run_capped<S: EventSource>(
    pipe: &mut Pipeline,
    source: S,
    nevents: u64,
    opts: &RunOptions,
) -> Result<(RunStats, S), String> {
    if nevents > 0 {
        let mut capped = CappedSource::new(source, nevents);
        let stats = pipe.run(&mut capped, opts).map_err(|e| e.to_string())?;
        Ok((stats, capped.into_inner()))
    } else {
        let mut source = source;
        let stats = pipe.run(&mut source, opts).map_err(|e| e.to_string())?;
        Ok((stats, source))
    }
}

/// Histograms first, then 2-d histograms, then n-tuples, each in booking
/// order, so identical runs produce identical files.
pub fn write_sinks(path: &str, svc: &Services) -> Result<(), String> {
    let io_err = |e: rio::Error| format!("{path}: {e}");
    let mut w = rio::Writer::create(path).map_err(io_err)?;
    for (name, h) in svc.hists.h1s() {
        w.write(&name, &h.into()).map_err(io_err)?;
    }
    for (name, h) in svc.hists.h2s() {
        w.write(&name, &h.into()).map_err(io_err)?;
    }
    for (name, nt) in svc.ntuples.ntuples() {
        w.write(&name, &nt.into()).map_err(io_err)?;
    }
    w.finish().map_err(io_err)?;
    Ok(())
}
