//! `fastsim bench`: sweep worker counts, measure throughput and peak memory.
//!
//! Every measurement is taken on a fresh child process (this binary's own
//! `run` command) so that peak RSS reflects one pipeline run and nothing
//! else. The per-count figure is the median of `-reps` timed runs after one
//! discarded warm-up. A digest audit at the end confirms that every run in
//! the sweep wrote byte-identical output, whatever the worker count.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitStatus, Stdio};

use evfwk::Level;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::flags::Flags;
use crate::plot;

pub const USAGE: &str = "\
usage: fastsim bench CONFIG [flags]

Runs the pipeline over a sweep of worker counts, recording the median event
rate and the peak resident set size for each count, then writes a CSV table
and two SVG plots and checks every run produced byte-identical output.

  -workers LIST     comma-separated worker counts to sweep (default 1,2,4,8)
  -reps N           timed repetitions per count, median kept; one warm-up
                    run is discarded first (default 3, minimum 3)
  -csv PATH         CSV output path (default bench.csv)
  -plots DIR        directory for the SVG plots (default: alongside the CSV)
  -input PATH       as for run
  -nevents N        as for run
  -seed U64         as for run
  -log-level LEVEL  forwarded to the child runs (default warning)";

pub const CSV_HEADER: &str = "n_workers,events_per_second,max_rss_bytes,wall_seconds,events";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n_workers: usize,
    pub events_per_second: f64,
    /// None when the platform offers no child resource accounting.
    pub max_rss_bytes: Option<u64>,
    pub wall_seconds: f64,
    pub events: u64,
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        let rss = self
            .max_rss_bytes
            .map(|b| b.to_string())
            .unwrap_or_default();
        format!(
            "{},{},{},{},{}",
            self.n_workers, self.events_per_second, rss, self.wall_seconds, self.events
        )
    }
}

pub fn parse_csv(text: &str) -> Result<Vec<BenchRow>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        _ => return Err(format!("missing CSV header `{CSV_HEADER}`")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| format!("line {}: bad {what} in `{line}`", i + 2);
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(bad("field count"));
        }
        rows.push(BenchRow {
            n_workers: f[0].parse().map_err(|_| bad("n_workers"))?,
            events_per_second: f[1].parse().map_err(|_| bad("events_per_second"))?,
            max_rss_bytes: if f[2].is_empty() {
                None
            } else {
                Some(f[2].parse().map_err(|_| bad("max_rss_bytes"))?)
            },
            wall_seconds: f[3].parse().map_err(|_| bad("wall_seconds"))?,
            events: f[4].parse().map_err(|_| bad("events"))?,
        });
    }
    Ok(rows)
}

pub struct BenchFlags {
    pub config: String,
    pub workers: Vec<usize>,
    pub reps: usize,
    pub csv: PathBuf,
    pub plots: Option<PathBuf>,
    pub input: Option<String>,
    pub nevents: u64,
    pub seed: Option<u64>,
    pub log_level: Level,
}

impl BenchFlags {
    pub fn parse(args: &[String]) -> Result<BenchFlags, String> {
        let mut f = Flags::parse(args, &[])?;
        let workers = parse_workers(&f.take("workers").unwrap_or_else(|| "1,2,4,8".into()))?;
        let flags = BenchFlags {
            config: String::new(),
            workers,
            reps: f.take_as("reps", 3)?,
            csv: PathBuf::from(f.take("csv").unwrap_or_else(|| "bench.csv".into())),
            plots: f.take("plots").map(PathBuf::from),
            input: f.take("input"),
            nevents: f.take_as("nevents", 0)?,
            seed: f
                .take("seed")
                .map(|v| {
                    v.parse()
                        .map_err(|e| format!("flag -seed: bad value `{v}`: {e}"))
                })
                .transpose()?,
            log_level: f.take_as("log-level", Level::Warning)?,
        };
        if flags.reps < 3 {
            return Err("flag -reps: need at least 3 repetitions for a median".into());
        }
        let mut positional = f.finish()?;
        if positional.len() != 1 {
            return Err(match positional.len() {
                0 => "expected a config file".into(),
                _ => format!("unexpected argument `{}`", positional[1]),
            });
        }
        Ok(BenchFlags {
            config: positional.remove(0),
            ..flags
        })
    }
}

fn parse_workers(list: &str) -> Result<Vec<usize>, String> {
    let mut workers = Vec::new();
    for part in list.split(',') {
        let n: usize = part
            .trim()
            .parse()
            .map_err(|_| format!("flag -workers: bad count `{part}`"))?;
        if n == 0 {
            return Err("flag -workers: counts start at 1".into());
        }
        workers.push(n);
    }
    workers.sort_unstable();
    workers.dedup();
    if workers.is_empty() {
        return Err("flag -workers: empty list".into());
    }
    Ok(workers)
}

struct Rep {
    events_per_second: f64,
    wall_seconds: f64,
    max_rss_bytes: Option<u64>,
    events: u64,
    digest: String,
}

pub fn bench(flags: &BenchFlags) -> Result<(), String> {
    let scratch = std::env::temp_dir().join(format!("fastsim-bench-{}", std::process::id()));
    fs::create_dir_all(&scratch).map_err(|e| format!("{}: {e}", scratch.display()))?;
    let result = sweep(flags, &scratch);
    let _ = fs::remove_dir_all(&scratch);
    result
}

fn sweep(flags: &BenchFlags, scratch: &Path) -> Result<(), String> {
    if let Some(parent) = flags.csv.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| format!("{}: {e}", parent.display()))?;
        }
    }
    let mut csv = File::create(&flags.csv).map_err(|e| format!("{}: {e}", flags.csv.display()))?;
    let csv_err = |e: std::io::Error| format!("{}: {e}", flags.csv.display());
    writeln!(csv, "{CSV_HEADER}").map_err(csv_err)?;
    csv.flush().map_err(csv_err)?;

    let out_path = scratch.join("out.rio");
    let stats_path = scratch.join("stats.json");
    let mut rows: Vec<BenchRow> = Vec::new();
    let mut digests: Vec<(String, String)> = Vec::new();

    for &n in &flags.workers {
        let warm = measure_one(flags, n, &out_path, &stats_path)?;
        digests.push((format!("n_workers={n} warm-up"), warm.digest));

        let mut reps: Vec<Rep> = Vec::new();
        for rep in 1..=flags.reps {
            let r = measure_one(flags, n, &out_path, &stats_path)?;
            let rss = match r.max_rss_bytes {
                Some(b) => format!(", peak rss {:.1} MiB", b as f64 / (1024.0 * 1024.0)),
                None => String::new(),
            };
            println!(
                "n_workers={n} rep {rep}/{}: {:.1} events/s{rss}",
                flags.reps, r.events_per_second
            );
            digests.push((format!("n_workers={n} rep {rep}"), r.digest.clone()));
            reps.push(r);
        }

        let events = reps[0].events;
        if reps.iter().any(|r| r.events != events) {
            return Err("event count varied between repetitions of one sweep point".into());
        }
        reps.sort_by(|a, b| a.events_per_second.total_cmp(&b.events_per_second));
        let mid = &reps[reps.len() / 2];
        let row = BenchRow {
            n_workers: n,
            events_per_second: mid.events_per_second,
            // the high-water mark over all kept repetitions
            max_rss_bytes: reps.iter().filter_map(|r| r.max_rss_bytes).max(),
            wall_seconds: mid.wall_seconds,
            events,
        };
        writeln!(csv, "{}", row.to_csv()).map_err(csv_err)?;
        csv.flush().map_err(csv_err)?;
        rows.push(row);
    }

    let (_, first) = &digests[0];
    let mismatched: Vec<&str> = digests
        .iter()
        .filter(|(_, d)| d != first)
        .map(|(label, _)| label.as_str())
        .collect();
    if mismatched.is_empty() {
        println!(
            "digest audit: {} runs, output sha256 {}.. identical",
            digests.len(),
            &first[..16]
        );
    } else {
        return Err(format!(
            "digest audit failed: output differed from the first run at {}",
            mismatched.join(", ")
        ));
    }

    let plots_dir = match &flags.plots {
        Some(dir) => dir.clone(),
        None => flags.csv.parent().unwrap_or(Path::new(".")).to_path_buf(),
    };
    let dir_for_join = if plots_dir.as_os_str().is_empty() {
        PathBuf::from(".")
    } else {
        fs::create_dir_all(&plots_dir).map_err(|e| format!("{}: {e}", plots_dir.display()))?;
        plots_dir
    };
    for (name, body) in [
        ("rate_vs_workers.svg", plot::rate_plot(&rows)),
        ("memory_vs_workers.svg", plot::memory_plot(&rows)),
    ] {
        let path = dir_for_join.join(name);
        fs::write(&path, body).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    println!(
        "wrote {} and plots to {}",
        flags.csv.display(),
        dir_for_join.display()
    );
    Ok(())
}

/// The subset of the run statistics the parent needs back.
#[derive(Deserialize)]
struct ChildStats {
    events_processed: u64,
    wall_seconds: f64,
}

fn measure_one(
    flags: &BenchFlags,
    n_workers: usize,
    out_path: &Path,
    stats_path: &Path,
) -> Result<Rep, String> {
    let exe = std::env::current_exe().map_err(|e| format!("current_exe: {e}"))?;
    let mut cmd = Command::new(exe);
    cmd.arg("run")
        .arg(&flags.config)
        .arg("-nworkers")
        .arg(n_workers.to_string())
        .arg("-output")
        .arg(out_path)
        .arg("-stats-json")
        .arg(stats_path)
        .arg("-log-level")
        .arg(flags.log_level.to_string().to_lowercase())
        .stdout(Stdio::null());
    if let Some(input) = &flags.input {
        cmd.arg("-input").arg(input);
    }
    if flags.nevents > 0 {
        cmd.arg("-nevents").arg(flags.nevents.to_string());
    }
    if let Some(seed) = flags.seed {
        cmd.arg("-seed").arg(seed.to_string());
    }

    let mut child = cmd.spawn().map_err(|e| format!("spawning child run: {e}"))?;
    let (status, max_rss_bytes) = wait_with_rusage(&mut child)?;
    if !status.success() {
        return Err(format!("child run (-nworkers {n_workers}) failed: {status}"));
    }

    let stats_body = fs::read(stats_path).map_err(|e| format!("{}: {e}", stats_path.display()))?;
    let stats: ChildStats =
        serde_json::from_slice(&stats_body).map_err(|e| format!("child statistics: {e}"))?;
    if stats.wall_seconds <= 0.0 {
        return Err("child reported a non-positive wall time".into());
    }
    Ok(Rep {
        events_per_second: stats.events_processed as f64 / stats.wall_seconds,
        wall_seconds: stats.wall_seconds,
        max_rss_bytes,
        events: stats.events_processed,
        digest: sha256_file(out_path)?,
    })
}

fn sha256_file(path: &Path) -> Result<String, String> {
    let body = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut hasher = Sha256::new();
    hasher.update(&body);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    Ok(hex)
}

/// Reaps the child, returning its exit status and peak resident set size
/// from the kernel's post-exit accounting.
#[cfg(unix)]
fn wait_with_rusage(child: &mut std::process::Child) -> Result<(ExitStatus, Option<u64>), String> {
    use std::os::unix::process::ExitStatusExt;

    let pid = child.id() as libc::pid_t;
    let mut status: libc::c_int = 0;
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    let rc = unsafe { libc::wait4(pid, &mut status, 0, &mut usage) };
    if rc < 0 {
        return Err(format!("wait4: {}", std::io::Error::last_os_error()));
    }
    // ru_maxrss is kibibytes on Linux and the BSDs, bytes on macOS
    let unit = if cfg!(target_os = "macos") { 1 } else { 1024 };
    Ok((
        ExitStatus::from_raw(status),
        Some(usage.ru_maxrss as u64 * unit),
    ))
}

#[cfg(not(unix))]
fn wait_with_rusage(child: &mut std::process::Child) -> Result<(ExitStatus, Option<u64>), String> {
    let status = child.wait().map_err(|e| format!("wait: {e}"))?;
    eprintln!("warning: no child resource accounting on this platform; max_rss left empty");
    Ok((status, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rows_round_trip() {
        let rows = vec![
            BenchRow {
                n_workers: 1,
                events_per_second: 123.456,
                max_rss_bytes: Some(41943040),
                wall_seconds: 8.1,
                events: 1000,
            },
            BenchRow {
                n_workers: 8,
                events_per_second: 0.125,
                max_rss_bytes: None,
                wall_seconds: 8000.0,
                events: 1000,
            },
        ];
        let mut text = format!("{CSV_HEADER}\n");
        for r in &rows {
            text.push_str(&r.to_csv());
            text.push('\n');
        }
        assert_eq!(parse_csv(&text).unwrap(), rows);
    }

    #[test]
    fn csv_header_is_checked() {
        let err = parse_csv("workers,rate\n1,2\n").unwrap_err();
        assert!(err.contains("header"), "{err}");
    }

    #[test]
    fn worker_lists_are_sorted_and_deduplicated() {
        assert_eq!(parse_workers("4, 1,2,4").unwrap(), vec![1, 2, 4]);
        assert!(parse_workers("0,1").is_err());
        assert!(parse_workers("two").is_err());
    }
}
