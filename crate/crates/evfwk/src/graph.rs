use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::task::TaskSpec;

pub(crate) struct TaskIo {
    /// (collection key, slot) for each declared input, in declaration order.
    pub inputs: Vec<(String, usize)>,
    pub outputs: Vec<(String, usize)>,
}

/// Validated wiring of a pipeline: who produces each collection, who
/// consumes it, and a deterministic schedule.
///
/// Built once before the run. Rejects duplicate task ids, duplicate
/// producers, missing producers, type-tag mismatches and dependency cycles,
/// so the scheduler can assume every `get` during processing will find its
/// value.
pub struct Graph {
    pub(crate) tasks: Vec<TaskSpec>,
    pub(crate) task_io: Vec<TaskIo>,
    pub(crate) key_names: Vec<String>,
    /// Consumer task indexes per key slot.
    pub(crate) consumers: Vec<Vec<usize>>,
    /// Number of declared inputs per task; a task becomes ready when this
    /// many of its input slots have been written.
    pub(crate) unmet_init: Vec<usize>,
    pub(crate) source_slots: Vec<usize>,
    /// Ready sets in dependency order; ties broken by task id so the order
    /// is reproducible. Within one event, sink writes are applied in this
    /// order regardless of which threads ran the tasks.
    schedule: Vec<Vec<usize>>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let schedule: Vec<Vec<&str>> = self
            .schedule
            .iter()
            .map(|level| level.iter().map(|&t| self.tasks[t].id.as_str()).collect())
            .collect();
        f.debug_struct("Graph")
            .field("keys", &self.key_names)
            .field("schedule", &schedule)
            .finish()
    }
}

impl Graph {
    pub fn build(specs: Vec<TaskSpec>, source_keys: &[String]) -> Result<Graph> {
        let mut by_id = BTreeMap::new();
        for (i, s) in specs.iter().enumerate() {
            if s.id.is_empty() {
                return Err(Error::InvalidPort {
                    task: String::from("?"),
                    reason: String::from("empty task id"),
                });
            }
            if by_id.insert(s.id.clone(), i).is_some() {
                return Err(Error::DuplicateTaskId(s.id.clone()));
            }
            for (what, ports) in [("input", &s.inputs), ("output", &s.outputs)] {
                let mut seen = BTreeSet::new();
                for p in ports.iter() {
                    if p.key.is_empty() {
                        return Err(Error::InvalidPort {
                            task: s.id.clone(),
                            reason: format!("empty {what} key"),
                        });
                    }
                    if !seen.insert(p.key.as_str()) {
                        return Err(Error::InvalidPort {
                            task: s.id.clone(),
                            reason: format!("{what} key `{}` declared twice", p.key),
                        });
                    }
                }
            }
        }

        // Key table: source keys first, then task outputs in declaration order.
        let mut key_index: BTreeMap<String, usize> = BTreeMap::new();
        let mut key_names = Vec::new();
        let mut producer: Vec<Option<usize>> = Vec::new(); // None = source
        let mut tag_of_key: Vec<Option<String>> = Vec::new();
        let mut slot_of = |name: &str,
                           key_names: &mut Vec<String>,
                           producer: &mut Vec<Option<usize>>,
                           tag_of_key: &mut Vec<Option<String>>| {
            *key_index.entry(name.to_string()).or_insert_with(|| {
                key_names.push(name.to_string());
                producer.push(None);
                tag_of_key.push(None);
                key_names.len() - 1
            })
        };

        let mut source_slots = Vec::new();
        let mut has_producer = vec![];
        for k in source_keys {
            let slot = slot_of(k, &mut key_names, &mut producer, &mut tag_of_key);
            if has_producer.len() <= slot {
                has_producer.resize(slot + 1, false);
            }
            if has_producer[slot] {
                return Err(Error::DuplicateProducer {
                    key: k.clone(),
                    first: String::from("<source>"),
                    second: String::from("<source>"),
                });
            }
            has_producer[slot] = true;
            source_slots.push(slot);
        }

        for (i, s) in specs.iter().enumerate() {
            for p in &s.outputs {
                let slot = slot_of(&p.key, &mut key_names, &mut producer, &mut tag_of_key);
                if has_producer.len() <= slot {
                    has_producer.resize(slot + 1, false);
                }
                if has_producer[slot] {
                    let first = match producer[slot] {
                        Some(t) => specs[t].id.clone(),
                        None => String::from("<source>"),
                    };
                    return Err(Error::DuplicateProducer {
                        key: p.key.clone(),
                        first,
                        second: s.id.clone(),
                    });
                }
                has_producer[slot] = true;
                producer[slot] = Some(i);
                tag_of_key[slot] = Some(p.type_tag.clone());
            }
        }

        let mut consumers = vec![Vec::new(); key_names.len()];
        for (i, s) in specs.iter().enumerate() {
            for p in &s.inputs {
                let slot = match key_index.get(&p.key) {
                    Some(&slot) if has_producer[slot] => slot,
                    _ => {
                        return Err(Error::MissingProducer {
                            key: p.key.clone(),
                            consumer: s.id.clone(),
                        })
                    }
                };
                match &tag_of_key[slot] {
                    Some(tag) if *tag != p.type_tag => {
                        return Err(Error::TypeMismatch {
                            key: p.key.clone(),
                            produced: tag.clone(),
                            consumed: p.type_tag.clone(),
                            consumer: s.id.clone(),
                        });
                    }
                    Some(_) => {}
                    // Source-provided keys carry no declared tag; hold all
                    // consumers to the tag the first one used.
                    None => tag_of_key[slot] = Some(p.type_tag.clone()),
                }
                consumers[slot].push(i);
            }
        }

        // Task-level dependency edges, deduplicated.
        let mut edges = BTreeSet::new();
        for (slot, cs) in consumers.iter().enumerate() {
            if let Some(p) = producer[slot] {
                for &c in cs {
                    edges.insert((p, c));
                }
            }
        }
        let mut out_edges = vec![Vec::new(); specs.len()];
        let mut in_deg = vec![0usize; specs.len()];
        for &(u, v) in &edges {
            out_edges[u].push(v);
            in_deg[v] += 1;
        }

        // Layered topological order; each layer sorted by id.
        let mut schedule = Vec::new();
        let mut placed = 0;
        let mut frontier: Vec<usize> = (0..specs.len()).filter(|&t| in_deg[t] == 0).collect();
        while !frontier.is_empty() {
            frontier.sort_by(|&a, &b| specs[a].id.cmp(&specs[b].id));
            let mut next = Vec::new();
            for &t in &frontier {
                placed += 1;
                for &v in &out_edges[t] {
                    in_deg[v] -= 1;
                    if in_deg[v] == 0 {
                        next.push(v);
                    }
                }
            }
            schedule.push(std::mem::take(&mut frontier));
            frontier = next;
        }
        if placed != specs.len() {
            return Err(Error::Cycle {
                path: extract_cycle(&specs, &out_edges),
            });
        }

        let task_io = specs
            .iter()
            .map(|s| TaskIo {
                inputs: s.inputs.iter().map(|p| (p.key.clone(), key_index[&p.key])).collect(),
                outputs: s.outputs.iter().map(|p| (p.key.clone(), key_index[&p.key])).collect(),
            })
            .collect();
        let unmet_init = specs.iter().map(|s| s.inputs.len()).collect();

        Ok(Graph {
            tasks: specs,
            task_io,
            key_names,
            consumers,
            unmet_init,
            source_slots,
            schedule,
        })
    }

    pub fn n_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn n_keys(&self) -> usize {
        self.key_names.len()
    }

    pub fn task_id(&self, idx: usize) -> &str {
        &self.tasks[idx].id
    }

    /// Ready sets in execution order.
    pub fn schedule(&self) -> &[Vec<usize>] {
        &self.schedule
    }

    /// Task indexes in deterministic schedule order.
    pub fn schedule_order(&self) -> impl Iterator<Item = usize> + '_ {
        self.schedule.iter().flatten().copied()
    }
}

/// Walk the leftover graph for one concrete cycle to report. Only called
/// when a cycle is known to exist.
fn extract_cycle(specs: &[TaskSpec], out_edges: &[Vec<usize>]) -> Vec<String> {
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Gray,
        Black,
    }
    let n = specs.len();
    let mut color = vec![Color::White; n];
    for start in 0..n {
        if color[start] != Color::White {
            continue;
        }
        // Iterative DFS keeping the gray path on an explicit stack.
        let mut path = vec![start];
        let mut iters = vec![0usize];
        color[start] = Color::Gray;
        while let Some(&u) = path.last() {
            let i = *iters.last().unwrap();
            if i < out_edges[u].len() {
                *iters.last_mut().unwrap() += 1;
                let v = out_edges[u][i];
                match color[v] {
                    Color::Gray => {
                        let pos = path.iter().position(|&x| x == v).unwrap();
                        let mut ids: Vec<String> =
                            path[pos..].iter().map(|&t| specs[t].id.clone()).collect();
                        ids.push(specs[v].id.clone());
                        return ids;
                    }
                    Color::White => {
                        color[v] = Color::Gray;
                        path.push(v);
                        iters.push(0);
                    }
                    Color::Black => {}
                }
            } else {
                color[u] = Color::Black;
                path.pop();
                iters.pop();
            }
        }
    }
    unreachable!("no cycle found in a graph that failed topological sort")
}
