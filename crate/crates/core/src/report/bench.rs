//! Benchmark harness: runs every strategy on every instance, in parallel,
//! and renders one CSV document with per-run rows and a per-strategy
//! summary.
//!
//! The summary counts solved runs, wins and cumulative error-estimate
//! buckets. A strategy wins an instance when it terminates on it, or when
//! no strategy terminates and its upper bound is the best one; strategies
//! tied on the best upper bound all win.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use thiserror::Error;

use crate::model::CostVector;
use crate::optimize::{optimize, Status, StrategyConfig};
use crate::textio::{parse, Dialect};

use super::{epsilon, Epsilon, RunStats, CSV_VERSION_LINE};

const SUMMARY_MARKER: &str = "# summary";
const TIE_NOTE: &str = "# wins: a strategy wins an instance if it terminates, or if none terminates and it has the best upper bound; ties all win";

/// Cumulative error buckets, by upper threshold.
pub const EPS_THRESHOLDS: [(u64, u64); 6] = [(0, 1), (1, 16), (1, 8), (1, 4), (1, 2), (1, 1)];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot read manifest {path}: {source}")]
    Manifest { path: String, source: io::Error },
    #[error("manifest line {line}: unknown format `{format}`")]
    Format { line: usize, format: String },
    #[error("malformed benchmark CSV: {0}")]
    Csv(String),
}

impl From<csv::Error> for BenchError {
    fn from(e: csv::Error) -> Self {
        BenchError::Csv(e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchInstance {
    pub path: PathBuf,
    pub dialect: Option<Dialect>,
}

/// Reads a manifest: one instance path per line, optionally followed by
/// `asp` or `wcnf`. Blank lines and `#` comments are skipped; relative paths
/// are taken from the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<BenchInstance>, BenchError> {
    let text = fs::read_to_string(path).map_err(|source| BenchError::Manifest {
        path: path.display().to_string(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_manifest(&text, base)
}

pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<BenchInstance>, BenchError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let file = parts.next().expect("nonempty line");
        let dialect = match parts.next() {
            None => None,
            Some("asp") => Some(Dialect::GroundAsp),
            Some("wcnf") => Some(Dialect::Wcnf),
            Some(other) => {
                return Err(BenchError::Format {
                    line: i + 1,
                    format: other.to_string(),
                })
            }
        };
        let p = Path::new(file);
        let path = if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        };
        out.push(BenchInstance { path, dialect });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub instance: String,
    pub strategy: String,
    /// `OPTIMUM`, `SATISFIABLE`, `UNSATISFIABLE`, `UNKNOWN`, `PARSE_ERROR` or `ERROR`.
    pub status: String,
    pub wall_time: f64,
    pub ub: Option<CostVector>,
    pub lb: CostVector,
    /// Only for single-level instances.
    pub epsilon: Option<Epsilon>,
    pub stats: RunStats,
}

impl BenchRow {
    pub fn terminated(&self) -> bool {
        self.status == "OPTIMUM" || self.status == "UNSATISFIABLE"
    }
}

fn status_tag(s: Status) -> &'static str {
    match s {
        Status::Optimum => "OPTIMUM",
        Status::Satisfiable => "SATISFIABLE",
        Status::Incoherent => "UNSATISFIABLE",
        Status::Unknown => "UNKNOWN",
    }
}

/// Runs one instance under one strategy.
pub fn run_cell(inst: &BenchInstance, cfg: &StrategyConfig, timeout: Option<Duration>) -> BenchRow {
    let mut row = BenchRow {
        instance: inst.path.display().to_string(),
        strategy: cfg.label(),
        status: String::new(),
        wall_time: 0.0,
        ub: None,
        lb: CostVector::new(),
        epsilon: None,
        stats: RunStats::default(),
    };
    let start = Instant::now();
    let parsed = fs::read(&inst.path)
        .map_err(|e| e.to_string())
        .and_then(|bytes| parse(&bytes, inst.dialect).map_err(|e| e.to_string()));
    let instance = match parsed {
        Ok(p) => p,
        Err(_) => {
            row.status = "PARSE_ERROR".into();
            return row;
        }
    };
    let cfg = StrategyConfig {
        timeout,
        ..cfg.clone()
    };
    let mut events = Vec::new();
    match optimize(&instance, &cfg, &mut events) {
        Ok(res) => {
            row.status = status_tag(res.status).into();
            row.lb = res.lb_vector.clone();
            if res.levels.len() == 1 && res.status != Status::Incoherent {
                let l = res.levels[0];
                let ub = res.cost.as_ref().map(|c| c.get(l));
                row.epsilon = Some(epsilon(
                    ub,
                    res.lb_vector.get(l).min(ub.unwrap_or(u64::MAX)),
                ));
            }
            row.ub = res.cost;
        }
        Err(_) => row.status = "ERROR".into(),
    }
    row.stats = RunStats::from_events(&events);
    row.wall_time = start.elapsed().as_secs_f64();
    row
}

/// Runs every instance under every strategy on `workers` threads. Rows come
/// back in instance-major order regardless of scheduling.
pub fn run_matrix(
    instances: &[BenchInstance],
    strategies: &[StrategyConfig],
    timeout: Option<Duration>,
    workers: usize,
) -> Vec<BenchRow> {
    let cells: Vec<(usize, usize)> = (0..instances.len())
        .flat_map(|i| (0..strategies.len()).map(move |s| (i, s)))
        .collect();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<BenchRow>>> = Mutex::new(vec![None; cells.len()]);
    std::thread::scope(|scope| {
        for _ in 0..workers.max(1) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(i, s)) = cells.get(k) else {
                    break;
                };
                let row = run_cell(&instances[i], &strategies[s], timeout);
                results.lock().expect("no worker panicked")[k] = Some(row);
            });
        }
    });
    results
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StrategySummary {
    pub strategy: String,
    pub runs: u64,
    pub solved: u64,
    pub wins: u64,
    /// Runs with ε at most each of [`EPS_THRESHOLDS`].
    pub eps_buckets: [u64; 6],
    pub core_literals_before: u64,
    pub core_literals_after: u64,
}

/// Per-strategy summary, in order of first appearance.
pub fn summarize(rows: &[BenchRow]) -> Vec<StrategySummary> {
    let mut order: Vec<String> = Vec::new();
    let mut by: BTreeMap<String, StrategySummary> = BTreeMap::new();
    for r in rows {
        if !by.contains_key(&r.strategy) {
            order.push(r.strategy.clone());
        }
        let s = by
            .entry(r.strategy.clone())
            .or_insert_with(|| StrategySummary {
                strategy: r.strategy.clone(),
                ..Default::default()
            });
        s.runs += 1;
        s.solved += u64::from(r.terminated());
        s.core_literals_before += r.stats.core_literals_before;
        s.core_literals_after += r.stats.core_literals_after;
        if let Some(Epsilon::Finite(e)) = r.epsilon {
            for (k, &(n, d)) in EPS_THRESHOLDS.iter().enumerate() {
                if e <= Ratio::new(n, d) {
                    s.eps_buckets[k] += 1;
                }
            }
        }
    }
    let mut per_instance: BTreeMap<&str, Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        per_instance.entry(&r.instance).or_default().push(r);
    }
    for group in per_instance.values() {
        let winners: Vec<&BenchRow> = if group.iter().any(|r| r.terminated()) {
            group.iter().copied().filter(|r| r.terminated()).collect()
        } else {
            let ubs: Vec<&CostVector> = group.iter().filter_map(|r| r.ub.as_ref()).collect();
            let best = ubs
                .iter()
                .copied()
                .find(|c| !ubs.iter().any(|o| o.precedes(c)));
            match best {
                None => Vec::new(),
                Some(b) => group
                    .iter()
                    .copied()
                    .filter(|r| {
                        r.ub.as_ref()
                            .is_some_and(|u| !b.precedes(u) && !u.precedes(b))
                    })
                    .collect(),
            }
        };
        for w in winners {
            by.get_mut(&w.strategy).expect("known strategy").wins += 1;
        }
    }
    order
        .into_iter()
        .map(|k| by.remove(&k).expect("present"))
        .collect()
}

fn vector_text(cv: &CostVector) -> String {
    let parts: Vec<String> = cv
        .levels()
        .rev()
        .map(|l| format!("{}@{l}", cv.get(l)))
        .collect();
    parts.join(" ")
}

fn parse_vector(text: &str) -> Result<CostVector, BenchError> {
    let mut cv = CostVector::new();
    for part in text.split_whitespace() {
        let (c, l) = part
            .split_once('@')
            .ok_or_else(|| BenchError::Csv(format!("bad cost `{part}`")))?;
        let c = c
            .parse()
            .map_err(|_| BenchError::Csv(format!("bad cost `{part}`")))?;
        let l = l
            .parse()
            .map_err(|_| BenchError::Csv(format!("bad level `{part}`")))?;
        cv.set(l, c);
    }
    Ok(cv)
}

fn parse_epsilon(text: &str) -> Result<Option<Epsilon>, BenchError> {
    Ok(match text {
        "" => None,
        "inf" => Some(Epsilon::Infinite),
        t => {
            Some(Epsilon::Finite(t.parse().map_err(|_| {
                BenchError::Csv(format!("bad epsilon `{t}`"))
            })?))
        }
    })
}

const ROW_HEADER: [&str; 13] = [
    "instance",
    "strategy",
    "status",
    "wall_time",
    "ub",
    "lb",
    "epsilon",
    "cores_found",
    "core_literals_before",
    "core_literals_after",
    "shrink_calls",
    "budget_hits",
    "models_found",
];

const SUMMARY_HEADER: [&str; 12] = [
    "strategy",
    "runs",
    "solved",
    "wins",
    "eps_0",
    "eps_le_1/16",
    "eps_le_1/8",
    "eps_le_1/4",
    "eps_le_1/2",
    "eps_le_1",
    "core_literals_before",
    "core_literals_after",
];

fn csv_text(records: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// The full CSV document: version line, rows, then the summary block.
pub fn render_csv(rows: &[BenchRow]) -> String {
    let mut records = vec![ROW_HEADER.iter().map(|s| s.to_string()).collect()];
    for r in rows {
        records.push(vec![
            r.instance.clone(),
            r.strategy.clone(),
            r.status.clone(),
            format!("{:.6}", r.wall_time),
            r.ub.as_ref().map(vector_text).unwrap_or_default(),
            vector_text(&r.lb),
            r.epsilon.map(|e| e.to_string()).unwrap_or_default(),
            r.stats.cores_found.to_string(),
            r.stats.core_literals_before.to_string(),
            r.stats.core_literals_after.to_string(),
            r.stats.shrink_calls.to_string(),
            r.stats.budget_hits.to_string(),
            r.stats.models_found.to_string(),
        ]);
    }
    let mut out = format!("{CSV_VERSION_LINE}\n{TIE_NOTE}\n");
    out.push_str(&csv_text(records));
    out.push_str(SUMMARY_MARKER);
    out.push('\n');
    out.push_str(&render_summary(&summarize(rows)));
    out
}

pub fn render_summary(summary: &[StrategySummary]) -> String {
    let mut records = vec![SUMMARY_HEADER.iter().map(|s| s.to_string()).collect()];
    for s in summary {
        let mut r = vec![
            s.strategy.clone(),
            s.runs.to_string(),
            s.solved.to_string(),
            s.wins.to_string(),
        ];
        r.extend(s.eps_buckets.iter().map(u64::to_string));
        r.push(s.core_literals_before.to_string());
        r.push(s.core_literals_after.to_string());
        records.push(r);
    }
    csv_text(records)
}

/// Reads back the rows of a document produced by [`render_csv`].
pub fn parse_rows(text: &str) -> Result<Vec<BenchRow>, BenchError> {
    let body = text.split(SUMMARY_MARKER).next().unwrap_or("");
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(body.as_bytes());
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.len() != ROW_HEADER.len() {
            return Err(BenchError::Csv(format!(
                "expected {} fields",
                ROW_HEADER.len()
            )));
        }
        let num = |i: usize| -> Result<u64, BenchError> {
            rec[i]
                .parse()
                .map_err(|_| BenchError::Csv(format!("bad number `{}`", &rec[i])))
        };
        rows.push(BenchRow {
            instance: rec[0].to_string(),
            strategy: rec[1].to_string(),
            status: rec[2].to_string(),
            wall_time: rec[3]
                .parse()
                .map_err(|_| BenchError::Csv(format!("bad time `{}`", &rec[3])))?,
            ub: if rec[4].is_empty() {
                None
            } else {
                Some(parse_vector(&rec[4])?)
            },
            lb: parse_vector(&rec[5])?,
            epsilon: parse_epsilon(&rec[6])?,
            stats: RunStats {
                cores_found: num(7)?,
                core_literals_before: num(8)?,
                core_literals_after: num(9)?,
                shrink_calls: num(10)?,
                budget_hits: num(11)?,
                models_found: num(12)?,
                wall_time: 0.0,
            },
        });
    }
    Ok(rows)
}

/// The summary block as written in a document.
pub fn summary_block(text: &str) -> Option<&str> {
    text.split_once(&format!("{SUMMARY_MARKER}\n"))
        .map(|(_, s)| s)
}
