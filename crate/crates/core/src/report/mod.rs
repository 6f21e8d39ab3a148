//! Anytime events, the error estimate, run statistics and their renderings.
//!
//! The optimizer pushes [`Event`]s into an [`EventSink`]. Sinks in this
//! module print the live text protocol, append CSV rows or simply collect
//! events for later inspection.

pub mod bench;

use std::fmt;
use std::io::Write;

use num_rational::Ratio;

use crate::model::CostVector;
use crate::optimize::Status;

pub const CSV_VERSION_LINE: &str = "# coreshrink-csv v1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EventKind {
    /// Free-form remark, printed as a comment line.
    Note(String),
    /// The oracle returned a stable model with this cost.
    Model {
        cost: CostVector,
    },
    /// A better model became the incumbent.
    UbImproved {
        level: u32,
        ub: u64,
        cost: CostVector,
    },
    /// `lbs` holds the bound of every level, highest first when rendered.
    LbImproved {
        level: u32,
        lb: u64,
        lbs: CostVector,
    },
    CoreFound {
        level: u32,
        size: usize,
    },
    CoreShrunk {
        before: usize,
        after: usize,
        calls: usize,
    },
    BudgetHit,
    Stratum {
        level: u32,
        stratum: u64,
    },
    LevelDone {
        level: u32,
        value: u64,
    },
    Final {
        status: Status,
    },
}

impl EventKind {
    pub fn tag(&self) -> &'static str {
        match self {
            EventKind::Note(_) => "NOTE",
            EventKind::Model { .. } => "MODEL",
            EventKind::UbImproved { .. } => "UB_IMPROVED",
            EventKind::LbImproved { .. } => "LB_IMPROVED",
            EventKind::CoreFound { .. } => "CORE_FOUND",
            EventKind::CoreShrunk { .. } => "CORE_SHRUNK",
            EventKind::BudgetHit => "BUDGET_HIT",
            EventKind::Stratum { .. } => "STRATUM",
            EventKind::LevelDone { .. } => "LEVEL_DONE",
            EventKind::Final { .. } => "FINAL",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    /// Seconds since the start of the run.
    pub at: f64,
    pub kind: EventKind,
}

pub trait EventSink {
    fn emit(&mut self, event: &Event);
}

impl EventSink for Vec<Event> {
    fn emit(&mut self, event: &Event) {
        self.push(event.clone());
    }
}

/// Forwards every event to each of its sinks.
pub struct Tee<'a>(pub Vec<&'a mut dyn EventSink>);

impl EventSink for Tee<'_> {
    fn emit(&mut self, event: &Event) {
        for s in self.0.iter_mut() {
            s.emit(event);
        }
    }
}

/// Relative distance between the bounds, `(ub - lb) / lb`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Epsilon {
    Finite(Ratio<u64>),
    Infinite,
}

/// The error estimate of a model of cost `ub` given lower bound `lb`;
/// `None` stands for an infinite upper bound.
pub fn epsilon(ub: Option<u64>, lb: u64) -> Epsilon {
    match ub {
        None => Epsilon::Infinite,
        Some(0) if lb == 0 => Epsilon::Finite(Ratio::from_integer(0)),
        Some(_) if lb == 0 => Epsilon::Infinite,
        Some(u) => Epsilon::Finite(Ratio::new(u.saturating_sub(lb), lb)),
    }
}

impl Epsilon {
    /// Percentage with two decimals, or `inf`.
    pub fn percent(&self) -> String {
        match self {
            Epsilon::Infinite => "inf".to_string(),
            Epsilon::Finite(r) => {
                let hundredths = (*r * Ratio::from_integer(10_000u64)).round().to_integer();
                format!("{}.{:02}%", hundredths / 100, hundredths % 100)
            }
        }
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Epsilon::Infinite => f.write_str("inf"),
            Epsilon::Finite(r) => write!(f, "{r}"),
        }
    }
}

impl PartialOrd for Epsilon {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Epsilon {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match (self, other) {
            (Epsilon::Infinite, Epsilon::Infinite) => Equal,
            (Epsilon::Infinite, _) => Greater,
            (_, Epsilon::Infinite) => Less,
            (Epsilon::Finite(a), Epsilon::Finite(b)) => a.cmp(b),
        }
    }
}

/// Counters summarizing one run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunStats {
    pub cores_found: u64,
    pub core_literals_before: u64,
    pub core_literals_after: u64,
    pub shrink_calls: u64,
    pub budget_hits: u64,
    pub models_found: u64,
    pub wall_time: f64,
}

impl RunStats {
    pub fn from_events(events: &[Event]) -> RunStats {
        let mut s = RunStats::default();
        for e in events {
            s.observe(e);
        }
        s
    }

    pub fn observe(&mut self, e: &Event) {
        match &e.kind {
            EventKind::Model { .. } => self.models_found += 1,
            EventKind::CoreFound { size, .. } => {
                self.cores_found += 1;
                self.core_literals_before += *size as u64;
                self.core_literals_after += *size as u64;
            }
            EventKind::CoreShrunk {
                before,
                after,
                calls,
            } => {
                self.core_literals_after -= (*before - *after) as u64;
                self.shrink_calls += *calls as u64;
            }
            EventKind::BudgetHit => self.budget_hits += 1,
            _ => {}
        }
        self.wall_time = self.wall_time.max(e.at);
    }
}

impl EventSink for RunStats {
    fn emit(&mut self, event: &Event) {
        self.observe(event);
    }
}

fn join(values: &[u64]) -> String {
    if values.is_empty() {
        return "0".to_string();
    }
    values
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Renders the live text protocol: `c`, `o`, `lb`, `e` and `s` lines.
///
/// Write failures are remembered rather than aborting the run.
pub struct ProtocolWriter<W: Write> {
    out: W,
    levels: Vec<u32>,
    ub: Option<u64>,
    lb: u64,
    failed: bool,
}

impl<W: Write> ProtocolWriter<W> {
    /// `levels` are the levels of the optimized weak constraints, greatest first.
    pub fn new(out: W, levels: Vec<u32>) -> Self {
        ProtocolWriter {
            out,
            levels,
            ub: None,
            lb: 0,
            failed: false,
        }
    }

    pub fn failed(&self) -> bool {
        self.failed
    }

    pub fn into_inner(self) -> W {
        self.out
    }

    fn line(&mut self, text: &str) {
        if writeln!(self.out, "{text}")
            .and_then(|_| self.out.flush())
            .is_err()
        {
            self.failed = true;
        }
    }

    fn estimate(&mut self) {
        if self.levels.len() == 1 {
            let e = epsilon(self.ub, self.lb);
            self.line(&format!("e {e}"));
        }
    }
}

impl<W: Write> EventSink for ProtocolWriter<W> {
    fn emit(&mut self, event: &Event) {
        match &event.kind {
            EventKind::Note(text) => self.line(&format!("c {text}")),
            EventKind::UbImproved { ub, cost, .. } => {
                self.ub = Some(*ub);
                let text = format!("o {}", join(&cost.values_for(&self.levels)));
                self.line(&text);
                self.estimate();
            }
            EventKind::LbImproved { lb, lbs, .. } => {
                self.lb = *lb;
                let text = format!("lb {}", join(&lbs.values_for(&self.levels)));
                self.line(&text);
                self.estimate();
            }
            EventKind::Final { status } => self.line(&format!("s {status}")),
            _ => {}
        }
    }
}

fn vector_field(cv: &CostVector) -> String {
    let parts: Vec<String> = cv
        .levels()
        .rev()
        .map(|l| format!("{}@{l}", cv.get(l)))
        .collect();
    parts.join(" ")
}

/// Appends one CSV row per event.
pub struct EventCsvWriter<W: Write> {
    writer: csv::Writer<W>,
    failed: bool,
}

impl<W: Write> EventCsvWriter<W> {
    pub fn new(mut out: W) -> Self {
        let mut failed = writeln!(out, "{CSV_VERSION_LINE}").is_err();
        let mut writer = csv::Writer::from_writer(out);
        failed |= writer
            .write_record(["time", "event", "level", "value", "detail"])
            .is_err();
        EventCsvWriter { writer, failed }
    }

    pub fn failed(&self) -> bool {
        self.failed
    }

    pub fn finish(mut self) -> Result<W, std::io::Error> {
        self.writer.flush()?;
        self.writer
            .into_inner()
            .map_err(|e| std::io::Error::other(e.to_string()))
    }
}

impl<W: Write> EventSink for EventCsvWriter<W> {
    fn emit(&mut self, event: &Event) {
        let (level, value, detail) = match &event.kind {
            EventKind::Note(t) => (String::new(), String::new(), t.clone()),
            EventKind::Model { cost } => (String::new(), String::new(), vector_field(cost)),
            EventKind::UbImproved { level, ub, cost } => {
                (level.to_string(), ub.to_string(), vector_field(cost))
            }
            EventKind::LbImproved { level, lb, lbs } => {
                (level.to_string(), lb.to_string(), vector_field(lbs))
            }
            EventKind::CoreFound { level, size } => {
                (level.to_string(), size.to_string(), String::new())
            }
            EventKind::CoreShrunk {
                before,
                after,
                calls,
            } => (
                String::new(),
                after.to_string(),
                format!("before={before} calls={calls}"),
            ),
            EventKind::BudgetHit => (String::new(), String::new(), String::new()),
            EventKind::Stratum { level, stratum } => {
                (level.to_string(), stratum.to_string(), String::new())
            }
            EventKind::LevelDone { level, value } => {
                (level.to_string(), value.to_string(), String::new())
            }
            EventKind::Final { status } => (String::new(), String::new(), status.to_string()),
        };
        let time = format!("{:.6}", event.at);
        if self
            .writer
            .write_record([time.as_str(), event.kind.tag(), &level, &value, &detail])
            .and_then(|_| self.writer.flush().map_err(Into::into))
            .is_err()
        {
            self.failed = true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(kind: EventKind) -> Event {
        Event { at: 0.0, kind }
    }

    fn cv(pairs: &[(u32, u64)]) -> CostVector {
        let mut c = CostVector::new();
        for &(l, v) in pairs {
            c.set(l, v);
        }
        c
    }

    #[test]
    fn epsilon_cases() {
        assert_eq!(epsilon(Some(0), 0), Epsilon::Finite(Ratio::from_integer(0)));
        assert_eq!(epsilon(None, 0), Epsilon::Infinite);
        assert_eq!(epsilon(None, 7), Epsilon::Infinite);
        assert_eq!(epsilon(Some(4), 0), Epsilon::Infinite);
        assert_eq!(epsilon(Some(3), 2), Epsilon::Finite(Ratio::new(1, 2)));
        assert_eq!(epsilon(Some(3), 2).to_string(), "1/2");
        assert_eq!(epsilon(Some(3), 2).percent(), "50.00%");
        assert_eq!(epsilon(Some(4), 3).percent(), "33.33%");
        assert_eq!(epsilon(Some(5), 5).to_string(), "0");
        assert_eq!(epsilon(None, 1).percent(), "inf");
    }

    #[test]
    fn protocol_lines_single_level() {
        let mut w = ProtocolWriter::new(Vec::new(), vec![1]);
        w.emit(&ev(EventKind::Note("hello".into())));
        w.emit(&ev(EventKind::LbImproved {
            level: 1,
            lb: 1,
            lbs: cv(&[(1, 1)]),
        }));
        w.emit(&ev(EventKind::UbImproved {
            level: 1,
            ub: 1,
            cost: cv(&[(1, 1)]),
        }));
        w.emit(&ev(EventKind::Model {
            cost: cv(&[(1, 1)]),
        }));
        w.emit(&ev(EventKind::Final {
            status: Status::Optimum,
        }));
        let text = String::from_utf8(w.into_inner()).unwrap();
        assert_eq!(text, "c hello\nlb 1\ne inf\no 1\ne 0\ns OPTIMUM FOUND\n");
    }

    #[test]
    fn protocol_lines_two_levels() {
        let mut w = ProtocolWriter::new(Vec::new(), vec![2, 1]);
        w.emit(&ev(EventKind::UbImproved {
            level: 2,
            ub: 0,
            cost: cv(&[(2, 0), (1, 2)]),
        }));
        w.emit(&ev(EventKind::LbImproved {
            level: 1,
            lb: 2,
            lbs: cv(&[(2, 0), (1, 2)]),
        }));
        let text = String::from_utf8(w.into_inner()).unwrap();
        assert_eq!(text, "o 0 2\nlb 0 2\n");
    }

    #[test]
    fn stats_accounting() {
        let events = vec![
            ev(EventKind::CoreFound { level: 1, size: 8 }),
            ev(EventKind::BudgetHit),
            ev(EventKind::CoreShrunk {
                before: 8,
                after: 3,
                calls: 5,
            }),
            ev(EventKind::CoreFound { level: 1, size: 2 }),
            ev(EventKind::Model {
                cost: cv(&[(1, 3)]),
            }),
            Event {
                at: 1.5,
                kind: EventKind::Model {
                    cost: cv(&[(1, 2)]),
                },
            },
        ];
        let s = RunStats::from_events(&events);
        assert_eq!(s.cores_found, 2);
        assert_eq!(s.core_literals_before, 10);
        assert_eq!(s.core_literals_after, 5);
        assert_eq!(s.shrink_calls, 5);
        assert_eq!(s.budget_hits, 1);
        assert_eq!(s.models_found, 2);
        assert_eq!(s.wall_time, 1.5);
    }

    #[test]
    fn csv_rows() {
        let mut w = EventCsvWriter::new(Vec::new());
        w.emit(&ev(EventKind::Note("a, b".into())));
        w.emit(&ev(EventKind::UbImproved {
            level: 2,
            ub: 0,
            cost: cv(&[(2, 0), (1, 2)]),
        }));
        let text = String::from_utf8(w.finish().unwrap()).unwrap();
        assert_eq!(
            text,
            "# coreshrink-csv v1\ntime,event,level,value,detail\n\
             0.000000,NOTE,,,\"a, b\"\n0.000000,UB_IMPROVED,2,0,0@2 2@1\n"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn epsilon_monotone(lb in 0u64..1000, d in 0u64..1000, step in 1u64..50) {
            let ub = lb + d;
            let here = epsilon(Some(ub), lb);
            prop_assert!(epsilon(Some(ub + step), lb) >= here);
            if lb + step <= ub {
                prop_assert!(epsilon(Some(ub), lb + step) <= here);
            }
            prop_assert!(epsilon(None, lb) >= here);
        }
    }
}
