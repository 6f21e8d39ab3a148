//! Optimum stable model search.
//!
//! Two algorithms share one driver: model-guided linear search, which
//! tightens an upper bound until the oracle refutes it, and core-guided
//! search, which raises a lower bound from unsatisfiable cores while
//! stratifying, hardening and optionally shrinking cores first. Both process
//! levels from the greatest down and report progress as [`Event`]s.

mod linsu;
mod one;
pub mod shrink;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::model::{
    AtomId, CostVector, Interpretation, ModelError, Program, Rule, WeakConstraintSet,
};
use crate::oracle::{
    make_oracle, CoreMode, EnumOracle, Limits, Oracle, OracleError, OracleKind, Verdict,
};
use crate::relax::{compile_levels, RelaxError};
use crate::report::{Event, EventKind, EventSink};
use crate::textio::ParsedInstance;

pub use shrink::{shrink_core, ShrinkOutcome, ShrinkVariant};

/// Atom cap used by the enumeration oracle inside the optimizer. Relaxation
/// adds soft atoms, so this sits well above the cap for plain programs.
pub const OPTIMIZER_ENUM_CAP: usize = 256;

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error("invalid strategy: {0}")]
    Config(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Relax(#[from] RelaxError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Linsu,
    One,
}

/// Work allowance for a single shrinking probe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Budget {
    Time(Duration),
    /// Conflicts for the CDCL oracle, search nodes for enumeration.
    Count(u64),
}

impl Default for Budget {
    fn default() -> Self {
        Budget::Time(Duration::from_secs(10))
    }
}

impl FromStr for Budget {
    type Err = String;

    /// `<N>s` for seconds, `<N>c` for a count.
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let err = || format!("budget `{s}` must look like `10s` or `5000c`");
        let (num, unit) = s.split_at(s.len().checked_sub(1).ok_or_else(err)?);
        match unit {
            "s" => {
                let secs: f64 = num.parse().map_err(|_| err())?;
                if !(secs > 0.0 && secs.is_finite()) {
                    return Err(err());
                }
                Ok(Budget::Time(Duration::from_secs_f64(secs)))
            }
            "c" => {
                let n: u64 = num.parse().map_err(|_| err())?;
                if n == 0 {
                    return Err(err());
                }
                Ok(Budget::Count(n))
            }
            _ => Err(err()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct StrategyConfig {
    pub algorithm: Algorithm,
    pub shrink: Option<ShrinkVariant>,
    pub disjoint_cores: bool,
    pub stratification: bool,
    pub compile_levels: bool,
    pub shrink_budget: Budget,
    pub oracle: OracleKind,
    /// Core quality of the enumeration oracle.
    pub core_mode: CoreMode,
    pub enum_cap: usize,
    pub seed: u64,
    pub timeout: Option<Duration>,
    pub interrupt: Option<Arc<AtomicBool>>,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            algorithm: Algorithm::One,
            shrink: Some(ShrinkVariant::Progression),
            disjoint_cores: false,
            stratification: true,
            compile_levels: false,
            shrink_budget: Budget::default(),
            oracle: OracleKind::Cdcl,
            core_mode: CoreMode::Raw,
            enum_cap: OPTIMIZER_ENUM_CAP,
            seed: 0,
            timeout: None,
            interrupt: None,
        }
    }
}

impl StrategyConfig {
    pub fn linsu() -> Self {
        StrategyConfig {
            algorithm: Algorithm::Linsu,
            shrink: None,
            ..Self::default()
        }
    }

    pub fn one(shrink: Option<ShrinkVariant>, disjoint_cores: bool) -> Self {
        StrategyConfig {
            shrink,
            disjoint_cores,
            ..Self::default()
        }
    }

    /// The strategies compared by the benchmark harness and the tests.
    pub fn matrix() -> Vec<StrategyConfig> {
        let mut all = vec![StrategyConfig::linsu()];
        for shrink in [
            None,
            Some(ShrinkVariant::Linear),
            Some(ShrinkVariant::Progression),
        ] {
            for disjoint in [false, true] {
                all.push(StrategyConfig::one(shrink, disjoint));
            }
        }
        all.push(StrategyConfig {
            stratification: false,
            ..StrategyConfig::one(None, false)
        });
        all
    }

    pub fn validate(&self) -> Result<(), OptimizeError> {
        if self.algorithm == Algorithm::Linsu {
            if self.shrink.is_some() {
                return Err(OptimizeError::Config(
                    "core shrinking requires the core-guided algorithm".into(),
                ));
            }
            if self.disjoint_cores {
                return Err(OptimizeError::Config(
                    "disjoint cores analysis requires the core-guided algorithm".into(),
                ));
            }
        }
        Ok(())
    }

    /// Short name such as `one+Pshr+disj`.
    pub fn label(&self) -> String {
        let mut s = match self.algorithm {
            Algorithm::Linsu => "linsu".to_string(),
            Algorithm::One => "one".to_string(),
        };
        match self.shrink {
            Some(ShrinkVariant::Linear) => s.push_str("+Lshr"),
            Some(ShrinkVariant::Progression) => s.push_str("+Pshr"),
            None => {}
        }
        if self.disjoint_cores {
            s.push_str("+disj");
        }
        if self.algorithm == Algorithm::One && !self.stratification {
            s.push_str("+nostrat");
        }
        if self.compile_levels {
            s.push_str("+compiled");
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Optimum,
    Satisfiable,
    Incoherent,
    Unknown,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimum => "OPTIMUM FOUND",
            Status::Satisfiable => "SATISFIABLE",
            Status::Incoherent => "UNSATISFIABLE",
            Status::Unknown => "UNKNOWN",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptResult {
    pub status: Status,
    /// Best model found, restricted to the visible atoms.
    pub model: Option<Interpretation>,
    pub cost: Option<CostVector>,
    pub lb_vector: CostVector,
    /// Levels of the optimized weak constraints, greatest first.
    pub levels: Vec<u32>,
    /// Oracle that answered the last call.
    pub oracle: &'static str,
}

/// Why a run stopped before completing every level.
pub(crate) enum Halt {
    Stopped,
    Incoherent,
    Failed(OptimizeError),
}

impl<E: Into<OptimizeError>> From<E> for Halt {
    fn from(e: E) -> Self {
        Halt::Failed(e.into())
    }
}

/// State shared by both algorithms.
pub(crate) struct Runner<'a> {
    pub program: Program,
    pub weak: WeakConstraintSet,
    pub visible: BTreeSet<AtomId>,
    pub levels: Vec<u32>,
    pub cfg: &'a StrategyConfig,
    pub best: Option<Interpretation>,
    pub lbs: CostVector,
    oracle: Box<dyn Oracle>,
    oracle_kind: OracleKind,
    sink: &'a mut dyn EventSink,
    start: Instant,
    deadline: Option<Instant>,
    fresh_counter: u64,
    pinned: Vec<(u32, u64)>,
}

impl<'a> Runner<'a> {
    fn new(
        instance: &ParsedInstance,
        weak: WeakConstraintSet,
        cfg: &'a StrategyConfig,
        sink: &'a mut dyn EventSink,
    ) -> Self {
        let start = Instant::now();
        let levels = weak.levels();
        let mut lbs = CostVector::new();
        for &l in &levels {
            lbs.set(l, 0);
        }
        Runner {
            program: instance.program.clone(),
            weak,
            visible: instance.visible.clone(),
            levels,
            cfg,
            best: None,
            lbs,
            oracle: make_oracle(cfg.oracle, cfg.seed, cfg.core_mode, cfg.enum_cap),
            oracle_kind: cfg.oracle,
            sink,
            start,
            deadline: cfg.timeout.map(|t| start + t),
            fresh_counter: 0,
            pinned: Vec::new(),
        }
    }

    pub fn emit(&mut self, kind: EventKind) {
        let at = self.start.elapsed().as_secs_f64();
        self.sink.emit(&Event { at, kind });
    }

    fn global_limits(&self) -> Limits {
        Limits {
            count: None,
            deadline: self.deadline,
            interrupt: self.cfg.interrupt.clone(),
        }
    }

    fn probe_limits(&self) -> Limits {
        let mut limits = self.global_limits();
        match self.cfg.shrink_budget {
            Budget::Count(n) => limits.count = Some(n),
            Budget::Time(d) => {
                let end = Instant::now() + d;
                limits.deadline = Some(limits.deadline.map_or(end, |g| g.min(end)));
            }
        }
        limits
    }

    fn call(&mut self, assumptions: &[AtomId], limits: &Limits) -> Result<Verdict, OptimizeError> {
        match self.oracle.solve(&self.program, assumptions, limits) {
            Err(OracleError::Unsupported(msg)) if self.oracle_kind == OracleKind::Cdcl => {
                self.emit(EventKind::Note(format!(
                    "falling back to the enumeration oracle: {msg}"
                )));
                self.oracle =
                    Box::new(EnumOracle::new(self.cfg.core_mode).with_cap(self.cfg.enum_cap));
                self.oracle_kind = OracleKind::Enum;
                Ok(self.oracle.solve(&self.program, assumptions, limits)?)
            }
            other => Ok(other?),
        }
    }

    fn observe(&mut self, verdict: &Verdict) {
        if let Verdict::Coherent(m) = verdict {
            let cost = self.weak.cost_vector(m);
            debug_assert!(
                self.pinned.iter().all(|&(l, v)| cost.get(l) == v),
                "model escapes a completed level"
            );
            self.emit(EventKind::Model { cost });
        }
    }

    /// Unbudgeted call; running out of time or being interrupted stops the run.
    pub fn solve(&mut self, assumptions: &[AtomId]) -> Result<Verdict, Halt> {
        if self.expired() {
            return Err(Halt::Stopped);
        }
        let limits = self.global_limits();
        let v = self.call(assumptions, &limits)?;
        if v == Verdict::Unknown {
            return Err(Halt::Stopped);
        }
        self.observe(&v);
        Ok(v)
    }

    /// Call under the shrinking budget.
    pub fn probe(&mut self, assumptions: &[AtomId]) -> Result<Verdict, OptimizeError> {
        let limits = self.probe_limits();
        let v = self.call(assumptions, &limits)?;
        match &v {
            Verdict::Unknown => self.emit(EventKind::BudgetHit),
            _ => self.observe(&v),
        }
        Ok(v)
    }

    pub fn expired(&self) -> bool {
        self.global_limits().expired()
    }

    /// Makes `model ∩ V` the incumbent and reports its cost at `level`.
    pub fn improve(&mut self, level: u32, model: &Interpretation) -> u64 {
        let best = model.restrict(&self.visible);
        let cost = self.weak.cost_vector(&best);
        let ub = cost.get(level);
        self.best = Some(best);
        self.emit(EventKind::UbImproved { level, ub, cost });
        ub
    }

    pub fn raise_lb(&mut self, level: u32, lb: u64) {
        if lb > self.lbs.get(level) {
            self.lbs.set(level, lb);
            let lbs = self.lbs.clone();
            self.emit(EventKind::LbImproved { level, lb, lbs });
        }
    }

    pub fn level_done(&mut self, level: u32, value: u64) {
        self.raise_lb(level, value);
        self.pinned.push((level, value));
        self.emit(EventKind::LevelDone { level, value });
    }

    /// Registers a new auxiliary atom named `<prefix><k>`.
    pub fn fresh_atom(&mut self, prefix: &str) -> AtomId {
        loop {
            self.fresh_counter += 1;
            if let Some(id) = self
                .program
                .atoms
                .insert_fresh(&format!("{prefix}{}", self.fresh_counter))
            {
                return id;
            }
        }
    }

    pub fn add_rule(&mut self, rule: Rule) -> Result<(), ModelError> {
        self.program.add_rule(rule)
    }
}

/// Runs the configured strategy on `instance`, streaming events to `sink`.
pub fn optimize(
    instance: &ParsedInstance,
    cfg: &StrategyConfig,
    sink: &mut dyn EventSink,
) -> Result<OptResult, OptimizeError> {
    cfg.validate()?;
    let weak = if cfg.compile_levels {
        compile_levels(&instance.weak)?
    } else {
        instance.weak.clone()
    };
    let compiled = cfg.compile_levels && instance.weak.levels().len() > 1;
    let mut runner = Runner::new(instance, weak, cfg, sink);
    if compiled {
        runner.emit(EventKind::Note("levels compiled into weights".into()));
    }
    let outcome = if runner.weak.is_empty() {
        plain(&mut runner)
    } else {
        match cfg.algorithm {
            Algorithm::Linsu => linsu::run(&mut runner),
            Algorithm::One => one::run(&mut runner),
        }
    };
    let status = match outcome {
        Ok(()) => Status::Optimum,
        Err(Halt::Incoherent) => Status::Incoherent,
        Err(Halt::Stopped) if runner.best.is_some() => Status::Satisfiable,
        Err(Halt::Stopped) => Status::Unknown,
        Err(Halt::Failed(e)) => return Err(e),
    };
    let model = if status == Status::Incoherent {
        None
    } else {
        runner.best.clone()
    };
    let cost = model.as_ref().map(|m| runner.weak.cost_vector(m));
    let lb_vector = match (&cost, status) {
        (Some(c), Status::Optimum) => c.clone(),
        _ => runner.lbs.clone(),
    };
    runner.emit(EventKind::Final { status });
    Ok(OptResult {
        status,
        model,
        cost,
        lb_vector,
        levels: runner.levels.clone(),
        oracle: runner.oracle.name(),
    })
}

/// No weak constraints: any stable model is optimum.
fn plain(r: &mut Runner) -> Result<(), Halt> {
    match r.solve(&[])? {
        Verdict::Coherent(m) => {
            r.best = Some(m.restrict(&r.visible));
            Ok(())
        }
        _ => Err(Halt::Incoherent),
    }
}
