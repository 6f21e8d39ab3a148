//! Assumption-based stable model search.
//!
//! An oracle answers "is there a stable model containing these atoms?" for a
//! program that only ever grows. Both implementations ingest new rules lazily
//! at the next call, so callers simply append to their [`Program`] and ask.

pub mod cdcl;
pub mod reference;

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use crate::model::{AtomId, Interpretation, ModelError, Program};

pub use cdcl::CdclOracle;
pub use reference::{enumerate_stable, optimum_oracle, optimum_set, CoreMode, EnumOracle};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{0}")]
    Unsupported(String),
    #[error("search space of {atoms} atoms exceeds the enumeration cap of {cap}")]
    Capacity { atoms: usize, cap: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// A stable model containing every assumption.
    Coherent(Interpretation),
    /// Assumptions that cannot all hold, in the order they were given.
    Incoherent(Vec<AtomId>),
    /// The budget ran out first.
    Unknown,
}

impl Verdict {
    pub fn is_coherent(&self) -> bool {
        matches!(self, Verdict::Coherent(_))
    }

    pub fn is_incoherent(&self) -> bool {
        matches!(self, Verdict::Incoherent(_))
    }
}

/// Resource limits for a single call.
#[derive(Clone, Debug, Default)]
pub struct Limits {
    /// Oracle-specific work units: conflicts for CDCL, search nodes for
    /// enumeration.
    pub count: Option<u64>,
    pub deadline: Option<Instant>,
    pub interrupt: Option<Arc<AtomicBool>>,
}

impl Limits {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn count(n: u64) -> Self {
        Limits {
            count: Some(n),
            ..Self::default()
        }
    }

    /// True when the deadline passed or an interrupt was raised.
    pub fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
            || self
                .interrupt
                .as_ref()
                .is_some_and(|f| f.load(Ordering::Relaxed))
    }
}

pub trait Oracle: Send {
    /// Searches for a stable model of `program` containing `assumptions`.
    fn solve(
        &mut self,
        program: &Program,
        assumptions: &[AtomId],
        limits: &Limits,
    ) -> Result<Verdict, OracleError>;

    fn name(&self) -> &'static str;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleKind {
    Cdcl,
    Enum,
}

/// Builds an oracle of the requested kind.
pub fn make_oracle(
    kind: OracleKind,
    seed: u64,
    core_mode: CoreMode,
    cap: usize,
) -> Box<dyn Oracle> {
    match kind {
        OracleKind::Cdcl => Box::new(CdclOracle::new(seed)),
        OracleKind::Enum => Box::new(EnumOracle::new(core_mode).with_cap(cap)),
    }
}
