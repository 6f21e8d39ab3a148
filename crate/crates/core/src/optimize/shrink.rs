//! Budgeted shrinking of unsatisfiable cores by probing growing prefixes.

use num_rational::Ratio;

use crate::model::AtomId;
use crate::oracle::Verdict;

/// How the probed prefix grows between calls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShrinkVariant {
    /// The progression step grows by one.
    Linear,
    /// The progression step doubles.
    Progression,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShrinkOutcome {
    pub core: Vec<AtomId>,
    /// Budgeted oracle calls made.
    pub calls: usize,
    pub budget_hits: usize,
    /// Size of each probed prefix, in call order.
    pub probes: Vec<usize>,
}

/// Shrinks `core` by asking `probe` about prefixes of it.
///
/// `probe` receives a prefix of the current core and answers under some
/// budget. An incoherent answer replaces the core; coherent and unknown
/// answers only advance the progression. Any model handling is up to
/// `probe`.
pub fn shrink_core<E>(
    core: Vec<AtomId>,
    variant: ShrinkVariant,
    mut probe: impl FnMut(&[AtomId]) -> Result<Verdict, E>,
) -> Result<ShrinkOutcome, E> {
    let mut out = ShrinkOutcome {
        core,
        calls: 0,
        budget_hits: 0,
        probes: Vec::new(),
    };
    if out.core.is_empty() {
        return Ok(out);
    }
    let one = Ratio::from_integer(1i64);
    let half = Ratio::new(1i64, 2);
    let mut m = Ratio::from_integer(-1i64);
    let mut pr = one;
    loop {
        let last = (m + pr).floor().to_integer().max(0) as usize;
        let end = (last + 1).min(out.core.len());
        out.calls += 1;
        out.probes.push(end);
        match probe(&out.core[..end])? {
            Verdict::Incoherent(smaller) => out.core = smaller,
            Verdict::Unknown => out.budget_hits += 1,
            Verdict::Coherent(_) => {}
        }
        let top = Ratio::from_integer(out.core.len() as i64 - 1);
        if m + pr * 2 >= top {
            m += pr;
            pr = half;
        }
        if m + pr * 2 < top {
            pr = match variant {
                ShrinkVariant::Progression => pr * 2,
                ShrinkVariant::Linear => pr + one,
            };
        } else {
            break;
        }
    }
    Ok(out)
}
