//! Core-guided search: stratified assumptions over soft atoms, core
//! relaxation with cardinality constraints, hardening, and the optional
//! disjoint-cores phase and core shrinking.

use crate::model::{AtomId, Literal, Rule};
use crate::oracle::Verdict;
use crate::relax::{relax_core, relax_level, SoftRegistry};
use crate::report::EventKind;

use super::shrink::shrink_core;
use super::{Halt, Runner};

/// Bounds of the level being optimized; `ub == None` is infinity.
struct Level {
    level: u32,
    lb: u64,
    ub: Option<u64>,
    stratum: u64,
}

pub(super) fn run(r: &mut Runner) -> Result<(), Halt> {
    let mut reg = SoftRegistry::new();
    for level in r.levels.clone() {
        relax_level(&mut r.program, &r.weak, level, &mut reg)?;
        let mut st = Level {
            level,
            lb: 0,
            ub: None,
            stratum: u64::MAX,
        };
        if let Some(best) = &r.best {
            st.ub = Some(r.weak.cost(level, best));
            harden(r, &mut reg, &st)?;
        }
        loop {
            if let Some(s) = next_stratum(&reg, st.stratum, r.cfg.stratification) {
                st.stratum = s;
                r.emit(EventKind::Stratum { level, stratum: s });
            }
            if r.cfg.disjoint_cores {
                disjoint_phase(r, &mut reg, &mut st)?;
            }
            loop {
                let assumptions = at_stratum(&reg, st.stratum, false);
                match r.solve(&assumptions)? {
                    Verdict::Incoherent(core) => analyze(r, &mut reg, &mut st, core)?,
                    Verdict::Coherent(model) => {
                        accept(r, &mut reg, &mut st, &model)?;
                        break;
                    }
                    Verdict::Unknown => unreachable!("solve maps budget exhaustion to a halt"),
                }
            }
            let below = reg.weighted().any(|(_, w)| w < st.stratum);
            if !below {
                break;
            }
        }
        let leftover: Vec<AtomId> = reg.weighted().map(|(p, _)| p).collect();
        for p in leftover {
            r.add_rule(Rule::constraint(vec![Literal::neg(p).into()]))?;
            reg.set_weight(p, 0);
        }
        let value = st.ub.expect("a model was found for the level");
        debug_assert_eq!(st.lb, value);
        r.level_done(level, value);
    }
    Ok(())
}

/// Largest positive weight below `current`, or the smallest positive weight
/// when stratification is off.
fn next_stratum(reg: &SoftRegistry, current: u64, stratification: bool) -> Option<u64> {
    let weights = reg.weighted().map(|(_, w)| w);
    if stratification {
        weights.filter(|&w| w < current).max()
    } else {
        weights.min()
    }
}

/// Soft atoms with `w(p) >= stratum`, by atom id.
fn at_stratum(reg: &SoftRegistry, stratum: u64, original_only: bool) -> Vec<AtomId> {
    reg.weighted()
        .filter(|&(p, w)| w >= stratum && (!original_only || reg.is_original(p)))
        .map(|(p, _)| p)
        .collect()
}

/// Forces every atom whose falsity would exceed the upper bound.
fn harden(r: &mut Runner, reg: &mut SoftRegistry, st: &Level) -> Result<(), Halt> {
    let Some(ub) = st.ub else {
        return Ok(());
    };
    let forced: Vec<AtomId> = reg
        .weighted()
        .filter(|&(_, w)| st.lb.saturating_add(w) > ub)
        .map(|(p, _)| p)
        .collect();
    for p in forced {
        r.add_rule(Rule::constraint(vec![Literal::neg(p).into()]))?;
        reg.set_weight(p, 0);
    }
    Ok(())
}

fn accept(
    r: &mut Runner,
    reg: &mut SoftRegistry,
    st: &mut Level,
    model: &crate::model::Interpretation,
) -> Result<(), Halt> {
    let cost = r.weak.cost(st.level, model);
    if st.ub.is_none_or(|ub| cost < ub) {
        st.ub = Some(r.improve(st.level, model));
        debug_assert!(st.lb <= cost);
        harden(r, reg, st)?;
    }
    Ok(())
}

/// Shrinks (if configured) and relaxes a core found at the current stratum.
fn analyze(
    r: &mut Runner,
    reg: &mut SoftRegistry,
    st: &mut Level,
    core: Vec<AtomId>,
) -> Result<(), Halt> {
    r.emit(EventKind::CoreFound {
        level: st.level,
        size: core.len(),
    });
    if core.is_empty() {
        return Err(Halt::Incoherent);
    }
    let core = match r.cfg.shrink {
        None => core,
        Some(variant) => {
            let before = core.len();
            let level = st.level;
            let mut ub = st.ub;
            let out = shrink_core(core, variant, |prefix| {
                let v = r.probe(prefix)?;
                if let Verdict::Coherent(m) = &v {
                    let cost = r.weak.cost(level, m);
                    if ub.is_none_or(|u| cost < u) {
                        ub = Some(r.improve(level, m));
                    }
                }
                Ok::<_, Halt>(v)
            })?;
            st.ub = ub;
            r.emit(EventKind::CoreShrunk {
                before,
                after: out.core.len(),
                calls: out.calls,
            });
            if r.expired() {
                return Err(Halt::Stopped);
            }
            if out.core.is_empty() {
                return Err(Halt::Incoherent);
            }
            out.core
        }
    };
    let relaxed = relax_core(&mut r.program, &core, st.stratum, reg)?;
    st.lb += relaxed.lb_increment;
    debug_assert!(
        st.ub.is_none_or(|ub| st.lb <= ub),
        "lower bound passed upper bound"
    );
    r.raise_lb(st.level, st.lb);
    harden(r, reg, st)?;
    Ok(())
}

/// Relaxes cores over the input soft atoms only, until the first model.
fn disjoint_phase(r: &mut Runner, reg: &mut SoftRegistry, st: &mut Level) -> Result<(), Halt> {
    loop {
        let assumptions = at_stratum(reg, st.stratum, true);
        match r.solve(&assumptions)? {
            Verdict::Incoherent(core) => analyze(r, reg, st, core)?,
            Verdict::Coherent(model) => return accept(r, reg, st, &model),
            Verdict::Unknown => unreachable!("solve maps budget exhaustion to a halt"),
        }
    }
}
