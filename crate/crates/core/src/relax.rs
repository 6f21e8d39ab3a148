//! Relaxation of weak constraints into soft atoms, the weight function used
//! by core-guided search, and compilation of levels into weights.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{
    Aggregate, AtomId, BodyElem, Literal, ModelError, Program, Relation, Rule, WeakConstraint,
    WeakConstraintSet,
};

pub const SOFT_PREFIX: &str = "@soft_";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelaxError {
    #[error("level {0} has no weak constraints")]
    EmptyLevel(u32),
    #[error("cannot relax an empty core")]
    EmptyCore,
    #[error("core atom {atom:?} has weight {weight}, below the stratum {stratum}")]
    InsufficientWeight {
        atom: AtomId,
        weight: u64,
        stratum: u64,
    },
    #[error("weight arithmetic overflows 64 bits")]
    Overflow,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Where a soft atom came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SoftOrigin {
    /// Index of the input weak constraint.
    Weak(usize),
    /// Sequence number of the relaxed core.
    Core(usize),
}

/// Soft atoms of one run and the weight function over atoms.
#[derive(Clone, Debug, Default)]
pub struct SoftRegistry {
    entries: BTreeMap<AtomId, SoftOrigin>,
    weights: BTreeMap<AtomId, u64>,
    original: BTreeSet<AtomId>,
    counter: u64,
    cores: usize,
}

impl SoftRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// `w(p)`, zero for atoms never weighted.
    pub fn weight(&self, p: AtomId) -> u64 {
        self.weights.get(&p).copied().unwrap_or(0)
    }

    pub fn set_weight(&mut self, p: AtomId, w: u64) {
        if w == 0 {
            self.weights.remove(&p);
        } else {
            self.weights.insert(p, w);
        }
    }

    /// Atoms with positive weight, by id.
    pub fn weighted(&self) -> impl Iterator<Item = (AtomId, u64)> + '_ {
        self.weights.iter().map(|(&p, &w)| (p, w))
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.values().sum()
    }

    pub fn is_soft(&self, p: AtomId) -> bool {
        self.entries.contains_key(&p)
    }

    pub fn is_original(&self, p: AtomId) -> bool {
        self.original.contains(&p)
    }

    pub fn origin(&self, p: AtomId) -> Option<SoftOrigin> {
        self.entries.get(&p).copied()
    }

    pub fn soft_atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.entries.keys().copied()
    }

    /// Number of cores relaxed so far.
    pub fn cores_relaxed(&self) -> usize {
        self.cores
    }

    fn fresh(&mut self, program: &mut Program, origin: SoftOrigin) -> AtomId {
        loop {
            self.counter += 1;
            let name = format!("{SOFT_PREFIX}{}", self.counter);
            if let Some(id) = program.atoms.insert_fresh(&name) {
                self.entries.insert(id, origin);
                if let SoftOrigin::Weak(_) = origin {
                    self.original.insert(id);
                }
                return id;
            }
        }
    }
}

/// Rules added by a relaxation step and the soft atoms it introduced.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RelaxationOutput {
    pub added_rules: Vec<Rule>,
    pub soft_atoms: Vec<AtomId>,
}

/// A relaxed core and the lower-bound increase it yields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreRelaxation {
    pub output: RelaxationOutput,
    pub lb_increment: u64,
}

fn add_all(program: &mut Program, rules: &[Rule]) -> Result<(), ModelError> {
    for r in rules {
        program.add_rule(r.clone())?;
    }
    Ok(())
}

/// Replaces every weak constraint of `level` by `⊥ ← B(r), s_r` plus a
/// choice rule for `s_r`, and sets `w(s_r)` to the constraint's weight.
pub fn relax_level(
    program: &mut Program,
    weak: &WeakConstraintSet,
    level: u32,
    registry: &mut SoftRegistry,
) -> Result<RelaxationOutput, RelaxError> {
    let items: Vec<(usize, &WeakConstraint)> = weak.at_level(level).collect();
    if items.is_empty() {
        return Err(RelaxError::EmptyLevel(level));
    }
    let mut out = RelaxationOutput::default();
    for (idx, wc) in items {
        let s = registry.fresh(program, SoftOrigin::Weak(idx));
        let mut body = wc.body.clone();
        body.push(Literal::pos(s).into());
        out.added_rules.push(Rule::constraint(body));
        out.added_rules.push(Rule::choice(s));
        registry.set_weight(s, wc.weight);
        out.soft_atoms.push(s);
    }
    add_all(program, &out.added_rules)?;
    Ok(out)
}

/// Relaxes core `p_0..p_n` at `stratum`: lowers each `w(p_i)` by the
/// stratum, introduces `s_1..s_n` chained by symmetry breakers and adds
/// `⊥ ← COUNT[p_0..p_n, not s_1..not s_n] < n`.
pub fn relax_core(
    program: &mut Program,
    core: &[AtomId],
    stratum: u64,
    registry: &mut SoftRegistry,
) -> Result<CoreRelaxation, RelaxError> {
    if core.is_empty() {
        return Err(RelaxError::EmptyCore);
    }
    for &p in core {
        let w = registry.weight(p);
        if w < stratum {
            return Err(RelaxError::InsufficientWeight {
                atom: p,
                weight: w,
                stratum,
            });
        }
    }
    for &p in core {
        let w = registry.weight(p);
        registry.set_weight(p, w - stratum);
    }
    registry.cores += 1;
    let id = registry.cores;
    let n = core.len() - 1;
    let mut out = RelaxationOutput::default();
    for _ in 0..n {
        let s = registry.fresh(program, SoftOrigin::Core(id));
        registry.set_weight(s, stratum);
        out.added_rules.push(Rule::choice(s));
        out.soft_atoms.push(s);
    }
    for pair in out.soft_atoms.windows(2) {
        out.added_rules.push(Rule::constraint(vec![
            Literal::pos(pair[0]).into(),
            Literal::neg(pair[1]).into(),
        ]));
    }
    let lits: Vec<Literal> = core
        .iter()
        .map(|&p| Literal::pos(p))
        .chain(out.soft_atoms.iter().map(|&s| Literal::neg(s)))
        .collect();
    let count = Aggregate::count(lits, Relation::Lt, n as u64);
    out.added_rules
        .push(Rule::constraint(vec![BodyElem::Agg(count)]));
    add_all(program, &out.added_rules)?;
    Ok(CoreRelaxation {
        output: out,
        lb_increment: stratum,
    })
}

/// Folds all levels into level 1, scaling each higher level above the total
/// weight of everything below it. The optimum models are preserved.
pub fn compile_levels(weak: &WeakConstraintSet) -> Result<WeakConstraintSet, RelaxError> {
    let mut items: Vec<WeakConstraint> = weak.items().to_vec();
    while let Some(next) = items.iter().map(|w| w.level).filter(|&l| l >= 2).min() {
        let below = items
            .iter()
            .filter(|w| w.level == 1)
            .try_fold(0u64, |acc, w| acc.checked_add(w.weight))
            .ok_or(RelaxError::Overflow)?;
        let s = below.checked_add(1).ok_or(RelaxError::Overflow)?;
        for w in items.iter_mut().filter(|w| w.level == next) {
            w.weight = w.weight.checked_mul(s).ok_or(RelaxError::Overflow)?;
            w.level = 1;
        }
    }
    Ok(items.into_iter().collect())
}
