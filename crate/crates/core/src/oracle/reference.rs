//! Exact oracle by exhaustive search.
//!
//! Atoms are decided in id order, false before true, with assumptions fixed
//! true. Branches die as soon as a rule is definitely violated or a true
//! atom has lost every possible support; complete assignments are checked
//! with [`is_stable`]. Works for disjunctive programs and is meant for small
//! inputs and as ground truth for everything else.

use std::collections::BTreeSet;

use crate::model::{
    body_status, is_stable, rule_status, AtomId, CostVector, Interpretation, PartialAssignment,
    Program, Valuation, WeakConstraintSet,
};

use super::{Limits, Oracle, OracleError, Verdict};

/// Default limit on registered atoms.
pub const DEFAULT_CAP: usize = 22;

/// How unsatisfiable cores are reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoreMode {
    /// The whole assumption set.
    Raw,
    /// Deletion-based minimization to a set-minimal core.
    Minimal,
}

enum End {
    Exhausted,
    Stopped,
    OutOfBudget,
}

struct Search<'a> {
    program: &'a Program,
    by_head: Vec<Vec<usize>>,
    order: Vec<AtomId>,
    assign: PartialAssignment,
    steps: &'a mut u64,
    limits: &'a Limits,
}

impl Search<'_> {
    fn new<'a>(
        program: &'a Program,
        assumptions: &[AtomId],
        steps: &'a mut u64,
        limits: &'a Limits,
    ) -> Search<'a> {
        let n = program.atoms.len();
        let mut by_head = vec![Vec::new(); n];
        for (i, r) in program.rules().iter().enumerate() {
            for h in r.head() {
                if !h.is_false() {
                    by_head[h.index()].push(i);
                }
            }
        }
        let mut assign = PartialAssignment(vec![None; n]);
        assign.0[0] = Some(false);
        for a in assumptions {
            assign.0[a.index()] = Some(true);
        }
        let order = (1..n as u32)
            .map(AtomId)
            .filter(|a| assign.0[a.index()].is_none())
            .collect();
        Search {
            program,
            by_head,
            order,
            assign,
            steps,
            limits,
        }
    }

    fn violated(&self) -> bool {
        self.program
            .rules()
            .iter()
            .any(|r| rule_status(&self.assign, r) == Some(false))
    }

    /// Some true atom has no rule left that could support it.
    fn unsupported(&self) -> bool {
        (1..self.assign.0.len()).any(|i| {
            self.assign.0[i] == Some(true)
                && !self.by_head[i].iter().any(|&ri| {
                    let r = &self.program.rules()[ri];
                    body_status(&self.assign, &r.body) != Some(false)
                        && r.head()
                            .iter()
                            .all(|&q| q.index() == i || self.assign.value(q) != Some(true))
                })
        })
    }

    fn current(&self) -> Interpretation {
        self.assign
            .0
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == Some(true))
            .map(|(i, _)| AtomId(i as u32))
            .collect()
    }

    fn run(
        &mut self,
        depth: usize,
        on_model: &mut dyn FnMut(Interpretation) -> bool,
    ) -> Result<End, OracleError> {
        if self.limits.count.is_some_and(|c| *self.steps >= c) {
            return Ok(End::OutOfBudget);
        }
        *self.steps += 1;
        if self.steps.is_multiple_of(256) && self.limits.expired() {
            return Ok(End::OutOfBudget);
        }
        if self.violated() || self.unsupported() {
            return Ok(End::Exhausted);
        }
        if depth == self.order.len() {
            let candidate = self.current();
            if is_stable(self.program, &candidate)? && !on_model(candidate) {
                return Ok(End::Stopped);
            }
            return Ok(End::Exhausted);
        }
        let atom = self.order[depth];
        for value in [false, true] {
            self.assign.0[atom.index()] = Some(value);
            match self.run(depth + 1, on_model)? {
                End::Exhausted => {}
                other => {
                    self.assign.0[atom.index()] = None;
                    return Ok(other);
                }
            }
        }
        self.assign.0[atom.index()] = None;
        Ok(End::Exhausted)
    }
}

fn check(program: &Program, assumptions: &[AtomId], cap: usize) -> Result<(), OracleError> {
    let atoms = program.atoms.len() - 1;
    if atoms > cap {
        return Err(OracleError::Capacity { atoms, cap });
    }
    if let Some(a) = assumptions.iter().find(|a| !program.atoms.contains(**a)) {
        return Err(crate::model::ModelError::UnknownAtom(a.0).into());
    }
    Ok(())
}

/// Finds one stable model containing `assumptions`; `Ok(None)` on budget exhaustion.
fn find_model(
    program: &Program,
    assumptions: &[AtomId],
    steps: &mut u64,
    limits: &Limits,
) -> Result<Option<Option<Interpretation>>, OracleError> {
    if assumptions.iter().any(|a| a.is_false()) {
        return Ok(Some(None));
    }
    let mut found = None;
    let mut search = Search::new(program, assumptions, steps, limits);
    let end = search.run(0, &mut |m| {
        found = Some(m);
        false
    })?;
    Ok(match end {
        End::OutOfBudget => None,
        _ => Some(found),
    })
}

/// Enumeration oracle; stateless apart from its configuration.
#[derive(Clone, Debug)]
pub struct EnumOracle {
    pub core_mode: CoreMode,
    pub cap: usize,
    /// Search nodes visited by the most recent call.
    pub last_steps: u64,
}

impl EnumOracle {
    pub fn new(core_mode: CoreMode) -> Self {
        EnumOracle {
            core_mode,
            cap: DEFAULT_CAP,
            last_steps: 0,
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }
}

impl Oracle for EnumOracle {
    fn solve(
        &mut self,
        program: &Program,
        assumptions: &[AtomId],
        limits: &Limits,
    ) -> Result<Verdict, OracleError> {
        check(program, assumptions, self.cap)?;
        let mut steps = 0;
        let verdict = match find_model(program, assumptions, &mut steps, limits)? {
            None => Verdict::Unknown,
            Some(Some(model)) => Verdict::Coherent(model),
            Some(None) => match self.core_mode {
                CoreMode::Raw => Verdict::Incoherent(assumptions.to_vec()),
                CoreMode::Minimal => {
                    let mut core = assumptions.to_vec();
                    for p in assumptions {
                        let candidate: Vec<AtomId> =
                            core.iter().copied().filter(|q| q != p).collect();
                        match find_model(program, &candidate, &mut steps, limits)? {
                            Some(None) => core = candidate,
                            Some(Some(_)) => {}
                            None => break,
                        }
                    }
                    Verdict::Incoherent(core)
                }
            },
        };
        self.last_steps = steps;
        Ok(verdict)
    }

    fn name(&self) -> &'static str {
        "enum"
    }
}

/// All stable models, in search order.
pub fn enumerate_stable(program: &Program, cap: usize) -> Result<Vec<Interpretation>, OracleError> {
    check(program, &[], cap)?;
    let mut steps = 0;
    let limits = Limits::unlimited();
    let mut all = Vec::new();
    Search::new(program, &[], &mut steps, &limits).run(0, &mut |m| {
        all.push(m);
        true
    })?;
    Ok(all)
}

fn order_key(cv: &CostVector, levels: &[u32]) -> Vec<u64> {
    cv.values_for(levels)
}

/// Every optimum stable model and the optimum cost; `None` when incoherent.
pub fn optimum_set(
    program: &Program,
    weak: &WeakConstraintSet,
    cap: usize,
) -> Result<Option<(CostVector, BTreeSet<Interpretation>)>, OracleError> {
    let levels = weak.levels();
    let mut best: Option<(Vec<u64>, CostVector, BTreeSet<Interpretation>)> = None;
    for m in enumerate_stable(program, cap)? {
        let cv = weak.cost_vector(&m);
        let key = order_key(&cv, &levels);
        match &mut best {
            Some((k, _, set)) if *k == key => {
                set.insert(m);
            }
            Some((k, _, _)) if *k < key => {}
            _ => best = Some((key, cv, BTreeSet::from([m]))),
        }
    }
    Ok(best.map(|(_, cv, set)| (cv, set)))
}

/// One optimum stable model with its cost vector; `None` when incoherent.
pub fn optimum_oracle(
    program: &Program,
    weak: &WeakConstraintSet,
    cap: usize,
) -> Result<Option<(CostVector, Interpretation)>, OracleError> {
    Ok(optimum_set(program, weak, cap)?
        .map(|(cv, set)| (cv, set.into_iter().next().expect("nonempty"))))
}
