//! CDCL oracle for normal programs.
//!
//! The program is compiled to its completion: every rule body gets a
//! variable equivalent to the conjunction of its literals, each rule
//! contributes `body → head`, and each atom `atom → ∨ bodies`. Aggregates in
//! integrity constraints become linear constraints. Since completion alone
//! admits unsupported loops, every total assignment is checked against the
//! least model of its reduct, and unfounded sets are excluded by loop
//! nogoods.
//!
//! Rules arriving after the first call must only define atoms that are new
//! in the same batch; constraints may mention anything.

mod engine;

use std::collections::HashMap;

use crate::model::{
    Aggregate, AtomId, BodyElem, Interpretation, Literal, Negation, Program, Relation,
};

use super::{Limits, Oracle, OracleError, Verdict};
use engine::{Engine, Lit, Outcome, Var};

struct NormalRule {
    head: AtomId,
    /// Literal equivalent to the body; `None` for facts.
    body: Option<Lit>,
    positive: Vec<AtomId>,
}

pub struct CdclOracle {
    engine: Engine,
    atom_var: Vec<Var>,
    loaded_rules: usize,
    rules: Vec<NormalRule>,
    rules_by_head: Vec<Vec<usize>>,
    failure: Option<OracleError>,
}

fn unsupported(msg: String) -> OracleError {
    OracleError::Unsupported(msg)
}

impl CdclOracle {
    pub fn new(seed: u64) -> Self {
        CdclOracle {
            engine: Engine::new(seed),
            atom_var: Vec::new(),
            loaded_rules: 0,
            rules: Vec::new(),
            rules_by_head: Vec::new(),
            failure: None,
        }
    }

    /// Total conflicts over all calls.
    pub fn conflicts(&self) -> u64 {
        self.engine.conflicts
    }

    fn lit(&self, l: &Literal) -> Lit {
        let v = self.atom_var[l.atom.index()];
        match l.negation {
            Negation::Single => Lit::neg(v),
            Negation::None | Negation::Double => Lit::pos(v),
        }
    }

    fn fresh(&mut self) -> Var {
        self.engine.new_var()
    }

    fn sync(&mut self, program: &Program) -> Result<(), OracleError> {
        if let Some(e) = &self.failure {
            return Err(e.clone());
        }
        let result = self.load(program);
        if let Err(e) = &result {
            self.failure = Some(e.clone());
        }
        result
    }

    fn load(&mut self, program: &Program) -> Result<(), OracleError> {
        let first_new = self.atom_var.len();
        let n = program.atoms.len();
        for i in first_new..n {
            let v = self.fresh();
            self.atom_var.push(v);
            self.rules_by_head.push(Vec::new());
            if i == 0 {
                self.engine.add_clause(&[Lit::neg(v)]);
            }
        }
        let new_rules = &program.rules()[self.loaded_rules..];
        for r in new_rules {
            if r.is_constraint() {
                continue;
            }
            if r.head().len() > 1 {
                let names: Vec<&str> = r.head().iter().map(|a| program.atoms.name(*a)).collect();
                return Err(unsupported(format!(
                    "disjunctive rule with head `{}` is not supported by the cdcl oracle; use the enumeration oracle",
                    names.join(" | ")
                )));
            }
            let h = r.head()[0];
            if h.index() < first_new {
                return Err(unsupported(format!(
                    "rule for `{}` added after the atom was already loaded",
                    program.atoms.name(h)
                )));
            }
            if r.body.iter().any(|e| matches!(e, BodyElem::Agg(_))) {
                return Err(unsupported(format!(
                    "aggregate in the body of a rule for `{}`; aggregates are only supported in integrity constraints",
                    program.atoms.name(h)
                )));
            }
        }
        self.loaded_rules = program.rules().len();
        for r in new_rules {
            if r.is_constraint() {
                self.add_constraint(&r.body);
                continue;
            }
            let lits: Vec<Literal> = r
                .body
                .iter()
                .map(|e| match e {
                    BodyElem::Lit(l) => *l,
                    BodyElem::Agg(_) => unreachable!("rejected above"),
                })
                .collect();
            let body = match lits.len() {
                0 => None,
                1 => Some(self.lit(&lits[0])),
                _ => {
                    let b = Lit::pos(self.fresh());
                    let solver: Vec<Lit> = lits.iter().map(|l| self.lit(l)).collect();
                    for &l in &solver {
                        self.engine.add_clause(&[!b, l]);
                    }
                    let mut back: Vec<Lit> = solver.iter().map(|&l| !l).collect();
                    back.push(b);
                    self.engine.add_clause(&back);
                    Some(b)
                }
            };
            let h = r.head()[0];
            let head = Lit::pos(self.atom_var[h.index()]);
            match body {
                None => {
                    self.engine.add_clause(&[head]);
                }
                Some(b) => {
                    self.engine.add_clause(&[!b, head]);
                }
            }
            let mut positive: Vec<AtomId> = lits
                .iter()
                .filter(|l| l.negation == Negation::None && !l.atom.is_false())
                .map(|l| l.atom)
                .collect();
            positive.sort();
            positive.dedup();
            self.rules_by_head[h.index()].push(self.rules.len());
            self.rules.push(NormalRule {
                head: h,
                body,
                positive,
            });
        }
        for i in first_new.max(1)..n {
            let head = Lit::pos(self.atom_var[i]);
            let bodies: Vec<Option<Lit>> = self.rules_by_head[i]
                .iter()
                .map(|&ri| self.rules[ri].body)
                .collect();
            if bodies.iter().any(|b| b.is_none()) {
                continue;
            }
            let mut clause = vec![!head];
            clause.extend(bodies.into_iter().flatten());
            self.engine.add_clause(&clause);
        }
        Ok(())
    }

    /// `Σ w·l ≥ bound`, or `guard → Σ w·l ≥ bound` when guarded.
    fn add_geq(&mut self, guard: Option<Lit>, terms: Vec<(u64, Lit)>, bound: i64) {
        let mut by_var: HashMap<Var, (u64, u64)> = HashMap::new();
        let mut order = Vec::new();
        for (w, l) in terms {
            let e = by_var.entry(l.var()).or_insert_with(|| {
                order.push(l.var());
                (0, 0)
            });
            if l.is_negative() {
                e.1 += w;
            } else {
                e.0 += w;
            }
        }
        let mut bound = bound;
        let mut normalized = Vec::new();
        for v in order {
            let (p, n) = by_var[&v];
            let common = p.min(n);
            bound -= common as i64;
            if p > n {
                normalized.push((Lit::pos(v), p - n));
            } else if n > p {
                normalized.push((Lit::neg(v), n - p));
            }
        }
        if bound <= 0 {
            return;
        }
        let bound = bound as u64;
        let total: u64 = normalized.iter().map(|(_, w)| *w).sum();
        if total < bound {
            match guard {
                Some(g) => self.engine.add_clause(&[!g]),
                None => self.engine.add_clause(&[]),
            };
            return;
        }
        if let Some(g) = guard {
            normalized.push((!g, bound));
        }
        if normalized.iter().all(|(_, w)| *w >= bound) {
            let clause: Vec<Lit> = normalized.iter().map(|(l, _)| *l).collect();
            self.engine.add_clause(&clause);
        } else {
            self.engine.add_linear(&normalized, bound);
        }
    }

    /// `guard → (aggregate does not hold)`.
    fn add_aggregate_false(&mut self, guard: Lit, agg: &Aggregate) {
        let terms: Vec<(u64, Lit)> = agg
            .elements
            .iter()
            .map(|(w, l)| (*w, self.lit(l)))
            .collect();
        let total: u64 = terms.iter().map(|(w, _)| *w).sum();
        let flipped = |t: &[(u64, Lit)]| t.iter().map(|&(w, l)| (w, !l)).collect::<Vec<_>>();
        let b = agg.bound as i64;
        let total = total as i64;
        match agg.relation.negate() {
            Relation::Ge => self.add_geq(Some(guard), terms, b),
            Relation::Gt => self.add_geq(Some(guard), terms, b + 1),
            Relation::Le => self.add_geq(Some(guard), flipped(&terms), total - b),
            Relation::Lt => self.add_geq(Some(guard), flipped(&terms), total - b + 1),
            Relation::Eq => {
                self.add_geq(Some(guard), terms.clone(), b);
                self.add_geq(Some(guard), flipped(&terms), total - b);
            }
            Relation::Ne => {
                let above = Lit::pos(self.fresh());
                let below = Lit::pos(self.fresh());
                self.add_geq(Some(above), terms.clone(), b + 1);
                self.add_geq(Some(below), flipped(&terms), total - b + 1);
                self.engine.add_clause(&[!guard, above, below]);
            }
        }
    }

    fn add_constraint(&mut self, body: &[BodyElem]) {
        let mut clause = Vec::new();
        let mut aggregates = Vec::new();
        for e in body {
            match e {
                BodyElem::Lit(l) => clause.push(!self.lit(l)),
                BodyElem::Agg(a) => aggregates.push(a),
            }
        }
        for a in aggregates {
            let g = Lit::pos(self.fresh());
            self.add_aggregate_false(g, a);
            clause.push(g);
        }
        self.engine.add_clause(&clause);
    }

    /// Loop nogood for the first unfounded atom, if the assignment has any.
    fn unfounded(&self, engine: &Engine) -> Option<Vec<Lit>> {
        let n = self.atom_var.len();
        let truth = |a: usize| engine.value(Lit::pos(self.atom_var[a])) == Some(true);
        let mut derived = vec![false; n];
        let mut missing: Vec<usize> = Vec::with_capacity(self.rules.len());
        let mut watching: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut queue = Vec::new();
        for (ri, r) in self.rules.iter().enumerate() {
            let active = r.body.is_none_or(|b| engine.value(b) == Some(true));
            missing.push(if active { r.positive.len() } else { usize::MAX });
            if !active {
                continue;
            }
            for p in &r.positive {
                watching[p.index()].push(ri);
            }
            if r.positive.is_empty() {
                queue.push(ri);
            }
        }
        while let Some(ri) = queue.pop() {
            let h = self.rules[ri].head.index();
            if derived[h] {
                continue;
            }
            derived[h] = true;
            for &rj in &watching[h] {
                missing[rj] -= 1;
                if missing[rj] == 0 {
                    queue.push(rj);
                }
            }
        }
        let unfounded: Vec<usize> = (1..n).filter(|&a| truth(a) && !derived[a]).collect();
        let &first = unfounded.first()?;
        let in_set = |a: AtomId| unfounded.binary_search(&a.index()).is_ok();
        let mut nogood = vec![Lit::neg(self.atom_var[first])];
        for &a in &unfounded {
            for &ri in &self.rules_by_head[a] {
                let r = &self.rules[ri];
                if r.positive.iter().any(|p| in_set(*p)) {
                    continue;
                }
                if let Some(b) = r.body {
                    if !nogood.contains(&b) {
                        nogood.push(b);
                    }
                }
            }
        }
        Some(nogood)
    }
}

impl Oracle for CdclOracle {
    fn solve(
        &mut self,
        program: &Program,
        assumptions: &[AtomId],
        limits: &Limits,
    ) -> Result<Verdict, OracleError> {
        self.sync(program)?;
        let mut order: Vec<AtomId> = Vec::with_capacity(assumptions.len());
        for &a in assumptions {
            if !program.atoms.contains(a) {
                return Err(crate::model::ModelError::UnknownAtom(a.0).into());
            }
            if !order.contains(&a) {
                order.push(a);
            }
        }
        let lits: Vec<Lit> = order
            .iter()
            .map(|a| Lit::pos(self.atom_var[a.index()]))
            .collect();
        let mut engine = std::mem::replace(&mut self.engine, Engine::new(0));
        let outcome = engine.solve(&lits, limits, &mut |e| self.unfounded(e));
        self.engine = engine;
        Ok(match outcome {
            Outcome::Unknown => Verdict::Unknown,
            Outcome::Sat(values) => Verdict::Coherent(
                (1..program.atoms.len())
                    .filter(|&i| values[self.atom_var[i] as usize])
                    .map(|i| AtomId(i as u32))
                    .collect::<Interpretation>(),
            ),
            Outcome::Unsat(core) => Verdict::Incoherent(
                order
                    .iter()
                    .zip(&lits)
                    .filter(|(_, l)| core.contains(l))
                    .map(|(a, _)| *a)
                    .collect(),
            ),
        })
    }

    fn name(&self) -> &'static str {
        "cdcl"
    }
}
