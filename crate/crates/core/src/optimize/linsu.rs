//! Model-guided linear search: each model tightens the bound on the relaxed
//! weight sum until the oracle refutes it.
//!
//! Bound constraints are guarded by fresh activation atoms so a refuted
//! bound can be switched off before the level is pinned to its optimum.

use crate::model::{Aggregate, BodyElem, Literal, Relation, Rule};
use crate::oracle::Verdict;
use crate::relax::{relax_level, SoftRegistry};

use super::{Halt, Runner};

const ACTIVATION_PREFIX: &str = "@act_";

pub(super) fn run(r: &mut Runner) -> Result<(), Halt> {
    let mut reg = SoftRegistry::new();
    for level in r.levels.clone() {
        let relaxed = relax_level(&mut r.program, &r.weak, level, &mut reg)?;
        let elements: Vec<(u64, Literal)> = relaxed
            .soft_atoms
            .iter()
            .map(|&s| (reg.weight(s), Literal::neg(s)))
            .collect();
        let total: u64 = elements.iter().map(|(w, _)| w).sum();
        let mut ub = match &r.best {
            Some(best) => r.weak.cost(level, best),
            None => total + 1,
        };
        loop {
            let act = r.fresh_atom(ACTIVATION_PREFIX);
            r.add_rule(Rule::choice(act))?;
            let bound = Aggregate::sum(elements.clone(), Relation::Ge, ub);
            r.add_rule(Rule::constraint(vec![
                BodyElem::Agg(bound),
                Literal::pos(act).into(),
            ]))?;
            match r.solve(&[act])? {
                Verdict::Coherent(model) => {
                    debug_assert!(r.weak.cost(level, &model) < ub);
                    ub = r.improve(level, &model);
                }
                Verdict::Incoherent(_) => {
                    if r.best.is_none() {
                        return Err(Halt::Incoherent);
                    }
                    r.add_rule(Rule::constraint(vec![Literal::pos(act).into()]))?;
                    let pin = Aggregate::sum(elements.clone(), Relation::Ne, ub);
                    r.add_rule(Rule::constraint(vec![BodyElem::Agg(pin)]))?;
                    r.level_done(level, ub);
                    break;
                }
                Verdict::Unknown => unreachable!("solve maps budget exhaustion to a halt"),
            }
        }
    }
    Ok(())
}
