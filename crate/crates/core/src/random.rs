//! Seeded generation of small instances.
//!
//! Generated programs mix choice rules, normal rules, integrity constraints
//! (optionally with aggregates) and weak constraints over a handful of
//! atoms. Unless disjunction is enabled, every program stays within the
//! fragment the CDCL oracle accepts.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{
    Aggregate, AtomId, AtomTable, BodyElem, Literal, Program, Relation, Rule, WeakConstraint,
    WeakConstraintSet,
};
use crate::textio::ParsedInstance;

#[derive(Clone, Debug)]
pub struct RandomSpec {
    pub max_atoms: usize,
    pub max_rules: usize,
    pub max_levels: u32,
    pub max_weight: u64,
    pub max_weak: usize,
    pub disjunctive: bool,
    pub aggregates: bool,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            max_atoms: 10,
            max_rules: 15,
            max_levels: 3,
            max_weight: 4,
            max_weak: 6,
            disjunctive: false,
            aggregates: true,
        }
    }
}

fn literal(rng: &mut ChaCha8Rng, atoms: &[AtomId]) -> Literal {
    let a = *atoms.choose(rng).expect("at least one atom");
    match rng.gen_range(0..10) {
        0..=5 => Literal::pos(a),
        6..=8 => Literal::neg(a),
        _ => Literal::double_neg(a),
    }
}

fn body(rng: &mut ChaCha8Rng, atoms: &[AtomId], min: usize, max: usize) -> Vec<BodyElem> {
    let n = rng.gen_range(min..=max);
    (0..n).map(|_| BodyElem::Lit(literal(rng, atoms))).collect()
}

fn aggregate(rng: &mut ChaCha8Rng, atoms: &[AtomId], max_weight: u64) -> Aggregate {
    let n = rng.gen_range(1..=4);
    let count = rng.gen_bool(0.5);
    let elements: Vec<(u64, Literal)> = (0..n)
        .map(|_| {
            let w = if count {
                1
            } else {
                rng.gen_range(1..=max_weight.max(1))
            };
            (w, literal(rng, atoms))
        })
        .collect();
    let total: u64 = elements.iter().map(|(w, _)| *w).sum();
    let relation = *[
        Relation::Lt,
        Relation::Le,
        Relation::Ge,
        Relation::Gt,
        Relation::Eq,
        Relation::Ne,
    ]
    .choose(rng)
    .expect("nonempty");
    let bound = rng.gen_range(0..=total + 1);
    Aggregate::sum(elements, relation, bound)
}

/// Builds the instance for `seed`; equal seeds give equal instances.
pub fn random_instance(spec: &RandomSpec, seed: u64) -> ParsedInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_atoms = rng.gen_range(2..=spec.max_atoms.max(2));
    let mut table = AtomTable::new();
    let atoms: Vec<AtomId> = (0..n_atoms)
        .map(|i| table.intern(&format!("p{i}")))
        .collect();
    let mut program = Program::new(table);

    let n_rules = rng.gen_range(1..=spec.max_rules.max(1));
    for _ in 0..n_rules {
        let rule = match rng.gen_range(0..10) {
            0..=3 => Rule::choice(*atoms.choose(&mut rng).expect("atoms")),
            4..=7 => {
                let head = *atoms.choose(&mut rng).expect("atoms");
                if spec.disjunctive && rng.gen_bool(0.3) {
                    let other = *atoms.choose(&mut rng).expect("atoms");
                    let head = if other == head {
                        vec![head]
                    } else {
                        vec![head, other]
                    };
                    Rule::new(head, body(&mut rng, &atoms, 0, 2)).expect("distinct head")
                } else {
                    Rule::normal(head, body(&mut rng, &atoms, 0, 3))
                }
            }
            _ => {
                let mut b = body(&mut rng, &atoms, 0, 2);
                if spec.aggregates && rng.gen_bool(0.5) {
                    b.push(BodyElem::Agg(aggregate(&mut rng, &atoms, spec.max_weight)));
                }
                if b.is_empty() {
                    b.push(BodyElem::Lit(literal(&mut rng, &atoms)));
                }
                Rule::constraint(b)
            }
        };
        program.add_rule(rule).expect("atoms registered");
    }

    let levels = rng.gen_range(1..=spec.max_levels.max(1));
    let n_weak = rng.gen_range(1..=spec.max_weak.max(1));
    let mut weak = WeakConstraintSet::new();
    for _ in 0..n_weak {
        let mut b = body(&mut rng, &atoms, 1, 2);
        if spec.aggregates && rng.gen_bool(0.1) {
            b.push(BodyElem::Agg(aggregate(&mut rng, &atoms, spec.max_weight)));
        }
        let w = rng.gen_range(1..=spec.max_weight.max(1));
        let l = rng.gen_range(1..=levels);
        weak.push(WeakConstraint::new(b, w, l).expect("positive"));
    }
    ParsedInstance::new(program, weak)
}
