//! The CDCL oracle against the enumeration oracle on random programs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coreshrink::model::{is_stable, AtomId, BodyElem, Literal, Program, Rule};
use coreshrink::oracle::{CdclOracle, CoreMode, EnumOracle, Limits, Oracle, Verdict};
use coreshrink::random::{random_instance, RandomSpec};

fn check_answer(
    program: &Program,
    assumptions: &[AtomId],
    got: &Verdict,
    expect_coherent: bool,
    tag: &str,
) {
    match got {
        Verdict::Coherent(m) => {
            assert!(
                expect_coherent,
                "{tag}: cdcl found a model the enumeration missed"
            );
            assert!(is_stable(program, m).unwrap(), "{tag}: model is not stable");
            for a in assumptions {
                assert!(m.contains(*a), "{tag}: model drops an assumption");
            }
        }
        Verdict::Incoherent(core) => {
            assert!(!expect_coherent, "{tag}: cdcl missed a model");
            for a in core {
                assert!(
                    assumptions.contains(a),
                    "{tag}: core atom outside the assumptions"
                );
            }
            let check = EnumOracle::new(CoreMode::Raw)
                .solve(program, core, &Limits::unlimited())
                .unwrap();
            assert!(check.is_incoherent(), "{tag}: core is satisfiable");
        }
        Verdict::Unknown => panic!("{tag}: unknown without a budget"),
    }
}

fn random_assumptions(rng: &mut ChaCha8Rng, program: &Program) -> Vec<AtomId> {
    let atoms: Vec<AtomId> = program.atoms.iter().map(|(a, _)| a).collect();
    let n = rng.gen_range(0..=atoms.len().min(4));
    let mut picked: Vec<AtomId> = atoms.choose_multiple(rng, n).copied().collect();
    picked.sort();
    picked
}

#[test]
fn agrees_with_enumeration_on_random_programs() {
    let spec = RandomSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in 0..600 {
        let inst = random_instance(&spec, seed);
        let p = &inst.program;
        let mut cdcl = CdclOracle::new(seed);
        for round in 0..4 {
            let assumptions = if round == 0 {
                Vec::new()
            } else {
                random_assumptions(&mut rng, p)
            };
            let expected = EnumOracle::new(CoreMode::Raw)
                .solve(p, &assumptions, &Limits::unlimited())
                .unwrap();
            let got = cdcl.solve(p, &assumptions, &Limits::unlimited()).unwrap();
            check_answer(
                p,
                &assumptions,
                &got,
                expected.is_coherent(),
                &format!("seed {seed} round {round}"),
            );
        }
    }
}

#[test]
fn incremental_constraints_match_fresh_solves() {
    let spec = RandomSpec {
        aggregates: true,
        ..RandomSpec::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..300 {
        let mut program = random_instance(&spec, seed).program;
        let atoms: Vec<AtomId> = program.atoms.iter().map(|(a, _)| a).collect();
        let mut cdcl = CdclOracle::new(seed);
        for step in 0..5 {
            let expected = EnumOracle::new(CoreMode::Raw)
                .solve(&program, &[], &Limits::unlimited())
                .unwrap();
            let got = cdcl.solve(&program, &[], &Limits::unlimited()).unwrap();
            check_answer(
                &program,
                &[],
                &got,
                expected.is_coherent(),
                &format!("seed {seed} step {step}"),
            );
            let lits: Vec<BodyElem> = (0..rng.gen_range(1..=2))
                .map(|_| {
                    let a = *atoms.choose(&mut rng).unwrap();
                    if rng.gen_bool(0.5) {
                        Literal::pos(a).into()
                    } else {
                        Literal::neg(a).into()
                    }
                })
                .collect();
            program.add_rule(Rule::constraint(lits)).unwrap();
        }
    }
}

#[test]
fn fresh_atoms_defined_after_first_call() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for seed in 0..200 {
        let mut program = random_instance(&RandomSpec::default(), seed).program;
        let mut cdcl = CdclOracle::new(seed);
        cdcl.solve(&program, &[], &Limits::unlimited()).unwrap();
        let old: Vec<AtomId> = program.atoms.iter().map(|(a, _)| a).collect();
        let fresh = program
            .atoms
            .insert_fresh(&format!("@fresh_{seed}"))
            .unwrap();
        program.add_rule(Rule::choice(fresh)).unwrap();
        let other = *old.choose(&mut rng).unwrap();
        program
            .add_rule(Rule::constraint(vec![
                Literal::pos(fresh).into(),
                Literal::neg(other).into(),
            ]))
            .unwrap();
        for assumptions in [vec![fresh], vec![], vec![fresh, other]] {
            let expected = EnumOracle::new(CoreMode::Raw)
                .solve(&program, &assumptions, &Limits::unlimited())
                .unwrap();
            let got = cdcl
                .solve(&program, &assumptions, &Limits::unlimited())
                .unwrap();
            check_answer(
                &program,
                &assumptions,
                &got,
                expected.is_coherent(),
                &format!("seed {seed}"),
            );
        }
    }
}

#[test]
fn zero_conflict_budget_never_lies() {
    for seed in 0..200 {
        let inst = random_instance(&RandomSpec::default(), seed);
        let expected = EnumOracle::new(CoreMode::Raw)
            .solve(&inst.program, &[], &Limits::unlimited())
            .unwrap();
        let got = CdclOracle::new(seed)
            .solve(&inst.program, &[], &Limits::count(0))
            .unwrap();
        if got != Verdict::Unknown {
            check_answer(
                &inst.program,
                &[],
                &got,
                expected.is_coherent(),
                &format!("seed {seed}"),
            );
        }
    }
}
