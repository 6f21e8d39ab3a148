//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Expected values come from the enumeration oracle, brute force over
//! assignments, or small independent re-derivations written here.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coreshrink::cli;
use coreshrink::model::{reduct, AtomId, BodyElem, CostVector, Interpretation, Program};
use coreshrink::optimize::{optimize, shrink_core, Budget, ShrinkVariant, Status, StrategyConfig};
use coreshrink::oracle::{
    enumerate_stable, optimum_set, CoreMode, EnumOracle, Limits, Oracle, OracleKind, Verdict,
};
use coreshrink::random::{random_instance, RandomSpec};
use coreshrink::relax::{compile_levels, relax_core, relax_level, SoftRegistry};
use coreshrink::report::bench::{parse_rows, render_csv, run_matrix, BenchInstance};
use coreshrink::report::{epsilon, Epsilon, Event, EventKind};
use coreshrink::textio::{parse_ground_asp, parse_wcnf, rule_to_string, Dialect, ParsedInstance};

const EXAMPLE_PROGRAM: &str =
    "a | c :- not b, not d.\na :- not b, c.\nc :- a, b.\nb :- a, c.\nd :- not not d.\n";
const LEVELED_WEAK: &str = ":~ d. [1@2]\n:~ a. [2@1]\n:~ b. [2@1]\n:~ c. [1@1]\n";
const UNIFORM_WEAK: &str = ":~ d. [1@1]\n:~ a. [1@1]\n:~ b. [1@1]\n:~ c. [1@1]\n";

const EXAMPLE_LEVELS_GOLDEN: &str = include_str!("golden/example_levels.out");
const EXAMPLE_UNIFORM_GOLDEN: &str = include_str!("golden/example_uniform.out");

/// Instances in the randomized suite.
const SUITE_SIZE: u64 = 500;

type Check = Result<(), String>;

/// Name, check and optional time limit.
type Criterion = (&'static str, fn() -> Check, Option<Duration>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn instance(text: &str) -> ParsedInstance {
    parse_ground_asp(text).expect("fixture parses")
}

fn atom(inst: &ParsedInstance, name: &str) -> AtomId {
    inst.program.atoms.get(name).expect("fixture atom")
}

fn names(program: &Program, m: &Interpretation) -> Vec<String> {
    let mut v: Vec<String> = m
        .names(&program.atoms)
        .into_iter()
        .map(String::from)
        .collect();
    v.sort();
    v
}

/// Every strategy of the benchmark matrix, once per oracle.
fn strategies(budget: Budget) -> Vec<StrategyConfig> {
    let mut out = Vec::new();
    for base in StrategyConfig::matrix() {
        for oracle in [OracleKind::Cdcl, OracleKind::Enum] {
            out.push(StrategyConfig {
                oracle,
                shrink_budget: budget,
                ..base.clone()
            });
        }
    }
    out
}

fn semantics() -> Check {
    let inst = instance(EXAMPLE_PROGRAM);
    let p = &inst.program;
    let models: BTreeSet<Vec<String>> = enumerate_stable(p, 22)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|m| names(p, m))
        .collect();
    let expected: BTreeSet<Vec<String>> = [vec!["a".to_string()], vec!["d".to_string()]]
        .into_iter()
        .collect();
    ensure!(models == expected, "stable models {models:?}");
    for (model, head) in [(["a"], vec!["a", "c"]), (["d"], vec!["d"])] {
        let i: Interpretation = {
            let mut i = Interpretation::new();
            i.insert(atom(&inst, model[0]));
            i
        };
        let red = reduct(p, &i);
        let rules: Vec<(Vec<&str>, usize)> = red
            .rules()
            .iter()
            .map(|r| {
                let heads = r.head().iter().map(|&h| red.atoms.name(h)).collect();
                let body = r
                    .body
                    .iter()
                    .filter(|e| !matches!(e, BodyElem::Lit(l) if l.is_top()))
                    .count();
                (heads, body)
            })
            .collect();
        ensure!(
            rules == vec![(head.clone(), 0)],
            "reduct for {model:?}: {rules:?}"
        );
    }
    Ok(())
}

fn example_optimum() -> Check {
    let inst = instance(&format!("{EXAMPLE_PROGRAM}{LEVELED_WEAK}"));
    for base in strategies(Budget::Count(1_000)) {
        for compile in [false, true] {
            let cfg = StrategyConfig {
                compile_levels: compile,
                ..base.clone()
            };
            let res = optimize(&inst, &cfg, &mut Vec::new()).map_err(|e| e.to_string())?;
            ensure!(
                res.status == Status::Optimum,
                "{}: {}",
                cfg.label(),
                res.status
            );
            let model = res.model.ok_or("no model")?;
            ensure!(
                names(&inst.program, &model) == ["a"],
                "{}: model {model:?}",
                cfg.label()
            );
            let cost = inst.weak.cost_vector(&model);
            ensure!(
                cost.values_for(&[2, 1]) == [0, 2],
                "{}: cost {cost:?}",
                cfg.label()
            );
        }
    }
    Ok(())
}

/// The example program with the weak constraints of `weak` relaxed level by level.
fn relaxed(weak: &str) -> (ParsedInstance, SoftRegistry, Vec<AtomId>) {
    let mut inst = instance(&format!("{EXAMPLE_PROGRAM}{weak}"));
    let mut reg = SoftRegistry::new();
    let mut softs = Vec::new();
    for level in inst.weak.levels() {
        let out = relax_level(&mut inst.program, &inst.weak, level, &mut reg).expect("relaxes");
        softs.extend(out.soft_atoms);
    }
    (inst, reg, softs)
}

fn minimal_core() -> Check {
    let (inst, _, softs) = relaxed(LEVELED_WEAK);
    let mut oracle = EnumOracle::new(CoreMode::Minimal);
    let v = oracle
        .solve(&inst.program, &softs, &Limits::unlimited())
        .map_err(|e| e.to_string())?;
    ensure!(
        v == Verdict::Incoherent(softs[..2].to_vec()),
        "verdict {v:?}"
    );
    Ok(())
}

fn core_trace() -> Check {
    let (mut inst, mut reg, softs) = relaxed(UNIFORM_WEAK);
    let mut oracle = EnumOracle::new(CoreMode::Raw);
    let v = oracle
        .solve(&inst.program, &softs, &Limits::unlimited())
        .map_err(|e| e.to_string())?;
    ensure!(v == Verdict::Incoherent(softs.clone()), "first core {v:?}");
    let r = relax_core(&mut inst.program, &softs, 1, &mut reg).map_err(|e| e.to_string())?;
    ensure!(r.lb_increment == 1, "lb increment {}", r.lb_increment);
    let rendered: Vec<String> = r
        .output
        .added_rules
        .iter()
        .map(|rule| rule_to_string(&inst.program.atoms, rule))
        .collect();
    let n: Vec<&str> = r
        .output
        .soft_atoms
        .iter()
        .map(|&s| inst.program.atoms.name(s))
        .collect();
    let s: Vec<&str> = softs.iter().map(|&x| inst.program.atoms.name(x)).collect();
    ensure!(n.len() == 3, "new softs {n:?}");
    let expected = vec![
        format!("{} :- not not {}.", n[0], n[0]),
        format!("{} :- not not {}.", n[1], n[1]),
        format!("{} :- not not {}.", n[2], n[2]),
        format!(":- {}, not {}.", n[0], n[1]),
        format!(":- {}, not {}.", n[1], n[2]),
        format!(
            ":- count{{ {}, {}, {}, {}, not {}, not {}, not {} }} < 3.",
            s[0], s[1], s[2], s[3], n[0], n[1], n[2]
        ),
    ];
    ensure!(rendered == expected, "relaxation {rendered:#?}");

    let full = instance(&format!("{EXAMPLE_PROGRAM}{UNIFORM_WEAK}"));
    for oracle in [OracleKind::Cdcl, OracleKind::Enum] {
        let cfg = StrategyConfig {
            oracle,
            ..StrategyConfig::one(None, false)
        };
        let mut events = Vec::new();
        let res = optimize(&full, &cfg, &mut events).map_err(|e| e.to_string())?;
        let first = events.iter().find_map(|e| match e.kind {
            EventKind::CoreFound { size, .. } => Some(size),
            _ => None,
        });
        ensure!(first == Some(4), "first core size {first:?}");
        ensure!(res.status == Status::Optimum, "status {}", res.status);
        let ub = res.cost.as_ref().map(|c| c.get(1));
        ensure!(
            ub == Some(1) && res.lb_vector.get(1) == 1,
            "ub {ub:?} lb {:?}",
            res.lb_vector
        );
        let last_lb = events.iter().rev().find_map(|e| match e.kind {
            EventKind::LbImproved { lb, .. } => Some(lb),
            _ => None,
        });
        ensure!(last_lb == Some(1), "last lb event {last_lb:?}");
    }
    Ok(())
}

fn shrinking_trace() -> Check {
    let (inst, _, softs) = relaxed(UNIFORM_WEAK);
    let program = &inst.program;
    let steps = |prefix: &[AtomId]| {
        let mut o = EnumOracle::new(CoreMode::Raw);
        let v = o
            .solve(program, prefix, &Limits::unlimited())
            .expect("solves");
        (v, o.last_steps)
    };
    let (v1, steps1) = steps(&softs[..1]);
    let Verdict::Coherent(m1) = v1 else {
        return Err("prefix {s1} should be coherent".into());
    };
    ensure!(
        m1.contains(atom(&inst, "a")) && m1.contains(softs[0]),
        "model of {{s1}}: {:?}",
        names(program, &m1)
    );
    let (v2, steps2) = steps(&softs[..2]);
    ensure!(v2.is_incoherent(), "prefix {{s1,s2}} should be incoherent");

    let run = |budget: u64| {
        let mut o = EnumOracle::new(CoreMode::Raw);
        let mut answers = Vec::new();
        let out = shrink_core(
            softs.clone(),
            ShrinkVariant::Progression,
            |p: &[AtomId]| {
                let v = o.solve(program, p, &Limits::count(budget))?;
                answers.push((p.len(), v.clone()));
                Ok::<_, coreshrink::oracle::OracleError>(v)
            },
        )
        .expect("solves");
        (out, answers)
    };
    let (ample, _) = run(steps1.max(steps2) * 100);
    ensure!(ample.probes == [1, 2], "ample probes {:?}", ample.probes);
    ensure!(ample.core == softs[..2], "ample core {:?}", ample.core);

    let budget = steps2 - 1;
    let (tight, answers) = run(budget);
    ensure!(run(budget).0 == tight, "not deterministic");
    ensure!(tight.probes == [1, 2, 3], "tight probes {:?}", tight.probes);
    ensure!(
        answers
            .iter()
            .any(|(len, v)| *len == 2 && *v == Verdict::Unknown),
        "size-2 probe was not cut: {answers:?}"
    );
    ensure!(
        tight.core == softs[..3] || tight.core == softs,
        "tight core {:?}",
        tight.core
    );
    Ok(())
}

/// Re-derives the number of probes from the update rule, with `m` and `pr`
/// scaled by two so everything stays integral.
fn simulated_calls(size: usize, linear: bool) -> usize {
    let top = 2 * (size as i64 - 1);
    let (mut m2, mut pr2) = (-2i64, 2i64);
    let mut calls = 0;
    loop {
        calls += 1;
        if m2 + 2 * pr2 >= top {
            m2 += pr2;
            pr2 = 1;
        }
        if m2 + 2 * pr2 < top {
            pr2 = if linear { pr2 + 2 } else { 2 * pr2 };
        } else {
            return calls;
        }
    }
}

fn call_bounds() -> Check {
    let start = Instant::now();
    for size in [2usize, 4, 8, 16, 32, 64] {
        let core: Vec<AtomId> = (0..size as u32).map(AtomId).collect();
        let k = (size as f64).log2().ceil() as usize;
        for (variant, linear, bound) in [
            (ShrinkVariant::Progression, false, k * (k + 1) / 2),
            (ShrinkVariant::Linear, true, size),
        ] {
            let expected = simulated_calls(size, linear);
            // Nothing smaller than the whole core conflicts, and no probe
            // ever answers with a model.
            let never_coherent = |p: &[AtomId]| {
                Ok::<_, ()>(if p.len() == size {
                    Verdict::Incoherent(p.to_vec())
                } else {
                    Verdict::Unknown
                })
            };
            let out = shrink_core(core.clone(), variant, never_coherent).expect("infallible");
            ensure!(
                out.calls == expected,
                "{variant:?} |C|={size}: {} calls, expected {expected}",
                out.calls
            );
            ensure!(
                out.calls <= bound,
                "{variant:?} |C|={size}: {} calls > {bound}",
                out.calls
            );
            ensure!(out.core == core, "{variant:?} |C|={size}: core changed");
        }
    }
    ensure!(
        start.elapsed() < Duration::from_secs(5),
        "took {:?}",
        start.elapsed()
    );
    Ok(())
}

fn epsilon_formula() -> Check {
    ensure!(
        epsilon(Some(0), 0) == Epsilon::Finite(Ratio::from_integer(0)),
        "ub = lb = 0"
    );
    ensure!(epsilon(Some(3), 0) == Epsilon::Infinite, "lb = 0 < ub");
    ensure!(epsilon(None, 2) == Epsilon::Infinite, "no model");
    ensure!(
        epsilon(Some(3), 2) == Epsilon::Finite(Ratio::new(1, 2)),
        "(3-2)/2"
    );
    ensure!(
        epsilon(Some(5), 5) == Epsilon::Finite(Ratio::from_integer(0)),
        "ub = lb"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let lb: u64 = rng.gen_range(0..1_000);
        let ub: u64 = rng.gen_range(lb..=lb + 1_000);
        let e = epsilon(Some(ub), lb);
        let expected = if lb == 0 && ub > 0 {
            Epsilon::Infinite
        } else if ub == lb {
            Epsilon::Finite(Ratio::from_integer(0))
        } else {
            Epsilon::Finite(Ratio::new(ub - lb, lb))
        };
        ensure!(e == expected, "eps({ub},{lb}) = {e}");
        ensure!(
            epsilon(Some(ub + 1), lb) >= e,
            "not monotone in ub at ({ub},{lb})"
        );
        if lb < ub {
            ensure!(
                epsilon(Some(ub), lb + 1) <= e,
                "not antitone in lb at ({ub},{lb})"
            );
        }
    }
    Ok(())
}

/// Checks every bound event of a run against the optimum cost.
fn bounds_respected(events: &[Event], optimum: &CostVector) -> Result<(), String> {
    for e in events {
        match e.kind {
            EventKind::UbImproved { level, ub, .. } if ub < optimum.get(level) => {
                return Err(format!(
                    "ub {ub} below optimum {} at level {level}",
                    optimum.get(level)
                ));
            }
            EventKind::LbImproved { level, lb, .. } if lb > optimum.get(level) => {
                return Err(format!(
                    "lb {lb} above optimum {} at level {level}",
                    optimum.get(level)
                ));
            }
            _ => {}
        }
    }
    Ok(())
}

fn cross_equivalence() -> Check {
    let start = Instant::now();
    let spec = RandomSpec::default();
    let configs = strategies(Budget::Count(200));
    let mut runs = 0;
    for seed in 0..SUITE_SIZE {
        let inst = random_instance(&spec, seed);
        let expected = optimum_set(&inst.program, &inst.weak, 22).map_err(|e| e.to_string())?;
        for cfg in &configs {
            let mut events = Vec::new();
            let res = optimize(&inst, cfg, &mut events)
                .map_err(|e| format!("seed {seed} {}: {e}", cfg.label()))?;
            runs += 1;
            let tag = format!("seed {seed} {} {:?}", cfg.label(), cfg.oracle);
            match &expected {
                None => ensure!(res.status == Status::Incoherent, "{tag}: {}", res.status),
                Some((cost, _)) => {
                    ensure!(res.status == Status::Optimum, "{tag}: {}", res.status);
                    let got = res.cost.as_ref().ok_or("missing cost")?;
                    for l in inst.weak.levels() {
                        ensure!(
                            got.get(l) == cost.get(l),
                            "{tag}: level {l} {} vs {}",
                            got.get(l),
                            cost.get(l)
                        );
                    }
                    bounds_respected(&events, cost).map_err(|e| format!("{tag}: {e}"))?;
                }
            }
        }
    }
    ensure!(runs >= 500 * 16, "only {runs} runs");
    ensure!(
        start.elapsed() < Duration::from_secs(120),
        "took {:?}",
        start.elapsed()
    );
    Ok(())
}

fn compile_invariance() -> Check {
    let spec = RandomSpec::default();
    let mut multi = 0;
    for seed in 0..SUITE_SIZE {
        let inst = random_instance(&spec, seed);
        if inst.weak.levels().len() < 2 {
            continue;
        }
        multi += 1;
        let compiled = compile_levels(&inst.weak).map_err(|e| e.to_string())?;
        let a = optimum_set(&inst.program, &inst.weak, 22).map_err(|e| e.to_string())?;
        let b = optimum_set(&inst.program, &compiled, 22).map_err(|e| e.to_string())?;
        let sets = (a.map(|(_, s)| s), b.map(|(_, s)| s));
        ensure!(sets.0 == sets.1, "seed {seed}: optimum sets differ");
        if let Some(optimal) = &sets.0 {
            let cfg = StrategyConfig {
                compile_levels: true,
                shrink_budget: Budget::Count(200),
                ..StrategyConfig::default()
            };
            let res = optimize(&inst, &cfg, &mut Vec::new()).map_err(|e| e.to_string())?;
            let m = res.model.ok_or("no model")?;
            ensure!(
                optimal.contains(&m),
                "seed {seed}: compiled run returned a non-optimum model"
            );
        }
    }
    ensure!(multi >= 100, "only {multi} multi-level instances");
    Ok(())
}

#[derive(Clone, Debug)]
struct Clause {
    weight: Option<u64>,
    lits: Vec<i64>,
}

fn wcnf_text(vars: usize, clauses: &[Clause]) -> String {
    let top = clauses.iter().filter_map(|c| c.weight).sum::<u64>() + 1;
    let mut s = format!("p wcnf {vars} {} {top}\n", clauses.len());
    for c in clauses {
        write!(s, "{}", c.weight.unwrap_or(top)).unwrap();
        for l in &c.lits {
            write!(s, " {l}").unwrap();
        }
        s.push_str(" 0\n");
    }
    s
}

/// Minimum falsified soft weight over all assignments; `None` if the hard
/// clauses are unsatisfiable.
fn brute_force(vars: usize, clauses: &[Clause]) -> Option<u64> {
    (0..1u32 << vars)
        .filter_map(|bits| {
            let sat = |c: &Clause| {
                c.lits.iter().any(|&l| {
                    let v = bits >> (l.unsigned_abs() - 1) & 1 == 1;
                    v == (l > 0)
                })
            };
            if clauses.iter().any(|c| c.weight.is_none() && !sat(c)) {
                return None;
            }
            Some(
                clauses
                    .iter()
                    .filter(|c| !sat(c))
                    .filter_map(|c| c.weight)
                    .sum(),
            )
        })
        .min()
}

fn wcnf_matches(vars: usize, clauses: &[Clause], configs: &[StrategyConfig]) -> Check {
    let text = wcnf_text(vars, clauses);
    let inst = parse_wcnf(&text).map_err(|e| e.to_string())?;
    let expected = brute_force(vars, clauses);
    for cfg in configs {
        let res = optimize(&inst, cfg, &mut Vec::new()).map_err(|e| e.to_string())?;
        let got = match res.status {
            Status::Optimum => Some(res.cost.map(|c| c.get(1)).unwrap_or(0)),
            Status::Incoherent => None,
            s => return Err(format!("{}: status {s} on\n{text}", cfg.label())),
        };
        ensure!(
            got == expected,
            "{}: {got:?} vs {expected:?} on\n{text}",
            cfg.label()
        );
    }
    Ok(())
}

fn wcnf_correspondence() -> Check {
    let configs = [
        StrategyConfig::default(),
        StrategyConfig::linsu(),
        StrategyConfig::one(None, true),
    ];
    // Two variables: every subset of the eight nonempty clauses, each one
    // either hard or soft of weight 1.
    let all: Vec<Vec<i64>> = [
        [0, 1],
        [0, -1],
        [1, 0],
        [-1, 0],
        [1, 1],
        [1, -1],
        [-1, 1],
        [-1, -1],
    ]
    .iter()
    .map(|[x, y]| {
        let mut c = Vec::new();
        if *x != 0 {
            c.push(*x);
        }
        if *y != 0 {
            c.push(2 * y);
        }
        c
    })
    .collect();
    let mut count = 0;
    for code in 0..3u32.pow(all.len() as u32) {
        let mut rest = code;
        let mut clauses = Vec::new();
        for lits in &all {
            match rest % 3 {
                1 => clauses.push(Clause {
                    weight: None,
                    lits: lits.clone(),
                }),
                2 => clauses.push(Clause {
                    weight: Some(1),
                    lits: lits.clone(),
                }),
                _ => {}
            }
            rest /= 3;
        }
        wcnf_matches(2, &clauses, &configs[..1])?;
        count += 1;
    }
    // Three and four variables: seeded samples of up to six clauses.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for vars in [3usize, 4] {
        for _ in 0..400 {
            let n = rng.gen_range(1..=6);
            let clauses: Vec<Clause> = (0..n)
                .map(|_| {
                    let len = rng.gen_range(1..=vars.min(3));
                    let lits = (0..len)
                        .map(|_| {
                            let v = rng.gen_range(1..=vars as i64);
                            if rng.gen_bool(0.5) {
                                v
                            } else {
                                -v
                            }
                        })
                        .collect();
                    let weight = if rng.gen_bool(0.3) {
                        None
                    } else {
                        Some(rng.gen_range(1..=4))
                    };
                    Clause { weight, lits }
                })
                .collect();
            wcnf_matches(vars, &clauses, &configs)?;
            count += 1;
        }
    }
    ensure!(count == 6561 + 800, "{count} instances");
    Ok(())
}

/// `n` choice atoms that all want to be true, with the first `k` pairwise
/// exclusive: a raw core lists all `n` softs but two of them suffice.
fn redundant_core_program(n: usize, k: usize) -> String {
    let mut s = String::new();
    for i in 0..n {
        writeln!(s, "p{i} :- not not p{i}.\n:~ not p{i}. [1@1]").unwrap();
    }
    for i in 0..k {
        for j in i + 1..k {
            writeln!(s, ":- p{i}, p{j}.").unwrap();
        }
    }
    s
}

fn bench_statistics() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut instances = Vec::new();
    for (n, k) in [(3, 2), (4, 2), (4, 3), (5, 2), (5, 3), (6, 2)] {
        let path = dir.path().join(format!("redundant_{n}_{k}.lp"));
        std::fs::write(&path, redundant_core_program(n, k)).map_err(|e| e.to_string())?;
        instances.push(BenchInstance {
            path,
            dialect: Some(Dialect::GroundAsp),
        });
    }
    let spec = RandomSpec::default();
    for seed in 0..20 {
        let path = dir.path().join(format!("random_{seed}.lp"));
        let text = coreshrink::textio::serialize(&random_instance(&spec, seed));
        std::fs::write(&path, text).map_err(|e| e.to_string())?;
        instances.push(BenchInstance {
            path,
            dialect: Some(Dialect::GroundAsp),
        });
    }
    let configs: Vec<StrategyConfig> = StrategyConfig::matrix()
        .into_iter()
        .map(|c| StrategyConfig {
            oracle: OracleKind::Enum,
            core_mode: CoreMode::Raw,
            shrink_budget: Budget::Count(10_000),
            ..c
        })
        .collect();
    let rows = run_matrix(&instances, &configs, Some(Duration::from_secs(30)), 4);
    ensure!(
        rows.len() == instances.len() * configs.len(),
        "{} rows",
        rows.len()
    );
    let csv = render_csv(&rows);
    let header = csv
        .lines()
        .find(|l| l.starts_with("instance,"))
        .ok_or("no header")?;
    for col in [
        "cores_found",
        "core_literals_before",
        "core_literals_after",
        "shrink_calls",
        "budget_hits",
        "epsilon",
    ] {
        ensure!(header.split(',').any(|c| c == col), "missing column {col}");
    }
    ensure!(csv.contains("# summary"), "no summary block");
    let back = parse_rows(&csv).map_err(|e| e.to_string())?;
    ensure!(back.len() == rows.len(), "round trip lost rows");

    let literals = |label: &str| -> u64 {
        rows.iter()
            .filter(|r| r.strategy == label && r.instance.contains("redundant_"))
            .map(|r| r.stats.core_literals_after)
            .sum()
    };
    ensure!(
        rows.iter().all(|r| r.terminated()),
        "some run did not terminate"
    );
    let raw = literals("one");
    for label in ["one+Lshr", "one+Pshr"] {
        let shrunk = literals(label);
        ensure!(
            shrunk <= raw,
            "{label}: {shrunk} analyzed core literals, raw {raw}"
        );
        ensure!(
            shrunk < raw,
            "{label}: no reduction on redundant cores ({shrunk} vs {raw})"
        );
    }
    let before: u64 = rows.iter().map(|r| r.stats.core_literals_before).sum();
    let after: u64 = rows.iter().map(|r| r.stats.core_literals_after).sum();
    ensure!(after <= before, "shrinking grew cores: {after} > {before}");
    Ok(())
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let argv: Vec<String> = std::iter::once("coreshrink")
        .chain(args.iter().copied())
        .map(String::from)
        .collect();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(&argv, &mut out, &mut err, None);
    (code, String::from_utf8(out).expect("utf-8 output"))
}

fn protocol_goldens() -> Check {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/");
    for (file, extra, golden) in [
        ("example_levels.lp", None, EXAMPLE_LEVELS_GOLDEN),
        (
            "example_uniform.lp",
            Some("--shrink=none"),
            EXAMPLE_UNIFORM_GOLDEN,
        ),
    ] {
        let path = format!("{data}{file}");
        let mut args = vec!["--seed", "1", "--shrink-budget", "1000c"];
        args.extend(extra);
        args.push(&path);
        let (code, first) = run_cli(&args);
        let (_, second) = run_cli(&args);
        ensure!(code == 0, "{file}: exit {code}");
        ensure!(first == second, "{file}: output not deterministic");
        ensure!(
            first == golden,
            "{file}: output differs from golden:\n{first}"
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        (
            "stable models and reducts of the example program",
            semantics,
            Some(Duration::from_secs(1)),
        ),
        (
            "every strategy finds the example optimum",
            example_optimum,
            Some(Duration::from_secs(1)),
        ),
        ("minimal core of the relaxed example", minimal_core, None),
        ("core-guided trace on uniform weights", core_trace, None),
        ("progression shrinking trace", shrinking_trace, None),
        (
            "shrinking call bounds",
            call_bounds,
            Some(Duration::from_secs(5)),
        ),
        ("estimate error formula", epsilon_formula, None),
        (
            "cross-strategy and cross-oracle equivalence",
            cross_equivalence,
            Some(Duration::from_secs(120)),
        ),
        (
            "level compilation preserves optimum models",
            compile_invariance,
            None,
        ),
        (
            "wcnf translation matches brute force",
            wcnf_correspondence,
            None,
        ),
        (
            "bench statistics and core literal reduction",
            bench_statistics,
            None,
        ),
        ("protocol goldens", protocol_goldens, None),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut result = check();
        let took = start.elapsed();
        if let (Ok(()), Some(limit)) = (&result, limit) {
            if took > *limit {
                result = Err(format!("took {took:?}, limit {limit:?}"));
            }
        }
        match result {
            Ok(()) => println!("PASS {:>2} {name} ({:.2}s)", i + 1, took.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!(
                    "FAIL {:>2} {name} ({:.2}s): {msg}",
                    i + 1,
                    took.as_secs_f64()
                );
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
