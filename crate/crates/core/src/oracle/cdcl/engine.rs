//! Conflict-driven clause learning over clauses and linear constraints.
//!
//! - two-watched-literal clause propagation;
//! - `Σ w·l ≥ k` constraints propagated with a slack counter per constraint,
//!   explained lazily from trail positions;
//! - first-UIP learning, VSIDS-style activities, phase saving, Luby restarts;
//! - assumptions as the first decision levels, with final-conflict analysis
//!   returning the responsible assumptions;
//! - a caller-supplied check on total assignments that may reject the
//!   assignment with a falsified clause.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::oracle::Limits;

pub type Var = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, negative: bool) -> Lit {
        Lit(var * 2 + negative as u32)
    }

    pub fn pos(var: Var) -> Lit {
        Lit::new(var, false)
    }

    pub fn neg(var: Var) -> Lit {
        Lit::new(var, true)
    }

    pub fn var(self) -> Var {
        self.0 >> 1
    }

    pub fn is_negative(self) -> bool {
        self.0 & 1 == 1
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

const UNDEF: u8 = 2;

#[derive(Clone, Copy, Debug)]
enum Reason {
    Decision,
    Clause(usize),
    Linear(usize),
}

struct Linear {
    /// Terms sorted by decreasing weight.
    terms: Vec<(Lit, u64)>,
    /// Σ weights of terms not yet seen false by propagation, minus the bound.
    slack: i64,
}

#[derive(Clone, Copy)]
struct Watch {
    clause: usize,
    blocker: Lit,
}

pub enum Outcome {
    /// Values of all variables.
    Sat(Vec<bool>),
    /// Assumptions responsible for the refutation.
    Unsat(Vec<Lit>),
    Unknown,
}

pub struct Engine {
    ok: bool,
    values: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<Reason>,
    trail_pos: Vec<usize>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<Watch>>,
    linears: Vec<Linear>,
    /// For each literal, the linear constraints in which its negation occurs.
    linear_occ: Vec<Vec<(usize, u64)>>,
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    seen: Vec<bool>,
    rng: ChaCha8Rng,
    pub conflicts: u64,
}

fn luby(mut i: u64) -> u64 {
    let (mut size, mut seq) = (1u64, 0u32);
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

impl Engine {
    pub fn new(seed: u64) -> Engine {
        Engine {
            ok: true,
            values: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail_pos: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            clauses: Vec::new(),
            watches: Vec::new(),
            linears: Vec::new(),
            linear_occ: Vec::new(),
            activity: Vec::new(),
            var_inc: 1.0,
            phase: Vec::new(),
            seen: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            conflicts: 0,
        }
    }

    pub fn new_var(&mut self) -> Var {
        let v = self.values.len() as Var;
        self.values.push(UNDEF);
        self.level.push(0);
        self.reason.push(Reason::Decision);
        self.trail_pos.push(0);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.linear_occ.push(Vec::new());
        self.linear_occ.push(Vec::new());
        self.activity.push(self.rng.gen::<f64>() * 1e-6);
        self.phase.push(false);
        self.seen.push(false);
        v
    }

    /// `Some(true)` if the literal is true, `Some(false)` if false.
    pub fn value(&self, lit: Lit) -> Option<bool> {
        match self.values[lit.var() as usize] {
            UNDEF => None,
            v => Some((v == 1) != lit.is_negative()),
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, lit: Lit, reason: Reason) {
        let v = lit.var() as usize;
        debug_assert_eq!(self.values[v], UNDEF);
        self.values[v] = (!lit.is_negative()) as u8;
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail_pos[v] = self.trail.len();
        self.trail.push(lit);
    }

    fn backtrack(&mut self, target: u32) {
        if self.decision_level() <= target {
            return;
        }
        let keep = self.trail_lim[target as usize];
        for i in (keep..self.trail.len()).rev() {
            let lit = self.trail[i];
            if i < self.qhead {
                for &(ci, w) in &self.linear_occ[lit.index()] {
                    self.linears[ci].slack += w as i64;
                }
            }
            let v = lit.var() as usize;
            self.phase[v] = !lit.is_negative();
            self.values[v] = UNDEF;
        }
        self.trail.truncate(keep);
        self.trail_lim.truncate(target as usize);
        self.qhead = self.qhead.min(keep);
    }

    fn attach(&mut self, ci: usize) {
        let c = &self.clauses[ci];
        let (a, b) = (c[0], c[1]);
        self.watches[(!a).index()].push(Watch {
            clause: ci,
            blocker: b,
        });
        self.watches[(!b).index()].push(Watch {
            clause: ci,
            blocker: a,
        });
    }

    /// Adds a clause at the root. Returns false once the formula is refuted.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        if !self.ok {
            return false;
        }
        self.backtrack(0);
        let mut c: Vec<Lit> = Vec::with_capacity(lits.len());
        for &l in lits {
            match self.value(l) {
                Some(true) => return true,
                Some(false) => continue,
                None => {
                    if c.contains(&!l) {
                        return true;
                    }
                    if !c.contains(&l) {
                        c.push(l);
                    }
                }
            }
        }
        match c.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(c[0], Reason::Decision);
                self.ok = self.propagate().is_none();
                self.ok
            }
            _ => {
                self.clauses.push(c);
                self.attach(self.clauses.len() - 1);
                true
            }
        }
    }

    /// Adds `Σ w·l ≥ bound` at the root. Terms must use distinct variables.
    pub fn add_linear(&mut self, terms: &[(Lit, u64)], bound: u64) -> bool {
        if !self.ok {
            return false;
        }
        self.backtrack(0);
        let mut terms: Vec<(Lit, u64)> = terms
            .iter()
            .filter(|(_, w)| *w > 0)
            .map(|&(l, w)| (l, w.min(bound)))
            .collect();
        terms.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let total: u64 = terms.iter().map(|(_, w)| *w).sum();
        let mut slack = total as i64 - bound as i64;
        for &(l, w) in &terms {
            if self.value(l) == Some(false) {
                slack -= w as i64;
            }
        }
        if slack < 0 {
            self.ok = false;
            return false;
        }
        let ci = self.linears.len();
        for &(l, w) in &terms {
            self.linear_occ[(!l).index()].push((ci, w));
        }
        let implied: Vec<Lit> = terms
            .iter()
            .filter(|(l, w)| *w as i64 > slack && self.value(*l).is_none())
            .map(|(l, _)| *l)
            .collect();
        self.linears.push(Linear { terms, slack });
        for l in implied {
            if self.value(l).is_none() {
                self.enqueue(l, Reason::Linear(ci));
            }
        }
        self.ok = self.propagate().is_none();
        self.ok
    }

    /// False literals explaining an implication (or a conflict, with `None`).
    fn explain(&self, reason: Reason, implied: Option<Lit>) -> Vec<Lit> {
        match reason {
            Reason::Decision => Vec::new(),
            Reason::Clause(ci) => self.clauses[ci]
                .iter()
                .copied()
                .filter(|&l| Some(l) != implied)
                .collect(),
            Reason::Linear(ci) => {
                let limit = implied.map(|l| self.trail_pos[l.var() as usize]);
                self.linears[ci]
                    .terms
                    .iter()
                    .map(|(l, _)| *l)
                    .filter(|&l| {
                        self.value(l) == Some(false)
                            && limit.is_none_or(|p| self.trail_pos[l.var() as usize] < p)
                    })
                    .collect()
            }
        }
    }

    /// Runs unit propagation; returns a falsified clause on conflict.
    fn propagate(&mut self) -> Option<Vec<Lit>> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;

            let occ = std::mem::take(&mut self.linear_occ[p.index()]);
            for &(ci, w) in &occ {
                self.linears[ci].slack -= w as i64;
            }
            let mut conflict = None;
            for &(ci, _) in &occ {
                let slack = self.linears[ci].slack;
                if slack < 0 {
                    conflict = Some(ci);
                    break;
                }
                let mut k = 0;
                while k < self.linears[ci].terms.len() {
                    let (l, w) = self.linears[ci].terms[k];
                    if w as i64 <= slack {
                        break;
                    }
                    if self.value(l).is_none() {
                        self.enqueue(l, Reason::Linear(ci));
                    }
                    k += 1;
                }
            }
            self.linear_occ[p.index()] = occ;
            if let Some(ci) = conflict {
                return Some(self.explain(Reason::Linear(ci), None));
            }

            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[p.index()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == Some(true) {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let ci = w.clause;
                {
                    let c = &mut self.clauses[ci];
                    if c[0] == false_lit {
                        c.swap(0, 1);
                    }
                }
                let first = self.clauses[ci][0];
                if first != w.blocker && self.value(first) == Some(true) {
                    ws[j] = Watch {
                        clause: ci,
                        blocker: first,
                    };
                    j += 1;
                    continue;
                }
                let len = self.clauses[ci].len();
                let mut moved = false;
                for k in 2..len {
                    let l = self.clauses[ci][k];
                    if self.value(l) != Some(false) {
                        self.clauses[ci].swap(1, k);
                        self.watches[(!l).index()].push(Watch {
                            clause: ci,
                            blocker: first,
                        });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = Watch {
                    clause: ci,
                    blocker: first,
                };
                j += 1;
                match self.value(first) {
                    Some(false) => {
                        while i < ws.len() {
                            ws[j] = ws[i];
                            j += 1;
                            i += 1;
                        }
                        conflict = Some(ci);
                    }
                    None => self.enqueue(first, Reason::Clause(ci)),
                    Some(true) => {}
                }
            }
            ws.truncate(j);
            self.watches[p.index()] = ws;
            if let Some(ci) = conflict {
                return Some(self.clauses[ci].clone());
            }
        }
        None
    }

    fn bump(&mut self, v: Var) {
        let a = &mut self.activity[v as usize];
        *a += self.var_inc;
        if *a > 1e100 {
            for x in &mut self.activity {
                *x *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
    }

    /// First-UIP learning. The conflict must contain a literal of the current level.
    fn analyze(&mut self, conflict: Vec<Lit>) -> (Vec<Lit>, u32) {
        let current = self.decision_level();
        let mut learnt = vec![Lit(0)];
        let mut path = 0;
        let mut reason_lits = conflict;
        let mut index = self.trail.len();
        let mut p: Option<Lit> = None;
        loop {
            for &q in &reason_lits {
                if Some(q) == p {
                    continue;
                }
                let v = q.var() as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(q.var());
                    if self.level[v] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var() as usize] {
                    break;
                }
            }
            let lit = self.trail[index];
            self.seen[lit.var() as usize] = false;
            path -= 1;
            if path == 0 {
                learnt[0] = !lit;
                break;
            }
            p = Some(lit);
            reason_lits = self.explain(self.reason[lit.var() as usize], Some(lit));
        }
        for l in &learnt[1..] {
            self.seen[l.var() as usize] = false;
        }
        let mut back = 0;
        if learnt.len() > 1 {
            let mut best = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var() as usize] > self.level[learnt[best].var() as usize] {
                    best = k;
                }
            }
            learnt.swap(1, best);
            back = self.level[learnt[1].var() as usize];
        }
        self.var_inc /= 0.95;
        (learnt, back)
    }

    /// Assumptions whose values force `failed` (an assumption) false.
    fn analyze_final(&mut self, failed: Lit) -> Vec<Lit> {
        let mut core = vec![failed];
        let v = failed.var() as usize;
        if self.level[v] == 0 {
            return core;
        }
        self.seen[v] = true;
        let start = self.trail_lim.first().copied().unwrap_or(self.trail.len());
        for i in (start..self.trail.len()).rev() {
            let lit = self.trail[i];
            let x = lit.var() as usize;
            if !self.seen[x] {
                continue;
            }
            match self.reason[x] {
                Reason::Decision => core.push(lit),
                r => {
                    for q in self.explain(r, Some(lit)) {
                        if self.level[q.var() as usize] > 0 {
                            self.seen[q.var() as usize] = true;
                        }
                    }
                }
            }
            self.seen[x] = false;
        }
        self.seen[v] = false;
        core
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        let mut best: Option<usize> = None;
        for v in 0..self.values.len() {
            if self.values[v] == UNDEF && best.is_none_or(|b| self.activity[v] > self.activity[b]) {
                best = Some(v);
            }
        }
        best.map(|v| Lit::new(v as Var, !self.phase[v]))
    }

    /// Learns from a falsified clause found at the current level.
    fn learn(&mut self, conflict: Vec<Lit>) {
        let (learnt, back) = self.analyze(conflict);
        self.backtrack(back);
        if learnt.len() == 1 {
            self.enqueue(learnt[0], Reason::Decision);
        } else {
            self.clauses.push(learnt);
            let ci = self.clauses.len() - 1;
            self.attach(ci);
            let l = self.clauses[ci][0];
            self.enqueue(l, Reason::Clause(ci));
        }
    }

    /// Handles a clause falsified by a total assignment. Returns false if the
    /// formula is refuted.
    fn add_nogood(&mut self, mut clause: Vec<Lit>) -> bool {
        clause.sort_by_key(|l| std::cmp::Reverse(self.level[l.var() as usize]));
        clause.dedup();
        let Some(&top) = clause.first() else {
            self.ok = false;
            return false;
        };
        let top_level = self.level[top.var() as usize];
        if top_level == 0 {
            self.ok = false;
            return false;
        }
        if clause.len() == 1 {
            self.backtrack(0);
            self.enqueue(top, Reason::Decision);
            return true;
        }
        self.clauses.push(clause.clone());
        self.attach(self.clauses.len() - 1);
        self.backtrack(top_level);
        self.learn(clause);
        true
    }

    /// Solves under `assumptions`. `check` sees every total assignment and
    /// may reject it with a clause that the assignment falsifies.
    pub fn solve(
        &mut self,
        assumptions: &[Lit],
        limits: &Limits,
        check: &mut dyn FnMut(&Engine) -> Option<Vec<Lit>>,
    ) -> Outcome {
        self.backtrack(0);
        if !self.ok {
            return Outcome::Unsat(Vec::new());
        }
        if self.propagate().is_some() {
            self.ok = false;
            return Outcome::Unsat(Vec::new());
        }
        let mut conflicts_here = 0u64;
        let mut restart_round = 0u64;
        let mut restart_at = luby(0) * 64;
        let mut since_restart = 0u64;
        let mut ticks = 0u64;
        loop {
            if let Some(conflict) = self.propagate() {
                self.conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Outcome::Unsat(Vec::new());
                }
                if limits.count.is_some_and(|c| conflicts_here >= c) {
                    self.backtrack(0);
                    return Outcome::Unknown;
                }
                conflicts_here += 1;
                since_restart += 1;
                self.learn(conflict);
                continue;
            }
            ticks += 1;
            if ticks.is_multiple_of(128) && limits.expired() {
                self.backtrack(0);
                return Outcome::Unknown;
            }
            if since_restart >= restart_at {
                since_restart = 0;
                restart_round += 1;
                restart_at = luby(restart_round) * 64;
                self.backtrack(0);
                continue;
            }
            let mut next = None;
            while (self.decision_level() as usize) < assumptions.len() {
                let a = assumptions[self.decision_level() as usize];
                match self.value(a) {
                    Some(true) => self.trail_lim.push(self.trail.len()),
                    Some(false) => {
                        let core = self.analyze_final(a);
                        self.backtrack(0);
                        return Outcome::Unsat(core);
                    }
                    None => {
                        next = Some(a);
                        break;
                    }
                }
            }
            let next = match next.or_else(|| self.pick_branch()) {
                Some(l) => l,
                None => match check(self) {
                    None => {
                        let model = self.values.iter().map(|&v| v == 1).collect();
                        self.backtrack(0);
                        return Outcome::Sat(model);
                    }
                    Some(nogood) => {
                        debug_assert!(nogood.iter().all(|&l| self.value(l) == Some(false)));
                        self.conflicts += 1;
                        if limits.count.is_some_and(|c| conflicts_here >= c) {
                            self.backtrack(0);
                            return Outcome::Unknown;
                        }
                        conflicts_here += 1;
                        since_restart += 1;
                        if !self.add_nogood(nogood) {
                            return Outcome::Unsat(Vec::new());
                        }
                        continue;
                    }
                },
            };
            self.trail_lim.push(self.trail.len());
            self.enqueue(next, Reason::Decision);
        }
    }
}
