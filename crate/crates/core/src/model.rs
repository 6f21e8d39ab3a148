//! Ground programs with weak constraints and their reference semantics.
//!
//! Everything here is exact and unoptimized: satisfaction, reducts, stability
//! and the lexicographic cost order. The solving oracles are checked against
//! these definitions.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// Name under which the falsum atom is registered.
pub const FALSE_NAME: &str = "_false";

/// Largest interpretation for which the subset search of [`is_stable`] runs.
pub const STABILITY_SEARCH_CAP: usize = 40;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("atom id {0} is not registered")]
    UnknownAtom(u32),
    #[error("rule head lists atom `{0}` twice")]
    DuplicateHeadAtom(String),
    #[error("weak constraint weight and level must be positive (got {weight}@{level})")]
    NonPositiveWeak { weight: u64, level: u32 },
    #[error("subset search over {size} atoms exceeds the cap of {cap}")]
    Capacity { size: usize, cap: usize },
}

/// Dense atom index. Id 0 is always the falsum atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomId(pub u32);

impl AtomId {
    pub const FALSE: AtomId = AtomId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_false(self) -> bool {
        self == Self::FALSE
    }
}

/// Registry of atom names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomTable {
    names: Vec<String>,
    by_name: HashMap<String, AtomId>,
}

impl Default for AtomTable {
    fn default() -> Self {
        Self::new()
    }
}

impl AtomTable {
    pub fn new() -> Self {
        let mut table = AtomTable {
            names: Vec::new(),
            by_name: HashMap::new(),
        };
        table.intern(FALSE_NAME);
        table
    }

    /// Returns the id for `name`, registering it if needed.
    pub fn intern(&mut self, name: &str) -> AtomId {
        if let Some(&id) = self.by_name.get(name) {
            return id;
        }
        let id = AtomId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.by_name.insert(name.to_string(), id);
        id
    }

    /// Registers a brand new atom; `None` if the name is taken.
    pub fn insert_fresh(&mut self, name: &str) -> Option<AtomId> {
        if self.by_name.contains_key(name) {
            return None;
        }
        Some(self.intern(name))
    }

    pub fn get(&self, name: &str) -> Option<AtomId> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, id: AtomId) -> &str {
        &self.names[id.index()]
    }

    pub fn contains(&self, id: AtomId) -> bool {
        id.index() < self.names.len()
    }

    /// Number of registered atoms, falsum included.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.len() <= 1
    }

    /// All atoms except falsum, in id order.
    pub fn iter(&self) -> impl Iterator<Item = (AtomId, &str)> {
        self.names
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, n)| (AtomId(i as u32), n.as_str()))
    }
}

/// Parity class of the default negations in front of an atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Negation {
    None,
    Single,
    Double,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: AtomId,
    pub negation: Negation,
}

impl Literal {
    pub fn pos(atom: AtomId) -> Self {
        Literal {
            atom,
            negation: Negation::None,
        }
    }

    pub fn neg(atom: AtomId) -> Self {
        Literal {
            atom,
            negation: Negation::Single,
        }
    }

    pub fn double_neg(atom: AtomId) -> Self {
        Literal {
            atom,
            negation: Negation::Double,
        }
    }

    /// Builds a literal from any number of leading `not`s. Odd counts
    /// collapse to one negation and nonzero even counts to two.
    pub fn with_depth(atom: AtomId, depth: usize) -> Self {
        let negation = match depth {
            0 => Negation::None,
            d if d % 2 == 1 => Negation::Single,
            _ => Negation::Double,
        };
        Literal { atom, negation }
    }

    /// The literal `not ⊥`, which every interpretation satisfies.
    pub fn top() -> Self {
        Literal::neg(AtomId::FALSE)
    }

    pub fn depth(&self) -> usize {
        match self.negation {
            Negation::None => 0,
            Negation::Single => 1,
            Negation::Double => 2,
        }
    }

    pub fn is_negated(&self) -> bool {
        self.negation != Negation::None
    }

    pub fn is_top(&self) -> bool {
        self.atom.is_false() && self.negation == Negation::Single
    }

    /// Truth of the literal when its atom has the given value.
    pub fn holds_when(&self, atom_true: bool) -> bool {
        match self.negation {
            Negation::None | Negation::Double => atom_true,
            Negation::Single => !atom_true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Lt,
    Le,
    Ge,
    Gt,
    Eq,
    Ne,
}

impl Relation {
    pub fn holds(self, lhs: u64, rhs: u64) -> bool {
        match self {
            Relation::Lt => lhs < rhs,
            Relation::Le => lhs <= rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Gt => lhs > rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ne => lhs != rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Eq => "=",
            Relation::Ne => "!=",
        }
    }

    /// The complementary relation: `a (negate r) b` iff not `a r b`.
    pub fn negate(self) -> Relation {
        match self {
            Relation::Lt => Relation::Ge,
            Relation::Le => Relation::Gt,
            Relation::Ge => Relation::Lt,
            Relation::Gt => Relation::Le,
            Relation::Eq => Relation::Ne,
            Relation::Ne => Relation::Eq,
        }
    }

    /// Three-valued comparison of a sum known to lie in `[min, max]`.
    fn holds_in_range(self, min: u64, max: u64, k: u64) -> Option<bool> {
        match self {
            Relation::Lt => decide(max < k, min >= k),
            Relation::Le => decide(max <= k, min > k),
            Relation::Ge => decide(min >= k, max < k),
            Relation::Gt => decide(min > k, max <= k),
            Relation::Eq => decide(min == k && max == k, k < min || k > max),
            Relation::Ne => decide(k < min || k > max, min == k && max == k),
        }
    }
}

fn decide(surely_true: bool, surely_false: bool) -> Option<bool> {
    if surely_true {
        Some(true)
    } else if surely_false {
        Some(false)
    } else {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AggregateKind {
    Sum,
    Count,
}

/// `SUM[w1:l1, ..., wn:ln] rel bound`; a count when every weight is 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Aggregate {
    pub elements: Vec<(u64, Literal)>,
    pub relation: Relation,
    pub bound: u64,
}

impl Aggregate {
    pub fn sum(elements: Vec<(u64, Literal)>, relation: Relation, bound: u64) -> Self {
        Aggregate {
            elements,
            relation,
            bound,
        }
    }

    pub fn count(literals: Vec<Literal>, relation: Relation, bound: u64) -> Self {
        Aggregate {
            elements: literals.into_iter().map(|l| (1, l)).collect(),
            relation,
            bound,
        }
    }

    pub fn kind(&self) -> AggregateKind {
        if self.elements.iter().all(|(w, _)| *w == 1) {
            AggregateKind::Count
        } else {
            AggregateKind::Sum
        }
    }

    pub fn total_weight(&self) -> u64 {
        self.elements.iter().map(|(w, _)| *w).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BodyElem {
    Lit(Literal),
    Agg(Aggregate),
}

impl BodyElem {
    pub fn atoms(&self) -> Box<dyn Iterator<Item = AtomId> + '_> {
        match self {
            BodyElem::Lit(l) => Box::new(std::iter::once(l.atom)),
            BodyElem::Agg(a) => Box::new(a.elements.iter().map(|(_, l)| l.atom)),
        }
    }
}

impl From<Literal> for BodyElem {
    fn from(l: Literal) -> Self {
        BodyElem::Lit(l)
    }
}

impl From<Aggregate> for BodyElem {
    fn from(a: Aggregate) -> Self {
        BodyElem::Agg(a)
    }
}

/// `H(r) <- B(r)`. Integrity constraints carry the head `{⊥}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    head: Vec<AtomId>,
    pub body: Vec<BodyElem>,
}

impl Rule {
    /// Builds a rule. An empty head becomes `{⊥}`, and `⊥` is dropped from
    /// heads that mention other atoms.
    pub fn new(head: Vec<AtomId>, body: Vec<BodyElem>) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        for a in &head {
            if !seen.insert(*a) {
                return Err(ModelError::DuplicateHeadAtom(format!("#{}", a.0)));
            }
        }
        let mut head: Vec<AtomId> = head.into_iter().filter(|a| !a.is_false()).collect();
        if head.is_empty() {
            head.push(AtomId::FALSE);
        }
        Ok(Rule { head, body })
    }

    pub fn constraint(body: Vec<BodyElem>) -> Self {
        Rule {
            head: vec![AtomId::FALSE],
            body,
        }
    }

    pub fn fact(atom: AtomId) -> Self {
        Rule {
            head: vec![atom],
            body: Vec::new(),
        }
    }

    /// `a <- not not a`.
    pub fn choice(atom: AtomId) -> Self {
        Rule {
            head: vec![atom],
            body: vec![BodyElem::Lit(Literal::double_neg(atom))],
        }
    }

    pub fn normal(head: AtomId, body: Vec<BodyElem>) -> Self {
        Rule {
            head: vec![head],
            body,
        }
    }

    pub fn head(&self) -> &[AtomId] {
        &self.head
    }

    pub fn is_constraint(&self) -> bool {
        self.head.iter().all(|a| a.is_false())
    }

    /// Atoms occurring anywhere in the rule, falsum excluded.
    pub fn atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.head
            .iter()
            .copied()
            .chain(self.body.iter().flat_map(|e| e.atoms()))
            .filter(|a| !a.is_false())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub atoms: AtomTable,
    rules: Vec<Rule>,
}

impl Program {
    pub fn new(atoms: AtomTable) -> Self {
        Program {
            atoms,
            rules: Vec::new(),
        }
    }

    pub fn add_rule(&mut self, rule: Rule) -> Result<(), ModelError> {
        if let Some(bad) = rule
            .head
            .iter()
            .copied()
            .chain(rule.body.iter().flat_map(|e| e.atoms()))
            .find(|a| !self.atoms.contains(*a))
        {
            return Err(ModelError::UnknownAtom(bad.0));
        }
        self.rules.push(rule);
        Ok(())
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// `At(Π)` without falsum.
    pub fn atoms_in_rules(&self) -> BTreeSet<AtomId> {
        self.rules.iter().flat_map(|r| r.atoms()).collect()
    }

    pub fn is_disjunctive(&self) -> bool {
        self.rules.iter().any(|r| r.head.len() > 1)
    }

    pub fn satisfied_by(&self, interp: &Interpretation) -> bool {
        self.rules
            .iter()
            .all(|r| rule_status(interp, r) != Some(false))
    }

    pub fn eval_literal(&self, interp: &Interpretation, lit: &Literal) -> Result<bool, ModelError> {
        if !self.atoms.contains(lit.atom) {
            return Err(ModelError::UnknownAtom(lit.atom.0));
        }
        Ok(eval_literal(interp, lit))
    }
}

/// A set of true atoms. Never contains falsum.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interpretation(BTreeSet<AtomId>);

impl Interpretation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, atom: AtomId) -> bool {
        self.0.contains(&atom)
    }

    pub fn insert(&mut self, atom: AtomId) {
        if !atom.is_false() {
            self.0.insert(atom);
        }
    }

    pub fn remove(&mut self, atom: AtomId) {
        self.0.remove(&atom);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &Interpretation) -> bool {
        self.0.is_subset(&other.0)
    }

    /// `I ∩ keep`.
    pub fn restrict(&self, keep: &BTreeSet<AtomId>) -> Interpretation {
        Interpretation(self.0.intersection(keep).copied().collect())
    }

    pub fn names<'a>(&'a self, atoms: &'a AtomTable) -> Vec<&'a str> {
        self.iter().map(|a| atoms.name(a)).collect()
    }
}

impl FromIterator<AtomId> for Interpretation {
    fn from_iter<T: IntoIterator<Item = AtomId>>(iter: T) -> Self {
        Interpretation(iter.into_iter().filter(|a| !a.is_false()).collect())
    }
}

/// Source of (possibly partial) truth values for atoms.
pub trait Valuation {
    fn value(&self, atom: AtomId) -> Option<bool>;
}

impl Valuation for Interpretation {
    fn value(&self, atom: AtomId) -> Option<bool> {
        Some(self.contains(atom))
    }
}

/// Partial assignment indexed by atom id; `None` means unassigned.
#[derive(Clone, Debug)]
pub struct PartialAssignment(pub Vec<Option<bool>>);

impl Valuation for PartialAssignment {
    fn value(&self, atom: AtomId) -> Option<bool> {
        if atom.is_false() {
            return Some(false);
        }
        self.0.get(atom.index()).copied().unwrap_or(Some(false))
    }
}

pub fn literal_status<V: Valuation + ?Sized>(v: &V, lit: &Literal) -> Option<bool> {
    let atom_value = if lit.atom.is_false() {
        Some(false)
    } else {
        v.value(lit.atom)
    };
    atom_value.map(|t| lit.holds_when(t))
}

pub fn aggregate_status<V: Valuation + ?Sized>(v: &V, agg: &Aggregate) -> Option<bool> {
    let (mut min, mut max) = (0u64, 0u64);
    for (w, l) in &agg.elements {
        match literal_status(v, l) {
            Some(true) => {
                min = min.saturating_add(*w);
                max = max.saturating_add(*w);
            }
            Some(false) => {}
            None => max = max.saturating_add(*w),
        }
    }
    agg.relation.holds_in_range(min, max, agg.bound)
}

pub fn elem_status<V: Valuation + ?Sized>(v: &V, elem: &BodyElem) -> Option<bool> {
    match elem {
        BodyElem::Lit(l) => literal_status(v, l),
        BodyElem::Agg(a) => aggregate_status(v, a),
    }
}

/// Three-valued conjunction over a body.
pub fn body_status<V: Valuation + ?Sized>(v: &V, body: &[BodyElem]) -> Option<bool> {
    let mut all_true = true;
    for e in body {
        match elem_status(v, e) {
            Some(false) => return Some(false),
            None => all_true = false,
            Some(true) => {}
        }
    }
    if all_true {
        Some(true)
    } else {
        None
    }
}

/// Three-valued satisfaction of a rule: `Some(false)` only when the body is
/// surely true and every head atom surely false.
pub fn rule_status<V: Valuation + ?Sized>(v: &V, rule: &Rule) -> Option<bool> {
    let body = body_status(v, &rule.body);
    if body == Some(false) {
        return Some(true);
    }
    let mut head_open = false;
    for &h in &rule.head {
        if h.is_false() {
            continue;
        }
        match v.value(h) {
            Some(true) => return Some(true),
            None => head_open = true,
            Some(false) => {}
        }
    }
    if body == Some(true) && !head_open {
        Some(false)
    } else {
        None
    }
}

pub fn eval_literal(interp: &Interpretation, lit: &Literal) -> bool {
    literal_status(interp, lit).unwrap_or(false)
}

pub fn eval_aggregate(interp: &Interpretation, agg: &Aggregate) -> bool {
    aggregate_status(interp, agg).unwrap_or(false)
}

pub fn eval_body(interp: &Interpretation, body: &[BodyElem]) -> bool {
    body_status(interp, body).unwrap_or(false)
}

/// The reduct `Π^I`: rules whose body `I` violates are dropped, and every
/// remaining negated body literal (all satisfied by `I`) becomes `⊤`.
/// Positive literals and aggregates are kept as they are.
pub fn reduct(program: &Program, interp: &Interpretation) -> Program {
    let mut out = Program::new(program.atoms.clone());
    for rule in &program.rules {
        if !eval_body(interp, &rule.body) {
            continue;
        }
        let body = rule
            .body
            .iter()
            .map(|e| match e {
                BodyElem::Lit(l) if l.is_negated() => {
                    // Unsatisfied negated literals would have removed the rule.
                    debug_assert!(eval_literal(interp, l));
                    BodyElem::Lit(Literal::top())
                }
                other => other.clone(),
            })
            .collect();
        out.rules.push(Rule {
            head: rule.head.clone(),
            body,
        });
    }
    out
}

/// Least model of a reduct made of normal, aggregate-free rules.
fn least_model(reduct: &Program, within: &Interpretation) -> Interpretation {
    let mut model = Interpretation::new();
    let mut changed = true;
    while changed {
        changed = false;
        for rule in &reduct.rules {
            let h = rule.head[0];
            if h.is_false() || model.contains(h) {
                continue;
            }
            if eval_body(&model, &rule.body) {
                debug_assert!(within.contains(h));
                model.insert(h);
                changed = true;
            }
        }
    }
    model
}

/// Whether some `J ⊊ I` is a model of `reduct`. Atoms outside `I` stay false.
fn has_smaller_model(reduct: &Program, interp: &Interpretation) -> bool {
    let atoms: Vec<AtomId> = interp.iter().collect();
    let size = reduct.atoms.len();
    let mut assign = PartialAssignment(vec![Some(false); size]);
    for &a in &atoms {
        assign.0[a.index()] = None;
    }
    fn search(
        reduct: &Program,
        atoms: &[AtomId],
        depth: usize,
        assign: &mut PartialAssignment,
    ) -> bool {
        if reduct
            .rules
            .iter()
            .any(|r| rule_status(assign, r) == Some(false))
        {
            return false;
        }
        if depth == atoms.len() {
            return atoms.iter().any(|a| assign.0[a.index()] == Some(false));
        }
        let a = atoms[depth];
        for value in [false, true] {
            assign.0[a.index()] = Some(value);
            if search(reduct, atoms, depth + 1, assign) {
                return true;
            }
        }
        assign.0[a.index()] = None;
        false
    }
    search(reduct, &atoms, 0, &mut assign)
}

/// `I` is stable for `Π` iff `I ⊨ Π` and no `J ⊊ I` satisfies `Π^I`.
pub fn is_stable(program: &Program, interp: &Interpretation) -> Result<bool, ModelError> {
    if let Some(bad) = interp.iter().find(|a| !program.atoms.contains(*a)) {
        return Err(ModelError::UnknownAtom(bad.0));
    }
    if !program.satisfied_by(interp) {
        return Ok(false);
    }
    let red = reduct(program, interp);
    let simple = red
        .rules
        .iter()
        .all(|r| r.head.len() == 1 && r.body.iter().all(|e| matches!(e, BodyElem::Lit(_))));
    if simple {
        return Ok(least_model(&red, interp) == *interp);
    }
    if interp.len() > STABILITY_SEARCH_CAP {
        return Err(ModelError::Capacity {
            size: interp.len(),
            cap: STABILITY_SEARCH_CAP,
        });
    }
    Ok(!has_smaller_model(&red, interp))
}

/// `w@l <- B`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeakConstraint {
    pub body: Vec<BodyElem>,
    pub weight: u64,
    pub level: u32,
}

impl WeakConstraint {
    pub fn new(body: Vec<BodyElem>, weight: u64, level: u32) -> Result<Self, ModelError> {
        if weight == 0 || level == 0 {
            return Err(ModelError::NonPositiveWeak { weight, level });
        }
        Ok(WeakConstraint {
            body,
            weight,
            level,
        })
    }
}

/// Multiset of weak constraints; duplicates count separately and are told
/// apart by their insertion index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WeakConstraintSet {
    items: Vec<WeakConstraint>,
}

impl WeakConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, wc: WeakConstraint) {
        self.items.push(wc);
    }

    pub fn items(&self) -> &[WeakConstraint] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Distinct levels, greatest first.
    pub fn levels(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self.items.iter().map(|w| w.level).collect();
        set.into_iter().rev().collect()
    }

    /// `W^l` with insertion indices.
    pub fn at_level(&self, level: u32) -> impl Iterator<Item = (usize, &WeakConstraint)> {
        self.items
            .iter()
            .enumerate()
            .filter(move |(_, w)| w.level == level)
    }

    pub fn level_weight(&self, level: u32) -> u64 {
        self.at_level(level).map(|(_, w)| w.weight).sum()
    }

    /// `W^l(I)`.
    pub fn cost(&self, level: u32, interp: &Interpretation) -> u64 {
        cost(self, level, interp)
    }

    pub fn cost_vector(&self, interp: &Interpretation) -> CostVector {
        let mut cv = CostVector::new();
        for level in self.levels() {
            cv.set(level, self.cost(level, interp));
        }
        cv
    }

    /// Multiset union.
    pub fn union(&self, other: &WeakConstraintSet) -> WeakConstraintSet {
        let mut items = self.items.clone();
        items.extend(other.items.iter().cloned());
        WeakConstraintSet { items }
    }
}

impl FromIterator<WeakConstraint> for WeakConstraintSet {
    fn from_iter<T: IntoIterator<Item = WeakConstraint>>(iter: T) -> Self {
        WeakConstraintSet {
            items: iter.into_iter().collect(),
        }
    }
}

/// `W^l(I) := Σ weight(r)` over level-`l` weak constraints whose body `I` satisfies.
pub fn cost(weak: &WeakConstraintSet, level: u32, interp: &Interpretation) -> u64 {
    weak.at_level(level)
        .filter(|(_, w)| eval_body(interp, &w.body))
        .map(|(_, w)| w.weight)
        .sum()
}

/// Per-level costs; an absent level counts as zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CostVector {
    per_level: BTreeMap<u32, u64>,
}

impl CostVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, level: u32) -> u64 {
        self.per_level.get(&level).copied().unwrap_or(0)
    }

    pub fn set(&mut self, level: u32, value: u64) {
        self.per_level.insert(level, value);
    }

    pub fn levels(&self) -> impl DoubleEndedIterator<Item = u32> + '_ {
        self.per_level.keys().copied()
    }

    /// `self <_W other`: some level is strictly cheaper while no greater
    /// level is more expensive.
    pub fn precedes(&self, other: &CostVector) -> bool {
        let levels: BTreeSet<u32> = self.levels().chain(other.levels()).collect();
        levels.iter().any(|&l| {
            self.get(l) < other.get(l)
                && levels
                    .iter()
                    .filter(|&&h| h > l)
                    .all(|&h| self.get(h) <= other.get(h))
        })
    }

    /// Values for the given levels, in the order given.
    pub fn values_for(&self, levels: &[u32]) -> Vec<u64> {
        levels.iter().map(|&l| self.get(l)).collect()
    }
}

impl fmt::Display for CostVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .per_level
            .iter()
            .rev()
            .map(|(l, c)| format!("{c}@{l}"))
            .collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// `J <_W I`.
pub fn precedes(j: &Interpretation, i: &Interpretation, weak: &WeakConstraintSet) -> bool {
    weak.cost_vector(j).precedes(&weak.cost_vector(i))
}
