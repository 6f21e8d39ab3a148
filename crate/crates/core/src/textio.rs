//! Reading and writing instances.
//!
//! Two input dialects are supported:
//!
//! - ground programs: `a | c :- not b, not d.`, `:- sum{ 2: not s2, 1: s4 } >= 2.`,
//!   `:~ d. [1@2]`, with `%` line comments;
//! - WCNF MaxSAT files, both the classic `p wcnf` header form and the
//!   headerless form with `h`-prefixed hard clauses.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{
    Aggregate, AggregateKind, AtomId, AtomTable, BodyElem, Literal, ModelError, Program, Relation,
    Rule, WeakConstraint, WeakConstraintSet, FALSE_NAME,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("line {line}: {msg}")]
    Wcnf { line: usize, msg: String },
    #[error("input is not valid UTF-8")]
    Encoding,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dialect {
    GroundAsp,
    Wcnf,
}

impl Dialect {
    /// Guesses the dialect from the first meaningful line.
    pub fn detect(text: &str) -> Dialect {
        for line in text.lines() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            if (t == "c" || t.starts_with("c ")) && !t.ends_with('.') {
                continue;
            }
            if t.starts_with("p wcnf") || t.starts_with("h ") {
                return Dialect::Wcnf;
            }
            if t.split_whitespace().all(|tok| tok.parse::<i64>().is_ok()) {
                return Dialect::Wcnf;
            }
            return Dialect::GroundAsp;
        }
        Dialect::GroundAsp
    }
}

/// A program, its weak constraints and the atoms reported in solutions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedInstance {
    pub program: Program,
    pub weak: WeakConstraintSet,
    pub visible: BTreeSet<AtomId>,
}

impl ParsedInstance {
    /// Visible atoms are every registered atom except falsum.
    pub fn new(program: Program, weak: WeakConstraintSet) -> Self {
        let visible = program.atoms.iter().map(|(id, _)| id).collect();
        ParsedInstance {
            program,
            weak,
            visible,
        }
    }
}

pub fn parse(bytes: &[u8], dialect: Option<Dialect>) -> Result<ParsedInstance, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|_| ParseError::Encoding)?;
    match dialect.unwrap_or_else(|| Dialect::detect(text)) {
        Dialect::GroundAsp => parse_ground_asp(text),
        Dialect::Wcnf => parse_wcnf(text),
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(u64),
    Minus,
    Dot,
    Comma,
    Colon,
    Bar,
    If,
    Weak,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    At,
    Rel(Relation),
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            let err = |msg: String| ParseError::Syntax {
                line: lineno + 1,
                col,
                msg,
            };
            if c == '%' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let mut push = |tok: Tok, len: usize| {
                out.push(Spanned {
                    tok,
                    line: lineno + 1,
                    col,
                });
                len
            };
            let peek = chars.get(i + 1).copied();
            let step = match c {
                '.' => push(Tok::Dot, 1),
                ',' => push(Tok::Comma, 1),
                '|' => push(Tok::Bar, 1),
                '{' => push(Tok::LBrace, 1),
                '}' => push(Tok::RBrace, 1),
                '[' => push(Tok::LBracket, 1),
                ']' => push(Tok::RBracket, 1),
                '-' => push(Tok::Minus, 1),
                ':' => match peek {
                    Some('-') => push(Tok::If, 2),
                    Some('~') => push(Tok::Weak, 2),
                    _ => push(Tok::Colon, 1),
                },
                '<' => match peek {
                    Some('=') => push(Tok::Rel(Relation::Le), 2),
                    Some('>') => push(Tok::Rel(Relation::Ne), 2),
                    _ => push(Tok::Rel(Relation::Lt), 1),
                },
                '>' => match peek {
                    Some('=') => push(Tok::Rel(Relation::Ge), 2),
                    _ => push(Tok::Rel(Relation::Gt), 1),
                },
                '=' => match peek {
                    Some('=') => push(Tok::Rel(Relation::Eq), 2),
                    _ => push(Tok::Rel(Relation::Eq), 1),
                },
                '!' => match peek {
                    Some('=') => push(Tok::Rel(Relation::Ne), 2),
                    _ => return Err(err("expected `!=`".into())),
                },
                '@' if !peek.is_some_and(|p| p.is_ascii_alphabetic() || p == '_') => {
                    push(Tok::At, 1)
                }
                c if c.is_ascii_digit() => {
                    let start = i;
                    let mut j = i;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    let s: String = chars[start..j].iter().collect();
                    let n = s
                        .parse::<u64>()
                        .map_err(|_| err(format!("number `{s}` out of range")))?;
                    push(Tok::Num(n), j - start)
                }
                c if c.is_ascii_alphabetic() || c == '_' || c == '@' => {
                    let start = i;
                    let mut j = i + 1;
                    while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                        j += 1;
                    }
                    let s: String = chars[start..j].iter().collect();
                    push(Tok::Ident(s), j - start)
                }
                other => return Err(err(format!("unexpected character `{other}`"))),
            };
            i += step;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    atoms: AtomTable,
    last_line: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, off: usize) -> Option<&Tok> {
        self.toks.get(self.pos + off).map(|s| &s.tok)
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = match self.toks.get(self.pos) {
            Some(s) => (s.line, s.col),
            None => (self.last_line.max(1), 1),
        };
        ParseError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn number(&mut self, what: &str) -> Result<u64, ParseError> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            Some(Tok::Minus) => Err(self.error(format!("{what} must be nonnegative"))),
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn atom(&mut self) -> Result<AtomId, ParseError> {
        match self.peek() {
            Some(Tok::Ident(name)) if !is_keyword(name) => {
                let name = name.clone();
                self.pos += 1;
                Ok(self.atoms.intern(&name))
            }
            _ => Err(self.error("expected an atom")),
        }
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let mut depth = 0;
        while matches!(self.peek(), Some(Tok::Ident(s)) if s == "not") {
            self.pos += 1;
            depth += 1;
        }
        let atom = self.atom()?;
        Ok(Literal::with_depth(atom, depth))
    }

    fn aggregate(&mut self, kind: AggregateKind) -> Result<Aggregate, ParseError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut elements = Vec::new();
        if self.peek() != Some(&Tok::RBrace) {
            loop {
                let weight = match kind {
                    AggregateKind::Count => 1,
                    AggregateKind::Sum => {
                        let w = self.number("element weight")?;
                        self.expect(Tok::Colon, "`:` after the weight")?;
                        w
                    }
                };
                elements.push((weight, self.literal()?));
                if self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace, "`}`")?;
        let relation = match self.next() {
            Some(Tok::Rel(r)) => r,
            _ => {
                self.pos = self.pos.saturating_sub(1);
                return Err(self.error("expected a comparison after the aggregate"));
            }
        };
        let bound = self.number("aggregate bound")?;
        if matches!(self.peek(), Some(Tok::Rel(_))) {
            return Err(self.error("aggregate has more than one relation"));
        }
        Ok(Aggregate::sum(elements, relation, bound))
    }

    fn body_elem(&mut self) -> Result<BodyElem, ParseError> {
        if let (Some(Tok::Ident(s)), Some(Tok::LBrace)) = (self.peek(), self.peek_at(1)) {
            let kind = match s.as_str() {
                "sum" => Some(AggregateKind::Sum),
                "count" => Some(AggregateKind::Count),
                _ => None,
            };
            if let Some(kind) = kind {
                self.pos += 1;
                return Ok(BodyElem::Agg(self.aggregate(kind)?));
            }
        }
        Ok(BodyElem::Lit(self.literal()?))
    }

    fn body(&mut self) -> Result<Vec<BodyElem>, ParseError> {
        let mut body = Vec::new();
        if self.peek() == Some(&Tok::Dot) {
            return Ok(body);
        }
        loop {
            body.push(self.body_elem()?);
            if self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
            } else {
                return Ok(body);
            }
        }
    }
}

fn is_keyword(s: &str) -> bool {
    s == "not"
}

pub fn parse_ground_asp(text: &str) -> Result<ParsedInstance, ParseError> {
    let toks = lex(text)?;
    let last_line = toks.last().map(|t| t.line).unwrap_or(1);
    let mut p = Parser {
        toks,
        pos: 0,
        atoms: AtomTable::new(),
        last_line,
    };
    let mut rules = Vec::new();
    let mut weak = WeakConstraintSet::new();
    while p.peek().is_some() {
        match p.peek() {
            Some(Tok::Weak) => {
                p.pos += 1;
                let body = p.body()?;
                p.expect(Tok::Dot, "`.` after the weak constraint body")?;
                p.expect(Tok::LBracket, "`[`")?;
                let weight = p.number("weight")?;
                let level = if p.peek() == Some(&Tok::At) {
                    p.pos += 1;
                    p.number("level")?
                } else {
                    1
                };
                let level = u32::try_from(level).map_err(|_| p.error("level out of range"))?;
                p.expect(Tok::RBracket, "`]`")?;
                let wc =
                    WeakConstraint::new(body, weight, level).map_err(|e| p.error(e.to_string()))?;
                weak.push(wc);
            }
            Some(Tok::If) => {
                p.pos += 1;
                let body = p.body()?;
                p.expect(Tok::Dot, "`.` at the end of the constraint")?;
                rules.push(Rule::constraint(body));
            }
            _ => {
                let start = p.pos;
                let mut head = vec![p.atom()?];
                while p.peek() == Some(&Tok::Bar) {
                    p.pos += 1;
                    head.push(p.atom()?);
                }
                let body = if p.peek() == Some(&Tok::If) {
                    p.pos += 1;
                    p.body()?
                } else {
                    Vec::new()
                };
                p.expect(Tok::Dot, "`.` at the end of the rule")?;
                let rule = Rule::new(head, body).map_err(|e| match e {
                    ModelError::DuplicateHeadAtom(_) => {
                        p.pos = start;
                        p.error("rule head lists an atom twice")
                    }
                    other => p.error(other.to_string()),
                })?;
                rules.push(rule);
            }
        }
    }
    let mut program = Program::new(p.atoms);
    for r in rules {
        program
            .add_rule(r)
            .expect("parser only references interned atoms");
    }
    Ok(ParsedInstance::new(program, weak))
}

fn wcnf_error(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Wcnf {
        line,
        msg: msg.into(),
    }
}

/// Translates a WCNF file: variable `v` becomes atom `xv` with a choice rule,
/// hard clauses become integrity constraints and soft clauses weak
/// constraints at level 1 whose body is the clause's negation.
pub fn parse_wcnf(text: &str) -> Result<ParsedInstance, ParseError> {
    let mut header: Option<(usize, Option<u64>)> = None;
    let mut headerless = false;
    let mut clauses: Vec<(usize, Option<u64>, Vec<i64>)> = Vec::new();
    let mut max_var = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() || headerless || !clauses.is_empty() {
                return Err(wcnf_error(lineno, "unexpected header"));
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() < 4 || f.len() > 5 || f[0] != "p" || f[1] != "wcnf" {
                return Err(wcnf_error(
                    lineno,
                    "malformed header, expected `p wcnf <vars> <clauses> [<top>]`",
                ));
            }
            let vars = f[2]
                .parse::<usize>()
                .map_err(|_| wcnf_error(lineno, "malformed variable count"))?;
            f[3].parse::<usize>()
                .map_err(|_| wcnf_error(lineno, "malformed clause count"))?;
            let top = match f.get(4) {
                Some(t) => Some(
                    t.parse::<u64>()
                        .map_err(|_| wcnf_error(lineno, "malformed top weight"))?,
                ),
                None => None,
            };
            header = Some((vars, top));
            continue;
        }
        let mut fields = line.split_whitespace();
        let first = fields.next().unwrap_or_default();
        let weight = if first == "h" {
            if header.is_some() {
                return Err(wcnf_error(
                    lineno,
                    "`h` clauses require the headerless format",
                ));
            }
            headerless = true;
            None
        } else {
            if header.is_none() {
                headerless = true;
            }
            let w = first
                .parse::<u64>()
                .map_err(|_| wcnf_error(lineno, format!("malformed weight `{first}`")))?;
            if w == 0 {
                return Err(wcnf_error(lineno, "clause weight must be positive"));
            }
            match header {
                Some((_, Some(top))) if w > top => {
                    return Err(wcnf_error(lineno, format!("weight {w} exceeds top {top}")))
                }
                Some((_, Some(top))) if w == top => None,
                _ => Some(w),
            }
        };
        let mut lits = Vec::new();
        let mut closed = false;
        for f in fields {
            let v = f
                .parse::<i64>()
                .map_err(|_| wcnf_error(lineno, format!("malformed literal `{f}`")))?;
            if v == 0 {
                closed = true;
                break;
            }
            max_var = max_var.max(v.unsigned_abs() as usize);
            lits.push(v);
        }
        if !closed {
            return Err(wcnf_error(lineno, "clause is not terminated by 0"));
        }
        if let Some((vars, _)) = header {
            if max_var > vars {
                return Err(wcnf_error(
                    lineno,
                    format!("variable {max_var} exceeds declared count {vars}"),
                ));
            }
        }
        clauses.push((lineno, weight, lits));
    }
    let vars = match header {
        Some((v, _)) => v,
        None if headerless => max_var,
        None => return Err(wcnf_error(1, "missing `p wcnf` header")),
    };
    let mut atoms = AtomTable::new();
    let ids: Vec<AtomId> = (1..=vars).map(|v| atoms.intern(&format!("x{v}"))).collect();
    let mut program = Program::new(atoms);
    for &id in &ids {
        program.add_rule(Rule::choice(id)).expect("registered");
    }
    let mut weak = WeakConstraintSet::new();
    for (_, weight, lits) in clauses {
        let body: Vec<BodyElem> = lits
            .iter()
            .map(|&v| {
                let atom = ids[v.unsigned_abs() as usize - 1];
                if v > 0 {
                    BodyElem::Lit(Literal::neg(atom))
                } else {
                    BodyElem::Lit(Literal::pos(atom))
                }
            })
            .collect();
        match weight {
            None => program
                .add_rule(Rule::constraint(body))
                .expect("registered"),
            Some(w) => weak.push(WeakConstraint::new(body, w, 1).expect("positive weight")),
        }
    }
    Ok(ParsedInstance::new(program, weak))
}

fn write_literal(out: &mut String, atoms: &AtomTable, lit: &Literal) {
    for _ in 0..lit.depth() {
        out.push_str("not ");
    }
    out.push_str(atoms.name(lit.atom));
}

fn write_body(out: &mut String, atoms: &AtomTable, body: &[BodyElem]) {
    for (i, e) in body.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        match e {
            BodyElem::Lit(l) => write_literal(out, atoms, l),
            BodyElem::Agg(a) => {
                let count = a.kind() == AggregateKind::Count && !a.elements.is_empty();
                out.push_str(if count { "count{ " } else { "sum{ " });
                for (j, (w, l)) in a.elements.iter().enumerate() {
                    if j > 0 {
                        out.push_str(", ");
                    }
                    if !count {
                        let _ = write!(out, "{w}: ");
                    }
                    write_literal(out, atoms, l);
                }
                let _ = write!(out, " }} {} {}", a.relation.symbol(), a.bound);
            }
        }
    }
}

/// Renders one rule as a statement of the ground dialect.
pub fn rule_to_string(atoms: &AtomTable, rule: &Rule) -> String {
    let mut out = String::new();
    if rule.is_constraint() {
        if rule.body.is_empty() {
            out.push_str(FALSE_NAME);
        } else {
            out.push_str(":- ");
            write_body(&mut out, atoms, &rule.body);
        }
    } else {
        let head: Vec<&str> = rule.head().iter().map(|a| atoms.name(*a)).collect();
        out.push_str(&head.join(" | "));
        if !rule.body.is_empty() {
            out.push_str(" :- ");
            write_body(&mut out, atoms, &rule.body);
        }
    }
    out.push('.');
    out
}

pub fn weak_to_string(atoms: &AtomTable, wc: &WeakConstraint) -> String {
    let mut out = String::from(":~ ");
    write_body(&mut out, atoms, &wc.body);
    let _ = write!(out, ". [{}@{}]", wc.weight, wc.level);
    out
}

/// Serializes rules then weak constraints, one statement per line.
pub fn serialize(instance: &ParsedInstance) -> String {
    let mut out = String::new();
    let atoms = &instance.program.atoms;
    for r in instance.program.rules() {
        out.push_str(&rule_to_string(atoms, r));
        out.push('\n');
    }
    for wc in instance.weak.items() {
        out.push_str(&weak_to_string(atoms, wc));
        out.push('\n');
    }
    out
}
