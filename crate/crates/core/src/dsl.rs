//! The script language: declarations of definable sets and commands that
//! analyse them, with JSON reports.
//!
//! ```text
//! set S in G^2 = { (x, y) | 0 <= x <= 1 /\ y = 2*x };
//! set R in G^2 = { (x, inf) | x >= 0 } union S;
//! family F in G^2 by w = { (x, w) | 0 <= x /\ x <= w };
//! betti_c S;
//! scan F by w;
//! ```

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::time::Instant;

use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::celldec::{cell_core, connected_components, Cell, CellFn};
use crate::cohom::{self, betti_c, complement_table, homotopy_check, mv_check, BettiReport, CoeffRing};
use crate::family::{family_scan, FamilyPartition, ScanOptions};
use crate::qlin::{fmt_rat, parse_rat, qe, Atom, ExtRat, LinForm, Quantifier, Rat, Region};
use crate::stratal::{closure_by_qe, fmt_point, SemilinearSet, Support};

/// Byte range of a syntax element. Spans never affect equality of syntax
/// trees, so a printed and re-parsed script compares equal to the original.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Span {
    fn to(self, other: Span) -> Span {
        Span { start: self.start, end: other.end.max(self.start) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Syntax,
    Semantic,
}

/// A parse or load error with its position in the source.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DslError {
    pub kind: ErrorKind,
    pub message: String,
    pub line: usize,
    pub column: usize,
    pub start: usize,
    pub end: usize,
}

impl DslError {
    fn new(kind: ErrorKind, src: &str, span: Span, message: impl Into<String>) -> Self {
        // clamp into the text so the position is always a real character
        let last = src.char_indices().last().map_or(0, |(i, _)| i);
        let start = span.start.min(last);
        let end = span.end.clamp(start, src.len());
        let before = &src[..start];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(before.chars().count(), |i| before[i + 1..].chars().count()) + 1;
        DslError { kind, message: message.into(), line, column, start, end }
    }
}

impl fmt::Display for DslError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            ErrorKind::Syntax => "syntax error",
            ErrorKind::Semantic => "error",
        };
        write!(f, "{}:{}: {k}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for DslError {}

// ---------------------------------------------------------------- syntax

#[derive(Clone, Debug, PartialEq)]
pub struct Script {
    pub items: Vec<Item>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Decl(Decl),
    Command(CommandItem),
}

/// `set NAME in G^n = expr;` or, with a parameter, `family NAME in G^n by p = expr;`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decl {
    pub name: String,
    pub dim: usize,
    pub param: Option<String>,
    pub expr: SetExpr,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetOp {
    Union,
    Intersect,
    Minus,
}

impl SetOp {
    fn keyword(self) -> &'static str {
        match self {
            SetOp::Union => "union",
            SetOp::Intersect => "intersect",
            SetOp::Minus => "minus",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SetExpr {
    /// `{ (x, inf, y) | formula }`; `None` marks an `inf` position.
    Builder { coords: Vec<Option<String>>, body: Formula, span: Span },
    Binary(SetOp, Box<SetExpr>, Box<SetExpr>),
    Closure(Box<SetExpr>),
    Interior(Box<SetExpr>),
    Name(String, Span),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl RelOp {
    fn symbol(self) -> &'static str {
        match self {
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Eq => "=",
            RelOp::Ge => ">=",
            RelOp::Gt => ">",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermAtom {
    Var(String),
    Inf,
}

/// A sum of rational multiples of variables and constants, kept as written.
#[derive(Clone, Debug, PartialEq)]
pub struct LinTerm {
    pub parts: Vec<(Rat, Option<TermAtom>)>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    True,
    False,
    /// `t0 r0 t1 r1 t2 ...`, read as a conjunction of adjacent comparisons.
    Compare { terms: Vec<LinTerm>, rels: Vec<RelOp> },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Quant(Quantifier, String, Box<Formula>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Property {
    Open,
    Closed,
    LocallyClosed,
    Bounded,
    Compact,
}

impl Property {
    const ALL: [Property; 5] =
        [Property::Open, Property::Closed, Property::LocallyClosed, Property::Bounded, Property::Compact];

    fn keyword(self) -> &'static str {
        match self {
            Property::Open => "open",
            Property::Closed => "closed",
            Property::LocallyClosed => "locally_closed",
            Property::Bounded => "bounded",
            Property::Compact => "compact",
        }
    }
}

/// One bound of a cell slot: an affine function of earlier coordinates
/// `x1, x2, ...`, or `±inf`.
#[derive(Clone, Debug, PartialEq)]
pub enum CellBound {
    Form(LinTerm),
    Inf,
    NegInf,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CellSlot {
    Graph(CellBound),
    Band(CellBound, CellBound),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Check(String, Option<Property>),
    Components(String),
    Betti(String),
    BettiC(String),
    Closure(String),
    Mv(String, String, String),
    Homotopy(String, ExtRat, ExtRat),
    Scan(String, String),
    Table(Vec<CellSlot>, Rat, Rat),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommandItem {
    pub command: Command,
    pub span: Span,
}

// ---------------------------------------------------------------- printing

impl fmt::Display for LinTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (c, atom)) in self.parts.iter().enumerate() {
            let mag = c.abs();
            if k == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            match atom {
                None => f.write_str(&fmt_rat(&mag))?,
                Some(a) => {
                    if !mag.is_one() {
                        write!(f, "{}*", fmt_rat(&mag))?;
                    }
                    match a {
                        TermAtom::Var(v) => f.write_str(v)?,
                        TermAtom::Inf => f.write_str("inf")?,
                    }
                }
            }
        }
        Ok(())
    }
}

impl Formula {
    fn prec(&self) -> u8 {
        match self {
            Formula::Or(..) => 1,
            Formula::And(..) => 2,
            Formula::Not(_) => 3,
            Formula::Quant(..) => 0,
            _ => 4,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, child: &Formula, strict: bool) -> fmt::Result {
        let p = child.prec();
        let wrap = p == 0 || if strict { p <= self.prec() } else { p < self.prec() };
        if wrap {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Compare { terms, rels } => {
                write!(f, "{}", terms[0])?;
                for (r, t) in rels.iter().zip(&terms[1..]) {
                    write!(f, " {} {t}", r.symbol())?;
                }
                Ok(())
            }
            Formula::Not(a) => {
                f.write_str("not ")?;
                self.write_child(f, a, false)
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                self.write_child(f, a, false)?;
                f.write_str(if matches!(self, Formula::And(..)) { " /\\ " } else { " \\/ " })?;
                self.write_child(f, b, true)
            }
            Formula::Quant(q, v, body) => {
                let kw = if *q == Quantifier::Exists { "exists" } else { "forall" };
                write!(f, "{kw} {v} . {body}")
            }
        }
    }
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetExpr::Builder { coords, body, .. } => {
                let c: Vec<&str> = coords.iter().map(|c| c.as_deref().unwrap_or("inf")).collect();
                write!(f, "{{ ({}) | {body} }}", c.join(", "))
            }
            SetExpr::Binary(op, a, b) => {
                write!(f, "{a} {} ", op.keyword())?;
                if matches!(**b, SetExpr::Binary(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            SetExpr::Closure(a) | SetExpr::Interior(a) => {
                f.write_str(if matches!(self, SetExpr::Closure(_)) { "closure " } else { "interior " })?;
                if matches!(**a, SetExpr::Binary(..)) {
                    write!(f, "({a})")
                } else {
                    write!(f, "{a}")
                }
            }
            SetExpr::Name(n, _) => f.write_str(n),
        }
    }
}

impl fmt::Display for CellBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellBound::Form(t) => write!(f, "{t}"),
            CellBound::Inf => f.write_str("inf"),
            CellBound::NegInf => f.write_str("-inf"),
        }
    }
}

/// Renders a cell as `[(0, inf), {x1}, (0, x1)]`.
pub fn fmt_cell_slots(slots: &[CellSlot]) -> String {
    let parts: Vec<String> = slots
        .iter()
        .map(|s| match s {
            CellSlot::Graph(b) => format!("{{{b}}}"),
            CellSlot::Band(a, b) => format!("({a}, {b})"),
        })
        .collect();
    format!("[{}]", parts.join(", "))
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Check(n, None) => write!(f, "check {n}"),
            Command::Check(n, Some(p)) => write!(f, "check {n} {}", p.keyword()),
            Command::Components(n) => write!(f, "components {n}"),
            Command::Betti(n) => write!(f, "betti {n}"),
            Command::BettiC(n) => write!(f, "betti_c {n}"),
            Command::Closure(n) => write!(f, "closure {n}"),
            Command::Mv(x, u, v) => write!(f, "mv {x} {u} {v}"),
            Command::Homotopy(n, a, b) => write!(f, "homotopy {n} {a} {b}"),
            Command::Scan(n, p) => write!(f, "scan {n} by {p}"),
            Command::Table(c, t, s) => write!(f, "table {} {} {}", fmt_cell_slots(c), fmt_rat(t), fmt_rat(s)),
        }
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            match item {
                Item::Decl(d) => match &d.param {
                    None => writeln!(f, "set {} in G^{} = {};", d.name, d.dim, d.expr)?,
                    Some(p) => writeln!(f, "family {} in G^{} by {p} = {};", d.name, d.dim, d.expr)?,
                },
                Item::Command(c) => writeln!(f, "{};", c.command)?,
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------- lexing

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Sym(&'static str),
    Eof,
}

const SYMBOLS: [&str; 22] = [
    "/\\", "\\/", "<=", ">=", "{", "}", "(", ")", "[", "]", "|", ",", ";", ".", "<", "=", ">", "+", "-", "*", "/", "^",
];

fn lex(src: &str) -> Result<Vec<(Tok, Span)>, DslError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'#' || (c == b'/' && bytes.get(i + 1) == Some(&b'/')) {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), Span { start, end: i }));
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            out.push((Tok::Num(src[start..i].to_string()), Span { start, end: i }));
            continue;
        }
        match SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            Some(s) => {
                i += s.len();
                out.push((Tok::Sym(s), Span { start, end: i }));
            }
            None => {
                let ch = src[i..].chars().next().unwrap();
                return Err(DslError::new(
                    ErrorKind::Syntax,
                    src,
                    Span { start, end: start + ch.len_utf8() },
                    format!("unexpected character {ch:?}"),
                ));
            }
        }
    }
    out.push((Tok::Eof, Span { start: src.len(), end: src.len() }));
    Ok(out)
}

// ---------------------------------------------------------------- parsing

const RESERVED: [&str; 15] = [
    "set", "family", "in", "by", "union", "intersect", "minus", "closure", "interior", "not", "exists", "forall",
    "inf", "true", "false",
];

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

type PResult<T> = Result<T, DslError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(DslError::new(ErrorKind::Syntax, self.src, self.span(), msg))
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Num(s) => format!("number {s}"),
            Tok::Sym(s) => format!("'{s}'"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<Span> {
        if self.is_sym(s) {
            Ok(self.bump().1)
        } else {
            self.error(format!("expected '{s}', found {}", Self::describe(self.peek())))
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<Span> {
        if self.is_kw(s) {
            Ok(self.bump().1)
        } else {
            self.error(format!("expected '{s}', found {}", Self::describe(self.peek())))
        }
    }

    fn name(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                let sp = self.bump().1;
                Ok((s, sp))
            }
            t => self.error(format!("expected a name, found {}", Self::describe(&t))),
        }
    }

    fn int(&mut self) -> PResult<usize> {
        match self.peek().clone() {
            Tok::Num(s) if s.chars().all(|c| c.is_ascii_digit()) => {
                let sp = self.span();
                self.bump();
                s.parse().map_err(|_| DslError::new(ErrorKind::Syntax, self.src, sp, "integer too large"))
            }
            t => self.error(format!("expected an integer, found {}", Self::describe(&t))),
        }
    }

    /// `p`, `p/q` or a decimal.
    fn number(&mut self) -> PResult<Rat> {
        let Tok::Num(a) = self.peek().clone() else {
            return self.error(format!("expected a number, found {}", Self::describe(self.peek())));
        };
        let sp = self.bump().1;
        let text = if self.is_sym("/") && matches!(self.toks[self.pos + 1].0, Tok::Num(_)) {
            self.bump();
            let Tok::Num(b) = self.bump().0 else { unreachable!() };
            format!("{a}/{b}")
        } else {
            a
        };
        parse_rat(&text).map_err(|e| DslError::new(ErrorKind::Syntax, self.src, sp.to(self.prev_span()), e.to_string()))
    }

    /// A signed number or `inf`.
    fn ext_number(&mut self) -> PResult<ExtRat> {
        if self.eat_kw("inf") {
            return Ok(ExtRat::PosInf);
        }
        let neg = self.eat_sym("-");
        let v = self.number()?;
        Ok(ExtRat::Finite(if neg { -v } else { v }))
    }

    fn script(&mut self) -> PResult<Script> {
        let mut items = Vec::new();
        while *self.peek() != Tok::Eof {
            items.push(self.item()?);
        }
        Ok(Script { items })
    }

    fn item(&mut self) -> PResult<Item> {
        let start = self.span();
        if self.is_kw("set") || self.is_kw("family") {
            let family = self.is_kw("family");
            self.bump();
            let (name, _) = self.name()?;
            self.expect_kw("in")?;
            match self.peek() {
                Tok::Ident(g) if g == "G" => {
                    self.bump();
                }
                t => return self.error(format!("expected 'G^n', found {}", Self::describe(t))),
            }
            self.expect_sym("^")?;
            let dim = self.int()?;
            let param = if family {
                self.expect_kw("by")?;
                Some(self.name()?.0)
            } else {
                None
            };
            self.expect_sym("=")?;
            let expr = self.set_expr()?;
            let end = self.expect_sym(";")?;
            return Ok(Item::Decl(Decl { name, dim, param, expr, span: start.to(end) }));
        }
        let command = self.command()?;
        let end = self.expect_sym(";")?;
        Ok(Item::Command(CommandItem { command, span: start.to(end) }))
    }

    fn command(&mut self) -> PResult<Command> {
        let Tok::Ident(kw) = self.peek().clone() else {
            return self.error(format!("expected a declaration or command, found {}", Self::describe(self.peek())));
        };
        let cmd = match kw.as_str() {
            "check" => {
                self.bump();
                let (n, _) = self.name()?;
                let prop = match self.peek() {
                    Tok::Ident(p) => match Property::ALL.iter().find(|q| q.keyword() == p) {
                        Some(q) => {
                            let q = *q;
                            self.bump();
                            Some(q)
                        }
                        None => return self.error(format!("unknown property '{p}'")),
                    },
                    _ => None,
                };
                Command::Check(n, prop)
            }
            "components" | "betti" | "betti_c" | "closure" => {
                self.bump();
                let (n, _) = self.name()?;
                match kw.as_str() {
                    "components" => Command::Components(n),
                    "betti" => Command::Betti(n),
                    "betti_c" => Command::BettiC(n),
                    _ => Command::Closure(n),
                }
            }
            "mv" => {
                self.bump();
                Command::Mv(self.name()?.0, self.name()?.0, self.name()?.0)
            }
            "homotopy" => {
                self.bump();
                let (n, _) = self.name()?;
                Command::Homotopy(n, self.ext_number()?, self.ext_number()?)
            }
            "scan" => {
                self.bump();
                let (n, _) = self.name()?;
                self.expect_kw("by")?;
                Command::Scan(n, self.name()?.0)
            }
            "table" => {
                self.bump();
                let slots = self.cell_slots()?;
                Command::Table(slots, self.number()?, self.number()?)
            }
            _ => return self.error(format!("unknown command '{kw}'")),
        };
        Ok(cmd)
    }

    fn cell_slots(&mut self) -> PResult<Vec<CellSlot>> {
        self.expect_sym("[")?;
        let mut slots = Vec::new();
        loop {
            if self.eat_sym("{") {
                let b = self.cell_bound()?;
                self.expect_sym("}")?;
                slots.push(CellSlot::Graph(b));
            } else {
                self.expect_sym("(")?;
                let a = self.cell_bound()?;
                self.expect_sym(",")?;
                let b = self.cell_bound()?;
                self.expect_sym(")")?;
                slots.push(CellSlot::Band(a, b));
            }
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym("]")?;
        Ok(slots)
    }

    fn cell_bound(&mut self) -> PResult<CellBound> {
        let t = self.lin_term()?;
        let one = Rat::one();
        Ok(match t.parts.as_slice() {
            [(c, Some(TermAtom::Inf))] if *c == one => CellBound::Inf,
            [(c, Some(TermAtom::Inf))] if *c == -one => CellBound::NegInf,
            _ => CellBound::Form(t),
        })
    }

    fn set_expr(&mut self) -> PResult<SetExpr> {
        let mut left = self.set_unary()?;
        loop {
            let op = if self.eat_kw("union") {
                SetOp::Union
            } else if self.eat_kw("intersect") {
                SetOp::Intersect
            } else if self.eat_kw("minus") {
                SetOp::Minus
            } else {
                return Ok(left);
            };
            let right = self.set_unary()?;
            left = SetExpr::Binary(op, Box::new(left), Box::new(right));
        }
    }

    fn set_unary(&mut self) -> PResult<SetExpr> {
        if self.eat_kw("closure") {
            return Ok(SetExpr::Closure(Box::new(self.set_unary()?)));
        }
        if self.eat_kw("interior") {
            return Ok(SetExpr::Interior(Box::new(self.set_unary()?)));
        }
        if self.eat_sym("(") {
            let e = self.set_expr()?;
            self.expect_sym(")")?;
            return Ok(e);
        }
        if self.is_sym("{") {
            let start = self.bump().1;
            self.expect_sym("(")?;
            let mut coords = Vec::new();
            loop {
                if self.eat_kw("inf") {
                    coords.push(None);
                } else {
                    coords.push(Some(self.name()?.0));
                }
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym(")")?;
            self.expect_sym("|")?;
            let body = self.formula()?;
            let end = self.expect_sym("}")?;
            return Ok(SetExpr::Builder { coords, body, span: start.to(end) });
        }
        let (n, sp) = self.name()?;
        Ok(SetExpr::Name(n, sp))
    }

    fn formula(&mut self) -> PResult<Formula> {
        let mut left = self.conj()?;
        while self.eat_sym("\\/") {
            let right = self.conj()?;
            left = Formula::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn conj(&mut self) -> PResult<Formula> {
        let mut left = self.neg()?;
        while self.eat_sym("/\\") {
            let right = self.neg()?;
            left = Formula::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn neg(&mut self) -> PResult<Formula> {
        if self.eat_kw("not") {
            return Ok(Formula::Not(Box::new(self.neg()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Formula> {
        if self.eat_sym("(") {
            let f = self.formula()?;
            self.expect_sym(")")?;
            return Ok(f);
        }
        for (kw, q) in [("exists", Quantifier::Exists), ("forall", Quantifier::Forall)] {
            if self.eat_kw(kw) {
                let (v, _) = self.name()?;
                self.expect_sym(".")?;
                return Ok(Formula::Quant(q, v, Box::new(self.formula()?)));
            }
        }
        if self.eat_kw("true") {
            return Ok(Formula::True);
        }
        if self.eat_kw("false") {
            return Ok(Formula::False);
        }
        let mut terms = vec![self.lin_term()?];
        let mut rels = Vec::new();
        while let Some(r) = self.rel() {
            rels.push(r);
            terms.push(self.lin_term()?);
        }
        if rels.is_empty() {
            return self.error(format!("expected a comparison, found {}", Self::describe(self.peek())));
        }
        Ok(Formula::Compare { terms, rels })
    }

    fn rel(&mut self) -> Option<RelOp> {
        let r = match self.peek() {
            Tok::Sym("<") => RelOp::Lt,
            Tok::Sym("<=") => RelOp::Le,
            Tok::Sym("=") => RelOp::Eq,
            Tok::Sym(">=") => RelOp::Ge,
            Tok::Sym(">") => RelOp::Gt,
            _ => return None,
        };
        self.bump();
        Some(r)
    }

    fn lin_term(&mut self) -> PResult<LinTerm> {
        let start = self.span();
        let mut parts = Vec::new();
        let mut sign = if self.eat_sym("-") {
            -Rat::one()
        } else {
            self.eat_sym("+");
            Rat::one()
        };
        loop {
            let (c, atom) = self.term()?;
            parts.push((sign * c, atom));
            sign = if self.eat_sym("+") {
                Rat::one()
            } else if self.eat_sym("-") {
                -Rat::one()
            } else {
                break;
            };
        }
        Ok(LinTerm { parts, span: start.to(self.prev_span()) })
    }

    fn term(&mut self) -> PResult<(Rat, Option<TermAtom>)> {
        if matches!(self.peek(), Tok::Num(_)) {
            let c = self.number()?;
            let explicit = self.eat_sym("*");
            if explicit || matches!(self.peek(), Tok::Ident(s) if s == "inf" || !RESERVED.contains(&s.as_str())) {
                return Ok((c, Some(self.term_atom()?)));
            }
            return Ok((c, None));
        }
        Ok((Rat::one(), Some(self.term_atom()?)))
    }

    fn term_atom(&mut self) -> PResult<TermAtom> {
        if self.eat_kw("inf") {
            return Ok(TermAtom::Inf);
        }
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.bump();
                Ok(TermAtom::Var(s))
            }
            t => self.error(format!("expected a variable or number, found {}", Self::describe(&t))),
        }
    }
}

/// Parses a script.
pub fn parse(src: &str) -> Result<Script, DslError> {
    let toks = lex(src)?;
    Parser { src, toks, pos: 0 }.script()
}

// ---------------------------------------------------------------- loading

/// A declared set together with the coordinate names of its first
/// set-builder, used to resolve parameters by name.
#[derive(Clone, Debug)]
pub struct Declared {
    pub set: SemilinearSet,
    pub names: Vec<Option<String>>,
    pub param: Option<usize>,
}

/// A script whose declarations have been evaluated.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub sets: HashMap<String, Declared>,
    pub order: Vec<String>,
    pub commands: Vec<CommandItem>,
}

struct Loader<'a> {
    src: &'a str,
    sets: HashMap<String, Declared>,
}

impl<'a> Loader<'a> {
    fn err<T>(&self, span: Span, msg: impl Into<String>) -> Result<T, DslError> {
        Err(DslError::new(ErrorKind::Semantic, self.src, span, msg))
    }

    fn lookup(&self, name: &str, span: Span) -> Result<&Declared, DslError> {
        match self.sets.get(name) {
            Some(d) => Ok(d),
            None => self.err(span, format!("unknown set '{name}'")),
        }
    }

    fn eval(&self, e: &SetExpr, dim: usize) -> Result<(SemilinearSet, Vec<Option<String>>), DslError> {
        match e {
            SetExpr::Builder { coords, body, span } => {
                if coords.len() != dim {
                    return self.err(*span, format!("tuple has {} entries but the set lives in G^{dim}", coords.len()));
                }
                let mut vars = HashMap::new();
                for (i, c) in coords.iter().enumerate() {
                    if let Some(v) = c {
                        if vars.insert(v.clone(), i).is_some() {
                            return self.err(*span, format!("coordinate '{v}' is named twice"));
                        }
                    }
                }
                let l = Support::from_coords(vars.values().copied());
                let region = self.formula(body, &vars, &l.coords(), dim)?;
                Ok((SemilinearSet::from_piece(dim, l, region), coords.clone()))
            }
            SetExpr::Binary(op, a, b) => {
                let (x, names) = self.eval(a, dim)?;
                let (y, other) = self.eval(b, dim)?;
                let names = if names.is_empty() { other } else { names };
                let s = match op {
                    SetOp::Union => x.union(&y),
                    SetOp::Intersect => x.intersect(&y),
                    SetOp::Minus => x.difference(&y),
                };
                Ok((s, names))
            }
            SetExpr::Closure(a) => {
                let (x, names) = self.eval(a, dim)?;
                Ok((x.closure(), names))
            }
            SetExpr::Interior(a) => {
                let (x, names) = self.eval(a, dim)?;
                Ok((x.interior(), names))
            }
            SetExpr::Name(n, span) => {
                let d = self.lookup(n, *span)?;
                if d.set.ambient_dim() != dim {
                    return self.err(*span, format!("'{n}' lives in G^{}, not G^{dim}", d.set.ambient_dim()));
                }
                Ok((d.set.clone(), d.names.clone()))
            }
        }
    }

    fn formula(
        &self,
        f: &Formula,
        vars: &HashMap<String, usize>,
        scope: &BTreeSet<usize>,
        next: usize,
    ) -> Result<Region, DslError> {
        Ok(match f {
            Formula::True => Region::universe(scope.clone()),
            Formula::False => Region::empty(scope.clone()),
            Formula::Compare { terms, rels } => {
                let forms = terms.iter().map(|t| self.lin_form(t, vars)).collect::<Result<Vec<_>, _>>()?;
                let atoms = rels
                    .iter()
                    .enumerate()
                    .map(|(k, r)| {
                        let (a, b) = (&forms[k], &forms[k + 1]);
                        match r {
                            RelOp::Lt => Atom::less(a, b),
                            RelOp::Le => Atom::less_eq(a, b),
                            RelOp::Eq => Atom::equal(a, b),
                            RelOp::Ge => Atom::less_eq(b, a),
                            RelOp::Gt => Atom::less(b, a),
                        }
                    })
                    .collect();
                Region::from_atoms(scope.clone(), atoms)
            }
            Formula::Not(a) => self.formula(a, vars, scope, next)?.complement(),
            Formula::And(a, b) => self.formula(a, vars, scope, next)?.intersect(&self.formula(b, vars, scope, next)?),
            Formula::Or(a, b) => self.formula(a, vars, scope, next)?.union(&self.formula(b, vars, scope, next)?),
            Formula::Quant(q, v, body) => {
                let mut inner = vars.clone();
                inner.insert(v.clone(), next);
                let mut s = scope.clone();
                s.insert(next);
                let r = self.formula(body, &inner, &s, next + 1)?;
                qe(&[(*q, next)], &r)
            }
        })
    }

    fn lin_form(&self, t: &LinTerm, vars: &HashMap<String, usize>) -> Result<LinForm, DslError> {
        let mut out = LinForm::zero();
        for (c, atom) in &t.parts {
            match atom {
                None => out = &out + &LinForm::constant(c.clone()),
                Some(TermAtom::Var(v)) => match vars.get(v) {
                    Some(i) => out = &out + &LinForm::term(*i, c.clone()),
                    None => return self.err(t.span, format!("unknown variable '{v}'")),
                },
                Some(TermAtom::Inf) if c.is_negative() => return self.err(t.span, "subtraction of inf"),
                Some(TermAtom::Inf) => {
                    return self.err(t.span, "inf cannot appear in a linear term; put it in the tuple instead")
                }
            }
        }
        Ok(out)
    }
}

/// Evaluates the declarations of a script and checks its commands.
pub fn load(src: &str, script: &Script) -> Result<Loaded, DslError> {
    let mut loader = Loader { src, sets: HashMap::new() };
    let mut order = Vec::new();
    let mut commands = Vec::new();
    for item in &script.items {
        match item {
            Item::Decl(d) => {
                if loader.sets.contains_key(&d.name) {
                    return loader.err(d.span, format!("'{}' is declared twice", d.name));
                }
                if d.dim == 0 || d.dim >= 16 {
                    return loader.err(d.span, format!("ambient dimension {} is out of range 1..15", d.dim));
                }
                let (set, names) = loader.eval(&d.expr, d.dim)?;
                let param = match &d.param {
                    None => None,
                    Some(p) => match names.iter().position(|n| n.as_deref() == Some(p.as_str())) {
                        Some(i) => Some(i),
                        None => return loader.err(d.span, format!("parameter '{p}' is not a coordinate of the tuple")),
                    },
                };
                loader.sets.insert(d.name.clone(), Declared { set, names, param });
                order.push(d.name.clone());
            }
            Item::Command(c) => {
                check_command(&loader, c)?;
                commands.push(c.clone());
            }
        }
    }
    Ok(Loaded { sets: loader.sets, order, commands })
}

fn check_command(l: &Loader, c: &CommandItem) -> Result<(), DslError> {
    let names: Vec<&String> = match &c.command {
        Command::Check(n, _)
        | Command::Components(n)
        | Command::Betti(n)
        | Command::BettiC(n)
        | Command::Closure(n)
        | Command::Homotopy(n, ..)
        | Command::Scan(n, _) => vec![n],
        Command::Mv(x, u, v) => vec![x, u, v],
        Command::Table(..) => vec![],
    };
    for n in &names {
        l.lookup(n, c.span)?;
    }
    match &c.command {
        Command::Mv(x, u, v) => {
            let d = l.sets[x.as_str()].set.ambient_dim();
            for n in [u, v] {
                if l.sets[n.as_str()].set.ambient_dim() != d {
                    return l.err(c.span, format!("'{n}' and '{x}' live in different dimensions"));
                }
            }
        }
        Command::Scan(n, p) => {
            param_position(&l.sets[n.as_str()], p).ok_or_else(|| {
                DslError::new(ErrorKind::Semantic, l.src, c.span, format!("'{p}' is not a coordinate of '{n}'"))
            })?;
        }
        Command::Table(slots, t, s) => {
            if !t.is_positive() || !s.is_positive() {
                return l.err(c.span, "t and s must be positive");
            }
            build_cell(slots).map_err(|m| DslError::new(ErrorKind::Semantic, l.src, c.span, m))?;
        }
        _ => {}
    }
    Ok(())
}

fn param_position(d: &Declared, p: &str) -> Option<usize> {
    d.names.iter().position(|n| n.as_deref() == Some(p))
}

/// Builds a cell from its textual description.
pub fn build_cell(slots: &[CellSlot]) -> Result<std::sync::Arc<Cell>, String> {
    let mut cell = Cell::root();
    for (k, slot) in slots.iter().enumerate() {
        let vars: HashMap<String, usize> = (0..k).map(|i| (format!("x{}", i + 1), i)).collect();
        let to_fn = |b: &CellBound| -> Result<CellFn, String> {
            match b {
                CellBound::Inf => Ok(CellFn::ConstInf),
                CellBound::NegInf => Ok(CellFn::ConstNegInfBound),
                CellBound::Form(t) => {
                    let mut out = LinForm::zero();
                    for (c, atom) in &t.parts {
                        match atom {
                            None => out = &out + &LinForm::constant(c.clone()),
                            Some(TermAtom::Var(v)) => match vars.get(v) {
                                Some(i) => out = &out + &LinForm::term(*i, c.clone()),
                                None => return Err(format!("slot {} may only use x1..x{k}, found '{v}'", k + 1)),
                            },
                            Some(TermAtom::Inf) => return Err("inf inside a bound".into()),
                        }
                    }
                    Ok(CellFn::Affine(out))
                }
            }
        };
        cell = match slot {
            CellSlot::Graph(b) => Cell::graph(&cell, to_fn(b)?),
            CellSlot::Band(a, b) => Cell::band(&cell, to_fn(a)?, to_fn(b)?),
        }
        .map_err(|e| e.to_string())?;
    }
    Ok(cell)
}

// ---------------------------------------------------------------- running

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub coeff: CoeffRing,
    pub seed: u64,
    /// Stop at the first failing command.
    pub strict: bool,
    /// Run extra symbolic audits and report disagreements.
    pub validate: bool,
    pub parallel: bool,
    /// Record wall-clock times; when off every `ms` is 0.
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { coeff: CoeffRing::Q, seed: 0, strict: false, validate: false, parallel: false, timing: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub input: String,
    pub ok: bool,
    pub result: Value,
    pub diagnostics: Vec<String>,
    pub ms: f64,
}

/// Runs every command of a loaded script, in order.
pub fn run(loaded: &Loaded, opts: &RunOptions) -> Vec<Report> {
    let one = |c: &CommandItem| {
        let t0 = Instant::now();
        let mut r = run_command(loaded, &c.command, opts);
        r.ms = if opts.timing { (t0.elapsed().as_secs_f64() * 1e6).round() / 1e3 } else { 0.0 };
        r
    };
    let mut reports: Vec<Report> = if opts.parallel {
        loaded.commands.par_iter().map(one).collect()
    } else if opts.strict {
        let mut out = Vec::new();
        for c in &loaded.commands {
            let r = one(c);
            let stop = !r.ok;
            out.push(r);
            if stop {
                break;
            }
        }
        out
    } else {
        loaded.commands.iter().map(one).collect()
    };
    if opts.strict {
        if let Some(k) = reports.iter().position(|r| !r.ok) {
            reports.truncate(k + 1);
        }
    }
    reports
}

/// Parses, loads and runs a script.
pub fn run_source(src: &str, opts: &RunOptions) -> Result<Vec<Report>, DslError> {
    let script = parse(src)?;
    let loaded = load(src, &script)?;
    Ok(run(&loaded, opts))
}

/// The stable JSON document for a list of reports.
pub fn reports_json(reports: &[Report]) -> Value {
    json!({ "version": 1, "reports": reports })
}

/// The JSON document for a script that failed to parse or load.
pub fn error_json(e: &DslError) -> Value {
    json!({ "version": 1, "error": e, "reports": [] })
}

fn ext_json(v: &ExtRat) -> Value {
    Value::String(v.to_string())
}

fn opt_ext_json(v: Option<ExtRat>) -> Value {
    v.map_or(Value::Null, |x| ext_json(&x))
}

/// JSON form of a family partition.
pub fn partition_json(p: &FamilyPartition) -> Value {
    let pieces: Vec<Value> = p
        .pieces
        .iter()
        .map(|piece| {
            let mut o = json!({
                "interval": {
                    "kind": piece.interval.kind(),
                    "lo": opt_ext_json(piece.interval.lo()),
                    "hi": opt_ext_json(piece.interval.hi()),
                },
                "sample": ext_json(&piece.sample),
                "pi0": piece.record.as_ref().map(|r| r.pi0),
                "certified": piece.certified,
                "resampled": piece.resampled.iter().map(ext_json).collect::<Vec<_>>(),
                "diagnostics": piece.diagnostics,
            });
            if let Some(r) = &piece.record {
                if let Some(b) = &r.betti {
                    o["betti"] = json!(b);
                }
                if let Some(b) = &r.betti_c {
                    o["betti_c"] = json!(b);
                }
            }
            o
        })
        .collect();
    json!({ "pieces": pieces, "axis_cells": p.axis_cells, "certified": p.certified() })
}

fn failure(command: &Command, input: String, msg: String) -> Report {
    Report { command: command.to_string(), input, ok: false, result: Value::Null, diagnostics: vec![msg], ms: 0.0 }
}

fn run_command(l: &Loaded, command: &Command, opts: &RunOptions) -> Report {
    let set = |n: &str| &l.sets[n].set;
    let mut diagnostics = Vec::new();
    let input = match command {
        Command::Mv(x, u, v) => format!("{x} {u} {v}"),
        Command::Table(slots, ..) => fmt_cell_slots(slots),
        Command::Check(n, _)
        | Command::Components(n)
        | Command::Betti(n)
        | Command::BettiC(n)
        | Command::Closure(n)
        | Command::Homotopy(n, ..)
        | Command::Scan(n, _) => n.clone(),
    };
    let mut ok = true;
    let result: Value = match command {
        Command::Check(n, prop) => {
            let s = set(n);
            let props: Vec<Property> = prop.map_or(Property::ALL.to_vec(), |p| vec![p]);
            let mut o = serde_json::Map::new();
            for p in props {
                let v = match p {
                    Property::Open => s.is_open(),
                    Property::Closed => s.is_closed(),
                    Property::LocallyClosed => match s.local_closure_witness() {
                        None => true,
                        Some(w) => {
                            diagnostics.push(format!("not open in its closure near {}", fmt_point(&w)));
                            false
                        }
                    },
                    Property::Bounded => s.is_bounded(),
                    Property::Compact => s.is_definably_compact(),
                };
                o.insert(p.keyword().to_string(), Value::Bool(v));
            }
            Value::Object(o)
        }
        Command::Components(n) => {
            let comps = connected_components(set(n));
            json!({ "count": comps.len(), "components": comps.iter().map(ToString::to_string).collect::<Vec<_>>() })
        }
        Command::Betti(n) | Command::BettiC(n) => {
            let r = if matches!(command, Command::Betti(_)) {
                cohom::betti(set(n), opts.coeff)
            } else {
                betti_c(set(n), opts.coeff)
            };
            match r {
                Err(e) => return failure(command, input, e.to_string()),
                Ok(r) => {
                    if opts.validate {
                        audit_betti(set(n), &r, matches!(command, Command::Betti(_)), &mut diagnostics, &mut ok);
                    }
                    json!(r)
                }
            }
        }
        Command::Closure(n) => {
            let c = set(n).closure();
            if opts.validate && !closure_by_qe(set(n)).set_eq(&c) {
                ok = false;
                diagnostics.push("audit: closure disagrees with the quantifier-elimination closure".into());
            }
            json!({ "set": c.to_string(), "closed": c.is_closed() })
        }
        Command::Mv(x, u, v) => match mv_check(set(x), set(u), set(v), opts.coeff) {
            Err(e) => return failure(command, input, e.to_string()),
            Ok(r) => {
                if opts.validate && !r.exact {
                    ok = false;
                    diagnostics.push(format!("audit: sequence is not exact at {}", r.failures.join(", ")));
                }
                json!(r)
            }
        },
        Command::Homotopy(n, a, b) => match homotopy_check(set(n), a, b, opts.coeff) {
            Err(e) => return failure(command, input, e.to_string()),
            Ok(r) => json!(r),
        },
        Command::Scan(n, p) => {
            let d = &l.sets[n.as_str()];
            let pos = param_position(d, p).expect("checked at load time");
            let dim = d.set.ambient_dim();
            // move the parameter to the last coordinate
            let perm: Vec<usize> = (0..dim)
                .map(|i| if i == pos { dim - 1 } else if i > pos { i - 1 } else { i })
                .collect();
            let z = d.set.permute(&perm);
            let part = family_scan(&z, &ScanOptions { coeff: opts.coeff, seed: opts.seed, ..ScanOptions::default() });
            if !part.certified() {
                diagnostics.push("resampling found a piece whose fibers differ".into());
                if opts.validate {
                    ok = false;
                }
            }
            partition_json(&part)
        }
        Command::Table(slots, t, s) => {
            let cell = match build_cell(slots) {
                Ok(c) => c,
                Err(e) => return failure(command, input, e),
            };
            match complement_table(&cell, t, s, opts.coeff) {
                Err(e) => return failure(command, input, e.to_string()),
                Ok(r) => {
                    let core = cell_core(&cell, t, s).map(|k| k.to_string()).unwrap_or_default();
                    json!({ "cell": cell.describe(), "dimension": cell.dimension(), "core": core, "betti": r })
                }
            }
        }
    };
    Report { command: command.to_string(), input, ok, result, diagnostics, ms: 0.0 }
}

fn audit_betti(s: &SemilinearSet, r: &BettiReport, compact: bool, diagnostics: &mut Vec<String>, ok: &mut bool) {
    let dim = s.dimension();
    if r.ranks.len() as i64 > dim + 1 {
        *ok = false;
        diagnostics.push(format!("audit: nonzero cohomology above dimension {dim}"));
    }
    if compact {
        let comps = connected_components(s).len();
        if r.rank(0) != comps {
            *ok = false;
            diagnostics.push(format!("audit: H^0 has rank {} but there are {comps} components", r.rank(0)));
        }
    }
    let euler: i64 = r.ranks.iter().enumerate().map(|(p, b)| if p % 2 == 0 { *b as i64 } else { -(*b as i64) }).sum();
    if euler != r.euler {
        *ok = false;
        diagnostics.push("audit: Euler characteristic mismatch".into());
    }
}

/// Exit status for a finished run: 0 when every command succeeded, else 1.
pub fn exit_code(reports: &[Report]) -> i32 {
    if reports.iter().all(|r| r.ok) {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlin::rat;
    use proptest::prelude::*;

    fn load_src(src: &str) -> Loaded {
        load(src, &parse(src).unwrap()).unwrap()
    }

    fn quiet() -> RunOptions {
        RunOptions { timing: false, ..RunOptions::default() }
    }

    #[test]
    fn parse_examples() {
        let l = load_src("set S in G^1 = { (x) | 0 <= x /\\ x <= 1 };");
        assert!(l.sets["S"].set.set_eq(&crate::testutil::interval(0, 1)));

        let l = load_src("set R in G^2 = { (x, inf) | x >= 0 };");
        let r = &l.sets["R"].set;
        assert_eq!(r.pieces().keys().copied().collect::<Vec<_>>(), vec![Support::from_coords([0])]);

        let l = load_src("set P in G^1 = { (x) | exists y . x = y + y };");
        assert!(l.sets["P"].set.set_eq(&SemilinearSet::finite_universe(1)));

        let l = load_src("set C in G^1 = { (x) | 0 <= x <= 1 } minus { (x) | 0 < x < 1 };");
        assert!(l.sets["C"].set.set_eq(&crate::testutil::points1(&[0, 1])));

        let l = load_src("set F in G^1 = { (x) | forall y . (y < 0 \\/ x <= y) };");
        assert!(l.sets["F"].set.set_eq(&SemilinearSet::finite_from_atoms(1, vec![Atom::less_eq(&LinForm::var(0), &LinForm::zero())])));
    }

    #[test]
    fn syntax_errors_have_positions() {
        let e = parse("set S in G^1 = { (x) | x <= };").unwrap_err();
        assert_eq!((e.kind, e.line, e.column), (ErrorKind::Syntax, 1, 29));
        let e = parse("set S in G^1 = { (x) | x <= 1 }\nbetti S").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse("set S in G^1 = { (x) | x @ 1 };").unwrap_err();
        assert!(e.message.contains("unexpected character"));
        assert!(e.start < "set S in G^1 = { (x) | x @ 1 };".len());
    }

    #[test]
    fn semantic_errors() {
        let cases = [
            ("set S in G^1 = { (x) | y <= 1 };", "unknown variable"),
            ("set S in G^2 = { (x) | x <= 1 };", "tuple has 1 entries"),
            ("set S in G^1 = { (x) | x - inf <= 1 };", "subtraction of inf"),
            ("betti T;", "unknown set"),
            ("set S in G^1 = { (x) | x <= 1 }; set S in G^1 = S;", "declared twice"),
            ("set S in G^1 = { (x) | x <= 1 }; set T in G^2 = S;", "lives in G^1"),
        ];
        for (src, msg) in cases {
            let script = parse(src).unwrap();
            let e = load(src, &script).unwrap_err();
            assert_eq!(e.kind, ErrorKind::Semantic);
            assert!(e.message.contains(msg), "{src}: {}", e.message);
            assert!(e.end <= src.len() && e.start <= e.end);
        }
    }

    #[test]
    fn run_examples() {
        let src = "set S in G^1 = { (x) | 0 < x < 1 };\nbetti_c S;";
        let r = run_source(src, &quiet()).unwrap();
        assert!(r[0].ok);
        assert_eq!(r[0].result["ranks"], json!([0, 1]));

        let src = "set T in G^1 = { (x) | 0 <= x <= 1 \\/ 2 <= x <= 3 };\ncomponents T;";
        let r = run_source(src, &quiet()).unwrap();
        assert_eq!(r[0].result["count"], json!(2));
        assert_eq!(r[0].result["components"].as_array().unwrap().len(), 2);

        let src = "family F in G^2 by w = { (x, w) | 0 <= x <= w } union { (x, inf) | 0 <= x } union { (inf, inf) | true };\nscan F by w;";
        let r = run_source(src, &quiet()).unwrap();
        let pieces = r[0].result["pieces"].as_array().unwrap();
        let kinds: Vec<&str> = pieces.iter().map(|p| p["interval"]["kind"].as_str().unwrap()).collect();
        assert_eq!(kinds, ["below", "point", "above", "inf"]);
        let pi0: Vec<u64> = pieces.iter().map(|p| p["pi0"].as_u64().unwrap()).collect();
        assert_eq!(pi0, [0, 1, 1, 1]);
        assert_eq!(pieces[0]["interval"]["hi"], json!("0"));
        assert_eq!(pieces[0]["interval"]["lo"], Value::Null);
    }

    #[test]
    fn failing_command_is_reported_not_fatal() {
        let src = "set S in G^1 = { (x) | 0 < x < 1 };\nbetti S;\nbetti_c S;";
        let r = run_source(src, &quiet()).unwrap();
        assert_eq!(r.len(), 2);
        assert!(!r[0].ok && r[1].ok);
        assert_eq!(exit_code(&r), 1);
        let strict = run_source(src, &RunOptions { strict: true, ..quiet() }).unwrap();
        assert_eq!(strict.len(), 1);
    }

    #[test]
    fn table_and_checks() {
        let src = "table [(0, 4)] 1 3;\nset S in G^2 = { (x, y) | 0 <= x <= 1 /\\ 0 <= y <= 1 };\ncheck S;\ncheck S open;";
        let r = run_source(src, &quiet()).unwrap();
        assert_eq!(r[0].result["betti"]["ranks"], json!([2]));
        assert_eq!(r[1].result["compact"], json!(true));
        assert_eq!(r[2].result, json!({ "open": false }));
    }

    #[test]
    fn validate_mode_runs_audits() {
        let src = "set X in G^1 = { (x) | 0 <= x <= 2 };\nset U in G^1 = { (x) | 0 <= x <= 1 };\nset V in G^1 = { (x) | 1 <= x <= 2 };\nmv X U V;\nbetti X;\nclosure U;";
        let r = run_source(src, &RunOptions { validate: true, ..quiet() }).unwrap();
        assert!(r.iter().all(|x| x.ok), "{r:?}");
        assert_eq!(r[0].result["exact"], json!(true));
    }

    #[test]
    fn deterministic_and_parallel_output() {
        let src = "set S in G^2 = { (x, y) | 0 <= x <= 1 /\\ 0 <= y <= x };\nbetti S;\ncomponents S;\nbetti_c S;\ncheck S;";
        let a = reports_json(&run_source(src, &quiet()).unwrap()).to_string();
        let b = reports_json(&run_source(src, &quiet()).unwrap()).to_string();
        let c = reports_json(&run_source(src, &RunOptions { parallel: true, ..quiet() }).unwrap()).to_string();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn printing_examples() {
        let src = "set S in G^2 = closure ({ (x, inf) | -x + 1/2*x < 3 /\\ not (x = 0 \\/ x = 1) } union S0 minus S1);";
        let s = parse(src).unwrap();
        let printed = s.to_string();
        assert_eq!(parse(&printed).unwrap(), s);
        assert!(printed.contains("-x + 1/2*x < 3"));
        let c = parse("homotopy S 0 inf; table [(0, inf), {x1}, (-inf, 2*x1 - 1)] 1/2 3;").unwrap();
        assert_eq!(parse(&c.to_string()).unwrap(), c);
        assert_eq!(rat(1, 2), rat(2, 4));
    }

    fn ident() -> impl Strategy<Value = String> {
        prop::sample::select(vec!["x", "y", "z", "w", "t1"]).prop_map(String::from)
    }

    fn lin_term() -> impl Strategy<Value = LinTerm> {
        let part = (-6i64..=6, 1i64..=3, prop::option::of(ident()))
            .prop_map(|(n, d, v)| (rat(n, d), v.map(TermAtom::Var)));
        prop::collection::vec(part, 1..4).prop_map(|parts| LinTerm { parts, span: Span::default() })
    }

    fn formula() -> impl Strategy<Value = Formula> {
        let rel = prop::sample::select(vec![RelOp::Lt, RelOp::Le, RelOp::Eq, RelOp::Ge, RelOp::Gt]);
        let leaf = prop_oneof![
            Just(Formula::True),
            Just(Formula::False),
            (prop::collection::vec(lin_term(), 2..4), prop::collection::vec(rel, 3)).prop_map(|(terms, rels)| {
                let rels = rels[..terms.len() - 1].to_vec();
                Formula::Compare { terms, rels }
            }),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|f| Formula::Not(Box::new(f))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::And(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::Or(Box::new(a), Box::new(b))),
                (any::<bool>(), ident(), inner).prop_map(|(e, v, f)| {
                    Formula::Quant(if e { Quantifier::Exists } else { Quantifier::Forall }, v, Box::new(f))
                }),
            ]
        })
    }

    fn set_expr() -> impl Strategy<Value = SetExpr> {
        let leaf = prop_oneof![
            (prop::collection::vec(prop::option::of(ident()), 1..4), formula())
                .prop_map(|(coords, body)| SetExpr::Builder { coords, body, span: Span::default() }),
            prop::sample::select(vec!["A", "B"]).prop_map(|n| SetExpr::Name(n.to_string(), Span::default())),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            let op = prop::sample::select(vec![SetOp::Union, SetOp::Intersect, SetOp::Minus]);
            prop_oneof![
                (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| SetExpr::Binary(o, Box::new(a), Box::new(b))),
                inner.clone().prop_map(|a| SetExpr::Closure(Box::new(a))),
                inner.prop_map(|a| SetExpr::Interior(Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_round_trips(
            exprs in prop::collection::vec((set_expr(), 1usize..4, prop::option::of(ident())), 1..3),
            extra in any::<bool>(),
        ) {
            let mut items: Vec<Item> = exprs
                .into_iter()
                .enumerate()
                .map(|(k, (expr, dim, param))| Item::Decl(Decl { name: format!("S{k}"), dim, param, expr, span: Span::default() }))
                .collect();
            if extra {
                items.push(Item::Command(CommandItem { command: Command::Homotopy("S0".into(), ExtRat::Finite(rat(-1, 2)), ExtRat::PosInf), span: Span::default() }));
                items.push(Item::Command(CommandItem { command: Command::Check("S0".into(), Some(Property::LocallyClosed)), span: Span::default() }));
            }
            let script = Script { items };
            let text = script.to_string();
            let back = parse(&text);
            prop_assert!(back.is_ok(), "{}\n{:?}", text, back);
            prop_assert_eq!(back.unwrap(), script);
        }

        #[test]
        fn error_spans_lie_inside_the_text(cut in 0usize..60) {
            let src = "set S in G^2 = { (x, y) | 0 <= x /\\ x < y }; betti_c S; mv S S S;";
            let text = &src[..cut.min(src.len())];
            if let Err(e) = parse(text).and_then(|s| load(text, &s).map(|_| ())) {
                prop_assert!(e.start <= text.len() && e.end <= text.len());
            }
        }
    }
}
