//! Exact linear arithmetic over the divisible ordered group `(ℚ, <, +)`.
//!
//! Sets are kept in disjunctive normal form: a [`Region`] is a finite union of
//! [`Polyhedron`]s, each a conjunction of [`Atom`]s `form rel 0`. Projection is
//! Fourier–Motzkin with exact strictness tracking, and full quantifier
//! elimination is obtained from projection and complementation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// An exact rational number in lowest terms.
pub type Rat = BigRational;

/// Shorthand for the rational `n/d`.
pub fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Shorthand for the integer `n` as a rational.
pub fn int(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Formats a rational as `p` or `p/q`.
pub fn fmt_rat(q: &Rat) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `p`, `-p`, `p/q` or a decimal `a.b` into a rational.
pub fn parse_rat(s: &str) -> Result<Rat, QlinError> {
    let s = s.trim();
    let bad = || QlinError::ParseRat(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((a, b)) = s.split_once('.') {
        let neg = a.starts_with('-');
        let whole: BigInt = if a.is_empty() || a == "-" {
            BigInt::zero()
        } else {
            a.parse().map_err(|_| bad())?
        };
        if b.is_empty() || !b.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let frac: BigInt = b.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), b.len());
        let frac = BigRational::new(frac, scale);
        let whole = BigRational::from_integer(whole);
        return Ok(if neg { whole - frac } else { whole + frac });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QlinError {
    #[error("subtraction involving inf has no value")]
    InfSubtraction,
    #[error("cannot parse rational `{0}`")]
    ParseRat(String),
}

/// An element of `Γ∞ = ℚ ∪ {∞}`.
///
/// The derived order puts every finite value below `PosInf`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtRat {
    Finite(Rat),
    PosInf,
}

impl ExtRat {
    pub fn int(n: i64) -> Self {
        ExtRat::Finite(int(n))
    }

    pub fn finite(&self) -> Option<&Rat> {
        match self {
            ExtRat::Finite(q) => Some(q),
            ExtRat::PosInf => None,
        }
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, ExtRat::PosInf)
    }

    /// `self − other`; rejected whenever either side is `∞`.
    pub fn checked_sub(&self, other: &ExtRat) -> Result<ExtRat, QlinError> {
        match (self, other) {
            (ExtRat::Finite(a), ExtRat::Finite(b)) => Ok(ExtRat::Finite(a - b)),
            _ => Err(QlinError::InfSubtraction),
        }
    }
}

impl Add for &ExtRat {
    type Output = ExtRat;
    fn add(self, rhs: &ExtRat) -> ExtRat {
        match (self, rhs) {
            (ExtRat::Finite(a), ExtRat::Finite(b)) => ExtRat::Finite(a + b),
            _ => ExtRat::PosInf,
        }
    }
}

impl From<Rat> for ExtRat {
    fn from(q: Rat) -> Self {
        ExtRat::Finite(q)
    }
}

impl fmt::Display for ExtRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRat::Finite(q) => write!(f, "{}", fmt_rat(q)),
            ExtRat::PosInf => write!(f, "inf"),
        }
    }
}

impl FromStr for ExtRat {
    type Err = QlinError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "∞" => Ok(ExtRat::PosInf),
            other => parse_rat(other).map(ExtRat::Finite),
        }
    }
}

/// An affine form `Σ aᵢ·xᵢ + c` over finite coordinates. Zero coefficients are
/// never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinForm {
    coeffs: BTreeMap<usize, Rat>,
    constant: Rat,
}

impl LinForm {
    pub fn zero() -> Self {
        LinForm::default()
    }

    pub fn constant(c: Rat) -> Self {
        LinForm { coeffs: BTreeMap::new(), constant: c }
    }

    /// The coordinate function `x_i`.
    pub fn var(i: usize) -> Self {
        LinForm::term(i, Rat::one())
    }

    pub fn term(i: usize, a: Rat) -> Self {
        LinForm::from_terms([(i, a)], Rat::zero())
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (usize, Rat)>, constant: Rat) -> Self {
        let mut coeffs: BTreeMap<usize, Rat> = BTreeMap::new();
        for (i, a) in terms {
            let e = coeffs.entry(i).or_insert_with(Rat::zero);
            *e += a;
        }
        coeffs.retain(|_, a| !a.is_zero());
        LinForm { coeffs, constant }
    }

    pub fn coeffs(&self) -> &BTreeMap<usize, Rat> {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(&i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn constant_term(&self) -> &Rat {
        &self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn involves(&self, i: usize) -> bool {
        self.coeffs.contains_key(&i)
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn scale(&self, k: &Rat) -> LinForm {
        if k.is_zero() {
            return LinForm::zero();
        }
        LinForm {
            coeffs: self.coeffs.iter().map(|(i, a)| (*i, a * k)).collect(),
            constant: &self.constant * k,
        }
    }

    /// `self += k · other`.
    pub fn add_scaled(&mut self, other: &LinForm, k: &Rat) {
        if k.is_zero() {
            return;
        }
        for (i, a) in &other.coeffs {
            let e = self.coeffs.entry(*i).or_insert_with(Rat::zero);
            *e += a * k;
            if e.is_zero() {
                self.coeffs.remove(i);
            }
        }
        self.constant += &other.constant * k;
    }

    pub fn with_constant(&self, c: Rat) -> LinForm {
        LinForm { coeffs: self.coeffs.clone(), constant: c }
    }

    /// Evaluates at a dense point indexed by coordinate.
    pub fn eval(&self, pt: &[Rat]) -> Rat {
        let mut acc = self.constant.clone();
        for (i, a) in &self.coeffs {
            acc += a * &pt[*i];
        }
        acc
    }

    pub fn eval_map(&self, pt: &BTreeMap<usize, Rat>) -> Option<Rat> {
        let mut acc = self.constant.clone();
        for (i, a) in &self.coeffs {
            acc += a * pt.get(i)?;
        }
        Some(acc)
    }

    /// Replaces `x_var` by `expr`.
    pub fn substitute(&self, var: usize, expr: &LinForm) -> LinForm {
        match self.coeffs.get(&var) {
            None => self.clone(),
            Some(a) => {
                let a = a.clone();
                let mut out = self.clone();
                out.coeffs.remove(&var);
                out.add_scaled(expr, &a);
                out
            }
        }
    }

    /// Fixes `x_var = value`.
    pub fn fix(&self, var: usize, value: &Rat) -> LinForm {
        self.substitute(var, &LinForm::constant(value.clone()))
    }

    pub fn rename(&self, f: impl Fn(usize) -> usize) -> LinForm {
        LinForm::from_terms(self.coeffs.iter().map(|(i, a)| (f(*i), a.clone())), self.constant.clone())
    }

    /// The same hyperplane scaled so that its first coefficient is `1`.
    /// `None` for constant forms.
    pub fn hyperplane_key(&self) -> Option<LinForm> {
        let lead = self.coeffs.values().next()?.clone();
        Some(self.scale(&(Rat::one() / lead)))
    }

    /// Solves `self = 0` for `x_var`, returning the expression it equals.
    pub fn solve_for(&self, var: usize) -> Option<LinForm> {
        let a = self.coeffs.get(&var)?.clone();
        let mut rest = self.clone();
        rest.coeffs.remove(&var);
        Some(rest.scale(&(-Rat::one() / a)))
    }

    pub fn display_with(&self, name: &dyn Fn(usize) -> String) -> String {
        let mut out = String::new();
        for (i, a) in &self.coeffs {
            let neg = a.is_negative();
            let mag = a.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if !mag.is_one() {
                out.push_str(&fmt_rat(&mag));
                out.push('*');
            }
            out.push_str(&name(*i));
        }
        if out.is_empty() {
            return fmt_rat(&self.constant);
        }
        if !self.constant.is_zero() {
            out.push_str(if self.constant.is_negative() { " - " } else { " + " });
            out.push_str(&fmt_rat(&self.constant.abs()));
        }
        out
    }
}

impl Add for &LinForm {
    type Output = LinForm;
    fn add(self, rhs: &LinForm) -> LinForm {
        let mut out = self.clone();
        out.add_scaled(rhs, &Rat::one());
        out
    }
}

impl Sub for &LinForm {
    type Output = LinForm;
    fn sub(self, rhs: &LinForm) -> LinForm {
        let mut out = self.clone();
        out.add_scaled(rhs, &-Rat::one());
        out
    }
}

impl Neg for &LinForm {
    type Output = LinForm;
    fn neg(self) -> LinForm {
        self.scale(&-Rat::one())
    }
}

impl Mul<&Rat> for &LinForm {
    type Output = LinForm;
    fn mul(self, k: &Rat) -> LinForm {
        self.scale(k)
    }
}

impl fmt::Display for LinForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(&|i| format!("x{}", i + 1)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Lt,
    Le,
    Eq,
}

impl Rel {
    pub fn holds(self, v: &Rat) -> bool {
        match self {
            Rel::Lt => v.is_negative(),
            Rel::Le => !v.is_positive(),
            Rel::Eq => v.is_zero(),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
        }
    }
}

/// `form rel 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub form: LinForm,
    pub rel: Rel,
}

impl Atom {
    pub fn new(form: LinForm, rel: Rel) -> Self {
        Atom { form, rel }
    }

    pub fn lt(form: LinForm) -> Self {
        Atom::new(form, Rel::Lt)
    }

    pub fn le(form: LinForm) -> Self {
        Atom::new(form, Rel::Le)
    }

    pub fn eq(form: LinForm) -> Self {
        Atom::new(form, Rel::Eq)
    }

    /// `a < b`
    pub fn less(a: &LinForm, b: &LinForm) -> Self {
        Atom::lt(a - b)
    }

    /// `a ≤ b`
    pub fn less_eq(a: &LinForm, b: &LinForm) -> Self {
        Atom::le(a - b)
    }

    /// `a = b`
    pub fn equal(a: &LinForm, b: &LinForm) -> Self {
        Atom::eq(a - b)
    }

    pub fn falsum() -> Self {
        Atom::lt(LinForm::zero())
    }

    pub fn holds(&self, pt: &[Rat]) -> bool {
        self.rel.holds(&self.form.eval(pt))
    }

    pub fn holds_map(&self, pt: &BTreeMap<usize, Rat>) -> Option<bool> {
        Some(self.rel.holds(&self.form.eval_map(pt)?))
    }

    /// Truth value of a variable-free atom.
    pub fn constant_truth(&self) -> Option<bool> {
        self.form.is_constant().then(|| self.rel.holds(self.form.constant_term()))
    }

    /// The negation as a disjunction of atoms.
    pub fn negate(&self) -> Vec<Atom> {
        let neg = -&self.form;
        match self.rel {
            Rel::Lt => vec![Atom::le(neg)],
            Rel::Le => vec![Atom::lt(neg)],
            Rel::Eq => vec![Atom::lt(self.form.clone()), Atom::lt(neg)],
        }
    }

    /// The non-strict relaxation.
    pub fn relaxed(&self) -> Atom {
        match self.rel {
            Rel::Lt => Atom::le(self.form.clone()),
            _ => self.clone(),
        }
    }

    pub fn substitute(&self, var: usize, expr: &LinForm) -> Atom {
        Atom::new(self.form.substitute(var, expr), self.rel)
    }

    pub fn display_with(&self, name: &dyn Fn(usize) -> String) -> String {
        // Print as `lhs rel rhs` with the constant moved to the right.
        if self.form.is_constant() {
            return format!("{} {} 0", fmt_rat(self.form.constant_term()), self.rel.symbol());
        }
        let lhs = self.form.with_constant(Rat::zero());
        format!(
            "{} {} {}",
            lhs.display_with(name),
            self.rel.symbol(),
            fmt_rat(&-self.form.constant_term().clone())
        )
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(&|i| format!("x{}", i + 1)))
    }
}

/// Above this many atoms a freshly projected system is pruned of redundant
/// atoms before it is used again.
const PRUNE_THRESHOLD: usize = 14;

/// A conjunction of atoms over a fixed set of coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Polyhedron {
    scope: BTreeSet<usize>,
    atoms: Vec<Atom>,
}

#[derive(Default)]
struct DirBounds {
    eq: Option<Rat>,
    lower: Option<(Rat, bool)>,
    upper: Option<(Rat, bool)>,
}

impl Polyhedron {
    /// Builds and normalizes a conjunction. Every atom must mention only
    /// coordinates in `scope`.
    pub fn new(scope: BTreeSet<usize>, atoms: Vec<Atom>) -> Self {
        debug_assert!(atoms.iter().all(|a| a.form.vars().all(|v| scope.contains(&v))));
        Polyhedron { scope, atoms }.simplified()
    }

    pub fn universe(scope: BTreeSet<usize>) -> Self {
        Polyhedron { scope, atoms: Vec::new() }
    }

    pub fn falsum(scope: BTreeSet<usize>) -> Self {
        Polyhedron { scope, atoms: vec![Atom::falsum()] }
    }

    pub fn scope(&self) -> &BTreeSet<usize> {
        &self.scope
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// True when normalization already exposed a contradiction.
    pub fn is_trivially_false(&self) -> bool {
        self.atoms.len() == 1 && self.atoms[0].constant_truth() == Some(false)
    }

    pub fn with_scope(&self, scope: BTreeSet<usize>) -> Self {
        debug_assert!(self.scope.is_subset(&scope));
        Polyhedron { scope, atoms: self.atoms.clone() }
    }

    pub fn and_atom(&self, atom: Atom) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.push(atom);
        Polyhedron::new(self.scope.clone(), atoms)
    }

    pub fn and_atoms(&self, extra: impl IntoIterator<Item = Atom>) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend(extra);
        Polyhedron::new(self.scope.clone(), atoms)
    }

    pub fn intersect(&self, other: &Polyhedron) -> Self {
        let scope: BTreeSet<usize> = self.scope.union(&other.scope).copied().collect();
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Polyhedron::new(scope, atoms)
    }

    pub fn contains(&self, pt: &[Rat]) -> bool {
        self.atoms.iter().all(|a| a.holds(pt))
    }

    pub fn contains_map(&self, pt: &BTreeMap<usize, Rat>) -> bool {
        self.atoms.iter().all(|a| a.holds_map(pt).unwrap_or(false))
    }

    /// Normal form: constant atoms decided, each direction scaled to a leading
    /// coefficient of one, and parallel atoms merged into the tightest bound
    /// (or an equality when two opposite non-strict bounds meet).
    fn simplified(self) -> Self {
        let mut dirs: BTreeMap<LinForm, DirBounds> = BTreeMap::new();
        for atom in &self.atoms {
            if let Some(t) = atom.constant_truth() {
                if t {
                    continue;
                }
                return Polyhedron::falsum(self.scope);
            }
            let lead = atom.form.coeffs.values().next().expect("nonconstant").clone();
            let dir = atom.form.with_constant(Rat::zero()).scale(&(Rat::one() / &lead));
            // dir·x rel' bound
            let bound = -(atom.form.constant_term() / &lead);
            let strict = atom.rel == Rel::Lt;
            let e = dirs.entry(dir).or_default();
            match atom.rel {
                Rel::Eq => match &e.eq {
                    Some(v) if *v != bound => return Polyhedron::falsum(self.scope),
                    _ => e.eq = Some(bound),
                },
                _ if lead.is_positive() => {
                    let tighter = match &e.upper {
                        None => true,
                        Some((u, s)) => bound < *u || (bound == *u && strict && !s),
                    };
                    if tighter {
                        e.upper = Some((bound, strict));
                    }
                }
                _ => {
                    let tighter = match &e.lower {
                        None => true,
                        Some((l, s)) => bound > *l || (bound == *l && strict && !s),
                    };
                    if tighter {
                        e.lower = Some((bound, strict));
                    }
                }
            }
        }
        let mut atoms = Vec::new();
        for (dir, b) in dirs {
            if let Some(v) = &b.eq {
                if let Some((l, s)) = &b.lower {
                    if v < l || (v == l && *s) {
                        return Polyhedron::falsum(self.scope);
                    }
                }
                if let Some((u, s)) = &b.upper {
                    if v > u || (v == u && *s) {
                        return Polyhedron::falsum(self.scope);
                    }
                }
                atoms.push(Atom::eq(dir.with_constant(-v.clone())));
                continue;
            }
            if let (Some((l, sl)), Some((u, su))) = (&b.lower, &b.upper) {
                if l > u || (l == u && (*sl || *su)) {
                    return Polyhedron::falsum(self.scope);
                }
                if l == u {
                    atoms.push(Atom::eq(dir.with_constant(-l.clone())));
                    continue;
                }
            }
            if let Some((l, s)) = b.lower {
                let f = (-&dir).with_constant(l);
                atoms.push(if s { Atom::lt(f) } else { Atom::le(f) });
            }
            if let Some((u, s)) = b.upper {
                let f = dir.with_constant(-u);
                atoms.push(if s { Atom::lt(f) } else { Atom::le(f) });
            }
        }
        Polyhedron { scope: self.scope, atoms }
    }

    /// Exact projection `∃x_var`. The result has `var` removed from its scope.
    pub fn eliminate(&self, var: usize) -> Polyhedron {
        let mut scope = self.scope.clone();
        scope.remove(&var);
        if self.is_trivially_false() {
            return Polyhedron::falsum(scope);
        }
        if !self.atoms.iter().any(|a| a.form.involves(var)) {
            return Polyhedron { scope, atoms: self.atoms.clone() };
        }
        // Equalities first, by substitution.
        let eq = self
            .atoms
            .iter()
            .enumerate()
            .filter(|(_, a)| a.rel == Rel::Eq && a.form.involves(var))
            .min_by_key(|(_, a)| a.form.coeffs.len());
        if let Some((k, eq)) = eq {
            let expr = eq.form.solve_for(var).expect("involves var");
            let atoms = self
                .atoms
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(_, a)| a.substitute(var, &expr))
                .collect();
            return Polyhedron::new(scope, atoms).pruned_if_large();
        }
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut rest = Vec::new();
        for a in &self.atoms {
            let c = a.form.coeff(var);
            if c.is_zero() {
                rest.push(a.clone());
            } else if c.is_positive() {
                upper.push((c, a));
            } else {
                lower.push((c, a));
            }
        }
        for (cu, u) in &upper {
            for (cl, l) in &lower {
                let mut f = u.form.scale(&-cl.clone());
                f.add_scaled(&l.form, cu);
                let rel = if u.rel == Rel::Lt || l.rel == Rel::Lt { Rel::Lt } else { Rel::Le };
                rest.push(Atom::new(f, rel));
            }
        }
        Polyhedron::new(scope, rest).pruned_if_large()
    }

    fn pruned_if_large(self) -> Polyhedron {
        if self.atoms.len() > PRUNE_THRESHOLD && self.scope.len() > 1 {
            self.remove_redundant()
        } else {
            self
        }
    }

    /// Picks the next variable to eliminate: equalities first, then the
    /// smallest lower×upper product.
    fn next_var(&self) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for &v in &self.scope {
            let mut lo = 0usize;
            let mut up = 0usize;
            let mut has_eq = false;
            for a in &self.atoms {
                let c = a.form.coeff(v);
                if c.is_zero() {
                    continue;
                }
                if a.rel == Rel::Eq {
                    has_eq = true;
                } else if c.is_positive() {
                    up += 1;
                } else {
                    lo += 1;
                }
            }
            let cost = if has_eq { 0 } else { lo * up + 1 };
            if best.is_none_or(|(_, b)| cost < b) {
                best = Some((v, cost));
            }
        }
        best.map(|(v, _)| v)
    }

    /// Decides satisfiability over ℚ.
    pub fn is_empty(&self) -> bool {
        let mut p = self.clone();
        loop {
            if p.is_trivially_false() {
                return true;
            }
            if p.atoms.is_empty() {
                return false;
            }
            match p.next_var() {
                Some(v) => p = p.eliminate(v),
                None => return p.is_trivially_false(),
            }
        }
    }

    /// Projects onto `keep`, eliminating every other scope coordinate.
    pub fn project_onto(&self, keep: &BTreeSet<usize>) -> Polyhedron {
        let mut p = self.clone();
        let drop: Vec<usize> = self.scope.difference(keep).copied().collect();
        let mut remaining: BTreeSet<usize> = drop.into_iter().collect();
        while !remaining.is_empty() {
            if p.is_trivially_false() {
                let scope = self.scope.intersection(keep).copied().collect();
                return Polyhedron::falsum(scope);
            }
            // greedy order among the coordinates still to drop
            let v = {
                let restricted = Polyhedron { scope: remaining.clone(), atoms: p.atoms.clone() };
                restricted.next_var().expect("nonempty")
            };
            remaining.remove(&v);
            p = p.eliminate(v);
        }
        p
    }

    /// The topological closure in `ℚ^scope` of a nonempty polyhedron: all
    /// strict atoms relaxed.
    pub fn relaxed(&self) -> Polyhedron {
        Polyhedron::new(self.scope.clone(), self.atoms.iter().map(Atom::relaxed).collect())
    }

    /// A rational point satisfying every atom, found by back-substitution
    /// through the elimination chain.
    pub fn sample_point(&self) -> Option<BTreeMap<usize, Rat>> {
        let mut chain = vec![self.clone()];
        let mut order = Vec::new();
        loop {
            let cur = chain.last().expect("nonempty chain");
            if cur.is_trivially_false() {
                return None;
            }
            match cur.next_var() {
                Some(v) => {
                    order.push(v);
                    let next = cur.eliminate(v);
                    chain.push(next);
                }
                None => break,
            }
        }
        let mut point: BTreeMap<usize, Rat> = BTreeMap::new();
        for (i, &v) in order.iter().enumerate().rev() {
            let sys = &chain[i];
            let value = choose_value(sys, v, &point)?;
            point.insert(v, value);
        }
        debug_assert!(self.contains_map(&point));
        Some(point)
    }

    /// Forms that vanish identically on this (nonempty) polyhedron among its
    /// atoms: explicit equalities plus implicit ones.
    pub fn equality_forms(&self) -> Vec<LinForm> {
        let mut out = Vec::new();
        for a in &self.atoms {
            match a.rel {
                Rel::Eq => out.push(a.form.clone()),
                Rel::Le => {
                    if self.and_atom(Atom::lt(a.form.clone())).is_empty() {
                        out.push(a.form.clone());
                    }
                }
                Rel::Lt => {}
            }
        }
        out
    }

    /// Dimension of the affine hull; `-1` when empty.
    pub fn dimension(&self) -> i64 {
        if self.is_empty() {
            return -1;
        }
        let eqs = self.equality_forms();
        self.scope.len() as i64 - rank_of_forms(&eqs) as i64
    }

    /// Drops atoms implied by the others.
    pub fn remove_redundant(&self) -> Polyhedron {
        if self.is_trivially_false() {
            return self.clone();
        }
        let mut atoms = self.atoms.clone();
        let mut k = 0;
        while k < atoms.len() {
            if atoms[k].rel == Rel::Eq {
                k += 1;
                continue;
            }
            let mut others: Vec<Atom> = atoms.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, a)| a.clone()).collect();
            others.extend(atoms[k].negate());
            let test = Polyhedron { scope: self.scope.clone(), atoms: others }.simplified();
            if is_empty_no_prune(&test) {
                atoms.remove(k);
            } else {
                k += 1;
            }
        }
        Polyhedron { scope: self.scope.clone(), atoms }
    }

    pub fn rename(&self, f: &dyn Fn(usize) -> usize) -> Polyhedron {
        let scope = self.scope.iter().map(|i| f(*i)).collect();
        let atoms = self.atoms.iter().map(|a| Atom::new(a.form.rename(f), a.rel)).collect();
        Polyhedron::new(scope, atoms)
    }

    /// Substitutes `x_var := expr` and removes `var` from the scope.
    pub fn substitute(&self, var: usize, expr: &LinForm, scope: BTreeSet<usize>) -> Polyhedron {
        let atoms = self.atoms.iter().map(|a| a.substitute(var, expr)).collect();
        Polyhedron::new(scope, atoms)
    }

    pub fn display_with(&self, name: &dyn Fn(usize) -> String) -> String {
        if self.atoms.is_empty() {
            return "true".to_string();
        }
        if self.is_trivially_false() {
            return "false".to_string();
        }
        self.atoms.iter().map(|a| a.display_with(name)).collect::<Vec<_>>().join(" /\\ ")
    }
}

/// FM emptiness without the redundancy pruning step. Used inside
/// [`Polyhedron::remove_redundant`] so pruning never recurses into itself.
fn is_empty_no_prune(p: &Polyhedron) -> bool {
    let mut p = p.clone();
    loop {
        if p.is_trivially_false() {
            return true;
        }
        if p.atoms.is_empty() {
            return false;
        }
        let Some(v) = p.next_var() else {
            return p.is_trivially_false();
        };
        let mut scope = p.scope.clone();
        scope.remove(&v);
        let eq = p.atoms.iter().position(|a| a.rel == Rel::Eq && a.form.involves(v));
        if let Some(k) = eq {
            let expr = p.atoms[k].form.solve_for(v).expect("involves");
            let atoms = p.atoms.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, a)| a.substitute(v, &expr)).collect();
            p = Polyhedron::new(scope, atoms);
            continue;
        }
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut rest = Vec::new();
        for a in &p.atoms {
            let c = a.form.coeff(v);
            if c.is_zero() {
                rest.push(a.clone());
            } else if c.is_positive() {
                upper.push((c, a.clone()));
            } else {
                lower.push((c, a.clone()));
            }
        }
        for (cu, u) in &upper {
            for (cl, l) in &lower {
                let mut f = u.form.scale(&-cl.clone());
                f.add_scaled(&l.form, cu);
                let rel = if u.rel == Rel::Lt || l.rel == Rel::Lt { Rel::Lt } else { Rel::Le };
                rest.push(Atom::new(f, rel));
            }
        }
        p = Polyhedron::new(scope, rest);
    }
}

/// Chooses a value for `v` in `sys` once every other coordinate of `sys` is
/// fixed by `point`.
fn choose_value(sys: &Polyhedron, v: usize, point: &BTreeMap<usize, Rat>) -> Option<Rat> {
    let mut lo: Option<(Rat, bool)> = None;
    let mut hi: Option<(Rat, bool)> = None;
    for a in &sys.atoms {
        let c = a.form.coeff(v);
        if c.is_zero() {
            continue;
        }
        let mut rest = a.form.clone();
        rest.coeffs.remove(&v);
        let r = rest.eval_map(point)?;
        // c·v + r rel 0  →  v rel' −r/c
        let b = -r / &c;
        match a.rel {
            Rel::Eq => return Some(b),
            rel => {
                let strict = rel == Rel::Lt;
                if c.is_positive() {
                    if hi.as_ref().is_none_or(|(h, s)| b < *h || (b == *h && strict && !s)) {
                        hi = Some((b, strict));
                    }
                } else if lo.as_ref().is_none_or(|(l, s)| b > *l || (b == *l && strict && !s)) {
                    lo = Some((b, strict));
                }
            }
        }
    }
    Some(match (lo, hi) {
        (None, None) => Rat::zero(),
        (Some((l, s)), None) => {
            if s {
                l.floor() + Rat::one()
            } else {
                l
            }
        }
        (None, Some((h, s))) => {
            if s {
                h.ceil() - Rat::one()
            } else {
                h
            }
        }
        (Some((l, sl)), Some((h, sh))) => {
            if l == h {
                debug_assert!(!sl && !sh);
                l
            } else if !sl && !sh && l.is_integer() {
                l
            } else {
                (l + h) / int(2)
            }
        }
    })
}

/// Rank of the coefficient vectors (constants ignored).
pub fn rank_of_forms(forms: &[LinForm]) -> usize {
    let mut rows: Vec<BTreeMap<usize, Rat>> =
        forms.iter().map(|f| f.coeffs().clone()).filter(|r| !r.is_empty()).collect();
    let mut rank = 0;
    while let Some(pivot_row) = rows.pop() {
        let Some((&col, val)) = pivot_row.iter().next() else { continue };
        let val = val.clone();
        rank += 1;
        for r in rows.iter_mut() {
            if let Some(c) = r.get(&col).cloned() {
                let k = c / &val;
                for (j, a) in &pivot_row {
                    let e = r.entry(*j).or_insert_with(Rat::zero);
                    *e -= a * &k;
                    if e.is_zero() {
                        r.remove(j);
                    }
                }
            }
        }
        rows.retain(|r| !r.is_empty());
    }
    rank
}

/// A finite union of polyhedra over a common scope. The empty union is `∅`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    scope: BTreeSet<usize>,
    disjuncts: Vec<Polyhedron>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Region {
    pub fn new(scope: BTreeSet<usize>, disjuncts: Vec<Polyhedron>) -> Self {
        let mut out: Vec<Polyhedron> = Vec::with_capacity(disjuncts.len());
        for p in disjuncts {
            if p.is_trivially_false() {
                continue;
            }
            let p = if p.scope == scope { p } else { p.with_scope(scope.clone()) };
            if p.atoms.is_empty() {
                return Region { scope, disjuncts: vec![p] };
            }
            if !out.contains(&p) {
                out.push(p);
            }
        }
        Region { scope, disjuncts: out }
    }

    pub fn empty(scope: BTreeSet<usize>) -> Self {
        Region { scope, disjuncts: Vec::new() }
    }

    pub fn universe(scope: BTreeSet<usize>) -> Self {
        Region { disjuncts: vec![Polyhedron::universe(scope.clone())], scope }
    }

    pub fn from_atoms(scope: BTreeSet<usize>, atoms: Vec<Atom>) -> Self {
        Region::new(scope.clone(), vec![Polyhedron::new(scope, atoms)])
    }

    pub fn scope(&self) -> &BTreeSet<usize> {
        &self.scope
    }

    pub fn disjuncts(&self) -> &[Polyhedron] {
        &self.disjuncts
    }

    pub fn into_disjuncts(self) -> Vec<Polyhedron> {
        self.disjuncts
    }

    pub fn contains(&self, pt: &[Rat]) -> bool {
        self.disjuncts.iter().any(|p| p.contains(pt))
    }

    pub fn contains_map(&self, pt: &BTreeMap<usize, Rat>) -> bool {
        self.disjuncts.iter().any(|p| p.contains_map(pt))
    }

    pub fn union(&self, other: &Region) -> Region {
        let scope: BTreeSet<usize> = self.scope.union(&other.scope).copied().collect();
        let mut d = self.disjuncts.clone();
        d.extend(other.disjuncts.iter().cloned());
        Region::new(scope, d)
    }

    pub fn intersect(&self, other: &Region) -> Region {
        let scope: BTreeSet<usize> = self.scope.union(&other.scope).copied().collect();
        let mut out = Vec::new();
        for a in &self.disjuncts {
            for b in &other.disjuncts {
                let p = a.intersect(b).with_scope_checked(&scope);
                if !p.is_empty() {
                    out.push(p);
                }
            }
        }
        Region::new(scope, out)
    }

    /// `self ∖ other`, with the pieces of each disjunct kept pairwise disjoint.
    pub fn difference(&self, other: &Region) -> Region {
        let scope: BTreeSet<usize> = self.scope.union(&other.scope).copied().collect();
        let mut out = Vec::new();
        for a in &self.disjuncts {
            let mut pieces = vec![a.clone().with_scope_checked(&scope)];
            for b in &other.disjuncts {
                pieces = pieces.iter().flat_map(|p| subtract(p, b)).collect();
                if pieces.is_empty() {
                    break;
                }
            }
            out.extend(pieces);
        }
        Region::new(scope, out)
    }

    /// Complement within `ℚ^scope`.
    pub fn complement(&self) -> Region {
        Region::universe(self.scope.clone()).difference(self)
    }

    pub fn is_empty(&self) -> bool {
        self.disjuncts.iter().all(Polyhedron::is_empty)
    }

    /// Drops unsatisfiable disjuncts.
    pub fn pruned(&self) -> Region {
        Region {
            scope: self.scope.clone(),
            disjuncts: self.disjuncts.iter().filter(|p| !p.is_empty()).cloned().collect(),
        }
    }

    /// `self ⊆ other`
    pub fn is_subset(&self, other: &Region) -> bool {
        self.difference(other).is_empty()
    }

    /// Extensional equality, decided by emptiness of the symmetric difference.
    pub fn set_eq(&self, other: &Region) -> bool {
        self.is_subset(other) && other.is_subset(self)
    }

    pub fn eliminate(&self, var: usize) -> Region {
        let mut scope = self.scope.clone();
        scope.remove(&var);
        let d = self.disjuncts.iter().map(|p| p.eliminate(var)).filter(|p| !p.is_empty()).collect();
        Region::new(scope, d)
    }

    pub fn project_onto(&self, keep: &BTreeSet<usize>) -> Region {
        let scope: BTreeSet<usize> = self.scope.intersection(keep).copied().collect();
        let d = self.disjuncts.iter().map(|p| p.project_onto(keep)).filter(|p| !p.is_empty()).collect();
        Region::new(scope, d)
    }

    /// `-1` for `∅`, otherwise the largest disjunct dimension.
    pub fn dimension(&self) -> i64 {
        self.disjuncts.iter().map(Polyhedron::dimension).max().unwrap_or(-1)
    }

    pub fn sample_point(&self) -> Option<BTreeMap<usize, Rat>> {
        self.disjuncts.iter().find_map(Polyhedron::sample_point)
    }

    pub fn rename(&self, f: &dyn Fn(usize) -> usize) -> Region {
        let scope = self.scope.iter().map(|i| f(*i)).collect();
        Region::new(scope, self.disjuncts.iter().map(|p| p.rename(f)).collect())
    }

    /// Extends the scope with unconstrained coordinates.
    pub fn with_scope(&self, scope: BTreeSet<usize>) -> Region {
        Region::new(scope, self.disjuncts.clone())
    }

    /// Fixes `x_var = value` and drops `var` from the scope.
    pub fn fix(&self, var: usize, value: &Rat) -> Region {
        let mut scope = self.scope.clone();
        scope.remove(&var);
        let expr = LinForm::constant(value.clone());
        Region::new(scope.clone(), self.disjuncts.iter().map(|p| p.substitute(var, &expr, scope.clone())).collect())
    }

    pub fn display_with(&self, name: &dyn Fn(usize) -> String) -> String {
        if self.disjuncts.is_empty() {
            return "false".to_string();
        }
        self.disjuncts
            .iter()
            .map(|p| format!("({})", p.display_with(name)))
            .collect::<Vec<_>>()
            .join(" \\/ ")
    }
}

impl Polyhedron {
    fn with_scope_checked(self, scope: &BTreeSet<usize>) -> Polyhedron {
        if &self.scope == scope {
            self
        } else {
            self.with_scope(scope.clone())
        }
    }
}

/// `p ∖ q` as pairwise-disjoint nonempty polyhedra.
pub fn subtract(p: &Polyhedron, q: &Polyhedron) -> Vec<Polyhedron> {
    if p.intersect(q).is_empty() {
        return vec![p.clone()];
    }
    let mut out = Vec::new();
    let mut prefix = p.clone();
    for atom in q.atoms() {
        for neg in atom.negate() {
            let piece = prefix.and_atom(neg);
            if !piece.is_empty() {
                out.push(piece);
            }
        }
        prefix = prefix.and_atom(atom.clone());
        if prefix.is_empty() {
            break;
        }
    }
    out
}

/// Fourier–Motzkin projection of a region along one coordinate.
pub fn fm_eliminate(r: &Region, var: usize) -> Region {
    r.eliminate(var)
}

/// Eliminates a quantifier prefix (outermost first) from `body`.
///
/// `∀v φ` is computed as `¬∃v ¬φ`.
pub fn qe(prefix: &[(Quantifier, usize)], body: &Region) -> Region {
    let mut r = body.clone();
    for &(q, v) in prefix.iter().rev() {
        r = match q {
            Quantifier::Exists => r.eliminate(v),
            Quantifier::Forall => r.complement().eliminate(v).complement(),
        };
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    fn x(i: usize) -> LinForm {
        LinForm::var(i)
    }

    fn c(n: i64) -> LinForm {
        LinForm::constant(int(n))
    }

    #[test]
    fn ext_rat_order_and_arithmetic() {
        let a = ExtRat::int(5);
        assert!(a < ExtRat::PosInf);
        assert_eq!(&a + &ExtRat::PosInf, ExtRat::PosInf);
        assert_eq!(a.checked_sub(&ExtRat::int(2)), Ok(ExtRat::int(3)));
        assert_eq!(ExtRat::PosInf.checked_sub(&a), Err(QlinError::InfSubtraction));
        assert_eq!(a.checked_sub(&ExtRat::PosInf), Err(QlinError::InfSubtraction));
        assert_eq!("inf".parse::<ExtRat>().unwrap(), ExtRat::PosInf);
        assert_eq!("-3/6".parse::<ExtRat>().unwrap(), ExtRat::Finite(rat(-1, 2)));
        assert_eq!(parse_rat("1.25").unwrap(), rat(5, 4));
        assert_eq!(parse_rat("-0.5").unwrap(), rat(-1, 2));
    }

    #[test]
    fn project_band_is_everything() {
        // x ≤ y ≤ x+1 over y
        let r = Region::from_atoms(s(&[0, 1]), vec![Atom::less_eq(&x(0), &x(1)), Atom::less_eq(&x(1), &(&x(0) + &c(1)))]);
        let p = fm_eliminate(&r, 1);
        assert!(p.set_eq(&Region::universe(s(&[0]))));
    }

    #[test]
    fn project_contradiction_is_empty() {
        let r = Region::from_atoms(s(&[0]), vec![Atom::less(&x(0), &c(0)), Atom::less(&c(0), &x(0))]);
        assert!(fm_eliminate(&r, 0).is_empty());
        assert!(r.is_empty());
    }

    #[test]
    fn project_equality_by_substitution() {
        // y = 2x, 0 ≤ y ≤ 1  →  0 ≤ x ≤ 1/2
        let r = Region::from_atoms(
            s(&[0, 1]),
            vec![
                Atom::equal(&x(1), &x(0).scale(&int(2))),
                Atom::less_eq(&c(0), &x(1)),
                Atom::less_eq(&x(1), &c(1)),
            ],
        );
        let p = fm_eliminate(&r, 1);
        let want = Region::from_atoms(
            s(&[0]),
            vec![Atom::less_eq(&c(0), &x(0)), Atom::less_eq(&x(0), &LinForm::constant(rat(1, 2)))],
        );
        assert!(p.set_eq(&want));
    }

    #[test]
    fn strictness_survives_projection() {
        // x < y ≤ 1 → x < 1, and x = 1 is excluded
        let r = Region::from_atoms(s(&[0, 1]), vec![Atom::less(&x(0), &x(1)), Atom::less_eq(&x(1), &c(1))]);
        let p = fm_eliminate(&r, 1);
        assert!(p.contains(&[rat(99, 100)]));
        assert!(!p.contains(&[int(1)]));
    }

    #[test]
    fn qe_forall_infimum() {
        // ∀y (y ≥ 0 → x ≤ y)  ≡  x ≤ 0
        let body = Region::new(
            s(&[0, 1]),
            vec![
                Polyhedron::new(s(&[0, 1]), vec![Atom::less(&x(1), &c(0))]),
                Polyhedron::new(s(&[0, 1]), vec![Atom::less_eq(&x(0), &x(1))]),
            ],
        );
        let r = qe(&[(Quantifier::Forall, 1)], &body);
        let want = Region::from_atoms(s(&[0]), vec![Atom::less_eq(&x(0), &c(0))]);
        assert!(r.set_eq(&want));
    }

    #[test]
    fn qe_divisibility() {
        // ∃y x = y + y
        let body = Region::from_atoms(s(&[0, 1]), vec![Atom::equal(&x(0), &x(1).scale(&int(2)))]);
        let r = qe(&[(Quantifier::Exists, 1)], &body);
        assert!(r.set_eq(&Region::universe(s(&[0]))));
    }

    #[test]
    fn qe_density() {
        // ∀ε (ε ≤ 0 ∨ ∃y (y − 1 < ε ∧ 1 − y < ε ∧ y < 1)), variables ε = 0, y = 1
        let inner = Polyhedron::new(
            s(&[0, 1]),
            vec![
                Atom::less(&(&x(1) - &c(1)), &x(0)),
                Atom::less(&(&c(1) - &x(1)), &x(0)),
                Atom::less(&x(1), &c(1)),
            ],
        );
        let body = Region::new(s(&[0, 1]), vec![Polyhedron::new(s(&[0, 1]), vec![Atom::less_eq(&x(0), &c(0))]), inner]);
        let r = qe(&[(Quantifier::Forall, 0), (Quantifier::Exists, 1)], &body);
        assert!(r.scope().is_empty());
        assert!(!r.is_empty());
    }

    #[test]
    fn dimension_examples() {
        let ray = Region::from_atoms(s(&[0, 1]), vec![Atom::eq(x(0)), Atom::less_eq(&x(1), &c(3))]);
        assert_eq!(ray.dimension(), 1);
        assert_eq!(Region::empty(s(&[0, 1])).dimension(), -1);
        let square = Region::from_atoms(
            s(&[0, 1]),
            vec![
                Atom::less_eq(&c(0), &x(0)),
                Atom::less_eq(&x(0), &c(1)),
                Atom::less_eq(&c(0), &x(1)),
                Atom::less_eq(&x(1), &c(1)),
            ],
        );
        assert_eq!(square.dimension(), 2);
        // implicit equality: x ≤ 0 ∧ x ≥ 0 written via two forms with y
        let thin = Region::from_atoms(
            s(&[0, 1]),
            vec![Atom::less_eq(&(&x(0) + &x(1)), &c(0)), Atom::less_eq(&c(0), &(&x(0) + &x(1))), Atom::less_eq(&x(0), &c(2))],
        );
        assert_eq!(thin.dimension(), 1);
    }

    #[test]
    fn sample_points() {
        let open = Region::from_atoms(s(&[0]), vec![Atom::less(&c(0), &x(0)), Atom::less(&x(0), &c(1))]);
        let p = open.sample_point().unwrap();
        assert!(open.contains_map(&p));
        assert!(Region::empty(s(&[0])).sample_point().is_none());
        let diag = Region::from_atoms(s(&[0, 1]), vec![Atom::equal(&x(0), &x(1)), Atom::less_eq(&c(5), &x(0))]);
        let p = diag.sample_point().unwrap();
        assert_eq!(p[&0], p[&1]);
        assert!(p[&0] >= int(5));
    }

    #[test]
    fn simplify_detects_opposite_bounds() {
        let p = Polyhedron::new(s(&[0]), vec![Atom::less_eq(&x(0), &c(2)), Atom::less_eq(&c(2), &x(0))]);
        assert_eq!(p.atoms().len(), 1);
        assert_eq!(p.atoms()[0].rel, Rel::Eq);
        let q = Polyhedron::new(s(&[0]), vec![Atom::less(&x(0), &c(2)), Atom::less_eq(&c(2), &x(0))]);
        assert!(q.is_trivially_false());
    }

    #[test]
    fn complement_and_difference() {
        let a = Region::from_atoms(s(&[0]), vec![Atom::less_eq(&c(0), &x(0)), Atom::less_eq(&x(0), &c(1))]);
        let ca = a.complement();
        assert!(ca.intersect(&a).is_empty());
        assert!(ca.union(&a).set_eq(&Region::universe(s(&[0]))));
        assert!(ca.contains(&[int(2)]) && ca.contains(&[int(-1)]) && !ca.contains(&[rat(1, 2)]));
    }

    #[test]
    fn redundant_atoms_are_dropped() {
        let p = Polyhedron::new(
            s(&[0, 1]),
            vec![
                Atom::less_eq(&c(0), &x(0)),
                Atom::less_eq(&c(0), &x(1)),
                Atom::less_eq(&(&x(0) + &x(1)), &c(1)),
                Atom::less_eq(&x(0), &c(5)),
            ],
        );
        let q = p.remove_redundant();
        assert_eq!(q.atoms().len(), 3);
        assert!(Region::from_atoms(s(&[0, 1]), q.atoms().to_vec()).set_eq(&Region::from_atoms(s(&[0, 1]), p.atoms().to_vec())));
    }
}
