//! Definable subsets of `Γ∞^n`, stored one stratum at a time.
//!
//! A point of `Γ∞^n` has a *support*: the set of coordinates where it is
//! finite. Fixing the support `L` identifies the stratum with `Γ^L`, and a
//! [`SemilinearSet`] keeps one [`Region`] per nonempty stratum. Regions use the
//! ambient coordinate indices, so the region for `L` has scope exactly `L`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::qlin::{Atom, ExtRat, LinForm, Polyhedron, Quantifier, Rat, Region, Rel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StratalError {
    #[error("ambient dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("set is not locally closed: it is not open in its closure near {}", fmt_point(.0))]
    NotLocallyClosed(Vec<ExtRat>),
}

/// Renders a point of `Γ∞^n` as `(a, b, inf)`.
pub fn fmt_point(p: &[ExtRat]) -> String {
    let parts: Vec<String> = p.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

/// The set of finite coordinates of a point, as a bit mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Support(pub u32);

impl Support {
    pub fn full(n: usize) -> Self {
        Support(if n >= 32 { u32::MAX } else { (1u32 << n) - 1 })
    }

    pub fn empty() -> Self {
        Support(0)
    }

    pub fn from_coords(coords: impl IntoIterator<Item = usize>) -> Self {
        Support(coords.into_iter().fold(0, |m, i| m | (1 << i)))
    }

    pub fn of_point(p: &[ExtRat]) -> Self {
        Support::from_coords(p.iter().enumerate().filter(|(_, v)| !v.is_inf()).map(|(i, _)| i))
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: Support) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn coords(self) -> BTreeSet<usize> {
        (0..32).filter(|i| self.contains(*i)).collect()
    }

    pub fn with(self, i: usize) -> Self {
        Support(self.0 | (1 << i))
    }

    pub fn without(self, i: usize) -> Self {
        Support(self.0 & !(1 << i))
    }

    /// All subsets of `self`, including `∅` and `self`.
    pub fn subsets(self) -> impl Iterator<Item = Support> {
        let full = self.0;
        let mut next = Some(full);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == 0 { None } else { Some((cur - 1) & full) };
            Some(Support(cur))
        })
    }

    /// Every support in `Γ∞^n`.
    pub fn all(n: usize) -> impl Iterator<Item = Support> {
        Support::full(n).subsets()
    }
}

/// One coordinate of a basic open box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OpenInterval {
    /// `(−∞, a)`
    Below(Rat),
    /// `(a, b)`
    Between(Rat, Rat),
    /// `(b, ∞]`, which contains `∞`
    Above(Rat),
}

/// A basic open box of the product order topology on `Γ∞^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxNbhd {
    pub sides: Vec<OpenInterval>,
}

impl BoxNbhd {
    /// The box `Π (pᵢ − r, pᵢ + r)` around a point, with `(1/r, ∞]` on its
    /// infinite coordinates.
    pub fn around(p: &[ExtRat], r: &Rat) -> Self {
        let sides = p
            .iter()
            .map(|v| match v {
                ExtRat::Finite(q) => OpenInterval::Between(q - r, q + r),
                ExtRat::PosInf => OpenInterval::Above(Rat::one() / r),
            })
            .collect();
        BoxNbhd { sides }
    }

    pub fn contains(&self, p: &[ExtRat]) -> bool {
        self.sides.iter().zip(p).all(|(side, v)| match (side, v) {
            (OpenInterval::Below(a), ExtRat::Finite(q)) => q < a,
            (OpenInterval::Between(a, b), ExtRat::Finite(q)) => a < q && q < b,
            (OpenInterval::Above(b), ExtRat::Finite(q)) => q > b,
            (OpenInterval::Above(_), ExtRat::PosInf) => true,
            _ => false,
        })
    }

    pub fn to_set(&self) -> SemilinearSet {
        let n = self.sides.len();
        let mut out = SemilinearSet::empty(n);
        // ∞ may appear only on `Above` sides.
        let can_be_inf = Support::from_coords(
            self.sides.iter().enumerate().filter(|(_, s)| matches!(s, OpenInterval::Above(_))).map(|(i, _)| i),
        );
        for inf in can_be_inf.subsets() {
            let l = Support(Support::full(n).0 & !inf.0);
            let mut atoms = Vec::new();
            for i in l.coords() {
                let x = LinForm::var(i);
                match &self.sides[i] {
                    OpenInterval::Below(a) => atoms.push(Atom::less(&x, &LinForm::constant(a.clone()))),
                    OpenInterval::Between(a, b) => {
                        atoms.push(Atom::less(&LinForm::constant(a.clone()), &x));
                        atoms.push(Atom::less(&x, &LinForm::constant(b.clone())));
                    }
                    OpenInterval::Above(b) => atoms.push(Atom::less(&LinForm::constant(b.clone()), &x)),
                }
            }
            out.insert_piece(l, Region::from_atoms(l.coords(), atoms));
        }
        out
    }
}

/// How coordinates of a set relate to the coordinates of its embedded image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmbedSlot {
    /// Copied unchanged to the given target coordinate.
    Same(usize),
    /// Sent through `x ↦ (−x, 0)` or `(0, x)` into the given target pair.
    Folded(usize, usize),
}

/// A locally closed set presented as `P ∖ Q` with `P` definably compact and
/// `Q` closed. The underlying set lives in the embedded coordinates.
#[derive(Clone, Debug)]
pub struct CompactPair {
    pub p: SemilinearSet,
    pub q: SemilinearSet,
    pub x_dim: i64,
    pub slots: Vec<EmbedSlot>,
}

/// A definable subset of `Γ∞^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemilinearSet {
    dim: usize,
    pieces: BTreeMap<Support, Region>,
}

impl SemilinearSet {
    pub fn empty(dim: usize) -> Self {
        assert!(dim < 32, "ambient dimension too large");
        SemilinearSet { dim, pieces: BTreeMap::new() }
    }

    /// All of `Γ∞^n`.
    pub fn universe(dim: usize) -> Self {
        let mut s = SemilinearSet::empty(dim);
        for l in Support::all(dim) {
            s.pieces.insert(l, Region::universe(l.coords()));
        }
        s
    }

    /// The finite part `Γ^n`.
    pub fn finite_universe(dim: usize) -> Self {
        SemilinearSet::from_piece(dim, Support::full(dim), Region::universe(Support::full(dim).coords()))
    }

    pub fn from_piece(dim: usize, l: Support, region: Region) -> Self {
        let mut s = SemilinearSet::empty(dim);
        s.insert_piece(l, region);
        s
    }

    /// A set in `Γ^n` cut out by a conjunction.
    pub fn finite_from_atoms(dim: usize, atoms: Vec<Atom>) -> Self {
        let l = Support::full(dim);
        SemilinearSet::from_piece(dim, l, Region::from_atoms(l.coords(), atoms))
    }

    pub fn point(p: &[ExtRat]) -> Self {
        let l = Support::of_point(p);
        let atoms = p
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.finite().map(|q| Atom::equal(&LinForm::var(i), &LinForm::constant(q.clone()))))
            .collect();
        SemilinearSet::from_piece(p.len(), l, Region::from_atoms(l.coords(), atoms))
    }

    /// Unions `region` into stratum `l`.
    pub fn insert_piece(&mut self, l: Support, region: Region) {
        assert!(l.is_subset(Support::full(self.dim)));
        let region = region.with_scope(l.coords()).pruned();
        if region.disjuncts().is_empty() {
            return;
        }
        let merged = match self.pieces.remove(&l) {
            Some(old) => old.union(&region),
            None => region,
        };
        self.pieces.insert(l, merged);
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &BTreeMap<Support, Region> {
        &self.pieces
    }

    pub fn piece(&self, l: Support) -> Option<&Region> {
        self.pieces.get(&l)
    }

    pub fn contains(&self, p: &[ExtRat]) -> bool {
        assert_eq!(p.len(), self.dim);
        let l = Support::of_point(p);
        let Some(region) = self.pieces.get(&l) else { return false };
        let dense: Vec<Rat> = p.iter().map(|v| v.finite().cloned().unwrap_or_else(Rat::zero)).collect();
        region.contains(&dense)
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.values().all(Region::is_empty)
    }

    /// Drops empty disjuncts and strata.
    pub fn pruned(&self) -> Self {
        let mut out = SemilinearSet::empty(self.dim);
        for (l, r) in &self.pieces {
            out.insert_piece(*l, r.pruned());
        }
        out
    }

    fn check_dim(&self, other: &SemilinearSet) -> Result<(), StratalError> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(StratalError::DimensionMismatch(self.dim, other.dim))
        }
    }

    pub fn try_union(&self, other: &SemilinearSet) -> Result<Self, StratalError> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (l, r) in &other.pieces {
            out.insert_piece(*l, r.clone());
        }
        Ok(out)
    }

    pub fn try_intersect(&self, other: &SemilinearSet) -> Result<Self, StratalError> {
        self.check_dim(other)?;
        let mut out = SemilinearSet::empty(self.dim);
        for (l, r) in &self.pieces {
            if let Some(r2) = other.pieces.get(l) {
                out.insert_piece(*l, r.intersect(r2));
            }
        }
        Ok(out)
    }

    pub fn try_difference(&self, other: &SemilinearSet) -> Result<Self, StratalError> {
        self.check_dim(other)?;
        let mut out = SemilinearSet::empty(self.dim);
        for (l, r) in &self.pieces {
            match other.pieces.get(l) {
                Some(r2) => out.insert_piece(*l, r.difference(r2)),
                None => out.insert_piece(*l, r.clone()),
            }
        }
        Ok(out)
    }

    /// Panics on a dimension mismatch; see [`SemilinearSet::try_union`].
    pub fn union(&self, other: &SemilinearSet) -> Self {
        self.try_union(other).expect("union")
    }

    pub fn intersect(&self, other: &SemilinearSet) -> Self {
        self.try_intersect(other).expect("intersect")
    }

    pub fn difference(&self, other: &SemilinearSet) -> Self {
        self.try_difference(other).expect("difference")
    }

    pub fn complement(&self) -> Self {
        SemilinearSet::universe(self.dim).difference(self)
    }

    pub fn is_subset(&self, other: &SemilinearSet) -> bool {
        self.difference(other).is_empty()
    }

    /// Extensional equality.
    pub fn set_eq(&self, other: &SemilinearSet) -> bool {
        self.dim == other.dim && self.is_subset(other) && other.is_subset(self)
    }

    /// Largest stratum dimension; `-1` for the empty set.
    pub fn dimension(&self) -> i64 {
        self.pieces.values().map(Region::dimension).max().unwrap_or(-1)
    }

    pub fn sample_point(&self) -> Option<Vec<ExtRat>> {
        self.pieces.iter().find_map(|(l, r)| {
            let pt = r.sample_point()?;
            Some(self.lift_point(*l, &pt))
        })
    }

    /// Turns a point of stratum `l` into a point of `Γ∞^n`.
    pub fn lift_point(&self, l: Support, pt: &BTreeMap<usize, Rat>) -> Vec<ExtRat> {
        (0..self.dim)
            .map(|i| if l.contains(i) { ExtRat::Finite(pt.get(&i).cloned().unwrap_or_else(Rat::zero)) } else { ExtRat::PosInf })
            .collect()
    }

    /// Closure in the order topology of `Γ∞^n`.
    ///
    /// For a nonempty polyhedron `P` in stratum `L''` and `L ⊆ L''`, the limits
    /// of points of `P` whose `L''∖L` coordinates tend to `∞` while the `L`
    /// coordinates converge are exactly `π_L(cl P)`, provided `P` has a
    /// recession direction that is zero on `L` and positive on `L''∖L`; if no
    /// such direction exists there are none. The union of these sets over all
    /// disjuncts and pairs is closed, so one pass suffices.
    pub fn closure(&self) -> Self {
        let mut out = SemilinearSet::empty(self.dim);
        for (&top, region) in &self.pieces {
            for poly in region.disjuncts() {
                if poly.is_empty() {
                    continue;
                }
                let relaxed = poly.relaxed();
                for l in top.subsets() {
                    if !has_escape_direction(poly, top, l) {
                        continue;
                    }
                    let proj = if l == top { relaxed.clone() } else { relaxed.project_onto(&l.coords()) };
                    out.insert_piece(l, Region::new(l.coords(), vec![proj]));
                }
            }
        }
        out
    }

    pub fn interior(&self) -> Self {
        self.complement().closure().complement()
    }

    pub fn frontier(&self) -> Self {
        self.closure().difference(self)
    }

    pub fn is_closed(&self) -> bool {
        self.closure().difference(self).is_empty()
    }

    pub fn is_open(&self) -> bool {
        self.complement().is_closed()
    }

    /// Open in its own closure, i.e. `closure(S) ∖ S` is closed.
    pub fn is_locally_closed(&self) -> bool {
        self.local_closure_witness().is_none()
    }

    /// A point of `S` lying in the closure of `closure(S) ∖ S`, if any.
    pub fn local_closure_witness(&self) -> Option<Vec<ExtRat>> {
        let fr = self.frontier();
        fr.closure().intersect(self).sample_point()
    }

    /// Contained in some `Π [c, ∞]`.
    pub fn is_bounded(&self) -> bool {
        self.unbounded_below_coords().is_empty()
    }

    /// Coordinates along which the set is not bounded below.
    pub fn unbounded_below_coords(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for (&l, region) in &self.pieces {
            for poly in region.disjuncts() {
                for i in l.coords() {
                    if out.contains(&i) {
                        continue;
                    }
                    if recedes_below(poly, i) && !poly.is_empty() {
                        out.insert(i);
                    }
                }
            }
        }
        out
    }

    pub fn is_definably_compact(&self) -> bool {
        self.is_bounded() && self.is_closed()
    }

    /// Image under `p(x) = (−x, 0)` for `x < 0` and `(0, x)` otherwise, applied
    /// to every coordinate. Lands in `[0, ∞]^{2n}`.
    pub fn completion_embed(&self) -> (SemilinearSet, Vec<EmbedSlot>) {
        self.embed_partially(&(0..self.dim).collect())
    }

    /// Applies `p` to the coordinates in `fold` and copies the rest.
    pub fn embed_partially(&self, fold: &BTreeSet<usize>) -> (SemilinearSet, Vec<EmbedSlot>) {
        let mut slots = Vec::with_capacity(self.dim);
        let mut next = 0;
        for i in 0..self.dim {
            if fold.contains(&i) {
                slots.push(EmbedSlot::Folded(next, next + 1));
                next += 2;
            } else {
                slots.push(EmbedSlot::Same(next));
                next += 1;
            }
        }
        let mut out = SemilinearSet::empty(next);
        for (&l, region) in &self.pieces {
            let folded: Vec<usize> = l.coords().into_iter().filter(|i| fold.contains(i)).collect();
            let mut target = Support::empty();
            for (i, slot) in slots.iter().enumerate() {
                match *slot {
                    EmbedSlot::Same(j) if l.contains(i) => target = target.with(j),
                    EmbedSlot::Same(_) => {}
                    EmbedSlot::Folded(u, v) => {
                        target = target.with(u);
                        if l.contains(i) {
                            target = target.with(v);
                        }
                    }
                }
            }
            // One branch per sign pattern of the folded finite coordinates.
            for mask in 0u32..(1 << folded.len()) {
                let negative: BTreeSet<usize> =
                    folded.iter().enumerate().filter(|(k, _)| mask & (1 << k) != 0).map(|(_, i)| *i).collect();
                let image_of = |i: usize| -> LinForm {
                    match slots[i] {
                        EmbedSlot::Same(j) => LinForm::var(j),
                        EmbedSlot::Folded(u, v) => {
                            if negative.contains(&i) {
                                -&LinForm::var(u)
                            } else {
                                LinForm::var(v)
                            }
                        }
                    }
                };
                let mut side = Vec::new();
                for (i, slot) in slots.iter().enumerate() {
                    if let EmbedSlot::Folded(u, v) = *slot {
                        if !l.contains(i) {
                            side.push(Atom::eq(LinForm::var(u)));
                        } else if negative.contains(&i) {
                            side.push(Atom::less(&LinForm::zero(), &LinForm::var(u)));
                            side.push(Atom::eq(LinForm::var(v)));
                        } else {
                            side.push(Atom::eq(LinForm::var(u)));
                            side.push(Atom::less_eq(&LinForm::zero(), &LinForm::var(v)));
                        }
                    }
                }
                let polys = region
                    .disjuncts()
                    .iter()
                    .map(|p| {
                        let mut atoms: Vec<Atom> =
                            p.atoms().iter().map(|a| Atom::new(map_form(&a.form, &image_of), a.rel)).collect();
                        atoms.extend(side.iter().cloned());
                        Polyhedron::new(target.coords(), atoms)
                    })
                    .collect();
                out.insert_piece(target, Region::new(target.coords(), polys));
            }
        }
        (out, slots)
    }

    /// Presents a locally closed set as `P ∖ Q` with `P` definably compact.
    ///
    /// Bounded sets are their own completion inside `closure(S)`; otherwise
    /// only the coordinates along which `S` is unbounded below are folded.
    pub fn compact_pair(&self) -> Result<CompactPair, StratalError> {
        if let Some(w) = self.local_closure_witness() {
            return Err(StratalError::NotLocallyClosed(w));
        }
        let fold = self.unbounded_below_coords();
        let (image, slots) = self.embed_partially(&fold);
        let p = image.closure();
        let q = p.difference(&image);
        Ok(CompactPair { p, q, x_dim: self.dimension(), slots })
    }

    /// Product `S × T`; coordinates of `T` follow those of `S`.
    pub fn product(&self, other: &SemilinearSet) -> SemilinearSet {
        let shift = self.dim;
        let mut out = SemilinearSet::empty(self.dim + other.dim);
        for (&l1, r1) in &self.pieces {
            for (&l2, r2) in &other.pieces {
                let l = Support(l1.0 | (l2.0 << shift));
                let moved = r2.rename(&|i| i + shift);
                out.insert_piece(l, r1.with_scope(l.coords()).intersect(&moved.with_scope(l.coords())));
            }
        }
        out
    }

    /// Reorders coordinates: coordinate `i` of `self` becomes `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> SemilinearSet {
        assert_eq!(perm.len(), self.dim);
        let mut out = SemilinearSet::empty(self.dim);
        for (&l, r) in &self.pieces {
            let nl = Support::from_coords(l.coords().into_iter().map(|i| perm[i]));
            out.insert_piece(nl, r.rename(&|i| perm[i]));
        }
        out
    }

    /// Fiber over `coord = value`, as a subset of the remaining coordinates
    /// (renumbered in order).
    pub fn fiber(&self, coord: usize, value: &ExtRat) -> SemilinearSet {
        let shrink = |i: usize| if i > coord { i - 1 } else { i };
        let mut out = SemilinearSet::empty(self.dim - 1);
        for (&l, r) in &self.pieces {
            let rest = l.without(coord);
            let nl = Support::from_coords(rest.coords().into_iter().map(shrink));
            match value {
                ExtRat::PosInf if !l.contains(coord) => out.insert_piece(nl, r.rename(&shrink)),
                ExtRat::Finite(q) if l.contains(coord) => out.insert_piece(nl, r.fix(coord, q).rename(&shrink)),
                _ => {}
            }
        }
        out
    }

    /// Renders in the script syntax, e.g. `{ (x1, inf) | x1 >= 0 }`.
    pub fn display_with(&self, name: &dyn Fn(usize) -> String) -> String {
        if self.pieces.is_empty() {
            return "empty".to_string();
        }
        let mut parts = Vec::new();
        for (l, r) in &self.pieces {
            let tuple: Vec<String> =
                (0..self.dim).map(|i| if l.contains(i) { name(i) } else { "inf".to_string() }).collect();
            let body = if r.disjuncts().len() == 1 {
                r.disjuncts()[0].display_with(name)
            } else {
                r.display_with(name)
            };
            parts.push(format!("{{ ({}) | {} }}", tuple.join(", "), body));
        }
        parts.join(" union ")
    }
}

impl fmt::Display for SemilinearSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(&|i| format!("x{}", i + 1)))
    }
}

/// Substitutes each coordinate by the given form.
fn map_form(f: &LinForm, image_of: &dyn Fn(usize) -> LinForm) -> LinForm {
    let mut out = LinForm::constant(f.constant_term().clone());
    for (i, a) in f.coeffs() {
        out.add_scaled(&image_of(*i), a);
    }
    out
}

/// The recession cone of a polyhedron's closure, with extra atoms, over the
/// same coordinate indices.
fn recession_cone(p: &Polyhedron, extra: Vec<Atom>) -> Polyhedron {
    let mut atoms: Vec<Atom> = p
        .atoms()
        .iter()
        .map(|a| {
            let rel = if a.rel == Rel::Eq { Rel::Eq } else { Rel::Le };
            Atom::new(a.form.with_constant(Rat::zero()), rel)
        })
        .collect();
    atoms.extend(extra);
    Polyhedron::new(p.scope().clone(), atoms)
}

/// Whether `p` contains a ray along which the `top ∖ keep` coordinates grow
/// while the `keep` coordinates stay fixed.
fn has_escape_direction(p: &Polyhedron, top: Support, keep: Support) -> bool {
    if top == keep {
        return true;
    }
    let mut extra = Vec::new();
    for i in top.coords() {
        if keep.contains(i) {
            extra.push(Atom::eq(LinForm::var(i)));
        } else {
            extra.push(Atom::lt(-&LinForm::var(i)));
        }
    }
    !recession_cone(p, extra).is_empty()
}

/// Whether coordinate `i` is unbounded below on a nonempty `p`.
fn recedes_below(p: &Polyhedron, i: usize) -> bool {
    !recession_cone(p, vec![Atom::lt(LinForm::var(i))]).is_empty()
}

/// Limit points in stratum `keep` of a region in stratum `top`, computed by
/// quantifier elimination of
/// `∀ε>0 ∀N ∃x ∈ R: |x_i − y_i| < ε (i ∈ keep) ∧ x_j > N (j ∈ top ∖ keep)`.
///
/// Much slower than [`SemilinearSet::closure`]; used to cross-check it.
pub fn limit_set_qe(region: &Region, top: Support, keep: Support, dim: usize) -> Region {
    let y = |i: usize| dim + i;
    let eps = 2 * dim;
    let big = 2 * dim + 1;
    let mut scope: BTreeSet<usize> = top.coords();
    scope.extend(keep.coords().into_iter().map(y));
    scope.insert(eps);
    scope.insert(big);
    let e = LinForm::var(eps);
    let mut tube = Vec::new();
    for i in top.coords() {
        let x = LinForm::var(i);
        if keep.contains(i) {
            let yi = LinForm::var(y(i));
            tube.push(Atom::less(&(&yi - &e), &x));
            tube.push(Atom::less(&x, &(&yi + &e)));
        } else {
            tube.push(Atom::less(&LinForm::var(big), &x));
        }
    }
    let mut disjuncts = vec![Polyhedron::new(scope.clone(), vec![Atom::le(e.clone())])];
    for p in region.disjuncts() {
        disjuncts.push(p.with_scope(scope.clone()).and_atoms(tube.iter().cloned()));
    }
    let body = Region::new(scope, disjuncts);
    let mut prefix = vec![(Quantifier::Forall, eps), (Quantifier::Forall, big)];
    prefix.extend(top.coords().into_iter().map(|i| (Quantifier::Exists, i)));
    let r = crate::qlin::qe(&prefix, &body);
    r.rename(&|j| j - dim)
}

/// Closure computed entirely through [`limit_set_qe`].
pub fn closure_by_qe(s: &SemilinearSet) -> SemilinearSet {
    let mut out = SemilinearSet::empty(s.ambient_dim());
    for (&top, region) in s.pieces() {
        for keep in top.subsets() {
            out.insert_piece(keep, limit_set_qe(region, top, keep, s.ambient_dim()));
        }
    }
    out
}

/// Lower bounds per coordinate of a bounded set, one rational `c` with
/// `S ⊆ Π [c, ∞]`.
pub fn lower_bound(s: &SemilinearSet) -> Option<Rat> {
    if !s.is_bounded() {
        return None;
    }
    let mut best = Rat::zero();
    for (&l, region) in s.pieces() {
        for poly in region.disjuncts() {
            for i in l.coords() {
                let proj = poly.project_onto(&BTreeSet::from([i]));
                if proj.is_trivially_false() {
                    continue;
                }
                for a in proj.atoms() {
                    let c = a.form.coeff(i);
                    if c.is_negative() || a.rel == Rel::Eq {
                        let b = -(a.form.constant_term() / &c);
                        if b < best {
                            best = b;
                        }
                    }
                }
            }
        }
    }
    Some(best)
}
