//! Cohomology with constant coefficients.
//!
//! A locally closed set `X` is modelled by a regular complex on the compact
//! closure `P` of its partial completion, adapted to the image `E` of `X`.
//! Then `H^*(X)` is the cohomology of the order complex of the cells in `E`
//! (an upward closed family of cells, whose union deformation retracts onto
//! that order complex), and `H^*_c(X)` is the relative cohomology of the
//! order complexes of `P` and `P ∖ E`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::celldec::{build_complex, cell_core, Cell, CellError, RegularComplex};
use crate::linalg::{
    factor_to_u64, rank_gf2, rank_of_vectors, smith_invariants, DenseMatrix, Field, Gf2, SparseIntMatrix,
};
use crate::qlin::{ExtRat, LinForm, Atom, Rat, Region};
use crate::stratal::{fmt_point, SemilinearSet, Support};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CohomError {
    #[error("set is not definably compact")]
    NotCompact,
    #[error("set is not locally closed near {}", fmt_point(.0))]
    NotLocallyClosed(Vec<ExtRat>),
    #[error(transparent)]
    Cell(#[from] CellError),
    #[error("ambient dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("internal error: {0}")]
    Internal(String),
}

/// Coefficient ring of the constant sheaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CoeffRing {
    Q,
    Z,
    Z2,
}

impl fmt::Display for CoeffRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoeffRing::Q => "Q",
            CoeffRing::Z => "Z",
            CoeffRing::Z2 => "Z2",
        })
    }
}

impl FromStr for CoeffRing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "Q" => Ok(CoeffRing::Q),
            "Z" => Ok(CoeffRing::Z),
            "Z2" => Ok(CoeffRing::Z2),
            _ => Err(format!("unknown coefficient ring {s:?}; expected Q, Z or Z2")),
        }
    }
}

/// Ranks of cohomology groups by degree, with torsion over `ℤ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BettiReport {
    pub coeff: CoeffRing,
    pub ranks: Vec<usize>,
    pub torsion: Vec<Vec<u64>>,
    pub euler: i64,
}

impl BettiReport {
    /// Trims trailing zero degrees and fills in the Euler characteristic.
    pub fn new(coeff: CoeffRing, mut ranks: Vec<usize>, mut torsion: Vec<Vec<u64>>) -> Self {
        if coeff != CoeffRing::Z {
            torsion.clear();
        } else {
            torsion.resize(ranks.len().max(torsion.len()), Vec::new());
            ranks.resize(torsion.len(), 0);
        }
        while ranks.last() == Some(&0) && torsion.last().is_none_or(|t| t.is_empty()) {
            ranks.pop();
            torsion.pop();
        }
        let euler = ranks.iter().enumerate().map(|(p, r)| if p % 2 == 0 { *r as i64 } else { -(*r as i64) }).sum();
        BettiReport { coeff, ranks, torsion, euler }
    }

    pub fn zero(coeff: CoeffRing) -> Self {
        BettiReport::new(coeff, Vec::new(), Vec::new())
    }

    pub fn rank(&self, p: usize) -> usize {
        self.ranks.get(p).copied().unwrap_or(0)
    }
}

impl fmt::Display for BettiReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r: Vec<String> = self.ranks.iter().map(ToString::to_string).collect();
        write!(f, "({}) over {}", r.join(","), self.coeff)
    }
}

/// Chains of a face poset, grouped by length: `simplices[p]` holds the
/// `p`-simplices, each listing its cells from lowest to highest.
#[derive(Clone, Debug, Default)]
pub struct SimplicialComplex {
    pub vertex_count: usize,
    pub simplices: Vec<Vec<Vec<u32>>>,
}

impl SimplicialComplex {
    pub fn dimension(&self) -> i64 {
        self.simplices.len() as i64 - 1
    }

    pub fn count(&self, p: usize) -> usize {
        self.simplices.get(p).map_or(0, Vec::len)
    }

    fn index(&self) -> Vec<HashMap<&[u32], usize>> {
        self.simplices
            .iter()
            .map(|list| list.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect())
            .collect()
    }
}

/// The order complex of a regular complex.
pub fn order_complex(r: &RegularComplex) -> SimplicialComplex {
    chains(&r.below, &vec![true; r.len()])
}

/// The order complex of the cells marked in `members`.
pub fn chains(below: &[Vec<usize>], members: &[bool]) -> SimplicialComplex {
    let mut out = SimplicialComplex { vertex_count: members.iter().filter(|m| **m).count(), simplices: Vec::new() };
    let mut stack: Vec<u32> = Vec::new();
    for top in 0..below.len() {
        if members[top] {
            stack.push(top as u32);
            extend_chains(below, members, &mut stack, &mut out.simplices);
            stack.pop();
        }
    }
    for list in out.simplices.iter_mut() {
        list.sort();
    }
    out
}

fn extend_chains(below: &[Vec<usize>], members: &[bool], stack: &mut Vec<u32>, out: &mut Vec<Vec<Vec<u32>>>) {
    let p = stack.len() - 1;
    if out.len() <= p {
        out.resize(p + 1, Vec::new());
    }
    out[p].push(stack.iter().rev().copied().collect());
    let last = *stack.last().unwrap() as usize;
    for &g in &below[last] {
        if members[g] {
            stack.push(g as u32);
            extend_chains(below, members, stack, out);
            stack.pop();
        }
    }
}

/// Simplicial chains of `Δ(include)` modulo those of `Δ(exclude)`.
struct ChainComplex {
    simplices: Vec<Vec<Vec<u32>>>,
}

impl ChainComplex {
    fn new(below: &[Vec<usize>], include: &[bool], exclude: Option<&[bool]>) -> Self {
        let all = chains(below, include);
        let simplices = match exclude {
            None => all.simplices,
            Some(ex) => all
                .simplices
                .into_iter()
                .map(|list| list.into_iter().filter(|s| !s.iter().all(|v| ex[*v as usize])).collect())
                .collect(),
        };
        ChainComplex { simplices }
    }

    /// Boundary `C_p → C_{p−1}` as `(row, sign)` columns.
    fn boundary(&self, p: usize, index: &HashMap<&[u32], usize>) -> Vec<Vec<(usize, i64)>> {
        self.simplices[p]
            .iter()
            .map(|s| {
                let mut face = Vec::with_capacity(p);
                (0..=p)
                    .filter_map(|i| {
                        face.clear();
                        face.extend(s.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, v)| *v));
                        index.get(face.as_slice()).map(|&r| (r, if i % 2 == 0 { 1 } else { -1 }))
                    })
                    .collect()
            })
            .collect()
    }

    fn report(&self, coeff: CoeffRing) -> BettiReport {
        let top = self.simplices.len();
        if top == 0 {
            return BettiReport::zero(coeff);
        }
        let index: Vec<HashMap<&[u32], usize>> = self
            .simplices
            .iter()
            .map(|list| list.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect())
            .collect();
        // rank[p] = rank of ∂_p, torsion[p] = invariant factors > 1 of ∂_p
        let mut rank = vec![0usize; top + 1];
        let mut torsion = vec![Vec::new(); top + 1];
        for p in 1..top {
            let cols = self.boundary(p, &index[p - 1]);
            match coeff {
                CoeffRing::Z2 => {
                    let bits: Vec<Vec<usize>> = cols.into_iter().map(|c| c.into_iter().map(|(r, _)| r).collect()).collect();
                    rank[p] = rank_gf2(&bits);
                }
                CoeffRing::Q | CoeffRing::Z => {
                    let inv = smith_invariants(&SparseIntMatrix::new(self.simplices[p - 1].len(), cols));
                    rank[p] = inv.len();
                    if coeff == CoeffRing::Z {
                        torsion[p] = inv.iter().filter(|v| !v.is_one()).map(factor_to_u64).collect();
                    }
                }
            }
        }
        let ranks: Vec<usize> = (0..top).map(|p| self.simplices[p].len() - rank[p] - rank[p + 1]).collect();
        let tors: Vec<Vec<u64>> = (0..top).map(|p| torsion[p].clone()).collect();
        BettiReport::new(coeff, ranks, tors)
    }
}

/// Mod-2 Betti numbers of the order complex of the cells in `members`.
pub fn subposet_betti_z2(below: &[Vec<usize>], members: &[bool]) -> Vec<usize> {
    ChainComplex::new(below, members, None).report(CoeffRing::Z2).ranks
}

/// A regular complex modelling a locally closed set together with some
/// subsets of it.
#[derive(Clone, Debug)]
pub struct Model {
    pub complex: RegularComplex,
    /// Cells lying in the set itself.
    pub in_set: Vec<bool>,
    /// Cells lying in each extra target, in the order given.
    pub in_targets: Vec<Vec<bool>>,
}

/// Builds the model of the locally closed `x`, refined along `extra`.
///
/// Targets are handed to the complex builder as `extra` followed by `x`.
pub fn model(x: &SemilinearSet, extra: &[SemilinearSet]) -> Result<Model, CohomError> {
    for e in extra {
        if e.ambient_dim() != x.ambient_dim() {
            return Err(CohomError::DimensionMismatch(x.ambient_dim(), e.ambient_dim()));
        }
    }
    if let Some(w) = x.local_closure_witness() {
        return Err(CohomError::NotLocallyClosed(w));
    }
    let mut fold = x.unbounded_below_coords();
    for e in extra {
        fold.extend(e.unbounded_below_coords());
    }
    let (image, _) = x.embed_partially(&fold);
    let extra_images: Vec<SemilinearSet> = extra.iter().map(|e| e.embed_partially(&fold).0).collect();
    let roi = image.closure();
    let mut targets = extra_images.clone();
    targets.push(image.clone());
    let complex = build_complex(&roi, &targets)?;
    let in_set = complex.cells_in(&image);
    let in_targets = extra_images.iter().map(|e| complex.cells_in(e)).collect();
    Ok(Model { complex, in_set, in_targets })
}

/// Which cohomology to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Supports {
    /// Ordinary cohomology `H^*`.
    Closed,
    /// Cohomology with definably compact supports `H^*_c`.
    Compact,
}

/// Cohomology of a locally closed set, computed on a model refined along
/// `extra` (which only changes the complex, never the answer).
pub fn cohomology_with(
    x: &SemilinearSet,
    coeff: CoeffRing,
    supports: Supports,
    extra: &[SemilinearSet],
) -> Result<BettiReport, CohomError> {
    if x.is_empty() {
        return Ok(BettiReport::zero(coeff));
    }
    let m = model(x, extra)?;
    let all = vec![true; m.complex.len()];
    let cc = match supports {
        Supports::Closed => ChainComplex::new(&m.complex.below, &m.in_set, None),
        Supports::Compact => {
            let outside: Vec<bool> = m.in_set.iter().map(|b| !b).collect();
            ChainComplex::new(&m.complex.below, &all, Some(&outside))
        }
    };
    let report = cc.report(coeff);
    let dim = x.dimension();
    if report.ranks.len() as i64 > dim + 1 || report.torsion.len() as i64 > dim + 1 {
        return Err(CohomError::Internal(format!(
            "nonzero cohomology above the dimension {dim}: {:?}",
            report.ranks
        )));
    }
    Ok(report)
}

/// `H^*` of a definably compact set.
pub fn betti(z: &SemilinearSet, coeff: CoeffRing) -> Result<BettiReport, CohomError> {
    if !z.is_definably_compact() {
        return Err(CohomError::NotCompact);
    }
    cohomology_with(z, coeff, Supports::Closed, &[])
}

/// `H^*` of a locally closed set.
pub fn betti_locally_closed(x: &SemilinearSet, coeff: CoeffRing) -> Result<BettiReport, CohomError> {
    cohomology_with(x, coeff, Supports::Closed, &[])
}

/// `H^*_c` of a locally closed set.
pub fn betti_c(x: &SemilinearSet, coeff: CoeffRing) -> Result<BettiReport, CohomError> {
    cohomology_with(x, coeff, Supports::Compact, &[])
}

/// Cochains over a field on subcomplexes `Δ(S)` of one order complex.
struct Cochains<'a> {
    sc: &'a SimplicialComplex,
    index: Vec<HashMap<&'a [u32], usize>>,
}

/// The simplices of `Δ(S)` in one degree, by global index.
struct Sub {
    globals: Vec<usize>,
    local: HashMap<usize, usize>,
}

impl<'a> Cochains<'a> {
    fn new(sc: &'a SimplicialComplex) -> Self {
        Cochains { sc, index: sc.index() }
    }

    fn sub(&self, mask: &[bool], p: usize) -> Sub {
        let globals: Vec<usize> = match self.sc.simplices.get(p) {
            None => Vec::new(),
            Some(list) => {
                (0..list.len()).filter(|&i| list[i].iter().all(|v| mask[*v as usize])).collect()
            }
        };
        let local = globals.iter().enumerate().map(|(l, g)| (*g, l)).collect();
        Sub { globals, local }
    }

    /// `δ^p` on `Δ(S)`, with rows indexed by `hi` and columns by `lo`.
    fn coboundary<F: Field>(&self, lo: &Sub, hi: &Sub, p: usize) -> DenseMatrix<F> {
        let mut m = DenseMatrix::<F>::zeros(hi.globals.len(), lo.globals.len());
        let mut face = Vec::with_capacity(p + 1);
        for (row, &g) in hi.globals.iter().enumerate() {
            let s = &self.sc.simplices[p + 1][g];
            for i in 0..=p + 1 {
                face.clear();
                face.extend(s.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, v)| *v));
                if let Some(fg) = self.index[p].get(face.as_slice()) {
                    if let Some(&col) = lo.local.get(fg) {
                        let v = if i % 2 == 0 { F::one() } else { F::zero().sub(&F::one()) };
                        m.data[row][col] = m.data[row][col].add(&v);
                    }
                }
            }
        }
        m
    }

    /// Cocycles and coboundaries of `Δ(S)` in degree `p`.
    fn groups<F: Field>(&self, mask: &[bool], p: usize) -> Groups<F> {
        let here = self.sub(mask, p);
        let next = self.sub(mask, p + 1);
        let cocycles = self.coboundary::<F>(&here, &next, p).nullspace();
        let coboundaries = if p == 0 {
            Vec::new()
        } else {
            let prev = self.sub(mask, p - 1);
            let d = self.coboundary::<F>(&prev, &here, p - 1);
            (0..d.cols).map(|j| d.col(j)).collect()
        };
        let b_rank = rank_of_vectors(here.globals.len(), &coboundaries);
        Groups { sub: here, next, cocycles, coboundaries, b_rank }
    }
}

struct Groups<F: Field> {
    sub: Sub,
    next: Sub,
    cocycles: Vec<Vec<F>>,
    coboundaries: Vec<Vec<F>>,
    b_rank: usize,
}

impl<F: Field> Groups<F> {
    fn dim(&self) -> usize {
        self.cocycles.len() - self.b_rank
    }
}

/// Restricts a cochain on `from` to the simplices of `to ⊆ from`.
fn restrict<F: Field>(v: &[F], from: &Sub, to: &Sub) -> Vec<F> {
    to.globals.iter().map(|g| v[from.local[g]].clone()).collect()
}

/// Extends a cochain on `from ⊆ to` by zero.
fn extend<F: Field>(v: &[F], from: &Sub, to: &Sub) -> Vec<F> {
    let mut out = vec![F::zero(); to.globals.len()];
    for (l, g) in from.globals.iter().enumerate() {
        out[to.local[g]] = v[l].clone();
    }
    out
}

/// Rank of the map `H^p(A) → H^p(B)` induced by restriction, `B ⊆ A`.
fn restriction_rank<F: Field>(a: &Groups<F>, b: &Groups<F>) -> usize {
    let mut vecs: Vec<Vec<F>> = a.cocycles.iter().map(|z| restrict(z, &a.sub, &b.sub)).collect();
    vecs.extend(b.coboundaries.iter().cloned());
    rank_of_vectors(b.sub.globals.len(), &vecs) - b.b_rank
}

fn is_mod_two(coeff: CoeffRing) -> bool {
    coeff == CoeffRing::Z2
}

/// Rank of `H^degree(P) → H^degree(Q)` for compact `Q ⊆ P`. Over `ℤ` this is
/// the rank of the map on free parts.
pub fn restriction_map_rank(
    p: &SemilinearSet,
    q: &SemilinearSet,
    coeff: CoeffRing,
    degree: usize,
) -> Result<usize, CohomError> {
    if !p.is_definably_compact() || !q.is_definably_compact() {
        return Err(CohomError::NotCompact);
    }
    if !q.is_subset(p) {
        return Err(CohomError::Config("Q must be contained in P".into()));
    }
    if q.is_empty() {
        return Ok(0);
    }
    let m = model(p, std::slice::from_ref(q))?;
    let sc = order_complex(&m.complex);
    let co = Cochains::new(&sc);
    let all = vec![true; m.complex.len()];
    Ok(if is_mod_two(coeff) {
        restriction_rank(&co.groups::<Gf2>(&all, degree), &co.groups::<Gf2>(&m.in_targets[0], degree))
    } else {
        restriction_rank(&co.groups::<Rat>(&all, degree), &co.groups::<Rat>(&m.in_targets[0], degree))
    })
}

/// One degree of a Mayer–Vietoris sequence
/// `H^p(X) → H^p(U) ⊕ H^p(V) → H^p(U∩V) → H^{p+1}(X)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MvDegree {
    pub degree: usize,
    pub h_x: usize,
    pub h_u: usize,
    pub h_v: usize,
    pub h_uv: usize,
    pub rank_restrict: usize,
    pub rank_difference: usize,
    pub rank_connecting: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MvReport {
    pub degrees: Vec<MvDegree>,
    pub exact: bool,
    /// Degrees and positions where a rank condition fails.
    pub failures: Vec<String>,
}

/// Checks exactness of the Mayer–Vietoris sequence of a compact `X` covered
/// by two closed subsets `U`, `V`. Over `ℤ` the ranks of free parts are
/// compared.
pub fn mv_check(
    x: &SemilinearSet,
    u: &SemilinearSet,
    v: &SemilinearSet,
    coeff: CoeffRing,
) -> Result<MvReport, CohomError> {
    if !x.is_definably_compact() {
        return Err(CohomError::NotCompact);
    }
    if !u.is_closed() || !v.is_closed() {
        return Err(CohomError::Config("U and V must be closed".into()));
    }
    if !u.union(v).set_eq(x) {
        return Err(CohomError::Config("U and V must cover X exactly".into()));
    }
    let m = model(x, &[u.clone(), v.clone()])?;
    let sc = order_complex(&m.complex);
    if is_mod_two(coeff) {
        Ok(mv_ranks::<Gf2>(&sc, &m))
    } else {
        Ok(mv_ranks::<Rat>(&sc, &m))
    }
}

fn mv_ranks<F: Field>(sc: &SimplicialComplex, m: &Model) -> MvReport {
    let co = Cochains::new(sc);
    let mx = vec![true; m.complex.len()];
    let mu = &m.in_targets[0];
    let mv = &m.in_targets[1];
    let mw: Vec<bool> = mu.iter().zip(mv).map(|(a, b)| *a && *b).collect();
    let top = sc.simplices.len();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut prev_connecting = 0;
    for p in 0..top {
        let gx = co.groups::<F>(&mx, p);
        let gu = co.groups::<F>(mu, p);
        let gv = co.groups::<F>(mv, p);
        let gw = co.groups::<F>(&mw, p);
        let (nu, nv) = (gu.sub.globals.len(), gv.sub.globals.len());

        let mut vecs: Vec<Vec<F>> = gx
            .cocycles
            .iter()
            .map(|z| {
                let mut a = restrict(z, &gx.sub, &gu.sub);
                a.extend(restrict(z, &gx.sub, &gv.sub));
                a
            })
            .collect();
        for b in &gu.coboundaries {
            let mut a = b.clone();
            a.extend(vec![F::zero(); nv]);
            vecs.push(a);
        }
        for b in &gv.coboundaries {
            let mut a = vec![F::zero(); nu];
            a.extend(b.iter().cloned());
            vecs.push(a);
        }
        let rank_restrict = rank_of_vectors(nu + nv, &vecs) - gu.b_rank - gv.b_rank;

        let mut vecs: Vec<Vec<F>> = gu.cocycles.iter().map(|z| restrict(z, &gu.sub, &gw.sub)).collect();
        vecs.extend(
            gv.cocycles
                .iter()
                .map(|z| restrict(z, &gv.sub, &gw.sub).into_iter().map(|c| F::zero().sub(&c)).collect()),
        );
        vecs.extend(gw.coboundaries.iter().cloned());
        let rank_difference = rank_of_vectors(gw.sub.globals.len(), &vecs) - gw.b_rank;

        // δ: extend a cocycle of U∩V by zero to U, take δ there, extend by zero to X
        let rank_connecting = if p + 1 < top {
            let gx1 = co.groups::<F>(&mx, p + 1);
            let d = co.coboundary::<F>(&gu.sub, &gu.next, p);
            let mut vecs: Vec<Vec<F>> = gw
                .cocycles
                .iter()
                .map(|z| {
                    let c = extend(z, &gw.sub, &gu.sub);
                    extend(&d.mul_vec(&c), &gu.next, &gx1.sub)
                })
                .collect();
            vecs.extend(gx1.coboundaries.iter().cloned());
            rank_of_vectors(gx1.sub.globals.len(), &vecs) - gx1.b_rank
        } else {
            0
        };

        let row = MvDegree {
            degree: p,
            h_x: gx.dim(),
            h_u: gu.dim(),
            h_v: gv.dim(),
            h_uv: gw.dim(),
            rank_restrict,
            rank_difference,
            rank_connecting,
        };
        if row.h_x != prev_connecting + row.rank_restrict {
            failures.push(format!("H^{p}(X)"));
        }
        if row.h_u + row.h_v != row.rank_restrict + row.rank_difference {
            failures.push(format!("H^{p}(U)+H^{p}(V)"));
        }
        if row.h_uv != row.rank_difference + row.rank_connecting {
            failures.push(format!("H^{p}(U∩V)"));
        }
        prev_connecting = rank_connecting;
        rows.push(row);
    }
    MvReport { exact: failures.is_empty(), degrees: rows, failures }
}

/// Comparison of a set with its product by a closed interval.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomotopyReport {
    pub base: BettiReport,
    pub product: BettiReport,
    pub base_c: BettiReport,
    pub product_c: BettiReport,
    /// `H^*(X × [a,b]) ≅ H^*(X)` rank-wise.
    pub holds: bool,
    /// `H^*_c(X × [a,b]) ≅ H^*_c(X)` rank-wise.
    pub holds_compact: bool,
}

/// The closed interval `[a, b]` of `Γ∞`.
pub fn closed_interval(a: &ExtRat, b: &ExtRat) -> SemilinearSet {
    let lo = a.finite().expect("finite lower end").clone();
    let x = LinForm::var(0);
    let mut atoms = vec![Atom::less_eq(&LinForm::constant(lo), &x)];
    let mut s = match b {
        ExtRat::Finite(hi) => {
            atoms.push(Atom::less_eq(&x, &LinForm::constant(hi.clone())));
            SemilinearSet::finite_from_atoms(1, atoms)
        }
        ExtRat::PosInf => SemilinearSet::finite_from_atoms(1, atoms),
    };
    if b.is_inf() {
        s.insert_piece(Support::empty(), Region::universe(Default::default()));
    }
    s
}

/// Compares `H^*` and `H^*_c` of `X` and `X × [a, b]`.
pub fn homotopy_check(
    x: &SemilinearSet,
    a: &ExtRat,
    b: &ExtRat,
    coeff: CoeffRing,
) -> Result<HomotopyReport, CohomError> {
    match (a, b) {
        (ExtRat::Finite(_), _) if a < b => {}
        _ => return Err(CohomError::Config(format!("need a < b with a finite, got [{a}, {b}]"))),
    }
    let y = x.product(&closed_interval(a, b));
    let base = betti_locally_closed(x, coeff)?;
    let product = betti_locally_closed(&y, coeff)?;
    let base_c = betti_c(x, coeff)?;
    let product_c = betti_c(&y, coeff)?;
    Ok(HomotopyReport {
        holds: base.ranks == product.ranks,
        holds_compact: base_c.ranks == product_c.ranks,
        base,
        product,
        base_c,
        product_c,
    })
}

/// `H^*` of a cell minus its core `C_(t,s)`.
pub fn complement_table(c: &Cell, t: &Rat, s: &Rat, coeff: CoeffRing) -> Result<BettiReport, CohomError> {
    if c.dimension() == 0 {
        return Err(CohomError::Config("the cell must have positive dimension".into()));
    }
    let core = cell_core(c, t, s)?;
    betti_locally_closed(&c.denotation().difference(&core), coeff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlin::{int, rat};
    use crate::testutil::*;

    fn ranks(r: Result<BettiReport, CohomError>) -> Vec<usize> {
        r.unwrap().ranks
    }

    #[test]
    fn order_complex_examples() {
        let pt = build_complex(&point2(0, 0), &[]).unwrap();
        let oc = order_complex(&pt);
        assert_eq!((oc.vertex_count, oc.count(1)), (1, 0));

        let seg = build_complex(&interval(0, 1), &[]).unwrap();
        let oc = order_complex(&seg);
        assert_eq!((oc.count(0), oc.count(1), oc.count(2)), (3, 2, 0));

        let sq = build_complex(&square_boundary(), &[]).unwrap();
        let oc = order_complex(&sq);
        assert_eq!((oc.count(0), oc.count(1)), (8, 8));
    }

    #[test]
    fn betti_examples() {
        for coeff in [CoeffRing::Q, CoeffRing::Z, CoeffRing::Z2] {
            assert_eq!(ranks(betti(&point2(3, -1), coeff)), vec![1]);
            assert_eq!(ranks(betti(&square_boundary(), coeff)), vec![1, 1]);
        }
        assert_eq!(ranks(betti(&closed_orthant(2), CoeffRing::Q)), vec![1]);
        assert_eq!(betti(&open_interval(0, 1), CoeffRing::Q), Err(CohomError::NotCompact));
        let e = betti(&SemilinearSet::empty(2), CoeffRing::Q).unwrap();
        assert_eq!((e.ranks.len(), e.euler), (0, 0));
    }

    #[test]
    fn compact_support_examples() {
        assert_eq!(ranks(betti_c(&open_interval(0, 1), CoeffRing::Q)), vec![0, 1]);
        let half = half_open_to_infinity(2);
        assert_eq!(ranks(betti_c(&half, CoeffRing::Q)), Vec::<usize>::new());
        assert_eq!(ranks(betti_c(&point2(0, 0), CoeffRing::Q)), vec![1]);
        // the whole finite line and plane
        assert_eq!(ranks(betti_c(&SemilinearSet::finite_universe(1), CoeffRing::Q)), vec![0, 1]);
        assert_eq!(ranks(betti_c(&SemilinearSet::finite_universe(2), CoeffRing::Z)), vec![0, 0, 1]);
    }

    #[test]
    fn locally_closed_cohomology() {
        assert_eq!(ranks(betti_locally_closed(&open_interval(0, 1), CoeffRing::Q)), vec![1]);
        assert_eq!(ranks(betti_locally_closed(&SemilinearSet::finite_universe(2), CoeffRing::Q)), vec![1]);
        assert!(matches!(
            betti_c(&not_locally_closed(), CoeffRing::Q),
            Err(CohomError::NotLocallyClosed(_))
        ));
    }

    #[test]
    fn torsion_free_over_integers() {
        let r = betti(&square_boundary(), CoeffRing::Z).unwrap();
        assert_eq!(r.torsion, vec![Vec::<u64>::new(), vec![]]);
        assert_eq!(r.euler, 0);
    }

    #[test]
    fn restriction_examples() {
        let p = interval(0, 1);
        let q = points1(&[0, 1]);
        assert_eq!(restriction_map_rank(&p, &q, CoeffRing::Q, 0).unwrap(), 1);
        assert_eq!(restriction_map_rank(&p, &SemilinearSet::empty(1), CoeffRing::Q, 0).unwrap(), 0);
        let sq = square_boundary();
        assert_eq!(restriction_map_rank(&sq, &sq, CoeffRing::Q, 1).unwrap(), 1);
        assert_eq!(restriction_map_rank(&sq, &sq, CoeffRing::Z2, 0).unwrap(), 1);
    }

    #[test]
    fn pair_sequence_bookkeeping() {
        for x in [open_interval(0, 1), half_open_to_infinity(0), lc_l_shape()] {
            let pair = x.compact_pair().unwrap();
            let hc = betti_c(&x, CoeffRing::Q).unwrap();
            for l in 0..3 {
                let hp = betti(&pair.p, CoeffRing::Q).unwrap();
                let hq = if pair.q.is_empty() { BettiReport::zero(CoeffRing::Q) } else { betti(&pair.q, CoeffRing::Q).unwrap() };
                let r = restriction_map_rank(&pair.p, &pair.q, CoeffRing::Q, l).unwrap();
                let r_prev = if l == 0 { 0 } else { restriction_map_rank(&pair.p, &pair.q, CoeffRing::Q, l - 1).unwrap() };
                let coker_prev = if l == 0 { 0 } else { hq.rank(l - 1) - r_prev };
                assert_eq!(hc.rank(l), hp.rank(l) - r + coker_prev, "degree {l} of {x}");
            }
        }
    }

    #[test]
    fn mayer_vietoris_examples() {
        let r = mv_check(&interval(0, 2), &interval(0, 1), &interval(1, 2), CoeffRing::Q).unwrap();
        assert!(r.exact, "{r:?}");
        assert_eq!((r.degrees[0].h_x, r.degrees[0].h_u, r.degrees[0].h_v, r.degrees[0].h_uv), (1, 1, 1, 1));

        let (u, v) = square_arcs();
        let r = mv_check(&square_boundary(), &u, &v, CoeffRing::Q).unwrap();
        assert!(r.exact, "{r:?}");
        assert_eq!(r.degrees[0].h_uv, 2);
        assert_eq!(r.degrees[0].rank_connecting, 1);
        assert_eq!(r.degrees[1].h_x, 1);

        let x = square_boundary();
        let r = mv_check(&x, &x, &x, CoeffRing::Z2).unwrap();
        assert!(r.exact);
        assert_eq!(r.degrees[1].rank_restrict, 1);

        assert!(matches!(
            mv_check(&interval(0, 2), &interval(0, 1), &open_interval(1, 2), CoeffRing::Q),
            Err(CohomError::Config(_))
        ));
    }

    #[test]
    fn homotopy_examples() {
        let zero = ExtRat::Finite(int(0));
        let one = ExtRat::Finite(int(1));
        let r = homotopy_check(&point1(0), &zero, &one, CoeffRing::Q).unwrap();
        assert!(r.holds && r.holds_compact);
        assert_eq!(r.product.ranks, vec![1]);
        let r = homotopy_check(&square_boundary(), &zero, &ExtRat::PosInf, CoeffRing::Q).unwrap();
        assert!(r.holds);
        assert_eq!(r.product.ranks, vec![1, 1]);
        let r = homotopy_check(&closed_ray(0), &ExtRat::Finite(rat(1, 2)), &one, CoeffRing::Z2).unwrap();
        assert!(r.holds && r.holds_compact);
        assert!(homotopy_check(&point1(0), &one, &zero, CoeffRing::Q).is_err());
    }

    #[test]
    fn cells_are_acyclic() {
        let d = crate::celldec::decompose(&[], 2);
        for c in &d.cells {
            let x = c.denotation();
            assert_eq!(ranks(betti_locally_closed(&x, CoeffRing::Q)), vec![1], "{c}");
        }
    }
}
