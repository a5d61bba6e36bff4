//! Cells, cylindrical decompositions of `Γ∞^n`, connected components and
//! regular cell complexes.
//!
//! A [`Cell`] is built coordinate by coordinate: over a base cell in `Γ∞^k`
//! it is either the graph of a bound function or the band strictly between
//! two of them. Bound functions are affine in the finite base coordinates or
//! the constant `∞` (and `−∞` as a lower bound). [`decompose`] produces a
//! cylindrical decomposition adapted to finitely many sets, eliminating the
//! last coordinate first.
//!
//! Cohomology needs more than a partition: [`build_complex`] cuts a definably
//! compact set into relatively open convex pieces whose closures are unions of
//! pieces, which is what the order-complex model in [`crate::cohom`] needs.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::qlin::{int, rank_of_forms, Atom, ExtRat, LinForm, Polyhedron, Rat, Region, Rel};
use crate::stratal::{fmt_point, SemilinearSet, StratalError, Support};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CellError {
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("set is not definably compact")]
    NotCompact,
    #[error("invalid cell: {0}")]
    InvalidCell(String),
    #[error("cell is not contained in [0, inf]^{0}")]
    NotInPositiveOrthant(usize),
    #[error(transparent)]
    Stratal(#[from] StratalError),
}

/// A bound function of a cell.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CellFn {
    /// Affine in the finite coordinates of the base.
    Affine(LinForm),
    ConstInf,
    /// Only legal as the lower bound of a band.
    ConstNegInfBound,
}

impl CellFn {
    fn describe(&self, name: &dyn Fn(usize) -> String) -> String {
        match self {
            CellFn::Affine(f) => f.display_with(name),
            CellFn::ConstInf => "inf".to_string(),
            CellFn::ConstNegInfBound => "-inf".to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CellKind {
    /// The single point of `Γ∞^0`.
    Root,
    Graph(CellFn),
    Band(CellFn, CellFn),
}

/// A cell of `Γ∞^depth`. Its points all share one support, and the cell is
/// cut out of that stratum by a single convex polyhedron.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub depth: usize,
    pub base: Option<Arc<Cell>>,
    pub kind: CellKind,
    pub support: Support,
    pub poly: Polyhedron,
    pub sample: Vec<ExtRat>,
}

impl Cell {
    pub fn root() -> Arc<Cell> {
        Arc::new(Cell {
            depth: 0,
            base: None,
            kind: CellKind::Root,
            support: Support::empty(),
            poly: Polyhedron::universe(BTreeSet::new()),
            sample: Vec::new(),
        })
    }

    fn check_fn(base: &Cell, f: &CellFn) -> Result<(), CellError> {
        if let CellFn::Affine(form) = f {
            if let Some(v) = form.vars().find(|v| !base.support.contains(*v)) {
                return Err(CellError::InvalidCell(format!(
                    "bound function uses x{} which is not a finite coordinate of the base",
                    v + 1
                )));
            }
        }
        Ok(())
    }

    fn base_point(&self) -> BTreeMap<usize, Rat> {
        self.sample.iter().enumerate().filter_map(|(i, v)| v.finite().map(|q| (i, q.clone()))).collect()
    }

    /// `Γ(h)` over `base`.
    pub fn graph(base: &Arc<Cell>, h: CellFn) -> Result<Arc<Cell>, CellError> {
        Cell::check_fn(base, &h)?;
        let c = base.depth;
        let (support, poly, value) = match &h {
            CellFn::Affine(g) => {
                let support = base.support.with(c);
                let poly = base.poly.with_scope(support.coords()).and_atom(Atom::equal(&LinForm::var(c), g));
                let value = ExtRat::Finite(g.eval_map(&base.base_point()).expect("finite base point"));
                (support, poly, value)
            }
            CellFn::ConstInf => (base.support, base.poly.clone(), ExtRat::PosInf),
            CellFn::ConstNegInfBound => {
                return Err(CellError::InvalidCell("-inf can only bound a band from below".into()));
            }
        };
        let mut sample = base.sample.clone();
        sample.push(value);
        Ok(Arc::new(Cell { depth: c + 1, base: Some(base.clone()), kind: CellKind::Graph(h), support, poly, sample }))
    }

    /// `(f, g)` over `base`; requires `f < g` everywhere on the base.
    pub fn band(base: &Arc<Cell>, f: CellFn, g: CellFn) -> Result<Arc<Cell>, CellError> {
        Cell::check_fn(base, &f)?;
        Cell::check_fn(base, &g)?;
        let c = base.depth;
        let x = LinForm::var(c);
        let support = base.support.with(c);
        let mut atoms = Vec::new();
        match &f {
            CellFn::Affine(lo) => atoms.push(Atom::less(lo, &x)),
            CellFn::ConstNegInfBound => {}
            CellFn::ConstInf => return Err(CellError::InvalidCell("a band cannot start at inf".into())),
        }
        match &g {
            CellFn::Affine(hi) => atoms.push(Atom::less(&x, hi)),
            CellFn::ConstInf => {}
            CellFn::ConstNegInfBound => return Err(CellError::InvalidCell("-inf cannot bound a band from above".into())),
        }
        if let (CellFn::Affine(lo), CellFn::Affine(hi)) = (&f, &g) {
            if !base.poly.and_atom(Atom::less_eq(hi, lo)).is_empty() {
                return Err(CellError::InvalidCell(format!(
                    "lower bound {} is not below upper bound {} on the whole base",
                    lo, hi
                )));
            }
        }
        let poly = base.poly.with_scope(support.coords()).and_atoms(atoms);
        let bp = base.base_point();
        let value = match (&f, &g) {
            (CellFn::Affine(lo), CellFn::Affine(hi)) => (lo.eval_map(&bp).unwrap() + hi.eval_map(&bp).unwrap()) / int(2),
            (CellFn::Affine(lo), _) => lo.eval_map(&bp).unwrap() + Rat::one(),
            (_, CellFn::Affine(hi)) => hi.eval_map(&bp).unwrap() - Rat::one(),
            _ => Rat::zero(),
        };
        let mut sample = base.sample.clone();
        sample.push(ExtRat::Finite(value));
        Ok(Arc::new(Cell { depth: c + 1, base: Some(base.clone()), kind: CellKind::Band(f, g), support, poly, sample }))
    }

    pub fn denotation(&self) -> SemilinearSet {
        SemilinearSet::from_piece(self.depth, self.support, Region::new(self.support.coords(), vec![self.poly.clone()]))
    }

    /// Number of band steps in the tower.
    pub fn dimension(&self) -> usize {
        let own = usize::from(matches!(self.kind, CellKind::Band(..)));
        own + self.base.as_ref().map_or(0, |b| b.dimension())
    }

    /// The tower from the first coordinate up, e.g. `[(0, inf), {x1}, (0, x1)]`.
    pub fn describe(&self) -> String {
        let name = |i: usize| format!("x{}", i + 1);
        let mut steps = Vec::new();
        let mut cur = Some(self);
        while let Some(c) = cur {
            match &c.kind {
                CellKind::Root => {}
                CellKind::Graph(h) => steps.push(format!("{{{}}}", h.describe(&name))),
                CellKind::Band(f, g) => steps.push(format!("({}, {})", f.describe(&name), g.describe(&name))),
            }
            cur = c.base.as_deref();
        }
        steps.reverse();
        format!("[{}]", steps.join(", "))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

/// A partition of `Γ∞^n` into cells.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub dim: usize,
    pub cells: Vec<Arc<Cell>>,
}

impl Decomposition {
    /// Indices of the cells lying in `s`, decided at sample points.
    pub fn cells_in(&self, s: &SemilinearSet) -> Vec<usize> {
        (0..self.cells.len()).filter(|&i| s.contains(&self.cells[i].sample)).collect()
    }

    /// Pairwise disjoint and covering.
    pub fn is_partition(&self) -> bool {
        for (i, a) in self.cells.iter().enumerate() {
            for b in &self.cells[i + 1..] {
                if a.support == b.support && !a.poly.intersect(&b.poly).is_empty() {
                    return false;
                }
            }
        }
        let mut union = SemilinearSet::empty(self.dim);
        for c in &self.cells {
            union.insert_piece(c.support, Region::new(c.support.coords(), vec![c.poly.clone()]));
        }
        SemilinearSet::universe(self.dim).difference(&union).is_empty()
    }

    /// Whether `s` is exactly the union of the cells it contains.
    pub fn is_adapted_to(&self, s: &SemilinearSet) -> bool {
        let mut union = SemilinearSet::empty(self.dim);
        for i in self.cells_in(s) {
            union = union.union(&self.cells[i].denotation());
        }
        union.set_eq(s)
    }

    /// The distinct bases at depth `k`.
    pub fn project(&self, k: usize) -> Decomposition {
        assert!(k <= self.dim);
        let mut seen: Vec<Arc<Cell>> = Vec::new();
        for c in &self.cells {
            let mut cur = c.clone();
            while cur.depth > k {
                cur = cur.base.clone().expect("base");
            }
            if !seen.iter().any(|s| Arc::ptr_eq(s, &cur)) {
                seen.push(cur);
            }
        }
        Decomposition { dim: k, cells: seen }
    }
}

fn add_form(set: &mut Vec<LinForm>, seen: &mut BTreeSet<LinForm>, f: &LinForm) {
    if let Some(k) = f.hyperplane_key() {
        if seen.insert(k.clone()) {
            set.push(k);
        }
    }
}

/// Cylindrical decomposition of `Γ∞^dim` adapted to every target.
///
/// Boundary forms are collected per stratum and projected one coordinate at
/// a time, last coordinate first: forms that involve the eliminated
/// coordinate are solved for it and their pairwise differences passed down.
/// Lifting sorts the solved bound functions at each base cell's sample point.
pub fn decompose(targets: &[SemilinearSet], dim: usize) -> Decomposition {
    for t in targets {
        assert_eq!(t.ambient_dim(), dim, "targets must share the ambient dimension");
    }
    // forms[k][M]: forms over coordinates M ⊆ {0..k} whose signs must be
    // constant on every cell of Γ∞^k with support M.
    let mut forms: Vec<BTreeMap<Support, (Vec<LinForm>, BTreeSet<LinForm>)>> = vec![BTreeMap::new(); dim + 1];
    for t in targets {
        for (l, region) in t.pieces() {
            let (list, seen) = forms[dim].entry(*l).or_default();
            for p in region.disjuncts() {
                for a in p.atoms() {
                    add_form(list, seen, &a.form);
                }
            }
        }
    }
    for k in (1..=dim).rev() {
        let c = k - 1;
        let level: Vec<(Support, Vec<LinForm>)> = forms[k].iter().map(|(m, (l, _))| (*m, l.clone())).collect();
        for (m, list) in level {
            let below = m.without(c);
            let (out, seen) = forms[c].entry(below).or_default();
            let mut sections = Vec::new();
            for f in &list {
                if f.involves(c) {
                    sections.push(f.solve_for(c).expect("involves"));
                } else {
                    add_form(out, seen, f);
                }
            }
            for i in 0..sections.len() {
                for j in i + 1..sections.len() {
                    add_form(out, seen, &(&sections[i] - &sections[j]));
                }
            }
        }
    }
    let mut level = vec![Cell::root()];
    for k in 1..=dim {
        let c = k - 1;
        let mut next = Vec::new();
        for base in &level {
            let lifted = base.support.with(c);
            let bp = base.base_point();
            let mut sections: Vec<(Rat, LinForm)> = forms[k]
                .get(&lifted)
                .map(|(l, _)| {
                    l.iter()
                        .filter(|f| f.involves(c))
                        .map(|f| {
                            let g = f.solve_for(c).expect("involves");
                            (g.eval_map(&bp).expect("finite"), g)
                        })
                        .collect()
                })
                .unwrap_or_default();
            sections.sort_by(|a, b| a.0.cmp(&b.0));
            sections.dedup_by(|a, b| a.0 == b.0);
            let fns: Vec<CellFn> = sections.into_iter().map(|(_, g)| CellFn::Affine(g)).collect();
            let mut lower = CellFn::ConstNegInfBound;
            for g in &fns {
                next.push(Cell::band(base, lower, g.clone()).expect("sorted bounds"));
                next.push(Cell::graph(base, g.clone()).expect("graph"));
                lower = g.clone();
            }
            next.push(Cell::band(base, lower, CellFn::ConstInf).expect("top band"));
            next.push(Cell::graph(base, CellFn::ConstInf).expect("inf graph"));
        }
        level = next;
    }
    Decomposition { dim, cells: level }
}

/// Union-find with path halving.
pub(crate) struct Dsu(Vec<usize>);

impl Dsu {
    pub(crate) fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }
    pub(crate) fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }
    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// Definably connected components, in order of their first cell.
///
/// Two cells of a decomposition adapted to `s` are adjacent when one meets
/// the closure of the other; the components are the unions over connected
/// classes of that graph.
pub fn connected_components(s: &SemilinearSet) -> Vec<SemilinearSet> {
    let d = decompose(std::slice::from_ref(s), s.ambient_dim());
    let inside = d.cells_in(s);
    let cells: Vec<&Arc<Cell>> = inside.iter().map(|&i| &d.cells[i]).collect();
    let closures: Vec<SemilinearSet> = cells.iter().map(|c| c.denotation().closure()).collect();
    let mut dsu = Dsu::new(cells.len());
    for i in 0..cells.len() {
        for j in 0..cells.len() {
            if i == j || !cells[j].support.is_subset(cells[i].support) || dsu.find(i) == dsu.find(j) {
                continue;
            }
            if let Some(r) = closures[i].piece(cells[j].support) {
                let meets = r.disjuncts().iter().any(|p| !p.intersect(&cells[j].poly).is_empty());
                if meets {
                    dsu.union(i, j);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, SemilinearSet> = BTreeMap::new();
    for (i, c) in cells.iter().enumerate() {
        let root = dsu.find(i);
        let entry = groups.entry(root).or_insert_with(|| SemilinearSet::empty(s.ambient_dim()));
        entry.insert_piece(c.support, Region::new(c.support.coords(), vec![c.poly.clone()]));
    }
    groups.into_values().collect()
}

/// One relatively open convex cell of a [`RegularComplex`].
#[derive(Clone, Debug)]
pub struct ComplexCell {
    pub support: Support,
    pub poly: Polyhedron,
    pub sample: Vec<ExtRat>,
    pub dim: usize,
}

impl ComplexCell {
    pub fn geometry(&self, ambient: usize) -> SemilinearSet {
        SemilinearSet::from_piece(ambient, self.support, Region::new(self.support.coords(), vec![self.poly.clone()]))
    }
}

/// A finite regular cell complex. `below[i]` lists every cell in the
/// frontier of cell `i`, so the face relation is already transitive.
#[derive(Clone, Debug)]
pub struct RegularComplex {
    pub ambient: usize,
    pub cells: Vec<ComplexCell>,
    pub below: Vec<Vec<usize>>,
}

impl RegularComplex {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn dimension(&self) -> i64 {
        self.cells.iter().map(|c| c.dim as i64).max().unwrap_or(-1)
    }

    /// Membership mask of the cells lying in `s`.
    pub fn cells_in(&self, s: &SemilinearSet) -> Vec<bool> {
        self.cells.iter().map(|c| s.contains(&c.sample)).collect()
    }

    pub fn is_face(&self, g: usize, f: usize) -> bool {
        self.below[f].binary_search(&g).is_ok()
    }

    /// Counts of cells per dimension.
    pub fn f_vector(&self) -> Vec<usize> {
        let mut out = vec![0; (self.dimension() + 1).max(0) as usize];
        for c in &self.cells {
            out[c.dim] += 1;
        }
        out
    }

    /// Checks symbolically that every closed cell is the union of the cell and
    /// its listed faces, and that faces have lower dimension.
    pub fn verify_frontier(&self) -> bool {
        for (i, c) in self.cells.iter().enumerate() {
            let mut union = c.geometry(self.ambient);
            for &g in &self.below[i] {
                if self.cells[g].dim >= c.dim {
                    return false;
                }
                union.insert_piece(self.cells[g].support, Region::new(self.cells[g].support.coords(), vec![self.cells[g].poly.clone()]));
            }
            if !c.geometry(self.ambient).closure().set_eq(&union) {
                return false;
            }
        }
        true
    }

    /// Union of the geometry of all cells.
    pub fn carrier(&self) -> SemilinearSet {
        let mut out = SemilinearSet::empty(self.ambient);
        for c in &self.cells {
            out.insert_piece(c.support, Region::new(c.support.coords(), vec![c.poly.clone()]));
        }
        out
    }
}

struct Face {
    signs: Vec<i8>,
    poly: Polyhedron,
}

fn sign_atom(h: &LinForm, s: i8) -> Atom {
    match s {
        -1 => Atom::lt(h.clone()),
        0 => Atom::eq(h.clone()),
        _ => Atom::lt(-h),
    }
}

/// Faces of the arrangement `hyper` lying in `region`, deduplicated by sign
/// vector.
fn arrangement_faces(region: &Region, hyper: &[LinForm]) -> Vec<Face> {
    let mut pieces: Vec<(Polyhedron, Vec<i8>)> =
        region.disjuncts().iter().filter(|p| !p.is_empty()).map(|p| (p.clone(), Vec::new())).collect();
    for h in hyper {
        let mut next = Vec::with_capacity(pieces.len() * 2);
        for (p, signs) in pieces {
            let mut found = Vec::with_capacity(3);
            for s in [-1i8, 0, 1] {
                let q = p.and_atom(sign_atom(h, s));
                if !q.is_empty() {
                    found.push((q, s));
                }
            }
            if found.len() == 1 {
                // h has constant sign on p; keep p's atoms unchanged
                let (_, s) = found.pop().unwrap();
                let mut signs = signs;
                signs.push(s);
                next.push((p, signs));
                continue;
            }
            for (q, s) in found {
                let mut sg = signs.clone();
                sg.push(s);
                next.push((q, sg));
            }
        }
        pieces = next;
    }
    let mut seen: HashMap<Vec<i8>, ()> = HashMap::new();
    let mut out = Vec::new();
    for (p, signs) in pieces {
        if seen.insert(signs.clone(), ()).is_none() {
            let atoms: Vec<Atom> = hyper.iter().zip(&signs).map(|(h, s)| sign_atom(h, *s)).collect();
            let poly = Polyhedron::new(p.scope().clone(), atoms).remove_redundant();
            out.push(Face { signs, poly });
        }
    }
    out
}

fn collect_forms(list: &mut Vec<LinForm>, seen: &mut BTreeSet<LinForm>, region: &Region) {
    for p in region.disjuncts() {
        for a in p.atoms() {
            add_form(list, seen, &a.form);
        }
    }
}

/// A regular complex whose cells partition the definably compact `roi`, such
/// that every target meets each cell in all of it or none of it.
///
/// Strata are cut by hyperplane arrangements, largest support first. The
/// closure of every cell in a smaller stratum is a projected polyhedron whose
/// facet forms are added to that stratum's arrangement before it is cut, so
/// closures of cells are unions of cells. Each cell's boundary is then
/// checked to have the mod-2 homology of a sphere of the right dimension.
pub fn build_complex(roi: &SemilinearSet, targets: &[SemilinearSet]) -> Result<RegularComplex, CellError> {
    if !roi.is_definably_compact() {
        return Err(CellError::NotCompact);
    }
    let n = roi.ambient_dim();
    let mut strata: Vec<Support> = roi.pieces().keys().copied().collect();
    strata.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    let mut hyper: BTreeMap<Support, (Vec<LinForm>, BTreeSet<LinForm>)> = BTreeMap::new();
    for t in targets {
        assert_eq!(t.ambient_dim(), n);
        for (l, r) in t.pieces() {
            if roi.piece(*l).is_some() {
                let (list, seen) = hyper.entry(*l).or_default();
                collect_forms(list, seen, r);
            }
        }
    }
    for (l, r) in roi.pieces() {
        let (list, seen) = hyper.entry(*l).or_default();
        collect_forms(list, seen, r);
    }

    let mut cells: Vec<ComplexCell> = Vec::new();
    let mut signs: Vec<Vec<i8>> = Vec::new();
    let mut by_stratum: BTreeMap<Support, Vec<usize>> = BTreeMap::new();
    // (cell, lower stratum, closure of the cell in that stratum)
    let mut limits: Vec<(usize, Support, Polyhedron)> = Vec::new();

    for &l in &strata {
        let region = roi.piece(l).expect("stratum");
        let forms = hyper.get(&l).map(|(v, _)| v.clone()).unwrap_or_default();
        let faces = arrangement_faces(region, &forms);
        let mut ids = Vec::new();
        for face in faces {
            let zero: Vec<LinForm> =
                forms.iter().zip(&face.signs).filter(|(_, s)| **s == 0).map(|(h, _)| h.clone()).collect();
            let dim = l.len() - rank_of_forms(&zero);
            let pt = face.poly.sample_point().expect("nonempty face");
            let sample = (0..n)
                .map(|i| if l.contains(i) { ExtRat::Finite(pt[&i].clone()) } else { ExtRat::PosInf })
                .collect();
            let id = cells.len();
            for lower in l.subsets().filter(|m| *m != l) {
                if !escapes(&face.poly, l, lower) {
                    continue;
                }
                let lim = face.poly.relaxed().project_onto(&lower.coords()).remove_redundant();
                let (list, seen) = hyper.entry(lower).or_default();
                for a in lim.atoms() {
                    add_form(list, seen, &a.form);
                }
                limits.push((id, lower, lim));
            }
            cells.push(ComplexCell { support: l, poly: face.poly, sample, dim });
            signs.push(face.signs);
            ids.push(id);
        }
        by_stratum.insert(l, ids);
    }

    let mut below: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); cells.len()];
    for ids in by_stratum.values() {
        for &f in ids {
            for &g in ids {
                if f != g && signs[g].iter().zip(&signs[f]).all(|(a, b)| *a == 0 || a == b) {
                    below[f].insert(g);
                }
            }
        }
    }
    for (f, lower, lim) in &limits {
        for &g in by_stratum.get(lower).into_iter().flatten() {
            let pt: BTreeMap<usize, Rat> = cells[g]
                .sample
                .iter()
                .enumerate()
                .filter_map(|(i, v)| v.finite().map(|q| (i, q.clone())))
                .collect();
            if lim.contains_map(&pt) {
                below[*f].insert(g);
            }
        }
    }
    let below: Vec<Vec<usize>> = below.into_iter().map(|s| s.into_iter().collect()).collect();
    let complex = RegularComplex { ambient: n, cells, below };
    certify(&complex)?;
    Ok(complex)
}

/// Whether `p` has limit points in the smaller stratum `lower`.
fn escapes(p: &Polyhedron, top: Support, lower: Support) -> bool {
    let mut atoms: Vec<Atom> = p
        .atoms()
        .iter()
        .map(|a| Atom::new(a.form.with_constant(Rat::zero()), if a.rel == Rel::Eq { Rel::Eq } else { Rel::Le }))
        .collect();
    for i in top.coords() {
        if lower.contains(i) {
            atoms.push(Atom::eq(LinForm::var(i)));
        } else {
            atoms.push(Atom::lt(-&LinForm::var(i)));
        }
    }
    !Polyhedron::new(p.scope().clone(), atoms).is_empty()
}

/// Every cell's boundary must look like a sphere to mod-2 homology.
fn certify(k: &RegularComplex) -> Result<(), CellError> {
    for (i, c) in k.cells.iter().enumerate() {
        let faces = &k.below[i];
        if faces.iter().any(|&g| k.cells[g].dim >= c.dim) {
            return Err(CellError::UnsupportedGeometry(format!(
                "face relation is not graded at cell {}",
                fmt_point(&c.sample)
            )));
        }
        let want: Vec<usize> = match c.dim {
            0 => vec![],
            1 => vec![2],
            d => {
                let mut v = vec![0; d];
                v[0] = 1;
                v[d - 1] = 1;
                v
            }
        };
        if c.dim == 0 {
            if !faces.is_empty() {
                return Err(CellError::UnsupportedGeometry(format!("vertex {} has faces", fmt_point(&c.sample))));
            }
            continue;
        }
        let mut members = vec![false; k.len()];
        for &g in faces {
            members[g] = true;
        }
        let got = crate::cohom::subposet_betti_z2(&k.below, &members);
        let mut got = got;
        while got.last() == Some(&0) {
            got.pop();
        }
        if got != want {
            return Err(CellError::UnsupportedGeometry(format!(
                "boundary of the {}-cell through {} is not a sphere",
                c.dim,
                fmt_point(&c.sample)
            )));
        }
    }
    Ok(())
}

/// Refines a decomposition inside the definably compact `roi` to a regular
/// complex whose cells refine the decomposition's cells.
pub fn refine_to_complex(d: &Decomposition, roi: &SemilinearSet) -> Result<RegularComplex, CellError> {
    let targets: Vec<SemilinearSet> = d.cells.iter().map(|c| c.denotation()).collect();
    build_complex(roi, &targets)
}

/// The closed bounded core `C_(t,s)` of a cell inside `[0, ∞]^m`.
///
/// Over the core of the base: a graph is restricted; a band `(f, g)` shrinks
/// to `[f + γ, g − γ]` with `γ = min((g − f)/2, t)`, and a band `(f, ∞)` to
/// `[f + γ, f + s − γ]` with `γ = min(s/2, t)`.
pub fn cell_core(c: &Cell, t: &Rat, s: &Rat) -> Result<SemilinearSet, CellError> {
    if !t.is_positive() || !s.is_positive() {
        return Err(CellError::InvalidCell("core parameters must be positive".into()));
    }
    let neg = (0..c.depth).filter(|i| c.support.contains(*i)).any(|i| !c.poly.and_atom(Atom::lt(LinForm::var(i))).is_empty());
    if neg {
        return Err(CellError::NotInPositiveOrthant(c.depth));
    }
    Ok(core_rec(c, t, s))
}

fn core_rec(c: &Cell, t: &Rat, s: &Rat) -> SemilinearSet {
    let Some(base) = &c.base else {
        return SemilinearSet::universe(0);
    };
    let bc = core_rec(base, t, s);
    let k = c.depth - 1;
    let x = LinForm::var(k);
    let mut out = SemilinearSet::empty(c.depth);
    for (l, region) in bc.pieces() {
        let lifted = l.with(k);
        let scope = lifted.coords();
        let extend = |extra: Vec<Vec<Atom>>| -> Region {
            let mut polys = Vec::new();
            for p in region.disjuncts() {
                for e in &extra {
                    polys.push(p.with_scope(scope.clone()).and_atoms(e.iter().cloned()));
                }
            }
            Region::new(scope.clone(), polys)
        };
        match &c.kind {
            CellKind::Root => unreachable!(),
            CellKind::Graph(CellFn::ConstInf) => out.insert_piece(*l, region.clone()),
            CellKind::Graph(CellFn::Affine(h)) => out.insert_piece(lifted, extend(vec![vec![Atom::equal(&x, h)]])),
            CellKind::Band(CellFn::Affine(f), CellFn::Affine(g)) => {
                let tt = LinForm::constant(t.clone());
                let gap = g - f;
                let two_t = LinForm::constant(t * int(2));
                let wide = vec![
                    Atom::less_eq(&two_t, &gap),
                    Atom::less_eq(&(f + &tt), &x),
                    Atom::less_eq(&x, &(g - &tt)),
                ];
                let narrow = vec![Atom::less_eq(&gap, &two_t), Atom::equal(&x.scale(&int(2)), &(f + g))];
                out.insert_piece(lifted, extend(vec![wide, narrow]));
            }
            CellKind::Band(CellFn::Affine(f), CellFn::ConstInf) => {
                let half = s / int(2);
                let gamma = if &half < t { half } else { t.clone() };
                let lo = f + &LinForm::constant(gamma.clone());
                let hi = f + &LinForm::constant(s - &gamma);
                out.insert_piece(lifted, extend(vec![vec![Atom::less_eq(&lo, &x), Atom::less_eq(&x, &hi)]]));
            }
            other => unreachable!("cell inside the positive orthant cannot have kind {other:?}"),
        }
    }
    out
}
