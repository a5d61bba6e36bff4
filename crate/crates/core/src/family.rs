//! One-parameter families: splitting the parameter line `Γ∞` into finitely
//! many intervals over which the fibers have the same invariants.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::celldec::{connected_components, decompose, CellFn, CellKind};
use crate::cohom::{betti_c, betti_locally_closed, BettiReport, CoeffRing};
use crate::qlin::{fmt_rat, int, rat, ExtRat, Rat};
use crate::stratal::SemilinearSet;

/// A piece of the parameter line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParamInterval {
    /// `(−∞, ∞)`, the whole finite line.
    All,
    /// `(−∞, a)`.
    Below(Rat),
    /// `[a, a]`.
    Point(Rat),
    /// `(a, b)`.
    Open(Rat, Rat),
    /// `(b, ∞)`.
    Above(Rat),
    /// `{∞}`.
    Infinity,
}

impl ParamInterval {
    pub fn kind(&self) -> &'static str {
        match self {
            ParamInterval::All => "all",
            ParamInterval::Below(_) => "below",
            ParamInterval::Point(_) => "point",
            ParamInterval::Open(..) => "open",
            ParamInterval::Above(_) => "above",
            ParamInterval::Infinity => "inf",
        }
    }

    pub fn lo(&self) -> Option<ExtRat> {
        match self {
            ParamInterval::All | ParamInterval::Below(_) => None,
            ParamInterval::Point(a) | ParamInterval::Open(a, _) | ParamInterval::Above(a) => {
                Some(ExtRat::Finite(a.clone()))
            }
            ParamInterval::Infinity => Some(ExtRat::PosInf),
        }
    }

    pub fn hi(&self) -> Option<ExtRat> {
        match self {
            ParamInterval::All | ParamInterval::Above(_) => None,
            ParamInterval::Below(b) | ParamInterval::Point(b) | ParamInterval::Open(_, b) => {
                Some(ExtRat::Finite(b.clone()))
            }
            ParamInterval::Infinity => Some(ExtRat::PosInf),
        }
    }

    pub fn is_open(&self) -> bool {
        !matches!(self, ParamInterval::Point(_) | ParamInterval::Infinity)
    }

    pub fn contains(&self, w: &ExtRat) -> bool {
        match (self, w) {
            (ParamInterval::Infinity, ExtRat::PosInf) => true,
            (_, ExtRat::PosInf) | (ParamInterval::Infinity, _) => false,
            (ParamInterval::All, _) => true,
            (ParamInterval::Below(b), ExtRat::Finite(v)) => v < b,
            (ParamInterval::Point(a), ExtRat::Finite(v)) => v == a,
            (ParamInterval::Open(a, b), ExtRat::Finite(v)) => a < v && v < b,
            (ParamInterval::Above(a), ExtRat::Finite(v)) => a < v,
        }
    }

    /// The representative parameter: midpoint, `b + 1` or `a − 1` on
    /// unbounded pieces, `0` on the whole line, the point itself, or `∞`.
    pub fn sample(&self) -> ExtRat {
        match self {
            ParamInterval::All => ExtRat::int(0),
            ParamInterval::Below(b) => ExtRat::Finite(b - int(1)),
            ParamInterval::Point(a) => ExtRat::Finite(a.clone()),
            ParamInterval::Open(a, b) => ExtRat::Finite((a + b) / int(2)),
            ParamInterval::Above(a) => ExtRat::Finite(a + int(1)),
            ParamInterval::Infinity => ExtRat::PosInf,
        }
    }

    /// A random parameter inside an open piece.
    fn random_inside(&self, rng: &mut ChaCha8Rng) -> Option<ExtRat> {
        let k = rng.gen_range(1..1000i64);
        let step = rat(k, 7);
        let v = match self {
            ParamInterval::All => step - int(70),
            ParamInterval::Below(b) => b - step,
            ParamInterval::Open(a, b) => a + (b - a) * rat(k, 1000),
            ParamInterval::Above(a) => a + step,
            ParamInterval::Point(_) | ParamInterval::Infinity => return None,
        };
        Some(ExtRat::Finite(v))
    }
}

impl std::fmt::Display for ParamInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamInterval::All => write!(f, "(-inf, inf)"),
            ParamInterval::Below(b) => write!(f, "(-inf, {})", fmt_rat(b)),
            ParamInterval::Point(a) => write!(f, "{{{}}}", fmt_rat(a)),
            ParamInterval::Open(a, b) => write!(f, "({}, {})", fmt_rat(a), fmt_rat(b)),
            ParamInterval::Above(a) => write!(f, "({}, inf)", fmt_rat(a)),
            ParamInterval::Infinity => write!(f, "{{inf}}"),
        }
    }
}

/// Invariants of one fiber.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiberRecord {
    pub pi0: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub betti: Option<BettiReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub betti_c: Option<BettiReport>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyPiece {
    pub interval: ParamInterval,
    pub sample: ExtRat,
    /// Absent when the representative fiber could not be analysed.
    pub record: Option<FiberRecord>,
    /// Extra parameters checked against the record.
    pub resampled: Vec<ExtRat>,
    /// Whether every resampled fiber matched the record.
    pub certified: bool,
    pub diagnostics: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyPartition {
    pub pieces: Vec<FamilyPiece>,
    /// Number of cells of the decomposition of the parameter line.
    pub axis_cells: usize,
}

impl FamilyPartition {
    pub fn certified(&self) -> bool {
        self.pieces.iter().all(|p| p.certified)
    }

    /// The piece containing `w`.
    pub fn piece_at(&self, w: &ExtRat) -> Option<&FamilyPiece> {
        self.pieces.iter().find(|p| p.interval.contains(w))
    }
}

#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub coeff: CoeffRing,
    /// Compute Betti numbers, not just component counts.
    pub cohomology: bool,
    pub seed: u64,
    /// Random parameters rechecked in each open piece.
    pub resamples: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { coeff: CoeffRing::Q, cohomology: true, seed: 0, resamples: 3 }
    }
}

/// Invariants of the fiber of `z` over `w`, the parameter being the last
/// coordinate.
pub fn fiber_record(z: &SemilinearSet, w: &ExtRat, opts: &ScanOptions) -> Result<FiberRecord, String> {
    let fiber = z.fiber(z.ambient_dim() - 1, w);
    let pi0 = connected_components(&fiber).len();
    if !opts.cohomology {
        return Ok(FiberRecord { pi0, betti: None, betti_c: None });
    }
    let b = betti_locally_closed(&fiber, opts.coeff).map_err(|e| format!("fiber over {w}: {e}"))?;
    let bc = betti_c(&fiber, opts.coeff).map_err(|e| format!("fiber over {w}: {e}"))?;
    Ok(FiberRecord { pi0, betti: Some(b), betti_c: Some(bc) })
}

fn constant_of(f: &CellFn) -> Option<Rat> {
    match f {
        CellFn::Affine(l) => Some(l.constant_term().clone()),
        _ => None,
    }
}

/// The pieces of the parameter line cut out by a decomposition of the total
/// space in which the parameter is the first coordinate.
pub fn parameter_partition(z: &SemilinearSet) -> Vec<ParamInterval> {
    let n = z.ambient_dim();
    assert!(n >= 1, "a family needs a parameter coordinate");
    let perm: Vec<usize> = (0..n).map(|i| if i + 1 == n { 0 } else { i + 1 }).collect();
    let moved = z.permute(&perm);
    let axis = decompose(std::slice::from_ref(&moved), n).project(1);
    let mut cells = axis.cells;
    cells.sort_by(|a, b| a.sample[0].cmp(&b.sample[0]));
    cells
        .iter()
        .map(|c| match &c.kind {
            CellKind::Graph(CellFn::ConstInf) => ParamInterval::Infinity,
            CellKind::Graph(f) => ParamInterval::Point(constant_of(f).expect("constant graph")),
            CellKind::Band(f, g) => match (constant_of(f), constant_of(g)) {
                (None, None) => ParamInterval::All,
                (None, Some(b)) => ParamInterval::Below(b),
                (Some(a), None) => ParamInterval::Above(a),
                (Some(a), Some(b)) => ParamInterval::Open(a, b),
            },
            CellKind::Root => unreachable!("depth-one cell"),
        })
        .collect()
}

/// Splits the parameter line (the last coordinate of `z`) into pieces and
/// records the fiber invariants of each, rechecking open pieces at random
/// parameters.
pub fn family_scan(z: &SemilinearSet, opts: &ScanOptions) -> FamilyPartition {
    let intervals = parameter_partition(z);
    let axis_cells = intervals.len();
    let pieces = intervals
        .into_par_iter()
        .enumerate()
        .map(|(k, interval)| scan_piece(z, interval, opts, k as u64))
        .collect();
    FamilyPartition { pieces, axis_cells }
}

/// [`family_scan`] without cohomology.
pub fn pi0_scan(z: &SemilinearSet, seed: u64) -> FamilyPartition {
    family_scan(z, &ScanOptions { cohomology: false, seed, ..ScanOptions::default() })
}

fn scan_piece(z: &SemilinearSet, interval: ParamInterval, opts: &ScanOptions, k: u64) -> FamilyPiece {
    let sample = interval.sample();
    let mut diagnostics = Vec::new();
    let fiber = z.fiber(z.ambient_dim() - 1, &sample);
    if let Some(w) = fiber.local_closure_witness() {
        diagnostics.push(format!(
            "fiber over {sample} is not locally closed near {}",
            crate::stratal::fmt_point(&w)
        ));
        return FamilyPiece { interval, sample, record: None, resampled: Vec::new(), certified: false, diagnostics };
    }
    let record = match fiber_record(z, &sample, opts) {
        Ok(r) => r,
        Err(e) => {
            diagnostics.push(e);
            return FamilyPiece { interval, sample, record: None, resampled: Vec::new(), certified: false, diagnostics };
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(0x9e37_79b9).wrapping_add(k));
    let mut resampled = Vec::new();
    let mut certified = true;
    if interval.is_open() {
        for _ in 0..opts.resamples {
            let w = interval.random_inside(&mut rng).expect("open piece");
            match fiber_record(z, &w, opts) {
                Ok(r) if r == record => {}
                Ok(r) => {
                    certified = false;
                    diagnostics.push(format!("fiber over {w} has pi0 {} instead of {}", r.pi0, record.pi0));
                }
                Err(e) => {
                    certified = false;
                    diagnostics.push(e);
                }
            }
            resampled.push(w);
        }
    }
    FamilyPiece { interval, sample, record: Some(record), resampled, certified, diagnostics }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlin::{Atom, LinForm};

    fn x(i: usize) -> LinForm {
        LinForm::var(i)
    }

    fn zero() -> LinForm {
        LinForm::zero()
    }

    /// `{(x, w) : 0 ≤ x ≤ w}`, with the points at infinity it contains.
    fn wedge() -> SemilinearSet {
        let finite = SemilinearSet::finite_from_atoms(2, vec![Atom::less_eq(&zero(), &x(0)), Atom::less_eq(&x(0), &x(1))]);
        let mut s = finite;
        s.insert_piece(
            crate::stratal::Support::from_coords([0]),
            crate::qlin::Region::from_atoms([0].into_iter().collect(), vec![Atom::less_eq(&zero(), &x(0))]),
        );
        s.insert_piece(crate::stratal::Support::empty(), crate::qlin::Region::universe(Default::default()));
        s
    }

    #[test]
    fn wedge_family() {
        let part = family_scan(&wedge(), &ScanOptions::default());
        let kinds: Vec<String> = part.pieces.iter().map(|p| p.interval.to_string()).collect();
        assert_eq!(kinds, ["(-inf, 0)", "{0}", "(0, inf)", "{inf}"]);
        let pi0: Vec<usize> = part.pieces.iter().map(|p| p.record.as_ref().unwrap().pi0).collect();
        assert_eq!(pi0, [0, 1, 1, 1]);
        let betti: Vec<Vec<usize>> =
            part.pieces.iter().map(|p| p.record.as_ref().unwrap().betti.as_ref().unwrap().ranks.clone()).collect();
        assert_eq!(betti, [vec![], vec![1], vec![1], vec![1]]);
        assert!(part.certified());
        assert!(part.pieces.len() <= 2 * part.axis_cells);
    }

    #[test]
    fn diagonal_family_is_a_point_everywhere() {
        let z = SemilinearSet::finite_from_atoms(2, vec![Atom::equal(&x(0), &x(1))])
            .union(&SemilinearSet::point(&[ExtRat::PosInf, ExtRat::PosInf]));
        let part = family_scan(&z, &ScanOptions::default());
        for p in &part.pieces {
            let r = p.record.as_ref().unwrap();
            assert_eq!(r.pi0, 1);
            assert_eq!(r.betti, r.betti_c);
        }
    }

    #[test]
    fn two_branch_family() {
        // x ≥ 0 and (x ≤ w or x ≥ 2w)
        let near = SemilinearSet::finite_from_atoms(2, vec![Atom::less_eq(&zero(), &x(0)), Atom::less_eq(&x(0), &x(1))]);
        let far = SemilinearSet::finite_from_atoms(
            2,
            vec![Atom::less_eq(&zero(), &x(0)), Atom::less_eq(&x(1).scale(&int(2)), &x(0))],
        );
        let mut z = near.union(&far);
        z.insert_piece(
            crate::stratal::Support::from_coords([0]),
            crate::qlin::Region::from_atoms([0].into_iter().collect(), vec![Atom::less_eq(&zero(), &x(0))]),
        );
        let part = pi0_scan(&z, 7);
        assert!(part.certified());
        let at = |w: i64| part.piece_at(&ExtRat::int(w)).unwrap().record.as_ref().unwrap().pi0;
        assert_eq!((at(-3), at(0), at(5)), (1, 1, 2));
        assert_eq!(part.piece_at(&ExtRat::PosInf).unwrap().record.as_ref().unwrap().pi0, 1);
    }

    #[test]
    fn constant_and_empty_families() {
        let base = crate::testutil::interval(0, 1);
        let z = base.product(&SemilinearSet::universe(1));
        let part = pi0_scan(&z, 1);
        assert!(part.pieces.iter().all(|p| p.record.as_ref().unwrap().pi0 == 1));
        let part = pi0_scan(&SemilinearSet::empty(2), 1);
        assert!(part.pieces.iter().all(|p| p.record.as_ref().unwrap().pi0 == 0));
    }

    #[test]
    fn sample_rule() {
        assert_eq!(ParamInterval::Open(int(1), int(2)).sample(), ExtRat::Finite(rat(3, 2)));
        assert_eq!(ParamInterval::Above(int(4)).sample(), ExtRat::int(5));
        assert_eq!(ParamInterval::Below(int(4)).sample(), ExtRat::int(3));
        assert_eq!(ParamInterval::Infinity.sample(), ExtRat::PosInf);
    }
}
