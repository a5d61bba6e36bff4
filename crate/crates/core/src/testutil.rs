//! Small sets shared by unit tests.

use crate::qlin::{int, Atom, ExtRat, LinForm, Region};
use crate::stratal::{SemilinearSet, Support};

fn x(i: usize) -> LinForm {
    LinForm::var(i)
}

fn c(n: i64) -> LinForm {
    LinForm::constant(int(n))
}

pub fn point1(a: i64) -> SemilinearSet {
    SemilinearSet::point(&[ExtRat::int(a)])
}

pub fn point2(a: i64, b: i64) -> SemilinearSet {
    SemilinearSet::point(&[ExtRat::int(a), ExtRat::int(b)])
}

pub fn points1(list: &[i64]) -> SemilinearSet {
    list.iter().fold(SemilinearSet::empty(1), |acc, a| acc.union(&point1(*a)))
}

/// `[a, b]` in `Γ`.
pub fn interval(a: i64, b: i64) -> SemilinearSet {
    SemilinearSet::finite_from_atoms(1, vec![Atom::less_eq(&c(a), &x(0)), Atom::less_eq(&x(0), &c(b))])
}

/// `(a, b)` in `Γ`.
pub fn open_interval(a: i64, b: i64) -> SemilinearSet {
    SemilinearSet::finite_from_atoms(1, vec![Atom::less(&c(a), &x(0)), Atom::less(&x(0), &c(b))])
}

fn with_infinity(mut s: SemilinearSet) -> SemilinearSet {
    s.insert_piece(Support::empty(), Region::universe(Default::default()));
    s
}

/// `(b, ∞]`.
pub fn half_open_to_infinity(b: i64) -> SemilinearSet {
    with_infinity(SemilinearSet::finite_from_atoms(1, vec![Atom::less(&c(b), &x(0))]))
}

/// `[b, ∞]`.
pub fn closed_ray(b: i64) -> SemilinearSet {
    with_infinity(SemilinearSet::finite_from_atoms(1, vec![Atom::less_eq(&c(b), &x(0))]))
}

/// `[0, ∞]^n`.
pub fn closed_orthant(n: usize) -> SemilinearSet {
    (0..n).fold(SemilinearSet::point(&[]), |acc, _| acc.product(&closed_ray(0)))
}

fn box2(x0: i64, x1: i64, y0: i64, y1: i64) -> SemilinearSet {
    SemilinearSet::finite_from_atoms(
        2,
        vec![
            Atom::less_eq(&c(x0), &x(0)),
            Atom::less_eq(&x(0), &c(x1)),
            Atom::less_eq(&c(y0), &x(1)),
            Atom::less_eq(&x(1), &c(y1)),
        ],
    )
}

/// Boundary of `[0,1]²` in `Γ²`.
pub fn square_boundary() -> SemilinearSet {
    let (u, v) = square_arcs();
    u.union(&v)
}

/// Two closed arcs covering the square boundary and meeting in two corners.
pub fn square_arcs() -> (SemilinearSet, SemilinearSet) {
    let u = box2(0, 1, 0, 0).union(&box2(1, 1, 0, 1));
    let v = box2(0, 1, 1, 1).union(&box2(0, 0, 0, 1));
    (u, v)
}

/// The open unit square with one corner added.
pub fn not_locally_closed() -> SemilinearSet {
    let open = SemilinearSet::finite_from_atoms(
        2,
        vec![
            Atom::less(&c(0), &x(0)),
            Atom::less(&x(0), &c(1)),
            Atom::less(&c(0), &x(1)),
            Atom::less(&x(1), &c(1)),
        ],
    );
    open.union(&point2(0, 0))
}

/// `[0,2)×[0,1] ∪ [0,1]×[0,2)`.
pub fn lc_l_shape() -> SemilinearSet {
    let a = SemilinearSet::finite_from_atoms(
        2,
        vec![Atom::less_eq(&c(0), &x(0)), Atom::less(&x(0), &c(2)), Atom::less_eq(&c(0), &x(1)), Atom::less_eq(&x(1), &c(1))],
    );
    let b = SemilinearSet::finite_from_atoms(
        2,
        vec![Atom::less_eq(&c(0), &x(0)), Atom::less_eq(&x(0), &c(1)), Atom::less_eq(&c(0), &x(1)), Atom::less(&x(1), &c(2))],
    );
    a.union(&b)
}
