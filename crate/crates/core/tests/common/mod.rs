//! Seeded generators and fixed sets shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use semilin_core::qlin::{int, Atom, ExtRat, LinForm, Region};
use semilin_core::stratal::{SemilinearSet, Support};

pub fn x(i: usize) -> LinForm {
    LinForm::var(i)
}

pub fn c(n: i64) -> LinForm {
    LinForm::constant(int(n))
}

pub fn le(a: LinForm, b: LinForm) -> Atom {
    Atom::less_eq(&a, &b)
}

pub fn lt(a: LinForm, b: LinForm) -> Atom {
    Atom::less(&a, &b)
}

pub fn eq(a: LinForm, b: LinForm) -> Atom {
    Atom::equal(&a, &b)
}

pub fn finite(dim: usize, atoms: Vec<Atom>) -> SemilinearSet {
    SemilinearSet::finite_from_atoms(dim, atoms)
}

/// A piece on the stratum where exactly the coordinates in `coords` are finite.
pub fn on_stratum(dim: usize, coords: &[usize], atoms: Vec<Atom>) -> SemilinearSet {
    let l = Support::from_coords(coords.iter().copied());
    SemilinearSet::from_piece(dim, l, Region::from_atoms(l.coords(), atoms))
}

pub fn point(p: &[Option<i64>]) -> SemilinearSet {
    let p: Vec<ExtRat> = p.iter().map(|v| v.map_or(ExtRat::PosInf, ExtRat::int)).collect();
    SemilinearSet::point(&p)
}

pub fn interval(lo: i64, hi: i64, lo_closed: bool, hi_closed: bool) -> SemilinearSet {
    let a = if lo_closed { le(c(lo), x(0)) } else { lt(c(lo), x(0)) };
    let b = if hi_closed { le(x(0), c(hi)) } else { lt(x(0), c(hi)) };
    finite(1, vec![a, b])
}

/// `[lo, ∞]`.
pub fn closed_ray(lo: i64) -> SemilinearSet {
    finite(1, vec![le(c(lo), x(0))]).union(&point(&[None]))
}

pub fn square_boundary() -> SemilinearSet {
    let (u, v) = square_arcs();
    u.union(&v)
}

pub fn unit_box(x0: i64, x1: i64, y0: i64, y1: i64) -> SemilinearSet {
    finite(2, vec![le(c(x0), x(0)), le(x(0), c(x1)), le(c(y0), x(1)), le(x(1), c(y1))])
}

/// Two closed arcs of the square boundary meeting at `(0,0)` and `(1,1)`.
pub fn square_arcs() -> (SemilinearSet, SemilinearSet) {
    let u = unit_box(0, 1, 0, 0).union(&unit_box(1, 1, 0, 1));
    let v = unit_box(0, 1, 1, 1).union(&unit_box(0, 0, 0, 1));
    (u, v)
}

/// `[0,∞]^2`.
pub fn closed_quadrant() -> SemilinearSet {
    closed_ray(0).product(&closed_ray(0))
}

/// `[0,2)×[0,1] ∪ [0,1]×[0,2)`: locally closed, neither open nor closed.
pub fn l_shape() -> SemilinearSet {
    let a = finite(2, vec![le(c(0), x(0)), lt(x(0), c(2)), le(c(0), x(1)), le(x(1), c(1))]);
    let b = finite(2, vec![le(c(0), x(0)), le(x(0), c(1)), le(c(0), x(1)), lt(x(1), c(2))]);
    a.union(&b)
}

/// A named suite of ten locally closed sets, with their ordinary Betti
/// numbers worked out by hand.
pub fn homotopy_suite() -> Vec<(&'static str, SemilinearSet, Vec<usize>)> {
    vec![
        ("point", point(&[Some(0)]), vec![1]),
        ("closed interval", interval(0, 1, true, true), vec![1]),
        ("open interval", interval(0, 1, false, false), vec![1]),
        ("half-open interval [0,1)", interval(0, 1, true, false), vec![1]),
        ("half-open interval (0,1]", interval(0, 1, false, true), vec![1]),
        ("square boundary", square_boundary(), vec![1, 1]),
        ("two segments", interval(0, 1, true, true).union(&interval(2, 3, true, true)), vec![2]),
        (
            "segment with a piece at infinity",
            finite(2, vec![le(c(0), x(0)), le(x(0), c(1)), eq(x(1), c(0))])
                .union(&on_stratum(2, &[0], vec![le(c(2), x(0)), le(x(0), c(3))])),
            vec![2],
        ),
        ("closed quadrant", closed_quadrant(), vec![1]),
        ("locally closed L-shape", l_shape(), vec![1]),
    ]
}

/// A random set in `Γ∞^2`: up to three disjuncts of up to six atoms, with
/// coefficients in {-1, 0, 1} and constants in [-5, 5]. Most disjuncts lie
/// in the finite stratum, some at infinity.
pub fn random_set(rng: &mut ChaCha8Rng) -> SemilinearSet {
    let mut s = SemilinearSet::empty(2);
    let disjuncts = rng.gen_range(1..=3);
    for _ in 0..disjuncts {
        let roll = rng.gen_range(0..10);
        let coords: Vec<usize> = match roll {
            0 => vec![0],
            1 => vec![1],
            _ => vec![0, 1],
        };
        let n_atoms = rng.gen_range(1..=6);
        let mut atoms = Vec::new();
        for _ in 0..n_atoms {
            let mut f = LinForm::constant(int(rng.gen_range(-5..=5)));
            for &i in &coords {
                let a = rng.gen_range(-1..=1);
                f = &f + &LinForm::term(i, int(a));
            }
            let atom = match rng.gen_range(0..10) {
                0 => Atom::eq(f),
                1..=4 => Atom::lt(f),
                _ => Atom::le(f),
            };
            atoms.push(atom);
        }
        s = s.union(&on_stratum(2, &coords, atoms));
    }
    s
}

/// A random nonempty locally closed set of `Γ∞^2`.
pub fn random_locally_closed(rng: &mut ChaCha8Rng) -> SemilinearSet {
    loop {
        let s = random_set(rng);
        if !s.is_empty() && s.is_locally_closed() {
            return s;
        }
    }
}

/// A random nonempty definably compact set of `Γ∞^2`: the closure of a random
/// set cut to `[-5, ∞]^2`.
pub fn random_compact(rng: &mut ChaCha8Rng) -> SemilinearSet {
    let corner = closed_ray(-5).product(&closed_ray(-5));
    loop {
        let s = random_set(rng).intersect(&corner).closure();
        if !s.is_empty() {
            return s;
        }
    }
}
