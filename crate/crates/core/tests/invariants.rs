mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use semilin_core::celldec::{connected_components, decompose};
use semilin_core::cohom::{betti, betti_c, betti_locally_closed, CoeffRing};
use semilin_core::family::{family_scan, ParamInterval, ScanOptions};
use semilin_core::qlin::{qe, ExtRat, Quantifier};
use semilin_core::stratal::{closure_by_qe, SemilinearSet, Support};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn boolean_laws(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_set(&mut r);
        let b = random_set(&mut r);
        prop_assert!(a.complement().complement().set_eq(&a));
        prop_assert!(a.union(&b).complement().set_eq(&a.complement().intersect(&b.complement())));
        prop_assert!(a.difference(&b).union(&a.intersect(&b)).set_eq(&a));
        prop_assert!(a.difference(&b).intersect(&b).is_empty());
    }

    #[test]
    fn closure_operator(seed in any::<u64>()) {
        let s = random_set(&mut rng(seed));
        let cl = s.closure();
        prop_assert!(s.is_subset(&cl));
        prop_assert!(cl.closure().set_eq(&cl));
        prop_assert!(cl.set_eq(&closure_by_qe(&s)));
        prop_assert!(s.interior().is_subset(&s));
        prop_assert!(s.frontier().set_eq(&cl.difference(&s)));
        prop_assert!(cl.difference(&s.interior()).is_closed());
    }

    #[test]
    fn local_closedness_means_closed_boundary_difference(seed in any::<u64>()) {
        let s = random_set(&mut rng(seed));
        let rim = s.closure().difference(&s);
        prop_assert_eq!(s.is_locally_closed(), rim.is_closed());
    }

    #[test]
    fn projection_contains_images_of_samples(seed in any::<u64>()) {
        let s = random_set(&mut rng(seed));
        let finite_part = s.piece(Support::full(2)).cloned();
        if let Some(region) = finite_part {
            let shadow = qe(&[(Quantifier::Exists, 1)], &region);
            for p in region.disjuncts().iter().filter_map(|d| d.sample_point()) {
                let mut q = p.clone();
                q.remove(&1);
                prop_assert!(shadow.contains_map(&q));
            }
        }
    }

    #[test]
    fn decomposition_is_adapted_partition(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_set(&mut r);
        let b = random_set(&mut r);
        let d = decompose(&[a.clone(), b.clone()], 2);
        prop_assert!(d.is_partition());
        prop_assert!(d.is_adapted_to(&a));
        prop_assert!(d.is_adapted_to(&b));
    }

    #[test]
    fn compact_cohomology_vanishes_above_dimension(seed in any::<u64>()) {
        let s = random_locally_closed(&mut rng(seed));
        let r = betti_c(&s, CoeffRing::Q).unwrap();
        prop_assert!(r.ranks.len() as i64 <= s.dimension() + 1);
        let r = betti_locally_closed(&s, CoeffRing::Q).unwrap();
        prop_assert!(r.ranks.len() as i64 <= s.dimension() + 1);
    }

    #[test]
    fn zeroth_betti_counts_components(seed in any::<u64>()) {
        let s = random_compact(&mut rng(seed));
        let r = betti(&s, CoeffRing::Q).unwrap();
        prop_assert_eq!(r.rank(0), connected_components(&s).len());
    }

    #[test]
    fn euler_characteristic_ignores_coefficients(seed in any::<u64>()) {
        let s = random_locally_closed(&mut rng(seed));
        let q = betti_c(&s, CoeffRing::Q).unwrap();
        let z = betti_c(&s, CoeffRing::Z).unwrap();
        let f2 = betti_c(&s, CoeffRing::Z2).unwrap();
        prop_assert_eq!(q.euler, f2.euler);
        prop_assert_eq!(&q.ranks, &z.ranks);
        for p in 0..q.ranks.len().max(f2.ranks.len()) {
            prop_assert!(f2.rank(p) >= q.rank(p));
        }
    }

    #[test]
    fn euler_characteristic_is_additive(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x_ = random_locally_closed(&mut r);
        let cut = closed_ray(0).product(&SemilinearSet::universe(1));
        let inside = x_.intersect(&cut);
        let outside = x_.difference(&cut);
        prop_assume!(inside.is_locally_closed() && outside.is_locally_closed());
        let chi = |s: &SemilinearSet| betti_c(s, CoeffRing::Q).unwrap().euler;
        prop_assert_eq!(chi(&x_), chi(&inside) + chi(&outside));
    }

    #[test]
    fn family_pieces_tile_the_parameter_line(seed in any::<u64>()) {
        let s = random_set(&mut rng(seed));
        let opts = ScanOptions { cohomology: false, seed, ..ScanOptions::default() };
        let part = family_scan(&s, &opts);
        let pieces = &part.pieces;
        prop_assert!(!pieces.is_empty());
        prop_assert!(matches!(pieces[0].interval, ParamInterval::All | ParamInterval::Below(_)));
        prop_assert_eq!(&pieces.last().unwrap().interval, &ParamInterval::Infinity);
        for w in pieces.windows(2) {
            if let ParamInterval::Infinity = w[1].interval {
                continue;
            }
            prop_assert_eq!(w[0].interval.hi(), w[1].interval.lo());
        }
        for p in pieces {
            prop_assert!(p.interval.contains(&p.sample));
            let fiber = s.fiber(1, &p.sample);
            let count = connected_components(&fiber).len();
            prop_assert_eq!(p.record.as_ref().map(|r| r.pi0), Some(count));
        }
    }
}

#[test]
fn infinity_point_is_its_own_stratum() {
    let p = point(&[None, Some(2)]);
    assert!(p.contains(&[ExtRat::PosInf, ExtRat::int(2)]));
    assert_eq!(p.pieces().len(), 1);
    assert!(p.is_closed());
}
