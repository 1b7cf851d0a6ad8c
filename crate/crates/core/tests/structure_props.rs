mod common;

use common::*;
use ergomap::interval::IntervalSet;
use ergomap::map::{compose, image_interval, iterate, preimage_set, PwaMap};
use ergomap::stats::{dyadic_windows, leo_time, LeoTime, DEFAULT_LEO_CAP};
use ergomap::structure::{classify, fixed_set, transitivity_components, Verdict};
use proptest::prelude::*;

fn conjugate_by_flip(f: &PwaMap) -> PwaMap {
    let flip = PwaMap::flip();
    compose(&flip, &compose(f, &flip).unwrap()).unwrap()
}

/// Desk maps, some with several components, plus random full-lap maps.
fn structured_maps() -> Vec<PwaMap> {
    let mut g = rng(21);
    let mut maps: Vec<PwaMap> = preserving_desk().into_iter().map(|(_, f)| f).collect();
    for _ in 0..12 {
        maps.push(random_full_laps(&mut g));
    }
    maps
}

#[test]
fn components_are_invariant_and_saturated() {
    for f in structured_maps() {
        let rep = transitivity_components(&f).unwrap();
        let f2 = iterate(&f, 2).unwrap();
        for j in &rep.components {
            assert_eq!(&image_interval(&f2, j).unwrap(), j);
            let fj = image_interval(&f, j).unwrap();
            let back = preimage_set(&f, &IntervalSet::single(fj));
            assert!(
                back.eq_up_to_points(&IntervalSet::single(j.clone())),
                "{f:?} {j}"
            );
        }
    }
}

#[test]
fn permutation_is_monotone() {
    for f in structured_maps() {
        let p = transitivity_components(&f).unwrap().permutation;
        let up = p.windows(2).all(|w| w[0] < w[1]);
        let down = p.windows(2).all(|w| w[0] > w[1]);
        assert!(up || down, "{p:?}");
    }
}

#[test]
fn uncovered_points_are_fixed_by_f2() {
    for f in structured_maps() {
        let rep = transitivity_components(&f).unwrap();
        let fix = fixed_set(&f, 2).unwrap();
        for gap in &rep.gaps {
            let g = IntervalSet::single(gap.clone());
            assert!(g.intersect(&fix).eq_up_to_points(&g), "{gap}");
        }
    }
}

#[test]
fn leo_maps_cover_every_dyadic_window() {
    for (name, f) in preserving_desk() {
        if classify(&f).unwrap() != Verdict::Leo {
            continue;
        }
        for w in dyadic_windows(4) {
            assert!(
                matches!(leo_time(&f, &w, DEFAULT_LEO_CAP).unwrap(), LeoTime::At(_)),
                "{name} {w}"
            );
        }
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn classification_survives_flip_conjugation(f in arb_preserving()) {
        prop_assert_eq!(classify(&f).unwrap(), classify(&conjugate_by_flip(&f)).unwrap());
    }
}
