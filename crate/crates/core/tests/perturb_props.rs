mod common;

use common::*;
use ergomap::desk;
use ergomap::map::{uniform_distance, verify_lebesgue};
use ergomap::markov::markov_partition;
use ergomap::orbit::OrbitCaps;
use ergomap::perturb::{
    horseshoe, leoize, markovize, oscillation, regular_window, MarkovizeEffort, WindowSpec,
};
use ergomap::rational::r;
use ergomap::structure::{classify, Verdict};
use proptest::prelude::*;

fn arb_odd() -> impl Strategy<Value = usize> {
    (0usize..4).prop_map(|k| 2 * k + 1)
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn windows_stay_preserving(f in arb_preserving(), w in arb_window(), m in arb_odd()) {
        let g = regular_window(&f, &WindowSpec::regular(w.clone(), m)).unwrap();
        prop_assert!(verify_lebesgue(&g).preserving);
        prop_assert_eq!(g.eval(&w.lo).unwrap(), f.eval(&w.lo).unwrap());
        prop_assert_eq!(g.eval(&w.hi).unwrap(), f.eval(&w.hi).unwrap());
        prop_assert!(uniform_distance(&f, &g) <= oscillation(&f, &w));
    }

    #[test]
    fn single_fold_is_identity(f in arb_preserving(), w in arb_window()) {
        prop_assert_eq!(regular_window(&f, &WindowSpec::regular(w, 1)).unwrap(), f);
    }

    #[test]
    fn odd_folds_multiply(
        f in arb_full_laps(),
        w in arb_window(),
        m1 in (1usize..3).prop_map(|k| 2 * k + 1),
        m2 in (1usize..3).prop_map(|k| 2 * k + 1),
    ) {
        let twice = regular_window(
            &regular_window(&f, &WindowSpec::regular(w.clone(), m1)).unwrap(),
            &WindowSpec::regular(w.clone(), m2),
        )
        .unwrap();
        let once = regular_window(&f, &WindowSpec::regular(w, m1 * m2)).unwrap();
        prop_assert_eq!(twice.simplified(), once.simplified());
    }
}

#[test]
fn leoize_reaches_leo_nearby() {
    let eps = r(1, 8);
    for (name, f) in preserving_desk() {
        if name == "id" {
            continue;
        }
        let g = leoize(&f, &eps).unwrap();
        assert_eq!(classify(&g).unwrap(), Verdict::Leo, "{name}");
        assert!(uniform_distance(&f, &g) <= eps, "{name}");
    }
}

#[test]
fn markovize_output_is_markov() {
    let eps = r(1, 8);
    for f in [desk::kinked_tent(), desk::tent(), desk::fig5_full_laps()] {
        let out = markovize(&f, &eps, MarkovizeEffort::default()).unwrap();
        let g = out.map().expect("markovize should succeed");
        assert!(markov_partition(&g, OrbitCaps::default())
            .unwrap()
            .system()
            .is_some());
        assert!(uniform_distance(&f, &g) < eps);
    }
}

#[test]
fn horseshoes_certify_log_n() {
    for (name, f) in preserving_desk() {
        if name == "id" {
            continue;
        }
        for n in 2..=4 {
            let hs = horseshoe(&f, n, &r(1, 10)).unwrap();
            assert!(
                hs.entropy_lower_bound >= (n as f64).ln() - 1e-9,
                "{name} {n}"
            );
            assert!(uniform_distance(&f, &hs.map) < r(1, 10));
        }
    }
}
