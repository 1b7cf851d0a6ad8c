mod common;

use common::*;
use ergomap::desk;
use ergomap::map::{image_interval, PwaMap};
use ergomap::markov::{conjugacy_check, markov_partition, top_entropy, MarkovSystem};
use ergomap::orbit::OrbitCaps;
use ergomap::rational::one;
use ergomap::structure::classify;
use proptest::prelude::*;

fn system(f: &PwaMap) -> Option<MarkovSystem> {
    markov_partition(f, OrbitCaps::default()).unwrap().system()
}

fn check_algebra(f: &PwaMap, ms: &MarkovSystem) -> Result<(), TestCaseError> {
    let p = ms.stoch_matrix();
    for row in &p {
        prop_assert_eq!(row.iter().sum::<ergomap::Rational>(), one());
    }
    prop_assert_eq!(ms.p_times_stoch(), ms.pvec.clone());
    let adj = ms.adjacency_matrix();
    for i in 0..ms.n() {
        let img = image_interval(f, &ms.cell(i)).unwrap();
        for j in 0..ms.n() {
            prop_assert_eq!(adj[i][j] == 1, img.contains_interval(&ms.cell(j)));
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn stochastic_and_stationary(f in arb_preserving()) {
        if let Some(ms) = system(&f) {
            check_algebra(&f, &ms)?;
        }
    }

    #[test]
    fn full_lap_top_entropy_is_log_laps((up, w) in arb_weights()) {
        let f = full_laps(up, &w);
        let ms = system(&f).unwrap();
        prop_assert!((top_entropy(&ms) - (w.len() as f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn conjugate_maps_classify_alike(
        (up, w1) in arb_weights(),
        w2 in prop::collection::vec(1i64..=9, 1..=4),
    ) {
        let f = full_laps(up, &w1);
        let g = full_laps(up, &w2);
        if f.lap_count() < 2 || g.lap_count() < 2 {
            return Ok(());
        }
        let c = conjugacy_check(&f, &g, OrbitCaps::default()).unwrap();
        if c.is_conjugate() {
            prop_assert_eq!(classify(&f).unwrap(), classify(&g).unwrap());
        }
        prop_assert_eq!(c.is_conjugate(), w1.len() == w2.len());
    }
}

#[test]
fn desk_systems_are_consistent() {
    for (name, f) in preserving_desk() {
        if let Some(ms) = system(&f) {
            check_algebra(&f, &ms).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }
    assert!(system(&desk::tent()).is_some());
}
