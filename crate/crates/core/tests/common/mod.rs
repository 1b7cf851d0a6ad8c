#![allow(dead_code)]

use ergomap::desk;
use ergomap::interval::Interval;
use ergomap::map::{from_full_laps, LapSign, PwaMap};
use ergomap::rational::{r, Rational};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every measure-preserving desk map.
pub fn preserving_desk() -> Vec<(&'static str, PwaMap)> {
    desk::NAMES
        .iter()
        .map(|&n| (n, desk::by_name(n).unwrap()))
        .collect()
}

/// Full-lap map from integer weights.
pub fn full_laps(up: bool, weights: &[i64]) -> PwaMap {
    let total: i64 = weights.iter().sum();
    let alphas: Vec<Rational> = weights.iter().map(|&w| r(w, total)).collect();
    let sign = if up { LapSign::Up } else { LapSign::Down };
    from_full_laps(sign, &alphas).unwrap()
}

pub fn random_full_laps(g: &mut ChaCha8Rng) -> PwaMap {
    let k = g.gen_range(1..=4);
    let weights: Vec<i64> = (0..k).map(|_| g.gen_range(1..=9)).collect();
    full_laps(g.gen_bool(0.5), &weights)
}

/// A nondegenerate window with endpoints on the grid `k/den`.
pub fn random_window(g: &mut ChaCha8Rng) -> Interval {
    let den = g.gen_range(2..=24);
    let a = g.gen_range(0..den);
    let b = g.gen_range(a + 1..=den);
    Interval::new(r(a, den), r(b, den)).unwrap()
}

pub fn random_map(g: &mut ChaCha8Rng) -> PwaMap {
    let desk = preserving_desk();
    if g.gen_bool(0.5) {
        desk[g.gen_range(0..desk.len())].1.clone()
    } else {
        random_full_laps(g)
    }
}

pub fn arb_weights() -> impl Strategy<Value = (bool, Vec<i64>)> {
    (any::<bool>(), prop::collection::vec(1i64..=9, 1..=4))
}

pub fn arb_full_laps() -> impl Strategy<Value = PwaMap> {
    arb_weights().prop_map(|(up, w)| full_laps(up, &w))
}

pub fn arb_preserving() -> impl Strategy<Value = PwaMap> {
    let desk: Vec<PwaMap> = preserving_desk().into_iter().map(|(_, f)| f).collect();
    prop_oneof![prop::sample::select(desk), arb_full_laps()]
}

pub fn arb_rational01() -> impl Strategy<Value = Rational> {
    (1i64..=64).prop_flat_map(|den| (0..=den).prop_map(move |k| r(k, den)))
}

pub fn arb_window() -> impl Strategy<Value = Interval> {
    (2i64..=24)
        .prop_flat_map(|den| (Just(den), 0..den))
        .prop_flat_map(|(den, a)| (Just(den), Just(a), a + 1..=den))
        .prop_map(|(den, a, b)| Interval::new(r(a, den), r(b, den)).unwrap())
}

/// Deterministic proptest configuration.
pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x5eed),
        ..ProptestConfig::default()
    }
}
