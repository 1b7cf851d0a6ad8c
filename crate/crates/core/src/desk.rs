//! Small named maps used in examples, tests and the CLI.

use crate::map::{from_full_laps, LapSign, PwaMap};
use crate::rational::{r, Rational};

fn nodes(pts: &[(i64, i64, i64, i64)]) -> Vec<(Rational, Rational)> {
    pts.iter().map(|&(a, b, c, d)| (r(a, b), r(c, d))).collect()
}

/// The symmetric tent `(0,0),(1/2,1),(1,0)`.
pub fn tent() -> PwaMap {
    PwaMap::new(nodes(&[(0, 1, 0, 1), (1, 2, 1, 1), (1, 1, 0, 1)])).unwrap()
}

/// Three full laps of widths 3/10, 1/2, 1/5, starting upward.
pub fn fig5_full_laps() -> PwaMap {
    from_full_laps(LapSign::Up, &[r(3, 10), r(1, 2), r(1, 5)]).unwrap()
}

/// Swaps the two halves of `[0,1]`; transitive but not mixing.
pub fn half_swap() -> PwaMap {
    PwaMap::new(nodes(&[
        (0, 1, 1, 2),
        (1, 4, 1, 1),
        (1, 2, 1, 2),
        (3, 4, 0, 1),
        (1, 1, 1, 2),
    ]))
    .unwrap()
}

/// A tent on each half, each half invariant.
pub fn double_tent() -> PwaMap {
    PwaMap::new(nodes(&[
        (0, 1, 1, 2),
        (1, 4, 0, 1),
        (1, 2, 1, 2),
        (3, 4, 1, 1),
        (1, 1, 1, 2),
    ]))
    .unwrap()
}

/// Regular 3-fold zigzag `(0,0),(1/3,1),(2/3,0),(1,1)`.
pub fn zigzag3() -> PwaMap {
    from_full_laps(LapSign::Up, &[r(1, 3), r(1, 3), r(1, 3)]).unwrap()
}

/// A measure-preserving tent with extra kinks whose orbits do not close up.
pub fn kinked_tent() -> PwaMap {
    PwaMap::new(nodes(&[
        (0, 1, 0, 1),
        (1, 4, 1, 3),
        (1, 2, 1, 1),
        (11, 12, 1, 3),
        (1, 1, 0, 1),
    ]))
    .unwrap()
}

/// Continuous but not measure-preserving.
pub fn non_preserving() -> PwaMap {
    PwaMap::new(nodes(&[(0, 1, 0, 1), (1, 2, 1, 1), (1, 1, 1, 2)])).unwrap()
}

/// Looks up a desk map by name.
pub fn by_name(name: &str) -> Option<PwaMap> {
    Some(match name {
        "tent" | "T" => tent(),
        "id" => PwaMap::identity(),
        "flip" => PwaMap::flip(),
        "fig5" | "F" => fig5_full_laps(),
        "half-swap" | "H2" => half_swap(),
        "double-tent" | "D" => double_tent(),
        "zigzag3" => zigzag3(),
        "kinked-tent" => kinked_tent(),
        "non-preserving" => non_preserving(),
        _ => return None,
    })
}

pub const NAMES: &[&str] = &[
    "tent",
    "id",
    "flip",
    "fig5",
    "half-swap",
    "double-tent",
    "zigzag3",
    "kinked-tent",
];
