//! Exact forward orbits with cycle detection.

use std::collections::HashMap;

use crate::map::PwaMap;
use crate::rational::{bit_size, Rational};

/// Default number of iterations before an orbit is declared open.
pub const DEFAULT_ORBIT_CAP: usize = 10_000;
/// Default ceiling on numerator/denominator bit size along an orbit.
pub const DEFAULT_BIT_CAP: u64 = 2_048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrbitCaps {
    pub orbit_cap: usize,
    pub bit_cap: u64,
}

impl Default for OrbitCaps {
    fn default() -> Self {
        OrbitCaps {
            orbit_cap: DEFAULT_ORBIT_CAP,
            bit_cap: DEFAULT_BIT_CAP,
        }
    }
}

/// Outcome of following `x, f(x), f²(x), …`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Orbit {
    /// `points` are pairwise distinct; `points[preperiod..]` is the cycle.
    EventuallyPeriodic {
        points: Vec<Rational>,
        preperiod: usize,
    },
    /// No repetition within the caps; `prefix` is what was seen.
    Open {
        prefix: Vec<Rational>,
        reason: String,
    },
}

impl Orbit {
    pub fn is_eventually_periodic(&self) -> bool {
        matches!(self, Orbit::EventuallyPeriodic { .. })
    }

    pub fn points(&self) -> &[Rational] {
        match self {
            Orbit::EventuallyPeriodic { points, .. } => points,
            Orbit::Open { prefix, .. } => prefix,
        }
    }

    pub fn period(&self) -> Option<usize> {
        match self {
            Orbit::EventuallyPeriodic { points, preperiod } => Some(points.len() - preperiod),
            Orbit::Open { .. } => None,
        }
    }
}

pub fn trace(f: &PwaMap, x: &Rational, caps: OrbitCaps) -> Orbit {
    let mut seen: HashMap<Rational, usize> = HashMap::new();
    let mut points = Vec::new();
    let mut y = x.clone();
    loop {
        if let Some(&k) = seen.get(&y) {
            return Orbit::EventuallyPeriodic {
                points,
                preperiod: k,
            };
        }
        if points.len() >= caps.orbit_cap {
            return Orbit::Open {
                prefix: points,
                reason: format!("no repetition within {} iterations", caps.orbit_cap),
            };
        }
        if bit_size(&y) > caps.bit_cap {
            return Orbit::Open {
                prefix: points,
                reason: format!("denominators exceed {} bits", caps.bit_cap),
            };
        }
        seen.insert(y.clone(), points.len());
        points.push(y.clone());
        y = f.eval_unchecked(&y);
    }
}

/// `f^n(x)`.
pub fn iterate_point(f: &PwaMap, x: &Rational, n: usize) -> Rational {
    let mut y = x.clone();
    for _ in 0..n {
        y = f.eval_unchecked(&y);
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::desk;
    use crate::rational::r;

    #[test]
    fn tent_critical_orbit_closes() {
        let o = trace(&desk::tent(), &r(1, 2), OrbitCaps::default());
        assert_eq!(
            o,
            Orbit::EventuallyPeriodic {
                points: vec![r(1, 2), r(1, 1), r(0, 1)],
                preperiod: 2
            }
        );
        assert_eq!(o.period(), Some(1));
    }

    #[test]
    fn period_two_cycle() {
        let o = trace(&desk::tent(), &r(2, 5), OrbitCaps::default());
        assert_eq!(o.points(), &[r(2, 5), r(4, 5)]);
        assert_eq!(o.period(), Some(2));
    }

    #[test]
    fn kinked_tent_orbit_stays_open() {
        let caps = OrbitCaps {
            orbit_cap: 50,
            bit_cap: 64,
        };
        let o = trace(&desk::kinked_tent(), &r(1, 4), caps);
        assert!(!o.is_eventually_periodic());
        assert_eq!(&o.points()[..3], &[r(1, 4), r(1, 3), r(5, 9)]);
    }
}
