//! Markov partitions, the probability vector and stochastic matrix, mixing
//! flags, itineraries, topological entropy, and combinatorial types.

use std::fmt::Write as _;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::map::{preimage_set, verify_lebesgue, PwaMap};
use crate::orbit::{trace, Orbit, OrbitCaps};
use crate::rational::{fmt_rational, one, zero, Rational};

/// A Markov partition `0 = x_0 < … < x_N = 1` of a map. Row `i` of the
/// transition structure is the contiguous block of cells covered by
/// `f(A_i)`, so matrices are stored as index ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkovSystem {
    pub points: Vec<Rational>,
    /// `f(A_i) = A_lo ∪ … ∪ A_{hi-1}` for `image_range[i] = (lo, hi)`.
    pub image_range: Vec<(usize, usize)>,
    pub pvec: Vec<Rational>,
    /// Every branch has `|slope| > 1`.
    pub expanding: bool,
}

impl MarkovSystem {
    /// Number of cells.
    pub fn n(&self) -> usize {
        self.points.len() - 1
    }

    pub fn cell(&self, i: usize) -> Interval {
        Interval::raw(self.points[i].clone(), self.points[i + 1].clone())
    }

    pub fn cells(&self) -> Vec<Interval> {
        (0..self.n()).map(|i| self.cell(i)).collect()
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        let (lo, hi) = self.image_range[i];
        lo <= j && j < hi
    }

    /// `λ(A_j) / λ(f(A_i))` when `f(A_i) ⊇ A_j`, else 0.
    pub fn stoch(&self, i: usize, j: usize) -> Rational {
        if !self.adjacent(i, j) {
            return zero();
        }
        let (lo, hi) = self.image_range[i];
        let img = &self.points[hi] - &self.points[lo];
        &self.pvec[j] / img
    }

    pub fn adjacency_matrix(&self) -> Vec<Vec<u8>> {
        (0..self.n())
            .map(|i| (0..self.n()).map(|j| self.adjacent(i, j) as u8).collect())
            .collect()
    }

    pub fn stoch_matrix(&self) -> Vec<Vec<Rational>> {
        (0..self.n())
            .map(|i| (0..self.n()).map(|j| self.stoch(i, j)).collect())
            .collect()
    }

    /// `pP`, computed exactly.
    pub fn p_times_stoch(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.n()];
        for i in 0..self.n() {
            let (lo, hi) = self.image_range[i];
            let img = &self.points[hi] - &self.points[lo];
            let w = &self.pvec[i] / img;
            for (j, o) in out.iter_mut().enumerate().take(hi).skip(lo) {
                *o += &w * &self.pvec[j];
            }
        }
        out
    }

    /// Index of the cell containing `y`, lowest index on a shared boundary,
    /// and whether `y` is such a shared boundary.
    pub fn locate(&self, y: &Rational) -> (usize, bool) {
        let idx = self.points.partition_point(|p| p < y);
        let n = self.n();
        if idx < self.points.len() && &self.points[idx] == y {
            let interior = idx > 0 && idx < n;
            (idx.saturating_sub(1).min(n - 1), interior)
        } else {
            (idx - 1, false)
        }
    }

    /// Text dump: `N`, the rows of `P`, the row `p`, then the 0-1 rows.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.n());
        let row = |v: Vec<String>| v.join(" ");
        for i in 0..self.n() {
            let _ = writeln!(
                out,
                "{}",
                row((0..self.n())
                    .map(|j| fmt_rational(&self.stoch(i, j)))
                    .collect())
            );
        }
        let _ = writeln!(out, "{}", row(self.pvec.iter().map(fmt_rational).collect()));
        for i in 0..self.n() {
            let _ = writeln!(
                out,
                "{}",
                row((0..self.n())
                    .map(|j| (self.adjacent(i, j) as u8).to_string())
                    .collect())
            );
        }
        out
    }
}

/// Why a map was not recognized as Markov.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotMarkov {
    pub point: Rational,
    pub prefix: Vec<Rational>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MarkovDetection {
    Markov(MarkovSystem),
    NotMarkovWithinBound(NotMarkov),
}

impl MarkovDetection {
    pub fn system(self) -> Option<MarkovSystem> {
        match self {
            MarkovDetection::Markov(ms) => Some(ms),
            MarkovDetection::NotMarkovWithinBound(_) => None,
        }
    }
}

/// Union of the orbits of `seeds`, or the first orbit that does not close.
pub(crate) fn closed_orbits(
    f: &PwaMap,
    seeds: &[Rational],
    caps: OrbitCaps,
) -> std::result::Result<Vec<Rational>, NotMarkov> {
    let mut pts: Vec<Rational> = Vec::new();
    let mut known = std::collections::HashSet::new();
    for s in seeds {
        if known.contains(s) {
            continue;
        }
        match trace(f, s, caps) {
            Orbit::EventuallyPeriodic { points, .. } => {
                for p in points {
                    if known.insert(p.clone()) {
                        pts.push(p);
                    }
                }
            }
            Orbit::Open { prefix, reason } => {
                return Err(NotMarkov {
                    point: s.clone(),
                    prefix,
                    reason,
                })
            }
        }
    }
    pts.sort();
    Ok(pts)
}

/// Builds the system on a given forward-invariant point set containing 0, 1
/// and every kink.
pub(crate) fn system_on(f: &PwaMap, points: Vec<Rational>) -> MarkovSystem {
    let n = points.len() - 1;
    let index = |y: &Rational| {
        points
            .binary_search(y)
            .expect("partition is forward invariant")
    };
    let mut image_range = Vec::with_capacity(n);
    let fx: Vec<usize> = points.iter().map(|x| index(&f.eval_unchecked(x))).collect();
    for i in 0..n {
        let (a, b) = (fx[i], fx[i + 1]);
        image_range.push(if a < b { (a, b) } else { (b, a) });
    }
    let pvec = points.windows(2).map(|w| &w[1] - &w[0]).collect();
    MarkovSystem {
        points,
        image_range,
        pvec,
        expanding: f.is_expanding(),
    }
}

/// Detects a Markov partition: the union of the forward orbits of 0, 1 and
/// every kink, provided each closes up within the caps.
pub fn markov_partition(f: &PwaMap, caps: OrbitCaps) -> Result<MarkovDetection> {
    let lr = verify_lebesgue(f);
    if !lr.preserving {
        return Err(Error::NotPreserving(format!("{:?}", lr.witness)));
    }
    let mut seeds = vec![zero(), one()];
    seeds.extend(f.kinks());
    Ok(match closed_orbits(f, &seeds, caps) {
        Ok(points) => MarkovDetection::Markov(system_on(f, points)),
        Err(nm) => MarkovDetection::NotMarkovWithinBound(nm),
    })
}

/// Refines a partition by adding `f^{-1}` of its points, `depth` times.
pub fn refine(f: &PwaMap, ms: &MarkovSystem, depth: usize) -> MarkovSystem {
    let mut points = ms.points.clone();
    for _ in 0..depth {
        let mut next = points.clone();
        for seg in f.segments() {
            let (lo, hi) = seg.y_range();
            let a = points.partition_point(|p| p < lo);
            let b = points.partition_point(|p| p <= hi);
            for y in &points[a..b] {
                next.push(seg.solve(y));
            }
        }
        next.sort();
        next.dedup();
        points = next;
    }
    system_on(f, points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MixingFlags {
    pub irreducible: bool,
    pub aperiodic: bool,
    pub strongly_mixing: bool,
    /// Gcd of cycle lengths when irreducible.
    pub period: Option<usize>,
    /// The strong-mixing conclusion relies on expansion; false means it is
    /// reported for a non-expanding map and should be read with care.
    pub expanding: bool,
}

fn successors(ms: &MarkovSystem, i: usize) -> std::ops::Range<usize> {
    let (lo, hi) = ms.image_range[i];
    lo..hi
}

/// Strongly connected components (iterative Kosaraju).
fn sccs(ms: &MarkovSystem) -> Vec<usize> {
    let n = ms.n();
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in successors(ms, i) {
            pred[j].push(i);
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![(s, successors(ms, s))];
        while let Some((v, it)) = stack.last_mut() {
            if let Some(w) = it.next() {
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, successors(ms, w)));
                }
            } else {
                order.push(*v);
                stack.pop();
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut c = 0;
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = c;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &u in &pred[v] {
                if comp[u] == usize::MAX {
                    comp[u] = c;
                    stack.push(u);
                }
            }
        }
        c += 1;
    }
    comp
}

/// Gcd of cycle lengths inside the component containing `root`.
fn component_period(ms: &MarkovSystem, comp: &[usize], root: usize) -> usize {
    let n = ms.n();
    let mut level = vec![usize::MAX; n];
    level[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    let mut g = 0usize;
    while let Some(v) = queue.pop_front() {
        for w in successors(ms, v) {
            if comp[w] != comp[root] {
                continue;
            }
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            } else {
                let d = (level[v] + 1).abs_diff(level[w]);
                g = g.gcd(&d);
            }
        }
    }
    g
}

pub fn mixing_flags(ms: &MarkovSystem) -> MixingFlags {
    let comp = sccs(ms);
    let irreducible = comp.iter().all(|&c| c == comp[0]);
    let period = irreducible.then(|| component_period(ms, &comp, 0));
    let aperiodic = period == Some(1);
    MixingFlags {
        irreducible,
        aperiodic,
        strongly_mixing: irreducible && aperiodic,
        period,
        expanding: ms.expanding,
    }
}

/// Cell indices of `x, f(x), …, f^{n-1}(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItinerarySeq {
    pub symbols: Vec<usize>,
    pub ambiguous: bool,
}

pub fn itinerary(f: &PwaMap, ms: &MarkovSystem, x: &Rational, n: usize) -> Result<ItinerarySeq> {
    if x.is_negative() || x > &one() {
        return Err(Error::Domain(format!(
            "x = {} outside [0,1]",
            fmt_rational(x)
        )));
    }
    let mut y = x.clone();
    let mut symbols = Vec::with_capacity(n);
    let mut ambiguous = false;
    for _ in 0..n {
        let (c, amb) = ms.locate(&y);
        symbols.push(c);
        ambiguous |= amb;
        y = f.eval_unchecked(&y);
    }
    Ok(ItinerarySeq { symbols, ambiguous })
}

/// Perron root bounds for `A` by power iteration on `A + I`.
pub fn spectral_radius_bounds(ms: &MarkovSystem) -> (f64, f64) {
    let n = ms.n();
    let mut v = vec![1.0f64; n];
    let mut prefix = vec![0.0f64; n + 1];
    let (mut lower, mut upper) = (0.0, f64::INFINITY);
    for _ in 0..100_000 {
        for i in 0..n {
            prefix[i + 1] = prefix[i] + v[i];
        }
        let w: Vec<f64> = (0..n)
            .map(|i| {
                let (lo, hi) = ms.image_range[i];
                v[i] + prefix[hi] - prefix[lo]
            })
            .collect();
        let ratios = w.iter().zip(&v).map(|(a, b)| a / b);
        lower = ratios.clone().fold(f64::INFINITY, f64::min) - 1.0;
        upper = ratios.fold(0.0, f64::max) - 1.0;
        let norm = w.iter().cloned().fold(0.0, f64::max);
        v = w.into_iter().map(|x| (x / norm).max(1e-300)).collect();
        if upper - lower < 1e-12 * upper.max(1.0) {
            break;
        }
    }
    (lower.max(0.0), upper)
}

/// `log` of the spectral radius of the 0-1 transition matrix.
pub fn top_entropy(ms: &MarkovSystem) -> f64 {
    let (lo, hi) = spectral_radius_bounds(ms);
    ((lo + hi) / 2.0).ln()
}

/// `f*`: index of `f(x_i)` in the partition, for each `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CombinatorialType {
    pub arrow: Vec<usize>,
}

pub fn combinatorial_type(f: &PwaMap, ms: &MarkovSystem) -> Result<CombinatorialType> {
    if !f.is_expanding() {
        return Err(Error::ExpandingRequired(
            "some branch has slope magnitude <= 1".into(),
        ));
    }
    let arrow = ms
        .points
        .iter()
        .map(|x| {
            let y = f.eval_unchecked(x);
            ms.points.binary_search(&y).map_err(|_| {
                Error::Structure(format!(
                    "f({}) = {} is not a partition point",
                    fmt_rational(x),
                    fmt_rational(&y)
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CombinatorialType { arrow })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Conjugacy {
    /// Pairs `(x, h(x))` for the partition points of `f`.
    Conjugate {
        node_map: Vec<(Rational, Rational)>,
    },
    NotConjugate {
        reason: String,
    },
    Undecided {
        reason: String,
    },
}

impl Conjugacy {
    pub fn is_conjugate(&self) -> bool {
        matches!(self, Conjugacy::Conjugate { .. })
    }
}

/// Orbits of 0, 1 and the turning points. An increasing conjugacy must map
/// this set onto the corresponding set of the other map.
fn turning_partition(f: &PwaMap, caps: OrbitCaps) -> std::result::Result<MarkovSystem, NotMarkov> {
    let mut seeds = vec![zero(), one()];
    seeds.extend(f.turning_points());
    closed_orbits(f, &seeds, caps).map(|pts| system_on(f, pts))
}

/// Decides whether two expanding Markov maps are conjugate by an increasing
/// homeomorphism, by comparing combinatorial types on the partitions
/// generated by the endpoints and turning points.
pub fn conjugacy_check(f: &PwaMap, g: &PwaMap, caps: OrbitCaps) -> Result<Conjugacy> {
    for (name, h) in [("first", f), ("second", g)] {
        if !h.is_expanding() {
            return Err(Error::ExpandingRequired(format!(
                "{name} map is not expanding"
            )));
        }
    }
    if f.lap_count() != g.lap_count() {
        return Ok(Conjugacy::NotConjugate {
            reason: format!("lap counts differ: {} vs {}", f.lap_count(), g.lap_count()),
        });
    }
    let rising = |h: &PwaMap| h.segments().next().map(|s| s.y1 > s.y0);
    if rising(f) != rising(g) {
        return Ok(Conjugacy::NotConjugate {
            reason: "first laps have opposite orientation".into(),
        });
    }
    let (pf, pg) = match (turning_partition(f, caps), turning_partition(g, caps)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(nm), _) | (_, Err(nm)) => {
            return Ok(Conjugacy::Undecided {
                reason: format!(
                    "orbit of {} did not close: {}",
                    fmt_rational(&nm.point),
                    nm.reason
                ),
            })
        }
    };
    let arrow = |h: &PwaMap, ms: &MarkovSystem| -> Vec<usize> {
        ms.points
            .iter()
            .map(|x| ms.points.binary_search(&h.eval_unchecked(x)).unwrap())
            .collect()
    };
    if pf.n() != pg.n() {
        return Ok(Conjugacy::NotConjugate {
            reason: format!("partition sizes differ: {} vs {}", pf.n() + 1, pg.n() + 1),
        });
    }
    let (af, ag) = (arrow(f, &pf), arrow(g, &pg));
    if af != ag {
        return Ok(Conjugacy::NotConjugate {
            reason: "combinatorial types differ".into(),
        });
    }
    Ok(Conjugacy::Conjugate {
        node_map: pf.points.into_iter().zip(pg.points).collect(),
    })
}

/// Measure of the cylinder `A_{w0} ∩ f⁻¹A_{w1} ∩ …` from `p` and `P`.
pub fn cylinder_measure(ms: &MarkovSystem, word: &[usize]) -> Rational {
    let Some(&first) = word.first() else {
        return one();
    };
    let mut m = ms.pvec[first].clone();
    for w in word.windows(2) {
        m *= ms.stoch(w[0], w[1]);
    }
    m
}

/// The cylinder `A_{w0} ∩ f⁻¹A_{w1} ∩ …` as an exact interval set.
pub fn cylinder_set(f: &PwaMap, ms: &MarkovSystem, word: &[usize]) -> IntervalSet {
    let mut s = IntervalSet::unit();
    for &i in word.iter().rev() {
        let cell = IntervalSet::single(ms.cell(i));
        s = cell.intersect(&preimage_set(f, &s));
    }
    s
}
