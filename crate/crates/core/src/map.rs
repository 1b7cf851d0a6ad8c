//! Continuous piecewise-affine self-maps of `[0, 1]` with exact rational nodes.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::rational::{fmt_rational, one, zero, Rational};

/// Default ceiling on the number of nodes any composition may produce.
pub const DEFAULT_NODE_CAP: usize = 1_000_000;

static NODE_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_NODE_CAP);

/// Current process-wide node cap used by [`compose`] and [`iterate`].
pub fn node_cap() -> usize {
    NODE_CAP.load(Ordering::Relaxed)
}

/// Overrides the node cap. Intended to be set once at startup.
pub fn set_node_cap(cap: usize) {
    NODE_CAP.store(cap.max(2), Ordering::Relaxed);
}

/// A continuous map of `[0,1]` given by its graph's corner points. The map is
/// the connect-the-dots interpolation of `nodes`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PwaMap {
    nodes: Vec<(Rational, Rational)>,
}

/// One straight segment of the graph between two consecutive nodes.
#[derive(Debug, Clone, Copy)]
pub struct Segment<'a> {
    pub x0: &'a Rational,
    pub y0: &'a Rational,
    pub x1: &'a Rational,
    pub y1: &'a Rational,
}

impl Segment<'_> {
    pub fn slope(&self) -> Rational {
        (self.y1 - self.y0) / (self.x1 - self.x0)
    }

    pub fn is_flat(&self) -> bool {
        self.y0 == self.y1
    }

    pub fn y_range(&self) -> (&Rational, &Rational) {
        if self.y0 <= self.y1 {
            (self.y0, self.y1)
        } else {
            (self.y1, self.y0)
        }
    }

    /// The unique `x` on this segment with value `y`. Segment must not be flat.
    pub fn solve(&self, y: &Rational) -> Rational {
        self.x0 + (y - self.y0) * (self.x1 - self.x0) / (self.y1 - self.y0)
    }

    pub fn at(&self, x: &Rational) -> Rational {
        self.y0 + (x - self.x0) * (self.y1 - self.y0) / (self.x1 - self.x0)
    }
}

/// A maximal affine piece of a [`PwaMap`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub domain: Interval,
    pub slope: Rational,
    pub intercept: Rational,
}

impl Branch {
    pub fn at(&self, x: &Rational) -> Rational {
        &self.slope * x + &self.intercept
    }
}

fn check_nodes(nodes: &[(Rational, Rational)]) -> Result<()> {
    if nodes.len() < 2 {
        return Err(Error::InvalidMap("need at least two nodes".into()));
    }
    if !nodes[0].0.is_zero() || !nodes[nodes.len() - 1].0.is_one() {
        return Err(Error::InvalidMap(
            "first node must have x = 0 and last node x = 1".into(),
        ));
    }
    for w in nodes.windows(2) {
        if w[0].0 >= w[1].0 {
            return Err(Error::InvalidMap(format!(
                "x values not strictly increasing at {}",
                fmt_rational(&w[1].0)
            )));
        }
    }
    for (x, y) in nodes {
        if y < &zero() || y > &one() {
            return Err(Error::InvalidMap(format!(
                "value {} at x = {} outside [0,1]",
                fmt_rational(y),
                fmt_rational(x)
            )));
        }
    }
    Ok(())
}

/// Drops nodes that sit on the straight line through their neighbours.
pub(crate) fn simplify_nodes(nodes: Vec<(Rational, Rational)>) -> Vec<(Rational, Rational)> {
    if nodes.len() <= 2 {
        return nodes;
    }
    let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(nodes.len());
    for node in nodes {
        if out.len() >= 2 {
            let (ax, ay) = &out[out.len() - 2];
            let (bx, by) = &out[out.len() - 1];
            // collinear iff (by-ay)(cx-bx) == (cy-by)(bx-ax)
            if (by - ay) * (&node.0 - bx) == (&node.1 - by) * (bx - ax) {
                out.pop();
            }
        }
        out.push(node);
    }
    out
}

impl PwaMap {
    /// Validates and stores the nodes as given (no simplification), so that
    /// file round-trips are node-for-node.
    pub fn new(nodes: Vec<(Rational, Rational)>) -> Result<Self> {
        check_nodes(&nodes)?;
        Ok(PwaMap { nodes })
    }

    /// Validates and removes redundant collinear nodes.
    pub fn new_simplified(nodes: Vec<(Rational, Rational)>) -> Result<Self> {
        check_nodes(&nodes)?;
        Ok(PwaMap {
            nodes: simplify_nodes(nodes),
        })
    }

    pub(crate) fn from_trusted(nodes: Vec<(Rational, Rational)>) -> Self {
        debug_assert!(check_nodes(&nodes).is_ok());
        PwaMap {
            nodes: simplify_nodes(nodes),
        }
    }

    pub fn identity() -> Self {
        PwaMap::from_trusted(vec![(zero(), zero()), (one(), one())])
    }

    pub fn flip() -> Self {
        PwaMap::from_trusted(vec![(zero(), one()), (one(), zero())])
    }

    pub fn nodes(&self) -> &[(Rational, Rational)] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn simplified(&self) -> PwaMap {
        PwaMap {
            nodes: simplify_nodes(self.nodes.clone()),
        }
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment<'_>> + '_ {
        self.nodes.windows(2).map(|w| Segment {
            x0: &w[0].0,
            y0: &w[0].1,
            x1: &w[1].0,
            y1: &w[1].1,
        })
    }

    /// Maximal affine pieces, left to right.
    pub fn branches(&self) -> Vec<Branch> {
        let simple = simplify_nodes(self.nodes.clone());
        simple
            .windows(2)
            .map(|w| {
                let slope = (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0);
                let intercept = &w[0].1 - &slope * &w[0].0;
                Branch {
                    domain: Interval::raw(w[0].0.clone(), w[1].0.clone()),
                    slope,
                    intercept,
                }
            })
            .collect()
    }

    /// Interior points where the derivative jumps.
    pub fn kinks(&self) -> Vec<Rational> {
        let simple = simplify_nodes(self.nodes.clone());
        simple[1..simple.len() - 1]
            .iter()
            .map(|(x, _)| x.clone())
            .collect()
    }

    /// Interior turning points (local extrema).
    pub fn turning_points(&self) -> Vec<Rational> {
        let simple = simplify_nodes(self.nodes.clone());
        simple
            .windows(3)
            .filter(|w| {
                let d0 = &w[1].1 - &w[0].1;
                let d1 = &w[2].1 - &w[1].1;
                d0.is_positive() != d1.is_positive() || d0.is_zero() || d1.is_zero()
            })
            .map(|w| w[1].0.clone())
            .collect()
    }

    /// Number of maximal monotone pieces.
    pub fn lap_count(&self) -> usize {
        self.turning_points().len() + 1
    }

    pub fn has_constant_piece(&self) -> bool {
        self.segments().any(|s| s.is_flat())
    }

    pub fn max_abs_slope(&self) -> Rational {
        self.segments()
            .map(|s| s.slope().abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Every branch has `|slope| > 1`.
    pub fn is_expanding(&self) -> bool {
        self.segments().all(|s| s.slope().abs() > one())
    }

    pub fn eval(&self, x: &Rational) -> Result<Rational> {
        if x < &zero() || x > &one() {
            return Err(Error::Domain(format!(
                "x = {} outside [0,1]",
                fmt_rational(x)
            )));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &Rational) -> Rational {
        let idx = self.nodes.partition_point(|(nx, _)| nx <= x);
        if idx == 0 {
            return self.nodes[0].1.clone();
        }
        let (x0, y0) = &self.nodes[idx - 1];
        if x0 == x || idx == self.nodes.len() {
            return y0.clone();
        }
        let (x1, y1) = &self.nodes[idx];
        y0 + (x - x0) * (y1 - y0) / (x1 - x0)
    }

    /// Whether the map is affine on the closed interval `iv`.
    pub fn is_affine_on(&self, iv: &Interval) -> bool {
        let simple = simplify_nodes(self.nodes.clone());
        !simple.iter().any(|(x, _)| iv.contains_interior(x))
    }
}

/// `f ∘ g` with the process node cap.
pub fn compose(f: &PwaMap, g: &PwaMap) -> Result<PwaMap> {
    compose_with_cap(f, g, node_cap())
}

pub fn compose_with_cap(f: &PwaMap, g: &PwaMap, cap: usize) -> Result<PwaMap> {
    let fx: Vec<&Rational> = f.nodes.iter().map(|(x, _)| x).collect();
    let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(g.nodes.len());
    let overflow = |needed| Error::Size {
        what: "composition",
        needed,
        cap,
    };
    for seg in g.segments() {
        if out.is_empty() {
            out.push((seg.x0.clone(), f.eval_unchecked(seg.y0)));
        }
        if !seg.is_flat() {
            let (lo, hi) = seg.y_range();
            let start = fx.partition_point(|x| *x <= lo);
            let end = fx.partition_point(|x| *x < hi);
            let hits = start..end;
            let push = |out: &mut Vec<(Rational, Rational)>, k: usize| {
                let y = fx[k];
                out.push((seg.solve(y), f.nodes[k].1.clone()));
            };
            if seg.y0 < seg.y1 {
                for k in hits {
                    push(&mut out, k);
                }
            } else {
                for k in hits.rev() {
                    push(&mut out, k);
                }
            }
        }
        out.push((seg.x1.clone(), f.eval_unchecked(seg.y1)));
        if out.len() > cap {
            return Err(overflow(out.len()));
        }
    }
    Ok(PwaMap::from_trusted(out))
}

/// `f^n` for `n >= 1`.
pub fn iterate(f: &PwaMap, n: usize) -> Result<PwaMap> {
    if n == 0 {
        return Err(Error::Domain("iterate needs n >= 1".into()));
    }
    let mut acc = f.clone();
    for _ in 1..n {
        acc = compose(f, &acc)?;
    }
    Ok(acc)
}

/// Exact `f(J)`.
pub fn image_interval(f: &PwaMap, j: &Interval) -> Result<Interval> {
    if j.lo < zero() || j.hi > one() {
        return Err(Error::Domain(format!("{j} not inside [0,1]")));
    }
    let a = f.eval_unchecked(&j.lo);
    let b = f.eval_unchecked(&j.hi);
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    for (x, y) in &f.nodes {
        if j.contains_interior(x) {
            if y < &lo {
                lo = y.clone();
            }
            if y > &hi {
                hi = y.clone();
            }
        }
    }
    Ok(Interval::raw(lo, hi))
}

/// Exact `f^{-1}(S)`, solved branch by branch.
pub fn preimage_set(f: &PwaMap, s: &IntervalSet) -> IntervalSet {
    let parts = s.parts();
    let mut out = Vec::new();
    for seg in f.segments() {
        let (ylo, yhi) = seg.y_range();
        let first = parts.partition_point(|p| &p.hi < ylo);
        for p in &parts[first..] {
            if &p.lo > yhi {
                break;
            }
            if seg.is_flat() {
                out.push(Interval::raw(seg.x0.clone(), seg.x1.clone()));
                continue;
            }
            let lo_y = if &p.lo > ylo { &p.lo } else { ylo };
            let hi_y = if &p.hi < yhi { &p.hi } else { yhi };
            let xa = seg.solve(lo_y);
            let xb = seg.solve(hi_y);
            out.push(if xa <= xb {
                Interval::raw(xa, xb)
            } else {
                Interval::raw(xb, xa)
            });
        }
    }
    IntervalSet::from_parts(out)
}

/// Evidence that a map fails to preserve Lebesgue measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// On this range slab the reciprocal slopes of the covering branches sum
    /// to `sum` instead of 1.
    Slab { slab: Interval, sum: Rational },
    /// A constant piece on a positive-length domain.
    ConstantPiece { domain: Interval },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Slab { slab, sum } => write!(
                f,
                "slab {slab}: reciprocal slopes sum to {}, not 1",
                fmt_rational(sum)
            ),
            Witness::ConstantPiece { domain } => write!(f, "constant on {domain}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LebesgueReport {
    pub preserving: bool,
    pub witness: Option<Witness>,
}

/// Sorted distinct node values together with 0 and 1.
pub(crate) fn critical_values<'a, I>(values: I) -> Vec<Rational>
where
    I: IntoIterator<Item = &'a Rational>,
{
    let mut cuts: Vec<Rational> = values.into_iter().cloned().collect();
    cuts.push(zero());
    cuts.push(one());
    cuts.sort();
    cuts.dedup();
    cuts
}

/// For consecutive `cuts`, the sum of `1/|slope|` over the segments of
/// `nodes` covering each slab. `cuts` must include every node value. Returns
/// the domain of a constant segment as the error.
pub(crate) fn slab_sums(
    nodes: &[(Rational, Rational)],
    cuts: &[Rational],
) -> std::result::Result<Vec<Rational>, Interval> {
    let mut diff = vec![Rational::zero(); cuts.len()];
    for w in nodes.windows(2) {
        let (x0, y0) = &w[0];
        let (x1, y1) = &w[1];
        if y0 == y1 {
            return Err(Interval::raw(x0.clone(), x1.clone()));
        }
        let (lo, hi) = if y0 < y1 { (y0, y1) } else { (y1, y0) };
        let weight = ((x1 - x0) / (y1 - y0)).abs();
        let a = cuts.binary_search(lo).expect("cut list covers node values");
        let b = cuts.binary_search(hi).expect("cut list covers node values");
        diff[a] += &weight;
        diff[b] -= &weight;
    }
    let mut acc = Rational::zero();
    let mut sums = Vec::with_capacity(cuts.len().saturating_sub(1));
    for d in diff.iter().take(cuts.len().saturating_sub(1)) {
        acc += d;
        sums.push(acc.clone());
    }
    Ok(sums)
}

/// Exact Lebesgue-preservation check: on every slab between consecutive
/// critical values the covering branches must have reciprocal slopes summing
/// to exactly one. The witness is the lowest failing slab.
pub fn verify_lebesgue(f: &PwaMap) -> LebesgueReport {
    let cuts = critical_values(f.nodes.iter().map(|(_, y)| y));
    match slab_sums(&f.nodes, &cuts) {
        Err(domain) => LebesgueReport {
            preserving: false,
            witness: Some(Witness::ConstantPiece { domain }),
        },
        Ok(sums) => {
            for (k, sum) in sums.into_iter().enumerate() {
                if !sum.is_one() {
                    return LebesgueReport {
                        preserving: false,
                        witness: Some(Witness::Slab {
                            slab: Interval::raw(cuts[k].clone(), cuts[k + 1].clone()),
                            sum,
                        }),
                    };
                }
            }
            LebesgueReport {
                preserving: true,
                witness: None,
            }
        }
    }
}

/// Exact sup-distance; attained at a node of the merged breakpoint set.
pub fn uniform_distance(f: &PwaMap, g: &PwaMap) -> Rational {
    let mut xs: Vec<&Rational> = f
        .nodes
        .iter()
        .chain(g.nodes.iter())
        .map(|(x, _)| x)
        .collect();
    xs.sort();
    xs.dedup();
    xs.into_iter()
        .map(|x| (f.eval_unchecked(x) - g.eval_unchecked(x)).abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Direction of the first lap of a full-lap map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LapSign {
    Up,
    Down,
}

/// The map with `alphas.len()` full laps of widths `alphas`, alternating
/// between 0 and 1 and starting upward for [`LapSign::Up`].
pub fn from_full_laps(sign: LapSign, alphas: &[Rational]) -> Result<PwaMap> {
    if alphas.is_empty() {
        return Err(Error::InvalidTuple("no laps given".into()));
    }
    if let Some(a) = alphas.iter().find(|a| !a.is_positive()) {
        return Err(Error::InvalidTuple(format!(
            "lap width {} is not positive",
            fmt_rational(a)
        )));
    }
    let total: Rational = alphas.iter().sum();
    if !total.is_one() {
        return Err(Error::InvalidTuple(format!(
            "lap widths sum to {}, not 1",
            fmt_rational(&total)
        )));
    }
    let mut low = sign == LapSign::Up;
    let mut x = zero();
    let mut nodes = vec![(x.clone(), if low { zero() } else { one() })];
    for a in alphas {
        x += a;
        low = !low;
        nodes.push((x.clone(), if low { zero() } else { one() }));
    }
    Ok(PwaMap { nodes })
}
