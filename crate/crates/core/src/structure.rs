//! Fixed sets of `f` and `f²`, the collection of transitivity components, and
//! the transitive / mixing / leo classification.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::map::{image_interval, iterate, preimage_set, verify_lebesgue, PwaMap};
use crate::rational::{fmt_rational, one, zero, Rational};

/// Default upper bound on `k` for [`periodic_points`].
pub const DEFAULT_PERIOD_CAP: usize = 20;

/// Exact `{x : f^k(x) = x}`.
pub fn fixed_set(f: &PwaMap, k: usize) -> Result<IntervalSet> {
    let g = iterate(f, k)?;
    Ok(fixed_points_of(&g))
}

pub(crate) fn fixed_points_of(g: &PwaMap) -> IntervalSet {
    let mut parts = Vec::new();
    for seg in g.segments() {
        let s = seg.slope();
        if s.is_one() {
            if seg.y0 == seg.x0 {
                parts.push(Interval::raw(seg.x0.clone(), seg.x1.clone()));
            }
            continue;
        }
        // y0 + s (x - x0) = x
        let x = (seg.y0 - &s * seg.x0) / (one() - &s);
        if seg.x0 <= &x && &x <= seg.x1 {
            parts.push(Interval::point(x));
        }
    }
    IntervalSet::from_parts(parts)
}

/// Position of a map in the mixing hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    NotTransitive,
    TransitiveNotMixing,
    MixingNotLeo,
    Leo,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::NotTransitive => "not-transitive",
            Verdict::TransitiveNotMixing => "transitive-not-mixing",
            Verdict::MixingNotLeo => "mixing-not-leo",
            Verdict::Leo => "leo",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The components `J_i`, the permutation `f(J_i) = J_{σ(i)}`, `Fix(f²)`, the
/// positive-length gaps left uncovered, and the verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureReport {
    pub components: Vec<Interval>,
    pub permutation: Vec<usize>,
    pub fixed_set: IntervalSet,
    pub gaps: Vec<Interval>,
    pub verdict: Verdict,
}

impl StructureReport {
    pub fn is_identity_permutation(&self) -> bool {
        self.permutation.iter().enumerate().all(|(i, &s)| i == s)
    }
}

impl fmt::Display for StructureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict {}", self.verdict)?;
        writeln!(f, "components {}", self.components.len())?;
        for (i, (j, s)) in self.components.iter().zip(&self.permutation).enumerate() {
            writeln!(f, "J{i} {j} -> J{s}")?;
        }
        writeln!(f, "gaps {}", self.gaps.len())?;
        for g in &self.gaps {
            writeln!(f, "gap {g}")?;
        }
        writeln!(f, "fixed_set_f2 {}", self.fixed_set)
    }
}

/// Maximal open intervals of `(0,1)` minus `fix`, as closed intervals.
fn complement_gaps(fix: &IntervalSet) -> Vec<Interval> {
    let mut gaps = Vec::new();
    let mut cursor = zero();
    for p in fix.parts() {
        if p.lo > cursor {
            gaps.push(Interval::raw(cursor.clone(), p.lo.clone()));
        }
        if p.hi > cursor {
            cursor = p.hi.clone();
        }
    }
    if cursor < one() {
        gaps.push(Interval::raw(cursor, one()));
    }
    gaps
}

/// Splits a run of gaps (separated only by isolated fixed points) into
/// minimal closed blocks `K` with `f²(K) ⊆ K`.
fn split_run(f2: &PwaMap, run: &[Interval]) -> Result<Vec<Interval>> {
    let mut blocks = Vec::new();
    let mut start = 0;
    while start < run.len() {
        let lo = run[start].lo.clone();
        let mut found = None;
        for (end, gap) in run.iter().enumerate().skip(start) {
            let k = Interval::raw(lo.clone(), gap.hi.clone());
            let img = image_interval(f2, &k)?;
            if k.contains_interval(&img) {
                found = Some((end, k));
                break;
            }
        }
        match found {
            Some((end, k)) => {
                blocks.push(k);
                start = end + 1;
            }
            None => {
                return Err(Error::Structure(format!(
                    "no f²-invariant block starting at {}",
                    fmt_rational(&lo)
                )))
            }
        }
    }
    Ok(blocks)
}

/// Computes the transitivity components and their permutation.
pub fn transitivity_components(f: &PwaMap) -> Result<StructureReport> {
    let lr = verify_lebesgue(f);
    if !lr.preserving {
        return Err(Error::NotPreserving(format!("{:?}", lr.witness)));
    }
    let f2 = iterate(f, 2)?;
    let fix2 = fixed_points_of(&f2);
    let gaps = complement_gaps(&fix2);

    let mut components = Vec::new();
    let mut run: Vec<Interval> = Vec::new();
    for g in gaps {
        if let Some(last) = run.last() {
            if last.hi != g.lo {
                components.extend(split_run(&f2, &run)?);
                run.clear();
            }
        }
        run.push(g);
    }
    if !run.is_empty() {
        components.extend(split_run(&f2, &run)?);
    }

    for k in &components {
        let img = image_interval(&f2, k)?;
        if &img != k {
            return Err(Error::Structure(format!("f²({k}) = {img}, not onto")));
        }
    }

    let mut permutation = Vec::with_capacity(components.len());
    for j in &components {
        let img = image_interval(f, j)?;
        let idx = components
            .iter()
            .position(|c| c == &img)
            .ok_or_else(|| Error::Structure(format!("f({j}) = {img} is not a component")))?;
        let back = preimage_set(f, &IntervalSet::single(img.clone()));
        if !back.eq_up_to_points(&IntervalSet::single(j.clone())) {
            return Err(Error::Structure(format!(
                "preimage of f({j}) is {back}, not {j}"
            )));
        }
        permutation.push(idx);
    }
    let increasing = permutation.windows(2).all(|w| w[0] < w[1]);
    let decreasing = permutation.windows(2).all(|w| w[0] > w[1]);
    if !increasing && !decreasing {
        return Err(Error::Structure(
            "component permutation is neither order-preserving nor order-reversing".into(),
        ));
    }

    let covered = IntervalSet::from_parts(components.clone());
    let uncovered = complement_gaps(&covered);

    let verdict = verdict_for(f, &components, &permutation);
    Ok(StructureReport {
        components,
        permutation,
        fixed_set: fix2,
        gaps: uncovered,
        verdict,
    })
}

fn verdict_for(f: &PwaMap, components: &[Interval], permutation: &[usize]) -> Verdict {
    match components {
        [j] if *j == Interval::unit() => {
            let back2 = |y: Rational| {
                let s = IntervalSet::points([y]);
                preimage_set(f, &preimage_set(f, &s))
            };
            if back2(zero()).meets_open_unit() && back2(one()).meets_open_unit() {
                Verdict::Leo
            } else {
                Verdict::MixingNotLeo
            }
        }
        [a, b] if a.lo.is_zero() && b.hi.is_one() && a.hi == b.lo && permutation == [1, 0] => {
            Verdict::TransitiveNotMixing
        }
        _ => Verdict::NotTransitive,
    }
}

pub fn classify(f: &PwaMap) -> Result<Verdict> {
    Ok(transitivity_components(f)?.verdict)
}

/// A periodic point or a whole interval of periodic points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Periodic {
    Point { x: Rational, period: usize },
    Interval { iv: Interval, period: usize },
}

impl Periodic {
    pub fn period(&self) -> usize {
        match self {
            Periodic::Point { period, .. } | Periodic::Interval { period, .. } => *period,
        }
    }
}

fn least_period(f: &PwaMap, x: &Rational, k: usize) -> usize {
    let mut y = x.clone();
    for d in 1..=k {
        y = f.eval_unchecked(&y);
        if &y == x && k.is_multiple_of(d) {
            return d;
        }
    }
    k
}

/// All points with `f^k(x) = x`, each with its least period.
pub fn periodic_points(f: &PwaMap, k: usize) -> Result<Vec<Periodic>> {
    periodic_points_with_cap(f, k, DEFAULT_PERIOD_CAP)
}

pub fn periodic_points_with_cap(f: &PwaMap, k: usize, cap: usize) -> Result<Vec<Periodic>> {
    if k == 0 {
        return Err(Error::Domain("period must be at least 1".into()));
    }
    if k > cap {
        return Err(Error::Size {
            what: "period",
            needed: k,
            cap,
        });
    }
    let fix = fixed_set(f, k)?;
    Ok(fix
        .parts()
        .iter()
        .map(|p| {
            if p.is_degenerate() {
                Periodic::Point {
                    period: least_period(f, &p.lo, k),
                    x: p.lo.clone(),
                }
            } else {
                Periodic::Interval {
                    period: least_period(f, &p.midpoint(), k),
                    iv: p.clone(),
                }
            }
        })
        .collect())
}
