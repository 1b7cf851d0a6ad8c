//! Perturbing a map into a Markov one by pinning open critical orbits.
//!
//! Windows are cells of `Q_k = Q ∪ f⁻¹Q ∪ … ∪ f⁻ᵏQ`, where `Q` is the finite
//! forward-invariant union of the closed critical orbits and the fixed
//! points. `Q_k` is forward invariant too, so no window endpoint ever moves,
//! and an orbit that first enters a cell at step `ℓ` is untouched before it.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::map::{verify_lebesgue, Branch, PwaMap};
use crate::markov::MarkovDetection;
use crate::orbit::{trace, Orbit, OrbitCaps};
use crate::rational::{fmt_rational, int, max_r, min_r, one, zero, Rational};
use crate::structure::{classify, fixed_points_of, Verdict};

use super::{window_with, WindowMap};

/// Search budget for [`markovize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarkovizeEffort {
    pub caps: OrbitCaps,
    /// Deepest backward refinement `k` tried.
    pub depth_cap: usize,
    /// Ceiling on `#Q_k`.
    pub point_cap: usize,
    /// How far the partition is pulled back along a pinned orbit to narrow
    /// the band the window folds in.
    pub band_depth: usize,
}

impl Default for MarkovizeEffort {
    fn default() -> Self {
        MarkovizeEffort {
            caps: OrbitCaps::default(),
            depth_cap: 20,
            point_cap: 200_000,
            band_depth: 48,
        }
    }
}

/// Why the search gave up.
#[derive(Debug, Clone, PartialEq)]
pub struct NotAchieved {
    pub reason: String,
    /// Critical points whose orbits were still open.
    pub unresolved: Vec<Rational>,
    pub depth: usize,
    pub points: usize,
}

impl fmt::Display for NotAchieved {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let u: Vec<String> = self.unresolved.iter().map(fmt_rational).collect();
        write!(
            f,
            "not achieved: {} (depth {}, {} partition points, open: {})",
            self.reason,
            self.depth,
            self.points,
            u.join(" ")
        )
    }
}

/// One window that was folded, with the orbit points pinned inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Pinned {
    pub window: Interval,
    pub fold: usize,
    pub pins: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Markovized {
    Achieved { map: PwaMap, windows: Vec<Pinned> },
    NotAchieved(NotAchieved),
}

impl Markovized {
    pub fn map(self) -> Option<PwaMap> {
        match self {
            Markovized::Achieved { map, .. } => Some(map),
            Markovized::NotAchieved(_) => None,
        }
    }
}

/// Perturbs a leo map by less than `eps` into a leo map whose endpoints and
/// kinks all have eventually periodic orbits.
pub fn markovize(f: &PwaMap, eps: &Rational, effort: MarkovizeEffort) -> Result<Markovized> {
    if classify(f)? != Verdict::Leo {
        return Err(Error::Domain("markovize needs a leo map".into()));
    }
    markovize_any(f, eps, effort, true, None)
}

/// As [`markovize`] without the leo requirement on input or output. With
/// `max_added`, refinement continues until the folds raise the Rohlin
/// entropy by less than that.
pub(crate) fn markovize_any(
    f: &PwaMap,
    eps: &Rational,
    effort: MarkovizeEffort,
    want_leo: bool,
    max_added: Option<f64>,
) -> Result<Markovized> {
    if !eps.is_positive() {
        return Err(Error::Domain("eps must be positive".into()));
    }
    let lr = verify_lebesgue(f);
    if !lr.preserving {
        return Err(Error::NotPreserving(format!("{:?}", lr.witness)));
    }
    let f = f.simplified();
    let mut seeds = vec![int(0), int(1)];
    seeds.extend(f.kinks());

    let mut q: Vec<Rational> = Vec::new();
    let mut open: Vec<Rational> = Vec::new();
    for s in &seeds {
        match trace(&f, s, effort.caps) {
            Orbit::EventuallyPeriodic { points, .. } => q.extend(points),
            Orbit::Open { .. } => open.push(s.clone()),
        }
    }
    if open.is_empty() {
        return Ok(Markovized::Achieved {
            map: f,
            windows: Vec::new(),
        });
    }
    q.push(int(0));
    q.push(int(1));
    for part in fixed_points_of(&f).parts() {
        q.push(part.lo.clone());
        q.push(part.hi.clone());
    }
    q.sort();
    q.dedup();

    let mut depth = 0;
    loop {
        if let Some(placed) = place(&f, &q, &open, eps, effort.caps) {
            let out = finish(&f, &q, placed, effort, want_leo, &open, depth, q.len())?;
            match (&out, max_added) {
                (Markovized::Achieved { map, .. }, Some(cap))
                    if added_entropy(&f, map)? >= cap && depth < effort.depth_cap => {}
                _ => return Ok(out),
            }
        }
        if depth == effort.depth_cap {
            return Ok(give_up(
                format!("no suitable cells within refinement depth {depth}"),
                &f,
                &q,
                &open,
                eps,
                effort,
                depth,
            ));
        }
        let next = preimage_refine(&f, &q);
        if next.len() > effort.point_cap {
            return Ok(give_up(
                format!("partition would exceed {} points", effort.point_cap),
                &f,
                &q,
                &open,
                eps,
                effort,
                depth,
            ));
        }
        q = next;
        depth += 1;
    }
}

fn added_entropy(f: &PwaMap, g: &PwaMap) -> Result<f64> {
    Ok(crate::entropy::rohlin_entropy(g)?.value - crate::entropy::rohlin_entropy(f)?.value)
}

fn give_up(
    reason: String,
    f: &PwaMap,
    q: &[Rational],
    open: &[Rational],
    eps: &Rational,
    effort: MarkovizeEffort,
    depth: usize,
) -> Markovized {
    let unresolved = open
        .iter()
        .filter(|t| first_entry(f, q, t, eps, effort.caps).is_none())
        .cloned()
        .collect();
    Markovized::NotAchieved(NotAchieved {
        reason,
        unresolved,
        depth,
        points: q.len(),
    })
}

fn preimage_refine(f: &PwaMap, q: &[Rational]) -> Vec<Rational> {
    let mut next = q.to_vec();
    for seg in f.segments() {
        let (lo, hi) = seg.y_range();
        let a = q.partition_point(|p| p < lo);
        let b = q.partition_point(|p| p <= hi);
        for y in &q[a..b] {
            next.push(seg.solve(y));
        }
    }
    next.sort();
    next.dedup();
    next
}

/// Where the orbit of `t` lands on its first visit to the interior of a cell
/// of `q` on which `f` is affine with oscillation below `eps`.
enum Entry {
    Cell(usize, Rational),
    /// The orbit hit `q` itself, so it is eventually periodic already.
    Closed,
}

fn suitable(f: &PwaMap, q: &[Rational], i: usize, eps: &Rational) -> bool {
    let cell = Interval::raw(q[i].clone(), q[i + 1].clone());
    let osc = (f.eval_unchecked(&cell.hi) - f.eval_unchecked(&cell.lo)).abs();
    &osc < eps && f.is_affine_on(&cell)
}

fn first_entry(
    f: &PwaMap,
    q: &[Rational],
    t: &Rational,
    eps: &Rational,
    caps: OrbitCaps,
) -> Option<Entry> {
    let mut y = t.clone();
    let mut seen: HashSet<usize> = HashSet::new();
    for _ in 0..caps.orbit_cap {
        y = f.eval_unchecked(&y);
        let i = match q.binary_search(&y) {
            Ok(_) => return Some(Entry::Closed),
            Err(i) => i - 1,
        };
        if seen.insert(i) && suitable(f, q, i, eps) {
            return Some(Entry::Cell(i, y));
        }
        if crate::rational::bit_size(&y) > caps.bit_cap {
            return None;
        }
    }
    None
}

/// Pins grouped by cell index, or `None` if some orbit misses every cell.
fn place(
    f: &PwaMap,
    q: &[Rational],
    open: &[Rational],
    eps: &Rational,
    caps: OrbitCaps,
) -> Option<BTreeMap<usize, (Interval, Vec<Rational>)>> {
    let mut by_cell: BTreeMap<usize, (Interval, Vec<Rational>)> = BTreeMap::new();
    for t in open {
        match first_entry(f, q, t, eps, caps)? {
            Entry::Closed => {}
            Entry::Cell(i, y) => {
                let e = by_cell
                    .entry(i)
                    .or_insert_with(|| (Interval::raw(q[i].clone(), q[i + 1].clone()), Vec::new()));
                e.1.push(y);
            }
        }
    }
    for (_, pins) in by_cell.values_mut() {
        pins.sort();
        pins.dedup();
    }
    Some(by_cell)
}

/// Closest levels below and above `y` whose orbits stay out of every window
/// interior until they land in `q`. Candidates are `q` itself and the points
/// of `q` pulled back along the orbit of `y`, which crowd in on `y`.
fn safe_bracket(
    f: &PwaMap,
    branches: &[Branch],
    q: &[Rational],
    windows: &[Interval],
    y: &Rational,
    depth: usize,
    bit_cap: u64,
) -> Option<(Rational, Rational)> {
    let i = q.binary_search(y).err()?;
    let mut lo = q[i - 1].clone();
    let mut hi = q[i].clone();
    let target = (&hi - &lo) / Rational::from_integer(BigInt::one() << 24);
    let in_window = |x: &Rational| {
        let k = windows.partition_point(|w| &w.hi <= x);
        k < windows.len() && &windows[k].lo < x
    };
    let safe = |c: &Rational, n: usize| {
        let mut x = c.clone();
        for _ in 0..n {
            if in_window(&x) {
                return false;
            }
            x = f.eval_unchecked(&x);
        }
        q.binary_search(&x).is_ok()
    };
    // f^n = slope·x + icpt on dom, a neighbourhood of y
    let mut slope = one();
    let mut icpt = zero();
    let mut dom = Interval::unit();
    let mut p = y.clone();
    for n in 1..=depth {
        let k = branches.partition_point(|b| b.domain.hi <= p);
        let Some(b) = branches.get(k).filter(|b| b.domain.lo < p) else {
            break;
        };
        let a0 = (&b.domain.lo - &icpt) / &slope;
        let a1 = (&b.domain.hi - &icpt) / &slope;
        let (a0, a1) = if a0 <= a1 { (a0, a1) } else { (a1, a0) };
        dom = Interval::raw(max_r(&dom.lo, &a0).clone(), min_r(&dom.hi, &a1).clone());
        slope = &b.slope * &slope;
        icpt = &b.slope * &icpt + &b.intercept;
        p = b.at(&p);
        let Err(j) = q.binary_search(&p) else {
            break;
        };
        for u in [&q[j - 1], &q[j]] {
            let c = (u - &icpt) / &slope;
            if !dom.contains(&c) || crate::rational::bit_size(&c) > bit_cap {
                continue;
            }
            if c > lo && &c < y && safe(&c, n) {
                lo = c;
            } else if c < hi && &c > y && safe(&c, n) {
                hi = c;
            }
        }
        if &hi - &lo < target {
            break;
        }
    }
    Some((lo, hi))
}

/// Window that zigzags only inside a narrow band of levels around each pin's
/// image. Every lap spans a whole band, so its reciprocal slopes add up to
/// the original one; each pin becomes a turning point sent to the nearer
/// safe level, and so does every other new node. The added entropy is then
/// about the pin's distance to that level times a logarithm. Returns the window and its number of
/// monotone laps.
fn pinned_window(
    f: &PwaMap,
    q: &[Rational],
    windows: &[Interval],
    w: &Interval,
    pins: &[Rational],
    depth: usize,
    bit_cap: u64,
) -> (WindowMap, usize) {
    let fc = f.eval_unchecked(&w.lo);
    let fd = f.eval_unchecked(&w.hi);
    let rising = fd > fc;
    let delta = (&fd - &fc).abs();
    let inv = w.len() / &delta;
    // levels measured from f(c) towards f(d)
    let level = |y: &Rational| (y - &fc).abs();
    let back = |t: &Rational| if rising { &fc + t } else { &fc - t };
    let branches = f.branches();

    // (low level, high level, pins), merged where bands overlap
    let mut bands: Vec<(Rational, Rational, Vec<Rational>)> = Vec::new();
    for z in pins {
        let Some((ylo, yhi)) = safe_bracket(
            f,
            &branches,
            q,
            windows,
            &f.eval_unchecked(z),
            depth,
            bit_cap,
        ) else {
            continue;
        };
        let (tl, th) = if rising {
            (level(&ylo), level(&yhi))
        } else {
            (level(&yhi), level(&ylo))
        };
        match bands.last_mut() {
            Some(last) if tl < last.1 => {
                last.1 = max_r(&last.1, &th).clone();
                last.2.push(z.clone());
            }
            _ => bands.push((tl, th, vec![z.clone()])),
        }
    }

    let mut nodes = vec![(w.lo.clone(), fc.clone())];
    let mut laps = 1;
    for (lo, hi, zs) in bands {
        let x_lo = &w.lo + &inv * &lo;
        let x_hi = &w.lo + &inv * &hi;
        if nodes.last().map(|n| n.0 < x_lo) == Some(true) {
            nodes.push((x_lo.clone(), back(&lo)));
        }
        // each pin turns at the nearer edge; an extra turn halfway back
        // keeps the orientation alternating
        let mut prev = x_lo;
        let mut expect_hi = true;
        for z in &zs {
            let t = (z - &w.lo) / &inv;
            let want_hi = &t - &lo > &hi - &t;
            if want_hi != expect_hi {
                let y = if expect_hi { back(&hi) } else { back(&lo) };
                nodes.push(((&prev + z) / int(2), y));
                laps += 1;
            }
            nodes.push((z.clone(), if want_hi { back(&hi) } else { back(&lo) }));
            laps += 1;
            expect_hi = !want_hi;
            prev = z.clone();
        }
        if !expect_hi {
            nodes.push(((&prev + &x_hi) / int(2), back(&lo)));
            laps += 1;
        }
        nodes.push((x_hi, back(&hi)));
    }
    if nodes.last().map(|n| n.0 < w.hi) == Some(true) {
        nodes.push((w.hi.clone(), fd));
    }
    (
        WindowMap::new(nodes).expect("window nodes strictly increase"),
        laps,
    )
}

fn finish(
    f: &PwaMap,
    q: &[Rational],
    placed: BTreeMap<usize, (Interval, Vec<Rational>)>,
    effort: MarkovizeEffort,
    want_leo: bool,
    open: &[Rational],
    depth: usize,
    points: usize,
) -> Result<Markovized> {
    let mut g = f.clone();
    let mut windows = Vec::new();
    let cells: Vec<Interval> = placed.values().map(|(w, _)| w.clone()).collect();
    for (_, (w, pins)) in placed {
        let (h, fold) = pinned_window(
            f,
            q,
            &cells,
            &w,
            &pins,
            effort.band_depth,
            effort.caps.bit_cap / 2,
        );
        g = window_with(&g, &h)?;
        windows.push(Pinned {
            window: w,
            fold,
            pins,
        });
    }
    let not = |reason: String| {
        Ok(Markovized::NotAchieved(NotAchieved {
            reason,
            unresolved: open.to_vec(),
            depth,
            points,
        }))
    };
    match crate::markov::markov_partition(&g, effort.caps)? {
        MarkovDetection::Markov(_) => {}
        MarkovDetection::NotMarkovWithinBound(nm) => {
            return not(format!(
                "orbit of {} still open: {}",
                fmt_rational(&nm.point),
                nm.reason
            ))
        }
    }
    if want_leo {
        let v = classify(&g)?;
        if v != Verdict::Leo {
            return not(format!("perturbed map is {v}"));
        }
    }
    Ok(Markovized::Achieved { map: g, windows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::desk;
    use crate::map::uniform_distance;
    use crate::markov::markov_partition;
    use crate::rational::r;

    #[test]
    fn markov_maps_are_left_alone() {
        let e = MarkovizeEffort::default();
        let t = desk::tent();
        assert_eq!(markovize(&t, &r(1, 10), e).unwrap().map(), Some(t));
        let f = desk::fig5_full_laps();
        assert_eq!(
            markovize(&f, &r(1, 10), e).unwrap().map(),
            Some(f.simplified())
        );
    }

    #[test]
    fn kinked_tent_becomes_markov() {
        let k = desk::kinked_tent();
        let eps = r(1, 10);
        let out = markovize(&k, &eps, MarkovizeEffort::default()).unwrap();
        let Markovized::Achieved { map, windows } = out else {
            panic!("{out:?}")
        };
        assert!(!windows.is_empty());
        assert!(windows.iter().all(|w| w.fold % 2 == 1 && w.fold >= 3));
        assert!(uniform_distance(&k, &map) < eps);
        assert!(verify_lebesgue(&map).preserving);
        assert!(markov_partition(&map, OrbitCaps::default())
            .unwrap()
            .system()
            .is_some());
        assert_eq!(classify(&map).unwrap(), Verdict::Leo);
    }

    #[test]
    fn tiny_budget_reports_diagnostics() {
        let k = desk::kinked_tent();
        let effort = MarkovizeEffort {
            depth_cap: 0,
            ..Default::default()
        };
        match markovize(&k, &r(1, 1000), effort).unwrap() {
            Markovized::NotAchieved(na) => {
                assert_eq!(na.depth, 0);
                assert!(!na.unresolved.is_empty());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_leo_input_is_rejected() {
        assert!(matches!(
            markovize(&PwaMap::identity(), &r(1, 10), MarkovizeEffort::default()),
            Err(Error::Domain(_))
        ));
    }
}
