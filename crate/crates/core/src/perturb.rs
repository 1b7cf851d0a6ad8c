//! Window perturbations and the pipelines built from them.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Mismatch, Result};
use crate::interval::Interval;
use crate::map::{critical_values, image_interval, slab_sums, uniform_distance, PwaMap};
use crate::markov::{markov_partition, top_entropy, MarkovDetection};
use crate::orbit::OrbitCaps;
use crate::rational::{fmt_rational, int, one, r, zero, Rational};
use crate::structure::{transitivity_components, Verdict};

mod markovize;
pub use markovize::*;

/// How the alternating copies are anchored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WindowMode {
    /// First and last laps are upright copies; needs odd `m` or `f(a) = f(b)`.
    Regular,
    /// Window starts at 0; the last lap is upright so `g(b) = f(b)`.
    BoundaryLeft,
    /// Window ends at 1; the first lap is upright so `g(a) = f(a)`.
    BoundaryRight,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowSpec {
    pub window: Interval,
    pub fold: usize,
    pub mode: WindowMode,
}

impl WindowSpec {
    pub fn regular(window: Interval, fold: usize) -> Self {
        WindowSpec {
            window,
            fold,
            mode: WindowMode::Regular,
        }
    }
}

/// A continuous piecewise-affine map defined on a window `[a, b]` only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowMap {
    nodes: Vec<(Rational, Rational)>,
}

impl WindowMap {
    pub fn new(nodes: Vec<(Rational, Rational)>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidMap("window map needs two nodes".into()));
        }
        if nodes.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidMap(
                "window map x values not increasing".into(),
            ));
        }
        if nodes.iter().any(|(_, y)| y.is_negative() || y > &one()) {
            return Err(Error::InvalidMap("window map value outside [0,1]".into()));
        }
        Ok(WindowMap { nodes })
    }

    /// `f` restricted to `[a, b]`.
    pub fn restrict(f: &PwaMap, window: &Interval) -> Self {
        let mut nodes = vec![(window.lo.clone(), f.eval_unchecked(&window.lo))];
        nodes.extend(
            f.nodes()
                .iter()
                .filter(|(x, _)| window.contains_interior(x))
                .cloned(),
        );
        nodes.push((window.hi.clone(), f.eval_unchecked(&window.hi)));
        WindowMap { nodes }
    }

    /// `x ↦ h(a + b - x)`.
    pub fn reflected(&self) -> Self {
        let a = &self.nodes[0].0;
        let b = &self.nodes[self.nodes.len() - 1].0;
        let s = a + b;
        WindowMap {
            nodes: self
                .nodes
                .iter()
                .rev()
                .map(|(x, y)| (&s - x, y.clone()))
                .collect(),
        }
    }

    pub fn nodes(&self) -> &[(Rational, Rational)] {
        &self.nodes
    }

    pub fn domain(&self) -> Interval {
        Interval::raw(
            self.nodes[0].0.clone(),
            self.nodes[self.nodes.len() - 1].0.clone(),
        )
    }
}

fn glue(f: &PwaMap, window: &Interval, h: &[(Rational, Rational)]) -> PwaMap {
    let mut nodes: Vec<(Rational, Rational)> = f
        .nodes()
        .iter()
        .filter(|(x, _)| x < &window.lo)
        .cloned()
        .collect();
    nodes.extend(h.iter().cloned());
    nodes.extend(f.nodes().iter().filter(|(x, _)| x > &window.hi).cloned());
    PwaMap::from_trusted(nodes)
}

/// Checks that `h` and `f|[a,b]` are λ-equivalent: equal reciprocal-slope
/// sums on every range slab.
pub fn check_equivalent(f: &PwaMap, h: &WindowMap) -> Result<()> {
    let fw = WindowMap::restrict(f, &h.domain());
    let cuts = critical_values(fw.nodes.iter().chain(h.nodes.iter()).map(|(_, y)| y));
    let constant = |iv: Interval| Error::NotPreserving(format!("constant piece on {iv}"));
    let got = slab_sums(&h.nodes, &cuts).map_err(constant)?;
    let expected = slab_sums(&fw.nodes, &cuts).map_err(constant)?;
    for (k, (g, e)) in got.into_iter().zip(expected).enumerate() {
        if g != e {
            return Err(Error::Equivalence(Box::new(Mismatch {
                slab: Interval::raw(cuts[k].clone(), cuts[k + 1].clone()),
                got: g,
                expected: e,
            })));
        }
    }
    Ok(())
}

/// Replaces `f` on the window by `h` after checking endpoint agreement (except
/// where the window touches 0 or 1) and λ-equivalence.
pub fn window_with(f: &PwaMap, h: &WindowMap) -> Result<PwaMap> {
    let w = h.domain();
    if w.lo.is_negative() || w.hi > one() {
        return Err(Error::Domain(format!("window {w} not inside [0,1]")));
    }
    let ends = [
        (&w.lo, &h.nodes[0].1),
        (&w.hi, &h.nodes[h.nodes.len() - 1].1),
    ];
    for (x, hy) in ends {
        let boundary = x.is_zero() || x.is_one();
        let fy = f.eval_unchecked(x);
        if !boundary && &fy != hy {
            return Err(Error::Continuity(format!(
                "h({}) = {} but f({}) = {}",
                fmt_rational(x),
                fmt_rational(hy),
                fmt_rational(x),
                fmt_rational(&fy)
            )));
        }
    }
    check_equivalent(f, h)?;
    Ok(glue(f, &w, &h.nodes))
}

/// The `m` compressed, alternately reflected copies of `f|[a,b]`.
pub fn regular_window_map(f: &PwaMap, spec: &WindowSpec) -> Result<WindowMap> {
    let w = &spec.window;
    let m = spec.fold;
    if w.lo.is_negative() || w.hi > one() {
        return Err(Error::Domain(format!("window {w} not inside [0,1]")));
    }
    if w.is_degenerate() {
        return Err(Error::Domain(format!("window {w} is degenerate")));
    }
    if m == 0 {
        return Err(Error::Domain("fold count must be positive".into()));
    }
    match spec.mode {
        WindowMode::Regular => {
            if m.is_multiple_of(2) && f.eval_unchecked(&w.lo) != f.eval_unchecked(&w.hi) {
                return Err(Error::Continuity(format!(
                    "even fold {m} needs f(a) = f(b) on {w}"
                )));
            }
        }
        WindowMode::BoundaryLeft if !w.lo.is_zero() => {
            return Err(Error::Domain(format!(
                "boundary-left window {w} must start at 0"
            )))
        }
        WindowMode::BoundaryRight if !w.hi.is_one() => {
            return Err(Error::Domain(format!(
                "boundary-right window {w} must end at 1"
            )))
        }
        _ => {}
    }
    let base = WindowMap::restrict(f, w);
    let len = w.len();
    let mm = int(m as i64);
    let upright = |j: usize| match spec.mode {
        WindowMode::BoundaryLeft => (m - 1 - j).is_multiple_of(2),
        _ => j.is_multiple_of(2),
    };
    let mut nodes: Vec<(Rational, Rational)> = Vec::with_capacity(m * (base.nodes.len() - 1) + 1);
    for j in 0..m {
        let start = &w.lo + &len * int(j as i64) / &mm;
        let end = &w.lo + &len * int(j as i64 + 1) / &mm;
        let lap: Vec<(Rational, Rational)> = if upright(j) {
            base.nodes
                .iter()
                .map(|(u, y)| (&start + (u - &w.lo) / &mm, y.clone()))
                .collect()
        } else {
            base.nodes
                .iter()
                .rev()
                .map(|(u, y)| (&end - (u - &w.lo) / &mm, y.clone()))
                .collect()
        };
        let skip = usize::from(j > 0);
        nodes.extend(lap.into_iter().skip(skip));
    }
    Ok(WindowMap { nodes })
}

/// Regular (or boundary) `m`-fold window perturbation.
pub fn regular_window(f: &PwaMap, spec: &WindowSpec) -> Result<PwaMap> {
    if spec.fold == 1 {
        return Ok(f.clone());
    }
    let h = regular_window_map(f, spec)?;
    Ok(glue(f, &spec.window, &h.nodes))
}

/// A window length below which any λ-equivalent perturbation moves `f` by
/// less than `eps`.
pub fn safe_window_delta(f: &PwaMap, eps: &Rational) -> Rational {
    eps / f.max_abs_slope()
}

/// `max f - min f` over the window.
pub fn oscillation(f: &PwaMap, w: &Interval) -> Rational {
    let img = image_interval(f, w).expect("window inside [0,1]");
    img.len()
}

/// Default cap on the number of perturbation rounds in [`leoize`].
pub const LEOIZE_ROUNDS: usize = 200;

fn pow2(k: usize) -> Rational {
    Rational::from_integer(BigInt::one() << k)
}

/// Perturbs `f` by less than `eps` into a leo map by merging transitivity
/// components with small 3-fold windows.
pub fn leoize(f: &PwaMap, eps: &Rational) -> Result<PwaMap> {
    if !eps.is_positive() {
        return Err(Error::Domain("eps must be positive".into()));
    }
    let mut g = f.clone();
    for round in 1..=LEOIZE_ROUNDS {
        let rep = transitivity_components(&g)?;
        match rep.verdict {
            Verdict::Leo => {
                let d = uniform_distance(f, &g);
                if &d >= eps {
                    return Err(Error::Budget(format!(
                        "result is {} away, budget {}",
                        fmt_rational(&d),
                        fmt_rational(eps)
                    )));
                }
                return Ok(g);
            }
            Verdict::MixingNotLeo => {
                return Err(Error::Structure(
                    "mixing piecewise-affine map that is not leo".into(),
                ))
            }
            _ => {}
        }
        let eps_k = eps / pow2(round);
        let delta = safe_window_delta(&g, &eps_k);
        if let Some(gap) = rep.gaps.iter().find(|iv| !iv.is_degenerate()) {
            // tile the gap with short 3-fold windows
            let pieces = (gap.len() / &delta).floor() + one();
            let step = gap.len() / &pieces;
            let n = pieces.to_integer().try_into().unwrap_or(usize::MAX);
            if n > 100_000 {
                return Err(Error::Budget(format!("gap {gap} needs {n} windows")));
            }
            for k in 0..n {
                let lo = &gap.lo + &step * int(k as i64);
                let hi = if k + 1 == n {
                    gap.hi.clone()
                } else {
                    &lo + &step
                };
                g = regular_window(&g, &WindowSpec::regular(Interval::raw(lo, hi), 3))?;
            }
            continue;
        }
        let shared = rep
            .components
            .windows(2)
            .find(|w| w[0].hi == w[1].lo)
            .map(|w| (w[0].clone(), w[1].clone()));
        let Some((left, right)) = shared else {
            return Err(Error::Structure(format!(
                "no adjacent components to merge in {} components",
                rep.components.len()
            )));
        };
        let b = &left.hi;
        let two = int(2);
        let w = [&delta / int(4), left.len() / &two, right.len() / &two]
            .into_iter()
            .min()
            .expect("three candidates");
        let window = Interval::raw(b - &w, b + &w);
        g = regular_window(&g, &WindowSpec::regular(window, 3))?;
    }
    Err(Error::Budget(format!(
        "still not leo after {LEOIZE_ROUNDS} rounds"
    )))
}

/// How a horseshoe's entropy bound was certified.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// Log of the spectral radius of the detected Markov partition.
    Spectral(f64),
    /// The window is covered by this many laps of the window map.
    Covering(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Horseshoe {
    pub map: PwaMap,
    pub fixed_point: Rational,
    pub window: Interval,
    pub fold: usize,
    pub certificate: Certificate,
    /// Certified lower bound on topological entropy, in nats.
    pub entropy_lower_bound: f64,
}

/// Fixed points where `f - id` changes sign, in increasing order.
pub fn transverse_fixed_points(f: &PwaMap) -> Vec<Rational> {
    let branches = f.branches();
    let mut out = Vec::new();
    for (k, br) in branches.iter().enumerate() {
        if br.slope.is_one() {
            continue;
        }
        let x = &br.intercept / (one() - &br.slope);
        if !br.domain.contains(&x) {
            continue;
        }
        let side = |s: &Rational| (s - one()).signum();
        let left = if x == br.domain.lo && k > 0 {
            Some(&branches[k - 1].slope)
        } else {
            None
        };
        let right = if x == br.domain.hi && k + 1 < branches.len() {
            Some(&branches[k + 1].slope)
        } else {
            None
        };
        let ok = match (left, right) {
            (Some(l), _) => side(l) == side(&br.slope) && !l.is_one(),
            (_, Some(rs)) => side(rs) == side(&br.slope) && !rs.is_one(),
            _ => true,
        };
        if ok && out.last() != Some(&x) {
            out.push(x);
        }
    }
    out
}

/// Creates a horseshoe of entropy at least `log n` near the smallest
/// transverse fixed point with an `(n+2)`-fold window (rounded up to odd).
pub fn horseshoe(f: &PwaMap, n: usize, eps: &Rational) -> Result<Horseshoe> {
    if n < 2 {
        return Err(Error::Domain("horseshoe needs n >= 2".into()));
    }
    if !eps.is_positive() {
        return Err(Error::Domain("eps must be positive".into()));
    }
    let fold = if n % 2 == 1 { n + 2 } else { n + 3 };
    let delta = safe_window_delta(f, eps);
    let half_width = &delta / int(2);
    for b in transverse_fixed_points(f) {
        let lo = if b > half_width {
            &b - &half_width
        } else {
            zero()
        };
        let hi = if &b + &half_width < one() {
            &b + &half_width
        } else {
            one()
        };
        let window = Interval::raw(lo, hi);
        if !image_interval(f, &window)?.contains_interval(&window) {
            continue;
        }
        let map = regular_window(f, &WindowSpec::regular(window.clone(), fold))?;
        let (certificate, bound) = match markov_partition(&map, OrbitCaps::default())? {
            MarkovDetection::Markov(ms) if ms.n() <= 20_000 => {
                let h = top_entropy(&ms);
                (Certificate::Spectral(h), h.max((fold as f64).ln()))
            }
            _ => (Certificate::Covering(fold), (fold as f64).ln()),
        };
        return Ok(Horseshoe {
            map,
            fixed_point: b,
            window,
            fold,
            certificate,
            entropy_lower_bound: bound,
        });
    }
    Err(Error::Domain("no transverse fixed point".into()))
}

/// `1/2^k` as a rational, for geometric budget splits.
pub fn half_pow(k: usize) -> Rational {
    r(1, 1) / pow2(k)
}
