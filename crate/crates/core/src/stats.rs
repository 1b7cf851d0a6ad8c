//! Exact correlation sequences, Cesàro mixing scores, Birkhoff averages and
//! leo times.

use std::fmt;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::map::{image_interval, preimage_set, PwaMap};
use crate::rational::{fmt_f64, fmt_rational, int, r, to_f64, zero, Rational};

/// Default ceiling on the number of parts of an iterated preimage.
pub const DEFAULT_PREIMAGE_CAP: usize = 100_000;
/// Default iteration cap for [`leo_time`].
pub const DEFAULT_LEO_CAP: usize = 64;

/// Successive preimages `A, f⁻¹A, f⁻²A, …` with a part-count cap.
struct Preimages<'a> {
    f: &'a PwaMap,
    cur: IntervalSet,
    cap: usize,
}

impl<'a> Preimages<'a> {
    fn new(f: &'a PwaMap, a: &IntervalSet, cap: usize) -> Self {
        Preimages {
            f,
            cur: a.clone(),
            cap,
        }
    }

    /// Isolated points carry no measure and are dropped.
    fn step(&mut self) -> Result<()> {
        let pre = preimage_set(self.f, &self.cur);
        let next = IntervalSet::from_parts(pre.nondegenerate().cloned().collect());
        if next.len() > self.cap {
            return Err(Error::Size {
                what: "iterated preimage parts (try a smaller n)",
                needed: next.len(),
                cap: self.cap,
            });
        }
        self.cur = next;
        Ok(())
    }
}

/// `λ(f⁻ⁿA ∩ B) − λ(A)λ(B)`.
pub fn correlation(f: &PwaMap, a: &IntervalSet, b: &IntervalSet, n: usize) -> Result<Rational> {
    correlation_with_cap(f, a, b, n, DEFAULT_PREIMAGE_CAP)
}

pub fn correlation_with_cap(
    f: &PwaMap,
    a: &IntervalSet,
    b: &IntervalSet,
    n: usize,
    cap: usize,
) -> Result<Rational> {
    Ok(correlations(f, a, b, n + 1, cap)?.pop().unwrap())
}

/// `corr_j` for `j < n`.
pub fn correlations(
    f: &PwaMap,
    a: &IntervalSet,
    b: &IntervalSet,
    n: usize,
    cap: usize,
) -> Result<Vec<Rational>> {
    let base = a.measure() * b.measure();
    let mut pre = Preimages::new(f, a, cap);
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        if j > 0 {
            pre.step()?;
        }
        out.push(pre.cur.intersect(b).measure() - &base);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingScore {
    pub horizon: usize,
    pub ergodic_score: f64,
    pub weak_score: f64,
    pub strong_tail: Vec<f64>,
    /// The exact sequence the scores were computed from.
    pub corr: Vec<Rational>,
}

pub fn mixing_scores(
    f: &PwaMap,
    a: &IntervalSet,
    b: &IntervalSet,
    horizon: usize,
) -> Result<MixingScore> {
    if horizon == 0 {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }
    let corr = correlations(f, a, b, horizon, DEFAULT_PREIMAGE_CAP)?;
    let n = int(horizon as i64);
    let sum: Rational = corr.iter().sum();
    let abs_sum: Rational = corr.iter().map(|c| c.abs()).sum();
    Ok(MixingScore {
        horizon,
        ergodic_score: to_f64(&(sum.abs() / &n)),
        weak_score: to_f64(&(abs_sum / &n)),
        strong_tail: corr.iter().map(|c| to_f64(&c.abs())).collect(),
        corr,
    })
}

pub const CORR_CSV_HEADER: &str = "map-id,setA,setB,j,corr,|corr|";

/// Compact set notation without commas: `0/1:1/2+3/4:1/1`.
pub fn fmt_set_compact(s: &IntervalSet) -> String {
    s.parts()
        .iter()
        .map(|p| format!("{}:{}", fmt_rational(&p.lo), fmt_rational(&p.hi)))
        .collect::<Vec<_>>()
        .join("+")
}

/// One CSV row per `j`.
pub fn corr_csv_rows(map_id: &str, a: &IntervalSet, b: &IntervalSet, corr: &[Rational]) -> String {
    let (sa, sb) = (fmt_set_compact(a), fmt_set_compact(b));
    let mut out = String::new();
    for (j, c) in corr.iter().enumerate() {
        out.push_str(&format!(
            "{map_id},{sa},{sb},{j},{},{}\n",
            fmt_rational(c),
            fmt_f64(to_f64(&c.abs()))
        ));
    }
    out
}

/// A continuous piecewise-affine function on `[0,1]`, given by its nodes.
/// Values are unrestricted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observable {
    nodes: Vec<(Rational, Rational)>,
}

impl Observable {
    pub fn new(nodes: Vec<(Rational, Rational)>) -> Result<Self> {
        if nodes.len() < 2 || nodes[0].0 != zero() || nodes[nodes.len() - 1].0 != int(1) {
            return Err(Error::Domain(
                "observable nodes must start at 0 and end at 1".into(),
            ));
        }
        if nodes.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Domain(
                "observable nodes must be strictly increasing".into(),
            ));
        }
        Ok(Observable { nodes })
    }

    pub fn identity() -> Self {
        Observable::new(vec![(zero(), zero()), (int(1), int(1))]).unwrap()
    }

    pub fn constant(c: Rational) -> Self {
        Observable::new(vec![(zero(), c.clone()), (int(1), c)]).unwrap()
    }

    /// Hat of height 1 at `c`, supported on `[c−w, c+w] ∩ [0,1]`.
    pub fn hat(c: &Rational, w: &Rational) -> Self {
        let one = int(1);
        let mut nodes = Vec::new();
        let lo = c - w;
        let hi = c + w;
        if lo > zero() {
            nodes.push((zero(), zero()));
            nodes.push((lo.clone(), zero()));
        } else {
            nodes.push((zero(), int(1) - c / w));
        }
        nodes.push((c.clone(), one.clone()));
        if hi < one {
            nodes.push((hi.clone(), zero()));
            nodes.push((one, zero()));
        } else if c < &one {
            nodes.push((one.clone(), (&hi - &one) / w));
        }
        nodes.dedup_by(|a, b| a.0 == b.0);
        Observable { nodes }
    }

    pub fn nodes(&self) -> &[(Rational, Rational)] {
        &self.nodes
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let k = self.nodes.partition_point(|(nx, _)| nx < x);
        if k == 0 {
            return self.nodes[0].1.clone();
        }
        if k == self.nodes.len() {
            return self.nodes[k - 1].1.clone();
        }
        let (x0, y0) = &self.nodes[k - 1];
        let (x1, y1) = &self.nodes[k];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Exact `∫₀¹ obs dλ`.
    pub fn integral(&self) -> Rational {
        self.nodes
            .windows(2)
            .map(|w| (&w[1].0 - &w[0].0) * (&w[0].1 + &w[1].1) / int(2))
            .sum()
    }
}

/// Hats at the dyadic points `k/2^d`, `0 ≤ k ≤ 2^d`, for `1 ≤ d ≤ depth`.
pub fn hat_family(depth: u32) -> Vec<Observable> {
    let mut out = Vec::new();
    for d in 1..=depth {
        let den = 1i64 << d;
        let w = r(1, den);
        for k in 0..=den {
            out.push(Observable::hat(&r(k, den), &w));
        }
    }
    out
}

/// `Σ aᵢ(u)·bᵢ(v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairObservable {
    pub terms: Vec<(Observable, Observable)>,
}

impl PairObservable {
    pub fn product(a: Observable, b: Observable) -> Self {
        PairObservable {
            terms: vec![(a, b)],
        }
    }

    pub fn eval(&self, u: &Rational, v: &Rational) -> Rational {
        self.terms.iter().map(|(a, b)| a.eval(u) * b.eval(v)).sum()
    }

    /// Exact `∫∫ obs d(λ×λ)`.
    pub fn baseline(&self) -> Rational {
        self.terms
            .iter()
            .map(|(a, b)| a.integral() * b.integral())
            .sum()
    }
}

/// `(1/N) Σ_{k<N} obs(f^k x)`.
pub fn birkhoff(f: &PwaMap, obs: &Observable, x: &Rational, n: usize) -> Result<Rational> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    let mut y = f.eval(x)?;
    let mut sum = obs.eval(x);
    for _ in 1..n {
        sum += obs.eval(&y);
        y = f.eval_unchecked(&y);
    }
    Ok(sum / int(n as i64))
}

/// `(1/N) Σ_{k<N} obs(f^k x, f^k y)`.
pub fn birkhoff_pair(
    f: &PwaMap,
    obs: &PairObservable,
    x: &Rational,
    y: &Rational,
    n: usize,
) -> Result<Rational> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    f.eval(x)?;
    f.eval(y)?;
    let (mut u, mut v) = (x.clone(), y.clone());
    let mut sum = zero();
    for _ in 0..n {
        sum += obs.eval(&u, &v);
        u = f.eval_unchecked(&u);
        v = f.eval_unchecked(&v);
    }
    Ok(sum / int(n as i64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeoTime {
    At(usize),
    NotWithinCap,
}

impl fmt::Display for LeoTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeoTime::At(n) => write!(f, "{n}"),
            LeoTime::NotWithinCap => write!(f, "not within cap"),
        }
    }
}

/// Least `n ≤ cap` with `fⁿ(J) = [0,1]`.
pub fn leo_time(f: &PwaMap, j: &Interval, cap: usize) -> Result<LeoTime> {
    if j.is_degenerate() {
        return Err(Error::Domain(format!("{j} is degenerate")));
    }
    let unit = Interval::unit();
    let mut cur = j.clone();
    for n in 0..=cap {
        if cur == unit {
            return Ok(LeoTime::At(n));
        }
        if n < cap {
            let next = image_interval(f, &cur)?;
            if next == cur {
                break;
            }
            cur = next;
        }
    }
    Ok(LeoTime::NotWithinCap)
}

/// Rational test windows `[k/2^d, (k+1)/2^d]` for `d ≤ depth`.
pub fn dyadic_windows(depth: u32) -> Vec<Interval> {
    let mut out = Vec::new();
    for d in 1..=depth {
        let den = 1i64 << d;
        for k in 0..den {
            out.push(Interval::new(r(k, den), r(k + 1, den)).unwrap());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::desk;
    use crate::rational::one;
    use num_traits::Zero;

    fn iv(a: i64, b: i64, c: i64, d: i64) -> IntervalSet {
        IntervalSet::single(Interval::new(r(a, b), r(c, d)).unwrap())
    }

    #[test]
    fn tent_correlations_vanish() {
        let h = iv(0, 1, 1, 2);
        let c = correlations(&desk::tent(), &h, &h, 11, DEFAULT_PREIMAGE_CAP).unwrap();
        assert_eq!(c[0], r(1, 4));
        assert!(c[1..].iter().all(Zero::is_zero));
    }

    #[test]
    fn half_swap_alternates() {
        let h = iv(0, 1, 1, 2);
        let f = desk::half_swap();
        assert_eq!(correlation(&f, &h, &h, 1).unwrap(), r(-1, 4));
        assert_eq!(correlation(&f, &h, &h, 2).unwrap(), r(1, 4));
    }

    #[test]
    fn full_space_is_uncorrelated() {
        let b = iv(1, 3, 3, 4);
        for n in 0..5 {
            assert!(
                correlation(&desk::fig5_full_laps(), &IntervalSet::unit(), &b, n)
                    .unwrap()
                    .is_zero()
            );
        }
    }

    #[test]
    fn tent_scores() {
        let h = iv(0, 1, 1, 2);
        let s = mixing_scores(&desk::tent(), &h, &h, 10).unwrap();
        assert_eq!(s.ergodic_score, 1.0 / 40.0);
        assert_eq!(s.weak_score, 1.0 / 40.0);
    }

    #[test]
    fn identity_never_mixes() {
        let s = mixing_scores(&PwaMap::identity(), &iv(0, 1, 1, 2), &iv(1, 2, 1, 1), 6).unwrap();
        assert!(s.strong_tail.iter().all(|&t| t == 0.25));
    }

    #[test]
    fn preimage_cap_is_loud() {
        let h = iv(0, 1, 1, 3);
        let e = correlation_with_cap(&desk::tent(), &h, &h, 12, 1000).unwrap_err();
        assert!(matches!(e, Error::Size { .. }));
    }

    #[test]
    fn birkhoff_values() {
        let t = desk::tent();
        let id = Observable::identity();
        assert_eq!(birkhoff(&t, &id, &r(2, 3), 7).unwrap(), r(2, 3));
        assert_eq!(birkhoff(&t, &id, &r(1, 3), 3).unwrap(), r(5, 9));
        let obs = Observable::hat(&r(1, 4), &r(1, 4));
        assert_eq!(
            birkhoff(&PwaMap::identity(), &obs, &r(1, 8), 5).unwrap(),
            r(1, 2)
        );
    }

    #[test]
    fn pair_averages() {
        let t = desk::tent();
        let uv = PairObservable::product(Observable::identity(), Observable::identity());
        assert_eq!(
            birkhoff_pair(&t, &uv, &r(2, 3), &r(2, 3), 9).unwrap(),
            r(4, 9)
        );
        assert_eq!(uv.baseline(), r(1, 4));
    }

    #[test]
    fn hats_integrate() {
        assert_eq!(Observable::hat(&r(1, 2), &r(1, 4)).integral(), r(1, 4));
        assert_eq!(Observable::hat(&zero(), &r(1, 2)).integral(), r(1, 4));
        assert_eq!(Observable::hat(&one(), &r(1, 2)).eval(&one()), one());
        assert_eq!(hat_family(2).len(), 3 + 5);
    }

    #[test]
    fn leo_times() {
        let t = desk::tent();
        let j = Interval::new(zero(), r(1, 8)).unwrap();
        assert_eq!(leo_time(&t, &j, 64).unwrap(), LeoTime::At(3));
        assert_eq!(leo_time(&t, &Interval::unit(), 64).unwrap(), LeoTime::At(0));
        assert_eq!(
            leo_time(&desk::double_tent(), &j, 64).unwrap(),
            LeoTime::NotWithinCap
        );
    }

    #[test]
    fn csv_rows() {
        let h = iv(0, 1, 1, 2);
        let rows = corr_csv_rows("tent", &h, &h, &[r(1, 4), zero()]);
        assert_eq!(
            rows,
            "tent,0/1:1/2,0/1:1/2,0,1/4,0.250000000000\ntent,0/1:1/2,0/1:1/2,1,0/1,0\n"
        );
    }
}
