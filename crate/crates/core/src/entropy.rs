//! Metric entropy by the Rohlin formula, two-slope maps of prescribed entropy,
//! and constructions that move entropy to a target.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::map::{critical_values, uniform_distance, verify_lebesgue, PwaMap};
use crate::markov::{markov_partition, refine};
use crate::orbit::OrbitCaps;
use crate::perturb::{
    markovize_any, oscillation, regular_window, window_with, MarkovizeEffort, Markovized,
    WindowMap, WindowSpec,
};
use crate::rational::{fmt_f64, fmt_rational, int, ln_abs, one, r, to_f64, zero, Rational};

/// `Σ weight · log(slope)` together with its exact terms.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyValue {
    /// `(branch length, |slope|)` per maximal affine branch.
    pub terms: Vec<(Rational, Rational)>,
    pub value: f64,
}

impl EntropyValue {
    /// Distinct slope magnitudes, increasing.
    pub fn slope_set(&self) -> Vec<Rational> {
        let mut s: Vec<Rational> = self.terms.iter().map(|(_, m)| m.clone()).collect();
        s.sort();
        s.dedup();
        s
    }

    /// `map-id,value-nats,term count,slope set` with slopes joined by `;`.
    pub fn csv_row(&self, id: &str) -> String {
        let slopes: Vec<String> = self.slope_set().iter().map(fmt_rational).collect();
        format!(
            "{},{},{},{}",
            id,
            fmt_f64(self.value),
            self.terms.len(),
            slopes.join(";")
        )
    }
}

pub const CSV_HEADER: &str = "map_id,value_nats,terms,slopes";

/// Sums `weight · ln(slope)` after adding up the exact weights per slope.
fn value_of(terms: &[(Rational, Rational)]) -> f64 {
    let mut by_slope: BTreeMap<&Rational, Rational> = BTreeMap::new();
    for (w, s) in terms {
        *by_slope.entry(s).or_insert_with(Rational::zero) += w;
    }
    by_slope
        .into_iter()
        .map(|(s, w)| to_f64(&w) * ln_abs(s))
        .sum()
}

/// Rohlin formula `h = ∫ log|f'| dλ`.
pub fn rohlin_entropy(f: &PwaMap) -> Result<EntropyValue> {
    let mut terms = Vec::new();
    for b in f.branches() {
        if b.slope.is_zero() {
            return Err(Error::NotPreserving(format!(
                "constant piece on {}",
                b.domain
            )));
        }
        terms.push((b.domain.len(), b.slope.abs()));
    }
    let value = value_of(&terms);
    Ok(EntropyValue { terms, value })
}

fn check_eta(eta: &Rational) -> Result<()> {
    if !eta.is_positive() || eta >= &one() {
        return Err(Error::Domain(format!(
            "eta = {} must lie in (0,1)",
            fmt_rational(eta)
        )));
    }
    Ok(())
}

fn e27(eta: &Rational, m: usize) -> f64 {
    let e = to_f64(eta);
    let a = one() - eta;
    let mut v = -(1.0 - e) * ln_abs(&a);
    if m > 1 {
        v += e * (ln_abs(&int(m as i64 - 1)) - ln_abs(eta));
    }
    v
}

/// `(1-η) log(1/(1-η)) + η log((m-1)/η)`.
pub fn two_slope_entropy(eta: &Rational, m: usize) -> Result<f64> {
    check_eta(eta)?;
    if m < 2 {
        return Err(Error::Domain("m must be at least 2".into()));
    }
    Ok(e27(eta, m))
}

/// Smallest `η` with `two_slope_entropy(η, m)` within 1e-10 of `c`. The
/// function rises from 0 to its maximum `log m` at `η = (m-1)/m`, so the
/// smallest root is the one on that rising stretch.
pub fn solve_eta(c: f64, m: usize) -> Result<Rational> {
    if m < 2 {
        return Err(Error::Domain("m must be at least 2".into()));
    }
    let top = (m as f64).ln();
    if !(c > 0.0 && c <= top) || !c.is_finite() {
        return Err(Error::Range(format!(
            "target {c} outside (0, log {m}] = (0, {top}]"
        )));
    }
    let peak = r(m as i64 - 1, m as i64);
    bisect_increasing(|eta| e27(eta, m), c, zero(), peak)
}

/// Rational bisection for an increasing function on `(lo, hi]` with
/// `g(lo⁺) <= c <= g(hi)`.
fn bisect_increasing<G: Fn(&Rational) -> f64>(
    g: G,
    c: f64,
    mut lo: Rational,
    mut hi: Rational,
) -> Result<Rational> {
    if (g(&hi) - c).abs() <= 1e-12 {
        return Ok(hi);
    }
    let two = int(2);
    let mut best = hi.clone();
    let mut best_err = (g(&hi) - c).abs();
    for _ in 0..200 {
        let mid = (&lo + &hi) / &two;
        let v = g(&mid);
        let err = (v - c).abs();
        if err < best_err {
            best_err = err;
            best = mid.clone();
        }
        if err <= 1e-11 {
            return Ok(mid);
        }
        if v < c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best_err <= 1e-9 {
        Ok(best)
    } else {
        Err(Error::Range(format!(
            "bisection stalled {best_err} away from {c}"
        )))
    }
}

fn lcm_denominators<'a, I: IntoIterator<Item = &'a Rational>>(xs: I) -> BigInt {
    xs.into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// One monotone piece of `f` over one range slab.
struct Piece {
    slab: usize,
    len: Rational,
    increasing: bool,
}

/// Per-slab data: the preimage pieces in `x` order and the slab itself.
struct Slab {
    lo: Rational,
    width: Rational,
    pieces: Vec<usize>,
}

fn slab_decomposition(f: &PwaMap) -> (Vec<Piece>, Vec<Slab>) {
    let simple = f.simplified();
    let cuts = critical_values(simple.nodes().iter().map(|(_, y)| y));
    let mut slabs: Vec<Slab> = cuts
        .windows(2)
        .map(|w| Slab {
            lo: w[0].clone(),
            width: &w[1] - &w[0],
            pieces: Vec::new(),
        })
        .collect();
    let mut pieces = Vec::new();
    for seg in simple.segments() {
        let (lo, hi) = seg.y_range();
        let a = cuts.binary_search(lo).expect("node value is a cut");
        let b = cuts.binary_search(hi).expect("node value is a cut");
        let inv = (seg.x1 - seg.x0) / (hi - lo);
        let increasing = seg.y1 > seg.y0;
        let order: Vec<usize> = if increasing {
            (a..b).collect()
        } else {
            (a..b).rev().collect()
        };
        for j in order {
            slabs[j].pieces.push(pieces.len());
            pieces.push(Piece {
                slab: j,
                len: &inv * &slabs[j].width,
                increasing,
            });
        }
    }
    (pieces, slabs)
}

/// Number of preimage pieces over each slab, with slab widths.
pub fn slab_multiplicities(f: &PwaMap) -> Vec<(Rational, usize)> {
    let (_, slabs) = slab_decomposition(f);
    slabs
        .into_iter()
        .map(|s| (s.width, s.pieces.len()))
        .collect()
}

/// Closed-form entropy of [`build_two_slope`]`(f, η, M)`: each slab of
/// width `Y_j` covered `m_j` times contributes `Y_j · e(η, m_j)`.
pub fn two_slope_prediction(f: &PwaMap, eta: &Rational) -> Result<f64> {
    check_eta(eta)?;
    Ok(slab_multiplicities(f)
        .iter()
        .map(|(w, m)| to_f64(w) * e27(eta, *m))
        .sum())
}

/// Least `M` accepted by [`build_two_slope`] for `f`.
pub fn two_slope_base(f: &PwaMap) -> BigInt {
    let (pieces, slabs) = slab_decomposition(f);
    let mut q = BigInt::one();
    for s in &slabs {
        let normalized: Vec<Rational> = s
            .pieces
            .iter()
            .map(|&i| &pieces[i].len / &s.width)
            .collect();
        q = q.lcm(&lcm_denominators(&normalized));
    }
    q
}

/// The two-slope approximation `H[η, M]` of an expanding measure-preserving
/// map, built slab by slab from compressed copies of the increasing maps
/// `h_i` with slopes `1/(1-η)` and `(m_j-1)/η`.
pub fn build_two_slope(f: &PwaMap, eta: &Rational, big_m: &BigInt) -> Result<PwaMap> {
    check_eta(eta)?;
    let lr = verify_lebesgue(f);
    if !lr.preserving {
        return Err(Error::NotPreserving(format!("{:?}", lr.witness)));
    }
    if !big_m.is_positive() {
        return Err(Error::Domain("M must be positive".into()));
    }
    let (pieces, slabs) = slab_decomposition(f);
    let mm = Rational::from_integer(big_m.clone());
    let s = (one() - eta) / &mm;

    // per slab: (q, r, p_i, cumulative p before i, gamma_i, beta_i) in piece order
    struct Lap {
        q: BigInt,
        r: Rational,
        p: BigInt,
        qi: BigInt,
        gamma: Rational,
        beta: Rational,
        periods: usize,
    }
    let mut laps: Vec<Option<Lap>> = (0..pieces.len()).map(|_| None).collect();
    for (j, slab) in slabs.iter().enumerate() {
        let m = slab.pieces.len();
        if m < 2 {
            return Err(Error::Construction(format!(
                "values in ({}, {}) have a single preimage; slope (m-1)/eta degenerates",
                fmt_rational(&slab.lo),
                fmt_rational(&(&slab.lo + &slab.width))
            )));
        }
        let normalized: Vec<Rational> = slab
            .pieces
            .iter()
            .map(|&i| &pieces[i].len / &slab.width)
            .collect();
        let q = lcm_denominators(&normalized);
        if !(big_m % &q).is_zero() {
            return Err(Error::Divisibility(format!(
                "M = {big_m} is not divisible by {q} (slab {j})"
            )));
        }
        let periods = (big_m / &q).to_usize().ok_or_else(|| Error::Size {
            what: "two-slope periods",
            needed: usize::MAX,
            cap: crate::map::node_cap(),
        })?;
        let needed = periods.saturating_mul(3 * m);
        if needed > crate::map::node_cap() {
            return Err(Error::Size {
                what: "two-slope nodes",
                needed,
                cap: crate::map::node_cap(),
            });
        }
        let r = eta / (&mm * int(m as i64 - 1));
        let qr = Rational::from_integer(q.clone());
        let mut cum = BigInt::zero();
        for (&i, a) in slab.pieces.iter().zip(&normalized) {
            let p = (a * &qr).to_integer();
            let pr = Rational::from_integer(p.clone());
            let gamma = &pr * &s + (&qr - &pr) * &r;
            let beta = &mm / &qr * &gamma;
            laps[i] = Some(Lap {
                q: q.clone(),
                r: r.clone(),
                p: p.clone(),
                qi: cum.clone(),
                gamma,
                beta,
                periods,
            });
            cum += p;
        }
    }

    let mut nodes: Vec<(Rational, Rational)> = Vec::new();
    let mut x0 = zero();
    for (piece, lap) in pieces.iter().zip(laps) {
        let lap = lap.expect("every piece belongs to a slab");
        let slab = &slabs[piece.slab];
        let y0 = &slab.lo;
        let w = &slab.width;
        // normalized increasing nodes (u, v) on [0, beta] x [0, 1]
        let q = Rational::from_integer(lap.q.clone());
        let qi = Rational::from_integer(lap.qi.clone());
        let p = Rational::from_integer(lap.p.clone());
        let mut local: Vec<(Rational, Rational)> = Vec::with_capacity(3 * lap.periods + 1);
        for l in 0..lap.periods {
            let lr = int(l as i64);
            let u0 = &lr * &lap.gamma;
            let v0 = &lr * &q;
            let u1 = &u0 + &qi * &lap.r;
            let u2 = &u1 + &p * &s;
            local.push((u0, v0.clone() / &mm));
            local.push((u1, (&v0 + &qi) / &mm));
            local.push((u2, (&v0 + &qi + &p) / &mm));
        }
        local.push((lap.beta.clone(), one()));
        local.dedup_by(|b, a| a.0 == b.0);
        let place = |(u, v): (Rational, Rational)| -> (Rational, Rational) {
            let x = if piece.increasing {
                &x0 + w * &u
            } else {
                &x0 + w * (&lap.beta - &u)
            };
            (x, y0 + w * v)
        };
        let mapped: Vec<(Rational, Rational)> = if piece.increasing {
            local.into_iter().map(place).collect()
        } else {
            local.into_iter().rev().map(place).collect()
        };
        for node in mapped {
            if nodes.last().map(|(x, _)| x == &node.0) != Some(true) {
                nodes.push(node);
            }
        }
        x0 += w * &lap.beta;
    }
    let h = PwaMap::new_simplified(nodes)?;
    let check = verify_lebesgue(&h);
    if !check.preserving {
        return Err(Error::Construction(format!(
            "assembled map is not measure-preserving: {:?}",
            check.witness
        )));
    }
    Ok(h)
}

/// Parameters of the two-slope map used to bring the entropy down.
#[derive(Debug, Clone, PartialEq)]
pub struct Lowering {
    pub eta: Rational,
    pub big_m: BigInt,
    /// Entropy after the Markov pinning, before the final window.
    pub value: f64,
}

/// The final tuned window: lap widths `L(1-(m-1)τ)` then `m-1` laps of `Lτ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tuning {
    pub window: Interval,
    pub fold: usize,
    pub tau: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropySetting {
    pub map: PwaMap,
    pub value: f64,
    pub lowered: Option<Lowering>,
    pub tuning: Option<Tuning>,
}

const SET_TOLERANCE: f64 = 1e-9;

/// A map within `eps` of `f` whose Rohlin entropy is `c` to within 1e-9.
///
/// The entropy is first pushed below `c` with a two-slope map made Markov,
/// unless `f` is already expanding Markov with entropy below `c`. One window
/// on a cell of a refined Markov partition then raises it, with a single lap
/// width tuned by bisection.
pub fn set_entropy(f: &PwaMap, c: f64, eps: &Rational) -> Result<EntropySetting> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Range(format!("target entropy {c} must be positive")));
    }
    if !eps.is_positive() {
        return Err(Error::Domain("eps must be positive".into()));
    }
    let h0 = rohlin_entropy(f)?.value;
    let caps = OrbitCaps::default();
    let is_markov = markov_partition(f, caps)?.system().is_some();
    if is_markov && (h0 - c).abs() <= SET_TOLERANCE {
        return Ok(EntropySetting {
            map: f.clone(),
            value: h0,
            lowered: None,
            tuning: None,
        });
    }
    let (base, budget, lowered) = if c > h0 && is_markov && f.is_expanding() {
        (f.clone(), eps.clone(), None)
    } else {
        let (h, low) = lower_entropy(f, c, eps)?;
        (h, eps / int(4), Some(low))
    };
    let (map, value, tuning) = raise_entropy(&base, c, &budget)?;
    if &uniform_distance(f, &map) >= eps {
        return Err(Error::Budget(format!(
            "result lies {} from the input, budget {}",
            fmt_rational(&uniform_distance(f, &map)),
            fmt_rational(eps)
        )));
    }
    if markov_partition(&map, caps)?.system().is_none() {
        return Err(Error::Budget(
            "tuned map is not Markov within the orbit caps".into(),
        ));
    }
    Ok(EntropySetting {
        map,
        value,
        lowered,
        tuning,
    })
}

fn lower_entropy(f: &PwaMap, c: f64, eps: &Rational) -> Result<(PwaMap, Lowering)> {
    if !f.is_expanding() {
        return Err(Error::ExpandingRequired(
            "lowering needs slopes above 1".into(),
        ));
    }
    let mult = slab_multiplicities(f);
    let Some(min_m) = mult.iter().map(|(_, m)| *m).min() else {
        return Err(Error::Construction("no slabs".into()));
    };
    if min_m < 2 {
        return Err(Error::Construction(
            "some values have a single preimage".into(),
        ));
    }
    let predict =
        |eta: &Rational| -> f64 { mult.iter().map(|(w, m)| to_f64(w) * e27(eta, *m)).sum() };
    let c_low = c - (c / 4.0).min(0.05);
    let eta_max = r(min_m as i64 - 1, min_m as i64);
    let eta0 = if predict(&eta_max) <= c_low {
        eta_max
    } else {
        bisect_increasing(predict, c_low, zero(), eta_max)?
    };
    // 1/N just below keeps the slopes, and every orbit, short in bits
    let mut eta = one() / (one() / eta0).ceil();
    let half_eps = eps / int(2);
    let base = two_slope_base(f);
    let pieces: usize = mult.iter().map(|(_, m)| *m).sum();
    for _ in 0..40 {
        let mut k = 0;
        loop {
            let big_m: BigInt = &base << k;
            let est = big_m
                .to_usize()
                .map(|m| m.saturating_mul(3 * pieces))
                .unwrap_or(usize::MAX);
            if est > crate::map::node_cap() {
                break;
            }
            let h = build_two_slope(f, &eta, &big_m)?;
            if uniform_distance(f, &h) < half_eps {
                return pin_below(&h, c, eps / int(4))
                    .map(|(map, value)| (map, Lowering { eta, big_m, value }));
            }
            k += 1;
        }
        eta /= int(2);
    }
    Err(Error::Budget(
        "no two-slope map within eps/2 under the node cap".into(),
    ))
}

/// Makes `h` Markov with folds that add less than half the room left
/// below `c`.
fn pin_below(h: &PwaMap, c: f64, budget: Rational) -> Result<(PwaMap, f64)> {
    let room = (c - rohlin_entropy(h)?.value) / 2.0;
    match markovize_any(h, &budget, MarkovizeEffort::default(), false, Some(room))? {
        Markovized::Achieved { map, .. } => {
            let value = rohlin_entropy(&map)?.value;
            if value < c - SET_TOLERANCE {
                Ok((map, value))
            } else {
                Err(Error::Budget(format!(
                    "pinning windows raise the entropy to {value}, above the target"
                )))
            }
        }
        Markovized::NotAchieved(na) => Err(Error::Budget(na.to_string())),
    }
}

/// Window on `cell` with one wide upright lap followed by `m-1` narrow laps
/// of width `Lτ`, alternating orientation. Every lap boundary maps to an
/// endpoint value, so a Markov partition containing the cell survives.
fn tuned_window(f: &PwaMap, cell: &Interval, m: usize, tau: &Rational) -> Result<PwaMap> {
    let len = cell.len();
    let narrow = &len * tau;
    let fc = f.eval_unchecked(&cell.lo);
    let fd = f.eval_unchecked(&cell.hi);
    let mut x = &cell.lo + &len - &narrow * int(m as i64 - 1);
    let mut nodes = vec![(cell.lo.clone(), fc.clone()), (x.clone(), fd.clone())];
    for j in 1..m - 1 {
        x += &narrow;
        let y = if j % 2 == 1 { fc.clone() } else { fd.clone() };
        nodes.push((x.clone(), y));
    }
    nodes.push((cell.hi.clone(), fd));
    window_with(f, &WindowMap::new(nodes)?)
}

fn raise_entropy(
    base: &PwaMap,
    c: f64,
    budget: &Rational,
) -> Result<(PwaMap, f64, Option<Tuning>)> {
    let h = rohlin_entropy(base)?.value;
    let gap = c - h;
    if gap.abs() <= SET_TOLERANCE {
        return Ok((base.clone(), h, None));
    }
    if gap < 0.0 {
        return Err(Error::Construction(format!(
            "lowered entropy {h} still above target {c}"
        )));
    }
    let ms = markov_partition(base, OrbitCaps::default())?
        .system()
        .ok_or_else(|| Error::Budget("base map is not Markov".into()))?;
    let mut cell = None;
    for depth in 0..=16 {
        let p = refine(base, &ms, depth);
        cell = p
            .cells()
            .into_iter()
            .filter(|iv| base.is_affine_on(iv) && &oscillation(base, iv) < budget)
            .fold(None, |best: Option<Interval>, iv| match best {
                Some(b) if b.len() >= iv.len() => Some(b),
                _ => Some(iv),
            });
        if cell.is_some() || p.n() > 200_000 {
            break;
        }
    }
    let cell = cell.ok_or_else(|| {
        Error::Budget(format!(
            "no Markov cell with oscillation below {}",
            fmt_rational(budget)
        ))
    })?;
    let lf = to_f64(&cell.len());
    let mut m = 3usize;
    while lf * (m as f64).ln() <= gap {
        m += 2;
        if m > crate::map::node_cap() {
            return Err(Error::Size {
                what: "window laps",
                needed: m,
                cap: crate::map::node_cap(),
            });
        }
    }
    let value_at = |tau: &Rational| -> f64 {
        tuned_window(base, &cell, m, tau)
            .and_then(|g| rohlin_entropy(&g))
            .map(|e| e.value)
            .unwrap_or(f64::NAN)
    };
    let tau = bisect_increasing(value_at, c, zero(), r(1, m as i64))?;
    let map = tuned_window(base, &cell, m, &tau)?;
    let value = rohlin_entropy(&map)?.value;
    Ok((
        map,
        value,
        Some(Tuning {
            window: cell,
            fold: m,
            tau,
        }),
    ))
}

/// One stage of an entropy tower.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub window: Interval,
    /// Fold added at this stage.
    pub fold: usize,
    /// Product of the folds so far; the stage map is one window of this fold.
    pub total_fold: usize,
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyTower {
    pub stages: Vec<Stage>,
    pub map: PwaMap,
}

impl EntropyTower {
    /// Each window contains the next.
    pub fn is_nested(&self) -> bool {
        self.stages
            .windows(2)
            .all(|w| w[0].window.contains_interval(&w[1].window))
    }
}

/// Longest window found whose oscillation stays below `target`: grown
/// symmetrically around every node and every branch midpoint.
pub fn low_oscillation_window(f: &PwaMap, target: &Rational) -> Option<Interval> {
    let mut centers: Vec<Rational> = f.nodes().iter().map(|(x, _)| x.clone()).collect();
    centers.extend(f.branches().iter().map(|b| b.domain.midpoint()));
    let clip = |x: &Rational, w: &Rational| {
        Interval::raw(
            crate::rational::max_r(&(x - w), &zero()).clone(),
            crate::rational::min_r(&(x + w), &one()).clone(),
        )
    };
    let mut best: Option<Interval> = None;
    for x in centers {
        let mut lo = zero();
        let mut hi = one();
        for _ in 0..40 {
            let mid = (&lo + &hi) / int(2);
            if &oscillation(f, &clip(&x, &mid)) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if lo.is_zero() {
            continue;
        }
        let w = clip(&x, &lo);
        if best.as_ref().is_none_or(|b| w.len() > b.len()) {
            best = Some(w);
        }
    }
    best
}

/// `n` stages of window folding on one window of oscillation below `eps`,
/// stage `k` having Rohlin entropy above `k`.
pub fn entropy_stage(f: &PwaMap, n: usize, eps: &Rational) -> Result<EntropyTower> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if !eps.is_positive() {
        return Err(Error::Domain("eps must be positive".into()));
    }
    let h0 = rohlin_entropy(f)?.value;
    let target = eps * r(63, 64);
    let window = low_oscillation_window(f, &target)
        .ok_or_else(|| Error::Budget("no window of small oscillation".into()))?;
    let len = to_f64(&window.len());
    let inside = f
        .nodes()
        .iter()
        .filter(|(x, _)| window.contains_interior(x))
        .count()
        + 1;
    let mut total = 1usize;
    let mut stages = Vec::with_capacity(n);
    let mut map = f.clone();
    for k in 1..=n {
        let mut fold = 1usize;
        while h0 + len * ((total * fold) as f64).ln() <= k as f64 {
            fold += 2;
            if fold == 1 {
                fold = 3;
            }
        }
        let next = total.saturating_mul(fold);
        let needed = next.saturating_mul(inside);
        if needed > crate::map::node_cap() {
            return Err(Error::Size {
                what: "tower nodes",
                needed,
                cap: crate::map::node_cap(),
            });
        }
        total = next;
        map = regular_window(f, &WindowSpec::regular(window.clone(), total))?;
        let entropy = rohlin_entropy(&map)?.value;
        stages.push(Stage {
            window: window.clone(),
            fold,
            total_fold: total,
            entropy,
        });
    }
    Ok(EntropyTower { stages, map })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::desk;

    #[test]
    fn rohlin_closed_forms() {
        let t = rohlin_entropy(&desk::tent()).unwrap();
        assert_eq!(t.terms, vec![(r(1, 2), r(2, 1)), (r(1, 2), r(2, 1))]);
        assert!((t.value - 2f64.ln()).abs() < 1e-15);
        let f = rohlin_entropy(&desk::fig5_full_laps()).unwrap();
        let expect = 0.3 * (10.0f64 / 3.0).ln() + 0.5 * 2f64.ln() + 0.2 * 5f64.ln();
        assert!((f.value - expect).abs() < 1e-12);
        assert_eq!(rohlin_entropy(&PwaMap::identity()).unwrap().value, 0.0);
        let z = rohlin_entropy(
            &crate::map::from_full_laps(crate::map::LapSign::Down, &[r(1, 3), r(1, 3), r(1, 3)])
                .unwrap(),
        )
        .unwrap();
        assert!((z.value - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn two_slope_closed_form() {
        let v = two_slope_entropy(&r(3, 20), 3).unwrap();
        let expect = 0.85 * (20.0f64 / 17.0).ln() + 0.15 * (40.0f64 / 3.0).ln();
        assert!((v - expect).abs() < 1e-15);
        assert!((v - 0.5267).abs() < 1e-4);
        assert!(two_slope_entropy(&r(1, 1_000_000), 3).unwrap() < 1e-4);
        let b = two_slope_entropy(&r(1, 4), 2).unwrap();
        assert!((b - (0.75 * (4.0f64 / 3.0).ln() + 0.25 * 4f64.ln())).abs() < 1e-15);
        assert!(two_slope_entropy(&r(0, 1), 3).is_err());
    }

    #[test]
    fn eta_solver() {
        let eta = solve_eta(0.5, 3).unwrap();
        assert!((two_slope_entropy(&eta, 3).unwrap() - 0.5).abs() <= 1e-9);
        assert!((to_f64(&eta) - 0.1395).abs() < 1e-3);
        let c = two_slope_entropy(&r(3, 20), 3).unwrap();
        let back = solve_eta(c, 3).unwrap();
        assert!((to_f64(&back) - 0.15).abs() < 1e-8);
        let hi = 2f64.ln() + 0.01;
        let e = solve_eta(hi, 3).unwrap();
        assert!((two_slope_entropy(&e, 3).unwrap() - hi).abs() <= 1e-9);
        assert!(matches!(
            solve_eta(3f64.ln() + 0.01, 3),
            Err(Error::Range(_))
        ));
        assert!(matches!(solve_eta(0.0, 3), Err(Error::Range(_))));
    }

    #[test]
    fn fig5_two_slope_map() {
        let f = desk::fig5_full_laps();
        let h = build_two_slope(&f, &r(3, 20), &BigInt::from(20)).unwrap();
        assert!(verify_lebesgue(&h).preserving);
        let e = rohlin_entropy(&h).unwrap();
        assert_eq!(e.slope_set(), vec![r(20, 17), r(40, 3)]);
        let expect = two_slope_entropy(&r(3, 20), 3).unwrap();
        assert!((e.value - expect).abs() < 1e-12);
        assert_eq!(two_slope_base(&f), BigInt::from(10));
    }

    #[test]
    fn tent_two_slope_map() {
        let t = desk::tent();
        let h = build_two_slope(&t, &r(1, 4), &BigInt::from(2)).unwrap();
        let e = rohlin_entropy(&h).unwrap();
        assert_eq!(e.slope_set(), vec![r(4, 3), r(4, 1)]);
        let expect = 0.75 * (4.0f64 / 3.0).ln() + 0.25 * 4f64.ln();
        assert!((e.value - expect).abs() < 1e-12);
    }

    #[test]
    fn two_slope_errors() {
        let f = desk::fig5_full_laps();
        assert!(matches!(
            build_two_slope(&f, &r(3, 20), &BigInt::from(15)),
            Err(Error::Divisibility(_))
        ));
        assert!(matches!(
            build_two_slope(&PwaMap::identity(), &r(1, 4), &BigInt::from(4)),
            Err(Error::Construction(_))
        ));
    }

    #[test]
    fn two_slope_on_non_full_lap_map() {
        let k = desk::kinked_tent();
        let base = two_slope_base(&k);
        let h = build_two_slope(&k, &r(1, 10), &base).unwrap();
        assert!(verify_lebesgue(&h).preserving);
        let predicted = two_slope_prediction(&k, &r(1, 10)).unwrap();
        assert!((rohlin_entropy(&h).unwrap().value - predicted).abs() < 1e-12);
    }

    #[test]
    fn csv_row_format() {
        let t = rohlin_entropy(&desk::tent()).unwrap();
        assert_eq!(t.csv_row("tent"), "tent,0.693147180560,2,2/1");
    }

    #[test]
    fn tent_raised_to_one_nat() {
        let t = desk::tent();
        let eps = r(1, 4);
        let out = set_entropy(&t, 1.0, &eps).unwrap();
        assert!(out.lowered.is_none());
        let tuning = out.tuning.as_ref().unwrap();
        assert_eq!(tuning.fold % 2, 1);
        let v = rohlin_entropy(&out.map).unwrap().value;
        assert!((v - 1.0).abs() <= 1e-9, "{v}");
        assert!(uniform_distance(&t, &out.map) < eps);
        assert!(verify_lebesgue(&out.map).preserving);
        assert!(out.map.is_expanding());
    }

    #[test]
    fn tent_at_its_own_entropy_is_unchanged() {
        let t = desk::tent();
        let out = set_entropy(&t, 2f64.ln(), &r(1, 100)).unwrap();
        assert_eq!(out.map, t);
    }

    #[test]
    fn tent_lowered_then_raised() {
        let t = desk::tent();
        let eps = r(1, 4);
        let out = set_entropy(&t, 0.5, &eps).unwrap();
        let low = out.lowered.as_ref().unwrap();
        assert!(low.value < 0.5);
        let v = rohlin_entropy(&out.map).unwrap().value;
        assert!((v - 0.5).abs() <= 1e-9, "{v}");
        assert!(uniform_distance(&t, &out.map) < eps);
        assert!(markov_partition(&out.map, OrbitCaps::default())
            .unwrap()
            .system()
            .is_some());
    }

    #[test]
    fn identity_cannot_be_lowered() {
        assert!(matches!(
            set_entropy(&PwaMap::identity(), 0.5, &r(1, 4)),
            Err(Error::ExpandingRequired(_))
        ));
    }

    #[test]
    fn tent_tower() {
        let t = desk::tent();
        let tower = entropy_stage(&t, 2, &r(1, 4)).unwrap();
        assert_eq!(tower.stages.len(), 2);
        assert!(tower.is_nested());
        assert!(tower.stages[0].entropy > 1.0);
        assert!(tower.stages[1].entropy > 2.0);
        assert_eq!(tower.stages[0].fold, 5);
        assert!(uniform_distance(&t, &tower.map) < r(1, 4));
        let w = &tower.stages[0].window;
        assert!(w.contains(&r(1, 2)));
        assert!((to_f64(&w.len()) - 63.0 / 256.0).abs() < 1e-6);
    }

    // The pins that make the lowered map Markov currently cost more entropy
    // than the slack between the lowered value and the target.
    #[test]
    #[ignore = "markovizing the lowered map exceeds the partition budget"]
    fn full_lap_maps_lowered_to_small_entropy() {
        for f in [desk::fig5_full_laps(), desk::zigzag3()] {
            let eps = r(1, 10);
            let out = set_entropy(&f, 0.05, &eps).unwrap();
            let v = rohlin_entropy(&out.map).unwrap().value;
            assert!((v - 0.05).abs() <= 1e-9, "{v}");
            assert!(uniform_distance(&f, &out.map) < eps);
            assert!(out.lowered.is_some());
        }
    }
}
