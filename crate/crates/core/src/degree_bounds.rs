//! Degree bounds for vertices and Steiner points of SMTs in `l_p^d`.
//!
//! Upper bounds come from three arguments:
//!
//! * `smooth`: at most `d + 1` collapsing unit vectors in any strictly convex
//!   `d`-dimensional space;
//! * `rankin`: for `p >= 2`, twisting `l_q` unit vectors into euclidean ones
//!   forces pairwise inner products `<= 2^(1-q) - 1`, and at most `n` euclidean
//!   unit vectors can have pairwise inner products `< -1/n`;
//! * `khinchin`: averaging `||sum e_i x_i||_q^q` over all sign patterns.
//!
//! Lower bounds come from explicit collapsing families.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::certificates::{UnitFamily, DEFAULT_MAX_SUBSETS};
use crate::error::{Error, Result};
use crate::lp_geometry::{conjugate, norm_slice, DualVector, Point};
use crate::roots::bisect;

/// Bisection tolerance for every threshold in this module.
pub const ROOT_TOLERANCE: f64 = 1e-10;

/// Minimizer of the gamma function on the positive axis.
const GAMMA_ARGMIN: f64 = 1.461_632_144_968_362_3;

/// Slack used when a computed real must be compared to an integer boundary.
const INTEGER_SLACK: f64 = 1e-12;

/// Best constants `A_q <= 1 <= B_q` in Khinchin's inequality
/// `A_q ||a||_2 <= (E |sum e_i a_i|^q)^(1/q) <= B_q ||a||_2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KhinchinConstants {
    pub q: f64,
    pub a: f64,
    pub b: f64,
}

/// `sqrt(2) (Gamma((q+1)/2) / sqrt(pi))^(1/q)`, the `q`-th absolute moment of a
/// standard gaussian raised to `1/q`.
fn gaussian_moment_root(q: f64) -> f64 {
    let pi = std::f64::consts::PI;
    2f64.sqrt() * (gamma(0.5 * (q + 1.0)) / pi.sqrt()).powf(1.0 / q)
}

pub fn khinchin_constants(q: f64) -> Result<KhinchinConstants> {
    if !(q.is_finite() && q >= 1.0) {
        return Err(Error::invalid(format!(
            "Khinchin constants need q >= 1, got {q}"
        )));
    }
    let (a, b) = if q >= 2.0 {
        (1.0, gaussian_moment_root(q))
    } else if q < compute_q0() {
        (2f64.powf(0.5 - 1.0 / q), 1.0)
    } else {
        (gaussian_moment_root(q), 1.0)
    };
    Ok(KhinchinConstants { q, a, b })
}

/// The point `q0` in `(1, 2)` where the two candidate lower constants
/// `2^(1/2 - 1/q)` and the gaussian moment meet, i.e. the root of
/// `Gamma((q+1)/2) = sqrt(pi)/2`.
///
/// `q = 2` solves the same equation; the bracket stops at the minimum of
/// gamma, `q = 2 * 1.4616... - 1`, so that only the interior root is seen.
pub fn compute_q0() -> f64 {
    let target = std::f64::consts::PI.sqrt() / 2.0;
    let f = |q: f64| gamma(0.5 * (q + 1.0)) - target;
    bisect(f, 1.0, 2.0 * GAMMA_ARGMIN - 1.0, ROOT_TOLERANCE)
        .expect("gamma changes sign on the q0 bracket")
}

/// Maps a unit vector of `l_q` to a unit vector of `l_2` by `x_n -> |x_n|^(q/2) sgn(x_n)`.
pub fn twist(x: &DualVector) -> Result<Point> {
    let q = x.exponent().q();
    let n = x.norm();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "twist needs a unit vector, got norm {n}"
        )));
    }
    let coords = x
        .coords()
        .iter()
        .map(|&c| {
            if c == 0.0 {
                0.0
            } else {
                c.signum() * c.abs().powf(q / 2.0)
            }
        })
        .collect();
    Point::new(coords)
}

/// `|x+y|^q - 2^(q-2) (tw(x) + tw(y))^2` with `tw(t) = |t|^(q/2) sgn t`.
/// Nonnegative for `1 <= q <= 2`; this is what makes twisting push inner
/// products down.
pub fn twisting_gap(x: f64, y: f64, q: f64) -> f64 {
    let tw = |t: f64| {
        if t == 0.0 {
            0.0
        } else {
            t.signum() * t.abs().powf(q / 2.0)
        }
    };
    let s = tw(x) + tw(y);
    (x + y).abs().powf(q) - 2f64.powf(q - 2.0) * s * s
}

/// `(2^-n sum_e |sum_i e_i a_i|^q)^(1/q)` over all `2^n` sign patterns.
pub fn sign_average(a: &[f64], q: f64) -> Result<f64> {
    let n = a.len();
    if n > 30 {
        return Err(Error::ResourceLimit(format!(
            "sign average over 2^{n} patterns"
        )));
    }
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::invalid(format!("q must be positive, got {q}")));
    }
    // Gray-code walk starting from all signs negative
    let mut s: f64 = -a.iter().sum::<f64>();
    let mut signs = 0u64;
    let mut acc = s.abs().powf(q);
    for step in 1u64..(1u64 << n) {
        let bit = step.trailing_zeros() as usize;
        signs ^= 1 << bit;
        s += if signs >> bit & 1 == 1 {
            2.0 * a[bit]
        } else {
            -2.0 * a[bit]
        };
        acc += s.abs().powf(q);
    }
    Ok((acc / (1u64 << n) as f64).powf(1.0 / q))
}

/// Upper bound on the size of a collapsing family in `l_q^d` from twisting.
///
/// The underlying pointwise inequality only holds for `1 <= q <= 2`, so the
/// bound is refused outside `(1, 2]` (i.e. for `p < 2`).
pub fn rankin_bound(q: f64) -> Result<u64> {
    if !(q > 1.0 && q <= 2.0) {
        return Err(Error::invalid(format!(
            "the twisting bound applies to 1 < q <= 2 only, got q = {q}"
        )));
    }
    // pairwise inner products <= 2^(1-q) - 1 = -1/t; need the smallest n with -1/t < -1/n
    let t = 1.0 / (1.0 - 2f64.powf(1.0 - q));
    Ok(floor_with_slack(t) + 1)
}

fn floor_with_slack(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= INTEGER_SLACK * r.abs().max(1.0) {
        r as u64
    } else {
        x.floor() as u64
    }
}

/// Upper bound on collapsing families from Khinchin's inequality.
///
/// For `p >= 2` this is `floor(4 / A_q^2)`, which is `2^(3 - 2/p)` below
/// `q0` and always strictly below 8. For `1 < p < 2` it is `floor(2^(p*))`.
pub fn khinchin_upper_bound(p: f64) -> Result<u64> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::invalid(format!("p must lie in (1, inf), got {p}")));
    }
    let q = conjugate(p);
    if p >= 2.0 {
        let a = khinchin_constants(q.min(2.0))?.a;
        Ok(floor_with_slack(4.0 / (a * a)).min(7))
    } else {
        let v = 2f64.powf(q);
        Ok(if v >= u64::MAX as f64 {
            u64::MAX
        } else {
            floor_with_slack(v)
        })
    }
}

/// The four interval endpoints in `p` at which the `p >= 2` bounds change:
/// `log3/(log3-log2)`, `(log8-log3)/(log4-log3)`, `log4/(log4-log3)`, `log4/(log8-log7)`.
pub fn threshold_p_values() -> [f64; 4] {
    let l = |x: f64| x.ln();
    [
        l(3.0) / (l(3.0) - l(2.0)),
        (l(8.0) - l(3.0)) / (l(4.0) - l(3.0)),
        l(4.0) / (l(4.0) - l(3.0)),
        l(4.0) / (l(8.0) - l(7.0)),
    ]
}

/// `k (d-k)^q + (d-k) k^q`: the `q`-th power of the `l_q` norm of a `k`-subset
/// sum of the unnormalized simplex vectors.
pub fn g(k: usize, d: usize, q: f64) -> Result<f64> {
    if d < 2 || k < 1 || k >= d {
        return Err(Error::invalid(format!(
            "g needs 1 <= k <= d-1, got k={k}, d={d}"
        )));
    }
    let (k, d) = (k as f64, d as f64);
    Ok(k * (d - k).powf(q) + (d - k) * k.powf(q))
}

/// `g(2,d,q) / g(1,d,q) - 1`, evaluated without overflow for large `q`.
fn g_gap(d: usize, q: f64) -> f64 {
    let df = d as f64;
    // divide through by (d-1)^q
    let r = |x: f64| (x / (df - 1.0)).powf(q);
    let num = 2.0 * r(df - 2.0) + (df - 2.0) * r(2.0);
    let den = 1.0 + (df - 1.0) * r(1.0);
    num / den - 1.0
}

/// The `q*` above which `g(2,d,q) <= g(1,d,q)`.
pub fn solve_g_threshold(d: usize) -> Result<f64> {
    if d < 4 {
        return Err(Error::invalid(format!("g-threshold needs d >= 4, got {d}")));
    }
    bisect(|q| g_gap(d, q), 2.0, 16.0, ROOT_TOLERANCE).map_err(|e| {
        Error::Numeric(format!(
            "g-threshold for d = {d} not bracketed by (2, 16): {e}"
        ))
    })
}

/// Result of scanning `d = 3, 4, ...` for the simplex lower-bound inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FScan {
    /// Largest `d` in the scanned range with `g(2,d,q) <= g(1,d,q)`.
    pub f: usize,
    /// Whether every `d` in `3..=f` satisfied the inequality.
    pub contiguous: bool,
    pub cap: usize,
}

/// `f(q) = max{d : 2(d-2)^q + (d-2) 2^q <= (d-1)^q + d - 1}` for `q > 2`.
pub fn f_lower(q: f64) -> Result<FScan> {
    if !(q.is_finite() && q > 2.0) {
        return Err(Error::invalid(format!(
            "f(q) is defined for q > 2, got {q}"
        )));
    }
    let cap = 64usize.max((4.0 * q).ceil() as usize);
    let mut f = 3;
    let mut contiguous = true;
    let mut gap_seen = false;
    for d in 3..=cap {
        // d = 3 is an identity; the ratio form is exact enough elsewhere
        let ok = d == 3 || g_gap(d, q) <= INTEGER_SLACK;
        if ok {
            if gap_seen {
                contiguous = false;
            }
            f = d;
        } else {
            gap_seen = true;
        }
    }
    Ok(FScan { f, contiguous, cap })
}

/// Interval `[2 sqrt(d), 2 d]` containing `2 pi_1(X*)` for any `d`-dimensional `X`.
pub fn summing_bound(d: usize) -> Result<(f64, f64)> {
    if d < 1 {
        return Err(Error::invalid("summing bound needs d >= 1"));
    }
    let d = d as f64;
    Ok((2.0 * d.sqrt(), 2.0 * d))
}

/// `sum ||x_i|| / max_signs ||sum e_i x_i||`, a lower bound for `pi_1(l_q^d)`.
pub fn pi1_lower_estimate(fam: &UnitFamily) -> Result<f64> {
    let total: f64 = fam.vectors().iter().map(|v| v.norm()).sum();
    let max = max_signed_sum(fam)?;
    Ok(total / max)
}

/// `max over signs of ||sum e_i x_i||_q`, from the subset sums:
/// `sum e_i x_i = 2 sum_J x_i - sum x_i` with `J = {i : e_i = +1}`.
fn max_signed_sum(fam: &UnitFamily) -> Result<f64> {
    let q = fam.exponent().q();
    let m = fam.len();
    if m > DEFAULT_MAX_SUBSETS {
        return Err(Error::ResourceLimit(format!(
            "sign enumeration over {m} vectors exceeds the cap of {DEFAULT_MAX_SUBSETS}"
        )));
    }
    // Gray walk over J, starting from J = {} (all signs negative)
    let total = fam.sum();
    let rows: Vec<&[f64]> = fam.vectors().iter().map(|v| v.coords()).collect();
    let mut acc: Vec<f64> = total.iter().map(|t| -t).collect();
    let mut best = norm_slice(&acc, q);
    let mut mask = 0u64;
    for step in 1..(1u64 << m) {
        let bit = step.trailing_zeros() as usize;
        mask ^= 1 << bit;
        let sign = if mask >> bit & 1 == 1 { 2.0 } else { -2.0 };
        acc.iter_mut()
            .zip(rows[bit])
            .for_each(|(a, r)| *a += sign * r);
        best = best.max(norm_slice(&acc, q));
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    /// `d + 1` for smooth spaces; `3` as the universal lower bound.
    Smooth,
    Rankin,
    Khinchin,
    Summing,
    /// The four-vector family in `l_q^3`.
    Construction,
    /// The normalized simplex family.
    Simplex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub p: f64,
    pub d: usize,
    pub lower: u64,
    pub upper: u64,
    pub lower_method: BoundMethod,
    pub upper_method: BoundMethod,
    /// Every upper bound that was evaluated, in the order they were tried.
    pub upper_candidates: Vec<(BoundMethod, u64)>,
}

/// Lower and upper bounds on the largest vertex and Steiner-point degree of
/// an SMT in `l_p^d`.
pub fn degree_bound(p: f64, d: usize) -> Result<BoundReport> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::invalid(format!("p must lie in (1, inf), got {p}")));
    }
    if d < 2 {
        return Err(Error::invalid(format!(
            "degree bounds need d >= 2, got {d}"
        )));
    }
    let q = conjugate(p);

    let mut candidates = vec![(BoundMethod::Smooth, d as u64 + 1)];
    if p >= 2.0 {
        candidates.push((BoundMethod::Rankin, rankin_bound(q.min(2.0))?));
    }
    candidates.push((BoundMethod::Khinchin, khinchin_upper_bound(p)?));
    let (_, hi) = summing_bound(d)?;
    candidates.push((BoundMethod::Summing, hi.floor() as u64));
    let (upper_method, upper) =
        candidates
            .iter()
            .copied()
            .fold((BoundMethod::Smooth, u64::MAX), |best, c| {
                if c.1 < best.1 {
                    c
                } else {
                    best
                }
            });

    let mut lower = (BoundMethod::Smooth, 3u64);
    if d >= 3 {
        if p >= threshold_p_values()[0] {
            lower = (BoundMethod::Construction, 4);
        } else if p < 2.0 {
            let f = f_lower(q)?.f.min(d) as u64;
            if f > lower.1 {
                lower = (BoundMethod::Simplex, f);
            }
        }
    }

    Ok(BoundReport {
        p,
        d,
        lower: lower.1,
        upper,
        lower_method: lower.0,
        upper_method,
        upper_candidates: candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp_geometry::LpExponent;

    #[test]
    fn gamma_at_half_integers() {
        let sp = std::f64::consts::PI.sqrt();
        let cases = [
            (0.5, sp),
            (1.5, sp / 2.0),
            (2.5, 3.0 * sp / 4.0),
            (3.5, 15.0 * sp / 8.0),
            (4.5, 105.0 * sp / 16.0),
            (9.5, 34459425.0 * sp / 512.0),
        ];
        for (x, expected) in cases {
            assert!(((gamma(x) - expected) / expected).abs() < 1e-13, "x = {x}");
        }
        assert!((gamma(1.0) - 1.0).abs() < 1e-14);
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
    }

    #[test]
    fn khinchin_examples() {
        let k = khinchin_constants(2.0).unwrap();
        assert!((k.a - 1.0).abs() < 1e-14 && (k.b - 1.0).abs() < 1e-14);
        let k = khinchin_constants(1.0).unwrap();
        assert!((k.a - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(k.b, 1.0);
        let k = khinchin_constants(4.0).unwrap();
        assert!((k.b - 2f64.sqrt() * 0.75f64.powf(0.25)).abs() < 1e-13);
        assert!((k.b - 1.31607).abs() < 1e-5);
        assert!((k.b - 3f64.powf(0.25)).abs() < 1e-13);
        assert!(khinchin_constants(0.9).is_err());
    }

    #[test]
    fn khinchin_constants_are_ordered_and_continuous_at_q0() {
        let q0 = compute_q0();
        let below = khinchin_constants(q0 - 1e-9).unwrap().a;
        let above = khinchin_constants(q0 + 1e-9).unwrap().a;
        assert!((below - above).abs() < 1e-8);
        let mut q = 1.0;
        while q < 8.0 {
            let k = khinchin_constants(q).unwrap();
            assert!(k.a <= 1.0 + 1e-15 && k.b >= 1.0 - 1e-15, "q = {q}");
            q += 0.01;
        }
    }

    #[test]
    fn q0_value() {
        let q0 = compute_q0();
        assert!((q0 - 1.8474).abs() < 1e-3);
        let resid = gamma(0.5 * (q0 + 1.0)) - std::f64::consts::PI.sqrt() / 2.0;
        assert!(resid.abs() < 1e-9);
    }

    #[test]
    fn q0_is_the_only_interior_sign_change() {
        let target = std::f64::consts::PI.sqrt() / 2.0;
        let f = |q: f64| gamma(0.5 * (q + 1.0)) - target;
        assert!(f(1.0) > 0.0);
        let mut changes = 0;
        let mut prev = f(1.0);
        for i in 1..1000 {
            let q = 1.0 + i as f64 * 1e-3; // stops short of q = 2
            let cur = f(q);
            if cur.signum() != prev.signum() {
                changes += 1;
            }
            prev = cur;
        }
        assert_eq!(changes, 1);
    }

    #[test]
    fn twist_examples() {
        let e = LpExponent::from_dual(1.7).unwrap();
        let e1 = DualVector::new(vec![1.0, 0.0, 0.0], e).unwrap();
        assert_eq!(twist(&e1).unwrap().coords(), &[1.0, 0.0, 0.0]);
        let q = 1.4;
        let e = LpExponent::from_dual(q).unwrap();
        let s = 3f64.powf(-1.0 / q);
        let x = DualVector::new(vec![s, -s, s], e).unwrap();
        let t = twist(&x).unwrap();
        let r = 3f64.powf(-0.5);
        for (c, sign) in t.coords().iter().zip([1.0, -1.0, 1.0]) {
            assert!((c - sign * r).abs() < 1e-15);
        }
        let bad = DualVector::new(vec![0.5, 0.5], e).unwrap();
        assert!(twist(&bad).is_err());
    }

    #[test]
    fn rankin_examples() {
        assert_eq!(rankin_bound(2.0).unwrap(), 3);
        assert_eq!(rankin_bound(1.60).unwrap(), 3);
        assert_eq!(rankin_bound(3f64.ln() / 2f64.ln()).unwrap(), 4);
        assert_eq!(rankin_bound((8.0f64 / 3.0).ln() / 2f64.ln()).unwrap(), 5);
        assert!(rankin_bound(2.5).is_err());
        assert!(rankin_bound(1.0).is_err());
    }

    #[test]
    fn khinchin_upper_examples() {
        assert_eq!(khinchin_upper_bound(2.0).unwrap(), 4);
        assert_eq!(khinchin_upper_bound(1e9).unwrap(), 7);
        assert_eq!(khinchin_upper_bound(1e300).unwrap(), 7);
        assert_eq!(khinchin_upper_bound(1.5).unwrap(), 8);
        assert_eq!(khinchin_upper_bound(1.25).unwrap(), 32);
    }

    #[test]
    fn threshold_values() {
        let t = threshold_p_values();
        assert!((t[0] - 2.70951).abs() < 1e-4);
        assert!((t[1] - 3.40942).abs() < 1e-4);
        assert!((t[2] - 4.81884).abs() < 1e-4);
        assert!((t[3] - 10.3818).abs() < 1e-3);
    }

    #[test]
    fn g_examples() {
        for q in [2.5, 3.3, 7.0] {
            for d in 2..9 {
                let g1 = g(1, d, q).unwrap();
                let expect = ((d - 1) as f64).powf(q) + (d - 1) as f64;
                assert!((g1 - expect).abs() <= 1e-12 * expect);
                for k in 1..d {
                    assert_eq!(g(k, d, q).unwrap(), g(d - k, d, q).unwrap());
                }
            }
            assert!((g(2, 4, q).unwrap() - 2f64.powf(q + 2.0)).abs() < 1e-12 * 2f64.powf(q + 2.0));
        }
        assert!(g(0, 4, 3.0).is_err());
        assert!(g(4, 4, 3.0).is_err());
    }

    #[test]
    fn g_threshold_values() {
        let expected = [(4, 3.21066), (5, 3.40092), (6, 3.69246), (7, 4.09345)];
        for (d, v) in expected {
            let q = solve_g_threshold(d).unwrap();
            assert!((q - v).abs() < 1e-4, "d={d}: {q}");
            // the inequality flips at the root
            assert!(g(2, d, q + 1e-6).unwrap() <= g(1, d, q + 1e-6).unwrap());
            assert!(g(2, d, q - 1e-6).unwrap() > g(1, d, q - 1e-6).unwrap());
        }
        assert!(solve_g_threshold(3).is_err());
    }

    #[test]
    fn f_lower_examples() {
        assert!(f_lower(3.21067).unwrap().f >= 4);
        assert!(f_lower(3.40093).unwrap().f >= 5);
        let s = f_lower(4.2).unwrap();
        assert!(s.f >= (4.2 / 2f64.ln()).ceil() as usize);
        assert!(s.contiguous);
        assert_eq!(f_lower(2.5).unwrap().f, 3);
        assert!(f_lower(2.0).is_err());
    }

    #[test]
    fn f_lower_matches_ceiling_with_natural_log() {
        let mut q = 3.69247;
        while q < 30.0 {
            let s = f_lower(q).unwrap();
            assert!(s.contiguous, "q = {q}");
            assert!(
                s.f >= (q / 2f64.ln()).ceil() as usize,
                "q = {q}: f = {}",
                s.f
            );
            q += 0.013;
        }
    }

    #[test]
    fn summing_examples() {
        assert_eq!(summing_bound(4).unwrap(), (4.0, 8.0));
        assert_eq!(summing_bound(1).unwrap(), (2.0, 2.0));
        assert_eq!(summing_bound(9).unwrap(), (6.0, 18.0));
    }

    #[test]
    fn pi1_examples() {
        let e = LpExponent::new(2.0).unwrap();
        let fam = UnitFamily::from_rows(vec![vec![1.0, 0.0]], e).unwrap();
        assert!((pi1_lower_estimate(&fam).unwrap() - 1.0).abs() < 1e-15);
        let fam = UnitFamily::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]], e).unwrap();
        assert!((pi1_lower_estimate(&fam).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let fam = UnitFamily::from_rows(vec![vec![1.0, 0.0], vec![1.0, 0.0]], e).unwrap();
        assert!((pi1_lower_estimate(&fam).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pi1_estimate_stays_within_known_range() {
        // sqrt(d) <= pi_1 <= d, and the estimate is a lower bound
        let e = LpExponent::new(2.0).unwrap();
        for d in 1..6 {
            let rows = (0..d)
                .map(|i| {
                    let mut r = vec![0.0; d];
                    r[i] = 1.0;
                    r
                })
                .collect();
            let fam = UnitFamily::from_rows(rows, e).unwrap();
            let est = pi1_lower_estimate(&fam).unwrap();
            assert!(est <= d as f64 + 1e-12);
            assert!((est - (d as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn degree_bound_examples() {
        let r = degree_bound(2.0, 5).unwrap();
        assert_eq!((r.lower, r.upper), (3, 3));
        assert_eq!(r.upper_method, BoundMethod::Rankin);
        let r = degree_bound(3.0, 10).unwrap();
        assert_eq!((r.lower, r.upper), (4, 4));
        assert_eq!(r.lower_method, BoundMethod::Construction);
        let r = degree_bound(20.0, 100).unwrap();
        assert_eq!(r.upper, 7);
        assert_eq!(r.upper_method, BoundMethod::Khinchin);
        let r = degree_bound(1.2, 6).unwrap();
        assert_eq!(r.upper, 7);
        assert_eq!(r.upper_method, BoundMethod::Smooth);
        assert_eq!(r.lower, 6.min(f_lower(6.0).unwrap().f as u64));
        assert!(degree_bound(1.0, 3).is_err());
        assert!(degree_bound(2.0, 1).is_err());
    }

    #[test]
    fn upper_plateaus_match_interval_endpoints() {
        let t = threshold_p_values();
        let d = 50;
        let up = |p: f64| degree_bound(p, d).unwrap().upper;
        let eps = 1e-9;
        assert_eq!(up(2.0), 3);
        assert_eq!(up(t[0] - eps), 3);
        assert_eq!(up(t[0]), 4);
        assert_eq!(up(t[1] - eps), 4);
        assert_eq!(up(t[1]), 5);
        assert_eq!(up(t[2] - eps), 5);
        assert_eq!(up(t[2]), 6);
        assert_eq!(up(t[3] - eps), 6);
        assert_eq!(up(t[3]), 7);
        assert_eq!(up(1e6), 7);
        // plateau values are nonincreasing as p decreases towards 2
        let mut prev = u64::MAX;
        let mut p = 40.0;
        while p >= 2.0 {
            let u = up(p);
            assert!(u <= prev);
            prev = u;
            p -= 0.01;
        }
    }

    #[test]
    fn bounds_are_consistent() {
        for d in 2..12 {
            for i in 0..200 {
                let p = 1.02 + i as f64 * 0.1;
                let r = degree_bound(p, d).unwrap();
                assert!(3 <= r.lower && r.lower <= r.upper, "p={p} d={d}: {r:?}");
                assert!(r.upper <= d as u64 + 1);
                if p < 2.0 {
                    let q = conjugate(p);
                    assert!((r.upper as f64) <= ((d + 1) as f64).min(2f64.powf(q)) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn sign_average_matches_direct_sum() {
        let a = [0.3, -1.2, 2.0, 0.7];
        for q in [1.0, 1.5, 2.0, 3.0] {
            let mut acc = 0.0;
            for mask in 0..16u32 {
                let s: f64 = (0..4)
                    .map(|i| if mask >> i & 1 == 1 { a[i] } else { -a[i] })
                    .sum();
                acc += s.abs().powf(q);
            }
            let direct = (acc / 16.0).powf(1.0 / q);
            assert!((sign_average(&a, q).unwrap() - direct).abs() < 1e-13);
        }
        // q = 2 is the euclidean norm exactly
        let e: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((sign_average(&a, 2.0).unwrap() - e).abs() < 1e-13);
    }

    #[test]
    fn twisting_gap_sign() {
        assert!(twisting_gap(1.0, 0.0, 1.5) > 0.0);
        assert_eq!(twisting_gap(1.0, 1.0, 1.5), 0.0);
        // beyond q = 2 the inequality fails
        assert!(twisting_gap(1.0, 0.0, 3.0) < 0.0);
    }

    #[test]
    fn pointwise_inequality_behind_twisting() {
        // |x+y|^q >= 2^(q-2) (|x|^(q/2) sgn x + |y|^(q/2) sgn y)^2 on a grid
        let tw = |x: f64, q: f64| x.signum() * x.abs().powf(q / 2.0);
        for qi in 0..=10 {
            let q = 1.0 + qi as f64 / 10.0;
            for xi in -20..=20 {
                for yi in -20..=20 {
                    let (x, y) = (xi as f64 * 0.5, yi as f64 * 0.5);
                    let lhs = (x + y).abs().powf(q);
                    let rhs = 2f64.powf(q - 2.0) * (tw(x, q) + tw(y, q)).powi(2);
                    assert!(lhs >= rhs - 1e-12, "x={x} y={y} q={q}");
                }
            }
        }
    }

    #[test]
    fn regular_simplex_inner_products_sit_on_the_boundary() {
        // d+1 unit vectors in R^d with pairwise products exactly -1/d
        for d in 2..8usize {
            let n = d + 1;
            // centered standard basis of R^(d+1), restricted to the hyperplane sum = 0
            let c = 1.0 / n as f64;
            let vecs: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    let mut v = vec![-c; n];
                    v[i] += 1.0;
                    let nrm = norm_slice(&v, 2.0);
                    v.iter().map(|x| x / nrm).collect()
                })
                .collect();
            for i in 0..n {
                for j in 0..n {
                    let ip: f64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).sum();
                    let expect = if i == j { 1.0 } else { -1.0 / d as f64 };
                    assert!((ip - expect).abs() < 1e-14);
                }
            }
        }
    }
}
