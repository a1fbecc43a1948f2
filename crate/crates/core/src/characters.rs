//! Characters `alpha_{1-q^n}(k) = P_k(1 - q^n)` with certified decay.
//!
//! Past the threshold `K` (least `K` with `q^{K+1} <= 1/4`) the characters
//! oscillate and decay super-geometrically:
//! `|alpha(n+k+1)| < 4 q^{k+1} |alpha(n+k)|` for `k >= K`. Combined with
//! `h(m+1) / h(m) < 1 / (q (1 - q^{2m+1}))` this bounds the `l^1(h)` tail
//! of a truncated character by a geometric majorant.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergroup::LittleQLegendre;
use crate::recurrence::spectral_point;
use crate::scalar::{
    int, powi, q_pochhammer_inf, round_up, signum, ten_pow_neg, Enclosure, QParam, Rational,
    ROUNDING_BITS,
};

/// Extra depth past `n + K` used when no truncation is requested.
pub const DEFAULT_EXTRA_DEPTH: usize = 40;

/// Least `K >= 0` with `q^{K+1} <= 1/4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct KThreshold(pub usize);

impl KThreshold {
    pub fn get(self) -> usize {
        self.0
    }
}

/// Decided on integers: with `q = p / r`, find the least `K` such that
/// `4 p^{K+1} <= r^{K+1}`.
pub fn k_threshold(q: &QParam) -> KThreshold {
    let (p, r) = q.parts();
    let four = BigInt::from(4);
    let mut pk = p.clone();
    let mut rk = r.clone();
    let mut k = 0;
    while &four * &pk > rk {
        pk *= p;
        rk *= r;
        k += 1;
    }
    KThreshold(k)
}

/// Exact prefix `alpha(0..=k_max)` of `alpha_{1-q^n}` plus a certified bound
/// on `sum_{k > k_max} |alpha(k)| h(k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedCharacter {
    n: usize,
    values: Vec<Rational>,
    tail_l1_bound: Rational,
}

impl TruncatedCharacter {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, k: usize) -> &Rational {
        &self.values[k]
    }

    pub fn tail_l1_bound(&self) -> &Rational {
        &self.tail_l1_bound
    }
}

/// `n + K + 40`.
pub fn default_k_max(q: &QParam, n: usize) -> usize {
    n + k_threshold(q).get() + DEFAULT_EXTRA_DEPTH
}

pub fn character(lq: &LittleQLegendre, n: usize, k_max: usize) -> Result<TruncatedCharacter> {
    let big_k = k_threshold(lq.q()).get();
    if k_max < n + big_k {
        return Err(Error::TruncationTooShallow {
            k_max,
            required: n + big_k,
        });
    }
    let x = spectral_point(lq.q(), n);
    let values = lq.provider().eval_sequence(&x, k_max);
    let last = values[k_max].abs() * lq.h(k_max);
    let tail_l1_bound = l1_tail_majorant(lq.q(), k_max - n, k_max, last);
    Ok(TruncatedCharacter {
        n,
        values,
        tail_l1_bound,
    })
}

/// Bound on `sum_{i >= 1} T_i` where `T_0 = |alpha(m0)| h(m0)`, `m0 = n + j0`,
/// `j0 >= K`, and consecutive terms shrink by at most
/// `rho_i = 4 q^{j0+i} / (1 - q^{2 m0 + 1})`.
fn l1_tail_majorant(q: &QParam, j0: usize, m0: usize, t0: Rational) -> Rational {
    let one = Rational::one();
    let gamma = (&one - q.pow(2 * m0 as i64 + 1)).recip();
    let mut bound = t0;
    let mut sum = Rational::zero();
    let mut i = 0i64;
    loop {
        let rho = int(4) * q.pow(j0 as i64 + i) * &gamma;
        if rho < one {
            sum += &bound * &rho / (&one - &rho);
            return round_up(&sum, ROUNDING_BITS);
        }
        bound = round_up(&(bound * rho), ROUNDING_BITS);
        sum += &bound;
        i += 1;
    }
}

/// `||alpha_{1-q^n}||_2^2 = 1 / (q^n (1 - q))`.
pub fn l2_norm_sq(q: &QParam, n: usize) -> Rational {
    (q.pow(n as i64) * (Rational::one() - q.value())).recip()
}

/// Exact partial sum `sum_{k <= k_max} alpha(k)^2 h(k)`.
pub fn l2_partial_sum(lq: &LittleQLegendre, chi: &TruncatedCharacter) -> Rational {
    chi.values()
        .iter()
        .enumerate()
        .map(|(k, v)| v * v * lq.h(k))
        .sum()
}

/// `||alpha_{1-q^n}||_1` enclosed by the exact partial sum and the
/// certified tail.
pub fn l1_norm(lq: &LittleQLegendre, n: usize, k_max: usize) -> Result<Enclosure> {
    let chi = character(lq, n, k_max)?;
    Ok(l1_norm_of(lq, &chi))
}

pub fn l1_norm_of(lq: &LittleQLegendre, chi: &TruncatedCharacter) -> Enclosure {
    let partial: Rational = chi
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| v.abs() * lq.h(k))
        .sum();
    let hi = &partial + chi.tail_l1_bound();
    Enclosure::new(partial, hi).expect("tail bound is nonnegative")
}

/// Enclosure of the explicit constant
/// `C = q^{-K} [1/(1-q) + 1/(1-q^{2K+1}) sum_{k>=1} 4^k q^{(2K+k-1)k/2}]`.
pub fn bound_c(q: &QParam) -> Enclosure {
    bound_c_tol(q, &ten_pow_neg(30))
}

/// [`bound_c`] with the series tail bounded below `tol`.
pub fn bound_c_tol(q: &QParam, tol: &Rational) -> Enclosure {
    let big_k = k_threshold(q).get() as i64;
    let one = Rational::one();
    let (series, tail) = constant_series(q, big_k, tol);
    let outer = q.pow(-big_k);
    let head = (&one - q.value()).recip();
    let scale = (&one - q.pow(2 * big_k + 1)).recip();
    let lo = &outer * (&head + &scale * &series);
    let hi = &outer * (&head + &scale * (&series + &tail));
    Enclosure::new(lo, hi).expect("ordered")
}

/// Partial sum of `sum_{k>=1} t_k`, `t_k = 4^k q^{(2K+k-1)k/2}`, and a bound
/// on the rest. Consecutive terms have ratio `4 q^{K+k}`.
fn constant_series(q: &QParam, big_k: i64, tol: &Rational) -> (Rational, Rational) {
    let one = Rational::one();
    let mut term = int(4) * q.pow(big_k); // t_1
    let mut sum = Rational::zero();
    let mut k = 1i64;
    loop {
        sum += &term;
        let next = &term * int(4) * q.pow(big_k + k); // t_{k+1}
        let rho = int(4) * q.pow(big_k + k + 1);
        if rho < one {
            let tail = &next / (&one - &rho);
            if &tail <= tol {
                return (sum, tail);
            }
        }
        term = next;
        k += 1;
    }
}

/// One tabulated point of the decay data for `alpha_{1-q^n}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecayPoint {
    pub n: usize,
    pub k: usize,
    /// `alpha(n + k)`
    pub alpha: Rational,
    /// `alpha(n + k + 1)`
    pub alpha_next: Rational,
    /// `alpha(n+k+1) / (alpha(n+k) q^{k+1})`, absent when `alpha(n+k) = 0`.
    pub ratio: Option<Rational>,
    /// `4^{k-K} q^{(K+k+1)(k-K)/2}`
    pub envelope: Rational,
}

/// `x -> 4^{x-K} q^{(K+x+1)(x-K)/2}` at integer `x`.
pub fn envelope(q: &QParam, big_k: usize, x: usize) -> Rational {
    let d = x as i64 - big_k as i64;
    let e = (big_k as i64 + x as i64 + 1) * d;
    debug_assert!(e % 2 == 0);
    powi(&int(4), d) * q.pow(e / 2)
}

/// Decay data for `n <= n_max`, `k` in `k_lo..=k_hi`, ordered by `(n, k)`.
pub fn decay_table(lq: &LittleQLegendre, n_max: usize, k_lo: usize, k_hi: usize) -> Vec<DecayPoint> {
    let q = lq.q();
    let big_k = k_threshold(q).get();
    (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let vals = lq.provider().eval_sequence(&spectral_point(q, n), n + k_hi + 1);
            (k_lo..=k_hi)
                .map(|k| {
                    let alpha = vals[n + k].clone();
                    let alpha_next = vals[n + k + 1].clone();
                    let ratio = (!alpha.is_zero())
                        .then(|| &alpha_next / (&alpha * q.pow(k as i64 + 1)));
                    DecayPoint {
                        n,
                        k,
                        alpha,
                        alpha_next,
                        ratio,
                        envelope: envelope(q, big_k, k),
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Which decay property failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DecayCheck {
    Nonvanishing,
    RatioBelowFour,
    SignAlternation,
    StrictDecrease,
    Envelope,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecayViolation {
    pub n: usize,
    pub k: usize,
    pub check: DecayCheck,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub big_k: usize,
    pub points_checked: usize,
    /// Largest `|ratio|` seen, as a decimal string.
    pub max_abs_ratio: String,
    /// All violations, sorted by `(n, k)`; empty on success.
    pub violations: Vec<DecayViolation>,
}

impl DecayReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&DecayViolation> {
        self.violations.first()
    }
}

/// Exact check, for `n <= n_max` and `K <= k <= K + k_extra`, of
/// nonvanishing, `|ratio| < 4`, sign alternation, strict decrease of
/// `|alpha(n+k)|` and the envelope
/// `|alpha(n+K+j)| <= 4^j q^{(2K+j+1)j/2} |alpha(n+K)| <= 4^j q^{(2K+j+1)j/2}`.
pub fn verify_decay(lq: &LittleQLegendre, n_max: usize, k_extra: usize) -> DecayReport {
    let q = lq.q();
    let big_k = k_threshold(q).get();
    let table = decay_table(lq, n_max, big_k, big_k + k_extra);
    let mut violations = Vec::new();
    let mut max_ratio = Rational::zero();
    let mut anchor = Rational::zero();
    for p in &table {
        let mut fail = |check| {
            violations.push(DecayViolation {
                n: p.n,
                k: p.k,
                check,
            })
        };
        if p.k == big_k {
            anchor = p.alpha.abs();
        }
        let Some(ratio) = &p.ratio else {
            fail(DecayCheck::Nonvanishing);
            continue;
        };
        if ratio.abs() >= int(4) {
            fail(DecayCheck::RatioBelowFour);
        }
        max_ratio = max_ratio.max(ratio.abs());
        if signum(&p.alpha) * signum(&p.alpha_next) >= 0 {
            fail(DecayCheck::SignAlternation);
        }
        if p.alpha_next.abs() >= p.alpha.abs() {
            fail(DecayCheck::StrictDecrease);
        }
        let j = p.k - big_k;
        let scale = envelope(q, big_k, p.k);
        debug_assert_eq!(scale, powi(&int(4), j as i64) * q.pow(((2 * big_k + j + 1) * j / 2) as i64));
        if p.alpha.abs() > &scale * &anchor || anchor > Rational::one() {
            fail(DecayCheck::Envelope);
        }
    }
    DecayReport {
        big_k,
        points_checked: table.len(),
        max_abs_ratio: crate::scalar::to_decimal(&max_ratio, 12),
        violations,
    }
}

/// Convergence of `alpha(n+k) / ((-1)^k q^{k(k+1)/2})` to the constant
/// `(q^{n+1}; q)_inf / (q; q)_inf`.
#[derive(Clone, Debug)]
pub struct AsymptoteReport {
    pub n: usize,
    pub constant: Enclosure,
    /// `(k, quotient, distance from quotient to the constant's enclosure)`
    pub rows: Vec<(usize, Rational, Rational)>,
}

impl AsymptoteReport {
    pub fn max_distance(&self) -> Rational {
        self.rows
            .iter()
            .map(|(_, _, d)| d.clone())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

pub fn asymptote_check(
    lq: &LittleQLegendre,
    n: usize,
    k_range: std::ops::RangeInclusive<usize>,
) -> Result<AsymptoteReport> {
    let q = lq.q();
    let num = q_pochhammer_inf(&q.pow(n as i64 + 1), q)?;
    let den = q_pochhammer_inf(q.value(), q)?;
    let constant = num.checked_div(&den)?;
    let vals = lq
        .provider()
        .eval_sequence(&spectral_point(q, n), n + *k_range.end());
    let rows = k_range
        .map(|k| {
            let e = (k * (k + 1) / 2) as i64;
            let sign = if k % 2 == 0 { int(1) } else { int(-1) };
            let quotient = &vals[n + k] / (sign * q.pow(e));
            let dist = constant.distance_to(&quotient);
            (k, quotient, dist)
        })
        .collect();
    Ok(AsymptoteReport { n, constant, rows })
}

/// The middle and right inequalities of
/// `0 < ||alpha||_2^2 < ||alpha||_1 < C ||alpha||_2^2` for one `n`.
#[derive(Clone, Debug)]
pub struct NormChainRow {
    pub n: usize,
    pub l2_sq: Rational,
    pub l1: Enclosure,
    pub c: Enclosure,
}

impl NormChainRow {
    pub fn ratio(&self) -> Enclosure {
        self.l1.mul_scalar(&self.l2_sq.recip())
    }

    pub fn holds(&self) -> bool {
        self.l2_sq.is_positive() && self.l1.lo() > &self.l2_sq && self.l1.hi() < &(self.c.hi() * &self.l2_sq)
    }
}

/// Norm chain rows for `n <= n_max` at the default truncation depth.
pub fn norm_chain(lq: &LittleQLegendre, n_max: usize) -> Result<Vec<NormChainRow>> {
    let q = lq.q();
    let c = bound_c(q);
    (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let l1 = l1_norm(lq, n, default_k_max(q, n))?;
            Ok(NormChainRow {
                n,
                l2_sq: l2_norm_sq(q, n),
                l1,
                c: c.clone(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn ctx(p: i64, r: i64) -> LittleQLegendre {
        LittleQLegendre::new(QParam::from_ratio(p, r).unwrap())
    }

    /// Oracle: K straight from the definition, scanning powers of q.
    fn k_by_scan(q: &QParam) -> usize {
        (0..).find(|&k| q.pow(k as i64 + 1) <= rat(1, 4)).unwrap()
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(k_threshold(&QParam::from_ratio(2, 3).unwrap()).get(), 3);
        assert_eq!(k_threshold(&QParam::from_ratio(1, 4).unwrap()).get(), 0);
        assert_eq!(k_threshold(&QParam::from_ratio(1, 5).unwrap()).get(), 0);
        assert_eq!(k_threshold(&QParam::from_ratio(1, 2).unwrap()).get(), 1);
        // boundary: q^2 = 1/4 exactly
        assert_eq!(k_threshold(&QParam::from_ratio(1, 2).unwrap()).get(), 1);
        for (p, r) in [(3, 4), (9, 10), (7, 8), (1, 3), (63, 64)] {
            let q = QParam::from_ratio(p, r).unwrap();
            assert_eq!(k_threshold(&q).get(), k_by_scan(&q));
        }
    }

    #[test]
    fn character_examples() {
        let lq = ctx(2, 3);
        let chi0 = character(&lq, 0, 10).unwrap();
        assert_eq!(chi0.value(0), &int(1));
        let chi1 = character(&lq, 1, 10).unwrap();
        assert_eq!(chi1.value(1), &rat(-1, 9));
        for k in 3..9 {
            assert_eq!(signum(chi0.value(k)) * signum(chi0.value(k + 1)), -1);
        }
        assert!(matches!(
            character(&lq, 2, 4),
            Err(Error::TruncationTooShallow { required: 5, .. })
        ));
    }

    #[test]
    fn l2_examples() {
        let q = QParam::from_ratio(2, 3).unwrap();
        assert_eq!(l2_norm_sq(&q, 0), int(3));
        assert_eq!(l2_norm_sq(&q, 1), rat(9, 2));
    }

    #[test]
    fn l2_partial_sums_increase_to_closed_form() {
        let lq = ctx(2, 3);
        let q = lq.q().clone();
        for n in [0usize, 2, 5] {
            let exact = l2_norm_sq(&q, n);
            let mut prev = Rational::zero();
            for k_max in [n + 3, n + 10, n + 20, n + 40] {
                let chi = character(&lq, n, k_max).unwrap();
                let partial = l2_partial_sum(&lq, &chi);
                assert!(partial > prev && partial < exact);
                // |alpha| <= 1 makes the l1 tail an l2 tail bound as well
                assert!(&exact - &partial <= *chi.tail_l1_bound());
                prev = partial;
            }
        }
    }

    #[test]
    fn l1_tail_bound_dominates_exact_tail() {
        // oracle: a much deeper exact partial sum
        let lq = ctx(1, 2);
        for n in [0usize, 3] {
            let shallow = character(&lq, n, n + 4).unwrap();
            let deep = l1_norm(&lq, n, n + 60).unwrap();
            let shallow_enc = l1_norm_of(&lq, &shallow);
            assert!(deep.lo() >= shallow_enc.lo());
            assert!(deep.hi() <= shallow_enc.hi());
        }
    }

    #[test]
    fn l1_width_shrinks_with_depth() {
        let lq = ctx(2, 3);
        let mut prev: Option<Rational> = None;
        for extra in [0usize, 5, 10, 20, 40] {
            let w = l1_norm(&lq, 2, 2 + 3 + extra).unwrap().width();
            if let Some(p) = &prev {
                assert!(&w < p);
            }
            prev = Some(w);
        }
    }

    #[test]
    fn l1_examples() {
        let lq = ctx(2, 3);
        let q = lq.q().clone();
        let e = l1_norm(&lq, 0, default_k_max(&q, 0)).unwrap();
        assert!(e.lo() >= &int(3));
        assert!(e.hi() < &int(60));
        let c = bound_c(&q);
        let e5 = l1_norm(&lq, 5, default_k_max(&q, 5)).unwrap();
        assert!(e5.hi() / l2_norm_sq(&q, 5) < *c.hi());
    }

    #[test]
    fn constant_examples() {
        let q = QParam::from_ratio(2, 3).unwrap();
        let c = bound_c(&q);
        assert!(c.lo() > &rat(202, 10) && c.hi() < &rat(204, 10));
        assert!(c.width() < ten_pow_neg(25));
        for (p, r) in [(1, 5), (1, 2), (2, 3), (9, 10)] {
            let q = QParam::from_ratio(p, r).unwrap();
            let c = bound_c(&q);
            let first = (Rational::one() - q.value()).recip() * q.pow(-(k_threshold(&q).get() as i64));
            assert!(c.lo() > &first);
        }
    }

    #[test]
    fn constant_oracle_direct_partial_sums() {
        // oracle: sum terms from the closed exponent formula, no ratio recursion
        let q = QParam::from_ratio(1, 5).unwrap();
        let big_k = 0i64;
        let direct: Rational = (1..60i64)
            .map(|k| powi(&int(4), k) * q.pow((2 * big_k + k - 1) * k / 2))
            .sum();
        let one = Rational::one();
        let value = (&one - q.value()).recip() + (&one - q.pow(1)).recip() * direct;
        assert!(bound_c(&q).contains(&value) || bound_c(&q).distance_to(&value) < ten_pow_neg(60));
        assert!(bound_c(&q).lo() <= &value);
    }

    #[test]
    fn decay_reports_pass() {
        let r = verify_decay(&ctx(2, 3), 9, 5);
        assert!(r.passed(), "{:?}", r.first_violation());
        assert_eq!(r.big_k, 3);
        let r = verify_decay(&ctx(1, 2), 6, 8);
        assert!(r.passed(), "{:?}", r.first_violation());
    }

    #[test]
    fn ratio_tends_to_minus_one() {
        let lq = ctx(2, 3);
        let table = decay_table(&lq, 0, 40, 40);
        let r = table[0].ratio.clone().unwrap();
        assert!((r + int(1)).abs() < rat(1, 100));
    }

    #[test]
    fn asymptote_examples() {
        let rep = asymptote_check(&ctx(2, 3), 0, 20..=30).unwrap();
        assert!(rep.max_distance() < ten_pow_neg(3));
        let rep = asymptote_check(&ctx(1, 3), 2, 15..=25).unwrap();
        assert!(rep.max_distance() < ten_pow_neg(3));
        // the numerator tends to 1, so the constant tends to 1 / (q; q)_inf
        let lq = ctx(1, 2);
        let far = asymptote_check(&lq, 60, 0..=0).unwrap();
        let inv = q_pochhammer_inf(&rat(1, 2), lq.q()).unwrap().midpoint().recip();
        assert!(far.constant.distance_to(&inv) < ten_pow_neg(15));
    }
}
