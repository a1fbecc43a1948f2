//! Minimal idempotents `e_n = alpha_{1-q^n} / ||alpha_{1-q^n}||_2^2` and the
//! approximation of `epsilon_k` from their span.
//!
//! `e_n^` is the indicator of the point `1 - q^n`, so the `e_n` are
//! pairwise orthogonal and `epsilon_0 - epsilon_k = sum_n c_n e_n` with
//! `c_n = 1 - P_k(1 - q^n)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::characters::{bound_c, character, k_threshold, DEFAULT_EXTRA_DEPTH};
use crate::error::{Error, Result};
use crate::fourier::SpectrumPoint;
use crate::hypergroup::{HSeq, LittleQLegendre, Norm};
use crate::recurrence::spectral_point;
use crate::scalar::{int, ten_pow_neg, Enclosure, Rational, ROUNDING_BITS};

/// Truncation of `e_n` on `0..=k_max` with a certified `l^1(h)` tail bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdempotentApprox {
    pub n: usize,
    /// `q^n (1 - q) alpha_{1-q^n}(k)` for `k <= k_max`
    pub body: Vec<Rational>,
    pub tail_l1_bound: Rational,
}

impl IdempotentApprox {
    pub fn k_max(&self) -> usize {
        self.body.len() - 1
    }

    pub fn as_hseq(&self) -> HSeq {
        HSeq::from_dense(&self.body)
    }

    /// `sup |e_n| = q^n (1 - q)`, attained at `k = 0`.
    pub fn sup_norm(&self) -> Rational {
        self.body[0].clone()
    }
}

pub fn idempotent(lq: &LittleQLegendre, n: usize, k_max: usize) -> Result<IdempotentApprox> {
    let chi = character(lq, n, k_max)?;
    let scale = lq.q().pow(n as i64) * (Rational::one() - lq.q().value());
    Ok(IdempotentApprox {
        n,
        body: chi.values().iter().map(|v| v * &scale).collect(),
        tail_l1_bound: chi.tail_l1_bound() * &scale,
    })
}

/// `n + K + 40`.
pub fn default_k_max(lq: &LittleQLegendre, n: usize) -> usize {
    n + k_threshold(lq.q()).get() + DEFAULT_EXTRA_DEPTH
}

/// Enclosure of `e_n^(x)`; characters are bounded by 1 on the spectrum, so
/// the `l^1` tail bounds the truncation error.
pub fn idempotent_fourier(lq: &LittleQLegendre, e: &IdempotentApprox, x: SpectrumPoint) -> Enclosure {
    let vals = lq.provider().eval_sequence(&x.x(lq.q()), e.k_max());
    // terms floored onto the dyadic grid; each loses less than one ulp
    let ulp = BigInt::one() << ROUNDING_BITS;
    let sum: BigInt = e
        .body
        .iter()
        .zip(&vals)
        .enumerate()
        .map(|(k, (b, p))| {
            let t = b * p * lq.h(k);
            (t.numer() * &ulp).div_floor(t.denom())
        })
        .sum();
    let radius = &e.tail_l1_bound + Rational::new(BigInt::from(vals.len()), ulp.clone());
    Enclosure::ball(Rational::new(sum, ulp), &radius)
}

/// `||e_n||_1` enclosure.
pub fn idempotent_l1(lq: &LittleQLegendre, e: &IdempotentApprox) -> Enclosure {
    let partial = lq.hypergroup().norm_p(&e.as_hseq(), Norm::L1);
    let hi = &partial + &e.tail_l1_bound;
    Enclosure::new(partial, hi).expect("ordered")
}

#[derive(Clone, Debug)]
pub struct OrthogonalityReport {
    pub m: usize,
    pub n: usize,
    /// `(j, enclosure of e_m^(1-q^j) e_n^(1-q^j))`
    pub fourier_side: Vec<(usize, Enclosure)>,
    /// `(j, enclosure of (e_m * e_n)(j))` built from the exact truncated
    /// convolution and the tail bounds
    pub time_side: Vec<(usize, Enclosure)>,
    pub width_bound: Rational,
}

impl OrthogonalityReport {
    pub fn passed(&self) -> bool {
        self.fourier_side
            .iter()
            .all(|(_, e)| e.contains_zero() && e.width() < self.width_bound)
            && self.time_side.iter().all(|(_, e)| e.contains_zero())
    }
}

/// Checks `e_m * e_n = 0` for `m != n` at positions and spectrum points
/// `0..=probe`.
pub fn orthogonality_check(
    lq: &LittleQLegendre,
    m: usize,
    n: usize,
    probe: usize,
) -> Result<OrthogonalityReport> {
    if m == n {
        return Err(Error::EqualIndices);
    }
    let em = idempotent(lq, m, default_k_max(lq, m.max(n)))?;
    let en = idempotent(lq, n, default_k_max(lq, m.max(n)))?;
    let fourier_side = (0..=probe)
        .map(|j| {
            let x = SpectrumPoint::Index(j);
            let prod = &idempotent_fourier(lq, &em, x) * &idempotent_fourier(lq, &en, x);
            (j, prod)
        })
        .collect();
    // With r = e - truncation:
    // trunc_m * trunc_n = -(r_m * trunc_n + trunc_m * r_n + r_m * r_n), and
    // ||f * g||_inf <= ||f||_1 ||g||_inf with sup |r_n| <= sup |e_n|.
    let bound = &em.tail_l1_bound * en.sup_norm() * int(2) + em.sup_norm() * &en.tail_l1_bound;
    let (fm, fn_) = (em.as_hseq(), en.as_hseq());
    let hg = lq.hypergroup();
    let time_side = (0..=probe)
        .into_par_iter()
        .map(|j| (j, Enclosure::ball(hg.convolve_at(&fm, &fn_, j), &bound)))
        .collect();
    Ok(OrthogonalityReport {
        m,
        n,
        fourier_side,
        time_side,
        width_bound: ten_pow_neg(10),
    })
}

/// Enclosure of `e_n^(1-q^n)^2`, which should contain 1.
pub fn idempotency_at_own_point(lq: &LittleQLegendre, n: usize) -> Result<Enclosure> {
    let e = idempotent(lq, n, default_k_max(lq, n))?;
    let v = idempotent_fourier(lq, &e, SpectrumPoint::Index(n));
    Ok(&v * &v)
}

/// `c_n = (epsilon_0 - epsilon_k)^(1 - q^n) = 1 - P_k(1 - q^n)`.
pub fn series_coefficient(lq: &LittleQLegendre, k: usize, n: usize) -> Rational {
    Rational::one() - lq.eval_poly(k, &spectral_point(lq.q(), n))
}

/// `sum_j |c_j|` over the monomial coefficients of `P_k'`; bounds
/// `max_{[0,1]} |P_k'|`.
pub fn mvt_coeff_bound(lq: &LittleQLegendre, k: usize) -> Rational {
    lq.provider().monomial(k).derivative().abs_coeff_sum()
}

/// Truncated partial sum `sum_{n <= N} c_n e_n` and the accumulated tail
/// bound `sum |c_n| tail_n`.
fn partial_series(lq: &LittleQLegendre, k: usize, big_n: usize, k_max: usize) -> Result<(HSeq, Rational)> {
    let parts: Result<Vec<(HSeq, Rational)>> = (0..=big_n)
        .into_par_iter()
        .map(|n| {
            let c = series_coefficient(lq, k, n);
            let e = idempotent(lq, n, k_max)?;
            Ok((e.as_hseq().scale(&c), c.abs() * &e.tail_l1_bound))
        })
        .collect();
    Ok(parts?
        .into_iter()
        .fold((HSeq::zero(), Rational::zero()), |(s, t), (f, b)| (s.add(&f), t + b)))
}

/// `||sum_{n <= N} c_n e_n||_1` enclosure.
pub fn partial_series_l1(lq: &LittleQLegendre, k: usize, big_n: usize, k_max: usize) -> Result<Enclosure> {
    let (s, tail) = partial_series(lq, k, big_n, k_max)?;
    Ok(norm_enclosure(lq.hypergroup().norm_p(&s, Norm::L1), tail))
}

fn norm_enclosure(exact: Rational, tail: Rational) -> Enclosure {
    let lo = (&exact - &tail).max(Rational::zero());
    let hi = exact + tail;
    Enclosure::new(lo, hi).expect("ordered")
}

/// Enclosure of `||epsilon_k - (epsilon_0 - sum_{n <= N} c_n e_n)||_1`.
pub fn approx_epsilon(lq: &LittleQLegendre, k: usize, big_n: usize, k_max: usize) -> Result<Enclosure> {
    let hg = lq.hypergroup();
    let (s, tail) = partial_series(lq, k, big_n, k_max)?;
    let residual = hg.epsilon(k).sub(&hg.epsilon(0)).add(&s);
    Ok(norm_enclosure(hg.norm_p(&residual, Norm::L1), tail))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualRow {
    pub big_n: usize,
    pub residual: Enclosure,
}

/// `approx_epsilon` for `N = 0..=n_series`, all at the truncation depth
/// `n_series + K + 40`.
pub fn residual_series(lq: &LittleQLegendre, k: usize, n_series: usize) -> Result<Vec<ResidualRow>> {
    let k_max = default_k_max(lq, n_series);
    let hg = lq.hypergroup();
    let mut acc = hg.epsilon(k).sub(&hg.epsilon(0));
    let mut tail = Rational::zero();
    let mut rows = Vec::with_capacity(n_series + 1);
    let idems: Result<Vec<IdempotentApprox>> = (0..=n_series)
        .into_par_iter()
        .map(|n| idempotent(lq, n, k_max))
        .collect();
    for (n, e) in idems?.into_iter().enumerate() {
        let c = series_coefficient(lq, k, n);
        acc = acc.add(&e.as_hseq().scale(&c));
        tail += c.abs() * &e.tail_l1_bound;
        rows.push(ResidualRow {
            big_n: n,
            residual: norm_enclosure(hg.norm_p(&acc, Norm::L1), tail.clone()),
        });
    }
    Ok(rows)
}

/// `C / (1 - q) * mvt_coeff_bound(k)`, the bound on `||f_k||_1`.
pub fn series_norm_bound(lq: &LittleQLegendre, k: usize) -> Rational {
    bound_c(lq.q()).hi() / (Rational::one() - lq.q().value()) * mvt_coeff_bound(lq, k)
}
