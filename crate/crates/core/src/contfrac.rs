//! Coefficient functions `A_n, B_n, C_n, D_n` and Worpitzky continued
//! fractions on the real line.
//!
//! A fraction `1/(1 + s_0/(1 + s_1/(1 + ...)))` with all `|s_j| <= 1/4`
//! converges, and every tail value lies in `[2/3, 2]`. Each level is the
//! map `w -> 1/(1 + s w)`, so a truncation at depth `d` with the tail
//! replaced by `[2/3, 2]` is evaluated from the innermost level outward.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::characters::k_threshold;
use crate::error::{Error, Result};
use crate::hypergroup::LittleQLegendre;
use crate::recurrence::spectral_point;
use crate::scalar::{int, rat, to_decimal, Enclosure, QParam, Rational, ROUNDING_BITS};

pub const DEFAULT_DEPTH: usize = 80;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CfKind {
    A,
    B,
    C,
    D,
}

/// The four coefficient functions at the spectral point `1 - q^n`.
pub struct CfCoefficients<'a> {
    lq: &'a LittleQLegendre,
    n: usize,
    p1: Rational,
}

impl<'a> CfCoefficients<'a> {
    pub fn new(lq: &'a LittleQLegendre, n: usize) -> Self {
        let p1 = lq.provider().p1(&spectral_point(lq.q(), n));
        CfCoefficients { lq, n, p1 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> &QParam {
        self.lq.q()
    }

    fn gap(&self, j: usize) -> Rational {
        self.lq.coeffs(j).b - &self.p1
    }

    /// `[b_{k+1} - P_1][b_{k+2} - P_1] / (a_{k+1} c_{k+2})`
    pub fn a(&self, k: usize) -> Rational {
        self.c(k) * self.d(k)
    }

    /// `[b_{n+k+1} - P_1] q^k / c_{n+k+1}`
    pub fn b(&self, k: usize) -> Rational {
        let j = self.n + k + 1;
        self.gap(j) * self.q().pow(k as i64) / self.lq.coeffs(j).c
    }

    /// `(b_{k+1} - P_1) / a_{k+1}`
    pub fn c(&self, k: usize) -> Rational {
        self.gap(k + 1) / self.lq.coeffs(k + 1).a
    }

    /// `(b_{k+2} - P_1) / c_{k+2}`
    pub fn d(&self, k: usize) -> Rational {
        self.gap(k + 2) / self.lq.coeffs(k + 2).c
    }

    pub fn get(&self, kind: CfKind, k: usize) -> Rational {
        match kind {
            CfKind::A => self.a(k),
            CfKind::B => self.b(k),
            CfKind::C => self.c(k),
            CfKind::D => self.d(k),
        }
    }
}

pub fn cf_coefficient(kind: CfKind, lq: &LittleQLegendre, n: usize, k: usize) -> Rational {
    CfCoefficients::new(lq, n).get(kind, k)
}

/// How admissibility `|s_j| <= 1/4` past the checked prefix is known.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum TailCertificate {
    /// Nothing is known beyond the checked prefix.
    PrefixOnly,
    /// The caller vouches for the whole sequence.
    Asserted,
    /// `s_j = -1/A_n(n+k+j)` with `k >= K`, where `A_n(n+k) > 4` holds for
    /// every `k >= K`.
    CoeffBound { n: usize, k: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorpitzkyResult {
    pub value: Enclosure,
    /// True when the full tail is admissible, so the limit itself lies in
    /// `value` and in `[2/3, 2]`.
    pub disk_certified: bool,
}

pub fn worpitzky_disk() -> Enclosure {
    Enclosure::new(rat(2, 3), int(2)).expect("ordered")
}

/// Enclosure of `1/(1 + s_0/(1 + s_1/(1 + ...)))` truncated at `depth`.
pub fn worpitzky_eval(
    s: impl Fn(usize) -> Rational,
    depth: usize,
    tail: TailCertificate,
) -> Result<WorpitzkyResult> {
    let quarter = rat(1, 4);
    let one = Rational::one();
    let disk = worpitzky_disk();
    let coeffs = (0..depth)
        .map(|j| {
            let sj = s(j);
            if sj.abs() > quarter {
                return Err(Error::NotWorpitzky {
                    index: j,
                    value: to_decimal(&sj, 12),
                });
            }
            Ok(sj)
        })
        .collect::<Result<Vec<_>>>()?;
    // Each level is monotone on the disk, so endpoint images give the exact
    // image; rounding endpoints outward keeps deeper results nested.
    let mut value = disk.clone();
    for sj in coeffs.iter().rev() {
        let u = (&one + sj * value.lo()).recip();
        let v = (&one + sj * value.hi()).recip();
        let image = if u <= v {
            Enclosure::new(u, v)?
        } else {
            Enclosure::new(v, u)?
        };
        value = image
            .round_out(ROUNDING_BITS)
            .intersect(&disk)
            .expect("image of the disk stays in the disk");
    }
    Ok(WorpitzkyResult {
        value,
        disk_certified: tail != TailCertificate::PrefixOnly,
    })
}

/// `psi_{n,k} = 1/(1 - (1/A_n(n+k))/(1 - (1/A_n(n+k+1))/(1 - ...)))`.
pub fn psi(lq: &LittleQLegendre, n: usize, k: usize, depth: usize) -> Result<WorpitzkyResult> {
    let big_k = k_threshold(lq.q()).get();
    if k < big_k {
        return Err(Error::BelowThreshold { k, threshold: big_k });
    }
    let cf = CfCoefficients::new(lq, n);
    worpitzky_eval(
        |j| -cf.a(n + k + j).recip(),
        depth,
        TailCertificate::CoeffBound { n, k },
    )
}

/// `-B_n(k) alpha(n+k+1) / (alpha(n+k) q^k)`, the exact value `psi_{n,k}`
/// should equal.
pub fn psi_character_value(lq: &LittleQLegendre, n: usize, k: usize) -> Result<Rational> {
    let x = spectral_point(lq.q(), n);
    let vals = lq.provider().eval_sequence(&x, n + k + 1);
    if vals[n + k].is_zero() {
        return Err(Error::DivisionByZeroInterval);
    }
    let cf = CfCoefficients::new(lq, n);
    Ok(-cf.b(k) * &vals[n + k + 1] / (&vals[n + k] * lq.q().pow(k as i64)))
}

#[derive(Clone, Debug, Serialize)]
pub struct PsiRow {
    pub n: usize,
    pub k: usize,
    /// Exact character-side value as `p/r`.
    pub exact: String,
    pub width: String,
    pub contained: bool,
    pub inside_disk: bool,
    /// `|B_n(k) alpha(n+k+1) / (alpha(n+k) q^k)| <= 2`
    pub bounded_by_two: bool,
    /// `psi_{n,k+1}` meets `A_n(n+k)(1 - 1/psi_{n,k})`
    pub recursion_consistent: bool,
}

impl PsiRow {
    pub fn passed(&self) -> bool {
        self.contained && self.inside_disk && self.bounded_by_two && self.recursion_consistent
    }
}

/// Identity and recursion checks for `n <= n_max`, `K <= k <= K + k_extra`.
pub fn psi_identity_check(
    lq: &LittleQLegendre,
    n_max: usize,
    k_extra: usize,
    depth: usize,
) -> Result<Vec<PsiRow>> {
    let big_k = k_threshold(lq.q()).get();
    let disk = worpitzky_disk();
    let rows: Result<Vec<Vec<PsiRow>>> = (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let cf = CfCoefficients::new(lq, n);
            (big_k..=big_k + k_extra)
                .map(|k| {
                    let here = psi(lq, n, k, depth)?.value;
                    let next = psi(lq, n, k + 1, depth)?.value;
                    let exact = psi_character_value(lq, n, k)?;
                    let inv = Enclosure::point(int(1)).checked_div(&here)?;
                    let rec = (&Enclosure::point(int(1)) - &inv).mul_scalar(&cf.a(n + k));
                    Ok(PsiRow {
                        n,
                        k,
                        exact: crate::scalar::to_exact_string(&exact),
                        width: to_decimal(&here.width(), 20),
                        contained: here.contains(&exact),
                        inside_disk: here.is_subset_of(&disk),
                        bounded_by_two: exact.abs() <= int(2),
                        recursion_consistent: rec.intersects(&next),
                    })
                })
                .collect()
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CoeffCheck {
    /// `A_n(n+k) > 4`
    AAboveFour,
    /// `B_n(k) > 1/(2q)`
    BAboveHalfInverse,
    /// `C_n(n+k) > q^{-(k+1)} - 2`
    CLowerBound,
    /// `B_n(k) > (1 - 2q^{k+1})/q`
    BLowerBound,
    /// `A_n = C_n D_n`
    Factorization,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoeffViolation {
    pub n: usize,
    pub k: usize,
    pub check: CoeffCheck,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoeffReport {
    pub big_k: usize,
    pub points_checked: usize,
    pub violations: Vec<CoeffViolation>,
}

impl CoeffReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exact check of the coefficient inequalities for `n <= n_max`,
/// `K <= k <= k_max`; violations sorted by `(n, k)`.
pub fn verify_lemma22(lq: &LittleQLegendre, n_max: usize, k_max: usize) -> CoeffReport {
    let q = lq.q();
    let big_k = k_threshold(q).get();
    let one = Rational::one();
    let per_n: Vec<Vec<CoeffViolation>> = (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let cf = CfCoefficients::new(lq, n);
            let mut out = Vec::new();
            for k in big_k..=k_max {
                let mut fail = |check| out.push(CoeffViolation { n, k, check });
                let a = cf.a(n + k);
                let b = cf.b(k);
                if a <= int(4) {
                    fail(CoeffCheck::AAboveFour);
                }
                if a != cf.c(n + k) * cf.d(n + k) {
                    fail(CoeffCheck::Factorization);
                }
                if b <= (int(2) * q.value()).recip() {
                    fail(CoeffCheck::BAboveHalfInverse);
                }
                if cf.c(n + k) <= q.pow(-(k as i64 + 1)) - int(2) {
                    fail(CoeffCheck::CLowerBound);
                }
                if b <= (&one - int(2) * q.pow(k as i64 + 1)) / q.value() {
                    fail(CoeffCheck::BLowerBound);
                }
            }
            out
        })
        .collect();
    let count = (n_max + 1) * (k_max + 1).saturating_sub(big_k);
    CoeffReport {
        big_k,
        points_checked: count,
        violations: per_n.into_iter().flatten().collect(),
    }
}

/// `|B_n(k) - 1/q|` for `k` in `0..=k_max`.
pub fn b_limit_gaps(lq: &LittleQLegendre, n: usize, k_max: usize) -> Vec<Rational> {
    let cf = CfCoefficients::new(lq, n);
    let inv = lq.q().value().recip();
    (0..=k_max).map(|k| (cf.b(k) - &inv).abs()).collect()
}
