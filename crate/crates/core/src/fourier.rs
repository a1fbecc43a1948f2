//! Fourier transform on the spectrum `{1 - q^m} ∪ {1}`, Plancherel checks,
//! inverse transforms of polynomials, the derivative coefficients `kappa_n`
//! and the limit behaviour of `P_n(1 - q^n)`.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergroup::{HSeq, LittleQLegendre, Norm};
use crate::poly::Poly;
use crate::recurrence::{mu_mass, spectral_point};
use crate::scalar::{
    int, q_pochhammer, q_pochhammer_inf, round_down, round_up, ten_pow_neg, Enclosure, QParam,
    Rational, ROUNDING_BITS,
};

/// A point of the dual: `1 - q^m`, or `1` itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SpectrumPoint {
    Index(usize),
    One,
}

impl SpectrumPoint {
    pub fn x(self, q: &QParam) -> Rational {
        match self {
            SpectrumPoint::Index(m) => spectral_point(q, m),
            SpectrumPoint::One => Rational::one(),
        }
    }
}

/// `f^(x) = sum_k f(k) P_k(x) h(k)`.
pub fn fourier(lq: &LittleQLegendre, f: &HSeq, x: SpectrumPoint) -> Rational {
    let Some(top) = f.max_index() else {
        return Rational::zero();
    };
    let vals = lq.provider().eval_sequence(&x.x(lq.q()), top);
    f.iter().map(|(k, v)| v * &vals[k] * lq.h(k)).sum()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlancherelCheck {
    /// `||f||_2^2`
    pub lhs: Rational,
    /// `sum_{n <= N} f^(1-q^n)^2 q^n (1-q)` widened by `||f||_1^2 q^{N+1}`.
    pub rhs: Enclosure,
}

impl PlancherelCheck {
    pub fn holds(&self) -> bool {
        self.rhs.contains(&self.lhs)
    }
}

pub fn plancherel_check(lq: &LittleQLegendre, f: &HSeq, n_trunc: usize) -> PlancherelCheck {
    let q = lq.q();
    let hg = lq.hypergroup();
    let lhs = hg.norm_p(f, Norm::L2Squared);
    let partial: Rational = (0..=n_trunc)
        .map(|n| {
            let v = fourier(lq, f, SpectrumPoint::Index(n));
            &v * &v * mu_mass(q, n)
        })
        .sum();
    let l1 = hg.norm_p(f, Norm::L1);
    let tail = &l1 * &l1 * q.pow(n_trunc as i64 + 1);
    let hi = &partial + tail;
    PlancherelCheck {
        lhs,
        rhs: Enclosure::new(partial, hi).expect("tail is nonnegative"),
    }
}

/// `sum_n c_n P_n` in the monomial basis.
pub fn p_basis_to_poly(lq: &LittleQLegendre, coeffs: &[Rational]) -> Poly {
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .fold(Poly::zero(), |acc, (n, c)| {
            &acc + &lq.provider().monomial(n).scale(c)
        })
}

/// `P^{-1}(F)(k) = int F P_k dmu`.
pub fn inverse_plancherel_poly(lq: &LittleQLegendre, f: &Poly, k: usize) -> Rational {
    let pk = lq.provider().monomial(k);
    lq.moments().integrate(&(f * &pk))
}

/// `P^{-1}(F)` as a finitely supported sequence (zero past `deg F`).
pub fn inverse_plancherel_seq(lq: &LittleQLegendre, f: &Poly) -> HSeq {
    let deg = f.degree().unwrap_or(0);
    HSeq::from_pairs((0..=deg).map(|k| (k, inverse_plancherel_poly(lq, f, k))))
}

/// `kappa_n(k) = int P_n' P_k dmu` for `k < n`; zero elsewhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KappaSeq {
    pub n: usize,
    pub values: Vec<Rational>,
}

impl KappaSeq {
    pub fn as_hseq(&self) -> HSeq {
        HSeq::from_dense(&self.values)
    }
}

pub fn kappa(lq: &LittleQLegendre, n: usize) -> KappaSeq {
    let deriv = lq.provider().monomial(n).derivative();
    let values = (0..n)
        .map(|k| inverse_plancherel_poly(lq, &deriv, k))
        .collect();
    KappaSeq { n, values }
}

/// What `kappa_n` is convolved with.
#[derive(Clone, Debug)]
pub enum ConvInput {
    Finite(HSeq),
    /// The character `alpha_x`, `x` on the spectrum.
    Character(SpectrumPoint),
}

/// `max_{m <= probe_max} |(kappa_n * phi)(m)|`.
///
/// Characters are eigenfunctions of convolution, `f * alpha_x = f^(x) alpha_x`,
/// and `kappa_n^(x) = P_n'(x)`, so the character case is exact.
pub fn kappa_conv_sup(lq: &LittleQLegendre, n: usize, phi: &ConvInput, probe_max: usize) -> Enclosure {
    let value = match phi {
        ConvInput::Finite(f) => {
            let conv = lq.hypergroup().convolve(&kappa(lq, n).as_hseq(), f);
            (0..=probe_max)
                .map(|m| conv.get(m).abs())
                .max()
                .unwrap_or_else(Rational::zero)
        }
        ConvInput::Character(x) => {
            let x = x.x(lq.q());
            let slope = lq.provider().monomial(n).derivative().eval(&x).abs();
            let peak = lq
                .provider()
                .eval_sequence(&x, probe_max)
                .into_iter()
                .map(|v| v.abs())
                .max()
                .unwrap_or_else(Rational::zero);
            slope * peak
        }
    };
    Enclosure::point(value)
}

/// `f_n(k) = h(n) int P_n^2 P_k dmu`.
pub fn cesaro_fn(lq: &LittleQLegendre, n: usize, k: usize) -> Rational {
    let pn = lq.provider().monomial(n);
    let sq = &*pn * &*pn;
    lq.h(n) * inverse_plancherel_poly(lq, &sq, k)
}

/// `F_n(k) = (1/(n+1)) sum_{j <= n} f_j(k)`.
#[allow(non_snake_case)]
pub fn cesaro_Fn(lq: &LittleQLegendre, n: usize, k: usize) -> Rational {
    let total: Rational = (0..=n).into_par_iter().map(|j| cesaro_fn(lq, j, k)).sum();
    total / int(n as i64 + 1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct P4Row {
    pub n: usize,
    /// `int p_n^4 dmu = h(n)^2 int P_n^4 dmu`
    pub integral: Rational,
    /// `integral / h(n)`
    pub ratio: Rational,
    /// `(1 - q^{2n+1}) P_n(1 - q^n)^4`
    pub lower_bound: Rational,
}

pub fn p4_integral(lq: &LittleQLegendre, n: usize) -> P4Row {
    let q = lq.q();
    let pn = lq.provider().monomial(n);
    let sq = &*pn * &*pn;
    let fourth = &sq * &sq;
    let h = lq.h(n);
    let integral = &h * &h * lq.moments().integrate(&fourth);
    let ratio = &integral / &h;
    let at = lq.eval_poly(n, &spectral_point(q, n));
    let at2 = &at * &at;
    let lower_bound = (Rational::one() - q.pow(2 * n as i64 + 1)) * &at2 * &at2;
    P4Row {
        n,
        integral,
        ratio,
        lower_bound,
    }
}

/// `gamma_k = q^{k(3k+1)/2} / (q;q)_k^3`
pub fn gamma(q: &QParam, k: usize) -> Rational {
    let e = (k * (3 * k + 1) / 2) as i64;
    let poch = q_pochhammer(q.value(), q, k);
    q.pow(e) / (&poch * &poch * &poch)
}

/// Enclosure of `(q;q)_inf^4 (gamma_0 - gamma_1)^4`.
pub fn p4_liminf_bound(q: &QParam) -> Result<Enclosure> {
    let qq = q_pochhammer_inf(q.value(), q)?;
    let d = gamma(q, 0) - gamma(q, 1);
    let sq = &qq * &qq;
    Ok((&sq * &sq).mul_scalar(&(&d * &d * &d * &d)).round_out(ROUNDING_BITS))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TailBoundKind {
    /// `gamma_k` strictly decreasing from `k = 0`; alternating-series bracket.
    Leibniz,
    /// `gamma_k <= q^{k(3k+1)/2} / (q;q)_inf^3`, summed geometrically.
    Absolute,
}

#[derive(Clone, Debug)]
pub struct QLimitReport {
    pub rhs: Enclosure,
    pub tail_kind: TailBoundKind,
    /// `P_n(1 - q^n)` for `n <= n_probe`
    pub lhs: Vec<Rational>,
    /// distance from each `lhs` value to `rhs`
    pub drift: Vec<Rational>,
}

/// Enclosure of `sum_k (-1)^k gamma_k`.
fn gamma_series(q: &QParam) -> Result<(Enclosure, TailBoundKind)> {
    let one = Rational::one();
    let tol = ten_pow_neg(40);
    let leibniz = q.pow(2) < (&one - q.value()).pow(3);
    if leibniz {
        let mut partial = Rational::zero();
        let mut k = 0usize;
        loop {
            let g = gamma(q, k);
            let next = if k.is_multiple_of(2) { &partial + &g } else { &partial - &g };
            if g <= tol {
                let (lo, hi) = if partial <= next { (partial, next) } else { (next, partial) };
                let enc = Enclosure::new(lo, hi)?.round_out(ROUNDING_BITS);
                return Ok((enc, TailBoundKind::Leibniz));
            }
            partial = next;
            k += 1;
        }
    }
    let qq = q_pochhammer_inf(q.value(), q)?;
    if !qq.lo().is_positive() {
        return Err(Error::NoTailBound(format!(
            "no positive lower bound for (q;q)_inf at q = {q}"
        )));
    }
    let inv_cube = (qq.lo() * qq.lo() * qq.lo()).recip();
    let mut partial = Rational::zero();
    let mut k = 0usize;
    loop {
        let g = gamma(q, k);
        partial = if k.is_multiple_of(2) { partial + g } else { partial - g };
        k += 1;
        // sum_{j >= k} q^{j(3j+1)/2} <= first / (1 - q^{3k+2})
        let first = q.pow((k * (3 * k + 1) / 2) as i64);
        let tail = &inv_cube * first / (&one - q.pow(3 * k as i64 + 2));
        if tail <= tol {
            let lo = round_down(&(&partial - &tail), ROUNDING_BITS);
            let hi = round_up(&(&partial + &tail), ROUNDING_BITS);
            return Ok((Enclosure::new(lo, hi)?, TailBoundKind::Absolute));
        }
    }
}

/// `lim P_n(1 - q^n) = (q;q)_inf sum_k (-1)^k gamma_k`, compared against
/// exact `P_n(1 - q^n)` for `n <= n_probe`.
pub fn qlimit_identity(lq: &LittleQLegendre, n_probe: usize) -> Result<QLimitReport> {
    let q = lq.q();
    let (series, tail_kind) = gamma_series(q)?;
    let qq = q_pochhammer_inf(q.value(), q)?;
    let rhs = (&qq * &series).round_out(ROUNDING_BITS);
    let lhs: Vec<Rational> = (0..=n_probe)
        .into_par_iter()
        .map(|n| lq.eval_poly(n, &spectral_point(q, n)))
        .collect();
    let drift = lhs.iter().map(|v| rhs.distance_to(v)).collect();
    Ok(QLimitReport {
        rhs,
        tail_kind,
        lhs,
        drift,
    })
}

/// `(q;q)_n`
fn qfact(q: &QParam, n: usize) -> Rational {
    q_pochhammer(q.value(), q, n)
}

/// `P_n(1-q^n) = sum_k (-1)^k (q;q)_n^3 q^{k(3k+1)/2} / ((q;q)_k^3 (q;q)_{n-k}^2)`
pub fn finite_limit_form(q: &QParam, n: usize) -> Rational {
    let qn = qfact(q, n);
    let cube = &qn * &qn * &qn;
    (0..=n)
        .map(|k| {
            let qk = qfact(q, k);
            let qnk = qfact(q, n - k);
            let term = &cube * q.pow((k * (3 * k + 1) / 2) as i64) / (&qk * &qk * &qk * &qnk * &qnk);
            if k.is_multiple_of(2) {
                term
            } else {
                -term
            }
        })
        .sum()
}

/// Both sides of
/// `(-1)^n q^{-n(n+1)/2} / (q;q)_n^2 P_n(1-q^n)
///   = sum_k (q^{-n};q)_{n-k} q^{k^2} / ((q;q)_k^2 (q;q)_{n-k}^2)`.
pub fn basic_hypergeometric_sides(lq: &LittleQLegendre, n: usize) -> (Rational, Rational) {
    let q = lq.q();
    let qn = qfact(q, n);
    let sign = if n.is_multiple_of(2) { int(1) } else { int(-1) };
    let lhs = sign * q.pow(-((n * (n + 1) / 2) as i64)) / (&qn * &qn)
        * lq.eval_poly(n, &spectral_point(q, n));
    let a = q.pow(-(n as i64));
    let rhs = (0..=n)
        .map(|k| {
            let qk = qfact(q, k);
            let qnk = qfact(q, n - k);
            q_pochhammer(&a, q, n - k) * q.pow((k * k) as i64) / (&qk * &qk * &qnk * &qnk)
        })
        .sum();
    (lhs, rhs)
}

/// Both sides of
/// `(q^{-n};q)_{n-k} = (-1)^{n-k} q^{(k-n)(n+k+1)/2} (q;q)_n / (q;q)_k`.
pub fn reversed_pochhammer_sides(q: &QParam, n: usize, k: usize) -> (Rational, Rational) {
    let lhs = q_pochhammer(&q.pow(-(n as i64)), q, n - k);
    let sign = if (n - k).is_multiple_of(2) { int(1) } else { int(-1) };
    let e = (k as i64 - n as i64) * (n as i64 + k as i64 + 1) / 2;
    let rhs = sign * q.pow(e) * qfact(q, n) / qfact(q, k);
    (lhs, rhs)
}

/// Exact check of the three finite identities for all `n <= n_max`.
/// Returns the first failing `n`.
pub fn finite_identities_hold(lq: &LittleQLegendre, n_max: usize) -> std::result::Result<(), usize> {
    let q = lq.q();
    for n in 0..=n_max {
        let direct = lq.eval_poly(n, &spectral_point(q, n));
        let (l, r) = basic_hypergeometric_sides(lq, n);
        let reversed_ok = (0..=n).all(|k| {
            let (a, b) = reversed_pochhammer_sides(q, n, k);
            a == b
        });
        if finite_limit_form(q, n) != direct || l != r || !reversed_ok {
            return Err(n);
        }
    }
    Ok(())
}

/// `sum_{k <= n} h(k)`, the partial sums of `||alpha_1||_2^2`.
pub fn alpha_one_l2_partial(lq: &LittleQLegendre, n: usize) -> Rational {
    (0..=n).map(|k| lq.h(k)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use proptest::prelude::*;

    fn ctx(p: i64, r: i64) -> LittleQLegendre {
        LittleQLegendre::new(QParam::from_ratio(p, r).unwrap())
    }

    #[test]
    fn fourier_examples() {
        let lq = ctx(2, 3);
        let hg = lq.hypergroup();
        let q = lq.q().clone();
        for k in 0..5 {
            for m in 0..4 {
                let x = SpectrumPoint::Index(m);
                assert_eq!(fourier(&lq, &hg.epsilon(k), x), lq.eval_poly(k, &x.x(&q)));
            }
            assert_eq!(fourier(&lq, &hg.epsilon(k), SpectrumPoint::One), int(1));
        }
        let d = hg.epsilon(0).sub(&hg.epsilon(1));
        for n in 0..8 {
            let expect = (q.value() + int(1)) * q.pow(n as i64);
            assert_eq!(fourier(&lq, &d, SpectrumPoint::Index(n)), expect);
        }
    }

    fn small_seq() -> impl Strategy<Value = HSeq> {
        prop::collection::vec((0usize..6, -5i64..6, 1i64..4), 1..5)
            .prop_map(|v| HSeq::from_pairs(v.into_iter().map(|(k, p, r)| (k, rat(p, r)))))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn fourier_is_multiplicative(f in small_seq(), g in small_seq()) {
            let lq = ctx(2, 3);
            let conv = lq.hypergroup().convolve(&f, &g);
            let mut pts: Vec<SpectrumPoint> = (0..=8).map(SpectrumPoint::Index).collect();
            pts.push(SpectrumPoint::One);
            for x in pts {
                prop_assert_eq!(fourier(&lq, &conv, x), fourier(&lq, &f, x) * fourier(&lq, &g, x));
            }
        }

        #[test]
        fn plancherel_contains(f in prop::collection::vec((0usize..10, -5i64..6, 1i64..4), 1..6)) {
            let lq = ctx(1, 2);
            let f = HSeq::from_pairs(f.into_iter().map(|(k, p, r)| (k, rat(p, r))));
            prop_assert!(plancherel_check(&lq, &f, 40).holds());
        }
    }

    #[test]
    fn plancherel_examples() {
        let lq = ctx(2, 3);
        let hg = lq.hypergroup();
        let c = plancherel_check(&lq, &hg.epsilon(0), 30);
        assert_eq!(c.lhs, int(1));
        assert!(c.holds());
        let c = plancherel_check(&lq, &hg.epsilon(1), 60);
        assert_eq!(c.lhs, rat(6, 19));
        assert!(c.holds());
        assert!(c.rhs.width() < ten_pow_neg(9));
    }

    #[test]
    fn inverse_plancherel_examples() {
        let lq = ctx(2, 3);
        let hg = lq.hypergroup();
        for n in 0..8 {
            let pn = lq.provider().monomial(n);
            assert_eq!(inverse_plancherel_seq(&lq, &pn), hg.epsilon(n));
        }
        assert_eq!(inverse_plancherel_poly(&lq, &Poly::constant(int(1)), 0), int(1));
        let p1 = lq.provider().monomial(1);
        let p1sq = (&*p1 * &*p1).scale(&lq.h(1));
        assert_eq!(inverse_plancherel_poly(&lq, &p1sq, 0), int(1));
        let mut coeffs = vec![Rational::zero(); 4];
        coeffs[3] = int(2);
        coeffs[1] = rat(-1, 3);
        let expect = hg.epsilon(3).scale(&int(2)).add(&hg.epsilon(1).scale(&rat(-1, 3)));
        assert_eq!(inverse_plancherel_seq(&lq, &p_basis_to_poly(&lq, &coeffs)), expect);
    }

    #[test]
    fn kappa_examples() {
        let lq = ctx(2, 3);
        assert!(kappa(&lq, 0).values.is_empty());
        assert_eq!(kappa(&lq, 1).values, vec![rat(5, 3)]);
        for n in 0..=15usize {
            let kap = kappa(&lq, n);
            let deriv = lq.provider().monomial(n).derivative();
            for s in 0..=n {
                let x = rat(s as i64, n as i64 + 1);
                let rhs: Rational = kap
                    .values
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * lq.eval_poly(k, &x) * lq.h(k))
                    .sum();
                assert_eq!(deriv.eval(&x), rhs, "n={n}");
            }
        }
    }

    #[test]
    fn kappa_conv_examples() {
        let lq = ctx(2, 3);
        let ones = ConvInput::Character(SpectrumPoint::One);
        let maxima: Vec<Rational> = (1..=12)
            .map(|n| kappa_conv_sup(&lq, n, &ones, 10).hi().clone())
            .collect();
        for w in maxima.windows(2) {
            assert!(w[1] >= w[0]);
        }
        let zero = ConvInput::Finite(HSeq::zero());
        assert_eq!(kappa_conv_sup(&lq, 4, &zero, 10), Enclosure::point(int(0)));
        let alpha = ConvInput::Character(SpectrumPoint::Index(1));
        let first = kappa_conv_sup(&lq, 1, &alpha, 20).hi().clone();
        let last = kappa_conv_sup(&lq, 12, &alpha, 20).hi().clone();
        assert!(last > first * int(10));
    }

    #[test]
    fn kappa_conv_character_matches_truncated_convolution() {
        // oracle: convolve with a long truncation of alpha_1 = 1 and read
        // positions far from the truncation edge
        let lq = ctx(2, 3);
        let n = 4;
        let ones = HSeq::from_dense(&vec![int(1); 14]);
        let conv = lq.hypergroup().convolve(&kappa(&lq, n).as_hseq(), &ones);
        let slope = lq.provider().monomial(n).derivative().eval(&int(1));
        for m in 0..8 {
            assert_eq!(conv.get(m), slope);
        }
    }

    #[test]
    fn cesaro_examples() {
        let lq = ctx(2, 3);
        for n in 0..8 {
            assert_eq!(cesaro_fn(&lq, n, 0), int(1));
        }
        // oracle: linearization, int P_n^2 P_k dmu = g(n, n; k) / h(k)
        for n in 0..6 {
            for k in 0..=2 * n {
                let lin = lq.hypergroup().g(n, n, k) / lq.h(k);
                assert_eq!(cesaro_fn(&lq, n, k), lq.h(n) * lin);
            }
        }
        let f30 = cesaro_fn(&lq, 30, 1);
        assert!((f30 - int(1)).abs() < rat(1, 100));
        let fs: Vec<Rational> = (0..=6).map(|j| cesaro_fn(&lq, j, 1)).collect();
        let mean = cesaro_Fn(&lq, 6, 1);
        assert!(mean >= *fs.iter().min().unwrap() && mean <= *fs.iter().max().unwrap());
    }

    #[test]
    fn p4_examples() {
        let lq = ctx(1, 4);
        let r0 = p4_integral(&lq, 0);
        assert_eq!(r0.integral, int(1));
        assert_eq!(r0.ratio, int(1));
        let bound = p4_liminf_bound(lq.q()).unwrap();
        for n in 0..=12 {
            let r = p4_integral(&lq, n);
            assert!(r.ratio >= r.lower_bound);
            if n >= 4 {
                assert!(&r.ratio > bound.lo());
            }
        }
        // oracle: Parseval over the linearization of P_n^2
        for n in 1..6 {
            let direct: Rational = (0..=2 * n)
                .map(|k| {
                    let g = lq.hypergroup().g(n, n, k);
                    &g * &g / lq.h(k)
                })
                .sum();
            assert_eq!(p4_integral(&lq, n).integral, lq.h(n) * lq.h(n) * direct);
        }
    }

    #[test]
    fn qlimit_examples() {
        let lq = ctx(1, 4);
        let q = lq.q().clone();
        assert_eq!(gamma(&q, 1) / gamma(&q, 0), rat(4, 27));
        let rep = qlimit_identity(&lq, 30).unwrap();
        assert_eq!(rep.tail_kind, TailBoundKind::Leibniz);
        assert!(rep.drift[30] < ten_pow_neg(6));
        let (a, b) = reversed_pochhammer_sides(&QParam::from_ratio(2, 3).unwrap(), 5, 2);
        assert_eq!(a, b);
        assert_eq!(finite_identities_hold(&lq, 12), Ok(()));
        assert_eq!(finite_identities_hold(&ctx(2, 3), 8), Ok(()));
        // q = 2/3 fails the Leibniz test and falls back to the absolute bound
        let rep = qlimit_identity(&ctx(2, 3), 40).unwrap();
        assert_eq!(rep.tail_kind, TailBoundKind::Absolute);
        assert!(rep.drift[40] < rep.drift[10]);
    }

    #[test]
    fn alpha_one_not_square_summable() {
        let lq = ctx(2, 3);
        let mut prev = Rational::zero();
        for n in [5, 10, 20, 40] {
            let s = alpha_one_l2_partial(&lq, n);
            assert!(s > prev);
            prev = s;
        }
        assert!(prev > int(1_000_000));
    }
}
