//! Recurrence coefficients, Haar weights, polynomial evaluation and exact
//! integration against the orthogonality measure.
//!
//! Polynomials are normalized by `P_n(1) = 1` and generated by
//! `P_0 = 1`, `P_1 = (x - b_0) / a_0` and
//! `P_1 P_n = a_n P_{n+1} + b_n P_n + c_n P_{n-1}` for `n >= 1`.
//! Orthonormal polynomials `sqrt(h(n)) P_n` are never formed; their even
//! powers are carried as `h(n) P_n^2` and `h(n)^2 P_n^4`.

use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::poly::Poly;
use crate::scalar::{int, rat, QParam, Rational};

/// Polynomial families supported by [`CoeffProvider`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    LittleQLegendre(QParam),
    /// Chebyshev polynomials of the first kind, `c_n = 1/2`.
    Chebyshev1,
    /// Ultraspherical polynomials for the parameter -1/4, `c_n = 2n / (4n + 1)`.
    UltrasphericalM14,
    /// Legendre polynomials on `[-1, 1]`, `c_n = n / (2n + 1)`.
    Legendre,
}

/// Recurrence triple `(a_n, b_n, c_n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triple {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
}

/// Memoized source of recurrence coefficients for one family.
#[derive(Debug)]
pub struct CoeffProvider {
    family: Family,
    triples: RwLock<Vec<Triple>>,
    monomials: RwLock<Vec<Arc<Poly>>>,
}

impl CoeffProvider {
    pub fn new(family: Family) -> Self {
        CoeffProvider {
            family,
            triples: RwLock::new(Vec::new()),
            monomials: RwLock::new(Vec::new()),
        }
    }

    pub fn little_q_legendre(q: QParam) -> Self {
        Self::new(Family::LittleQLegendre(q))
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// `q` for the little q-Legendre family.
    pub fn q(&self) -> Option<&QParam> {
        match &self.family {
            Family::LittleQLegendre(q) => Some(q),
            _ => None,
        }
    }

    pub fn coeffs(&self, n: usize) -> Triple {
        if let Some(t) = self.triples.read().unwrap().get(n) {
            return t.clone();
        }
        let mut memo = self.triples.write().unwrap();
        while memo.len() <= n {
            let next = compute_triple(&self.family, memo.len());
            memo.push(next);
        }
        memo[n].clone()
    }

    /// `P_1(x) = (x - b_0) / a_0`.
    pub fn p1(&self, x: &Rational) -> Rational {
        let t = self.coeffs(0);
        (x - t.b) / t.a
    }

    /// `P_n(x)` by forward recurrence.
    pub fn eval_poly(&self, n: usize, x: &Rational) -> Rational {
        self.eval_sequence(x, n).pop().unwrap()
    }

    /// `[P_0(x), ..., P_{n_max}(x)]`.
    pub fn eval_sequence(&self, x: &Rational, n_max: usize) -> Vec<Rational> {
        let mut out = Vec::with_capacity(n_max + 1);
        out.push(Rational::one());
        if n_max == 0 {
            return out;
        }
        let p1 = self.p1(x);
        out.push(p1.clone());
        for n in 1..n_max {
            let t = self.coeffs(n);
            let next = ((&p1 - &t.b) * &out[n] - &t.c * &out[n - 1]) / &t.a;
            out.push(next);
        }
        out
    }

    /// Monomial-basis expansion of `P_n`.
    pub fn monomial(&self, n: usize) -> Arc<Poly> {
        if let Some(p) = self.monomials.read().unwrap().get(n) {
            return p.clone();
        }
        let mut memo = self.monomials.write().unwrap();
        while memo.len() <= n {
            let k = memo.len();
            let next = match k {
                0 => Poly::constant(Rational::one()),
                1 => {
                    let t = self.coeffs(0);
                    Poly::linear(t.a.recip(), -(&t.b / &t.a))
                }
                _ => {
                    let t = self.coeffs(k - 1);
                    let p1 = memo[1].as_ref();
                    let shifted = &(p1 * memo[k - 1].as_ref()) - &memo[k - 1].scale(&t.b);
                    (&shifted - &memo[k - 2].scale(&t.c)).scale(&t.a.recip())
                }
            };
            memo.push(Arc::new(next));
        }
        memo[n].clone()
    }
}

fn compute_triple(family: &Family, n: usize) -> Triple {
    match family {
        Family::LittleQLegendre(q) => little_q_legendre_triple(q, n),
        Family::Chebyshev1 => symmetric_triple(n, rat(1, 2)),
        Family::UltrasphericalM14 => {
            let m = n as i64;
            symmetric_triple(n, rat(2 * m, 4 * m + 1))
        }
        Family::Legendre => {
            let m = n as i64;
            symmetric_triple(n, rat(m, 2 * m + 1))
        }
    }
}

/// Families with `P_1(x) = x`, `b_n = 0` and `a_n = 1 - c_n`.
fn symmetric_triple(n: usize, c: Rational) -> Triple {
    if n == 0 {
        return Triple {
            a: Rational::one(),
            b: Rational::zero(),
            c: Rational::zero(),
        };
    }
    Triple {
        a: Rational::one() - &c,
        b: Rational::zero(),
        c,
    }
}

fn little_q_legendre_triple(q: &QParam, n: usize) -> Triple {
    let one = Rational::one();
    let qv = q.value();
    if n == 0 {
        let d = qv + &one;
        return Triple {
            a: d.recip(),
            b: qv / &d,
            c: Rational::zero(),
        };
    }
    let n = n as i64;
    let qn = q.pow(n);
    let qn1 = q.pow(n + 1);
    let q2n1 = q.pow(2 * n + 1);
    let a = &qn * (&one + qv) * (&one - &qn1) / ((&one - &q2n1) * (&one + &qn1));
    let c = &qn * (&one + qv) * (&one - &qn) / ((&one - &q2n1) * (&one + &qn));
    let b = (&one - &qn) * (&one - &qn1) / ((&one + &qn) * (&one + &qn1));
    debug_assert_eq!(&a + &b + &c, one);
    Triple { a, b, c }
}

/// Memoized Haar weights `h(0) = 1`, `h(1) = 1 / c_1`,
/// `h(n+1) = h(n) a_n / c_{n+1}`.
#[derive(Debug)]
pub struct HaarWeights {
    provider: Arc<CoeffProvider>,
    memo: RwLock<Vec<Rational>>,
}

impl HaarWeights {
    pub fn new(provider: Arc<CoeffProvider>) -> Self {
        HaarWeights {
            provider,
            memo: RwLock::new(vec![Rational::one()]),
        }
    }

    pub fn provider(&self) -> &Arc<CoeffProvider> {
        &self.provider
    }

    pub fn weight(&self, n: usize) -> Rational {
        if let Some(h) = self.memo.read().unwrap().get(n) {
            return h.clone();
        }
        let mut memo = self.memo.write().unwrap();
        while memo.len() <= n {
            let k = memo.len();
            let next = if k == 1 {
                self.provider.coeffs(1).c.recip()
            } else {
                &memo[k - 1] * self.provider.coeffs(k - 1).a / self.provider.coeffs(k).c
            };
            memo.push(next);
        }
        memo[n].clone()
    }
}

/// Closed form `h(n) = q^{-n} (1 - q^{2n+1}) / (1 - q)`.
pub fn haar_closed_form(q: &QParam, n: usize) -> Rational {
    let n = n as i64;
    let one = Rational::one();
    q.pow(-n) * (&one - q.pow(2 * n + 1)) / (&one - q.value())
}

/// Closed form of the partial sum `h(0) + ... + h(n)`:
/// `[1 - q^{n+1} (2 - q^n - q^{n+1}) / (1 - q^{2n+1})] h(n) / (1 - q)`.
pub fn haar_partial_sum_closed_form(q: &QParam, n: usize) -> Rational {
    let m = n as i64;
    let one = Rational::one();
    let qn = q.pow(m);
    let qn1 = q.pow(m + 1);
    let bracket = &one - &qn1 * (int(2) - &qn - &qn1) / (&one - q.pow(2 * m + 1));
    bracket * haar_closed_form(q, n) / (&one - q.value())
}

/// Little q-Legendre `P_n(x)` from its terminating basic hypergeometric sum
/// `sum_k (q^{-n};q)_k (q^{n+1};q)_k / (q;q)_k^2 (q - q x)^k`.
pub fn eval_poly_phi(q: &QParam, n: usize, x: &Rational) -> Rational {
    let one = Rational::one();
    let m = n as i64;
    let a1 = q.pow(-m);
    let a2 = q.pow(m + 1);
    let z = q.value() * (&one - x);
    let mut sum = Rational::zero();
    let mut term = Rational::one();
    for k in 0..=n {
        sum += &term;
        let qk = q.pow(k as i64);
        let d = &one - q.value() * &qk;
        term *= (&one - &a1 * &qk) * (&one - &a2 * &qk) * &z / (&d * &d);
    }
    sum
}

/// Spectral point `1 - q^m`.
pub fn spectral_point(q: &QParam, m: usize) -> Rational {
    Rational::one() - q.pow(m as i64)
}

/// Point mass `mu({1 - q^n}) = q^n (1 - q)`.
pub fn mu_mass(q: &QParam, n: usize) -> Rational {
    q.pow(n as i64) * (Rational::one() - q.value())
}

/// Closed-form moment `int x^j dmu = sum_i C(j,i) (-1)^i (1-q)/(1-q^{i+1})`.
pub fn mu_moment(q: &QParam, j: usize) -> Rational {
    let one = Rational::one();
    let one_minus_q = &one - q.value();
    let mut binom = BigInt::one();
    let mut sum = Rational::zero();
    for i in 0..=j {
        let term = &one_minus_q / (&one - q.pow(i as i64 + 1));
        let signed = Rational::from_integer(binom.clone()) * term;
        if i % 2 == 0 {
            sum += signed;
        } else {
            sum -= signed;
        }
        binom = binom * BigInt::from(j - i) / BigInt::from(i + 1);
    }
    sum
}

/// Memoized moments of the little q-Legendre measure.
#[derive(Debug)]
pub struct MomentTable {
    q: QParam,
    memo: RwLock<Vec<Rational>>,
}

impl MomentTable {
    pub fn new(q: QParam) -> Self {
        MomentTable {
            q,
            memo: RwLock::new(Vec::new()),
        }
    }

    pub fn moment(&self, j: usize) -> Rational {
        if let Some(m) = self.memo.read().unwrap().get(j) {
            return m.clone();
        }
        let mut memo = self.memo.write().unwrap();
        while memo.len() <= j {
            let next = mu_moment(&self.q, memo.len());
            memo.push(next);
        }
        memo[j].clone()
    }

    /// Exact `int F dmu` for a polynomial `F`.
    pub fn integrate(&self, f: &Poly) -> Rational {
        if let Some(d) = f.degree() {
            self.moment(d);
        }
        let memo = self.memo.read().unwrap();
        f.coeffs()
            .iter()
            .zip(memo.iter())
            .map(|(c, m)| c * m)
            .sum()
    }
}
