//! Linearization coefficients, translation and convolution on `l^1(h)`.
//!
//! The linearization coefficients `g(m, n; k)` of
//! `P_m P_n = sum_{k=|m-n|}^{m+n} g(m, n; k) P_k` are computed by induction
//! on `m`:
//!
//! ```text
//! P_{m+1} P_n = (P_1 (P_m P_n) - b_m P_m P_n - c_m P_{m-1} P_n) / a_m
//! ```
//!
//! where multiplication by `P_1` acts on the `P`-basis through the
//! three-term recurrence.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::recurrence::{CoeffProvider, Family, HaarWeights, MomentTable};
use crate::scalar::{QParam, Rational};

/// Coefficients `g(m, n; k)` for `k` in `|m-n| ..= m+n`, stored as an
/// integer vector over one positive denominator in lowest terms.
#[derive(Debug)]
pub struct LinRow {
    start: usize,
    numers: Vec<BigInt>,
    denom: BigInt,
    coeffs: OnceLock<Vec<Rational>>,
}

impl LinRow {
    fn new(start: usize, mut numers: Vec<BigInt>, mut denom: BigInt) -> Self {
        if denom.is_negative() {
            denom = -denom;
            numers.iter_mut().for_each(|v| *v = -&*v);
        }
        let mut g = denom.clone();
        for v in &numers {
            if g.is_one() {
                break;
            }
            if !v.is_zero() {
                g = g.gcd(&(v % &g));
            }
        }
        if !g.is_one() {
            numers.iter_mut().for_each(|v| *v /= &g);
            denom /= &g;
        }
        LinRow {
            start,
            numers,
            denom,
            coeffs: OnceLock::new(),
        }
    }

    /// First index of the band, `|m - n|`.
    pub fn start(&self) -> usize {
        self.start
    }

    /// Last index of the band, `m + n`.
    pub fn end(&self) -> usize {
        self.start + self.numers.len() - 1
    }

    /// Numerators over [`LinRow::denom`], indexed from `start`.
    pub fn numers(&self) -> &[BigInt] {
        &self.numers
    }

    pub fn denom(&self) -> &BigInt {
        &self.denom
    }

    /// First `k` with `g(m, n; k) < 0`.
    pub fn first_negative(&self) -> Option<usize> {
        self.numers
            .iter()
            .position(|v| v.is_negative())
            .map(|i| self.start + i)
    }

    /// `sum_k g(m, n; k) == 1`, decided on integers.
    pub fn sums_to_one(&self) -> bool {
        self.numers.iter().sum::<BigInt>() == self.denom
    }

    /// `g(m, n; k)`, zero outside the band.
    pub fn get(&self, k: usize) -> Rational {
        k.checked_sub(self.start)
            .and_then(|i| self.coeffs().get(i))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &[Rational] {
        self.coeffs.get_or_init(|| {
            self.numers
                .iter()
                .map(|v| Rational::new(v.clone(), self.denom.clone()))
                .collect()
        })
    }

    /// `(k, g(m, n; k))` over the band.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.coeffs().iter().enumerate().map(move |(i, c)| (self.start + i, c))
    }
}

impl PartialEq for LinRow {
    fn eq(&self, other: &Self) -> bool {
        self.start == other.start && self.numers == other.numers && self.denom == other.denom
    }
}

impl Eq for LinRow {}

/// Recurrence coefficients scaled to integers over a common denominator
/// `l`; slot 0 holds the action of `P_1` on `P_0`, i.e. `(l, 0, 0)`.
#[derive(Debug, Default)]
struct ScaledCoeffs {
    l: BigInt,
    a: Vec<BigInt>,
    b: Vec<BigInt>,
    c: Vec<BigInt>,
}

impl ScaledCoeffs {
    fn build(provider: &CoeffProvider, top: usize) -> Self {
        let triples: Vec<_> = (0..=top).map(|k| provider.coeffs(k)).collect();
        let l = triples.iter().skip(1).fold(BigInt::one(), |acc, t| {
            acc.lcm(t.a.denom()).lcm(t.b.denom()).lcm(t.c.denom())
        });
        let scale = |x: &Rational| x.numer() * (&l / x.denom());
        let mut out = ScaledCoeffs {
            a: vec![l.clone()],
            b: vec![BigInt::zero()],
            c: vec![BigInt::zero()],
            l: l.clone(),
        };
        for t in &triples[1..] {
            out.a.push(scale(&t.a));
            out.b.push(scale(&t.b));
            out.c.push(scale(&t.c));
        }
        out
    }

    fn top(&self) -> usize {
        self.a.len().saturating_sub(1)
    }
}

/// Memoized `g(m, n; .)` keyed by `m <= n`; symmetry supplies the rest.
///
/// Rows for a fixed `n` are built by the induction on `m`, so the table is
/// organized by column `n`, each holding rows `0..=m` computed so far. The
/// induction runs on integers; see [`ScaledCoeffs`].
#[derive(Debug)]
pub struct LinearizationTable {
    provider: Arc<CoeffProvider>,
    columns: RwLock<HashMap<usize, Vec<Arc<LinRow>>>>,
    scaled: RwLock<Arc<ScaledCoeffs>>,
}

impl LinearizationTable {
    pub fn new(provider: Arc<CoeffProvider>) -> Self {
        LinearizationTable {
            provider,
            columns: RwLock::new(HashMap::new()),
            scaled: RwLock::new(Arc::new(ScaledCoeffs::default())),
        }
    }

    fn scaled(&self, top: usize) -> Arc<ScaledCoeffs> {
        {
            let s = self.scaled.read().unwrap();
            if !s.a.is_empty() && s.top() >= top {
                return s.clone();
            }
        }
        let mut s = self.scaled.write().unwrap();
        if s.a.is_empty() || s.top() < top {
            *s = Arc::new(ScaledCoeffs::build(&self.provider, top.max(2 * s.top())));
        }
        s.clone()
    }

    pub fn row(&self, m: usize, n: usize) -> Arc<LinRow> {
        let (m, n) = if m <= n { (m, n) } else { (n, m) };
        if let Some(row) = self
            .columns
            .read()
            .unwrap()
            .get(&n)
            .and_then(|col| col.get(m))
        {
            return row.clone();
        }
        let sc = self.scaled(m + n + 1);
        let mut columns = self.columns.write().unwrap();
        let col = columns.entry(n).or_default();
        if col.is_empty() {
            col.push(Arc::new(LinRow::new(n, vec![BigInt::one()], BigInt::one())));
        }
        while col.len() <= m {
            let j = col.len() - 1;
            let next = if j == 0 {
                let w = times_p1(&sc, &col[0], None);
                LinRow::new(n - 1, w, sc.l.clone())
            } else {
                // row_{j+1} = (P_1 row_j - b_j row_j - c_j row_{j-1}) / a_j
                let (cur, prev) = (&col[j], &col[j - 1]);
                let d = cur.denom.lcm(&prev.denom);
                let u = &d / &cur.denom;
                let v = &d / &prev.denom;
                let mut w = times_p1(&sc, cur, Some(&sc.b[j]));
                let off = prev.start - (n - j - 1);
                for x in w.iter_mut() {
                    *x *= &u;
                }
                let cv = &sc.c[j] * &v;
                for (i, x) in prev.numers.iter().enumerate() {
                    if !x.is_zero() {
                        w[off + i] -= &cv * x;
                    }
                }
                LinRow::new(n - j - 1, w, &sc.a[j] * d)
            };
            col.push(Arc::new(next));
        }
        col[m].clone()
    }
}

/// Numerators of `(P_1 - b) row` over `l * row.denom`, on the band widened
/// by one on each side; `b` is subtracted when given.
fn times_p1(sc: &ScaledCoeffs, row: &LinRow, b: Option<&BigInt>) -> Vec<BigInt> {
    let lo = row.start.saturating_sub(1);
    let hi = row.end() + 1;
    let mut out = vec![BigInt::zero(); hi - lo + 1];
    for (i, x) in row.numers.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        let k = row.start + i;
        out[k + 1 - lo] += &sc.a[k] * x;
        let diag = match b {
            Some(b) => &sc.b[k] - b,
            None => sc.b[k].clone(),
        };
        out[k - lo] += diag * x;
        if k >= 1 {
            out[k - 1 - lo] += &sc.c[k] * x;
        }
    }
    out
}

/// Outcome of the nonnegativity check on linearization coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PropertyP {
    Holds,
    /// Lexicographically first `(m, n, k)` with `g(m, n; k) < 0`.
    Violated {
        m: usize,
        n: usize,
        k: usize,
        value: Rational,
    },
}

/// Finitely supported `f: N_0 -> Q`; only nonzero values are stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HSeq {
    values: BTreeMap<usize, Rational>,
}

impl HSeq {
    pub fn zero() -> Self {
        HSeq::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, Rational)>>(pairs: I) -> Self {
        let mut s = HSeq::zero();
        for (k, v) in pairs {
            s.add_at(k, &v);
        }
        s
    }

    /// Values `v[k]` at indices `0..v.len()`.
    pub fn from_dense(values: &[Rational]) -> Self {
        Self::from_pairs(values.iter().cloned().enumerate())
    }

    /// Dirac function `delta_k`.
    pub fn delta(k: usize) -> Self {
        Self::from_pairs([(k, Rational::one())])
    }

    pub fn get(&self, k: usize) -> Rational {
        self.values.get(&k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.values.iter().map(|(k, v)| (*k, v))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.keys().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min_index(&self) -> Option<usize> {
        self.values.keys().next().copied()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.values.keys().next_back().copied()
    }

    pub fn add_at(&mut self, k: usize, v: &Rational) {
        if v.is_zero() {
            return;
        }
        let entry = self.values.entry(k).or_insert_with(Rational::zero);
        *entry += v;
        if entry.is_zero() {
            self.values.remove(&k);
        }
    }

    pub fn scale(&self, c: &Rational) -> HSeq {
        if c.is_zero() {
            return HSeq::zero();
        }
        HSeq {
            values: self.values.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    pub fn add(&self, other: &HSeq) -> HSeq {
        let mut out = self.clone();
        for (k, v) in other.iter() {
            out.add_at(k, v);
        }
        out
    }

    pub fn sub(&self, other: &HSeq) -> HSeq {
        self.add(&other.scale(&-Rational::one()))
    }

    /// `sup |f(k)|`.
    pub fn sup_norm(&self) -> Rational {
        self.values
            .values()
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// Which `l^p(h)` norm to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    L1,
    /// Returned squared so the value stays rational.
    L2Squared,
}

/// A polynomial hypergroup on `N_0`: recurrence, Haar weights and
/// linearization coefficients of one family.
#[derive(Debug)]
pub struct Hypergroup {
    provider: Arc<CoeffProvider>,
    haar: HaarWeights,
    lin: LinearizationTable,
}

impl Hypergroup {
    pub fn new(family: Family) -> Self {
        let provider = Arc::new(CoeffProvider::new(family));
        Hypergroup {
            haar: HaarWeights::new(provider.clone()),
            lin: LinearizationTable::new(provider.clone()),
            provider,
        }
    }

    pub fn provider(&self) -> &Arc<CoeffProvider> {
        &self.provider
    }

    pub fn haar_weights(&self) -> &HaarWeights {
        &self.haar
    }

    pub fn h(&self, n: usize) -> Rational {
        self.haar.weight(n)
    }

    pub fn linearize(&self, m: usize, n: usize) -> Arc<LinRow> {
        self.lin.row(m, n)
    }

    pub fn g(&self, m: usize, n: usize, k: usize) -> Rational {
        self.lin.row(m, n).get(k)
    }

    /// `epsilon_k = delta_k / h(k)`.
    pub fn epsilon(&self, k: usize) -> HSeq {
        HSeq::from_pairs([(k, self.h(k).recip())])
    }

    /// Checks `g(m, n; k) >= 0` for all `m <= n <= max`.
    pub fn check_property_p(&self, max: usize) -> PropertyP {
        for m in 0..=max {
            for n in m..=max {
                let row = self.linearize(m, n);
                if let Some(k) = row.first_negative() {
                    let value = row.get(k);
                    return PropertyP::Violated { m, n, k, value };
                }
            }
        }
        PropertyP::Holds
    }

    /// For all `m <= n <= max`: `g(m, n; .) >= 0`, `sum_k g(m, n; k) = 1`,
    /// and `sum_k g(m, n; k) P_k(x) = P_m(x) P_n(x)` at each of `xs`.
    /// Returns the first failing `(m, n)` with a label.
    pub fn verify_linearization(&self, max: usize, xs: &[Rational]) -> Option<(usize, usize, &'static str)> {
        if let PropertyP::Violated { m, n, .. } = self.check_property_p(max) {
            return Some((m, n, "negative coefficient"));
        }
        // P_k(x) scaled to integers over a common e per point
        let tables: Vec<(BigInt, Vec<BigInt>)> = xs
            .iter()
            .map(|x| {
                let p = self.provider.eval_sequence(x, 2 * max);
                let e = p.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
                let ints = p.iter().map(|v| v.numer() * (&e / v.denom())).collect();
                (e, ints)
            })
            .collect();
        for m in 0..=max {
            for n in m..=max {
                let row = self.linearize(m, n);
                if !row.sums_to_one() {
                    return Some((m, n, "row sum differs from 1"));
                }
                for (e, p) in &tables {
                    let lhs: BigInt = row
                        .numers()
                        .iter()
                        .zip(&p[row.start()..])
                        .map(|(g, pk)| g * pk)
                        .sum();
                    if lhs * e != &p[m] * &p[n] * row.denom() {
                        return Some((m, n, "spectral evaluation mismatch"));
                    }
                }
            }
        }
        None
    }

    /// `T_n f(m) = sum_k g(m, n; k) f(k)`.
    pub fn translate(&self, f: &HSeq, n: usize) -> HSeq {
        let (Some(lo), Some(hi)) = (f.min_index(), f.max_index()) else {
            return HSeq::zero();
        };
        let mut out = HSeq::zero();
        for m in lo.saturating_sub(n)..=hi + n {
            let row = self.linearize(m, n);
            let v: Rational = row
                .iter()
                .filter_map(|(k, g)| f.values.get(&k).map(|fk| g * fk))
                .sum();
            out.add_at(m, &v);
        }
        out
    }

    /// `(f * g)(n) = sum_k T_n f(k) g(k) h(k)`.
    pub fn convolve(&self, f: &HSeq, g: &HSeq) -> HSeq {
        let (Some(fmax), Some(gmax)) = (f.max_index(), g.max_index()) else {
            return HSeq::zero();
        };
        let weighted: Vec<(usize, Rational)> = g.iter().map(|(k, v)| (k, v * self.h(k))).collect();
        let mut out = HSeq::zero();
        for n in 0..=fmax + gmax {
            let mut acc = Rational::zero();
            for (k, gk) in &weighted {
                let row = self.linearize(*k, n);
                for (j, fj) in f.iter() {
                    if j < row.start() {
                        continue;
                    }
                    if j > row.end() {
                        break;
                    }
                    acc += row.get(j) * fj * gk;
                }
            }
            out.add_at(n, &acc);
        }
        out
    }

    /// `(f * g)(n)` at a single position; only rows `(n, k)` are needed.
    pub fn convolve_at(&self, f: &HSeq, g: &HSeq, n: usize) -> Rational {
        let (Some(lo), Some(hi)) = (f.min_index(), f.max_index()) else {
            return Rational::zero();
        };
        // f as integers over one denominator, so the inner sums stay integral
        let fd = f.iter().fold(BigInt::one(), |acc, (_, v)| acc.lcm(v.denom()));
        let mut fi = vec![BigInt::zero(); hi - lo + 1];
        for (j, v) in f.iter() {
            fi[j - lo] = v.numer() * (&fd / v.denom());
        }
        let mut acc = Rational::zero();
        for (k, gk) in g.iter() {
            let row = self.linearize(n, k);
            let t: BigInt = row
                .numers()
                .iter()
                .enumerate()
                .filter_map(|(i, c)| {
                    let j = row.start() + i;
                    (lo..=hi).contains(&j).then(|| c * &fi[j - lo])
                })
                .sum();
            if !t.is_zero() {
                acc += Rational::new(t, row.denom() * &fd) * gk * self.h(k);
            }
        }
        acc
    }

    /// `sum |f(k)| h(k)` or `sum f(k)^2 h(k)`.
    pub fn norm_p(&self, f: &HSeq, p: Norm) -> Rational {
        f.iter()
            .map(|(k, v)| match p {
                Norm::L1 => v.abs() * self.h(k),
                Norm::L2Squared => v * v * self.h(k),
            })
            .sum()
    }

    /// `sum f(k) h(k)`, preserved by translation.
    pub fn haar_integral(&self, f: &HSeq) -> Rational {
        f.iter().map(|(k, v)| v * self.h(k)).sum()
    }
}

/// The little q-Legendre hypergroup together with its measure moments.
#[derive(Debug)]
pub struct LittleQLegendre {
    q: QParam,
    hypergroup: Hypergroup,
    moments: MomentTable,
}

impl LittleQLegendre {
    pub fn new(q: QParam) -> Self {
        LittleQLegendre {
            hypergroup: Hypergroup::new(Family::LittleQLegendre(q.clone())),
            moments: MomentTable::new(q.clone()),
            q,
        }
    }

    pub fn q(&self) -> &QParam {
        &self.q
    }

    pub fn hypergroup(&self) -> &Hypergroup {
        &self.hypergroup
    }

    pub fn provider(&self) -> &Arc<CoeffProvider> {
        self.hypergroup.provider()
    }

    pub fn moments(&self) -> &MomentTable {
        &self.moments
    }

    pub fn h(&self, n: usize) -> Rational {
        self.hypergroup.h(n)
    }

    pub fn coeffs(&self, n: usize) -> crate::recurrence::Triple {
        self.provider().coeffs(n)
    }

    pub fn eval_poly(&self, n: usize, x: &Rational) -> Rational {
        self.provider().eval_poly(n, x)
    }
}
