// Acceptance criteria 1-10, one PASS/FAIL line each; nonzero exit on failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::{One, Signed, Zero};
use qhyper::characters::{bound_c, norm_chain, verify_decay};
use qhyper::cli::{fig2, fig3};
use qhyper::contfrac::{b_limit_gaps, psi_identity_check, verify_lemma22, DEFAULT_DEPTH};
use qhyper::fourier::{cesaro_fn, finite_identities_hold, p4_integral, qlimit_identity, SpectrumPoint};
use qhyper::idempotents::{default_k_max, idempotent, idempotent_fourier, orthogonality_check, residual_series};
use qhyper::recurrence::{eval_poly_phi, haar_closed_form, haar_partial_sum_closed_form, spectral_point};
use qhyper::scalar::{int, rat, ten_pow_neg, to_decimal};
use qhyper::{LittleQLegendre, QParam, Rational};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn lq(p: i64, r: i64) -> LittleQLegendre {
    LittleQLegendre::new(QParam::from_ratio(p, r).unwrap())
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    ensure(
        elapsed < Duration::from_secs(limit_secs),
        format!("took {elapsed:.1?}, limit {limit_secs} s"),
    )
}

fn c1_explicit_constant() -> Outcome {
    let t = Instant::now();
    let c = bound_c(&QParam::from_ratio(2, 3).unwrap());
    let target = qhyper::Enclosure::new(int(20), rat(41, 2)).unwrap();
    ensure(c.intersects(&target), format!("C(2/3) in [{}, {}]", to_decimal(c.lo(), 8), to_decimal(c.hi(), 8)))?;
    within(t.elapsed(), 1)?;
    Ok(format!("C(2/3) in [{}, {}]", to_decimal(c.lo(), 6), to_decimal(c.hi(), 6)))
}

fn c2_norm_chain() -> Outcome {
    let t = Instant::now();
    for (p, r) in [(1, 5), (1, 2), (2, 3)] {
        let rows = norm_chain(&lq(p, r), 19).map_err(|e| e.to_string())?;
        ensure(rows.len() == 20, "missing rows")?;
        for row in &rows {
            ensure(
                row.l2_sq.is_positive() && row.holds(),
                format!("q={p}/{r} n={}: chain broken", row.n),
            )?;
        }
    }
    within(t.elapsed(), 30)?;
    Ok("q in {1/5, 1/2, 2/3}, n <= 19".into())
}

fn c3_decay() -> Outcome {
    let l = lq(2, 3);
    let report = verify_decay(&l, 9, 7);
    ensure(report.big_k == 3, format!("K = {}", report.big_k))?;
    ensure(report.points_checked == 80, format!("{} points", report.points_checked))?;
    if let Some(v) = report.first_violation() {
        return Err(format!("n={} k={}: {:?}", v.n, v.k, v.check));
    }
    let (table, suite) = fig2(&l, 9, 7);
    ensure(suite.passed, suite.detail)?;
    let (csv, exact) = table.render(12);
    let lines: Vec<&str> = csv.lines().collect();
    ensure(lines[0] == "n,k,ratio_abs,envelope,sign,alpha_abs,K", "fig2 header")?;
    ensure(lines.len() == 1 + 10 * 8 && exact.lines().count() == lines.len(), "fig2 row count")?;
    for l in &lines[1..] {
        let cells: Vec<&str> = l.split(',').collect();
        let ratio: f64 = cells[2].parse().map_err(|_| format!("fig2 cell {l}"))?;
        ensure(ratio < 4.0 && cells[6] == "3", format!("fig2 row {l}"))?;
    }
    Ok(format!("{} points, max |ratio| {}", report.points_checked, report.max_abs_ratio))
}

fn c4_cf_coefficients() -> Outcome {
    let l = lq(2, 3);
    let report = verify_lemma22(&l, 9, 13);
    if let Some(v) = report.violations.first() {
        return Err(format!("n={} k={}: {:?}", v.n, v.k, v.check));
    }
    let tol = ten_pow_neg(6);
    for n in 0..=9 {
        let gap = &b_limit_gaps(&l, n, 40)[40];
        ensure(*gap < tol, format!("n={n}: |B(40) - 1/q| = {}", to_decimal(gap, 10)))?;
    }
    Ok(format!("{} points, B gap < 1e-6 at k = 40", report.points_checked))
}

fn c5_psi() -> Outcome {
    let rows = psi_identity_check(&lq(2, 3), 9, 8, DEFAULT_DEPTH).map_err(|e| e.to_string())?;
    ensure(rows.len() == 90, format!("{} rows", rows.len()))?;
    if let Some(r) = rows.iter().find(|r| !(r.contained && r.inside_disk)) {
        return Err(format!("n={} k={}: {r:?}", r.n, r.k));
    }
    Ok(format!("{} enclosures at depth {DEFAULT_DEPTH}", rows.len()))
}

fn c6_property_p() -> Outcome {
    let t = Instant::now();
    for (p, r) in [(1, 5), (1, 2), (2, 3)] {
        let l = lq(p, r);
        let xs: Vec<Rational> = (0..5).map(|s| spectral_point(l.q(), s)).collect();
        if let Some((m, n, what)) = l.hypergroup().verify_linearization(30, &xs) {
            return Err(format!("q={p}/{r} m={m} n={n}: {what}"));
        }
    }
    within(t.elapsed(), 60)?;
    Ok(format!("m <= n <= 30, three q, {:.1?}", t.elapsed()))
}

fn c7_idempotents() -> Outcome {
    let l = lq(2, 3);
    let width = ten_pow_neg(10);
    for n in 0..=6 {
        let e = idempotent(&l, n, default_k_max(&l, n)).map_err(|e| e.to_string())?;
        for m in 0..=6 {
            let v = idempotent_fourier(&l, &e, SpectrumPoint::Index(m));
            let target = if m == n { Rational::one() } else { Rational::zero() };
            ensure(v.contains(&target) && v.width() < width, format!("e_{n}^ at 1-q^{m}: {v}"))?;
        }
        for m in 0..n {
            let r = orthogonality_check(&l, m, n, 6).map_err(|e| e.to_string())?;
            ensure(r.passed(), format!("e_{m} * e_{n} does not enclose 0"))?;
        }
    }
    let rows = residual_series(&l, 1, 9).map_err(|e| e.to_string())?;
    ensure(rows.len() == 10, "residual rows")?;
    for w in rows.windows(2) {
        ensure(w[1].residual.hi() < w[0].residual.hi(), format!("residual not decreasing at N={}", w[1].big_n))?;
    }
    let (first, last) = (rows[0].residual.hi(), rows[9].residual.hi());
    ensure(last * int(10) < *first, "residual(9) >= residual(0)/10")?;
    let (_, suite) = fig3(&l, 9).map_err(|e| e.to_string())?;
    ensure(suite.passed, suite.detail)?;
    Ok(format!("residual {} -> {}", to_decimal(first, 4), to_decimal(last, 4)))
}

fn c8_limit_identity() -> Outcome {
    let report = qlimit_identity(&lq(1, 4), 30).map_err(|e| e.to_string())?;
    let drift = &report.drift[30];
    ensure(*drift < ten_pow_neg(6), format!("drift {}", to_decimal(drift, 12)))?;
    if let Err(n) = finite_identities_hold(&lq(1, 4), 12) {
        return Err(format!("finite identities fail at n={n}"));
    }
    Ok(format!("drift(30) = {}, finite identities n <= 12", to_decimal(drift, 12)))
}

fn c9_divergence_trends() -> Outcome {
    let l = lq(1, 4);
    let threshold = int(1000);
    let mut hit = None;
    for n in 0..=60 {
        let row = p4_integral(&l, n);
        ensure(row.ratio >= row.lower_bound, format!("n={n}: ratio below lower bound"))?;
        if row.integral > threshold {
            hit = Some(n);
            break;
        }
    }
    let n = hit.ok_or("integral stays below 1e3 for n <= 60")?;
    let f = cesaro_fn(&lq(2, 3), 30, 1);
    let drift = (&f - Rational::one()).abs();
    ensure(drift < ten_pow_neg(2), format!("|f_30(1) - 1| = {}", to_decimal(&drift, 8)))?;
    Ok(format!("p4 integral > 1e3 at n={n}, |f_30(1) - 1| = {}", to_decimal(&drift, 6)))
}

fn c10_cross_formula() -> Outcome {
    let l = lq(2, 3);
    let q = l.q();
    for s in 0..10 {
        let x = spectral_point(q, s);
        let seq = l.provider().eval_sequence(&x, 40);
        if let Some(n) = (0..=40).find(|&n| eval_poly_phi(q, n, &x) != seq[n]) {
            return Err(format!("phi form differs at n={n}, point {s}"));
        }
    }
    if let Some(n) = (0..=200).find(|&n| haar_closed_form(q, n) != l.h(n)) {
        return Err(format!("Haar closed form differs at n={n}"));
    }
    let mut partial = Rational::zero();
    for n in 0..=100 {
        partial += l.h(n);
        ensure(haar_partial_sum_closed_form(q, n) == partial, format!("partial sum differs at n={n}"))?;
    }
    Ok("phi n <= 40, h n <= 200, partial sums n <= 100".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("explicit constant", c1_explicit_constant),
        ("norm chain", c2_norm_chain),
        ("character decay", c3_decay),
        ("continued fraction coefficients", c4_cf_coefficients),
        ("psi identity", c5_psi),
        ("property P", c6_property_p),
        ("idempotents", c7_idempotents),
        ("limit identity", c8_limit_identity),
        ("divergence trends", c9_divergence_trends),
        ("cross-formula consistency", c10_cross_formula),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{:.1?}]", i + 1, t.elapsed()),
            Err(detail) => {
                println!("FAIL {:>2} {name}: {detail} [{:.1?}]", i + 1, t.elapsed());
                failed += 1;
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
