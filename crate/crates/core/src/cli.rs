//! Command-line front end: CSV tables for fig1-fig3, verification
//! suites and a JSON report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::characters::{self, bound_c, decay_table, k_threshold, norm_chain, verify_decay};
use crate::contfrac::{psi_identity_check, verify_lemma22};
use crate::error::{Error, Result};
use crate::fourier::{finite_identities_hold, SpectrumPoint};
use crate::hypergroup::LittleQLegendre;
use crate::idempotents::{default_k_max, idempotent, idempotent_fourier, orthogonality_check, residual_series};
use crate::recurrence::{eval_poly_phi, haar_closed_form, haar_partial_sum_closed_form, spectral_point};
use crate::scalar::{to_decimal, to_exact_string, QParam, Rational};

/// Upper index for the linearization suite.
pub const LINEARIZATION_MAX: usize = 30;
/// `psi_{n,k}` is checked for `K <= k <= K + PSI_K_SPAN`.
pub const PSI_K_SPAN: usize = 8;
/// Coefficient inequalities are checked for `K <= k <= K + COEFF_K_SPAN`.
pub const COEFF_K_SPAN: usize = 10;
/// Idempotent suites use `n <= IDEMPOTENT_N_MAX` and spectrum points `<= 8`.
pub const IDEMPOTENT_N_MAX: usize = 6;
pub const IDEMPOTENT_PROBE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Subcommand)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// l1 / l2^2 norm ratios of the characters against the constant C
    Fig1,
    /// Decay ratios and magnitudes of the characters past n
    Fig2,
    /// l1 residuals of the idempotent-span approximation of epsilon_1
    Fig3,
    /// Run all verification suites
    Verify,
    /// Run all suites and write report.json
    Report,
}

#[derive(Debug, Parser)]
#[command(name = "qhyper", version, about = "Certified computations on little q-Legendre hypergroups")]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,
    /// Parameter q as "p/r" with 0 < p < r
    #[arg(long, global = true)]
    pub q: Option<String>,
    #[arg(long = "n-max", global = true)]
    pub n_max: Option<usize>,
    #[arg(long = "k-extra", global = true)]
    pub k_extra: Option<usize>,
    /// Worpitzky truncation depth
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Largest N in the idempotent series
    #[arg(long = "series-n", global = true)]
    pub series_n: Option<usize>,
    /// Decimal places in CSV output, 1..=50
    #[arg(long, global = true)]
    pub digits: Option<u32>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat key=value config file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub command: Command,
    pub q: QParam,
    pub n_max: usize,
    pub k_extra: usize,
    pub depth: usize,
    pub series_n: usize,
    pub digits: u32,
    pub out_dir: PathBuf,
}

const CONFIG_KEYS: [&str; 7] = ["q", "n_max", "k_extra", "depth", "series_n", "digits", "out"];

/// Parses `key = value` lines; `#` starts a comment, dashes in keys are
/// read as underscores.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
        let key = k.trim().replace('-', "_");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("line {}: unknown key {key:?}", i + 1)));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn parse_knob<T: std::str::FromStr>(file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    file.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
        })
        .transpose()
}

impl RunConfig {
    /// Flags override the config file, which overrides the defaults.
    pub fn resolve(args: &Args) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                parse_config_file(&text)?
            }
            None => BTreeMap::new(),
        };
        let q_text = args
            .q
            .clone()
            .or_else(|| file.get("q").cloned())
            .unwrap_or_else(|| "2/3".to_string());
        let q: QParam = q_text
            .parse()
            .map_err(|e: Error| Error::Config(format!("q: {e}")))?;
        let default_n_max = if args.command == Command::Fig1 { 19 } else { 9 };
        let digits = match args.digits {
            Some(d) => d,
            None => parse_knob(&file, "digits")?.unwrap_or(12),
        };
        if !(1..=50).contains(&digits) {
            return Err(Error::Config(format!("digits must lie in 1..=50, got {digits}")));
        }
        let depth = match args.depth {
            Some(d) => d,
            None => parse_knob(&file, "depth")?.unwrap_or(crate::contfrac::DEFAULT_DEPTH),
        };
        if depth == 0 {
            return Err(Error::Config("depth must be positive".into()));
        }
        Ok(RunConfig {
            command: args.command,
            q,
            n_max: match args.n_max {
                Some(v) => v,
                None => parse_knob(&file, "n_max")?.unwrap_or(default_n_max),
            },
            k_extra: match args.k_extra {
                Some(v) => v,
                None => parse_knob(&file, "k_extra")?.unwrap_or(7),
            },
            depth,
            series_n: match args.series_n {
                Some(v) => v,
                None => parse_knob(&file, "series_n")?.unwrap_or(9),
            },
            digits,
            out_dir: args
                .out
                .clone()
                .or_else(|| file.get("out").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from(".")),
        })
    }
}

/// One verification suite outcome; `detail` carries the witness on failure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl SuiteResult {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        SuiteResult {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

/// A table rendered both as decimals and as exact `p/r` cells.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Option<Rational>>>,
    /// Columns holding integers, rendered without decimals.
    int_cols: &'static [usize],
}

impl Table {
    fn new(header: Vec<&'static str>, int_cols: &'static [usize]) -> Self {
        Table {
            header,
            rows: Vec::new(),
            int_cols,
        }
    }

    fn push(&mut self, row: Vec<Option<Rational>>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, digits: u32) -> (String, String) {
        let mut dec = String::new();
        let mut exact = String::new();
        let head = self.header.join(",");
        writeln!(dec, "{head}").unwrap();
        writeln!(exact, "{head}").unwrap();
        for row in &self.rows {
            let d: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(i, c)| match c {
                    None => String::new(),
                    Some(v) if self.int_cols.contains(&i) => v.to_integer().to_string(),
                    Some(v) => to_decimal(v, digits),
                })
                .collect();
            let e: Vec<String> = row
                .iter()
                .map(|c| c.as_ref().map(to_exact_string).unwrap_or_default())
                .collect();
            writeln!(dec, "{}", d.join(",")).unwrap();
            writeln!(exact, "{}", e.join(",")).unwrap();
        }
        (dec, exact)
    }

    pub fn write(&self, dir: &Path, stem: &str, digits: u32) -> Result<()> {
        fs::create_dir_all(dir)?;
        let (dec, exact) = self.render(digits);
        fs::write(dir.join(format!("{stem}.csv")), dec)?;
        fs::write(dir.join(format!("{stem}.exact")), exact)?;
        Ok(())
    }
}

fn int_cell(v: usize) -> Option<Rational> {
    Some(Rational::from_integer(v.into()))
}

pub fn fig1(lq: &LittleQLegendre, n_max: usize) -> Result<(Table, SuiteResult)> {
    let rows = norm_chain(lq, n_max)?;
    let mut t = Table::new(
        vec!["n", "l1_lo", "l1_hi", "l2sq", "ratio_lo", "ratio_hi", "C_lo", "C_hi"],
        &[0],
    );
    let mut witness = None;
    for r in &rows {
        let ratio = r.ratio();
        t.push(vec![
            int_cell(r.n),
            Some(r.l1.lo().clone()),
            Some(r.l1.hi().clone()),
            Some(r.l2_sq.clone()),
            Some(ratio.lo().clone()),
            Some(ratio.hi().clone()),
            Some(r.c.lo().clone()),
            Some(r.c.hi().clone()),
        ]);
        if witness.is_none() && !r.holds() {
            witness = Some(format!(
                "n={}: l2sq={} l1=[{}, {}] C_hi={}",
                r.n,
                to_decimal(&r.l2_sq, 12),
                to_decimal(r.l1.lo(), 12),
                to_decimal(r.l1.hi(), 12),
                to_decimal(r.c.hi(), 12)
            ));
        }
    }
    let suite = match witness {
        None => SuiteResult::new("norm-chain", true, format!("n <= {n_max}")),
        Some(w) => SuiteResult::new("norm-chain", false, w),
    };
    Ok((t, suite))
}

/// Grid `k = K..=K+k_extra`, the range where the decay bounds are
/// certified; every row is checked alongside the full decay suite.
pub fn fig2(lq: &LittleQLegendre, n_max: usize, k_extra: usize) -> (Table, SuiteResult) {
    let big_k = k_threshold(lq.q()).get();
    let mut t = Table::new(
        vec!["n", "k", "ratio_abs", "envelope", "sign", "alpha_abs", "K"],
        &[0, 1, 4, 6],
    );
    let mut witness = None;
    for p in decay_table(lq, n_max, big_k, big_k + k_extra) {
        let sign = p
            .ratio
            .as_ref()
            .map(|r| Rational::from_integer(crate::scalar::signum(r).into()));
        let ratio_abs = p.ratio.as_ref().map(|r| r.abs());
        if witness.is_none() {
            let ok_ratio = ratio_abs.as_ref().is_some_and(|r| r < &Rational::from_integer(4.into()));
            let ok_env = p.alpha.abs() <= p.envelope;
            if !ok_ratio || !ok_env {
                witness = Some(format!("n={} k={}: ratio<4 {ok_ratio}, envelope {ok_env}", p.n, p.k));
            }
        }
        t.push(vec![
            int_cell(p.n),
            int_cell(p.k),
            ratio_abs,
            Some(p.envelope.clone()),
            sign,
            Some(p.alpha.abs()),
            int_cell(big_k),
        ]);
    }
    let report = verify_decay(lq, n_max, k_extra);
    if witness.is_none() {
        if let Some(v) = report.first_violation() {
            witness = Some(format!("n={} k={}: {:?}", v.n, v.k, v.check));
        }
    }
    let suite = match witness {
        None => SuiteResult::new(
            "decay",
            true,
            format!("K={big_k}, {} points, max |ratio| {}", report.points_checked, report.max_abs_ratio),
        ),
        Some(w) => SuiteResult::new("decay", false, w),
    };
    (t, suite)
}

pub fn fig3(lq: &LittleQLegendre, series_n: usize) -> Result<(Table, SuiteResult)> {
    let rows = residual_series(lq, 1, series_n)?;
    let mut t = Table::new(vec!["N", "residual_lo", "residual_hi"], &[0]);
    for r in &rows {
        t.push(vec![
            int_cell(r.big_n),
            Some(r.residual.lo().clone()),
            Some(r.residual.hi().clone()),
        ]);
    }
    let bad = rows
        .windows(2)
        .find(|w| w[1].residual.hi() >= w[0].residual.hi());
    let suite = match bad {
        None => SuiteResult::new("residuals", true, format!("strictly decreasing over N <= {series_n}")),
        Some(w) => SuiteResult::new(
            "residuals",
            false,
            format!("N={}: residual_hi does not decrease", w[1].big_n),
        ),
    };
    Ok((t, suite))
}

fn coeff_suite(lq: &LittleQLegendre, n_max: usize) -> SuiteResult {
    let k_max = k_threshold(lq.q()).get() + COEFF_K_SPAN;
    let r = verify_lemma22(lq, n_max, k_max);
    match r.violations.first() {
        None => SuiteResult::new("cf-coefficients", true, format!("n <= {n_max}, k <= {k_max}")),
        Some(v) => SuiteResult::new("cf-coefficients", false, format!("n={} k={}: {:?}", v.n, v.k, v.check)),
    }
}

fn psi_suite(lq: &LittleQLegendre, n_max: usize, depth: usize) -> Result<SuiteResult> {
    let rows = psi_identity_check(lq, n_max, PSI_K_SPAN, depth)?;
    Ok(match rows.iter().find(|r| !r.passed()) {
        None => SuiteResult::new("psi-identity", true, format!("{} enclosures at depth {depth}", rows.len())),
        Some(r) => SuiteResult::new("psi-identity", false, format!("{r:?}")),
    })
}

fn linearization_suite(lq: &LittleQLegendre) -> SuiteResult {
    let xs: Vec<Rational> = (0..5).map(|s| spectral_point(lq.q(), s)).collect();
    match lq.hypergroup().verify_linearization(LINEARIZATION_MAX, &xs) {
        None => SuiteResult::new("linearization", true, format!("m <= n <= {LINEARIZATION_MAX}")),
        Some((m, n, what)) => SuiteResult::new("linearization", false, format!("m={m} n={n}: {what}")),
    }
}

fn idempotent_suite(lq: &LittleQLegendre, n_max: usize) -> Result<SuiteResult> {
    let top = n_max.min(IDEMPOTENT_N_MAX);
    let width = crate::scalar::ten_pow_neg(10);
    for n in 0..=top {
        let e = idempotent(lq, n, default_k_max(lq, n))?;
        for m in 0..=IDEMPOTENT_PROBE {
            let v = idempotent_fourier(lq, &e, SpectrumPoint::Index(m));
            let target = if m == n { Rational::one() } else { Rational::zero() };
            if !v.contains(&target) || v.width() >= width {
                return Ok(SuiteResult::new("idempotents", false, format!("e_{n}^ at 1-q^{m}: {v}")));
            }
        }
        for m in 0..n {
            let r = orthogonality_check(lq, m, n, IDEMPOTENT_PROBE)?;
            if !r.passed() {
                return Ok(SuiteResult::new("idempotents", false, format!("e_{m} * e_{n} not enclosing 0")));
            }
        }
    }
    Ok(SuiteResult::new("idempotents", true, format!("n <= {top}")))
}

fn cross_formula_suite(lq: &LittleQLegendre) -> SuiteResult {
    let q = lq.q();
    let xs: Vec<Rational> = (0..10).map(|s| spectral_point(q, s)).collect();
    for x in &xs {
        let seq = lq.provider().eval_sequence(x, 40);
        if let Some(n) = (0..=40).find(|&n| eval_poly_phi(q, n, x) != seq[n]) {
            return SuiteResult::new("cross-formula", false, format!("phi form differs at n={n}"));
        }
    }
    if let Some(n) = (0..=200).find(|&n| haar_closed_form(q, n) != lq.h(n)) {
        return SuiteResult::new("cross-formula", false, format!("Haar closed form differs at n={n}"));
    }
    let mut partial = Rational::zero();
    for n in 0..=100 {
        partial += lq.h(n);
        if haar_partial_sum_closed_form(q, n) != partial {
            return SuiteResult::new("cross-formula", false, format!("Haar partial sum differs at n={n}"));
        }
    }
    SuiteResult::new("cross-formula", true, "phi n <= 40, h n <= 200, partial sums n <= 100")
}

fn finite_identity_suite(lq: &LittleQLegendre) -> SuiteResult {
    match finite_identities_hold(lq, 12) {
        Ok(()) => SuiteResult::new("finite-identities", true, "n <= 12"),
        Err(n) => SuiteResult::new("finite-identities", false, format!("n={n}")),
    }
}

/// All suites, in a fixed order.
pub fn run_suites(cfg: &RunConfig, lq: &LittleQLegendre) -> Result<Vec<SuiteResult>> {
    Ok(vec![
        fig1(lq, cfg.n_max)?.1,
        fig2(lq, cfg.n_max, cfg.k_extra).1,
        coeff_suite(lq, cfg.n_max),
        psi_suite(lq, cfg.n_max, cfg.depth)?,
        linearization_suite(lq),
        idempotent_suite(lq, cfg.n_max)?,
        fig3(lq, cfg.series_n)?.1,
        cross_formula_suite(lq),
        finite_identity_suite(lq),
    ])
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    q: String,
    k_threshold: usize,
    c_lo: String,
    c_hi: String,
    n_max: usize,
    k_extra: usize,
    depth: usize,
    series_n: usize,
    suites: &'a [SuiteResult],
}

/// Runs one command; returns the suite outcomes that decide the exit code.
pub fn run(cfg: &RunConfig) -> Result<Vec<SuiteResult>> {
    let lq = LittleQLegendre::new(cfg.q.clone());
    let dir = &cfg.out_dir;
    match cfg.command {
        Command::Fig1 => {
            let (t, s) = fig1(&lq, cfg.n_max)?;
            t.write(dir, "fig1", cfg.digits)?;
            Ok(vec![s])
        }
        Command::Fig2 => {
            let (t, s) = fig2(&lq, cfg.n_max, cfg.k_extra);
            t.write(dir, "fig2", cfg.digits)?;
            Ok(vec![s])
        }
        Command::Fig3 => {
            let (t, s) = fig3(&lq, cfg.series_n)?;
            t.write(dir, "fig3", cfg.digits)?;
            Ok(vec![s])
        }
        Command::Verify => run_suites(cfg, &lq),
        Command::Report => {
            let suites = run_suites(cfg, &lq)?;
            let c = bound_c(&cfg.q);
            let report = Report {
                q: cfg.q.to_string(),
                k_threshold: characters::k_threshold(&cfg.q).get(),
                c_lo: to_decimal(c.lo(), cfg.digits),
                c_hi: to_decimal(c.hi(), cfg.digits),
                n_max: cfg.n_max,
                k_extra: cfg.k_extra,
                depth: cfg.depth,
                series_n: cfg.series_n,
                suites: &suites,
            };
            fs::create_dir_all(dir)?;
            let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
            fs::write(dir.join("report.json"), json + "\n")?;
            Ok(suites)
        }
    }
}

/// `QHYPER_THREADS`, defaulting to a single thread.
pub fn thread_count() -> Result<usize> {
    match std::env::var("QHYPER_THREADS") {
        Err(_) => Ok(1),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::Config(format!("QHYPER_THREADS must be a positive integer, got {v:?}"))),
        },
    }
}

/// Full entry point; returns the process exit code.
pub fn main_with_args(args: Args) -> i32 {
    let setup = RunConfig::resolve(&args).and_then(|cfg| {
        let threads = thread_count()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok((cfg, pool))
    });
    let (cfg, pool) = match setup {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match pool.install(|| run(&cfg)) {
        Err(e @ (Error::Config(_) | Error::Io(_))) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
        Ok(suites) => {
            let mut code = 0;
            for s in &suites {
                if s.passed {
                    println!("PASS {}: {}", s.name, s.detail);
                } else {
                    println!("FAIL {}: {}", s.name, s.detail);
                    eprintln!("witness for {}: {}", s.name, s.detail);
                    code = 1;
                }
            }
            code
        }
    }
}
