//! The acceptance criteria as a registry of runnable checks.
//!
//! Every criterion produces a list of [`Check`]s, each a measured value
//! against a pinned bound. A criterion passes when all of its checks pass.
//! Failures are collected, never fail-fast.

use std::time::Instant;

use num::{BigInt, BigRational, ToPrimitive};
use serde::Serialize;

use crate::codec::{self, backbone, decode, encode, LabeledOneTree};
use crate::distributions::{self, cdf_with_error, density_integral, DistOptions, Law};
use crate::enumerate;
use crate::error::{Error, Result};
use crate::gf::numeric::NumericGf;
use crate::gf::skeleton::exact_min_skeleton_distribution;
use crate::gf::SeriesGf;
use crate::quad::QuadOptions;
use crate::sampler::{self, chi_square, empirical_distributions, Sampler, SamplerConfig, WeightedCdf};
use crate::scaling::{self, ResidualGrid, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Quick,
    Full,
}

impl std::str::FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Profile::Quick),
            "full" => Ok(Profile::Full),
            other => Err(Error::InvalidArgument(format!("unknown profile {other:?}"))),
        }
    }
}

/// Tunable inputs of the suite. Tolerances are not among them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Settings {
    /// Denominator of the small-`L` law `F1 ~ L^4 / d`; perturbing it must fail criterion 9.
    pub small_l_denominator: f64,
    pub seed: u64,
    pub sample_n: usize,
    pub samples: u64,
    pub chi_square_draws: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            small_l_denominator: scaling::SMALL_L_DENOMINATOR,
            seed: 1,
            sample_n: 10_000,
            samples: 10_000,
            chi_square_draws: 1_000_000,
        }
    }
}

impl Settings {
    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("override {assignment:?} is not key=value")))?;
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad value {value:?} for {key}")))
        }
        match key.trim() {
            "small_l_denominator" => self.small_l_denominator = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "sample_n" => self.sample_n = parse(key, value)?,
            "samples" => self.samples = parse(key, value)?,
            "chi_square_draws" => self.chi_square_draws = parse(key, value)?,
            other => return Err(Error::InvalidArgument(format!("unknown override {other:?}"))),
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bound {
    AtMost { limit: f64 },
    AtLeast { limit: f64 },
    Within { lo: f64, hi: f64 },
}

impl Bound {
    fn margin(&self, v: f64) -> f64 {
        if v.is_nan() {
            return f64::NEG_INFINITY;
        }
        match *self {
            Bound::AtMost { limit } => limit - v,
            Bound::AtLeast { limit } => v - limit,
            Bound::Within { lo, hi } => (v - lo).min(hi - v),
        }
    }

    fn scale(&self) -> f64 {
        match *self {
            Bound::AtMost { limit } | Bound::AtLeast { limit } => limit.abs().max(1e-300),
            Bound::Within { lo, hi } => (hi - lo).abs().max(1e-300),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub what: String,
    pub value: f64,
    pub bound: Bound,
    pub margin: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(what: impl Into<String>, value: f64, bound: Bound) -> Self {
        let margin = bound.margin(value);
        Check { what: what.into(), value, bound, margin, passed: margin >= 0.0 }
    }

    fn at_most(what: impl Into<String>, value: f64, limit: f64) -> Self {
        Check::new(what, value, Bound::AtMost { limit })
    }

    fn at_least(what: impl Into<String>, value: f64, limit: f64) -> Self {
        Check::new(what, value, Bound::AtLeast { limit })
    }

    fn within(what: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Check::new(what, value, Bound::Within { lo, hi })
    }

    fn count(what: impl Into<String>, failures: u64) -> Self {
        Check::at_most(what, failures as f64, 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    /// Value, bound and margin of the deciding check: the first failure, else the tightest pass.
    pub value: f64,
    pub bound: Option<Bound>,
    pub margin: f64,
    pub seconds: f64,
    pub budget_seconds: f64,
    pub checks: Vec<Check>,
    pub error: Option<String>,
}

impl CriterionReport {
    /// One human-readable line.
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let deciding = self
            .checks
            .iter()
            .find(|c| !c.passed)
            .or_else(|| self.tightest())
            .map(|c| format!("{} = {:.6e} ({})", c.what, c.value, describe(&c.bound)))
            .unwrap_or_else(|| self.error.clone().unwrap_or_default());
        format!("[{status}] criterion {:>2} {:<34} {:>8.2}s  {}", self.id, self.name, self.seconds, deciding)
    }

    fn tightest(&self) -> Option<&Check> {
        self.checks
            .iter()
            .min_by(|a, b| (a.margin / a.bound.scale()).total_cmp(&(b.margin / b.bound.scale())))
    }
}

fn describe(b: &Bound) -> String {
    match *b {
        Bound::AtMost { limit } => format!("<= {limit:e}"),
        Bound::AtLeast { limit } => format!(">= {limit:e}"),
        Bound::Within { lo, hi } => format!("in [{lo}, {hi}]"),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub profile: Profile,
    pub settings: Settings,
    pub passed: bool,
    pub criteria: Vec<CriterionReport>,
}

impl Report {
    pub fn failed_ids(&self) -> Vec<u32> {
        self.criteria.iter().filter(|c| !c.passed).map(|c| c.id).collect()
    }
}

type Runner = fn(&Ctx) -> Result<Vec<Check>>;

pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub in_quick: bool,
    pub budget_seconds: f64,
    run: Runner,
}

struct Ctx<'a> {
    profile: Profile,
    settings: &'a Settings,
}

pub fn registry() -> Vec<Criterion> {
    let c = |id, name, in_quick, budget_seconds, run: Runner| Criterion { id, name, in_quick, budget_seconds, run };
    vec![
        c(1, "exact series identities", true, 10.0, series_identities),
        c(2, "counting bijection", true, 60.0, counting),
        c(3, "coefficient asymptotics", false, 30.0, asymptotics),
        c(4, "codec round trips", true, 60.0, codec_round_trips),
        c(5, "loop theorem", true, 300.0, loop_theorem),
        c(6, "scaling-limit convergence", true, 30.0, scaling_convergence),
        c(7, "differential identities", true, 10.0, differential_identities),
        c(8, "quadrature oracles", false, 300.0, quadrature_oracles),
        c(9, "distribution expansions", true, 60.0, expansions),
        c(10, "normalization", false, 60.0, normalization),
        c(11, "exact finite-size law", false, 300.0, finite_size_law),
        c(12, "statistical", false, 900.0, statistical),
    ]
}

/// Runs one criterion, catching errors into a failed report.
pub fn run_criterion(c: &Criterion, profile: Profile, settings: &Settings) -> CriterionReport {
    let start = Instant::now();
    let outcome = (c.run)(&Ctx { profile, settings });
    let seconds = start.elapsed().as_secs_f64();
    let (checks, error) = match outcome {
        Ok(checks) => (checks, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    let passed = error.is_none() && !checks.is_empty() && checks.iter().all(|k| k.passed);
    let mut report = CriterionReport {
        id: c.id,
        name: c.name,
        passed,
        value: f64::NAN,
        bound: None,
        margin: f64::NEG_INFINITY,
        seconds,
        budget_seconds: c.budget_seconds,
        checks,
        error,
    };
    let deciding = report.checks.iter().find(|k| !k.passed).or_else(|| report.tightest()).cloned();
    if let Some(k) = deciding {
        report.value = k.value;
        report.bound = Some(k.bound);
        report.margin = k.margin;
    }
    report
}

/// Runs the criteria of `profile`, calling `progress` after each one.
pub fn run(profile: Profile, settings: &Settings, mut progress: impl FnMut(&CriterionReport)) -> Report {
    let mut criteria = Vec::new();
    for c in registry() {
        if profile == Profile::Quick && !c.in_quick {
            continue;
        }
        let r = run_criterion(&c, profile, settings);
        progress(&r);
        criteria.push(r);
    }
    let passed = criteria.iter().all(|c| c.passed);
    Report { profile, settings: settings.clone(), passed, criteria }
}

fn series_identities(_: &Ctx) -> Result<Vec<Check>> {
    let s = SeriesGf::new(20);
    let checks = [
        ("R recursion", s.check_r_recursion(10)),
        ("X recursion", s.check_x_recursion(10)),
        ("X-tilde closed vs product", s.check_xtilde(10)),
        ("K recursion", s.check_k_recursion(10)),
        ("k_p recursion", s.check_kp_recursion(10)),
    ];
    Ok(checks.into_iter().map(|(what, c)| Check::count(what, u64::from(!c.ok))).collect())
}

fn coefficient(s: &crate::FormalSeries, n: usize) -> BigRational {
    s.coeff(n).clone()
}

fn counting(_: &Ctx) -> Result<Vec<Check>> {
    let s = SeriesGf::new(6);
    let (w1, w2) = s.w_double_sums();
    let (w1c, w2c) = (s.w1_closed(), s.w2_closed());
    let (pointed, _) = s.q1();
    let mut bad_total = 0;
    let mut bad_closed = 0;
    let mut bad_kind = 0;
    for n in 2..=6 {
        let table = enumerate::enum_one_trees(n)?;
        let scale = BigRational::from_integer(BigInt::from(2 * n));
        let count = BigRational::from_integer(BigInt::from(table.total()));
        let degenerate = BigRational::from_integer(BigInt::from(table.marginal(0, 1)));
        if count != &scale * &(coefficient(&w1, n) + coefficient(&w2, n)) {
            bad_total += 1;
        }
        if count != &scale * &coefficient(&pointed, n) || count != &scale * &(coefficient(&w1c, n) + coefficient(&w2c, n)) {
            bad_closed += 1;
        }
        if degenerate != &scale * &coefficient(&w2, n) {
            bad_kind += 1;
        }
    }
    Ok(vec![
        Check::count("n=2..6 with enumeration != 2n[g^n](W1+W2)", bad_total),
        Check::count("n=2..6 with enumeration != 2n[g^n]Q1 (closed forms)", bad_closed),
        Check::count("n=2..6 with degenerate count != 2n[g^n]W2", bad_kind),
    ])
}

fn ratio_over_power(c: &BigRational, base: u64, n: usize) -> f64 {
    let p = BigInt::from(base).pow(n as u32);
    let q = c / BigRational::from_integer(p);
    q.to_f64().unwrap_or(f64::NAN)
}

fn asymptotics(_: &Ctx) -> Result<Vec<Check>> {
    let n = 200;
    let s = SeriesGf::new(n);
    let (_, rooted) = s.q1();
    let q = ratio_over_power(rooted.coeff(n), 12, n) * 24.0;
    let w2 = ratio_over_power(s.w2_closed().coeff(n), 12, n) * 32.0 * (std::f64::consts::PI * n as f64).sqrt() / 3.0;
    Ok(vec![
        Check::within("[g^200]Q1_rooted * 24 / 12^200", q, 0.95, 1.05),
        Check::within("[g^200]W2 * 32 sqrt(200 pi) / (3 12^200)", w2, 0.9, 1.1),
    ])
}

/// Failures of the bijection on one tree: decode, labels, encode, decode again.
pub fn codec_failures(t: &LabeledOneTree) -> u64 {
    let Ok(q) = decode(t) else { return 1 };
    let m = &q.map;
    let shape_ok = m.genus().ok() == Some(1)
        && m.is_bipartite()
        && m.is_quadrangulation()
        && m.num_faces() == t.num_edges()
        && m.num_vertices() == t.map().num_vertices() + 1;
    let walk = t.corner_walk();
    let labels_ok = walk
        .iter()
        .enumerate()
        .all(|(j, &h)| m.label(m.vertex(2 * j)) == Some(t.label_of_half_edge(h)));
    let round_trip = match encode(&q) {
        Ok(back) => back == *t && decode(&back).map(|q2| q2 == q).unwrap_or(false),
        Err(_) => false,
    };
    u64::from(!shape_ok) + u64::from(!labels_ok) + u64::from(!round_trip)
}

fn codec_round_trips(_: &Ctx) -> Result<Vec<Check>> {
    let mut failures = 0;
    let mut objects = 0;
    for n in 2..=6 {
        enumerate::for_each_labeled_one_face_map(n, 1, |t| {
            failures += codec_failures(&t);
            objects += 1;
        });
    }
    Ok(vec![
        Check::count(format!("codec failures over {objects} rooted 1-trees, n <= 6"), failures),
        Check::at_least("rooted 1-trees checked", objects as f64, 182_087.0),
    ])
}

fn loop_theorem(ctx: &Ctx) -> Result<Vec<Check>> {
    let nmax = if ctx.profile == Profile::Full { enumerate::EXTENDED_ONE_TREE_CAP } else { 6 };
    let mut shortest_bad = 0;
    let mut successor_bad = 0;
    let mut objects = 0u64;
    for n in 2..=nmax {
        for (m, _) in enumerate::unrooted_one_face_maps(n, 1) {
            for labels in enumerate::well_labelings(&m) {
                let t = LabeledOneTree::new(m.clone().with_labels(labels)?, 0)?;
                let q = decode(&t)?;
                let b = backbone(&t)?;
                let lmin = b.min_skeleton_label();
                let shortest = q.map.shortest_noncontractible_through(q.origin)?;
                if shortest.length as i64 != 2 * lmin || shortest.class == [0, 0] {
                    shortest_bad += 1;
                }
                let sk = codec::skeleton_of(&t);
                let v = (0..t.map().num_vertices())
                    .filter(|&v| sk.in_skeleton[v])
                    .min_by_key(|&v| t.labels()[v])
                    .expect("non-empty skeleton");
                let lp = codec::successor_loop(&t, v)?;
                if lp.length as i64 != 2 * lmin || lp.class == [0, 0] || !q.map.is_closed_walk(&lp.half_edges) {
                    successor_bad += 1;
                }
                objects += 1;
            }
        }
    }
    Ok(vec![
        Check::count(format!("shortest loop != 2 lmin over {objects} unrooted 1-trees, n <= {nmax}"), shortest_bad),
        Check::count("successor loop not of length 2 lmin or contractible", successor_bad),
    ])
}

fn cx(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Errors of the three scaling forms at one `eps`, for each base point.
fn scaling_errors(eps: f64) -> Result<[Vec<f64>; 3]> {
    let gf = NumericGf::from_eps(eps)?;
    let s = eps.sqrt();
    let lab = |l: f64| (l / s).round().max(1.0) as u64;
    let mut out: [Vec<f64>; 3] = Default::default();
    for l in [0.5, 1.0, 2.0] {
        let k = lab(l);
        let big_l = k as f64 * s;
        out[0].push((gf.r_label(k) / 2.0 - 1.0 + eps * scaling::f(cx(big_l)).re).abs());
        out[1].push((gf.x_label(k) / 3.0 - 1.0 + s * scaling::c_fn(cx(big_l)).re).abs());
    }
    for (l1, l2) in [(0.5, 1.0), (1.0, 1.0), (2.0, 1.0)] {
        let (k1, k2) = (lab(l1), lab(l2));
        let rho = scaling::rho(cx(k1 as f64 * s), cx(k2 as f64 * s)).re;
        out[2].push((s * gf.k(k1, k2)? - rho).abs());
    }
    Ok(out)
}

fn scaling_convergence(_: &Ctx) -> Result<Vec<Check>> {
    let coarse = scaling_errors(1e-3)?;
    let fine = scaling_errors(1e-4)?;
    let predicted = [10f64.powf(1.5), 10.0, 10f64.sqrt()];
    let names = ["R_l/2 - 1 + eps F", "X_l/3 - 1 + sqrt(eps) C", "sqrt(eps) K - rho"];
    let mut checks = Vec::new();
    for i in 0..3 {
        let worst = coarse[i]
            .iter()
            .zip(&fine[i])
            .map(|(a, b)| (a / b / predicted[i] - 1.0).abs())
            .fold(0.0, f64::max);
        checks.push(Check::at_most(
            format!("{}: error reduction vs {:.2}, worst relative deviation", names[i], predicted[i]),
            worst,
            0.3,
        ));
    }
    Ok(checks)
}

fn differential_identities(_: &Ctx) -> Result<Vec<Check>> {
    let r = scaling::residuals(ResidualGrid::new(0.3, 4.0, 38), ResidualGrid::new(0.3, 3.0, 28), 1e-3);
    let fd = 1e-6;
    let alg = 1e-10;
    Ok(vec![
        Check::at_most("F'' = 3(F^2 - 1)", r.f_ode, fd),
        Check::at_most("C' = C^2 - 6F", r.c_ode, fd),
        Check::at_most("C = -F''/F'", r.c_identity, alg),
        Check::at_most("H' = 3/F'^2", r.h_ode, fd),
        Check::at_most("A0'' - 4A1' + 20A2 = 0", r.a_relation, fd),
        Check::at_most("F1 = 4M + L M'", r.m_parametrization, alg),
        Check::at_most("rho'' = 6F rho off the diagonal", r.rho_off_diagonal, fd),
        Check::at_most("rho' jumps by -3 on the diagonal", r.rho_jump, fd),
        Check::at_most("real on the real axis (conjugation)", r.conjugation, alg),
    ])
}

fn quadrature_oracles(_: &Ctx) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for l in [0.5, 1.0, 2.0] {
        let i = scaling::i_fn(cx(l)).re;
        let j = scaling::j_fn(cx(l)).re;
        let f1 = scaling::f1(cx(l)).re;
        checks.push(Check::at_most(format!("|I({l}) - nested integral|"), (i - scaling::i_by_integration(l)).abs(), 1e-8));
        checks.push(Check::at_most(format!("|J({l}) - nested integral|"), (j - scaling::j_by_integration(l)?).abs(), 1e-8));
        let q = scaling::f1_by_quadrature(l, 1e-9 * f1.abs().max(1e-12))?;
        checks.push(Check::at_most(format!("|F1({l}) / triple integral - 1|"), (f1 / q - 1.0).abs(), 1e-4));
    }
    Ok(checks)
}

fn fine_cdf(law: Law, r: f64) -> Result<f64> {
    let opts = DistOptions { quad: QuadOptions { abs_tol: 1e-30, rel_tol: 1e-7, max_intervals: 4000 } };
    Ok(cdf_with_error(law, r, &opts)?.0)
}

fn expansions(ctx: &Ctx) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let terms = |law: Law| law.small_r_terms();
    let t_sigma = terms(Law::Sigma);
    for r in [0.05, 0.1] {
        let v = fine_cdf(Law::Sigma, r)?;
        let lead = t_sigma[0].1 * r.powi(t_sigma[0].0);
        checks.push(Check::at_most(format!("sigma({r}) vs 9r^6/(4 sqrt pi), relative"), (v / lead - 1.0).abs(), 0.02));
    }
    let v = fine_cdf(Law::Sigma, 0.3)?;
    let one = (v - Law::Sigma.small_r_expansion(0.3, 1)).abs();
    let two = (v - Law::Sigma.small_r_expansion(0.3, 2)).abs();
    checks.push(Check::at_most("sigma(0.3): error with r^10 term / error without", two / one, 1.0));
    let t2 = terms(Law::Sigma2)[0];
    for r in [0.1, 0.15] {
        let v = fine_cdf(Law::Sigma2, r)?;
        checks.push(Check::at_most(
            format!("sigma2({r}) vs 11043r^10/(5096 sqrt pi), relative"),
            (v / (t2.1 * r.powi(t2.0)) - 1.0).abs(),
            0.03,
        ));
    }
    let tp = terms(Law::Phi1);
    for r in [0.1, 0.2] {
        let v = fine_cdf(Law::Phi1, r)?;
        let t = |k: usize| tp[k].1 * r.powi(tp[k].0);
        checks.push(Check::at_most(format!("phi1({r}) vs 3r^4/28, relative"), (v / t(0) - 1.0).abs(), 0.02));
        checks.push(Check::at_most(
            format!("phi1({r}) - 3r^4/28 vs -15r^10/(1456 sqrt pi), relative"),
            ((v - t(0)) / t(1) - 1.0).abs(),
            0.02,
        ));
    }
    // the 3r^4/28 term is separated analytically, so the remainder resolves the r^14 term
    let r = 0.2;
    let v = fine_cdf(Law::Phi1, r)?;
    let t = |k: usize| tp[k].1 * r.powi(tp[k].0);
    checks.push(Check::at_most(
        "phi1(0.2) - two terms vs 1242135r^14/(506970464 sqrt pi), relative",
        ((v - t(0) - t(1)) / t(2) - 1.0).abs(),
        0.02,
    ));
    let rs: Vec<f64> = (0..5).map(|k| 0.1 + 0.05 * k as f64).collect();
    let mut ys = Vec::new();
    for &r in &rs {
        ys.push(tp[0].1 * r.powi(4) - fine_cdf(Law::Phi1, r)?);
    }
    checks.push(Check::within("fitted exponent of the first phi1 correction", distributions::log_log_slope(&rs, &ys), 9.7, 10.3));
    // small-L law of F1, which fixes the 3r^4/28 leading term
    let d = ctx.settings.small_l_denominator;
    let worst = [0.02, 0.05]
        .iter()
        .map(|&l: &f64| (scaling::f1(cx(l)).re * d / l.powi(4) - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(Check::at_most(format!("F1(L) L^-4 {d} - 1 at L = 0.02, 0.05"), worst, 1e-4));
    Ok(checks)
}

fn normalization(_: &Ctx) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for law in [Law::Sigma, Law::Sigma2, Law::Phi1] {
        let end = law.support_end();
        let v = distributions::cdf(law, end)?;
        checks.push(Check::at_most(format!("|1 - {law:?}({end})|"), (1.0 - v).abs(), 1e-3));
        let d = density_integral(law, 6.0)?;
        checks.push(Check::at_most(format!("|1 - integral of {law:?} density over [0, 6]|"), (1.0 - d).abs(), 1e-3));
    }
    Ok(checks)
}

fn r_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|k| lo + step * k as f64).collect()
}

/// Sup distance between the exact law of the rescaled minimum skeleton label
/// at size `n` and `sigma` on `[0.3, 1.5]`, with the midpoint continuity correction.
pub fn finite_size_sup(n: usize) -> Result<(f64, f64)> {
    let table = exact_min_skeleton_distribution(n)?;
    let mut prev = 0.0;
    let mut points = Vec::new();
    for (m, c) in table.cdf() {
        points.push((c - prev, n, m as i64));
        prev = c;
    }
    let r = r_grid(0.3, 1.5, 0.01);
    let sig: Vec<f64> = r.iter().map(|&x| distributions::sigma(x)).collect::<Result<_>>()?;
    let emp = WeightedCdf::new(&points, &r);
    let mut best = (0.0, 0.0);
    for k in 0..r.len() {
        let d = (emp.cdf[k] - sig[k]).abs();
        if d > best.0 {
            best = (d, r[k]);
        }
    }
    Ok(best)
}

fn finite_size_law(_: &Ctx) -> Result<Vec<Check>> {
    let (sup, at) = finite_size_sup(60)?;
    Ok(vec![Check::at_most(format!("sup |P_60 - sigma| on [0.3, 1.5] (at r = {at:.2})"), sup, 0.10)])
}

/// Exact chi-square test of the size-6 sampler against the enumeration.
/// Under the proposal an accepted object has probability proportional to
/// the inverse of its weight.
pub fn small_size_chi_square(seed: u64, draws: u64) -> Result<sampler::ChiSquare> {
    let n = 6;
    let all = enumerate::one_trees(n)?;
    let index: std::collections::HashMap<_, usize> =
        all.iter().enumerate().map(|(i, t)| (t.canonical_code(), i)).collect();
    let mut cfg = SamplerConfig::new(n, seed);
    cfg.delta = 0.1;
    let s = Sampler::new(cfg)?;
    let probs = all
        .iter()
        .map(|t| {
            let b = backbone(t)?;
            Ok(1.0 / s.weight_for(b.kind, b.labels[0], *b.labels.last().expect("labels")))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut observed = vec![0u64; all.len()];
    let mut got = 0;
    let mut stream = 0;
    while got < draws {
        let (batch, _) = s.proposals(stream, 100_000);
        stream += 1;
        for w in batch {
            if got == draws {
                break;
            }
            let code = w.materialize()?.canonical_code();
            let i = index.get(&code).ok_or_else(|| Error::Rejected("sample outside the enumeration".into()))?;
            observed[*i] += 1;
            got += 1;
        }
    }
    Ok(chi_square(&observed, &probs, 5.0))
}

fn statistical(ctx: &Ctx) -> Result<Vec<Check>> {
    let st = ctx.settings;
    let cfg = SamplerConfig::new(st.sample_n, st.seed);
    let r = r_grid(0.05, 3.0, 0.05);
    let emp = empirical_distributions(&cfg, st.samples, &r)?;
    let sig: Vec<f64> = r.iter().map(|&x| distributions::sigma(x)).collect::<Result<_>>()?;
    let phi: Vec<f64> = r.iter().map(|&x| distributions::phi1(x)).collect::<Result<_>>()?;
    let sup = |c: &WeightedCdf, f: &[f64]| {
        (0..r.len()).map(|k| ((c.cdf[k] - f[k]).abs(), r[k])).fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a })
    };
    let (s1, r1) = sup(&emp.half_systole, &sig);
    let (s2, r2) = sup(&emp.marked_distance, &phi);
    let chi = small_size_chi_square(st.seed, st.chi_square_draws)?;
    Ok(vec![
        Check::at_most(
            format!("sup |half-systole CDF - sigma| (n = {}, r = {r1:.2}, n_eff = {:.0})", st.sample_n, emp.effective_samples),
            s1,
            0.05,
        ),
        Check::at_most(format!("sup |marked-distance CDF - phi1| (r = {r2:.2})"), s2, 0.05),
        Check::at_least(
            format!("chi-square p-value, n = 6, {} draws (stat {:.1}, df {})", st.chi_square_draws, chi.statistic, chi.df),
            chi.p_value,
            0.01,
        ),
    ])
}
