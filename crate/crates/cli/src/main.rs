use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use toromaps::distributions::{cdf_with_error, density, DistCurve, DistOptions, Law};
use toromaps::enumerate;
use toromaps::gf::numeric::{eval_numeric, GfKind};
use toromaps::gf::skeleton::exact_min_skeleton_distribution;
use toromaps::gf;
use toromaps::quad::QuadOptions;
use toromaps::sampler::{Sampler, SampleSummary, SamplerConfig};
use toromaps::scaling::{self, ResidualGrid, ScalingFn, C64};
use toromaps::verify::{self, Profile, Settings};

/// Every flag can also be set through an environment variable
/// `TOROMAPS_<FLAG>`, e.g. `TOROMAPS_SEED=7`.
#[derive(Parser)]
#[command(name = "toromaps", version, about = "Distance statistics of toroidal bipartite quadrangulations")]
struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "TOROMAPS_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generating functions: exact series as JSON, numeric values, exact laws.
    #[command(subcommand)]
    Gf(GfCommand),
    /// Exhaustive enumeration tables as CSV.
    #[command(subcommand)]
    Enum(EnumCommand),
    /// Exhaustive bijection round trips at one size.
    Codec {
        #[arg(long, env = "TOROMAPS_N")]
        n: usize,
    },
    /// Weighted Boltzmann samples as CSV.
    Sample(SampleArgs),
    /// Continuum scaling functions.
    #[command(subcommand)]
    Scaling(ScalingCommand),
    /// A limit law on a grid as CSV `r,cdf,pdf,err`.
    Dist(DistArgs),
    /// The data behind a figure as CSV.
    Figure {
        which: Figure,
        #[arg(long, env = "TOROMAPS_OUT")]
        out: Option<PathBuf>,
    },
    /// Runs the acceptance criteria and prints a JSON report.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum GfCommand {
    /// Exact truncated series as JSON `{order, coeffs}`.
    Series {
        /// r, x, xtilde, k, kp, w1, w2, q1 or q1-rooted.
        kind: String,
        #[arg(long, env = "TOROMAPS_ORDER", default_value_t = 10)]
        order: usize,
        /// Labels, comma separated (`kp` takes the shift p).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        labels: Vec<i64>,
        #[arg(long, env = "TOROMAPS_OUT")]
        out: Option<PathBuf>,
    },
    /// Numeric value at a fixed g in (0, 1/12).
    Eval {
        kind: String,
        #[arg(long)]
        g: f64,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        labels: Vec<i64>,
    },
    /// Numeric K_{l1,l2} for 1 <= l1, l2 <= lmax as CSV.
    Ktable {
        #[arg(long)]
        g: f64,
        #[arg(long, env = "TOROMAPS_LMAX", default_value_t = 10)]
        lmax: u64,
        #[arg(long, env = "TOROMAPS_OUT")]
        out: Option<PathBuf>,
    },
    /// Exact law of the minimum skeleton label over rooted 1-trees of size n.
    Skeleton {
        #[arg(long, env = "TOROMAPS_N")]
        n: usize,
        #[arg(long, env = "TOROMAPS_OUT")]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum EnumCommand {
    /// Rooted well-labeled 1-trees by backbone kind, minimum skeleton label and root label.
    OneTrees {
        #[arg(long, env = "TOROMAPS_N")]
        n: usize,
        #[arg(long, env = "TOROMAPS_OUT")]
        out: Option<PathBuf>,
    },
    /// Planted labeled trees with root label l by minimum label.
    Planted {
        #[arg(long, env = "TOROMAPS_N")]
        n: usize,
        #[arg(long)]
        label: i64,
        #[arg(long, env = "TOROMAPS_OUT")]
        out: Option<PathBuf>,
    },
    /// (rooted 1-tree, vertex) pairs by vertex label.
    Marked {
        #[arg(long, env = "TOROMAPS_N")]
        n: usize,
        #[arg(long, env = "TOROMAPS_OUT")]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, env = "TOROMAPS_N")]
    n: usize,
    /// Relative half-width of the accepted size window.
    #[arg(long, env = "TOROMAPS_DELTA", default_value_t = 0.5)]
    delta: f64,
    #[arg(long, env = "TOROMAPS_SEED")]
    seed: u64,
    #[arg(long, env = "TOROMAPS_SAMPLES", default_value_t = 100)]
    samples: u64,
    #[arg(long, env = "TOROMAPS_OUT")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ScalingCommand {
    /// One function at a complex point L = re + i im, as JSON.
    Eval {
        /// f, fprime, c, h, i, j, f1, a0, a1, a2, alpha0, alpha1 or m.
        which: String,
        #[arg(long, allow_negative_numbers = true)]
        l: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        im: f64,
    },
    /// Max-norm residuals of the differential identities, as JSON.
    Residuals {
        #[arg(long, default_value_t = 0.3)]
        lmin: f64,
        #[arg(long, env = "TOROMAPS_LMAX", default_value_t = 4.0)]
        lmax: f64,
        /// Grid points.
        #[arg(long, env = "TOROMAPS_GRID", default_value_t = 38)]
        grid: usize,
        /// Finite-difference step.
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
}

#[derive(Args)]
struct DistArgs {
    law: LawArg,
    #[arg(long, default_value_t = 6.0)]
    rmax: f64,
    #[arg(long, default_value_t = 0.02)]
    step: f64,
    #[arg(long)]
    density: bool,
    /// Absolute quadrature tolerance.
    #[arg(long, env = "TOROMAPS_TOL")]
    tol: Option<f64>,
    #[arg(long, env = "TOROMAPS_OUT")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LawArg {
    Sigma,
    Sigma2,
    Phi1,
}

impl From<LawArg> for Law {
    fn from(l: LawArg) -> Law {
        match l {
            LawArg::Sigma => Law::Sigma,
            LawArg::Sigma2 => Law::Sigma2,
            LawArg::Phi1 => Law::Phi1,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Figure {
    Fig3,
    Fig5,
    Fig7,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Quick,
    Full,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, env = "TOROMAPS_PROFILE", default_value = "quick")]
    profile: ProfileArg,
    /// `key=value` settings override, e.g. `small_l_denominator=895`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Seed of the statistical criterion.
    #[arg(long, env = "TOROMAPS_SEED")]
    seed: Option<u64>,
    #[arg(long, env = "TOROMAPS_SAMPLES")]
    samples: Option<u64>,
    /// Writes the JSON report here instead of stdout.
    #[arg(long, env = "TOROMAPS_OUT")]
    out: Option<PathBuf>,
}

/// A failed run, as opposed to a usage error.
struct Failed;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(Failed)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.downcast_ref::<toromaps::Error>().is_some_and(|e| {
                matches!(
                    e,
                    toromaps::Error::InvalidArgument(_)
                        | toromaps::Error::OutOfRange { .. }
                        | toromaps::Error::CapExceeded { .. }
                )
            });
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn label(labels: &[i64], i: usize) -> anyhow::Result<usize> {
    match labels.get(i) {
        Some(&l) if l >= 0 => Ok(l as usize),
        Some(&l) => bail!(toromaps::Error::OutOfRange { what: "label", value: l.to_string(), range: ">= 0" }),
        None => bail!(toromaps::Error::InvalidArgument(format!("--labels needs at least {} value(s)", i + 1))),
    }
}

fn exact_series(kind: &str, order: usize, labels: &[i64]) -> anyhow::Result<toromaps::FormalSeries> {
    Ok(match kind {
        "r" => gf::series_r(label(labels, 0)?, order),
        "x" => {
            let l = label(labels, 0)?;
            if l == 0 {
                bail!(toromaps::Error::OutOfRange { what: "label", value: "0".into(), range: ">= 1" });
            }
            gf::series_x(l, order)
        }
        "xtilde" => {
            let (a, b) = (label(labels, 0)?, label(labels, 1)?);
            if !(a >= b && b >= 1) {
                bail!(toromaps::Error::InvalidArgument("xtilde needs l1 >= l2 >= 1".into()));
            }
            gf::series_xtilde(a, b, order)
        }
        "k" => gf::series_k(label(labels, 0)?, label(labels, 1)?, order),
        "kp" => {
            let p = *labels.first().ok_or_else(|| toromaps::Error::InvalidArgument("kp needs --labels p".into()))?;
            gf::series_kp(p, order)
        }
        "w1" => gf::series_w1(order),
        "w2" => gf::series_w2(order),
        "q1" => gf::series_q1(order).0,
        "q1-rooted" => gf::series_q1(order).1,
        other => bail!(toromaps::Error::InvalidArgument(format!("unknown series {other:?}"))),
    })
}

fn run(command: Command) -> anyhow::Result<Option<Failed>> {
    match command {
        Command::Gf(cmd) => gf_command(cmd)?,
        Command::Enum(cmd) => {
            let (table, out) = match cmd {
                EnumCommand::OneTrees { n, out } => (enumerate::enum_one_trees(n)?, out),
                EnumCommand::Planted { n, label, out } => (enumerate::enum_planted_trees(label, n)?, out),
                EnumCommand::Marked { n, out } => (enumerate::marked_vertex_histogram(n)?, out),
            };
            emit(out.as_deref(), &table.to_csv())?;
        }
        Command::Codec { n } => {
            if n < 2 {
                bail!(toromaps::Error::OutOfRange { what: "n", value: n.to_string(), range: ">= 2" });
            }
            let trees = enumerate::one_trees(n)?;
            let failures: u64 = trees.iter().map(verify::codec_failures).sum();
            let report = json!({ "n": n, "objects": trees.len(), "failures": failures });
            emit(None, &format!("{report}\n"))?;
            if failures > 0 {
                return Ok(Some(Failed));
            }
        }
        Command::Sample(a) => sample(a)?,
        Command::Scaling(cmd) => scaling_command(cmd)?,
        Command::Dist(a) => {
            let law: Law = a.law.into();
            let curve = match a.tol {
                None => DistCurve::compute(law, a.rmax, a.step, a.density)?,
                Some(tol) => curve_with_tolerance(law, a.rmax, a.step, a.density, tol)?,
            };
            emit(a.out.as_deref(), &curve.to_csv())?;
        }
        Command::Figure { which, out } => {
            let (law, rmax, name) = match which {
                Figure::Fig3 => (Law::Sigma, 6.0, "fig3.csv"),
                Figure::Fig5 => (Law::Sigma2, 6.0, "fig5.csv"),
                Figure::Fig7 => (Law::Phi1, 4.0, "fig7.csv"),
            };
            let curve = DistCurve::compute(law, rmax, 0.02, true)?;
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    let path = dir.join(name);
                    emit(Some(&path), &curve.to_csv())?;
                    eprintln!("wrote {}", path.display());
                }
                None => emit(None, &curve.to_csv())?,
            }
        }
        Command::Verify(a) => return verify_command(a),
    }
    Ok(None)
}

fn gf_command(cmd: GfCommand) -> anyhow::Result<()> {
    match cmd {
        GfCommand::Series { kind, order, labels, out } => {
            let s = exact_series(&kind.to_ascii_lowercase(), order, &labels)?;
            emit(out.as_deref(), &(serde_json::to_string_pretty(&s)? + "\n"))
        }
        GfCommand::Eval { kind, g, labels } => {
            let k: GfKind = kind.parse()?;
            let v = eval_numeric(k, &labels, g)?;
            emit(None, &format!("{}\n", json!({ "kind": kind, "g": g, "labels": labels, "value": v })))
        }
        GfCommand::Ktable { g, lmax, out } => {
            let gf = toromaps::gf::numeric::NumericGf::from_g(g)?;
            let mut csv = String::from("l1,l2,k\n");
            for a in 1..=lmax {
                for b in 1..=lmax {
                    csv.push_str(&format!("{a},{b},{:.15e}\n", gf.k(a, b)?));
                }
            }
            emit(out.as_deref(), &csv)
        }
        GfCommand::Skeleton { n, out } => {
            let table = exact_min_skeleton_distribution(n)?;
            let mut csv = String::from("min_skeleton_label,count,cdf\n");
            for ((m, c), (_, f)) in table.counts().into_iter().zip(table.cdf()) {
                csv.push_str(&format!("{m},{c},{f:.15e}\n"));
            }
            emit(out.as_deref(), &csv)
        }
    }
}

fn sample(a: SampleArgs) -> anyhow::Result<()> {
    let mut cfg = SamplerConfig::new(a.n, a.seed);
    cfg.delta = a.delta;
    cfg.validate()?;
    let sampler = Sampler::new(cfg)?;
    let results: Vec<_> = {
        use rayon::prelude::*;
        (0..a.samples).into_par_iter().map(|i| sampler.summary(i)).collect()
    };
    let mut csv = format!("index,{}\n", SampleSummary::CSV_HEADER);
    let mut diag = toromaps::sampler::Diagnostics::default();
    for r in results {
        let (s, d) = r?;
        diag.merge(&d);
        csv.push_str(&format!("{},{}\n", s.index, s.csv_row()));
    }
    emit(a.out.as_deref(), &csv)?;
    eprintln!("{}", serde_json::to_string(&diag)?);
    Ok(())
}

fn scaling_command(cmd: ScalingCommand) -> anyhow::Result<()> {
    match cmd {
        ScalingCommand::Eval { which, l, im } => {
            let f: ScalingFn = which.parse()?;
            let v = scaling::eval(f, C64::new(l, im))?;
            emit(None, &format!("{}\n", json!({ "function": which, "l": [l, im], "value": [v.re, v.im] })))?;
        }
        ScalingCommand::Residuals { lmin, lmax, grid, step } => {
            if !(lmin > 0.0 && lmax > lmin && grid >= 2 && step > 0.0) {
                bail!(toromaps::Error::InvalidArgument("need 0 < lmin < lmax, grid >= 2, step > 0".into()));
            }
            let r = scaling::residuals(ResidualGrid::new(lmin, lmax, grid), ResidualGrid::new(lmin, lmax, grid), step);
            emit(None, &(serde_json::to_string_pretty(&r)? + "\n"))?;
        }
    }
    Ok(())
}

fn curve_with_tolerance(law: Law, rmax: f64, step: f64, with_density: bool, tol: f64) -> anyhow::Result<DistCurve> {
    if !(tol > 0.0 && step > 0.0 && rmax >= 0.0) {
        bail!(toromaps::Error::InvalidArgument("need tol > 0, step > 0 and rmax >= 0".into()));
    }
    let opts = DistOptions { quad: QuadOptions { abs_tol: tol, rel_tol: 0.0, max_intervals: 4000 } };
    let n = (rmax / step).round() as usize;
    let r: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
    let mut cdf = Vec::new();
    let mut err = Vec::new();
    for &x in &r {
        let (v, e) = cdf_with_error(law, x, &opts)?;
        cdf.push(v);
        err.push(e);
    }
    let pdf = if with_density {
        Some(r.iter().map(|&x| if x == 0.0 { Ok(0.0) } else { density(law, x) }).collect::<Result<Vec<_>, _>>()?)
    } else {
        None
    };
    Ok(DistCurve { law, r, cdf, pdf, err })
}

fn verify_command(a: VerifyArgs) -> anyhow::Result<Option<Failed>> {
    let mut settings = Settings::default();
    if let Some(s) = a.seed {
        settings.seed = s;
    }
    if let Some(s) = a.samples {
        settings.samples = s;
    }
    for o in &a.overrides {
        settings.set(o)?;
    }
    let profile = match a.profile {
        ProfileArg::Quick => Profile::Quick,
        ProfileArg::Full => Profile::Full,
    };
    let report = verify::run(profile, &settings, |c| eprintln!("{}", c.line()));
    let text = serde_json::to_string_pretty(&report)? + "\n";
    emit(a.out.as_deref(), &text)?;
    let failed = report.failed_ids();
    if failed.is_empty() {
        eprintln!("all {} criteria passed", report.criteria.len());
        Ok(None)
    } else {
        eprintln!("failed criteria: {failed:?}");
        Ok(Some(Failed))
    }
}

