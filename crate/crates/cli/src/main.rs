//! radsum: batch CLI over the Rademacher-sum engines.
//!
//! Subcommands map one-to-one onto the library operations; every value in
//! the JSON output carries a sibling error estimate and convergence status,
//! plus a provenance block echoing the configuration. Output bytes are
//! deterministic for a fixed config and cache state.
//!
//! Exit codes: 1 config/usage error, 2 out-of-scope request (e.g. w > 0),
//! 3 convergence failure (non-shrinking trend).

mod config;

use clap::{Args, Parser, Subcommand};
use config::{fmt_rational, parse_rational, JobConfig, MultiplierSpec};
use num::complex::Complex64;
use num::rational::Rational64;
use num::Zero;
use radsum_core::cache::{KloostermanCache, CACHE_ENV};
use radsum_core::group::GroupSpec;
use radsum_core::kloosterman;
use radsum_core::oracle;
use radsum_core::rademacher::{self, RademacherJob};
use radsum_core::series::CoefficientSeries;
use radsum_core::{RadError, Result};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::sync::Arc;

#[derive(Parser)]
#[command(name = "radsum", version, about = "Fourier coefficients of vector-valued Rademacher sums and shadow Poincaré series")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Write the JSON report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Disable the Kloosterman disk cache for this invocation.
    #[arg(long, global = true)]
    no_cache: bool,
}

#[derive(Args, Clone)]
struct JobArgs {
    /// JSON job configuration file (flags below override its fields).
    config: Option<PathBuf>,
    /// Group family: "full" or "gamma0".
    #[arg(long)]
    group: Option<String>,
    /// Level N for gamma0.
    #[arg(long)]
    level: Option<u32>,
    /// Weight as an exact rational "p/q".
    #[arg(long)]
    weight: Option<String>,
    /// Multiplier preset: trivial | eta | conjugate-eta | eta_power.
    #[arg(long)]
    preset: Option<String>,
    /// Power r for the eta_power preset.
    #[arg(long)]
    power: Option<i32>,
    /// Pole cusp: "inf" or "p/q".
    #[arg(long)]
    cusp: Option<String>,
    /// Pole component (1-based).
    #[arg(long)]
    component: Option<usize>,
    /// Pole exponent n as an exact rational.
    #[arg(long)]
    exponent: Option<String>,
    /// Largest Fourier exponent as an exact rational.
    #[arg(long)]
    kmax: Option<String>,
    /// Kloosterman c truncation.
    #[arg(long)]
    cmax: Option<i64>,
    /// Rectangle parameter K for direct evaluation.
    #[arg(long)]
    rect_k: Option<i64>,
    /// Precision mode: standard | double-double.
    #[arg(long)]
    precision: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fourier coefficients of the Rademacher sum (CSV with --csv).
    Coeffs {
        #[command(flatten)]
        job: JobArgs,
        /// Also write a flat coefficient table to this CSV path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Fourier coefficients of the shadow Poincaré series.
    Shadow {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// One matrix-valued Kloosterman sum S_{n,k}(c).
    Kloosterman {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long)]
        n: String,
        #[arg(long)]
        k: String,
        #[arg(long)]
        c: i64,
    },
    /// Partial sums of the Kloosterman-Selberg zeta function with checkpoints.
    Zeta {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long)]
        n: String,
        #[arg(long)]
        k: String,
        /// s as "re" or "re,im".
        #[arg(long)]
        s: String,
    },
    /// The Δ constant vector of a job.
    Delta {
        #[command(flatten)]
        job: JobArgs,
    },
    /// Leading-term asymptotic estimate of the coefficient at k.
    Asymptotic {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long)]
        k: String,
    },
    /// Dimension bound md (+ t0 at weight 0) for J_w(m, rho).
    Dims {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long)]
        m: u32,
    },
    /// Basis enumeration: the m·d pole specifications.
    Basis {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long)]
        m: u32,
    },
    /// Direct evaluation at τ: regularized rectangle sum, or the weight>2
    /// Poincaré series with --poincare.
    Evaluate {
        #[command(flatten)]
        job: JobArgs,
        /// τ as "re,im" with im > 0.
        #[arg(long)]
        tau: String,
        #[arg(long)]
        poincare: bool,
    },
    /// Run the oracle battery for a job (exit 3 on non-shrinking trends).
    Verify {
        #[command(flatten)]
        job: JobArgs,
    },
    /// Inspect or clear the Kloosterman disk cache.
    Cache {
        #[command(subcommand)]
        action: CacheCmd,
    },
}

#[derive(Subcommand)]
enum CacheCmd {
    Inspect,
    Clear,
}

fn main() {
    let cli = Cli::parse();
    init_threads();
    let out = cli.out.clone();
    match run(cli) {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report).expect("serializable report");
            match out {
                Some(path) => std::fs::write(path, text + "\n").expect("write output"),
                None => println!("{text}"),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}

fn exit_code(e: &RadError) -> i32 {
    match e {
        RadError::OutOfScope(_) => 2,
        RadError::NonConvergent(_) => 3,
        _ => 1,
    }
}

fn init_threads() {
    if let Ok(n) = std::env::var("RADSUM_THREADS") {
        if let Ok(n) = n.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn resolve(job: &JobArgs) -> Result<JobConfig> {
    let mut cfg = match &job.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let v: Value = serde_json::from_str(&text)
                .map_err(|e| RadError::Invalid(format!("config parse: {e}")))?;
            JobConfig::from_json(&v)?
        }
        None => JobConfig::default(),
    };
    if let Some(g) = &job.group {
        cfg.group = match g.as_str() {
            "full" => GroupSpec::Full,
            "gamma0" => GroupSpec::Gamma0(job.level.unwrap_or(1)),
            other => return Err(RadError::Invalid(format!("unknown group {other:?}"))),
        };
    } else if let Some(level) = job.level {
        cfg.group = GroupSpec::Gamma0(level);
    }
    if let Some(w) = &job.weight {
        cfg.weight = parse_rational(w)?;
    }
    if let Some(p) = &job.preset {
        cfg.multiplier =
            MultiplierSpec::Preset { name: p.clone(), power: job.power.unwrap_or(0) };
    }
    if let Some(c) = &job.cusp {
        cfg.cusp = c.clone();
    }
    if let Some(c) = job.component {
        cfg.component = c;
    }
    if let Some(e) = &job.exponent {
        cfg.exponent = parse_rational(e)?;
    }
    if let Some(k) = &job.kmax {
        cfg.k_max = parse_rational(k)?;
    }
    if let Some(c) = job.cmax {
        cfg.c_max = c;
    }
    if let Some(k) = job.rect_k {
        cfg.rect_k = k;
    }
    if let Some(p) = &job.precision {
        cfg.precision = p.clone();
    }
    if cfg.component == 0 {
        return Err(RadError::Invalid("components are 1-based".into()));
    }
    Ok(cfg)
}

fn cache_dir() -> PathBuf {
    std::env::var(CACHE_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|_| PathBuf::from("./.radsum-cache"))
}

fn open_cache(disabled: bool) -> Result<Option<KloostermanCache>> {
    if disabled {
        return Ok(None);
    }
    Ok(Some(KloostermanCache::new(cache_dir())?))
}

fn build_job(cfg: &JobConfig) -> Result<RademacherJob> {
    let rho = Arc::new(cfg.build_multiplier()?);
    RademacherJob::new(
        cfg.group,
        cfg.weight,
        rho,
        cfg.find_cusp()?,
        cfg.component - 1,
        cfg.exponent,
    )
}

fn complex_json(z: Complex64, err: f64, status: &str) -> Value {
    json!({"re": z.re, "im": z.im, "err": err, "status": status})
}

fn series_json(series: &CoefficientSeries) -> Value {
    let pole: Vec<Value> = series
        .pole_amplitudes
        .iter()
        .map(|&z| complex_json(z, 0.0, "exact"))
        .collect();
    let constants: Vec<Value> = series
        .constants
        .iter()
        .map(|&(z, e)| complex_json(z, e, series.constant_status.as_str()))
        .collect();
    let components: Vec<Value> = series
        .components
        .iter()
        .map(|comp| {
            Value::Array(
                comp.iter()
                    .map(|e| {
                        json!({
                            "exponent": fmt_rational(e.exponent),
                            "re": e.value.re,
                            "im": e.value.im,
                            "err": e.tail_error,
                            "status": series.tail_status.as_str(),
                        })
                    })
                    .collect(),
            )
        })
        .collect();
    json!({
        "weight": fmt_rational(series.weight),
        "pole": {"exponent": fmt_rational(series.pole_exponent), "amplitudes": pole},
        "constants": constants,
        "components": components,
    })
}

fn write_csv(series: &CoefficientSeries, path: &PathBuf) -> Result<()> {
    let mut text = String::from("component,exponent_num,exponent_den,re,im,err\n");
    for (j, comp) in series.components.iter().enumerate() {
        for e in comp {
            text.push_str(&format!(
                "{},{},{},{:.16e},{:.16e},{:.16e}\n",
                j + 1,
                e.exponent.numer(),
                e.exponent.denom(),
                e.value.re,
                e.value.im,
                e.tail_error
            ));
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn provenance(cfg: &JobConfig, cache: &Option<KloostermanCache>) -> Value {
    json!({
        "c_max": cfg.c_max,
        "k_max": fmt_rational(cfg.k_max),
        "rect_k": cfg.rect_k,
        "precision": cfg.precision,
        "cache": cache.as_ref().map(|c| c.dir().display().to_string()),
    })
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let parts: Vec<&str> = s.split(',').collect();
    let re: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| RadError::Invalid(format!("bad complex {s:?}")))?;
    let im: f64 = if parts.len() > 1 {
        parts[1]
            .trim()
            .parse()
            .map_err(|_| RadError::Invalid(format!("bad complex {s:?}")))?
    } else {
        0.0
    };
    Ok(Complex64::new(re, im))
}

fn run(cli: Cli) -> Result<Value> {
    let cache = |args_disable: bool| open_cache(args_disable || cli.no_cache);
    match cli.cmd {
        Cmd::Coeffs { job, csv } => {
            let cfg = resolve(&job)?;
            let j = build_job(&cfg)?;
            let cache = cache(false)?;
            let series =
                rademacher::coefficients(&j, cfg.k_max, cfg.c_max, cache.as_ref(), &cfg.policy()?)?;
            if let Some(path) = csv {
                write_csv(&series, &path)?;
            }
            Ok(json!({
                "command": "coeffs",
                "config": cfg.to_json(),
                "provenance": provenance(&cfg, &cache),
                "result": series_json(&series),
            }))
        }
        Cmd::Shadow { job, csv } => {
            let cfg = resolve(&job)?;
            let j = build_job(&cfg)?;
            let cache = cache(false)?;
            let series = rademacher::shadow_coefficients(
                &j,
                cfg.k_max,
                cfg.c_max,
                cache.as_ref(),
                &cfg.policy()?,
            )?;
            if let Some(path) = csv {
                write_csv(&series, &path)?;
            }
            Ok(json!({
                "command": "shadow",
                "config": cfg.to_json(),
                "provenance": provenance(&cfg, &cache),
                "result": series_json(&series),
            }))
        }
        Cmd::Kloosterman { job, n, k, c } => {
            let cfg = resolve(&job)?;
            let rho = cfg.build_multiplier()?;
            let cusp = cfg.find_cusp()?;
            let n = parse_rational(&n)?;
            let k = parse_rational(&k)?;
            let mat = kloosterman::kloosterman_sum(&cfg.group, &rho, &cusp, n, k, c)?;
            let entries: Vec<Value> = (0..mat.dim)
                .map(|jj| {
                    Value::Array(
                        (0..mat.dim)
                            .map(|ii| complex_json(mat.get(jj, ii), 0.0, "exact-sum"))
                            .collect(),
                    )
                })
                .collect();
            Ok(json!({
                "command": "kloosterman",
                "config": cfg.to_json(),
                "provenance": {"n": fmt_rational(n), "k": fmt_rational(k), "c": c},
                "result": {"matrix": entries},
            }))
        }
        Cmd::Zeta { job, n, k, s } => {
            let cfg = resolve(&job)?;
            let rho = cfg.build_multiplier()?;
            let cusp = cfg.find_cusp()?;
            let n = parse_rational(&n)?;
            let k = parse_rational(&k)?;
            let s = parse_complex(&s)?;
            let cache = cache(false)?;
            let zp = kloosterman::zeta_partial(
                &cfg.group,
                &rho,
                &cusp,
                n,
                k,
                s,
                cfg.c_max,
                cache.as_ref(),
                &cfg.policy()?,
            )?;
            let checkpoints: Vec<Value> = zp
                .checkpoints
                .iter()
                .map(|(c, m)| {
                    json!({"c": c, "value": complex_json(m.get(0, 0), zp.tail_estimate, "partial")})
                })
                .collect();
            Ok(json!({
                "command": "zeta",
                "config": cfg.to_json(),
                "provenance": provenance(&cfg, &cache),
                "result": {
                    "s": [s.re, s.im],
                    "value": complex_json(zp.value.get(0, 0), zp.tail_estimate, "partial"),
                    "tail_estimate": zp.tail_estimate,
                    "checkpoints": checkpoints,
                },
            }))
        }
        Cmd::Delta { job } => {
            let cfg = resolve(&job)?;
            let j = build_job(&cfg)?;
            let cache = cache(false)?;
            let dv = rademacher::delta_constant(&j, cfg.c_max, cache.as_ref(), &cfg.policy()?)?;
            let values: Vec<Value> = dv
                .values
                .iter()
                .zip(&dv.errors)
                .map(|(&z, &e)| complex_json(z, e, dv.status.as_str()))
                .collect();
            Ok(json!({
                "command": "delta",
                "config": cfg.to_json(),
                "provenance": provenance(&cfg, &cache),
                "result": {"delta": values},
            }))
        }
        Cmd::Asymptotic { job, k } => {
            let cfg = resolve(&job)?;
            let j = build_job(&cfg)?;
            let k = parse_rational(&k)?;
            let cache = cache(false)?;
            let est = rademacher::asymptotic_estimate(&j, k, cfg.c_max, cache.as_ref())?;
            Ok(json!({
                "command": "asymptotic",
                "config": cfg.to_json(),
                "provenance": provenance(&cfg, &cache),
                "result": {"k": fmt_rational(k), "estimate": complex_json(est, f64::NAN, "leading-order")},
            }))
        }
        Cmd::Dims { job, m } => {
            let cfg = resolve(&job)?;
            let rho = cfg.build_multiplier()?;
            let dim = rademacher::dimension_bound(&rho, cfg.weight, m);
            Ok(json!({
                "command": "dims",
                "config": cfg.to_json(),
                "provenance": {"m": m},
                "result": {"dimension": dim, "err": 0, "status": "exact"},
            }))
        }
        Cmd::Basis { job, m } => {
            let cfg = resolve(&job)?;
            let rho = cfg.build_multiplier()?;
            let basis = rademacher::basis_spec(&cfg.group, &rho, cfg.weight, m);
            let poles: Vec<Value> = basis
                .poles
                .iter()
                .map(|(i, n)| json!({"component": i + 1, "exponent": fmt_rational(*n)}))
                .collect();
            Ok(json!({
                "command": "basis",
                "config": cfg.to_json(),
                "provenance": {"m": m},
                "result": {"poles": poles, "include_constants": basis.include_constants},
            }))
        }
        Cmd::Evaluate { job, tau, poincare } => {
            let cfg = resolve(&job)?;
            let tau = parse_complex(&tau)?;
            let cache = cache(false)?;
            let report = if poincare {
                let rho = cfg.build_multiplier()?;
                let wprime = rat_f64(cfg.weight);
                oracle::poincare_direct(
                    &cfg.group,
                    &rho,
                    wprime,
                    -cfg.exponent,
                    cfg.component - 1,
                    tau,
                    cfg.c_max,
                    &cfg.policy()?,
                )?
            } else {
                let j = build_job(&cfg)?;
                oracle::rademacher_partial(
                    &j,
                    tau,
                    cfg.rect_k,
                    cfg.c_max.max(1024),
                    cache.as_ref(),
                    &cfg.policy()?,
                )?
            };
            let trend: Vec<Value> = report
                .trend
                .iter()
                .map(|(k, v)| {
                    json!({
                        "truncation": k,
                        "values": v.iter().map(|z| json!([z.re, z.im])).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let values: Vec<Value> = report
                .values
                .iter()
                .map(|&z| complex_json(z, report.error_estimate, "trend"))
                .collect();
            Ok(json!({
                "command": "evaluate",
                "config": cfg.to_json(),
                "provenance": provenance(&cfg, &cache),
                "result": {"tau": [tau.re, tau.im], "values": values, "trend": trend},
            }))
        }
        Cmd::Verify { job } => {
            let cfg = resolve(&job)?;
            let cache = cache(false)?;
            let report = run_verify(&cfg, cache.as_ref())?;
            Ok(report)
        }
        Cmd::Cache { action } => {
            let store = KloostermanCache::new(cache_dir())?;
            match action {
                CacheCmd::Inspect => {
                    let files: Vec<Value> = store
                        .inspect()?
                        .into_iter()
                        .map(|(name, size)| json!({"file": name, "bytes": size}))
                        .collect();
                    Ok(json!({
                        "command": "cache inspect",
                        "result": {"dir": store.dir().display().to_string(), "tables": files},
                    }))
                }
                CacheCmd::Clear => {
                    let n = store.clear()?;
                    Ok(json!({
                        "command": "cache clear",
                        "result": {"dir": store.dir().display().to_string(), "removed": n},
                    }))
                }
            }
        }
    }
}

fn rat_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// The oracle battery behind `radsum verify`: series/direct agreement at
/// two sample points, shadow period two-method residual, and (for w < 0)
/// the automorphy residual ladder. Any non-shrinking trend or budget
/// violation is a convergence failure (exit 3).
fn run_verify(cfg: &JobConfig, cache: Option<&KloostermanCache>) -> Result<Value> {
    let j = build_job(cfg)?;
    let policy = cfg.policy()?;
    let mut checks: Vec<Value> = Vec::new();
    let mut all_ok = true;

    let series = rademacher::coefficients(&j, cfg.k_max, cfg.c_max, cache, &policy)?;
    for tau in [Complex64::new(0.0, 0.8), Complex64::new(0.3, 1.1)] {
        let (sv, serr) = series.eval(tau);
        let rep = oracle::rademacher_partial(&j, tau, cfg.rect_k, cfg.c_max.max(1024), cache, &policy)?;
        let gap = sv
            .iter()
            .zip(&rep.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let budget = (serr + rep.error_estimate).max(1e-2);
        let shrinking = rep.trend_is_shrinking();
        let pass = gap <= budget && shrinking;
        all_ok &= pass;
        checks.push(json!({
            "check": "series_vs_direct",
            "tau": [tau.re, tau.im],
            "gap": gap,
            "budget": budget,
            "trend_shrinking": shrinking,
            "pass": pass,
        }));
    }

    if cfg.weight < Rational64::zero() {
        let shadow = rademacher::shadow_coefficients(&j, cfg.k_max, cfg.c_max, cache, &policy)?;
        let tau = Complex64::new(0.3, 1.1);
        let (_, period_resid) = oracle::shadow_period(rat_f64(cfg.weight), tau, &shadow, &policy)?;
        let pass = period_resid < 1e-6;
        all_ok &= pass;
        checks.push(json!({
            "check": "shadow_period_two_method",
            "residual": period_resid,
            "budget": 1e-6,
            "pass": pass,
        }));

        let gamma = radsum_core::group::GroupElement::s();
        let mut last = f64::INFINITY;
        let mut residuals = Vec::new();
        for frac in [4i64, 2, 1] {
            let km = Rational64::new(
                (cfg.k_max.numer() / frac).max(*cfg.k_max.denom()),
                *cfg.k_max.denom(),
            );
            let cm = (cfg.c_max / frac).max(16);
            let f = rademacher::coefficients(&j, km, cm, cache, &policy)?;
            let g = rademacher::shadow_coefficients(&j, km, cm, cache, &policy)?;
            let res =
                oracle::verify_automorphy(&f, &g, &j.multiplier, &gamma, Complex64::new(0.3, 0.9))?;
            residuals.push(res.completion);
            last = res.completion;
        }
        let shrinking = residuals.windows(2).all(|w| w[1] <= w[0] * 1.05 + 1e-12);
        let pass = shrinking && last < 1e-3;
        all_ok &= pass;
        checks.push(json!({
            "check": "automorphy_completion",
            "residual_ladder": residuals,
            "final_budget": 1e-3,
            "pass": pass,
        }));
    }

    if !all_ok {
        return Err(RadError::NonConvergent(
            "verify: a trend failed to shrink or a budget was exceeded".into(),
        ));
    }
    Ok(json!({
        "command": "verify",
        "config": cfg.to_json(),
        "result": {"checks": checks, "pass": all_ok},
    }))
}
