//! The three commands. Each writes its files and a manifest into the output
//! directory and returns the process exit code.

use serde::Serialize;
use xylab::estimators::{
    estimate_cov_series, estimate_sign_cov_series, estimate_two_point_series, fit_mass, main_theorem_demo,
    ratio_from_series, DemoConfig, FitRecord, FitWindow, MassFit, MassRatio, SamplerKind, SeriesConfig,
    SeriesEntry, SeriesEstimate, RATIO_BAND,
};
use xylab::graphs::LatticeBox;
use xylab::oracle::CheckRecord;
use xylab::sampler::McmcConfig;

use crate::config::{ExperimentConfig, Observable};
use crate::manifest::{OutputSet, RunLog};
use crate::verify::{run_suite, SuiteOptions};
use crate::{CliError, EXIT_CHECK_FAILED, EXIT_OK};

/// Below this box size the asymptotic window holds fewer than three points.
pub const MIN_DEMO_N: usize = 8;

const DEFAULT_SWEEPS: u64 = 20_000;
const DEFAULT_BURNIN: u64 = 1_000;

#[derive(Serialize)]
struct VerifyReport<'a> {
    tier: u8,
    inject_fault: bool,
    pass: bool,
    failed: Vec<&'a str>,
    records: &'a [CheckRecord],
}

pub fn cmd_verify(cfg: &ExperimentConfig) -> Result<i32, CliError> {
    let mut out = OutputSet::create(&cfg.resolved_out_dir())?;
    let mut log = RunLog::new("verify", cfg);
    let records = run_suite(&SuiteOptions {
        tier: cfg.tier,
        seed: cfg.seed,
        policy: cfg.truncation,
        inject_fault: cfg.inject_fault,
    })?;
    for r in &records {
        log.record(r);
        if !r.pass {
            log.note(format!(
                "failed: {} [{}] lhs {} rhs {} slack {}",
                r.check, r.instance, r.lhs, r.rhs, r.slack
            ));
        }
    }
    let failed: Vec<&str> = records
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.check.as_str())
        .collect();
    let pass = failed.is_empty();
    out.write_json(
        "verify_report.json",
        &VerifyReport {
            tier: cfg.tier,
            inject_fault: cfg.inject_fault,
            pass,
            failed: failed.clone(),
            records: &records,
        },
    )?;
    let code = if pass { EXIT_OK } else { EXIT_CHECK_FAILED };
    log.finish(&mut out, code)?;
    Ok(code)
}

/// Series settings for `observable`, with unset chain parameters filled
/// from the defaults.
fn series_config(cfg: &ExperimentConfig, sampler_default: SamplerKind) -> SeriesConfig {
    SeriesConfig {
        sampler: cfg.sampler.unwrap_or(sampler_default),
        chain: McmcConfig {
            sweeps: cfg.sweeps.unwrap_or(DEFAULT_SWEEPS),
            burnin: cfg.burnin.unwrap_or(DEFAULT_BURNIN),
            thin: cfg.thin.unwrap_or(1),
            seed: cfg.seed,
            ..McmcConfig::default()
        },
        chains: cfg.chains,
        batches: cfg.batches,
        max_attempts: cfg.max_attempts,
        bulk_margin: cfg.bulk_margin,
        ..SeriesConfig::default()
    }
}

fn write_series(out: &mut OutputSet, s: &SeriesEstimate) -> Result<(), CliError> {
    out.write(&format!("{}.csv", s.name), s.to_csv()?.as_bytes())
}

fn write_fit(
    out: &mut OutputSet,
    log: &mut RunLog,
    s: &SeriesEstimate,
    window: FitWindow,
    cfg: &ExperimentConfig,
) -> Result<Option<MassFit>, CliError> {
    match fit_mass(s, window) {
        Ok(f) => {
            out.write_json(
                &format!("{}_fit.json", s.name),
                &FitRecord::new(&f, cfg.n, cfg.beta, cfg.seed),
            )?;
            Ok(Some(f))
        }
        Err(e) => {
            log.note(format!("{}: no mass fit: {e}", s.name));
            Ok(None)
        }
    }
}

pub fn cmd_estimate(cfg: &ExperimentConfig) -> Result<i32, CliError> {
    let observable = cfg
        .observable
        .ok_or_else(|| CliError::Usage("estimate needs an observable".into()))?;
    let lattice = LatticeBox::new(cfg.n);
    let k_max = cfg.k_max();
    let window = cfg.window.window(cfg.n);
    let mut echoed = cfg.clone();
    let sampler_default = match observable {
        Observable::TwoPoint => SamplerKind::Worm,
        _ => SamplerKind::Mcmc,
    };
    let scfg = series_config(cfg, sampler_default);
    echoed.sampler = Some(scfg.sampler);
    echoed.sweeps = Some(scfg.chain.sweeps);
    echoed.burnin = Some(scfg.chain.burnin);
    echoed.thin = Some(scfg.chain.thin);
    echoed.k_max = Some(k_max);
    scfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let mut out = OutputSet::create(&echoed.resolved_out_dir())?;
    let mut log = RunLog::new("estimate", &echoed);
    let stem = observable.file_stem();
    match observable {
        Observable::TwoPoint => {
            let mut s = estimate_two_point_series(&lattice, cfg.beta, k_max, &scfg)?;
            s.name = stem.into();
            write_series(&mut out, &s)?;
            write_fit(&mut out, &mut log, &s, window, cfg)?;
        }
        Observable::Cov => {
            let mut scfg = scfg;
            scfg.surrounding = true;
            let c = estimate_cov_series(&lattice, cfg.beta, k_max, &scfg)?;
            let mut fitted = c.surrounding.expect("requested");
            fitted.name = stem.into();
            let mut height = c.height;
            height.name = format!("{stem}_height");
            let mut diff = c.difference.expect("requested");
            diff.name = format!("{stem}_difference");
            for s in [&fitted, &height, &diff] {
                write_series(&mut out, s)?;
            }
            write_fit(&mut out, &mut log, &fitted, window, cfg)?;
        }
        Observable::SignCov => {
            let c = estimate_sign_cov_series(&lattice, cfg.beta, k_max, &scfg)?;
            let mut sign = c.sign;
            sign.name = stem.into();
            let mut fk = c.connectivity;
            fk.name = "fk_connectivity".into();
            let mut diff = c.difference;
            diff.name = format!("{stem}_difference");
            for s in [&sign, &fk, &diff] {
                write_series(&mut out, s)?;
            }
            write_fit(&mut out, &mut log, &sign, window, cfg)?;
        }
    }
    log.finish(&mut out, EXIT_OK)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct DemoSummary<'a> {
    beta: f64,
    n: usize,
    seed: u64,
    synthetic: bool,
    window: FitWindow,
    band: (f64, f64),
    in_band: bool,
    ratio: Option<MassRatio>,
    fit_two_point: Option<&'a MassFit>,
    fit_cov: Option<&'a MassFit>,
    notes: &'a [String],
}

/// `exp(-m k)` for `k = 0..=k_max` with relative error `1e-4`.
fn synthetic_series(name: &str, m: f64, k_max: usize) -> SeriesEstimate {
    SeriesEstimate::new(
        name,
        (0..=k_max)
            .map(|k| {
                let v = (-m * k as f64).exp();
                SeriesEntry {
                    k,
                    estimate: v,
                    se: 1e-4 * v,
                    n_samples: 0,
                }
            })
            .collect(),
    )
}

pub fn cmd_demo(cfg: &ExperimentConfig) -> Result<i32, CliError> {
    let window = cfg.window.window(cfg.n);
    let mut demo = DemoConfig::new(cfg.beta, cfg.n, cfg.seed);
    demo.window = window;
    demo.two_point.chains = cfg.chains;
    demo.cov.chains = cfg.chains;
    for s in [&mut demo.two_point, &mut demo.cov] {
        if let Some(k) = cfg.sampler {
            s.sampler = k;
        }
        if let Some(v) = cfg.sweeps {
            s.chain.sweeps = v;
        }
        if let Some(v) = cfg.burnin {
            s.chain.burnin = v;
        }
        if let Some(v) = cfg.thin {
            s.chain.thin = v;
        }
        s.batches = cfg.batches;
        s.max_attempts = cfg.max_attempts;
    }
    if cfg.bulk_margin.is_some() {
        demo.cov.bulk_margin = cfg.bulk_margin;
    }
    let mut echoed = cfg.clone();
    echoed.sampler = Some(demo.cov.sampler);
    echoed.sweeps = Some(demo.cov.chain.sweeps);
    echoed.burnin = Some(demo.cov.chain.burnin);
    echoed.thin = Some(demo.cov.chain.thin);
    echoed.bulk_margin = demo.cov.bulk_margin;

    let mut out = OutputSet::create(&echoed.resolved_out_dir())?;
    let mut log = RunLog::new("demo-main-theorem", &echoed);
    if cfg.n < MIN_DEMO_N {
        log.note(format!(
            "n = {} < {MIN_DEMO_N}: the fit window is degenerate",
            cfg.n
        ));
    }
    let k_max = match window {
        FitWindow::Fixed { k_max, .. } | FitWindow::Usable { k_max, .. } => k_max.min(cfg.n),
    };
    let (two_point, cov, extra) = if cfg.synthetic {
        (
            synthetic_series("two_point", 0.2, k_max),
            synthetic_series("cov", 0.4, k_max),
            Vec::new(),
        )
    } else {
        let r = main_theorem_demo(&demo)?;
        let mut tp = r.two_point;
        tp.name = "two_point".into();
        let mut extra = vec![r.cov_height];
        extra[0].name = "cov_height".into();
        if let Some(mut s) = r.sign_cov {
            s.name = "sign_cov".into();
            extra.push(s);
        }
        (tp, r.cov, extra)
    };
    let (fx, fh, ratio, notes) = ratio_from_series(&two_point, &cov, window);
    for n in notes {
        log.note(n);
    }
    for s in [&two_point, &cov].into_iter().chain(&extra) {
        write_series(&mut out, s)?;
    }
    for (f, name) in [(&fx, "two_point"), (&fh, "cov")] {
        if let Some(f) = f {
            out.write_json(
                &format!("{name}_fit.json"),
                &FitRecord::new(f, cfg.n, cfg.beta, cfg.seed),
            )?;
        }
    }
    let in_band = ratio.is_some_and(|r| (RATIO_BAND.0..=RATIO_BAND.1).contains(&r.value));
    match &ratio {
        Some(r) => log::info!("m_H / m_XY = {:.4} [{:.4}, {:.4}]", r.value, r.ci_lo, r.ci_hi),
        None => log.note("no mass ratio"),
    }
    let notes = log.notes.clone();
    out.write_json(
        "demo_report.json",
        &DemoSummary {
            beta: cfg.beta,
            n: cfg.n,
            seed: cfg.seed,
            synthetic: cfg.synthetic,
            window,
            band: RATIO_BAND,
            in_band,
            ratio,
            fit_two_point: fx.as_ref(),
            fit_cov: fh.as_ref(),
            notes: &notes,
        },
    )?;
    let code = if in_band { EXIT_OK } else { EXIT_CHECK_FAILED };
    log.finish(&mut out, code)?;
    Ok(code)
}
