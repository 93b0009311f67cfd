//! Sweeps, presets and result emission behind the command-line tool.

mod config;
mod emit;
mod presets;

pub use config::{
    apply_overrides, check, load_config, parse_config, Analysis, Source, SystemConfig,
};
pub use emit::{
    config_from_csv_str, emit_results, from_csv_str, read_json, sidecar_path, to_csv_string,
    Format, ResultRow, CSV_HEADER,
};
pub use presets::{describe, preset_config, PRESETS};

use crate::analytic::{
    ergodic_common_pdiv, ergodic_common_pmux, ergodic_private_pdiv, ergodic_private_pmux, outage,
    outage_sum_rate, outage_total, AnalyticParams, Stream,
};
use crate::error::Result;
use crate::mc::{
    self, McRequest, Metric, MetricEstimate, Scenario, Study, SweepPoint, TrialPlan, UserKey,
};
use crate::schemes::Scheme;

fn row(
    cfg: &SystemConfig,
    scheme: &str,
    user: UserKey,
    p: &SweepPoint,
    e: &MetricEstimate,
    source: Source,
) -> ResultRow {
    ResultRow {
        scheme: scheme.to_string(),
        group: cfg.group,
        user: user.to_string(),
        snr_db: p.snr_db,
        chi: p.imp.chi,
        xi: p.imp.xi,
        csi_error: p.imp.csi_error,
        metric: e.metric.tag().to_string(),
        source: source.tag().to_string(),
        value: e.value,
        std_error: e.std_error,
        trials: e.trials,
        seed: if source == Source::Mc { cfg.seed } else { 0 },
    }
}

/// Closed-form parameters of every user at one sweep point.
pub fn analytic_params(cfg: &SystemConfig, sc: &Scenario, p: &SweepPoint) -> Vec<AnalyticParams> {
    let powers = &sc.powers;
    (0..sc.users())
        .map(|u| {
            AnalyticParams::new(
                sc.phi,
                sc.zeta[u],
                powers.alpha,
                powers.beta[u],
                p.imp.chi,
                p.imp.xi,
                sc.users(),
                1.0 / p.noise_var(),
            )
            .with_rates(cfg.rate_common, cfg.rate_private[u])
        })
        .collect()
}

fn analytic_rows(
    cfg: &SystemConfig,
    sc: &Scenario,
    points: &[SweepPoint],
    out: &mut Vec<ResultRow>,
) -> Result<()> {
    for &scheme in &cfg.schemes {
        if !matches!(scheme, Scheme::Pmux | Scheme::Pdiv | Scheme::Spmux) {
            continue;
        }
        for p in points {
            let ps = analytic_params(cfg, sc, p);
            if cfg.analyses.contains(&Analysis::Outage) {
                let labels: Vec<String> = if scheme == Scheme::Spmux {
                    vec!["spmux-v".into(), "spmux-h".into()]
                } else {
                    vec![scheme.tag().into()]
                };
                let mut pairs = Vec::with_capacity(ps.len());
                for q in &ps {
                    pairs.push((
                        outage(scheme, Stream::Common, q)?,
                        outage(scheme, Stream::Private, q)?,
                    ));
                }
                let layer_sum = outage_sum_rate(&pairs, cfg.rate_common, &cfg.rate_private)?;
                for label in &labels {
                    for (u, &(pc, pp)) in pairs.iter().enumerate() {
                        let user = UserKey::User(u);
                        out.push(row(
                            cfg,
                            label,
                            user,
                            p,
                            &MetricEstimate::exact(Metric::OutageCommon, pc),
                            Source::Analytic,
                        ));
                        out.push(row(
                            cfg,
                            label,
                            user,
                            p,
                            &MetricEstimate::exact(Metric::OutagePrivate, pp),
                            Source::Analytic,
                        ));
                        let tot = MetricEstimate::exact(Metric::OutageTotal, outage_total(pc, pp)?);
                        out.push(row(cfg, label, user, p, &tot, Source::Analytic));
                    }
                    if labels.len() > 1 {
                        let e = MetricEstimate::exact(Metric::OutageSumRate, layer_sum);
                        out.push(row(cfg, label, UserKey::Sum, p, &e, Source::Analytic));
                    }
                }
                let net =
                    MetricEstimate::exact(Metric::OutageSumRate, layer_sum * labels.len() as f64);
                out.push(row(
                    cfg,
                    scheme.tag(),
                    UserKey::Sum,
                    p,
                    &net,
                    Source::Analytic,
                ));
            }
            if cfg.analyses.contains(&Analysis::Ergodic) && scheme != Scheme::Spmux {
                let (c, pr) = if scheme == Scheme::Pmux {
                    (ergodic_common_pmux(&ps)?, ergodic_private_pmux(&ps)?)
                } else {
                    (ergodic_common_pdiv(&ps)?, ergodic_private_pdiv(&ps)?)
                };
                for (m, v) in [
                    (Metric::ErgodicCommon, c),
                    (Metric::ErgodicPrivate, pr),
                    (Metric::ErgodicSum, c + pr),
                ] {
                    out.push(row(
                        cfg,
                        scheme.tag(),
                        UserKey::Sum,
                        p,
                        &MetricEstimate::exact(m, v),
                        Source::Analytic,
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Runs every analysis and source the config asks for. Rows come out in a
/// fixed order: analytic before simulated, outage before ergodic.
pub fn run_config(cfg: &SystemConfig, workers: usize) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let sc = Scenario::from_config(cfg)?;
    let points = cfg.sweep_points();
    let mut rows = Vec::new();
    if cfg.sources.contains(&Source::Analytic) {
        analytic_rows(cfg, &sc, &points, &mut rows)?;
    }
    if cfg.sources.contains(&Source::Mc) {
        let rates = cfg.rates();
        for (analysis, study, n) in [
            (Analysis::Outage, Study::Outage, cfg.trials_outage),
            (Analysis::Ergodic, Study::Ergodic, cfg.trials_ergodic),
        ] {
            if !cfg.analyses.contains(&analysis) {
                continue;
            }
            let req = McRequest {
                scenario: &sc,
                schemes: &cfg.schemes,
                points: &points,
                study,
                rates: &rates,
                plan: TrialPlan::new(cfg.seed, n, workers),
            };
            for e in mc::run(&req)? {
                rows.push(row(
                    cfg,
                    &e.slot.label,
                    e.slot.user,
                    &points[e.point],
                    &e.estimate,
                    Source::Mc,
                ));
            }
        }
    }
    Ok(rows)
}

/// Resolves a preset with overrides and runs it.
pub fn run_preset(
    name: &str,
    overrides: &[String],
    workers: usize,
) -> Result<(SystemConfig, Vec<ResultRow>)> {
    let cfg = apply_overrides(&preset_config(name)?, overrides)?;
    let rows = run_config(&cfg, workers)?;
    Ok((cfg, rows))
}
