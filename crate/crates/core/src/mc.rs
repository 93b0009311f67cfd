//! Monte Carlo estimation of outage probabilities, outage sum-rates and
//! ergodic rates.
//!
//! Trial `t` draws everything from `ChaCha8(seed)` on stream `t`, so results
//! do not depend on how trials are spread over workers. Trials are grouped in
//! fixed blocks; block moments are merged in block order.
//!
//! One trial draw serves every sweep point: SNR, `χ` and `ξ` only enter the
//! SINR formulas, and the CSI error noise is shared across error levels.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    build_one_ring_covariance, complex_normal_vec, mix_csi_error, truncate_rank, CovarianceModel,
    GroupGeometry, UserLinkParams, C64,
};
use crate::error::{Error, Result};
use crate::precoder::{build_outer_precoder, OuterPrecoder};
use crate::runner::SystemConfig;
use crate::schemes::{
    sinr, GroupLinks, ImpairmentParams, PowerAllocation, PrecoderSet, Scheme, SinrOutcome,
};

/// Trials per reduction block.
pub const BLOCK: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    OutageCommon,
    OutagePrivate,
    OutageTotal,
    OutageSumRate,
    ErgodicCommon,
    ErgodicPrivate,
    ErgodicSum,
}

impl Metric {
    pub fn tag(self) -> &'static str {
        match self {
            Metric::OutageCommon => "outage_common",
            Metric::OutagePrivate => "outage_private",
            Metric::OutageTotal => "outage_total",
            Metric::OutageSumRate => "outage_sum_rate",
            Metric::ErgodicCommon => "ergodic_common",
            Metric::ErgodicPrivate => "ergodic_private",
            Metric::ErgodicSum => "ergodic_sum",
        }
    }

    pub fn is_probability(self) -> bool {
        matches!(
            self,
            Metric::OutageCommon | Metric::OutagePrivate | Metric::OutageTotal
        )
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricEstimate {
    pub metric: Metric,
    pub value: f64,
    pub std_error: f64,
    pub trials: u64,
}

impl MetricEstimate {
    /// Exact value, no sampling error.
    pub fn exact(metric: Metric, value: f64) -> Self {
        MetricEstimate {
            metric,
            value,
            std_error: 0.0,
            trials: 0,
        }
    }

    /// Empirical proportion with binomial standard error.
    pub fn proportion(metric: Metric, hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        MetricEstimate {
            metric,
            value: p,
            std_error: (p * (1.0 - p) / n as f64).sqrt(),
            trials: n,
        }
    }

    fn from_moments(metric: Metric, m: &Moments) -> Self {
        if metric.is_probability() {
            let hits = (m.mean * m.n as f64).round() as u64;
            return MetricEstimate::proportion(metric, hits, m.n);
        }
        let var = if m.n > 1 {
            m.m2 / (m.n - 1) as f64
        } else {
            0.0
        };
        MetricEstimate {
            metric,
            value: m.mean,
            std_error: (var / m.n as f64).sqrt(),
            trials: m.n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TrialPlan {
    pub seed: u64,
    pub n_trials: u64,
    pub worker_hint: usize,
}

impl TrialPlan {
    pub fn new(seed: u64, n_trials: u64, worker_hint: usize) -> Self {
        TrialPlan {
            seed,
            n_trials,
            worker_hint,
        }
    }

    /// `RSMA_SIM_WORKERS` if set, otherwise the machine's parallelism.
    pub fn default_workers() -> usize {
        std::env::var("RSMA_SIM_WORKERS")
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&w| w >= 1)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

/// Welford accumulator, merged with Chan's formula.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, o: &Moments) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n as f64;
        self.m2 += o.m2 + d * d * (self.n as f64) * (o.n as f64) / n as f64;
        self.n = n;
    }
}

/// One operating point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub imp: ImpairmentParams,
}

impl SweepPoint {
    pub fn noise_var(&self) -> f64 {
        10f64.powf(-self.snr_db / 10.0)
    }
}

/// Fixed, covariance-level part of the system: everything that does not
/// change between coherence blocks.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// Rank-truncated covariances of all groups.
    pub covs: Vec<CovarianceModel>,
    pub group: usize,
    pub outer: OuterPrecoder,
    /// `F^H U Λ^{1/2}`, `(M̄/2) x r̄`.
    pub map: DMatrix<C64>,
    pub zeta: Vec<f64>,
    pub phi: f64,
    pub powers: PowerAllocation,
}

impl Scenario {
    pub fn from_config(cfg: &SystemConfig) -> Result<Self> {
        let half = cfg.antennas / 2;
        let mut covs = Vec::with_capacity(cfg.groups);
        for g in 0..cfg.groups {
            let geom = GroupGeometry {
                azimuth_deg: cfg.azimuths_deg[g],
                distance_m: cfg.group_distance_m,
                radius_m: cfg.group_radius_m,
                user_distances_m: cfg.user_distances_m.clone(),
            };
            let full = build_one_ring_covariance(&geom, half, cfg.spacing_wavelengths)?;
            covs.push(truncate_rank(&full, cfg.m_bar, cfg.groups)?);
        }
        let outer = build_outer_precoder(&covs, cfg.group, cfg.m_bar)?;
        let map = outer.effective_map(&covs[cfg.group]);
        let phi = crate::analytic::phi_factor(&outer, &covs[cfg.group])?;
        let zeta = cfg
            .user_distances_m
            .iter()
            .map(|&d| UserLinkParams::from_distance(cfg.delta, cfg.eta, d).zeta)
            .collect();
        Ok(Scenario {
            covs,
            group: cfg.group,
            outer,
            map,
            zeta,
            phi,
            powers: cfg.power_allocation(),
        })
    }

    pub fn users(&self) -> usize {
        self.zeta.len()
    }

    pub fn reduced_dim(&self) -> usize {
        self.map.ncols()
    }
}

/// Channels and precoders of one trial, one precoder set per CSI level.
pub struct TrialDraw {
    pub links: GroupLinks,
    pub precoders: Vec<PrecoderSet>,
}

/// Draws trial `t`. The precoder randomness is identical for every CSI level.
pub fn draw_trial(sc: &Scenario, seed: u64, t: u64, csi_levels: &[f64]) -> Result<TrialDraw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t);
    let u = sc.users();
    let r = sc.reduced_dim();
    let mut g = Vec::with_capacity(u);
    let mut err = Vec::with_capacity(u);
    for _ in 0..u {
        g.push([0; 4].map(|_| complex_normal_vec(r, &mut rng)));
    }
    for _ in 0..u {
        err.push([0; 4].map(|_| complex_normal_vec(r, &mut rng)));
    }
    let links_for = |blocks: &dyn Fn(usize, usize) -> DVector<C64>| GroupLinks {
        zeta: sc.zeta.clone(),
        vv: (0..u).map(|k| &sc.map * blocks(k, 0)).collect(),
        vh: (0..u).map(|k| &sc.map * blocks(k, 1)).collect(),
        hv: (0..u).map(|k| &sc.map * blocks(k, 2)).collect(),
        hh: (0..u).map(|k| &sc.map * blocks(k, 3)).collect(),
    };
    let links = links_for(&|k, b| g[k][b].clone());
    let mut precoders = Vec::with_capacity(csi_levels.len());
    for &eps in csi_levels {
        let mut prng = rng.clone();
        let known = if eps == 0.0 {
            links.clone()
        } else {
            links_for(&|k, b| mix_csi_error(&g[k][b], &err[k][b], eps))
        };
        precoders.push(PrecoderSet::build(&known, &mut prng)?);
    }
    Ok(TrialDraw { links, precoders })
}

/// Who a result row is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UserKey {
    User(usize),
    Sum,
}

impl fmt::Display for UserKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UserKey::User(u) => write!(f, "{u}"),
            UserKey::Sum => f.write_str("sum"),
        }
    }
}

/// What to estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    Outage,
    Ergodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    /// Scheme tag, with a `-v`/`-h` suffix for per-polarization layers.
    pub label: String,
    pub user: UserKey,
    pub metric: Metric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub scheme: Scheme,
    pub point: usize,
    pub slot: Slot,
    pub estimate: MetricEstimate,
}

/// Target rates: `R^c` and one `R^p` per user.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    pub common: f64,
    pub private: Vec<f64>,
}

fn layer_label(scheme: Scheme, outcome: &SinrOutcome, i: usize) -> String {
    if outcome.layers.len() > 1 {
        format!("{}-{}", scheme.tag(), outcome.layers[i].label)
    } else {
        scheme.tag().to_string()
    }
}

/// Turns one SINR outcome into per-slot observations. `slots` is filled only
/// when given, so the layout is described once.
fn observe(
    scheme: Scheme,
    outcome: &SinrOutcome,
    study: Study,
    rates: &Rates,
    out: &mut Vec<f64>,
    mut slots: Option<&mut Vec<Slot>>,
) {
    let mut put = |label: &dyn Fn() -> String, user: UserKey, metric: Metric, v: f64| {
        out.push(v);
        if let Some(s) = slots.as_deref_mut() {
            s.push(Slot {
                label: label(),
                user,
                metric,
            });
        }
    };
    let ts = outcome.time_share;
    let rate = |g: f64| (1.0 + g).log2() * ts;
    match study {
        Study::Outage => {
            let mut net = 0.0;
            for (i, layer) in outcome.layers.iter().enumerate() {
                let lab = || layer_label(scheme, outcome, i);
                let mut sum = 0.0;
                for (u, &gp) in layer.private.iter().enumerate() {
                    match &layer.common {
                        Some(c) => {
                            let c_ok = rate(c[u]) >= rates.common;
                            let p_ok = rate(gp) >= rates.private[u];
                            put(
                                &lab,
                                UserKey::User(u),
                                Metric::OutageCommon,
                                f64::from(u8::from(!c_ok)),
                            );
                            put(
                                &lab,
                                UserKey::User(u),
                                Metric::OutagePrivate,
                                f64::from(u8::from(!p_ok)),
                            );
                            put(
                                &lab,
                                UserKey::User(u),
                                Metric::OutageTotal,
                                f64::from(u8::from(!(c_ok && p_ok))),
                            );
                            sum += f64::from(u8::from(c_ok)) * rates.common
                                + f64::from(u8::from(p_ok)) * rates.private[u];
                        }
                        None => {
                            let target = rates.common + rates.private[u];
                            let ok = rate(gp) >= target;
                            put(
                                &lab,
                                UserKey::User(u),
                                Metric::OutageTotal,
                                f64::from(u8::from(!ok)),
                            );
                            sum += f64::from(u8::from(ok)) * target;
                        }
                    }
                }
                if outcome.layers.len() > 1 {
                    put(&lab, UserKey::Sum, Metric::OutageSumRate, sum);
                }
                net += sum;
            }
            put(
                &|| scheme.tag().to_string(),
                UserKey::Sum,
                Metric::OutageSumRate,
                net,
            );
        }
        Study::Ergodic => {
            let mut common = 0.0;
            let mut private = 0.0;
            for layer in &outcome.layers {
                private += layer.private.iter().map(|&g| rate(g)).sum::<f64>();
                if let Some(c) = &layer.common {
                    let m = c.iter().map(|&g| rate(g)).fold(f64::INFINITY, f64::min);
                    common += c.len() as f64 * m;
                }
            }
            let lab = || scheme.tag().to_string();
            if scheme.is_rsma() {
                put(&lab, UserKey::Sum, Metric::ErgodicCommon, common);
                put(&lab, UserKey::Sum, Metric::ErgodicPrivate, private);
            }
            put(&lab, UserKey::Sum, Metric::ErgodicSum, common + private);
        }
    }
}

/// Everything the engine needs for one batch of estimates.
pub struct McRequest<'a> {
    pub scenario: &'a Scenario,
    pub schemes: &'a [Scheme],
    pub points: &'a [SweepPoint],
    pub study: Study,
    pub rates: &'a Rates,
    pub plan: TrialPlan,
}

fn csi_levels(points: &[SweepPoint]) -> (Vec<f64>, Vec<usize>) {
    let mut levels: Vec<f64> = Vec::new();
    let mut index = Vec::with_capacity(points.len());
    for p in points {
        let k = match levels.iter().position(|&l| l == p.imp.csi_error) {
            Some(k) => k,
            None => {
                levels.push(p.imp.csi_error);
                levels.len() - 1
            }
        };
        index.push(k);
    }
    (levels, index)
}

type Layout = Vec<(Scheme, usize, Vec<Slot>)>;

fn run_block(
    req: &McRequest<'_>,
    levels: &[f64],
    level_of: &[usize],
    start: u64,
    end: u64,
    layout: &mut Option<Layout>,
) -> Result<Vec<Moments>> {
    let sc = req.scenario;
    let mut acc: Vec<Moments> = Vec::new();
    let mut obs = Vec::new();
    for t in start..end {
        let draw = draw_trial(sc, req.plan.seed, t, levels)?;
        obs.clear();
        let describe = layout.is_none();
        let mut lay: Layout = Vec::new();
        for &scheme in req.schemes {
            for (pi, p) in req.points.iter().enumerate() {
                let prec = &draw.precoders[level_of[pi]];
                let outcome = sinr(scheme, &draw.links, prec, &sc.powers, &p.imp, p.noise_var())?;
                if describe {
                    let mut slots = Vec::new();
                    observe(
                        scheme,
                        &outcome,
                        req.study,
                        req.rates,
                        &mut obs,
                        Some(&mut slots),
                    );
                    lay.push((scheme, pi, slots));
                } else {
                    observe(scheme, &outcome, req.study, req.rates, &mut obs, None);
                }
            }
        }
        if describe {
            *layout = Some(lay);
        }
        if acc.is_empty() {
            acc = vec![Moments::default(); obs.len()];
        }
        if acc.len() != obs.len() {
            return Err(Error::Consistency(
                "observation layout changed between trials".into(),
            ));
        }
        for (m, &x) in acc.iter_mut().zip(&obs) {
            m.push(x);
        }
    }
    Ok(acc)
}

/// Runs the trials of `req` and returns one estimate per slot, ordered by
/// scheme, then sweep point, then slot.
pub fn run(req: &McRequest<'_>) -> Result<Vec<McEstimate>> {
    let n = req.plan.n_trials;
    if n == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    if req.rates.private.len() != req.scenario.users() {
        return Err(Error::Config(format!(
            "{} private target rates for {} users",
            req.rates.private.len(),
            req.scenario.users()
        )));
    }
    for p in req.points {
        p.imp.validate()?;
    }
    let (levels, level_of) = csi_levels(req.points);
    let nblocks = n.div_ceil(BLOCK);
    let work = |b: u64| -> Result<(Vec<Moments>, Option<Layout>)> {
        let mut layout = None;
        let acc = run_block(
            req,
            &levels,
            &level_of,
            b * BLOCK,
            ((b + 1) * BLOCK).min(n),
            &mut layout,
        )?;
        Ok((acc, layout))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(req.plan.worker_hint.max(1))
        .build()
        .map_err(|e| Error::Numerical(format!("could not start worker pool: {e}")))?;
    let blocks: Vec<Result<(Vec<Moments>, Option<Layout>)>> =
        pool.install(|| (0..nblocks).into_par_iter().map(work).collect());
    let mut total: Vec<Moments> = Vec::new();
    let mut layout: Option<Layout> = None;
    for blk in blocks {
        let (acc, lay) = blk?;
        if layout.is_none() {
            layout = lay;
        }
        if total.is_empty() {
            total = acc;
        } else {
            for (t, a) in total.iter_mut().zip(&acc) {
                t.merge(a);
            }
        }
    }
    let layout = layout.ok_or_else(|| Error::Consistency("no trials were run".into()))?;
    let mut out = Vec::with_capacity(total.len());
    let mut k = 0;
    for (scheme, point, slots) in layout {
        for slot in slots {
            let estimate = MetricEstimate::from_moments(slot.metric, &total[k]);
            out.push(McEstimate {
                scheme,
                point,
                slot,
                estimate,
            });
            k += 1;
        }
    }
    Ok(out)
}

fn single(
    cfg: &SystemConfig,
    scheme: Scheme,
    plan: TrialPlan,
    study: Study,
) -> Result<Vec<McEstimate>> {
    cfg.validate()?;
    let sc = Scenario::from_config(cfg)?;
    let points = cfg.sweep_points();
    let rates = cfg.rates();
    let schemes = [scheme];
    run(&McRequest {
        scenario: &sc,
        schemes: &schemes,
        points: &points,
        study,
        rates: &rates,
        plan,
    })
}

/// Per-user common, private and joint outage (plus outage sum-rates) of one
/// scheme over the configured sweep.
pub fn estimate_outage(
    cfg: &SystemConfig,
    scheme: Scheme,
    plan: TrialPlan,
) -> Result<Vec<McEstimate>> {
    single(cfg, scheme, plan, Study::Outage)
}

/// Ergodic common, private and total rates of one scheme over the sweep.
pub fn estimate_ergodic(
    cfg: &SystemConfig,
    scheme: Scheme,
    plan: TrialPlan,
) -> Result<Vec<McEstimate>> {
    single(cfg, scheme, plan, Study::Ergodic)
}

/// Net outage sum-rate of one scheme, one estimate per sweep point.
pub fn estimate_outage_sum_rate(
    cfg: &SystemConfig,
    scheme: Scheme,
    plan: TrialPlan,
) -> Result<Vec<McEstimate>> {
    Ok(single(cfg, scheme, plan, Study::Outage)?
        .into_iter()
        .filter(|e| {
            e.slot.metric == Metric::OutageSumRate
                && e.slot.user == UserKey::Sum
                && e.slot.label == scheme.tag()
        })
        .collect())
}
