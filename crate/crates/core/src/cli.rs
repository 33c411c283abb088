//! Batch jobs: a JSON config names a potential and a list of tasks; the
//! runner validates everything up front, shares phase samples and spectra
//! between tasks, and writes a fixed set of report files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::ChannelId;
use crate::error::{Error, Result};
use crate::format::sci;
use crate::jost1d::{build_phase_table, PhaseTable};
use crate::par::Parallelism;
use crate::potentials::{Geometry, PotentialSpec};
use crate::riccati::OdeOptions;
use crate::spectrum::{bound_states, BoundStateSet};
use crate::sumrules::{
    buslaev_faddeev_cached, half_line_channel, levinson_cached, oversubtraction_cached, reports_to_csv,
    verify_cached, BuslaevFaddeevReport, LevinsonReport, OversubReport, PhaseCache, SumRuleOptions,
    SumRuleReport, PASS_TOL,
};
use crate::wkb::{figure1_csv, figure1_data, semiclassical_check, WkbEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KGrid {
    #[serde(default = "KGrid::default_min")]
    pub k_min: f64,
    /// Defaults to the sum-rule cut-off.
    #[serde(default)]
    pub k_max: Option<f64>,
    #[serde(default = "KGrid::default_points")]
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl KGrid {
    fn default_min() -> f64 {
        0.05
    }
    fn default_points() -> usize {
        200
    }

    pub fn points_up_to(&self, k_max: f64) -> Result<Vec<f64>> {
        let (a, b, n) = (self.k_min, k_max, self.points);
        if !(a > 0.0 && b > a && n >= 2) {
            return Err(Error::Config(format!("k_grid needs 0 < k_min < k_max and points ≥ 2 (got {a}, {b}, {n})")));
        }
        let t = |i: usize| i as f64 / (n - 1) as f64;
        Ok(match self.spacing {
            Spacing::Linear => (0..n).map(|i| a + (b - a) * t(i)).collect(),
            Spacing::Log => (0..n).map(|i| a * (b / a).powf(t(i))).collect(),
        })
    }
}

impl Default for KGrid {
    fn default() -> Self {
        KGrid { k_min: Self::default_min(), k_max: None, points: Self::default_points(), spacing: Spacing::Linear }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    #[serde(default)]
    pub ode_tol: Option<f64>,
    #[serde(default)]
    pub k_grid: KGrid,
    #[serde(default)]
    pub k_cut: Option<f64>,
    #[serde(default = "Numerics::default_m_max")]
    pub m_max: u32,
    #[serde(default)]
    pub parallelism: Parallelism,
}

impl Numerics {
    fn default_m_max() -> u32 {
        3
    }
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics { ode_tol: None, k_grid: KGrid::default(), k_cut: None, m_max: 3, parallelism: Parallelism::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskSpec {
    Phases {
        #[serde(default)]
        channels: Vec<ChannelId>,
    },
    Born {
        #[serde(default)]
        orders: Option<u32>,
        #[serde(default)]
        channels: Vec<ChannelId>,
    },
    BoundStates {
        #[serde(default)]
        channels: Vec<ChannelId>,
    },
    Sumrule {
        channel: ChannelId,
        n: u32,
        m: u32,
    },
    Levinson {
        channel: ChannelId,
    },
    Oversub {
        channel: ChannelId,
        nu: u32,
    },
    Bf {
        order: u32,
    },
    Wkb {
        n: u32,
    },
    Figure1 {
        n_list: Vec<u32>,
        l_range: [u32; 2],
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub potential: PotentialSpec,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Identity failures are expected (e.g. outside the theorem's hypotheses)
    /// and do not make the job fail.
    #[serde(default)]
    pub expect_failure: bool,
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn sumrule_options(&self) -> SumRuleOptions {
        SumRuleOptions {
            k_cut: self.numerics.k_cut,
            ode: self.numerics.ode_tol.map(OdeOptions::with_tol).unwrap_or_default(),
            parallelism: self.numerics.parallelism,
        }
    }

    /// Command-line overrides: `--k-max` sets both the cut-off and the top of
    /// the phase grid.
    pub fn apply_overrides(&mut self, out: Option<PathBuf>, k_max: Option<f64>, ode_tol: Option<f64>) {
        if out.is_some() {
            self.output_dir = out;
        }
        if let Some(k) = k_max {
            self.numerics.k_cut = Some(k);
            self.numerics.k_grid.k_max = Some(k);
        }
        if ode_tol.is_some() {
            self.numerics.ode_tol = ode_tol;
        }
    }

    fn default_channels(&self) -> Vec<ChannelId> {
        match self.potential.geometry {
            Geometry::FullLineSymmetric => vec![ChannelId::Antisymmetric, ChannelId::Symmetric],
            Geometry::HalfLineRadial => vec![ChannelId::PartialWave(0)],
        }
    }

    fn channel_list(&self, given: &[ChannelId]) -> Vec<ChannelId> {
        if given.is_empty() {
            self.default_channels()
        } else {
            given.to_vec()
        }
    }

    fn phase_channels(&self) -> Vec<ChannelId> {
        let mut out = Vec::new();
        for t in &self.tasks {
            if let TaskSpec::Phases { channels } = t {
                for c in self.channel_list(channels) {
                    if !out.contains(&c) {
                        out.push(c);
                    }
                }
            }
        }
        out
    }

    /// Checks every task against the potential and against its dependencies.
    /// Nothing is computed.
    pub fn validate(&self) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(msg));
        let geom = self.potential.geometry;
        let m_max = self.numerics.m_max;
        let opts = self.sumrule_options();
        if let Some(t) = self.numerics.ode_tol {
            if !(t > 0.0 && t < 1e-2) {
                return cfg(format!("ode_tol must lie in (0, 1e-2), got {t}"));
            }
        }
        if let Some(k) = self.numerics.k_cut {
            if !(k > 0.0 && k.is_finite()) {
                return cfg(format!("k_cut must be positive, got {k}"));
            }
        }
        let fits = |c: ChannelId| match (c, geom) {
            (ChannelId::PartialWave(_), Geometry::HalfLineRadial) => true,
            (ChannelId::PartialWave(_), _) | (_, Geometry::HalfLineRadial) => false,
            _ => true,
        };
        let phased = self.phase_channels();
        let needs_phases = |c: ChannelId, kind: &str| {
            if phased.contains(&c) {
                Ok(())
            } else {
                cfg(format!("{kind} on channel {c} needs a phases task covering that channel"))
            }
        };
        let singular = self.potential.is_singular();
        for (i, t) in self.tasks.iter().enumerate() {
            let channels: Vec<ChannelId> = match t {
                TaskSpec::Phases { channels } | TaskSpec::Born { channels, .. } | TaskSpec::BoundStates { channels } => {
                    self.channel_list(channels)
                }
                TaskSpec::Sumrule { channel, .. } | TaskSpec::Levinson { channel } | TaskSpec::Oversub { channel, .. } => {
                    vec![*channel]
                }
                _ => vec![],
            };
            if let Some(c) = channels.iter().find(|c| !fits(**c)) {
                return cfg(format!("task {i}: channel {c} does not match geometry {geom:?}"));
            }
            match t {
                TaskSpec::Phases { .. } | TaskSpec::BoundStates { .. } => {}
                TaskSpec::Born { orders, channels } => {
                    if let Some(o) = orders {
                        if *o == 0 || *o > m_max {
                            return cfg(format!("task {i}: Born orders must be in 1..={m_max}"));
                        }
                    }
                    if singular {
                        return cfg(format!("task {i}: Born series needs a pointwise potential"));
                    }
                    for c in self.channel_list(channels) {
                        needs_phases(c, "born")?;
                    }
                }
                TaskSpec::Sumrule { channel, n, m } => {
                    if m < n {
                        return cfg(format!("task {i}: sum rule needs m ≥ n (n = {n}, m = {m})"));
                    }
                    if *m > m_max {
                        return cfg(format!("task {i}: m = {m} exceeds m_max = {m_max}"));
                    }
                    if *channel == ChannelId::Symmetric && *m > 2 * n {
                        return cfg(format!("task {i}: symmetric channel with m > 2n diverges at k = 0"));
                    }
                    if singular && *m > 1 {
                        return cfg(format!("task {i}: m = {m} needs a pointwise potential"));
                    }
                    needs_phases(*channel, "sumrule")?;
                }
                TaskSpec::Levinson { channel } => needs_phases(*channel, "levinson")?,
                TaskSpec::Oversub { channel, nu } => {
                    if *channel == ChannelId::Symmetric {
                        return cfg(format!("task {i}: oversubtraction is defined for antisymmetric and radial channels"));
                    }
                    if *nu < 2 || *nu > m_max {
                        return cfg(format!("task {i}: nu must be in 2..={m_max}, got {nu}"));
                    }
                    if singular {
                        return cfg(format!("task {i}: oversubtraction needs a pointwise potential"));
                    }
                    needs_phases(*channel, "oversub")?;
                }
                TaskSpec::Bf { order } => {
                    if !matches!(order, 1 | 2) {
                        return cfg(format!("task {i}: bf order must be 1 or 2, got {order}"));
                    }
                    if singular {
                        return cfg(format!("task {i}: Buslaev–Faddeev needs a pointwise potential"));
                    }
                    needs_phases(half_line_channel(&self.potential), "bf")?;
                }
                TaskSpec::Wkb { n } => {
                    if *n > 8 {
                        return cfg(format!("task {i}: wkb order {n} is out of range"));
                    }
                    if geom != Geometry::FullLineSymmetric {
                        return cfg(format!("task {i}: wkb moments are for full-line potentials"));
                    }
                }
                TaskSpec::Figure1 { n_list, l_range } => {
                    if n_list.is_empty() || l_range[0] == 0 || l_range[1] < l_range[0] || l_range[1] > 40 {
                        return cfg(format!("task {i}: figure1 needs n_list and 1 ≤ l_min ≤ l_max ≤ 40"));
                    }
                }
            }
        }
        let k_top = self.numerics.k_grid.k_max.unwrap_or_else(|| opts.k_cut.unwrap_or(50.0 * self.potential.k_scale()));
        if !phased.is_empty() {
            self.numerics.k_grid.points_up_to(k_top)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    KnownFailure,
    Error,
    Info,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::KnownFailure => "known failure",
            Status::Error => "ERROR",
            Status::Info => "ok",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub task: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct WkbCheck {
    pub n: u32,
    pub phase_space: f64,
    pub wkb: f64,
    /// Σ κ^{2n} over both parities.
    pub exact: f64,
    pub relative_agreement: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct JobReport {
    pub phases: Vec<PhaseTable>,
    pub spectra: Vec<BoundStateSet>,
    pub sumrules: Vec<SumRuleReport>,
    pub levinson: Vec<LevinsonReport>,
    pub oversubtraction: Vec<OversubReport>,
    pub buslaev_faddeev: Vec<BuslaevFaddeevReport>,
    pub wkb: Vec<WkbCheck>,
    pub figure1: Vec<WkbEstimate>,
    pub outcomes: Vec<Outcome>,
}

impl JobReport {
    /// Identity checks that failed and were not expected to, plus task errors.
    pub fn failures(&self) -> usize {
        self.outcomes.iter().filter(|o| matches!(o.status, Status::Fail | Status::Error)).count()
    }

    pub fn exit_code(&self) -> i32 {
        if self.failures() == 0 {
            0
        } else {
            1
        }
    }
}

const WKB_AGREEMENT: f64 = 1e-8;

struct Runner<'a> {
    config: &'a JobConfig,
    opts: SumRuleOptions,
    caches: BTreeMap<ChannelId, PhaseCache<'a>>,
    spectra: BTreeMap<ChannelId, std::result::Result<BoundStateSet, Error>>,
    report: JobReport,
}

impl<'a> Runner<'a> {
    fn record(&mut self, task: String, status: Status, detail: String) {
        let status = match status {
            Status::Fail if self.config.expect_failure => Status::KnownFailure,
            s => s,
        };
        self.report.outcomes.push(Outcome { task, status, detail });
    }

    fn check(&mut self, task: String, pass: bool, detail: String) {
        self.record(task, if pass { Status::Pass } else { Status::Fail }, detail);
    }

    fn spectrum(&mut self, c: ChannelId) -> Result<BoundStateSet> {
        let pot = &self.config.potential;
        self.spectra.entry(c).or_insert_with(|| bound_states(pot, c)).clone()
    }

    fn orders_needed(&self) -> usize {
        let mut n = 1;
        for t in &self.config.tasks {
            n = n.max(match t {
                TaskSpec::Sumrule { m, .. } => *m as usize,
                TaskSpec::Oversub { nu, .. } => *nu as usize,
                TaskSpec::Bf { .. } => 2,
                TaskSpec::Born { orders, .. } => orders.unwrap_or(self.config.numerics.m_max) as usize,
                _ => 1,
            });
        }
        n
    }

    fn cache(&mut self, c: ChannelId) -> &PhaseCache<'a> {
        let orders = self.orders_needed();
        let (pot, opts) = (&self.config.potential, self.opts);
        self.caches.entry(c).or_insert_with(|| PhaseCache::new(pot, c, orders, opts))
    }

    fn run(mut self) -> JobReport {
        let cfg = self.config;
        let tasks = &cfg.tasks;
        let born_orders: BTreeMap<ChannelId, u32> = tasks
            .iter()
            .filter_map(|t| match t {
                TaskSpec::Born { orders, channels } => Some((orders.unwrap_or(cfg.numerics.m_max), cfg.channel_list(channels))),
                _ => None,
            })
            .flat_map(|(o, cs)| cs.into_iter().map(move |c| (c, o)))
            .fold(BTreeMap::new(), |mut acc, (c, o)| {
                let e = acc.entry(c).or_insert(0);
                *e = (*e).max(o);
                acc
            });

        // phases, with Born columns folded in where asked for
        for c in cfg.phase_channels() {
            let orders = born_orders.get(&c).copied().unwrap_or(0) as usize;
            let k_max = cfg.numerics.k_grid.k_max.unwrap_or_else(|| self.cache(c).k_cut());
            let label = format!("phases {c}");
            let table = cfg.numerics.k_grid.points_up_to(k_max).and_then(|grid| {
                build_phase_table(&cfg.potential, c, &grid, orders, &self.opts.ode, self.opts.parallelism)
            });
            match table {
                Ok(t) => {
                    let detail = format!("{} points on [{}, {}]", t.k_grid.len(), sci(t.k_grid[0]), sci(k_max));
                    self.report.phases.push(t);
                    self.record(label, Status::Info, detail);
                    if orders > 0 {
                        self.record(format!("born {c}"), Status::Info, format!("orders 1..={orders} in phases_{}.csv", c.tag()));
                    }
                }
                Err(e) => self.record(label, Status::Error, e.to_string()),
            }
        }

        // spectra for every channel a later task touches
        let mut spectral: Vec<ChannelId> = Vec::new();
        for t in tasks {
            let cs = match t {
                TaskSpec::BoundStates { channels } => cfg.channel_list(channels),
                TaskSpec::Sumrule { channel, .. } | TaskSpec::Levinson { channel } | TaskSpec::Oversub { channel, .. } => {
                    vec![*channel]
                }
                TaskSpec::Bf { .. } => vec![half_line_channel(&cfg.potential)],
                _ => vec![],
            };
            for c in cs {
                if !spectral.contains(&c) {
                    spectral.push(c);
                }
            }
        }
        for &c in &spectral {
            match self.spectrum(c) {
                Ok(b) => self.report.spectra.push(b),
                Err(e) => self.record(format!("bound_states {c}"), Status::Error, e.to_string()),
            }
        }
        for t in tasks {
            if let TaskSpec::BoundStates { channels } = t {
                for c in cfg.channel_list(channels) {
                    if let Some(Ok(b)) = self.spectra.get(&c) {
                        let detail = format!(
                            "{} bound states, shooting agreement {}{}",
                            b.count(),
                            sci(b.agreement),
                            if b.threshold { ", threshold state" } else { "" }
                        );
                        self.record(format!("bound_states {c}"), Status::Info, detail);
                    }
                }
            }
        }

        for t in tasks {
            match t {
                TaskSpec::Sumrule { channel, n, m } => {
                    let label = format!("sumrule {channel} n={n} m={m}");
                    let res = self.spectrum(*channel).and_then(|b| verify_cached(self.cache(*channel), &b, *n, *m));
                    match res {
                        Ok(r) => {
                            let mut detail = format!(
                                "lhs {} rhs {} anomaly {} residual {}",
                                sci(r.lhs),
                                sci(r.rhs_spectral),
                                sci(r.anomaly),
                                sci(r.residual)
                            );
                            if r.tail_fit.outside_scope {
                                detail.push_str(" (tail outside scope)");
                            }
                            let pass = r.pass;
                            self.report.sumrules.push(r);
                            self.check(label, pass, detail);
                        }
                        Err(e) => self.record(label, Status::Error, e.to_string()),
                    }
                }
                TaskSpec::Levinson { channel } => {
                    let label = format!("levinson {channel}");
                    let res = self.spectrum(*channel).and_then(|b| levinson_cached(self.cache(*channel), &b));
                    match res {
                        Ok(r) => {
                            let pass = r.residual.abs() <= PASS_TOL * std::f64::consts::PI;
                            let detail = format!(
                                "delta(0) {} expected {} residual {}",
                                sci(r.delta0),
                                sci(r.expected),
                                sci(r.residual)
                            );
                            self.report.levinson.push(r);
                            self.check(label, pass, detail);
                        }
                        Err(e) => self.record(label, Status::Error, e.to_string()),
                    }
                }
                TaskSpec::Oversub { channel, nu } => {
                    let label = format!("oversub {channel} nu={nu}");
                    let res = self
                        .spectrum(*channel)
                        .and_then(|b| oversubtraction_cached(self.cache(*channel), &b, *nu));
                    match res {
                        Ok(r) => {
                            let pass = r.pass;
                            let detail = format!("value {} scale {}", sci(r.value), sci(r.scale));
                            self.report.oversubtraction.push(r);
                            self.check(label, pass, detail);
                        }
                        Err(e) => self.record(label, Status::Error, e.to_string()),
                    }
                }
                TaskSpec::Bf { order } => {
                    let label = format!("bf order={order}");
                    let c = half_line_channel(&cfg.potential);
                    let res = self.spectrum(c).and_then(|b| buslaev_faddeev_cached(self.cache(c), &b, *order));
                    match res {
                        Ok(r) => {
                            let pass = r.pass;
                            let detail = format!(
                                "integral {} spectral {} residual {}",
                                sci(r.integral),
                                sci(r.spectral),
                                sci(r.residual)
                            );
                            self.report.buslaev_faddeev.push(r);
                            self.check(label, pass, detail);
                        }
                        Err(e) => self.record(label, Status::Error, e.to_string()),
                    }
                }
                TaskSpec::Wkb { n } => {
                    let label = format!("wkb n={n}");
                    let res = semiclassical_check(&cfg.potential, *n).and_then(|(ps, w)| {
                        let mut exact = 0.0;
                        for c in [ChannelId::Symmetric, ChannelId::Antisymmetric] {
                            exact += self.spectrum(c)?.kappas.iter().map(|k| k.powi(2 * *n as i32)).sum::<f64>();
                        }
                        Ok(WkbCheck {
                            n: *n,
                            phase_space: ps,
                            wkb: w,
                            exact,
                            relative_agreement: if w == 0.0 { (ps - w).abs() } else { ((ps - w) / w).abs() },
                        })
                    });
                    match res {
                        Ok(r) => {
                            let pass = r.relative_agreement <= WKB_AGREEMENT;
                            let detail = format!(
                                "phase space {} wkb {} exact {}",
                                sci(r.phase_space),
                                sci(r.wkb),
                                sci(r.exact)
                            );
                            self.report.wkb.push(r);
                            self.check(label, pass, detail);
                        }
                        Err(e) => self.record(label, Status::Error, e.to_string()),
                    }
                }
                TaskSpec::Figure1 { n_list, l_range } => {
                    let ls: Vec<u32> = (l_range[0]..=l_range[1]).collect();
                    match figure1_data(n_list, &ls, self.opts.parallelism) {
                        Ok(rows) => {
                            let detail = format!("{} rows", rows.len());
                            self.report.figure1.extend(rows);
                            self.record("figure1".into(), Status::Info, detail);
                        }
                        Err(e) => self.record("figure1".into(), Status::Error, e.to_string()),
                    }
                }
                _ => {}
            }
        }
        self.report
    }
}

/// Validates and executes a job. Only configuration problems are returned as
/// errors; computational failures are recorded per task in the report.
pub fn run_job(config: &JobConfig) -> Result<JobReport> {
    config.validate()?;
    let runner = Runner {
        config,
        opts: config.sumrule_options(),
        caches: BTreeMap::new(),
        spectra: BTreeMap::new(),
        report: JobReport::default(),
    };
    Ok(runner.run())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(|e| Error::Io(e.to_string()))
}

pub fn summary_text(config: &JobConfig, report: &JobReport) -> String {
    let mut s = String::new();
    let spec = serde_json::to_string(&config.potential).unwrap_or_default();
    let _ = writeln!(s, "potential: {spec}");
    let width = report.outcomes.iter().map(|o| o.task.len()).max().unwrap_or(0);
    for o in &report.outcomes {
        let _ = writeln!(s, "{:<width$}  {:<13}  {}", o.task, o.status.label(), o.detail);
    }
    let known = report.outcomes.iter().filter(|o| o.status == Status::KnownFailure).count();
    let failures = report.failures();
    let _ = match (failures, known) {
        (0, 0) => writeln!(s, "result: all checks passed"),
        (0, k) => writeln!(s, "result: {k} expected failure(s), nothing else failed"),
        (f, _) => writeln!(s, "result: {f} check(s) failed"),
    };
    s
}

/// Writes the report files that have content (summary.txt always) and returns
/// their paths in a fixed order.
pub fn emit_report(config: &JobConfig, report: &JobReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut files: Vec<(String, String)> = Vec::new();
    for t in &report.phases {
        files.push((format!("phases_{}.csv", t.channel.tag()), t.to_csv()));
    }
    let any_identity = !(report.sumrules.is_empty()
        && report.levinson.is_empty()
        && report.oversubtraction.is_empty()
        && report.buslaev_faddeev.is_empty()
        && report.wkb.is_empty());
    if !report.sumrules.is_empty() {
        files.push(("sumrules.csv".into(), reports_to_csv(&report.sumrules)));
    }
    if any_identity {
        #[derive(Serialize)]
        struct Identities<'r> {
            sumrules: &'r [SumRuleReport],
            levinson: &'r [LevinsonReport],
            oversubtraction: &'r [OversubReport],
            buslaev_faddeev: &'r [BuslaevFaddeevReport],
            wkb: &'r [WkbCheck],
        }
        let body = Identities {
            sumrules: &report.sumrules,
            levinson: &report.levinson,
            oversubtraction: &report.oversubtraction,
            buslaev_faddeev: &report.buslaev_faddeev,
            wkb: &report.wkb,
        };
        files.push(("sumrules.json".into(), to_json(&body)?));
    }
    if !report.spectra.is_empty() {
        let sets: Vec<serde_json::Value> = report.spectra.iter().map(|b| b.to_json()).collect();
        files.push(("spectrum.json".into(), to_json(&sets)?));
    }
    if !report.figure1.is_empty() {
        files.push(("figure1.csv".into(), figure1_csv(&report.figure1)));
    }
    files.push(("summary.txt".into(), summary_text(config, report)));
    let mut paths = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FREE: &str = r#"{"potential": {"family": "gaussian_well", "params": {"depth": 0}}}"#;

    fn job(json: &str) -> JobConfig {
        JobConfig::from_json(json).unwrap()
    }

    #[test]
    fn parses_tasks_and_defaults() {
        let c = job(r#"{"potential": {"family": "gaussian_well", "params": {"V0": 3, "a": 1}},
                 "tasks": [{"kind": "phases"}, {"kind": "sumrule", "channel": "antisymmetric", "n": 1, "m": 1}]}"#);
        assert_eq!(c.numerics.m_max, 3);
        assert_eq!(c.phase_channels(), vec![ChannelId::Antisymmetric, ChannelId::Symmetric]);
        c.validate().unwrap();
    }

    #[test]
    fn validation_is_fail_fast() {
        let base = r#"{"potential": {"family": "sech2", "params": {"s": 5}}, "tasks": [TASKS]}"#;
        let bad = [
            r#"{"kind": "sumrule", "channel": "antisymmetric", "n": 1, "m": 1}"#,
            r#"{"kind": "phases"}, {"kind": "sumrule", "channel": "antisymmetric", "n": 2, "m": 1}"#,
            r#"{"kind": "phases"}, {"kind": "sumrule", "channel": "symmetric", "n": 1, "m": 3}"#,
            r#"{"kind": "phases"}, {"kind": "sumrule", "channel": "l0", "n": 0, "m": 0}"#,
            r#"{"kind": "phases"}, {"kind": "sumrule", "channel": "antisymmetric", "n": 4, "m": 4}"#,
            r#"{"kind": "phases"}, {"kind": "bf", "order": 3}"#,
            r#"{"kind": "phases"}, {"kind": "oversub", "channel": "antisymmetric", "nu": 1}"#,
            r#"{"kind": "phases"}, {"kind": "oversub", "channel": "symmetric", "nu": 2}"#,
            r#"{"kind": "levinson", "channel": "symmetric"}"#,
            r#"{"kind": "figure1", "n_list": [1], "l_range": [3, 2]}"#,
        ];
        for t in bad {
            let c = job(&base.replace("TASKS", t));
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{t}");
            assert!(matches!(run_job(&c), Err(Error::Config(_))));
        }
        assert!(JobConfig::from_json(r#"{"potential": {"family": "sech2", "params": {"s": 5}}, "tasks": [{"kind": "nope"}]}"#).is_err());
    }

    #[test]
    fn overrides() {
        let mut c = job(FREE);
        c.apply_overrides(Some("x".into()), Some(30.0), Some(1e-9));
        assert_eq!(c.numerics.k_cut, Some(30.0));
        assert_eq!(c.numerics.k_grid.k_max, Some(30.0));
        assert_eq!(c.sumrule_options().ode, OdeOptions::with_tol(1e-9));
        assert_eq!(c.output_dir, Some(PathBuf::from("x")));
    }

    #[test]
    fn grid_spacings() {
        let g = KGrid { k_min: 1.0, k_max: None, points: 3, spacing: Spacing::Log };
        let p = g.points_up_to(100.0).unwrap();
        assert!((p[1] - 10.0).abs() < 1e-12);
        assert!(KGrid::default().points_up_to(0.01).is_err());
    }

    #[test]
    fn empty_job_writes_summary_only() {
        let c = job(FREE);
        let r = run_job(&c).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = emit_report(&c, &r, dir.path()).unwrap();
        assert_eq!(files.len(), 1);
        assert!(files[0].ends_with("summary.txt"));
        assert_eq!(r.exit_code(), 0);
    }
}
