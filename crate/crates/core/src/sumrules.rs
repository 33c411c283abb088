//! Born-subtracted sum rules I_{n,m}, the symmetric-channel anomaly,
//! Levinson's theorem, oversubtraction and the Buslaev–Faddeev identities.
//!
//! Integrals are taken by parts so only Δδ itself is sampled:
//! F(K) = K^{2n}Δδ(K)/π − (2n/π)∫₀^K k^{2n−1}Δδ dk, and I = lim F(K). The
//! limit comes from fitting F(K′) ≈ I + b₁K′^e + b₂K′^{e−2} on [K/10, K]
//! under a smooth window, which also averages out the oscillating tails of
//! potentials with jumps.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::born::symmetric_log_born;
use crate::channel::ChannelId;
use crate::error::{Error, Result};
use crate::format::sci;
use crate::jost1d::{low_energy_grid, sample_phase, PhaseSample, K_FLOOR};
use crate::numerics::extrap::{free_exponent, geomspace, neville_to_zero};
use crate::numerics::quad::{gk15_apply, gk15_nodes, integrate_batched, integrate_to_infinity};
use crate::par::{self, Parallelism};
use crate::potentials::{Geometry, PotentialSpec, Shape};
use crate::riccati::OdeOptions;
use crate::spectrum::{bound_states, spectral_moment, BoundStateSet};

pub const PASS_TOL: f64 = 1e-3;
pub const K_CUT_FACTOR: f64 = 50.0;
const QUAD_ABS: f64 = 1e-8;
const QUAD_REL: f64 = 1e-9;
const MAX_ROUNDS: usize = 14;
const SMOOTH_PANELS: usize = 40;
const OUTSIDE_SCOPE: f64 = 0.5;
const FAILURE_DEVIATION: f64 = 1.25;
const CIRCLE_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SumRuleOptions {
    /// Upper end of the sampled range; defaults to 50·k_scale.
    pub k_cut: Option<f64>,
    pub ode: OdeOptions,
    pub parallelism: Parallelism,
}

impl Default for SumRuleOptions {
    fn default() -> Self {
        SumRuleOptions { k_cut: None, ode: OdeOptions::default(), parallelism: Parallelism::Parallel }
    }
}

/// Phase samples of one channel, shared by every functional evaluated on it.
pub struct PhaseCache<'a> {
    pot: &'a PotentialSpec,
    channel: ChannelId,
    orders: usize,
    opts: SumRuleOptions,
    store: Mutex<HashMap<u64, PhaseSample>>,
}

impl<'a> PhaseCache<'a> {
    pub fn new(pot: &'a PotentialSpec, channel: ChannelId, orders: usize, opts: SumRuleOptions) -> Self {
        PhaseCache { pot, channel, orders, opts, store: Mutex::new(HashMap::new()) }
    }

    pub fn potential(&self) -> &PotentialSpec {
        self.pot
    }

    pub fn channel(&self) -> ChannelId {
        self.channel
    }

    pub fn orders(&self) -> usize {
        self.orders
    }

    pub fn k_cut(&self) -> f64 {
        self.opts.k_cut.unwrap_or(K_CUT_FACTOR * self.pot.k_scale())
    }

    pub fn len(&self) -> usize {
        self.store.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn samples(&self, ks: &[f64]) -> Result<Vec<PhaseSample>> {
        let mut missing: Vec<f64> = {
            let store = self.store.lock().unwrap();
            ks.iter().copied().filter(|k| !store.contains_key(&k.to_bits())).collect()
        };
        missing.sort_by(|a, b| a.partial_cmp(b).unwrap());
        missing.dedup();
        let fresh = par::try_map(self.opts.parallelism, &missing, |&k| {
            sample_phase(self.pot, self.channel, k, self.orders, &self.opts.ode)
        })?;
        let mut store = self.store.lock().unwrap();
        for (k, s) in missing.into_iter().zip(fresh) {
            store.insert(k.to_bits(), s);
        }
        Ok(ks.iter().map(|k| store[&k.to_bits()].clone()).collect())
    }

    /// Zero-energy limit of a sampled quantity.
    fn at_zero(&self, f: impl Fn(f64, &PhaseSample) -> f64) -> Result<f64> {
        let ks = low_energy_grid();
        let s = self.samples(&ks)?;
        let ys: Vec<f64> = ks.iter().zip(&s).map(|(k, s)| f(*k, s)).collect();
        Ok(neville_to_zero(&ks, &ys))
    }
}

type Sampled<'f> = &'f (dyn Fn(f64, &PhaseSample) -> f64 + Sync);

/// F(K′) = boundary(K′) + ∫₀^{K′} integrand, with F(K′) − F(∞) ∝ K′^exponent.
struct Functional<'f> {
    boundary: Option<Sampled<'f>>,
    integrand: Sampled<'f>,
    exponent: f64,
}

#[derive(Debug, Clone, Copy)]
struct Limit {
    value: f64,
    error: f64,
    at_cut: f64,
}

fn bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (4.0 - 1.0 / (t * (1.0 - t))).exp()
    }
}

fn weighted_fit(basis: &[[f64; 3]], ys: &[f64], ws: &[f64]) -> [f64; 3] {
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for ((row, y), w) in basis.iter().zip(ys).zip(ws) {
        for i in 0..3 {
            b[i] += w * row[i] * y;
            for j in 0..3 {
                a[i][j] += w * row[i] * row[j];
            }
        }
    }
    let inv = invert3(&a);
    let mut c = [0.0; 3];
    for i in 0..3 {
        c[i] = (0..3).map(|j| inv[i][j] * b[j]).sum();
    }
    c
}

fn invert3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (i1, i2) = ((j + 1) % 3, (j + 2) % 3);
            let (j1, j2) = ((i + 1) % 3, (i + 2) % 3);
            r[i][j] = (m[i1][j1] * m[i2][j2] - m[i1][j2] * m[i2][j1]) / det;
        }
    }
    r
}

/// Width of k-panels for potentials with jumps at x = a. Δδ then carries
/// harmonics cos(2jka); the spacing 0.6·π/(2a) keeps harmonics j < 10 from
/// aliasing onto the smooth part of the windowed fit.
fn oscillation_step(pot: &PotentialSpec) -> Option<f64> {
    pot.breakpoints().into_iter().fold(None, |m: Option<f64>, a| {
        let s = 0.6 * PI / (2.0 * a);
        Some(m.map_or(s, |m| m.min(s)))
    })
}

fn lower_breakpoints(pot: &PotentialSpec, hi: f64) -> Vec<f64> {
    let knee = pot.k_scale().min(hi);
    let mut pts = geomspace(K_FLOOR, knee, 7);
    let step = oscillation_step(pot).map_or(knee, |s| s.min(knee));
    let extra = ((hi - knee) / step).ceil() as usize;
    for j in 1..=extra {
        pts.push(knee + (hi - knee) * j as f64 / extra as f64);
    }
    pts
}

fn window_edges(pot: &PotentialSpec, lo: f64, hi: f64) -> Vec<f64> {
    let count = match oscillation_step(pot) {
        Some(s) => (((hi - lo) / s).ceil() as usize).max(SMOOTH_PANELS),
        None => SMOOTH_PANELS,
    };
    (0..=count).map(|j| lo + (hi - lo) * j as f64 / count as f64).collect()
}

fn evaluate(cache: &PhaseCache, f: &Functional) -> Result<Limit> {
    let kc = cache.k_cut();
    let lo = kc / 10.0;
    let head = {
        let g0 = cache.at_zero(f.integrand)?;
        let s = cache.samples(&[K_FLOOR])?;
        0.5 * K_FLOOR * (g0 + (f.integrand)(K_FLOOR, &s[0]))
    };
    let mid = integrate_batched(
        |xs| {
            let s = cache.samples(xs)?;
            Ok(xs.iter().zip(&s).map(|(k, s)| (f.integrand)(*k, s)).collect())
        },
        &lower_breakpoints(cache.pot, lo),
        QUAD_ABS,
        QUAD_REL,
        MAX_ROUNDS,
    )?;
    let edges = window_edges(cache.pot, lo, kc);
    let mut nodes = Vec::with_capacity(edges.len() * 16);
    for w in edges.windows(2) {
        nodes.extend_from_slice(&gk15_nodes(w[0], w[1]));
    }
    nodes.extend_from_slice(&edges);
    let samples = cache.samples(&nodes)?;
    let mut cum = head + mid.value;
    let mut error = mid.error;
    let mut values = Vec::with_capacity(edges.len());
    for (j, &e) in edges.iter().enumerate() {
        if j > 0 {
            let mut fv = [0.0; 15];
            for (i, v) in fv.iter_mut().enumerate() {
                let s = &samples[15 * (j - 1) + i];
                *v = (f.integrand)(s.k, s);
            }
            let q = gk15_apply(edges[j - 1], e, &fv);
            cum += q.value;
            error += q.error;
        }
        let s = &samples[15 * (edges.len() - 1) + j];
        values.push(cum + f.boundary.map_or(0.0, |b| b(e, s)));
    }
    let basis: Vec<[f64; 3]> = edges
        .iter()
        .map(|&e| {
            let x = e / kc;
            [1.0, x.powf(f.exponent), x.powf(f.exponent - 2.0)]
        })
        .collect();
    let fit_on = |start: f64| {
        let ws: Vec<f64> = edges.iter().map(|&e| bump((e - start) / (kc - start))).collect();
        weighted_fit(&basis, &values, &ws)[0]
    };
    // the spread between the full and the upper-half window measures how
    // well the model describes the tail
    let value = fit_on(lo);
    let upper = fit_on(0.5 * (lo + kc));
    Ok(Limit { value, error: error + (value - upper).abs(), at_cut: values[values.len() - 1] })
}

#[derive(Debug, Clone, Serialize)]
pub struct TailFit {
    pub k_cut: f64,
    pub expected_exponent: f64,
    /// Free log-log slope of the Jost-level remainder over [K/10, K]; `None`
    /// when the remainder vanishes identically.
    pub fitted_exponent: Option<f64>,
    /// I − F(K), the part of the value supplied by the extrapolation.
    pub tail_contribution: f64,
    pub outside_scope: bool,
}

fn tail_diagnostic(cache: &PhaseCache, m: usize) -> Result<(Option<f64>, bool)> {
    let kc = cache.k_cut();
    // upper part of the window, where corrections of relative order k⁻² are small
    let ks = geomspace(kc / 3.0, kc, 24);
    let s = cache.samples(&ks)?;
    let ys: Vec<f64> = s.iter().map(|s| s.jost_remainder[m]).collect();
    if ys.iter().all(|y| *y == 0.0) {
        return Ok((None, false));
    }
    let fitted = free_exponent(&ks, &ys, 6);
    let expected = -(2.0 * m as f64 + 1.0);
    let deviation = (fitted - expected).abs();
    if !(deviation <= FAILURE_DEVIATION) {
        return Err(Error::TailFitFailure { fitted, expected });
    }
    Ok((Some(fitted), deviation >= OUTSIDE_SCOPE))
}

#[derive(Debug, Clone, Serialize)]
pub struct LhsValue {
    pub value: f64,
    pub tail_fit: TailFit,
    pub error: f64,
}

fn check_indices(channel: ChannelId, n: u32, m: u32) -> Result<()> {
    if m < n {
        return Err(Error::InvalidArgument(format!("sum rules need m ≥ n, got n = {n}, m = {m}")));
    }
    if channel == ChannelId::Symmetric && m > 2 * n {
        return Err(Error::DivergentIntegral(format!(
            "symmetric channel with m = {m} > 2n = {}: k^{{2n}}Δδ_m is singular at threshold",
            2 * n
        )));
    }
    Ok(())
}

/// Left-hand side I_{n,m} in the given channel.
pub fn sum_rule_lhs(pot: &PotentialSpec, channel: ChannelId, n: u32, m: u32, opts: &SumRuleOptions) -> Result<LhsValue> {
    let cache = PhaseCache::new(pot, channel, (m as usize).max(1), *opts);
    sum_rule_lhs_cached(&cache, n, m)
}

pub fn sum_rule_lhs_cached(cache: &PhaseCache, n: u32, m: u32) -> Result<LhsValue> {
    let channel = cache.channel;
    check_indices(channel, n, m)?;
    if m as usize > cache.orders {
        return Err(Error::InvalidArgument(format!("cache holds {} Born orders, m = {m} requested", cache.orders)));
    }
    let mi = m as usize;
    let kc = cache.k_cut();
    let (fitted, outside_scope) = tail_diagnostic(cache, mi)?;
    let mut tail_fit = TailFit {
        k_cut: kc,
        expected_exponent: -(2.0 * m as f64 + 1.0),
        fitted_exponent: fitted,
        tail_contribution: 0.0,
        outside_scope,
    };
    if n == 0 {
        let d0 = cache.at_zero(|_, s| s.remainder[mi])?;
        return Ok(LhsValue { value: -d0 / PI, tail_fit, error: 0.0 });
    }
    if let Shape::Delta { .. } = cache.pot.shape {
        let (value, error) = delta_reference_lhs(cache, n, m)?;
        return Ok(LhsValue { value, tail_fit, error });
    }
    let two_n = 2 * n as i32;
    let boundary = move |k: f64, s: &PhaseSample| k.powi(two_n) * s.remainder[mi] / PI;
    let integrand = move |k: f64, s: &PhaseSample| -(two_n as f64 / PI) * k.powi(two_n - 1) * s.remainder[mi];
    let p = 2.0 * m as f64 + 1.0;
    let f = Functional { boundary: Some(&boundary), integrand: &integrand, exponent: two_n as f64 - p };
    let lim = evaluate(cache, &f)?;
    tail_fit.tail_contribution = lim.value - lim.at_cut;
    Ok(LhsValue { value: lim.value, tail_fit, error: lim.error })
}

/// Closed-form phases of the delta function integrated on [0, ∞).
fn delta_reference_lhs(cache: &PhaseCache, n: u32, m: u32) -> Result<(f64, f64)> {
    // Δδ_m decays with the first odd power above m
    let q = if m % 2 == 0 { m + 1 } else { m + 2 };
    if q <= 2 * n && cache.channel == ChannelId::Symmetric {
        return Err(Error::DivergentIntegral(format!("delta function: k^{}Δδ_{m} does not vanish at infinity", 2 * n)));
    }
    let mi = m as usize;
    let two_n = 2 * n as i32;
    let r = integrate_to_infinity(
        |k: f64| {
            let s = sample_phase(cache.pot, cache.channel, k, cache.orders, &cache.opts.ode)
                .map(|s| s.remainder[mi])
                .unwrap_or(f64::NAN);
            -(two_n as f64 / PI) * k.powi(two_n - 1) * s
        },
        0.0,
        1e-14,
        1e-13,
    )?;
    Ok((r.value, r.error))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyMode {
    ZeroByTheorem,
    LevinsonHalf,
    ClosedFormMEquals2n,
    NumericResidue,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnomalyTerm {
    pub n: u32,
    pub m: u32,
    pub value: f64,
    pub mode: AnomalyMode,
}

/// Which branch of the anomaly table applies.
pub fn anomaly_mode(channel: ChannelId, n: u32, m: u32) -> AnomalyMode {
    if channel != ChannelId::Symmetric || m < 2 * n {
        AnomalyMode::ZeroByTheorem
    } else if m == 0 {
        AnomalyMode::LevinsonHalf
    } else if m == 2 * n {
        AnomalyMode::ClosedFormMEquals2n
    } else {
        AnomalyMode::NumericResidue
    }
}

fn halfline_integral(pot: &PotentialSpec) -> Result<f64> {
    Ok(pot.moments()?.halfline_integral)
}

/// ½ Res_{k=0} k^{2n} d/dk [ln k + Σ_{ν≤m} c_ν(k)] from a contour mean on
/// |k| = r. Uses ∮k^{2n}S′ = −2n∮k^{2n−1}S.
pub fn residue_on_circle(pot: &PotentialSpec, n: u32, m: u32, r: f64, mode: Parallelism) -> Result<f64> {
    let thetas: Vec<f64> = (0..CIRCLE_POINTS).map(|j| 2.0 * PI * (j as f64 + 0.5) / CIRCLE_POINTS as f64).collect();
    let vals = par::try_map(mode, &thetas, |&t| {
        let k = Complex64::from_polar(r, t);
        Ok::<_, Error>(symmetric_log_born(pot, k, m as usize)? * k.powu(2 * n))
    })?;
    let mean: Complex64 = vals.iter().sum::<Complex64>() / CIRCLE_POINTS as f64;
    let base = if n == 0 { 1.0 } else { 0.0 };
    Ok(0.5 * (base - 2.0 * n as f64 * mean.re))
}

pub fn anomaly(pot: &PotentialSpec, channel: ChannelId, n: u32, m: u32) -> Result<AnomalyTerm> {
    if m < n {
        return Err(Error::InvalidArgument(format!("anomaly needs m ≥ n, got n = {n}, m = {m}")));
    }
    let mode = anomaly_mode(channel, n, m);
    let value = match mode {
        AnomalyMode::ZeroByTheorem => 0.0,
        AnomalyMode::LevinsonHalf => 0.5,
        AnomalyMode::ClosedFormMEquals2n => {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            0.5 * sign * halfline_integral(pot)?.powi(2 * n as i32)
        }
        AnomalyMode::NumericResidue => {
            let r0 = 0.1f64.min(0.1 * pot.k_scale());
            let a = residue_on_circle(pot, n, m, r0, Parallelism::Parallel)?;
            let b = residue_on_circle(pot, n, m, 0.5 * r0, Parallelism::Parallel)?;
            if (a - b).abs() > 1e-6 * a.abs().max(1.0) {
                return Err(Error::ResidueInstability((a - b).abs()));
            }
            a
        }
    };
    Ok(AnomalyTerm { n, m, value, mode })
}

/// Weight of a zero-energy state in the spectral side.
fn threshold_weight(bound: &BoundStateSet) -> f64 {
    if !bound.threshold {
        0.0
    } else if matches!(bound.channel, ChannelId::PartialWave(l) if l > 0) {
        1.0
    } else {
        0.5
    }
}

/// −Σ_j (−κ_j²)ⁿ including the threshold weight at n = 0.
pub fn spectral_side(bound: &BoundStateSet, n: u32) -> f64 {
    let w = if n == 0 { threshold_weight(bound) } else { 0.0 };
    spectral_moment(bound, n) - w
}

#[derive(Debug, Clone, Serialize)]
pub struct SumRuleReport {
    pub channel: ChannelId,
    pub n: u32,
    pub m: u32,
    pub lhs: f64,
    pub rhs_spectral: f64,
    pub anomaly: f64,
    pub anomaly_mode: AnomalyMode,
    /// lhs − rhs_spectral − anomaly; zero when the identity holds.
    pub residual: f64,
    pub tail_fit: TailFit,
    pub quadrature_error: f64,
    pub pass: bool,
}

impl SumRuleReport {
    pub fn relative_residual(&self) -> f64 {
        self.residual.abs() / self.lhs.abs().max(1.0)
    }
}

pub fn verify(pot: &PotentialSpec, channel: ChannelId, n: u32, m: u32, opts: &SumRuleOptions) -> Result<SumRuleReport> {
    let cache = PhaseCache::new(pot, channel, (m as usize).max(1), *opts);
    let bound = bound_states(pot, channel)?;
    verify_cached(&cache, &bound, n, m)
}

pub fn verify_cached(cache: &PhaseCache, bound: &BoundStateSet, n: u32, m: u32) -> Result<SumRuleReport> {
    let lhs = sum_rule_lhs_cached(cache, n, m)?;
    let anom = anomaly(cache.pot, cache.channel, n, m)?;
    let rhs_spectral = spectral_side(bound, n);
    let residual = lhs.value - rhs_spectral - anom.value;
    Ok(SumRuleReport {
        channel: cache.channel,
        n,
        m,
        lhs: lhs.value,
        rhs_spectral,
        anomaly: anom.value,
        anomaly_mode: anom.mode,
        residual,
        tail_fit: lhs.tail_fit,
        quadrature_error: lhs.error,
        pass: residual.abs() <= PASS_TOL * lhs.value.abs().max(1.0),
    })
}

pub fn reports_to_csv(reports: &[SumRuleReport]) -> String {
    let mut out = String::from(
        "channel,n,m,lhs,rhs_spectral,anomaly,residual,k_cut,fitted_exponent,tail_contribution,quadrature_error,pass\n",
    );
    for r in reports {
        let fitted = r.tail_fit.fitted_exponent.map_or_else(|| "nan".to_string(), sci);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.channel.tag(),
            r.n,
            r.m,
            sci(r.lhs),
            sci(r.rhs_spectral),
            sci(r.anomaly),
            sci(r.residual),
            sci(r.tail_fit.k_cut),
            fitted,
            sci(r.tail_fit.tail_contribution),
            sci(r.quadrature_error),
            r.pass
        ));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct LevinsonReport {
    pub channel: ChannelId,
    pub delta0: f64,
    /// Phases are normalised to vanish at infinity.
    pub delta_inf: f64,
    pub expected: f64,
    pub residual: f64,
    pub bound_count: usize,
    pub threshold: bool,
}

pub fn levinson(pot: &PotentialSpec, channel: ChannelId, opts: &SumRuleOptions) -> Result<LevinsonReport> {
    let cache = PhaseCache::new(pot, channel, 0, *opts);
    let bound = bound_states(pot, channel)?;
    levinson_cached(&cache, &bound)
}

pub fn levinson_cached(cache: &PhaseCache, bound: &BoundStateSet) -> Result<LevinsonReport> {
    let delta0 = if cache.pot.is_zero() { 0.0 } else { cache.at_zero(|_, s| s.delta)? };
    let nb = bound.count() as f64;
    let base = if cache.channel == ChannelId::Symmetric { nb - 0.5 } else { nb };
    let expected = PI * (base + threshold_weight(bound));
    Ok(LevinsonReport {
        channel: cache.channel,
        delta0,
        delta_inf: 0.0,
        expected,
        residual: delta0 - expected,
        bound_count: bound.count(),
        threshold: bound.threshold,
    })
}

/// Σκ² of the channel, or 1 when there are no bound states.
pub fn spectral_scale(bound: &BoundStateSet) -> f64 {
    let s: f64 = bound.kappas.iter().map(|k| k * k).sum();
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OversubReport {
    pub channel: ChannelId,
    pub nu: u32,
    pub value: f64,
    pub scale: f64,
    pub error: f64,
    pub pass: bool,
}

/// ∫₀^∞ (k²/π) dδ^{(ν)}/dk dk, which vanishes for ν ≥ 2.
pub fn oversubtraction_check(
    pot: &PotentialSpec,
    channel: ChannelId,
    nu: u32,
    opts: &SumRuleOptions,
) -> Result<OversubReport> {
    let cache = PhaseCache::new(pot, channel, nu as usize, *opts);
    let bound = bound_states(pot, channel)?;
    oversubtraction_cached(&cache, &bound, nu)
}

pub fn oversubtraction_cached(cache: &PhaseCache, bound: &BoundStateSet, nu: u32) -> Result<OversubReport> {
    if nu < 2 {
        return Err(Error::InvalidArgument(format!("oversubtraction needs ν ≥ 2, got {nu}")));
    }
    if cache.channel == ChannelId::Symmetric {
        return Err(Error::InvalidArgument("oversubtraction is defined for Dirichlet channels".into()));
    }
    if nu as usize > cache.orders {
        return Err(Error::InvalidArgument(format!("cache holds {} Born orders, ν = {nu} requested", cache.orders)));
    }
    let scale = spectral_scale(bound);
    if cache.pot.is_zero() || cache.pot.is_singular() {
        let value = 0.0;
        return Ok(OversubReport { channel: cache.channel, nu, value, scale, error: 0.0, pass: true });
    }
    let j = nu as usize - 1;
    let boundary = move |k: f64, s: &PhaseSample| k * k * s.born[j] / PI;
    let integrand = move |k: f64, s: &PhaseSample| -2.0 / PI * k * s.born[j];
    let exponent = 3.0 - 2.0 * nu as f64;
    let lim = evaluate(cache, &Functional { boundary: Some(&boundary), integrand: &integrand, exponent })?;
    Ok(OversubReport {
        channel: cache.channel,
        nu,
        value: lim.value,
        scale,
        error: lim.error,
        pass: lim.value.abs() <= PASS_TOL * scale,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SignVariant {
    pub label: String,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BuslaevFaddeevReport {
    pub order: u32,
    pub integral: f64,
    pub spectral: f64,
    pub boundary: f64,
    pub residual: f64,
    /// Residuals with one sign of the identity flipped; only the printed
    /// arrangement vanishes.
    pub sign_variants: Vec<SignVariant>,
    pub scale: f64,
    pub error: f64,
    pub pass: bool,
}

pub fn half_line_channel(pot: &PotentialSpec) -> ChannelId {
    match pot.geometry {
        Geometry::FullLineSymmetric => ChannelId::Antisymmetric,
        Geometry::HalfLineRadial => ChannelId::PartialWave(0),
    }
}

/// Buslaev–Faddeev identities of order 1 and 2 on the Dirichlet half line.
pub fn buslaev_faddeev(pot: &PotentialSpec, order: u32, opts: &SumRuleOptions) -> Result<BuslaevFaddeevReport> {
    let channel = half_line_channel(pot);
    let cache = PhaseCache::new(pot, channel, 2, *opts);
    let bound = bound_states(pot, channel)?;
    buslaev_faddeev_cached(&cache, &bound, order)
}

pub fn buslaev_faddeev_cached(cache: &PhaseCache, bound: &BoundStateSet, order: u32) -> Result<BuslaevFaddeevReport> {
    if !(order == 1 || order == 2) {
        return Err(Error::InvalidArgument(format!("Buslaev–Faddeev order must be 1 or 2, got {order}")));
    }
    if cache.orders < 2 {
        return Err(Error::InvalidArgument("Buslaev–Faddeev needs two Born orders in the cache".into()));
    }
    if cache.channel != half_line_channel(cache.pot) {
        return Err(Error::InvalidArgument("Buslaev–Faddeev identities live in the Dirichlet half-line channel".into()));
    }
    let pot = cache.pot;
    let moments = pot.moments()?;
    let [v0, v1, v2] = moments
        .origin_values
        .ok_or_else(|| Error::InvalidArgument("Buslaev–Faddeev needs V, V′, V″ at the origin".into()))?;
    let int_v = moments.halfline_integral;
    let int_v2 = moments.power_integrals["2"];
    let k2: f64 = bound.kappas.iter().map(|k| k * k).sum();
    let k4: f64 = bound.kappas.iter().map(|k| k.powi(4)).sum();
    let run = |integrand: Sampled| -> Result<Limit> {
        if pot.is_zero() {
            Ok(Limit { value: 0.0, error: 0.0, at_cut: 0.0 })
        } else {
            evaluate(cache, &Functional { boundary: None, integrand, exponent: -1.0 })
        }
    };
    let variant = |label: &str, residual: f64| SignVariant { label: label.to_string(), residual };
    let (lim, spectral, boundary, residual, sign_variants, scale) = if order == 1 {
        // δ + ∫V/2k = [δ⁽¹⁾ + ∫V/2k] + Δδ₁
        let integrand = move |k: f64, s: &PhaseSample| 2.0 / PI * (k * s.born[0] + 0.5 * int_v + k * s.remainder[1]);
        let lim = run(&integrand)?;
        let boundary = 0.25 * v0;
        let residual = lim.value + k2 - boundary;
        let variants = vec![
            variant("spectral sign flipped", lim.value - k2 - boundary),
            variant("boundary sign flipped", lim.value + k2 + boundary),
        ];
        (lim, k2, boundary, residual, variants, (v0.abs() / 4.0).max(k2))
    } else {
        // δ = −∫V/2k − (V′(0) + ∫V²)/(2k)³ + O(k⁻⁵)
        let c3 = int_v2 + v1;
        let integrand = move |k: f64, s: &PhaseSample| {
            let k3 = k * k * k;
            4.0 / PI * (k3 * s.born[0] + 0.5 * int_v * k * k + k3 * s.born[1] + c3 / 8.0 + k3 * s.remainder[2])
        };
        let lim = run(&integrand)?;
        let boundary = (2.0 * v0 * v0 - v2) / 8.0;
        let residual = lim.value - k4 - boundary;
        let variants = vec![
            variant("spectral sign flipped", lim.value + k4 - boundary),
            variant("V''(0) sign flipped", lim.value - k4 - (2.0 * v0 * v0 + v2) / 8.0),
            variant("V(0)^2 sign flipped", lim.value - k4 - (-2.0 * v0 * v0 - v2) / 8.0),
        ];
        (lim, k4, boundary, residual, variants, (v0 * v0 / 4.0).max(v2.abs() / 8.0).max(k4))
    };
    let scale = if scale > 0.0 { scale } else { 1.0 };
    Ok(BuslaevFaddeevReport {
        order,
        integral: lim.value,
        spectral,
        boundary,
        residual,
        sign_variants,
        scale,
        error: lim.error,
        pass: residual.abs() <= PASS_TOL * scale,
    })
}
