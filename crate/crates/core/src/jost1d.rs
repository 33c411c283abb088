//! Jost exponent β(k, x), Jost functions F and G, and phase shifts for the
//! two parity channels of an even potential on the line.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::channel::ChannelId;
use crate::error::{Error, Result};
use crate::format::sci;
use crate::numerics::extrap::neville_with_error;
use crate::par::{self, Parallelism};
use crate::potentials::{PotentialSpec, Shape};
use crate::radial::radial_data;
use crate::riccati::{solve_coupled, solve_linear, OdeOptions};

/// Below this the real-axis Riccati solve is not used directly.
pub const K_FLOOR: f64 = 1e-3;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Serialize)]
pub struct BetaSolution {
    pub k: Complex64,
    pub beta0: Complex64,
    pub betaprime0: Complex64,
    pub profile: Option<Vec<(f64, Complex64)>>,
    pub error_estimate: f64,
}

pub fn solve_beta(pot: &PotentialSpec, k: Complex64) -> Result<BetaSolution> {
    solve_beta_with(pot, k, &OdeOptions::default())
}

pub fn solve_beta_with(pot: &PotentialSpec, k: Complex64, opts: &OdeOptions) -> Result<BetaSolution> {
    pot.ensure_regular()?;
    if k.im < 0.0 {
        return Err(Error::DomainError(format!("Jost solve needs Im k ≥ 0, got {k}")));
    }
    if k.norm() == 0.0 {
        return Err(Error::DomainError("Jost solve at k = 0".into()));
    }
    if k.im == 0.0 {
        let (s, err) = solve_coupled(pot, k, None, 0, &[0.0], opts)?;
        return Ok(BetaSolution { k, beta0: s[0].beta, betaprime0: s[0].u, profile: None, error_estimate: err });
    }
    let (s, err) = solve_linear(pot, k, None, &[0.0], opts)?;
    let (g, dg) = s[0];
    Ok(BetaSolution { k, beta0: -I * g.ln(), betaprime0: dg / g, profile: None, error_estimate: err })
}

/// β′(k, x) on a grid of points in [0, x_max] (real k).
pub fn solve_beta_profile(pot: &PotentialSpec, k: f64, grid: &[f64]) -> Result<BetaSolution> {
    pot.ensure_regular()?;
    let mut stops: Vec<f64> = grid.iter().copied().filter(|&x| x >= 0.0).collect();
    stops.push(0.0);
    stops.sort_by(|a, b| b.partial_cmp(a).unwrap());
    stops.dedup();
    let kc = Complex64::new(k, 0.0);
    let (snaps, err) = solve_coupled(pot, kc, None, 0, &stops, &OdeOptions::default())?;
    let last = snaps.last().unwrap();
    let mut profile: Vec<(f64, Complex64)> = stops.iter().zip(&snaps).map(|(&x, s)| (x, s.u)).collect();
    profile.reverse();
    Ok(BetaSolution { k: kc, beta0: last.beta, betaprime0: last.u, profile: Some(profile), error_estimate: err })
}

pub fn jost_f(pot: &PotentialSpec, k: Complex64) -> Result<Complex64> {
    if let Some(r) = delta_reference(pot, ChannelId::Antisymmetric) {
        return Ok(r.jost(k));
    }
    if k.im > 0.0 {
        pot.ensure_regular()?;
        let (s, _) = solve_linear(pot, k, None, &[0.0], &OdeOptions::default())?;
        return Ok(s[0].0);
    }
    Ok((I * solve_beta(pot, k)?.beta0).exp())
}

pub fn jost_g(pot: &PotentialSpec, k: Complex64) -> Result<Complex64> {
    if let Some(r) = delta_reference(pot, ChannelId::Symmetric) {
        return Ok(r.jost(k));
    }
    if k.im > 0.0 {
        pot.ensure_regular()?;
        let (s, _) = solve_linear(pot, k, None, &[0.0], &OdeOptions::default())?;
        let (g, dg) = s[0];
        return Ok(dg + I * k * g);
    }
    let b = solve_beta(pot, k)?;
    Ok(I * (k + b.betaprime0) * (I * b.beta0).exp())
}

fn delta_reference(pot: &PotentialSpec, channel: ChannelId) -> Option<crate::potentials::ClosedFormReference> {
    if pot.is_singular() {
        pot.closed_form_reference(channel)
    } else {
        None
    }
}

/// Origin data of the coupled solve for one real k.
#[derive(Debug, Clone)]
pub(crate) struct JostData {
    pub k: f64,
    pub beta: Complex64,
    pub u: Complex64,
    pub log: Option<Complex64>,
    pub born_u: Vec<Complex64>,
    pub born_beta: Vec<Complex64>,
    pub rem_u: Vec<Complex64>,
    pub rem_beta: Vec<Complex64>,
    pub error: f64,
}

/// Phase shift, its Born terms and the Born-subtracted remainders at one k.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseSample {
    pub k: f64,
    pub delta: f64,
    /// δ^{(ν)} for ν = 1..=orders
    pub born: Vec<f64>,
    /// Δδ_m = δ − Σ_{ν≤m} δ^{(ν)} for m = 0..=orders
    pub remainder: Vec<f64>,
    /// Modulus of the complex remainder of the log Jost function, m = 0..=orders
    pub jost_remainder: Vec<f64>,
    pub error: f64,
}

/// Power-series coefficients c_1..c_n of ln(1 + Σ_μ x_μ εᵘ).
pub(crate) fn log_series(x: &[Complex64], n: usize) -> Vec<Complex64> {
    let s = |j: usize| if j >= 1 && j <= x.len() { x[j - 1] } else { Complex64::new(0.0, 0.0) };
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    for m in 1..=n {
        let mut acc = s(m) * m as f64;
        for j in 1..m {
            acc -= c[j] * s(m - j) * j as f64;
        }
        c[m] = acc / m as f64;
    }
    c.remove(0);
    c
}

fn ln1p(z: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * z.re + z.norm_sqr()).ln_1p();
    Complex64::new(re, z.im.atan2(1.0 + z.re))
}

const SERIES_TERMS: usize = 40;

pub(crate) fn assemble(channel: ChannelId, d: &JostData, orders: usize) -> PhaseSample {
    let mut born = Vec::with_capacity(orders);
    let mut remainder = Vec::with_capacity(orders + 1);
    let mut jost_remainder = Vec::with_capacity(orders + 1);
    if channel == ChannelId::Symmetric {
        let log = d.log.expect("symmetric channel needs the log component");
        let k = d.k;
        let xs: Vec<Complex64> = d.born_u[..orders].iter().map(|u| u / k).collect();
        let full = log_series(&xs, orders.max(1));
        remainder.push(-d.beta.re - log.im);
        jost_remainder.push((d.beta - I * log).norm());
        for nu in 0..orders {
            born.push(-d.born_beta[nu].re - full[nu].im);
        }
        for m in 1..=orders {
            let trunc = &xs[..m];
            let s: Complex64 = trunc.iter().sum();
            let abs_sum: f64 = trunc.iter().map(|x| x.norm()).sum();
            let ratio = d.rem_u[m - 1] / (k * (1.0 + s));
            let logdiff = if abs_sum < 0.25 && ratio.norm() < 0.5 {
                // L − T_m = [L − Log(1+x)] + ln(1 + r/(k(1+S))) + [Log(1+S) − T_m]
                let x = d.u / k;
                let wind = ((log - (1.0 + x).ln()).im / (2.0 * PI)).round();
                let coeffs = log_series(trunc, SERIES_TERMS);
                let tail: Complex64 = coeffs[m..].iter().sum();
                I * (2.0 * PI * wind) + ln1p(ratio) + tail
            } else {
                let t: Complex64 = full[..m].iter().sum();
                log - t
            };
            remainder.push(-d.rem_beta[m - 1].re - logdiff.im);
            jost_remainder.push((d.rem_beta[m - 1] - I * logdiff).norm());
        }
    } else {
        remainder.push(-d.beta.re);
        jost_remainder.push(d.beta.norm());
        for nu in 0..orders {
            born.push(-d.born_beta[nu].re);
            remainder.push(-d.rem_beta[nu].re);
            jost_remainder.push(d.rem_beta[nu].norm());
        }
    }
    PhaseSample { k: d.k, delta: remainder[0], born, remainder, jost_remainder, error: d.error }
}

fn delta_data(coupling: f64, channel: ChannelId, k: f64, orders: usize) -> JostData {
    let zero = Complex64::new(0.0, 0.0);
    let mut d = JostData {
        k,
        beta: zero,
        u: zero,
        log: Some(zero),
        born_u: vec![zero; orders],
        born_beta: vec![zero; orders],
        rem_u: vec![zero; orders],
        rem_beta: vec![zero; orders],
        error: 0.0,
    };
    if channel == ChannelId::Symmetric {
        let u = Complex64::new(0.0, -coupling / 2.0);
        d.u = u;
        d.log = Some((1.0 + u / k).ln());
        if orders > 0 {
            d.born_u[0] = u;
        }
    }
    d
}

/// Samples δ and its Born decomposition at one k in any channel. The delta
/// function is served from its closed form.
pub fn sample_phase(
    pot: &PotentialSpec,
    channel: ChannelId,
    k: f64,
    orders: usize,
    opts: &OdeOptions,
) -> Result<PhaseSample> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidArgument(format!("phase shift needs k > 0, got {k}")));
    }
    let data = match (&pot.shape, channel) {
        (Shape::Delta { coupling }, ChannelId::Symmetric | ChannelId::Antisymmetric) => {
            delta_data(*coupling, channel, k, orders)
        }
        (_, ChannelId::PartialWave(ell)) => radial_data(pot, ell, k, orders, opts)?,
        _ => {
            let (s, err) = solve_coupled(pot, Complex64::new(k, 0.0), None, orders, &[0.0], opts)?;
            let s = &s[0];
            JostData {
                k,
                beta: s.beta,
                u: s.u,
                log: Some(s.log),
                born_u: s.born_u.clone(),
                born_beta: s.born_beta.clone(),
                rem_u: s.rem_u.clone(),
                rem_beta: s.rem_beta.clone(),
                error: err,
            }
        }
    };
    Ok(assemble(channel, &data, orders))
}

pub fn phase_shift(pot: &PotentialSpec, k: f64, channel: ChannelId) -> Result<f64> {
    Ok(sample_phase(pot, channel, k, 0, &OdeOptions::default())?.delta)
}

/// k-points of the low-energy extrapolation, inside [K_FLOOR, 0.05].
pub fn low_energy_grid() -> Vec<f64> {
    (0..6).map(|j| 0.05 / f64::powi(2.0, j)).collect()
}

/// Zero-energy limits of Δδ_m.
#[derive(Debug, Clone, Serialize)]
pub struct LowEnergyLimit {
    /// Δδ_m(0⁺) for m = 0..=orders; the symmetric Born terms diverge at
    /// k = 0 so only m = 0 is present there.
    pub remainder: Vec<f64>,
    pub error: Vec<f64>,
}

pub fn low_energy_limit(
    pot: &PotentialSpec,
    channel: ChannelId,
    orders: usize,
    opts: &OdeOptions,
    mode: Parallelism,
) -> Result<LowEnergyLimit> {
    let ks = low_energy_grid();
    let samples = par::try_map(mode, &ks, |&k| sample_phase(pot, channel, k, orders, opts))?;
    let count = if channel == ChannelId::Symmetric { 1 } else { orders + 1 };
    let mut remainder = Vec::with_capacity(count);
    let mut error = Vec::with_capacity(count);
    for m in 0..count {
        let ys: Vec<f64> = samples.iter().map(|s| s.remainder[m]).collect();
        let (v, e) = neville_with_error(&ks, &ys);
        remainder.push(v);
        error.push(e);
    }
    Ok(LowEnergyLimit { remainder, error })
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseTable {
    pub channel: ChannelId,
    pub k_grid: Vec<f64>,
    pub delta: Vec<f64>,
    /// born_delta[ν−1][i] = δ^{(ν)}(k_i)
    pub born_delta: Vec<Vec<f64>>,
    pub branch_offsets: Vec<i64>,
    pub error: Vec<f64>,
}

const MAX_REFINE: usize = 12;

fn principal(x: f64) -> f64 {
    let w = x - 2.0 * PI * (x / (2.0 * PI)).round();
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

pub fn build_phase_table(
    pot: &PotentialSpec,
    channel: ChannelId,
    k_grid: &[f64],
    orders: usize,
    opts: &OdeOptions,
    mode: Parallelism,
) -> Result<PhaseTable> {
    if k_grid.is_empty() || k_grid[0] <= 0.0 || k_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("k grid must be positive and strictly increasing".into()));
    }
    let mut samples = par::try_map(mode, k_grid, |&k| sample_phase(pot, channel, k, orders, opts))?;
    // refine wherever neighbours jump by π/2 or more
    for _ in 0..MAX_REFINE {
        let gaps: Vec<f64> = samples
            .windows(2)
            .filter(|w| (w[1].delta - w[0].delta).abs() >= PI / 2.0)
            .map(|w| 0.5 * (w[0].k + w[1].k))
            .collect();
        if gaps.is_empty() {
            break;
        }
        let extra = par::try_map(mode, &gaps, |&k| sample_phase(pot, channel, k, orders, opts))?;
        samples.extend(extra);
        samples.sort_by(|a, b| a.k.partial_cmp(&b.k).unwrap());
    }
    if let Some(w) = samples.windows(2).find(|w| (w[1].delta - w[0].delta).abs() >= PI / 2.0) {
        return Err(Error::BranchAmbiguity { k: w[0].k });
    }
    Ok(PhaseTable {
        channel,
        k_grid: samples.iter().map(|s| s.k).collect(),
        delta: samples.iter().map(|s| s.delta).collect(),
        born_delta: (0..orders).map(|nu| samples.iter().map(|s| s.born[nu]).collect()).collect(),
        branch_offsets: samples.iter().map(|s| ((s.delta - principal(s.delta)) / (2.0 * PI)).round() as i64).collect(),
        error: samples.iter().map(|s| s.error).collect(),
    })
}

impl PhaseTable {
    pub fn to_csv(&self) -> String {
        let radial = matches!(self.channel, ChannelId::PartialWave(_));
        let mut out = String::new();
        if radial {
            out.push_str("ell,");
        }
        out.push_str("k,delta");
        for nu in 1..=self.born_delta.len() {
            out.push_str(&format!(",delta_born_{nu}"));
        }
        out.push_str(",branch_offset\n");
        for i in 0..self.k_grid.len() {
            if let ChannelId::PartialWave(l) = self.channel {
                out.push_str(&format!("{l},"));
            }
            out.push_str(&sci(self.k_grid[i]));
            out.push(',');
            out.push_str(&sci(self.delta[i]));
            for col in &self.born_delta {
                out.push(',');
                out.push_str(&sci(col[i]));
            }
            out.push_str(&format!(",{}\n", self.branch_offsets[i]));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn free_potential_is_trivial() {
        let p = PotentialSpec::free();
        let b = solve_beta(&p, c(1.0, 0.0)).unwrap();
        assert_eq!(b.beta0, c(0.0, 0.0));
        assert_eq!(b.betaprime0, c(0.0, 0.0));
        assert_eq!(jost_f(&p, c(1.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(jost_g(&p, c(1.0, 0.0)).unwrap(), c(0.0, 1.0));
        for ch in [ChannelId::Symmetric, ChannelId::Antisymmetric] {
            assert_eq!(phase_shift(&p, 0.7, ch).unwrap(), 0.0);
        }
    }

    #[test]
    fn single_level_sech2() {
        let p = PotentialSpec::sech2(2.0);
        let f = jost_f(&p, c(1.0, 0.0)).unwrap();
        assert!((f - 1.0 / c(1.0, 1.0)).norm() < 1e-9);
        assert!((f.norm() - 0.5f64.sqrt()).abs() < 1e-9);
        let g = jost_g(&p, c(1.0, 0.0)).unwrap();
        assert!((g - c(1.0, 1.0)).norm() < 1e-9);
        let fi = jost_f(&p, c(0.0, 0.5)).unwrap();
        assert!(fi.im.abs() < 1e-10 * fi.norm());
        assert!((phase_shift(&p, 1.0, ChannelId::Antisymmetric).unwrap() - PI / 4.0).abs() < 1e-9);
    }

    #[test]
    fn delta_reference_path() {
        let p = PotentialSpec::delta(2.0);
        assert_eq!(jost_g(&p, c(0.5, 0.0)).unwrap(), c(1.0, 0.5));
        assert!((phase_shift(&p, 1.0, ChannelId::Symmetric).unwrap() - PI / 4.0).abs() < 1e-15);
        assert_eq!(phase_shift(&p, 1.0, ChannelId::Antisymmetric).unwrap(), 0.0);
        assert!(matches!(solve_beta(&p, c(1.0, 0.0)), Err(Error::SingularPotential(_))));
        let s = sample_phase(&p, ChannelId::Symmetric, 2.0, 3, &OdeOptions::default()).unwrap();
        assert_relative_eq!(s.born[0], 0.5, epsilon = 1e-15);
        assert_eq!(s.born[1], 0.0);
        assert_relative_eq!(s.born[2], -0.5f64.powi(3) / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn reflection_symmetry() {
        let p = PotentialSpec::gaussian(3.0, 1.0);
        let plus = solve_beta(&p, c(2.0, 0.0)).unwrap().beta0;
        let minus = solve_beta(&p, c(-2.0, 0.0)).unwrap().beta0;
        assert!((minus + plus.conj()).norm() < 1e-9);
        assert!(((I * (minus - plus)).exp().norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn log_series_matches_expansion() {
        let x = [c(0.1, 0.2), c(-0.03, 0.01), c(0.004, 0.0)];
        let cs = log_series(&x, 3);
        assert!((cs[0] - x[0]).norm() < 1e-16);
        assert!((cs[1] - (x[1] - x[0] * x[0] / 2.0)).norm() < 1e-16);
        assert!((cs[2] - (x[2] - x[0] * x[1] + x[0] * x[0] * x[0] / 3.0)).norm() < 1e-16);
        let total: Complex64 = log_series(&x, 80).iter().sum();
        let s: Complex64 = x.iter().sum();
        assert!((total - (1.0 + s).ln()).norm() < 1e-14);
    }

    #[test]
    fn table_shape_and_csv() {
        let p = PotentialSpec::sech2(2.0);
        let grid = [0.01, 0.1, 1.0, 10.0, 50.0];
        let t = build_phase_table(&p, ChannelId::Antisymmetric, &grid, 2, &OdeOptions::default(), Parallelism::Sequential)
            .unwrap();
        assert!((t.delta[0] - (PI / 2.0 - 0.01f64.atan())).abs() < 1e-8);
        assert!((t.delta[4] - (1.0f64 / 50.0).atan()).abs() < 1e-9);
        let csv = t.to_csv();
        assert!(csv.starts_with("k,delta,delta_born_1,delta_born_2,branch_offset\n"));
        assert_eq!(csv.lines().count(), 6);
        assert!(build_phase_table(&p, ChannelId::Antisymmetric, &[1.0, 0.5], 0, &OdeOptions::default(), Parallelism::Sequential).is_err());
    }
}
