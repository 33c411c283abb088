//! Bound states from zeros of the Jost function on the positive imaginary
//! axis, cross-checked by Prüfer-angle shooting.

use num_complex::Complex64;
use serde::Serialize;

use crate::channel::ChannelId;
use crate::error::{Error, Result};
use crate::numerics::extrap::geomspace;
use crate::numerics::ode::{Dopri5, OdeSystem, Tolerance};
use crate::potentials::PotentialSpec;
use crate::radial::{self, EtaPoly};
use crate::riccati::{solve_linear, OdeOptions};

pub const KAPPA_FLOOR: f64 = 1e-4;
const POINTS_PER_DECADE: f64 = 40.0;
const KAPPA_TOL: f64 = 1e-10;
const AGREEMENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct BoundStateSet {
    pub channel: ChannelId,
    /// Binding momenta, strictly decreasing.
    pub kappas: Vec<f64>,
    pub jost_residuals: Vec<f64>,
    pub shooting_kappas: Vec<f64>,
    pub agreement: f64,
    /// A zero-energy (half-bound) state sits at the threshold.
    pub threshold: bool,
}

impl BoundStateSet {
    pub fn count(&self) -> usize {
        self.kappas.len()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "channel": self.channel,
            "kappas": self.kappas,
            "agreement": self.agreement,
            "shooting_kappas": self.shooting_kappas,
            "jost_residuals": self.jost_residuals,
            "threshold": self.threshold,
        })
    }
}

/// −Σ_j (−κ_j²)ⁿ.
pub fn spectral_moment(bound: &BoundStateSet, n: u32) -> f64 {
    -bound.kappas.iter().map(|k| (-k * k).powi(n as i32)).sum::<f64>()
}

/// Jost function at k = iκ, real for real potentials. Returns (raw value,
/// value normalised to tend to +1 as κ → ∞).
pub fn jost_on_imaginary_axis(pot: &PotentialSpec, channel: ChannelId, kappa: f64) -> Result<(f64, f64)> {
    let k = Complex64::new(0.0, kappa);
    let opts = OdeOptions::default();
    match channel {
        ChannelId::Antisymmetric | ChannelId::Symmetric => {
            let (s, _) = solve_linear(pot, k, None, &[0.0], &opts)?;
            let (g, dg) = s[0];
            if channel == ChannelId::Antisymmetric {
                Ok((g.re, g.re))
            } else {
                let big_g = (dg + Complex64::new(0.0, 1.0) * k * g).re;
                Ok((big_g, -big_g / kappa))
            }
        }
        ChannelId::PartialWave(ell) => {
            radial::check(pot, ell)?;
            let stops = radial::inner_radii(pot, ell);
            let (s, _) = solve_linear(pot, k, Some(ell), &stops, &opts)?;
            let vals: Vec<Complex64> = s.iter().map(|p| p.0).collect();
            let f = radial::extrapolate(&stops, &vals).re;
            Ok((f, f))
        }
    }
}

fn bisect_root(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, mut flo: f64) -> Result<f64> {
    while hi - lo > KAPPA_TOL * hi.max(1.0) * 1e-2 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn kappa_max(pot: &PotentialSpec) -> f64 {
    2.0 * pot.max_abs().sqrt()
}

fn jost_zeros(pot: &PotentialSpec, channel: ChannelId) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let top = kappa_max(pot);
    let decades = (top / KAPPA_FLOOR).log10();
    let count = ((decades * POINTS_PER_DECADE).ceil() as usize).max(2) + 1;
    let grid = geomspace(KAPPA_FLOOR, top, count);
    let vals: Vec<f64> = grid.iter().map(|&k| jost_on_imaginary_axis(pot, channel, k).map(|v| v.1)).collect::<Result<_>>()?;
    if vals[vals.len() - 1] <= 0.0 {
        return Err(Error::ScanIncomplete(format!(
            "Jost function is not positive at κ_max = {top} in channel {channel}"
        )));
    }
    let mut roots = Vec::new();
    for i in (0..grid.len() - 1).rev() {
        if (vals[i] > 0.0) != (vals[i + 1] > 0.0) || vals[i] == 0.0 {
            let r = bisect_root(|k| Ok(jost_on_imaginary_axis(pot, channel, k)?.1), grid[i], grid[i + 1], vals[i])?;
            roots.push(r);
        }
    }
    let residuals = roots.iter().map(|&k| jost_on_imaginary_axis(pot, channel, k).map(|v| v.0.abs())).collect::<Result<_>>()?;
    let raw_floor = jost_on_imaginary_axis(pot, channel, KAPPA_FLOOR)?.0;
    Ok((roots, residuals, raw_floor))
}

/// θ′ = cos²θ + (E − V − ℓ(ℓ+1)/r²) sin²θ.
struct Prufer<'a> {
    pot: &'a PotentialSpec,
    energy: f64,
    centrifugal: f64,
}

impl OdeSystem<f64> for Prufer<'_> {
    fn dim(&self) -> usize {
        1
    }

    fn rhs(&self, x: f64, y: &[f64], dy: &mut [f64]) {
        let (s, c) = y[0].sin_cos();
        let mut q = self.energy - self.pot.v(x);
        if self.centrifugal > 0.0 {
            q -= self.centrifugal / (x * x);
        }
        dy[0] = c * c + q * s * s;
    }
}

/// Number of bound states with binding momentum above κ.
fn count_below(pot: &PotentialSpec, channel: ChannelId, kappa: f64) -> Result<usize> {
    let x_max = pot.x_max();
    let (ell, theta0, x0) = match channel {
        ChannelId::Antisymmetric => (0, 0.0, 0.0),
        ChannelId::Symmetric => (0, std::f64::consts::FRAC_PI_2, 0.0),
        ChannelId::PartialWave(l) => {
            let r0 = 1e-4 * pot.width();
            if l == 0 {
                (0, 0.0, 0.0)
            } else {
                (l, (r0 / (l as f64 + 1.0)).atan(), r0)
            }
        }
    };
    let sys = Prufer { pot, energy: -kappa * kappa, centrifugal: (ell * (ell + 1)) as f64 };
    let ode = Dopri5::new(Tolerance::uniform(1e-12, 1e-13)).with_h_max((0.1 * pot.width()).max(1e-3));
    let mut y = [theta0];
    let mut x = x0;
    let mut marks = pot.breakpoints();
    marks.push(x_max);
    for m in marks {
        if m > x {
            ode.integrate(&sys, x, m, &mut y)?;
            x = m;
        }
    }
    let x_end = x.max(x0);
    // log-derivative of the decaying solution at the matching point
    let target = match channel {
        ChannelId::PartialWave(l) if l > 0 => {
            let z = Complex64::new(0.0, kappa * x_end);
            (-kappa * EtaPoly::new(l).eval(z)).re
        }
        _ => -kappa,
    };
    let theta = y[0];
    let (s, c) = theta.sin_cos();
    let base = (theta / std::f64::consts::PI).floor() as i64;
    let extra = if s * (c - target * s) < 0.0 { 1 } else { 0 };
    Ok((base + extra).max(0) as usize)
}

fn shooting(pot: &PotentialSpec, channel: ChannelId) -> Result<Vec<f64>> {
    let top = kappa_max(pot);
    let total = count_below(pot, channel, KAPPA_FLOOR)?;
    if count_below(pot, channel, top)? != 0 {
        return Err(Error::ScanIncomplete(format!("states deeper than κ_max = {top} in channel {channel}")));
    }
    let mut out = Vec::with_capacity(total);
    for j in 0..total {
        // κ_j is where the count drops from j + 1 to j
        let (mut lo, mut hi) = (KAPPA_FLOOR, top);
        while hi - lo > KAPPA_TOL * hi.max(1.0) * 1e-2 {
            let mid = 0.5 * (lo + hi);
            if count_below(pot, channel, mid)? > j {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    Ok(out)
}

pub fn bound_states(pot: &PotentialSpec, channel: ChannelId) -> Result<BoundStateSet> {
    if pot.is_singular() {
        let r = pot
            .closed_form_reference(channel)
            .ok_or_else(|| Error::InvalidArgument(format!("no reference data for {channel}")))?;
        let kappas = r.bound_kappas();
        return Ok(BoundStateSet {
            channel,
            jost_residuals: kappas.iter().map(|&k| r.jost(Complex64::new(0.0, k)).norm()).collect(),
            shooting_kappas: kappas.clone(),
            kappas,
            agreement: 0.0,
            threshold: false,
        });
    }
    if let ChannelId::PartialWave(ell) = channel {
        radial::check(pot, ell)?;
    }
    if pot.x_max() == 0.0 {
        return Ok(BoundStateSet {
            channel,
            kappas: vec![],
            jost_residuals: vec![],
            shooting_kappas: vec![],
            agreement: 0.0,
            // G(k) = ik vanishes at threshold
            threshold: channel == ChannelId::Symmetric,
        });
    }
    let (kappas, jost_residuals, at_floor) = jost_zeros(pot, channel)?;
    let shooting_kappas = shooting(pot, channel)?;
    if kappas.len() != shooting_kappas.len() {
        return Err(Error::CrossCheckMismatch(format!(
            "{channel}: {} Jost zeros vs {} shooting states",
            kappas.len(),
            shooting_kappas.len()
        )));
    }
    let agreement = kappas.iter().zip(&shooting_kappas).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if agreement > AGREEMENT_TOL {
        return Err(Error::CrossCheckMismatch(format!("{channel}: κ differ by {agreement:e}")));
    }
    let threshold = match pot.closed_form_reference(channel) {
        Some(r) => r.threshold_state(),
        None => {
            let unit = if channel == ChannelId::Symmetric { pot.k_scale() } else { 1.0 };
            at_floor.abs() < 1e-3 * unit
        }
    };
    Ok(BoundStateSet { channel, kappas, jost_residuals, shooting_kappas, agreement, threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::Geometry;

    #[test]
    fn delta_and_free() {
        let d = PotentialSpec::delta(2.0);
        assert_eq!(bound_states(&d, ChannelId::Symmetric).unwrap().kappas, vec![1.0]);
        assert!(bound_states(&d, ChannelId::Antisymmetric).unwrap().kappas.is_empty());
        for ch in [ChannelId::Symmetric, ChannelId::Antisymmetric] {
            assert!(bound_states(&PotentialSpec::free(), ch).unwrap().kappas.is_empty());
        }
    }

    #[test]
    fn sech2_levels() {
        let p = PotentialSpec::sech2(6.0);
        let s = bound_states(&p, ChannelId::Symmetric).unwrap();
        let a = bound_states(&p, ChannelId::Antisymmetric).unwrap();
        assert_eq!(s.count(), 1);
        assert_eq!(a.count(), 1);
        assert!((s.kappas[0] - 2.0).abs() < 1e-8);
        assert!((a.kappas[0] - 1.0).abs() < 1e-8);
        assert!(s.threshold && !a.threshold);
        assert!((spectral_moment(&s, 1) + spectral_moment(&a, 1) - 5.0).abs() < 1e-7);
    }

    #[test]
    fn moment_conventions() {
        let b = BoundStateSet {
            channel: ChannelId::Antisymmetric,
            kappas: vec![1.0],
            jost_residuals: vec![0.0],
            shooting_kappas: vec![1.0],
            agreement: 0.0,
            threshold: false,
        };
        assert_eq!(spectral_moment(&b, 1), 1.0);
        assert_eq!(spectral_moment(&b, 0), -1.0);
    }

    #[test]
    fn square_well_matches_transcendental_roots() {
        let p = PotentialSpec::square(4.0, 1.0);
        for ch in [ChannelId::Symmetric, ChannelId::Antisymmetric] {
            let exact = p.closed_form_reference(ch).unwrap().bound_kappas();
            let got = bound_states(&p, ch).unwrap();
            assert_eq!(got.count(), exact.len());
            for (a, b) in got.kappas.iter().zip(&exact) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn radial_p_wave() {
        // a√V₀ = 4 > π binds one p state
        let p = PotentialSpec::square(16.0, 1.0).with_geometry(Geometry::HalfLineRadial);
        let b = bound_states(&p, ChannelId::PartialWave(1)).unwrap();
        assert_eq!(b.count(), 1);
        let f = radial::jost_f_radial(&p, 1, Complex64::new(0.0, b.kappas[0])).unwrap();
        assert!(f.norm() < 1e-6);
        let shallow = PotentialSpec::square(4.0, 1.0).with_geometry(Geometry::HalfLineRadial);
        assert_eq!(bound_states(&shallow, ChannelId::PartialWave(1)).unwrap().count(), 0);
    }
}
