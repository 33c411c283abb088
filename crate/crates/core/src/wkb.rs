//! Semiclassical estimates for attractive wells, U = −V ≥ 0.

use serde::Serialize;

use crate::channel::ChannelId;
use crate::error::{Error, Result};
use crate::format::sci;
use crate::numerics::quad::{gauss_legendre, integrate};
use crate::par::{self, Parallelism};
use crate::potentials::{PotentialSpec, Shape};
use crate::spectrum::bound_states;

fn ensure_attractive(pot: &PotentialSpec) -> Result<()> {
    pot.ensure_regular()?;
    let bad = |x: f64, value: f64| Err(Error::PositivePotential { x, value });
    match &pot.shape {
        Shape::Gaussian { depth, .. } | Shape::Square { depth, .. } | Shape::Exponential { depth, .. } if *depth < 0.0 => {
            bad(0.0, -depth)
        }
        Shape::Sech2 { strength, .. } if *strength < 0.0 => bad(0.0, -strength),
        Shape::Tabulated(t) => match t.values.iter().position(|v| *v > 0.0) {
            Some(i) => bad(t.grid[i], t.values[i]),
            None => Ok(()),
        },
        _ => Ok(()),
    }
}

fn u_of(pot: &PotentialSpec, x: f64) -> f64 {
    (-pot.v(x)).max(0.0)
}

fn pieces(pot: &PotentialSpec) -> Vec<(f64, f64)> {
    let mut edges = vec![0.0];
    edges.extend(pot.breakpoints());
    edges.push(pot.x_max());
    edges.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1])).collect()
}

/// δ_WKB(k) = ∫₀^∞ (√(k² + U) − k) dx.
pub fn wkb_phase(pot: &PotentialSpec, k: f64) -> Result<f64> {
    ensure_attractive(pot)?;
    if !(k >= 0.0) {
        return Err(Error::InvalidArgument(format!("WKB phase needs k ≥ 0, got {k}")));
    }
    let mut total = 0.0;
    for (a, b) in pieces(pot) {
        // U/(√(k²+U) + k) avoids the cancellation at large k
        let f = |x: f64| {
            let u = u_of(pot, x);
            if u == 0.0 {
                0.0
            } else {
                u / ((k * k + u).sqrt() + k)
            }
        };
        total += integrate(f, a, b, &[], 1e-14, 1e-12)?.value;
    }
    Ok(total)
}

/// 2^{n+1} n! / (π (2n+1)!!), as the exact rational num/den multiplying 1/π.
pub fn wkb_coefficient_rational(n: u32) -> (u128, u128) {
    let mut num: u128 = 1 << (n + 1);
    let mut den: u128 = 1;
    for j in 1..=n as u128 {
        num *= j;
    }
    for j in (1..=2 * n as u128 + 1).step_by(2) {
        den *= j;
    }
    reduce(num, den)
}

/// (1/2π)·2·∫_{−1}^{1}(1−t²)ⁿ dt = 2^{2n+1}(n!)² / (π(2n+1)!): the phase-space
/// prefactor of ∫₀^∞U^{n+½}, as a rational multiplying 1/π.
pub fn phase_space_coefficient_rational(n: u32) -> (u128, u128) {
    let mut fact: u128 = 1;
    for j in 1..=n as u128 {
        fact *= j;
    }
    let mut big: u128 = 1;
    for j in 1..=2 * n as u128 + 1 {
        big *= j;
    }
    reduce((1u128 << (2 * n + 1)) * fact * fact, big)
}

fn reduce(a: u128, b: u128) -> (u128, u128) {
    let (mut x, mut y) = (a, b);
    while y != 0 {
        (x, y) = (y, x % y);
    }
    (a / x, b / x)
}

pub fn wkb_coefficient(n: u32) -> f64 {
    let (a, b) = wkb_coefficient_rational(n);
    a as f64 / b as f64 / std::f64::consts::PI
}

/// Semiclassical estimate of Σ_j κ_j^{2n} over both parities of the full line.
pub fn wkb_moment(pot: &PotentialSpec, n: u32) -> Result<f64> {
    ensure_attractive(pot)?;
    let p = n as f64 + 0.5;
    let integral = pot.power_integral(p)?;
    if !integral.is_finite() {
        return Err(Error::DivergentMoment(format!("∫U^{p} is not finite")));
    }
    Ok(wkb_coefficient(n) * integral)
}

/// (1/2π)∫dy∫dp (U − p²)ⁿ over the classically allowed region of the full
/// line, and the WKB moment it should reproduce.
pub fn semiclassical_check(pot: &PotentialSpec, n: u32) -> Result<(f64, f64)> {
    let wkb = wkb_moment(pot, n)?;
    // Gauss–Legendre with n + 1 nodes is exact for the degree-2n integrand
    let (t, w) = gauss_legendre(n as usize + 1);
    let mut half = 0.0;
    for (a, b) in pieces(pot) {
        let f = |y: f64| {
            let u = u_of(pot, y);
            let r = u.sqrt();
            r * t.iter().zip(&w).map(|(t, w)| w * (u - u * t * t).powi(n as i32)).sum::<f64>()
        };
        half += integrate(f, a, b, &[], 1e-15, 1e-13)?.value;
    }
    Ok((2.0 * half / (2.0 * std::f64::consts::PI), wkb))
}

#[derive(Debug, Clone, Serialize)]
pub struct WkbEstimate {
    pub l: u32,
    pub n: u32,
    pub value: f64,
    /// Σ κ^{2n} over the bound states of both parities.
    pub exact: f64,
    pub relative_error: f64,
}

/// Relative WKB error for V = −l(l+1)sech²x over a grid of l and n.
pub fn figure1_data(ns: &[u32], ls: &[u32], mode: Parallelism) -> Result<Vec<WkbEstimate>> {
    let spectra = par::try_map(mode, ls, |&l| {
        let pot = PotentialSpec::sech2((l * (l + 1)) as f64);
        let mut kappas = bound_states(&pot, ChannelId::Symmetric)?.kappas;
        kappas.extend(bound_states(&pot, ChannelId::Antisymmetric)?.kappas);
        Ok::<_, Error>((l, pot, kappas))
    })?;
    let mut rows = Vec::with_capacity(ns.len() * ls.len());
    for &n in ns {
        for (l, pot, kappas) in &spectra {
            let value = wkb_moment(pot, n)?;
            let exact: f64 = kappas.iter().map(|k| k.powi(2 * n as i32)).sum();
            rows.push(WkbEstimate { l: *l, n, value, exact, relative_error: (value - exact) / (value + exact) });
        }
    }
    Ok(rows)
}

pub fn figure1_csv(rows: &[WkbEstimate]) -> String {
    let mut out = String::from("l,n,wkb,exact,relative_error\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{},{}\n", r.l, r.n, sci(r.value), sci(r.exact), sci(r.relative_error)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jost1d::phase_shift;

    #[test]
    fn phase_examples() {
        assert_eq!(wkb_phase(&PotentialSpec::free(), 1.0).unwrap(), 0.0);
        let sq = wkb_phase(&PotentialSpec::square(4.0, 1.0), 1.0).unwrap();
        assert!((sq - (5f64.sqrt() - 1.0)).abs() < 1e-12);
        let p = PotentialSpec::sech2(20.0);
        let exact = phase_shift(&p, 2.0, ChannelId::Symmetric).unwrap();
        let w = wkb_phase(&p, 2.0).unwrap();
        assert!(((w - exact) / exact).abs() < 0.02, "{w} {exact}");
    }

    #[test]
    fn repulsive_rejected() {
        let p = PotentialSpec::gaussian(-1.0, 1.0);
        assert!(matches!(wkb_phase(&p, 1.0), Err(Error::PositivePotential { .. })));
        assert!(matches!(wkb_moment(&p, 1), Err(Error::PositivePotential { .. })));
    }

    #[test]
    fn coefficients() {
        assert!((wkb_coefficient(0) - 2.0 / std::f64::consts::PI).abs() < 1e-15);
        assert!((wkb_coefficient(1) - 4.0 / (3.0 * std::f64::consts::PI)).abs() < 1e-15);
        for n in 0..=4 {
            assert_eq!(wkb_coefficient_rational(n), phase_space_coefficient_rational(n));
        }
    }

    #[test]
    fn sech2_l4_moment() {
        let v = wkb_moment(&PotentialSpec::sech2(20.0), 1).unwrap();
        assert!((v - 20f64.powf(1.5) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn phase_space_matches_moment() {
        for (p, n) in [
            (PotentialSpec::gaussian(3.0, 1.0), 1),
            (PotentialSpec::gaussian(10.0, 1.0), 2),
            (PotentialSpec::sech2(5.0), 1),
            (PotentialSpec::square(4.0, 1.0), 1),
        ] {
            let (a, b) = semiclassical_check(&p, n).unwrap();
            assert!(((a - b) / b).abs() < 1e-8, "{a} {b}");
        }
        assert_eq!(semiclassical_check(&PotentialSpec::free(), 1).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn figure_rows() {
        let rows = figure1_data(&[1], &[1, 4], Parallelism::Sequential).unwrap();
        assert_eq!(rows.len(), 2);
        let r4 = &rows[1];
        assert!((r4.exact - 30.0).abs() < 1e-7);
        let w = 20f64.powf(1.5) / 3.0;
        assert!((r4.relative_error - (w - 30.0) / (w + 30.0)).abs() < 1e-6);
        assert!(rows[0].relative_error.abs() > r4.relative_error.abs());
        assert_eq!(figure1_csv(&rows).lines().count(), 3);
    }
}
