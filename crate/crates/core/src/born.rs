//! Born terms β^{(ν)} of the Jost exponent.
//!
//! On the line the hierarchy u_ν(x) = i∫_x^∞ e^{2ik(y−x)} Γ_ν(y) dy is
//! marched inward on a shared grid with a panel rule exact for
//! cubic × exponential; partial waves use the ODE form with the η_ℓ drift.

use num_complex::Complex64;
use serde::Serialize;

use crate::channel::ChannelId;
use crate::error::{Error, Result};
use crate::jost1d::log_series;
use crate::numerics::filon::{cubic_weights, cubic_weights_expm1, moments};
use crate::potentials::{PotentialSpec, Shape};
use crate::radial;
use crate::riccati::{solve_born_only, OdeOptions};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default number of Born orders carried through the pipeline.
pub const DEFAULT_ORDERS: usize = 3;

#[derive(Debug, Clone, Serialize)]
pub struct BornTerm {
    pub order: usize,
    pub channel: ChannelId,
    pub k: Complex64,
    /// β^{(ν)}(k) at the origin
    pub value: Complex64,
    /// β′^{(ν)}(k, 0)
    pub prime0: Complex64,
    pub profile: Option<Vec<(f64, Complex64)>>,
}

/// Piecewise-uniform grid; each segment lies between breakpoints of V.
#[derive(Debug, Clone)]
pub struct BornGrid {
    segments: Vec<Vec<f64>>,
}

impl BornGrid {
    pub fn new(pot: &PotentialSpec) -> Self {
        let x_max = pot.x_max();
        let h_target = pot.width() / 400.0;
        let mut edges = vec![0.0];
        edges.extend(pot.breakpoints().into_iter().filter(|&b| b > 0.0 && b < x_max));
        edges.push(x_max);
        let segments = edges
            .windows(2)
            .map(|w| {
                let n = (((w[1] - w[0]) / h_target).ceil() as usize).max(3);
                let h = (w[1] - w[0]) / n as f64;
                (0..=n).map(|i| if i == n { w[1] } else { w[0] + i as f64 * h }).collect()
            })
            .collect();
        BornGrid { segments }
    }

    pub fn nodes(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for s in &self.segments {
            for &x in s {
                if out.last() != Some(&x) {
                    out.push(x);
                }
            }
        }
        out
    }
}

/// First node and kind of the four-node stencil for panel i of n.
fn stencil(i: usize, n: usize) -> (usize, usize) {
    if i == 0 {
        (0, 0)
    } else if i + 2 > n {
        (n - 3, 2)
    } else {
        (i - 1, 1)
    }
}

/// Node offsets relative to the panel start for each stencil kind.
fn stencil_offsets(h: f64) -> [[f64; 4]; 3] {
    [[0.0, h, 2.0 * h, 3.0 * h], [-h, 0.0, h, 2.0 * h], [-2.0 * h, -h, 0.0, h]]
}

/// u_ν on every segment node for ν = 1..=orders.
struct Hierarchy {
    /// u[ν−1][segment][node]
    u: Vec<Vec<Vec<Complex64>>>,
    /// Γ[ν−1][segment][node]
    gamma: Vec<Vec<Vec<Complex64>>>,
}

fn march(pot: &PotentialSpec, grid: &BornGrid, k: Complex64, orders: usize) -> Hierarchy {
    let omega = 2.0 * k;
    let mut u: Vec<Vec<Vec<Complex64>>> = Vec::with_capacity(orders);
    let mut gamma: Vec<Vec<Vec<Complex64>>> = Vec::with_capacity(orders);
    for nu in 0..orders {
        let mut g_seg = Vec::with_capacity(grid.segments.len());
        for (si, seg) in grid.segments.iter().enumerate() {
            let (lo, hi) = (seg[0], seg[seg.len() - 1]);
            let eps = 1e-13 * (hi - lo);
            let g: Vec<Complex64> = if nu == 0 {
                // one-sided limits at the segment ends
                seg.iter().map(|&x| Complex64::new(pot.v(x.clamp(lo + eps, hi - eps)), 0.0)).collect()
            } else {
                (0..seg.len()).map(|j| (0..nu).map(|s| u[s][si][j] * u[nu - 1 - s][si][j]).sum()).collect()
            };
            g_seg.push(g);
        }
        let mut u_seg: Vec<Vec<Complex64>> = grid.segments.iter().map(|s| vec![Complex64::new(0.0, 0.0); s.len()]).collect();
        let mut carry = Complex64::new(0.0, 0.0);
        for si in (0..grid.segments.len()).rev() {
            let seg = &grid.segments[si];
            let n = seg.len() - 1;
            let h = seg[1] - seg[0];
            let phase = (I * omega * h).exp();
            let rels = stencil_offsets(h);
            let w: Vec<[Complex64; 4]> = rels.iter().map(|&rel| cubic_weights(omega, h, rel)).collect();
            let g = &g_seg[si];
            u_seg[si][n] = carry;
            for i in (0..n).rev() {
                let (s, kind) = stencil(i, n);
                let integral: Complex64 = (0..4).map(|j| w[kind][j] * g[s + j]).sum();
                u_seg[si][i] = phase * u_seg[si][i + 1] + I * integral;
            }
            carry = u_seg[si][0];
        }
        u.push(u_seg);
        gamma.push(g_seg);
    }
    Hierarchy { u, gamma }
}

/// β^{(ν)}(k, 0) = −∫₀^{x_max} u_ν. On each panel
/// ∫u = u(x_{i+1}) ∫₀^h e^{iωs}ds + ∫ Γ(x_i + s)(e^{iωs} − 1)/ω ds, so no
/// oscillating integrand is ever sampled.
fn origin_value(grid: &BornGrid, k: Complex64, u: &[Vec<Complex64>], g: &[Vec<Complex64>]) -> Complex64 {
    let omega = 2.0 * k;
    let mut total = Complex64::new(0.0, 0.0);
    for (si, seg) in grid.segments.iter().enumerate() {
        let n = seg.len() - 1;
        let h = seg[1] - seg[0];
        let m0 = moments(omega, h)[0];
        let w: Vec<[Complex64; 4]> = stencil_offsets(h).iter().map(|&rel| cubic_weights_expm1(omega, h, rel)).collect();
        for i in 0..n {
            let (s, kind) = stencil(i, n);
            total += u[si][i + 1] * m0 + (0..4).map(|j| w[kind][j] * g[si][s + j]).sum::<Complex64>();
        }
    }
    -total
}

/// (β′^{(ν)}(k,0), β^{(ν)}(k,0)) for ν = 1..=orders on the line.
pub fn born_origin(pot: &PotentialSpec, k: Complex64, orders: usize) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if let Shape::Delta { coupling } = pot.shape {
        let mut prime = vec![Complex64::new(0.0, 0.0); orders];
        if orders > 0 {
            prime[0] = Complex64::new(0.0, -coupling / 2.0);
        }
        return Ok((prime, vec![Complex64::new(0.0, 0.0); orders]));
    }
    pot.ensure_regular()?;
    if pot.x_max() == 0.0 {
        return Ok((vec![Complex64::new(0.0, 0.0); orders], vec![Complex64::new(0.0, 0.0); orders]));
    }
    let grid = BornGrid::new(pot);
    let h = march(pot, &grid, k, orders);
    let prime = (0..orders).map(|nu| h.u[nu][0][0]).collect();
    let value = (0..orders).map(|nu| origin_value(&grid, k, &h.u[nu], &h.gamma[nu])).collect();
    Ok((prime, value))
}

/// β′^{(ν)}(k, x) at the requested points (line geometry).
pub fn born_prime(pot: &PotentialSpec, nu: usize, k: Complex64, x_grid: &[f64]) -> Result<Vec<Complex64>> {
    if nu == 0 {
        return Err(Error::InvalidArgument("Born order starts at 1".into()));
    }
    if let Shape::Delta { coupling } = pot.shape {
        let v = if nu == 1 { Complex64::new(0.0, -coupling / 2.0) } else { Complex64::new(0.0, 0.0) };
        return Ok(x_grid.iter().map(|&x| if x == 0.0 { v } else { Complex64::new(0.0, 0.0) }).collect());
    }
    pot.ensure_regular()?;
    let x_max = pot.x_max();
    if x_max == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); x_grid.len()]);
    }
    let grid = BornGrid::new(pot);
    let hier = march(pot, &grid, k, nu);
    let u = &hier.u[nu - 1];
    let g = &hier.gamma[nu - 1];
    let omega = 2.0 * k;
    x_grid
        .iter()
        .map(|&x| {
            if x < 0.0 {
                return Err(Error::InvalidArgument(format!("x = {x} < 0")));
            }
            if x >= x_max {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let si = grid.segments.iter().position(|s| x <= s[s.len() - 1]).unwrap();
            let seg = &grid.segments[si];
            let n = seg.len() - 1;
            let i = seg.partition_point(|&y| y <= x).saturating_sub(1).min(n - 1);
            if x == seg[i] {
                return Ok(u[si][i]);
            }
            let (s, _) = stencil(i, n);
            let hh = seg[i + 1] - x;
            let rel = [seg[s] - x, seg[s + 1] - x, seg[s + 2] - x, seg[s + 3] - x];
            let w = cubic_weights(omega, hh, rel);
            let integral: Complex64 = (0..4).map(|j| w[j] * g[si][s + j]).sum();
            Ok((I * omega * hh).exp() * u[si][i + 1] + I * integral)
        })
        .collect()
}

/// Order-ν Born term at the origin in any channel.
pub fn born_beta(pot: &PotentialSpec, nu: usize, k: Complex64, channel: ChannelId) -> Result<BornTerm> {
    if nu == 0 {
        return Err(Error::InvalidArgument("Born order starts at 1".into()));
    }
    let (prime, value) = match channel {
        ChannelId::PartialWave(ell) => radial_born(pot, ell, k, nu, &OdeOptions::default())?,
        _ => born_origin(pot, k, nu)?,
    };
    Ok(BornTerm { order: nu, channel, k, value: value[nu - 1], prime0: prime[nu - 1], profile: None })
}

/// Partial-wave Born hierarchy, integrated to r_min and extrapolated.
pub fn radial_born(
    pot: &PotentialSpec,
    ell: u32,
    k: Complex64,
    orders: usize,
    opts: &OdeOptions,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    radial::check(pot, ell)?;
    let stops = radial::inner_radii(pot, ell);
    let snaps = solve_born_only(pot, k, Some(ell), orders, &stops, opts)?;
    let pick = |f: &dyn Fn(&(Vec<Complex64>, Vec<Complex64>)) -> Complex64| {
        let vals: Vec<Complex64> = snaps.iter().map(f).collect();
        radial::extrapolate(&stops, &vals)
    };
    let prime = (0..orders).map(|j| pick(&|s| s.0[j])).collect();
    let value = (0..orders).map(|j| pick(&|s| s.1[j])).collect();
    Ok((prime, value))
}

/// δ^{(ν)}(k). In the symmetric channel the prefactor ln(1 + β′/k) is
/// expanded in powers of V and its order-ν coefficient added.
pub fn born_phase(pot: &PotentialSpec, nu: usize, k: f64, channel: ChannelId) -> Result<f64> {
    if nu == 0 || !(k > 0.0) {
        return Err(Error::InvalidArgument(format!("born_phase needs ν ≥ 1 and k > 0 (ν = {nu}, k = {k})")));
    }
    let kc = Complex64::new(k, 0.0);
    match channel {
        ChannelId::PartialWave(ell) => Ok(-radial_born(pot, ell, kc, nu, &OdeOptions::default())?.1[nu - 1].re),
        ChannelId::Antisymmetric => Ok(-born_origin(pot, kc, nu)?.1[nu - 1].re),
        ChannelId::Symmetric => {
            let (prime, value) = born_origin(pot, kc, nu)?;
            let xs: Vec<Complex64> = prime.iter().map(|p| p / k).collect();
            Ok(-value[nu - 1].re - log_series(&xs, nu)[nu - 1].im)
        }
    }
}

/// Sum of the symmetric-channel log coefficients Σ_{ν≤m} c_ν(k) for complex k.
pub fn symmetric_log_born(pot: &PotentialSpec, k: Complex64, m: usize) -> Result<Complex64> {
    let (prime, _) = born_origin(pot, k, m)?;
    let xs: Vec<Complex64> = prime.iter().map(|p| p / k).collect();
    Ok(log_series(&xs, m).iter().sum())
}

/// Smallest k on a geometric scan where |β^{(2)}| < |β^{(1)}|/2 from there on.
pub fn born_crossover(pot: &PotentialSpec, channel: ChannelId) -> Result<Option<f64>> {
    let ks = crate::numerics::extrap::geomspace(0.05 * pot.k_scale(), 100.0 * pot.k_scale(), 60);
    let mut found = None;
    for &k in ks.iter().rev() {
        let kc = Complex64::new(k, 0.0);
        let (_, v) = match channel {
            ChannelId::PartialWave(ell) => radial_born(pot, ell, kc, 2, &OdeOptions::default())?,
            _ => born_origin(pot, kc, 2)?,
        };
        if v[1].norm() < 0.5 * v[0].norm() {
            found = Some(k);
        } else {
            break;
        }
    }
    Ok(found)
}

/// Log-log slope of |β^{(ν)}(k)| over the given k values.
pub fn decay_exponent(pot: &PotentialSpec, nu: usize, channel: ChannelId, ks: &[f64]) -> Result<f64> {
    let mut lx = Vec::with_capacity(ks.len());
    let mut ly = Vec::with_capacity(ks.len());
    for &k in ks {
        let t = born_beta(pot, nu, Complex64::new(k, 0.0), channel)?;
        lx.push(k.ln());
        ly.push(t.value.norm().ln());
    }
    Ok(crate::numerics::extrap::linear_regression(&lx, &ly).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jost1d::sample_phase;
    use crate::numerics::quad::integrate;
    use crate::potentials::Geometry;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn first_order_square_well() {
        let p = PotentialSpec::square(1.0, 1.0);
        let got = born_prime(&p, 1, c(1.0, 0.0), &[0.0]).unwrap()[0];
        let exact = -((2.0 * I).exp() - 1.0) / 2.0;
        assert!((got - exact).norm() < 1e-12, "{got} {exact}");
    }

    #[test]
    fn delta_reference() {
        let p = PotentialSpec::delta(2.0);
        assert_eq!(born_prime(&p, 1, c(3.0, 0.0), &[0.0]).unwrap()[0], c(0.0, -1.0));
        assert_eq!(born_beta(&p, 1, c(3.0, 0.0), ChannelId::Antisymmetric).unwrap().value, c(0.0, 0.0));
        assert!((born_phase(&p, 1, 1.0, ChannelId::Symmetric).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn free_potential() {
        let p = PotentialSpec::free();
        assert_eq!(born_prime(&p, 1, c(2.0, 0.0), &[0.0, 0.5]).unwrap(), vec![c(0.0, 0.0); 2]);
        assert_eq!(born_phase(&p, 1, 2.0, ChannelId::Antisymmetric).unwrap(), 0.0);
    }

    #[test]
    fn first_order_matches_direct_quadrature() {
        let p = PotentialSpec::gaussian(3.0, 1.0);
        for k in [0.3, 1.5, 7.0, 40.0] {
            let xm = p.x_max();
            let re = integrate(|y: f64| (1.0 - (2.0 * k * y).cos()) * p.v(y), 0.0, xm, &[], 1e-15, 1e-13).unwrap().value;
            let im = integrate(|y: f64| -(2.0 * k * y).sin() * p.v(y), 0.0, xm, &[], 1e-15, 1e-13).unwrap().value;
            let direct = c(re, im) / (2.0 * k);
            let got = born_beta(&p, 1, c(k, 0.0), ChannelId::Antisymmetric).unwrap().value;
            assert!((got - direct).norm() < 1e-10, "k={k}: {got} vs {direct}");
        }
    }

    #[test]
    fn grid_and_ode_routes_agree() {
        let opts = OdeOptions::default();
        for p in [PotentialSpec::gaussian(3.0, 1.0), PotentialSpec::sech2(5.0), PotentialSpec::square(4.0, 1.0)] {
            for ch in [ChannelId::Antisymmetric, ChannelId::Symmetric] {
                for k in [0.4, 3.0, 25.0] {
                    let s = sample_phase(&p, ch, k, 3, &opts).unwrap();
                    for nu in 1..=3 {
                        let b = born_phase(&p, nu, k, ch).unwrap();
                        assert!((b - s.born[nu - 1]).abs() < 1e-8 * (1.0 + b.abs()), "{p:?} {ch:?} k={k} ν={nu}: {b} vs {}", s.born[nu - 1]);
                    }
                }
            }
        }
    }

    #[test]
    fn profile_interpolates_between_nodes() {
        let p = PotentialSpec::gaussian(3.0, 1.0);
        let k = c(2.0, 0.0);
        let xs = [0.0, 0.01234, 0.5, 1.777, 3.0];
        let prof = born_prime(&p, 2, k, &xs).unwrap();
        // oracle: order-2 profile from the ODE route started at each point
        let fine = born_prime(&p, 2, k, &xs.iter().map(|x| x + 1e-9).collect::<Vec<_>>()).unwrap();
        for (a, b) in prof.iter().zip(&fine) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn reflection_identity() {
        let p = PotentialSpec::sech2(5.0);
        for nu in 1..=3 {
            let plus = born_origin(&p, c(1.7, 0.0), nu).unwrap().1[nu - 1];
            let minus = born_origin(&p, c(-1.7, 0.0), nu).unwrap().1[nu - 1];
            assert!((minus + plus.conj()).norm() < 1e-10);
        }
    }

    #[test]
    fn radial_s_wave_matches_line() {
        let p = PotentialSpec::gaussian(3.0, 1.0);
        let r = p.clone().with_geometry(Geometry::HalfLineRadial);
        for k in [0.5, 4.0] {
            let a = born_beta(&p, 2, c(k, 0.0), ChannelId::Antisymmetric).unwrap().value;
            let b = born_beta(&r, 2, c(k, 0.0), ChannelId::PartialWave(0)).unwrap().value;
            assert!((a - b).norm() < 1e-9);
        }
    }
}
