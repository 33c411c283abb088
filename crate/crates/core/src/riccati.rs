//! Inward integration of the Riccati equation for u = β′ together with its
//! Born hierarchy and the Born-subtracted remainders.
//!
//! Layout of the complex state for `m` tracked orders:
//! `[u, β, L, u₁..u_m, β₁..β_m, r₁..r_m, ρ₁..ρ_m]`, where
//! `L′ = u′/(k + u)` follows ln(1 + u/k) continuously and
//! `r_j = u − Σ_{ν≤j} u_ν` is integrated directly so the subtraction never
//! cancels.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ode::{Dopri5, OdeSystem, StepStats, Tolerance};
use crate::potentials::PotentialSpec;
use crate::radial::EtaPoly;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Step-control settings for every inward solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    pub rtol: f64,
    /// Absolute tolerance on u and β.
    pub atol: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-12 }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions { rtol: tol, atol: tol * 1e-2 }
    }

    /// Born terms and remainders are much smaller than u at large k.
    fn small_atol(&self) -> f64 {
        self.atol * 1e-3
    }
}

/// Drift coefficient c(x) = 2k η_ℓ(kx); η ≡ 1 on the line.
#[derive(Debug, Clone)]
pub(crate) struct Drift {
    k: Complex64,
    eta: Option<EtaPoly>,
}

impl Drift {
    pub fn new(k: Complex64, ell: Option<u32>) -> Self {
        let eta = ell.filter(|&l| l > 0).map(EtaPoly::new);
        Drift { k, eta }
    }

    #[inline]
    pub fn at(&self, x: f64) -> Complex64 {
        match &self.eta {
            None => 2.0 * self.k,
            Some(e) => 2.0 * self.k * e.eval(self.k * x),
        }
    }
}

pub(crate) struct Coupled<'a> {
    pot: &'a PotentialSpec,
    drift: Drift,
    k: Complex64,
    orders: usize,
    track_log: bool,
}

impl Coupled<'_> {
    pub fn dim(orders: usize) -> usize {
        3 + 4 * orders
    }
}

impl OdeSystem<Complex64> for Coupled<'_> {
    fn dim(&self) -> usize {
        Coupled::dim(self.orders)
    }

    fn rhs(&self, x: f64, y: &[Complex64], dy: &mut [Complex64]) {
        let m = self.orders;
        let v = self.pot.v(x);
        let c = self.drift.at(x);
        let u = y[0];
        let du = -I * (c * u + u * u + v);
        dy[0] = du;
        dy[1] = u;
        dy[2] = if self.track_log { du / (self.k + u) } else { Complex64::new(0.0, 0.0) };
        if m == 0 {
            return;
        }
        let bu = &y[3..3 + m];
        let ru = &y[3 + 2 * m..3 + 3 * m];
        for nu in 0..m {
            // Γ for order nu + 1
            let gamma = if nu == 0 {
                Complex64::new(v, 0.0)
            } else {
                (0..nu).map(|s| bu[s] * bu[nu - 1 - s]).sum()
            };
            dy[3 + nu] = -I * (c * bu[nu] + gamma);
            dy[3 + m + nu] = bu[nu];
        }
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..m {
            // remainder after subtracting orders 1..=j+1
            s += bu[j];
            let order = j + 1;
            let mut x_sum = Complex64::new(0.0, 0.0);
            for a in 0..order {
                for b in 0..order {
                    if a + b + 2 > order {
                        x_sum += bu[a] * bu[b];
                    }
                }
            }
            let r = ru[j];
            dy[3 + 2 * m + j] = -I * (c * r + 2.0 * s * r + r * r + x_sum);
            dy[3 + 3 * m + j] = r;
        }
    }
}

/// Snapshot of the coupled state at one stopping point.
#[derive(Debug, Clone)]
pub(crate) struct CoupledState {
    pub u: Complex64,
    pub beta: Complex64,
    pub log: Complex64,
    pub born_u: Vec<Complex64>,
    pub born_beta: Vec<Complex64>,
    pub rem_u: Vec<Complex64>,
    pub rem_beta: Vec<Complex64>,
}

impl CoupledState {
    fn from_slice(y: &[Complex64], m: usize) -> Self {
        CoupledState {
            u: y[0],
            beta: y[1],
            log: y[2],
            born_u: y[3..3 + m].to_vec(),
            born_beta: y[3 + m..3 + 2 * m].to_vec(),
            rem_u: y[3 + 2 * m..3 + 3 * m].to_vec(),
            rem_beta: y[3 + 3 * m..3 + 4 * m].to_vec(),
        }
    }
}

fn tolerance(dim: usize, opts: &OdeOptions) -> Tolerance {
    let mut atol = vec![opts.small_atol(); dim];
    atol[0] = opts.atol;
    atol[1] = opts.atol;
    atol[2] = opts.atol;
    Tolerance { rtol: opts.rtol, atol }
}

/// Integrates an inward system from `x_max` through the potential's
/// breakpoints, recording the state at each of the decreasing `stops`.
pub(crate) fn integrate_inward<S>(
    sys: &S,
    pot: &PotentialSpec,
    y: &mut [Complex64],
    stops: &[f64],
    tol: Tolerance,
    k: Complex64,
) -> Result<(Vec<Vec<Complex64>>, StepStats)>
where
    S: OdeSystem<Complex64>,
{
    let x_max = pot.x_max();
    let h_max = (0.25 * pot.width()).max(1e-3);
    let ode = Dopri5::new(tol).with_h_max(h_max);
    let mut marks: Vec<(f64, bool)> = pot
        .breakpoints()
        .into_iter()
        .filter(|&b| b < x_max && b > stops[0])
        .map(|b| (b, false))
        .collect();
    marks.extend(stops.iter().map(|&s| (s, true)));
    marks.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut x = x_max;
    let mut stats = StepStats::default();
    let mut out = Vec::with_capacity(stops.len());
    for (target, record) in marks {
        if target < x {
            let s = ode.integrate(sys, x, target, y).map_err(|e| match e {
                Error::StiffnessFailure { x, .. } => Error::StiffnessFailure { x, k: format!("{k}") },
                other => other,
            })?;
            stats.merge(&s);
            x = target;
        }
        if record {
            out.push(y.to_vec());
        }
    }
    Ok((out, stats))
}

/// Solves the coupled system at wavenumber `k`, returning the state at each
/// stop (decreasing, ≥ 0) plus the accumulated local error of β.
pub(crate) fn solve_coupled(
    pot: &PotentialSpec,
    k: Complex64,
    ell: Option<u32>,
    orders: usize,
    stops: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<CoupledState>, f64)> {
    pot.ensure_regular()?;
    let track_log = ell.is_none() && k.im == 0.0;
    let sys = Coupled { pot, drift: Drift::new(k, ell), k, orders, track_log };
    let dim = Coupled::dim(orders);
    let mut y = vec![Complex64::new(0.0, 0.0); dim];
    if pot.x_max() <= stops[0] {
        let st = CoupledState::from_slice(&y, orders);
        return Ok((vec![st; stops.len()], 0.0));
    }
    let (snaps, stats) = integrate_inward(&sys, pot, &mut y, stops, tolerance(dim, opts), k)?;
    Ok((snaps.iter().map(|s| CoupledState::from_slice(s, orders)).collect(), stats.local_error[1]))
}

/// Linear form g″ + i c g′ = V g of the scaled Jost solution f = w g, used
/// off the real axis where the Riccati variable can pass through poles.
struct LinearJost<'a> {
    pot: &'a PotentialSpec,
    drift: Drift,
}

impl OdeSystem<Complex64> for LinearJost<'_> {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, x: f64, y: &[Complex64], dy: &mut [Complex64]) {
        let v = self.pot.v(x);
        dy[0] = y[1];
        dy[1] = v * y[0] - I * self.drift.at(x) * y[1];
    }
}

/// (g, g′) at each stop, starting from g = 1, g′ = 0 at x_max.
pub(crate) fn solve_linear(
    pot: &PotentialSpec,
    k: Complex64,
    ell: Option<u32>,
    stops: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<(Complex64, Complex64)>, f64)> {
    pot.ensure_regular()?;
    let sys = LinearJost { pot, drift: Drift::new(k, ell) };
    let mut y = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    if pot.x_max() <= stops[0] {
        return Ok((vec![(y[0], y[1]); stops.len()], 0.0));
    }
    let tol = Tolerance { rtol: opts.rtol, atol: vec![opts.atol, opts.atol] };
    let (snaps, stats) = integrate_inward(&sys, pot, &mut y, stops, tol, k)?;
    Ok((snaps.iter().map(|s| (s[0], s[1])).collect(), stats.local_error[0]))
}

/// Born hierarchy alone, for arbitrary complex k (no full solution).
struct BornOnly<'a> {
    pot: &'a PotentialSpec,
    drift: Drift,
    orders: usize,
}

impl OdeSystem<Complex64> for BornOnly<'_> {
    fn dim(&self) -> usize {
        2 * self.orders
    }

    fn rhs(&self, x: f64, y: &[Complex64], dy: &mut [Complex64]) {
        let m = self.orders;
        let v = self.pot.v(x);
        let c = self.drift.at(x);
        for nu in 0..m {
            let gamma = if nu == 0 { Complex64::new(v, 0.0) } else { (0..nu).map(|s| y[s] * y[nu - 1 - s]).sum() };
            dy[nu] = -I * (c * y[nu] + gamma);
            dy[m + nu] = y[nu];
        }
    }
}

/// (β′^{(ν)}, β^{(ν)}) for ν = 1..=orders at each stop.
pub(crate) fn solve_born_only(
    pot: &PotentialSpec,
    k: Complex64,
    ell: Option<u32>,
    orders: usize,
    stops: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<(Vec<Complex64>, Vec<Complex64>)>> {
    pot.ensure_regular()?;
    let sys = BornOnly { pot, drift: Drift::new(k, ell), orders };
    let mut y = vec![Complex64::new(0.0, 0.0); 2 * orders];
    if pot.x_max() <= stops[0] {
        return Ok(vec![(y[..orders].to_vec(), y[orders..].to_vec()); stops.len()]);
    }
    let tol = Tolerance { rtol: opts.rtol, atol: vec![opts.small_atol()] };
    let (snaps, _) = integrate_inward(&sys, pot, &mut y, stops, tol, k)?;
    Ok(snaps.into_iter().map(|s| (s[..orders].to_vec(), s[orders..].to_vec())).collect())
}
