//! Partial waves in three dimensions: η_ℓ, the radial Riccati solve and the
//! radial Jost function.

use num_complex::Complex64;
use serde::Serialize;

use crate::channel::ChannelId;
use crate::error::{Error, Result};
use crate::jost1d::{assemble, JostData};
use crate::numerics::extrap::neville_to_zero_c;
use crate::potentials::{Geometry, PotentialSpec};
use crate::riccati::{solve_coupled, solve_linear, OdeOptions};

pub const MAX_ELL: u32 = 25;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// η_ℓ(z) = 1 + i w² p′(w)/p(w) with w = 1/z and
/// p(w) = Σ_j (ℓ+j)!/(j!(ℓ−j)!) (i w/2)^j, so that z h_ℓ(z) ∝ e^{iz} p(1/z).
#[derive(Debug, Clone)]
pub struct EtaPoly {
    ell: u32,
    coef: Vec<Complex64>,
}

impl EtaPoly {
    pub fn new(ell: u32) -> Self {
        let l = ell as usize;
        let mut coef = Vec::with_capacity(l + 1);
        let mut c = Complex64::new(1.0, 0.0);
        coef.push(c);
        for j in 0..l {
            // a_{j+1}/a_j = (ℓ+j+1)(ℓ−j)/(j+1) · i/2
            c *= I * (((l + j + 1) * (l - j)) as f64 / (2.0 * (j + 1) as f64));
            coef.push(c);
        }
        EtaPoly { ell, coef }
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let l = self.ell as usize;
        if l == 0 {
            return Complex64::new(1.0, 0.0);
        }
        if z.norm() >= 1.0 {
            let w = 1.0 / z;
            let mut p = self.coef[l];
            let mut dp = Complex64::new(0.0, 0.0);
            for j in (0..l).rev() {
                dp = dp * w + p;
                p = p * w + self.coef[j];
            }
            1.0 + I * w * w * dp / p
        } else {
            // q(z) = z^ℓ p(1/z) = Σ a_j z^{ℓ−j}
            let mut q = self.coef[0];
            let mut dq = Complex64::new(0.0, 0.0);
            for j in 1..=l {
                dq = dq * z + q;
                q = q * z + self.coef[j];
            }
            1.0 - I * (dq / q - l as f64 / z)
        }
    }
}

/// η_ℓ(z) = −i d/dz ln[z h_ℓ⁽¹⁾(z)].
pub fn eta(ell: u32, z: Complex64) -> Result<Complex64> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::DomainError("η_ℓ is singular at z = 0".into()));
    }
    if z.im < 0.0 {
        return Err(Error::DomainError(format!("η_ℓ requested in the lower half plane at z = {z}")));
    }
    Ok(EtaPoly::new(ell).eval(z))
}

#[derive(Debug, Clone, Serialize)]
pub struct RadialBeta {
    pub ell: u32,
    pub k: Complex64,
    pub beta0: Complex64,
    pub betaprime_profile: Option<Vec<(f64, Complex64)>>,
    pub r_min: f64,
    pub r_max: f64,
    pub error_estimate: f64,
}

pub(crate) fn check(pot: &PotentialSpec, ell: u32) -> Result<()> {
    pot.ensure_regular()?;
    if pot.geometry != Geometry::HalfLineRadial {
        return Err(Error::GeometryMismatch("partial waves need geometry half_line_radial".into()));
    }
    if ell > MAX_ELL {
        return Err(Error::InvalidArgument(format!("ℓ = {ell} exceeds the supported maximum {MAX_ELL}")));
    }
    Ok(())
}

/// Inner cut-off radii; the η_ℓ term is singular at r = 0 for ℓ > 0.
pub(crate) fn inner_radii(pot: &PotentialSpec, ell: u32) -> Vec<f64> {
    if ell == 0 {
        vec![0.0]
    } else {
        let r = 1e-4 * pot.width();
        vec![r, r / 2.0, r / 4.0]
    }
}

pub(crate) fn extrapolate(stops: &[f64], vals: &[Complex64]) -> Complex64 {
    if stops.len() == 1 {
        vals[0]
    } else {
        neville_to_zero_c(stops, vals)
    }
}

pub(crate) fn radial_data(
    pot: &PotentialSpec,
    ell: u32,
    k: f64,
    orders: usize,
    opts: &OdeOptions,
) -> Result<JostData> {
    check(pot, ell)?;
    let stops = inner_radii(pot, ell);
    let (snaps, err) = solve_coupled(pot, Complex64::new(k, 0.0), Some(ell), orders, &stops, opts)
        .map_err(|e| match e {
            Error::StiffnessFailure { x, .. } => {
                Error::StiffnessFailure { x, k: format!("{k} (ℓ = {ell}, r_min = {:e})", stops[stops.len() - 1]) }
            }
            other => other,
        })?;
    let pick = |f: &dyn Fn(&crate::riccati::CoupledState) -> Complex64| -> Complex64 {
        let vals: Vec<Complex64> = snaps.iter().map(f).collect();
        extrapolate(&stops, &vals)
    };
    Ok(JostData {
        k,
        beta: pick(&|s| s.beta),
        u: pick(&|s| s.u),
        log: None,
        born_u: (0..orders).map(|j| pick(&|s| s.born_u[j])).collect(),
        born_beta: (0..orders).map(|j| pick(&|s| s.born_beta[j])).collect(),
        rem_u: (0..orders).map(|j| pick(&|s| s.rem_u[j])).collect(),
        rem_beta: (0..orders).map(|j| pick(&|s| s.rem_beta[j])).collect(),
        error: err,
    })
}

pub fn solve_beta_radial(pot: &PotentialSpec, ell: u32, k: Complex64) -> Result<RadialBeta> {
    solve_beta_radial_with(pot, ell, k, &OdeOptions::default())
}

pub fn solve_beta_radial_with(pot: &PotentialSpec, ell: u32, k: Complex64, opts: &OdeOptions) -> Result<RadialBeta> {
    check(pot, ell)?;
    let stops = inner_radii(pot, ell);
    let r_min = stops[stops.len() - 1];
    let (beta0, err) = if k.im == 0.0 && k.re != 0.0 {
        let (snaps, err) = solve_coupled(pot, k, Some(ell), 0, &stops, opts)?;
        let vals: Vec<Complex64> = snaps.iter().map(|s| s.beta).collect();
        (extrapolate(&stops, &vals), err)
    } else {
        if k.im < 0.0 || k.norm() == 0.0 {
            return Err(Error::DomainError(format!("radial Jost solve needs Im k ≥ 0 and k ≠ 0, got {k}")));
        }
        let (snaps, err) = solve_linear(pot, k, Some(ell), &stops, opts)?;
        let vals: Vec<Complex64> = snaps.iter().map(|s| s.0).collect();
        (-I * extrapolate(&stops, &vals).ln(), err)
    };
    Ok(RadialBeta { ell, k, beta0, betaprime_profile: None, r_min, r_max: pot.x_max(), error_estimate: err })
}

/// F_ℓ(k) = lim_{r→0} f_ℓ(k, r)/w_ℓ(kr).
pub fn jost_f_radial(pot: &PotentialSpec, ell: u32, k: Complex64) -> Result<Complex64> {
    check(pot, ell)?;
    if k.im > 0.0 {
        // stay on the linear form so F_ℓ is returned without a log branch
        let stops = inner_radii(pot, ell);
        let (snaps, _) = solve_linear(pot, k, Some(ell), &stops, &OdeOptions::default())?;
        let vals: Vec<Complex64> = snaps.iter().map(|s| s.0).collect();
        return Ok(extrapolate(&stops, &vals));
    }
    Ok((I * solve_beta_radial(pot, ell, k)?.beta0).exp())
}

pub fn phase_shift_radial(pot: &PotentialSpec, ell: u32, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!("phase shift needs k > 0, got {k}")));
    }
    let data = radial_data(pot, ell, k, 0, &OdeOptions::default())?;
    Ok(assemble(ChannelId::PartialWave(ell), &data, 0).delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// z h_ℓ(z) and its derivative from the upward recurrence.
    fn zh_and_derivative(ell: u32, z: Complex64) -> (Complex64, Complex64) {
        let h0 = -I * (I * z).exp() / z;
        let h1 = -(I * z).exp() * (z + I) / (z * z);
        let mut h = vec![h0, h1];
        for l in 1..ell as usize {
            let next = (2 * l + 1) as f64 / z * h[l] - h[l - 1];
            h.push(next);
        }
        let l = ell as usize;
        let w = z * h[l];
        // (z h_ℓ)′ = z h_{ℓ−1} − ℓ h_ℓ
        let dw = if l == 0 { I * w } else { z * h[l - 1] - l as f64 * h[l] };
        (w, dw)
    }

    #[test]
    fn closed_forms() {
        let z = Complex64::new(1.0, 0.0);
        assert!((eta(0, Complex64::new(0.3, 2.0)).unwrap() - 1.0).norm() < 1e-15);
        assert!((eta(1, z).unwrap() - (1.0 - 1.0 / (1.0 + I))).norm() < 1e-15);
        assert!((eta(3, Complex64::new(1e6, 0.0)).unwrap() - 1.0).norm() < 1e-5);
        assert!(eta(2, Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn matches_recurrence_oracle() {
        for ell in 0..=6 {
            for z in [Complex64::new(0.7, 0.0), Complex64::new(3.0, 0.5), Complex64::new(0.2, 1.5), Complex64::new(12.0, 0.0)] {
                let (w, dw) = zh_and_derivative(ell, z);
                let oracle = -I * dw / w;
                let got = eta(ell, z).unwrap();
                assert!((got - oracle).norm() < 1e-10 * oracle.norm().max(1.0), "ℓ={ell} z={z}: {got} vs {oracle}");
            }
        }
    }

    #[test]
    fn free_radial_problem() {
        let p = PotentialSpec::free().with_geometry(Geometry::HalfLineRadial);
        for ell in [0, 1, 4] {
            assert_eq!(solve_beta_radial(&p, ell, Complex64::new(1.3, 0.0)).unwrap().beta0, Complex64::new(0.0, 0.0));
            assert_eq!(jost_f_radial(&p, ell, Complex64::new(0.0, 0.4)).unwrap(), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn square_well_s_wave() {
        let p = PotentialSpec::square(4.0, 1.0).with_geometry(Geometry::HalfLineRadial);
        let k: f64 = 1.0;
        let big = (k * k + 4.0).sqrt();
        let exact = (k * big.tan() / big).atan() - k;
        let d = phase_shift_radial(&p, 0, k).unwrap();
        let diff = d - exact;
        assert!((diff - (diff / std::f64::consts::PI).round() * std::f64::consts::PI).abs() < 1e-8, "{d} {exact}");
    }

    #[test]
    fn geometry_is_checked() {
        assert!(matches!(solve_beta_radial(&PotentialSpec::sech2(2.0), 0, Complex64::new(1.0, 0.0)), Err(Error::GeometryMismatch(_))));
    }
}
