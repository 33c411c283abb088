//! Embedded Dormand–Prince 5(4) integrator with per-component tolerances.
//!
//! Integration may run in either direction; the scattering problems in this
//! crate are all integrated inward from a large radius toward the origin.

use num_complex::Complex64;
use std::ops::{Add, Mul};

use crate::error::{Error, Result};

/// Scalar types the integrator can carry.
pub trait OdeScalar: Copy + Send + Sync + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn modulus(self) -> f64;
}

impl OdeScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl OdeScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

pub trait OdeSystem<T: OdeScalar> {
    fn dim(&self) -> usize;
    fn rhs(&self, x: f64, y: &[T], dy: &mut [T]);
}

#[derive(Debug, Clone)]
pub struct Tolerance {
    pub rtol: f64,
    /// One entry per component, or a single entry applied to all.
    pub atol: Vec<f64>,
}

impl Tolerance {
    pub fn uniform(rtol: f64, atol: f64) -> Self {
        Tolerance { rtol, atol: vec![atol] }
    }

    fn atol(&self, i: usize) -> f64 {
        if self.atol.len() == 1 {
            self.atol[0]
        } else {
            self.atol[i]
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Sum of accepted local error estimates for each tracked component
    /// (only component 0 and 1 are tracked).
    pub local_error: [f64; 2],
}

impl StepStats {
    pub fn merge(&mut self, other: &StepStats) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.local_error[0] += other.local_error[0];
        self.local_error[1] += other.local_error[1];
    }
}

#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub tol: Tolerance,
    pub max_steps: usize,
    pub h_max: f64,
    pub h_min: f64,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl Dopri5 {
    pub fn new(tol: Tolerance) -> Self {
        Dopri5 { tol, max_steps: 2_000_000, h_max: f64::INFINITY, h_min: 1e-14 }
    }

    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }

    /// Advances `y` from `x0` to `x1` in place.
    pub fn integrate<T, S>(&self, sys: &S, x0: f64, x1: f64, y: &mut [T]) -> Result<StepStats>
    where
        T: OdeScalar,
        S: OdeSystem<T> + ?Sized,
    {
        let n = sys.dim();
        debug_assert_eq!(y.len(), n);
        let mut stats = StepStats::default();
        let span = x1 - x0;
        if span == 0.0 {
            return Ok(stats);
        }
        let dir = span.signum();
        let mut k: Vec<Vec<T>> = (0..7).map(|_| vec![T::zero(); n]).collect();
        let mut ytmp = vec![T::zero(); n];
        let mut ynew = vec![T::zero(); n];

        let mut x = x0;
        sys.rhs(x, y, &mut k[0]);
        let mut h = self.initial_step(y, &k[0], span.abs()) * dir;
        let mut last_fac = 1e-4_f64;

        while (x1 - x) * dir > 0.0 {
            if stats.accepted + stats.rejected > self.max_steps {
                return Err(Error::StiffnessFailure { x, k: "max steps exceeded".into() });
            }
            if (x + h - x1) * dir > 0.0 {
                h = x1 - x;
            }
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        let a = A[s][j];
                        if a != 0.0 {
                            acc = acc + kj[i] * (a * h);
                        }
                    }
                    ytmp[i] = acc;
                }
                let (head, tail) = k.split_at_mut(s);
                let _ = head;
                sys.rhs(x + C[s] * h, &ytmp, &mut tail[0]);
                if s == 6 {
                    ynew.copy_from_slice(&ytmp);
                }
            }
            // error estimate
            let mut err = 0.0_f64;
            let mut comp_err = [0.0_f64; 2];
            for i in 0..n {
                let mut e = T::zero();
                for (j, kj) in k.iter().enumerate() {
                    if E[j] != 0.0 {
                        e = e + kj[i] * (E[j] * h);
                    }
                }
                let em = e.modulus();
                if i < 2 {
                    comp_err[i] = em;
                }
                let sc = self.tol.atol(i) + self.tol.rtol * y[i].modulus().max(ynew[i].modulus());
                let r = em / sc;
                if r > err || r.is_nan() {
                    err = if r.is_nan() { f64::INFINITY } else { r };
                }
            }
            if err <= 1.0 {
                x += h;
                y.copy_from_slice(&ynew);
                k.swap(0, 6);
                stats.accepted += 1;
                stats.local_error[0] += comp_err[0];
                stats.local_error[1] += comp_err[1];
                // PI controller
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.7 / 5.0) * last_fac.powf(0.4 / 5.0)).clamp(0.2, 5.0)
                };
                last_fac = err.max(1e-4);
                h = (h * fac).abs().min(self.h_max) * dir;
            } else {
                stats.rejected += 1;
                let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                h *= fac;
                if h.abs() < self.h_min * x.abs().max(1.0) {
                    return Err(Error::StiffnessFailure { x, k: String::new() });
                }
            }
        }
        Ok(stats)
    }

    fn initial_step<T: OdeScalar>(&self, y: &[T], dy: &[T], span: f64) -> f64 {
        let mut d0 = 0.0_f64;
        let mut d1 = 0.0_f64;
        for i in 0..y.len() {
            let sc = self.tol.atol(i) + self.tol.rtol * y[i].modulus();
            d0 = d0.max(y[i].modulus() / sc);
            d1 = d1.max(dy[i].modulus() / sc);
        }
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(span * 0.01).min(self.h_max).max(1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Exp;
    impl OdeSystem<f64> for Exp {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _x: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = -y[0];
        }
    }

    struct Rotor {
        w: f64,
    }
    impl OdeSystem<Complex64> for Rotor {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _x: f64, y: &[Complex64], dy: &mut [Complex64]) {
            dy[0] = Complex64::new(0.0, self.w) * y[0];
        }
    }

    #[test]
    fn exponential_decay_forward_and_backward() {
        let ode = Dopri5::new(Tolerance::uniform(1e-12, 1e-14));
        let mut y = [1.0];
        ode.integrate(&Exp, 0.0, 3.0, &mut y).unwrap();
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-12);
        ode.integrate(&Exp, 3.0, 0.0, &mut y).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-11);
    }

    #[test]
    fn complex_rotation_keeps_phase() {
        let ode = Dopri5::new(Tolerance::uniform(1e-11, 1e-13));
        let mut y = [Complex64::new(1.0, 0.0)];
        ode.integrate(&Rotor { w: 40.0 }, 0.0, 2.0, &mut y).unwrap();
        let expect = Complex64::from_polar(1.0, 80.0);
        assert!((y[0] - expect).norm() < 1e-8, "{:?}", y[0]);
    }
}
