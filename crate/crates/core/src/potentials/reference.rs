//! Exact scattering data for the delta function, integer-ℓ sech² and the
//! square well, used as oracles and as the only route for the delta function.

use num_complex::Complex64;

use super::{Geometry, PotentialSpec, Shape};
use crate::channel::ChannelId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceKind {
    Delta { coupling: f64 },
    Sech2 { ell: u32, width: f64 },
    Square { depth: f64, width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormReference {
    pub kind: ReferenceKind,
    pub channel: ChannelId,
}

const I: Complex64 = Complex64::new(0.0, 1.0);

fn csinc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

impl ClosedFormReference {
    pub fn for_potential(p: &PotentialSpec, channel: ChannelId) -> Option<Self> {
        let one_d = p.geometry == Geometry::FullLineSymmetric;
        // the s-wave is the antisymmetric problem on the half-line
        let channel_ok = match channel {
            ChannelId::PartialWave(0) => !one_d,
            ChannelId::PartialWave(_) => false,
            _ => one_d,
        };
        if !channel_ok {
            return None;
        }
        let kind = match p.shape {
            Shape::Delta { coupling } => ReferenceKind::Delta { coupling },
            Shape::Square { depth, width } => ReferenceKind::Square { depth, width },
            Shape::Sech2 { width, .. } => {
                let ell = p.sech2_ell()?;
                let r = ell.round();
                if (ell - r).abs() > 1e-12 {
                    return None;
                }
                ReferenceKind::Sech2 { ell: r as u32, width }
            }
            _ => return None,
        };
        Some(ClosedFormReference { kind, channel })
    }

    fn symmetric(&self) -> bool {
        self.channel == ChannelId::Symmetric
    }

    /// F(k) in Dirichlet channels, G(k) in the symmetric channel.
    pub fn jost(&self, k: Complex64) -> Complex64 {
        match self.kind {
            ReferenceKind::Delta { coupling } => {
                if self.symmetric() {
                    I * k + coupling / 2.0
                } else {
                    Complex64::new(1.0, 0.0)
                }
            }
            ReferenceKind::Sech2 { ell, width } => {
                let kp = k * width;
                let l = ell as i64;
                let mut num = Complex64::new(1.0, 0.0);
                let mut den = Complex64::new(1.0, 0.0);
                if self.symmetric() {
                    let mut j = l;
                    while j >= 0 {
                        num *= kp - I * j as f64;
                        j -= 2;
                    }
                    let mut j = l - 1;
                    while j > 0 {
                        den *= kp + I * j as f64;
                        j -= 2;
                    }
                    I / width * num / den
                } else {
                    let mut j = l - 1;
                    while j >= 0 {
                        num *= kp - I * j as f64;
                        j -= 2;
                    }
                    let mut j = l;
                    while j > 0 {
                        den *= kp + I * j as f64;
                        j -= 2;
                    }
                    num / den
                }
            }
            ReferenceKind::Square { depth, width } => {
                let big_k = (k * k + depth).sqrt();
                let ka = big_k * width;
                let phase = (I * k * width).exp();
                if self.symmetric() {
                    phase * (I * k * ka.cos() + big_k * big_k * width * csinc(ka))
                } else {
                    phase * (ka.cos() - I * k * width * csinc(ka))
                }
            }
        }
    }

    /// Continuous-branch phase shift with δ(∞) = 0.
    pub fn phase(&self, k: f64) -> f64 {
        match self.kind {
            ReferenceKind::Delta { coupling } => {
                if self.symmetric() {
                    (coupling / (2.0 * k)).atan()
                } else {
                    0.0
                }
            }
            ReferenceKind::Sech2 { ell, width } => (1..=ell).map(|j| (j as f64 / (k * width)).atan()).sum(),
            ReferenceKind::Square { depth, width } => {
                let big_k = (k * k + depth).sqrt();
                let (s, c) = (big_k * width).sin_cos();
                let base = (big_k - k) * width;
                if self.symmetric() {
                    base + ((big_k - k) * s * c).atan2(k * c * c + big_k * s * s)
                } else {
                    base + ((k - big_k) * s * c).atan2(big_k * c * c + k * s * s)
                }
            }
        }
    }

    /// Bound-state momenta, sorted decreasing.
    pub fn bound_kappas(&self) -> Vec<f64> {
        match self.kind {
            ReferenceKind::Delta { coupling } => {
                if self.symmetric() {
                    vec![coupling / 2.0]
                } else {
                    Vec::new()
                }
            }
            ReferenceKind::Sech2 { ell, width } => {
                let start = if self.symmetric() { ell as i64 } else { ell as i64 - 1 };
                let mut out = Vec::new();
                let mut j = start;
                while j > 0 {
                    out.push(j as f64 / width);
                    j -= 2;
                }
                out
            }
            ReferenceKind::Square { depth, width } => square_well_kappas(depth, width, self.symmetric()),
        }
    }

    /// Zero-energy (half-bound) state present in this channel.
    pub fn threshold_state(&self) -> bool {
        match self.kind {
            ReferenceKind::Sech2 { ell, .. } => (ell % 2 == 0) == self.symmetric(),
            ReferenceKind::Delta { .. } => false,
            ReferenceKind::Square { depth, width } => {
                let r = width * depth.sqrt();
                let q = if self.symmetric() { r / std::f64::consts::PI } else { r / std::f64::consts::PI - 0.5 };
                r > 0.0 && (q - q.round()).abs() < 1e-12
            }
        }
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Even states solve q tan q = √(R² − q²), odd states −q cot q = √(R² − q²),
/// with q = Ka inside the well and R = a√V₀.
fn square_well_kappas(depth: f64, width: f64, symmetric: bool) -> Vec<f64> {
    let r = width * depth.max(0.0).sqrt();
    let pi = std::f64::consts::PI;
    let mut out = Vec::new();
    let mut n = 0.0;
    loop {
        let (lo, hi) = if symmetric { (n * pi, n * pi + pi / 2.0) } else { (n * pi + pi / 2.0, (n + 1.0) * pi) };
        if lo >= r {
            break;
        }
        let hi = hi.min(r);
        let g = |q: f64| {
            let t = (r * r - q * q).max(0.0).sqrt();
            if symmetric {
                q * q.sin() - t * q.cos()
            } else {
                q * q.cos() + t * q.sin()
            }
        };
        if g(lo) * g(hi) < 0.0 {
            let q = bisect(g, lo, hi);
            let kappa = (r * r - q * q).max(0.0).sqrt() / width;
            if kappa > 0.0 {
                out.push(kappa);
            }
        }
        n += 1.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn reference(p: &PotentialSpec, c: ChannelId) -> ClosedFormReference {
        p.closed_form_reference(c).unwrap()
    }

    #[test]
    fn delta_examples() {
        let p = PotentialSpec::delta(2.0);
        let s = reference(&p, ChannelId::Symmetric);
        assert!((s.phase(1.0) - PI / 4.0).abs() < 1e-15);
        assert_eq!(s.bound_kappas(), vec![1.0]);
        assert_eq!(s.jost(Complex64::new(1.0, 0.0)), Complex64::new(1.0, 1.0));
        let a = reference(&p, ChannelId::Antisymmetric);
        assert_eq!(a.phase(0.3), 0.0);
        assert!(a.bound_kappas().is_empty());
    }

    #[test]
    fn sech2_single_level() {
        let p = PotentialSpec::sech2(2.0);
        let a = reference(&p, ChannelId::Antisymmetric);
        for k in [0.2, 1.0, 7.0] {
            let kc = Complex64::new(k, 0.0);
            assert!((a.jost(kc) - kc / (kc + I)).norm() < 1e-15);
            assert!((a.phase(k) - (1.0 / k).atan()).abs() < 1e-15);
            // δ = −arg F on the physical axis
            assert!((a.phase(k) + a.jost(kc).arg()).abs() < 1e-14);
        }
        let g = reference(&p, ChannelId::Symmetric).jost(Complex64::new(1.0, 0.0));
        assert!((g - Complex64::new(1.0, 1.0)).norm() < 1e-15);
        assert!(a.threshold_state());
    }

    #[test]
    fn sech2_levels_split_by_parity() {
        let p = PotentialSpec::sech2(20.0);
        assert_eq!(reference(&p, ChannelId::Symmetric).bound_kappas(), vec![4.0, 2.0]);
        assert_eq!(reference(&p, ChannelId::Antisymmetric).bound_kappas(), vec![3.0, 1.0]);
        for c in [ChannelId::Symmetric, ChannelId::Antisymmetric] {
            let r = reference(&p, c);
            for kappa in r.bound_kappas() {
                assert!(r.jost(Complex64::new(0.0, kappa)).norm() < 1e-12);
            }
        }
        assert!(PotentialSpec::sech2(5.0).closed_form_reference(ChannelId::Symmetric).is_none());
    }

    #[test]
    fn square_well_phase_matches_jost_argument() {
        let p = PotentialSpec::square(4.0, 1.0);
        for c in [ChannelId::Symmetric, ChannelId::Antisymmetric] {
            let r = reference(&p, c);
            for k in [0.7, 3.0] {
                let j = r.jost(Complex64::new(k, 0.0));
                // G carries an extra factor i relative to F
                let arg = if c == ChannelId::Symmetric { (j / I).arg() } else { j.arg() };
                let d = r.phase(k) + arg;
                assert!((d - (d / (2.0 * PI)).round() * 2.0 * PI).abs() < 1e-12);
            }
            for kappa in r.bound_kappas() {
                assert!(r.jost(Complex64::new(0.0, kappa)).norm() < 1e-10, "{c:?} {kappa}");
            }
        }
    }
}
