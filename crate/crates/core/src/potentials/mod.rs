//! Potential families, moments and exactly solvable references.

mod reference;
mod table;

pub use reference::{ClosedFormReference, ReferenceKind};
pub use table::Table;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quad;
use crate::numerics::special::sech_power_integral;

/// |V| below this is treated as zero when placing the outer boundary.
pub const TAIL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    GaussianWell,
    SquareWell,
    Sech2,
    ExponentialWell,
    DeltaFunction,
    Tabulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    #[default]
    FullLineSymmetric,
    HalfLineRadial,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Gaussian { depth: f64, width: f64 },
    Square { depth: f64, width: f64 },
    Sech2 { strength: f64, width: f64 },
    Exponential { depth: f64, width: f64 },
    Delta { coupling: f64 },
    Tabulated(Arc<Table>),
}

/// A potential on x ≥ 0, extended evenly to the full line or read as V(r).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct PotentialSpec {
    pub shape: Shape,
    pub geometry: Geometry,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawSpec {
    family: Family,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    params: BTreeMap<String, f64>,
    #[serde(default)]
    geometry: Geometry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialMoments {
    /// ∫₀^∞ (1 + x)|V| dx
    pub faddeev: f64,
    /// ∫₀^∞ V dx
    pub halfline_integral: f64,
    /// ∫₀^∞ |V|^p dx for p = 1, 3/2, 2, 5/2, 3
    pub power_integrals: BTreeMap<String, f64>,
    /// V(0), V'(0), V''(0); absent for the delta function
    pub origin_values: Option<[f64; 3]>,
    pub singular: bool,
}

fn param(params: &BTreeMap<String, f64>, names: &[&str]) -> Option<f64> {
    names.iter().find_map(|n| params.get(*n).copied())
}

fn required(params: &BTreeMap<String, f64>, names: &[&str], family: &str) -> Result<f64> {
    param(params, names)
        .ok_or_else(|| Error::InvalidPotential(format!("{family} requires parameter `{}`", names[0])))
}

fn check_nonneg(v: f64, name: &str) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidPotential(format!("{name} must be finite and ≥ 0, got {v}")))
    }
}

fn check_pos(v: f64, name: &str) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidPotential(format!("{name} must be finite and > 0, got {v}")))
    }
}

impl TryFrom<RawSpec> for PotentialSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let p = &raw.params;
        let width = |default: Option<f64>| -> Result<f64> {
            match (param(p, &["width", "a"]), default) {
                (Some(w), _) => check_pos(w, "width"),
                (None, Some(d)) => Ok(d),
                (None, None) => Err(Error::InvalidPotential("missing parameter `width`".into())),
            }
        };
        let depth = |family: &str| -> Result<f64> { check_nonneg(required(p, &["depth", "V0"], family)?, "depth") };
        let shape = match raw.family {
            Family::GaussianWell => Shape::Gaussian { depth: depth("gaussian_well")?, width: width(Some(1.0))? },
            Family::SquareWell => Shape::Square { depth: depth("square_well")?, width: width(Some(1.0))? },
            Family::ExponentialWell => {
                Shape::Exponential { depth: depth("exponential_well")?, width: width(Some(1.0))? }
            }
            Family::Sech2 => {
                let width = width(Some(1.0))?;
                let strength = match (param(p, &["strength", "s"]), param(p, &["ell", "l"])) {
                    (Some(s), _) => check_nonneg(s, "strength")?,
                    (None, Some(l)) => check_nonneg(l, "ell")? * (l + 1.0) / (width * width),
                    (None, None) => return Err(Error::InvalidPotential("sech2 requires `strength` or `ell`".into())),
                };
                Shape::Sech2 { strength, width }
            }
            Family::DeltaFunction => {
                Shape::Delta { coupling: check_pos(required(p, &["coupling", "lambda"], "delta_function")?, "coupling")? }
            }
            Family::Tabulated => {
                let (Some(grid), Some(values)) = (raw.grid, raw.values) else {
                    return Err(Error::InvalidPotential("tabulated requires `grid` and `values`".into()));
                };
                Shape::Tabulated(Arc::new(Table::new(grid, values, TAIL_EPS)?))
            }
        };
        Ok(PotentialSpec { shape, geometry: raw.geometry })
    }
}

impl From<PotentialSpec> for RawSpec {
    fn from(s: PotentialSpec) -> Self {
        let mut params = BTreeMap::new();
        let mut grid = None;
        let mut values = None;
        let family = match &s.shape {
            Shape::Gaussian { depth, width } | Shape::Square { depth, width } | Shape::Exponential { depth, width } => {
                params.insert("depth".into(), *depth);
                params.insert("width".into(), *width);
                match s.shape {
                    Shape::Gaussian { .. } => Family::GaussianWell,
                    Shape::Square { .. } => Family::SquareWell,
                    _ => Family::ExponentialWell,
                }
            }
            Shape::Sech2 { strength, width } => {
                params.insert("strength".into(), *strength);
                params.insert("width".into(), *width);
                Family::Sech2
            }
            Shape::Delta { coupling } => {
                params.insert("coupling".into(), *coupling);
                Family::DeltaFunction
            }
            Shape::Tabulated(t) => {
                grid = Some(t.grid.clone());
                values = Some(t.values.clone());
                Family::Tabulated
            }
        };
        RawSpec { family, params, geometry: s.geometry, grid, values }
    }
}

impl PotentialSpec {
    pub fn new(shape: Shape, geometry: Geometry) -> Self {
        PotentialSpec { shape, geometry }
    }

    pub fn gaussian(depth: f64, width: f64) -> Self {
        Self::new(Shape::Gaussian { depth, width }, Geometry::FullLineSymmetric)
    }

    pub fn square(depth: f64, width: f64) -> Self {
        Self::new(Shape::Square { depth, width }, Geometry::FullLineSymmetric)
    }

    pub fn sech2(strength: f64) -> Self {
        Self::new(Shape::Sech2 { strength, width: 1.0 }, Geometry::FullLineSymmetric)
    }

    pub fn exponential(depth: f64, width: f64) -> Self {
        Self::new(Shape::Exponential { depth, width }, Geometry::FullLineSymmetric)
    }

    pub fn delta(coupling: f64) -> Self {
        Self::new(Shape::Delta { coupling }, Geometry::FullLineSymmetric)
    }

    /// V ≡ 0, represented as a square well of zero depth.
    pub fn free() -> Self {
        Self::square(0.0, 1.0)
    }

    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(Self::new(Shape::Tabulated(Arc::new(Table::new(grid, values, TAIL_EPS)?)), Geometry::FullLineSymmetric))
    }

    pub fn with_geometry(mut self, geometry: Geometry) -> Self {
        self.geometry = geometry;
        self
    }

    pub fn family(&self) -> Family {
        match self.shape {
            Shape::Gaussian { .. } => Family::GaussianWell,
            Shape::Square { .. } => Family::SquareWell,
            Shape::Sech2 { .. } => Family::Sech2,
            Shape::Exponential { .. } => Family::ExponentialWell,
            Shape::Delta { .. } => Family::DeltaFunction,
            Shape::Tabulated(_) => Family::Tabulated,
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self.shape, Shape::Delta { .. })
    }

    pub fn is_zero(&self) -> bool {
        match &self.shape {
            Shape::Gaussian { depth, .. } | Shape::Square { depth, .. } | Shape::Exponential { depth, .. } => {
                *depth == 0.0
            }
            Shape::Sech2 { strength, .. } => *strength == 0.0,
            Shape::Delta { .. } => false,
            Shape::Tabulated(t) => t.values.iter().all(|v| *v == 0.0),
        }
    }

    pub fn ensure_regular(&self) -> Result<()> {
        if self.is_singular() {
            Err(Error::SingularPotential("delta_function".into()))
        } else {
            Ok(())
        }
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        Ok(self.derivatives(x)?.0)
    }

    /// V, V', V'' at x ≥ 0.
    pub fn derivatives(&self, x: f64) -> Result<(f64, f64, f64)> {
        self.ensure_regular()?;
        if let Shape::Tabulated(t) = &self.shape {
            return t.eval(x);
        }
        if x < 0.0 {
            return Err(Error::InvalidArgument(format!("potential evaluated at x = {x} < 0")));
        }
        Ok(self.derivatives_unchecked(x))
    }

    /// Hot-path evaluation for regular potentials; callers have already
    /// rejected the delta function.
    #[inline]
    pub fn v(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Gaussian { depth, width } => {
                let t = x / width;
                -depth * (-t * t).exp()
            }
            Shape::Square { depth, width } => {
                if x < *width {
                    -depth
                } else {
                    0.0
                }
            }
            Shape::Sech2 { strength, width } => {
                let c = (x / width).cosh();
                -strength / (c * c)
            }
            Shape::Exponential { depth, width } => -depth * (-x / width).exp(),
            Shape::Delta { .. } => 0.0,
            Shape::Tabulated(t) => t.eval_unchecked(x).0,
        }
    }

    fn derivatives_unchecked(&self, x: f64) -> (f64, f64, f64) {
        match &self.shape {
            Shape::Gaussian { depth, width } => {
                let t = x / width;
                let e = depth * (-t * t).exp();
                (-e, 2.0 * e * t / width, 2.0 * e * (1.0 - 2.0 * t * t) / (width * width))
            }
            Shape::Square { depth, width } => (if x < *width { -depth } else { 0.0 }, 0.0, 0.0),
            Shape::Sech2 { strength, width } => {
                let t = x / width;
                let s2 = 1.0 / t.cosh().powi(2);
                let th = t.tanh();
                (
                    -strength * s2,
                    2.0 * strength * s2 * th / width,
                    2.0 * strength * s2 * (s2 - 2.0 * th * th) / (width * width),
                )
            }
            Shape::Exponential { depth, width } => {
                let e = depth * (-x / width).exp();
                (-e, e / width, -e / (width * width))
            }
            Shape::Delta { .. } => (0.0, 0.0, 0.0),
            Shape::Tabulated(t) => t.eval_unchecked(x),
        }
    }

    /// Peak |V|; the delta function reports its coupling.
    pub fn max_abs(&self) -> f64 {
        match &self.shape {
            Shape::Gaussian { depth, .. } | Shape::Square { depth, .. } | Shape::Exponential { depth, .. } => *depth,
            Shape::Sech2 { strength, .. } => *strength,
            Shape::Delta { coupling } => *coupling,
            Shape::Tabulated(t) => t.values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// Characteristic range of the potential.
    pub fn width(&self) -> f64 {
        match &self.shape {
            Shape::Gaussian { width, .. }
            | Shape::Square { width, .. }
            | Shape::Sech2 { width, .. }
            | Shape::Exponential { width, .. } => *width,
            Shape::Delta { coupling } => 2.0 / coupling,
            Shape::Tabulated(t) => {
                let m = self.max_abs();
                if m == 0.0 {
                    return t.x_max();
                }
                let area: f64 = t
                    .grid
                    .windows(2)
                    .zip(t.values.windows(2))
                    .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0].abs() + v[1].abs()))
                    .sum();
                (area / m).max(1e-6 * t.x_max())
            }
        }
    }

    /// Momentum scale max(1/a, √max|V|).
    pub fn k_scale(&self) -> f64 {
        (1.0 / self.width()).max(self.max_abs().sqrt())
    }

    /// Smallest x beyond which |V| < TAIL_EPS.
    pub fn x_max(&self) -> f64 {
        let eps = TAIL_EPS;
        match &self.shape {
            Shape::Gaussian { depth, width } => {
                if *depth <= eps {
                    0.0
                } else {
                    width * (depth / eps).ln().sqrt()
                }
            }
            Shape::Square { depth, width } => {
                if *depth == 0.0 {
                    0.0
                } else {
                    *width
                }
            }
            Shape::Sech2 { strength, width } => {
                if *strength <= eps {
                    0.0
                } else {
                    // sech²t < 4e^{-2t}
                    0.5 * width * (4.0 * strength / eps).ln()
                }
            }
            Shape::Exponential { depth, width } => {
                if *depth <= eps {
                    0.0
                } else {
                    width * (depth / eps).ln()
                }
            }
            Shape::Delta { .. } => 0.0,
            Shape::Tabulated(t) => {
                let last = t.values.iter().rposition(|v| v.abs() >= eps);
                match last {
                    Some(i) => t.grid[(i + 1).min(t.grid.len() - 1)],
                    None => 0.0,
                }
            }
        }
    }

    /// Points where V or its derivatives jump; integrators stop there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Square { width, depth } if *depth != 0.0 => vec![*width],
            _ => Vec::new(),
        }
    }

    /// Same family with V multiplied by `f`.
    pub fn scaled(&self, f: f64) -> PotentialSpec {
        let shape = match &self.shape {
            Shape::Gaussian { depth, width } => Shape::Gaussian { depth: depth * f, width: *width },
            Shape::Square { depth, width } => Shape::Square { depth: depth * f, width: *width },
            Shape::Sech2 { strength, width } => Shape::Sech2 { strength: strength * f, width: *width },
            Shape::Exponential { depth, width } => Shape::Exponential { depth: depth * f, width: *width },
            Shape::Delta { coupling } => Shape::Delta { coupling: coupling * f },
            Shape::Tabulated(t) => Shape::Tabulated(Arc::new(t.scaled(f))),
        };
        PotentialSpec { shape, geometry: self.geometry }
    }

    /// ℓ with s a² = ℓ(ℓ+1) for the sech² family.
    pub fn sech2_ell(&self) -> Option<f64> {
        match self.shape {
            Shape::Sech2 { strength, width } => Some(0.5 * ((1.0 + 4.0 * strength * width * width).sqrt() - 1.0)),
            _ => None,
        }
    }

    /// ∫₀^∞ |V|^p dx.
    pub fn power_integral(&self, p: f64) -> Result<f64> {
        match &self.shape {
            Shape::Gaussian { depth, width } => Ok(depth.powf(p) * width * std::f64::consts::PI.sqrt() / (2.0 * p.sqrt())),
            Shape::Square { depth, width } => Ok(depth.powf(p) * width),
            Shape::Sech2 { strength, width } => Ok(strength.powf(p) * width * sech_power_integral(p)),
            Shape::Exponential { depth, width } => Ok(depth.powf(p) * width / p),
            Shape::Delta { .. } => {
                if p == 1.0 {
                    Ok(self.max_abs() / 2.0)
                } else {
                    Err(Error::DivergentMoment(format!("∫|V|^{p} diverges for the delta function")))
                }
            }
            Shape::Tabulated(t) => self.tabulated_integral(t, |x| self.v(x).abs().powf(p)),
        }
    }

    fn tabulated_integral(&self, t: &Table, f: impl Fn(f64) -> f64) -> Result<f64> {
        let mut total = 0.0;
        for w in t.grid.windows(2) {
            total += quad::integrate(&f, w[0], w[1], &[], 1e-15, 1e-12)?.value;
        }
        Ok(total)
    }

    pub fn moments(&self) -> Result<PotentialMoments> {
        let (halfline, first_abs) = match &self.shape {
            Shape::Gaussian { depth, width } => {
                (-depth * width * std::f64::consts::PI.sqrt() / 2.0, depth * width * width / 2.0)
            }
            Shape::Square { depth, width } => (-depth * width, depth * width * width / 2.0),
            Shape::Sech2 { strength, width } => (-strength * width, strength * width * width * std::f64::consts::LN_2),
            Shape::Exponential { depth, width } => (-depth * width, depth * width * width),
            Shape::Delta { coupling } => {
                return Ok(PotentialMoments {
                    faddeev: *coupling,
                    halfline_integral: -coupling / 2.0,
                    power_integrals: BTreeMap::new(),
                    origin_values: None,
                    singular: true,
                });
            }
            Shape::Tabulated(t) => {
                (self.tabulated_integral(t, |x| self.v(x))?, self.tabulated_integral(t, |x| x * self.v(x).abs())?)
            }
        };
        let mut power_integrals = BTreeMap::new();
        for p in [1.0, 1.5, 2.0, 2.5, 3.0] {
            power_integrals.insert(format!("{p}"), self.power_integral(p)?);
        }
        let abs_int = power_integrals["1"];
        let (v0, v1, v2) = self.derivatives_unchecked(0.0);
        Ok(PotentialMoments {
            faddeev: abs_int + first_abs,
            halfline_integral: halfline,
            power_integrals,
            origin_values: Some([v0, v1, v2]),
            singular: false,
        })
    }

    /// ∫₀^∞ V² dx.
    pub fn square_integral(&self) -> Result<f64> {
        self.power_integral(2.0)
    }

    pub fn closed_form_reference(&self, channel: crate::channel::ChannelId) -> Option<ClosedFormReference> {
        ClosedFormReference::for_potential(self, channel)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad::integrate_to_infinity;

    #[test]
    fn pointwise_values() {
        assert_eq!(PotentialSpec::square(1.0, 1.0).evaluate(2.0).unwrap(), 0.0);
        assert_eq!(PotentialSpec::sech2(6.0).evaluate(0.0).unwrap(), -6.0);
        assert_eq!(PotentialSpec::gaussian(3.0, 1.0).evaluate(0.0).unwrap(), -3.0);
        assert!(matches!(PotentialSpec::delta(2.0).evaluate(0.0), Err(Error::SingularPotential(_))));
    }

    #[test]
    fn closed_form_moments_match_quadrature() {
        let cases = [
            PotentialSpec::gaussian(3.0, 1.3),
            PotentialSpec::sech2(6.0),
            PotentialSpec::exponential(2.0, 0.7),
        ];
        for p in &cases {
            let m = p.moments().unwrap();
            let fad = integrate_to_infinity(|x| (1.0 + x) * p.v(x).abs(), 0.0, 1e-14, 1e-12).unwrap().value;
            let half = integrate_to_infinity(|x| p.v(x), 0.0, 1e-14, 1e-12).unwrap().value;
            let p32 = integrate_to_infinity(|x| p.v(x).abs().powf(1.5), 0.0, 1e-14, 1e-12).unwrap().value;
            assert!((m.faddeev - fad).abs() < 1e-9 * fad, "{p:?}");
            assert!((m.halfline_integral - half).abs() < 1e-9 * half.abs());
            assert!((m.power_integrals["1.5"] - p32).abs() < 1e-9 * p32);
        }
    }

    #[test]
    fn moment_examples() {
        assert!((PotentialSpec::square(1.0, 1.0).moments().unwrap().faddeev - 1.5).abs() < 1e-15);
        let s = PotentialSpec::sech2(6.0).moments().unwrap();
        assert!((s.faddeev - 6.0 * (1.0 + std::f64::consts::LN_2)).abs() < 1e-12);
        let d = PotentialSpec::delta(2.0).moments().unwrap();
        assert_eq!(d.halfline_integral, -1.0);
        assert!(d.singular);
    }

    #[test]
    fn derivatives_are_consistent() {
        let h = 1e-5;
        for p in [PotentialSpec::gaussian(3.0, 1.0), PotentialSpec::sech2(5.0), PotentialSpec::exponential(2.0, 1.5)] {
            for x in [0.3, 1.1] {
                let (_, d1, d2) = p.derivatives(x).unwrap();
                let fd1 = (p.v(x + h) - p.v(x - h)) / (2.0 * h);
                let fd2 = (p.v(x + h) - 2.0 * p.v(x) + p.v(x - h)) / (h * h);
                assert!((d1 - fd1).abs() < 1e-8);
                assert!((d2 - fd2).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn tail_boundary_is_tight() {
        for p in [PotentialSpec::gaussian(10.0, 1.0), PotentialSpec::sech2(12.0), PotentialSpec::exponential(3.0, 1.0)] {
            let x = p.x_max();
            assert!(p.v(x).abs() <= TAIL_EPS * 1.0001);
            assert!(p.v(0.9 * x).abs() > TAIL_EPS);
        }
    }

    #[test]
    fn json_round_trip() {
        let p: PotentialSpec =
            serde_json::from_str(r#"{"family":"sech2","params":{"strength":6},"geometry":"full_line_symmetric"}"#)
                .unwrap();
        assert_eq!(p, PotentialSpec::sech2(6.0));
        let back: PotentialSpec = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        let t: PotentialSpec =
            serde_json::from_str(r#"{"family":"tabulated","grid":[0,1,2,3],"values":[-1,-0.5,-0.1,0]}"#).unwrap();
        assert_eq!(t.family(), Family::Tabulated);
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"family":"gaussian_well","params":{"depth":-1}}"#).is_err());
    }
}
