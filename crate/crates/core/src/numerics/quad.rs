//! Gauss–Kronrod and Gauss–Legendre quadrature.

use crate::error::{Error, Result};
use crate::numerics::ode::OdeScalar;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
}

/// The 15 abscissae of the Kronrod rule mapped to `[a, b]`.
pub fn gk15_nodes(a: f64, b: f64) -> [f64; 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [0.0; 15];
    for j in 0..7 {
        out[2 * j] = c - h * XGK[j];
        out[2 * j + 1] = c + h * XGK[j];
    }
    out[14] = c;
    out
}

/// Applies the Kronrod/Gauss pair to values sampled at [`gk15_nodes`].
pub fn gk15_apply<T: OdeScalar>(a: f64, b: f64, fv: &[T; 15]) -> QuadResult<T> {
    let h = 0.5 * (b - a);
    let mut k = fv[14] * WGK[7];
    let mut g = fv[14] * WG[3];
    for j in 0..7 {
        let pair = fv[2 * j] + fv[2 * j + 1];
        k = k + pair * WGK[j];
        if j % 2 == 1 {
            g = g + pair * WG[j / 2];
        }
    }
    let value = k * h;
    let gauss = g * h;
    let err = (value + gauss * -1.0).modulus();
    QuadResult { value, error: err }
}

fn gk15<T: OdeScalar, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> QuadResult<T> {
    let nodes = gk15_nodes(a, b);
    let mut fv = [T::zero(); 15];
    for (v, &x) in fv.iter_mut().zip(nodes.iter()) {
        *v = f(x);
    }
    gk15_apply(a, b, &fv)
}

/// Globally adaptive Gauss–Kronrod integration over `[a, b]` with optional
/// interior breakpoints.
pub fn integrate<T, F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult<T>>
where
    T: OdeScalar,
    F: FnMut(f64) -> T,
{
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&x| x > a.min(b) && x < a.max(b)));
    pts.push(b);
    if b < a {
        pts.sort_by(|x, y| y.partial_cmp(x).unwrap());
    } else {
        pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    }
    let mut panels: Vec<(f64, f64, QuadResult<T>)> = pts
        .windows(2)
        .map(|w| (w[0], w[1], gk15(&mut f, w[0], w[1])))
        .collect();
    let max_panels = 4000;
    loop {
        let mut total = T::zero();
        let mut err = 0.0;
        for p in &panels {
            total = total + p.2.value;
            err += p.2.error;
        }
        let tol = abs_tol.max(rel_tol * total.modulus());
        if !err.is_finite() {
            return Err(Error::DivergentMoment("non-finite integrand".into()));
        }
        if err <= tol {
            return Ok(QuadResult { value: total, error: err });
        }
        if panels.len() >= max_panels {
            return Err(Error::DivergentMoment(format!(
                "quadrature on [{a}, {b}] did not reach tolerance: error {err:.3e}"
            )));
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.error.partial_cmp(&y.1 .2.error).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap();
        let (lo, hi, _) = panels.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() < 1e-15 * lo.abs().max(1.0) {
            return Err(Error::DivergentMoment(format!("panel collapse near x = {lo}")));
        }
        panels.push((lo, mid, gk15(&mut f, lo, mid)));
        panels.push((mid, hi, gk15(&mut f, mid, hi)));
    }
}

/// Integral over `[a, ∞)` via the map `x = a + t/(1-t)`.
pub fn integrate_to_infinity<T, F>(mut f: F, a: f64, abs_tol: f64, rel_tol: f64) -> Result<QuadResult<T>>
where
    T: OdeScalar,
    F: FnMut(f64) -> T,
{
    integrate(
        |t: f64| {
            if t >= 1.0 {
                return T::zero();
            }
            let s = 1.0 - t;
            f(a + t / s) * (1.0 / (s * s))
        },
        0.0,
        1.0,
        &[0.5, 0.9, 0.99],
        abs_tol,
        rel_tol,
    )
}

/// Adaptive Gauss–Kronrod where the integrand is evaluated in batches, so an
/// expensive integrand can be sampled concurrently. Every round evaluates
/// the nodes of all panels that still need refinement in a single call.
pub fn integrate_batched<F>(
    eval: F,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_rounds: usize,
) -> Result<QuadResult<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let eval_panels = |ps: &[(f64, f64)]| -> Result<Vec<(f64, f64, QuadResult<f64>)>> {
        let mut xs = Vec::with_capacity(ps.len() * 15);
        for &(a, b) in ps {
            xs.extend_from_slice(&gk15_nodes(a, b));
        }
        let fv = eval(&xs)?;
        Ok(ps
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| {
                let mut v = [0.0; 15];
                v.copy_from_slice(&fv[15 * i..15 * i + 15]);
                (a, b, gk15_apply(a, b, &v))
            })
            .collect())
    };
    let init: Vec<(f64, f64)> = breakpoints.windows(2).map(|w| (w[0], w[1])).collect();
    let mut panels = eval_panels(&init)?;
    for _ in 0..max_rounds {
        let total: f64 = panels.iter().map(|p| p.2.value).sum();
        let err: f64 = panels.iter().map(|p| p.2.error).sum();
        let tol = abs_tol.max(rel_tol * total.abs());
        if err <= tol {
            return Ok(QuadResult { value: total, error: err });
        }
        let share = tol / panels.len() as f64;
        let mut keep = Vec::new();
        let mut split = Vec::new();
        for p in panels {
            if p.2.error > share {
                let mid = 0.5 * (p.0 + p.1);
                split.push((p.0, mid));
                split.push((mid, p.1));
            } else {
                keep.push(p);
            }
        }
        keep.extend(eval_panels(&split)?);
        keep.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        panels = keep;
    }
    let total: f64 = panels.iter().map(|p| p.2.value).sum();
    let err: f64 = panels.iter().map(|p| p.2.error).sum();
    Ok(QuadResult { value: total, error: err })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}
