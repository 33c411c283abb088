//! Polynomial extrapolation and power-law tail fits.

use num_complex::Complex64;

/// Neville extrapolation of samples `(x_i, y_i)` to `x = 0`.
pub fn neville_to_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    let mut p = ys.to_vec();
    for m in 1..n {
        for i in 0..n - m {
            let (xi, xj) = (xs[i], xs[i + m]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}

pub fn neville_to_zero_c(xs: &[f64], ys: &[Complex64]) -> Complex64 {
    let re: Vec<f64> = ys.iter().map(|z| z.re).collect();
    let im: Vec<f64> = ys.iter().map(|z| z.im).collect();
    Complex64::new(neville_to_zero(xs, &re), neville_to_zero(xs, &im))
}

/// Extrapolated value together with the change against the next-lower
/// order estimate, a cheap error indicator.
pub fn neville_with_error(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let full = neville_to_zero(xs, ys);
    let reduced = neville_to_zero(&xs[..xs.len() - 1], &ys[..ys.len() - 1]);
    (full, (full - reduced).abs())
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_regression(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fits `y ≈ c·x^(-p)` with the exponent pinned, by least squares on
/// `y·x^p` (robust to sign changes of oscillating tails).
pub fn pinned_power_coefficient(xs: &[f64], ys: &[f64], p: f64) -> f64 {
    // minimise Σ (y - c x^-p)^2 weighted by x^{2p}: c = mean(y x^p)
    let n = xs.len() as f64;
    xs.iter().zip(ys).map(|(x, y)| y * x.powf(p)).sum::<f64>() / n
}

/// Free log-log exponent of `|y|` against `x`, computed on window RMS
/// values so that oscillating tails with zeros still fit.
pub fn free_exponent(xs: &[f64], ys: &[f64], windows: usize) -> f64 {
    let n = xs.len();
    let w = windows.max(2).min(n);
    let per = n / w;
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for i in 0..w {
        let lo = i * per;
        let hi = if i == w - 1 { n } else { lo + per };
        if hi <= lo {
            continue;
        }
        let rms = (ys[lo..hi].iter().map(|y| y * y).sum::<f64>() / (hi - lo) as f64).sqrt();
        let gx = (xs[lo..hi].iter().map(|x| x.ln()).sum::<f64>() / (hi - lo) as f64).exp();
        if rms > 0.0 && rms.is_finite() {
            lx.push(gx.ln());
            ly.push(rms.ln());
        }
    }
    if lx.len() < 2 {
        return f64::NAN;
    }
    linear_regression(&lx, &ly).0
}

/// `count` log-spaced points covering `[lo, hi]` inclusive.
pub fn geomspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (l, h) = (lo.ln(), hi.ln());
    (0..count).map(|i| (l + (h - l) * i as f64 / (count - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neville_recovers_polynomial() {
        let xs = [0.4, 0.2, 0.1, 0.05];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x + x * x * x).collect();
        assert!((neville_to_zero(&xs, &ys) - 3.0).abs() < 1e-13);
    }

    #[test]
    fn exponent_fits() {
        let xs = geomspace(10.0, 100.0, 40);
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x.powi(-3)).collect();
        assert!((free_exponent(&xs, &ys, 8) + 3.0).abs() < 1e-10);
        assert!((pinned_power_coefficient(&xs, &ys, 3.0) - 2.5).abs() < 1e-12);
    }
}
