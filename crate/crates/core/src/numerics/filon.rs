//! Filon-type product rule for `∫ e^{iωt} p(t) dt` on a panel, where `p`
//! is the cubic through four samples. Exact for cubic × exponential.

use num_complex::Complex64;

/// Moments `M_j = ∫_0^h t^j e^{iωt} dt` for `j = 0..=3`.
pub fn moments(omega: Complex64, h: f64) -> [Complex64; 4] {
    let z = Complex64::i() * omega * h;
    let mut m = [Complex64::new(0.0, 0.0); 4];
    if z.norm() < 1.0 {
        // series: M_j = h^{j+1} Σ z^n / (n! (n+j+1))
        for (j, mj) in m.iter_mut().enumerate() {
            let mut term = Complex64::new(1.0, 0.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for n in 0..40 {
                if n > 0 {
                    term *= z / n as f64;
                }
                let add = term / (n + j + 1) as f64;
                acc += add;
                if add.norm() < 1e-18 * acc.norm() {
                    break;
                }
            }
            *mj = acc * h.powi(j as i32 + 1);
        }
    } else {
        let io = Complex64::i() * omega;
        let e = z.exp();
        m[0] = (e - 1.0) / io;
        for j in 1..4 {
            m[j] = (e * h.powi(j as i32) - m[j - 1] * j as f64) / io;
        }
    }
    m
}

/// Moments of the kernel `(e^{iωt} − 1)/ω`, equal to `i t` at ω = 0.
pub fn moments_expm1(omega: Complex64, h: f64) -> [Complex64; 4] {
    let z = Complex64::i() * omega * h;
    let mut m = [Complex64::new(0.0, 0.0); 4];
    if z.norm() < 1.0 {
        // h^{j+2} i Σ_{n≥1} z^{n−1} / (n! (n+j+1))
        for (j, mj) in m.iter_mut().enumerate() {
            let mut term = Complex64::new(1.0, 0.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for n in 1..40 {
                if n > 1 {
                    term *= z / n as f64;
                }
                let add = term / (n + j + 1) as f64;
                acc += add;
                if add.norm() < 1e-18 * acc.norm() {
                    break;
                }
            }
            *mj = Complex64::i() * acc * h.powi(j as i32 + 2);
        }
    } else {
        let e = moments(omega, h);
        for j in 0..4 {
            m[j] = (e[j] - h.powi(j as i32 + 1) / (j + 1) as f64) / omega;
        }
    }
    m
}

fn lagrange_weights(m: [Complex64; 4], t: [f64; 4]) -> [Complex64; 4] {
    let mut w = [Complex64::new(0.0, 0.0); 4];
    for i in 0..4 {
        // monomial coefficients of the Lagrange basis polynomial L_i
        let mut c = [1.0, 0.0, 0.0, 0.0];
        let mut deg = 0;
        let mut denom = 1.0;
        for (a, &ta) in t.iter().enumerate() {
            if a == i {
                continue;
            }
            let mut nc = [0.0; 4];
            for d in 0..=deg {
                nc[d + 1] += c[d];
                nc[d] -= ta * c[d];
            }
            c = nc;
            deg += 1;
            denom *= t[i] - ta;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for d in 0..4 {
            acc += m[d] * c[d];
        }
        w[i] = acc / denom;
    }
    w
}

/// Weights `w_i` so that `Σ w_i f(t_i) = ∫_0^h e^{iωt} p(t) dt`, with `p`
/// interpolating `f` at the four nodes `t_i` (relative to the panel start).
pub fn cubic_weights(omega: Complex64, h: f64, t: [f64; 4]) -> [Complex64; 4] {
    lagrange_weights(moments(omega, h), t)
}

/// As [`cubic_weights`] for the kernel `(e^{iωt} − 1)/ω`.
pub fn cubic_weights_expm1(omega: Complex64, h: f64, t: [f64; 4]) -> [Complex64; 4] {
    lagrange_weights(moments_expm1(omega, h), t)
}
