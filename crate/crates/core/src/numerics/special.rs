//! Small special-function kit.

/// ln Γ(x) for x > 0 (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// `∫_0^∞ sech^{2p}(t) dt = √π Γ(p) / (2 Γ(p + 1/2))`.
pub fn sech_power_integral(p: f64) -> f64 {
    0.5 * std::f64::consts::PI.sqrt() * (ln_gamma(p) - ln_gamma(p + 0.5)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_values() {
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    }

    #[test]
    fn sech_integrals() {
        assert!((sech_power_integral(1.0) - 1.0).abs() < 1e-13);
        assert!((sech_power_integral(1.5) - std::f64::consts::FRAC_PI_4).abs() < 1e-13);
        assert!((sech_power_integral(2.5) - 3.0 * std::f64::consts::PI / 16.0).abs() < 1e-13);
    }
}
