//! End-to-end acceptance run. Prints one line per criterion and exits
//! non-zero if any of them fails.

use std::time::Instant;

use sumrule_lab::born::decay_exponent;
use sumrule_lab::jost1d::phase_shift;
use sumrule_lab::numerics::extrap::geomspace;
use sumrule_lab::par::Parallelism;
use sumrule_lab::radial::phase_shift_radial;
use sumrule_lab::spectrum::{bound_states, BoundStateSet};
use sumrule_lab::sumrules::{
    buslaev_faddeev_cached, levinson_cached, oversubtraction_cached, sum_rule_lhs, verify_cached, PhaseCache,
    SumRuleOptions, SumRuleReport, PASS_TOL,
};
use sumrule_lab::wkb::{figure1_data, semiclassical_check};
use sumrule_lab::{ChannelId, Geometry, PotentialSpec, Result};

const PI: f64 = std::f64::consts::PI;

fn corpus() -> Vec<(&'static str, PotentialSpec)> {
    vec![
        ("gaussian_well(V0=3)", PotentialSpec::gaussian(3.0, 1.0)),
        ("gaussian_well(V0=10)", PotentialSpec::gaussian(10.0, 1.0)),
        ("sech2(s=5)", PotentialSpec::sech2(5.0)),
        ("sech2(s=12)", PotentialSpec::sech2(12.0)),
        ("square_well(V0=4,a=1)", PotentialSpec::square(4.0, 1.0)),
    ]
}

const PAIRS: [(u32, u32); 3] = [(0, 0), (1, 1), (2, 2)];

/// Everything computed once per (potential, channel) and shared by the criteria.
struct ChannelRun {
    name: &'static str,
    channel: ChannelId,
    bound: BoundStateSet,
    rules: Vec<SumRuleReport>,
    levinson_residual: Option<f64>,
    oversub: Option<(f64, f64, bool)>,
    bf1: Option<(f64, f64, bool)>,
    anomaly_12: Option<SumRuleReport>,
}

fn run_channel(name: &'static str, pot: &PotentialSpec, channel: ChannelId) -> Result<ChannelRun> {
    let cache = PhaseCache::new(pot, channel, 2, SumRuleOptions::default());
    let bound = bound_states(pot, channel)?;
    let rules = PAIRS.iter().map(|&(n, m)| verify_cached(&cache, &bound, n, m)).collect::<Result<Vec<_>>>()?;
    let one_d = pot.geometry == Geometry::FullLineSymmetric;
    let levinson_residual = if one_d { Some(levinson_cached(&cache, &bound)?.residual) } else { None };
    let (oversub, bf1) = if channel == ChannelId::Antisymmetric {
        let o = oversubtraction_cached(&cache, &bound, 2)?;
        let b = buslaev_faddeev_cached(&cache, &bound, 1)?;
        (Some((o.value, o.scale, o.pass)), Some((b.residual, b.scale, b.pass)))
    } else {
        (None, None)
    };
    let anomaly_12 =
        if channel == ChannelId::Symmetric { Some(verify_cached(&cache, &bound, 1, 2)?) } else { None };
    Ok(ChannelRun { name, channel, bound, rules, levinson_residual, oversub, bf1, anomaly_12 })
}

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: String) -> Verdict {
    Verdict { ok, detail }
}

fn criterion_1(runs: &[ChannelRun]) -> Verdict {
    let mut worst = (0.0f64, String::new());
    let mut bad = Vec::new();
    for r in runs {
        for s in &r.rules {
            let rel = s.relative_residual();
            if rel > worst.0 {
                worst = (rel, format!("{} {} ({},{})", r.name, r.channel, s.n, s.m));
            }
            if rel >= PASS_TOL {
                bad.push(format!("{} {} ({},{}) rel {:.2e}", r.name, r.channel, s.n, s.m, rel));
            }
        }
    }
    let count: usize = runs.iter().map(|r| r.rules.len()).sum();
    let mut detail = format!("{count} identities, worst relative residual {:.2e} at {}", worst.0, worst.1);
    if !bad.is_empty() {
        detail.push_str(&format!("; failing: {}", bad.join(", ")));
    }
    verdict(bad.is_empty(), detail)
}

fn criterion_2(runs: &[ChannelRun]) -> Verdict {
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut thresholds = Vec::new();
    for r in runs.iter().filter(|r| r.levinson_residual.is_some()) {
        let res = r.levinson_residual.unwrap().abs();
        worst = worst.max(res);
        ok &= res <= PASS_TOL * PI;
        if r.bound.threshold {
            thresholds.push(format!("{} {}", r.name, r.channel));
        }
    }
    // s = 12 is ℓ = 3: reflectionless, with a half-bound state in the odd channel
    let sech12 = thresholds.iter().any(|t| t == "sech2(s=12) antisymmetric");
    verdict(
        ok && sech12,
        format!("worst |δ(0) − expected| = {worst:.2e}; half-bound states flagged in [{}]", thresholds.join(", ")),
    )
}

fn criterion_3(runs: &[ChannelRun]) -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for r in runs.iter().filter(|r| matches!(r.name, "gaussian_well(V0=3)" | "sech2(s=5)")) {
        if let Some(a) = &r.anomaly_12 {
            ok &= a.relative_residual() < PASS_TOL;
            parts.push(format!("{}: anomaly {:.6e}, rel residual {:.2e}", r.name, a.anomaly, a.relative_residual()));
        }
    }
    verdict(ok && parts.len() == 2, parts.join("; "))
}

fn criterion_4(runs: &[ChannelRun]) -> Verdict {
    let mut ok = true;
    let mut worst = 0.0f64;
    for r in runs {
        if let Some((value, scale, pass)) = r.oversub {
            ok &= pass && value.abs() < PASS_TOL * scale.max(f64::MIN_POSITIVE);
            worst = worst.max(value.abs() / scale);
        }
    }
    verdict(ok, format!("worst |∫(k²/π)dδ⁽²⁾| / Σκ² = {worst:.2e}"))
}

fn criterion_5() -> Result<Verdict> {
    let lambda: f64 = 2.0;
    let pot = PotentialSpec::delta(lambda);
    let lhs = sum_rule_lhs(&pot, ChannelId::Symmetric, 1, 1, &SumRuleOptions::default())?;
    let bound = bound_states(&pot, ChannelId::Symmetric)?;
    let sum_k2: f64 = bound.kappas.iter().map(|k| k * k).sum();
    let ok = (lhs.value - lambda * lambda / 8.0).abs() < 1e-10
        && (sum_k2 - lambda * lambda / 4.0).abs() < 1e-10
        && lhs.tail_fit.outside_scope;
    Ok(verdict(
        ok,
        format!(
            "I₁₁ = {:.12} (λ²/8 = {}), Σκ² = {:.12}, fitted tail exponent {:?}, outside scope: {}",
            lhs.value,
            lambda * lambda / 8.0,
            sum_k2,
            lhs.tail_fit.fitted_exponent,
            lhs.tail_fit.outside_scope
        ),
    ))
}

fn criterion_6() -> Result<Verdict> {
    let pot = PotentialSpec::gaussian(3.0, 1.0);
    let ks = geomspace(20.0, 200.0, 16);
    let mut ok = true;
    let mut parts = Vec::new();
    for channel in [ChannelId::Antisymmetric, ChannelId::Symmetric] {
        for nu in 1..=3usize {
            let e = decay_exponent(&pot, nu, channel, &ks)?;
            let expected = 1.0 - 2.0 * nu as f64;
            ok &= (e - expected).abs() <= 0.2;
            parts.push(format!("{channel} ν={nu}: {e:.3}"));
        }
    }
    Ok(verdict(ok, parts.join(", ")))
}

fn criterion_7() -> Result<Verdict> {
    let ks = geomspace(0.05, 50.0, 40);
    let mut worst = 0.0f64;
    for (_, pot) in corpus() {
        let half = pot.clone().with_geometry(Geometry::HalfLineRadial);
        for &k in &ks {
            let d = phase_shift(&pot, k, ChannelId::Antisymmetric)? - phase_shift_radial(&half, 0, k)?;
            worst = worst.max(d.abs());
        }
    }
    Ok(verdict(worst < 1e-8, format!("max |δ₀ − δ₋| = {worst:.2e} over {} k per potential", ks.len())))
}

fn criterion_8() -> Result<Verdict> {
    let ls: Vec<u32> = (1..=10).collect();
    let rows = figure1_data(&[1, 2], &ls, Parallelism::default())?;
    let l4 = rows.iter().find(|r| r.l == 4 && r.n == 1).unwrap();
    let w = 20f64.powf(1.5) / 3.0;
    let rel = (w - 30.0) / (w + 30.0);
    let mut ok = (l4.value - w).abs() < 1e-12 && (l4.exact - 30.0).abs() < 1e-6 && (l4.relative_error - rel).abs() < 1e-6;
    ok &= (l4.relative_error.abs() - 3.1e-3).abs() < 0.05e-3;
    let mut monotone = true;
    for n in [1, 2] {
        let errs: Vec<f64> = rows.iter().filter(|r| r.n == n && r.l >= 2).map(|r| r.relative_error.abs()).collect();
        monotone &= errs.windows(2).all(|p| p[1] < p[0]);
    }
    let mut worst_ps = 0.0f64;
    for (_, pot) in corpus() {
        for n in [1, 2] {
            let (ps, wkb) = semiclassical_check(&pot, n)?;
            worst_ps = worst_ps.max(((ps - wkb) / wkb).abs());
        }
    }
    ok &= monotone && worst_ps < 1e-8;
    Ok(verdict(
        ok,
        format!(
            "l=4 n=1: wkb {:.6} exact {:.6} rel {:.4e}; monotone for l ≥ 2: {monotone}; phase-space agreement {worst_ps:.1e}",
            l4.value, l4.exact, l4.relative_error
        ),
    ))
}

fn criterion_9(runs: &[ChannelRun]) -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in runs.iter().filter(|r| r.name.starts_with("gaussian") || r.name.starts_with("sech2")) {
        if let Some((residual, scale, pass)) = r.bf1 {
            ok &= pass && residual.abs() < PASS_TOL * scale;
            parts.push(format!("{}: {:.2e}", r.name, residual / scale));
        }
    }
    verdict(ok && parts.len() == 4, format!("residual / scale: {}", parts.join(", ")))
}

fn criterion_10(runs: &[ChannelRun]) -> Verdict {
    let worst = runs.iter().map(|r| r.bound.agreement).fold(0.0, f64::max);
    let counts: usize = runs.iter().map(|r| r.bound.count()).sum();
    verdict(worst < 1e-6, format!("{counts} bound states over {} channels, worst |Δκ| = {worst:.2e}", runs.len()))
}

fn main() {
    let start = Instant::now();
    let mut runs = Vec::new();
    let mut setup_errors = Vec::new();
    for (name, pot) in corpus() {
        let radial = pot.clone().with_geometry(Geometry::HalfLineRadial);
        let jobs = [
            (&pot, ChannelId::Antisymmetric),
            (&pot, ChannelId::Symmetric),
            (&radial, ChannelId::PartialWave(0)),
            (&radial, ChannelId::PartialWave(1)),
        ];
        for (p, c) in jobs {
            let t = Instant::now();
            match run_channel(name, p, c) {
                Ok(r) => runs.push(r),
                Err(e) => setup_errors.push(format!("{name} {c}: {e}")),
            }
            eprintln!("  {name} {c}: {:.1} s", t.elapsed().as_secs_f64());
        }
    }
    let from = |r: Result<Verdict>| r.unwrap_or_else(|e| verdict(false, format!("error: {e}")));
    let with_setup = |v: Verdict| {
        if setup_errors.is_empty() {
            v
        } else {
            verdict(false, format!("{}; setup errors: {}", v.detail, setup_errors.join("; ")))
        }
    };
    let results = [
        ("sum-rule identity suite", with_setup(criterion_1(&runs))),
        ("Levinson endpoints", with_setup(criterion_2(&runs))),
        ("anomalous identity I(1,2)", with_setup(criterion_3(&runs))),
        ("oversubtraction", with_setup(criterion_4(&runs))),
        ("delta-function counterexample", from(criterion_5())),
        ("Born decay law", from(criterion_6())),
        ("3D/1D consistency", from(criterion_7())),
        ("WKB and figure 1", from(criterion_8())),
        ("Buslaev-Faddeev order 1", with_setup(criterion_9(&runs))),
        ("spectrum cross-check", with_setup(criterion_10(&runs))),
    ];
    let mut failed = 0;
    for (i, (label, v)) in results.iter().enumerate() {
        println!("{} criterion {:>2} {label}: {}", if v.ok { "PASS" } else { "FAIL" }, i + 1, v.detail);
        failed += usize::from(!v.ok);
    }
    println!("acceptance: {} of {} passed in {:.0} s", results.len() - failed, results.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
