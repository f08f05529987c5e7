//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero when any criterion fails.
//!
//! Run with `cargo test -p specstat --test acceptance`.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use specstat::{
    cv_objective, data_driven_config, deviation_d2, estimate_kappa4, fourier_grid, generate,
    local_periodogram, monte_carlo, periodogram, plan_segments, power_approx, q_profile,
    refinement_check, rescaled_local_stat, run_test, smooth, statistic_t, stride_centers,
    theoretical_local_spectrum, top_peaks, tremor_analogue, AutoTuning, Coefficient, Kernel,
    MaTerm, MonteCarloReport, NoiseLaw, ProcessSpec, Taper, TestConfig, TimeSeries, Tuning,
};

const SEED: u64 = 20_261_015;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn defaults() -> Tuning {
    Tuning::DataDriven(AutoTuning::default())
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let kernel = Kernel::bartlett_priestley();
    let taper = Taper::cosine();
    let mut worst: f64 = 0.0;
    let cases = [
        (16, 8, 1),
        (33, 16, 1),
        (64, 32, 2),
        (97, 32, 3),
        (128, 64, 1),
        (128, 128, 1),
        (120, 16, 2),
    ];
    for (k, &(n, m, c)) in cases.iter().enumerate() {
        let x = TimeSeries::new(common::ar1(n, 0.5 - 0.15 * k as f64, SEED + k as u64))
            .unwrap()
            .demeaned();
        let xs = x.values();
        let p = periodogram(&x);
        worst = worst.max(common::rel_err(p.values(), &common::periodogram(xs)));

        let (lo, hi) = ((m / 2 + 1) as i64, (n - m / 2 + 1) as i64);
        for center in [lo, (lo + hi) / 2, hi] {
            let lp = local_periodogram(&x, center, m, &taper).unwrap();
            let want = common::local_periodogram(xs, center, m, common::cosine_taper);
            worst = worst.max(common::rel_err(lp.values(), &want));
        }

        let h = 0.25 + 0.1 * k as f64;
        let g = smooth(&p, &kernel, h, fourier_grid(n).unwrap()).unwrap();
        worst = worst.max(common::rel_err(
            g.values(),
            &common::smooth(p.values(), common::bp, h, &common::grid(n)),
        ));

        let b = 0.4 + 0.2 * k as f64;
        let v = rescaled_local_stat(&x, lo, m, &taper, &kernel, b, &g).unwrap();
        worst = worst.max(common::rel_err(
            v.values(),
            &common::rescaled(xs, lo, m, common::cosine_taper, b, g.values()),
        ));

        let cfg = TestConfig::new(m.min(n - 2) & !1, c, h, b);
        if cfg.m >= 8 && cfg.m < n && c < cfg.m {
            let plan = plan_segments(n, cfg.m, c).unwrap();
            let stat = statistic_t(&x, &cfg, &plan, &g).unwrap();
            let (t, _) = common::statistic(xs, &plan.window_centers, cfg.m, b, g.values());
            worst = worst.max((stat.t_n - t).abs() / t);
        }

        let cv = cv_objective(&x, h, &kernel).unwrap();
        let want = common::cv(xs, h);
        worst = worst.max((cv - want).abs() / want.abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-10 && secs < 60.0,
        format!("max relative error {worst:.2e} (≤ 1e-10), {secs:.1}s (< 60s)"),
    )
}

fn constant_fidelity() -> Outcome {
    let bp = Kernel::bartlett_priestley().constants();
    let int_k2 = common::simpson(|x| common::bp(x).powi(2), -PI, PI, 20_000);
    let conv = |y: f64| {
        let (a, b) = ((y - PI).max(-PI), (y + PI).min(PI));
        if a >= b {
            0.0
        } else {
            common::simpson(|x| common::bp(x) * common::bp(y - x), a, b, 2_000)
        }
    };
    let int_kk = common::simpson(conv, -2.0 * PI, 2.0 * PI, 4_000);
    let int_kk2 = common::simpson(|y| conv(y).powi(2), -2.0 * PI, 2.0 * PI, 4_000);
    let cos = Taper::cosine().constants(1).unwrap();
    let h2 = common::simpson(|x| common::cosine_taper(x).powi(2), 0.0, 1.0, 20_000);
    let h4 = common::simpson(|x| common::cosine_taper(x).powi(4), 0.0, 1.0, 20_000);
    let rect2 = Taper::rectangular().constants(2).unwrap();
    // rectangular taper, c = 2: lags s = 0, ±1 with overlaps 1 and 1/2
    let m_c2_oracle = 1.0f64 + 2.0 * common::simpson(|_| 1.0, 0.0, 0.5, 2).powi(2);
    let checks = [
        ("∫K²", bp.int_k2, int_k2),
        ("∫K² closed form", bp.int_k2, 12.0 * PI / 5.0),
        ("∫K∗K", bp.int_kk, int_kk),
        ("∫K∗K = 4π²", bp.int_kk, 4.0 * PI * PI),
        ("∫(K∗K)²", bp.int_kk2, int_kk2),
        ("H2", cos.h2, h2),
        ("H2 = 3/8", cos.h2, 0.375),
        ("H4", cos.h4, h4),
        ("H4 = 35/128", cos.h4, 35.0 / 128.0),
        ("M_H", cos.m_h, h4 / (h2 * h2)),
        ("M_H = 35/18", cos.m_h, 35.0 / 18.0),
        ("M²(c=2, rect)", rect2.m_ch2, m_c2_oracle),
        ("M²(c=2, rect) = 3/2", rect2.m_ch2, 1.5),
    ];
    let worst = checks
        .iter()
        .map(|(_, a, b)| ((a - b) / b).abs())
        .fold(0.0, f64::max);
    let failing: Vec<&str> = checks
        .iter()
        .filter(|(_, a, b)| ((a - b) / b).abs() > 1e-6)
        .map(|(name, _, _)| *name)
        .collect();
    outcome(
        failing.is_empty(),
        format!(
            "{} constants, max relative error {worst:.2e} (≤ 1e-6) {failing:?}",
            checks.len()
        ),
    )
}

fn segment_plan() -> Outcome {
    let plan = plan_segments(3071, 256, 1).unwrap();
    outcome(
        plan.count == 12 && plan.shift == 256,
        format!(
            "n = 3071, m = 256, c = 1 gives S = {}, N = {} (want 12)",
            plan.shift, plan.count
        ),
    )
}

fn null_calibration() -> Outcome {
    let n = 4096;
    let runs = 500;
    let check = |name: &str, spec: ProcessSpec, seed: u64| -> (bool, String) {
        let r = monte_carlo(&spec, &defaults(), n, runs, seed).unwrap();
        let ok = (0.01..=0.15).contains(&r.rate)
            && r.mean_standardized > -1.0
            && r.mean_standardized < 1.0;
        (
            ok,
            format!(
                "{name}: rate {:.3} (∈ [0.01, 0.15]), mean z {:.3} (∈ (−1, 1)), sd z {:.3}",
                r.rate, r.mean_standardized, r.sd_standardized
            ),
        )
    };
    let (a, da) = check(
        "white noise",
        ProcessSpec::iid(NoiseLaw::Gaussian),
        SEED + 40,
    );
    let (b, db) = check("AR(1) 0.5", ProcessSpec::ar1(0.5), SEED + 41);
    outcome(a && b, format!("{da}; {db}"))
}

fn consistency() -> Outcome {
    let spec = ProcessSpec::ar1_tv(Coefficient::Linear {
        intercept: 0.9,
        slope: -1.8,
    });
    let d2 = deviation_d2(&theoretical_local_spectrum(&spec).unwrap()).unwrap();
    let gaps: Vec<f64> = [2048usize, 4096, 8192]
        .iter()
        .map(|&n| {
            let r = monte_carlo(&spec, &defaults(), n, 50, SEED + 50).unwrap();
            let med = median(r.outcomes.iter().map(|o| o.t_n).collect());
            (med - d2).abs() / d2
        })
        .collect();
    let ok = gaps[0] > gaps[1] && gaps[1] > gaps[2] && gaps[2] < 0.3;
    outcome(
        ok,
        format!(
            "D² = {d2:.4}; relative gaps {:.3}, {:.3}, {:.3} (decreasing, last < 0.30)",
            gaps[0], gaps[1], gaps[2]
        ),
    )
}

fn kurtosis_estimate() -> Outcome {
    let n = 8192;
    let estimates = |noise: NoiseLaw, offset: u64| -> Vec<f64> {
        (0..200u64)
            .map(|r| {
                let x = generate(&ProcessSpec::iid(noise), n, SEED + offset + r)
                    .unwrap()
                    .demeaned();
                let (cfg, _) = data_driven_config(&x, &AutoTuning::default()).unwrap();
                estimate_kappa4(&x, cfg.h, &cfg.kernel).unwrap().value
            })
            .collect()
    };
    let gauss = estimates(NoiseLaw::Gaussian, 6_000);
    let expo = estimates(NoiseLaw::CenteredExponential, 7_000);
    let g_ok = gauss.iter().filter(|k| k.abs() < 0.5).count();
    let e_ok = expo.iter().filter(|k| **k > 4.0 && **k < 8.0).count();
    outcome(
        g_ok >= 180 && e_ok >= 160,
        format!(
            "Gaussian |κ̂₄| < 0.5 in {g_ok}/200 (≥ 180); exponential κ̂₄ ∈ (4, 8) in {e_ok}/200 (≥ 160)"
        ),
    )
}

fn median_config(r: &MonteCarloReport) -> TestConfig {
    let h = median(r.outcomes.iter().map(|o| o.h).collect());
    let b = median(r.outcomes.iter().map(|o| o.b).collect());
    TestConfig::new(r.outcomes[0].m, 1, h, b)
}

fn power_ordering() -> Outcome {
    let n = 4096;
    let mut predicted = Vec::new();
    let mut simulated = Vec::new();
    for (k, a) in [0.25, 0.5, 0.75].into_iter().enumerate() {
        let spec = ProcessSpec::cosine_modulated(a);
        let r = monte_carlo(&spec, &defaults(), n, 200, SEED + 70 + k as u64).unwrap();
        let cfg = median_config(&r);
        let p = power_approx(&theoretical_local_spectrum(&spec).unwrap(), &cfg, n, 0.05).unwrap();
        predicted.push(p.power);
        simulated.push(r.rate);
    }
    let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
    let agree = predicted
        .iter()
        .zip(&simulated)
        .all(|(p, s)| (p - s).abs() <= 0.15);
    outcome(
        increasing(&predicted) && increasing(&simulated) && agree,
        format!(
            "predicted {:.4?}, simulated {:.3?} (both strictly increasing, |Δ| ≤ 0.15)",
            predicted, simulated
        ),
    )
}

fn invariant_suite() -> Outcome {
    let mut failures = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };
    let rel = |a: f64, b: f64| (a - b).abs() <= 1e-8 * a.abs().max(b.abs()).max(1e-300);

    let x = TimeSeries::new(common::ar1(2048, 0.6, SEED + 80))
        .unwrap()
        .demeaned();
    let cfg = TestConfig::new(128, 2, 0.2, 0.4);
    let base = run_test(&x, &cfg).unwrap();
    for sigma in [1e-3, 7.5, 1e4] {
        let s = run_test(&x.scaled(sigma), &cfg).unwrap();
        check(
            "scale invariance",
            rel(base.t_n, s.t_n)
                && rel(base.kappa4_hat, s.kappa4_hat)
                && rel(base.standardized, s.standardized)
                && rel(base.p_value, s.p_value)
                && base
                    .q_profile
                    .iter()
                    .zip(&s.q_profile)
                    .all(|(a, b)| rel(a.q, b.q)),
        );
    }
    check(
        "sign invariance",
        run_test(&x.scaled(-1.0), &cfg).unwrap() == base,
    );
    check("determinism", run_test(&x, &cfg).unwrap() == base);
    let mean_q = base.q_profile.iter().map(|p| p.q).sum::<f64>() / base.q_profile.len() as f64;
    check(
        "mean(Q) = m√b·T_n",
        (mean_q - 128.0 * 0.4f64.sqrt() * base.t_n).abs() <= 1e-12 * mean_q,
    );

    // identity cases
    let p = periodogram(&x);
    let parseval = p.values().iter().sum::<f64>() * 2.0 * PI / 2048.0;
    check(
        "Parseval",
        rel(parseval, x.variance() * 2047.0 / 2048.0)
            || rel(
                parseval,
                x.values().iter().map(|v| v * v).sum::<f64>() / 2048.0,
            ),
    );
    let head = TimeSeries::new(x.values()[..256].to_vec()).unwrap();
    let full = local_periodogram(&head, 129, 256, &Taper::rectangular()).unwrap();
    check(
        "full rectangular window",
        full.values() == periodogram(&head).values(),
    );
    let flat = TimeSeries::new(vec![0.0; 256]).unwrap();
    check(
        "zero series",
        periodogram(&flat).values().iter().all(|v| *v == 0.0),
    );

    // simulation determinism
    let tuning = Tuning::Fixed(TestConfig::new(64, 1, 0.3, 0.5));
    let spec = ProcessSpec::ar1(0.3).with_noise(NoiseLaw::Uniform);
    check(
        "Monte Carlo determinism",
        monte_carlo(&spec, &tuning, 512, 50, 3).unwrap()
            == monte_carlo(&spec, &tuning, 512, 50, 3).unwrap(),
    );

    // quadrature convergence on smooth alternatives
    let tvma = ProcessSpec::ma_tv(vec![
        MaTerm {
            lag: 0,
            coefficient: Coefficient::Constant { value: 1.0 },
        },
        MaTerm {
            lag: 1,
            coefficient: Coefficient::Linear {
                intercept: -0.5,
                slope: 1.0,
            },
        },
    ]);
    for s in [ProcessSpec::cosine_modulated(0.5), tvma] {
        let r = refinement_check(
            &theoretical_local_spectrum(&s).unwrap(),
            &TestConfig::new(124, 1, 0.15, 0.3),
        )
        .unwrap();
        check("quadrature convergence", r.max() < 1e-4);
    }
    let null = theoretical_local_spectrum(&ProcessSpec::ar1(0.4)).unwrap();
    check("null degeneracy", deviation_d2(&null).unwrap() == 0.0);

    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "scale/sign invariance, identities, determinism, quadrature convergence, profile identity".into()
        } else {
            format!("failing: {failures:?}")
        },
    )
}

fn tremor_end_to_end() -> Outcome {
    let n = 3071;
    let cfg = TestConfig::new(256, 1, 0.1, 0.18);
    let centers = stride_centers(n, 256, 1).unwrap();
    let mut rejected = 0;
    let mut localized = 0;
    let mut both = 0;
    for r in 0..50u64 {
        let t = tremor_analogue(n, SEED + 900 + r).unwrap();
        let x = t.series.demeaned();
        let res = run_test(&x, &cfg).unwrap();
        let profile = q_profile(&x, &cfg, &centers).unwrap();
        let peaks = top_peaks(&profile, 2, cfg.m as i64);
        let stretch = |c: i64| {
            t.injected
                .iter()
                .position(|&(a, b)| (a as i64..=b as i64).contains(&c))
        };
        let hit = peaks.len() == 2
            && matches!((stretch(peaks[0].center), stretch(peaks[1].center)), (Some(i), Some(j)) if i != j);
        rejected += res.reject as usize;
        localized += hit as usize;
        both += (res.reject && hit) as usize;
    }
    outcome(
        both >= 40,
        format!("rejected {rejected}/50, both peaks in distinct injected stretches {localized}/50, jointly {both}/50 (≥ 40)"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("constant fidelity", constant_fidelity),
        ("segment plan", segment_plan),
        ("null calibration", null_calibration),
        ("consistency", consistency),
        ("kurtosis estimate", kurtosis_estimate),
        ("power ordering", power_ordering),
        ("invariant suite", invariant_suite),
        ("tremor analogue", tremor_end_to_end),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "[{}] {}. {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            k + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
