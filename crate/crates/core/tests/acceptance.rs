//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use qmix_core::analysis::{analyze, AnalyzeOptions};
use qmix_core::channels::{
    convex_with_omega, dephasing_group, group_average, omega, pauli_group, qubit_depolarizing,
    random_channel, random_unistochastic,
};
use qmix_core::dobrushin::{
    contraction_check, kappa_analytic, kappa_scalar, ChannelFamily, KappaBound, SearchBudget,
};
use qmix_core::dynamics::{
    classify, fixed_points, fixed_space, verify_bound, Verdict, DEFAULT_TOL_SPEC,
};
use qmix_core::operator::{random_density, random_unitary, tv_norm};
use qmix_core::{DensityMatrix, HermitianOperator, KrausChannel, Operator};

type C2 = [[Complex64; 2]; 2];

/// Smallest eigenvalue of a 2×2 Hermitian matrix, closed form.
fn min_eig_2x2(m: &C2) -> f64 {
    let (a, d) = (m[0][0].re, m[1][1].re);
    let b = m[0][1];
    (a + d) / 2.0 - (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt()
}

/// `Σ K |ξ⟩⟨ξ| K*` computed entrywise, without the library's operator code.
fn apply_to_pure_2x2(ch: &KrausChannel, xi: [Complex64; 2]) -> C2 {
    let zero = Complex64::new(0.0, 0.0);
    let mut out = [[zero; 2]; 2];
    for k in ch.kraus() {
        let kxi = [
            k.get(0, 0) * xi[0] + k.get(0, 1) * xi[1],
            k.get(1, 0) * xi[0] + k.get(1, 1) * xi[1],
        ];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] += kxi[i] * kxi[j].conj();
            }
        }
    }
    out
}

/// Brute-force `min_ξ λ_min(M(|ξ⟩⟨ξ|))` on a 100×100 Bloch-sphere grid.
fn bloch_grid_oracle(ch: &KrausChannel) -> f64 {
    let n = 100;
    let mut best = f64::INFINITY;
    for i in 0..n {
        let theta = std::f64::consts::PI * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            let xi = [
                Complex64::new((theta / 2.0).cos(), 0.0),
                Complex64::from_polar((theta / 2.0).sin(), phi),
            ];
            best = best.min(min_eig_2x2(&apply_to_pure_2x2(ch, xi)));
        }
    }
    best
}

type Criterion = fn() -> Outcome;

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(failures: &mut Vec<String>, ok: bool, msg: impl FnOnce() -> String) {
    if !ok {
        failures.push(msg());
    }
}

fn outcome(failures: Vec<String>, summary: String) -> Outcome {
    if failures.is_empty() {
        Outcome {
            passed: true,
            detail: summary,
        }
    } else {
        Outcome {
            passed: false,
            detail: format!("{} failure(s), first: {}", failures.len(), failures[0]),
        }
    }
}

fn criterion_1() -> Outcome {
    let mut failures = Vec::new();
    let mut worst_time = Duration::ZERO;
    let mut worst_err: f64 = 0.0;
    for alpha in [0.1, 0.3, 0.5, 0.7] {
        let start = Instant::now();
        let ch = qubit_depolarizing(alpha).unwrap();
        let kb = kappa_scalar(&ch, &SearchBudget::default()).unwrap();
        let fps = fixed_points(&ch).unwrap();
        let c = classify(&ch, DEFAULT_TOL_SPEC).unwrap();
        let elapsed = start.elapsed();
        worst_time = worst_time.max(elapsed);

        let err = (kb.constant() - 2.0 * alpha / 3.0).abs();
        worst_err = worst_err.max(err);
        check(&mut failures, err <= 1e-6, || {
            format!("alpha={alpha}: |c*-2a/3|={err:e}")
        });
        let oracle = bloch_grid_oracle(&ch);
        check(
            &mut failures,
            (kb.constant() - oracle).abs() <= 1e-6,
            || {
                format!(
                    "alpha={alpha}: c*={} vs grid oracle {oracle}",
                    kb.constant()
                )
            },
        );
        check(&mut failures, fps.len() == 1, || {
            format!("alpha={alpha}: {} fixed points", fps.len())
        });
        if let Some(fp) = fps.first() {
            let half = Operator::identity(2).scale(0.5);
            let residual =
                (&ch.apply(fp.as_operator()).unwrap() - fp.as_operator()).frobenius_norm();
            check(&mut failures, residual <= 1e-8, || {
                format!("alpha={alpha}: residual {residual:e}")
            });
            check(
                &mut failures,
                fp.as_operator().max_abs_diff(&half) <= 1e-8,
                || format!("alpha={alpha}: fixed point is not id/2"),
            );
        }
        check(&mut failures, c.verdict == Verdict::Mixing, || {
            format!("alpha={alpha}: verdict {}", c.verdict.as_str())
        });
        check(&mut failures, elapsed < Duration::from_secs(5), || {
            format!("alpha={alpha}: took {elapsed:?}")
        });
    }
    outcome(
        failures,
        format!("max |c*-2a/3| = {worst_err:.1e}, slowest alpha {worst_time:.2?}"),
    )
}

fn criterion_2() -> Outcome {
    let mut failures = Vec::new();
    for d in 2..=5 {
        let ch = omega(d).unwrap();
        let exact = Operator::identity(d).scale(1.0 / d as f64);
        let analytic = kappa_analytic(&ChannelFamily::Omega { dim: d }).unwrap();
        check(
            &mut failures,
            analytic.lower_bound.as_operator().max_abs_diff(&exact) == 0.0,
            || format!("d={d}: analytic kappa is not exactly id/d"),
        );
        check(&mut failures, analytic.theta.is_infinite(), || {
            format!("d={d}: analytic theta finite")
        });
        let est = kappa_scalar(&ch, &SearchBudget::default()).unwrap();
        let dev = est.lower_bound.as_operator().max_abs_diff(&exact);
        check(&mut failures, dev <= 1e-6, || {
            format!("d={d}: optimized kappa off by {dev:e}")
        });
        check(&mut failures, est.theta.is_infinite(), || {
            format!(
                "d={d}: optimized trace {} gives finite theta",
                est.trace_kappa
            )
        });
        let mixed = DensityMatrix::maximally_mixed(d);
        for s in 0..20 {
            let rho = random_density(d, 1000 + s);
            let dist = ch.apply_state(&rho).unwrap().tv_distance(&mixed).unwrap();
            check(&mut failures, dist <= 1e-12, || {
                format!("d={d} state {s}: distance {dist:e} at n=1")
            });
        }
    }
    outcome(
        failures,
        "d = 2..5, analytic exact, optimized within 1e-6, 80 one-step collapses".into(),
    )
}

fn criterion_3() -> Outcome {
    let mut failures = Vec::new();
    let mut max_kappa: f64 = 0.0;
    let mut max_dev: f64 = 0.0;
    for d in 2..=4 {
        for trial in 0..10u64 {
            let seed = 100 * d as u64 + trial;
            let ch = random_unistochastic(d, seed).unwrap();
            // orthogonal pure pair: two columns of an independent Haar unitary
            let v = random_unitary(d, seed + 50_000);
            let col = |k: usize| (0..d).map(|i| v.get(i, k)).collect::<Vec<_>>();
            let (a, b) = (col(0), col(1));
            let mut rho = DensityMatrix::new(Operator::outer(&a, &a)).unwrap();
            let mut sigma = DensityMatrix::new(Operator::outer(&b, &b)).unwrap();
            for n in 0..=100 {
                if n > 0 {
                    rho = ch.apply_state(&rho).unwrap();
                    sigma = ch.apply_state(&sigma).unwrap();
                }
                let dist = rho.tv_distance(&sigma).unwrap();
                max_dev = max_dev.max((dist - 2.0).abs());
            }
            let c = classify(&ch, DEFAULT_TOL_SPEC).unwrap();
            check(&mut failures, c.verdict != Verdict::Mixing, || {
                format!("d={d} seed={seed}: classified mixing")
            });
            let kb = kappa_scalar(&ch, &SearchBudget::default()).unwrap();
            max_kappa = max_kappa.max(kb.constant());
            check(&mut failures, kb.constant() <= 1e-8, || {
                format!("d={d} seed={seed}: kappa {}", kb.constant())
            });
        }
    }
    check(&mut failures, max_dev <= 1e-9, || {
        format!("distance left 2 by {max_dev:e}")
    });
    outcome(
        failures,
        format!("30 unitaries, max |dist-2| = {max_dev:.1e}, max kappa = {max_kappa:.1e}"),
    )
}

fn zoo() -> Vec<(String, KrausChannel, Option<ChannelFamily>)> {
    let mut out = Vec::new();
    for d in 2..=4 {
        out.push((
            format!("omega d={d}"),
            omega(d).unwrap(),
            Some(ChannelFamily::Omega { dim: d }),
        ));
        out.push((
            format!("identity d={d}"),
            KrausChannel::identity(d),
            Some(ChannelFamily::Identity { dim: d }),
        ));
        out.push((
            format!("unistochastic d={d}"),
            random_unistochastic(d, 7 + d as u64).unwrap(),
            Some(ChannelFamily::Unistochastic { dim: d }),
        ));
        out.push((
            format!("random d={d}"),
            random_channel(d, 2, 3 + d as u64).unwrap(),
            None,
        ));
        for alpha in [0.3, 0.6, 0.9] {
            let base = random_channel(d, 2, 40 + d as u64).unwrap();
            out.push((
                format!("convex-with-omega d={d} alpha={alpha}"),
                convex_with_omega(&base, alpha).unwrap(),
                Some(ChannelFamily::ConvexWithOmega { dim: d, alpha }),
            ));
        }
    }
    for alpha in [0.1, 0.3, 0.5, 0.7, 0.8, 0.9] {
        out.push((
            format!("qubit-depolarizing alpha={alpha}"),
            qubit_depolarizing(alpha).unwrap(),
            Some(ChannelFamily::QubitDepolarizing { alpha }),
        ));
    }
    out.push((
        "pauli average".into(),
        group_average(&pauli_group()).unwrap(),
        None,
    ));
    out.push((
        "dephasing average".into(),
        group_average(&dephasing_group()).unwrap(),
        None,
    ));
    out
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut checks = 0;
    let mut max_ratio_slack = f64::NEG_INFINITY;
    for (seed, (name, ch, family)) in zoo().into_iter().enumerate() {
        let mut bounds: Vec<KappaBound> =
            vec![kappa_scalar(&ch, &SearchBudget::default()).unwrap()];
        bounds.extend(family.map(|f| kappa_analytic(&f).unwrap()));
        for kb in bounds {
            let report = contraction_check(&ch, &kb, 1000, seed as u64).unwrap();
            checks += 1;
            max_ratio_slack = max_ratio_slack.max(report.max_ratio - report.bound);
            check(&mut failures, report.passed(), || {
                format!(
                    "{name} ({:?}): {} violations",
                    kb.method,
                    report.violations.len()
                )
            });
        }
    }
    let elapsed = start.elapsed();
    check(&mut failures, elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    });
    outcome(
        failures,
        format!(
            "{checks} channel/bound combinations x 1000 pairs, max(ratio - bound) = {max_ratio_slack:.1e}, {elapsed:.2?}"
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut failures = Vec::new();
    let mut runs = 0;
    for k in 1..=7 {
        let alpha = k as f64 / 10.0;
        let ch = qubit_depolarizing(alpha).unwrap();
        let kb = kappa_scalar(&ch, &SearchBudget::default()).unwrap();
        let report = verify_bound(&ch, &kb, 100, 50, k).unwrap();
        runs += 1;
        check(&mut failures, report.passed, || {
            format!(
                "depolarizing alpha={alpha}: {} violations",
                report.violations.len()
            )
        });
    }
    for base_seed in 0..5u64 {
        let base = random_channel(3, 2, 900 + base_seed).unwrap();
        for alpha in [0.3, 0.6, 0.9] {
            let ch = convex_with_omega(&base, alpha).unwrap();
            let kb = kappa_scalar(&ch, &SearchBudget::default()).unwrap();
            check(&mut failures, kb.theta >= -alpha.ln() - 1e-9, || {
                format!(
                    "base {base_seed} alpha={alpha}: theta {} < -ln(alpha)",
                    kb.theta
                )
            });
            let report = verify_bound(&ch, &kb, 100, 50, base_seed).unwrap();
            runs += 1;
            check(&mut failures, report.passed, || {
                format!(
                    "base {base_seed} alpha={alpha}: {} violations",
                    report.violations.len()
                )
            });
        }
    }
    outcome(
        failures,
        format!("{runs} channels x 100 trials x 50 steps, zero violations"),
    )
}

fn criterion_6() -> Outcome {
    let mut failures = Vec::new();
    let pauli = group_average(&pauli_group()).unwrap();
    let deph = group_average(&dephasing_group()).unwrap();
    let om = omega(2).unwrap();
    let mut pauli_dev: f64 = 0.0;
    let mut idem_dev: f64 = 0.0;
    for e in Operator::matrix_unit_basis(2) {
        pauli_dev = pauli_dev.max(
            pauli
                .apply(&e)
                .unwrap()
                .max_abs_diff(&om.apply(&e).unwrap()),
        );
        let once = deph.apply(&e).unwrap();
        idem_dev = idem_dev.max(deph.apply(&once).unwrap().max_abs_diff(&once));
    }
    check(&mut failures, pauli_dev <= 1e-12, || {
        format!("Pauli average vs omega: {pauli_dev:e}")
    });
    check(&mut failures, idem_dev <= 1e-12, || {
        format!("dephasing not idempotent: {idem_dev:e}")
    });
    let cp = classify(&pauli, DEFAULT_TOL_SPEC).unwrap();
    check(&mut failures, cp.verdict == Verdict::Mixing, || {
        format!("Pauli average is {}", cp.verdict.as_str())
    });
    let cd = classify(&deph, DEFAULT_TOL_SPEC).unwrap();
    check(&mut failures, cd.verdict == Verdict::NonErgodic, || {
        format!("dephasing average is {}", cd.verdict.as_str())
    });
    let space = fixed_space(&deph, DEFAULT_TOL_SPEC).unwrap();
    check(&mut failures, space.dimension == 2, || {
        format!("dephasing fixed space dim {}", space.dimension)
    });
    // the dephasing average differs from omega on the basis, as the
    // ergodic-iff-omega statement requires
    let deph_vs_omega = Operator::matrix_unit_basis(2)
        .iter()
        .map(|e| deph.apply(e).unwrap().max_abs_diff(&om.apply(e).unwrap()))
        .fold(0.0, f64::max);
    check(&mut failures, deph_vs_omega > 1e-3, || {
        "dephasing average equals omega".into()
    });
    outcome(
        failures,
        format!(
            "Pauli vs omega {pauli_dev:.1e}, dephasing idempotence {idem_dev:.1e}, fixed dim {}",
            space.dimension
        ),
    )
}

/// `U diag(λ) U*`, whose trace norm is `Σ|λ|` by construction.
fn hermitian_with_spectrum(values: &[f64], seed: u64) -> Operator {
    let d = values.len();
    let u = random_unitary(d, seed);
    let diag = Operator::diagonal(
        &values
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect::<Vec<_>>(),
    );
    &(&u * &diag) * &u.adjoint()
}

fn criterion_7() -> Outcome {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();
    let mut n = 0;
    let random_op = |rng: &mut rand_chacha::ChaCha8Rng, d: usize| {
        Operator::from_fn(d, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    };
    for i in 0..2500u64 {
        let d = 1 + (i as usize % 4);
        let a = random_op(&mut rng, d);
        let b = random_op(&mut rng, d);
        let t: f64 = rng.random_range(-3.0..3.0);
        let (na, nb) = (tv_norm(&a).unwrap(), tv_norm(&b).unwrap());
        let nsum = tv_norm(&(&a + &b)).unwrap();
        check(
            &mut failures,
            na >= 0.0 && tv_norm(&Operator::zeros(d)).unwrap() == 0.0,
            || format!("case {i}: positivity"),
        );
        check(&mut failures, nsum <= na + nb + 1e-9, || {
            format!("case {i}: triangle {nsum} > {na} + {nb}")
        });
        let nt = tv_norm(&a.scale(t)).unwrap();
        check(
            &mut failures,
            (nt - t.abs() * na).abs() <= 1e-9 * (1.0 + na),
            || format!("case {i}: homogeneity"),
        );
        n += 3;

        let spectrum: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let h = hermitian_with_spectrum(&spectrum, 20_000 + i);
        let expected: f64 = spectrum.iter().map(|v| v.abs()).sum();
        let got = tv_norm(&h).unwrap();
        let trace_norm = HermitianOperator::symmetrized(&h).trace_norm().unwrap();
        check(
            &mut failures,
            (got - expected).abs() <= 1e-9 && (trace_norm - expected).abs() <= 1e-9,
            || format!("case {i}: Hermitian norm {got} vs sum |lambda| {expected}"),
        );
        n += 1;

        let dist = random_density(d, 30_000 + 2 * i)
            .tv_distance(&random_density(d, 30_001 + 2 * i))
            .unwrap();
        check(&mut failures, dist <= 2.0 + 1e-9, || {
            format!("case {i}: state distance {dist}")
        });
        n += 1;
    }
    outcome(failures, format!("{n} randomized checks"))
}

fn criterion_8() -> Outcome {
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for alpha in [0.8, 0.9] {
        let ch = qubit_depolarizing(alpha).unwrap();
        let kb = kappa_scalar(&ch, &SearchBudget::default()).unwrap();
        let c = kb.constant();
        let oracle = bloch_grid_oracle(&ch);
        let published = 2.0 * alpha / 3.0;
        check(&mut failures, (c - oracle).abs() <= 1e-4, || {
            format!("alpha={alpha}: c*={c} vs grid {oracle}")
        });
        check(&mut failures, c < published, || {
            format!("alpha={alpha}: c*={c} not below {published}")
        });
        let opts = AnalyzeOptions {
            analytic: Some(ChannelFamily::QubitDepolarizing { alpha }),
            ..AnalyzeOptions::default()
        };
        let report = analyze(&ch, &opts).unwrap();
        let flagged = report
            .closed_form_check
            .as_ref()
            .is_some_and(|chk| !chk.consistent && chk.message.is_some())
            && report.flags.iter().any(|f| f.contains("2*alpha/3"));
        check(&mut failures, flagged, || {
            format!("alpha={alpha}: deviation not flagged")
        });
        summary.push(format!(
            "alpha={alpha}: c*={c:.6} grid={oracle:.6} 2a/3={published:.6}"
        ));
    }
    outcome(failures, summary.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 8] = [
        (
            "qubit depolarizing kappa, fixed point and verdict",
            criterion_1,
        ),
        ("completely depolarizing channel", criterion_2),
        ("unistochastic channels do not mix", criterion_3),
        ("one-step contraction inequality over the zoo", criterion_4),
        ("exponential bound on simulated dynamics", criterion_5),
        (
            "group averages: Pauli mixes, dephasing does not",
            criterion_6,
        ),
        ("total-variation norm properties", criterion_7),
        (
            "depolarizing alpha > 3/4 closed-form discrepancy",
            criterion_8,
        ),
    ];
    let mut all = true;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        all &= result.passed;
        println!(
            "criterion {}: {} {name} ({}) [{:.2?}]",
            k + 1,
            if result.passed { "PASS" } else { "FAIL" },
            result.detail,
            start.elapsed()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
