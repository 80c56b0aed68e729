//! Acceptance suite: one numbered criterion per function, each printing a
//! single PASS/FAIL line. Runs without the libtest harness so the lines are
//! always visible; the process exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::Instant;

use theta_norms::function_space::{
    counting_measure_equiv, f_norm, fn_norm_limit, gamma_log_convexity, gamma_quadrature, holder_equality_witness,
    holder_fn, DiscreteMeasureSpace, GridFunction, MeasureKind,
};
use theta_norms::gt_weighting::{find_gt_factorization, form_sup_norm, gt_bound_check, BilinearForm};
use theta_norms::inequalities::{
    cosecant_partial_fraction, hardy, hardy_power_family, hilbert, hilbert_kernel_bound,
};
use theta_norms::linalg::Matrix;
use theta_norms::rng::CounterRng;
use theta_norms::sequence_space::{dual_functional_norm, embedding_strictness, lp_norm, sandwich_holds, WeightedSequence};
use theta_norms::suite::{report_body, run_suite, SuiteConfig};
use theta_norms::ExponentValue;

const SEED: u64 = 42;
const EXPONENTS: [f64; 5] = [1.1, 1.5, 2.0, 3.0, 10.0];

type Outcome = Result<String, String>;

fn fin(e: f64) -> ExponentValue {
    ExponentValue::Finite(e)
}

fn seq(v: Vec<f64>) -> WeightedSequence {
    WeightedSequence::finite(v).expect("finite entries")
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg.into()) }
}

fn suite_config(checks: &[&str], trials: usize) -> SuiteConfig {
    SuiteConfig {
        master_seed: SEED,
        trials_per_check: trials,
        checks: checks.iter().map(|c| c.to_string()).collect(),
        ..SuiteConfig::default()
    }
}

fn inequality_suite() -> Outcome {
    let checks = [
        "holder_seq",
        "minkowski_seq",
        "generalized_holder",
        "holder_fn",
        "minkowski_fn",
        "interpolation",
        "integral_minkowski",
        "convolution_young",
    ];
    let start = Instant::now();
    let summary = run_suite(&suite_config(&checks, 10_000), std::io::sink()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    ensure(summary.lines == checks.len() * EXPONENTS.len() * 10_000, format!("{} lines", summary.lines))?;
    ensure(summary.violations == 0, format!("{} violations", summary.violations))?;
    ensure(secs < 120.0, format!("took {secs:.1} s"))?;
    let worst = summary.checks.iter().map(|c| c.max_ratio).fold(0.0, f64::max);
    Ok(format!("{} trials, 0 violations, max ratio {worst:.12}, {secs:.1} s", summary.lines))
}

fn equality_witnesses() -> Outcome {
    let checks = ["holder_equality", "minkowski_equality", "integral_minkowski_equality", "convolution_equality"];
    let summary = run_suite(&suite_config(&checks, 2_000), std::io::sink()).map_err(|e| e.to_string())?;
    ensure(summary.violations == 0, format!("{} witnesses off by more than 1e-9", summary.violations))?;
    let spread = summary
        .checks
        .iter()
        .map(|c| (c.max_ratio - 1.0).abs().max((c.min_ratio - 1.0).abs()))
        .fold(0.0, f64::max);
    ensure(spread <= 1e-9, format!("ratio spread {spread:e}"))?;

    // Function-space Hölder with g = c|f|^{e−1} on random measures.
    let mut fn_spread = 0.0f64;
    for (k, &e) in EXPONENTS.iter().enumerate() {
        for t in 0..200 {
            let mut rng = CounterRng::for_trial(SEED, "holder_fn_equality", (k * 200 + t) as u64);
            let n = rng.int_in(1, 64);
            let weights = (0..n).map(|_| rng.open_unit()).collect();
            let mu = DiscreteMeasureSpace::new(MeasureKind::Quadrature, (0..n).map(|i| i as f64).collect(), weights)
                .map_err(|e| e.to_string())?;
            let f = GridFunction::new(rng.uniform_vec(n, -1.0, 1.0)).map_err(|e| e.to_string())?;
            let c = rng.uniform(0.1, 10.0);
            let g = holder_equality_witness(&f, e).and_then(|g| g.map(|v| c * v)).map_err(|e| e.to_string())?;
            let r = holder_fn(&f, &g, &mu, fin(e)).map_err(|e| e.to_string())?;
            fn_spread = fn_spread.max((r.ratio - 1.0).abs());
        }
    }
    ensure(fn_spread <= 1e-9, format!("function Hölder witness off by {fn_spread:e}"))?;
    Ok(format!("max |ratio − 1| = {:.2e}", spread.max(fn_spread)))
}

fn hardy_criterion() -> Outcome {
    let r = hardy(&seq(vec![1.0; 10_000]), fin(2.0)).map_err(|e| e.to_string())?;
    ensure((r.ratio - 0.25).abs() <= 1e-6, format!("constant sequence ratio {}", r.ratio))?;

    let summary = run_suite(&suite_config(&["hardy"], 10_000), std::io::sink()).map_err(|e| e.to_string())?;
    ensure(summary.violations == 0, format!("{} random violations", summary.violations))?;

    let mut ratios = Vec::new();
    for delta in [0.2, 0.1, 0.05, 0.02] {
        let r = hardy_power_family(0.5 + delta, fin(2.0), 10_000).map_err(|e| e.to_string())?;
        ensure(r.holds, format!("power family δ={delta} violates the bound"))?;
        ratios.push(r.ratio);
    }
    ensure(ratios.windows(2).all(|w| w[1] > w[0]), format!("ratios not increasing: {ratios:?}"))?;
    Ok(format!(
        "ones ratio {:.9}; {} random trials hold; δ-family ratios {:.6?}",
        r.ratio, summary.lines, ratios
    ))
}

fn hilbert_criterion() -> Outcome {
    let mut trials = 0;
    let mut worst = 0.0f64;
    for (k, &e) in EXPONENTS.iter().enumerate() {
        for t in 0..20 {
            let mut rng = CounterRng::for_trial(SEED, "hilbert_large", (k * 20 + t) as u64);
            let n = rng.int_in(1, 1000);
            let a = seq((0..n).map(|_| rng.next_f64()).collect());
            let b = seq((0..n).map(|_| rng.next_f64()).collect());
            let r = hilbert(&a, &b, fin(e)).map_err(|e| e.to_string())?;
            ensure(r.holds, format!("e={e}, M=N={n}: {} > {}", r.lhs, r.rhs))?;
            worst = worst.max(r.ratio);
            trials += 1;
        }
    }
    for &e in &[1.5, 2.0, 3.0, 4.0] {
        for m in 1..=100 {
            let kb = hilbert_kernel_bound(m, fin(e), 100_000).map_err(|e| e.to_string())?;
            ensure(kb.report.holds, format!("kernel bound fails at e={e}, m={m}: {}", kb.report.lhs))?;
        }
    }
    let kb = hilbert_kernel_bound(1, fin(2.0), 100_000).map_err(|e| e.to_string())?;
    let v = kb.report.lhs;
    ensure((1.8..=PI).contains(&v), format!("e=2, m=1 value {v}"))?;
    ensure((v - 1.8600250950323807).abs() < 1e-9, format!("e=2, m=1 value {v} drifted from the pinned oracle"))?;
    Ok(format!("{trials} double sums hold (max ratio {worst:.4}); 400 kernel bounds hold; e=2,m=1 → {v:.10}"))
}

fn cosecant_criterion() -> Outcome {
    let mut worst = 0.0f64;
    for i in 1..=9 {
        let z = i as f64 / 10.0;
        let c = cosecant_partial_fraction(z, 10_000).map_err(|e| e.to_string())?;
        let c2 = cosecant_partial_fraction(z, 20_000).map_err(|e| e.to_string())?;
        ensure(c.abs_error <= c.next_term, format!("z={z}: error {} above |term_N+1| {}", c.abs_error, c.next_term))?;
        ensure(c2.abs_error < c.abs_error, format!("z={z}: error did not shrink from N to 2N"))?;
        worst = worst.max(c.abs_error / c.next_term);
    }
    Ok(format!("max error/|term_N+1| = {worst:.4}"))
}

fn duality_criterion() -> Outcome {
    let directions_per_vector = 1000;
    let mut worst_excess = f64::NEG_INFINITY;
    for &p in &[1.5, 2.0, 3.0] {
        for v in 0..1000 {
            let mut rng = CounterRng::for_trial(SEED, &format!("duality@{p}"), v);
            let dim = rng.int_in(1, 6);
            let b = rng.uniform_vec(dim, -1.0, 1.0);
            let d = dual_functional_norm(&b, fin(p)).map_err(|e| e.to_string())?;
            ensure(
                (d.formula - d.extremal).abs() <= 1e-9 * d.formula,
                format!("p={p}: formula {} vs extremal {}", d.formula, d.extremal),
            )?;
            for k in 0..directions_per_vector {
                // Half generic directions, half perturbations of the extremal vector.
                let x: Vec<f64> = if k % 2 == 0 {
                    (0..dim).map(|_| rng.normal()).collect()
                } else {
                    let eps = 10f64.powf(rng.uniform(-8.0, -1.0));
                    d.extremal_vector.iter().map(|xi| xi + eps * rng.normal()).collect()
                };
                let norm = lp_norm(&x, fin(p)).map_err(|e| e.to_string())?;
                if norm == 0.0 {
                    continue;
                }
                let value = b.iter().zip(&x).map(|(a, y)| a * y).sum::<f64>().abs() / norm;
                let excess = (value - d.formula) / d.formula;
                ensure(excess <= 1e-9, format!("p={p}: direction beats the formula by {excess:e}"))?;
                worst_excess = worst_excess.max(excess);
            }
        }
    }
    for v in 0..1000 {
        let mut rng = CounterRng::for_trial(SEED, "duality@1", v);
        let dim = rng.int_in(1, 6);
        let b = rng.uniform_vec(dim, -1.0, 1.0);
        let d = dual_functional_norm(&b, fin(1.0)).map_err(|e| e.to_string())?;
        let sup = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        ensure(d.formula == sup, format!("ℓ1 functional norm {} vs sup {sup}", d.formula))?;
    }
    Ok(format!(
        "3000 vectors, {} directions, worst relative excess {worst_excess:.2e}; ℓ1 exact",
        3 * 1000 * directions_per_vector
    ))
}

fn counting_criterion() -> Outcome {
    for v in 0..1000 {
        let mut rng = CounterRng::for_trial(SEED, "counting", v);
        let n = rng.int_in(0, 200);
        let x = rng.uniform_vec(n, -10.0, 10.0);
        let e = rng.uniform(1.0, 12.0);
        let (a, b) = counting_measure_equiv(&x, fin(e)).map_err(|e| e.to_string())?;
        ensure(a.to_bits() == b.to_bits(), format!("vector {v}: {a} vs {b}"))?;
    }
    Ok("1000 vectors, 0 ulp".into())
}

fn norm_limit_criterion() -> Outcome {
    let exps = [1.0, 1.1, 1.5, 2.0, 3.0, 10.0, 32.0, 128.0];
    for v in 0..2000 {
        let mut rng = CounterRng::for_trial(SEED, "sandwich", v);
        let n = rng.int_in(1, 100);
        let x = rng.uniform_vec(n, -5.0, 5.0);
        for &e in &exps {
            ensure(sandwich_holds(&x, e).map_err(|e| e.to_string())?, format!("sandwich fails, vector {v}, e={e}"))?;
        }
    }
    let mu = DiscreteMeasureSpace::midpoint(0.0, 1.0, 1000).map_err(|e| e.to_string())?;
    for v in 0..200 {
        let mut rng = CounterRng::for_trial(SEED, "fn_profile", v);
        let f = GridFunction::new(rng.uniform_vec(1000, -3.0, 3.0)).map_err(|e| e.to_string())?;
        for pt in fn_norm_limit(&f, &mu, &exps).map_err(|e| e.to_string())? {
            ensure(pt.norm <= pt.bound * (1.0 + 1e-12), format!("profile bound fails at e={}", pt.e))?;
        }
    }
    let chi = GridFunction::sample(&mu, |x| if x < 0.5 { 1.0 } else { 0.0 }).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for pt in fn_norm_limit(&chi, &mu, &exps).map_err(|e| e.to_string())? {
        worst = worst.max((pt.norm - 2f64.powf(-1.0 / pt.e)).abs());
    }
    ensure(worst <= 1e-10, format!("χ profile off by {worst:e}"))?;
    let sup = f_norm(&chi, &mu, ExponentValue::Inf).map_err(|e| e.to_string())?;
    Ok(format!("sandwich exact on 2000×{} cases; χ profile error {worst:.1e}; ess-sup {sup}", exps.len()))
}

fn embedding_criterion() -> Outcome {
    let r = embedding_strictness(fin(2.0), fin(4.0), 1000, 4).map_err(|e| e.to_string())?;
    ensure(r.q_stable, format!("‖x‖₄ not Cauchy: {:?}", r.q_norms))?;
    let growth: Vec<f64> = r.p_power_sums.windows(2).map(|w| w[1] - w[0]).collect();
    ensure(growth.iter().all(|&g| g > 0.6), format!("ℓ2² growth per doubling {growth:?}"))?;
    ensure(r.p_divergent, "not flagged divergent")?;
    Ok(format!("‖x‖₄ steps < 1e-3, ‖x‖₂² growth {growth:.4?} per doubling → divergent"))
}

fn gt_criterion() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let size = 2 + (i % 4) as usize;
        let mut rng = CounterRng::for_trial(SEED, "gt_random", i);
        let form = BilinearForm::random(size, size, &mut rng).map_err(|e| e.to_string())?;
        let cert = find_gt_factorization(&form, 8, 2000).map_err(|e| e.to_string())?;
        ensure(cert.k <= 1.79, format!("matrix {i} ({size}x{size}): K = {}", cert.k))?;
        let norm = form_sup_norm(&form).map_err(|e| e.to_string())?;
        ensure(norm == cert.form_norm, format!("matrix {i}: form norm {norm} vs certificate {}", cert.form_norm))?;
        let check = gt_bound_check(&form, &cert.lambda, &cert.mu, cert.k).map_err(|e| e.to_string())?;
        ensure(check.holds, format!("matrix {i}: certificate does not re-verify ({} > {})", check.lhs, check.rhs))?;
        worst = worst.max(cert.k);
    }
    for n in 1..=5 {
        let form = BilinearForm::new(Matrix::identity(n)).map_err(|e| e.to_string())?;
        let cert = find_gt_factorization(&form, 8, 2000).map_err(|e| e.to_string())?;
        ensure(cert.k <= 1.0 + 1e-6, format!("identity {n}: K = {}", cert.k))?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, format!("took {secs:.1} s"))?;
    Ok(format!("100 random forms, max K {worst:.4}; identities K ≤ 1+1e-6; {secs:.1} s"))
}

fn gamma_criterion() -> Outcome {
    for (z, want) in [(1.0, 1.0), (2.0, 1.0), (3.0, 2.0)] {
        let g = gamma_quadrature(z).map_err(|e| e.to_string())?;
        ensure((g.value - want).abs() <= 1e-8, format!("Γ({z}) = {}", g.value))?;
    }
    let mut worst_budget = 0.0f64;
    let mut cases = 0;
    for i in 1..=10 {
        for j in 1..=10 {
            for k in 1..=9 {
                let (x, y, t) = (0.5 * i as f64, 0.5 * j as f64, 0.1 * k as f64);
                let r = gamma_log_convexity(x, y, t).map_err(|e| e.to_string())?;
                ensure(r.holds, format!("x={x}, y={y}, t={t}: {} > {}", r.lhs, r.rhs))?;
                ensure(r.tail_error < 1e-8, format!("budget {} at x={x}, y={y}, t={t}", r.tail_error))?;
                worst_budget = worst_budget.max(r.tail_error);
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} sweep points hold, max error budget {worst_budget:.1e}"))
}

fn determinism_criterion() -> Outcome {
    let run = || -> Result<String, String> {
        let mut buf = Vec::new();
        run_suite(&suite_config(&[], 20), &mut buf).map_err(|e| e.to_string())?;
        String::from_utf8(buf).map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    ensure(report_body(&a) == report_body(&b), "library report bodies differ")?;

    let bin = env!("CARGO_BIN_EXE_theta-norms");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut bodies = Vec::new();
    for name in ["a.jsonl", "b.jsonl"] {
        let path = dir.path().join(name);
        let status = Command::new(bin)
            .args(["verify", "--seed", "42", "--trials", "10", "--out"])
            .arg(&path)
            .output()
            .map_err(|e| e.to_string())?
            .status;
        ensure(status.code() == Some(0), format!("verify exited with {status}"))?;
        bodies.push(std::fs::read_to_string(&path).map_err(|e| e.to_string())?);
    }
    ensure(report_body(&bodies[0]) == report_body(&bodies[1]), "CLI report bodies differ")?;

    let status = Command::new(bin)
        .args(["verify", "--seed", "42", "--trials", "10", "--debug-rhs-scale", "0.1", "--out"])
        .arg(dir.path().join("sabotage.jsonl"))
        .output()
        .map_err(|e| e.to_string())?
        .status;
    ensure(status.code() == Some(1), format!("sabotaged run exited with {status}"))?;
    Ok(format!("{} identical body bytes; sabotage → exit 1", report_body(&a).len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("inequality suite", inequality_suite),
        ("equality witnesses", equality_witnesses),
        ("hardy", hardy_criterion),
        ("hilbert", hilbert_criterion),
        ("cosecant identity", cosecant_criterion),
        ("duality", duality_criterion),
        ("counting-measure equivalence", counting_criterion),
        ("norm limits", norm_limit_criterion),
        ("embedding strictness", embedding_criterion),
        ("gt factorization", gt_criterion),
        ("gamma log-convexity", gamma_criterion),
        ("determinism", determinism_criterion),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{:.1} s]", i + 1, start.elapsed().as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
