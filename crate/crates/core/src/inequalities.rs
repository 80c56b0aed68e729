//! Direct numeric checks of the discrete inequalities with their sharp
//! constants: Hölder, Minkowski, the n-factor Hölder, Hardy, Hilbert and its
//! kernel bound, the cosecant partial fractions and the tangent lemma.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::{conjugate_exponent, ExponentValue};
use crate::quadrature::GaussLegendre;
use crate::report::{InequalityReport, DEFAULT_REL_TOL};
use crate::sequence_space::{lp_norm, power_sum, weighted_lp_norm, WeightedSequence};

/// Largest `M·N` accepted by the Hilbert double sum.
pub const HILBERT_MAX_TERMS: u64 = 100_000_000;

/// Tolerance on `Σ 1/e_k = 1` for the n-factor Hölder inequality.
pub const CONJUGACY_TOL: f64 = 1e-10;

fn same_len(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Arg(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    Ok(())
}

/// `Σ|x_k y_k| ≤ ‖x‖_e ‖y‖_{e'}` on the stored prefixes.
pub fn holder_seq(x: &WeightedSequence, y: &WeightedSequence, e: ExponentValue) -> Result<InequalityReport> {
    e.interior()?;
    let (x, y) = (x.entries(), y.entries());
    same_len(x, y)?;
    let lhs = x.iter().zip(y).map(|(a, b)| (a * b).abs()).sum();
    let rhs = lp_norm(x, e)? * lp_norm(y, conjugate_exponent(e)?)?;
    Ok(InequalityReport::with_default_tol(lhs, rhs))
}

/// `‖x + y‖_e ≤ ‖x‖_e + ‖y‖_e`.
pub fn minkowski_seq(x: &WeightedSequence, y: &WeightedSequence, e: ExponentValue) -> Result<InequalityReport> {
    let (x, y) = (x.entries(), y.entries());
    same_len(x, y)?;
    let sum: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    let lhs = lp_norm(&sum, e)?;
    let rhs = lp_norm(x, e)? + lp_norm(y, e)?;
    Ok(InequalityReport::with_default_tol(lhs, rhs))
}

/// `‖Π f_k‖₁ ≤ Π ‖f_k‖_{e_k}` when `Σ 1/e_k = 1`.
///
/// `weights` turns the sums into integrals against a discrete measure; `None`
/// is the counting measure.
pub fn generalized_holder(
    factors: &[&[f64]],
    exponents: &[ExponentValue],
    weights: Option<&[f64]>,
) -> Result<InequalityReport> {
    if factors.len() != exponents.len() || factors.is_empty() {
        return Err(Error::Arg(format!(
            "{} factors for {} exponents",
            factors.len(),
            exponents.len()
        )));
    }
    let sum: f64 = exponents.iter().map(|e| e.reciprocal()).sum();
    if (sum - 1.0).abs() > CONJUGACY_TOL {
        return Err(Error::Conjugacy { sum });
    }
    let n = factors[0].len();
    if let Some(bad) = factors.iter().find(|f| f.len() != n) {
        return Err(Error::Shape(format!("factor of length {} next to length {n}", bad.len())));
    }
    if let Some(w) = weights {
        if w.len() != n {
            return Err(Error::Shape(format!("{} weights for {n} samples", w.len())));
        }
    }
    let lhs = (0..n)
        .map(|i| {
            let prod: f64 = factors.iter().map(|f| f[i].abs()).product();
            weights.map_or(1.0, |w| w[i]) * prod
        })
        .sum();
    let mut rhs = 1.0;
    for (f, &e) in factors.iter().zip(exponents) {
        rhs *= weighted_lp_norm(f, weights, e)?;
    }
    Ok(InequalityReport::with_default_tol(lhs, rhs))
}

/// `(e/(e−1))^e`.
pub fn hardy_constant(e: f64) -> f64 {
    (e / (e - 1.0)).powf(e)
}

/// `Σ_n ((1/n) Σ_{k≤n} a_k)^e ≤ (e/(e−1))^e Σ a_n^e` on the prefix.
pub fn hardy(a: &WeightedSequence, e: ExponentValue) -> Result<InequalityReport> {
    let e = e.interior()?;
    let a = a.entries();
    if let Some((index, &value)) = a.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::Positivity { index, value });
    }
    let mut running = 0.0;
    let mut lhs = 0.0;
    for (k, v) in a.iter().enumerate() {
        running += v;
        lhs += (running / (k + 1) as f64).powf(e);
    }
    let rhs = hardy_constant(e) * power_sum(a, e)?;
    Ok(InequalityReport::with_default_tol(lhs, rhs))
}

/// Hardy's inequality for the full infinite sequence `a_n = n^{−s}`, `s > 1/e`.
///
/// The first `n` terms are summed exactly; the rest of both sides comes from
/// Euler–Maclaurin. Partial sums beyond the prefix use the asymptotic
/// expansion `P(x) = C + x^{1−s}/(1−s) + x^{−s}/2 − s x^{−s−1}/12 + …`
/// anchored at the exact `P_n`, and the left tail integral is evaluated in
/// logarithmic variables with Gauss–Legendre panels.
///
/// Truncated prefixes converge too slowly near `s = 1/e` to rank the family
/// reliably; this evaluation does not have that problem. `tail_error` carries
/// the size of the first omitted correction terms.
pub fn hardy_power_family(s: f64, e: ExponentValue, n: usize) -> Result<InequalityReport> {
    let e = e.interior()?;
    if !(s.is_finite() && s * e > 1.0) {
        return Err(Error::Tail(format!("n^-{s} is not {e}-summable")));
    }
    if n < 16 {
        return Err(Error::Arg(format!("prefix length {n} too short for the asymptotic tail")));
    }

    let mut running = 0.0;
    let mut lhs_head = 0.0;
    let mut rhs_head = 0.0;
    for k in (1..=n).map(|k| k as f64) {
        let a = k.powf(-s);
        running += a;
        lhs_head += (running / k).powf(e);
        rhs_head += a.powf(e);
    }

    let nf = n as f64;
    let tail = PartialSumTail::new(s, running, nf);
    let ln_n = nf.ln();
    let g = |x: f64| (e * tail.ln_mean(x.ln())).exp();

    // ∫_n^∞ G(x) dx with x = n·e^u; the integrand decays like e^{−r u}.
    let rate = if s < 1.0 { e * s - 1.0 } else { e - 1.0 };
    let integrand = |u: f64| (e * tail.ln_mean(ln_n + u) + ln_n + u).exp();
    let u_max = (45.0 / rate).max(20.0);
    let panels = (u_max / 0.5).ceil() as usize;
    if panels > 200_000 {
        return Err(Error::Tail(format!("tail integrand decays too slowly (rate {rate})")));
    }
    let width = u_max / panels as f64;
    let edges: Vec<f64> = (0..=panels).map(|i| i as f64 * width).collect();
    let integral = GaussLegendre::new(16).integrate_panels(integrand, &edges);
    let coarse = GaussLegendre::new(10).integrate_panels(integrand, &edges);
    let beyond = integrand(u_max) / rate;

    // Σ_{k>n} G(k) = ∫_n^∞ G − G(n)/2 − G'(n)/12 + G'''(n)/720 − …
    let g_n = g(nf);
    let dg_n = e * tail.mean(nf).powf(e - 1.0) * tail.mean_derivative(nf);
    let h = 0.01 * nf;
    let d3g_n = (g(nf + 2.0 * h) - 2.0 * g(nf + h) + 2.0 * g(nf - h) - g(nf - 2.0 * h)) / (2.0 * h * h * h);
    let lhs_tail = integral + beyond - g_n / 2.0 - dg_n / 12.0 + d3g_n / 720.0;

    // Σ_{k>n} k^{−σ}, σ = s·e, by the same expansion.
    let sigma = s * e;
    let rhs_tail = nf.powf(1.0 - sigma) / (sigma - 1.0) - nf.powf(-sigma) / 2.0
        + sigma * nf.powf(-sigma - 1.0) / 12.0
        - sigma * (sigma + 1.0) * (sigma + 2.0) * nf.powf(-sigma - 3.0) / 720.0;

    let lhs = lhs_head + lhs_tail;
    let rhs = hardy_constant(e) * (rhs_head + rhs_tail);
    let tail_error = (d3g_n / 720.0).abs() + beyond + (integral - coarse).abs() + tail.expansion_error(nf, e);
    Ok(InequalityReport::new(lhs, rhs, DEFAULT_REL_TOL, tail_error))
}

/// Asymptotic partial sums `P(x) ≈ Σ_{k≤x} k^{−s}` past an exact anchor.
struct PartialSumTail {
    s: f64,
    c: f64,
}

impl PartialSumTail {
    fn new(s: f64, anchor_sum: f64, anchor: f64) -> Self {
        let mut t = Self { s, c: 0.0 };
        t.c = anchor_sum - t.expansion(anchor.ln());
        t
    }

    /// `x^{1−s}/(1−s) + x^{−s}/2 − s x^{−s−1}/12 + s(s+1)(s+2) x^{−s−3}/720` at `x = e^L`.
    fn expansion(&self, l: f64) -> f64 {
        let s = self.s;
        let lead = if (s - 1.0).abs() < 1e-12 { l } else { ((1.0 - s) * l).exp() / (1.0 - s) };
        lead + 0.5 * (-s * l).exp() - s / 12.0 * (-(s + 1.0) * l).exp()
            + s * (s + 1.0) * (s + 2.0) / 720.0 * (-(s + 3.0) * l).exp()
    }

    /// `ln(P(x)/x)` at `x = e^L`, stable for very large `L`.
    fn ln_mean(&self, l: f64) -> f64 {
        let s = self.s;
        if s < 1.0 {
            // Factor out the growing x^{1−s} so nothing overflows.
            let lead = (1.0 - s) * l;
            let rest = 1.0 / (1.0 - s) + self.c * (-lead).exp() + 0.5 * (-l).exp()
                - s / 12.0 * (-2.0 * l).exp()
                + s * (s + 1.0) * (s + 2.0) / 720.0 * (-4.0 * l).exp();
            lead + rest.ln() - l
        } else {
            (self.c + self.expansion(l)).ln() - l
        }
    }

    fn mean(&self, x: f64) -> f64 {
        self.ln_mean(x.ln()).exp()
    }

    /// `d/dx (P(x)/x)`.
    fn mean_derivative(&self, x: f64) -> f64 {
        let s = self.s;
        let p = self.c + self.expansion(x.ln());
        let dp = x.powf(-s) - 0.5 * s * x.powf(-s - 1.0) + s * (s + 1.0) / 12.0 * x.powf(-s - 2.0);
        (dp * x - p) / (x * x)
    }

    /// Size of the first dropped expansion term, propagated to `Σ G`.
    fn expansion_error(&self, x: f64, e: f64) -> f64 {
        let s = self.s;
        let dropped = s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) / 30240.0 * x.powf(-s - 5.0);
        // Relative perturbation of P carried through G = (P/x)^e and summed over k > x.
        let rel = dropped / (self.c + self.expansion(x.ln())).abs();
        let g = self.mean(x).powf(e);
        e * rel * g * x
    }
}

/// Result of the π/sin kernel bound: the exact prefix, the certified tail
/// majorant, and the report on their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelBound {
    pub partial_sum: f64,
    pub tail_bound: f64,
    pub report: InequalityReport,
}

/// `Σ_{n≥1} m^{1/e} / (n^{1/e}(m+n)) ≤ π/sin(π/e)`.
///
/// The sum past `N` is replaced by `∫_N^∞` of the (decreasing) summand, so
/// `report.lhs` is a rigorous upper bound for the infinite sum.
pub fn hilbert_kernel_bound(m: u64, e: ExponentValue, n: usize) -> Result<KernelBound> {
    let e = e.interior()?;
    if m == 0 || n == 0 {
        return Err(Error::Arg("m and N must be positive".into()));
    }
    let mf = m as f64;
    let a = 1.0 / e;
    let scale = mf.powf(a);
    // Smallest terms first.
    let partial_sum: f64 = (1..=n).rev().map(|k| {
        let k = k as f64;
        scale * k.powf(-a) / (mf + k)
    }).sum();

    // ∫_N^∞ m^a t^{−a}/(m+t) dt = ∫_Z^∞ z^{−a}/(1+z) dz with Z = N/m. For
    // Z > 1 the expansion Σ (−1)^j Z^{−a−j}/(a+j) alternates with shrinking
    // terms, so stopping after a positive term gives an upper bound.
    let z = n as f64 / mf;
    let tail_bound = if z > 1.0 {
        z.powf(-a) / a - z.powf(-a - 1.0) / (a + 1.0) + z.powf(-a - 2.0) / (a + 2.0)
    } else {
        scale * e * (n as f64).powf(-a)
    };
    let rhs = PI / (PI / e).sin();
    let report = InequalityReport::with_default_tol(partial_sum + tail_bound, rhs);
    Ok(KernelBound { partial_sum, tail_bound, report })
}

/// `Σ_{m,n} a_m b_n/(m+n) ≤ π/sin(π/e)·‖a‖_e‖b‖_{e'}`.
pub fn hilbert(a: &WeightedSequence, b: &WeightedSequence, e: ExponentValue) -> Result<InequalityReport> {
    hilbert_with_cap(a, b, e, HILBERT_MAX_TERMS)
}

pub fn hilbert_with_cap(
    a: &WeightedSequence,
    b: &WeightedSequence,
    e: ExponentValue,
    max_terms: u64,
) -> Result<InequalityReport> {
    let ev = e.interior()?;
    let (a, b) = (a.entries(), b.entries());
    let terms = a.len() as u64 * b.len() as u64;
    if terms > max_terms {
        return Err(Error::Size(format!(
            "double sum of {}x{} = {terms} terms exceeds the cap {max_terms}",
            a.len(),
            b.len()
        )));
    }
    for v in [a, b] {
        if let Some((index, &value)) = v.iter().enumerate().find(|(_, x)| !(**x >= 0.0)) {
            return Err(Error::Positivity { index, value });
        }
    }
    let lhs: f64 = a
        .iter()
        .enumerate()
        .map(|(i, am)| {
            let m = (i + 1) as f64;
            am * b.iter().enumerate().map(|(j, bn)| bn / (m + (j + 1) as f64)).sum::<f64>()
        })
        .sum();
    let rhs = PI / (PI / ev).sin() * lp_norm(a, e)? * lp_norm(b, conjugate_exponent(e)?)?;
    Ok(InequalityReport::with_default_tol(lhs, rhs))
}

/// Partial sum of `π/sin(πz) = 1/z + Σ_{n≥1} (−1)^n (1/(z+n) + 1/(z−n))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CosecantSum {
    pub approximation: f64,
    pub truth: f64,
    pub abs_error: f64,
    /// `|term_{N+1}|`, which bounds the remainder of the alternating series.
    pub next_term: f64,
}

pub fn cosecant_partial_fraction(z: f64, n: usize) -> Result<CosecantSum> {
    if !(z > 0.0 && z < 1.0) {
        return Err(Error::Arg(format!("z = {z} must lie in (0, 1)")));
    }
    // Paired terms 2z/(z²−k²)·(−1)^k, summed from the small end.
    let paired = |k: usize| {
        let kf = k as f64;
        let t = 2.0 * z / (z * z - kf * kf);
        if k % 2 == 0 { t } else { -t }
    };
    let series: f64 = (1..=n).rev().map(paired).sum();
    let approximation = 1.0 / z + series;
    let truth = PI / (PI * z).sin();
    Ok(CosecantSum {
        approximation,
        truth,
        abs_error: (approximation - truth).abs(),
        next_term: paired(n + 1).abs(),
    })
}

/// `a^e + e·t·b·a^{e−1} ≤ (a + t b)^e` for nonnegative `a, b, t`.
///
/// At `a = 0` the middle term is taken as 0 (its limit for `e > 1`).
pub fn tangent_lemma_check(a: f64, b: f64, t: f64, e: ExponentValue) -> Result<InequalityReport> {
    let e = e
        .finite()
        .ok_or_else(|| Error::Arg("tangent lemma needs a finite exponent".into()))?;
    for (index, value) in [a, b, t].into_iter().enumerate() {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::Positivity { index, value });
        }
    }
    let slope = if a == 0.0 { 0.0 } else { e * t * b * a.powf(e - 1.0) };
    let lhs = a.powf(e) + slope;
    let rhs = (a + t * b).powf(e);
    Ok(InequalityReport::with_default_tol(lhs, rhs))
}
