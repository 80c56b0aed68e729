//! Weighted sequence spaces: norms of finite prefixes with certified tail
//! enclosures, the sup norm, norm limits, the strict embedding, the dual
//! functional norm, dyadic approximation and the diagonal separator.
//!
//! Entries are stored already weighted (`ω(α_k, β_k)·x_k`), so nothing here
//! knows about the bilinear form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::{conjugate_exponent, ExponentValue};
use crate::report::{InequalityReport, DEFAULT_REL_TOL};

/// Envelope for entries beyond the stored prefix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Tail {
    None,
    /// `|x_n| ≤ c·n^{−s}` for every `n` past the prefix (1-based index).
    PowerDecay { c: f64, s: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSequence {
    entries: Vec<f64>,
    tail: Tail,
}

/// A norm value together with an additive bound on what the unstored tail
/// can contribute: the true norm lies in `[value, value + tail_error]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEnclosure {
    pub value: f64,
    pub tail_error: f64,
}

impl WeightedSequence {
    /// Finite sequence with no tail.
    pub fn finite(entries: Vec<f64>) -> Result<Self> {
        Self::with_tail(entries, Tail::None)
    }

    pub fn with_tail(entries: Vec<f64>, tail: Tail) -> Result<Self> {
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::Arg(format!("entry {i} is not finite")));
        }
        if let Tail::PowerDecay { c, s } = tail {
            if !(c > 0.0 && c.is_finite() && s > 0.0 && s.is_finite()) {
                return Err(Error::Arg(format!("power_decay needs c > 0 and s > 0, got c={c}, s={s}")));
            }
            // The last stored entry must already sit under the envelope.
            if let Some(&last) = entries.last() {
                let n = entries.len() as f64;
                let bound = c * n.powf(-s);
                if last.abs() > bound * (1.0 + 1e-12) {
                    return Err(Error::Arg(format!(
                        "last entry {last} exceeds the envelope {bound} at n = {n}"
                    )));
                }
            }
        }
        Ok(Self { entries, tail })
    }

    /// Weights applied entrywise: `w_k · x_k`.
    pub fn weighted(weights: &[f64], xs: &[f64]) -> Result<Self> {
        if weights.len() != xs.len() {
            return Err(Error::Shape(format!("{} weights for {} entries", weights.len(), xs.len())));
        }
        Self::finite(weights.iter().zip(xs).map(|(w, x)| w * x).collect())
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        let tail = match self.tail {
            Tail::PowerDecay { c: tc, s } if c != 0.0 => Tail::PowerDecay { c: tc * c.abs(), s },
            _ => Tail::None,
        };
        Self::with_tail(self.entries.iter().map(|x| c * x).collect(), tail)
    }
}

/// `Σ |x_k|^e` folded left to right. Shared by the sequence and counting-measure paths.
pub(crate) fn power_sum(values: &[f64], e: f64) -> Result<f64> {
    let mut acc = 0.0;
    for (index, v) in values.iter().enumerate() {
        let term = v.abs().powf(e);
        if !term.is_finite() {
            return Err(Error::Overflow { index });
        }
        acc += term;
    }
    Ok(acc)
}

/// `Σ w_k |x_k|^e` folded left to right; `None` weights reduce to [`power_sum`].
pub(crate) fn weighted_power_sum(values: &[f64], weights: Option<&[f64]>, e: f64) -> Result<f64> {
    let Some(w) = weights else {
        return power_sum(values, e);
    };
    let mut acc = 0.0;
    for (index, (v, wk)) in values.iter().zip(w).enumerate() {
        let term = wk * v.abs().powf(e);
        if !term.is_finite() {
            return Err(Error::Overflow { index });
        }
        acc += term;
    }
    Ok(acc)
}

/// Weighted `L_e` norm of samples; for `Inf`, the max over positive-weight entries.
pub fn weighted_lp_norm(values: &[f64], weights: Option<&[f64]>, e: ExponentValue) -> Result<f64> {
    if let Some(w) = weights {
        if w.len() != values.len() {
            return Err(Error::Shape(format!("{} weights for {} samples", w.len(), values.len())));
        }
    }
    match (e, weights) {
        (ExponentValue::Inf, Some(w)) => Ok(values
            .iter()
            .zip(w)
            .filter(|(_, wk)| **wk > 0.0)
            .fold(0.0f64, |m, (v, _)| m.max(v.abs()))),
        (ExponentValue::Inf, None) => Ok(max_abs(values)),
        (ExponentValue::Finite(p), _) => Ok(weighted_power_sum(values, weights, p)?.powf(1.0 / p)),
    }
}

pub(crate) fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `(Σ|x_k|^e)^{1/e}` over a plain slice; `Inf` gives `max |x_k|`.
pub fn lp_norm(values: &[f64], e: ExponentValue) -> Result<f64> {
    match e {
        ExponentValue::Inf => Ok(max_abs(values)),
        ExponentValue::Finite(p) => Ok(power_sum(values, p)?.powf(1.0 / p)),
    }
}

/// Bound on `Σ_{n>N} (c n^{-s})^e ≤ ∫_N^∞ c^e t^{−es} dt`.
fn envelope_tail_mass(c: f64, s: f64, e: f64, n: usize) -> Result<f64> {
    let es = e * s;
    if es <= 1.0 {
        return Err(Error::Tail(format!(
            "envelope n^-{s} is not {e}-summable (e·s = {es} <= 1)"
        )));
    }
    if n == 0 {
        // Nothing stored: bound the first term directly and integrate from 1.
        return Ok(c.powf(e) * (1.0 + 1.0 / (es - 1.0)));
    }
    Ok(c.powf(e) * (n as f64).powf(1.0 - es) / (es - 1.0))
}

/// Norm of the sequence with a certified tail enclosure.
pub fn seq_norm(x: &WeightedSequence, e: ExponentValue) -> Result<NormEnclosure> {
    match e {
        ExponentValue::Inf => {
            let value = max_abs(&x.entries);
            let tail_error = match x.tail {
                Tail::None => 0.0,
                Tail::PowerDecay { c, s } => {
                    let next = c * ((x.len() + 1) as f64).powf(-s);
                    (next - value).max(0.0)
                }
            };
            Ok(NormEnclosure { value, tail_error })
        }
        ExponentValue::Finite(p) => {
            let prefix = power_sum(&x.entries, p)?;
            let value = prefix.powf(1.0 / p);
            let tail_error = match x.tail {
                Tail::None => 0.0,
                Tail::PowerDecay { c, s } => {
                    let mass = envelope_tail_mass(c, s, p, x.len())?;
                    (prefix + mass).powf(1.0 / p) - value
                }
            };
            Ok(NormEnclosure { value, tail_error })
        }
    }
}

/// Norms at an increasing list of finite exponents.
pub fn norm_limit_profile(x: &WeightedSequence, exponents: &[f64]) -> Result<Vec<(f64, f64)>> {
    if exponents.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Arg("exponents must be strictly increasing".into()));
    }
    exponents
        .iter()
        .map(|&e| {
            let ev = ExponentValue::new(e)?;
            if ev.is_inf() {
                return Err(Error::Arg("profile exponents must be finite".into()));
            }
            Ok((e, seq_norm(x, ev)?.value))
        })
        .collect()
}

/// `‖x‖_∞ ≤ ‖x‖_e ≤ N^{1/e}‖x‖_∞` for a finite prefix of length `N`.
pub fn sandwich_holds(x: &[f64], e: f64) -> Result<bool> {
    let sup = max_abs(x);
    let norm = lp_norm(x, ExponentValue::new(e)?)?;
    let upper = (x.len() as f64).powf(1.0 / e) * sup;
    // powf rounding on both sides is a few ulps.
    let slack = 4.0 * f64::EPSILON * upper;
    Ok(sup <= norm + slack && norm <= upper + slack)
}

/// `‖x‖_q ≤ ‖x‖_p` for `p < q` on the stored prefix.
pub fn embedding_check(x: &WeightedSequence, p: ExponentValue, q: ExponentValue) -> Result<InequalityReport> {
    let (pv, qv) = match (p, q) {
        (ExponentValue::Finite(a), ExponentValue::Finite(b)) if a < b => (a, b),
        _ => return Err(Error::Arg(format!("embedding needs 1 <= p < q < inf, got p={p}, q={q}"))),
    };
    let lhs = lp_norm(&x.entries, ExponentValue::Finite(qv))?;
    let rhs = lp_norm(&x.entries, ExponentValue::Finite(pv))?;
    Ok(InequalityReport::with_default_tol(lhs, rhs))
}

/// `x_n = n^{−1/p}` for `n = 1..=N`: in `ℓ_q` for every `q > p` but not in `ℓ_p`.
///
/// Stored without a tail; the object only makes sense as a finite probe.
pub fn counterexample_sequence(p: ExponentValue, n: usize) -> Result<WeightedSequence> {
    let pv = p
        .finite()
        .ok_or_else(|| Error::Arg("counterexample needs a finite exponent".into()))?;
    WeightedSequence::finite((1..=n).map(|k| (k as f64).powf(-1.0 / pv)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingStrictness {
    pub lengths: Vec<usize>,
    /// `‖x‖_q` on the prefixes.
    pub q_norms: Vec<f64>,
    /// `Σ |x_n|^p` on the prefixes.
    pub p_power_sums: Vec<f64>,
    /// Every successive `q`-norm change stayed within the Cauchy tolerance.
    pub q_stable: bool,
    /// Some successive `p`-power-sum change exceeded the Cauchy tolerance.
    pub p_divergent: bool,
}

/// Cauchy tolerance for the doubling-based divergence test.
pub const CAUCHY_TOL: f64 = 1e-3;

/// Doubles the prefix `doublings` times from `n0` and tracks `‖x‖_q` and the
/// `p`-power sums of the counterexample sequence built at `p`.
pub fn embedding_strictness(p: ExponentValue, q: ExponentValue, n0: usize, doublings: usize) -> Result<EmbeddingStrictness> {
    let (pv, qv) = match (p, q) {
        (ExponentValue::Finite(a), ExponentValue::Finite(b)) if a < b => (a, b),
        _ => return Err(Error::Arg(format!("embedding needs 1 <= p < q < inf, got p={p}, q={q}"))),
    };
    let lengths: Vec<usize> = (0..=doublings).map(|k| n0 << k).collect();
    let full = counterexample_sequence(p, *lengths.last().expect("non-empty"))?;
    let mut q_norms = Vec::new();
    let mut p_power_sums = Vec::new();
    for &n in &lengths {
        let prefix = &full.entries[..n];
        q_norms.push(power_sum(prefix, qv)?.powf(1.0 / qv));
        p_power_sums.push(power_sum(prefix, pv)?);
    }
    let q_stable = q_norms.windows(2).all(|w| (w[1] - w[0]).abs() < CAUCHY_TOL);
    let p_divergent = p_power_sums.windows(2).any(|w| (w[1] - w[0]).abs() >= CAUCHY_TOL);
    Ok(EmbeddingStrictness { lengths, q_norms, p_power_sums, q_stable, p_divergent })
}

/// Operator norm of `x ↦ Σ b_k x_k` on `ℓ_p`, by two routes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualNorm {
    /// `‖b‖_q` with `q` the conjugate of `p`.
    pub formula: f64,
    /// `Σ b_k ξ_k / ‖ξ‖_p` at the extremal vector `ξ`.
    pub extremal: f64,
    pub extremal_vector: Vec<f64>,
}

const DUAL_AGREEMENT: f64 = 1e-9;

pub fn dual_functional_norm(b: &[f64], p: ExponentValue) -> Result<DualNorm> {
    if let Some(i) = b.iter().position(|v| !v.is_finite()) {
        return Err(Error::Arg(format!("coefficient {i} is not finite")));
    }
    let (formula, xi) = match p {
        ExponentValue::Finite(pv) if pv == 1.0 => {
            // (ℓ₁)* = ℓ_∞: the norm is attained at a unit vector.
            let (idx, sup) = b
                .iter()
                .enumerate()
                .fold((0, 0.0f64), |(bi, bm), (i, v)| if v.abs() > bm { (i, v.abs()) } else { (bi, bm) });
            let mut xi = vec![0.0; b.len()];
            if sup > 0.0 {
                xi[idx] = b[idx].signum();
            }
            (sup, xi)
        }
        ExponentValue::Inf => {
            let xi = b.iter().map(|v| if *v == 0.0 { 0.0 } else { v.signum() }).collect();
            (b.iter().map(|v| v.abs()).sum(), xi)
        }
        ExponentValue::Finite(_) => {
            let q = conjugate_exponent(p)?.as_f64();
            // ξ_k = |b_k|^q / b_k, zero where b_k = 0.
            let xi = b
                .iter()
                .map(|&v| if v == 0.0 { 0.0 } else { v.signum() * v.abs().powf(q - 1.0) })
                .collect();
            (lp_norm(b, ExponentValue::Finite(q))?, xi)
        }
    };
    let xi_norm = lp_norm(&xi, p)?;
    let extremal = if xi_norm == 0.0 {
        0.0
    } else {
        b.iter().zip(&xi).map(|(a, x)| a * x).sum::<f64>() / xi_norm
    };
    let scale = formula.abs().max(extremal.abs());
    if (formula - extremal).abs() > DUAL_AGREEMENT * scale {
        return Err(Error::Inconsistency(format!(
            "dual norm formula {formula} disagrees with extremal evaluation {extremal}"
        )));
    }
    Ok(DualNorm { formula, extremal, extremal_vector: xi })
}

/// Finitely supported vector of dyadic rationals `numerator / 2^k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicApproximation {
    /// The dyadic values themselves; each is exactly `m / 2^denominator_log2`.
    pub values: Vec<f64>,
    pub denominator_log2: i32,
    /// Certified `‖x − r‖_p` upper bound (prefix part is computed exactly).
    pub distance: f64,
}

impl DyadicApproximation {
    pub fn numerators(&self) -> Vec<f64> {
        let scale = 2f64.powi(self.denominator_log2);
        self.values.iter().map(|v| v * scale).collect()
    }
}

/// Finitely supported dyadic vector within `eps` of `x` in `ℓ_p`.
///
/// Picks the shortest support `n` whose remaining mass is below `eps^p/2`,
/// then rounds each kept entry to a dyadic rational with error below
/// `eps/(2^n)^{1/p}`, so the kept part also contributes less than `eps^p/2`.
pub fn rational_approximation(x: &WeightedSequence, p: ExponentValue, eps: f64) -> Result<DyadicApproximation> {
    let pv = p
        .finite()
        .ok_or_else(|| Error::Arg("rational approximation needs a finite exponent".into()))?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Arg(format!("eps must be positive, got {eps}")));
    }
    let budget = eps.powf(pv) / 2.0;
    let envelope = match x.tail {
        Tail::None => 0.0,
        Tail::PowerDecay { c, s } => {
            if s <= 1.0 {
                return Err(Error::Tail(format!(
                    "power_decay exponent s = {s} must exceed 1 for dyadic approximation"
                )));
            }
            envelope_tail_mass(c, s, pv, x.len())?
        }
    };
    if envelope >= budget {
        return Err(Error::Tail(format!(
            "envelope mass {envelope:e} beyond the stored prefix exceeds eps^p/2 = {budget:e}"
        )));
    }

    // suffix[n] = Σ_{k≥n} |x_k|^p over stored entries.
    let terms: Vec<f64> = x.entries.iter().map(|v| v.abs().powf(pv)).collect();
    let mut suffix = vec![0.0; terms.len() + 1];
    for i in (0..terms.len()).rev() {
        suffix[i] = suffix[i + 1] + terms[i];
    }
    let n = (0..=terms.len())
        .find(|&n| suffix[n] + envelope < budget)
        .expect("n = len always satisfies the budget");

    let (values, k) = if n == 0 {
        (Vec::new(), 0)
    } else {
        // δ = eps · 2^{−n/p}; choose 2^{−k−1} < δ so round-to-nearest is within δ.
        let log2_delta = eps.log2() - n as f64 / pv;
        let k = (-log2_delta).floor() as i32;
        let k = k.clamp(-1000, 1070);
        let scale = 2f64.powi(k);
        let values: Vec<f64> = x.entries[..n].iter().map(|v| (v * scale).round() / scale).collect();
        (values, k)
    };

    let kept: f64 = values
        .iter()
        .zip(&x.entries)
        .map(|(r, v)| (v - r).abs().powf(pv))
        .sum();
    let distance = (kept + suffix[n] + envelope).powf(1.0 / pv);
    if distance >= eps {
        return Err(Error::Inconsistency(format!(
            "dyadic approximation distance {distance} is not below eps = {eps}"
        )));
    }
    Ok(DyadicApproximation { values, denominator_log2: k, distance })
}

/// Builds `x` with `x_k = 0` if `|c_k[k]| ≥ 1`, else `c_k[k] + 1`; its sup
/// distance to every candidate is at least 1.
pub fn diagonal_separator(candidates: &[WeightedSequence], n: usize) -> Result<WeightedSequence> {
    if candidates.len() != n {
        return Err(Error::Shape(format!("{} candidates for n = {n}", candidates.len())));
    }
    let mut out = Vec::with_capacity(n);
    for (k, cand) in candidates.iter().enumerate() {
        let diag = *cand.entries.get(k).ok_or_else(|| {
            Error::Shape(format!("candidate {k} has only {} stored entries", cand.len()))
        })?;
        out.push(if diag.abs() >= 1.0 { 0.0 } else { unit_step_above(diag) });
    }
    WeightedSequence::finite(out)
}

/// `diag + 1`, nudged up so that the computed difference is at least 1.
fn unit_step_above(diag: f64) -> f64 {
    let mut v = diag + 1.0;
    while v - diag < 1.0 {
        v = v.next_up();
    }
    v
}

/// `max_k |x_k − y_k|` over the common stored prefix.
pub fn sup_distance(x: &WeightedSequence, y: &WeightedSequence) -> f64 {
    x.entries
        .iter()
        .zip(&y.entries)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
}

/// Minkowski check shared with the property harness.
pub fn triangle_report(x: &[f64], y: &[f64], e: ExponentValue) -> Result<InequalityReport> {
    if x.len() != y.len() {
        return Err(Error::Arg(format!("lengths {} and {} differ", x.len(), y.len())));
    }
    let sum: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    let lhs = lp_norm(&sum, e)?;
    let rhs = lp_norm(x, e)? + lp_norm(y, e)?;
    Ok(InequalityReport::new(lhs, rhs, DEFAULT_REL_TOL, 0.0))
}
