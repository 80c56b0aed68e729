//! Lebesgue spaces of sampled functions over finitely supported measures.
//!
//! A measure is a list of nodes with nonnegative weights (quadrature cells or
//! unit point masses); functions are sample vectors aligned with the nodes.
//! Two functions equal almost everywhere are the same vector here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::{holder_partner, ExponentValue};
use crate::linalg::Matrix;
use crate::quadrature::GaussLegendre;
use crate::report::{InequalityReport, DEFAULT_REL_TOL};
use crate::rng::CounterRng;
use crate::sequence_space::{power_sum, weighted_lp_norm, weighted_power_sum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    Quadrature,
    Counting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasureSpace {
    kind: MeasureKind,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasureSpace {
    pub fn new(kind: MeasureKind, nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::Shape(format!("{} nodes, {} weights", nodes.len(), weights.len())));
        }
        if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::Positivity { index, value });
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::Arg("nodes must be finite".into()));
        }
        match kind {
            MeasureKind::Quadrature => {
                if nodes.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Arg("quadrature nodes must be strictly increasing".into()));
                }
            }
            MeasureKind::Counting => {
                if weights.iter().any(|&w| w != 1.0) {
                    return Err(Error::Arg("counting measure has unit weights".into()));
                }
            }
        }
        Ok(Self { kind, nodes, weights })
    }

    /// Unit masses at `0, 1, …, n−1`.
    pub fn counting(n: usize) -> Self {
        Self { kind: MeasureKind::Counting, nodes: (0..n).map(|i| i as f64).collect(), weights: vec![1.0; n] }
    }

    /// Midpoint rule with `n` equal cells on `[a, b]`.
    pub fn midpoint(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(b > a) || n == 0 {
            return Err(Error::Arg(format!("midpoint grid needs a < b and n > 0 (got [{a}, {b}], n={n})")));
        }
        let h = (b - a) / n as f64;
        let nodes = (0..n).map(|i| a + (i as f64 + 0.5) * h).collect();
        Self::new(MeasureKind::Quadrature, nodes, vec![h; n])
    }

    /// Midpoint cells on `[lower, upper]`, geometrically graded towards `lower`.
    ///
    /// Cell edges are `upper·ratio^k` down to `lower`; each cell is split into
    /// `per_cell` equal midpoint subintervals.
    pub fn graded(lower: f64, upper: f64, ratio: f64, per_cell: usize) -> Result<Self> {
        if !(lower > 0.0 && upper > lower && ratio > 0.0 && ratio < 1.0 && per_cell > 0) {
            return Err(Error::Arg(format!(
                "graded grid needs 0 < lower < upper, 0 < ratio < 1 (got {lower}, {upper}, {ratio})"
            )));
        }
        let mut edges = vec![upper];
        while let Some(&last) = edges.last() {
            let next = last * ratio;
            if next <= lower {
                edges.push(lower);
                break;
            }
            edges.push(next);
        }
        edges.reverse();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for w in edges.windows(2) {
            let h = (w[1] - w[0]) / per_cell as f64;
            for i in 0..per_cell {
                nodes.push(w[0] + (i as f64 + 0.5) * h);
                weights.push(h);
            }
        }
        Self::new(MeasureKind::Quadrature, nodes, weights)
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Common node spacing, if nodes and weights are both uniform.
    pub fn uniform_spacing(&self) -> Option<f64> {
        let n = self.len();
        if n == 0 {
            return None;
        }
        let h = self.weights[0];
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(a.abs());
        if !self.weights.iter().all(|&w| close(w, h)) {
            return None;
        }
        if n > 1 {
            let span = self.nodes[n - 1] - self.nodes[0];
            let step = span / (n - 1) as f64;
            let uniform = self
                .nodes
                .windows(2)
                .all(|w| (w[1] - w[0] - step).abs() <= 1e-9 * step.abs());
            if !uniform || !close(step, h) {
                return None;
            }
        }
        Some(h)
    }

    /// Weights as seen by the shared fold: `None` for counting measure.
    fn fold_weights(&self) -> Option<&[f64]> {
        match self.kind {
            MeasureKind::Counting => None,
            MeasureKind::Quadrature => Some(&self.weights),
        }
    }

    fn check(&self, f: &GridFunction) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::Shape(format!("{} samples on {} nodes", f.len(), self.len())));
        }
        Ok(())
    }

    /// `∫ f dμ`.
    pub fn integrate(&self, f: &GridFunction) -> Result<f64> {
        self.check(f)?;
        Ok(f.samples.iter().zip(&self.weights).map(|(v, w)| w * v).sum())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GridFunction {
    samples: Vec<f64>,
}

impl GridFunction {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Arg(format!("sample {i} is not finite")));
        }
        Ok(Self { samples })
    }

    /// Samples `f` at the nodes of `mu`.
    pub fn sample<F: Fn(f64) -> f64>(mu: &DiscreteMeasureSpace, f: F) -> Result<Self> {
        Self::new(mu.nodes.iter().map(|&x| f(x)).collect())
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        Self::new(self.samples.iter().map(|&v| f(v)).collect())
    }

    fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &Self, f: F) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::Shape(format!("{} vs {} samples", self.len(), other.len())));
        }
        Self::new(self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect())
    }
}

/// `(∫|f|^e dμ)^{1/e}`; for `Inf` the max over positive-weight nodes.
pub fn f_norm(f: &GridFunction, mu: &DiscreteMeasureSpace, e: ExponentValue) -> Result<f64> {
    mu.check(f)?;
    match e {
        ExponentValue::Inf => weighted_lp_norm(&f.samples, Some(&mu.weights), e),
        ExponentValue::Finite(_) => weighted_lp_norm(&f.samples, mu.fold_weights(), e),
    }
}

fn power_integral(f: &GridFunction, mu: &DiscreteMeasureSpace, e: f64) -> Result<f64> {
    mu.check(f)?;
    weighted_power_sum(&f.samples, mu.fold_weights(), e)
}

/// `‖f‖_p^p ≤ μ(X) + ‖f‖_q^q` for `p ≤ q` (split at `|f| = 1`); with `q = ∞`
/// the bound is `μ(X)·‖f‖_∞^p`.
pub fn inclusion_check(
    f: &GridFunction,
    mu: &DiscreteMeasureSpace,
    p: ExponentValue,
    q: ExponentValue,
) -> Result<InequalityReport> {
    if p.as_f64() > q.as_f64() {
        return Err(Error::Arg(format!("inclusion needs p <= q, got p={p}, q={q}")));
    }
    let mass = mu.total_mass();
    let (lhs, rhs) = match (p, q) {
        (ExponentValue::Inf, _) => {
            let sup = f_norm(f, mu, ExponentValue::Inf)?;
            (sup, sup)
        }
        (ExponentValue::Finite(pv), ExponentValue::Inf) => {
            (power_integral(f, mu, pv)?, mass * f_norm(f, mu, ExponentValue::Inf)?.powf(pv))
        }
        (ExponentValue::Finite(pv), ExponentValue::Finite(qv)) => {
            (power_integral(f, mu, pv)?, mass + power_integral(f, mu, qv)?)
        }
    };
    Ok(InequalityReport::with_default_tol(lhs, rhs))
}

/// Growth of `∫|f|^p` and `∫|f|^q` on `[δ_k, 1]` as `δ_k → 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementProbe {
    pub cutoffs: Vec<f64>,
    pub p_masses: Vec<f64>,
    pub q_masses: Vec<f64>,
    /// Every refinement grew the `q`-mass by at least [`DIVERGENCE_GROWTH`].
    pub q_divergent: bool,
    pub p_divergent: bool,
}

/// Per-refinement growth factor that flags a mass as divergent.
pub const DIVERGENCE_GROWTH: f64 = 1.5;

/// Number of successive refinements that must all show growth.
pub const DIVERGENCE_REFINEMENTS: usize = 3;

/// Samples `f` on graded grids over `[δ_k, 1]`, `δ_k = δ_0/shrink^k`, and
/// compares the `p`- and `q`-power integrals across refinements.
///
/// A mass is reported divergent when each of the last
/// [`DIVERGENCE_REFINEMENTS`] refinements multiplied it by at least
/// [`DIVERGENCE_GROWTH`].
pub fn refinement_probe<F: Fn(f64) -> f64>(
    f: F,
    p: f64,
    q: f64,
    delta0: f64,
    shrink: f64,
    refinements: usize,
) -> Result<RefinementProbe> {
    if !(delta0 > 0.0 && delta0 < 1.0 && shrink > 1.0 && refinements >= DIVERGENCE_REFINEMENTS) {
        return Err(Error::Arg("probe needs 0 < δ0 < 1, shrink > 1 and enough refinements".into()));
    }
    let mut probe = RefinementProbe {
        cutoffs: Vec::new(),
        p_masses: Vec::new(),
        q_masses: Vec::new(),
        q_divergent: false,
        p_divergent: false,
    };
    for k in 0..=refinements {
        let delta = delta0 / shrink.powi(k as i32);
        let mu = DiscreteMeasureSpace::graded(delta, 1.0, 0.5, 16)?;
        let fx = GridFunction::sample(&mu, &f)?;
        probe.cutoffs.push(delta);
        probe.p_masses.push(power_integral(&fx, &mu, p)?);
        probe.q_masses.push(power_integral(&fx, &mu, q)?);
    }
    let divergent = |m: &[f64]| {
        m.windows(2)
            .rev()
            .take(DIVERGENCE_REFINEMENTS)
            .all(|w| w[1] >= DIVERGENCE_GROWTH * w[0])
    };
    probe.q_divergent = divergent(&probe.q_masses);
    probe.p_divergent = divergent(&probe.p_masses);
    Ok(probe)
}

/// The same vector's norm via the counting measure and via the sequence fold.
pub fn counting_measure_equiv(x: &[f64], e: ExponentValue) -> Result<(f64, f64)> {
    let mu = DiscreteMeasureSpace::counting(x.len());
    let via_measure = f_norm(&GridFunction::new(x.to_vec())?, &mu, e)?;
    let via_sequence = match e {
        ExponentValue::Inf => x.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        ExponentValue::Finite(p) => power_sum(x, p)?.powf(1.0 / p),
    };
    Ok((via_measure, via_sequence))
}

/// `∫|fg| dμ ≤ ‖f‖_e ‖g‖_{e'}`, with `e = 1` paired to `∞`.
pub fn holder_fn(f: &GridFunction, g: &GridFunction, mu: &DiscreteMeasureSpace, e: ExponentValue) -> Result<InequalityReport> {
    let partner = holder_partner(e)?;
    let prod = f.zip_with(g, |a, b| (a * b).abs())?;
    let lhs = mu.integrate(&prod)?;
    let rhs = f_norm(f, mu, e)? * f_norm(g, mu, partner)?;
    Ok(InequalityReport::with_default_tol(lhs, rhs))
}

/// `g = |f|^{e−1}`, the function attaining equality in Hölder's inequality.
pub fn holder_equality_witness(f: &GridFunction, e: f64) -> Result<GridFunction> {
    f.map(|v| v.abs().powf(e - 1.0))
}

pub fn minkowski_fn(f: &GridFunction, g: &GridFunction, mu: &DiscreteMeasureSpace, e: ExponentValue) -> Result<InequalityReport> {
    let sum = f.zip_with(g, |a, b| a + b)?;
    let lhs = f_norm(&sum, mu, e)?;
    let rhs = f_norm(f, mu, e)? + f_norm(g, mu, e)?;
    Ok(InequalityReport::with_default_tol(lhs, rhs))
}

/// `∫F^t G^{1−t} dμ ≤ (∫F dμ)^t (∫G dμ)^{1−t}` for nonnegative `F, G`.
pub fn interpolation_check(
    big_f: &GridFunction,
    big_g: &GridFunction,
    mu: &DiscreteMeasureSpace,
    t: f64,
) -> Result<InequalityReport> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Arg(format!("t = {t} must lie in (0, 1)")));
    }
    for h in [big_f, big_g] {
        if let Some((index, &value)) = h.samples.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::Positivity { index, value });
        }
    }
    let mixed = big_f.zip_with(big_g, |a, b| a.powf(t) * b.powf(1.0 - t))?;
    let lhs = mu.integrate(&mixed)?;
    let rhs = mu.integrate(big_f)?.powf(t) * mu.integrate(big_g)?.powf(1.0 - t);
    Ok(InequalityReport::with_default_tol(lhs, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualCharacterization {
    pub formula_norm: f64,
    /// Largest `‖fg‖₁/‖g‖_{e'}` over the random trial functions.
    pub sup_estimate: f64,
    /// `‖fg‖₁` at `g = c|f|^{e−1}`, `c = ‖f‖_e^{1−e}` (a unit vector in `L_{e'}`).
    pub extremal_ratio: f64,
}

const EXTREMAL_AGREEMENT: f64 = 1e-9;

/// `‖f‖_e = sup{‖fg‖₁ : ‖g‖_{e'} = 1}`, checked from both sides.
pub fn dual_norm_characterization(
    f: &GridFunction,
    mu: &DiscreteMeasureSpace,
    e: ExponentValue,
    trials: usize,
    rng: &mut CounterRng,
) -> Result<DualCharacterization> {
    let ev = e
        .finite()
        .ok_or_else(|| Error::Arg("dual characterization needs a finite exponent".into()))?;
    let partner = holder_partner(e)?;
    let formula_norm = f_norm(f, mu, e)?;
    if formula_norm == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let c = formula_norm.powf(1.0 - ev);
    let g = f.map(|v| c * v.abs().powf(ev - 1.0))?;
    let extremal_ratio = mu.integrate(&f.zip_with(&g, |a, b| (a * b).abs())?)? / f_norm(&g, mu, partner)?;
    if (extremal_ratio - formula_norm).abs() > EXTREMAL_AGREEMENT * formula_norm {
        return Err(Error::Inconsistency(format!(
            "extremal ratio {extremal_ratio} disagrees with the norm {formula_norm}"
        )));
    }
    let mut sup_estimate = 0.0f64;
    for _ in 0..trials {
        let g = GridFunction::new((0..f.len()).map(|_| rng.normal()).collect())?;
        let denom = f_norm(&g, mu, partner)?;
        if denom > 0.0 {
            let num = mu.integrate(&f.zip_with(&g, |a, b| (a * b).abs())?)?;
            sup_estimate = sup_estimate.max(num / denom);
        }
    }
    Ok(DualCharacterization { formula_norm, sup_estimate, extremal_ratio })
}

/// `‖∫_Y f(·,y) dμ_Y‖_{L_e(X)} ≤ ∫_Y ‖f(·,y)‖_{L_e(X)} dμ_Y`.
///
/// `f` has one row per `X` node and one column per `Y` node.
pub fn integral_minkowski(
    f: &Matrix,
    mu_x: &DiscreteMeasureSpace,
    mu_y: &DiscreteMeasureSpace,
    e: ExponentValue,
) -> Result<InequalityReport> {
    if f.rows() != mu_x.len() || f.cols() != mu_y.len() {
        return Err(Error::Shape(format!(
            "{}x{} samples on a {}x{} grid",
            f.rows(),
            f.cols(),
            mu_x.len(),
            mu_y.len()
        )));
    }
    let inner = GridFunction::new((0..f.rows()).map(|i| {
        f.row(i).iter().zip(mu_y.weights()).map(|(v, w)| w * v).sum()
    }).collect())?;
    let lhs = f_norm(&inner, mu_x, e)?;
    let mut rhs = 0.0;
    for (j, w) in mu_y.weights().iter().enumerate() {
        let column = GridFunction::new((0..f.rows()).map(|i| f[(i, j)]).collect())?;
        rhs += w * f_norm(&column, mu_x, e)?;
    }
    Ok(InequalityReport::with_default_tol(lhs, rhs))
}

/// Circular convolution `(k∗f)_i = h Σ_j k_j f_{(i−j) mod n}` on a uniform grid.
pub fn circular_convolution(k: &GridFunction, f: &GridFunction, h: f64) -> Result<GridFunction> {
    let n = f.len();
    if k.len() != n {
        return Err(Error::Shape(format!("kernel has {} samples, function {n}", k.len())));
    }
    GridFunction::new(
        (0..n)
            .map(|i| h * (0..n).map(|j| k.samples[j] * f.samples[(i + n - j) % n]).sum::<f64>())
            .collect(),
    )
}

/// `‖k∗f‖_e ≤ ‖k‖₁‖f‖_e` with circular convolution.
pub fn convolution_young(
    k: &GridFunction,
    f: &GridFunction,
    mu: &DiscreteMeasureSpace,
    e: ExponentValue,
) -> Result<InequalityReport> {
    let h = mu
        .uniform_spacing()
        .ok_or_else(|| Error::NonUniformGrid("convolution needs equal node spacing and weights".into()))?;
    mu.check(k)?;
    mu.check(f)?;
    let conv = circular_convolution(k, f, h)?;
    let lhs = f_norm(&conv, mu, e)?;
    let rhs = f_norm(k, mu, ExponentValue::Finite(1.0))? * f_norm(f, mu, e)?;
    Ok(InequalityReport::with_default_tol(lhs, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormLimitPoint {
    pub e: f64,
    pub norm: f64,
    /// `‖f‖_∞^{1−1/e} ‖f‖₁^{1/e}`.
    pub bound: f64,
}

/// `‖f‖_e` along increasing exponents, each paired with its interpolation bound.
pub fn fn_norm_limit(f: &GridFunction, mu: &DiscreteMeasureSpace, exponents: &[f64]) -> Result<Vec<NormLimitPoint>> {
    if exponents.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Arg("exponents must be strictly increasing".into()));
    }
    let sup = f_norm(f, mu, ExponentValue::Inf)?;
    let l1 = f_norm(f, mu, ExponentValue::Finite(1.0))?;
    exponents
        .iter()
        .map(|&e| {
            let ev = ExponentValue::new(e)?;
            if ev.is_inf() {
                return Err(Error::Arg("profile exponents must be finite".into()));
            }
            Ok(NormLimitPoint { e, norm: f_norm(f, mu, ev)?, bound: sup.powf(1.0 - 1.0 / e) * l1.powf(1.0 / e) })
        })
        .collect()
}

/// `Γ(z)` by quadrature with its total error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaQuadrature {
    pub value: f64,
    /// Truncation + quadrature + small-interval bound.
    pub error_budget: f64,
}

/// Number of halving cells between 0 and 1.
const GAMMA_GRADED_CELLS: i32 = 64;

/// `∫_0^T e^{−s} s^{z−1} ds` on geometric cells `[2^{−k−1}, 2^{−k}]` plus unit
/// cells on `[1, T]`, `T = max(50, 10 + 5z)`.
///
/// The innermost piece `[0, ε]` uses `∫_0^ε s^{z−1}e^{−s} ≈ ε^z/z`, whose error
/// is below `ε^{z+1}/(z+1)`; the tail past `T` is bounded by `2e^{−T}T^{z−1}`;
/// each cell contributes `|Q16 − Q8|` to the budget.
pub fn gamma_quadrature(z: f64) -> Result<GammaQuadrature> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Positivity { index: 0, value: z });
    }
    let fine = GaussLegendre::new(16);
    let coarse = GaussLegendre::new(8);
    let integrand = |s: f64| (-s + (z - 1.0) * s.ln()).exp();
    let big_t = (10.0 + 5.0 * z).max(50.0);

    let mut value = 0.0;
    let mut budget = 0.0;
    let mut cell = |a: f64, b: f64| {
        let q16 = fine.integrate(integrand, a, b);
        let q8 = coarse.integrate(integrand, a, b);
        value += q16;
        budget += (q16 - q8).abs();
    };
    let mut upper = big_t;
    while upper > 1.0 {
        let lower = (upper - 1.0).max(1.0);
        cell(lower, upper);
        upper = lower;
    }
    for k in 0..GAMMA_GRADED_CELLS {
        cell(2f64.powi(-k - 1), 2f64.powi(-k));
    }
    let eps = 2f64.powi(-GAMMA_GRADED_CELLS);
    value += eps.powf(z) / z;
    budget += eps.powf(z + 1.0) / (z + 1.0);
    budget += 2.0 * (-big_t).exp() * big_t.powf(z - 1.0);
    // Rounding in the accumulated sum.
    budget += 64.0 * f64::EPSILON * value;
    Ok(GammaQuadrature { value, error_budget: budget })
}

/// `Γ(tx + (1−t)y) ≤ Γ(x)^t Γ(y)^{1−t}` with the quadrature budget propagated.
pub fn gamma_log_convexity(x: f64, y: f64, t: f64) -> Result<InequalityReport> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Arg(format!("t = {t} must lie in (0, 1)")));
    }
    for (index, value) in [x, y].into_iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Positivity { index, value });
        }
    }
    let mid = gamma_quadrature(t * x + (1.0 - t) * y)?;
    let gx = gamma_quadrature(x)?;
    let gy = gamma_quadrature(y)?;
    let rhs = gx.value.powf(t) * gy.value.powf(1.0 - t);
    // First-order propagation of the relative errors through the geometric mean.
    let rhs_err = rhs * (t * gx.error_budget / gx.value + (1.0 - t) * gy.error_budget / gy.value);
    Ok(InequalityReport::new(mid.value, rhs, DEFAULT_REL_TOL, mid.error_budget + rhs_err))
}
