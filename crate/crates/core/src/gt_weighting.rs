//! Finite model of a bounded bilinear form `ω(α, β) = αᵀ M β` on
//! `C(S) × C(T) ≅ ℝ^s × ℝ^t` with sup norms, its exact norm, and a numerical
//! search for the probabilities `λ`, `μ` of a Grothendieck factorization.
//!
//! For strictly positive `λ`, `μ` the factorization inequality
//! `|ω(α,β)| ≤ K‖ω‖ ‖α‖_{L₂(λ)} ‖β‖_{L₂(μ)}` holds for every `(α, β)` exactly
//! when `σ_max(D_λ^{-1/2} M D_μ^{-1/2}) ≤ K‖ω‖`, which is what gets certified.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{jacobi_svd, spectral_norm, Matrix};
use crate::report::{InequalityReport, DEFAULT_REL_TOL};
use crate::rng::CounterRng;

/// Largest side handled by exact sign enumeration.
pub const MAX_EXACT_DIM: usize = 20;
/// Weights below this are rejected by [`gt_bound_check`].
pub const ZERO_WEIGHT: f64 = 1e-12;
/// Interior floor kept by the optimizer.
pub const WEIGHT_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BilinearForm {
    m: Matrix,
}

impl BilinearForm {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows() == 0 || m.cols() == 0 {
            return Err(Error::Shape("bilinear form needs s >= 1 and t >= 1".into()));
        }
        if let Some(pos) = m.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::Arg(format!(
                "non-finite entry at ({}, {})",
                pos / m.cols(),
                pos % m.cols()
            )));
        }
        Ok(Self { m })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    /// Entries drawn uniformly from `[-1, 1]`.
    pub fn random(rows: usize, cols: usize, rng: &mut CounterRng) -> Result<Self> {
        let data = rng.uniform_vec(rows * cols, -1.0, 1.0);
        Self::new(Matrix::from_row_major(rows, cols, data)?)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn s(&self) -> usize {
        self.m.rows()
    }

    pub fn t(&self) -> usize {
        self.m.cols()
    }

    pub fn eval(&self, alpha: &[f64], beta: &[f64]) -> Result<f64> {
        if alpha.len() != self.s() || beta.len() != self.t() {
            return Err(Error::Shape(format!(
                "form is {}x{}, got vectors of length {} and {}",
                self.s(),
                self.t(),
                alpha.len(),
                beta.len()
            )));
        }
        Ok(self.m.bilinear(alpha, beta))
    }

    fn check_exact_dims(&self) -> Result<()> {
        let d = self.s().max(self.t());
        if d > MAX_EXACT_DIM {
            return Err(Error::Size(format!(
                "{}x{} form exceeds the exact-enumeration cap of {MAX_EXACT_DIM}",
                self.s(),
                self.t()
            )));
        }
        Ok(())
    }
}

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Shape("empty probability vector".into()));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::Arg(format!("weight {w} at index {i} is not a probability")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Arg(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self(weights))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n]).or_else(|_| {
            // 1/n may not sum to exactly 1 within 1e-12 for very large n; renormalise.
            let mut w = vec![1.0 / n as f64; n];
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= total);
            Self::new(w)
        })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationCertificate {
    pub lambda: ProbabilityVector,
    pub mu: ProbabilityVector,
    #[serde(rename = "K")]
    pub k: f64,
    pub form_norm: f64,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// `‖ω‖ = max |αᵀMβ|` over sign vectors, enumerated on the smaller side.
///
/// For fixed `α` the best `β` is `sign(αᵀM)`, so the value is
/// `max_α Σ_j |(αᵀM)_j|`. `α` and `−α` give the same value; the first sign
/// is pinned to `+1`.
pub fn form_sup_norm(form: &BilinearForm) -> Result<f64> {
    form.check_exact_dims()?;
    let m = if form.s() <= form.t() {
        form.m.clone()
    } else {
        form.m.transpose()
    };
    let (s, t) = (m.rows(), m.cols());
    let mut best = 0.0f64;
    let mut combo = vec![0.0; t];
    for mask in 0u32..(1u32 << (s - 1)) {
        combo.iter_mut().for_each(|c| *c = 0.0);
        for i in 0..s {
            let sign = if i > 0 && (mask >> (i - 1)) & 1 == 1 { -1.0 } else { 1.0 };
            for (c, v) in combo.iter_mut().zip(m.row(i)) {
                *c += sign * v;
            }
        }
        let value: f64 = combo.iter().map(|c| c.abs()).sum();
        best = best.max(value);
    }
    Ok(best)
}

/// `σ_max(D_λ^{-1/2} M D_μ^{-1/2})` for strictly positive weights.
pub fn weighted_spectral_norm(form: &BilinearForm, lambda: &[f64], mu: &[f64]) -> f64 {
    let rs: Vec<f64> = lambda.iter().map(|l| 1.0 / l.sqrt()).collect();
    let cs: Vec<f64> = mu.iter().map(|m| 1.0 / m.sqrt()).collect();
    spectral_norm(&form.m.scale_rows_cols(&rs, &cs))
}

fn check_weights(form: &BilinearForm, lambda: &ProbabilityVector, mu: &ProbabilityVector) -> Result<()> {
    if lambda.len() != form.s() || mu.len() != form.t() {
        return Err(Error::Shape(format!(
            "weights of length {} and {} for a {}x{} form",
            lambda.len(),
            mu.len(),
            form.s(),
            form.t()
        )));
    }
    for w in [lambda, mu] {
        if let Some((index, &value)) = w.as_slice().iter().enumerate().find(|(_, v)| **v < ZERO_WEIGHT) {
            return Err(Error::ZeroWeight { index, value });
        }
    }
    Ok(())
}

/// Checks the factorization inequality for all `(α, β)` at once:
/// `lhs = σ_max(D_λ^{-1/2} M D_μ^{-1/2})`, `rhs = K·‖ω‖`.
pub fn gt_bound_check(
    form: &BilinearForm,
    lambda: &ProbabilityVector,
    mu: &ProbabilityVector,
    k: f64,
) -> Result<InequalityReport> {
    check_weights(form, lambda, mu)?;
    let norm = form_sup_norm(form)?;
    let sigma = weighted_spectral_norm(form, lambda.as_slice(), mu.as_slice());
    Ok(InequalityReport::new(sigma, k * norm, DEFAULT_REL_TOL, 0.0))
}

/// `w_k = α_kᵀ M β_k` for each pair.
pub fn weights_from_form(form: &BilinearForm, alphas: &[Vec<f64>], betas: &[Vec<f64>]) -> Result<Vec<f64>> {
    if alphas.len() != betas.len() {
        return Err(Error::Shape(format!(
            "{} alpha vectors but {} beta vectors",
            alphas.len(),
            betas.len()
        )));
    }
    alphas
        .iter()
        .zip(betas)
        .map(|(a, b)| form.eval(a, b))
        .collect()
}

/// The factor `K²‖ω‖² (∫|α|²dλ)(∫|β|²dμ)` multiplying the weighted Hölder bound,
/// with the integrals taken as the largest over the given families.
pub fn gt_holder_factor(cert: &FactorizationCertificate, alphas: &[Vec<f64>], betas: &[Vec<f64>]) -> f64 {
    let l2 = |v: &[f64], w: &[f64]| v.iter().zip(w).map(|(x, p)| x * x * p).sum::<f64>();
    let a = alphas
        .iter()
        .map(|v| l2(v, cert.lambda.as_slice()))
        .fold(0.0, f64::max);
    let b = betas
        .iter()
        .map(|v| l2(v, cert.mu.as_slice()))
        .fold(0.0, f64::max);
    cert.k * cert.k * cert.form_norm * cert.form_norm * a * b
}

#[derive(Debug, Clone)]
pub struct GtOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    /// Stationarity tolerance on the projected-gradient mapping, relative to K.
    pub grad_tol: f64,
}

impl Default for GtOptions {
    fn default() -> Self {
        Self { restarts: 8, max_iters: 2000, seed: 0, grad_tol: 1e-9 }
    }
}

pub fn find_gt_factorization(form: &BilinearForm, restarts: usize, max_iters: usize) -> Result<FactorizationCertificate> {
    find_gt_factorization_with(
        form,
        &GtOptions { restarts, max_iters, ..GtOptions::default() },
    )
}

/// Minimizes `K(λ, μ) = σ_max(D_λ^{-1/2} M D_μ^{-1/2}) / ‖ω‖` over the product
/// of simplices by projected gradient with backtracking, from several starts.
///
/// The spectral norm is approached through a continuation of smooth Schatten
/// norms `(Σ σ_k^{2p})^{1/2p}` before a final pass on `σ_max` itself.
pub fn find_gt_factorization_with(form: &BilinearForm, opts: &GtOptions) -> Result<FactorizationCertificate> {
    let norm = form_sup_norm(form)?;
    let (s, t) = (form.s(), form.t());
    if norm == 0.0 {
        return Ok(FactorizationCertificate {
            lambda: ProbabilityVector::uniform(s)?,
            mu: ProbabilityVector::uniform(t)?,
            k: 1.0,
            form_norm: 0.0,
            converged: true,
            warning: None,
        });
    }
    let normalized = form.m.scale(1.0 / norm);
    let restarts = opts.restarts.max(1);

    let runs: Vec<RunResult> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let (lam0, mu0) = if r == 0 {
                (vec![1.0 / s as f64; s], vec![1.0 / t as f64; t])
            } else {
                let mut rng = CounterRng::for_trial(opts.seed, "gt_restart", r as u64);
                (
                    project_capped_simplex(&rng.simplex_point(s), WEIGHT_FLOOR),
                    project_capped_simplex(&rng.simplex_point(t), WEIGHT_FLOOR),
                )
            };
            optimize(&normalized, lam0, mu0, opts)
        })
        .collect();

    // Lowest K wins; ties go to the lowest restart index.
    let best = runs
        .into_iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.k.total_cmp(&b.k).then(ia.cmp(ib)))
        .map(|(_, r)| r)
        .expect("at least one restart");

    let lambda = ProbabilityVector::new(renormalize(best.lambda))?;
    let mu = ProbabilityVector::new(renormalize(best.mu))?;
    let sigma = weighted_spectral_norm(form, lambda.as_slice(), mu.as_slice());
    let k = (sigma / norm).max(1.0);
    let cert = FactorizationCertificate {
        lambda,
        mu,
        k,
        form_norm: norm,
        converged: best.converged,
        warning: (!best.converged).then(|| {
            format!(
                "iteration cap of {} reached before the projected gradient fell below {:e}",
                opts.max_iters, opts.grad_tol
            )
        }),
    };
    let check = gt_bound_check(form, &cert.lambda, &cert.mu, cert.k)?;
    if !check.holds {
        return Err(Error::Inconsistency(format!(
            "certificate failed re-verification: sigma {} > K·norm {}",
            check.lhs, check.rhs
        )));
    }
    Ok(cert)
}

struct RunResult {
    lambda: Vec<f64>,
    mu: Vec<f64>,
    k: f64,
    converged: bool,
}

fn renormalize(mut w: Vec<f64>) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Smoothing exponents for the Schatten continuation; `None` is `σ_max` itself.
const STAGES: [Option<f64>; 6] = [Some(2.0), Some(8.0), Some(32.0), Some(128.0), Some(512.0), None];

fn optimize(m: &Matrix, mut lambda: Vec<f64>, mut mu: Vec<f64>, opts: &GtOptions) -> RunResult {
    let per_stage = (opts.max_iters / STAGES.len()).max(1);
    let mut smooth_converged = false;
    let mut converged = false;
    for (idx, stage) in STAGES.iter().enumerate() {
        let out = descend(m, &mut lambda, &mut mu, *stage, per_stage, opts.grad_tol);
        if idx == STAGES.len() - 2 {
            smooth_converged = out;
        }
        if stage.is_none() {
            converged = out || smooth_converged;
        }
    }
    let k = objective(m, &lambda, &mu, None).0;
    RunResult { lambda, mu, k, converged }
}

/// Objective value and gradients with respect to `λ` and `μ`.
fn objective(m: &Matrix, lambda: &[f64], mu: &[f64], smoothing: Option<f64>) -> (f64, Vec<f64>, Vec<f64>) {
    let rs: Vec<f64> = lambda.iter().map(|l| 1.0 / l.sqrt()).collect();
    let cs: Vec<f64> = mu.iter().map(|x| 1.0 / x.sqrt()).collect();
    let svd = jacobi_svd(&m.scale_rows_cols(&rs, &cs));
    let top = svd.sigma[0];
    let mut gl = vec![0.0; lambda.len()];
    let mut gm = vec![0.0; mu.len()];
    if top == 0.0 {
        return (0.0, gl, gm);
    }
    // dσ_k/dλ_i = −½ σ_k u_ki² / λ_i, and likewise for μ with v_k.
    let (value, coeffs): (f64, Vec<f64>) = match smoothing {
        None => {
            let mut c = vec![0.0; svd.sigma.len()];
            c[0] = 1.0;
            (top, c)
        }
        Some(p) => {
            let two_p = 2.0 * p;
            let sum: f64 = svd.sigma.iter().map(|s| (s / top).powf(two_p)).sum();
            let f = top * sum.powf(1.0 / two_p);
            (f, svd.sigma.iter().map(|s| (s / f).powf(two_p - 1.0)).collect())
        }
    };
    for (k, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let sk = svd.sigma[k];
        for (i, g) in gl.iter_mut().enumerate() {
            *g -= 0.5 * c * sk * svd.u[k][i] * svd.u[k][i] / lambda[i];
        }
        for (j, g) in gm.iter_mut().enumerate() {
            *g -= 0.5 * c * sk * svd.v[k][j] * svd.v[k][j] / mu[j];
        }
    }
    (value, gl, gm)
}

/// Runs projected gradient with backtracking; returns whether the
/// gradient-mapping norm dropped below tolerance.
fn descend(m: &Matrix, lambda: &mut Vec<f64>, mu: &mut Vec<f64>, smoothing: Option<f64>, iters: usize, tol: f64) -> bool {
    let mut step = 0.1;
    let (mut f, mut gl, mut gm) = objective(m, lambda, mu, smoothing);
    for _ in 0..iters {
        let mut accepted = false;
        while step > 1e-18 {
            let cand_l = project_capped_simplex(&axpy(lambda, -step, &gl), WEIGHT_FLOOR);
            let cand_m = project_capped_simplex(&axpy(mu, -step, &gm), WEIGHT_FLOOR);
            let dl: Vec<f64> = cand_l.iter().zip(lambda.iter()).map(|(a, b)| a - b).collect();
            let dm: Vec<f64> = cand_m.iter().zip(mu.iter()).map(|(a, b)| a - b).collect();
            let dd: f64 = dl.iter().chain(&dm).map(|d| d * d).sum();
            if dd == 0.0 {
                return true;
            }
            let lin: f64 = dl.iter().zip(&gl).chain(dm.iter().zip(&gm)).map(|(d, g)| d * g).sum();
            let (fc, gcl, gcm) = objective(m, &cand_l, &cand_m, smoothing);
            if fc <= f + lin + dd / (2.0 * step) {
                let mapping = dd.sqrt() / step;
                *lambda = cand_l;
                *mu = cand_m;
                f = fc;
                gl = gcl;
                gm = gcm;
                accepted = true;
                if mapping < tol * f.max(1.0) {
                    return true;
                }
                step = (step * 2.0).min(1e3);
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // No descent at any step size: a kink of σ_max or numerical floor.
            return smoothing.is_none();
        }
    }
    false
}

fn axpy(x: &[f64], a: f64, g: &[f64]) -> Vec<f64> {
    x.iter().zip(g).map(|(xi, gi)| xi + a * gi).collect()
}

/// Euclidean projection onto `{w : w_i ≥ floor, Σ w_i = 1}`.
fn project_capped_simplex(v: &[f64], floor: f64) -> Vec<f64> {
    let n = v.len();
    let radius = 1.0 - n as f64 * floor;
    let shifted: Vec<f64> = v.iter().map(|x| x - floor).collect();
    let mut sorted = shifted.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - radius) / (i + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    shifted.iter().map(|x| (x - theta).max(0.0) + floor).collect()
}
