//! Generalized exponents `θ(p) = Λ(p)^Ψ(p)` and conjugate exponents.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default guard against the `e → 1⁺` singularity of the conjugate exponent.
pub const DEFAULT_EPS_MIN: f64 = 1e-9;

type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A norm exponent: a finite real `e ≥ 1` or the distinguished value `Inf`.
///
/// `Inf` is never encoded as a large float.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExponentValue {
    Finite(f64),
    Inf,
}

impl ExponentValue {
    /// Validates a finite exponent; `e` must be finite and at least 1.
    pub fn new(e: f64) -> Result<Self> {
        if e.is_finite() && e >= 1.0 {
            Ok(ExponentValue::Finite(e))
        } else if e == f64::INFINITY {
            Ok(ExponentValue::Inf)
        } else {
            Err(Error::Range(format!("{e} (exponents must be >= 1)")))
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExponentValue::Finite(e) => Some(e),
            ExponentValue::Inf => None,
        }
    }

    pub fn is_inf(self) -> bool {
        matches!(self, ExponentValue::Inf)
    }

    /// `1/e`, with `1/Inf = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            ExponentValue::Finite(e) => 1.0 / e,
            ExponentValue::Inf => 0.0,
        }
    }

    /// Finite exponents strictly between 1 and infinity, as required by the
    /// Hölder, Hardy and Hilbert checks.
    pub fn interior(self) -> Result<f64> {
        match self {
            ExponentValue::Finite(e) if e > 1.0 => Ok(e),
            other => Err(Error::Arg(format!(
                "exponent {other} must satisfy 1 < e < inf"
            ))),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            ExponentValue::Finite(e) => e,
            ExponentValue::Inf => f64::INFINITY,
        }
    }
}

impl fmt::Display for ExponentValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExponentValue::Finite(e) => write!(f, "{e}"),
            ExponentValue::Inf => f.write_str("inf"),
        }
    }
}

impl FromStr for ExponentValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(ExponentValue::Inf);
        }
        let e: f64 = t
            .parse()
            .map_err(|_| Error::Arg(format!("cannot parse exponent '{s}'")))?;
        ExponentValue::new(e)
    }
}

/// Conjugate exponent `e/(e−1)` with the default `ε_min`.
pub fn conjugate_exponent(e: ExponentValue) -> Result<ExponentValue> {
    conjugate_exponent_with(e, DEFAULT_EPS_MIN)
}

/// Conjugate exponent; `Inf` maps to 1, values within `eps_min` of 1 are rejected.
pub fn conjugate_exponent_with(e: ExponentValue, eps_min: f64) -> Result<ExponentValue> {
    match e {
        ExponentValue::Inf => Ok(ExponentValue::Finite(1.0)),
        ExponentValue::Finite(v) if v > 1.0 + eps_min => Ok(ExponentValue::Finite(v / (v - 1.0))),
        ExponentValue::Finite(v) => Err(Error::Range(format!(
            "{v}: conjugate of an exponent within {eps_min:e} of 1 is unbounded"
        ))),
    }
}

/// Hölder partner of `e`: like [`conjugate_exponent`] but also pairs `1` with `Inf`.
pub fn holder_partner(e: ExponentValue) -> Result<ExponentValue> {
    match e {
        ExponentValue::Finite(v) if v == 1.0 => Ok(ExponentValue::Inf),
        other => conjugate_exponent(other),
    }
}

/// The generalized exponent `θ(p) = Λ(p)^Ψ(p)` on a closed domain of `p`.
#[derive(Clone)]
pub struct ThetaExponent {
    lambda_fn: ScalarMap,
    psi_fn: ScalarMap,
    domain: (f64, f64),
    label: String,
}

impl fmt::Debug for ThetaExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ThetaExponent")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .finish()
    }
}

/// Default domain used by the named presets.
pub const PRESET_DOMAIN: (f64, f64) = (1.0, 1e6);

impl ThetaExponent {
    pub fn new<L, P>(lambda_fn: L, psi_fn: P, domain: (f64, f64)) -> Result<Self>
    where
        L: Fn(f64) -> f64 + Send + Sync + 'static,
        P: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let (lo, hi) = domain;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Arg(format!("invalid domain [{lo}, {hi}]")));
        }
        Ok(Self {
            lambda_fn: Arc::new(lambda_fn),
            psi_fn: Arc::new(psi_fn),
            domain,
            label: "custom".to_string(),
        })
    }

    fn labelled(mut self, label: String) -> Self {
        self.label = label;
        self
    }

    /// `Λ(p) = p`, `Ψ(p) = 1`.
    pub fn identity() -> Self {
        Self::new(|p| p, |_| 1.0, PRESET_DOMAIN)
            .expect("preset domain is valid")
            .labelled("identity".into())
    }

    /// `Λ(p) = p`, `Ψ(p) = k`.
    pub fn power(k: f64) -> Self {
        Self::new(|p| p, move |_| k, PRESET_DOMAIN)
            .expect("preset domain is valid")
            .labelled(format!("power:{k}"))
    }

    /// `Λ(p) = a + b·p`, `Ψ(p) = c`.
    pub fn affine_power(a: f64, b: f64, c: f64) -> Self {
        Self::new(move |p| a + b * p, move |_| c, PRESET_DOMAIN)
            .expect("preset domain is valid")
            .labelled(format!("affine-power:{a},{b},{c}"))
    }

    /// Parses `identity`, `power:k` or `affine-power:a,b,c`.
    pub fn from_preset(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, args) = match spec.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a)),
            None => (spec, None),
        };
        let parse_list = |a: &str| -> Result<Vec<f64>> {
            a.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Arg(format!("bad number '{v}' in preset '{spec}'")))
                })
                .collect()
        };
        match (name, args) {
            ("identity", None) => Ok(Self::identity()),
            ("power", Some(a)) => match parse_list(a)?.as_slice() {
                [k] => Ok(Self::power(*k)),
                _ => Err(Error::Arg(format!("power preset takes one value: '{spec}'"))),
            },
            ("affine-power", Some(a)) => match parse_list(a)?.as_slice() {
                [a, b, c] => Ok(Self::affine_power(*a, *b, *c)),
                _ => Err(Error::Arg(format!(
                    "affine-power preset takes three values: '{spec}'"
                ))),
            },
            _ => Err(Error::Arg(format!("unknown theta preset '{spec}'"))),
        }
    }

    pub fn with_domain(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Arg(format!("invalid domain [{lo}, {hi}]")));
        }
        self.domain = (lo, hi);
        Ok(self)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Raw `Λ(p)^Ψ(p)` without any range check.
    pub fn raw(&self, p: f64) -> f64 {
        (self.lambda_fn)(p).powf((self.psi_fn)(p))
    }
}

/// Evaluates `θ(p)`; the value must be finite and strictly above 1.
pub fn theta_eval(theta: &ThetaExponent, p: f64) -> Result<ExponentValue> {
    let (lo, hi) = theta.domain;
    if !(p >= lo && p <= hi) {
        return Err(Error::Domain { p, lo, hi });
    }
    let value = theta.raw(p);
    if !value.is_finite() || value <= 1.0 {
        return Err(Error::Range(format!("theta({p}) = {value} must lie in (1, inf)")));
    }
    Ok(ExponentValue::Finite(value))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ThetaViolation {
    /// `θ(p) ≤ 1` or non-finite.
    NotAboveOne { p: f64, value: f64 },
    /// `θ(p_i) ≥ θ(p_{i+1})` for adjacent grid points.
    NotIncreasing { p_left: f64, p_right: f64, left: f64, right: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub grid_size: usize,
    pub violations: Vec<ThetaViolation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples the domain uniformly and reports every value `≤ 1` and every
/// non-increasing adjacent pair. Failures are reported, never raised.
pub fn validate_theta(theta: &ThetaExponent, grid_size: usize) -> ValidationReport {
    let n = grid_size.max(2);
    let (lo, hi) = theta.domain;
    let grid: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&p| theta.raw(p)).collect();

    let mut violations = Vec::new();
    for (&p, &v) in grid.iter().zip(&values) {
        if !v.is_finite() || v <= 1.0 {
            violations.push(ThetaViolation::NotAboveOne { p, value: v });
        }
    }
    for i in 0..n - 1 {
        let (l, r) = (values[i], values[i + 1]);
        // NaN comparisons fall through to a violation as well.
        if !(r > l) {
            violations.push(ThetaViolation::NotIncreasing {
                p_left: grid[i],
                p_right: grid[i + 1],
                left: l,
                right: r,
            });
        }
    }
    ValidationReport { grid_size: n, violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fin(e: f64) -> ExponentValue {
        ExponentValue::Finite(e)
    }

    #[test]
    fn theta_eval_examples() {
        assert_eq!(theta_eval(&ThetaExponent::identity(), 2.0).unwrap(), fin(2.0));
        assert_eq!(theta_eval(&ThetaExponent::power(2.0), 2.0).unwrap(), fin(4.0));
        let t = ThetaExponent::affine_power(1.0, 1.0, 0.5);
        assert_eq!(theta_eval(&t, 3.0).unwrap(), fin(2.0));
    }

    #[test]
    fn theta_eval_errors() {
        let t = ThetaExponent::identity().with_domain(1.1, 10.0).unwrap();
        assert!(matches!(theta_eval(&t, 11.0), Err(Error::Domain { .. })));
        assert!(matches!(
            theta_eval(&ThetaExponent::identity(), 1.0),
            Err(Error::Range(_))
        ));
        let flat = ThetaExponent::power(0.0);
        assert!(matches!(theta_eval(&flat, 3.0), Err(Error::Range(_))));
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(conjugate_exponent(fin(2.0)).unwrap(), fin(2.0));
        let q = conjugate_exponent(fin(4.0)).unwrap().finite().unwrap();
        assert!((q - 4.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            conjugate_exponent(fin(1.000_000_000_1)),
            Err(Error::Range(_))
        ));
        assert_eq!(conjugate_exponent(ExponentValue::Inf).unwrap(), fin(1.0));
        assert_eq!(holder_partner(fin(1.0)).unwrap(), ExponentValue::Inf);
    }

    #[test]
    fn eps_min_is_configurable() {
        assert!(conjugate_exponent_with(fin(1.001), 1e-2).is_err());
        assert!(conjugate_exponent_with(fin(1.001), 1e-4).is_ok());
    }

    #[test]
    fn validation_examples() {
        let id = ThetaExponent::identity().with_domain(1.1, 10.0).unwrap();
        assert!(validate_theta(&id, 100).passed());

        let dec = ThetaExponent::new(|p| 2.0 - p, |_| 1.0, (0.0, 1.0)).unwrap();
        let rep = validate_theta(&dec, 50);
        assert!(!rep.passed());
        assert!(rep
            .violations
            .iter()
            .any(|v| matches!(v, ThetaViolation::NotIncreasing { .. })));

        let flat = ThetaExponent::power(0.0).with_domain(1.1, 10.0).unwrap();
        let rep = validate_theta(&flat, 20);
        assert!(!rep.passed());
        assert!(rep
            .violations
            .iter()
            .any(|v| matches!(v, ThetaViolation::NotAboveOne { .. })));
    }

    #[test]
    fn preset_grammar() {
        assert_eq!(ThetaExponent::from_preset("identity").unwrap().label(), "identity");
        let p = ThetaExponent::from_preset("power:1.5").unwrap();
        assert!((p.raw(4.0) - 8.0).abs() < 1e-12);
        let a = ThetaExponent::from_preset("affine-power:1,1,0.5").unwrap();
        assert!((a.raw(3.0) - 2.0).abs() < 1e-15);
        for bad in ["", "power", "power:x", "affine-power:1,2", "cubic:3", "identity:2"] {
            assert!(ThetaExponent::from_preset(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn exponent_parsing() {
        assert_eq!("inf".parse::<ExponentValue>().unwrap(), ExponentValue::Inf);
        assert_eq!("2.5".parse::<ExponentValue>().unwrap(), fin(2.5));
        assert!("0.5".parse::<ExponentValue>().is_err());
        assert!("nan".parse::<ExponentValue>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn conjugate_is_an_involution(log_e in (1e-6f64).ln_1p()..(1e6f64).ln()) {
                let e = log_e.exp();
                prop_assume!(e > 1.0 + 1e-6);
                let q = conjugate_exponent(fin(e)).unwrap();
                let back = conjugate_exponent(q).unwrap().finite().unwrap();
                // q = e/(e-1) sits next to 1 for large e, where f64 spacing is
                // 2^-52; the round trip cannot beat ~e·ε relative there.
                let tol = 1e-12f64.max(8.0 * f64::EPSILON * e);
                prop_assert!(((back - e) / e).abs() <= tol, "e={} back={}", e, back);
                let qv = q.finite().unwrap();
                prop_assert!((1.0 / e + 1.0 / qv - 1.0).abs() < 1e-12);
            }

            #[test]
            fn validated_grids_are_strictly_increasing(k in 0.1f64..5.0, n in 2usize..200) {
                let t = ThetaExponent::power(k).with_domain(1.1, 10.0).unwrap();
                let rep = validate_theta(&t, n);
                prop_assert!(rep.passed());
                let (lo, hi) = t.domain();
                let vals: Vec<f64> = (0..n).map(|i| theta_eval(&t, lo + (hi - lo) * i as f64 / (n - 1) as f64).unwrap().as_f64()).collect();
                prop_assert!(vals.windows(2).all(|w| w[1] > w[0]));
            }
        }
    }
}
