//! Seeded verification suite: every checker over every exponent preset,
//! streamed as JSON lines or CSV in a fixed (check, exponent, trial) order.
//!
//! Trial `t` of exponent `k` for check `c` draws its inputs from
//! `CounterRng::for_trial(master_seed, c, k·trials + t)`; the stream key is
//! written to the `seed` field so any line can be replayed on its own.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::{conjugate_exponent, theta_eval, ExponentValue, ThetaExponent};
use crate::function_space::{
    convolution_young, holder_fn, inclusion_check, integral_minkowski, interpolation_check, minkowski_fn,
    DiscreteMeasureSpace, GridFunction, MeasureKind,
};
use crate::inequalities::{generalized_holder, hardy, hilbert_with_cap, holder_seq, minkowski_seq, tangent_lemma_check};
use crate::linalg::Matrix;
use crate::report::InequalityReport;
use crate::rng::CounterRng;
use crate::sequence_space::{embedding_check, WeightedSequence};

/// Every check the suite knows, in output order.
pub const CHECKS: &[&str] = &[
    "holder_seq",
    "minkowski_seq",
    "generalized_holder",
    "hardy",
    "hilbert",
    "tangent_lemma",
    "embedding",
    "holder_fn",
    "minkowski_fn",
    "interpolation",
    "inclusion",
    "integral_minkowski",
    "convolution_young",
    "holder_equality",
    "minkowski_equality",
    "integral_minkowski_equality",
    "convolution_equality",
];

/// Edge length used for two-variable grids (kept small: the integrand is `O(n²)`).
const GRID2_MAX: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub master_seed: u64,
    pub trials_per_check: usize,
    /// `preset@p`, e.g. `identity@2` or `power:2@1.5`.
    pub exponent_presets: Vec<String>,
    /// Subset of [`CHECKS`]; empty means all of them.
    pub checks: Vec<String>,
    pub tolerances: Tolerances,
    pub size_caps: SizeCaps,
    pub output: OutputConfig,
    pub debug: DebugConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub rel_tol: f64,
    pub equality_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SizeCaps {
    pub seq_len: usize,
    pub grid_len: usize,
    pub hilbert_mn: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub format: OutputFormat,
    pub path: Option<String>,
}

/// Self-test knobs; not meant for normal runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DebugConfig {
    /// Multiplies every right-hand side before the verdict is taken.
    pub rhs_scale: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            master_seed: 42,
            trials_per_check: 100,
            exponent_presets: ["1.1", "1.5", "2", "3", "10"].iter().map(|p| format!("identity@{p}")).collect(),
            checks: Vec::new(),
            tolerances: Tolerances::default(),
            size_caps: SizeCaps::default(),
            output: OutputConfig::default(),
            debug: DebugConfig::default(),
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rel_tol: 1e-9, equality_tol: 1e-9 }
    }
}

impl Default for SizeCaps {
    fn default() -> Self {
        Self { seq_len: 64, grid_len: 64, hilbert_mn: 4096 }
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { format: OutputFormat::Jsonl, path: None }
    }
}

impl Default for DebugConfig {
    fn default() -> Self {
        Self { rhs_scale: 1.0 }
    }
}

/// An exponent preset resolved to its numeric value.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedExponent {
    pub spec: String,
    pub e: f64,
}

/// Parses `preset@p` and evaluates `θ(p)`.
pub fn resolve_preset(spec: &str) -> Result<ResolvedExponent> {
    let (preset, p) = spec
        .rsplit_once('@')
        .ok_or_else(|| Error::Arg(format!("exponent preset '{spec}' must look like 'preset@p'")))?;
    let p: f64 = p
        .trim()
        .parse()
        .map_err(|_| Error::Arg(format!("bad evaluation point in '{spec}'")))?;
    let theta = ThetaExponent::from_preset(preset)?;
    let e = theta_eval(&theta, p)?;
    // Every checker pairs e with its conjugate somewhere.
    conjugate_exponent(e)?;
    Ok(ResolvedExponent { spec: spec.to_string(), e: e.as_f64() })
}

impl SuiteConfig {
    /// Parses TOML; syntax and type errors carry the offending line.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|err| {
            let line = err.span().map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            Error::Parse { line, msg: err.message().to_string() }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, msg: String| Err(Error::Arg(format!("{name}: {msg}")));
        if self.trials_per_check < 1 {
            return field("trials_per_check", "must be at least 1".into());
        }
        if !(self.tolerances.rel_tol > 0.0) {
            return field("tolerances.rel_tol", format!("must be positive, got {}", self.tolerances.rel_tol));
        }
        if !(self.tolerances.equality_tol > 0.0) {
            return field("tolerances.equality_tol", format!("must be positive, got {}", self.tolerances.equality_tol));
        }
        if self.size_caps.seq_len < 1 || self.size_caps.seq_len > 1_000_000 {
            return field("size_caps.seq_len", "must lie in 1..=1000000".into());
        }
        if self.size_caps.grid_len < 1 || self.size_caps.grid_len > 4096 {
            return field("size_caps.grid_len", "must lie in 1..=4096".into());
        }
        if self.size_caps.hilbert_mn < 1 || self.size_caps.hilbert_mn > crate::inequalities::HILBERT_MAX_TERMS {
            return field("size_caps.hilbert_mn", "must lie in 1..=100000000".into());
        }
        if !(self.debug.rhs_scale > 0.0 && self.debug.rhs_scale.is_finite()) {
            return field("debug.rhs_scale", "must be positive".into());
        }
        if self.exponent_presets.is_empty() {
            return field("exponent_presets", "must not be empty".into());
        }
        for p in &self.exponent_presets {
            resolve_preset(p).map_err(|e| Error::Arg(format!("exponent_presets: {e}")))?;
        }
        if let Some(c) = self.checks.iter().find(|c| !CHECKS.contains(&c.as_str())) {
            return field("checks", format!("unknown check '{c}'"));
        }
        Ok(())
    }

    fn selected_checks(&self) -> Vec<&'static str> {
        CHECKS
            .iter()
            .copied()
            .filter(|c| self.checks.is_empty() || self.checks.iter().any(|s| s == c))
            .collect()
    }
}

/// One output line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportLine {
    pub check: String,
    pub e: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub holds: bool,
    pub tail_error: f64,
    pub seed: u64,
}

pub const CSV_HEADER: &str = "check,e,lhs,rhs,ratio,holds,tail_error,seed";

impl ReportLine {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.check, self.e, self.lhs, self.rhs, self.ratio, self.holds, self.tail_error, self.seed
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub check: String,
    pub trials: usize,
    pub violations: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub max_tail_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub lines: usize,
    pub violations: usize,
    pub checks: Vec<CheckSummary>,
    pub elapsed_ms: u64,
}

impl Summary {
    /// 0 when every check held, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.violations > 0)
    }
}

struct TrialContext<'a> {
    e: f64,
    caps: &'a SizeCaps,
    equality_tol: f64,
}

/// Random vector with entries of mixed sign and a random overall scale.
fn signed_vec(rng: &mut CounterRng, n: usize) -> Vec<f64> {
    let scale = 10f64.powf(rng.uniform(-3.0, 3.0));
    (0..n).map(|_| scale * rng.uniform(-1.0, 1.0)).collect()
}

fn positive_vec(rng: &mut CounterRng, n: usize) -> Vec<f64> {
    let scale = 10f64.powf(rng.uniform(-3.0, 3.0));
    (0..n).map(|_| scale * rng.open_unit()).collect()
}

fn seq(v: Vec<f64>) -> Result<WeightedSequence> {
    WeightedSequence::finite(v)
}

fn random_measure(rng: &mut CounterRng, n: usize) -> Result<DiscreteMeasureSpace> {
    let weights = (0..n).map(|_| rng.open_unit()).collect();
    DiscreteMeasureSpace::new(MeasureKind::Quadrature, (0..n).map(|i| i as f64).collect(), weights)
}

fn equality(report: InequalityReport, tol: f64) -> InequalityReport {
    InequalityReport { holds: report.holds && report.is_equality(tol), ..report }
}

fn run_trial(check: &str, ctx: &TrialContext, rng: &mut CounterRng) -> Result<InequalityReport> {
    let e = ctx.e;
    let ev = ExponentValue::Finite(e);
    let caps = ctx.caps;
    let n = rng.int_in(1, caps.seq_len);
    let g = rng.int_in(1, caps.grid_len);
    match check {
        "holder_seq" => holder_seq(&seq(signed_vec(rng, n))?, &seq(signed_vec(rng, n))?, ev),
        "minkowski_seq" => minkowski_seq(&seq(signed_vec(rng, n))?, &seq(signed_vec(rng, n))?, ev),
        "generalized_holder" => {
            // 1/e + 1/q + 1/q = 1.
            let q = ExponentValue::Finite(2.0 * e / (e - 1.0));
            let (f, h, k) = (signed_vec(rng, n), signed_vec(rng, n), signed_vec(rng, n));
            generalized_holder(&[&f, &h, &k], &[ev, q, q], None)
        }
        "hardy" => hardy(&seq(positive_vec(rng, n))?, ev),
        "hilbert" => {
            let side = ((caps.hilbert_mn as f64).sqrt() as usize).max(1);
            let (m, k) = (rng.int_in(1, side), rng.int_in(1, side));
            hilbert_with_cap(&seq(positive_vec(rng, m))?, &seq(positive_vec(rng, k))?, ev, caps.hilbert_mn)
        }
        "tangent_lemma" => {
            let (a, b, t) = (rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0));
            tangent_lemma_check(a, b, t, ev)
        }
        "embedding" => embedding_check(&seq(signed_vec(rng, n))?, ev, ExponentValue::Finite(e + 1.0)),
        "holder_fn" | "minkowski_fn" | "inclusion" => {
            let mu = random_measure(rng, g)?;
            let f = GridFunction::new(signed_vec(rng, g))?;
            let h = GridFunction::new(signed_vec(rng, g))?;
            match check {
                "holder_fn" => holder_fn(&f, &h, &mu, ev),
                "minkowski_fn" => minkowski_fn(&f, &h, &mu, ev),
                _ => inclusion_check(&f, &mu, ev, ExponentValue::Finite(2.0 * e)),
            }
        }
        "interpolation" => {
            let mu = random_measure(rng, g)?;
            let f = GridFunction::new(positive_vec(rng, g))?;
            let h = GridFunction::new(positive_vec(rng, g))?;
            interpolation_check(&f, &h, &mu, 1.0 / e)
        }
        "integral_minkowski" | "integral_minkowski_equality" => {
            let (nx, ny) = (rng.int_in(1, GRID2_MAX.min(caps.grid_len)), rng.int_in(1, GRID2_MAX.min(caps.grid_len)));
            let (mx, my) = (random_measure(rng, nx)?, random_measure(rng, ny)?);
            let f = if check == "integral_minkowski" {
                Matrix::from_row_major(nx, ny, signed_vec(rng, nx * ny))?
            } else {
                let (u, v) = (signed_vec(rng, nx), positive_vec(rng, ny));
                let mut f = Matrix::zeros(nx, ny);
                for i in 0..nx {
                    for j in 0..ny {
                        f[(i, j)] = u[i] * v[j];
                    }
                }
                f
            };
            let r = integral_minkowski(&f, &mx, &my, ev)?;
            Ok(if check == "integral_minkowski" { r } else { equality(r, ctx.equality_tol) })
        }
        "convolution_young" | "convolution_equality" => {
            let mu = DiscreteMeasureSpace::midpoint(0.0, 1.0, g)?;
            let h = 1.0 / g as f64;
            let f = GridFunction::new(signed_vec(rng, g))?;
            if check == "convolution_young" {
                let k = GridFunction::new(signed_vec(rng, g))?;
                convolution_young(&k, &f, &mu, ev)
            } else {
                let mut k = vec![0.0; g];
                k[rng.int_in(0, g - 1)] = 1.0 / h;
                Ok(equality(convolution_young(&GridFunction::new(k)?, &f, &mu, ev)?, ctx.equality_tol))
            }
        }
        "holder_equality" => {
            let x = signed_vec(rng, n);
            let c = rng.uniform(0.1, 10.0);
            let y = x.iter().map(|v| c * v.abs().powf(e - 1.0) * v.signum()).collect();
            Ok(equality(holder_seq(&seq(x)?, &seq(y)?, ev)?, ctx.equality_tol))
        }
        "minkowski_equality" => {
            let x = signed_vec(rng, n);
            let c = rng.uniform(0.1, 10.0);
            let y = x.iter().map(|v| c * v).collect();
            Ok(equality(minkowski_seq(&seq(x)?, &seq(y)?, ev)?, ctx.equality_tol))
        }
        other => Err(Error::Arg(format!("unknown check '{other}'"))),
    }
}

/// Evaluates every trial of one (check, exponent) block, in trial order.
fn run_block(cfg: &SuiteConfig, check: &str, exp_index: usize, e: f64) -> Result<Vec<ReportLine>> {
    let ctx = TrialContext { e, caps: &cfg.size_caps, equality_tol: cfg.tolerances.equality_tol };
    let trials = cfg.trials_per_check as u64;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = CounterRng::for_trial(cfg.master_seed, check, exp_index as u64 * trials + t);
            let seed = rng.key();
            let raw = run_trial(check, &ctx, &mut rng)?;
            let scaled = InequalityReport::new(raw.lhs, raw.rhs * cfg.debug.rhs_scale, cfg.tolerances.rel_tol, raw.tail_error);
            // Equality checks keep their extra requirement.
            let holds = scaled.holds && (raw.holds || !check.ends_with("_equality"));
            Ok(ReportLine {
                check: check.to_string(),
                e,
                lhs: scaled.lhs,
                rhs: scaled.rhs,
                ratio: scaled.ratio,
                holds,
                tail_error: scaled.tail_error,
                seed,
            })
        })
        .collect()
}

/// Runs the configured suite, streaming the report body and a summary footer.
pub fn run_suite<W: Write>(cfg: &SuiteConfig, mut out: W) -> Result<Summary> {
    cfg.validate()?;
    let start = Instant::now();
    let exponents = cfg
        .exponent_presets
        .iter()
        .map(|p| resolve_preset(p))
        .collect::<Result<Vec<_>>>()?;
    if cfg.output.format == OutputFormat::Csv {
        writeln!(out, "{CSV_HEADER}")?;
    }
    let mut summary = Summary { lines: 0, violations: 0, checks: Vec::new(), elapsed_ms: 0 };
    for check in cfg.selected_checks() {
        let mut cs = CheckSummary {
            check: check.to_string(),
            trials: 0,
            violations: 0,
            min_ratio: f64::INFINITY,
            max_ratio: 0.0,
            max_tail_error: 0.0,
        };
        for (k, exp) in exponents.iter().enumerate() {
            for line in run_block(cfg, check, k, exp.e)? {
                match cfg.output.format {
                    OutputFormat::Jsonl => {
                        serde_json::to_writer(&mut out, &line).map_err(|e| Error::Io(e.to_string()))?;
                        writeln!(out)?;
                    }
                    OutputFormat::Csv => writeln!(out, "{}", line.to_csv())?,
                }
                cs.trials += 1;
                cs.violations += usize::from(!line.holds);
                cs.min_ratio = cs.min_ratio.min(line.ratio);
                cs.max_ratio = cs.max_ratio.max(line.ratio);
                cs.max_tail_error = cs.max_tail_error.max(line.tail_error);
            }
        }
        summary.lines += cs.trials;
        summary.violations += cs.violations;
        summary.checks.push(cs);
    }
    summary.elapsed_ms = start.elapsed().as_millis() as u64;
    write_footer(&mut out, &summary)?;
    out.flush()?;
    Ok(summary)
}

/// Marker that starts the footer; everything before it is the deterministic body.
pub const FOOTER_MARKER: &str = "#summary ";

fn write_footer<W: Write>(out: &mut W, summary: &Summary) -> Result<()> {
    let json = serde_json::to_string(summary).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out, "{FOOTER_MARKER}{json}")?;
    Ok(())
}

/// Report body with the footer stripped.
pub fn report_body(text: &str) -> &str {
    match text.find(FOOTER_MARKER) {
        Some(i) => &text[..i],
        None => text,
    }
}

/// Converts a JSON-lines report body to CSV (footer lines are dropped).
pub fn jsonl_to_csv(text: &str) -> Result<String> {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (i, line) in report_body(text).lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: ReportLine =
            serde_json::from_str(line).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        out.push_str(&rec.to_csv());
        out.push('\n');
    }
    Ok(out)
}
