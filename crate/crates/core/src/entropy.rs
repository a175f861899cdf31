//! Tsallis q-entropy and the Abe-Rajagopal q-conditional entropy
//! `S_q(X|Y) = (1 - Tr rho_XY^q / Tr rho_Y^q) / (q - 1)`.
//!
//! Power sums are handled in log space throughout: at `q = 150` the raw
//! powers of typical eigenvalues are far below the smallest double.

use serde::Serialize;

use crate::accel::{AccelerationParam, FockCutoff};
use crate::error::{Error, Result};
use crate::spectral::{self, DEFAULT_TRACE_TOLERANCE, EPS_PSD};
use crate::states::{accelerated_density, analytic_spectra, StateFamily};

/// Analytic term count used when none is requested.
pub const DEFAULT_ANALYTIC_TERMS: usize = 10_000;

fn check_q(q: f64) -> Result<()> {
    if !q.is_finite() || q <= 0.0 {
        return Err(Error::Domain(format!("entropic index q = {q} must be positive")));
    }
    Ok(())
}

/// Natural logs of the positive eigenvalues; zeros are dropped.
fn ln_positive(eigs: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(eigs.len());
    for &v in eigs {
        if v.is_nan() || v < -EPS_PSD {
            return Err(Error::Validation(format!("negative eigenvalue {v:e} in spectrum")));
        }
        if v > 0.0 {
            out.push(v.ln());
        }
    }
    Ok(out)
}

/// `ln sum_i exp(x_i)`, `-inf` for an empty input.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = xs.into_iter().map(|x| (x - max).exp()).sum();
    max + s.ln()
}

/// `ln sum_i lambda_i^q` given `ln lambda_i`.
fn ln_power_sum(ln_eigs: &[f64], q: f64) -> f64 {
    log_sum_exp(ln_eigs.iter().map(|l| q * l))
}

/// `-sum lambda ln lambda` over the given logs.
fn von_neumann_from_ln(ln_eigs: &[f64]) -> f64 {
    -ln_eigs.iter().map(|&l| l.exp() * l).sum::<f64>()
}

/// Von Neumann (Shannon) entropy in nats; zero eigenvalues contribute nothing.
pub fn shannon(eigs: &[f64]) -> Result<f64> {
    Ok(von_neumann_from_ln(&ln_positive(eigs)?))
}

/// Tsallis entropy `(sum lambda^q - 1) / (1 - q)`; the von Neumann entropy at `q = 1`.
pub fn tsallis(eigs: &[f64], q: f64) -> Result<f64> {
    check_q(q)?;
    let ln_eigs = ln_positive(eigs)?;
    if q == 1.0 {
        return Ok(von_neumann_from_ln(&ln_eigs));
    }
    let power_sum = ln_power_sum(&ln_eigs, q).exp();
    Ok((power_sum - 1.0) / (1.0 - q))
}

fn ar_from_ln(ln_joint: &[f64], ln_marginal: &[f64], q: f64) -> Result<f64> {
    if ln_marginal.is_empty() {
        return Err(Error::Domain("empty marginal spectrum".into()));
    }
    if q == 1.0 {
        return Ok(von_neumann_from_ln(ln_joint) - von_neumann_from_ln(ln_marginal));
    }
    let ln_ratio = ln_power_sum(ln_joint, q) - ln_power_sum(ln_marginal, q);
    Ok(-ln_ratio.exp_m1() / (q - 1.0))
}

/// Abe-Rajagopal conditional entropy from the spectra of `rho_XY` and `rho_Y`.
///
/// At `q = 1` this is the von Neumann conditional entropy `S(XY) - S(Y)`.
pub fn ar_conditional(joint_eigs: &[f64], marginal_eigs: &[f64], q: f64) -> Result<f64> {
    check_q(q)?;
    let ln_joint = ln_positive(joint_eigs)?;
    let ln_marginal = ln_positive(marginal_eigs)?;
    if ln_marginal.is_empty() {
        return Err(Error::Domain("empty marginal spectrum".into()));
    }
    let (tj, tm): (f64, f64) = (joint_eigs.iter().sum(), marginal_eigs.iter().sum());
    if (tj - tm).abs() > DEFAULT_TRACE_TOLERANCE {
        return Err(Error::Validation(format!(
            "joint and marginal spectra have different totals ({tj} vs {tm})"
        )));
    }
    ar_from_ln(&ln_joint, &ln_marginal, q)
}

/// How [`ar_for_state`] obtains the spectra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathChoice {
    /// Closed forms for pure families at nonzero acceleration, matrices otherwise.
    #[default]
    Auto,
    Analytic,
    Numeric,
}

/// One conditional-entropy evaluation request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyQuery {
    pub family: StateFamily,
    pub accel: AccelerationParam,
    pub q: f64,
    /// Fock cutoff for the matrix path; chosen from `trace_tolerance` when `None`.
    pub cutoff: Option<FockCutoff>,
    /// Term count for the analytic path; [`DEFAULT_ANALYTIC_TERMS`] when `None`.
    pub analytic_terms: Option<usize>,
    pub trace_tolerance: f64,
    pub path: PathChoice,
}

impl EntropyQuery {
    pub fn new(family: StateFamily, accel: AccelerationParam, q: f64) -> Self {
        Self {
            family,
            accel,
            q,
            cutoff: None,
            analytic_terms: None,
            trace_tolerance: DEFAULT_TRACE_TOLERANCE,
            path: PathChoice::Auto,
        }
    }

    pub fn with_cutoff(mut self, cutoff: FockCutoff) -> Self {
        self.cutoff = Some(cutoff);
        self
    }

    pub fn with_analytic_terms(mut self, k: usize) -> Self {
        self.analytic_terms = Some(k);
        self
    }

    pub fn with_path(mut self, path: PathChoice) -> Self {
        self.path = path;
        self
    }

    pub fn with_trace_tolerance(mut self, tol: f64) -> Self {
        self.trace_tolerance = tol;
        self
    }
}

/// Route actually taken by an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "path", rename_all = "kebab-case")]
pub enum EvaluationPath {
    Analytic { terms: usize },
    Numeric { n_max: usize },
}

impl EvaluationPath {
    pub fn name(&self) -> &'static str {
        match self {
            EvaluationPath::Analytic { .. } => "analytic",
            EvaluationPath::Numeric { .. } => "numeric",
        }
    }
}

/// Conditional entropy together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyEvaluation {
    pub value: f64,
    pub trace_deficit: f64,
    pub path: EvaluationPath,
}

fn check_deficit(deficit: f64, tolerance: f64) -> Result<()> {
    if deficit > tolerance {
        return Err(Error::TraceDeficit { deficit, tolerance });
    }
    Ok(())
}

fn evaluate_analytic(query: &EntropyQuery) -> Result<EntropyEvaluation> {
    let (joint, marginal) = analytic_spectra(&query.family, &query.accel)?;
    let k = query.analytic_terms.unwrap_or(DEFAULT_ANALYTIC_TERMS);
    let ln_joint: Vec<f64> = (0..k).map(|n| joint.ln_term(n)).filter(|l| l.is_finite()).collect();
    let ln_marginal: Vec<f64> = (0..k)
        .map(|n| marginal.ln_term(n))
        .filter(|l| l.is_finite())
        .collect();
    let sum = |ls: &[f64]| ls.iter().map(|l| l.exp()).sum::<f64>();
    let deficit = (1.0 - sum(&ln_joint)).max(1.0 - sum(&ln_marginal)).max(0.0);
    check_deficit(deficit, query.trace_tolerance)?;
    Ok(EntropyEvaluation {
        value: ar_from_ln(&ln_joint, &ln_marginal, query.q)?,
        trace_deficit: deficit,
        path: EvaluationPath::Analytic { terms: k },
    })
}

fn evaluate_numeric(query: &EntropyQuery) -> Result<EntropyEvaluation> {
    let cutoff = match query.cutoff {
        Some(c) => c,
        None => FockCutoff::for_tolerance(&query.accel, query.trace_tolerance)?,
    };
    let rho = accelerated_density(&query.family, &query.accel, cutoff)?;
    check_deficit(rho.trace_deficit(), query.trace_tolerance)?;
    let joint = spectral::eigenvalues_sym(rho.matrix())?;
    let reduced = spectral::partial_trace_inertial(&rho);
    let marginal = spectral::eigenvalues_sym(reduced.matrix())?;
    Ok(EntropyEvaluation {
        value: ar_from_ln(&ln_positive(&joint)?, &ln_positive(&marginal)?, query.q)?,
        trace_deficit: rho.trace_deficit(),
        path: EvaluationPath::Numeric {
            n_max: cutoff.n_max(),
        },
    })
}

/// Conditional entropy `S_q(inertial | accelerated)` with evaluation metadata.
pub fn evaluate(query: &EntropyQuery) -> Result<EntropyEvaluation> {
    check_q(query.q)?;
    if !(query.trace_tolerance > 0.0) {
        return Err(Error::Domain(format!(
            "trace tolerance {} must be positive",
            query.trace_tolerance
        )));
    }
    query.family.validate()?;
    match query.path {
        PathChoice::Analytic => evaluate_analytic(query),
        PathChoice::Numeric => evaluate_numeric(query),
        PathChoice::Auto => {
            // lambda = 0: the closed forms are 0/0; the matrix path with n_max = 0 is exact.
            if query.family.is_pure() && !query.accel.is_inertial() {
                evaluate_analytic(query)
            } else {
                evaluate_numeric(query)
            }
        }
    }
}

/// Conditional entropy `S_q(inertial | accelerated)` of the queried state.
pub fn ar_for_state(query: &EntropyQuery) -> Result<f64> {
    evaluate(query).map(|e| e.value)
}
