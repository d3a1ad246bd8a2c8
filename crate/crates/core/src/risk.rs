//! Relative risks, reference relative risks and the independence structure
//! implied by zero coefficients.
//!
//! Everything is on the log scale. For a covariate `u` and a context
//! `E ⊆ U \ {u}` (the covariates in `E` at level 1, the rest at 0),
//!
//! * `log RR_u(Y^D = 1 | E) = Σ_{E' ⊆ E} β^μ_D(E' ∪ {u})`;
//! * the reference relative risk replaces `β^μ_D` with the reference
//!   coefficients `ℬ_D = -Σ_{D' ⊊ D} (-1)^{|D \ D'|} β^μ_{D'}`, the value
//!   `β^μ_D` takes when `Y_D` splits into conditionally independent blocks;
//! * their difference is `Σ_{E' ⊆ E} β^γ_D(E' ∪ {u})`.

use serde::Serialize;
use thiserror::Error;

use crate::inference::ModelSpec;
use crate::lattice::{parity_sign, subsets_of, SubsetLattice};
use crate::params::{self, Link, ParamError, ParamKind, ParamMatrix};

/// Tolerance used when scanning fitted coefficients for zeros.
pub const FITTED_ZERO_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RiskError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("invalid argument: {0}")]
    Argument(String),
}

/// Reference coefficients `ℬ^μ`; rows with `|D| ≤ 1` are zero.
pub fn reference_coeffs(beta_mu: &ParamMatrix) -> Result<ParamMatrix, RiskError> {
    beta_mu.require(ParamKind::BetaMu)?;
    Ok(ParamMatrix::from_fn(
        ParamKind::RefB,
        beta_mu.rows().clone(),
        beta_mu.cols().clone(),
        |d, e| {
            if d.count_ones() < 2 {
                return 0.0;
            }
            -subsets_of(d)
                .filter(|&s| s != d)
                .map(|s| parity_sign(d & !s) * beta_mu.get(s, e))
                .sum::<f64>()
        },
    ))
}

fn check_context(m: &ParamMatrix, d: usize, u: usize, e: usize) -> Result<usize, RiskError> {
    if d >= m.n_rows() {
        return Err(RiskError::Argument(format!("response set {d:#b} out of range")));
    }
    if u >= m.cols().ground_size() {
        return Err(RiskError::Argument(format!("covariate index {u} out of range")));
    }
    let bit = 1 << u;
    if e >= m.n_cols() || e & bit != 0 {
        return Err(RiskError::Argument(format!(
            "context {e:#b} must be a covariate set not containing covariate {u}"
        )));
    }
    Ok(bit)
}

fn context_sum(m: &ParamMatrix, d: usize, bit: usize, e: usize) -> f64 {
    subsets_of(e).map(|s| m.get(d, s | bit)).sum()
}

/// `log RR_u(Y^D = 1 | E)` from LM coefficients. `D = ∅` gives 0.
pub fn log_relative_risk(beta_mu: &ParamMatrix, d: usize, u: usize, e: usize) -> Result<f64, RiskError> {
    beta_mu.require(ParamKind::BetaMu)?;
    let bit = check_context(beta_mu, d, u, e)?;
    Ok(context_sum(beta_mu, d, bit, e))
}

/// `log RR_u(Y^D = 1 | E)` as the log ratio of mean parameters
/// `μ_D(E ∪ {u}) / μ_D(E)`.
pub fn log_relative_risk_from_mu(mu: &ParamMatrix, d: usize, u: usize, e: usize) -> Result<f64, RiskError> {
    mu.require(ParamKind::Mu)?;
    let bit = check_context(mu, d, u, e)?;
    Ok((mu.get(d, e | bit) / mu.get(d, e)).ln())
}

fn require_pattern(d: usize) -> Result<(), RiskError> {
    if d.count_ones() < 2 {
        return Err(RiskError::Argument(format!(
            "reference relative risks need at least two responses, got {d:#b}"
        )));
    }
    Ok(())
}

/// `log 𝓡𝓡_u(Y^D = 1 | E)` as a sum of reference coefficients.
pub fn log_reference_rr(beta_mu: &ParamMatrix, d: usize, u: usize, e: usize) -> Result<f64, RiskError> {
    beta_mu.require(ParamKind::BetaMu)?;
    let bit = check_context(beta_mu, d, u, e)?;
    require_pattern(d)?;
    let refb = reference_coeffs(beta_mu)?;
    Ok(context_sum(&refb, d, bit, e))
}

/// `log 𝓡𝓡_u(Y^D = 1 | E)` as the signed product of the relative risks of
/// the proper sub-patterns of `D`.
pub fn log_reference_rr_product(
    beta_mu: &ParamMatrix,
    d: usize,
    u: usize,
    e: usize,
) -> Result<f64, RiskError> {
    beta_mu.require(ParamKind::BetaMu)?;
    check_context(beta_mu, d, u, e)?;
    require_pattern(d)?;
    let mut total = 0.0;
    for s in subsets_of(d).filter(|&s| s != d) {
        // exponent (-1)^{|D \ D'| + 1}
        total -= parity_sign(d & !s) * log_relative_risk(beta_mu, s, u, e)?;
    }
    Ok(total)
}

/// `log(RR / 𝓡𝓡)` from LML coefficients.
pub fn log_rr_ratio(beta_gamma: &ParamMatrix, d: usize, u: usize, e: usize) -> Result<f64, RiskError> {
    beta_gamma.require(ParamKind::BetaGamma)?;
    let bit = check_context(beta_gamma, d, u, e)?;
    require_pattern(d)?;
    Ok(context_sum(beta_gamma, d, bit, e))
}

/// One `(D, u, E)` row of a [`RiskReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskEntry {
    pub response: usize,
    pub covariate: usize,
    pub context: usize,
    pub log_rr: f64,
    /// Absent for `|D| ≤ 1`.
    pub log_ref_rr: Option<f64>,
    pub log_ratio: Option<f64>,
    /// The model forces the relative risk to equal its reference value.
    pub constrained: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport {
    pub entries: Vec<RiskEntry>,
}

/// Relative risks for every nonempty `D`, covariate `u` and context
/// `E ⊆ U \ {u}`. `beta` may hold either link's coefficients. With a model
/// spec, entries whose ratio is structurally zero are flagged.
pub fn risk_report(beta: &ParamMatrix, spec: Option<&ModelSpec>) -> Result<RiskReport, RiskError> {
    let (beta_mu, beta_gamma) = match beta.kind() {
        ParamKind::BetaMu => (beta.clone(), params::beta_gamma_from_beta_mu(beta)?),
        ParamKind::BetaGamma => (params::beta_mu_from_beta_gamma(beta)?, beta.clone()),
        other => {
            return Err(RiskError::Param(ParamError::KindMismatch {
                expected: ParamKind::BetaMu,
                got: other,
            }))
        }
    };
    let refb = reference_coeffs(&beta_mu)?;
    let zero = gamma_zero_pattern(spec);
    let q = beta.cols().ground_size();
    let mut entries = Vec::new();
    for d in beta.rows().display_order().into_iter().filter(|d| *d != 0) {
        for u in 0..q {
            let bit = 1 << u;
            for e in beta.cols().display_order().into_iter().filter(|e| e & bit == 0) {
                let log_rr = context_sum(&beta_mu, d, bit, e);
                let (log_ref_rr, log_ratio, constrained) = if d.count_ones() > 1 {
                    let constrained = zero
                        .as_ref()
                        .is_some_and(|z| subsets_of(e).all(|s| z(d, s | bit)));
                    (
                        Some(context_sum(&refb, d, bit, e)),
                        Some(context_sum(&beta_gamma, d, bit, e)),
                        constrained,
                    )
                } else {
                    (None, None, false)
                };
                entries.push(RiskEntry {
                    response: d,
                    covariate: u,
                    context: e,
                    log_rr,
                    log_ref_rr,
                    log_ratio,
                    constrained,
                });
            }
        }
    }
    Ok(RiskReport { entries })
}

/// Where response independencies are read from.
#[derive(Debug, Clone, Copy)]
pub enum IndependenceSource<'a> {
    /// Structural zeros of a model.
    Spec {
        spec: &'a ModelSpec,
        responses: &'a SubsetLattice,
        covariates: &'a SubsetLattice,
    },
    /// Fitted LML coefficients, with entries below `tol` treated as zero.
    Fitted { beta_gamma: &'a ParamMatrix, tol: f64 },
}

/// `Y_A ⊥ Y_B | X_U` for the bipartition `A ∪ B = D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ResponseIndependence {
    pub pattern: usize,
    pub left: usize,
    pub right: usize,
}

/// `Y_D ⊥ X_{U'} | X_{U \ U'}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CovariateIndependence {
    pub responses: usize,
    pub covariates: usize,
}

type ZeroFn<'a> = Box<dyn Fn(usize, usize) -> bool + 'a>;

/// Structural zeros of `β^γ` implied by a spec. Under the LM link an LML
/// coefficient vanishes when every LM coefficient of its sub-patterns does.
fn gamma_zero_pattern(spec: Option<&ModelSpec>) -> Option<ZeroFn<'_>> {
    let spec = spec?;
    Some(match spec.link() {
        Link::Lml => Box::new(move |d, e| spec.is_zero(d, e)),
        Link::Lm => Box::new(move |d, e| subsets_of(d).all(|s| spec.is_zero(s, e))),
    })
}

fn straddles(d: usize, a: usize, b: usize) -> bool {
    d & a != 0 && d & b != 0
}

/// Every `(D, A, B)` with `|D| > 1` for which the zero pattern implies
/// `Y_A ⊥ Y_B | X_U`. Each unordered bipartition is reported once, with the
/// lowest element of `D` in `A`.
pub fn implied_response_independencies(source: IndependenceSource<'_>) -> Vec<ResponseIndependence> {
    let (n_rows, n_cols, zero): (usize, usize, ZeroFn<'_>) = match source {
        IndependenceSource::Spec {
            spec,
            responses,
            covariates,
        } => (
            responses.size(),
            covariates.size(),
            gamma_zero_pattern(Some(spec)).expect("spec given"),
        ),
        IndependenceSource::Fitted { beta_gamma, tol } => (
            beta_gamma.n_rows(),
            beta_gamma.n_cols(),
            Box::new(move |d, e| beta_gamma.get(d, e).abs() <= tol),
        ),
    };
    let mut out = Vec::new();
    for d in (1..n_rows).filter(|d: &usize| d.count_ones() > 1) {
        let low = d & d.wrapping_neg();
        for a in subsets_of(d).filter(|a| a & low != 0 && *a != d) {
            let b = d & !a;
            let holds = subsets_of(d)
                .filter(|&s| straddles(s, a, b))
                .all(|s| (0..n_cols).all(|e| zero(s, e)));
            if holds {
                out.push(ResponseIndependence {
                    pattern: d,
                    left: a,
                    right: b,
                });
            }
        }
    }
    out
}

/// Every `(D, U')` with `D, U'` nonempty such that all coefficients
/// `(D', E)` with `∅ ≠ D' ⊆ D` and `E ∩ U' ≠ ∅` are constrained to zero.
/// The pattern has the same meaning under both links.
pub fn implied_covariate_independencies(
    spec: &ModelSpec,
    responses: &SubsetLattice,
    covariates: &SubsetLattice,
) -> Vec<CovariateIndependence> {
    let mut out = Vec::new();
    for d in responses.display_order().into_iter().filter(|d| *d != 0) {
        for u in covariates.display_order().into_iter().filter(|u| *u != 0) {
            let holds = subsets_of(d).filter(|s| *s != 0).all(|s| {
                (0..covariates.size())
                    .filter(|e| e & u != 0)
                    .all(|e| spec.is_zero(s, e))
            });
            if holds {
                out.push(CovariateIndependence {
                    responses: d,
                    covariates: u,
                });
            }
        }
    }
    out
}
