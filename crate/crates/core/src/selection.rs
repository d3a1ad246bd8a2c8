//! Stepwise model selection and weighted average effects.
//!
//! Two procedures are provided:
//!
//! * [`forward_margin_selection`] (LML only) walks the response patterns by
//!   size. For every `D` it fits the marginal model of `Y_D | X_U`, keeping
//!   the zeros already chosen for the sub-patterns of `D`, drops the
//!   coefficients of row `D` whose Wald p-value exceeds `alpha` and refits.
//!   Upward compatibility of the LML parameters makes row `D` of the marginal
//!   model the same quantity as row `D` of the joint model.
//! * [`backward_staged_selection`] starts from the saturated model, zeroes the
//!   highest-order covariate interaction column, then drops non-significant
//!   coefficients in stages (large patterns first) until every remaining
//!   coefficient is significant.
//!
//! Within a stage all failing coefficients are dropped together and the model
//! is refitted once.

use std::collections::BTreeSet;

use log::warn;
use serde::Serialize;
use thiserror::Error;

use crate::inference::table::{compress, expand};
use crate::inference::{
    coefficient_order, fit, CountTable, DataError, FitError, FitOptions, FitResult, ModelSpec,
};
use crate::params::Link;

/// Normal quantile used for the 95% intervals.
pub const Z95: f64 = 1.96;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectionError {
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("invalid argument: {0}")]
    Argument(String),
}

impl From<DataError> for SelectionError {
    fn from(e: DataError) -> Self {
        SelectionError::Fit(FitError::Data(e))
    }
}

/// One fitted model along a selection path. Coefficient pairs always use the
/// masks of the full response set.
#[derive(Debug, Clone, Serialize)]
pub struct SelectionStep {
    pub stage: String,
    /// Response pattern whose marginal model was fitted (forward procedure).
    pub margin: Option<usize>,
    pub zeros: Vec<(usize, usize)>,
    pub deviance: f64,
    pub df: usize,
    pub p_value: f64,
    pub dropped: Vec<(usize, usize)>,
    /// Fit failure for this step, if any; the path continues without drops.
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SelectionTrace {
    pub steps: Vec<SelectionStep>,
    pub final_spec: ModelSpec,
    pub final_fit: FitResult,
}

fn check_alpha(alpha: f64) -> Result<(), SelectionError> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(SelectionError::Argument(format!("alpha must lie in (0, 1], got {alpha}")))
    }
}

/// Free coefficients of `fit` in rows accepted by `rows` whose Wald p-value
/// exceeds `alpha`. Univariate intercepts are never candidates, and
/// coefficients without a p-value are kept.
fn non_significant(fit: &FitResult, alpha: f64, rows: impl Fn(usize) -> bool) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = fit
        .free
        .iter()
        .zip(&fit.wald_p)
        .filter(|((d, e), _)| rows(*d) && !(d.count_ones() == 1 && *e == 0))
        .filter(|(_, p)| p.is_some_and(|p| p > alpha))
        .map(|(c, _)| *c)
        .collect();
    out.sort_by_key(|&(d, e)| coefficient_order(d, e));
    out
}

fn bit_positions(mask: usize, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask >> i & 1 == 1).collect()
}

/// Forward per-margin selection for the LML link.
pub fn forward_margin_selection(
    data: &CountTable,
    link: Link,
    alpha: f64,
    options: &FitOptions,
) -> Result<SelectionTrace, SelectionError> {
    if link != Link::Lml {
        return Err(SelectionError::Argument(
            "forward per-margin selection relies on upward compatibility and needs the LML link".into(),
        ));
    }
    check_alpha(alpha)?;
    let p = data.responses().ground_size();
    let order = data.responses().display_order();
    let mut zeros: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut steps = Vec::new();

    for k in 1..=p {
        for &d in order.iter().filter(|d| d.count_ones() as usize == k) {
            let positions = bit_positions(d, p);
            let margin = data.marginal(d)?;
            let inherited: Vec<(usize, usize)> = zeros
                .iter()
                .filter(|(r, _)| r & !d == 0)
                .map(|&(r, e)| (compress(r, &positions), e))
                .collect();
            let spec = ModelSpec::new(Link::Lml, inherited)?;
            let top = margin.responses().full();
            let first = match fit(&spec, &margin, options) {
                Ok(f) => f,
                Err(e) => {
                    steps.push(SelectionStep {
                        stage: format!("step {k}"),
                        margin: Some(d),
                        zeros: expand_all(spec.zero_set(), &positions),
                        deviance: f64::NAN,
                        df: spec.df(),
                        p_value: f64::NAN,
                        dropped: Vec::new(),
                        error: Some(e.to_string()),
                    });
                    continue;
                }
            };
            let drop = non_significant(&first, alpha, |r| r == top);
            let (chosen, result) = if drop.is_empty() {
                (spec, Ok(first))
            } else {
                let reduced = spec.with_zeros(drop.iter().copied())?;
                let refit = fit(&reduced, &margin, options);
                (reduced, refit)
            };
            let dropped: Vec<(usize, usize)> =
                drop.iter().map(|&(r, e)| (expand(r, &positions), e)).collect();
            let (deviance, df, p_value, error) = match &result {
                Ok(f) => (f.deviance, f.df, f.deviance_p, None),
                Err(e) => (f64::NAN, chosen.df(), f64::NAN, Some(e.to_string())),
            };
            steps.push(SelectionStep {
                stage: format!("step {k}"),
                margin: Some(d),
                zeros: expand_all(chosen.zero_set(), &positions),
                deviance,
                df,
                p_value,
                dropped: dropped.clone(),
                error,
            });
            zeros.extend(dropped);
        }
    }

    let final_spec = ModelSpec::new(Link::Lml, zeros)?;
    let final_fit = fit(&final_spec, data, options)?;
    steps.push(SelectionStep {
        stage: "final".into(),
        margin: None,
        zeros: final_spec.zero_set().iter().copied().collect(),
        deviance: final_fit.deviance,
        df: final_fit.df,
        p_value: final_fit.deviance_p,
        dropped: Vec::new(),
        error: None,
    });
    Ok(SelectionTrace {
        steps,
        final_spec,
        final_fit,
    })
}

fn expand_all(zeros: &BTreeSet<(usize, usize)>, positions: &[usize]) -> Vec<(usize, usize)> {
    zeros.iter().map(|&(r, e)| (expand(r, positions), e)).collect()
}

/// A backward stage: drop non-significant coefficients of patterns with at
/// least `min_size` responses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    pub label: String,
    pub min_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagePolicy {
    /// Zero the column of the full covariate interaction before anything
    /// else (only meaningful with two or more covariates).
    pub force_top_interaction: bool,
    /// Stages run once each, in order.
    pub stages: Vec<Stage>,
    /// The last stage is repeated until nothing is dropped, at most this many
    /// extra times.
    pub max_repeats: usize,
}

impl StagePolicy {
    /// Default policy for `p` responses: higher-order patterns (`|D| ≥ 3`)
    /// first, then every pattern, repeated until all coefficients are
    /// significant.
    pub fn default_for(p: usize) -> Self {
        let mut stages = Vec::new();
        if p >= 3 {
            stages.push(Stage {
                label: "higher-order patterns".into(),
                min_size: 3,
            });
        }
        stages.push(Stage {
            label: "all patterns".into(),
            min_size: 1,
        });
        Self {
            force_top_interaction: true,
            stages,
            max_repeats: 10,
        }
    }
}

fn step_of(stage: String, spec: &ModelSpec, fit: &FitResult, dropped: Vec<(usize, usize)>) -> SelectionStep {
    SelectionStep {
        stage,
        margin: None,
        zeros: spec.zero_set().iter().copied().collect(),
        deviance: fit.deviance,
        df: fit.df,
        p_value: fit.deviance_p,
        dropped,
        error: None,
    }
}

/// Backward staged selection starting from the saturated model.
pub fn backward_staged_selection(
    data: &CountTable,
    link: Link,
    alpha: f64,
    policy: &StagePolicy,
    options: &FitOptions,
) -> Result<SelectionTrace, SelectionError> {
    check_alpha(alpha)?;
    if policy.stages.is_empty() {
        return Err(SelectionError::Argument("stage policy has no stages".into()));
    }
    let rows = data.responses().size();
    let top = data.covariates().full();
    let mut spec = ModelSpec::saturated(link);
    let mut forced = Vec::new();
    if policy.force_top_interaction && top.count_ones() >= 2 {
        forced = (1..rows).map(|d| (d, top)).collect();
        spec = spec.with_zeros(forced.iter().copied())?;
    }
    let mut current = fit(&spec, data, options)?;
    let mut steps = vec![step_of("M1".into(), &spec, &current, forced)];

    let last = policy.stages.len() - 1;
    let schedule = (0..policy.stages.len()).chain(std::iter::repeat_n(last, policy.max_repeats));
    for (i, s) in schedule.enumerate() {
        let stage = &policy.stages[s];
        let drop = non_significant(&current, alpha, |d| d.count_ones() as usize >= stage.min_size);
        if drop.is_empty() {
            if i >= last {
                break;
            }
            continue;
        }
        spec = spec.with_zeros(drop.iter().copied())?;
        current = fit(&spec, data, options)?;
        steps.push(step_of(
            format!("M{} ({})", steps.len() + 1, stage.label),
            &spec,
            &current,
            drop,
        ));
    }
    Ok(SelectionTrace {
        steps,
        final_spec: spec,
        final_fit: current,
    })
}

/// Weighted average of the effects of one covariate over the response
/// patterns of a given size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageEffect {
    pub k: usize,
    pub link: Link,
    pub estimate: f64,
    pub se: f64,
    pub ci: (f64, f64),
    /// `(D, w_D)` pairs; the weights sum to one.
    pub weights: Vec<(usize, f64)>,
}

/// Weights `w_D` for the patterns of size `k`: the share of observations
/// with all responses in `D` present among all such events of size `k`.
pub fn pattern_weights(data: &CountTable, k: usize) -> Option<Vec<(usize, f64)>> {
    let raw: Vec<(usize, f64)> = data
        .responses()
        .display_order()
        .into_iter()
        .filter(|d| d.count_ones() as usize == k)
        .map(|d| (d, data.count_all_present(d) as f64))
        .collect();
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    (total > 0.0).then(|| raw.into_iter().map(|(d, w)| (d, w / total)).collect())
}

/// Average effects `Σ w_D β̂_D({u})` for `k = 1..=p`, with delta-method
/// standard errors from the joint covariance of the fit. Sizes without any
/// qualifying observation are skipped.
pub fn average_effects(
    fit: &FitResult,
    data: &CountTable,
    covariate: usize,
) -> Result<Vec<AverageEffect>, SelectionError> {
    let q = data.covariates().ground_size();
    if covariate >= q {
        return Err(SelectionError::Argument(format!("covariate index {covariate} out of range")));
    }
    if fit.covariance.is_none() {
        return Err(SelectionError::Argument(
            "fit has no covariance matrix; average effects need standard errors".into(),
        ));
    }
    let col = 1 << covariate;
    let mut out = Vec::new();
    for k in 1..=data.responses().ground_size() {
        let Some(weights) = pattern_weights(data, k) else {
            warn!("no observation has a response pattern of size {k}; skipping");
            continue;
        };
        let estimate = weights.iter().map(|(d, w)| w * fit.coefficient(*d, col)).sum();
        let terms: Vec<((usize, usize), f64)> = weights.iter().map(|(d, w)| ((*d, col), *w)).collect();
        let se = fit.linear_combination_se(&terms).unwrap_or(f64::NAN);
        out.push(AverageEffect {
            k,
            link: fit.link(),
            estimate,
            se,
            ci: (estimate - Z95 * se, estimate + Z95 * se),
            weights,
        });
    }
    Ok(out)
}
