//! Maximum likelihood fitting over the free regression coefficients.
//!
//! The coefficient-to-probability map is available in closed form under both
//! links, so the product-multinomial log-likelihood is maximized directly
//! over the unconstrained coefficients with a damped Newton iteration. The
//! score is exact (reverse pass through the zeta/Möbius chain); the Hessian is
//! obtained by central differences of the score.

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::lattice::{self, SubsetLattice};
use crate::params::{self, Link, ParamError, ParamKind, ParamMatrix};

use super::model::ModelSpec;
use super::table::{CountTable, DataError};
use super::FitError;

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Convergence threshold on the sup-norm of the score.
    pub grad_tol: f64,
    pub max_halvings: usize,
    /// Step of the central differences used for the Hessian.
    pub hessian_step: f64,
    /// Pseudo-count added to every cell.
    pub smooth: Option<f64>,
    /// Drop covariate cells without observations from the likelihood instead
    /// of failing.
    pub allow_missing_cells: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            grad_tol: 1e-8,
            max_halvings: 30,
            hessian_step: 1e-5,
            smooth: None,
            allow_missing_cells: false,
        }
    }
}

/// `Σ n log π` over cells with positive count.
pub fn loglik(pi: &ParamMatrix, data: &CountTable) -> Result<f64, FitError> {
    pi.require(ParamKind::Pi)?;
    if pi.n_rows() != data.n_rows() || pi.n_cols() != data.n_cols() {
        return Err(FitError::Data(DataError::Shape {
            expected: pi.values().len(),
            got: data.counts().len(),
        }));
    }
    Ok(data
        .counts()
        .iter()
        .zip(pi.values())
        .filter(|(n, _)| **n > 0)
        .map(|(n, p)| *n as f64 * p.ln())
        .sum())
}

/// Goodness of fit against the saturated model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviance {
    pub g2: f64,
    pub df: usize,
    pub p_value: f64,
}

/// A Wald test of one free coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaldTest {
    pub response: usize,
    pub covariate: usize,
    pub estimate: f64,
    /// Absent when the variance estimate is not positive.
    pub std_error: Option<f64>,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub spec: ModelSpec,
    /// Coefficients of the spec's link, constrained entries exactly zero.
    pub beta_hat: ParamMatrix,
    pub pi_hat: ParamMatrix,
    /// Free coefficients in canonical order; indexes `estimates`,
    /// `covariance`, `std_errors` and `wald_p`.
    pub free: Vec<(usize, usize)>,
    pub estimates: Vec<f64>,
    /// Inverse observed information; absent when it is singular.
    pub covariance: Option<DMatrix<f64>>,
    pub std_errors: Vec<Option<f64>>,
    pub wald_p: Vec<Option<f64>>,
    pub loglik: f64,
    pub deviance: f64,
    pub df: usize,
    pub deviance_p: f64,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub smoothing: Option<f64>,
    /// Covariate cells left out of the likelihood for lack of observations.
    pub excluded_columns: Vec<usize>,
}

impl FitResult {
    pub fn link(&self) -> Link {
        self.spec.link()
    }

    pub fn index_of(&self, d: usize, e: usize) -> Option<usize> {
        self.free.iter().position(|&c| c == (d, e))
    }

    pub fn coefficient(&self, d: usize, e: usize) -> f64 {
        self.beta_hat.get(d, e)
    }

    pub fn std_error(&self, d: usize, e: usize) -> Option<f64> {
        self.index_of(d, e).and_then(|i| self.std_errors[i])
    }

    pub fn p_value(&self, d: usize, e: usize) -> Option<f64> {
        self.index_of(d, e).and_then(|i| self.wald_p[i])
    }

    pub fn deviance_summary(&self) -> Deviance {
        Deviance {
            g2: self.deviance,
            df: self.df,
            p_value: self.deviance_p,
        }
    }

    /// Standard error of `Σ w · β(D, E)` over the given coefficients;
    /// constrained coefficients contribute nothing.
    pub fn linear_combination_se(&self, terms: &[((usize, usize), f64)]) -> Option<f64> {
        let cov = self.covariance.as_ref()?;
        let mut w = DVector::zeros(self.free.len());
        for ((d, e), c) in terms {
            if let Some(i) = self.index_of(*d, *e) {
                w[i] += c;
            }
        }
        let var = (w.transpose() * cov * &w)[(0, 0)];
        (var >= 0.0).then(|| var.sqrt())
    }

    /// Standard errors of every entry of a linear image `A · vec(β̂)`, where
    /// `map` sends the coefficient matrix with a single unit entry to its
    /// image. Entries of the image with zero variance get `Some(0.0)`.
    pub fn mapped_std_errors(
        &self,
        map: impl Fn(&ParamMatrix) -> ParamMatrix,
    ) -> Option<Vec<f64>> {
        let cov = self.covariance.as_ref()?;
        let k = self.free.len();
        let m = self.beta_hat.values().len();
        let mut jac = DMatrix::zeros(m, k);
        for (j, &(d, e)) in self.free.iter().enumerate() {
            let mut unit = ParamMatrix::zeros(
                self.beta_hat.kind(),
                self.beta_hat.rows().clone(),
                self.beta_hat.cols().clone(),
            );
            unit.set(d, e, 1.0);
            for (i, v) in map(&unit).values().iter().enumerate() {
                jac[(i, j)] = *v;
            }
        }
        let var = &jac * cov * jac.transpose();
        Some((0..m).map(|i| var[(i, i)].max(0.0).sqrt()).collect())
    }

    pub fn wald_tests(&self) -> Vec<WaldTest> {
        wald_tests(self)
    }
}

/// Per-coefficient Wald tests with standard-normal two-sided p-values.
pub fn wald_tests(fit: &FitResult) -> Vec<WaldTest> {
    fit.free
        .iter()
        .enumerate()
        .map(|(i, &(d, e))| WaldTest {
            response: d,
            covariate: e,
            estimate: fit.estimates[i],
            std_error: fit.std_errors[i],
            p_value: fit.wald_p[i],
        })
        .collect()
}

/// Two-sided standard-normal tail probability of `estimate / se`.
pub fn wald_p_value(estimate: f64, se: f64) -> Option<f64> {
    if !(se > 0.0) || !se.is_finite() {
        return None;
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Some((2.0 * normal.sf((estimate / se).abs())).min(1.0))
}

/// Deviance `G² = 2 Σ n log(n / (N π̂))` of a fit against its data.
pub fn deviance(fit: &FitResult, data: &CountTable) -> Deviance {
    let counts = effective_counts(data, fit.smoothing, &fit.excluded_columns);
    let g2 = deviance_of(&counts, data.n_cols(), &fit.pi_hat);
    Deviance {
        g2,
        df: fit.df,
        p_value: chi_square_sf(g2, fit.df),
    }
}

/// Upper tail of the chi-square distribution; `1` for zero degrees of freedom.
pub fn chi_square_sf(x: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    ChiSquared::new(df as f64)
        .expect("positive degrees of freedom")
        .sf(x.max(0.0))
}

fn deviance_of(counts: &[f64], n_cols: usize, pi: &ParamMatrix) -> f64 {
    let mut totals = vec![0.0; n_cols];
    for (i, c) in counts.iter().enumerate() {
        totals[i % n_cols] += c;
    }
    let g2: f64 = counts
        .iter()
        .zip(pi.values())
        .enumerate()
        .filter(|(_, (n, _))| **n > 0.0)
        .map(|(i, (n, p))| n * (n / (totals[i % n_cols] * p)).ln())
        .sum();
    (2.0 * g2).max(0.0)
}

fn effective_counts(data: &CountTable, smooth: Option<f64>, excluded: &[usize]) -> Vec<f64> {
    let eps = smooth.unwrap_or(0.0);
    let nc = data.n_cols();
    data.counts()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if excluded.contains(&(i % nc)) {
                0.0
            } else {
                *c as f64 + eps
            }
        })
        .collect()
}

/// The log-likelihood as a function of the free coefficients of a model.
#[derive(Debug, Clone)]
pub struct Objective {
    link: Link,
    rows: SubsetLattice,
    cols: SubsetLattice,
    free: Vec<(usize, usize)>,
    counts: Vec<f64>,
}

impl Objective {
    /// Builds the objective using the cell counts exactly as given (no
    /// smoothing, every covariate cell included).
    pub fn new(spec: &ModelSpec, data: &CountTable) -> Result<Self, FitError> {
        Self::with_counts(spec, data, effective_counts(data, None, &[]))
    }

    fn with_counts(spec: &ModelSpec, data: &CountTable, counts: Vec<f64>) -> Result<Self, FitError> {
        spec.check_dims(data.responses(), data.covariates())?;
        Ok(Self {
            link: spec.link(),
            rows: data.responses().clone(),
            cols: data.covariates().clone(),
            free: spec.free_coefficients(data.responses(), data.covariates()),
            counts,
        })
    }

    pub fn free(&self) -> &[(usize, usize)] {
        &self.free
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    /// Full coefficient matrix with the given free values.
    pub fn beta(&self, x: &[f64]) -> ParamMatrix {
        let mut beta = ParamMatrix::zeros(self.link.coeff_kind(), self.rows.clone(), self.cols.clone());
        for (&(d, e), v) in self.free.iter().zip(x) {
            beta.set(d, e, *v);
        }
        beta
    }

    pub fn free_values(&self, beta: &ParamMatrix) -> Vec<f64> {
        self.free.iter().map(|&(d, e)| beta.get(d, e)).collect()
    }

    pub fn pi(&self, x: &[f64]) -> Result<ParamMatrix, ParamError> {
        params::pi_from_mu(&params::mu_from_beta(&self.beta(x))?)
    }

    pub fn loglik(&self, x: &[f64]) -> Result<f64, ParamError> {
        let pi = self.pi(x)?;
        Ok(self.loglik_of(&pi))
    }

    fn loglik_of(&self, pi: &ParamMatrix) -> f64 {
        self.counts
            .iter()
            .zip(pi.values())
            .filter(|(n, _)| **n > 0.0)
            .map(|(n, p)| n * p.ln())
            .sum()
    }

    /// Log-likelihood and its exact gradient with respect to the free
    /// coefficients.
    pub fn loglik_and_score(&self, x: &[f64]) -> Result<(f64, Vec<f64>), ParamError> {
        let mu = params::mu_from_beta(&self.beta(x))?;
        let pi = params::pi_from_mu(&mu)?;
        let ll = self.loglik_of(&pi);

        // ∂ℓ/∂π
        let mut g = ParamMatrix::new(
            ParamKind::Pi,
            self.rows.clone(),
            self.cols.clone(),
            self.counts
                .iter()
                .zip(pi.values())
                .map(|(n, p)| if *n > 0.0 { n / p } else { 0.0 })
                .collect(),
        )?;
        // π = M_V μ  =>  ∂ℓ/∂μ = M_Vᵀ ∂ℓ/∂π
        g = g.map_cols(lattice::mobius_in_place)?;
        // ∂ℓ/∂log μ
        let glog: Vec<f64> = g.values().iter().zip(mu.values()).map(|(a, m)| a * m).collect();
        g = ParamMatrix::new(ParamKind::LogMu, self.rows.clone(), self.cols.clone(), glog)?;
        if self.link == Link::Lml {
            // log μ = Z_Vᵀ γ  =>  ∂ℓ/∂γ = Z_V ∂ℓ/∂log μ
            g = g.map_cols(lattice::superset_zeta_in_place)?;
        }
        // θ = β Z_U  =>  ∂ℓ/∂β = ∂ℓ/∂θ Z_Uᵀ
        g = g.map_rows(lattice::superset_zeta_in_place)?;
        Ok((ll, self.free.iter().map(|&(d, e)| g.get(d, e)).collect()))
    }

    /// Central-difference Hessian of the score, symmetrized. Falls back to a
    /// one-sided difference next to the boundary of the parameter space.
    pub fn hessian(&self, x: &[f64], step: f64) -> Result<DMatrix<f64>, ParamError> {
        let k = x.len();
        let (_, g0) = self.loglik_and_score(x)?;
        let mut h = DMatrix::zeros(k, k);
        let mut xp = x.to_vec();
        for j in 0..k {
            xp[j] = x[j] + step;
            let plus = self.loglik_and_score(&xp).map(|r| r.1);
            xp[j] = x[j] - step;
            let minus = self.loglik_and_score(&xp).map(|r| r.1);
            xp[j] = x[j];
            let (a, b, width) = match (plus, minus) {
                (Ok(p), Ok(m)) => (p, m, 2.0 * step),
                (Ok(p), Err(_)) => (p, g0.clone(), step),
                (Err(_), Ok(m)) => (g0.clone(), m, step),
                (Err(e), Err(_)) => return Err(e),
            };
            for i in 0..k {
                h[(i, j)] = (a[i] - b[i]) / width;
            }
        }
        Ok((&h + h.transpose()) * 0.5)
    }
}

/// Ascent direction from the (negated) Hessian, damped until positive
/// definite.
fn newton_direction(info: &DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let k = grad.len();
    let scale = (info.trace().abs() / k.max(1) as f64).max(1e-12);
    let mut lambda = 0.0;
    for _ in 0..40 {
        let damped = info + DMatrix::identity(k, k) * lambda;
        if let Some(chol) = damped.cholesky() {
            let d = chol.solve(grad);
            if d.dot(grad) > 0.0 && d.iter().all(|v| v.is_finite()) {
                return d;
            }
        }
        lambda = if lambda == 0.0 { 1e-8 * scale } else { lambda * 10.0 };
    }
    grad / grad.norm().max(1.0)
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Starting values: the empirical saturated fit with constrained entries
/// dropped, then the independence model, then a constant-margins model.
fn initial_point(obj: &Objective, counts: &[f64], n_cols: usize) -> Result<Vec<f64>, FitError> {
    let (rows, cols) = (&obj.rows, &obj.cols);
    let nr = rows.size();
    let link = obj.link;
    let mut candidates = Vec::new();

    let any_zero = counts.iter().any(|c| *c <= 0.0);
    let pad = if any_zero { 0.5 } else { 0.0 };
    let mut totals = vec![0.0; n_cols];
    for (i, c) in counts.iter().enumerate() {
        totals[i % n_cols] += c + pad;
    }
    let pi = ParamMatrix::from_fn(ParamKind::Pi, rows.clone(), cols.clone(), |d, e| {
        (counts[d * n_cols + e] + pad) / totals[e]
    });
    if let Ok(beta) = params::beta_from_pi(&pi, link) {
        candidates.push(beta);
    }

    // independence: γ rows with |D| > 1 set to zero
    if let Ok(mu) = params::mu_from_pi(&pi) {
        if let Ok(mut gamma) = params::gamma_from_mu(&mu) {
            for d in (1..nr).filter(|d: &usize| d.count_ones() > 1) {
                for e in 0..n_cols {
                    gamma.set(d, e, 0.0);
                }
            }
            if let Ok(bg) = params::coeffs_from_link(&gamma) {
                match link {
                    Link::Lml => candidates.push(bg),
                    Link::Lm => {
                        if let Ok(bm) = params::beta_mu_from_beta_gamma(&bg) {
                            candidates.push(bm)
                        }
                    }
                }
            }
        }
    }

    // pooled margins, identical across covariate cells
    let n: f64 = totals.iter().sum();
    let mut bg = ParamMatrix::zeros(ParamKind::BetaGamma, rows.clone(), cols.clone());
    for v in 0..rows.ground_size() {
        let d = 1 << v;
        let present: f64 = (0..nr)
            .filter(|y| y & d == d)
            .map(|y| (0..n_cols).map(|e| counts[y * n_cols + e] + pad).sum::<f64>())
            .sum();
        let m = (present / n).clamp(1e-3, 0.999);
        bg.set(d, 0, m.ln());
    }
    match link {
        Link::Lml => candidates.push(bg),
        Link::Lm => {
            if let Ok(bm) = params::beta_mu_from_beta_gamma(&bg) {
                candidates.push(bm)
            }
        }
    }

    candidates
        .iter()
        .map(|beta| obj.free_values(beta))
        .find(|x| obj.loglik(x).map(f64::is_finite).unwrap_or(false))
        .ok_or(FitError::NoValidStart)
}

/// Maximum likelihood fit of `spec` to `data`.
pub fn fit(spec: &ModelSpec, data: &CountTable, options: &FitOptions) -> Result<FitResult, FitError> {
    spec.check_dims(data.responses(), data.covariates())?;
    let missing = data.missing_columns();
    if !missing.is_empty() && !options.allow_missing_cells {
        return Err(FitError::Data(DataError::MissingCovariateCell(missing[0])));
    }
    let smoothing = options.smooth.filter(|eps| *eps > 0.0);
    if spec.is_saturated() && smoothing.is_none() {
        let nc = data.n_cols();
        if let Some(i) = data
            .counts()
            .iter()
            .enumerate()
            .position(|(i, c)| *c == 0 && !missing.contains(&(i % nc)))
        {
            return Err(FitError::Data(DataError::EmptyCell {
                row: i / nc,
                col: i % nc,
            }));
        }
    }
    let counts = effective_counts(data, smoothing, &missing);
    let obj = Objective::with_counts(spec, data, counts.clone())?;

    let mut x = initial_point(&obj, &counts, data.n_cols())?;
    let (mut ll, mut grad) = obj.loglik_and_score(&x)?;
    let mut iterations = 0;
    let mut converged = sup_norm(&grad) <= options.grad_tol;
    while !converged && iterations < options.max_iter {
        let info = -obj.hessian(&x, options.hessian_step)?;
        let g = DVector::from_column_slice(&grad);
        let dir = newton_direction(&info, &g);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=options.max_halvings {
            let cand: Vec<f64> = x.iter().zip(dir.iter()).map(|(a, b)| a + t * b).collect();
            if let Ok((l, gr)) = obj.loglik_and_score(&cand) {
                if l.is_finite() && l >= ll - 1e-12 * (1.0 + ll.abs()) {
                    accepted = Some((cand, l, gr));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((cand, l, gr)) = accepted else {
            break;
        };
        x = cand;
        ll = l;
        grad = gr;
        iterations += 1;
        converged = sup_norm(&grad) <= options.grad_tol;
    }

    let covariance = obj
        .hessian(&x, options.hessian_step)
        .ok()
        .and_then(|h| (-h).cholesky())
        .map(|c| c.inverse());
    let k = x.len();
    let std_errors: Vec<Option<f64>> = (0..k)
        .map(|i| {
            covariance
                .as_ref()
                .map(|c| c[(i, i)])
                .filter(|v| *v > 0.0 && v.is_finite())
                .map(f64::sqrt)
        })
        .collect();
    let wald_p = x
        .iter()
        .zip(&std_errors)
        .map(|(b, se)| se.and_then(|s| wald_p_value(*b, s)))
        .collect();

    let beta_hat = obj.beta(&x);
    let pi_hat = obj.pi(&x)?;
    let g2 = deviance_of(&counts, data.n_cols(), &pi_hat);
    let df = spec.df();
    Ok(FitResult {
        spec: spec.clone(),
        beta_hat,
        pi_hat,
        free: obj.free.clone(),
        estimates: x,
        covariance,
        std_errors,
        wald_p,
        loglik: ll,
        deviance: g2,
        df,
        deviance_p: chi_square_sf(g2, df),
        converged,
        iterations,
        gradient_norm: sup_norm(&grad),
        smoothing,
        excluded_columns: missing,
    })
}
