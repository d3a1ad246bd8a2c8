//! The parameterization chain `π ↔ μ ↔ γ` and regression coefficients
//! `β = θ M_U`.
//!
//! Every quantity is a [`ParamMatrix`]: rows indexed by response subsets
//! `D ⊆ V`, columns by covariate cells `E ⊆ U`. Each map is a product with a
//! zeta or Möbius matrix on one side, computed with the fast transforms from
//! [`crate::lattice`]:
//!
//! | map                     | formula            | transform           |
//! |-------------------------|--------------------|---------------------|
//! | `mu_from_pi`            | `μ = Z_V π`        | superset sums, rows |
//! | `gamma_from_mu`         | `γ = M_Vᵀ log μ`   | subset Möbius, rows |
//! | `coeffs_from_link`      | `β = θ M_U`        | subset Möbius, cols |
//! | `beta_gamma_from_beta_mu` | `β^γ = M_Vᵀ β^μ` | subset Möbius, rows |
//!
//! The LM link uses `θ = log μ` and the LML link uses `θ = γ`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{self, LatticeError, SubsetLattice};

/// Tolerance for the equality-type invariants (column sums, row `∅`).
pub const VALIDITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    /// Cell probabilities `π_D(E) = pr(Y_D = 1, Y_{V\D} = 0 | E)`.
    Pi,
    /// Mean parameters `μ_D(E) = pr(Y_D = 1 | E)`.
    Mu,
    /// `log μ`, the LM link.
    LogMu,
    /// Log-mean linear parameters, the LML link.
    Gamma,
    BetaMu,
    BetaGamma,
    /// Reference coefficients of the LM regression.
    RefB,
}

impl ParamKind {
    pub const ALL: [ParamKind; 7] = [
        ParamKind::Pi,
        ParamKind::Mu,
        ParamKind::LogMu,
        ParamKind::Gamma,
        ParamKind::BetaMu,
        ParamKind::BetaGamma,
        ParamKind::RefB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParamKind::Pi => "pi",
            ParamKind::Mu => "mu",
            ParamKind::LogMu => "log_mu",
            ParamKind::Gamma => "gamma",
            ParamKind::BetaMu => "beta_mu",
            ParamKind::BetaGamma => "beta_gamma",
            ParamKind::RefB => "ref_b",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name.trim())
    }
}

impl fmt::Display for ParamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Link function of the regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    /// Log-mean: `θ = log μ`.
    Lm,
    /// Log-mean linear: `θ = γ = M_Vᵀ log μ`.
    Lml,
}

impl Link {
    pub fn link_kind(self) -> ParamKind {
        match self {
            Link::Lm => ParamKind::LogMu,
            Link::Lml => ParamKind::Gamma,
        }
    }

    pub fn coeff_kind(self) -> ParamKind {
        match self {
            Link::Lm => ParamKind::BetaMu,
            Link::Lml => ParamKind::BetaGamma,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Link::Lm => "lm",
            Link::Lml => "lml",
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("shape mismatch: expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("expected a {expected} matrix, got {got}")]
    KindMismatch { expected: ParamKind, got: ParamKind },
    #[error("lattice mismatch between operands")]
    LatticeMismatch,
    #[error("invalid {kind} matrix at cell (D={row:#b}, E={col:#b}): {reason}")]
    Validation {
        kind: ParamKind,
        row: usize,
        col: usize,
        reason: &'static str,
    },
    /// The implied cell probability is not strictly positive: the
    /// parameters lie outside the region that defines a distribution.
    #[error("implied cell probability {value:e} at (D={row:#b}, E={col:#b}) is not positive")]
    Boundary { row: usize, col: usize, value: f64 },
    #[error("log of non-positive value {value:e} at (D={row:#b}, E={col:#b})")]
    Domain { row: usize, col: usize, value: f64 },
}

/// Dense `2^p × 2^q` matrix of parameters, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamMatrix {
    kind: ParamKind,
    rows: SubsetLattice,
    cols: SubsetLattice,
    values: Vec<f64>,
}

impl ParamMatrix {
    pub fn new(
        kind: ParamKind,
        rows: SubsetLattice,
        cols: SubsetLattice,
        values: Vec<f64>,
    ) -> Result<Self, ParamError> {
        let expected = rows.size() * cols.size();
        if values.len() != expected {
            return Err(ParamError::Shape {
                expected,
                got: values.len(),
            });
        }
        Ok(Self {
            kind,
            rows,
            cols,
            values,
        })
    }

    pub fn zeros(kind: ParamKind, rows: SubsetLattice, cols: SubsetLattice) -> Self {
        let n = rows.size() * cols.size();
        Self {
            kind,
            rows,
            cols,
            values: vec![0.0; n],
        }
    }

    /// Builds a matrix from a closure over `(D, E)` masks.
    pub fn from_fn(
        kind: ParamKind,
        rows: SubsetLattice,
        cols: SubsetLattice,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Self {
        let (nr, nc) = (rows.size(), cols.size());
        let mut values = Vec::with_capacity(nr * nc);
        for d in 0..nr {
            for e in 0..nc {
                values.push(f(d, e));
            }
        }
        Self {
            kind,
            rows,
            cols,
            values,
        }
    }

    pub fn kind(&self) -> ParamKind {
        self.kind
    }

    pub fn rows(&self) -> &SubsetLattice {
        &self.rows
    }

    pub fn cols(&self) -> &SubsetLattice {
        &self.cols
    }

    pub fn n_rows(&self) -> usize {
        self.rows.size()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.size()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, d: usize, e: usize) -> f64 {
        self.values[d * self.n_cols() + e]
    }

    pub fn set(&mut self, d: usize, e: usize, v: f64) {
        let nc = self.n_cols();
        self.values[d * nc + e] = v;
    }

    pub fn row(&self, d: usize) -> &[f64] {
        let nc = self.n_cols();
        &self.values[d * nc..(d + 1) * nc]
    }

    pub fn column(&self, e: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|d| self.get(d, e)).collect()
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &ParamMatrix) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn relabel(mut self, kind: ParamKind) -> Self {
        self.kind = kind;
        self
    }

    pub(crate) fn require(&self, kind: ParamKind) -> Result<(), ParamError> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(ParamError::KindMismatch {
                expected: kind,
                got: self.kind,
            })
        }
    }

    /// Applies `f` to each row (a vector over covariate cells).
    pub(crate) fn map_rows(
        mut self,
        f: impl Fn(&mut [f64]) -> Result<(), LatticeError>,
    ) -> Result<Self, ParamError> {
        let nc = self.n_cols();
        for row in self.values.chunks_exact_mut(nc) {
            f(row)?;
        }
        Ok(self)
    }

    /// Applies `f` to each column (a vector over response subsets).
    pub(crate) fn map_cols(
        mut self,
        f: impl Fn(&mut [f64]) -> Result<(), LatticeError>,
    ) -> Result<Self, ParamError> {
        let (nr, nc) = (self.n_rows(), self.n_cols());
        let mut buf = vec![0.0; nr];
        for e in 0..nc {
            for d in 0..nr {
                buf[d] = self.values[d * nc + e];
            }
            f(&mut buf)?;
            for d in 0..nr {
                self.values[d * nc + e] = buf[d];
            }
        }
        Ok(self)
    }

    /// Checks the invariants attached to this matrix's kind.
    pub fn validate(&self) -> Result<(), ParamError> {
        let (nr, nc) = (self.n_rows(), self.n_cols());
        let fail = |row, col, reason| ParamError::Validation {
            kind: self.kind,
            row,
            col,
            reason,
        };
        match self.kind {
            ParamKind::Pi => {
                for e in 0..nc {
                    let mut sum = 0.0;
                    for d in 0..nr {
                        let v = self.get(d, e);
                        if !(v > 0.0) {
                            return Err(fail(d, e, "cell probability not strictly positive"));
                        }
                        sum += v;
                    }
                    if (sum - 1.0).abs() > VALIDITY_TOL {
                        return Err(fail(0, e, "column does not sum to one"));
                    }
                }
            }
            ParamKind::Mu => {
                for e in 0..nc {
                    if (self.get(0, e) - 1.0).abs() > VALIDITY_TOL {
                        return Err(fail(0, e, "row of the empty set must be one"));
                    }
                    for d in 1..nr {
                        let v = self.get(d, e);
                        if !(v > 0.0 && v <= 1.0 + VALIDITY_TOL) {
                            return Err(fail(d, e, "mean parameter outside (0, 1]"));
                        }
                        // monotone: dropping one element can only increase μ
                        for i in 0..self.rows.ground_size() {
                            if d >> i & 1 == 1 && v > self.get(d & !(1 << i), e) + VALIDITY_TOL {
                                return Err(fail(d, e, "mean parameters not monotone"));
                            }
                        }
                    }
                }
            }
            ParamKind::LogMu
            | ParamKind::Gamma
            | ParamKind::BetaMu
            | ParamKind::BetaGamma
            | ParamKind::RefB => {
                for e in 0..nc {
                    if self.get(0, e).abs() > VALIDITY_TOL {
                        return Err(fail(0, e, "row of the empty set must be zero"));
                    }
                }
            }
        }
        Ok(())
    }
}

fn check_positive(m: &ParamMatrix) -> Result<(), ParamError> {
    let nc = m.n_cols();
    match m.values.iter().position(|v| !(*v > 0.0)) {
        None => Ok(()),
        Some(i) => Err(ParamError::Boundary {
            row: i / nc,
            col: i % nc,
            value: m.values[i],
        }),
    }
}

/// `μ = Z_V π`.
pub fn mu_from_pi(pi: &ParamMatrix) -> Result<ParamMatrix, ParamError> {
    pi.require(ParamKind::Pi)?;
    pi.validate()?;
    let mut mu = pi
        .clone()
        .relabel(ParamKind::Mu)
        .map_cols(lattice::superset_zeta_in_place)?;
    // the column sum is one up to rounding; fix it exactly
    for e in 0..mu.n_cols() {
        mu.set(0, e, 1.0);
    }
    Ok(mu)
}

/// `π = M_V μ`; fails with [`ParamError::Boundary`] at the first
/// non-positive cell.
pub fn pi_from_mu(mu: &ParamMatrix) -> Result<ParamMatrix, ParamError> {
    mu.require(ParamKind::Mu)?;
    for e in 0..mu.n_cols() {
        if (mu.get(0, e) - 1.0).abs() > VALIDITY_TOL {
            return Err(ParamError::Validation {
                kind: ParamKind::Mu,
                row: 0,
                col: e,
                reason: "row of the empty set must be one",
            });
        }
    }
    let pi = mu
        .clone()
        .relabel(ParamKind::Pi)
        .map_cols(lattice::superset_mobius_in_place)?;
    check_positive(&pi)?;
    Ok(pi)
}

fn log_of(mu: &ParamMatrix) -> Result<ParamMatrix, ParamError> {
    let nc = mu.n_cols();
    if let Some(i) = mu.values.iter().position(|v| !(*v > 0.0)) {
        return Err(ParamError::Domain {
            row: i / nc,
            col: i % nc,
            value: mu.values[i],
        });
    }
    let mut out = mu.clone().relabel(ParamKind::LogMu);
    out.values.iter_mut().for_each(|v| *v = v.ln());
    Ok(out)
}

/// `log μ`, elementwise.
pub fn log_mu_from_mu(mu: &ParamMatrix) -> Result<ParamMatrix, ParamError> {
    mu.require(ParamKind::Mu)?;
    log_of(mu)
}

/// `μ = exp(θ)` for the LM link.
pub fn mu_from_log_mu(log_mu: &ParamMatrix) -> Result<ParamMatrix, ParamError> {
    log_mu.require(ParamKind::LogMu)?;
    let mut out = log_mu.clone().relabel(ParamKind::Mu);
    out.values.iter_mut().for_each(|v| *v = v.exp());
    Ok(out)
}

/// `γ = M_Vᵀ log μ`.
pub fn gamma_from_mu(mu: &ParamMatrix) -> Result<ParamMatrix, ParamError> {
    mu.require(ParamKind::Mu)?;
    log_of(mu)?
        .relabel(ParamKind::Gamma)
        .map_cols(lattice::mobius_in_place)
}

/// `μ = exp(Z_Vᵀ γ)`.
pub fn mu_from_gamma(gamma: &ParamMatrix) -> Result<ParamMatrix, ParamError> {
    gamma.require(ParamKind::Gamma)?;
    let mut out = gamma
        .clone()
        .relabel(ParamKind::Mu)
        .map_cols(lattice::zeta_in_place)?;
    out.values.iter_mut().for_each(|v| *v = v.exp());
    Ok(out)
}

/// `β = θ M_U` for a link matrix `θ` (`log μ` or `γ`).
pub fn coeffs_from_link(theta: &ParamMatrix) -> Result<ParamMatrix, ParamError> {
    let kind = match theta.kind {
        ParamKind::LogMu => ParamKind::BetaMu,
        ParamKind::Gamma => ParamKind::BetaGamma,
        other => {
            return Err(ParamError::KindMismatch {
                expected: ParamKind::Gamma,
                got: other,
            })
        }
    };
    theta
        .clone()
        .relabel(kind)
        .map_rows(lattice::mobius_in_place)
}

/// `θ = β Z_U`, the inverse of [`coeffs_from_link`].
pub fn link_from_coeffs(beta: &ParamMatrix) -> Result<ParamMatrix, ParamError> {
    let kind = match beta.kind {
        ParamKind::BetaMu => ParamKind::LogMu,
        ParamKind::BetaGamma => ParamKind::Gamma,
        other => {
            return Err(ParamError::KindMismatch {
                expected: ParamKind::BetaGamma,
                got: other,
            })
        }
    };
    beta.clone()
        .relabel(kind)
        .map_rows(lattice::zeta_in_place)
}

/// `β^γ = M_Vᵀ β^μ`.
pub fn beta_gamma_from_beta_mu(beta_mu: &ParamMatrix) -> Result<ParamMatrix, ParamError> {
    beta_mu.require(ParamKind::BetaMu)?;
    beta_mu
        .clone()
        .relabel(ParamKind::BetaGamma)
        .map_cols(lattice::mobius_in_place)
}

/// `β^μ = Z_Vᵀ β^γ`, i.e. `β^μ_D(E) = Σ_{D' ⊆ D} β^γ_{D'}(E)`.
pub fn beta_mu_from_beta_gamma(beta_gamma: &ParamMatrix) -> Result<ParamMatrix, ParamError> {
    beta_gamma.require(ParamKind::BetaGamma)?;
    beta_gamma
        .clone()
        .relabel(ParamKind::BetaMu)
        .map_cols(lattice::zeta_in_place)
}

/// `μ` implied by regression coefficients under either link.
pub fn mu_from_beta(beta: &ParamMatrix) -> Result<ParamMatrix, ParamError> {
    let theta = link_from_coeffs(beta)?;
    match theta.kind {
        ParamKind::Gamma => mu_from_gamma(&theta),
        _ => mu_from_log_mu(&theta),
    }
}

/// Closed-form inverse map from coefficients to cell probabilities.
pub fn pi_from_beta(beta: &ParamMatrix, link: Link) -> Result<ParamMatrix, ParamError> {
    beta.require(link.coeff_kind())?;
    beta.validate()?;
    let mut beta = beta.clone();
    for e in 0..beta.n_cols() {
        beta.set(0, e, 0.0);
    }
    pi_from_mu(&mu_from_beta(&beta)?)
}

/// Regression coefficients of a (valid) `π` under the given link.
pub fn beta_from_pi(pi: &ParamMatrix, link: Link) -> Result<ParamMatrix, ParamError> {
    let mu = mu_from_pi(pi)?;
    let theta = match link {
        Link::Lm => log_mu_from_mu(&mu)?,
        Link::Lml => gamma_from_mu(&mu)?,
    };
    let mut beta = coeffs_from_link(&theta)?;
    // exact structural zeros: log μ_∅ = 0 up to rounding
    for e in 0..beta.n_cols() {
        beta.set(0, e, 0.0);
    }
    Ok(beta)
}
