use thiserror::Error;

use crate::lattice::SubsetLattice;
use crate::params::{ParamKind, ParamMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("count table expects {expected} cells, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("response subset {0:#b} is not a valid margin")]
    InvalidMargin(usize),
    #[error("covariate cell {0:#b} has no observations")]
    MissingCovariateCell(usize),
    #[error("empty cell (D={row:#b}, E={col:#b}) in a saturated fit; enable smoothing")]
    EmptyCell { row: usize, col: usize },
}

/// Observed counts over the `2^p × 2^q` joint cells.
///
/// Entry `(y, x)` counts the observations with response pattern `y` (the set
/// of responses equal to 1) in covariate cell `x`. Each column is an
/// independent multinomial sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    responses: SubsetLattice,
    covariates: SubsetLattice,
    counts: Vec<u64>,
}

impl CountTable {
    pub fn new(
        responses: SubsetLattice,
        covariates: SubsetLattice,
        counts: Vec<u64>,
    ) -> Result<Self, DataError> {
        let expected = responses.size() * covariates.size();
        if counts.len() != expected {
            return Err(DataError::Shape {
                expected,
                got: counts.len(),
            });
        }
        Ok(Self {
            responses,
            covariates,
            counts,
        })
    }

    pub fn zeros(responses: SubsetLattice, covariates: SubsetLattice) -> Self {
        let n = responses.size() * covariates.size();
        Self {
            responses,
            covariates,
            counts: vec![0; n],
        }
    }

    pub fn responses(&self) -> &SubsetLattice {
        &self.responses
    }

    pub fn covariates(&self) -> &SubsetLattice {
        &self.covariates
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n_rows(&self) -> usize {
        self.responses.size()
    }

    pub fn n_cols(&self) -> usize {
        self.covariates.size()
    }

    pub fn get(&self, y: usize, x: usize) -> u64 {
        self.counts[y * self.n_cols() + x]
    }

    pub fn add(&mut self, y: usize, x: usize, n: u64) {
        let nc = self.n_cols();
        self.counts[y * nc + x] += n;
    }

    pub fn column_totals(&self) -> Vec<u64> {
        let nc = self.n_cols();
        let mut totals = vec![0; nc];
        for row in self.counts.chunks_exact(nc) {
            for (t, c) in totals.iter_mut().zip(row) {
                *t += c;
            }
        }
        totals
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Covariate cells with no observations.
    pub fn missing_columns(&self) -> Vec<usize> {
        self.column_totals()
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == 0)
            .map(|(e, _)| e)
            .collect()
    }

    /// Number of observations with every response in `d` equal to 1,
    /// regardless of the other responses, summed over covariate cells.
    pub fn count_all_present(&self, d: usize) -> u64 {
        (0..self.n_rows())
            .filter(|y| y & d == d)
            .map(|y| (0..self.n_cols()).map(|x| self.get(y, x)).sum::<u64>())
            .sum()
    }

    /// Marginal table of the responses in `d` (a nonempty response mask).
    /// The marginal lattice keeps the labels of `d` in ground order.
    pub fn marginal(&self, d: usize) -> Result<CountTable, DataError> {
        if d == 0 || d > self.responses.full() {
            return Err(DataError::InvalidMargin(d));
        }
        let positions: Vec<usize> = (0..self.responses.ground_size())
            .filter(|i| d >> i & 1 == 1)
            .collect();
        let labels: Vec<&str> = positions
            .iter()
            .map(|&i| self.responses.labels()[i].as_str())
            .collect();
        let lattice = SubsetLattice::new(&labels).expect("labels of a valid lattice");
        let mut out = CountTable::zeros(lattice, self.covariates.clone());
        for y in 0..self.n_rows() {
            let my = compress(y, &positions);
            for x in 0..self.n_cols() {
                out.add(my, x, self.get(y, x));
            }
        }
        Ok(out)
    }

    /// Empirical cell proportions, optionally after adding `smooth` to every
    /// cell. Fails on an empty covariate cell, or on an empty response cell
    /// when no smoothing is applied.
    pub fn empirical_pi(&self, smooth: Option<f64>) -> Result<ParamMatrix, DataError> {
        let eps = smooth.unwrap_or(0.0);
        let totals = self.column_totals();
        let nr = self.n_rows() as f64;
        if let Some(e) = totals.iter().position(|t| *t == 0) {
            if eps <= 0.0 {
                return Err(DataError::MissingCovariateCell(e));
            }
        }
        if eps <= 0.0 {
            if let Some(i) = self.counts.iter().position(|c| *c == 0) {
                return Err(DataError::EmptyCell {
                    row: i / self.n_cols(),
                    col: i % self.n_cols(),
                });
            }
        }
        Ok(ParamMatrix::from_fn(
            ParamKind::Pi,
            self.responses.clone(),
            self.covariates.clone(),
            |y, x| (self.get(y, x) as f64 + eps) / (totals[x] as f64 + eps * nr),
        ))
    }
}

/// Packs the bits of `mask` at `positions` into the low bits.
pub(crate) fn compress(mask: usize, positions: &[usize]) -> usize {
    positions
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &i)| acc | ((mask >> i & 1) << k))
}

/// Inverse of [`compress`].
pub(crate) fn expand(mask: usize, positions: &[usize]) -> usize {
    positions
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &i)| acc | ((mask >> k & 1) << i))
}
