use std::collections::BTreeSet;

use crate::lattice::SubsetLattice;
use crate::params::Link;

use super::FitError;

/// A link plus the set of `(D, E)` coefficients constrained to zero.
///
/// Row `∅` is structurally zero under both links and never appears in the
/// zero set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModelSpec {
    link: Link,
    zero_set: BTreeSet<(usize, usize)>,
}

/// Canonical scan order of coefficients: `(|D|, D, |E|, E)`.
pub fn coefficient_order(d: usize, e: usize) -> (u32, usize, u32, usize) {
    (d.count_ones(), d, e.count_ones(), e)
}

impl ModelSpec {
    pub fn saturated(link: Link) -> Self {
        Self {
            link,
            zero_set: BTreeSet::new(),
        }
    }

    pub fn new(link: Link, zeros: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, FitError> {
        let zero_set: BTreeSet<_> = zeros.into_iter().collect();
        if zero_set.iter().any(|(d, _)| *d == 0) {
            return Err(FitError::InvalidSpec(
                "the empty response set is structurally zero and cannot be constrained".into(),
            ));
        }
        Ok(Self { link, zero_set })
    }

    pub fn link(&self) -> Link {
        self.link
    }

    pub fn zero_set(&self) -> &BTreeSet<(usize, usize)> {
        &self.zero_set
    }

    pub fn is_zero(&self, d: usize, e: usize) -> bool {
        d == 0 || self.zero_set.contains(&(d, e))
    }

    /// Number of constrained coefficients, the residual degrees of freedom.
    pub fn df(&self) -> usize {
        self.zero_set.len()
    }

    pub fn is_saturated(&self) -> bool {
        self.zero_set.is_empty()
    }

    pub fn with_link(&self, link: Link) -> Self {
        Self {
            link,
            zero_set: self.zero_set.clone(),
        }
    }

    /// Adds zero constraints.
    pub fn with_zeros(&self, more: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, FitError> {
        Self::new(self.link, self.zero_set.iter().copied().chain(more))
    }

    /// Checks that every constrained pair indexes the given lattices.
    pub fn check_dims(&self, rows: &SubsetLattice, cols: &SubsetLattice) -> Result<(), FitError> {
        match self
            .zero_set
            .iter()
            .find(|(d, e)| *d >= rows.size() || *e >= cols.size())
        {
            Some((d, e)) => Err(FitError::InvalidSpec(format!(
                "constraint ({d:#b}, {e:#b}) outside a {}x{} coefficient matrix",
                rows.size(),
                cols.size()
            ))),
            None => Ok(()),
        }
    }

    /// Unconstrained coefficients in canonical order.
    pub fn free_coefficients(&self, rows: &SubsetLattice, cols: &SubsetLattice) -> Vec<(usize, usize)> {
        let mut free: Vec<(usize, usize)> = (1..rows.size())
            .flat_map(|d| (0..cols.size()).map(move |e| (d, e)))
            .filter(|(d, e)| !self.zero_set.contains(&(*d, *e)))
            .collect();
        free.sort_by_key(|&(d, e)| coefficient_order(d, e));
        free
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_coefficients_ordering_and_df() {
        let rows = SubsetLattice::new(&["b", "c"]).unwrap();
        let cols = SubsetLattice::new(&["h"]).unwrap();
        let spec = ModelSpec::new(Link::Lml, [(0b11, 1)]).unwrap();
        assert_eq!(spec.df(), 1);
        assert_eq!(
            spec.free_coefficients(&rows, &cols),
            vec![(0b01, 0), (0b01, 1), (0b10, 0), (0b10, 1), (0b11, 0)]
        );
        assert!(spec.is_zero(0, 1));
        assert!(spec.is_zero(3, 1));
        assert!(!spec.is_zero(3, 0));
    }

    #[test]
    fn rejects_empty_row_and_out_of_range() {
        assert!(ModelSpec::new(Link::Lm, [(0, 0)]).is_err());
        let spec = ModelSpec::new(Link::Lm, [(8, 0)]).unwrap();
        let rows = SubsetLattice::numbered(2).unwrap();
        let cols = SubsetLattice::numbered(1).unwrap();
        assert!(spec.check_dims(&rows, &cols).is_err());
    }
}
