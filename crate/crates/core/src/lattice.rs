//! Subsets of a small ground set, encoded as bitmasks, and the zeta/Möbius
//! maps of the subset lattice.
//!
//! Subset `k` of a ground set with `n` elements is the bitmask whose bit `i`
//! is set when element `i` belongs to the subset; mask `0` is the empty set.
//! All vectors indexed by subsets use increasing-mask order.
//!
//! Two families of transforms are provided, both in `O(n 2^n)`:
//!
//! * subset direction: `zeta_transform` computes `y(E) = Σ_{E' ⊆ E} x(E')`
//!   (right multiplication of a row vector by the zeta matrix `Z`), and
//!   `mobius_transform` is its inverse;
//! * superset direction: `superset_zeta_transform` computes
//!   `y(D) = Σ_{H ⊇ D} x(H)` (left multiplication of a column vector by `Z`),
//!   and `superset_mobius_transform` is its inverse.

use std::fmt;

use thiserror::Error;

/// Largest supported ground set.
pub const MAX_GROUND_SIZE: usize = 20;

/// Largest ground set for which dense zeta/Möbius matrices are materialized.
pub const MAX_DENSE_SIZE: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("ground set size {0} outside 1..={MAX_GROUND_SIZE}")]
    GroundSize(usize),
    #[error("duplicate element label `{0}`")]
    DuplicateLabel(String),
    #[error("subset mask {mask} out of range for a ground set of size {ground_size}")]
    MaskRange { mask: usize, ground_size: usize },
    #[error("vector length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("dense lattice matrices are limited to ground sets of size {MAX_DENSE_SIZE}, got {0}")]
    TooLargeForDense(usize),
    #[error("unknown element `{0}`")]
    UnknownLabel(String),
    #[error("malformed subset `{0}`: expected brace notation like {{a,b}}")]
    Malformed(String),
}

/// The power set of a labelled ground set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsetLattice {
    labels: Vec<String>,
}

impl SubsetLattice {
    pub fn new<S: AsRef<str>>(labels: &[S]) -> Result<Self, LatticeError> {
        let labels: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
        if labels.is_empty() || labels.len() > MAX_GROUND_SIZE {
            return Err(LatticeError::GroundSize(labels.len()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(LatticeError::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self { labels })
    }

    /// A lattice whose elements are labelled `1..=n`.
    pub fn numbered(n: usize) -> Result<Self, LatticeError> {
        let labels: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
        Self::new(&labels)
    }

    pub fn ground_size(&self) -> usize {
        self.labels.len()
    }

    /// Number of subsets, `2^ground_size`.
    pub fn size(&self) -> usize {
        1 << self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Mask of the full ground set.
    pub fn full(&self) -> usize {
        self.size() - 1
    }

    pub fn subset(&self, mask: usize) -> Result<Subset, LatticeError> {
        if mask >= self.size() {
            return Err(LatticeError::MaskRange {
                mask,
                ground_size: self.ground_size(),
            });
        }
        Ok(Subset { mask })
    }

    /// Index of the element with the given label.
    pub fn index_of(&self, label: &str) -> Result<usize, LatticeError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| LatticeError::UnknownLabel(label.to_string()))
    }

    /// Renders a subset in brace notation, e.g. `{b,c}`; the empty set is `{}`.
    pub fn format(&self, mask: usize) -> String {
        let names: Vec<&str> = (0..self.ground_size())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| self.labels[i].as_str())
            .collect();
        format!("{{{}}}", names.join(","))
    }

    /// Parses brace notation. Element order inside the braces is irrelevant.
    pub fn parse(&self, text: &str) -> Result<usize, LatticeError> {
        let t = text.trim();
        let inner = t
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .ok_or_else(|| LatticeError::Malformed(t.to_string()))?;
        let mut mask = 0usize;
        for name in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            mask |= 1 << self.index_of(name)?;
        }
        Ok(mask)
    }

    /// All masks ordered by cardinality, then lexicographically by element
    /// position. This is the layout used for printed coefficient tables.
    pub fn display_order(&self) -> Vec<usize> {
        let n = self.ground_size();
        let mut masks: Vec<usize> = (0..self.size()).collect();
        let key = |m: &usize| {
            let elems: Vec<usize> = (0..n).filter(|i| m >> i & 1 == 1).collect();
            (elems.len(), elems)
        };
        masks.sort_by_key(key);
        masks
    }

    /// Dense zeta matrix: entry `(E, H)` is 1 iff `E ⊆ H`.
    pub fn zeta_matrix(&self) -> Result<LatticeMatrix, LatticeError> {
        self.dense(|e, h| if e & !h == 0 { 1.0 } else { 0.0 })
    }

    /// Dense Möbius matrix: entry `(E, H)` is `(-1)^{|H \ E|}` iff `E ⊆ H`.
    pub fn mobius_matrix(&self) -> Result<LatticeMatrix, LatticeError> {
        self.dense(|e, h| {
            if e & !h != 0 {
                0.0
            } else if (h & !e).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        })
    }

    fn dense(&self, entry: impl Fn(usize, usize) -> f64) -> Result<LatticeMatrix, LatticeError> {
        if self.ground_size() > MAX_DENSE_SIZE {
            return Err(LatticeError::TooLargeForDense(self.ground_size()));
        }
        let n = self.size();
        let mut entries = vec![0.0; n * n];
        for e in 0..n {
            for h in 0..n {
                entries[e * n + h] = entry(e, h);
            }
        }
        Ok(LatticeMatrix { size: n, entries })
    }
}

/// A subset of a ground set, as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subset {
    mask: usize,
}

impl Subset {
    pub fn mask(self) -> usize {
        self.mask
    }

    pub fn cardinality(self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn contains(self, element: usize) -> bool {
        element < usize::BITS as usize && self.mask >> element & 1 == 1
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.mask & !other.mask == 0
    }

    /// Subsets of this set in increasing-mask order.
    pub fn subsets(self) -> impl Iterator<Item = Subset> {
        subsets_of(self.mask).map(|mask| Subset { mask })
    }

    /// Supersets of this set within a ground set of `ground_size` elements,
    /// in increasing-mask order.
    pub fn supersets(self, ground_size: usize) -> impl Iterator<Item = Subset> {
        let mask = self.mask;
        (mask..1usize << ground_size)
            .filter(move |h| h & mask == mask)
            .map(|mask| Subset { mask })
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#b}", self.mask)
    }
}

/// All submasks of `mask` in increasing order.
pub fn subsets_of(mask: usize) -> impl Iterator<Item = usize> {
    let mut next = Some(0usize);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == mask {
            None
        } else {
            // next submask above `cur`
            Some(((cur | !mask).wrapping_add(1)) & mask)
        };
        Some(cur)
    })
}

/// `(-1)^{|mask|}`.
pub fn parity_sign(mask: usize) -> f64 {
    if mask.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// A dense square matrix indexed by pairs of subsets.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl LatticeMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.size + col]
    }

    pub fn identity(size: usize) -> Self {
        let mut entries = vec![0.0; size * size];
        for i in 0..size {
            entries[i * size + i] = 1.0;
        }
        Self { size, entries }
    }

    pub fn matmul(&self, other: &LatticeMatrix) -> LatticeMatrix {
        assert_eq!(self.size, other.size, "lattice matrix size mismatch");
        let n = self.size;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        LatticeMatrix { size: n, entries }
    }

    /// Row vector times matrix, `x M`.
    pub fn left_apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.size);
        let n = self.size;
        let mut out = vec![0.0; n];
        for (i, xi) in x.iter().enumerate() {
            for (j, o) in out.iter_mut().enumerate() {
                *o += xi * self.entries[i * n + j];
            }
        }
        out
    }

    /// Matrix times column vector, `M x`.
    pub fn right_apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.size);
        let n = self.size;
        (0..n)
            .map(|i| (0..n).map(|j| self.entries[i * n + j] * x[j]).sum())
            .collect()
    }

    pub fn transpose(&self) -> LatticeMatrix {
        let n = self.size;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j];
            }
        }
        LatticeMatrix { size: n, entries }
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

fn check_len(len: usize) -> Result<(), LatticeError> {
    if len == 0 || !len.is_power_of_two() {
        Err(LatticeError::NotPowerOfTwo(len))
    } else {
        Ok(())
    }
}

/// Butterfly over every bit of the index: `f(lower, upper)` where `upper`
/// differs from `lower` only by the set bit.
fn butterfly(xs: &mut [f64], f: impl Fn(&mut f64, &mut f64)) {
    let n = xs.len();
    let mut half = 1;
    while half < n {
        for block in xs.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (l, h) in lo.iter_mut().zip(hi) {
                f(l, h);
            }
        }
        half *= 2;
    }
}

/// In-place subset sums: `x(E) <- Σ_{E' ⊆ E} x(E')`.
pub fn zeta_in_place(xs: &mut [f64]) -> Result<(), LatticeError> {
    check_len(xs.len())?;
    butterfly(xs, |l, h| *h += *l);
    Ok(())
}

/// Inverse of [`zeta_in_place`].
pub fn mobius_in_place(xs: &mut [f64]) -> Result<(), LatticeError> {
    check_len(xs.len())?;
    butterfly(xs, |l, h| *h -= *l);
    Ok(())
}

/// In-place superset sums: `x(D) <- Σ_{H ⊇ D} x(H)`.
pub fn superset_zeta_in_place(xs: &mut [f64]) -> Result<(), LatticeError> {
    check_len(xs.len())?;
    butterfly(xs, |l, h| *l += *h);
    Ok(())
}

/// Inverse of [`superset_zeta_in_place`].
pub fn superset_mobius_in_place(xs: &mut [f64]) -> Result<(), LatticeError> {
    check_len(xs.len())?;
    butterfly(xs, |l, h| *l -= *h);
    Ok(())
}

/// `x Z`, computed by the fast subset-sum transform.
pub fn zeta_transform(xs: &[f64]) -> Result<Vec<f64>, LatticeError> {
    let mut out = xs.to_vec();
    zeta_in_place(&mut out)?;
    Ok(out)
}

/// `x M`, the inverse of [`zeta_transform`].
pub fn mobius_transform(xs: &[f64]) -> Result<Vec<f64>, LatticeError> {
    let mut out = xs.to_vec();
    mobius_in_place(&mut out)?;
    Ok(out)
}

/// `Z x`, computed by the fast superset-sum transform.
pub fn superset_zeta_transform(xs: &[f64]) -> Result<Vec<f64>, LatticeError> {
    let mut out = xs.to_vec();
    superset_zeta_in_place(&mut out)?;
    Ok(out)
}

/// `M x`, the inverse of [`superset_zeta_transform`].
pub fn superset_mobius_transform(xs: &[f64]) -> Result<Vec<f64>, LatticeError> {
    let mut out = xs.to_vec();
    superset_mobius_in_place(&mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice(labels: &[&str]) -> SubsetLattice {
        SubsetLattice::new(labels).unwrap()
    }

    #[test]
    fn subset_handles() {
        let l = lattice(&["b", "c", "d"]);
        let empty = l.subset(0).unwrap();
        assert_eq!(empty.cardinality(), 0);
        let bd = l.subset(0b101).unwrap();
        assert_eq!(bd.cardinality(), 2);
        assert!(bd.contains(0) && !bd.contains(1) && bd.contains(2));
        assert_eq!(l.format(bd.mask()), "{b,d}");
        let subs: Vec<usize> = l.subset(0b011).unwrap().subsets().map(Subset::mask).collect();
        assert_eq!(subs, vec![0b000, 0b001, 0b010, 0b011]);
        let sups: Vec<usize> = l.subset(0b001).unwrap().supersets(3).map(Subset::mask).collect();
        assert_eq!(sups, vec![0b001, 0b011, 0b101, 0b111]);
    }

    #[test]
    fn mask_out_of_range() {
        let l = lattice(&["b", "c"]);
        assert!(matches!(l.subset(4), Err(LatticeError::MaskRange { .. })));
    }

    #[test]
    fn ground_size_limits() {
        assert!(SubsetLattice::new::<&str>(&[]).is_err());
        assert!(SubsetLattice::numbered(21).is_err());
        assert!(SubsetLattice::numbered(20).is_ok());
        assert!(matches!(
            SubsetLattice::new(&["a", "a"]),
            Err(LatticeError::DuplicateLabel(_))
        ));
    }

    #[test]
    fn brace_notation_round_trip() {
        let l = lattice(&["b", "c", "d", "r"]);
        for m in 0..16 {
            assert_eq!(l.parse(&l.format(m)).unwrap(), m);
        }
        assert_eq!(l.parse(" { r , b } ").unwrap(), 0b1001);
        assert!(l.parse("b,c").is_err());
        assert!(l.parse("{x}").is_err());
    }

    #[test]
    fn display_order_is_cardinality_then_lexicographic() {
        let l = lattice(&["b", "c", "d", "r"]);
        let names: Vec<String> = l.display_order().into_iter().map(|m| l.format(m)).collect();
        assert_eq!(
            names,
            [
                "{}", "{b}", "{c}", "{d}", "{r}", "{b,c}", "{b,d}", "{b,r}", "{c,d}", "{c,r}",
                "{d,r}", "{b,c,d}", "{b,c,r}", "{b,d,r}", "{c,d,r}", "{b,c,d,r}"
            ]
        );
    }

    #[test]
    fn dense_matrices_q1() {
        let l = SubsetLattice::numbered(1).unwrap();
        assert_eq!(l.zeta_matrix().unwrap().entries(), &[1.0, 1.0, 0.0, 1.0]);
        assert_eq!(l.mobius_matrix().unwrap().entries(), &[1.0, -1.0, 0.0, 1.0]);
    }

    #[test]
    fn dense_inverse_q2() {
        let l = SubsetLattice::numbered(2).unwrap();
        let prod = l.zeta_matrix().unwrap().matmul(&l.mobius_matrix().unwrap());
        assert_eq!(prod, LatticeMatrix::identity(4));
    }

    #[test]
    fn mobius_sign_rule_q3() {
        // elements h (bit 0), a (bit 1), x (bit 2)
        let l = lattice(&["h", "a", "x"]);
        let m = l.mobius_matrix().unwrap();
        assert_eq!(m.get(0, 0b011), 1.0);
        assert_eq!(m.get(0b001, 0b011), -1.0);
        assert_eq!(m.get(0b100, 0b011), 0.0);
    }

    #[test]
    fn dense_refused_above_cap() {
        let l = SubsetLattice::numbered(13).unwrap();
        assert!(matches!(l.zeta_matrix(), Err(LatticeError::TooLargeForDense(13))));
    }

    #[test]
    fn zeta_of_four_vector() {
        let (a, b, c, d) = (1.5, -2.0, 0.25, 7.0);
        assert_eq!(
            zeta_transform(&[a, b, c, d]).unwrap(),
            vec![a, a + b, a + c, a + b + c + d]
        );
    }

    #[test]
    fn zeta_of_empty_indicator_is_all_ones() {
        let mut x = vec![0.0; 32];
        x[0] = 1.0;
        assert_eq!(zeta_transform(&x).unwrap(), vec![1.0; 32]);
    }

    #[test]
    fn superset_directions() {
        // p = 2 cells (∅,{1},{2},{12}) -> superset sums
        let pi = [0.4, 0.2, 0.3, 0.1];
        let mu = superset_zeta_transform(&pi).unwrap();
        let expect = [1.0, 0.3, 0.4, 0.1];
        for (m, e) in mu.iter().zip(expect) {
            assert!((m - e).abs() < 1e-15);
        }
        let back = superset_mobius_transform(&mu).unwrap();
        for (b, p) in back.iter().zip(pi) {
            assert!((b - p).abs() < 1e-15);
        }
    }

    #[test]
    fn shape_errors() {
        assert_eq!(zeta_transform(&[1.0, 2.0, 3.0]), Err(LatticeError::NotPowerOfTwo(3)));
        assert_eq!(mobius_transform(&[]), Err(LatticeError::NotPowerOfTwo(0)));
    }

    #[test]
    fn submask_enumeration() {
        let subs: Vec<usize> = subsets_of(0b1010).collect();
        assert_eq!(subs, vec![0b0000, 0b0010, 0b1000, 0b1010]);
        assert_eq!(subsets_of(0).collect::<Vec<_>>(), vec![0]);
    }
}
